"""
원천 영역 모델 정의
직사각형 합집합 또는 환형 영역과 셀 분할 해상도
"""
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator


class Rectangle(BaseModel):
    """축 정렬 직사각형 [x_min, x_max] × [y_min, y_max] 과 셀 개수"""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int = Field(default=4, ge=1, description="x 방향 셀 개수")
    ny: int = Field(default=4, ge=1, description="y 방향 셀 개수")

    @model_validator(mode="after")
    def _check_bounds(self) -> "Rectangle":
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError(f"직사각형 범위가 비어 있습니다: {self.model_dump()}")
        return self

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def corners(self) -> List[Tuple[float, float]]:
        return [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        ]


class RectangleRegion(BaseModel):
    """서로 겹치지 않는 직사각형들의 합집합"""

    kind: Literal["rectangles"] = "rectangles"
    rectangles: List[Rectangle] = Field(default_factory=list, description="구성 직사각형")

    @property
    def area(self) -> float:
        return float(sum(rect.area for rect in self.rectangles))

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        inside = np.zeros(pts.shape[0], dtype=bool)
        for rect in self.rectangles:
            inside |= (
                (pts[:, 0] >= rect.x_min)
                & (pts[:, 0] <= rect.x_max)
                & (pts[:, 1] >= rect.y_min)
                & (pts[:, 1] <= rect.y_max)
            )
        return inside

    def outline_points(self, per_edge: int = 16) -> np.ndarray:
        """포함 관계 검사용 경계 표본점"""
        samples = []
        s = np.linspace(0.0, 1.0, per_edge, endpoint=False)
        for rect in self.rectangles:
            corners = np.asarray(rect.corners())
            for k in range(4):
                a, b = corners[k], corners[(k + 1) % 4]
                samples.append(a + s[:, None] * (b - a))
        return np.vstack(samples) if samples else np.zeros((0, 2))


class AnnulusRegion(BaseModel):
    """환형 영역 r_inner ≤ |y − center| ≤ r_outer 의 극좌표 셀 분할"""

    kind: Literal["annulus"] = "annulus"
    center: Tuple[float, float] = (0.0, 0.0)
    r_inner: float = Field(..., gt=0.0, description="안쪽 반지름")
    r_outer: float = Field(..., description="바깥 반지름")
    n_r: int = Field(default=6, ge=1, description="반경 방향 셀 개수")
    n_theta: int = Field(default=48, ge=3, description="각 방향 셀 개수")

    @model_validator(mode="after")
    def _check_radii(self) -> "AnnulusRegion":
        if not self.r_outer > self.r_inner:
            raise ValueError(f"r_outer({self.r_outer}) > r_inner({self.r_inner}) 이어야 합니다")
        return self

    @property
    def area(self) -> float:
        return float(np.pi * (self.r_outer**2 - self.r_inner**2))

    def contains(self, points: np.ndarray) -> np.ndarray:
        dist = np.linalg.norm(np.atleast_2d(points) - np.asarray(self.center), axis=1)
        return (dist >= self.r_inner) & (dist <= self.r_outer)  # type: ignore[no-any-return]

    def outline_points(self, per_edge: int = 64) -> np.ndarray:
        t = 2.0 * np.pi * np.arange(per_edge) / per_edge
        ring = np.column_stack([np.cos(t), np.sin(t)])
        c = np.asarray(self.center)
        return np.vstack([c + self.r_inner * ring, c + self.r_outer * ring])


RegionSpec = Annotated[Union[RectangleRegion, AnnulusRegion], Field(discriminator="kind")]


def region_with_resolution(
    region: Union[RectangleRegion, AnnulusRegion], n_per_axis: Optional[int]
) -> Union[RectangleRegion, AnnulusRegion]:
    """n_per_axis가 주어지면 모든 직사각형을 n×n 셀로 재분할"""
    if n_per_axis is None or isinstance(region, AnnulusRegion):
        return region
    return RectangleRegion(
        rectangles=[rect.model_copy(update={"nx": n_per_axis, "ny": n_per_axis}) for rect in region.rectangles]
    )
