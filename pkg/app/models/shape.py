"""
형상 모델 정의
별모양(star-shaped) 장애물의 삼각다항식 매개화와 반경 섭동
"""
import hashlib
import json
from typing import List, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import get_settings

# 양수성 검사 격자 크기
POSITIVITY_CHECK_POINTS = 512


def evaluate_series(
    cos_coeffs: ArrayLike, sin_coeffs: ArrayLike, thetas: ArrayLike, derivative: int = 0
) -> NDArray[np.float64]:
    """
    삼각급수 a_0 + Σ a_k cos kθ + b_k sin kθ 와 그 θ-미분 평가

    Args:
        cos_coeffs: a_0..a_K
        sin_coeffs: b_1..b_K
        thetas: 평가 각도
        derivative: 미분 차수 (0, 1, 2)

    Returns:
        각도별 값
    """
    a = np.asarray(cos_coeffs, dtype=float)
    b = np.asarray(sin_coeffs, dtype=float)
    t = np.asarray(thetas, dtype=float)
    k = np.arange(1, a.size)
    phase = np.outer(t, k)
    cos_part = np.cos(phase)
    sin_part = np.sin(phase)

    if derivative == 0:
        return a[0] + cos_part @ a[1:] + sin_part @ b  # type: ignore[no-any-return]
    if derivative == 1:
        return sin_part @ (-k * a[1:]) + cos_part @ (k * b)  # type: ignore[no-any-return]
    if derivative == 2:
        return cos_part @ (-(k**2) * a[1:]) + sin_part @ (-(k**2) * b)  # type: ignore[no-any-return]
    raise ValueError(f"지원하지 않는 미분 차수: {derivative}")


class RadialPerturbation(BaseModel):
    """반경 함수의 섭동 ∂ρ (StarShape와 같은 계수 배치)"""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    cos_coeffs: List[float] = Field(..., alias="cos", min_length=1, description="a_0..a_K")
    sin_coeffs: List[float] = Field(default_factory=list, alias="sin", description="b_1..b_K")

    @model_validator(mode="after")
    def _check_layout(self) -> "RadialPerturbation":
        if len(self.sin_coeffs) != len(self.cos_coeffs) - 1:
            raise ValueError("sin 계수 개수는 cos 계수 개수 - 1 이어야 합니다")
        return self

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs) - 1

    def to_vector(self) -> NDArray[np.float64]:
        """계수 벡터 [a_0..a_K, b_1..b_K]"""
        return np.concatenate([self.cos_coeffs, self.sin_coeffs]).astype(float)

    @classmethod
    def from_vector(cls, vector: ArrayLike) -> "RadialPerturbation":
        vec = np.asarray(vector, dtype=float)
        degree = (vec.size - 1) // 2
        if vec.size != 2 * degree + 1:
            raise ValueError(f"계수 벡터 길이는 홀수여야 합니다: {vec.size}")
        return cls(cos=vec[: degree + 1].tolist(), sin=vec[degree + 1 :].tolist())

    @classmethod
    def zeros(cls, degree: int) -> "RadialPerturbation":
        return cls.from_vector(np.zeros(2 * degree + 1))

    def evaluate(self, thetas: ArrayLike) -> NDArray[np.float64]:
        """∂ρ(θ) 평가"""
        return evaluate_series(self.cos_coeffs, self.sin_coeffs, thetas)


class StarShape(BaseModel):
    """
    별모양 장애물 경계 p(θ) = center + ρ(θ)(cos θ, sin θ)

    JSON 형식: {"center": [x, y], "cos": [a0, ..., aK], "sin": [b1, ..., bK]}
    """

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    center: Tuple[float, float] = Field(default=(0.0, 0.0), description="중심점")
    cos_coeffs: List[float] = Field(..., alias="cos", min_length=1, description="a_0..a_K")
    sin_coeffs: List[float] = Field(default_factory=list, alias="sin", description="b_1..b_K")

    @model_validator(mode="after")
    def _check_shape(self) -> "StarShape":
        if len(self.sin_coeffs) != len(self.cos_coeffs) - 1:
            raise ValueError("sin 계수 개수는 cos 계수 개수 - 1 이어야 합니다")
        max_degree = get_settings().max_degree
        if self.degree > max_degree:
            raise ValueError(f"차수 {self.degree}가 최대 차수 {max_degree}를 초과합니다")
        if self.min_radius() <= 0.0:
            raise ValueError("반경 함수 ρ(θ)가 양수가 아닙니다")
        return self

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs) - 1

    @property
    def center_array(self) -> NDArray[np.float64]:
        return np.asarray(self.center, dtype=float)

    @classmethod
    def circle(
        cls, radius: float, center: Tuple[float, float] = (0.0, 0.0), degree: int = 0
    ) -> "StarShape":
        """반지름 radius인 원"""
        return cls(center=center, cos=[radius] + [0.0] * degree, sin=[0.0] * degree)

    def radius(self, thetas: ArrayLike) -> NDArray[np.float64]:
        return evaluate_series(self.cos_coeffs, self.sin_coeffs, thetas)

    def radius_derivative(self, thetas: ArrayLike, order: int = 1) -> NDArray[np.float64]:
        return evaluate_series(self.cos_coeffs, self.sin_coeffs, thetas, derivative=order)

    def min_radius(self, n_check: int = POSITIVITY_CHECK_POINTS) -> float:
        """검사 격자 위 ρ의 최솟값"""
        thetas = 2.0 * np.pi * np.arange(n_check) / n_check
        return float(np.min(self.radius(thetas)))

    def max_radius(self, n_check: int = POSITIVITY_CHECK_POINTS) -> float:
        thetas = 2.0 * np.pi * np.arange(n_check) / n_check
        return float(np.max(self.radius(thetas)))

    def to_vector(self) -> NDArray[np.float64]:
        """계수 벡터 [a_0..a_K, b_1..b_K]"""
        return np.concatenate([self.cos_coeffs, self.sin_coeffs]).astype(float)

    @classmethod
    def from_vector(cls, vector: ArrayLike, center: Tuple[float, float] = (0.0, 0.0)) -> "StarShape":
        vec = np.asarray(vector, dtype=float)
        degree = (vec.size - 1) // 2
        if vec.size != 2 * degree + 1:
            raise ValueError(f"계수 벡터 길이는 홀수여야 합니다: {vec.size}")
        return cls(center=center, cos=vec[: degree + 1].tolist(), sin=vec[degree + 1 :].tolist())

    def with_degree(self, degree: int) -> "StarShape":
        """계수를 degree 차수로 패딩 또는 절단"""
        cos = (list(self.cos_coeffs) + [0.0] * (degree + 1))[: degree + 1]
        sin = (list(self.sin_coeffs) + [0.0] * degree)[:degree]
        return StarShape(center=self.center, cos=cos, sin=sin)

    def perturbed(self, dr: RadialPerturbation, step: float = 1.0) -> "StarShape":
        """ρ + step·∂ρ (양수성 위반 시 ValidationError)"""
        if dr.degree != self.degree:
            raise ValueError(f"섭동 차수 {dr.degree} != 형상 차수 {self.degree}")
        return StarShape.from_vector(self.to_vector() + step * dr.to_vector(), center=self.center)

    def contains(self, points: ArrayLike, margin: float = 0.0) -> NDArray[np.bool_]:
        """점이 장애물 내부(경계 포함, margin 만큼 확장)에 있는지 여부"""
        rel = np.atleast_2d(np.asarray(points, dtype=float)) - self.center_array
        dist = np.linalg.norm(rel, axis=1)
        angles = np.arctan2(rel[:, 1], rel[:, 0])
        return dist <= self.radius(angles) + margin  # type: ignore[no-any-return]

    def boundary_points(self, n_points: int) -> NDArray[np.float64]:
        thetas = 2.0 * np.pi * np.arange(n_points) / n_points
        rho = self.radius(thetas)
        return self.center_array + rho[:, None] * np.column_stack([np.cos(thetas), np.sin(thetas)])

    def fingerprint(self) -> str:
        """형상 해시 (캐시 키 및 출처 기록용)"""
        payload = json.dumps(self.model_dump(by_alias=True), sort_keys=True)
        return hashlib.md5(payload.encode()).hexdigest()[:12]
