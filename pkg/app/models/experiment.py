"""
실험 설정 모델 정의
측정 배열, 원천 영역, 참 형상/세기, 표본화, 역산 설정을 담는 JSON 스키마
"""
from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.models.region import RegionSpec
from app.models.shape import StarShape


class InversionMode(str, Enum):
    """역산 방식"""

    SOURCE = "source"  # 원천 세기 Tikhonov-CG
    SHAPE = "shape"  # 형상 IRGNM
    JOINT = "joint"  # 형상 + 원천 세기 동시
    NEWTON_CG = "newton-cg"  # 조기 종료 CG Newton


class InversionConfig(BaseModel):
    """역산 드라이버 설정"""

    mode: InversionMode = Field(default=InversionMode.SHAPE, description="역산 방식")
    alpha0: float = Field(default=1.0, gt=0.0, description="초기 정규화 매개변수 α₀")
    alpha_decay: float = Field(default=2.0 / 3.0, gt=0.0, lt=1.0, description="α_n = α₀ c^n 의 c")
    max_newton: int = Field(default=20, ge=0, description="최대 Newton 반복 수")
    cg_tol: float = Field(default=1e-6, gt=0.0, description="CG 상대 잔차 허용치")
    cg_max: int = Field(default=200, ge=0, description="CG 최대 반복 수")
    s: Optional[float] = Field(default=None, ge=0.0, description="H^s 지수 (없으면 설정값)")
    beta: float = Field(default=0.01, gt=0.0, description="가중 연산자 이동량 β")
    newton_cg_factor: float = Field(default=0.8, gt=0.0, lt=1.0, description="내부 CG 종료 비율")

    # 보조 설정
    n_bdy: Optional[int] = Field(default=None, ge=16, description="역산용 경계 노드 수")
    max_halvings: int = Field(default=10, ge=0, description="허용성 위반 시 최대 스텝 반감 수")
    update_source: bool = Field(default=True, description="joint 모드에서 q 블록 갱신 여부")
    model_noise: bool = Field(default=False, description="모델 예측에 βI 를 더할지 여부")
    apriori_alpha: bool = Field(default=False, description="α = alpha_scale · N_sample^(-1/2) 사용")
    alpha_scale: float = Field(default=1.0, gt=0.0, description="사전 α 규칙의 배율")
    stagnation_tol: float = Field(default=1e-3, gt=0.0, description="Newton-CG 정체 판정 상대 감소량")
    stagnation_window: int = Field(default=3, ge=1, description="정체 판정 반복 구간")
    alpha_min: float = Field(default=0.0, ge=0.0, description="α_n 의 하한")
    discrepancy_tau: Optional[float] = Field(
        default=None, gt=1.0, description="가중 잔차 ≤ τ·δ (δ: 표본 잡음 수준)이면 종료"
    )

    model_config = {
        "json_schema_extra": {
            "example": {
                "mode": "shape",
                "alpha0": 1.0,
                "alpha_decay": 0.6667,
                "max_newton": 20,
                "cg_tol": 1e-6,
                "cg_max": 200,
                "beta": 0.01,
            }
        }
    }

    def resolved_alpha0(self, n_sample: Optional[int] = None) -> float:
        """사전 규칙 적용 후의 α₀"""
        if self.apriori_alpha and n_sample:
            return self.alpha_scale / float(np.sqrt(n_sample))
        return self.alpha0

    def alpha_at(self, iteration: int, n_sample: Optional[int] = None) -> float:
        return max(self.resolved_alpha0(n_sample) * self.alpha_decay**iteration, self.alpha_min)


class Bump(BaseModel):
    """가우스 봉우리 a·exp(−|y − c|² / (2w²))"""

    center: Tuple[float, float]
    amplitude: float = Field(..., ge=0.0)
    width: float = Field(..., gt=0.0)


class ConstantStrength(BaseModel):
    kind: Literal["constant"] = "constant"
    value: float = Field(default=1.0, ge=0.0, description="상수 세기")


class CsvStrength(BaseModel):
    kind: Literal["csv"] = "csv"
    path: str = Field(..., description="셀별 q CSV 경로 (설정 파일 기준 상대 경로)")


class BumpStrength(BaseModel):
    """상수 바탕 위 가우스 봉우리 합"""

    kind: Literal["bumps"] = "bumps"
    base: float = Field(default=0.0, ge=0.0)
    bumps: List[Bump] = Field(default_factory=list)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        values = np.full(points.shape[0], self.base)
        for bump in self.bumps:
            dist_sq = np.sum((points - np.asarray(bump.center)) ** 2, axis=1)
            values += bump.amplitude * np.exp(-dist_sq / (2.0 * bump.width**2))
        return values


StrengthSpec = Annotated[
    Union[ConstantStrength, CsvStrength, BumpStrength], Field(discriminator="kind")
]


class MeasurementSpec(BaseModel):
    radius: float = Field(..., gt=0.0, description="측정 원 반지름 R")
    n_meas: int = Field(..., ge=1, description="측정점 개수")


class SamplingSpec(BaseModel):
    n_sample: int = Field(default=10000, ge=2, description="표본 수")
    beta: float = Field(default=0.01, ge=0.0, description="측정 잡음 분산")
    seed: int = Field(default=0, ge=0, description="난수 시드")


class SourceSpec(BaseModel):
    region: RegionSpec
    n_per_axis: Optional[int] = Field(default=None, ge=1, description="직사각형 셀 분할 덮어쓰기")


class ExperimentConfig(BaseModel):
    """실험 전체 설정 (JSON)"""

    name: str = Field(default="experiment", description="실험 이름")
    kappa: float = Field(..., gt=0.0, description="파수 κ")
    measurement: MeasurementSpec
    source: SourceSpec
    true_shape: Optional[StarShape] = Field(default=None, description="참 장애물 (없으면 자유공간)")
    true_q: StrengthSpec = Field(default_factory=ConstantStrength)
    sampling: SamplingSpec = Field(default_factory=SamplingSpec)
    inversion: InversionConfig = Field(default_factory=InversionConfig)
    init_shape: Optional[StarShape] = Field(default=None, description="형상 역산 초기값")
    init_q: Optional[StrengthSpec] = Field(default=None, description="joint 역산 초기 q")
    output_dir: Optional[str] = Field(default=None, description="출력 디렉터리")

    @model_validator(mode="after")
    def _check_containment(self) -> "ExperimentConfig":
        radius = self.measurement.radius
        outline = self.source.region.outline_points()
        if np.any(np.linalg.norm(outline, axis=1) >= radius):
            raise ValueError(f"원천 영역이 측정 원(R={radius}) 안에 있지 않습니다")

        for label, shape in (("true_shape", self.true_shape), ("init_shape", self.init_shape)):
            if shape is None:
                continue
            boundary = shape.boundary_points(256)
            if np.any(np.linalg.norm(boundary, axis=1) >= radius):
                raise ValueError(f"{label}이(가) 측정 원(R={radius}) 안에 있지 않습니다")
            if np.any(shape.contains(outline)) or np.any(self.source.region.contains(boundary)):
                raise ValueError(f"원천 영역이 {label}과(와) 겹칩니다")
        return self
