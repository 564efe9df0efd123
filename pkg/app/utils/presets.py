"""
실험 설정 프리셋
원천 세기 복원, 형상 복원, 동시 복원, 두 직사각형 원천 배치, 원판 복원 구성
"""
from typing import Callable, Dict

import numpy as np

from app.models.experiment import (
    Bump,
    BumpStrength,
    ConstantStrength,
    ExperimentConfig,
    InversionConfig,
    InversionMode,
    MeasurementSpec,
    SamplingSpec,
    SourceSpec,
)
from app.models.region import Rectangle, RectangleRegion
from app.models.shape import StarShape

SHAPE_WAVENUMBER = 2.5 * np.pi / 2.0


def _strips(inner: float, outer: float, half_height: float, nx: int, ny: int) -> RectangleRegion:
    """원점 좌우의 세로 띠 두 개"""
    return RectangleRegion(
        rectangles=[
            Rectangle(x_min=-outer, x_max=-inner, y_min=-half_height, y_max=half_height, nx=nx, ny=ny),
            Rectangle(x_min=inner, x_max=outer, y_min=-half_height, y_max=half_height, nx=nx, ny=ny),
        ]
    )


def source_reconstruction() -> ExperimentConfig:
    """κ = π, R = 5, N_meas = 32, N_src = 288 원천 세기 복원"""
    return ExperimentConfig(
        name="source_reconstruction",
        kappa=np.pi,
        measurement=MeasurementSpec(radius=5.0, n_meas=32),
        source=SourceSpec(region=_strips(1.95, 2.55, 1.5, nx=6, ny=24)),
        true_shape=StarShape(cos=[1.0, 0.0, 0.15], sin=[0.0, 0.0]),
        true_q=BumpStrength(
            base=0.5,
            bumps=[
                Bump(center=(-2.25, 0.6), amplitude=1.0, width=0.35),
                Bump(center=(2.25, -0.5), amplitude=0.8, width=0.45),
            ],
        ),
        sampling=SamplingSpec(n_sample=10000, beta=0.01, seed=1),
        inversion=InversionConfig(mode=InversionMode.SOURCE, alpha0=1e-3, cg_max=500, model_noise=True),
    )


def shape_reconstruction() -> ExperimentConfig:
    """κ = 2.5π/2 형상 복원 (q 알려짐)"""
    return ExperimentConfig(
        name="shape_reconstruction",
        kappa=SHAPE_WAVENUMBER,
        measurement=MeasurementSpec(radius=4.0, n_meas=32),
        source=SourceSpec(region=_strips(1.45, 2.05, 1.5, nx=4, ny=16)),
        true_shape=StarShape(cos=[0.9, 0.0, 0.2, 0.0], sin=[0.0, 0.0, 0.1]),
        true_q=ConstantStrength(value=1.0),
        sampling=SamplingSpec(n_sample=10000, beta=0.01, seed=2),
        inversion=InversionConfig(
            mode=InversionMode.SHAPE, max_newton=20, model_noise=True, discrepancy_tau=1.5
        ),
        init_shape=StarShape.circle(1.0, degree=4),
    )


def joint_reconstruction() -> ExperimentConfig:
    """κ = 2.5π/2, R = 4, N_src = 128 형상 + 원천 세기 동시 복원"""
    return ExperimentConfig(
        name="joint_reconstruction",
        kappa=SHAPE_WAVENUMBER,
        measurement=MeasurementSpec(radius=4.0, n_meas=32),
        source=SourceSpec(region=_strips(1.45, 2.05, 1.5, nx=4, ny=16)),
        true_shape=StarShape(cos=[0.8, 0.0, 0.15, 0.0], sin=[0.0, 0.0, 0.1]),
        true_q=BumpStrength(
            base=0.6,
            bumps=[
                Bump(center=(-1.75, 0.5), amplitude=0.8, width=0.4),
                Bump(center=(1.75, -0.5), amplitude=0.8, width=0.4),
            ],
        ),
        sampling=SamplingSpec(n_sample=10000, beta=0.01, seed=3),
        inversion=InversionConfig(
            mode=InversionMode.JOINT,
            max_newton=25,
            model_noise=True,
            alpha_min=1e-2,
            discrepancy_tau=1.5,
        ),
        init_shape=StarShape.circle(1.0, degree=4),
        init_q=ConstantStrength(value=1.0),
    )


def two_rectangles() -> ExperimentConfig:
    """[−1.5,−1]×[−0.5,0.5] ∪ [1,1.5]×[−0.5,0.5] 원천 배치의 Newton-CG 형상 복원"""
    region = RectangleRegion(
        rectangles=[
            Rectangle(x_min=-1.5, x_max=-1.0, y_min=-0.5, y_max=0.5, nx=4, ny=8),
            Rectangle(x_min=1.0, x_max=1.5, y_min=-0.5, y_max=0.5, nx=4, ny=8),
        ]
    )
    return ExperimentConfig(
        name="two_rectangles",
        kappa=np.pi,
        measurement=MeasurementSpec(radius=3.0, n_meas=32),
        source=SourceSpec(region=region),
        true_shape=StarShape(cos=[0.55, 0.0, 0.1], sin=[0.0, 0.0]),
        true_q=ConstantStrength(value=1.0),
        sampling=SamplingSpec(n_sample=10000, beta=0.01, seed=4),
        inversion=InversionConfig(
            mode=InversionMode.NEWTON_CG, max_newton=30, model_noise=True, discrepancy_tau=1.5
        ),
        init_shape=StarShape.circle(0.75, degree=4),
    )


def disk_recovery() -> ExperimentConfig:
    """반지름 0.8 원판을 반지름 1.2 초기값에서 복원 (κ = π)"""
    return ExperimentConfig(
        name="disk_recovery",
        kappa=np.pi,
        measurement=MeasurementSpec(radius=5.0, n_meas=32),
        source=SourceSpec(region=_strips(1.95, 2.55, 1.5, nx=3, ny=12)),
        true_shape=StarShape.circle(0.8),
        true_q=ConstantStrength(value=1.0),
        sampling=SamplingSpec(n_sample=10000, beta=0.01, seed=5),
        inversion=InversionConfig(mode=InversionMode.SHAPE, max_newton=15, model_noise=True),
        init_shape=StarShape.circle(1.2, degree=4),
    )


PRESETS: Dict[str, Callable[[], ExperimentConfig]] = {
    "source_reconstruction": source_reconstruction,
    "shape_reconstruction": shape_reconstruction,
    "joint_reconstruction": joint_reconstruction,
    "two_rectangles": two_rectangles,
    "disk_recovery": disk_recovery,
}


def get_preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(f"알 수 없는 프리셋: {name} (가능: {', '.join(PRESETS)})")
    return PRESETS[name]()
