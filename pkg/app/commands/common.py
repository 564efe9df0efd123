"""
명령 공통 유틸리티
실험 설정 로드, 원천 세기 해석, 측정 기하 구성, 실행 메타데이터
"""
import json
import logging
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import ValidationError

from app import __version__
from app.config import get_settings
from app.core.errors import ConfigError, DataFormatError
from app.core.forward import MeasurementArray, SourceGrid, make_source_grid
from app.core.inversion import Acquisition
from app.models.experiment import (
    BumpStrength,
    ConstantStrength,
    CsvStrength,
    ExperimentConfig,
    StrengthSpec,
)
from app.services.storage import read_strength_csv

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# 메타데이터에 기록하는 규약 설명
DATA_INNER_PRODUCT = "mu^2 * Re sum conj(A_ij) B_ij, mu = 2*pi*R/N_meas"
SHAPE_GRAM = "diagonal H^s Gram (1 + k^2)^s on trigonometric coefficients"


@dataclass(frozen=True)
class ExperimentSetup:
    """설정에서 만든 측정 기하와 참 원천 세기"""

    config: ExperimentConfig
    grid: SourceGrid
    meas: MeasurementArray
    q_true: NDArray[np.float64]
    base_dir: Path

    def acquisition(self, n_sample: Optional[int] = None) -> Acquisition:
        return Acquisition(grid=self.grid, meas=self.meas, kappa=self.config.kappa, n_sample=n_sample)


def load_experiment(path: PathLike) -> ExperimentConfig:
    """
    실험 설정 JSON 로드

    Raises:
        ConfigError: 파일 없음, JSON 오류, 스키마/포함 관계 위반
    """
    source = Path(path)
    try:
        raw = source.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"설정 파일을 읽을 수 없습니다: {source} ({e})") from e
    try:
        return ExperimentConfig.model_validate_json(raw)
    except ValidationError as e:
        raise ConfigError(f"설정 검증 실패: {source}\n{e}") from e


def resolve_strength(spec: StrengthSpec, grid: SourceGrid, base_dir: Path) -> NDArray[np.float64]:
    """원천 세기 사양을 격자 셀 값으로 변환"""
    if isinstance(spec, ConstantStrength):
        return np.full(grid.n_src, spec.value)
    if isinstance(spec, CsvStrength):
        path = Path(spec.path)
        return read_strength_csv(path if path.is_absolute() else base_dir / path, grid.n_src)
    if isinstance(spec, BumpStrength):
        return spec.evaluate(grid.points)
    raise ConfigError(f"알 수 없는 원천 세기 사양: {spec!r}")


def build_setup(config: ExperimentConfig, base_dir: PathLike = ".") -> ExperimentSetup:
    """원천 격자, 측정 배열, 참 q 구성"""
    grid = make_source_grid(
        config.source.region,
        config.source.n_per_axis,
        obstacle=config.true_shape,
        radius=config.measurement.radius,
    )
    meas = MeasurementArray.circle(config.measurement.radius, config.measurement.n_meas)
    base = Path(base_dir)
    try:
        q_true = resolve_strength(config.true_q, grid, base)
    except DataFormatError as e:
        raise ConfigError(f"true_q를 해석할 수 없습니다: {e}") from e
    logger.info(
        f"[CLI] 실험 '{config.name}' - κ={config.kappa:.4f}, N_meas={meas.n_meas}, N_src={grid.n_src}"
    )
    return ExperimentSetup(config=config, grid=grid, meas=meas, q_true=q_true, base_dir=base)


def simulation_n_bdy() -> int:
    """합성 데이터용 경계 노드 수 (역산 기본값 × 배율, 짝수)"""
    settings = get_settings()
    return 2 * int(round(0.5 * settings.n_bdy * settings.simulation_factor))


def git_revision() -> str:
    try:
        result = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return result.stdout.strip() if result.returncode == 0 and result.stdout.strip() else "unknown"


def run_metadata(
    config: ExperimentConfig,
    command: str,
    seeds: Optional[Dict[str, int]] = None,
    solver: Optional[Dict[str, Any]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """meta.json 내용 (실행 시각 제외, 같은 입력이면 같은 내용)"""
    settings = get_settings()
    meta: Dict[str, Any] = {
        "command": command,
        "version": __version__,
        "git_revision": git_revision(),
        "config": json.loads(config.model_dump_json(by_alias=True)),
        "seeds": seeds or {},
        "settings": settings.model_dump(),
        "conventions": {"data_inner_product": DATA_INNER_PRODUCT, "shape_gram": SHAPE_GRAM},
        "solver": solver or {},
    }
    if extra:
        meta.update(extra)
    return meta
