"""
invert 명령
관측 공분산(cobs.phlm)에서 선택한 드라이버로 원천 세기/형상을 복원하고
추정치, RunRecord, 메타데이터를 기록한다.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from app.commands.common import ExperimentSetup, build_setup, load_experiment, resolve_strength, run_metadata
from app.config import get_settings
from app.core.errors import ConfigError, DataFormatError, InversionError
from app.core.forward import CovarianceMatrix, assemble_nearfield
from app.core.geometry import hausdorff_distance
from app.core.inversion import invert_joint, invert_shape, invert_shape_newton_cg, invert_source
from app.models.experiment import ConstantStrength, InversionMode
from app.models.record import RunRecord
from app.models.shape import StarShape
from app.services.storage import (
    MatrixKind,
    read_matrix,
    write_boundary_csv,
    write_json,
    write_shape_json,
    write_strength_csv,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_observation(data: PathLike, n_meas: int) -> CovarianceMatrix:
    """cobs.phlm (또는 그것을 담은 디렉터리) 로드 및 차원 검사"""
    path = Path(data)
    if path.is_dir():
        path = path / "cobs.phlm"
    if not path.exists():
        raise DataFormatError(f"관측 파일이 없습니다: {path}", field="path")
    entries, _ = read_matrix(path, expected_kind=MatrixKind.COVARIANCE)
    if entries.shape != (n_meas, n_meas):
        raise DataFormatError(f"C^obs 크기 {entries.shape} != 설정의 N_meas {n_meas}", field="rows")
    return CovarianceMatrix(entries=entries)


def _diagnostics(setup: ExperimentSetup, shape: Optional[StarShape], q: Optional[np.ndarray]) -> Dict[str, Any]:
    """참값이 주어진 합성 실험의 오차 지표"""
    result: Dict[str, Any] = {}
    truth = setup.config.true_shape
    if shape is not None and truth is not None:
        result["hausdorff_distance"] = hausdorff_distance(shape, truth)
    if q is not None:
        reference = np.sqrt(setup.grid.inner(setup.q_true, setup.q_true))
        if reference > 0.0:
            error = q - setup.q_true
            result["q_relative_error"] = float(np.sqrt(setup.grid.inner(error, error)) / reference)
    return result


def _require_init_shape(setup: ExperimentSetup) -> StarShape:
    if setup.config.init_shape is None:
        raise ConfigError("형상 역산에는 init_shape 설정이 필요합니다")
    return setup.config.init_shape


def cmd_invert(
    mode: Optional[Union[str, InversionMode]],
    config_path: PathLike,
    data: PathLike,
    out: Optional[PathLike] = None,
) -> Dict[str, Path]:
    """
    역산 실행

    Args:
        mode: source | shape | joint | newton-cg (없으면 설정값)
        config_path: 실험 설정 JSON
        data: simulate 출력 디렉터리 또는 cobs.phlm 경로
        out: 출력 디렉터리

    Returns:
        생성한 파일 경로 (이름 → 경로)
    """
    config_file = Path(config_path)
    config = load_experiment(config_file)
    setup = build_setup(config, config_file.parent)
    selected = InversionMode(mode) if mode is not None else config.inversion.mode
    cfg = config.inversion.model_copy(update={"mode": selected})
    if "model_noise" not in config.inversion.model_fields_set:
        # simulate 출력의 C^obs 에는 측정 잡음 βI 가 들어 있다
        cfg = cfg.model_copy(update={"model_noise": config.sampling.beta > 0.0})
    C_obs = load_observation(data, setup.meas.n_meas)

    out_dir = Path(out or config.output_dir or Path(get_settings().output_dir) / config.name) / selected.value
    out_dir.mkdir(parents=True, exist_ok=True)
    n_sample = config.sampling.n_sample
    acquisition = setup.acquisition(n_sample)
    logger.info(f"[CLI] invert 시작 - 모드={selected.value}, 출력={out_dir}")

    files: Dict[str, Path] = {}
    shape: Optional[StarShape] = None
    q: Optional[np.ndarray] = None
    record: RunRecord
    try:
        if selected == InversionMode.SOURCE:
            G = assemble_nearfield(config.true_shape, setup.grid, setup.meas, config.kappa, n_bdy=cfg.n_bdy)
            q, record = invert_source(C_obs, G, setup.grid, cfg, setup.meas, n_sample)
        elif selected == InversionMode.JOINT:
            init_q = resolve_strength(config.init_q or ConstantStrength(), setup.grid, setup.base_dir)
            shape, q, record = invert_joint(C_obs, _require_init_shape(setup), init_q, cfg, acquisition)
        elif selected == InversionMode.NEWTON_CG:
            shape, record = invert_shape_newton_cg(
                C_obs, setup.q_true, _require_init_shape(setup), cfg, acquisition
            )
        else:
            shape, record = invert_shape(C_obs, setup.q_true, _require_init_shape(setup), cfg, acquisition)
    except InversionError as e:
        if isinstance(e.record, RunRecord):
            write_json(out_dir / "runrecord.json", e.record.model_dump(mode="json"))
            logger.error(f"[CLI] 역산 실패 - 부분 기록 저장: {out_dir / 'runrecord.json'}")
        raise

    if q is not None:
        files["estimate_q"] = write_strength_csv(
            out_dir / "estimate_q.csv", setup.grid.points, setup.grid.measures, q
        )
    if shape is not None:
        files["estimate_shape"] = write_shape_json(out_dir / "estimate_shape.json", shape)
        files["estimate_boundary"] = write_boundary_csv(out_dir / "estimate_boundary.csv", shape)

    files["runrecord"] = write_json(out_dir / "runrecord.json", record.model_dump(mode="json"))
    files["meta"] = write_json(
        out_dir / "meta.json",
        run_metadata(
            config,
            "invert",
            seeds={"sampling": config.sampling.seed},
            solver=record.solver,
            extra={
                "mode": selected.value,
                "data": str(Path(data)),
                "stop_reason": record.stop_reason,
                "flags": record.flags,
                "diagnostics": _diagnostics(setup, shape, q),
            },
        ),
    )
    logger.info(f"[CLI] invert 완료 - 사유={record.stop_reason}, 최종 잔차={record.final_residual}")
    return files
