"""
simulate 명령
참 장애물과 원천 세기에서 합성 표본과 경험 공분산을 만든다.
역산 범죄를 피하기 위해 경계 해상도는 역산 기본값의 배율을 쓴다.
"""
import logging
import time
from pathlib import Path
from typing import Dict, Optional, Union

from app.commands.common import build_setup, load_experiment, run_metadata, simulation_n_bdy
from app.config import get_settings
from app.core.forward import assemble_nearfield
from app.core.stochastics import empirical_covariance, synthesize_measurements
from app.services.storage import (
    MatrixKind,
    write_boundary_csv,
    write_json,
    write_matrix,
    write_shape_json,
    write_strength_csv,
)

logger = logging.getLogger(__name__)


def cmd_simulate(config_path: Union[str, Path], out: Optional[Union[str, Path]] = None) -> Dict[str, Path]:
    """
    합성 데이터 생성

    Args:
        config_path: 실험 설정 JSON
        out: 출력 디렉터리 (없으면 설정값 또는 runs/<name>)

    Returns:
        생성한 파일 경로 (이름 → 경로)
    """
    started = time.perf_counter()
    config_file = Path(config_path)
    config = load_experiment(config_file)
    setup = build_setup(config, config_file.parent)
    out_dir = Path(out or config.output_dir or Path(get_settings().output_dir) / config.name)
    out_dir.mkdir(parents=True, exist_ok=True)

    n_bdy = simulation_n_bdy()
    G = assemble_nearfield(config.true_shape, setup.grid, setup.meas, config.kappa, n_bdy=n_bdy)
    sampling = config.sampling
    samples = synthesize_measurements(G, setup.q_true, sampling.n_sample, sampling.beta, sampling.seed)
    C_obs = empirical_covariance(samples)
    logger.info(
        f"[CLI] 공분산 추정 완료 - {C_obs.n_meas}×{C_obs.n_meas}, 최소 고유값={C_obs.min_eigenvalue():.3e}"
    )

    files: Dict[str, Path] = {
        "samples": write_matrix(out_dir / "samples.phlm", samples.samples, MatrixKind.SAMPLES),
        "cobs": write_matrix(out_dir / "cobs.phlm", C_obs.entries, MatrixKind.COVARIANCE),
        "q_true": write_strength_csv(
            out_dir / "q_true.csv", setup.grid.points, setup.grid.measures, setup.q_true
        ),
    }
    if config.true_shape is not None:
        files["true_shape"] = write_shape_json(out_dir / "true_shape.json", config.true_shape)
        files["true_boundary"] = write_boundary_csv(out_dir / "true_boundary.csv", config.true_shape)

    solver = {"n_bdy": n_bdy, "kappa": config.kappa, "obstacle": config.true_shape is not None}
    files["meta"] = write_json(
        out_dir / "meta.json",
        run_metadata(
            config,
            "simulate",
            seeds={"sampling": sampling.seed},
            solver=solver,
            extra={"nearfield": G.provenance(), "n_src": setup.grid.n_src},
        ),
    )
    logger.info(f"[CLI] simulate 완료 - {out_dir} ({time.perf_counter() - started:.1f}s)")
    return files
