"""
pytest 공통 fixture
"""
import json
from pathlib import Path

import numpy as np
import pytest

from app.core.forward import MeasurementArray, SourceGrid, make_source_grid
from app.models.region import Rectangle, RectangleRegion
from app.models.shape import StarShape
from app.services.cache import get_cache
from app.utils.parallel import set_worker_count


@pytest.fixture(autouse=True)
def clear_solver_cache():
    """테스트 간 솔버 캐시 격리"""
    get_cache().clear()
    yield
    get_cache().clear()


@pytest.fixture(autouse=True)
def reset_worker_count():
    """CLI --threads 덮어쓰기 초기화"""
    yield
    set_worker_count(None)


@pytest.fixture
def unit_circle() -> StarShape:
    """단위 원"""
    return StarShape.circle(1.0)


@pytest.fixture
def star_shape() -> StarShape:
    """비대칭 별모양 ρ = 1 + 0.3cos2θ + 0.2sin3θ"""
    return StarShape(cos=[1.0, 0.0, 0.3, 0.0], sin=[0.0, 0.0, 0.2])


@pytest.fixture
def small_region() -> RectangleRegion:
    """장애물 오른쪽의 3×3 셀 직사각형"""
    return RectangleRegion(rectangles=[Rectangle(x_min=2.0, x_max=3.0, y_min=-0.6, y_max=0.6, nx=3, ny=3)])


@pytest.fixture
def small_grid(small_region) -> SourceGrid:
    return make_source_grid(small_region, radius=4.0)


@pytest.fixture
def small_meas() -> MeasurementArray:
    """R = 4, N_meas = 8"""
    return MeasurementArray.circle(4.0, 8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_config_dict() -> dict:
    """빠르게 실행되는 실험 설정"""
    return {
        "name": "small",
        "kappa": 2.0,
        "measurement": {"radius": 4.0, "n_meas": 8},
        "source": {
            "region": {
                "kind": "rectangles",
                "rectangles": [
                    {"x_min": -3.0, "x_max": -2.0, "y_min": -0.6, "y_max": 0.6, "nx": 2, "ny": 2},
                    {"x_min": 2.0, "x_max": 3.0, "y_min": -0.6, "y_max": 0.6, "nx": 2, "ny": 2},
                ],
            }
        },
        "true_shape": {"center": [0.0, 0.0], "cos": [0.8, 0.0, 0.1], "sin": [0.0, 0.0]},
        "true_q": {"kind": "constant", "value": 1.0},
        "sampling": {"n_sample": 200, "beta": 0.01, "seed": 7},
        "inversion": {"mode": "shape", "max_newton": 2, "cg_max": 30},
        "init_shape": {"center": [0.0, 0.0], "cos": [0.9, 0.0, 0.0], "sin": [0.0, 0.0]},
    }


@pytest.fixture
def small_config_path(tmp_path: Path, small_config_dict: dict) -> Path:
    path = tmp_path / "small.json"
    path.write_text(json.dumps(small_config_dict), encoding="utf-8")
    return path
