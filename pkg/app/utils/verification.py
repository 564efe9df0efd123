"""
검증 스위트
독립 오라클(멱급수, 원판 급수해, 명시적 Kronecker 행렬, 유한차분, Monte-Carlo)과
수치 모듈을 비교하여 측정 오차와 허용치를 보고한다.
"""
import logging
import time
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy import linalg, special

from app.core.bie import build_solver
from app.core.calculus import covariance_adjoint_vectors, covariance_derivative, linearize, misfit_and_gradient
from app.core.forward import (
    MeasurementArray,
    SourceGrid,
    assemble_nearfield,
    covariance_forward,
    data_inner,
    make_source_grid,
)
from app.core.geometry import discretize
from app.core.specfun import bessel_j, bessel_y, fundamental_solution
from app.core.stochastics import (
    build_weight,
    empirical_covariance,
    synthesize_measurements,
    weight_apply,
)
from app.models.region import AnnulusRegion, Rectangle, RectangleRegion
from app.models.shape import StarShape

logger = logging.getLogger(__name__)

# 허용치
SERIES_TOL = 1e-12
WRONSKIAN_TOL = 1e-10
DISK_TOL = 1e-8
TRACE_TOL = 1e-6
RECIPROCITY_TOL = 1e-8
ADJOINT_TOL = 1e-11
GRADIENT_TOL = 1e-4
GRADIENT_STEP = 1e-5
KRONECKER_TOL = 1e-12
CONVERGENCE_RANGE = (4.5, 8.5)
ISSERLIS_SIGMAS = 5.0


@dataclass
class CheckResult:
    """검증 항목 1개의 결과"""

    name: str
    measured: float
    threshold: float
    passed: bool
    elapsed: float = 0.0
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name:<28} 측정={self.measured:.3e}  허용={self.threshold:.3e}  ({self.elapsed:.1f}s)"
        return f"{text}  {self.detail}" if self.detail else text


@dataclass
class VerificationReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def lines(self) -> List[str]:
        return [check.line() for check in self.checks]


# ---------- 독립 오라클 ----------


def series_j(order: int, x: float, terms: int = 40) -> float:
    """J_0, J_1 멱급수"""
    half = 0.5 * x
    return float(
        sum((-1) ** k * half ** (2 * k + order) / (factorial(k) * factorial(k + order)) for k in range(terms))
    )


def series_y0(x: float, terms: int = 40) -> float:
    """Y_0 = (2/π)(ln(x/2) + γ)J_0 + (2/π) Σ (−1)^{k+1} H_k (x²/4)^k / (k!)²"""
    quarter = 0.25 * x * x
    harmonic = 0.0
    tail = 0.0
    for k in range(1, terms):
        harmonic += 1.0 / k
        tail += (-1) ** (k + 1) * harmonic * quarter**k / factorial(k) ** 2
    return float((2.0 / np.pi) * ((np.log(0.5 * x) + np.euler_gamma) * series_j(0, x, terms) + tail))


def disk_green(
    x: NDArray[np.float64], y: NDArray[np.float64], kappa: float, radius: float, m_max: int = 40
) -> complex:
    """원판 장애물의 G_D(x, y) 원통조화 급수해"""
    rx, tx = np.hypot(*x), np.arctan2(x[1], x[0])
    ry, ty = np.hypot(*y), np.arctan2(y[1], y[0])
    m = np.arange(-m_max, m_max + 1)
    coeff = special.jv(m, kappa * radius) / special.hankel1(m, kappa * radius)
    series = coeff * special.hankel1(m, kappa * rx) * special.hankel1(m, kappa * ry) * np.exp(1j * m * (tx - ty))
    return complex(fundamental_solution(x, y, kappa)) - 0.25j * complex(np.sum(series))


def _random_exterior_points(
    rng: np.random.Generator, count: int, r_min: float, r_max: float
) -> NDArray[np.float64]:
    r = rng.uniform(r_min, r_max, count)
    t = rng.uniform(0.0, 2.0 * np.pi, count)
    return np.column_stack([r * np.cos(t), r * np.sin(t)])


def _adjoint_setup() -> Tuple[StarShape, MeasurementArray, SourceGrid, float]:
    """N_meas = 16, N_src = 36, 비대칭 별모양"""
    shape = StarShape(cos=[1.0, 0.0, 0.3, 0.0], sin=[0.0, 0.0, 0.2])
    region = RectangleRegion(rectangles=[Rectangle(x_min=2.0, x_max=3.0, y_min=-0.6, y_max=0.6, nx=6, ny=6)])
    grid = make_source_grid(region, obstacle=shape, radius=4.0)
    return shape, MeasurementArray.circle(4.0, 16), grid, 2.0


# ---------- 검증 항목 ----------


def check_special_functions() -> CheckResult:
    xs = [0.25, 0.5, 1.0, 2.0, 4.0]
    errors = []
    for x in xs:
        errors.append(abs(bessel_j(0, x) - series_j(0, x)) / abs(series_j(0, x)))
        errors.append(abs(bessel_j(1, x) - series_j(1, x)) / abs(series_j(1, x)))
        errors.append(abs(bessel_y(0, x) - series_y0(x)) / abs(series_y0(x)))
    grid = np.logspace(-1, 2, 200)
    wronskian = bessel_j(0, grid) * bessel_y(1, grid) - bessel_j(1, grid) * bessel_y(0, grid) + 2.0 / (np.pi * grid)
    measured = max(max(errors) / SERIES_TOL, float(np.max(np.abs(wronskian))) / WRONSKIAN_TOL)
    return CheckResult("special_functions", measured, 1.0, measured <= 1.0, detail="오차/허용치 비율")


def check_disk_series(n_pairs: int = 20) -> CheckResult:
    kappa = np.pi
    solver = build_solver(discretize(StarShape.circle(1.0), 128), kappa, StarShape.circle(1.0))
    rng = np.random.default_rng(7)
    xs = _random_exterior_points(rng, n_pairs, 1.5, 4.0)
    ys = _random_exterior_points(rng, n_pairs, 1.5, 4.0)
    errors = []
    for x, y in zip(xs, ys):
        exact = disk_green(x, y, kappa, 1.0)
        value = solver.green_matrix(x[None, :], y[None, :])[0, 0]
        errors.append(abs(value - exact) / abs(exact))
    measured = float(max(errors))
    return CheckResult("disk_series", measured, DISK_TOL, measured <= DISK_TOL)


def check_dirichlet_trace() -> CheckResult:
    kappa = np.pi
    shape = StarShape(cos=[1.0, 0.0, 0.3, 0.0], sin=[0.0, 0.0, 0.2])
    solver = build_solver(discretize(shape, 128), kappa, shape)
    rng = np.random.default_rng(13)
    sources = _random_exterior_points(rng, 5, 2.0, 4.0)
    _, total = solver.boundary_trace(sources, refine=3)
    incident_scale = np.max(np.abs(solver.green_matrix(_random_exterior_points(rng, 50, 1.6, 4.0), sources)))
    measured = float(np.max(np.abs(total)) / incident_scale)
    return CheckResult("dirichlet_trace", measured, TRACE_TOL, measured <= TRACE_TOL, detail="외부 장 최대값 대비")


def check_reciprocity(n_pairs: int = 20) -> CheckResult:
    shape = StarShape(cos=[1.0, 0.0, 0.3, 0.0], sin=[0.0, 0.0, 0.2])
    solver = build_solver(discretize(shape, 128), np.pi, shape)
    rng = np.random.default_rng(11)
    xs = _random_exterior_points(rng, n_pairs, 2.0, 4.0)
    ys = _random_exterior_points(rng, n_pairs, 2.0, 4.0)
    forward = np.diag(solver.green_matrix(xs, ys))
    backward = np.diag(solver.green_matrix(ys, xs))
    measured = float(np.max(np.abs(forward - backward)))
    return CheckResult("reciprocity", measured, RECIPROCITY_TOL, measured <= RECIPROCITY_TOL)


def check_adjoint_identity(n_triples: int = 50) -> CheckResult:
    shape, meas, grid, kappa = _adjoint_setup()
    rng = np.random.default_rng(3)
    q = rng.uniform(0.5, 1.5, grid.n_src)
    L = linearize(shape, q, grid, meas, kappa, n_bdy=96)
    mu = meas.surface_measure
    worst = 0.0
    for _ in range(n_triples):
        dr = rng.standard_normal(L.n_shape)
        dq = rng.standard_normal(grid.n_src)
        K = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        image = covariance_derivative(L, dr, dq)
        dr_star, dq_star = covariance_adjoint_vectors(L, K)
        lhs = data_inner(image, K, mu)
        rhs = L.shape_inner(dr, dr_star) + grid.inner(dq, dq_star)
        scale = np.sqrt(data_inner(image, image, mu) * data_inner(K, K, mu))
        worst = max(worst, abs(lhs - rhs) / scale)
    return CheckResult("adjoint_identity", worst, ADJOINT_TOL, worst <= ADJOINT_TOL)


def check_gradient(n_directions: int = 10) -> CheckResult:
    shape, meas, grid, kappa = _adjoint_setup()
    rng = np.random.default_rng(5)
    q = rng.uniform(0.5, 1.5, grid.n_src)
    truth = StarShape(cos=[1.05, 0.02, 0.28, 0.0], sin=[0.03, 0.0, 0.21])
    observed = covariance_forward(assemble_nearfield(truth, grid, meas, kappa, n_bdy=96), q)
    Wop = build_weight(observed, 0.01)

    def misfit(vec: NDArray[np.float64], strength: NDArray[np.float64]) -> float:
        trial = StarShape.from_vector(vec)
        return misfit_and_gradient(linearize(trial, strength, grid, meas, kappa, n_bdy=96), observed, Wop)[0]

    base = linearize(shape, q, grid, meas, kappa, n_bdy=96)
    _, grad_dr, grad_dq = misfit_and_gradient(base, observed, Wop)
    rho = shape.to_vector()
    worst = 0.0
    for _ in range(n_directions):
        dr = 0.1 * rng.standard_normal(rho.size)
        dq = 0.1 * rng.standard_normal(grid.n_src)
        h = GRADIENT_STEP
        fd = (misfit(rho + h * dr, q + h * dq) - misfit(rho - h * dr, q - h * dq)) / (2.0 * h)
        predicted = base.shape_inner(dr, grad_dr) + grid.inner(dq, grad_dq)
        worst = max(worst, abs(fd - predicted) / max(abs(predicted), np.finfo(float).tiny))
    return CheckResult("gradient_fd", worst, GRADIENT_TOL, worst <= GRADIENT_TOL)


def check_weight_kronecker() -> CheckResult:
    rng = np.random.default_rng(2)
    M = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    C_obs = M @ M.conj().T
    Wop = build_weight(C_obs, 0.5)
    base = C_obs + 0.5 * np.eye(2)
    A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    worst = 0.0
    for power in (-0.5, -1.0):
        factor = linalg.fractional_matrix_power(base, power)
        explicit = np.kron(factor, factor) @ A.ravel(order="F")
        worst = max(worst, float(np.max(np.abs(weight_apply(Wop, A, power).ravel(order="F") - explicit))))
    return CheckResult("weight_kronecker", worst, KRONECKER_TOL, worst <= KRONECKER_TOL)


def _free_space_case(n_meas: int, cells: int) -> Tuple[NDArray[np.complex128], NDArray[np.float64]]:
    region = RectangleRegion(rectangles=[Rectangle(x_min=-0.5, x_max=0.5, y_min=-0.5, y_max=0.5, nx=cells, ny=cells)])
    grid = make_source_grid(region, radius=3.0)
    G = assemble_nearfield(None, grid, MeasurementArray.circle(3.0, n_meas), np.pi)
    return G.entries, np.ones(grid.n_src)


def covariance_error(
    G: NDArray[np.complex128], q: NDArray[np.float64], beta: float, n_sample: int, seeds: Tuple[int, ...]
) -> float:
    """여러 시드에 대한 ‖C^obs − (GM_qG^H + βI)‖_F 의 제곱평균제곱근"""
    target = (G * q) @ G.conj().T + beta * np.eye(G.shape[0])
    squared = [
        np.linalg.norm(empirical_covariance(synthesize_measurements(G, q, n_sample, beta, seed)).entries - target) ** 2
        for seed in seeds
    ]
    return float(np.sqrt(np.mean(squared)))


def check_covariance_convergence() -> CheckResult:
    # 측정점을 둘러싼 환형 원천이면 공분산의 유효 계수가 커서 오차 노름이 안정적이다
    grid = make_source_grid(AnnulusRegion(r_inner=1.5, r_outer=2.5, n_r=4, n_theta=24), radius=4.0)
    G = assemble_nearfield(None, grid, MeasurementArray.circle(4.0, 16), np.pi).entries
    q = np.ones(grid.n_src)
    small = covariance_error(G, q, 0.01, 1000, (101, 102, 103))
    large = covariance_error(G, q, 0.01, 40000, (201, 202, 203))
    ratio = small / large
    low, high = CONVERGENCE_RANGE
    return CheckResult(
        "covariance_convergence", ratio, high, low <= ratio <= high, detail=f"허용 구간 [{low}, {high}]"
    )


def check_isserlis(replications: int = 200, n_sample: int = 2000) -> CheckResult:
    G, q = _free_space_case(4, 2)
    beta = 0.01
    B = (G * q) @ G.conj().T + beta * np.eye(4)
    entries = np.array(
        [
            empirical_covariance(synthesize_measurements(G, q, n_sample, beta, 1000 + r)).entries.ravel()
            for r in range(replications)
        ]
    )
    centered = entries - entries.mean(axis=0)
    empirical = centered.T @ centered.conj() / replications
    # 행 우선 벡터화에서 Cov(C_ml, C_m'l') = (1/N) B_mm' conj(B_ll')
    theory = np.kron(B, B.conj()) / n_sample
    variances = np.real(np.diag(theory))
    standard_error = np.sqrt((2.0 * np.outer(variances, variances) + np.abs(theory) ** 2) / replications)
    measured = float(np.max(np.abs(empirical - theory) / standard_error))
    return CheckResult("isserlis_weight", measured, ISSERLIS_SIGMAS, measured <= ISSERLIS_SIGMAS, detail="표준오차 배수")


def _failed_check(name: str, error: Exception) -> CheckResult:
    """예외로 끝난 검증 항목을 실패 줄로 기록"""
    return CheckResult(name, float("nan"), float("nan"), False, detail=f"{type(error).__name__}: {error}")


def run_suite(
    quick: bool = False, checks: Optional[List[Tuple[str, Callable[[], CheckResult]]]] = None
) -> VerificationReport:
    """검증 스위트 실행 (quick이면 1분 이내 부분집합)"""
    if checks is None:
        checks = [
            ("special_functions", check_special_functions),
            ("disk_series", lambda: check_disk_series(5 if quick else 20)),
            ("dirichlet_trace", check_dirichlet_trace),
            ("reciprocity", lambda: check_reciprocity(5 if quick else 20)),
            ("weight_kronecker", check_weight_kronecker),
            ("adjoint_identity", lambda: check_adjoint_identity(5 if quick else 50)),
        ]
        if not quick:
            checks += [
                ("gradient_fd", check_gradient),
                ("covariance_convergence", check_covariance_convergence),
                ("isserlis_weight", check_isserlis),
            ]

    report = VerificationReport()
    for name, check in checks:
        started = time.perf_counter()
        try:
            result = check()
        except Exception as e:
            logger.error(f"[Verify] {name} 실행 중 오류: {e}", exc_info=True)
            result = _failed_check(name, e)
        result.elapsed = time.perf_counter() - started
        logger.info(f"[Verify] {result.line()}")
        report.checks.append(result)
    return report


__all__ = [
    "CheckResult",
    "VerificationReport",
    "run_suite",
    "series_j",
    "series_y0",
    "disk_green",
]
