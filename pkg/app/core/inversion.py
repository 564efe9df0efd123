"""
역산 모듈
원천 세기 Tikhonov-CG, 형상 IRGNM, 형상+원천 동시 Gauss-Newton, 조기 종료 Newton-CG

IRGNM 부분 문제 (H^s Tikhonov 근접항, 가산 갱신):
  ½‖W^{-1/2}(C′∂ρ + X)‖² + (α_n/2)‖∂ρ + ρ_n − ρ_0‖²_{H^s} = min!
  ⇔ (C′*W⁻¹C′ + α_n I)∂ρ = −C′*W⁻¹X − α_n(ρ_n − ρ_0)
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.config import get_settings
from app.core.calculus import (
    LinearizationPoint,
    covariance_adjoint_vectors,
    covariance_derivative,
    linearize,
    residual,
    source_adjoint,
)
from app.core.errors import (
    BIESolverError,
    CGError,
    DimensionError,
    GeometryError,
    InversionError,
)
from app.core.forward import (
    CovarianceMatrix,
    MeasurementArray,
    NearFieldMatrix,
    SourceGrid,
    assemble_nearfield,
    check_geometry,
    covariance_signed,
)
from app.core.stochastics import (
    WeightOperator,
    build_weight,
    expected_noise_norm,
    weight_apply,
    weighted_norm,
)
from app.models.experiment import InversionConfig, InversionMode
from app.models.record import IterationRecord, RunRecord
from app.models.shape import StarShape

logger = logging.getLogger(__name__)

Vector = NDArray[np.float64]
Operator = Callable[[Vector], Vector]
InnerProduct = Callable[[Vector, Vector], float]

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class Acquisition:
    """역산에 필요한 측정 기하: 원천 격자, 측정 배열, 파수, 표본 수"""

    grid: SourceGrid
    meas: MeasurementArray
    kappa: float
    n_sample: Optional[int] = None


@dataclass
class CGResult:
    """CG 풀이 결과"""

    solution: Vector
    iterations: int
    converged: bool
    residual_norms: List[float] = field(default_factory=list)
    stopped_by_callback: bool = False


def symmetry_defect(
    apply_A: Operator, inner: InnerProduct, size: int, seed: int = 0
) -> float:
    """무작위 벡터 쌍에 대한 |⟨Av, w⟩ − ⟨v, Aw⟩| / 규모"""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size)
    w = rng.standard_normal(size)
    Av, Aw = apply_A(v), apply_A(w)
    scale = np.sqrt(inner(Av, Av) * inner(w, w)) + np.sqrt(inner(v, v) * inner(Aw, Aw))
    return abs(inner(Av, w) - inner(v, Aw)) / max(scale, np.finfo(float).tiny)


def cg_solve(
    apply_A: Operator,
    rhs: ArrayLike,
    tol: float = 1e-6,
    max_iter: int = 200,
    inner: InnerProduct = np.dot,
    callback: Optional[Callable[[int, Vector], bool]] = None,
    check_symmetry: Optional[bool] = None,
) -> CGResult:
    """
    내적 inner에 대해 자기수반 반양정치인 연산자의 공액기울기 풀이

    Args:
        apply_A: 연산자 작용
        rhs: 우변
        tol: 상대 잔차 허용치 ‖r‖/‖b‖
        max_iter: 최대 반복 수 (0이면 영벡터와 미수렴 플래그 반환)
        inner: 매개변수 공간 내적
        callback: callback(k, x_k)가 True를 반환하면 그 반복에서 종료
        check_symmetry: 자기수반성 무작위 검사 (None이면 Settings.debug)

    Returns:
        CGResult
    """
    b = np.asarray(rhs, dtype=float)
    x = np.zeros_like(b)
    if not np.all(np.isfinite(b)):
        raise CGError("우변에 유한하지 않은 값이 있습니다")

    if get_settings().debug if check_symmetry is None else check_symmetry:
        defect = symmetry_defect(apply_A, inner, b.size)
        if defect > SYMMETRY_TOL:
            raise CGError(f"정규 연산자가 자기수반이 아닙니다 (defect={defect:.3e})")

    b_norm = np.sqrt(inner(b, b))
    if b_norm == 0.0:
        return CGResult(solution=x, iterations=0, converged=True, residual_norms=[0.0])
    if max_iter == 0:
        return CGResult(solution=x, iterations=0, converged=False, residual_norms=[1.0])

    r = b.copy()
    p = r.copy()
    rr = inner(r, r)
    history = [1.0]

    for k in range(1, max_iter + 1):
        Ap = apply_A(p)
        if not np.all(np.isfinite(Ap)):
            raise CGError(f"연산자 작용에 유한하지 않은 값이 있습니다 (반복 {k})")
        curvature = inner(p, Ap)
        if curvature <= 0.0:
            logger.warning(f"[CG] 비양정 방향 감지 - 반복 {k}, ⟨p, Ap⟩={curvature:.3e}")
            return CGResult(solution=x, iterations=k - 1, converged=False, residual_norms=history)

        step = rr / curvature
        x = x + step * p
        r = r - step * Ap
        rr_new = inner(r, r)
        history.append(float(np.sqrt(max(rr_new, 0.0)) / b_norm))

        if callback is not None and callback(k, x):
            return CGResult(
                solution=x, iterations=k, converged=True, residual_norms=history, stopped_by_callback=True
            )
        if history[-1] <= tol:
            return CGResult(solution=x, iterations=k, converged=True, residual_norms=history)

        p = r + (rr_new / rr) * p
        rr = rr_new

    return CGResult(solution=x, iterations=max_iter, converged=False, residual_norms=history)


def newton_cg_inner(
    apply_A: Operator,
    rhs: ArrayLike,
    linear_residual: Callable[[Vector], float],
    target: float,
    max_iter: int,
    inner: InnerProduct = np.dot,
) -> CGResult:
    """
    정규화 없는 정규방정식 CG를 선형화 잔차가 target 이하가 되는 첫 반복에서 멈춘다
    """
    return cg_solve(
        apply_A,
        rhs,
        tol=np.finfo(float).eps,
        max_iter=max_iter,
        inner=inner,
        callback=lambda _, x: linear_residual(x) <= target,
    )


def _h1_riesz(grid: SourceGrid) -> Operator:
    """H¹ 이차형식 (L + I_w)의 Ω 가중 내적 Riesz 표현"""
    h1 = grid.h1_matrix()
    return lambda q: h1 @ q / grid.measures  # type: ignore[no-any-return]


def invert_source(
    C_obs: CovarianceMatrix,
    G: NearFieldMatrix,
    grid: SourceGrid,
    cfg: InversionConfig,
    meas: MeasurementArray,
    n_sample: Optional[int] = None,
) -> Tuple[NDArray[np.float64], RunRecord]:
    """
    원천 세기 Tikhonov 역산

    ½‖W^{-1/2}(C(q) − C^obs)‖² + (α/2) qᵀ(L + I_w)q 의 최소화를 Ω 가중 내적의 CG로 푼다.
    """
    if G.n_src != grid.n_src or G.n_meas != C_obs.n_meas:
        raise DimensionError(
            f"차원 불일치: G {G.entries.shape}, N_src {grid.n_src}, C^obs {C_obs.entries.shape}"
        )
    started = time.perf_counter()
    record = RunRecord(mode=InversionMode.SOURCE.value, config=cfg.model_dump(mode="json"))
    alpha = cfg.resolved_alpha0(n_sample)
    mu = meas.surface_measure
    Wop = build_weight(C_obs, cfg.beta)
    penalty = _h1_riesz(grid)

    observed = C_obs.entries
    if cfg.model_noise:
        observed = observed - cfg.beta * np.eye(C_obs.n_meas)

    def apply_normal(q: Vector) -> Vector:
        K = weight_apply(Wop, covariance_signed(G.entries, q), -1.0)
        return source_adjoint(G, K, grid.measures, mu) + alpha * penalty(q)

    rhs = source_adjoint(G, weight_apply(Wop, observed, -1.0), grid.measures, mu)
    try:
        result = cg_solve(apply_normal, rhs, cfg.cg_tol, cfg.cg_max, inner=grid.inner)
    except CGError as e:
        record.stop_reason = "cg_failure"
        raise InversionError(f"원천 역산 CG 실패: {e}", record) from e

    q_hat = result.solution
    misfit = weighted_norm(Wop, covariance_signed(G.entries, q_hat) - observed, mu)
    reference = weighted_norm(Wop, observed, mu)
    record.iterations.append(
        IterationRecord(
            iteration=0,
            alpha=alpha,
            residual=misfit,
            relative_residual=misfit / reference if reference else 0.0,
            regularization=alpha * float(q_hat @ (grid.h1_matrix() @ q_hat)),
            source_update_norm=float(np.sqrt(grid.inner(q_hat, q_hat))),
            cg_iterations=result.iterations,
            cg_converged=result.converged,
            wall_time=time.perf_counter() - started,
        )
    )
    if not result.converged:
        record.flag("cg_not_converged")
    record.final_q = q_hat.tolist()
    record.final_residual = misfit
    record.stop_reason = "solved"
    record.wall_time = time.perf_counter() - started
    logger.info(
        f"[TikhonovCG] 원천 역산 완료 - α={alpha:.3e}, CG={result.iterations}, 잔차={misfit:.4e}"
    )
    return q_hat, record


def _admissible(shape: StarShape, setup: Acquisition) -> bool:
    try:
        check_geometry(shape, setup.grid, setup.meas)
    except GeometryError:
        return False
    return True


def residual_stagnated(history: List[float], window: int, tol: float) -> bool:
    """window 반복 전 대비 상대 감소량이 tol 미만이면 정체"""
    if len(history) <= window:
        return False
    previous = history[-1 - window]
    return previous > 0.0 and (previous - history[-1]) / previous < tol


@dataclass(frozen=True)
class _Subproblem:
    """
    한 Newton 단계의 선형화 최소제곱 부분 문제

    매개변수 벡터는 [∂ρ 계수, ∂q] 이며 update_source가 False면 q 블록은 항상 0이다.
    """

    point: LinearizationPoint
    weight: WeightOperator
    alpha: Optional[float]
    update_source: bool
    penalty: Operator

    @property
    def k(self) -> int:
        return self.point.n_shape

    def split(self, x: Vector) -> Tuple[Vector, Optional[Vector]]:
        return x[: self.k], (x[self.k :] if self.update_source else None)

    def pack(self, dr: Vector, dq: Optional[Vector]) -> Vector:
        return np.concatenate([dr, dq if dq is not None else np.zeros(self.point.n_src)])

    def inner(self, x: Vector, y: Vector) -> float:
        value = self.point.shape_inner(x[: self.k], y[: self.k])
        if self.update_source:
            value += self.point.grid.inner(x[self.k :], y[self.k :])
        return value

    def linear_map(self, x: Vector) -> NDArray[np.complex128]:
        dr, dq = self.split(x)
        return covariance_derivative(self.point, dr, dq)

    def pull_back(self, K: NDArray[np.complex128]) -> Vector:
        a_dr, a_dq = covariance_adjoint_vectors(self.point, K)
        return self.pack(a_dr, a_dq if self.update_source else None)

    def apply_normal(self, x: Vector) -> Vector:
        """C′*W⁻¹C′x + α R x"""
        out = self.pull_back(weight_apply(self.weight, self.linear_map(x), -1.0))
        if self.alpha is not None:
            dr, dq = self.split(x)
            out = out + self.alpha * self.pack(dr, self.penalty(dq) if dq is not None else None)
        return out


def _gauss_newton(
    C_obs: CovarianceMatrix,
    init_shape: StarShape,
    init_q: ArrayLike,
    setup: Acquisition,
    cfg: InversionConfig,
    mode: InversionMode,
    update_source: bool,
) -> Tuple[StarShape, NDArray[np.float64], RunRecord]:
    """형상(과 선택적으로 q) Gauss-Newton 공통 드라이버"""
    newton_cg = mode == InversionMode.NEWTON_CG
    tag = "[NewtonCG]" if newton_cg else "[IRGNM]"
    started = time.perf_counter()
    record = RunRecord(mode=mode.value, config=cfg.model_dump(mode="json"))

    settings = get_settings()
    n_bdy = cfg.n_bdy or settings.n_bdy
    s = settings.sobolev_s if cfg.s is None else cfg.s
    grid, meas = setup.grid, setup.meas
    mu = meas.surface_measure
    noise = cfg.beta if cfg.model_noise else 0.0

    Wop = build_weight(C_obs, cfg.beta)
    reference = weighted_norm(Wop, C_obs.entries, mu)
    penalty = _h1_riesz(grid)
    threshold: Optional[float] = None
    if cfg.discrepancy_tau is not None and setup.n_sample:
        threshold = cfg.discrepancy_tau * expected_noise_norm(Wop, setup.n_sample, mu)
        logger.info(f"{tag} 불일치 원리 종료 기준 τ·δ={threshold:.4e}")

    shape = init_shape
    rho_0 = init_shape.to_vector()
    q = np.asarray(init_q, dtype=float).copy()
    if q.shape != (grid.n_src,):
        raise DimensionError(f"초기 q 길이 {q.shape} != N_src {grid.n_src}")
    if not _admissible(shape, setup):
        raise InversionError("초기 형상이 원천점/측정점과 겹칩니다", record)

    history: List[float] = []
    L: Optional[LinearizationPoint] = None
    record.stop_reason = "max_newton"

    for n in range(cfg.max_newton):
        t0 = time.perf_counter()
        try:
            L = linearize(shape, q, grid, meas, setup.kappa, n_bdy, s)
        except BIESolverError as e:
            record.stop_reason = "bie_failure"
            raise InversionError(f"반복 {n}에서 BIE 풀이 실패: {e}", record) from e

        X = residual(L, C_obs, noise)
        current = weighted_norm(Wop, X, mu)
        history.append(current)
        if threshold is not None and current <= threshold:
            record.stop_reason = "discrepancy"
            break
        if newton_cg and residual_stagnated(history, cfg.stagnation_window, cfg.stagnation_tol):
            record.stop_reason = "stagnation"
            break

        alpha = None if newton_cg else cfg.alpha_at(n, setup.n_sample)
        sub = _Subproblem(
            point=L, weight=Wop, alpha=alpha, update_source=update_source, penalty=penalty
        )
        rhs = -sub.pull_back(weight_apply(Wop, X, -1.0))
        offset = shape.to_vector() - rho_0
        if alpha is not None:
            rhs[: sub.k] -= alpha * offset

        try:
            if newton_cg:
                result = newton_cg_inner(
                    sub.apply_normal,
                    rhs,
                    lambda x, sub=sub, X=X: weighted_norm(Wop, X + sub.linear_map(x), mu),
                    cfg.newton_cg_factor * current,
                    cfg.cg_max,
                    inner=sub.inner,
                )
            else:
                result = cg_solve(sub.apply_normal, rhs, cfg.cg_tol, cfg.cg_max, inner=sub.inner)
        except CGError as e:
            record.stop_reason = "cg_failure"
            raise InversionError(f"반복 {n}에서 CG 실패: {e}", record) from e

        dr, dq = sub.split(result.solution)

        step = 1.0
        candidate: Optional[StarShape] = None
        halvings = 0
        for halvings in range(cfg.max_halvings + 1):
            try:
                trial: Optional[StarShape] = StarShape.from_vector(
                    shape.to_vector() + step * dr, center=shape.center
                )
            except ValueError:
                trial = None
            if trial is not None and _admissible(trial, setup):
                candidate = trial
                break
            step *= 0.5
        if candidate is None:
            record.stop_reason = "inadmissible"
            raise InversionError(
                f"반복 {n}: {cfg.max_halvings}회 반감 후에도 허용 형상을 찾지 못했습니다", record
            )

        shape = candidate
        if dq is not None:
            q = np.maximum(q + step * dq, 0.0)

        increased = n >= 2 and current > history[-2]
        if increased:
            record.flag(f"residual_increase@{n}")
        relative = current / reference if reference else 0.0
        record.iterations.append(
            IterationRecord(
                iteration=n,
                alpha=alpha,
                residual=current,
                relative_residual=relative,
                regularization=(alpha or 0.0) * L.shape_inner(offset, offset),
                shape_update_norm=float(np.sqrt(L.shape_inner(dr, dr))),
                source_update_norm=float(np.sqrt(grid.inner(dq, dq))) if dq is not None else 0.0,
                cg_iterations=result.iterations,
                cg_converged=result.converged,
                step=step,
                halvings=halvings,
                residual_increased=increased,
                wall_time=time.perf_counter() - t0,
            )
        )
        alpha_text = "-" if alpha is None else f"{alpha:.3e}"
        logger.info(
            f"{tag} 반복 {n} - 잔차={current:.4e} (상대 {relative:.4e}), "
            f"α={alpha_text}, CG={result.iterations}, 스텝={step:g}"
        )

    final_G = assemble_nearfield(shape, grid, meas, setup.kappa, n_bdy)
    final_X = covariance_signed(final_G.entries, q) - C_obs.entries
    if noise:
        final_X = final_X + noise * np.eye(C_obs.n_meas)
    record.final_residual = weighted_norm(Wop, final_X, mu)
    record.final_shape = shape.model_dump(by_alias=True)
    record.final_q = q.tolist()
    if L is not None:
        record.solver = {key: v for key, v in L.solver.metadata().items() if key != "obstacle"}
    record.wall_time = time.perf_counter() - started
    logger.info(f"{tag} 종료 - 사유={record.stop_reason}, 최종 잔차={record.final_residual:.4e}")
    return shape, q, record


def _check_known_strength(q_known: ArrayLike) -> NDArray[np.float64]:
    q_arr = np.asarray(q_known, dtype=float)
    if np.any(q_arr < 0.0):
        raise InversionError("알려진 q는 음수일 수 없습니다")
    return q_arr


def invert_shape(
    C_obs: CovarianceMatrix,
    q_known: ArrayLike,
    init_shape: StarShape,
    cfg: InversionConfig,
    setup: Acquisition,
) -> Tuple[StarShape, RunRecord]:
    """알려진 q에서 형상 IRGNM"""
    q_arr = _check_known_strength(q_known)
    shape, _, record = _gauss_newton(
        C_obs, init_shape, q_arr, setup, cfg, InversionMode.SHAPE, update_source=False
    )
    return shape, record


def invert_joint(
    C_obs: CovarianceMatrix,
    init_shape: StarShape,
    init_q: ArrayLike,
    cfg: InversionConfig,
    setup: Acquisition,
) -> Tuple[StarShape, NDArray[np.float64], RunRecord]:
    """형상과 원천 세기 동시 Gauss-Newton (q는 0에서 잘라 양수 유지)"""
    return _gauss_newton(
        C_obs, init_shape, init_q, setup, cfg, InversionMode.JOINT, update_source=cfg.update_source
    )


def invert_shape_newton_cg(
    C_obs: CovarianceMatrix,
    q_known: ArrayLike,
    init_shape: StarShape,
    cfg: InversionConfig,
    setup: Acquisition,
) -> Tuple[StarShape, RunRecord]:
    """조기 종료 CG를 정규화로 쓰는 Newton-CG 형상 역산"""
    q_arr = _check_known_strength(q_known)
    shape, _, record = _gauss_newton(
        C_obs, init_shape, q_arr, setup, cfg, InversionMode.NEWTON_CG, update_source=False
    )
    return shape, record
