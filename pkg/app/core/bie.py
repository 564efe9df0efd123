"""
경계적분방정식 모듈
결합장(combined-field) Nyström 방법으로 외부 Dirichlet Helmholtz 문제를 풀고
Dirichlet Green 함수 G_D = Φ + G_D^s 와 경계 법선미분 핵을 평가한다.

산란장 표현: u^s(x) = ∫ (∂Φ(x,z)/∂ν(z) − iη Φ(x,z)) φ(z) ds(z), η = κ
경계 방정식: φ + Kφ − iηSφ = 2f (f = u^s의 경계값)
로그 특이성은 Kussmaul–Martensen 분해와 삼각 구적으로 처리한다.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Protocol, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import circulant, lu_factor, lu_solve
from scipy.signal import resample

from app.core.errors import BIESolverError, DomainError, GeometryError
from app.core.geometry import BoundaryMesh, discretize
from app.core.specfun import (
    bessel_j,
    fundamental_solution,
    fundamental_solution_normal_derivative,
    hankel1,
)
from app.models.shape import StarShape
from app.services.cache import get_cache

logger = logging.getLogger(__name__)

# 조건수가 이 값을 넘으면 분해 실패로 간주
MAX_CONDITION = 1e13


def log_quadrature_weights(n_bdy: int) -> NDArray[np.float64]:
    """
    ∫ ln(4 sin²((t − τ)/2)) f(τ) dτ 에 대한 삼각 구적 가중치 행렬 R_{|i−j|}

    R_m = −(2π/n) Σ_{k=1}^{n−1} cos(k t_m)/k − (π/n²) cos(n t_m),  t_m = πm/n
    """
    n = n_bdy // 2
    t = np.pi * np.arange(n_bdy) / n
    k = np.arange(1, n)
    values = -(2.0 * np.pi / n) * (np.cos(np.outer(t, k)) @ (1.0 / k)) - (
        np.pi / n**2
    ) * np.cos(n * t)
    return circulant(values)  # type: ignore[no-any-return]


def combined_field_matrix(mesh: BoundaryMesh, kappa: float, eta: float) -> NDArray[np.complex128]:
    """
    결합장 Nyström 행렬 A = I + R∘K1 + (π/n)K2

    K = L − iηM (L: 이중층, M: 단일층의 매개화 핵), K1은 로그 인자의 계수, K2는 매끄러운 나머지
    """
    n_bdy = mesh.n_nodes
    z = mesh.points
    dz = mesh.tangents
    speed = mesh.jacobians
    t = mesh.thetas

    diag = np.eye(n_bdy, dtype=bool)
    diff = z[:, None, :] - z[None, :, :]
    r = np.where(diag, 1.0, np.linalg.norm(diff, axis=-1))
    # 비정규화 법선 n(τ) = (z2′, −z1′)
    nvec = np.column_stack([dz[:, 1], -dz[:, 0]])
    cross = np.einsum("ijk,jk->ij", diff, nvec)

    kr = kappa * r
    j0 = bessel_j(0, kr)
    j1 = bessel_j(1, kr)
    h0 = hankel1(0, kr)
    h1 = hankel1(1, kr)

    sin_sq = np.sin(0.5 * (t[:, None] - t[None, :])) ** 2
    log_term = np.log(np.where(diag, 1.0, 4.0 * sin_sq))

    double_layer = 0.5j * kappa * cross * h1 / r
    double_layer_log = -(kappa / (2.0 * np.pi)) * cross * j1 / r
    single_layer = 0.5j * h0 * speed[None, :]
    single_layer_log = -(1.0 / (2.0 * np.pi)) * j0 * speed[None, :]

    double_layer_smooth = double_layer - double_layer_log * log_term
    single_layer_smooth = single_layer - single_layer_log * log_term

    # 대각 극한 (곡률 항)
    curvature = np.einsum("ij,ij->i", nvec, mesh.accelerations) / (2.0 * np.pi * speed**2)
    double_layer_log[diag] = 0.0
    double_layer_smooth[diag] = curvature
    single_layer_log[diag] = -speed / (2.0 * np.pi)
    single_layer_smooth[diag] = (
        0.5j - np.euler_gamma / np.pi - np.log(0.5 * kappa * speed) / np.pi
    ) * speed

    kernel_log = double_layer_log - 1j * eta * single_layer_log
    kernel_smooth = double_layer_smooth - 1j * eta * single_layer_smooth

    n = n_bdy // 2
    weights = log_quadrature_weights(n_bdy)
    return np.eye(n_bdy) + weights * kernel_log + (np.pi / n) * kernel_smooth  # type: ignore[no-any-return]


def _inside_polygon(points: NDArray[np.float64], polygon: NDArray[np.float64]) -> NDArray[np.bool_]:
    """짝-홀 규칙 다각형 내부 판정"""
    x, y = points[:, 0:1], points[:, 1:2]
    x0, y0 = polygon[:, 0], polygon[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    crosses = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    return np.sum(crosses & (x < x_cross), axis=1) % 2 == 1  # type: ignore[no-any-return]


class GreenSolver(Protocol):
    """G_D 평가 인터페이스 (장애물 유무 공통)"""

    kappa: float

    def green_matrix(self, targets: ArrayLike, sources: ArrayLike) -> NDArray[np.complex128]: ...

    def metadata(self) -> dict: ...


@dataclass(frozen=True)
class FreeSpaceSolver:
    """장애물 없는 모드: G_D ≡ Φ"""

    kappa: float

    def green_matrix(self, targets: ArrayLike, sources: ArrayLike) -> NDArray[np.complex128]:
        tgt = np.atleast_2d(np.asarray(targets, dtype=float))
        src = np.atleast_2d(np.asarray(sources, dtype=float))
        return np.asarray(
            fundamental_solution(tgt[:, None, :], src[None, :, :], self.kappa), dtype=complex
        )

    def metadata(self) -> dict:
        return {"obstacle": None, "kappa": self.kappa}


@dataclass(frozen=True)
class ExteriorSolver:
    """
    분해된 결합장 시스템을 보관하는 외부 Dirichlet 솔버

    하나의 LU 분해를 모든 우변(모든 원천점, 수반 풀이)에서 재사용한다.
    """

    mesh: BoundaryMesh
    kappa: float
    coupling_eta: float
    factorized_system: Tuple[NDArray[np.complex128], NDArray[np.int32]] = field(repr=False)
    condition: float
    shape: Optional[StarShape] = None

    @property
    def n_bdy(self) -> int:
        return self.mesh.n_nodes

    def metadata(self) -> dict:
        return {
            "obstacle": None if self.shape is None else self.shape.model_dump(by_alias=True),
            "n_bdy": self.n_bdy,
            "kappa": self.kappa,
            "coupling_eta": self.coupling_eta,
            "condition_estimate": self.condition,
        }

    def is_inside(self, points: ArrayLike) -> NDArray[np.bool_]:
        """장애물 내부(경계 포함) 여부"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.shape is not None:
            return self.shape.contains(pts, margin=1e-12)
        return _inside_polygon(pts, self.mesh.points)

    def check_exterior(self, points: ArrayLike, what: str = "점") -> NDArray[np.float64]:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = self.is_inside(pts)
        if np.any(inside):
            raise GeometryError(f"{what}이(가) 장애물 내부에 있습니다: {pts[inside][0].tolist()}")
        return pts

    def densities(self, sources: ArrayLike) -> NDArray[np.complex128]:
        """원천점별 밀도 ψ (경계값 −Φ(·, y)), shape (N_bdy, N_src)"""
        src = self.check_exterior(sources, "원천점")
        boundary_values = -np.asarray(
            fundamental_solution(self.mesh.points[:, None, :], src[None, :, :], self.kappa),
            dtype=complex,
        )
        return lu_solve(self.factorized_system, 2.0 * boundary_values)  # type: ignore[no-any-return]

    def evaluation_matrix(self, targets: ArrayLike) -> NDArray[np.complex128]:
        """밀도를 산란장 값으로 보내는 사다리꼴 구적 행렬, shape (N_tgt, N_bdy)"""
        tgt = self.check_exterior(targets, "평가점")
        diff = tgt[:, None, :] - self.mesh.points[None, :, :]
        r = np.linalg.norm(diff, axis=-1)
        if np.any(r == 0.0):
            raise DomainError("평가점이 경계 노드와 일치합니다")
        kr = self.kappa * r
        projection = np.einsum("ijk,jk->ij", diff, self.mesh.normals)
        kernel = 0.25j * self.kappa * hankel1(1, kr) * projection / r + 0.25 * self.coupling_eta * hankel1(0, kr)
        return kernel * self.mesh.arc_weights[None, :]  # type: ignore[no-any-return]

    def scattered_field(self, targets: ArrayLike, sources: ArrayLike) -> NDArray[np.complex128]:
        """G_D^s(x, y), shape (N_tgt, N_src)"""
        return self.evaluation_matrix(targets) @ self.densities(sources)

    def green_matrix(self, targets: ArrayLike, sources: ArrayLike) -> NDArray[np.complex128]:
        """G_D(x, y) = Φ(x, y) + G_D^s(x, y), shape (N_tgt, N_src)"""
        tgt = np.atleast_2d(np.asarray(targets, dtype=float))
        src = np.atleast_2d(np.asarray(sources, dtype=float))
        incident = np.asarray(
            fundamental_solution(tgt[:, None, :], src[None, :, :], self.kappa), dtype=complex
        )
        return incident + self.scattered_field(tgt, src)

    def normal_derivative_matrix(self, sources: ArrayLike) -> NDArray[np.complex128]:
        """
        경계 노드에서의 ∂G_D(z, y)/∂ν(z), shape (N_bdy, N_src)

        g = ∂G_D/∂ν 는 g + K′g − iηSg = 2(∂Φ/∂ν − iηΦ) 를 만족한다.
        이 행렬은 D⁻¹AᵀD (D = diag|p′|) 이므로 같은 LU 분해의 전치 풀이로 얻는다.
        """
        src = self.check_exterior(sources, "원천점")
        z = self.mesh.points[:, None, :]
        y = src[None, :, :]
        nu = self.mesh.normals[:, None, :]
        rhs = 2.0 * (
            np.asarray(fundamental_solution_normal_derivative(z, y, nu, self.kappa), dtype=complex)
            - 1j
            * self.coupling_eta
            * np.asarray(fundamental_solution(z, y, self.kappa), dtype=complex)
        )
        speed = self.mesh.jacobians[:, None]
        scaled = lu_solve(self.factorized_system, speed * rhs, trans=1)
        return scaled / speed  # type: ignore[no-any-return]

    def boundary_trace(
        self, sources: ArrayLike, refine: int = 2
    ) -> Tuple[NDArray[np.float64], NDArray[np.complex128]]:
        """
        세분 격자에서의 총장 경계값 Φ(z, y) + G_D^s(z, y)

        밀도를 삼각 보간으로 refine·N_bdy 노드에 옮긴 뒤 ½Aφ 로 경계값을 계산한다.
        Dirichlet 조건이 만족되면 0에 가깝다.

        Returns:
            (세분 격자 각도, shape (refine·N_bdy, N_src) 총장 값)
        """
        if self.shape is None:
            raise GeometryError("세분 격자에는 별모양 형상이 필요합니다")
        src = self.check_exterior(sources, "원천점")
        fine = discretize(self.shape, refine * self.n_bdy)
        fine_density = resample(self.densities(src), fine.n_nodes, axis=0)
        scattered = 0.5 * combined_field_matrix(fine, self.kappa, self.coupling_eta) @ fine_density
        incident = np.asarray(
            fundamental_solution(fine.points[:, None, :], src[None, :, :], self.kappa), dtype=complex
        )
        return fine.thetas, incident + scattered


AnySolver = Union[ExteriorSolver, FreeSpaceSolver]


def build_solver(
    mesh: BoundaryMesh, kappa: float, shape: Optional[StarShape] = None
) -> ExteriorSolver:
    """
    결합장 시스템을 조립하고 LU 분해한다 (η = κ)

    Args:
        mesh: 경계 메시
        kappa: 파수
        shape: 내부 판정에 쓸 형상 (없으면 메시 다각형 사용)

    Returns:
        ExteriorSolver
    """
    if not kappa > 0.0:
        raise DomainError(f"파수는 양수여야 합니다: kappa={kappa}")
    if mesh.n_nodes % 2:
        raise GeometryError(f"Nyström 구적에는 짝수 개 노드가 필요합니다: {mesh.n_nodes}")

    eta = float(kappa)
    system = combined_field_matrix(mesh, kappa, eta)
    if not np.all(np.isfinite(system)):
        raise BIESolverError("결합장 행렬에 유한하지 않은 값이 있습니다")

    condition = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise BIESolverError(f"결합장 행렬 분해 실패 (조건수 추정 {condition:.3e})")

    factorized = lu_factor(system)
    logger.debug(f"[BIE] 분해 완료 - N_bdy={mesh.n_nodes}, κ={kappa:.4f}, cond={condition:.3e}")
    return ExteriorSolver(
        mesh=mesh,
        kappa=float(kappa),
        coupling_eta=eta,
        factorized_system=factorized,
        condition=condition,
        shape=shape,
    )


def get_solver(shape: Optional[StarShape], kappa: float, n_bdy: int) -> AnySolver:
    """형상별 솔버 (캐시 재사용). shape가 None이면 장애물 없는 모드"""
    if shape is None:
        return FreeSpaceSolver(kappa=float(kappa))

    cache = get_cache()
    key = cache.make_solver_key(shape.fingerprint(), kappa, n_bdy)
    return cache.get_or_set(key, lambda: build_solver(discretize(shape, n_bdy), kappa, shape))


def green_function(solver: AnySolver, x: ArrayLike, y: ArrayLike) -> complex:
    """G_D(x, y) 단일 평가"""
    x_arr = np.asarray(x, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    if np.array_equal(x_arr, y_arr):
        raise DomainError("G_D는 x = y에서 특이합니다")
    return complex(solver.green_matrix(x_arr[None, :], y_arr[None, :])[0, 0])


def green_kernel_src_to_bdy(solver: ExteriorSolver, y: ArrayLike) -> NDArray[np.complex128]:
    """경계 노드 x에서의 ∂G_D(x, y)/∂ν(x)"""
    return solver.normal_derivative_matrix(np.asarray(y, dtype=float)[None, :])[:, 0]


def green_kernel_bdy_to_meas(solver: ExteriorSolver, x: ArrayLike) -> NDArray[np.complex128]:
    """
    경계 노드 y에서의 ∂G_D(x, y)/∂ν(y)

    상반성 G_D(x, y) = G_D(y, x)에 의해 x를 원천으로 둔 경계 법선미분과 같다.
    """
    return solver.normal_derivative_matrix(np.asarray(x, dtype=float)[None, :])[:, 0]
