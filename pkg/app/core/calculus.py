"""
미분 모듈
형상/원천 세기에 대한 공분산 순방향 사상의 Fréchet 미분과 그 이산 수반

G′(∂ρ) = A · diag(−(h·ν) |p′| 2π/N) · B
  A_lj = ∂G_D(x_l, z_j)/∂ν(z_j),  B_jn = ∂G_D(z_j, y_n)/∂ν(z_j) |Ω_n|^{1/2}
C′(∂ρ, ∂q) = 2Re(G′(∂ρ) M_q G^H) + G M_∂q G^H,  Re(K) = (K + K^H)/2

수반은 이 이산 미분의 행렬 수반으로 정의되므로 수반 항등식이 기계 정밀도로 성립한다.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.config import get_settings
from app.core.bie import ExteriorSolver, get_solver
from app.core.errors import DimensionError, GeometryError
from app.core.forward import (
    CovarianceMatrix,
    MeasurementArray,
    NearFieldMatrix,
    SourceGrid,
    assemble_nearfield,
    covariance_signed,
    data_inner,
)
from app.core.geometry import normal_speed_adjoint_vector, normal_speed_matrix, sobolev_weights
from app.core.stochastics import WeightOperator, weight_apply
from app.models.shape import RadialPerturbation, StarShape

logger = logging.getLogger(__name__)

__all__ = [
    "LinearizationPoint",
    "linearize",
    "nearfield_shape_derivative",
    "covariance_derivative",
    "covariance_adjoint",
    "covariance_adjoint_vectors",
    "source_derivative",
    "source_adjoint",
    "data_inner",
    "residual",
    "misfit_and_gradient",
]


@dataclass(frozen=True)
class LinearizationPoint:
    """
    선형화 지점 (ρ, q)과 캐시된 행렬들

    Attributes:
        shape: 현재 형상
        q: 원천 세기 (부호 제한 없음)
        solver: 현재 형상의 BIE 솔버
        grid / meas: 원천 격자와 측정 배열
        G: 근접장 행렬
        bdy_to_meas: A, shape (N_meas, N_bdy)
        src_to_bdy: B, shape (N_bdy, N_src)
        speed_matrix: 계수 → 노드 h·ν 행렬
        s: H^s 지수
    """

    shape: StarShape
    q: NDArray[np.float64]
    solver: ExteriorSolver
    grid: SourceGrid
    meas: MeasurementArray
    G: NearFieldMatrix
    bdy_to_meas: NDArray[np.complex128]
    src_to_bdy: NDArray[np.complex128]
    speed_matrix: NDArray[np.float64]
    s: float

    @property
    def n_shape(self) -> int:
        return int(self.speed_matrix.shape[1])

    @property
    def n_src(self) -> int:
        return self.grid.n_src

    @property
    def surface_measure(self) -> float:
        return self.meas.surface_measure

    def model(self) -> NDArray[np.complex128]:
        """C(ρ, q)"""
        return covariance_signed(self.G.entries, self.q)

    def shape_inner(self, a: ArrayLike, b: ArrayLike) -> float:
        return float(np.sum(np.asarray(a) * np.asarray(b) * sobolev_weights(self.shape.degree, self.s)))


def linearize(
    shape: StarShape,
    q: ArrayLike,
    grid: SourceGrid,
    meas: MeasurementArray,
    kappa: float,
    n_bdy: Optional[int] = None,
    s: Optional[float] = None,
) -> LinearizationPoint:
    """형상 ρ와 원천 세기 q에서 미분에 필요한 행렬을 조립한다"""
    q_arr = np.asarray(q, dtype=float)
    if q_arr.shape != (grid.n_src,):
        raise DimensionError(f"q 길이 {q_arr.shape} != N_src {grid.n_src}")

    solver = get_solver(shape, kappa, n_bdy or get_settings().n_bdy)
    if not isinstance(solver, ExteriorSolver):
        raise GeometryError("선형화에는 장애물 형상이 필요합니다")

    G = assemble_nearfield(shape, grid, meas, kappa, solver=solver)
    bdy_to_meas = solver.normal_derivative_matrix(meas.points).T
    src_to_bdy = solver.normal_derivative_matrix(grid.points) * np.sqrt(grid.measures)[None, :]
    return LinearizationPoint(
        shape=shape,
        q=q_arr,
        solver=solver,
        grid=grid,
        meas=meas,
        G=G,
        bdy_to_meas=bdy_to_meas,
        src_to_bdy=src_to_bdy,
        speed_matrix=normal_speed_matrix(shape, solver.mesh),
        s=get_settings().sobolev_s if s is None else float(s),
    )


def _shape_vector(L: LinearizationPoint, dr: Union[RadialPerturbation, ArrayLike]) -> NDArray[np.float64]:
    vec = dr.to_vector() if isinstance(dr, RadialPerturbation) else np.asarray(dr, dtype=float)
    if vec.shape != (L.n_shape,):
        raise DimensionError(f"섭동 계수 개수 {vec.shape} != ({L.n_shape},)")
    return vec


def nearfield_shape_derivative(
    L: LinearizationPoint, dr: Union[RadialPerturbation, ArrayLike]
) -> NDArray[np.complex128]:
    """G′(∂ρ), shape (N_meas, N_src)"""
    normal = L.speed_matrix @ _shape_vector(L, dr)
    # 구적 가중치는 대각 곱에 둔다
    diagonal = -normal * L.solver.mesh.arc_weights
    return (L.bdy_to_meas * diagonal[None, :]) @ L.src_to_bdy  # type: ignore[no-any-return]


def source_derivative(G: NearFieldMatrix, dq: ArrayLike) -> NDArray[np.complex128]:
    """q 방향 미분 G M_∂q G^H (선형이므로 C(∂q) 자체)"""
    return covariance_signed(G.entries, dq)


def source_adjoint(
    G: NearFieldMatrix, K: ArrayLike, measures: NDArray[np.float64], surface_measure: float
) -> NDArray[np.float64]:
    """source_derivative의 수반: μ² Re diag(G^H K G) / |Ω|"""
    entries = G.entries
    diag = np.sum(entries.conj() * (np.asarray(K, dtype=complex) @ entries), axis=0)
    return surface_measure**2 * np.real(diag) / measures  # type: ignore[no-any-return]


def covariance_derivative(
    L: LinearizationPoint,
    dr: Union[RadialPerturbation, ArrayLike],
    dq: Optional[ArrayLike] = None,
) -> NDArray[np.complex128]:
    """C′(∂ρ, ∂q) (에르미트)"""
    G = L.G.entries
    shape_part = nearfield_shape_derivative(L, dr) @ (L.q[:, None] * G.conj().T)
    result = shape_part + shape_part.conj().T
    if dq is not None:
        dq_arr = np.asarray(dq, dtype=float)
        if dq_arr.shape != (L.n_src,):
            raise DimensionError(f"∂q 길이 {dq_arr.shape} != ({L.n_src},)")
        result = result + covariance_signed(G, dq_arr)
    return result  # type: ignore[no-any-return]


def covariance_adjoint_vectors(
    L: LinearizationPoint, K: ArrayLike
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """covariance_adjoint의 계수 벡터 형태 (∂ρ* 계수, ∂q*)"""
    K_arr = np.asarray(K, dtype=complex)
    if K_arr.shape != (L.meas.n_meas, L.meas.n_meas):
        raise DimensionError(f"K 크기 {K_arr.shape} != ({L.meas.n_meas}, {L.meas.n_meas})")
    c = L.surface_measure**2

    G = L.G.entries
    pulled = (K_arr + K_arr.conj().T) @ (G * L.q[None, :])
    node_diag = np.sum((L.bdy_to_meas.conj().T @ pulled) * L.src_to_bdy.conj(), axis=1)
    mesh_values = -c * np.real(node_diag)
    dr_star = normal_speed_adjoint_vector(L.shape, L.solver.mesh, mesh_values, L.s)

    dq_star = source_adjoint(L.G, K_arr, L.grid.measures, L.surface_measure)
    return dr_star, dq_star


def covariance_adjoint(
    L: LinearizationPoint, K: ArrayLike
) -> Tuple[RadialPerturbation, NDArray[np.float64]]:
    """
    covariance_derivative의 수반

    ⟨C′(∂ρ, ∂q), K⟩_data = ⟨∂ρ, ∂ρ*⟩_{H^s} + ⟨∂q, ∂q*⟩_Ω
    """
    dr_star, dq_star = covariance_adjoint_vectors(L, K)
    return RadialPerturbation.from_vector(dr_star), dq_star


def residual(
    L: LinearizationPoint, C_obs: Union[CovarianceMatrix, ArrayLike], noise: float = 0.0
) -> NDArray[np.complex128]:
    """X = C(ρ, q) + noise·I − C^obs"""
    observed = C_obs.entries if isinstance(C_obs, CovarianceMatrix) else np.asarray(C_obs)
    model = L.model()
    if noise:
        model = model + noise * np.eye(model.shape[0])
    return model - observed  # type: ignore[no-any-return]


def misfit_and_gradient(
    L: LinearizationPoint,
    C_obs: Union[CovarianceMatrix, ArrayLike],
    Wop: WeightOperator,
    noise: float = 0.0,
) -> Tuple[float, NDArray[np.float64], NDArray[np.float64]]:
    """
    ½‖W^{-1/2}(C(ρ, q) − C^obs)‖² 과 그 기울기 (H^s 계수, Ω 가중 q)

    데이터 공간 기울기는 W^{-1}X 이며 수반으로 매개변수 공간에 당긴다.
    """
    X = residual(L, C_obs, noise)
    Y = weight_apply(Wop, X, -0.5)
    value = 0.5 * data_inner(Y, Y, L.surface_measure)
    grad_dr, grad_dq = covariance_adjoint_vectors(L, weight_apply(Wop, X, -1.0))
    return value, grad_dr, grad_dq
