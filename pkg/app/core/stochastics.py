"""
확률 모듈
복소 정규(proper) 원천 표본, 합성 측정 데이터, 경험 공분산, Isserlis 가중 연산자 W

난수 생성기: numpy PCG64. 표본은 BLOCK_SIZE개 단위 블록으로 나뉘며
블록 b는 SeedSequence(seed, spawn_key=(b,))로 독립 스트림을 얻는다.
블록 안에서는 원천 π를 먼저, 측정 잡음 ε을 그 다음에 뽑는다.
"""
import logging
from dataclasses import dataclass
from typing import List, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from app.core.errors import DimensionError, DomainError, WeightOperatorError
from app.core.forward import CovarianceMatrix, NearFieldMatrix, data_inner
from app.utils.parallel import parallel_map

logger = logging.getLogger(__name__)

BLOCK_SIZE = 1024


@dataclass(frozen=True)
class SampleSet:
    """
    측정 표본 u^(j) 집합

    Attributes:
        samples: shape (N_sample, N_meas)
        rng_seed: 재현용 시드
        beta: 측정 잡음 분산
    """

    samples: NDArray[np.complex128]
    rng_seed: int
    beta: float

    def __post_init__(self) -> None:
        if self.samples.ndim != 2:
            raise DimensionError(f"표본 배열은 2차원이어야 합니다: shape={self.samples.shape}")
        if self.samples.shape[0] < 2:
            raise DimensionError(f"표본 수는 2 이상이어야 합니다: {self.samples.shape[0]}")

    @property
    def n_sample(self) -> int:
        return int(self.samples.shape[0])

    @property
    def n_meas(self) -> int:
        return int(self.samples.shape[1])


@dataclass(frozen=True)
class WeightOperator:
    """
    B = C^obs + βI 의 에르미트 고유분해 B = U Λ U^H

    W^p(A) = B^p A conj(B)^p 이며 N² × N² 행렬은 만들지 않는다.
    """

    base: NDArray[np.complex128]
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.complex128]
    beta: float

    @property
    def n_meas(self) -> int:
        return int(self.eigenvalues.size)

    def matrix_power(self, power: float) -> NDArray[np.complex128]:
        U = self.eigenvectors
        return (U * self.eigenvalues**power) @ U.conj().T  # type: ignore[no-any-return]


def _block_stream(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _block_sizes(n_sample: int) -> List[int]:
    full, rest = divmod(n_sample, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _proper_normal(rng: np.random.Generator, variance: NDArray[np.float64], count: int) -> NDArray[np.complex128]:
    """√(v/2)(ξ₁ + iξ₂), shape (count, len(v))"""
    xi = rng.standard_normal((count, variance.size, 2))
    return np.sqrt(0.5 * variance) * (xi[..., 0] + 1j * xi[..., 1])  # type: ignore[no-any-return]


def _check_strength(q: ArrayLike) -> NDArray[np.float64]:
    q_arr = np.asarray(q, dtype=float)
    if q_arr.ndim != 1:
        raise DimensionError(f"q는 1차원이어야 합니다: shape={q_arr.shape}")
    if np.any(q_arr < 0.0):
        raise DomainError("원천 세기 q는 음수일 수 없습니다")
    return q_arr


def sample_sources(q: ArrayLike, n_sample: int, seed: int) -> NDArray[np.complex128]:
    """
    π^(j) ~ CN(0, diag(q)) 표본, shape (N_sample, N_src)

    E[ππ^H] = diag(q), E[ππ^T] = 0
    """
    q_arr = _check_strength(q)
    if n_sample < 1:
        raise DimensionError(f"표본 수는 1 이상이어야 합니다: {n_sample}")

    blocks = list(enumerate(_block_sizes(n_sample)))
    parts = parallel_map(lambda item: _proper_normal(_block_stream(seed, item[0]), q_arr, item[1]), blocks)
    return np.vstack(parts)


def synthesize_measurements(
    G: Union[NearFieldMatrix, NDArray[np.complex128]],
    q: ArrayLike,
    n_sample: int,
    beta: float,
    seed: int,
) -> SampleSet:
    """
    u^(j) = G π^(j) + ε^(j),  ε^(j) ~ CN(0, βI) 독립

    Args:
        G: 근접장 행렬
        q: 원천 세기 (N_src)
        n_sample: 표본 수 (2 이상)
        beta: 잡음 분산 (0 이상)
        seed: 난수 시드

    Returns:
        SampleSet
    """
    entries = G.entries if isinstance(G, NearFieldMatrix) else np.asarray(G, dtype=complex)
    q_arr = _check_strength(q)
    if q_arr.size != entries.shape[1]:
        raise DimensionError(f"q 길이 {q_arr.size} != N_src {entries.shape[1]}")
    if beta < 0.0:
        raise DomainError(f"잡음 분산 beta는 0 이상이어야 합니다: {beta}")
    if n_sample < 2:
        raise DimensionError(f"표본 수는 2 이상이어야 합니다: {n_sample}")

    noise_variance = np.full(entries.shape[0], float(beta))
    transfer = entries.T

    def _block(item: tuple) -> NDArray[np.complex128]:
        block, count = item
        rng = _block_stream(seed, block)
        sources = _proper_normal(rng, q_arr, count)
        noise = _proper_normal(rng, noise_variance, count)
        return sources @ transfer + noise  # type: ignore[no-any-return]

    samples = np.vstack(parallel_map(_block, list(enumerate(_block_sizes(n_sample)))))
    logger.info(f"[Sampling] 합성 측정 생성 - N_sample={n_sample}, N_meas={entries.shape[0]}, β={beta}")
    return SampleSet(samples=samples, rng_seed=int(seed), beta=float(beta))


def _pairwise_sum(parts: List[NDArray[np.complex128]]) -> NDArray[np.complex128]:
    """고정 트리 순서의 쌍별 합"""
    while len(parts) > 1:
        merged = [parts[k] + parts[k + 1] for k in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            merged.append(parts[-1])
        parts = merged
    return parts[0]


def empirical_covariance(S: Union[SampleSet, ArrayLike]) -> CovarianceMatrix:
    """
    C^obs = (1/N) Σ_j u^(j) (u^(j))^H (표본 평균은 빼지 않는다)

    SampleSet 외에 (N, N_meas) 배열도 받으므로 단일 표본도 처리할 수 있다.
    """
    samples = S.samples if isinstance(S, SampleSet) else np.atleast_2d(np.asarray(S, dtype=complex))
    if samples.shape[0] == 0:
        raise DimensionError("표본 집합이 비어 있습니다")

    starts = range(0, samples.shape[0], BLOCK_SIZE)
    partial = parallel_map(
        lambda s: samples[s : s + BLOCK_SIZE].T @ samples[s : s + BLOCK_SIZE].conj(), list(starts)
    )
    total = _pairwise_sum(partial) / samples.shape[0]
    return CovarianceMatrix(entries=0.5 * (total + total.conj().T))


def build_weight(C_obs: Union[CovarianceMatrix, ArrayLike], beta: float) -> WeightOperator:
    """B = C^obs + βI 의 고유분해"""
    entries = C_obs.entries if isinstance(C_obs, CovarianceMatrix) else np.asarray(C_obs, dtype=complex)
    if not beta > 0.0:
        raise DomainError(f"가중 연산자에는 beta > 0 이 필요합니다: {beta}")
    if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
        raise DimensionError(f"정사각 행렬이 필요합니다: shape={entries.shape}")

    base = entries + beta * np.eye(entries.shape[0])
    try:
        eigenvalues, eigenvectors = linalg.eigh(base)
    except linalg.LinAlgError as e:
        raise WeightOperatorError(f"고유분해 실패: {e}") from e

    if eigenvalues[0] < beta - 1e-12 * max(1.0, float(np.max(np.abs(eigenvalues)))):
        raise WeightOperatorError(
            f"최소 고유값 {eigenvalues[0]:.3e}가 β={beta}보다 작습니다 (C^obs가 반양정치가 아님)"
        )
    return WeightOperator(base=base, eigenvalues=eigenvalues, eigenvectors=eigenvectors, beta=float(beta))


def weight_apply(Wop: WeightOperator, A: ArrayLike, power: float = -1.0) -> NDArray[np.complex128]:
    """W^p(A) = B^p A conj(B)^p"""
    A_arr = np.asarray(A, dtype=complex)
    if A_arr.shape != (Wop.n_meas, Wop.n_meas):
        raise DimensionError(f"행렬 크기 {A_arr.shape} != ({Wop.n_meas}, {Wop.n_meas})")
    left = Wop.matrix_power(power)
    return left @ A_arr @ left.conj()  # type: ignore[no-any-return]


def expected_noise_norm(Wop: WeightOperator, n_sample: int, surface_measure: float) -> float:
    """
    표본 오차 E = C^obs − E[C^obs] 의 기대 가중 노름 δ

    Isserlis 정리로 E|u_i^H E u_j|² = c_i c_j / N (c_i: B의 고유벡터 방향 공분산 = λ_i − β) 이므로
    δ² = μ² (Σ_i c_i / λ_i)² / N
    """
    if n_sample < 1:
        raise DimensionError(f"표본 수는 1 이상이어야 합니다: {n_sample}")
    ratios = np.clip(Wop.eigenvalues - Wop.beta, 0.0, None) / Wop.eigenvalues
    return float(surface_measure * np.sum(ratios) / np.sqrt(n_sample))


def weighted_norm(Wop: WeightOperator, X: ArrayLike, surface_measure: float) -> float:
    """‖W^{-1/2} X‖ (이산 HS 노름)"""
    Y = weight_apply(Wop, X, -0.5)
    return float(np.sqrt(max(data_inner(Y, Y, surface_measure), 0.0)))
