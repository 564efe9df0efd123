"""
특수함수 모듈
0, 1차 원통함수와 2차원 Helmholtz 기본해 및 그 법선미분

원통함수는 scipy.special(Cephes)로 평가한다. Cephes는 작은 인자에서 급수,
큰 인자에서 점근전개를 쓰는 두 영역 방식이며 (0, 1e3] 구간에서 상대오차 1e-12 수준이다.
Y_n(x)는 x → 0+에서 로그 발산하므로 아주 작은 x에서는 유한하지만 큰 음수를 반환한다.
"""
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from app.core.errors import DomainError

RealOrArray = Union[float, NDArray[np.float64]]
ComplexOrArray = Union[complex, NDArray[np.complex128]]

SUPPORTED_ORDERS = (0, 1)


def _check_args(order: int, x: ArrayLike) -> NDArray[np.float64]:
    """차수와 인자 정의역 검사"""
    if order not in SUPPORTED_ORDERS:
        raise DomainError(f"지원하지 않는 차수: {order} (0 또는 1만 허용)")
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("인자에 NaN/Inf가 포함되어 있습니다")
    if np.any(arr <= 0.0):
        raise DomainError("원통함수 인자는 양수여야 합니다 (x > 0)")
    return arr


def _unwrap(value: np.ndarray, like: ArrayLike):  # type: ignore[no-untyped-def]
    return value if np.ndim(like) else value[()]


def bessel_j(order: int, x: ArrayLike) -> RealOrArray:
    """제1종 Bessel 함수 J_order(x)"""
    arr = _check_args(order, x)
    values = special.j0(arr) if order == 0 else special.j1(arr)
    return _unwrap(np.asarray(values), x)  # type: ignore[no-any-return]


def bessel_y(order: int, x: ArrayLike) -> RealOrArray:
    """제2종 Bessel 함수 Y_order(x)"""
    arr = _check_args(order, x)
    values = special.y0(arr) if order == 0 else special.y1(arr)
    return _unwrap(np.asarray(values), x)  # type: ignore[no-any-return]


def hankel1(order: int, x: ArrayLike) -> ComplexOrArray:
    """제1종 Hankel 함수 H_order^(1)(x) = J + iY"""
    arr = _check_args(order, x)
    if order == 0:
        values = special.j0(arr) + 1j * special.y0(arr)
    else:
        values = special.j1(arr) + 1j * special.y1(arr)
    return _unwrap(np.asarray(values, dtype=complex), x)  # type: ignore[no-any-return]


def _separation(x: ArrayLike, y: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if diff.shape[-1] != 2:
        raise DomainError(f"2차원 점이 필요합니다: shape={diff.shape}")
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist == 0.0):
        raise DomainError("기본해는 x = y에서 특이합니다")
    return diff, dist


def _check_kappa(kappa: float) -> None:
    if not kappa > 0.0:
        raise DomainError(f"파수는 양수여야 합니다: kappa={kappa}")


def fundamental_solution(x: ArrayLike, y: ArrayLike, kappa: float) -> ComplexOrArray:
    """
    Helmholtz 기본해 Φ(x, y) = (i/4) H_0^(1)(κ|x − y|)

    x, y는 마지막 축 길이가 2인 배열이며 브로드캐스팅된다.
    """
    _check_kappa(kappa)
    _, dist = _separation(x, y)
    return 0.25j * hankel1(0, kappa * dist)  # type: ignore[operator]


def fundamental_solution_normal_derivative(
    x: ArrayLike, y: ArrayLike, nu: ArrayLike, kappa: float
) -> ComplexOrArray:
    """
    x에서의 법선미분 ∂Φ(x, y)/∂ν(x)

    = −(iκ/4) H_1^(1)(κ|x − y|) ((x − y)·ν) / |x − y|
    """
    _check_kappa(kappa)
    diff, dist = _separation(x, y)
    nu_arr = np.asarray(nu, dtype=float)
    projection = np.sum(diff * nu_arr, axis=-1)
    return -0.25j * kappa * hankel1(1, kappa * dist) * projection / dist  # type: ignore[operator]
