"""Modified Bessel functions I0, I1, I2 and the ratios used by the stiffness formulas.

Library evaluation goes through the exponentially scaled ``scipy.special.ive``
so that ratios at the same (or comparable) arguments never overflow. The
power-series and large-argument expansions are kept as independent reference
kernels for the crossover checks.
"""
import logging
import math
from typing import Union

import numpy as np
from scipy import special

from core.errors import DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

SUPPORTED_ORDERS = (0, 1, 2)
SERIES_CROSSOVER = 15.0


def _check_order(order: int):
    if order not in SUPPORTED_ORDERS:
        raise DomainError(f"Unsupported Bessel order: {order}", order=order)


def _as_argument(x: ArrayLike, allow_inf: bool = False) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("Bessel argument is NaN")
    if np.any(arr < 0):
        raise DomainError("Bessel argument must be nonnegative", argument=float(np.min(arr)))
    if not allow_inf and np.any(np.isinf(arr)):
        raise DomainError("Bessel argument must be finite")
    return arr


def _unwrap(value: np.ndarray, like: ArrayLike) -> ArrayLike:
    if np.ndim(like) == 0:
        return float(value)
    return value


def bessel_i(order: int, x: ArrayLike) -> ArrayLike:
    """I_n(x) for n in {0, 1, 2}. Overflows to inf past x ~ 713, use ratios there."""
    _check_order(order)
    arr = _as_argument(x)
    return _unwrap(special.iv(order, arr), x)


def bessel_i_scaled(order: int, x: ArrayLike) -> ArrayLike:
    """exp(-x) I_n(x)."""
    _check_order(order)
    arr = _as_argument(x, allow_inf=True)
    return _unwrap(special.ive(order, arr), x)


def bessel_i_ratio(num_order: int, den_order: int, x: ArrayLike) -> ArrayLike:
    """I_num(x) / I_den(x) without intermediate overflow.

    The x = 0 and x = inf limits are returned exactly.
    """
    _check_order(num_order)
    _check_order(den_order)
    arr = np.atleast_1d(_as_argument(x, allow_inf=True))
    out = np.empty_like(arr)

    at_zero = arr == 0.0
    at_inf = np.isinf(arr)
    inner = ~(at_zero | at_inf)

    if num_order == den_order:
        zero_limit = 1.0
    elif num_order > den_order:
        zero_limit = 0.0
    else:
        zero_limit = math.inf
    out[at_zero] = zero_limit
    out[at_inf] = 1.0
    if np.any(inner):
        xi = arr[inner]
        out[inner] = special.ive(num_order, xi) / special.ive(den_order, xi)
    return _unwrap(out.reshape(np.shape(x)), x) if np.ndim(x) else float(out[0])


def bessel_i_quotient(num_order: int, x: ArrayLike, den_order: int, y: float) -> ArrayLike:
    """I_num(x) / I_den(y) for x <= y, evaluated as scaled values times exp(x - y)."""
    _check_order(num_order)
    _check_order(den_order)
    arr = _as_argument(x)
    y = float(y)
    if y < 0 or math.isnan(y) or math.isinf(y):
        raise DomainError("Denominator argument must be finite and nonnegative", argument=y)
    value = special.ive(num_order, arr) / special.ive(den_order, y) * np.exp(arr - y)
    return _unwrap(value, x)


def polar_ratio(x: ArrayLike) -> ArrayLike:
    """2 I1(x) / (x I0(x)), equal to 1 at x = 0 and to 0 at x = inf."""
    arr = np.atleast_1d(_as_argument(x, allow_inf=True))
    out = np.empty_like(arr)
    small = arr < 1e-6
    big = np.isinf(arr)
    mid = ~(small | big)
    out[small] = 1.0 - arr[small] ** 2 / 8.0
    out[big] = 0.0
    out[mid] = 2.0 * special.ive(1, arr[mid]) / (arr[mid] * special.ive(0, arr[mid]))
    return _unwrap(out.reshape(np.shape(x)), x) if np.ndim(x) else float(out[0])


def second_order_ratio(x: ArrayLike) -> ArrayLike:
    """I2(x) / I0(x), equal to 1 - polar_ratio(x) by the recurrence."""
    return bessel_i_ratio(2, 0, x)


def second_order_ratio_over_square(x: ArrayLike) -> ArrayLike:
    """I2(x) / (x**2 I0(x)), equal to 1/8 at x = 0 and to 0 at x = inf."""
    arr = np.atleast_1d(_as_argument(x, allow_inf=True))
    out = np.empty_like(arr)
    small = arr < 1e-4
    big = np.isinf(arr)
    mid = ~(small | big)
    out[small] = (1.0 - arr[small] ** 2 / 6.0) / 8.0
    out[big] = 0.0
    xm = arr[mid]
    out[mid] = special.ive(2, xm) / special.ive(0, xm) / xm ** 2
    return _unwrap(out.reshape(np.shape(x)), x) if np.ndim(x) else float(out[0])


def bessel_i_series(order: int, x: float, max_terms: int = 400) -> float:
    """Power series sum_k (x/2)^(2k+n) / (k! (k+n)!) to machine precision."""
    _check_order(order)
    x = float(_as_argument(x))
    half = 0.5 * x
    term = half ** order / math.factorial(order)
    total = term
    q = half * half
    for k in range(1, max_terms):
        term *= q / (k * (k + order))
        total += term
        if term <= 1e-17 * total:
            break
    return total


def bessel_i_asymptotic(order: int, x: float, max_terms: int = 60) -> float:
    """Large-argument expansion of exp(-x) I_n(x), truncated at the smallest term."""
    _check_order(order)
    x = float(_as_argument(x))
    if x <= 0:
        raise DomainError("Asymptotic expansion needs a positive argument", argument=x)
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    for k in range(1, max_terms):
        nxt = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i_reference(order: int, x: float) -> float:
    """Series below the crossover, scaled asymptotic expansion above it (unscaled result)."""
    if float(x) < SERIES_CROSSOVER:
        return bessel_i_series(order, x)
    return bessel_i_asymptotic(order, x) * math.exp(float(x))
