"""Double precision special functions used everywhere else.

log-gamma, Legendre polynomials, fully normalized associated Legendre
values, and the radial kernel profiles Lambda_n with Lambda_n(0) = 1.
All functions are pure and accept scalars; legendre_p,
assoc_legendre_normalized and radial_profile also broadcast over ndarrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalPolicy",
    "DEFAULT_POLICY",
    "log_gamma",
    "legendre_p",
    "legendre_weighted_sum",
    "assoc_legendre_normalized",
    "radial_profile",
]

INV_SQRT_4PI = 0.5 / math.sqrt(math.pi)

# series / asymptotic split for J_0; both branches agree to ~5e-11 on [10, 14]
J0_SWITCH = 12.0


@dataclass(frozen=True)
class EvalPolicy:
    """Termination policy for series evaluation."""

    rel_tol: float = 1e-16
    max_terms: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0):
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_POLICY = EvalPolicy()


def log_gamma(x: float) -> float:
    """ln Gamma(x) for finite x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma needs finite x > 0, got {x}")
    return math.lgamma(x)


def _check_t(t):
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < -1.0) or np.any(arr > 1.0):
        raise ValueError("argument must lie in [-1, 1]")
    return arr


def legendre_p(l: int, t):
    """Legendre polynomial P_l(t) by the upward three-term recurrence.

    t may be a scalar or an ndarray in [-1, 1].
    """
    if l != int(l) or l < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {l}")
    l = int(l)
    arr = _check_t(t)
    p_prev = np.ones_like(arr)
    if l == 0:
        return float(p_prev) if arr.ndim == 0 else p_prev
    p = arr.copy()
    for k in range(1, l):
        p, p_prev = ((2 * k + 1) * arr * p - k * p_prev) / (k + 1), p
    return float(p) if arr.ndim == 0 else p


def legendre_weighted_sum(weights, t):
    """sum_l weights[l] * P_l(t) in one upward pass.

    weights indexes degrees 0..L; t scalar or ndarray in [-1, 1].
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise ValueError("weights must be a nonempty 1-d array")
    arr = _check_t(t)
    p_prev = np.ones_like(arr)
    acc = weights[0] * p_prev
    if weights.size > 1:
        p = arr.copy()
        acc = acc + weights[1] * p
        for k in range(1, weights.size - 1):
            p, p_prev = ((2 * k + 1) * arr * p - k * p_prev) / (k + 1), p
            acc = acc + weights[k + 1] * p
    return float(acc) if arr.ndim == 0 else acc


def assoc_legendre_normalized(l: int, m: int, t):
    """Fully normalized associated Legendre value N_l^m P_l^m(t).

    N_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!), so the real spherical
    harmonics assembled from these values are L2-orthonormal on the unit
    sphere. No Condon-Shortley phase. Stable diagonal-then-upward
    recurrence in l; t may be a scalar or an ndarray.
    """
    if l != int(l) or m != int(m) or l < 0:
        raise ValueError(f"need integer degree/order, got l={l} m={m}")
    l, m = int(l), int(m)
    if m < 0 or m > l:
        raise ValueError(f"order must satisfy 0 <= m <= l, got l={l} m={m}")
    arr = _check_t(t)
    s = np.sqrt(np.maximum(0.0, 1.0 - arr * arr))
    # diagonal: pbar_{m,m}
    p = np.full_like(arr, INV_SQRT_4PI)
    for j in range(1, m + 1):
        p = p * math.sqrt((2 * j + 1) / (2.0 * j)) * s
    if l > m:
        p, p_prev = math.sqrt(2 * m + 3.0) * arr * p, p
        for k in range(m + 2, l + 1):
            a = math.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = math.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
            p, p_prev = a * (arr * p - b * p_prev), p
    return float(p) if arr.ndim == 0 else p


# ((2k-1)!!)^2 / (k! 8^k) for the Hankel expansion of J_0
_HANKEL_C = [1.0]
for _k in range(1, 28):
    _HANKEL_C.append(_HANKEL_C[-1] * (2 * _k - 1) ** 2 / (8.0 * _k))


def _j0_series(x, policy: EvalPolicy):
    """Power series sum (-1)^k (x^2/4)^k / (k!)^2, compensated accumulation."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    comp = np.zeros_like(x)
    for k in range(1, policy.max_terms + 1):
        term = term * (-q) / (k * k)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if np.all(np.abs(term) < 1e-18):
            break
    return total


def _j0_asymptotic(x):
    """Hankel expansion for x >= ~10, truncated at the smallest term."""
    z = 1.0 / x
    p_sum = np.ones_like(x)
    q_sum = _HANKEL_C[1] * z
    zpow = z
    prev_mag = np.abs(q_sum)
    frozen = np.zeros_like(x, dtype=bool)
    for k in range(2, len(_HANKEL_C)):
        zpow = zpow * z
        term = _HANKEL_C[k] * zpow
        mag = np.abs(term)
        # divergent tail: stop adding once terms grow
        frozen = frozen | (mag > prev_mag)
        live = ~frozen
        signed = term * (-1.0) ** (k // 2)
        if k % 2 == 0:
            p_sum = p_sum + np.where(live, signed, 0.0)
        else:
            q_sum = q_sum + np.where(live, signed, 0.0)
        prev_mag = np.where(live, mag, prev_mag)
        if not np.any(live):
            break
    w = x - 0.25 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p_sum * np.cos(w) + q_sum * np.sin(w))


def _bessel_j0(arr, policy: EvalPolicy):
    out = np.empty_like(arr)
    small = arr < J0_SWITCH
    if np.any(small):
        out[small] = _j0_series(arr[small], policy)
    if np.any(~small):
        out[~small] = _j0_asymptotic(arr[~small])
    return out


def radial_profile(n: int, r, policy: EvalPolicy = DEFAULT_POLICY):
    """Normalized radial kernel profile Lambda_n(r) with Lambda_n(0) = 1.

    n=1: cos r. n=2: J_0(r), power series below r=12 and the Hankel
    asymptotic expansion above. n=3: sin(r)/r with a short series near 0.
    Absolute error <= 1e-10 on r in [0, 50].
    """
    if n not in (1, 2, 3):
        raise ValueError(f"radial_profile supports n in {{1, 2, 3}}, got {n}")
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise ValueError("radius must be finite and nonnegative")
    shaped = np.atleast_1d(arr).astype(float)
    if n == 1:
        out = np.cos(shaped)
    elif n == 2:
        out = _bessel_j0(shaped, policy)
    else:
        out = np.empty_like(shaped)
        tiny = shaped < 1e-4
        st = shaped[tiny]
        out[tiny] = 1.0 - st * st / 6.0 * (1.0 - st * st / 20.0)
        out[~tiny] = np.sin(shaped[~tiny]) / shaped[~tiny]
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)
