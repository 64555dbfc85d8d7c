"""Covering numbers, the entropy integral, and the small-integral identity.

Nets come from farthest-point traversal, which yields covering-number
upper bounds; that is the direction the entropy integral needs. One
traversal of the substrate produces the whole covering curve, because the
insertion order never depends on epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfcx, gammaincc

from .manifold import Point

__all__ = [
    "Net",
    "CoveringCurve",
    "DudleyReport",
    "greedy_net",
    "covering_curve",
    "fit_exponent",
    "dudley_bound",
    "dudley_report",
    "lp_covering_bound",
    "claim_integral",
]

# pairs whose max underlies the reported curve diameter
_DIAM_PROBE = 64
# smallest curve entries used for the tail power-law fit
_TAIL_FIT_POINTS = 4

DUDLEY_CONSTANT = 8.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class Net:
    centers: list
    radius: float
    covered_check: float


@dataclass(frozen=True)
class CoveringCurve:
    entries: tuple
    distance_id: str
    diameter: float


@dataclass(frozen=True)
class DudleyReport:
    """Entropy integral value plus the internals of its tail extrapolation.

    tail_scale is the distance at which the fitted power law drops to one
    ball; scale_ratio = tail_scale / half_diameter and inverse_log_scale =
    1/ln(scale_ratio) are the dimensionless quantities the sup-norm chain
    is phrased in (nan when degenerate).
    """

    bound: float
    half_diameter: float
    tail_scale: float
    tail_exponent: float
    scale_ratio: float
    inverse_log_scale: float


def _distance_id(distance) -> str:
    return getattr(distance, "name", None) or getattr(distance, "__name__", "custom")


def _rows_fn(distance):
    rows = getattr(distance, "rows", None)
    if rows is not None:
        return rows

    def fallback(xc: np.ndarray, C: np.ndarray) -> np.ndarray:
        x = Point(xc)
        return np.array([distance(x, Point(c)) for c in C])

    return fallback


def _farthest_point_order(C: np.ndarray, rows, stop_radius: float):
    """Insertion order and radii until the next insertion would be <= stop_radius."""
    dmin = rows(C[0], C)
    order = [0]
    radii = [math.inf]
    while True:
        j = int(np.argmax(dmin))
        r = float(dmin[j])
        if r <= stop_radius:
            break
        order.append(j)
        radii.append(r)
        np.minimum(dmin, rows(C[j], C), out=dmin)
    return order, radii, dmin


def greedy_net(points, distance, epsilon: float) -> Net:
    """Farthest-point net: add the farthest substrate point while > epsilon.

    Ties go to the lowest substrate index. covered_check is the largest
    remaining substrate-to-center distance, <= epsilon by construction.
    """
    if len(points) == 0:
        raise ValueError("substrate is empty")
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    C = np.stack([p.coords for p in points])
    order, _, dmin = _farthest_point_order(C, _rows_fn(distance), epsilon)
    return Net(centers=[points[i] for i in order], radius=epsilon,
               covered_check=float(dmin.max()))


def covering_curve(substrate, distance, epsilon_list) -> CoveringCurve:
    """Net sizes at every epsilon from one farthest-point traversal.

    The traversal order is epsilon-independent, so the net at each epsilon
    is the prefix of insertions whose radii exceed it; this reproduces
    greedy_net at every listed epsilon while visiting the substrate once.
    """
    eps = [float(e) for e in epsilon_list]
    if not eps:
        raise ValueError("epsilon list is empty")
    if any(e <= 0 for e in eps):
        raise ValueError("epsilon values must be positive")
    if any(a < b for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon values must be sorted descending")
    if len(substrate) == 0:
        raise ValueError("substrate is empty")
    C = np.stack([p.coords for p in substrate])
    rows = _rows_fn(distance)
    order, radii, _ = _farthest_point_order(C, rows, min(eps))
    inserted = np.array(radii[1:])
    entries = tuple((e, 1 + int((inserted > e).sum())) for e in eps)
    probe = order[:_DIAM_PROBE]
    diam = 0.0
    for i in probe:
        diam = max(diam, float(rows(C[i], C[probe]).max()))
    return CoveringCurve(entries=entries, distance_id=_distance_id(distance),
                         diameter=diam)


def fit_exponent(curve: CoveringCurve, n_min: int = 16, n_max: int | None = None) -> float:
    """Log-log slope of net size against 1/epsilon over the scaling window.

    Entries with fewer than n_min centers sit in the few-ball regime and
    entries above n_max are resolution-limited by the substrate (pass
    substrate_size // 4 or so); both are excluded from the fit. nan when
    fewer than two entries survive.
    """
    pts = [(e, n) for e, n in curve.entries
           if n >= n_min and (n_max is None or n <= n_max)]
    if len(pts) < 2 or len({n for _, n in pts}) < 2:
        return math.nan
    le = np.log([1.0 / e for e, _ in pts])
    ln = np.log([float(n) for _, n in pts])
    return float(np.polyfit(le, ln, 1)[0])


def _tail_fit(eps: np.ndarray, counts: np.ndarray):
    """Power-law c * eps^-exponent through the smallest useful entries."""
    mask = counts > 1
    if mask.sum() < 2:
        return None
    e = eps[mask][:_TAIL_FIT_POINTS]
    n = counts[mask][:_TAIL_FIT_POINTS]
    if len(set(n.tolist())) < 2:
        return None
    slope, intercept = np.polyfit(np.log(e), np.log(n), 1)
    exponent = -float(slope)
    if exponent < 0.1:
        return None
    return math.exp(float(intercept)), exponent


def dudley_report(curve: CoveringCurve) -> DudleyReport:
    """8 sqrt(2) * integral of sqrt(ln N(eps)) over (0, half diameter].

    Trapezoid over the tabulated entries; below the finest epsilon the
    fitted power law closes the integrable sqrt-log singularity in closed
    form via the upper incomplete gamma function.
    """
    if not curve.entries:
        raise ValueError("covering curve is empty")
    half_d = curve.diameter / 2.0
    eps = np.array([e for e, _ in curve.entries], dtype=float)
    counts = np.array([n for _, n in curve.entries], dtype=float)
    idx = np.argsort(eps)
    eps, counts = eps[idx], counts[idx]
    if counts.max() <= 1 or half_d <= 0:
        return DudleyReport(bound=0.0, half_diameter=half_d, tail_scale=math.nan,
                            tail_exponent=math.nan, scale_ratio=math.nan,
                            inverse_log_scale=math.nan)
    inside = eps <= half_d
    xs = eps[inside]
    fs = np.sqrt(np.log(counts[inside]))
    if xs.size == 0 or xs[-1] < half_d:
        above = counts[~inside]
        edge = float(above[0]) if above.size else float(counts[inside][-1])
        xs = np.append(xs, half_d)
        fs = np.append(fs, math.sqrt(math.log(edge)))
    trap = float(np.trapezoid(fs, xs)) if xs.size > 1 else 0.0

    eps0 = float(xs[0])
    fit = _tail_fit(eps, counts)
    tail_scale = tail_exp = math.nan
    if fit is not None:
        c, exponent = fit
        scale = c ** (1.0 / exponent)
        u0 = math.log(scale / eps0)
        if u0 > 0:
            tail = math.sqrt(exponent) * scale * (math.sqrt(math.pi) / 2.0) \
                * float(gammaincc(1.5, u0))
            tail_scale, tail_exp = scale, exponent
        else:
            fit = None
    if fit is None:
        # no usable fit: freeze the count at the finest epsilon
        tail = eps0 * float(fs[0])
    ratio = tail_scale / half_d if math.isfinite(tail_scale) else math.nan
    inv_log = 1.0 / math.log(ratio) if math.isfinite(ratio) and ratio > 1.0 else math.nan
    return DudleyReport(bound=DUDLEY_CONSTANT * (trap + tail), half_diameter=half_d,
                        tail_scale=tail_scale, tail_exponent=tail_exp,
                        scale_ratio=ratio, inverse_log_scale=inv_log)


def dudley_bound(curve: CoveringCurve) -> float:
    return dudley_report(curve).bound


def lp_covering_bound(model, r: float) -> float:
    """Closed-form ball-covering bound vol * (2n/s_{n-1}) * pi^(n-1) * r^-n."""
    from .manifold import weyl_constants

    if model.curvature_sup > 0:
        curve_limit = math.pi / math.sqrt(model.curvature_sup)
    else:
        curve_limit = math.inf
    r_max = min(model.injectivity_radius, curve_limit, 2.0 * math.pi)
    if not 0 < r < r_max:
        raise ValueError(f"radius {r} outside the validity window (0, {r_max})")
    n = model.dim
    s = weyl_constants(model).sphere_area
    return model.volume * (2.0 * n / s) * math.pi ** (n - 1) * r ** (-n)


def claim_integral(a: float) -> float:
    """I(a) = integral over (0,1] of sqrt(1 - a ln x) dx, two ways.

    Adaptive quadrature after u = -ln x against the closed form
    1 + sqrt(a pi)/2 * erfcx(1/sqrt(a)); asserts they agree to 1e-8.
    """
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    by_quad, err = quad(lambda u: math.sqrt(1.0 + a * u) * math.exp(-u),
                        0.0, math.inf, epsabs=1e-12, epsrel=1e-12)
    closed = 1.0 + 0.5 * math.sqrt(a * math.pi) * float(erfcx(1.0 / math.sqrt(a)))
    if abs(by_quad - closed) > 1e-8:
        raise AssertionError(
            f"integral routes disagree at a={a}: {by_quad} vs {closed}")
    return closed
