"""Pointwise evaluation of the orthonormal eigenfunctions and their gradients.

Real basis throughout: cos/sin pairs on the torus, real spherical harmonics
on the sphere (no Condon-Shortley phase). Gradients are returned in the
orthonormal tangent frame of manifold.tangent_frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import manifold as mf
from .manifold import FLAT_TORUS, SPHERE2, ManifoldModel, Point
from .spectrum import Band, Mode

__all__ = [
    "ModeValue",
    "eval_mode",
    "grad_mode",
    "mode_value",
    "mode_matrix",
    "gradient_matrix",
    "orthonormality_check",
]

_INV_SQRT_4PI = 0.5 / math.sqrt(math.pi)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ModeValue:
    value: float
    gradient: np.ndarray


# ---------------------------------------------------------------------------
# normalized associated Legendre machinery, vectorized over points


def _upward(l: int, m: int, t: np.ndarray, seed: np.ndarray):
    """Climb the degree recurrence from (m, m) seed; returns rows at l and l-1."""
    if l == m:
        return seed, np.zeros_like(seed)
    p_prev = seed
    p = math.sqrt(2 * m + 3.0) * t * p_prev
    for k in range(m + 2, l + 1):
        a = math.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
        b = math.sqrt(((k - 1.0) ** 2 - m * m) / (4.0 * (k - 1.0) ** 2 - 1.0))
        p, p_prev = a * (t * p - b * p_prev), p
    return p, p_prev


def _degree_value_rows(l: int, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Rows m = 0..l of the fully normalized P at degree l."""
    rows = np.empty((l + 1, t.size))
    diag = np.full(t.size, _INV_SQRT_4PI)
    for m in range(l + 1):
        if m > 0:
            diag = diag * math.sqrt((2 * m + 1) / (2.0 * m)) * s
        rows[m], _ = _upward(l, m, t, diag)
    return rows


def _degree_gradient_rows(l: int, t: np.ndarray, s: np.ndarray):
    """(d/dtheta Pbar_l^m, Pbar_l^m / sin theta) rows for m = 0..l.

    The over-sine rows use the ratio recurrence seeded at sin^(m-1), so both
    outputs stay finite at the poles; the m = 0 over-sine row is unused and
    left at zero.
    """
    dtheta = np.empty((l + 1, t.size))
    over_s = np.zeros((l + 1, t.size))
    # m = 0 from the m = 1 value row: d/dtheta Pbar_l^0 = -sqrt(l(l+1)) Pbar_l^1
    diag = np.full(t.size, _INV_SQRT_4PI * math.sqrt(3.0 / 2.0))
    for m in range(1, l + 1):
        if m > 1:
            diag = diag * math.sqrt((2 * m + 1) / (2.0 * m)) * s
        r_l, r_lm1 = _upward(l, m, t, diag)
        over_s[m] = r_l
        c = math.sqrt((l * l - m * m) * (2.0 * l + 1.0) / (2.0 * l - 1.0)) if l > m else 0.0
        dtheta[m] = l * t * r_l - c * r_lm1
    if l >= 1:
        p_l1 = over_s[1] * s
        dtheta[0] = -math.sqrt(l * (l + 1.0)) * p_l1
    else:
        dtheta[0] = 0.0
    return dtheta, over_s


def _sphere_angles(coords: np.ndarray):
    t = np.clip(coords[:, 2], -1.0, 1.0)
    phi = np.arctan2(coords[:, 1], coords[:, 0])
    # hypot avoids the 1 - t^2 cancellation near the poles
    s = np.minimum(1.0, np.hypot(coords[:, 0], coords[:, 1]))
    return t, s, phi


def _group_degrees(modes) -> dict[int, list[tuple[int, int]]]:
    """l -> [(column index, m)] preserving mode order."""
    groups: dict[int, list[tuple[int, int]]] = {}
    for j, mode in enumerate(modes):
        l, m = mode.label
        groups.setdefault(l, []).append((j, m))
    return groups


def _sphere_value_matrix(modes, coords: np.ndarray) -> np.ndarray:
    t, s, phi = _sphere_angles(coords)
    out = np.empty((len(coords), len(modes)))
    for l, cols in _group_degrees(modes).items():
        rows = _degree_value_rows(l, t, s)
        ms = sorted({abs(m) for _, m in cols if m != 0})
        cos_t = {m: np.cos(m * phi) for m in ms}
        sin_t = {m: np.sin(m * phi) for m in ms}
        for j, m in cols:
            if m == 0:
                out[:, j] = rows[0]
            elif m > 0:
                out[:, j] = _SQRT2 * rows[m] * cos_t[m]
            else:
                out[:, j] = _SQRT2 * rows[-m] * sin_t[-m]
    return out


def _torus_omegas(model: ManifoldModel, modes) -> tuple[np.ndarray, np.ndarray]:
    """Frequency vectors (m x n) and a boolean cos-flavor mask."""
    L = np.array(model.side_lengths)
    W = np.array([2.0 * math.pi * np.array(mode.label[0]) / L for mode in modes])
    is_cos = np.array([mode.label[1] == "cos" for mode in modes])
    return W, is_cos


def _torus_value_matrix(model: ManifoldModel, modes, coords: np.ndarray) -> np.ndarray:
    W, is_cos = _torus_omegas(model, modes)
    amp = math.sqrt(2.0 / model.volume)
    phase = coords @ W.T
    out = np.empty_like(phase)
    out[:, is_cos] = np.cos(phase[:, is_cos])
    out[:, ~is_cos] = np.sin(phase[:, ~is_cos])
    return amp * out


def mode_matrix(model: ManifoldModel, modes, coords: np.ndarray) -> np.ndarray:
    """Values of every mode at every coordinate row: (n_points, n_modes)."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if len(modes) == 0:
        return np.zeros((len(coords), 0))
    if model.kind == SPHERE2:
        return _sphere_value_matrix(modes, coords)
    return _torus_value_matrix(model, modes, coords)


def _sphere_gradient_ambient(modes, coords: np.ndarray) -> np.ndarray:
    """Ambient-3-vector gradients, shape (n_points, n_modes, 3)."""
    t, s, phi = _sphere_angles(coords)
    cphi, sphi = np.cos(phi), np.sin(phi)
    e_theta = np.stack([t * cphi, t * sphi, -s], axis=1)
    e_phi = np.stack([-sphi, cphi, np.zeros_like(phi)], axis=1)
    out = np.zeros((len(coords), len(modes), 3))
    for l, cols in _group_degrees(modes).items():
        dtheta, over_s = _degree_gradient_rows(l, t, s)
        ms = sorted({abs(m) for _, m in cols if m != 0})
        cos_t = {m: np.cos(m * phi) for m in ms}
        sin_t = {m: np.sin(m * phi) for m in ms}
        for j, m in cols:
            if m == 0:
                dth, dph = dtheta[0], np.zeros_like(phi)
            elif m > 0:
                dth = _SQRT2 * dtheta[m] * cos_t[m]
                dph = -_SQRT2 * m * over_s[m] * sin_t[m]
            else:
                dth = _SQRT2 * dtheta[-m] * sin_t[-m]
                dph = _SQRT2 * (-m) * over_s[-m] * cos_t[-m]
            out[:, j, :] = dth[:, None] * e_theta + dph[:, None] * e_phi
    return out


def gradient_matrix(model: ManifoldModel, modes, x: Point) -> np.ndarray:
    """Gradients of every mode at x in the tangent frame: (n_modes, dim)."""
    xc = mf.check_point(model, x)
    if model.kind == SPHERE2:
        amb = _sphere_gradient_ambient(modes, xc[None, :])[0]
        frame = mf.tangent_frame(model, x)
        return amb @ frame.T
    W, is_cos = _torus_omegas(model, modes)
    amp = math.sqrt(2.0 / model.volume)
    phase = W @ xc
    scale = np.where(is_cos, -np.sin(phase), np.cos(phase))
    return amp * scale[:, None] * W


def eval_mode(model: ManifoldModel, mode: Mode, x: Point) -> float:
    """Value of one L2-normalized eigenfunction at x."""
    xc = mf.check_point(model, x)
    _check_mode(model, mode)
    return float(mode_matrix(model, [mode], xc[None, :])[0, 0])


def grad_mode(model: ManifoldModel, mode: Mode, x: Point) -> np.ndarray:
    """Gradient of one eigenfunction at x, components in the tangent frame."""
    _check_mode(model, mode)
    return gradient_matrix(model, [mode], x)[0]


def mode_value(model: ManifoldModel, mode: Mode, x: Point) -> ModeValue:
    return ModeValue(value=eval_mode(model, mode, x),
                     gradient=grad_mode(model, mode, x))


def _check_mode(model: ManifoldModel, mode: Mode):
    if model.kind == SPHERE2:
        if not (isinstance(mode.label[0], int) and isinstance(mode.label[1], int)):
            raise ValueError(f"mode {mode.label} is not a sphere mode")
        l, m = mode.label
        if abs(m) > l:
            raise ValueError(f"invalid sphere mode {mode.label}")
    else:
        k, flavor = mode.label
        if flavor not in ("cos", "sin") or len(k) != model.dim:
            raise ValueError(f"mode {mode.label} does not match the torus")


# ---------------------------------------------------------------------------
# quadrature


def _sphere_quadrature(n_theta: int, n_phi: int):
    nodes, weights = np.polynomial.legendre.leggauss(n_theta)
    phis = (np.arange(n_phi) + 0.5) * (2.0 * math.pi / n_phi)
    t = np.repeat(nodes, n_phi)
    phi = np.tile(phis, n_theta)
    s = np.sqrt(np.maximum(0.0, 1.0 - t * t))
    coords = np.stack([s * np.cos(phi), s * np.sin(phi), t], axis=1)
    w = np.repeat(weights, n_phi) * (2.0 * math.pi / n_phi)
    return coords, w


def _torus_quadrature(model: ManifoldModel, n_axis: int):
    axes = [np.arange(n_axis) * (L / n_axis) for L in model.side_lengths]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    w = np.full(len(coords), model.volume / len(coords))
    return coords, w


def quadrature_rule(model: ManifoldModel, size: int):
    """Product rule integrating the volume measure: (coords, weights).

    Sphere: size Gauss-Legendre nodes in cos(theta) x 2*size uniform
    azimuths. Torus: size points per axis (trapezoid, exact below Nyquist).
    """
    if size < 1:
        raise ValueError(f"quadrature size must be >= 1, got {size}")
    if model.kind == SPHERE2:
        return _sphere_quadrature(size, 2 * size)
    return _torus_quadrature(model, size)


def orthonormality_check(model: ManifoldModel, band: Band, quadrature_size: int) -> float:
    """Max entrywise |Gram - I| of the band basis under the product rule."""
    if band.m_lambda == 0:
        raise ValueError("empty band")
    coords, w = quadrature_rule(model, quadrature_size)
    Y = mode_matrix(model, band.modes, coords)
    gram = Y.T @ (Y * w[:, None])
    return float(np.abs(gram - np.eye(band.m_lambda)).max())
