"""Band enumeration and eigenvalue counting.

A band collects the Laplace modes with frequency mu in (lambda, lambda+1].
The interval convention is half-open exactly: mu = lambda excluded,
mu = lambda + 1 included. The zero mode is excluded everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .manifold import FLAT_TORUS, SPHERE2, ManifoldModel
from .specfun import log_gamma

__all__ = [
    "Mode",
    "Band",
    "k_lambda",
    "enumerate_band",
    "eigenvalue_count",
    "weyl_count_deviation",
    "band_dimension_deviation",
    "mean_frequency",
]


@dataclass(frozen=True)
class Mode:
    """One real eigenfunction label.

    Sphere label: (l, m) with m in -l..l. Torus label: (k, flavor) with k a
    lattice tuple from the fixed half-space (first nonzero component
    positive) and flavor "cos" or "sin".
    """

    id: int
    mu: float
    label: tuple


@dataclass(frozen=True)
class Band:
    lam: float
    modes: tuple[Mode, ...]
    m_lambda: int
    k_lambda: float
    model: ManifoldModel


def k_lambda(m: int) -> float:
    """sqrt(2) Gamma((m+1)/2) / Gamma(m/2), evaluated through log-gamma."""
    if m != int(m) or m < 1:
        raise ValueError(f"band dimension must be an integer >= 1, got {m}")
    m = int(m)
    return math.sqrt(2.0) * math.exp(log_gamma((m + 1) / 2.0) - log_gamma(m / 2.0))


def _sphere_degree_ceiling(lam: float) -> int:
    """Largest l with sqrt(l(l+1)) <= lam (0 if none)."""
    if lam < math.sqrt(2.0):
        return 0
    l = int((math.sqrt(1.0 + 4.0 * lam * lam) - 1.0) // 2)
    while (l + 1) * (l + 2) <= lam * lam:
        l += 1
    while l >= 1 and l * (l + 1) > lam * lam:
        l -= 1
    return l


def _torus_lattice(model: ManifoldModel, mu_max: float) -> np.ndarray:
    """All nonzero lattice vectors k with |2 pi k / L| <= mu_max."""
    kmax = [int(math.ceil(mu_max * L / (2.0 * math.pi))) for L in model.side_lengths]
    axes = [np.arange(-k, k + 1) for k in kmax]
    rest = None
    if model.dim > 1:
        mesh = np.meshgrid(*axes[1:], indexing="ij")
        rest = [m.ravel() for m in mesh]
    out = []
    # slice over the first axis to bound memory at desk scale
    for k1 in axes[0]:
        if rest is None:
            block = np.array([[k1]])
        else:
            block = np.stack([np.full(rest[0].size, k1)] + rest, axis=1)
        freq = 2.0 * math.pi * block / np.array(model.side_lengths)
        mu = np.sqrt(np.sum(freq * freq, axis=1))
        keep = (mu > 0) & (mu <= mu_max)
        if np.any(keep):
            out.append(block[keep])
    if not out:
        return np.zeros((0, model.dim), dtype=int)
    return np.concatenate(out, axis=0)


def _torus_mu(model: ManifoldModel, k: np.ndarray) -> np.ndarray:
    freq = 2.0 * math.pi * k / np.array(model.side_lengths)
    return np.sqrt(np.sum(freq * freq, axis=-1))


def _half_space(k: np.ndarray) -> np.ndarray:
    """Mask selecting one representative of each +-k pair."""
    mask = np.zeros(len(k), dtype=bool)
    undecided = np.ones(len(k), dtype=bool)
    for axis in range(k.shape[1]):
        col = k[:, axis]
        mask |= undecided & (col > 0)
        undecided &= col == 0
    return mask


def enumerate_band(model: ManifoldModel, lam: float) -> Band:
    """All modes with mu in (lam, lam+1], in a deterministic order."""
    if not (lam >= 0):
        raise ValueError(f"band parameter must be >= 0, got {lam}")
    modes: list[Mode] = []
    if model.kind == SPHERE2:
        lo = max(1, _sphere_degree_ceiling(lam) - 1)
        hi = _sphere_degree_ceiling(lam + 1.0) + 1
        for l in range(lo, hi + 1):
            mu = math.sqrt(l * (l + 1.0))
            if lam < mu <= lam + 1.0:
                for m in range(-l, l + 1):
                    modes.append(Mode(id=len(modes), mu=mu, label=(l, m)))
    elif model.kind == FLAT_TORUS:
        lattice = _torus_lattice(model, lam + 1.0)
        if len(lattice):
            mu = _torus_mu(model, lattice)
            keep = (mu > lam) & _half_space(lattice)
            reps = sorted((tuple(int(c) for c in k), float(m))
                          for k, m in zip(lattice[keep], mu[keep]))
            for k, m in reps:
                for flavor in ("cos", "sin"):
                    modes.append(Mode(id=len(modes), mu=m, label=(k, flavor)))
    else:
        raise ValueError(f"unknown manifold kind {model.kind!r}")
    mcount = len(modes)
    return Band(lam=float(lam), modes=tuple(modes), m_lambda=mcount,
                k_lambda=k_lambda(mcount) if mcount else float("nan"),
                model=model)


def eigenvalue_count(model: ManifoldModel, lam: float) -> int:
    """N(lam): modes with mu in (0, lam], counted with multiplicity."""
    if not (lam >= 0):
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if model.kind == SPHERE2:
        l = _sphere_degree_ceiling(lam)
        return l * (l + 2)
    return len(_torus_lattice(model, lam))


def weyl_count_deviation(model: ManifoldModel, lam: float) -> float:
    """N(lam) / (alpha_n vol lam^n) - 1."""
    if not (lam > 0):
        raise ValueError(f"lambda must be > 0, got {lam}")
    from .manifold import weyl_constants
    alpha = weyl_constants(model).alpha_n
    return eigenvalue_count(model, lam) / (alpha * model.volume * lam ** model.dim) - 1.0


def band_dimension_deviation(model: ManifoldModel, lam: float) -> float:
    """m_lambda / (n alpha_n vol lam^(n-1)) - 1; raw value, no tolerance."""
    if not (lam > 0):
        raise ValueError(f"lambda must be > 0, got {lam}")
    from .manifold import weyl_constants
    alpha = weyl_constants(model).alpha_n
    band = enumerate_band(model, lam)
    pred = model.dim * alpha * model.volume * lam ** (model.dim - 1)
    return band.m_lambda / pred - 1.0


def mean_frequency(band: Band) -> float:
    """Mean frequency of the band's modes, the lambda-bar of radial profiles."""
    if band.m_lambda == 0:
        raise ValueError("empty band has no mean frequency")
    return float(np.mean([mode.mu for mode in band.modes]))
