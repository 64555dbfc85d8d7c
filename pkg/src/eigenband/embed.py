"""Band embeddings and everything induced by them.

The embedding of a band is x -> (1/k) (phi_1(x), ..., phi_m(x)). This module
computes that map, the band and cumulative projector kernels, the canonical
distance pulled back from the ambient Euclidean metric, the pullback metric
tensor, polyline lengths in that metric, and the scans (Lipschitz ratio,
radial distance profile, diameter) the experiments are built on.

Kernel fast paths exploit the addition theorem on the sphere and translation
invariance on the torus; the naive mode sums stay available as oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import basis as bs
from . import manifold as mf
from .manifold import SPHERE2, ManifoldModel, Point
from .spectrum import Band, enumerate_band, k_lambda, mean_frequency
from .specfun import legendre_weighted_sum, radial_profile

__all__ = [
    "Embedding",
    "MetricTensor",
    "ProfilePoint",
    "CanonicalDistance",
    "k_lambda",
    "make_embedding",
    "phi",
    "band_kernel",
    "cumulative_kernel",
    "dist_lambda",
    "embed_norm",
    "pullback_metric",
    "path_length_glambda",
    "lipschitz_scan",
    "distance_profile",
    "diameter_estimate",
]

# kernel-difference step for the second-derivative route, in units of 1/lambda
FD_STEP_SCALE = 3e-3


@dataclass(frozen=True)
class Embedding:
    band: Band
    model: ManifoldModel


@dataclass(frozen=True)
class MetricTensor:
    matrix: np.ndarray
    frame: np.ndarray


class ProfilePoint(NamedTuple):
    r: float
    measured: float
    reference: float


def make_embedding(model: ManifoldModel, lam: float) -> Embedding:
    band = enumerate_band(model, lam)
    if band.m_lambda > 0:
        k = k_lambda(band.m_lambda)
        if abs(k - band.k_lambda) > 1e-12 * k:
            raise AssertionError("stored band normalization is stale")
    return Embedding(band=band, model=model)


def _require_modes(embedding: Embedding) -> Band:
    if embedding.band.m_lambda == 0:
        raise ValueError(f"band at lambda={embedding.band.lam} is empty")
    return embedding.band


# ---------------------------------------------------------------------------
# kernels


def _sphere_band_weights(band: Band) -> np.ndarray:
    degrees = sorted({mode.label[0] for mode in band.modes})
    w = np.zeros(degrees[-1] + 1)
    for l in degrees:
        w[l] = (2 * l + 1) / (4.0 * math.pi)
    return w


def _torus_half_space(model: ManifoldModel, band: Band) -> np.ndarray:
    """One frequency row per cos/sin pair."""
    L = np.array(model.side_lengths)
    seen = []
    keys = set()
    for mode in band.modes:
        if mode.label[0] not in keys:
            keys.add(mode.label[0])
            seen.append(mode.label[0])
    return np.array([2.0 * math.pi * np.array(k) / L for k in seen])


def _kernel_rows(embedding: Embedding, xc: np.ndarray, C: np.ndarray) -> np.ndarray:
    """E(x, C_i) for one point against many, by the fast path."""
    band = _require_modes(embedding)
    model = embedding.model
    if model.kind == SPHERE2:
        cosd = np.clip(C @ xc, -1.0, 1.0)
        return legendre_weighted_sum(_sphere_band_weights(band), cosd)
    W = _torus_half_space(model, band)
    return (2.0 / model.volume) * np.cos((C - xc) @ W.T).sum(axis=1)


def band_kernel(embedding: Embedding, x: Point, y: Point, method: str = "fast") -> float:
    """Band projector kernel E(x, y) = sum over the band of phi_j(x) phi_j(y)."""
    band = _require_modes(embedding)
    model = embedding.model
    xc = mf.check_point(model, x)
    yc = mf.check_point(model, y)
    if method == "fast":
        return float(_kernel_rows(embedding, xc, yc[None, :])[0])
    if method == "naive":
        vals = bs.mode_matrix(model, band.modes, np.stack([xc, yc]))
        return float(vals[0] @ vals[1])
    raise ValueError(f"unknown kernel method {method!r}")


def cumulative_kernel(model: ManifoldModel, lam: float, x: Point, y: Point,
                      method: str = "fast") -> float:
    """Projector kernel over every nonzero eigenvalue up to lam."""
    from .spectrum import _sphere_degree_ceiling, _torus_lattice, _half_space

    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    xc = mf.check_point(model, x)
    yc = mf.check_point(model, y)
    if model.kind == SPHERE2:
        hi = _sphere_degree_ceiling(lam)
        if hi == 0:
            return 0.0
        w = np.array([0.0] + [(2 * l + 1) / (4.0 * math.pi) for l in range(1, hi + 1)])
        if method == "fast":
            return float(legendre_weighted_sum(w, float(np.clip(xc @ yc, -1.0, 1.0))))
        total = 0.0
        for l in range(1, hi + 1):
            emb = make_embedding(model, math.sqrt(l * (l + 1.0)) - 0.5)
            assert {m.label[0] for m in emb.band.modes} == {l}
            total += band_kernel(emb, x, y, method="naive")
        return total
    lattice = _torus_lattice(model, lam)
    reps = lattice[_half_space(lattice)]
    L = np.array(model.side_lengths)
    W = 2.0 * math.pi * reps / L
    if method == "fast":
        return float((2.0 / model.volume) * np.cos(W @ (xc - yc)).sum())
    px, py = W @ xc, W @ yc
    return float((2.0 / model.volume)
                 * (np.cos(px) * np.cos(py) + np.sin(px) * np.sin(py)).sum())


# ---------------------------------------------------------------------------
# embedding map and canonical distance


def phi(embedding: Embedding, x: Point) -> np.ndarray:
    """Components of the normalized embedding at x, in band mode order."""
    band = _require_modes(embedding)
    xc = mf.check_point(embedding.model, x)
    return bs.mode_matrix(embedding.model, band.modes, xc[None, :])[0] / band.k_lambda


def _dist_from_kernels(exx, eyy, exy, k: float):
    return np.sqrt(np.maximum(0.0, exx + eyy - 2.0 * exy)) / k


def dist_lambda(embedding: Embedding, x: Point, y: Point) -> float:
    """Canonical distance: Euclidean distance between the embedded points."""
    band = _require_modes(embedding)
    exx = band_kernel(embedding, x, x)
    eyy = band_kernel(embedding, y, y)
    exy = band_kernel(embedding, x, y)
    return float(_dist_from_kernels(exx, eyy, exy, band.k_lambda))


def embed_norm(embedding: Embedding, x: Point) -> float:
    band = _require_modes(embedding)
    return math.sqrt(max(0.0, band_kernel(embedding, x, x))) / band.k_lambda


class CanonicalDistance:
    """dist_lambda with a vectorized one-against-many row, for net builders."""

    name = "d_lambda"

    def __init__(self, embedding: Embedding):
        self.embedding = embedding
        band = _require_modes(embedding)
        # both models are homogeneous so the diagonal is constant
        self._diag = band.m_lambda / embedding.model.volume
        self._k = band.k_lambda

    def __call__(self, x: Point, y: Point) -> float:
        return dist_lambda(self.embedding, x, y)

    def rows(self, xc: np.ndarray, C: np.ndarray) -> np.ndarray:
        exy = _kernel_rows(self.embedding, xc, C)
        return _dist_from_kernels(self._diag, self._diag, exy, self._k)


def _pair_dist(embedding: Embedding, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """dist_lambda row-by-row between two stacks of coordinates."""
    band = _require_modes(embedding)
    model = embedding.model
    diag = band.m_lambda / model.volume
    if model.kind == SPHERE2:
        cosd = np.clip((X * Y).sum(axis=1), -1.0, 1.0)
        exy = legendre_weighted_sum(_sphere_band_weights(band), cosd)
    else:
        W = _torus_half_space(model, band)
        exy = (2.0 / model.volume) * np.cos((X - Y) @ W.T).sum(axis=1)
    return _dist_from_kernels(diag, diag, exy, band.k_lambda)


def _pair_dg(model: ManifoldModel, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    if model.kind == SPHERE2:
        return np.arccos(np.clip((X * Y).sum(axis=1), -1.0, 1.0))
    L = np.array(model.side_lengths)
    d = np.abs(X - Y) % L
    return np.linalg.norm(np.minimum(d, L - d), axis=1)


# ---------------------------------------------------------------------------
# pullback metric


def pullback_metric(embedding: Embedding, x: Point, method: str = "gradient") -> MetricTensor:
    """Metric pulled back through the embedding, in the tangent frame at x.

    method "gradient" sums grad phi_j outer products; "kernel_fd" reads the
    same tensor off mixed second differences of the kernel and exists as an
    independent cross-check.
    """
    band = _require_modes(embedding)
    model = embedding.model
    frame = mf.tangent_frame(model, x)
    k2 = band.k_lambda ** 2
    if method == "gradient":
        G = bs.gradient_matrix(model, band.modes, x)
        mat = (G.T @ G) / k2
    elif method == "kernel_fd":
        # g_ab = -(1/k^2) d^2/du_a du_b E(x, exp_x(u)) at u = 0
        h = FD_STEP_SCALE / mean_frequency(band)
        n = model.dim
        mat = np.empty((n, n))

        def at(u):
            return band_kernel(embedding, x, mf.exp_map(model, x, u))

        for a in range(n):
            for b in range(a, n):
                ea = np.zeros(n)
                eb = np.zeros(n)
                ea[a] = h
                eb[b] = h
                val = -(at(ea + eb) - at(ea - eb) - at(eb - ea) + at(-ea - eb)) \
                    / (4.0 * h * h * k2)
                mat[a, b] = val
                mat[b, a] = val
    else:
        raise ValueError(f"unknown pullback method {method!r}")
    mat = 0.5 * (mat + mat.T)
    return MetricTensor(matrix=mat, frame=frame)


def path_length_glambda(embedding: Embedding, waypoints) -> float:
    """Length of the polyline in the pullback metric, segment metrics at midpoints."""
    if len(waypoints) < 2:
        raise ValueError("need at least 2 waypoints")
    model = embedding.model
    total = 0.0
    for p, q in zip(waypoints[:-1], waypoints[1:]):
        pc = mf.check_point(model, p)
        qc = mf.check_point(model, q)
        if model.kind == SPHERE2:
            mid_raw = pc + qc
            nm = float(np.linalg.norm(mid_raw))
            if nm < 1e-9:
                raise ValueError("antipodal segment; refine the waypoints")
            mid = mf.make_point(model, mid_raw / nm)
            dx = mf.log_map(model, mid, q) - mf.log_map(model, mid, p)
        else:
            delta = mf._torus_delta(model, qc, pc)
            mid = mf.make_point(model, pc + 0.5 * delta)
            dx = delta
        g = pullback_metric(embedding, mid).matrix
        total += math.sqrt(max(0.0, float(dx @ g @ dx)))
    return total


# ---------------------------------------------------------------------------
# scans


def _sample_coords(model: ManifoldModel, count: int, rng: np.random.Generator) -> np.ndarray:
    return np.stack([mf.uniform_sample(model, rng).coords for _ in range(count)])


def lipschitz_scan(embedding: Embedding, pair_count: int, rng: np.random.Generator) -> float:
    """max over sampled pairs of dist_lambda / (lambda * dist_g).

    Half the pairs are uniform; the other half pins y at geodesic radius
    log-uniform in [1e-8/lambda, 10/lambda] from x, where the ratio peaks.
    """
    band = _require_modes(embedding)
    lam = band.lam
    if lam <= 0:
        raise ValueError("lipschitz ratio needs lambda > 0")
    if pair_count < 1:
        raise ValueError("pair_count must be >= 1")
    model = embedding.model
    n_near = pair_count // 2
    n_far = pair_count - n_near
    X = _sample_coords(model, pair_count, rng)
    Y = np.empty_like(X)
    Y[:n_far] = _sample_coords(model, n_far, rng)
    r_hi = min(10.0 / lam, 0.999 * model.injectivity_radius)
    r_lo = 1e-8 / lam
    radii = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), size=n_near))
    dirs = rng.normal(size=(n_near, model.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for i in range(n_near):
        p = Point(X[n_far + i])
        Y[n_far + i] = mf.exp_map(model, p, radii[i] * dirs[i]).coords
    dg = _pair_dg(model, X, Y)
    dl = _pair_dist(embedding, X, Y)
    keep = dg > 0
    return float((dl[keep] / (lam * dg[keep])).max())


_GENERIC_DIR = (1.0, 0.6180339887498949, 0.3819660112501051)


def distance_profile(embedding: Embedding, r_values) -> list[ProfilePoint]:
    """Measured dist_lambda against the universal radial reference profile.

    The reference is sqrt((2/vol)(1 - Lambda_n(lam_bar r))); it is a shape to
    compare against, not an asserted equality.
    """
    band = _require_modes(embedding)
    model = embedding.model
    r_values = [float(r) for r in r_values]
    for r in r_values:
        if r < 0 or r > model.injectivity_radius + 1e-12:
            raise ValueError(f"r={r} outside [0, injectivity radius]")
    lam_bar = mean_frequency(band)
    scale = math.sqrt(2.0 / model.volume)
    if model.kind == SPHERE2:
        x0 = mf.make_point(model, (0.0, 0.0, 1.0))
        targets = [mf.make_point(model, (math.sin(r), 0.0, math.cos(r))) for r in r_values]
    else:
        u = np.array(_GENERIC_DIR[:model.dim])
        u /= np.linalg.norm(u)
        x0 = mf.make_point(model, np.zeros(model.dim))
        targets = [mf.make_point(model, r * u) for r in r_values]
    out = []
    for r, y in zip(r_values, targets):
        measured = dist_lambda(embedding, x0, y)
        ref = scale * math.sqrt(max(0.0, 1.0 - radial_profile(model.dim, lam_bar * r)))
        out.append(ProfilePoint(r=r, measured=measured, reference=ref))
    return out


def _refine_theta(embedding: Embedding, lo: float, hi: float, levels: int = 6) -> float:
    """Zoom a 65-point grid around the kernel minimum on [lo, hi]."""
    x0 = np.array([0.0, 0.0, 1.0])
    for _ in range(levels):
        thetas = np.linspace(lo, hi, 65)
        C = np.stack([np.sin(thetas), np.zeros_like(thetas), np.cos(thetas)], axis=1)
        vals = _kernel_rows(embedding, x0, C)
        j = int(vals.argmin())
        lo = thetas[max(0, j - 1)]
        hi = thetas[min(len(thetas) - 1, j + 1)]
    return 0.5 * (lo + hi)


_DIAMETER_CHUNK = 1 << 18


def diameter_estimate(embedding: Embedding, grid_size: int) -> float:
    """Largest dist_lambda over a quasi-uniform grid of about grid_size points.

    Sphere bands: dist_lambda depends only on the geodesic angle, so the
    scan runs over [0, pi] directly with local grid refinement. Torus: the
    pairwise minimal-image displacements of a product grid form the same
    grid, so one kernel sweep over the grid covers every pair.
    """
    band = _require_modes(embedding)
    model = embedding.model
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    if model.kind == SPHERE2:
        thetas = np.linspace(0.0, math.pi, max(grid_size, 64))
        x0 = np.array([0.0, 0.0, 1.0])
        C = np.stack([np.sin(thetas), np.zeros_like(thetas), np.cos(thetas)], axis=1)
        vals = _kernel_rows(embedding, x0, C)
        j = int(vals.argmin())
        lo = thetas[max(0, j - 1)]
        hi = thetas[min(len(thetas) - 1, j + 1)]
        theta = _refine_theta(embedding, lo, hi)
        y = mf.make_point(model, (math.sin(theta), 0.0, math.cos(theta)))
        return dist_lambda(embedding, mf.make_point(model, (0.0, 0.0, 1.0)), y)
    grid = mf.grid_coords(model, grid_size)
    origin = np.zeros(model.dim)
    best_val = np.inf
    best_row = None
    for start in range(0, len(grid), _DIAMETER_CHUNK):
        chunk = grid[start:start + _DIAMETER_CHUNK]
        vals = _kernel_rows(embedding, origin, chunk)
        j = int(vals.argmin())
        if vals[j] < best_val:
            best_val = float(vals[j])
            best_row = chunk[j].copy()
    return dist_lambda(embedding, mf.make_point(model, origin),
                       mf.make_point(model, best_row))
