import math

import numpy as np
import pytest

try:
    from scipy.special import sph_harm_y

    def _complex_harmonic(l, m, theta, phi):
        return sph_harm_y(l, m, theta, phi)
except ImportError:  # older scipy
    from scipy.special import sph_harm

    def _complex_harmonic(l, m, theta, phi):
        return sph_harm(m, l, phi, theta)

from eigenband import basis as bs
from eigenband import manifold as mf
from eigenband import spectrum as sp

SPHERE = mf.sphere2()
TORUS = mf.flat_torus((2.0 * math.pi, 1.5 * math.pi))


def _scipy_real_harmonic(l, m, theta, phi):
    # real combination of scipy's complex harmonics (Condon-Shortley included
    # there, cancelled here)
    if m == 0:
        return float(_complex_harmonic(l, 0, theta, phi).real)
    y = _complex_harmonic(l, abs(m), theta, phi)
    s = math.sqrt(2.0) * (-1.0) ** abs(m)
    return s * (y.real if m > 0 else y.imag)


def test_sphere_values_match_scipy():
    rng = np.random.Generator(np.random.Philox(2))
    band = sp.enumerate_band(SPHERE, 5.0)
    l = band.modes[0].label[0]
    coords = np.stack([mf.uniform_sample(SPHERE, rng).coords for _ in range(40)])
    V = bs.mode_matrix(SPHERE, band.modes, coords)
    theta = np.arccos(np.clip(coords[:, 2], -1, 1))
    phi = np.arctan2(coords[:, 1], coords[:, 0])
    for j, mode in enumerate(band.modes):
        ref = [_scipy_real_harmonic(l, mode.label[1], t, p)
               for t, p in zip(theta, phi)]
        assert np.allclose(V[:, j], ref, atol=1e-13), mode.label


def test_value_addition_theorem():
    # sum_m Y_lm(x)^2 = (2l+1)/(4 pi), x-independent
    rng = np.random.Generator(np.random.Philox(9))
    for lam in (9.0, 60.0, 200.0):
        band = sp.enumerate_band(SPHERE, lam)
        l = band.modes[0].label[0]
        coords = np.stack([mf.uniform_sample(SPHERE, rng).coords for _ in range(20)])
        V = bs.mode_matrix(SPHERE, band.modes, coords)
        target = (2 * l + 1) / (4 * math.pi)
        assert np.allclose((V ** 2).sum(axis=1), target, rtol=1e-11)


def test_torus_values_by_formula():
    band = sp.enumerate_band(TORUS, 5.0)
    rng = np.random.Generator(np.random.Philox(4))
    coords = np.stack([mf.uniform_sample(TORUS, rng).coords for _ in range(30)])
    V = bs.mode_matrix(TORUS, band.modes, coords)
    amp = math.sqrt(2.0 / TORUS.volume)
    for j, mode in enumerate(band.modes):
        k, flavor = mode.label
        w = 2.0 * math.pi * np.array(k) / np.array(TORUS.side_lengths)
        phase = coords @ w
        ref = amp * (np.cos(phase) if flavor == "cos" else np.sin(phase))
        assert np.allclose(V[:, j], ref, atol=1e-13)


def _fd_gradient(model, modes, x, h=1e-6):
    n = model.dim
    out = np.zeros((len(modes), n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        vp = bs.mode_matrix(model, modes, mf.exp_map(model, x, e).coords[None, :])[0]
        vm = bs.mode_matrix(model, modes, mf.exp_map(model, x, -e).coords[None, :])[0]
        out[:, a] = (vp - vm) / (2 * h)
    return out


@pytest.mark.parametrize("model,lam", [(SPHERE, 9.0), (SPHERE, 40.0), (TORUS, 5.0)])
def test_gradients_match_finite_differences(model, lam):
    band = sp.enumerate_band(model, lam)
    rng = np.random.Generator(np.random.Philox(12))
    for _ in range(6):
        x = mf.uniform_sample(model, rng)
        G = bs.gradient_matrix(model, band.modes, x)
        F = _fd_gradient(model, band.modes, x)
        scale = max(1.0, float(np.max(np.abs(G))))
        assert np.max(np.abs(G - F)) / scale < 1e-7


def test_gradients_at_poles():
    band = sp.enumerate_band(SPHERE, 9.0)
    for z in (1.0, -1.0):
        pole = mf.make_point(SPHERE, (0.0, 0.0, z))
        G = bs.gradient_matrix(SPHERE, band.modes, pole)
        F = _fd_gradient(SPHERE, band.modes, pole, h=1e-5)
        assert np.all(np.isfinite(G))
        scale = max(1.0, float(np.max(np.abs(G))))
        assert np.max(np.abs(G - F)) / scale < 1e-6
    # near-pole, where naive 1 - t^2 loses precision
    near = mf.make_point(SPHERE, (math.sin(1e-7), 0.0, math.cos(1e-7)))
    G = bs.gradient_matrix(SPHERE, band.modes, near)
    assert np.all(np.isfinite(G))


def test_gradient_addition_theorem():
    # sum_m |grad Y_lm|^2 = l(l+1) (2l+1)/(4 pi)
    band = sp.enumerate_band(SPHERE, 8.0)
    l = band.modes[0].label[0]
    rng = np.random.Generator(np.random.Philox(21))
    target = l * (l + 1) * (2 * l + 1) / (4 * math.pi)
    for _ in range(8):
        x = mf.uniform_sample(SPHERE, rng)
        G = bs.gradient_matrix(SPHERE, band.modes, x)
        assert float((G ** 2).sum()) == pytest.approx(target, rel=1e-9)


def test_torus_gradient_formula():
    band = sp.enumerate_band(TORUS, 4.0)
    x = mf.make_point(TORUS, (0.7, 2.1))
    G = bs.gradient_matrix(TORUS, band.modes, x)
    amp = math.sqrt(2.0 / TORUS.volume)
    for j, mode in enumerate(band.modes):
        k, flavor = mode.label
        w = 2.0 * math.pi * np.array(k) / np.array(TORUS.side_lengths)
        phase = float(x.coords @ w)
        ref = (-amp * math.sin(phase) * w if flavor == "cos"
               else amp * math.cos(phase) * w)
        assert np.allclose(G[j], ref, atol=1e-12)


def test_eval_and_grad_single_mode():
    band = sp.enumerate_band(SPHERE, 9.0)
    x = mf.make_point(SPHERE, (0.3, -0.5, 0.9))
    V = bs.mode_matrix(SPHERE, band.modes, x.coords[None, :])[0]
    G = bs.gradient_matrix(SPHERE, band.modes, x)
    for j, mode in enumerate(band.modes[:5]):
        assert bs.eval_mode(SPHERE, mode, x) == pytest.approx(V[j], abs=1e-14)
        assert np.allclose(bs.grad_mode(SPHERE, mode, x), G[j], atol=1e-14)


def test_quadrature_weights_sum_to_volume():
    nodes, weights = bs.quadrature_rule(SPHERE, 20)
    assert float(np.sum(weights)) == pytest.approx(SPHERE.volume, rel=1e-12)
    nodes_t, weights_t = bs.quadrature_rule(TORUS, 16)
    assert float(np.sum(weights_t)) == pytest.approx(TORUS.volume, rel=1e-12)


@pytest.mark.parametrize("model,lam,q,tol", [
    (SPHERE, 12.0, 20, 1e-12),
    (TORUS, 5.0, 24, 1e-12),
])
def test_band_orthonormality(model, lam, q, tol):
    band = sp.enumerate_band(model, lam)
    assert bs.orthonormality_check(model, band, q) < tol
