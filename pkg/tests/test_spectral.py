"""Spectral core: operator exactness, norm normalization, and properties.

Derivative oracles: analytic derivatives of trig data and an independent
8th-order centered finite-difference stencil on random band-limited fields.
Norm oracle: direct trapezoid quadrature of |f|^2 (exact for periodic data).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaxlab import (
    DimensionError,
    Grid,
    MeanNotZero,
    ScalarField,
    VectorField,
    curl,
    dealias,
    divergence,
    fractional_op,
    gradient,
    hom_sobolev_norm,
    inv_lap_gradient,
    l2_norm,
    laplacian,
    sobolev_norm,
)


def band_limited(grid, seed, kmax=5):
    rng = np.random.default_rng(seed)
    hat = np.zeros(grid.shape, dtype=complex)
    n1d = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    sel = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.d):
        sh = [1] * grid.d
        sh[ax] = grid.N
        sel &= np.abs(n1d.reshape(sh)) <= kmax
    hat[sel] = rng.normal(size=int(sel.sum())) + 1j * rng.normal(size=int(sel.sum()))
    vals = np.fft.ifftn(hat).real
    return ScalarField(grid, vals)


def fd_gradient(f, axis, order=8):
    """Independent 8th-order centered difference along one axis."""
    w = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0,
                  4 / 5, -1 / 5, 4 / 105, -1 / 280])
    out = np.zeros_like(f.values)
    for s, c in zip(range(-4, 5), w):
        out += c * np.roll(f.values, -s, axis=axis)
    return out / f.grid.dx


# ---------------------------------------------------------------- exactness

def test_gradient_analytic_1d():
    g = Grid(1, 64)
    x = g.nodes()[0]
    f = ScalarField(g, np.sin(3 * x))
    gr = gradient(f)
    assert np.max(np.abs(gr.components[0] - 3 * np.cos(3 * x))) < 1e-12


def test_gradient_matches_fd_oracle():
    g = Grid(2, 64)
    f = band_limited(g, seed=1, kmax=4)
    gr = gradient(f)
    for ax in range(2):
        fd = fd_gradient(f, ax)
        scale = np.max(np.abs(gr.components[ax])) + 1e-30
        assert np.max(np.abs(gr.components[ax] - fd)) / scale < 2e-5


def test_div_grad_is_laplacian():
    for d in (1, 2, 3):
        g = Grid(d, 32 if d == 3 else 64)
        f = band_limited(g, seed=d)
        resid = divergence(gradient(f)) - laplacian(f)
        assert l2_norm(resid) < 1e-10 * max(l2_norm(laplacian(f)), 1.0)


def test_curl_grad_is_zero():
    g = Grid(3, 32)
    f = band_limited(g, seed=7)
    assert l2_norm(curl(gradient(f))) < 1e-10 * max(l2_norm(gradient(f)), 1.0)


def test_div_curl_is_zero():
    g = Grid(3, 32)
    v = VectorField.from_scalars(g, [band_limited(g, seed=i) for i in range(3)])
    assert l2_norm(divergence(curl(v))) < 1e-10 * max(l2_norm(v), 1.0)


def test_curl_requires_3d():
    g = Grid(2, 32)
    v = VectorField.zeros(g)
    with pytest.raises(DimensionError):
        curl(v)


def test_inv_lap_gradient_divergence_identity():
    g = Grid(3, 32)
    f = band_limited(g, seed=3)
    f = f - f.mean()
    resid = divergence(inv_lap_gradient(f)) + f
    assert l2_norm(resid) < 1e-11 * max(l2_norm(f), 1.0)


def test_inv_lap_gradient_rejects_nonzero_mean():
    g = Grid(1, 64)
    f = ScalarField.constant(g, 1.0)
    with pytest.raises(MeanNotZero):
        inv_lap_gradient(f)


def test_fractional_op_inverts():
    g = Grid(2, 64)
    f = band_limited(g, seed=11)
    f = f - f.mean()
    back = fractional_op(fractional_op(f, 1.5), -1.5)
    assert l2_norm(back - f) < 1e-11 * max(l2_norm(f), 1.0)


# ------------------------------------------------------------ normalization

def test_l2_norm_of_cosine():
    # ||cos x||_{L^2(0,2pi)}^2 = pi
    g = Grid(1, 64)
    x = g.nodes()[0]
    f = ScalarField(g, np.cos(x))
    assert abs(l2_norm(f) ** 2 - np.pi) < 1e-12


def test_h1_norm_of_cosine():
    # (1+|k|^2) doubles the single-mode weight: ||cos||_{H^1}^2 = 2 pi
    g = Grid(1, 64)
    x = g.nodes()[0]
    f = ScalarField(g, np.cos(x))
    assert abs(sobolev_norm(f, 1) ** 2 - 2 * np.pi) < 1e-12


def test_hminus1_of_cosine():
    g = Grid(1, 64)
    x = g.nodes()[0]
    f = ScalarField(g, np.cos(x))
    assert abs(hom_sobolev_norm(f, -1) - np.sqrt(np.pi)) < 1e-12


def test_h3_norm_of_scaled_cosine():
    g = Grid(1, 64)
    x = g.nodes()[0]
    delta = 0.05
    f = ScalarField(g, delta * np.cos(x))
    assert abs(sobolev_norm(f, 3) ** 2 - 8 * np.pi * delta**2) < 1e-12


def test_l2_norm_matches_quadrature_oracle():
    for d in (1, 2):
        g = Grid(d, 64)
        f = band_limited(g, seed=4 + d)
        quad = np.sqrt(np.sum(f.values**2) * g.cell_volume)
        assert abs(l2_norm(f) - quad) < 1e-10 * quad


def test_norms_on_nondefault_box():
    g = Grid(1, 64, L=4 * np.pi)
    x = g.nodes()[0]
    f = ScalarField(g, np.cos(0.5 * x))
    # ||cos(x/2)||^2 over [0, 4pi) is 2 pi
    assert abs(l2_norm(f) ** 2 - 2 * np.pi) < 1e-12


# ---------------------------------------------------------------- properties

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), d=st.sampled_from([1, 2]))
def test_fft_round_trip(seed, d):
    g = Grid(d, 32)
    f = band_limited(g, seed)
    back = ScalarField.from_hat(g, f.hat)
    assert np.max(np.abs(back.values - f.values)) < 1e-13 * (np.max(np.abs(f.values)) + 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_dealias_idempotent(seed):
    g = Grid(2, 32)
    f = band_limited(g, seed, kmax=14)
    once = dealias(f)
    twice = dealias(once)
    assert l2_norm(twice - once) < 1e-12 * max(l2_norm(once), 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6),
       s=st.floats(0.0, 3.0), t=st.floats(0.0, 3.0))
def test_sobolev_norm_monotone_in_index(seed, s, t):
    g = Grid(1, 64)
    f = band_limited(g, seed)
    lo, hi = min(s, t), max(s, t)
    assert sobolev_norm(f, lo) <= sobolev_norm(f, hi) * (1 + 1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), c=st.floats(-5.0, 5.0))
def test_norm_homogeneity(seed, c):
    g = Grid(1, 64)
    f = band_limited(g, seed)
    assert abs(sobolev_norm(c * f, 2) - abs(c) * sobolev_norm(f, 2)) \
        < 1e-10 * (1 + sobolev_norm(f, 2))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), a=st.floats(0.5, 1.5), b=st.floats(0.5, 1.5))
def test_fractional_semigroup(seed, a, b):
    g = Grid(1, 64)
    f = band_limited(g, seed)
    f = f - f.mean()
    lhs = fractional_op(fractional_op(f, a), b)
    rhs = fractional_op(f, a + b)
    assert l2_norm(lhs - rhs) < 1e-9 * max(l2_norm(rhs), 1.0)


def test_gradient_linearity():
    g = Grid(2, 32)
    f1, f2 = band_limited(g, 1), band_limited(g, 2)
    lhs = gradient(f1 + 2.0 * f2)
    rhs = gradient(f1) + 2.0 * gradient(f2)
    assert l2_norm(lhs - rhs) < 1e-11 * max(l2_norm(rhs), 1.0)


def test_fields_are_immutable():
    g = Grid(1, 64)
    f = band_limited(g, 0)
    with pytest.raises(ValueError):
        f.values[0] = 1.0


def test_field_constructor_copies_input():
    g = Grid(1, 64)
    arr = np.zeros(g.shape)
    ScalarField(g, arr)
    arr[0] = 5.0  # must not raise: the field took a copy
