import numpy as np
import pytest

from smallsphere import expansion, sphere
from smallsphere.expansion import CurvatureDerivatives, project_bianchi
from smallsphere.quadrature import build_grid, integrate
from smallsphere.tensor import random_vacuum, validate_riemann

ZERO = validate_riemann(np.zeros((4, 4, 4, 4)))


def test_basis_dimensions():
    N, M = expansion.dw_basis(), expansion.d2w_basis()
    assert N.shape == (4 ** 5, 24)
    assert M.shape == (4 ** 6, 42)
    assert np.allclose(N.T @ N, np.eye(24), atol=1e-12)
    assert np.allclose(M.T @ M, np.eye(42), atol=1e-12)


def test_projection_of_zero_and_idempotence(rng):
    d = project_bianchi(np.zeros((4,) * 5), np.zeros((4,) * 6))
    assert not np.any(d.dW) and not np.any(d.d2W)
    raw = rng.normal(size=(4,) * 5)
    once = project_bianchi(raw).dW
    assert np.abs(project_bianchi(once).dW - once).max() <= 1e-12
    assert CurvatureDerivatives(once).bianchi_residual() <= 1e-12
    assert CurvatureDerivatives(raw).bianchi_residual() > 1e-2


def test_projection_is_nearest_valid_point(rng):
    raw = rng.normal(size=(4,) * 5)
    best = np.linalg.norm(raw - project_bianchi(raw).dW)
    N = expansion.dw_basis()
    base = project_bianchi(raw).dW.ravel()
    for _ in range(100):
        other = base + N @ rng.normal(scale=0.1, size=N.shape[1])
        assert np.linalg.norm(raw.ravel() - other) >= best - 1e-12


def test_projection_rejects_bad_shape():
    with pytest.raises(ValueError):
        project_bianchi(np.zeros((4,) * 4))
    with pytest.raises(ValueError):
        project_bianchi(np.zeros((4,) * 5), np.zeros((4,) * 5))


def test_d_divergence_identities(rng):
    c = random_vacuum(rng)
    zero = expansion.d_divergence_check(c, CurvatureDerivatives())
    assert zero["max"] == 0.0
    d = expansion.random_derivatives(rng)
    assert expansion.d_divergence_check(c, d)["max"] <= 1e-6
    # negative control: unprojected derivatives break the identities
    bad = CurvatureDerivatives(rng.normal(size=(4,) * 5), rng.normal(size=(4,) * 6))
    assert expansion.d_divergence_check(c, bad)["max"] > 1e-2


def test_vacuum_series_at_zero_curvature():
    s = expansion.vacuum_series(ZERO)
    pts = np.eye(3)
    assert np.allclose(s.trl[-1](pts), -2.0)
    assert np.allclose(s.trn[-1](pts), 1.0)
    for k in (2, 3, 4):
        assert not np.any(s.eta[k](pts))
    assert s.partial == {"trn2", "eta3", "h2", "trn3", "eta4", "h3"}


def test_partial_flags(rng):
    c = random_vacuum(rng)
    d = expansion.random_derivatives(rng)
    assert expansion.vacuum_series(c, d).partial == frozenset()
    assert expansion.vacuum_series(c, CurvatureDerivatives(d.dW)).partial == {"trn3", "eta4", "h3"}


def test_series_leading_terms(rng):
    c = random_vacuum(rng)
    s = expansion.vacuum_series(c)
    pts = sphere.random_directions(rng, 20)
    w0 = sphere.w0_field(c)(pts)
    # h^(1) and tr n^(1) both reduce to W0 in vacuum
    assert np.abs(s.h[1](pts) - w0).max() <= 1e-13
    assert np.abs(s.trn[1](pts) - w0).max() <= 1e-13
    assert np.abs(s.h0[1](pts) - 2.0 * w0).max() <= 1e-13
    # with no derivative data, tr n^(3) is purely quadratic in curvature
    alpha2 = np.sum(sphere.null_fields(c)["alpha"](pts) ** 2, axis=(1, 2))
    beta2 = np.sum(sphere.null_fields(c)["beta"](pts) ** 2, axis=1)
    assert np.allclose(s.trn[3](pts), alpha2 / 30 - 11 * beta2 / 45, atol=1e-12)


def test_trn2_integrates_to_zero(rng):
    c = random_vacuum(rng)
    s = expansion.vacuum_series(c, expansion.random_derivatives(rng))
    assert abs(integrate(s.trn[2], build_grid(12))) <= 1e-12


def test_quadratic_terms_scale(rng):
    c = random_vacuum(rng)
    c2 = validate_riemann(2.0 * np.array(c.riemann))
    pts = sphere.random_directions(rng, 10)
    a, b = expansion.vacuum_series(c), expansion.vacuum_series(c2)
    assert np.allclose(b.trl[3](pts), 4.0 * a.trl[3](pts), rtol=1e-13, atol=1e-13)
    assert np.allclose(b.h[1](pts), 2.0 * a.h[1](pts), rtol=1e-13, atol=1e-13)


def test_nonvacuum_data_zero_and_vacuum(rng):
    pts = sphere.random_directions(rng, 10)
    z = expansion.nonvacuum_data(ZERO)
    for f in (z.sigma4, z.h2sq, z.divAH, z.r_llbllb, z.ric_ll, z.ric_llb):
        assert not np.any(f(pts))
    c = random_vacuum(rng)
    nv = expansion.nonvacuum_data(c)
    w0 = sphere.w0_field(c)(pts)
    assert np.abs(nv.divAH(pts) + 4.0 * w0).max() <= 1e-12
    assert np.abs(nv.h2sq(pts) - 4.0 * w0).max() <= 1e-12
    assert not np.any(np.abs(nv.ric_ll(pts)) > 1e-13)


def test_k3_minus_h3(rng):
    assert expansion.k3_minus_h3_integral(ZERO) == 0.0
    c = random_vacuum(rng)
    g = build_grid(12)
    n = sphere.null_fields(c)
    w0 = sphere.w0_field(c)
    want = integrate(lambda p: -0.75 * w0(p) ** 2 - np.sum(n["alpha"](p) ** 2, axis=(1, 2)) / 60
                     + 11 / 45 * np.sum(n["beta"](p) ** 2, axis=1), g)
    got = expansion.k3_minus_h3_integral(c, g)
    assert got == pytest.approx(want, rel=1e-12)
    assert expansion.k3_minus_h3_integral(c, build_grid(10)) == pytest.approx(
        expansion.k3_minus_h3_integral(c, build_grid(14)), rel=1e-12)
