"""Randomized identity checks grouped into suites, shared by the CLI ``verify`` command."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import energy, expansion, sphere
from .poly import Poly, einsum
from .quadrature import all_index_tuples, build_grid, integrate, monomial_integral
from .sphere import X, random_directions
from .tensor import Observer, bel_robinson, q_contract, random_vacuum

SUITES = ("identities", "integrals", "expansion", "energy")


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def as_dict(self):
        return {"name": self.name, "residual": float(self.residual),
                "tolerance": self.tolerance, "pass": self.passed}


def rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.abs(a - b).max() / max(1.0, np.abs(b).max()))


def _worst(name, values, tol):
    return Check(name, float(max(values)), tol)


def test_set(max_degree=4):
    """Monomials of degree <= max_degree in x, used as weak-form test functions."""
    out = [Poly.constant(1.0)]
    for d in range(1, max_degree + 1):
        for idx in itertools.combinations_with_replacement(range(3), d):
            p = Poly.constant(1.0)
            for i in idx:
                p = p * X[i]
            out.append(p)
    return out


def weak_eigen_residual(p: Poly, lam: float, grid, tests=None) -> float:
    """max_g |integral (Lap p + lam p) g| / max|p| over a polynomial test set."""
    tests = test_set() if tests is None else tests
    pts, w = grid.points, grid.weights
    r = (p.laplace_beltrami() + p * lam)(pts)
    scale = max(1.0, float(np.abs(p(pts)).max()))
    return max(float(np.abs(np.tensordot(w * g(pts), r, axes=(0, 0))).max()) for g in tests) / scale


# the six pointwise derivative identities and their contractions, at points xs (N, 3)
def derivative_residuals(c, xs) -> dict:
    xs = np.atleast_2d(xs)
    n = sphere.null_fields(c)
    P = np.eye(3) - np.einsum("ni,nj->nij", xs, xs)
    eps = np.einsum("ijk,nk->nij", np.array(sphere.EPS), xs)
    al, alb = n["alpha"](xs), n["alpha_bar"](xs)
    be, beb = n["beta"](xs), n["beta_bar"](xs)
    rho, sig = n["rho"](xs), n["sigma"](xs)
    g = {k: sphere.covariant_gradient_many(n[k], xs) for k in n}
    # K_cabd = P_ca P_bd + P_cb P_ad + eps_ca eps_bd + eps_cb eps_ad
    K = (np.einsum("nca,nbd->ncabd", P, P) + np.einsum("ncb,nad->ncabd", P, P)
         + np.einsum("nca,nbd->ncabd", eps, eps) + np.einsum("ncb,nad->ncabd", eps, eps))
    r, s_ = rho[:, None, None], sig[:, None, None]
    pairs = {
        "grad alpha": (g["alpha"], np.einsum("ncabd,nd->ncab", K, be)),
        "grad alpha_bar": (g["alpha_bar"], 0.5 * np.einsum("ncabd,nd->ncab", K, beb)),
        "grad beta": (g["beta"], -0.75 * s_ * eps + 1.5 * r * P - 0.5 * al),
        "grad beta_bar": (g["beta_bar"], 0.375 * s_ * eps + 0.75 * r * P - alb),
        "grad rho": (g["rho"], -be - 2.0 * beb),
        "grad sigma": (g["sigma"], 2.0 * np.einsum("nab,nb->na", eps, be - 2.0 * beb)),
        "div alpha = 4 beta": (np.einsum("naab->nb", g["alpha"]), 4.0 * be),
        "div alpha_bar = 2 beta_bar": (np.einsum("naab->nb", g["alpha_bar"]), 2.0 * beb),
        "div beta = 3 rho": (np.einsum("naa->n", g["beta"]), 3.0 * rho),
        "div beta_bar = 3 rho / 2": (np.einsum("naa->n", g["beta_bar"]), 1.5 * rho),
        "curl beta = -3 sigma / 2": (np.einsum("nab,nab->n", eps, g["beta"]), -1.5 * sig),
        "curl beta_bar = 3 sigma / 4": (np.einsum("nab,nab->n", eps, g["beta_bar"]), 0.75 * sig),
    }
    return {k: float(np.abs(a - b).max()) for k, (a, b) in pairs.items()}


def alpha2_residuals(c, xs) -> dict:
    xs = np.atleast_2d(xs)
    n = sphere.null_fields(c)
    alpha = n["alpha"]
    a2 = sphere.SphereField(lambda y: np.sum(alpha(y) ** 2, axis=(-2, -1)))
    al, be = alpha(xs), n["beta"](xs)
    grad = sphere.covariant_gradient_many(a2, xs)
    lap = sphere.fd_laplacian_many(a2, xs, h=3e-3)
    return {
        "grad |alpha|^2 = 8 alpha beta": float(np.abs(grad - 8.0 * np.einsum("nab,nb->na", al, be)).max()),
        "lap |alpha|^2 = 32 |beta|^2 - 4 |alpha|^2":
            float(np.abs(lap - (32.0 * np.sum(be ** 2, axis=1) - 4.0 * np.sum(al ** 2, axis=(1, 2)))).max()),
    }


def suite_identities(rng, curvatures, n_points=20):
    checks = []
    res, br, gauge = [], [], []
    ders = {}
    for c in curvatures:
        q = bel_robinson(c).q
        scale = max(1.0, np.abs(q).max())
        sym = max(np.abs(q - q.transpose(p)).max() for p in itertools.permutations(range(4)))
        t0 = Observer(rng.normal(size=3))
        full = np.einsum("abcd,a,b,c,d->", q, *([np.eye(4)[0]] * 3), np.concatenate([[t0.a0], t0.a]))
        br.append(max(sym / scale, rel(q_contract(c, t0), full)))
        xs = random_directions(rng, n_points)
        for k, v in {**derivative_residuals(c, xs), **alpha2_residuals(c, xs)}.items():
            ders[k] = max(ders.get(k, 0.0), v)
        for x in xs:
            a, b = sphere.null_decompose(c, x), sphere.null_decompose(c, x, angle=0.7)
            gauge.append(max(abs(a.rho - b.rho), abs(a.sigma - b.sigma),
                             abs(np.sum(a.alpha ** 2) - np.sum(b.alpha ** 2)),
                             abs(a.beta @ a.beta - b.beta @ b.beta)))
        pts = random_directions(rng, 20)
        R, S = sphere.rij_sj_fields(c)
        res.append(max(rel(R(pts), sphere.rij_closed_form(c)(pts)),
                       rel(S(pts), sphere.sj_closed_form(c)(pts))))
    checks.append(_worst("Bel-Robinson symmetry and contraction", br, 1e-12))
    for k, v in ders.items():
        checks.append(Check(k, v, 1e-6))
    checks.append(_worst("tangent-basis gauge independence", gauge, 1e-12))
    checks.append(_worst("R_ij and S_j closed forms", res, 1e-12))
    grid = build_grid()
    eig = []
    for c in curvatures:
        n = sphere.null_polys(c)
        wi = sphere.wi_field(c).poly
        pk = sphere.pk_field(c).poly
        eig.append(max(weak_eigen_residual(n["rho"], 6.0, grid), weak_eigen_residual(n["sigma"], 6.0, grid),
                       max(weak_eigen_residual(wi[i], 6.0, grid) for i in range(3)),
                       max(weak_eigen_residual(pk[i], 12.0, grid) for i in range(3))))
    checks.append(_worst("eigenfunction weak forms", eig, 1e-10))
    return checks


def suite_integrals(rng, curvatures):
    grid = build_grid(12)
    mono = 0.0
    for n in (2, 4, 6):
        for idx in all_index_tuples(n):
            cols = [i - 1 for i in idx]
            got = integrate(lambda pts: np.prod(pts[:, cols], axis=1), grid)
            mono = max(mono, abs(got - monomial_integral(idx)))
    checks = [Check("monomial table vs quadrature", mono, 1e-12)]
    ab, abx, b2, w0xx, wp, aa = [], [], [], [], [], []
    pts, w = grid.points, grid.weights
    for c in curvatures:
        D, B = c.riemann[0, 1:, 0, 1:], c.riemann[0, 1:, 1:, 1:]
        n = sphere.null_fields(c)
        a2 = np.sum(n["alpha"](pts) ** 2, axis=(1, 2))
        be2 = np.sum(n["beta"](pts) ** 2, axis=1)
        ia2, ib2 = w @ a2, w @ be2
        ab.append(rel(ia2, 8.0 * ib2))
        abx.append(rel(w @ (a2[:, None] * pts), 16.0 * (w @ (be2[:, None] * pts))))
        b2.append(rel(ib2, 12 * np.pi / 15 * np.sum(D ** 2) + 6 * np.pi / 15 * np.sum(B ** 2)))
        w0 = sphere.w0_field(c)(pts)
        got = np.einsum("n,n,nm,nk->mk", w, w0 ** 2, pts, pts)
        want = 4 * np.pi / 105 * (2 * np.eye(3) * np.sum(D ** 2) + 8 * D.T @ D)
        w0xx.append(rel(got, want))
        pk = sphere.pk_field(c)
        grad_x = X.surface_grad()(pts)
        grad_p = pk.gradient()(pts)
        lhs = np.einsum("n,n,nik,njk->ij", w, w0, grad_x, grad_p)
        rhs = 4.0 * np.einsum("n,n,ni,nj->ij", w, w0, pts, pk(pts))
        wp.append(rel(lhs, rhs))
        A = sphere.aa3_field(c)(pts)
        aa.append(rel(w @ np.sum(A ** 2, axis=(1, 2)), 3.0 * (w @ w0 ** 2)))
    checks += [
        _worst("int |alpha|^2 = 8 int |beta|^2", ab, 1e-10),
        _worst("int X |alpha|^2 = 16 int X |beta|^2", abx, 1e-10),
        _worst("int |beta|^2 closed form", b2, 1e-10),
        _worst("int W0^2 X^m X^n closed form", w0xx, 1e-10),
        _worst("int W0 grad X . grad P = 4 int W0 X P", wp, 1e-10),
        _worst("int |AA|^2 = 3 int W0^2", aa, 1e-10),
    ]
    return checks


def suite_expansion(rng, curvatures, derivs=None):
    grid = build_grid(14)
    div, integ, proj, h1 = [], [], [], []
    k3 = []
    for c in curvatures:
        d = derivs if derivs is not None else expansion.random_derivatives(rng)
        proj.append(d.bianchi_residual())
        div.append(expansion.d_divergence_check(c, d, random_directions(rng, 5))["max"])
        f = expansion.d_fields(d)
        integ.append(max(abs(integrate(f["Drho"], grid)), abs(integrate(f["D2rho"], grid))))
        s = expansion.vacuum_series(c, d)
        pts = random_directions(rng, 20)
        hsq1 = -2.0 * (s.trl[-1](pts) * s.trn[1](pts))
        h1.append(float(np.abs(hsq1 / 4.0 - sphere.w0_field(c)(pts)).max()))
        D, B = c.riemann[0, 1:, 0, 1:], c.riemann[0, 1:, 1:, 1:]
        ib2 = 12 * np.pi / 15 * np.sum(D ** 2) + 6 * np.pi / 15 * np.sum(B ** 2)
        want = -0.75 * 8 * np.pi / 15 * np.sum(D ** 2) + (-8.0 / 60.0 + 11.0 / 45.0) * ib2
        k3.append(rel(expansion.k3_minus_h3_integral(c), want))
    return [
        _worst("Bianchi residual of projected derivatives", proj, 1e-12),
        _worst("D-divergence identities", div, 1e-6),
        _worst("int D rho = int D^2 rho = 0", integ, 1e-9),
        _worst("|H| first coefficient equals W0", h1, 1e-12),
        _worst("int (k3 - h3) closed-form assembly", k3, 1e-10),
    ]


def suite_energy(rng, curvatures):
    dual, pieces, grad, mins = [], [], [], []
    for c in curvatures:
        t0 = Observer(rng.normal(size=3))
        dual.append(rel(energy.e5_closed_form(c, t0), energy.coefficients_closed_form(c).energy(t0)))
        pieces.append(rel(energy.e5_from_pieces(c, t0), energy.e5_closed_form(c, t0)))
        r = energy.minimize(c)
        if r.status == "unique-minimum":
            grad.append(r.gradient_norm)
            deltas = random_directions(rng, 20) * 0.1
            mins.append(max(r.e5_min - energy.e5_closed_form(c, Observer(r.a_bar + dlt)) for dlt in deltas))
    checks = [
        _worst("E5 closed form = A-coefficient form", dual, 1e-12),
        _worst("E5 three-piece assembly = closed form", pieces, 1e-8),
    ]
    if grad:
        checks.append(_worst("minimizer gradient norm", grad, 1e-10))
        # every perturbation must strictly increase the energy
        checks.append(Check("minimizer beats perturbations", max(0.0, max(mins)), 0.0))
    return checks


def run_suite(name, seed=42, curvatures=None, n_random=3, derivs=None):
    rng = np.random.default_rng(seed)
    curvatures = list(curvatures or []) + [random_vacuum(rng) for _ in range(n_random)]
    if name == "identities":
        return suite_identities(rng, curvatures)
    if name == "integrals":
        return suite_integrals(rng, curvatures)
    if name == "expansion":
        return suite_expansion(rng, curvatures, derivs)
    if name == "energy":
        return suite_energy(rng, curvatures)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
