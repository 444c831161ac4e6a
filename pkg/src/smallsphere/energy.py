"""Vacuum small-sphere energy at order r^5 and its minimizing observer.

Two independent routes to the same number:

* closed form: ``(1/90) [V0 a0 + V.a + sum D^2 / (2 a0)]``, equivalently
  ``(1/8 pi) [A0 a0 + A.a + A_ij a^i a^j / a0]``;
* quadrature: energy component + reference Hamiltonian - physical
  Hamiltonian, each integrated over the sphere from the sphere fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import sphere
from .quadrature import SphereGrid, build_grid, integrate, pairwise_sum
from .tensor import CurvatureAtPoint, Observer, q_contract, v_vector

EIGHT_PI = 8.0 * np.pi
DIVERGENCE_RADIUS = 1e6


@dataclass(frozen=True)
class EnergyCoefficients:
    A0: float
    Ai: np.ndarray
    Aij: np.ndarray

    def energy(self, t0: Observer) -> float:
        a, a0 = t0.a, t0.a0
        return float((self.A0 * a0 + self.Ai @ a + a @ self.Aij @ a / a0) / EIGHT_PI)


@dataclass(frozen=True)
class MinimizerResult:
    a_bar: np.ndarray
    e5_min: float
    gradient_norm: float
    hessian_min_eigenvalue: float
    status: str
    iterations: int = 0


def _parts(c: CurvatureAtPoint):
    c.require_vacuum()
    W = c.riemann
    return W[0, 1:, 0, 1:], W[0, 1:, 1:, 1:]


def coefficients_closed_form(c: CurvatureAtPoint) -> EnergyCoefficients:
    D, B = _parts(c)
    s = np.sum(D ** 2)
    k = 4.0 * np.pi / 15.0
    A0 = k * (np.sum(B ** 2) / 6.0 + s / 2.0)
    Ai = k * (2.0 / 3.0) * np.einsum("jm,mij->i", D, B)
    Aij = -(2.0 * np.pi / 45.0) * s * np.eye(3)
    return EnergyCoefficients(float(A0), Ai, Aij)


def e5_closed_form(c: CurvatureAtPoint, t0: Observer) -> float:
    D, _ = _parts(c)
    return (q_contract(c, t0) + np.sum(D ** 2) / (2.0 * t0.a0)) / 90.0


def _v_and_s(c):
    D, _ = _parts(c)
    return v_vector(c).components, float(np.sum(D ** 2))


def e5_gradient(c: CurvatureAtPoint, a) -> np.ndarray:
    v, s = _v_and_s(c)
    a = np.asarray(a, dtype=float)
    a0 = np.sqrt(1.0 + a @ a)
    return (v[0] * a / a0 + v[1:] - s * a / (2.0 * a0 ** 3)) / 90.0


def e5_hessian(c: CurvatureAtPoint, a) -> np.ndarray:
    v, s = _v_and_s(c)
    a = np.asarray(a, dtype=float)
    a0 = np.sqrt(1.0 + a @ a)
    I, aa = np.eye(3), np.outer(a, a)
    h = v[0] * (I / a0 - aa / a0 ** 3) - 0.5 * s * (I / a0 ** 3 - 3.0 * aa / a0 ** 5)
    return h / 90.0


def minimize(c: CurvatureAtPoint, max_iter=200) -> MinimizerResult:
    """Newton's method with Armijo backtracking, started at a = 0."""
    v, s = _v_and_s(c)
    if not np.any(c.riemann):
        return MinimizerResult(np.zeros(3), 0.0, 0.0, 0.0, "zero-curvature")

    def f(a):
        return e5_closed_form(c, Observer(a))

    tol = 1e-12 * max(1.0, abs(coefficients_closed_form(c).A0))
    a = np.zeros(3)
    fa = f(a)
    for it in range(max_iter):
        g = e5_gradient(c, a)
        if np.linalg.norm(g) <= tol:
            break
        H = e5_hessian(c, a)
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -g
        if g @ step >= 0:
            step = -g
        t = 1.0
        while True:
            trial = a + t * step
            ft = f(trial)
            if ft <= fa + 1e-4 * t * (g @ step) or t < 1e-12:
                break
            t *= 0.5
        if t < 1e-12:
            break
        a, fa = trial, ft
        if np.linalg.norm(a) > DIVERGENCE_RADIUS:
            break
    g = e5_gradient(c, a)
    hmin = float(np.linalg.eigvalsh(e5_hessian(c, a)).min())
    if np.linalg.norm(a) > DIVERGENCE_RADIUS or v_vector(c).kind.startswith("null"):
        status = "null-V-no-minimum"
    elif np.linalg.norm(g) <= tol and hmin > 0:
        status = "unique-minimum"
    else:
        status = "not-converged"
    return MinimizerResult(a, float(fa), float(np.linalg.norm(g)), hmin, status, it)


def _grid(grid):
    return build_grid() if grid is None else grid


def _values(c, pts):
    """Everything the three limit pieces need, evaluated at quadrature nodes."""
    n = sphere.null_fields(c)
    w0f = sphere.w0_field(c)
    pk = sphere.pk_field(c)
    xi3 = sphere.xi_3(c)
    R, _ = sphere.rij_sj_fields(c)
    S = sphere.sj_closed_form(c)
    return {
        "x": pts,
        "w0": w0f(pts),
        "wi": sphere.wi_field(c)(pts),
        "pk": pk(pts),
        "alpha2": np.sum(n["alpha"](pts) ** 2, axis=(1, 2)),
        "beta2": np.sum(n["beta"](pts) ** 2, axis=1),
        "aa2": np.sum(sphere.aa3_field(c)(pts) ** 2, axis=(1, 2)),
        "rij": R(pts),
        "sj": S(pts),
        "lap_xi3": xi3.laplacian()(pts),
        # grad_k (X_j^(3) + P_j), so [n, j, k]
        "grad_xp": sphere.SphereField.from_poly(xi3.poly + pk.poly).gradient()(pts),
    }


def _integral(vals, grid: SphereGrid):
    w = grid.weights.reshape((-1,) + (1,) * (vals.ndim - 1))
    return pairwise_sum(vals * w)


def energy_component_limit(c: CurvatureAtPoint, t0: Observer, grid=None) -> float:
    grid = _grid(grid)
    v = _values(c, grid.points)
    a, a0 = t0.a, t0.a0
    x, w0, pk = v["x"], v["w0"], v["pk"]
    k3h3 = -0.75 * w0 ** 2 - v["alpha2"] / 60.0 + 11.0 / 45.0 * v["beta2"]
    ap = pk @ a
    h3 = 0.5 * v["aa2"] + k3h3 - (2.0 / 3.0) * w0 ** 2 - 30.0 * ap ** 2 / a0 ** 2
    ax = x @ a
    cross = np.einsum("i,j,nij->n", a, a, v["rij"]) + 2.0 * np.einsum("i,j,nji->n", a, a, v["grad_xp"])
    cross += ax * ((v["sj"] - v["lap_xi3"] + 12.0 * pk) @ a)
    integrand = a0 * h3 - 0.75 / a0 * w0 ** 2 * ax ** 2 + 0.5 / a0 * w0 * cross
    return float(_integral(integrand, grid))


def reference_hamiltonian_limit(c: CurvatureAtPoint, t0: Observer, grid=None) -> float:
    grid = _grid(grid)
    w0 = sphere.w0_field(c)(grid.points)
    pk = sphere.pk_field(c)(grid.points)
    a, a0 = t0.a, t0.a0
    integrand = (4.0 / 3.0) * a0 * w0 ** 2 - 10.0 / a0 * (grid.points @ a) * w0 * (pk @ a)
    return float(_integral(integrand, grid))


def physical_hamiltonian_limit(c: CurvatureAtPoint, t0: Observer, grid=None) -> float:
    grid = _grid(grid)
    pts = grid.points
    w0 = sphere.w0_field(c)(pts)
    wi = sphere.wi_field(c)(pts)
    beta2 = np.sum(sphere.null_fields(c)["beta"](pts) ** 2, axis=1)
    a, a0 = t0.a, t0.a0
    integrand = 4.0 * a0 / 3.0 * w0 ** 2 + (2.0 / 3.0) * (wi @ a) * w0 - (pts @ a) * beta2
    return float(_integral(integrand, grid))


def e5_from_pieces(c: CurvatureAtPoint, t0: Observer, grid=None) -> float:
    grid = _grid(grid)
    total = (energy_component_limit(c, t0, grid) + reference_hamiltonian_limit(c, t0, grid)
             - physical_hamiltonian_limit(c, t0, grid))
    return total / EIGHT_PI


def integrate_field(f, grid=None):
    return integrate(f, _grid(grid))
