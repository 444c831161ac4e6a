"""Expansion coefficients in the affine parameter r for the data on the small spheres.

Also home to the linear-algebra model of curvature derivatives at p: a
rank-5 array ``dW[m, a, b, c, d] = (nabla_m W)_abcd`` and a rank-6 array
``d2W[n, m, a, b, c, d] = (nabla_n nabla_m W)_abcd``.  Valid vacuum
derivatives form linear subspaces cut out by the algebraic symmetries, the
second Bianchi identity and trace-freeness.  For ``d2W`` the two derivative
slots are taken symmetric: the commutator is quadratic in W and never enters
the L-L contractions used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .poly import Poly, einsum
from .quadrature import build_grid, integrate
from .sphere import (
    _L4, _LB4, _P4, X, SphereField, covariant_gradient, null_polys, random_directions,
)
from .tensor import METRIC, CurvatureAtPoint

RANK_TOL = 1e-10


def _dw_residuals(T):
    """Constraint residuals for a batch of rank-5 arrays with a leading batch axis."""
    g = METRIC
    parts = [
        T + np.einsum("nmbacd->nmabcd", T),
        T + np.einsum("nmabdc->nmabcd", T),
        T - np.einsum("nmcdab->nmabcd", T),
        T + np.einsum("nmacdb->nmabcd", T) + np.einsum("nmadbc->nmabcd", T),
        T + np.einsum("nabmcd->nmabcd", T) + np.einsum("nbmacd->nmabcd", T),
        np.einsum("ac,nmabcd->nmbd", g, T),
        np.einsum("ad,nmabcd->nmbc", g, T),
        np.einsum("bd,nmabcd->nmac", g, T),
    ]
    return np.concatenate([p.reshape(T.shape[0], -1) for p in parts], axis=1)


def _null_space(A):
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * s.max()))
    return vt[rank:].T


@lru_cache(maxsize=1)
def dw_basis() -> np.ndarray:
    """Orthonormal basis (1024 x k) of valid vacuum first derivatives."""
    eye = np.eye(4 ** 5).reshape((4 ** 5,) + (4,) * 5)
    A = _dw_residuals(eye).T
    return _null_space(A)


@lru_cache(maxsize=1)
def d2w_basis() -> np.ndarray:
    """Orthonormal basis (4096 x k) of symmetric, slotwise-valid second derivatives."""
    N = dw_basis()
    k = N.shape[1]
    G = np.kron(np.eye(4), N)  # y (4k) -> d2W (4096), isometric
    full = G.T.reshape(4 * k, 4, 4, 4, 4, 4, 4)
    swap = full - np.swapaxes(full, 1, 2)
    Z = _null_space(swap.reshape(4 * k, -1).T)
    return G @ Z


@dataclass(frozen=True)
class CurvatureDerivatives:
    dW: np.ndarray | None = None
    d2W: np.ndarray | None = None

    def bianchi_residual(self) -> float:
        if self.dW is None:
            return 0.0
        return float(np.abs(_dw_residuals(self.dW[None])).max())


def project_bianchi(raw, raw2=None) -> CurvatureDerivatives:
    """Least-squares projection onto the valid derivative subspaces."""
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (4,) * 5:
        raise ValueError("dW must have shape (4, 4, 4, 4, 4)")
    N = dw_basis()
    dW = (N @ (N.T @ raw.ravel())).reshape((4,) * 5)
    d2W = None
    if raw2 is not None:
        raw2 = np.asarray(raw2, dtype=float)
        if raw2.shape != (4,) * 6:
            raise ValueError("d2W must have shape (4,) * 6")
        M = d2w_basis()
        d2W = (M @ (M.T @ raw2.ravel())).reshape((4,) * 6)
    return CurvatureDerivatives(dW, d2W)


def random_derivatives(rng, scale=1.0) -> CurvatureDerivatives:
    N, M = dw_basis(), d2w_basis()
    dW = (N @ rng.normal(size=N.shape[1])).reshape((4,) * 5) * scale
    d2W = (M @ rng.normal(size=M.shape[1])).reshape((4,) * 6) * scale
    return CurvatureDerivatives(dW, d2W)


def d_polys(d: CurvatureDerivatives) -> dict:
    """Ambient D and D^2 null components (missing derivatives give zero fields)."""
    zero = {"rho": Poly.constant(0.0), "beta": Poly.constant(np.zeros(3)),
            "alpha": Poly.constant(np.zeros((3, 3)))}
    out = {}
    if d.dW is None:
        out.update({"D" + k: v for k, v in zero.items()})
    else:
        T = d.dW
        out["Drho"] = einsum("mabcd,m,a,b,c,d->", T, _L4, _LB4, _L4, _LB4, _L4)
        out["Dbeta"] = einsum("mabcd,m,ia,b,c,d->i", T, _L4, _P4, _L4, _LB4, _L4)
        out["Dalpha"] = einsum("mabcd,m,ia,b,jc,d->ij", T, _L4, _P4, _L4, _P4, _L4)
    if d.d2W is None:
        out.update({"D2" + k: v for k, v in zero.items()})
    else:
        T = d.d2W
        out["D2rho"] = einsum("nmabcd,n,m,a,b,c,d->", T, _L4, _L4, _LB4, _L4, _LB4, _L4)
        out["D2beta"] = einsum("nmabcd,n,m,ia,b,c,d->i", T, _L4, _L4, _P4, _L4, _LB4, _L4)
        out["D2alpha"] = einsum("nmabcd,n,m,ia,b,jc,d->ij", T, _L4, _L4, _P4, _L4, _P4, _L4)
    return out


_D_RANKS = {"rho": 0, "beta": 1, "alpha": 2}


def d_fields(d: CurvatureDerivatives) -> dict:
    return {k: SphereField.from_poly(p, _D_RANKS[k.lstrip("D2")])
            for k, p in d_polys(d).items()}


def _div(f: SphereField, x):
    """Divergence on the first tangent slot, by finite differences."""
    return np.einsum("kk...->...", covariant_gradient(f, x))


def d_divergence_check(c: CurvatureAtPoint, d: CurvatureDerivatives, points=None, seed=0) -> dict:
    """Max pointwise residuals of the four divergence identities for D-fields."""
    c.require_vacuum()
    if points is None:
        points = random_directions(np.random.default_rng(seed), 20)
    f = d_fields(d)
    checks = {
        "div D beta = 4 D rho": (f["Dbeta"], 4.0, f["Drho"]),
        "div D^2 beta = 5 D^2 rho": (f["D2beta"], 5.0, f["D2rho"]),
        "div D alpha = 5 D beta": (f["Dalpha"], 5.0, f["Dbeta"]),
        "div D^2 alpha = 6 D^2 beta": (f["D2alpha"], 6.0, f["D2beta"]),
    }
    report = {}
    for name, (lhs, k, rhs) in checks.items():
        report[name] = max(float(np.abs(_div(lhs, x) - k * rhs(x)).max()) for x in points)
    report["max"] = max(report.values())
    return report


def _const(v) -> SphereField:
    return SphereField.from_poly(Poly.constant(v))


@dataclass(frozen=True)
class VacuumSeries:
    trl: dict
    trn: dict
    eta: dict
    h: dict
    h0: dict
    partial: frozenset = field(default_factory=frozenset)


def _sq(p: Poly, axes: str) -> Poly:
    return einsum(f"{axes},{axes}->", p, p)


def vacuum_series(c: CurvatureAtPoint, d: CurvatureDerivatives | None = None) -> VacuumSeries:
    c.require_vacuum()
    d = d or CurvatureDerivatives()
    n = null_polys(c)
    dp = d_polys(d)
    alpha2 = _sq(n["alpha"], "ij")
    beta2 = _sq(n["beta"], "i")
    rho = n["rho"]
    w0 = einsum("ij,i,j->", c.riemann[0, 1:, 0, 1:], X, X)
    n3 = dp["D2rho"] * 0.375 + alpha2 / 30.0 - beta2 * (11.0 / 45.0)
    ab = einsum("ij,j->i", n["alpha"], n["beta"])
    fp = SphereField.from_poly
    partial = set()
    if d.dW is None:
        partial |= {"trn2", "eta3", "h2"}
    if d.d2W is None:
        partial |= {"trn3", "eta4", "h3"}
    return VacuumSeries(
        trl={-1: _const(-2.0), 3: fp(alpha2 / 45.0)},
        trn={-1: _const(1.0), 1: fp(rho), 2: fp(dp["Drho"] * (2.0 / 3.0)), 3: fp(n3)},
        eta={2: fp(n["beta"] / 3.0, 1), 3: fp(dp["Dbeta"] / 4.0, 1),
             4: fp(dp["D2beta"] / 10.0 - ab / 45.0, 1)},
        h={-1: _const(2.0), 1: fp(rho), 2: fp(dp["Drho"] * (2.0 / 3.0)),
           3: fp(n3 - alpha2 / 90.0 - rho * rho / 4.0)},
        h0={-1: _const(2.0), 1: fp(w0 * 2.0)},
        partial=frozenset(partial),
    )


def k3_minus_h3_integral(c: CurvatureAtPoint, grid=None) -> float:
    """Integral of k^(3) - h^(3); D-derivative terms integrate to zero and are left out."""
    c.require_vacuum()
    grid = build_grid() if grid is None else grid
    n = null_polys(c)
    w0 = einsum("ij,i,j->", c.riemann[0, 1:, 0, 1:], X, X)
    integrand = w0 * w0 * (-0.75) - _sq(n["alpha"], "ij") / 60.0 + _sq(n["beta"], "i") * (11.0 / 45.0)
    return integrate(integrand, grid)


@dataclass(frozen=True)
class NonVacuumData:
    sigma4: SphereField
    h2sq: SphereField
    divAH: SphereField
    r_llbllb: SphereField
    ric_ll: SphereField
    ric_llb: SphereField


def nonvacuum_data(c: CurvatureAtPoint) -> NonVacuumData:
    """Leading data for general curvature.

    ``h2sq`` is the r^0 coefficient of |H|^2, 4 R(L,Lb,L,Lb) + (8/3) Ric(L,Lb);
    it follows from |H|^2 = -2 tr(l) tr(n) with the expansions of tr l and
    tr n, and reduces to 4 rho in vacuum (|H| = 2/r + rho r).
    """
    R = c.riemann
    ric = c.ricci
    rbar = einsum("abcd,a,b,c,d->", R, _L4, _LB4, _L4, _LB4)
    ric_ll = einsum("ab,a,b->", ric, _L4, _L4)
    ric_llb = einsum("ab,a,b->", ric, _L4, _LB4)
    sigma4 = einsum("abcd,a,ib,jc,d->ij", R, _L4, _P4, _P4, _L4) * (-1.0 / 3.0)
    h2sq = rbar * 4.0 + ric_llb * (8.0 / 3.0)
    inner = rbar * 0.5 + ric_ll / 6.0 + ric_llb / 3.0
    div_ah = inner.laplace_beltrami() - rbar - ric_llb / 3.0 - ric_ll / 6.0
    fp = SphereField.from_poly
    return NonVacuumData(fp(sigma4, 2), fp(h2sq), fp(div_ah), fp(rbar), fp(ric_ll), fp(ric_llb))
