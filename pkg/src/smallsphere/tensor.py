"""Pointwise curvature algebra in an orthonormal frame with metric diag(-1, 1, 1, 1).

Curvature is stored densely as ``R[a, b, c, d]`` with the convention that the
Ricci tensor is ``Ric_bc = g^{ad} R_abcd``, so that sectional curvature reads
``R(X, Y, Y, X)``.  Vacuum Weyl tensors also have a canonical ten-parameter
form: the electric part ``D_mn = W_0m0n`` and the magnetic part ``E`` with
``W_0ijk = eps_jkn E_in``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])

EPS = np.zeros((3, 3, 3))
for _p in itertools.permutations(range(3)):
    EPS[_p] = np.linalg.det(np.eye(3)[list(_p)])

SYM_TOL = 1e-12
VAC_TOL = 1e-12
NULL_TOL = 1e-12


class CurvatureError(ValueError):
    """Curvature input violating an algebraic identity or a precondition."""


@dataclass(frozen=True)
class CurvatureAtPoint:
    riemann: np.ndarray
    is_vacuum: bool

    @property
    def ricci(self) -> np.ndarray:
        return np.einsum("ad,abcd->bc", METRIC, self.riemann)

    @property
    def scalar(self) -> float:
        return float(np.einsum("bc,bc->", METRIC, self.ricci))

    def require_vacuum(self):
        if not self.is_vacuum:
            raise CurvatureError("operation needs vacuum curvature (nonzero Ricci contraction)")


@dataclass(frozen=True)
class ElectricMagneticParts:
    D: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        for name in ("D", "E"):
            m = np.asarray(getattr(self, name), dtype=float)
            if m.shape != (3, 3):
                raise CurvatureError(f"{name} must be 3x3")
            tol = 1e-14 * max(1.0, np.abs(m).max())
            if np.abs(m - m.T).max() > tol:
                raise CurvatureError(f"{name} is not symmetric")
            if abs(np.trace(m)) > tol:
                raise CurvatureError(f"{name} is not traceless")
            object.__setattr__(self, name, m)


@dataclass(frozen=True)
class BelRobinsonTensor:
    q: np.ndarray


@dataclass(frozen=True)
class CausalVector:
    components: np.ndarray
    kind: str

    @property
    def norm2(self) -> float:
        v = self.components
        return float(-v[0] ** 2 + v[1:] @ v[1:])


@dataclass(frozen=True)
class Observer:
    """Unit future timelike T0 = (a0, -a1, -a2, -a3) with a0 = sqrt(1 + |a|^2)."""

    a: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(3)
        if not np.all(np.isfinite(a)):
            raise ValueError("observer components must be finite")
        object.__setattr__(self, "a", a)

    @property
    def a0(self) -> float:
        return float(np.sqrt(1.0 + self.a @ self.a))

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([[self.a0], -self.a])


def _identity_residuals(R):
    return {
        "antisymmetry in the first pair": np.abs(R + R.transpose(1, 0, 2, 3)).max(),
        "antisymmetry in the last pair": np.abs(R + R.transpose(0, 1, 3, 2)).max(),
        "pair symmetry": np.abs(R - R.transpose(2, 3, 0, 1)).max(),
        "first Bianchi identity": np.abs(R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)).max(),
    }


def validate_riemann(raw) -> CurvatureAtPoint:
    R = np.array(raw, dtype=float)
    if R.shape != (4, 4, 4, 4):
        raise CurvatureError(f"Riemann tensor must have shape (4, 4, 4, 4), got {R.shape}")
    if not np.all(np.isfinite(R)):
        raise CurvatureError("Riemann tensor has non-finite entries")
    scale = np.abs(R).max()
    for name, res in _identity_residuals(R).items():
        if res > SYM_TOL * scale:
            raise CurvatureError(f"{name} violated (residual {res:.3e})")
    ric = np.einsum("ad,abcd->bc", METRIC, R)
    vacuum = bool(np.abs(ric).max() <= VAC_TOL * scale)
    R.setflags(write=False)
    return CurvatureAtPoint(R, vacuum)


def riemann_from_weyl_ricci(W, ric) -> np.ndarray:
    """Riemann tensor with prescribed Weyl part and Ricci tensor."""
    ric = np.asarray(ric, dtype=float)
    g = METRIC
    S = 0.5 * (ric - np.einsum("ab,ab->", g, ric) / 6.0 * g)
    kn = (np.einsum("ac,bd->abcd", g, S) - np.einsum("ad,bc->abcd", g, S)
          + np.einsum("bd,ac->abcd", g, S) - np.einsum("bc,ad->abcd", g, S))
    return np.asarray(W, dtype=float) - kn


def _weyl_array(D, E):
    d = np.eye(3)
    W = np.zeros((4, 4, 4, 4))
    W[1:, 1:, 1:, 1:] = (np.einsum("ik,jl->ijkl", d, D) + np.einsum("jl,ik->ijkl", d, D)
                         - np.einsum("il,jk->ijkl", d, D) - np.einsum("jk,il->ijkl", d, D))
    w0 = np.einsum("jkn,in->ijk", EPS, E)
    W[0, 1:, 0, 1:] = D
    W[1:, 0, 1:, 0] = D
    W[0, 1:, 1:, 0] = -D
    W[1:, 0, 0, 1:] = -D
    W[0, 1:, 1:, 1:] = w0
    W[1:, 0, 1:, 1:] = -w0
    W[1:, 1:, 0, 1:] = w0.transpose(1, 2, 0)
    W[1:, 1:, 1:, 0] = -w0.transpose(1, 2, 0)
    return W


def weyl_from_electric_magnetic(parts: ElectricMagneticParts) -> CurvatureAtPoint:
    W = _weyl_array(parts.D, parts.E)
    c = validate_riemann(W)
    traces = [np.einsum("ac,abcd->bd", METRIC, W), np.einsum("ad,abcd->bc", METRIC, W),
              np.einsum("bd,abcd->ac", METRIC, W)]
    worst = max(np.abs(t).max() for t in traces)
    if worst > 1e-14 * max(1.0, np.abs(W).max()):
        raise CurvatureError(f"reconstructed tensor is not trace-free (residual {worst:.3e})")
    return c


def electric_magnetic_from_weyl(c: CurvatureAtPoint) -> ElectricMagneticParts:
    c.require_vacuum()
    W = c.riemann
    D = W[0, 1:, 0, 1:]
    E = 0.5 * np.einsum("jkn,ijk->in", EPS, W[0, 1:, 1:, 1:])
    # symmetrize away rounding so the parts validate
    return ElectricMagneticParts(0.5 * (D + D.T), 0.5 * (E + E.T))


def random_vacuum(rng, scale=1.0) -> CurvatureAtPoint:
    def sym_traceless():
        m = rng.normal(size=(3, 3))
        m = m + m.T
        return scale * (m - np.trace(m) / 3.0 * np.eye(3))

    return weyl_from_electric_magnetic(ElectricMagneticParts(sym_traceless(), sym_traceless()))


def null_condition_parts(b=1.0) -> ElectricMagneticParts:
    """The electric/magnetic pair whose energy-momentum vector V is null."""
    D = np.diag([0.0, b, -b])
    E = np.zeros((3, 3))
    E[1, 2] = E[2, 1] = b
    return ElectricMagneticParts(D, E)


def bel_robinson(c: CurvatureAtPoint) -> BelRobinsonTensor:
    c.require_vacuum()
    W = c.riemann
    g = METRIC  # self-inverse
    mixed = np.einsum("nrbs,rR,sS->nRbS", W, g, g)
    q = np.einsum("mras,nrbs->mnab", W, mixed) + np.einsum("mrbs,nras->mnab", W, mixed)
    up = np.einsum("arst,rR,sS,tT->aRST", W, g, g, g)
    q -= 0.5 * np.einsum("mn,aRST,bRST->mnab", g, up, W)
    return BelRobinsonTensor(q)


def _v_components(W):
    D = W[0, 1:, 0, 1:]
    w0 = W[0, 1:, 1:, 1:]
    v0 = 0.5 * np.sum(w0 ** 2) + np.sum(D ** 2)
    vi = 2.0 * np.einsum("mn,min->i", D, w0)
    return np.concatenate([[v0], vi])


def q_contract(c: CurvatureAtPoint, t0: Observer) -> float:
    """V0 a0 + V.a, i.e. Q(e0, e0, e0, .) evaluated on (a0, a1, a2, a3)."""
    c.require_vacuum()
    v = _v_components(c.riemann)
    return float(v[0] * t0.a0 + v[1:] @ t0.a)


def classify(v) -> CausalVector:
    v = np.asarray(v, dtype=float)
    n2 = -v[0] ** 2 + v[1:] @ v[1:]
    if not np.any(v):
        kind = "zero"
    elif abs(n2) <= NULL_TOL * max(1.0, v[0] ** 2):
        kind = "null-future" if v[0] > 0 else "null-past"
    elif n2 < 0:
        kind = "timelike-future" if v[0] > 0 else "timelike-past"
    else:
        kind = "spacelike"
    return CausalVector(v, kind)


def v_vector(c: CurvatureAtPoint) -> CausalVector:
    c.require_vacuum()
    return classify(_v_components(c.riemann))
