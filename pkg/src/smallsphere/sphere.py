"""Null frame on the sphere of directions and the curvature fields built from it.

Fields are held in ambient form: a tangent tensor at ``x`` is stored as a
3-vector or 3x3 matrix annihilated by ``x`` (via ``P = I - x x^T``).  This
avoids chart singularities and makes every field an exact polynomial in
``x``, which is what quadrature and the exact Laplacian in ``poly`` rely on.
Components in an explicit orthonormal basis ``e_1, e_2`` come from
``in_basis``.  The orientation is ``eps_ab = x . (e_a x e_b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .poly import Poly, einsum
from .tensor import EPS, METRIC, CurvatureAtPoint, Observer

UNIT_TOL = 1e-14
FD_STEP = 1e-3


@dataclass(frozen=True)
class Direction:
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(3)
        if abs(np.linalg.norm(x) - 1.0) > UNIT_TOL:
            raise ValueError("direction must be a unit vector")
        object.__setattr__(self, "x", x)

    @classmethod
    def normalized(cls, v) -> Direction:
        v = np.asarray(v, dtype=float)
        return cls(v / np.linalg.norm(v))


def _as_point(x) -> np.ndarray:
    if isinstance(x, Direction):
        return x.x
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit vector")
    return x


def tangent_basis(x, angle=0.0):
    """Orthonormal (e1, e2) at x with x . (e1 x e2) = +1.

    The north-pole basis is carried to x along the shortest great circle and
    then rotated by ``angle`` within the tangent plane.
    """
    x1, x2, x3 = _as_point(x)
    c = 1.0 + x3
    if c < 1e-12:
        e1, e2 = np.array([1.0, 0.0, 0.0]), np.array([0.0, -1.0, 0.0])
    else:
        e1 = np.array([1.0 - x1 * x1 / c, -x1 * x2 / c, -x1])
        e2 = np.array([-x1 * x2 / c, 1.0 - x2 * x2 / c, -x2])
    if angle:
        ca, sa = np.cos(angle), np.sin(angle)
        e1, e2 = ca * e1 + sa * e2, -sa * e1 + ca * e2
    return e1, e2


@dataclass(frozen=True)
class NullFrame:
    L: np.ndarray
    Lbar: np.ndarray
    e: np.ndarray  # (2, 4)


def frame_at(x, angle=0.0) -> NullFrame:
    x = _as_point(x)
    e1, e2 = tangent_basis(x, angle)
    return NullFrame(
        np.concatenate([[1.0], x]),
        0.5 * np.concatenate([[1.0], -x]),
        np.array([np.concatenate([[0.0], e1]), np.concatenate([[0.0], e2])]),
    )


@dataclass(frozen=True)
class NullDecomposition:
    alpha: np.ndarray
    alpha_bar: np.ndarray
    beta: np.ndarray
    beta_bar: np.ndarray
    rho: float
    sigma: float


def null_decompose(c: CurvatureAtPoint, x, angle=0.0) -> NullDecomposition:
    """Null components by direct contraction with the frame at x."""
    c.require_vacuum()
    W = c.riemann
    f = frame_at(x, angle)
    L, Lb, e = f.L, f.Lbar, f.e

    def w(a, b, cc, d):
        return np.einsum("abcd,...a,...b,...c,...d->...", W, a, b, cc, d)

    alpha = np.einsum("abcd,ia,b,jc,d->ij", W, e, L, e, L)
    alpha_bar = np.einsum("abcd,ia,b,jc,d->ij", W, e, Lb, e, Lb)
    beta = np.einsum("abcd,ia,b,c,d->i", W, e, L, Lb, L)
    beta_bar = np.einsum("abcd,ia,b,c,d->i", W, e, Lb, Lb, L)
    rho = float(w(Lb, L, Lb, L))
    sigma = float(w(e[0], e[1], Lb, L) - w(e[1], e[0], Lb, L))
    return NullDecomposition(alpha, alpha_bar, beta, beta_bar, rho, sigma)


def in_basis(value, x, tangent_rank, angle=0.0) -> np.ndarray:
    """Components of an ambient tangent tensor in the basis e1, e2 at x."""
    e = np.array(tangent_basis(x, angle))
    out = np.asarray(value, dtype=float)
    for k in range(tangent_rank):
        out = np.moveaxis(np.tensordot(out, e, axes=([k], [1])), -1, k)
    return out


@dataclass(frozen=True)
class SphereField:
    """A field on the unit sphere, evaluable at one point (3,) or many (N, 3).

    ``tangent_rank`` counts leading value axes that are ambient tangent
    slots; ``poly`` is set when the field has an exact polynomial form.
    """

    fn: object
    value_shape: tuple = ()
    tangent_rank: int = 0
    poly: Poly | None = None

    def __call__(self, x) -> np.ndarray:
        return self.fn(x)

    @classmethod
    def from_poly(cls, p: Poly, tangent_rank=0) -> SphereField:
        return cls(p, p.shape, tangent_rank, p)

    def _need_poly(self):
        if self.poly is None:
            raise ValueError("field has no polynomial form")
        return self.poly

    def laplacian(self) -> SphereField:
        """Exact Laplace-Beltrami operator, applied componentwise."""
        if self.tangent_rank:
            raise ValueError("componentwise Laplacian is only meaningful for scalar slots")
        return SphereField.from_poly(self._need_poly().laplace_beltrami())

    def gradient(self) -> SphereField:
        if self.tangent_rank:
            raise ValueError("gradient is only provided for scalar slots")
        return SphereField.from_poly(self._need_poly().surface_grad(), tangent_rank=1)

    def __getitem__(self, idx) -> SphereField:
        if self.tangent_rank:
            raise ValueError("cannot index into tangent slots")
        return SphereField.from_poly(self._need_poly()[idx])


X = Poly.coordinates()
_L4 = Poly({0: np.array([1.0, 0, 0, 0]), 1: np.vstack([np.zeros(3), np.eye(3)])}, (4,))
_LB4 = Poly({0: np.array([0.5, 0, 0, 0]), 1: -0.5 * np.vstack([np.zeros(3), np.eye(3)])}, (4,))
_proj = np.zeros((3, 4))
_proj[:, 1:] = np.eye(3)
# P4[i] = (0, delta_ij - x_i x_j) as a 4-vector
_p2 = np.zeros((3, 4, 3, 3))
for _i in range(3):
    for _j in range(3):
        _p2[_i, 1 + _j, _i, _j] = -1.0
_P4 = Poly({0: _proj, 2: _p2}, (3, 4))
PROJ = Poly({0: np.eye(3), 2: _p2[:, 1:]}, (3, 3))
EPS_X = einsum("ijk,k->ij", EPS, X)


@lru_cache(maxsize=64)
def _null_polys(key: bytes):
    W = np.frombuffer(key).reshape(4, 4, 4, 4)
    return {
        "alpha": einsum("abcd,ia,b,jc,d->ij", W, _P4, _L4, _P4, _L4),
        "alpha_bar": einsum("abcd,ia,b,jc,d->ij", W, _P4, _LB4, _P4, _LB4),
        "beta": einsum("abcd,ia,b,c,d->i", W, _P4, _L4, _LB4, _L4),
        "beta_bar": einsum("abcd,ia,b,c,d->i", W, _P4, _LB4, _LB4, _L4),
        "rho": einsum("abcd,a,b,c,d->", W, _LB4, _L4, _LB4, _L4),
        "sigma": einsum("ij,abcd,ia,jb,c,d->", EPS_X, W, _P4, _P4, _LB4, _L4),
    }


def null_polys(c: CurvatureAtPoint) -> dict:
    c.require_vacuum()
    return _null_polys(np.ascontiguousarray(c.riemann, dtype=float).tobytes())


_RANKS = {"alpha": 2, "alpha_bar": 2, "beta": 1, "beta_bar": 1, "rho": 0, "sigma": 0}


def null_fields(c: CurvatureAtPoint) -> dict:
    """Ambient alpha, alpha_bar, beta, beta_bar, rho, sigma as sphere fields."""
    return {k: SphereField.from_poly(p, _RANKS[k]) for k, p in null_polys(c).items()}


def _D(c):
    c.require_vacuum()
    return c.riemann[0, 1:, 0, 1:]


def _w0_poly(c):
    return einsum("ij,i,j->", _D(c), X, X)


def _wi_poly(c):
    return einsum("kij,j,k->i", c.riemann[0, 1:, 1:, 1:], X, X)


def _pk_poly(c):
    return einsum("ik,i->k", _D(c), X) / 15.0 - einsum(",k->k", _w0_poly(c), X) / 6.0


def w0_field(c) -> SphereField:
    return SphereField.from_poly(_w0_poly(c))


def wi_field(c, i=None) -> SphereField:
    """W_i for spatial index i in {0, 1, 2}; all three when i is None."""
    p = _wi_poly(c)
    return SphereField.from_poly(p if i is None else p[i])


def pk_field(c, k=None) -> SphereField:
    p = _pk_poly(c)
    return SphereField.from_poly(p if k is None else p[k])


def rij_sj_fields(c):
    """R_ij = -alpha/3 and S_j = (4/3) beta in ambient form.

    The sign of S_j is the one for which the energy pieces add up to the
    closed-form energy (see tests/test_energy.py).
    """
    n = null_polys(c)
    return (SphereField.from_poly(n["alpha"] * (-1.0 / 3.0)),
            SphereField.from_poly(n["beta"] * (4.0 / 3.0)))


def rij_closed_form(c) -> SphereField:
    """-alpha/3 written through D, W_0, W_i and the magnetic part B_ijk = W_0ijk."""
    D, B = _D(c), c.riemann[0, 1:, 1:, 1:]
    w0, wi = _w0_poly(c), _wi_poly(c)
    dx = einsum("ik,k->i", D, X)
    out = (2.0 * einsum("i,j->ij", X, dx) + 2.0 * einsum("j,i->ij", X, dx)
           - einsum("i,j->ij", X, wi) - einsum("i,j->ij", wi, X)
           - 2.0 * D
           - einsum(",ij->ij", w0, Poly.constant(np.eye(3)))
           - einsum(",i,j->ij", w0, X, X)
           + einsum("ijn,n->ij", B, X) + einsum("jin,n->ij", B, X))
    return SphereField.from_poly(out / 3.0)


def sj_closed_form(c) -> SphereField:
    """The polynomial (-4 D x + 4 x W_0 + 4 W)/3."""
    D = _D(c)
    out = (-4.0 * einsum("jn,n->j", D, X) + 4.0 * einsum(",j->j", _w0_poly(c), X)
           + 4.0 * _wi_poly(c))
    return SphereField.from_poly(out / 3.0)


def x0_3(c, t0: Observer) -> SphereField:
    p = _w0_poly(c) * (-1.0 / 3.0) + einsum("i,i->", t0.a / t0.a0, _pk_poly(c))
    return SphereField.from_poly(p)


def xi_3(c, i=None) -> SphereField:
    """X_i^(3) = D x / 3 - W / 3 + rho x / 6 (all three components when i is None)."""
    D = _D(c)
    p = (einsum("ij,j->i", D, X) / 3.0 - _wi_poly(c) / 3.0
         + einsum(",i->i", _w0_poly(c), X) / 6.0)
    return SphereField.from_poly(p if i is None else p[i])


def xi_3_from_null(c) -> SphereField:
    n = null_polys(c)
    return SphereField.from_poly(n["beta"] * (-1.0 / 3.0) + einsum(",i->i", n["rho"], X) * 0.5)


def aa3_field(c) -> SphereField:
    """Traceless second fundamental form coefficient, ambient: -W0 P / 2 - P D P."""
    D = _D(c)
    w0 = _w0_poly(c)
    p = (einsum(",ij->ij", w0, PROJ) * (-0.5)
         - einsum("ik,kl,lj->ij", PROJ, D, PROJ))
    return SphereField.from_poly(p, tangent_rank=2)


def _geodesic(x, t, s):
    return np.cos(s) * x + np.sin(s) * t


def _check_tangent(x, t):
    x = _as_point(x)
    t = np.asarray(t, dtype=float)
    if abs(np.linalg.norm(t) - 1.0) > 1e-10 or abs(t @ x) > 1e-10:
        raise ValueError("t must be a unit vector tangent to the sphere at x")
    return x, t


def _project_slots(value, x, rank):
    P = np.eye(3) - np.outer(x, x)
    for k in range(rank):
        value = np.moveaxis(np.tensordot(value, P, axes=([k], [1])), -1, k)
    return value


def directional_derivative(f: SphereField, x, t, h=FD_STEP) -> np.ndarray:
    """Covariant derivative of f at x along the unit tangent t.

    Central differences along the great circle through x with tangent t,
    one Richardson step (h and h/2).  Tangent slots are projected back onto
    the tangent plane at x, which is the Levi-Civita derivative for ambient
    tangent tensors on the unit sphere.
    """
    x, t = _check_tangent(x, t)

    def central(s):
        return (np.asarray(f(_geodesic(x, t, s))) - np.asarray(f(_geodesic(x, t, -s)))) / (2.0 * s)

    d = (4.0 * central(h / 2.0) - central(h)) / 3.0
    return _project_slots(d, x, f.tangent_rank)


def covariant_gradient(f: SphereField, x, h=FD_STEP) -> np.ndarray:
    """Ambient covariant derivative: new leading axis is the derivative slot."""
    x = _as_point(x)
    e = tangent_basis(x)
    return sum(np.multiply.outer(t, directional_derivative(f, x, t, h)) for t in e)


def fd_laplacian(f: SphereField, x, h=FD_STEP) -> np.ndarray:
    """Laplace-Beltrami of a scalar field by second differences along two geodesics."""
    if f.tangent_rank:
        raise ValueError("fd_laplacian handles scalar slots only")
    x = _as_point(x)
    f0 = np.asarray(f(x))

    def second(s):
        return sum((np.asarray(f(_geodesic(x, t, s))) - 2.0 * f0
                    + np.asarray(f(_geodesic(x, t, -s)))) / s ** 2 for t in tangent_basis(x))

    return (4.0 * second(h / 2.0) - second(h)) / 3.0


def _bases(xs):
    return np.array([tangent_basis(x) for x in xs])  # (N, 2, 3)


def _offsets(xs, E, steps):
    """Points cos(s) x + sin(s) t for every step s, point x and tangent t: (S, N, 2, 3)."""
    s = np.asarray(steps)[:, None, None, None]
    return np.cos(s) * xs[None, :, None, :] + np.sin(s) * E[None]


def covariant_gradient_many(f: SphereField, xs, h=FD_STEP) -> np.ndarray:
    """Batched ``covariant_gradient`` over points xs (N, 3); the derivative axis follows N."""
    xs = np.asarray(xs, dtype=float)
    E = _bases(xs)
    n = len(xs)
    pts = _offsets(xs, E, (h, -h, h / 2.0, -h / 2.0))
    v = np.asarray(f(pts.reshape(-1, 3)))
    v = v.reshape((4, n, 2) + v.shape[1:])
    d = (4.0 * (v[2] - v[3]) / h - (v[0] - v[1]) / (2.0 * h)) / 3.0  # (N, 2, ...)
    P = np.eye(3) - np.einsum("ni,nj->nij", xs, xs)
    for k in range(f.tangent_rank):
        d = np.moveaxis(np.einsum("nij,na...j->na...i", P, np.moveaxis(d, 2 + k, -1)), -1, 2 + k)
    return np.einsum("nai,na...->ni...", E, d)


def fd_laplacian_many(f: SphereField, xs, h=FD_STEP) -> np.ndarray:
    """Batched ``fd_laplacian`` over points xs (N, 3)."""
    if f.tangent_rank:
        raise ValueError("fd_laplacian handles scalar slots only")
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    pts = _offsets(xs, _bases(xs), (h, -h, h / 2.0, -h / 2.0))
    v = np.asarray(f(pts.reshape(-1, 3)))
    v = v.reshape((4, n, 2) + v.shape[1:])
    f0 = np.asarray(f(xs))
    second = [(v[i].sum(axis=1) + v[i + 1].sum(axis=1) - 4.0 * f0) / s ** 2 for i, s in ((0, h), (2, h / 2.0))]
    return (4.0 * second[1] - second[0]) / 3.0


def random_directions(rng, n) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


__all__ = [
    "Direction", "NullFrame", "NullDecomposition", "SphereField", "METRIC",
    "frame_at", "null_decompose", "null_fields", "w0_field", "wi_field", "pk_field",
    "rij_sj_fields", "x0_3", "xi_3", "aa3_field", "directional_derivative",
    "covariant_gradient", "fd_laplacian", "covariant_gradient_many", "fd_laplacian_many", "in_basis", "tangent_basis", "random_directions",
    "rij_closed_form", "sj_closed_form", "xi_3_from_null", "null_polys",
]
