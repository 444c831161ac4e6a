"""Exact polynomial algebra on R^3, used for fields restricted to the unit sphere.

A polynomial is stored as a map ``degree -> coefficient array`` where the
coefficient of degree ``d`` has shape ``value_shape + (3,) * d`` and is
contracted with ``d`` copies of the point ``x``.  Coefficients need not be
symmetric in their ``x`` slots.

Every closed-form sphere field in this package is a polynomial of low degree
in the direction ``x``, so gradients and the Laplace-Beltrami operator can be
taken exactly instead of by finite differences.
"""

from __future__ import annotations

import string

import numpy as np


class Poly:
    """Tensor-valued polynomial in ``x`` in R^3."""

    __slots__ = ("terms", "shape")

    def __init__(self, terms: dict[int, np.ndarray], shape: tuple[int, ...] = ()):
        self.shape = tuple(shape)
        self.terms = {}
        for deg, coef in terms.items():
            coef = np.asarray(coef, dtype=float)
            if coef.shape != self.shape + (3,) * deg:
                raise ValueError(f"degree {deg} coefficient has shape {coef.shape}")
            if deg in self.terms:
                self.terms[deg] = self.terms[deg] + coef
            else:
                self.terms[deg] = coef

    @classmethod
    def constant(cls, value) -> Poly:
        value = np.asarray(value, dtype=float)
        return cls({0: value}, value.shape)

    @classmethod
    def coordinates(cls) -> Poly:
        """The vector field x -> x."""
        return cls({1: np.eye(3)}, (3,))

    @property
    def degree(self) -> int:
        return max(self.terms, default=0)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        n = pts.shape[0]
        out = np.zeros((n,) + self.shape)
        for deg, coef in self.terms.items():
            if deg == 0:
                out = out + coef
                continue
            # point axis stays last while the x-slots are contracted one by one
            val = np.tensordot(coef, pts, axes=([-1], [1]))
            for _ in range(deg - 1):
                val = np.einsum("...in,ni->...n", val, pts)
            out = out + np.moveaxis(val, -1, 0)
        return out[0] if single else out

    def _binary(self, other, sign: float) -> Poly:
        if not isinstance(other, Poly):
            other = Poly.constant(np.broadcast_to(np.asarray(other, float), self.shape))
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        terms = {d: c.copy() for d, c in self.terms.items()}
        for d, c in other.terms.items():
            terms[d] = terms[d] + sign * c if d in terms else sign * c
        return Poly(terms, self.shape)

    def __add__(self, other) -> Poly:
        return self._binary(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other) -> Poly:
        return self._binary(other, -1.0)

    def __rsub__(self, other) -> Poly:
        return (-self)._binary(other, 1.0)

    def __neg__(self) -> Poly:
        return Poly({d: -c for d, c in self.terms.items()}, self.shape)

    def __mul__(self, other) -> Poly:
        if isinstance(other, Poly):
            if other.shape == ():
                return einsum("...,->...", self, other)
            if self.shape == ():
                return einsum(",...->...", self, other)
            raise ValueError("use einsum for products of two tensor-valued polynomials")
        return Poly({d: other * c for d, c in self.terms.items()}, self.shape)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> Poly:
        return self * (1.0 / scalar)

    def __getitem__(self, idx) -> Poly:
        idx = idx if isinstance(idx, tuple) else (idx,)
        if any(i is Ellipsis for i in idx):
            raise IndexError("ellipsis indexing is not supported")
        shape = np.empty(self.shape)[idx].shape
        tail = (slice(None),) * (len(self.shape) - len(idx))
        terms = {d: c[idx + tail] for d, c in self.terms.items()}
        return Poly(terms, shape)

    @property
    def T(self) -> Poly:
        if len(self.shape) != 2:
            raise ValueError("transpose needs a matrix-valued polynomial")
        return Poly({d: np.swapaxes(c, 0, 1) for d, c in self.terms.items()}, self.shape[::-1])

    def grad(self) -> Poly:
        """Cartesian gradient; the new axis is appended to the value shape."""
        k = len(self.shape)
        terms = {}
        for d, c in self.terms.items():
            if d == 0:
                continue
            g = sum(np.moveaxis(c, k + s, -1) for s in range(d))
            # g has shape shape + (3,)*(d-1) + (3,); move derivative axis into value
            terms[d - 1] = np.moveaxis(g, -1, k)
        if not terms:
            terms = {0: np.zeros(self.shape + (3,))}
        return Poly(terms, self.shape + (3,))

    def surface_grad(self) -> Poly:
        """Tangential gradient (I - x x^T) grad F, exact on the unit sphere."""
        g = self.grad()
        X = Poly.coordinates()
        radial = einsum("...i,i->...", g, X)
        return g - einsum("...,i->...i", radial, X)

    def laplace_beltrami(self) -> Poly:
        """Sphere Laplacian via Delta_S F = Delta F - x.H.x - 2 x.grad F on |x| = 1."""
        g = self.grad()
        h = g.grad()
        X = Poly.coordinates()
        flat = einsum("...ii->...", h)
        radial2 = einsum("...ij,i,j->...", h, X, X)
        radial1 = einsum("...i,i->...", g, X)
        return flat - radial2 - 2.0 * radial1


def einsum(subscripts: str, *operands) -> Poly:
    """``numpy.einsum`` over value axes of polynomials (or constant arrays).

    Polynomial factors multiply: degrees add and the ``x`` slots of every
    operand are kept side by side in the result.
    """
    polys = [op if isinstance(op, Poly) else Poly.constant(op) for op in operands]
    lhs, rhs = subscripts.split("->")
    subs = lhs.split(",")
    if len(subs) != len(polys):
        raise ValueError("operand count does not match subscripts")
    used = set(subscripts)
    pool = [ch for ch in string.ascii_letters if ch not in used]

    terms: dict[int, np.ndarray] = {}
    shape = None

    def rec(i, chosen):
        nonlocal shape
        if i == len(polys):
            letters = iter(pool)
            ins, extra = [], ""
            arrays = []
            for sub, (deg, coef) in zip(subs, chosen):
                # x slots sit after the value axes, so "..." only spans value axes
                xs = "".join(next(letters) for _ in range(deg))
                ins.append(sub + xs)
                extra += xs
                arrays.append(coef)
            res = np.einsum(",".join(ins) + "->" + rhs + extra, *arrays, optimize=len(arrays) > 2)
            total = sum(d for d, _ in chosen)
            shape = res.shape[: res.ndim - total]
            terms[total] = terms[total] + res if total in terms else res
            return
        for deg, coef in polys[i].terms.items():
            rec(i + 1, chosen + [(deg, coef)])

    rec(0, [])
    return Poly(terms, shape)
