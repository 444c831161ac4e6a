"""Product Gauss-Legendre x trapezoid quadrature on the unit sphere."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_DEGREE = 12


@dataclass(frozen=True)
class SphereGrid:
    points: np.ndarray  # (N, 3) unit vectors
    weights: np.ndarray  # (N,)
    degree: int


def build_grid(degree: int = DEFAULT_DEGREE) -> SphereGrid:
    """Grid integrating every polynomial of total degree <= ``degree`` exactly."""
    if int(degree) != degree or degree < 2:
        raise ValueError(f"grid degree must be an integer >= 2, got {degree}")
    degree = int(degree)
    nt = math.ceil((degree + 1) / 2)
    nphi = degree + 1
    z, wz = np.polynomial.legendre.leggauss(nt)
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    s = np.sqrt(1.0 - z ** 2)
    pts = np.stack([
        np.outer(s, np.cos(phi)).ravel(),
        np.outer(s, np.sin(phi)).ravel(),
        np.repeat(z, nphi),
    ], axis=1)
    w = np.repeat(wz, nphi) * (2.0 * np.pi / nphi)
    pts.setflags(write=False)
    w.setflags(write=False)
    return SphereGrid(pts, w, degree)


def pairwise_sum(a: np.ndarray) -> np.ndarray:
    """Sum over the leading axis in a fixed pairwise order."""
    a = np.asarray(a)
    while a.shape[0] > 1:
        if a.shape[0] % 2:
            a = np.concatenate([a, np.zeros((1,) + a.shape[1:])])
        a = a[0::2] + a[1::2]
    return a[0]


def integrate(f, grid: SphereGrid) -> np.ndarray | float:
    """Integral of a field (anything callable on an (N, 3) array of points)."""
    vals = np.asarray(f(grid.points), dtype=float)
    w = grid.weights.reshape((-1,) + (1,) * (vals.ndim - 1))
    out = pairwise_sum(vals * w)
    return float(out) if out.ndim == 0 else out


def _delta4(i, j, k, l):
    return (i == j) * (k == l) + (i == k) * (j == l) + (i == l) * (j == k)


def monomial_integral(indices) -> float:
    """Closed-form integral of X^i1 ... X^in over the sphere, n in {2, 4, 6}.

    Indices are spatial labels in {1, 2, 3}; odd counts give 0.
    """
    idx = tuple(int(i) for i in indices)
    if any(i not in (1, 2, 3) for i in idx):
        raise ValueError(f"indices must lie in {{1, 2, 3}}: {idx}")
    n = len(idx)
    if n % 2:
        return 0.0
    if n == 2:
        i, j = idx
        return 4.0 * np.pi / 3.0 * (i == j)
    if n == 4:
        return 4.0 * np.pi / 15.0 * _delta4(*idx)
    if n == 6:
        i, rest = idx[0], idx[1:]
        total = sum((i == rest[m]) * _delta4(*(rest[:m] + rest[m + 1:])) for m in range(5))
        return 4.0 * np.pi / 105.0 * total
    raise ValueError(f"unsupported monomial arity {n}")


def all_index_tuples(n):
    return itertools.product((1, 2, 3), repeat=n)
