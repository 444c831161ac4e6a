"""Non-vacuum small-sphere limit at order r^3.

Sign convention: T(e0, T0) = T_0a T0^a with T0 = (a0, -a), so the limit
energy is (4 pi / 3)(a0 T_00 - a . T_0i).  A perfect fluid at rest with
density rho_e > 0 gets energy (4 pi / 3) rho_e a0 > 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import expansion
from .poly import einsum
from .quadrature import build_grid, integrate
from .sphere import X
from .tensor import METRIC, CurvatureAtPoint, Observer, classify

FOUR_PI_3 = 4.0 * np.pi / 3.0


def _causal_net():
    """e0 plus the 26 null directions (1, n) over the 3x3x3 cube neighbours."""
    vecs = [np.array([1.0, 0.0, 0.0, 0.0])]
    for n in itertools.product((-1, 0, 1), repeat=3):
        if any(n):
            n = np.array(n, dtype=float)
            vecs.append(np.concatenate([[1.0], n / np.linalg.norm(n)]))
    return np.array(vecs)


CAUSAL_NET = _causal_net()


@dataclass(frozen=True)
class StressEnergy:
    T: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.T, dtype=float)
        if T.shape != (4, 4):
            raise ValueError("stress-energy must be 4x4")
        if np.abs(T - T.T).max() > 1e-12 * max(1.0, np.abs(T).max()):
            raise ValueError("stress-energy must be symmetric")
        object.__setattr__(self, "T", 0.5 * (T + T.T))

    @property
    def energy_momentum(self) -> np.ndarray:
        """V^a = -T^a_0, so T(e0, T0) = -<V, T0>."""
        return np.concatenate([[self.T[0, 0]], -self.T[0, 1:]])

    @property
    def dominant_energy(self) -> bool:
        """Sampled necessary check of the dominant energy condition."""
        tol = 1e-12 * max(1.0, np.abs(self.T).max())
        v = classify(self.energy_momentum)
        if v.kind not in ("timelike-future", "null-future", "zero"):
            return False
        pairs = np.einsum("ab,ia,jb->ij", self.T, CAUSAL_NET, CAUSAL_NET)
        return bool(pairs.min() >= -tol)


def stress_from_curvature(c: CurvatureAtPoint) -> StressEnergy:
    ric = c.ricci
    return StressEnergy((ric - 0.5 * c.scalar * METRIC) / (8.0 * np.pi))


def limit_energy(t: StressEnergy, t0: Observer) -> float:
    return float(FOUR_PI_3 * (t.T[0] @ t0.vector))


def momentum_components(c: CurvatureAtPoint, grid=None) -> np.ndarray:
    """(1/8 pi) * integral of X^i div(alpha_H), leading coefficient."""
    grid = build_grid() if grid is None else grid
    div_ah = expansion.nonvacuum_data(c).divAH.poly
    return integrate(einsum(",i->i", div_ah, X), grid) / (8.0 * np.pi)


def momentum_closed_form(c: CurvatureAtPoint) -> np.ndarray:
    """-(4 pi / 3) T_0i with Ric_0i = 8 pi T_0i."""
    return -FOUR_PI_3 * c.ricci[0, 1:] / (8.0 * np.pi)


def energy_component(c: CurvatureAtPoint, grid=None) -> float:
    """(1/8 pi) * integral of (k1 - h1), with k1 from Gauss-Bonnet and h1 = h2sq / 4."""
    grid = build_grid() if grid is None else grid
    data = expansion.nonvacuum_data(c)
    tr_sigma4 = einsum("ii->", data.sigma4.poly)
    integrand = tr_sigma4 * (-0.5) - data.h2sq.poly / 4.0
    return integrate(integrand, grid) / (8.0 * np.pi)


def min_energy_over_observers(t: StressEnergy):
    """Observer minimizing the limit energy, and the minimum (4 pi / 3) sqrt(-<V, V>)."""
    v = classify(t.energy_momentum)
    if v.kind != "timelike-future":
        raise ValueError(f"T(e0, .) must be dual to a future timelike vector, got {v.kind}")
    comps = v.components
    mass = np.sqrt(-v.norm2)
    obs = Observer(-comps[1:] / mass)
    return obs, float(FOUR_PI_3 * mass)


def perfect_fluid(rho_e, p) -> StressEnergy:
    return StressEnergy(np.diag([rho_e, p, p, p]))

