"""Translating-bowl profile ODEs.

Two closely related initial value problems are integrated outward from the
axis:

* the unscaled bowl soliton  z'' = (1 + z'^2) (beta - (n-1) z'/r), used for
  translator oracles and initial-data cross-checks, and
* the stretched tip profile  F'' / (1 + F'^2/A^4) + (n-1) F'/zeta = K,
  F(0) = F'(0) = 0, whose right-hand side K is (gamma - 1/2) A on the
  gamma > 1/2 branch and a A^2 on the critical branch.

Both are the same one-parameter family
    y'' = (1 + y'^2 / Q) (K - (n-1) y'/x),   y(0) = y'(0) = 0,
with Q = 1 (bowl) or Q = A^4 (stretched profile). A classical 4-stage
one-step scheme with internal step h/4 keeps the integration error far below
the second-order flow stencils; the first internal step leaves the axis on
the series y = K x^2/(2n) + c4 x^4 to avoid the 0/0 in y'/x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SingularInput, StepFailure

_SLOPE_OVERFLOW = 1e10
_SUBSTEPS = 4


@dataclass(frozen=True)
class GammaAbove:
    """Supercritical branch marker; rhs constant K = (gamma - 1/2) * A."""
    gamma: float


@dataclass(frozen=True)
class GammaHalf:
    """Critical branch marker; rhs constant K = a * A^2."""
    a: float


@dataclass
class BowlProfile:
    """Unscaled translator graph sampled on r_i = i * dr."""

    dr: float
    z_values: np.ndarray
    slope_values: np.ndarray
    beta: float
    n: int

    def radii(self) -> np.ndarray:
        return np.arange(len(self.z_values), dtype=float) * self.dr


@dataclass
class FProfile:
    """Stretched tip profile sampled on zeta_k = k * dzeta."""

    dzeta: float
    F_values: np.ndarray
    Fp_values: np.ndarray
    A: float
    case: GammaAbove | GammaHalf

    def evaluate(self, zeta):
        """Cubic Hermite evaluation; zeta may be a scalar or array in
        [0, zeta_max]."""
        zeta = np.asarray(zeta, dtype=float)
        h = self.dzeta
        k = np.clip((zeta / h).astype(int), 0, len(self.F_values) - 2)
        u = zeta / h - k
        y0 = self.F_values[k]
        y1 = self.F_values[k + 1]
        p0 = self.Fp_values[k]
        p1 = self.Fp_values[k + 1]
        u2 = u * u
        u3 = u2 * u
        val = ((2.0 * u3 - 3.0 * u2 + 1.0) * y0
               + (u3 - 2.0 * u2 + u) * h * p0
               + (-2.0 * u3 + 3.0 * u2) * y1
               + (u3 - u2) * h * p1)
        return val if val.shape else float(val)

    def evaluate_slope(self, zeta):
        zeta = np.asarray(zeta, dtype=float)
        h = self.dzeta
        k = np.clip((zeta / h).astype(int), 0, len(self.F_values) - 2)
        u = zeta / h - k
        y0 = self.F_values[k]
        y1 = self.F_values[k + 1]
        p0 = self.Fp_values[k]
        p1 = self.Fp_values[k + 1]
        val = ((6.0 * u * u - 6.0 * u) * (y0 - y1) / h
               + (3.0 * u * u - 4.0 * u + 1.0) * p0
               + (3.0 * u * u - 2.0 * u) * p1)
        return val if val.shape else float(val)


def bowl_rhs(r: float, slope: float, beta: float, n: int = 2) -> float:
    """Curvature z_rr of the translator graph at radius r with slope z_r.

    At the axis the removable singularity is regularized by the series limit
    z_rr(0) = beta / n, valid only with slope 0 there.
    """
    if r == 0.0:
        if slope != 0.0:
            raise SingularInput("slope must vanish at r = 0")
        return beta / n
    return (1.0 + slope * slope) * (beta - (n - 1) * slope / r)


def _rhs(x: float, p: float, K: float, Q: float, n: int) -> float:
    return (1.0 + p * p / Q) * (K - (n - 1) * p / x)


def _integrate_graph_ode(K: float, Q: float, n: int, x_max: float,
                         h_store: float) -> tuple[np.ndarray, np.ndarray]:
    """Integrate y'' = (1 + y'^2/Q)(K - (n-1) y'/x) from the axis and return
    (values, slopes) at 0, h_store, 2*h_store, ..."""
    n_pts = int(math.floor(x_max / h_store + 1e-9)) + 1
    values = np.zeros(n_pts)
    slopes = np.zeros(n_pts)
    h = h_store / _SUBSTEPS
    c4 = K ** 3 / (Q * n ** 3 * (8.0 + 4.0 * n))
    # leave the axis on the series expansion
    x = h
    y = K * x * x / (2.0 * n) + c4 * x ** 4
    p = K * x / n + 4.0 * c4 * x ** 3
    store_next = 1
    step = 1
    while store_next < n_pts:
        k1p = _rhs(x, p, K, Q, n)
        k1y = p
        k2p = _rhs(x + 0.5 * h, p + 0.5 * h * k1p, K, Q, n)
        k2y = p + 0.5 * h * k1p
        k3p = _rhs(x + 0.5 * h, p + 0.5 * h * k2p, K, Q, n)
        k3y = p + 0.5 * h * k2p
        k4p = _rhs(x + h, p + h * k3p, K, Q, n)
        k4y = p + h * k3p
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        x += h
        step += 1
        if not math.isfinite(p) or abs(p) > _SLOPE_OVERFLOW:
            raise StepFailure(
                f"slope overflow at x = {x:.6g}; graph representation lost")
        if step % _SUBSTEPS == 0:
            values[store_next] = y
            slopes[store_next] = p
            store_next += 1
    return values, slopes


def integrate_bowl(beta: float, n: int, r_max: float, dr: float) -> BowlProfile:
    """Translator profile on [0, r_max] with z(0) = 0, z'(0) = 0.

    beta = 0 returns the flat disk, the stationary solution of the ODE.
    Raises StepFailure if the slope overflows before r_max.
    """
    if r_max <= 0.0 or dr <= 0.0:
        raise ValueError("r_max and dr must be positive")
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    values, slopes = _integrate_graph_ode(beta, 1.0, n, r_max, dr)
    return BowlProfile(dr=dr, z_values=values, slope_values=slopes,
                       beta=beta, n=n)


def solve_F(case: GammaAbove | GammaHalf, A: float, n: int,
            zeta_max: float, dzeta: float) -> FProfile:
    """Stretched tip profile on [0, zeta_max] with F(0) = F'(0) = 0."""
    if A <= 0.0:
        raise ValueError("A must be positive")
    if isinstance(case, GammaAbove):
        if case.gamma <= 0.5:
            raise ValueError("GammaAbove requires gamma > 1/2")
        K = (case.gamma - 0.5) * A
    elif isinstance(case, GammaHalf):
        if case.a <= 0.0:
            raise ValueError("GammaHalf requires a > 0")
        K = case.a * A * A
    else:
        raise TypeError(f"unsupported case {case!r}")
    values, slopes = _integrate_graph_ode(K, A ** 4, n, zeta_max, dzeta)
    return FProfile(dzeta=dzeta, F_values=values, Fp_values=slopes,
                    A=A, case=case)
