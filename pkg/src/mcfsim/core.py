"""Shared domain types: flow parameters, the dual-patch surface, validation.

The simulated surface is a rotationally symmetric graph around the z-axis,
held in two overlapping uniform grids:

* a tip patch storing z(r) on r = 0, dr, 2*dr, ... (regular at the axis), and
* an outer patch storing r(z) on an equally spaced z-grid (regular where the
  surface flattens toward the enveloping cylinder).

Both patches keep a fixed backing buffer plus an explicit live count so that
endpoint removal during evolution is O(1) and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

MIN_LIVE_POINTS = 4


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class InvalidParams(ValueError):
    """Flow parameters outside their admissible ranges."""


class SingularInput(ValueError):
    """An evaluation at the axis r=0 that requires slope 0 received slope != 0."""


class StepFailure(RuntimeError):
    """ODE integration left the graph regime (slope overflow / non-finite)."""


class DomainError(ValueError):
    """Radius outside the domain of the exterior profile formula."""


class InversionError(RuntimeError):
    """Profile inversion failed (target not bracketed or not monotone)."""


class NotAGraph(RuntimeError):
    """A perturbed or evolved profile is no longer a usable graph."""


class NonPositiveRadius(RuntimeError):
    """An updated outer radius dropped to <= 0 away from the overlap seam."""


class DegenerateFit(RuntimeError):
    """Neck-radius series is not shrinking; pinch-time extrapolation invalid."""


# ---------------------------------------------------------------------------
# statuses
# ---------------------------------------------------------------------------

class ValidationStatus(Enum):
    OK = "Ok"
    TIP_RESOLUTION_LOST = "TipResolutionLost"
    OUTER_RESOLUTION_LOST = "OuterResolutionLost"
    OVERLAP_LOST = "OverlapLost"
    NOT_A_GRAPH = "NotAGraph"


class TerminalStatus(Enum):
    TIP_BLOWUP = "TipBlowup"
    NECK_RESOLVED = "NeckResolved"
    TIME_EXHAUSTED = "TimeExhausted"
    OVERLAP_LOST = "OverlapLost"
    TIP_RESOLUTION_LOST = "TipResolutionLost"
    OUTER_RESOLUTION_LOST = "OuterResolutionLost"

    @property
    def clean(self) -> bool:
        """True for scientific outcomes, False for resolution failures."""
        return self in (TerminalStatus.TIP_BLOWUP,
                        TerminalStatus.NECK_RESOLVED,
                        TerminalStatus.TIME_EXHAUSTED)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FlowParams:
    """Derived constants of one flow family.

    n      : dimension of the hypersurface (>= 2).
    gamma  : blowup exponent (>= 1/2); the tip curvature rate is
             (T - t)^-(gamma + 1/2).
    a      : translation parameter, used only when gamma == 1/2.
    c      : matching constant (> 0).
    tau0   : initial rescaled time; T - t0 = exp(-tau0).
    R1     : interior/exterior matching radius in the stretched tip
             coordinate zeta.
    beta   : bowl translation speed in unscaled variables (see derive_params).
    T      : vanishing time of the enveloping cylinder.
    t0     : time origin (0 by convention).
    """

    n: int
    gamma: float
    a: float
    c: float
    tau0: float
    R1: float
    beta: float
    T: float
    t0: float = 0.0

    @property
    def is_critical(self) -> bool:
        """True on the gamma == 1/2 branch (logarithmic translation family)."""
        return self.gamma == 0.5

    @property
    def r0(self) -> float:
        """Radius of the enveloping cylinder at t0."""
        return math.sqrt(2.0 * (self.n - 1)) * math.exp(-self.tau0 / 2.0)

    @property
    def amplitude(self) -> float:
        """Rescaled tip amplitude A of the matched initial data."""
        if self.is_critical:
            return 1.0 / (self.c - self.a * math.log(2.0 * self.n - 2.0))
        return self.c * (2.0 * self.n - 2.0) ** (self.gamma - 0.5)

    @property
    def interior_scale(self) -> float:
        """Unscaled radius per unit of the stretched tip coordinate zeta."""
        return math.exp(-(self.gamma + 0.5) * self.tau0)

    @property
    def lambda_scale(self) -> float:
        """Amplitude exp(-2*gamma*tau0) of the tip profile in the compactified
        variable lambda."""
        return math.exp(-2.0 * self.gamma * self.tau0)

    @property
    def r1(self) -> float:
        """Matching radius between tip cap and analytic exterior, unscaled."""
        return self.R1 * self.interior_scale

    @property
    def matched_cap_speed(self) -> float:
        """Translation speed for which the unscaled bowl ODE reproduces the
        rescaled tip cap under the affine change of variables
        z = s * A**-2 * F(r / s), s = interior_scale."""
        if self.is_critical:
            return self.a * math.exp(self.tau0)
        return (self.gamma - 0.5) / self.amplitude \
            * math.exp((self.gamma + 0.5) * self.tau0)


def derive_params(n: int,
                  gamma: float,
                  a: float | None = None,
                  c: float = 1.0,
                  tau0: float = 4.0,
                  R1: float | None = None) -> FlowParams:
    """Validate raw constants and derive the full parameter block.

    R1 defaults to exp(gamma * tau0 / 2). The time origin is t0 = 0, so the
    vanishing time is T = exp(-tau0): the asymptotic cylinder of radius
    sqrt(2(n-1)) * exp(-tau0/2) collapses exactly then under dr/dt = -(n-1)/r.

    beta for gamma > 1/2 is c^-1 (gamma - 1/2) 2^-(gamma-1/2)
    exp(-(gamma+1/2) tau0).  That formula degenerates at gamma = 1/2, where
    beta is instead the matched cap speed a * exp(tau0) (the speed at which
    the unscaled bowl ODE reproduces the critical-family tip profile).

    Raises InvalidParams on any range violation.
    """
    problems = []
    if int(n) != n or n < 2:
        problems.append(f"n must be an integer >= 2, got {n}")
    if gamma < 0.5:
        problems.append(f"gamma must be >= 1/2, got {gamma}")
    if c <= 0.0:
        problems.append(f"c must be > 0, got {c}")
    if gamma == 0.5:
        if a is None or a <= 0.0:
            problems.append(f"gamma = 1/2 requires a > 0, got {a}")
        elif n >= 2 and c <= a * math.log(2.0 * n - 2.0):
            problems.append(
                f"gamma = 1/2 requires c > a*log(2n-2) = {a * math.log(2.0 * n - 2.0):.6g}, got c = {c}")
    if R1 is not None and R1 <= 0.0:
        problems.append(f"R1 must be > 0, got {R1}")
    if tau0 <= 0.0:
        problems.append(f"tau0 must be > 0, got {tau0}")
    if problems:
        raise InvalidParams("; ".join(problems))

    n = int(n)
    if R1 is None:
        R1 = math.exp(gamma * tau0 / 2.0)
    a_val = 0.0 if (gamma > 0.5 or a is None) else float(a)
    if gamma > 0.5:
        beta = (gamma - 0.5) * 2.0 ** -(gamma - 0.5) \
            * math.exp(-(gamma + 0.5) * tau0) / c
    else:
        beta = a_val * math.exp(tau0)
    return FlowParams(n=n, gamma=float(gamma), a=a_val, c=float(c),
                      tau0=float(tau0), R1=float(R1), beta=beta,
                      T=math.exp(-tau0), t0=0.0)


# ---------------------------------------------------------------------------
# patches and atlas
# ---------------------------------------------------------------------------

@dataclass
class TipPatch:
    """Graph z(r) on the uniform grid r_i = i * dr; entry 0 is the tip r = 0.

    z_values is the full backing buffer; only the first live_count entries
    are active. Removal always happens at the outer (large-r) end.
    """

    dr: float
    z_values: np.ndarray
    live_count: int

    @property
    def r_end(self) -> float:
        return (self.live_count - 1) * self.dr

    def live(self) -> np.ndarray:
        return self.z_values[:self.live_count]

    def radii(self) -> np.ndarray:
        return np.arange(self.live_count, dtype=float) * self.dr

    def copy(self) -> "TipPatch":
        return TipPatch(self.dr, self.z_values.copy(), self.live_count)


@dataclass
class OuterPatch:
    """Graph r(z) on the uniform grid z_j = z_left + j * dz.

    r_values is the full backing buffer; the live window is
    r_values[start : start + live_count]. Removing the left endpoint
    advances start and z_left; removing the right end decrements live_count.
    """

    dz: float
    z_left: float
    r_values: np.ndarray
    live_count: int
    start: int = 0

    def live(self) -> np.ndarray:
        return self.r_values[self.start:self.start + self.live_count]

    def z_grid(self) -> np.ndarray:
        return self.z_left + np.arange(self.live_count, dtype=float) * self.dz

    @property
    def z_right(self) -> float:
        return self.z_left + (self.live_count - 1) * self.dz

    def copy(self) -> "OuterPatch":
        return OuterPatch(self.dz, self.z_left, self.r_values.copy(),
                          self.live_count, self.start)


@dataclass
class SurfaceAtlas:
    """The full numerical surface: both patches plus parameters and time."""

    tip: TipPatch
    outer: OuterPatch
    params: FlowParams
    t: float

    def copy(self) -> "SurfaceAtlas":
        return SurfaceAtlas(self.tip.copy(), self.outer.copy(),
                            self.params, self.t)


# ---------------------------------------------------------------------------
# perturbations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NearDimple:
    """Axis-side bump: z -> z + a0 * (1 - r^2/r_m^2)^2 for r <= r_m."""
    a0: float
    r_m: float


@dataclass(frozen=True)
class FarDimple:
    """Quartic radial dent supported on (z_a, z_b):
    r -> r - a0 * (z - z_a)^2 (z - z_b)^2 / (z_b - z_a)^4."""
    a0: float
    z_a: float
    z_b: float


Perturbation = Optional[NearDimple | FarDimple]


# ---------------------------------------------------------------------------
# diagnostics record
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sampled measurement row. HS0 = H0 * (T-t)^(gamma+1/2) holds by
    construction (see make_record)."""

    t: float
    T_minus_t: float
    H0: float
    HS0: float
    r_neck: float | None
    z_neck: float | None
    intersections: int
    tip_points: int
    outer_points: int


def make_record(params: FlowParams, t: float, H0: float,
                neck: tuple[float, float] | None,
                intersections: int, tip_points: int,
                outer_points: int) -> DiagnosticsRecord:
    T_minus_t = params.T - t
    HS0 = H0 * T_minus_t ** (params.gamma + 0.5)
    z_neck, r_neck = (neck[0], neck[1]) if neck is not None else (None, None)
    return DiagnosticsRecord(t=t, T_minus_t=T_minus_t, H0=H0, HS0=HS0,
                             r_neck=r_neck, z_neck=z_neck,
                             intersections=intersections,
                             tip_points=tip_points, outer_points=outer_points)


# ---------------------------------------------------------------------------
# structural validation
# ---------------------------------------------------------------------------

def validate_atlas(atlas: SurfaceAtlas,
                   min_overlap_cells: float = 3.0) -> ValidationStatus:
    """Return Ok or the first violated structural invariant.

    Check order (first hit wins): tip resolution, outer resolution, overlap
    width, graph consistency. The overlap width is measured in r and compared
    against min_overlap_cells grid footprints, where the outer patch's
    footprint is dz scaled by its local |r'(z)| inside the overlap.
    """
    tip, outer = atlas.tip, atlas.outer
    if tip.live_count < MIN_LIVE_POINTS:
        return ValidationStatus.TIP_RESOLUTION_LOST
    if outer.live_count < MIN_LIVE_POINTS:
        return ValidationStatus.OUTER_RESOLUTION_LOST

    r_out = outer.live()
    r_lo = float(np.min(r_out))
    r_hi = float(np.max(r_out))
    lo = max(0.0, r_lo)
    hi = min(tip.r_end, r_hi)
    width = hi - lo
    # outer-grid footprint in r-units: one z-cell covers dz * |r'(z)|,
    # measured at the seam (the left end sits inside the overlap)
    seam = np.abs(np.diff(r_out[:min(6, outer.live_count)])) / outer.dz
    s_seam = float(np.median(seam)) if seam.size else 1.0
    footprint = max(tip.dr, outer.dz * s_seam)
    if width < min_overlap_cells * footprint:
        return ValidationStatus.OVERLAP_LOST

    if np.any(r_out <= 0.0):
        return ValidationStatus.NOT_A_GRAPH
    # the exchange inverts tip z-values over the overlap band, so z must be
    # nondecreasing there
    radii = tip.radii()
    band = radii >= lo
    if np.count_nonzero(band) >= 2:
        z_band = tip.live()[band]
        if np.any(np.diff(z_band) < 0.0):
            return ValidationStatus.NOT_A_GRAPH
    return ValidationStatus.OK
