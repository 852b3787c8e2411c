"""Initial surfaces: matched tip cap + analytic exterior, dimple
perturbations, and the rescaled-variable transforms used for cross-checks.

The unperturbed profile is assembled in the compactified variable
lambda = -1/y of the rescaled flow and then mapped exactly to unscaled
(z, r) coordinates:

* exterior branch (|phi| >= phi1):
    gamma > 1/2:  lambda = -c (2n-2 - phi^2)^(gamma-1/2)
    gamma = 1/2:  lambda = -1 / (c - a log(2n-2 - phi^2))
* interior branch (zeta <= R1):
    lambda = eps (F(zeta) - F(R1)) + lambda_ext(phi1),
  with eps = exp(-2 gamma tau0) and F the stretched bowl profile.

The inverse maps are y = -1/lambda together with z = y exp((gamma-1/2) tau0)
for gamma > 1/2 and z = y + a tau0 at gamma = 1/2. Anchoring the absolute
height to the exterior branch makes the construction C0-exact at r1 and keeps
z (hence y) positive everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (DomainError, FlowParams, InversionError, NonPositiveRadius,
                   NotAGraph, OuterPatch, SurfaceAtlas, TipPatch,
                   ValidationStatus, validate_atlas)
from .soliton import FProfile, GammaAbove, GammaHalf, solve_F

_BISECT_ITERS = 64
_F_NODES = 4096


@dataclass(frozen=True)
class InitialDataReport:
    """Matching diagnostics of a freshly built atlas."""

    r1: float
    z1: float
    continuity_gap: float
    min_slope_outer: float


@dataclass(frozen=True)
class GridSpec:
    """Discretization of one run. z_outer_max = None truncates the domain
    where the profile is within 1e-6 of the cylinder radius."""

    dr: float
    dz: float
    r_tip_max: float
    z_outer_max: float | None = None
    overlap_fraction: float = 0.4


@dataclass(frozen=True)
class RescaledSamples:
    """Pointwise (phi, lambda) images of both patches."""

    phi_tip: np.ndarray
    lam_tip: np.ndarray
    phi_outer: np.ndarray
    lam_outer: np.ndarray


# ---------------------------------------------------------------------------
# analytic exterior
# ---------------------------------------------------------------------------

def exterior_z(r, r1: float, z1: float, c: float, gamma: float,
               tau0: float, n: int = 2):
    """Analytic exterior height for gamma > 1/2, anchored to z(r1) = z1:

        z(r) = z1 + c^-1 [ (2(n-1)e^-tau0 - r^2)^(1/2-gamma)
                           - (2(n-1)e^-tau0 - r1^2)^(1/2-gamma) ].

    Valid for r1 <= r < sqrt(2(n-1)) e^(-tau0/2); raises DomainError beyond.
    """
    r = np.asarray(r, dtype=float)
    base = 2.0 * (n - 1) * math.exp(-tau0)
    arg = base - r * r
    if np.any(arg <= 0.0):
        raise DomainError("r^2 >= 2(n-1) exp(-tau0): beyond the cylinder")
    out = z1 + (arg ** (0.5 - gamma) - (base - r1 * r1) ** (0.5 - gamma)) / c
    return out if out.shape else float(out)


def exterior_z_gamma_half(r, r1: float, z1: float, a: float, c: float,
                          tau0: float, n: int = 2):
    """Exterior height on the critical branch, anchored to z(r1) = z1:

        z(r) = z1 - a [ log(2(n-1)e^-tau0 - r^2)
                        - log(2(n-1)e^-tau0 - r1^2) ].
    """
    r = np.asarray(r, dtype=float)
    base = 2.0 * (n - 1) * math.exp(-tau0)
    arg = base - r * r
    if np.any(arg <= 0.0):
        raise DomainError("r^2 >= 2(n-1) exp(-tau0): beyond the cylinder")
    out = z1 - a * (np.log(arg) - math.log(base - r1 * r1))
    return out if out.shape else float(out)


# ---------------------------------------------------------------------------
# composite profile
# ---------------------------------------------------------------------------

class UnperturbedProfile:
    """Exact composite initial graph z(r) and its inverse.

    The interior cap (r <= r1) is the stretched bowl profile mapped through
    lambda; the exterior is the closed-form branch. Evaluation is exact up to
    the ODE solve for F, which is resolved far below the flow stencils.
    """

    def __init__(self, params: FlowParams, f_profile: FProfile | None = None):
        self.params = params
        p = params
        if f_profile is None:
            case = GammaHalf(p.a) if p.is_critical else GammaAbove(p.gamma)
            f_profile = solve_F(case, p.amplitude, p.n, p.R1,
                                p.R1 / _F_NODES)
        self.f_profile = f_profile
        self._base = 2.0 * (p.n - 1) * math.exp(-p.tau0)
        self._phi1 = p.R1 * math.exp(-p.gamma * p.tau0)
        self._lam1 = self._lambda_exterior_phi(self._phi1)
        self._F_R1 = float(f_profile.evaluate(p.R1))
        self.r1 = p.r1
        self.z1 = self._z_from_lambda(self._lam1)
        self.z_tip = self.z_at(0.0)
        self.r_sup = math.sqrt(self._base)

    # -- rescaled building blocks ------------------------------------------

    def _lambda_exterior_phi(self, phi):
        p = self.params
        arg = 2.0 * p.n - 2.0 - np.asarray(phi, dtype=float) ** 2
        if np.any(arg <= 0.0):
            raise DomainError("phi beyond the cylinder boundary")
        if p.is_critical:
            return -1.0 / (p.c - p.a * np.log(arg))
        return -p.c * arg ** (p.gamma - 0.5)

    def lambda_interior(self, zeta):
        """Interior branch of the initial lambda profile, zeta in [0, R1]."""
        p = self.params
        return p.lambda_scale * (self.f_profile.evaluate(zeta) - self._F_R1) \
            + self._lam1

    def lambda_initial(self, phi):
        """Full piecewise initial lambda(phi), phi >= 0."""
        phi = np.asarray(phi, dtype=float)
        scalar = not phi.shape
        phi = np.atleast_1d(phi)
        zeta = phi * math.exp(self.params.gamma * self.params.tau0)
        inner = phi < self._phi1
        out = np.empty_like(phi)
        if np.any(inner):
            out[inner] = self.lambda_interior(zeta[inner])
        if np.any(~inner):
            out[~inner] = self._lambda_exterior_phi(phi[~inner])
        return float(out[0]) if scalar else out

    def _z_from_lambda(self, lam):
        p = self.params
        y = -1.0 / np.asarray(lam, dtype=float)
        if p.is_critical:
            out = y + p.a * p.tau0
        else:
            out = y * math.exp((p.gamma - 0.5) * p.tau0)
        return out if out.shape else float(out)

    # -- unscaled evaluation ------------------------------------------------

    def z_at(self, r):
        """Composite height z(r) for 0 <= r < r_sup."""
        p = self.params
        r = np.asarray(r, dtype=float)
        scalar = not r.shape
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        cap = r <= self.r1
        if np.any(cap):
            zeta = r[cap] / p.interior_scale
            out[cap] = self._z_from_lambda(self.lambda_interior(zeta))
        if np.any(~cap):
            if p.is_critical:
                out[~cap] = exterior_z_gamma_half(r[~cap], self.r1, self.z1,
                                                  p.a, p.c, p.tau0, p.n)
            else:
                out[~cap] = exterior_z(r[~cap], self.r1, self.z1, p.c,
                                       p.gamma, p.tau0, p.n)
        return float(out[0]) if scalar else out

    def invert(self, z):
        """Radius r with z_at(r) = z, by monotone bisection (fixed 64 halvings,
        final interval far below 1e-12)."""
        z = np.asarray(z, dtype=float)
        scalar = not z.shape
        z = np.atleast_1d(z)
        if np.any(z < self.z_tip):
            raise InversionError("target z below the tip height")
        lo = np.zeros_like(z)
        hi = np.full_like(z, self.r_sup * (1.0 - 1e-14))
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            too_high = self.z_at(mid) > z
            hi = np.where(too_high, mid, hi)
            lo = np.where(too_high, lo, mid)
        out = 0.5 * (lo + hi)
        return float(out[0]) if scalar else out


def make_profile(params: FlowParams) -> UnperturbedProfile:
    return UnperturbedProfile(params)


# ---------------------------------------------------------------------------
# atlas assembly
# ---------------------------------------------------------------------------

def default_z_outer_max(profile: UnperturbedProfile,
                        gap: float = 1e-6) -> float:
    """Height at which the profile radius is within `gap` of the cylinder."""
    return profile.z_at(profile.r_sup - gap)


def build_unperturbed(params: FlowParams, grid: GridSpec,
                      profile: UnperturbedProfile | None = None,
                      ) -> tuple[SurfaceAtlas, InitialDataReport]:
    """Fill both patches from the composite profile.

    The tip patch covers [0, r_tip_max]; the outer patch covers
    [z_left, z_outer_max] with z_left placed so the patches share the band
    r in [(1 - overlap_fraction) * r_tip_max, r_tip_max]. Outer radii come
    from bisection of the same composite profile, so at t0 the two patches
    describe a single curve to full working precision.
    """
    if profile is None:
        profile = make_profile(params)
    if grid.r_tip_max <= params.r1:
        raise ValueError("r_tip_max must exceed the matching radius r1")
    if grid.r_tip_max >= profile.r_sup:
        raise DomainError("r_tip_max beyond the cylinder radius")

    n_tip = int(math.floor(grid.r_tip_max / grid.dr + 1e-9)) + 1
    radii = np.arange(n_tip, dtype=float) * grid.dr
    tip_z = profile.z_at(radii)
    tip = TipPatch(dr=grid.dr, z_values=tip_z, live_count=n_tip)

    r_lo = (1.0 - grid.overlap_fraction) * grid.r_tip_max
    z_left = profile.z_at(r_lo)
    z_max = grid.z_outer_max
    if z_max is None:
        z_max = default_z_outer_max(profile)
    if z_max <= z_left:
        raise ValueError("z_outer_max must exceed the overlap start")
    m = int(math.ceil((z_max - z_left) / grid.dz - 1e-9)) + 1
    if m > 50_000_000:
        raise ValueError(
            f"outer patch would need {m} points; pass a smaller z_outer_max")
    z_grid = z_left + np.arange(m, dtype=float) * grid.dz
    r_vals = profile.invert(z_grid)
    outer = OuterPatch(dz=grid.dz, z_left=z_left, r_values=r_vals,
                       live_count=m, start=0)

    atlas = SurfaceAtlas(tip=tip, outer=outer, params=params, t=params.t0)

    z_int_r1 = profile._z_from_lambda(profile.lambda_interior(params.R1))
    if params.is_critical:
        z_ext_r1 = exterior_z_gamma_half(params.r1, params.r1, profile.z1,
                                         params.a, params.c, params.tau0,
                                         params.n)
    else:
        z_ext_r1 = exterior_z(params.r1, params.r1, profile.z1, params.c,
                              params.gamma, params.tau0, params.n)
    report = InitialDataReport(
        r1=params.r1,
        z1=profile.z1,
        continuity_gap=abs(z_int_r1 - z_ext_r1),
        min_slope_outer=float(np.min(np.diff(r_vals))) / grid.dz,
    )
    return atlas, report


# ---------------------------------------------------------------------------
# perturbations
# ---------------------------------------------------------------------------

def _near_bump(r, a0: float, r_m: float):
    r = np.asarray(r, dtype=float)
    u = np.clip(1.0 - (r / r_m) ** 2, 0.0, None)
    return a0 * u * u


def apply_near(atlas: SurfaceAtlas, a0: float, r_m: float,
               profile: UnperturbedProfile | None = None) -> SurfaceAtlas:
    """Add the axis-side bump z -> z + a0 (1 - r^2/r_m^2)^2 on r <= r_m.

    Tip-patch values are shifted exactly; outer-patch points whose height
    falls below z(r_m) are re-inverted against the perturbed profile so the
    two patches keep describing one curve. Every grid value with r > r_m is
    left bit-identical. Raises NotAGraph if the perturbed profile loses the
    monotonicity needed for the outer inversion.
    """
    p = atlas.params
    if not (0.0 < r_m < p.r0):
        raise ValueError(f"need 0 < r_m < r0 = {p.r0:.6g}, got {r_m}")
    if a0 < 0.0:
        raise ValueError("a0 must be >= 0")
    out = atlas.copy()
    if a0 == 0.0:
        return out

    tip = out.tip
    radii = tip.radii()
    tip.z_values[:tip.live_count] += _near_bump(radii, a0, r_m)

    if profile is not None:
        z_boundary = profile.z_at(min(r_m, profile.r_sup * (1 - 1e-12)))
        _reinvert_outer_exact(out.outer, profile, a0, r_m, z_boundary)
    else:
        if r_m > tip.r_end:
            raise ValueError(
                "r_m extends beyond the tip patch; pass the generating "
                "profile so the outer patch can be re-inverted exactly")
        _reinvert_outer_gridded(out.outer, tip, r_m)

    status = validate_atlas(out)
    if status is not ValidationStatus.OK:
        raise NotAGraph(f"perturbed atlas failed validation: {status.value}")
    return out


def _reinvert_outer_exact(outer: OuterPatch, profile: UnperturbedProfile,
                          a0: float, r_m: float, z_boundary: float) -> None:
    z_grid = outer.z_grid()
    affected = z_grid < z_boundary
    if not np.any(affected):
        return

    def z_pert(r):
        return profile.z_at(r) + _near_bump(r, a0, r_m)

    # the perturbed graph must be monotone wherever we invert it
    mesh = np.linspace(0.0, min(r_m * 1.5, profile.r_sup * (1 - 1e-12)), 3001)
    vals = z_pert(mesh)
    if np.any(np.diff(vals) <= 0.0):
        first_bad = int(np.argmax(np.diff(vals) <= 0.0))
        if float(np.min(z_grid[affected])) < vals[first_bad + 1]:
            raise NotAGraph("near bump makes the profile non-monotone "
                            "inside the outer patch's range")
    targets = z_grid[affected]
    lo = np.zeros_like(targets)
    hi = np.full_like(targets, profile.r_sup * (1.0 - 1e-14))
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        too_high = z_pert(mid) > targets
        hi = np.where(too_high, mid, hi)
        lo = np.where(too_high, lo, mid)
    live = outer.live()
    live[affected] = 0.5 * (lo + hi)


def _reinvert_outer_gridded(outer: OuterPatch, tip, r_m: float) -> None:
    """Fallback when no analytic profile is available: invert the perturbed
    tip patch piecewise-linearly (accurate to O(dr^2))."""
    radii = tip.radii()
    z_tip = tip.live()
    k_m = int(math.floor(r_m / tip.dr))
    z_boundary = z_tip[min(k_m, tip.live_count - 1)]
    z_grid = outer.z_grid()
    affected = z_grid < z_boundary
    if not np.any(affected):
        return
    if np.any(np.diff(z_tip) <= 0.0):
        raise NotAGraph("near bump makes the tip patch non-monotone; "
                        "cannot re-invert the overlap")
    live = outer.live()
    live[affected] = np.interp(z_grid[affected], z_tip, radii)


def apply_far(atlas: SurfaceAtlas, a0: float, z_a: float,
              z_b: float) -> SurfaceAtlas:
    """Dent the outer patch on (z_a, z_b):
    r -> r - a0 (z - z_a)^2 (z - z_b)^2 / (z_b - z_a)^4.

    The interval must lie inside the outer patch and to the right of the tip
    patch (the dent never touches the overlap), and the dent may not drive
    any radius to <= 0. Values outside (z_a, z_b) are bit-identical.
    """
    if z_b <= z_a:
        raise ValueError("need z_a < z_b")
    if a0 < 0.0:
        raise ValueError("a0 must be >= 0")
    out = atlas.copy()
    if a0 == 0.0:
        return out
    outer = out.outer
    tip_z_end = float(out.tip.live()[out.tip.live_count - 1])
    if z_a < tip_z_end:
        raise ValueError(
            f"z_a = {z_a:.6g} overlaps the tip patch (ends at z = "
            f"{tip_z_end:.6g}); far dents must stay outside the overlap")
    if z_a < outer.z_left or z_b > outer.z_right:
        raise ValueError("dent interval must lie inside the outer patch")
    z_grid = outer.z_grid()
    inside = (z_grid > z_a) & (z_grid < z_b)
    live = outer.live()
    if np.any(inside) and a0 >= float(np.min(live[inside])):
        raise ValueError("a0 must stay below min r on [z_a, z_b]")
    dent = a0 * ((z_grid[inside] - z_a) * (z_grid[inside] - z_b)) ** 2 \
        / (z_b - z_a) ** 4
    live[inside] -= dent
    if np.any(live[inside] <= 0.0):
        raise NonPositiveRadius("far dent drove a radius to <= 0")
    return out


# ---------------------------------------------------------------------------
# rescaled transforms
# ---------------------------------------------------------------------------

def to_rescaled(atlas: SurfaceAtlas, t: float | None = None) -> RescaledSamples:
    """Map both patches to (phi, lambda) samples at time t (default atlas.t).

    phi = r / sqrt(T - t); y = z (T-t)^(gamma-1/2) for gamma > 1/2 and
    y = z + a log(T - t) on the critical branch; lambda = -1/y.
    """
    p = atlas.params
    if t is None:
        t = atlas.t
    T_minus_t = p.T - t
    if T_minus_t <= 0.0:
        raise ValueError("need t < T")
    sqrt_tmt = math.sqrt(T_minus_t)

    def lam_of(z):
        if p.is_critical:
            y = z + p.a * math.log(T_minus_t)
        else:
            y = z * T_minus_t ** (p.gamma - 0.5)
        return -1.0 / y

    tip_r = atlas.tip.radii()
    tip_z = atlas.tip.live()
    out_r = atlas.outer.live()
    return RescaledSamples(
        phi_tip=tip_r / sqrt_tmt,
        lam_tip=lam_of(tip_z),
        phi_outer=out_r / sqrt_tmt,
        lam_outer=lam_of(atlas.outer.z_grid()),
    )
