"""Green function built purely from numerical integration of the radial ODE.

    u'' + u'/r + (kappa^2 - l^2/r^2) u = 0,   kappa = k outside, mu in b <= r <= a

Two solutions are integrated with an embedded Dormand-Prince 5(4) pair:
one regular at the origin, started at r0 = 1e-6 b from J_l(k r0), and one
started at R = max(50/k, 5a) from J_l(kR) and integrated inward.  Both
start values come from mpmath, so nothing here shares code with the closed
forms.  Then

    G(r, r') = (2/pi) u_reg(r<) u_out(r>) / (r W),   W = u_reg u_out' - u_reg' u_out

which has the jump 2/(pi r') in dG/dr at r = r'.  r W is constant (Abel),
and it is evaluated at r< so that G(r, r') == G(r', r) exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import mpmath
import numpy as np

from .errors import (
    CrossRegionUnsupported,
    DegenerateNumerics,
    InvalidInput,
    NearPole,
    NonPositiveRadius,
    NotDiffusionRegime,
    StepFailure,
    WronskianDegenerate,
)
from .greens import (
    EnergyContext,
    PotentialProfile,
    Region,
    classify_region,
    coefficient_set,
    green_block,
    green_radial,
)

DEFAULT_RTOL = 1e-13
MIN_RTOL = 1e-15          # below this, roundoff dominates the error estimate
WRONSKIAN_RTOL = 1e-8
_MAX_STEPS = 2_000_000

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6] + (0.0,)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


class Provenance(enum.Enum):
    REGULAR_AT_ORIGIN = "RegularAtOrigin"
    OUTER_STANDING_WAVE = "OuterStandingWave"


@dataclass(frozen=True)
class RadialSolution:
    l: int
    grid: np.ndarray
    u: np.ndarray
    up: np.ndarray
    provenance: Provenance
    steps: int = 0

    def at(self, r: float) -> tuple[float, float]:
        """(u, u') at a radius that was requested as a stop point."""
        i = int(np.searchsorted(self.grid, r))
        for j in (i - 1, i):
            if 0 <= j < len(self.grid) and abs(self.grid[j] - r) <= 1e-14 * r:
                return float(self.u[j]), float(self.up[j])
        raise InvalidInput(f"r={r} is not on the solution grid; pass it in 'stops'")


def _kappa(r_mid: float, ctx: EnergyContext, profile: PotentialProfile) -> float:
    return ctx.mu if profile.b < r_mid < profile.a else ctx.k


def _dopri_segment(l2, kappa2, r, u, v, r_end, h, rtol, tol_floor):
    """Integrate from r to r_end (either direction) with fixed kappa^2.

    Returns the accepted (r, u, v) points after the start, and the last
    successful step size.  The error of each component is measured
    against the local amplitude sqrt(u^2 + (u'/q)^2), q^2 = kappa^2 + l^2/r^2,
    which is finite through nodes of u and tracks r^l near the origin.
    """
    def rhs(x, uu, vv):
        return vv, -vv / x - (kappa2 - l2 / (x * x)) * uu

    sign = 1.0 if r_end > r else -1.0
    h = sign * abs(h)
    out = []
    n = 0
    k_u = [0.0] * 7
    k_v = [0.0] * 7
    while sign * (r_end - r) > 0:
        n += 1
        if n > _MAX_STEPS:
            raise StepFailure("step budget exhausted")
        if sign * (r + h - r_end) > 0:
            h = r_end - r
        last = False
        for i in range(7):
            x = r + _C[i] * h
            uu, vv = u, v
            for jj, aij in enumerate(_A[i]):
                uu += h * aij * k_u[jj]
                vv += h * aij * k_v[jj]
            k_u[i], k_v[i] = rhs(x, uu, vv)
        u_new = u + h * sum(b * ku for b, ku in zip(_B, k_u))
        v_new = v + h * sum(b * kv for b, kv in zip(_B, k_v))
        eu = abs(h * sum(e * ku for e, ku in zip(_E, k_u)))
        ev = abs(h * sum(e * kv for e, kv in zip(_E, k_v)))
        rn = r + h
        q = math.sqrt(kappa2 + l2 / min(r, rn) ** 2)
        amp = max(math.hypot(u, v / q), math.hypot(u_new, v_new / q), tol_floor)
        err = max(eu / amp, ev / (q * amp)) / rtol
        if err <= 1.0:
            if abs(rn - r_end) <= 1e-15 * abs(r_end):
                rn, last = r_end, True
            r, u, v = rn, u_new, v_new
            out.append((r, u, v))
            fac = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            if last:
                break
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h_next = h * fac
        if abs(h_next) < 1e-14 * abs(r):
            raise StepFailure(f"step size underflow at r={r:.6g}")
        h = h_next
    return out, h


def _besselj_data(l: int, k: float, r: float) -> tuple[float, float]:
    x = mpmath.mpf(k) * mpmath.mpf(r)
    j = mpmath.besselj(l, x)
    jp = (mpmath.besselj(l - 1, x) - mpmath.besselj(l + 1, x)) / 2
    return float(j), float(k * jp)


def start_radius(provenance: Provenance, ctx: EnergyContext,
                 profile: PotentialProfile) -> float:
    if provenance is Provenance.REGULAR_AT_ORIGIN:
        return 1e-6 * profile.b
    return max(50.0 / ctx.k, 5.0 * profile.a)


def integrate_radial(l: int, ctx: EnergyContext, profile: PotentialProfile,
                     provenance: Provenance, r_start: float | None = None,
                     r_end: float | None = None, *, stops=(),
                     rtol: float = DEFAULT_RTOL) -> RadialSolution:
    """Integrate one solution of the piecewise radial equation.

    ``r_start`` defaults to the provenance's canonical start radius, where
    the initial data J_l(k r), k J_l'(k r) are applied.  Steps land exactly on
    the interfaces b, a and on every radius in ``stops``, so no interpolation
    is involved in reading values back.
    """
    if not ctx.e > profile.v0:
        raise NotDiffusionRegime(f"E = {ctx.e} <= V0 = {profile.v0}")
    if not rtol >= MIN_RTOL:
        raise StepFailure(f"rtol={rtol:g} is below the reachable {MIN_RTOL:g}")
    if r_start is None:
        r_start = start_radius(provenance, ctx, profile)
    if r_end is None:
        r_end = profile.a * 3.0 if provenance is Provenance.REGULAR_AT_ORIGIN else 1e-6 * profile.b
    if not (r_start > 0 and r_end > 0) or r_start == r_end:
        raise NonPositiveRadius("need distinct positive start and end radii")

    u, v = _besselj_data(l, ctx.k, r_start)
    lo, hi = min(r_start, r_end), max(r_start, r_end)
    pts = {float(p) for p in stops if lo < p < hi}
    pts |= {x for x in (profile.b, profile.a) if lo < x < hi}
    pts.add(float(r_end))
    seq = sorted(pts, reverse=r_end < r_start)

    l2 = float(l * l)
    r = float(r_start)
    h = 0.01 * min(r, 1.0 / ctx.k)
    rec = [(r, u, v)]
    for target in seq:
        kappa = _kappa(0.5 * (r + target), ctx, profile)
        seg, h = _dopri_segment(l2, kappa * kappa, r, u, v, target, h, rtol, 1e-300)
        rec.extend(seg)
        r, u, v = rec[-1]

    rec.sort(key=lambda t: t[0])
    arr = np.array(rec)
    return RadialSolution(int(l), arr[:, 0], arr[:, 1], arr[:, 2], provenance, len(rec) - 1)


class RadialOracle:
    """Both ODE solutions for one (l, E, profile), sampled at chosen radii."""

    def __init__(self, l: int, ctx: EnergyContext, profile: PotentialProfile,
                 radii, rtol: float = DEFAULT_RTOL):
        radii = sorted({float(r) for r in radii})
        if not radii or radii[0] <= 0:
            raise NonPositiveRadius("oracle radii must be positive")
        self.l, self.ctx, self.profile = int(l), ctx, profile
        r_out = start_radius(Provenance.OUTER_STANDING_WAVE, ctx, profile)
        if radii[-1] >= r_out:
            raise InvalidInput(f"radii must stay below the outer start radius {r_out:g}")
        self.reg = integrate_radial(l, ctx, profile, Provenance.REGULAR_AT_ORIGIN,
                                    r_end=radii[-1], stops=radii, rtol=rtol)
        self.out = integrate_radial(l, ctx, profile, Provenance.OUTER_STANDING_WAVE,
                                    r_end=radii[0], stops=radii, rtol=rtol)

    def rw(self, r: float) -> tuple[float, float]:
        """r W(r) and the magnitude of its two terms."""
        ur, urp = self.reg.at(r)
        uo, uop = self.out.at(r)
        return r * (ur * uop - urp * uo), r * (abs(ur * uop) + abs(urp * uo))

    def amplitude(self, sol: RadialSolution, r: float) -> float:
        u, up = sol.at(r)
        kappa = _kappa(r, self.ctx, self.profile) if r not in (self.profile.a, self.profile.b) else self.ctx.k
        q = math.sqrt(kappa ** 2 + self.l ** 2 / r ** 2)
        return math.hypot(u, up / q)

    def green(self, r: float, rp: float) -> float:
        lo, hi = (r, rp) if r <= rp else (rp, r)
        rw, scale = self.rw(lo)
        if not abs(rw) > WRONSKIAN_RTOL * scale:
            raise WronskianDegenerate(f"r W = {rw:.3e} vanishes (resonance) for l={self.l}")
        return 2.0 / math.pi * self.reg.at(lo)[0] * self.out.at(hi)[0] / rw

    def envelope(self, r: float, rp: float) -> float:
        """Amplitude scale of G at (r, r'), nonzero through nodes of u."""
        lo, hi = (r, rp) if r <= rp else (rp, r)
        rw, _ = self.rw(lo)
        return 2.0 / math.pi * self.amplitude(self.reg, lo) * self.amplitude(self.out, hi) / abs(rw)


def oracle_green(l: int, r: float, rp: float, ctx: EnergyContext,
                 profile: PotentialProfile, rtol: float = DEFAULT_RTOL) -> float:
    """Green function from two integrated solutions and their Wronskian."""
    if not (r > 0 and rp > 0):
        raise NonPositiveRadius("radii must be positive")
    return RadialOracle(l, ctx, profile, (r, rp), rtol).green(r, rp)


# ---------------------------------------------------------------------------
# property validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    points_per_region: int = 12
    outer_extent: float = 3.0          # outer samples span (a, outer_extent * a)
    fd_step: float = 1e-3              # relative finite-difference step
    rtol: float = DEFAULT_RTOL
    scheme: str = "matched"

    def radii(self, profile: PotentialProfile) -> dict[Region, np.ndarray]:
        n = int(self.points_per_region)
        if n < 2:
            raise InvalidInput("points_per_region must be >= 2")
        s = np.linspace(0.06, 0.94, n)
        b, a = profile.b, profile.a
        return {
            Region.INNER: b * (0.04 + 0.92 * s),
            Region.MID: b + (a - b) * s,
            Region.OUTER: a + (self.outer_extent - 1.0) * a * s,
        }


@dataclass
class Residual:
    value: float = 0.0
    where: tuple = ()

    def update(self, value: float, where: tuple):
        value = float(value)
        if not math.isfinite(value) or value >= self.value:
            self.value, self.where = value, tuple(where)


@dataclass
class ValidationReport:
    """Worst residual of each defining property over a validation grid.

    Interface entries compare the adjoining blocks at r' = a (or b): values,
    and the r-derivative of each branch.  ``oracle_deviation`` is
    |G - G_oracle| divided by the envelope (2/pi) A_reg(r<) A_out(r>) / |rW|
    with A = sqrt(u^2 + (u'/q)^2).  This is a relative error that stays
    meaningful at nodes of G.
    """

    l: int
    e: float
    scheme: str
    interface_value_a: Residual = field(default_factory=Residual)
    interface_value_b: Residual = field(default_factory=Residual)
    interface_derivative_a: Residual = field(default_factory=Residual)
    interface_derivative_b: Residual = field(default_factory=Residual)
    jump: Residual = field(default_factory=Residual)
    ode_residual: Residual = field(default_factory=Residual)
    symmetry: Residual = field(default_factory=Residual)
    parity: Residual = field(default_factory=Residual)
    oracle_deviation: Residual = field(default_factory=Residual)
    delta_forms: Residual = field(default_factory=Residual)
    pairs_compared: int = 0
    flags: list = field(default_factory=list)

    def residual_fields(self) -> list[str]:
        return [f.name for f in fields(self) if f.type in ("Residual", Residual)]

    def as_flat(self) -> dict:
        out = {"l": self.l, "E": self.e, "scheme": self.scheme,
               "pairs_compared": self.pairs_compared}
        for name in self.residual_fields():
            res = getattr(self, name)
            out[name] = res.value
            out[name + "_at"] = " ".join(format(w, ".17g") if isinstance(w, float) else str(w)
                                         for w in res.where)
        out["flags"] = ";".join(self.flags)
        return out


def _rel(x: float, y: float) -> float:
    scale = max(abs(x), abs(y))
    return abs(x - y) / scale if scale > 0 else 0.0


def _fd_coeffs():
    # fourth-order one-sided first derivative on 0..4 h
    return (-25 / 12, 4.0, -3.0, 4 / 3, -1 / 4)


def _check_interfaces(rep, l, ctx, profile, scheme):
    for name, rint, inner, outer in (("a", profile.a, Region.MID, Region.OUTER),
                                     ("b", profile.b, Region.INNER, Region.MID)):
        gi = green_block(inner, l, rint, rint, ctx, profile, scheme=scheme, branch="lower")
        go = green_block(outer, l, rint, rint, ctx, profile, scheme=scheme, branch="lower")
        getattr(rep, f"interface_value_{name}").update(_rel(gi, go), (rint,))
        for branch in ("lower", "upper"):
            di = green_block(inner, l, rint, rint, ctx, profile, scheme=scheme,
                             derivative=True, branch=branch)
            do = green_block(outer, l, rint, rint, ctx, profile, scheme=scheme,
                             derivative=True, branch=branch)
            getattr(rep, f"interface_derivative_{name}").update(_rel(di, do), (rint, branch))


def _region_gap(r, region, profile):
    if region is Region.INNER:
        return profile.b - r
    if region is Region.MID:
        return min(r - profile.b, profile.a - r)
    return r - profile.a


def _check_local(rep, l, ctx, profile, grid, radii):
    """Jump at r' and ODE residual away from r', via difference stencils."""
    c = _fd_coeffs()
    for region, rs in radii.items():
        kappa = ctx.mu if region is Region.MID else ctx.k
        for rp in rs[1:-1:2]:
            gap = _region_gap(rp, region, profile)
            h = min(grid.fd_step * rp, gap / 6.0)

            def G(x):
                return green_radial(l, x, rp, ctx, profile, grid.scheme).value

            up = sum(ci * G(rp + i * h) for i, ci in enumerate(c)) / h
            dn = -sum(ci * G(rp - i * h) for i, ci in enumerate(c)) / h
            want = 2.0 / (math.pi * rp)
            rep.jump.update(abs((up - dn) - want) / want, (rp,))

            for r in rs:
                if abs(r - rp) < 6 * h or _region_gap(r, region, profile) < 3 * h:
                    continue
                f = [G(r + i * h) for i in (-2, -1, 0, 1, 2)]
                d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
                d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
                terms = (r * d2, d1, kappa ** 2 * r * f[2], l * l * f[2] / r)
                res = terms[0] + terms[1] + terms[2] - terms[3]
                scale = max(abs(t) for t in terms)
                if scale > 0:
                    rep.ode_residual.update(abs(res) / scale, (r, rp))


def validate(l: int, ctx: EnergyContext, profile: PotentialProfile,
             grid: GridSpec | None = None, *, with_oracle: bool = True) -> ValidationReport:
    """Sweep a grid and record the worst violation of each GF property.

    Degenerate evaluations (NearPole from either cascade, a vanishing oracle
    Wronskian) are recorded in ``flags`` instead of raising.  With
    ``with_oracle=False`` the ODE integration is skipped and
    ``oracle_deviation`` stays at zero with ``pairs_compared == 0``.
    """
    grid = grid or GridSpec()
    rep = ValidationReport(l=int(l), e=ctx.e, scheme=grid.scheme)
    radii = grid.radii(profile)

    try:
        cs = coefficient_set(l, ctx, profile, "published")
        rep.delta_forms.update(_rel(cs.delta, cs.delta_gamma_form), ("published",))
    except NearPole as exc:
        rep.flags.append(f"published:NearPole({exc.quantity})")

    try:
        coefficient_set(l, ctx, profile, grid.scheme)
    except NearPole as exc:
        rep.flags.append(f"{grid.scheme}:NearPole({exc.quantity})")
        return rep

    _check_interfaces(rep, l, ctx, profile, grid.scheme)
    _check_local(rep, l, ctx, profile, grid, radii)

    all_r = np.concatenate(list(radii.values()))
    oracle = None
    if with_oracle:
        try:
            oracle = RadialOracle(l, ctx, profile, all_r, grid.rtol)
        except DegenerateNumerics as exc:
            rep.flags.append(f"oracle:{type(exc).__name__}")

    for region, rs in radii.items():
        for i, r in enumerate(rs):
            for rp in rs[i:]:
                g = green_radial(l, r, rp, ctx, profile, grid.scheme).value
                g_sw = green_radial(l, rp, r, ctx, profile, grid.scheme).value
                rep.symmetry.update(abs(g - g_sw) / max(1.0, abs(g)), (r, rp))
                g_neg = green_radial(-l, r, rp, ctx, profile, grid.scheme).value
                rep.parity.update(abs(g - g_neg) / max(1.0, abs(g)), (r, rp))
                if oracle is None:
                    continue
                try:
                    go = oracle.green(r, rp)
                except WronskianDegenerate:
                    rep.flags.append("oracle:WronskianDegenerate")
                    oracle = None
                    continue
                rep.oracle_deviation.update(abs(g - go) / oracle.envelope(r, rp), (r, rp))
                rep.pairs_compared += 1
    return rep


def check_region_pair(r: float, rp: float, profile: PotentialProfile) -> Region:
    reg = classify_region(r, profile)
    if classify_region(rp, profile) is not reg:
        raise CrossRegionUnsupported("radii lie in different regions")
    return reg
