"""Radial Green function of the 2-D Schroedinger operator with an annular barrier.

The potential is V0 on b <= r <= a and zero elsewhere; only E > V0 is
handled.  Each partial wave l has a radial kernel G(l; r, r') built from
three same-region blocks:

    inner  (r, r' <= b):      [Y(kr>) - alpha J(kr>)] J(kr<)
    mid    (b <= r, r' <= a): [Y(mu r>) - gamma J(mu r>)] [Y(mu r<) - delta J(mu r<)] / g
    outer  (r, r' >= a):     -J(kr>) [Y(kr<) - beta J(kr<)]

with r< = min(r, r'), r> = max(r, r').  Every block has the jump
dG/dr(r'+) - dG/dr(r'-) = 2/(pi r'), is regular at the origin, and behaves as
J_l(kr) for large r.

Two coefficient schemes fill in alpha, beta, gamma, delta, g:

``"published"``
    The published cascade F1, F2, T1, T2 -> F, T -> beta -> U, V -> gamma ->
    delta -> g -> psi -> alpha, transcribed term by term.  Its zeros of
    g are the resonance condition used by :mod:`annular_green.resonance`.
``"matched"``
    Coefficients fixed by continuity of the solution and of its derivative at
    r = b and r = a.  These are expressed through the same F1, F2, T1, T2
    building blocks.  This is the scheme used for evaluation by default,
    and it agrees with the ODE oracle in :mod:`annular_green.oracle`.
    The published values of beta, gamma, delta and alpha do not satisfy
    those interface conditions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np

from .errors import (
    CrossRegionUnsupported,
    InternalConsistencyError,
    InvalidInput,
    InvalidProfile,
    NearPole,
    NoConvergence,
    NonPositiveRadius,
    NotDiffusionRegime,
    ArgumentOverflow,
)
from .special import MAX_ORDER, bessel_jy

NEAR_POLE_RTOL = 1e-12
DELTA_FORMS_RTOL = 1e-9
SCHEMES = ("matched", "published")


class Region(enum.Enum):
    INNER = "inner"
    MID = "mid"
    OUTER = "outer"

    @property
    def block(self) -> str:
        return {"inner": "G11", "mid": "G22", "outer": "G33"}[self.value]


@dataclass(frozen=True)
class PotentialProfile:
    """Annular barrier of height ``v0`` between radii ``b`` < ``a``."""

    b: float
    a: float
    v0: float

    def __post_init__(self):
        if not (self.b > 0 and self.a > self.b):
            raise InvalidProfile(f"need 0 < b < a, got b={self.b}, a={self.a}")
        if not self.v0 > 0:
            raise InvalidProfile(f"need v0 > 0, got {self.v0}")


@dataclass(frozen=True)
class EnergyContext:
    e: float
    m: float
    hbar: float
    k: float
    mu: float


def wavenumbers(e: float, profile: PotentialProfile, m: float = 0.5,
                hbar: float = 1.0) -> EnergyContext:
    """k = sqrt(2 m e)/hbar outside the barrier, mu = sqrt(2 m (e - v0))/hbar inside."""
    if not (m > 0 and hbar > 0):
        raise InvalidInput("mass and hbar must be positive")
    if not e > profile.v0:
        raise NotDiffusionRegime(f"E = {e} <= V0 = {profile.v0}")
    k = math.sqrt(2.0 * m * e) / hbar
    mu = math.sqrt(2.0 * m * (e - profile.v0)) / hbar
    return EnergyContext(float(e), float(m), float(hbar), k, mu)


def context_from_k(k: float, profile: PotentialProfile, m: float = 0.5,
                   hbar: float = 1.0) -> EnergyContext:
    """Energy context for a given outer wavenumber k (E = hbar^2 k^2 / 2m)."""
    if not k > 0:
        raise InvalidInput("k must be positive")
    kv = math.sqrt(2.0 * m * profile.v0) / hbar
    if not k > kv:
        raise NotDiffusionRegime(f"k = {k} <= sqrt(2 M V0)/hbar = {kv}")
    e = (hbar * k) ** 2 / (2.0 * m)
    mu = math.sqrt(k * k - kv * kv)
    return EnergyContext(e, float(m), float(hbar), float(k), mu)


def classify_region(r: float, profile: PotentialProfile) -> Region:
    """Interfaces r = b and r = a belong to the barrier region."""
    if not r > 0:
        raise NonPositiveRadius(f"r must be positive, got {r}")
    if r < profile.b:
        return Region.INNER
    if r <= profile.a:
        return Region.MID
    return Region.OUTER


@dataclass(frozen=True)
class CoefficientSet:
    l: int
    scheme: str
    alpha: float
    beta: float
    gamma: float
    delta: float
    g: float
    u: float
    v: float
    f: float
    t: float
    f1: float
    f2: float
    t1: float
    t2: float
    psi: float
    # second printed form of delta (published scheme only)
    delta_gamma_form: float | None = None

    def as_dict(self) -> dict:
        return {fl.name: getattr(self, fl.name) for fl in fields(self)}


# ---------------------------------------------------------------------------
# cascades (numpy-vectorised over k so the resonance scan can sample cheaply)
# ---------------------------------------------------------------------------

def _bessel_block(l, k, mu, a, b):
    ja, ya, jpa, ypa = bessel_jy(l, k * a)
    jb, yb, jpb, ypb = bessel_jy(l, k * b)
    Jma, Yma, Jpma, Ypma = bessel_jy(l, mu * a)
    Jmb, Ymb, Jpmb, Ypmb = bessel_jy(l, mu * b)
    return dict(ja=ja, ya=ya, jpa=jpa, ypa=ypa, jb=jb, yb=yb, jpb=jpb, ypb=ypb,
                Jma=Jma, Yma=Yma, Jpma=Jpma, Ypma=Ypma,
                Jmb=Jmb, Ymb=Ymb, Jpmb=Jpmb, Ypmb=Ypmb)


def _cross_products(s):
    f1 = s["Jma"] * s["Ypmb"] - s["Yma"] * s["Jpmb"]
    f2 = s["Jmb"] * s["Ypma"] - s["Ymb"] * s["Jpma"]
    t1 = s["Jma"] * s["Ymb"] - s["Yma"] * s["Jmb"]
    t2 = s["Jpmb"] * s["Ypma"] - s["Ypmb"] * s["Jpma"]
    return f1, f2, t1, t2


def _ratio(q, *terms):
    scale = sum(np.abs(t) for t in terms)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(scale > 0, np.abs(q) / scale, 0.0)


def published_cascade(l: int, k, mu, a: float, b: float) -> dict:
    """Evaluate the published coefficient cascade without raising.

    Returns a dict of values plus ``"degeneracy"``, a dict mapping each
    denominator's name to its relative size |q| / sum|terms|.  Works on
    scalar or array ``k``/``mu``.
    """
    s = _bessel_block(l, k, mu, a, b)
    ja, ya, jpa, ypa = s["ja"], s["ya"], s["jpa"], s["ypa"]
    jb, yb, jpb = s["jb"], s["yb"], s["jpb"]
    Jma, Yma, Jpma, Ypma = s["Jma"], s["Yma"], s["Jpma"], s["Ypma"]
    Jmb, Ymb = s["Jmb"], s["Ymb"]
    f1, f2, t1, t2 = _cross_products(s)
    pa = math.pi * a

    f = (mu * jb * (2.0 + k * pa * ja * ypa) * f1
         + k * jpb * (2.0 + k * pa * ja * jpa) * t1
         + mu * pa * ja * ya * (mu * jb * t2 + k * jpb * f2))
    t_terms = (pa * k * mu * ja * jpa * jb * f1,
               -pa * k * mu * ja * ja * jpb * f2,
               -pa * ja * mu * mu * ja * jb * t2,
               -pa * ja * k * k * jpa * jpb * t1)
    t = t_terms[0] + t_terms[1] + t_terms[2] + t_terms[3]

    with np.errstate(divide="ignore", invalid="ignore"):
        beta = f / t
        big_a = ypa - beta * jpa        # Y'(ka) - beta J'(ka)
        big_b = ya - beta * ja          # Y(ka) - beta J(ka)
        v = k * Yma * big_a - mu * Ypma * big_b
        u = k * Jma * big_a - mu * Jpma * big_b
        gamma = v / u
        dnum = 2.0 * Yma + pa * ja * v
        dden = 2.0 * Jma + pa * ja * u
        delta = dnum / dden
        q = mu * (Ypma - gamma * Jpma)
        delta_alt = (Yma * q + k * gamma * ja * big_a) / (Jma * q + k * ja * big_a)
        g = gamma - delta
        psi = (Ymb - gamma * Jmb) / g * (Ymb - delta * Jmb) / jb ** 2
        alpha = yb / jb + psi

    degeneracy = {
        "T": _ratio(t, *t_terms),
        "U": _ratio(u, k * Jma * big_a, mu * Jpma * big_b),
        "delta_denominator": _ratio(dden, 2.0 * Jma, pa * ja * u),
        "g": _ratio(g, gamma, delta),
        "J(kb)": _ratio(jb, jb, yb),
        "J(ka)": _ratio(ja, ja, ya),
    }
    return dict(alpha=alpha, beta=beta, gamma=gamma, delta=delta, g=g, u=u, v=v,
                f=f, t=t, f1=f1, f2=f2, t1=t1, t2=t2, psi=psi,
                delta_gamma_form=delta_alt, degeneracy=degeneracy, bessel=s)


def matched_cascade(l: int, k, mu, a: float, b: float) -> dict:
    """Coefficients from continuity of the solution and its slope at b and a.

    The solution regular at the origin, J(kr) inside, crosses the barrier as
    c1 (Y - delta J)(mu r) and leaves it as c2 (Y - beta J)(kr).
    Integrating J(kr) inward from outside gives c3 (Y - gamma J)(mu r) in the
    barrier and c4 (Y - alpha J)(kr) inside.  Writing the field and slope
    at a (or b) through the barrier cross products F1, F2, T1, T2 gives

        beta  = (k Y'(ka) X - mu Y(ka) Z) / (k J'(ka) X - mu J(ka) Z)
        X = mu J(kb) F1 - k J'(kb) T1,   Z = k J'(kb) F2 - mu J(kb) T2

    and, for the outgoing side,

        alpha = (k Y'(kb) Xo - mu Y(kb) Zo) / (k J'(kb) Xo - mu J(kb) Zo)
        Xo = mu J(ka) F2 + k J'(ka) T1,  Zo = mu J(ka) T2 + k J'(ka) F1.

    ``f``/``t`` hold the numerator/denominator of beta, ``v``/``u`` those of
    gamma, mirroring the roles in the published cascade.
    """
    s = _bessel_block(l, k, mu, a, b)
    ja, ya, jpa, ypa = s["ja"], s["ya"], s["jpa"], s["ypa"]
    jb, yb, jpb, ypb = s["jb"], s["yb"], s["jpb"], s["ypb"]
    Jma, Yma, Jpma, Ypma = s["Jma"], s["Yma"], s["Jpma"], s["Ypma"]
    Jmb, Ymb, Jpmb, Ypmb = s["Jmb"], s["Ymb"], s["Jpmb"], s["Ypmb"]
    f1, f2, t1, t2 = _cross_products(s)

    x_reg = mu * jb * f1 - k * jpb * t1
    z_reg = k * jpb * f2 - mu * jb * t2
    f = k * ypa * x_reg - mu * ya * z_reg
    t = k * jpa * x_reg - mu * ja * z_reg

    v = k * Yma * jpa - mu * Ypma * ja
    u = k * Jma * jpa - mu * Jpma * ja

    dnum = mu * jb * Ypmb - k * jpb * Ymb
    dden = mu * jb * Jpmb - k * jpb * Jmb

    x_out = mu * ja * f2 + k * jpa * t1
    z_out = mu * ja * t2 + k * jpa * f1
    anum = k * ypb * x_out - mu * yb * z_out
    aden = k * jpb * x_out - mu * jb * z_out

    with np.errstate(divide="ignore", invalid="ignore"):
        beta = f / t
        gamma = v / u
        delta = dnum / dden
        g = gamma - delta
        alpha = anum / aden
        psi = alpha - yb / jb

    degeneracy = {
        "T": _ratio(t, k * jpa * x_reg, mu * ja * z_reg),
        "U": _ratio(u, k * Jma * jpa, mu * Jpma * ja),
        "delta_denominator": _ratio(dden, mu * jb * Jpmb, k * jpb * Jmb),
        "g": _ratio(g, gamma, delta),
        "alpha_denominator": _ratio(aden, k * jpb * x_out, mu * jb * z_out),
    }
    return dict(alpha=alpha, beta=beta, gamma=gamma, delta=delta, g=g, u=u, v=v,
                f=f, t=t, f1=f1, f2=f2, t1=t1, t2=t2, psi=psi,
                delta_gamma_form=None, degeneracy=degeneracy, bessel=s)


def _check_context(ctx: EnergyContext, profile: PotentialProfile):
    if not ctx.e > profile.v0:
        raise NotDiffusionRegime(f"E = {ctx.e} <= V0 = {profile.v0}")
    k2 = 2.0 * ctx.m * ctx.e / ctx.hbar ** 2
    mu2 = 2.0 * ctx.m * (ctx.e - profile.v0) / ctx.hbar ** 2
    if abs(ctx.k ** 2 - k2) > 1e-12 * k2 or abs(ctx.mu ** 2 - mu2) > 1e-12 * k2:
        raise InvalidInput("energy context was built for a different profile")


@lru_cache(maxsize=4096)
def _coefficients(l: int, ctx: EnergyContext, profile: PotentialProfile,
                  scheme: str) -> CoefficientSet:
    if scheme not in SCHEMES:
        raise InvalidInput(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if abs(l) > MAX_ORDER:
        raise InvalidInput(f"|l| must not exceed {MAX_ORDER}")
    _check_context(ctx, profile)
    build = published_cascade if scheme == "published" else matched_cascade
    c = build(int(l), ctx.k, ctx.mu, profile.a, profile.b)

    # report the worst offender first
    bad = sorted((float(r), name) for name, r in c["degeneracy"].items()
                 if not float(r) >= NEAR_POLE_RTOL)
    if bad:
        ratio, name = bad[0]
        raise NearPole(name, ratio, f"l={l}, E={ctx.e!r}, scheme={scheme}")

    values = {key: float(c[key]) for key in
              ("alpha", "beta", "gamma", "delta", "g", "u", "v", "f", "t",
               "f1", "f2", "t1", "t2", "psi")}
    if scheme == "published":
        d1, d2 = float(c["delta_gamma_form"]), values["delta"]
        if not abs(d1 - d2) <= DELTA_FORMS_RTOL * max(abs(d1), abs(d2)):
            raise InternalConsistencyError(
                f"printed forms of delta disagree: {d1!r} vs {d2!r} (l={l}, E={ctx.e!r})")
        values["delta_gamma_form"] = d1
    return CoefficientSet(l=int(l), scheme=scheme, **values)


def coefficient_set(l: int, ctx: EnergyContext, profile: PotentialProfile,
                    scheme: str = "published") -> CoefficientSet:
    """Full coefficient cascade for partial wave ``l``.

    ``scheme="published"`` (default) is the published cascade and also checks
    that its two printed forms of delta agree to 1e-9.  ``scheme="matched"``
    gives the interface-matched coefficients used by :func:`green_radial`.

    Raises :class:`NearPole` when any denominator falls below 1e-12 of the
    magnitude of its own terms.
    """
    return _coefficients(int(l), ctx, profile, scheme)


# ---------------------------------------------------------------------------
# block evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialGreenValue:
    l: int
    r: float
    rp: float
    region: Region
    value: float


def _block_layout(region: Region, ctx: EnergyContext, cs: CoefficientSet):
    """(wavenumber, prefactor, coefficient of r<-factor, coefficient of r>-factor).

    A coefficient ``None`` means the factor is plain J; otherwise it is
    Y - coef * J.
    """
    if region is Region.INNER:
        return ctx.k, 1.0, None, cs.alpha
    if region is Region.MID:
        return ctx.mu, 1.0 / cs.g, cs.delta, cs.gamma
    return ctx.k, -1.0, cs.beta, None


def _factor(l, kappa, r, coef, derivative):
    j, y, jp, yp = bessel_jy(l, kappa * r)
    if derivative:
        return kappa * (jp if coef is None else yp - coef * jp)
    return j if coef is None else y - coef * j


def green_block(region: Region, l: int, r: float, rp: float, ctx: EnergyContext,
                profile: PotentialProfile, *, scheme: str = "matched",
                derivative: bool = False, branch: str | None = None,
                strict: bool = True) -> float:
    """Evaluate one regional block (or its r-derivative) at (r, r').

    ``branch`` selects the two-branch display explicitly: ``"lower"`` treats
    r as the smaller radius, ``"upper"`` as the larger.  By default it is
    chosen from r <= r'.  With ``strict`` the radii must lie in the closed
    region.  Relaxing it lets a branch formula be continued slightly past an
    interface, e.g. for difference stencils.
    """
    if not (r > 0 and rp > 0):
        raise NonPositiveRadius("radii must be positive")
    if strict:
        lo, hi = {Region.INNER: (0.0, profile.b), Region.MID: (profile.b, profile.a),
                  Region.OUTER: (profile.a, math.inf)}[region]
        for x in (r, rp):
            if not lo <= x <= hi:
                raise CrossRegionUnsupported(f"r={x} outside the {region.value} region")
    cs = coefficient_set(l, ctx, profile, scheme)
    kappa, pref, c_lo, c_hi = _block_layout(region, ctx, cs)
    if branch is None:
        branch = "lower" if r <= rp else "upper"
    if branch == "lower":
        # r is the smaller radius
        return pref * _factor(l, kappa, r, c_lo, derivative) * _factor(l, kappa, rp, c_hi, False)
    if branch == "upper":
        return pref * _factor(l, kappa, rp, c_lo, False) * _factor(l, kappa, r, c_hi, derivative)
    raise InvalidInput(f"branch must be 'lower' or 'upper', got {branch!r}")


def green_radial(l: int, r: float, rp: float, ctx: EnergyContext,
                 profile: PotentialProfile, scheme: str = "matched") -> RadialGreenValue:
    """G(l; r, r') for r and r' in the same region."""
    reg = classify_region(r, profile)
    reg_p = classify_region(rp, profile)
    if reg is not reg_p:
        raise CrossRegionUnsupported(
            f"r={r} is {reg.value}, r'={rp} is {reg_p.value}; only same-region blocks exist")
    lo, hi = (r, rp) if r <= rp else (rp, r)
    # ordered evaluation keeps G(r, r') == G(r', r) bit for bit
    value = green_block(reg, l, lo, hi, ctx, profile, scheme=scheme, branch="lower",
                        strict=False)
    return RadialGreenValue(int(l), float(r), float(rp), reg, float(value))


def partial_wave_sum(r: float, theta: float, rp: float, thetap: float,
                     ctx: EnergyContext, profile: PotentialProfile,
                     lmax: int | str = "auto", scheme: str = "matched",
                     tol: float = 1e-10) -> tuple[float, int]:
    """Angular sum G(0) + 2 sum_l G(l) cos(l (theta - theta')) and the lmax used.

    In ``"auto"`` mode the sum stops once three consecutive |2 G(l)| are each
    below ``tol`` times the running sum.  The bound on the term magnitude
    ignores the cosine, so an accidental zero of cos(l dtheta) cannot end
    the sum early.
    """
    dth = theta - thetap
    total = green_radial(0, r, rp, ctx, profile, scheme).value
    if lmax == "auto":
        small = 0
        for l in range(1, MAX_ORDER + 1):
            try:
                gl = green_radial(l, r, rp, ctx, profile, scheme).value
            except (ArgumentOverflow, NearPole) as exc:
                # high orders overflow the cascade before the terms have decayed
                raise NoConvergence(f"partial waves overflow at l={l} before converging") from exc
            term = 2.0 * gl
            total += term * math.cos(l * dth)
            small = small + 1 if abs(term) <= tol * abs(total) else 0
            if small == 3:
                return total, l
        raise NoConvergence(f"partial-wave sum not converged by l={MAX_ORDER}")
    lmax = int(lmax)
    if lmax < 0:
        raise InvalidInput("lmax must be >= 0")
    for l in range(1, lmax + 1):
        total += 2.0 * green_radial(l, r, rp, ctx, profile, scheme).value * math.cos(l * dth)
    return total, lmax


def green_polar_sum(r: float, theta: float, rp: float, thetap: float,
                    ctx: EnergyContext, profile: PotentialProfile,
                    lmax: int | str = "auto", scheme: str = "matched") -> float:
    return partial_wave_sum(r, theta, rp, thetap, ctx, profile, lmax, scheme)[0]
