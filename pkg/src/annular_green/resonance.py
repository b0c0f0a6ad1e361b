"""Resonance wavenumbers as zeros of the pole discriminant.

    Delta_l(k) = Y_l(ka) T(k) - J_l(ka) F(k)

with F, T from the published cascade.  At a zero, beta = F/T equals
Y_l(ka)/J_l(ka) and g = gamma - delta vanishes.  Both terms of Delta carry
a factor J_l(ka) because T does, so every zero of J_l(ka) is also a sign
change of Delta.  There T and beta degenerate and the beta relation fails.
Such brackets are rejected as spurious rather than reported.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRange, InvalidInput, NotDiffusionRegime
from .greens import PotentialProfile, published_cascade

log = logging.getLogger(__name__)

# a refined zero must cancel Delta's two terms to this relative level,
# otherwise the bracket straddles a zero of the common J_l(ka) factor
ROOT_RESIDUAL_LIMIT = 1e-6


@dataclass(frozen=True)
class ResonanceScanConfig:
    l: int
    kmin: float
    kmax: float
    samples: int = 4000
    refine_tol: float = 1e-12

    def validate(self, profile: PotentialProfile, m: float = 0.5, hbar: float = 1.0):
        if not self.kmax > self.kmin:
            raise DegenerateRange(f"kmax={self.kmax} must exceed kmin={self.kmin}")
        kv = math.sqrt(2.0 * m * profile.v0) / hbar
        if not self.kmin > kv:
            raise NotDiffusionRegime(f"kmin={self.kmin} must exceed sqrt(2 M V0)/hbar = {kv}")
        if int(self.samples) != self.samples or self.samples < 2:
            raise InvalidInput("samples must be an integer >= 2")
        if not self.refine_tol > 0:
            raise InvalidInput("refine_tol must be positive")


@dataclass(frozen=True)
class ResonanceRoot:
    l: int
    k_star: float
    e_star: float
    residual: float       # |Delta| / (|Y T| + |J F|)
    beta_gap: float       # |beta J(ka) - Y(ka)| / (|beta J(ka)| + |Y(ka)|)
    g_at_root: float      # |g| / (|gamma| + |delta|)


def _mu(k, profile, m, hbar):
    kv2 = 2.0 * m * profile.v0 / hbar ** 2
    k = np.asarray(k, dtype=float)
    if np.any(~(k * k > kv2)):
        raise NotDiffusionRegime("k must exceed sqrt(2 M V0)/hbar")
    return np.sqrt(k * k - kv2)


def discriminant_terms(l: int, k, profile: PotentialProfile, m: float = 0.5,
                       hbar: float = 1.0):
    """(Y_l(ka) T, J_l(ka) F) so callers can judge cancellation; vectorised in k."""
    k = np.asarray(k, dtype=float)
    c = published_cascade(int(l), k, _mu(k, profile, m, hbar), profile.a, profile.b)
    s = c["bessel"]
    return s["ya"] * c["t"], s["ja"] * c["f"]


def pole_discriminant(l: int, k, profile: PotentialProfile, m: float = 0.5,
                      hbar: float = 1.0):
    """Delta_l(k) = Y_l(ka) T - J_l(ka) F (scalar or array k)."""
    yt, jf = discriminant_terms(l, k, profile, m, hbar)
    out = yt - jf
    return float(out) if np.ndim(out) == 0 else out


def _relative_residual(l, k, profile, m, hbar):
    yt, jf = discriminant_terms(l, k, profile, m, hbar)
    yt, jf = float(yt), float(jf)
    scale = abs(yt) + abs(jf)
    return abs(yt - jf) / scale if scale > 0 else 0.0


def _bisect(fn, lo, hi, flo, tol):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def root_diagnostics(l: int, k: float, profile: PotentialProfile, m: float = 0.5,
                     hbar: float = 1.0) -> ResonanceRoot:
    """Evaluate the three equivalent resonance conditions at ``k``."""
    mu = float(_mu(k, profile, m, hbar))
    c = published_cascade(int(l), k, mu, profile.a, profile.b)
    s = c["bessel"]
    ja, ya = float(s["ja"]), float(s["ya"])
    beta, gamma, delta, g = (float(c[x]) for x in ("beta", "gamma", "delta", "g"))
    bj = beta * ja
    beta_gap = abs(bj - ya) / (abs(bj) + abs(ya))
    gs = abs(gamma) + abs(delta)
    g_rel = abs(g) / gs if gs > 0 else math.inf
    return ResonanceRoot(
        l=int(l), k_star=float(k), e_star=(hbar * k) ** 2 / (2.0 * m),
        residual=_relative_residual(l, k, profile, m, hbar),
        beta_gap=beta_gap, g_at_root=g_rel)


def scan_brackets(config: ResonanceScanConfig, profile: PotentialProfile,
                  m: float = 0.5, hbar: float = 1.0):
    """Uniform samples of Delta and the index pairs where it changes sign."""
    config.validate(profile, m, hbar)
    ks = np.linspace(config.kmin, config.kmax, int(config.samples))
    d = pole_discriminant(config.l, ks, profile, m, hbar)
    sgn = np.sign(d)
    brackets = [(i, i) for i in np.flatnonzero(sgn == 0)]
    brackets += [(i, i + 1) for i in np.flatnonzero(sgn[:-1] * sgn[1:] < 0)]
    return ks, d, sorted(brackets)


def resonance_scan(config: ResonanceScanConfig, profile: PotentialProfile,
                   m: float = 0.5, hbar: float = 1.0) -> list[ResonanceRoot]:
    """Locate zeros of Delta_l on [kmin, kmax], sorted by k.

    Each sign change between consecutive samples is bisected down to
    ``refine_tol``.  A refined bracket that does not cancel the two terms of
    Delta (relative residual above 1e-6) sits on a zero of the common
    J_l(ka) factor, where the cascade flags T as degenerate.  It is skipped.
    """
    ks, d, brackets = scan_brackets(config, profile, m, hbar)
    fn = lambda k: pole_discriminant(config.l, k, profile, m, hbar)  # noqa: E731
    roots = []
    for i, j in brackets:
        if i == j:
            k_star = float(ks[i])
        else:
            lo, hi = _bisect(fn, float(ks[i]), float(ks[j]), float(d[i]), config.refine_tol)
            k_star = 0.5 * (lo + hi)
        root = root_diagnostics(config.l, k_star, profile, m, hbar)
        if not root.residual <= ROOT_RESIDUAL_LIMIT:
            mu = float(_mu(k_star, profile, m, hbar))
            flags = published_cascade(config.l, k_star, mu, profile.a, profile.b)["degeneracy"]
            log.debug("skip bracket near k=%.12g: residual %.3e, T ratio %.3e, J(ka) ratio %.3e",
                      k_star, root.residual, flags["T"], flags["J(ka)"])
            continue
        roots.append(root)
    roots.sort(key=lambda rr: rr.k_star)
    return roots
