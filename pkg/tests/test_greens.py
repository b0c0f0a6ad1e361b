from __future__ import annotations

import math

import pytest

from annular_green.errors import (
    CrossRegionUnsupported,
    InternalConsistencyError,
    InvalidInput,
    InvalidProfile,
    NearPole,
    NoConvergence,
    NotDiffusionRegime,
)
from annular_green import greens
from annular_green.greens import (
    PotentialProfile,
    Region,
    classify_region,
    coefficient_set,
    context_from_k,
    green_block,
    green_polar_sum,
    green_radial,
    matched_cascade,
    published_cascade,
    partial_wave_sum,
    wavenumbers,
)


def test_profile_validation():
    with pytest.raises(InvalidProfile):
        PotentialProfile(b=2.0, a=1.0, v0=1.0)
    with pytest.raises(InvalidProfile):
        PotentialProfile(b=0.0, a=1.0, v0=1.0)
    with pytest.raises(InvalidProfile):
        PotentialProfile(b=1.0, a=2.0, v0=-1.0)


def test_wavenumbers(ring):
    ctx = wavenumbers(2.0, ring)
    assert ctx.k == pytest.approx(math.sqrt(2.0))
    assert ctx.mu == pytest.approx(1.0)
    other = wavenumbers(2.0, ring, m=1.0, hbar=2.0)
    assert other.k == pytest.approx(1.0)
    assert context_from_k(ctx.k, ring).e == pytest.approx(2.0)
    with pytest.raises(NotDiffusionRegime):
        wavenumbers(1.0, ring)
    with pytest.raises(NotDiffusionRegime):
        wavenumbers(0.5, ring)


def test_classify_region(ring):
    assert classify_region(0.5, ring) is Region.INNER
    assert classify_region(1.0, ring) is Region.MID
    assert classify_region(2.0, ring) is Region.MID
    assert classify_region(2.0000001, ring) is Region.OUTER
    assert Region.MID.block == "G22"


def test_published_cascade_matches_mpmath(reference):
    for row in reference["cascade"]:
        prof = PotentialProfile(row["b"], row["a"], row["V0"])
        ctx = wavenumbers(row["E"], prof)
        c = published_cascade(row["l"], ctx.k, ctx.mu, prof.a, prof.b)
        for key, ref_key in (("beta", "beta"), ("gamma", "gamma"), ("delta", "delta"),
                             ("delta_gamma_form", "delta_alt"), ("alpha", "alpha"),
                             ("f", "f"), ("t", "t")):
            assert float(c[key]) == pytest.approx(row[ref_key], rel=1e-9), (row, key)


def test_published_values_l0(ring, ctx2):
    cs = coefficient_set(0, ctx2, ring)
    assert cs.scheme == "published"
    assert cs.beta == pytest.approx(-17.158039859477793, rel=1e-11)
    assert cs.alpha == pytest.approx(-27.31832043973546, rel=1e-11)
    assert cs.delta == pytest.approx(cs.delta_gamma_form, rel=1e-12)


def test_matched_coefficients_satisfy_continuity(ring, ctx2):
    """beta from the regular solution: J(kr) inside must continue to Y - beta J outside."""
    cs = coefficient_set(1, ctx2, ring, scheme="matched")
    for region, r in ((Region.INNER, 1.0), (Region.MID, 2.0)):
        inner = green_block(region, 1, r, r, ctx2, ring, scheme="matched", branch="lower")
        nxt = Region.MID if region is Region.INNER else Region.OUTER
        outer = green_block(nxt, 1, r, r, ctx2, ring, scheme="matched", branch="lower",
                            strict=False)
        assert inner == pytest.approx(outer, rel=1e-12)
    assert cs.g == pytest.approx(cs.gamma - cs.delta)


def test_green_matches_exact_reference(reference):
    for row in reference["green"]:
        prof = PotentialProfile(row["b"], row["a"], row["V0"])
        ctx = wavenumbers(row["E"], prof)
        g = green_radial(row["l"], row["r"], row["rp"], ctx, prof).value
        assert g == pytest.approx(row["G"], rel=1e-10, abs=1e-14), row


def test_published_scheme_differs_from_exact(reference, ring, ctx2):
    # the published cascade is kept verbatim; it is not the interface-matched function
    row = next(r for r in reference["green"] if r["r"] == 0.5 and r["l"] == 0 and r["E"] == 2.0
               and r["a"] == 2.0)
    published = green_radial(0, 0.5, 0.7, ctx2, ring, scheme="published").value
    assert abs(published - row["G"]) > 1e-3 * abs(row["G"])


def test_symmetry_is_exact(ring, ctx2):
    for r, rp in ((0.2, 0.9), (1.1, 1.7), (2.5, 4.4)):
        assert green_radial(2, r, rp, ctx2, ring).value == green_radial(2, rp, r, ctx2, ring).value


def test_cross_region_rejected(ring, ctx2):
    with pytest.raises(CrossRegionUnsupported):
        green_radial(0, 0.5, 1.5, ctx2, ring)
    with pytest.raises(CrossRegionUnsupported):
        green_block(Region.INNER, 0, 0.5, 1.5, ctx2, ring)


def test_bad_inputs(ring, ctx2):
    with pytest.raises(InvalidInput):
        green_radial(0, -1.0, 0.5, ctx2, ring)
    with pytest.raises(InvalidInput):
        coefficient_set(0, ctx2, ring, scheme="other")
    with pytest.raises(InvalidInput):
        green_block(Region.INNER, 0, 0.5, 0.6, ctx2, ring, branch="sideways")
    other = PotentialProfile(1.0, 2.0, 1.5)
    with pytest.raises(InvalidInput):
        coefficient_set(0, ctx2, other)


def test_near_pole_at_resonance(ring, reference):
    k_star = next(r["k_star"] for r in reference["roots"] if r["l"] == 1)
    ctx = context_from_k(k_star, ring)
    with pytest.raises(NearPole) as info:
        coefficient_set(1, ctx, ring, scheme="published")
    assert info.value.quantity == "g"
    assert info.value.ratio < 1e-12
    # the interface-matched coefficients stay regular there
    coefficient_set(1, ctx, ring, scheme="matched")


def test_delta_forms_disagreement_raises(monkeypatch, ring):
    real = greens.published_cascade

    def skewed(*args):
        out = dict(real(*args))
        out["delta_gamma_form"] = out["delta"] * (1 + 1e-6)
        return out

    monkeypatch.setattr(greens, "published_cascade", skewed)
    greens._coefficients.cache_clear()
    try:
        with pytest.raises(InternalConsistencyError):
            coefficient_set(0, wavenumbers(3.0, ring), ring, scheme="published")
    finally:
        greens._coefficients.cache_clear()


def test_cascades_vectorise(ring):
    import numpy as np

    ks = np.array([1.5, 2.0, 3.0])
    mus = np.sqrt(ks ** 2 - 1.0)
    vec = matched_cascade(1, ks, mus, ring.a, ring.b)
    for i in range(3):
        one = matched_cascade(1, float(ks[i]), float(mus[i]), ring.a, ring.b)
        assert float(vec["beta"][i]) == pytest.approx(float(one["beta"]), rel=1e-15)


def test_partial_wave_sum(ring, ctx2):
    total, used = partial_wave_sum(0.5, 0.0, 0.7, 1.0, ctx2, ring)
    assert 3 <= used < 200
    manual = green_radial(0, 0.5, 0.7, ctx2, ring).value + sum(
        2 * green_radial(l, 0.5, 0.7, ctx2, ring).value * math.cos(l) for l in range(1, used + 1))
    assert total == pytest.approx(manual, rel=1e-13)
    fixed, n = partial_wave_sum(0.5, 0.0, 0.7, 1.0, ctx2, ring, lmax=used + 10)
    assert n == used + 10
    assert fixed == pytest.approx(total, rel=1e-9)
    assert green_polar_sum(0.5, 0.0, 0.7, 1.0, ctx2, ring) == total
    with pytest.raises(InvalidInput):
        partial_wave_sum(0.5, 0.0, 0.7, 1.0, ctx2, ring, lmax=-1)


def test_partial_wave_sum_coincident_points_do_not_converge(ring, ctx2):
    # logarithmic singularity at r = r', theta = theta'
    with pytest.raises(NoConvergence):
        partial_wave_sum(0.5, 0.0, 0.5, 0.0, ctx2, ring)


def test_polar_sum_truncation(ring, ctx2):
    args = (0.2, 0.3, 0.8, 0.3, ctx2, ring)
    assert green_polar_sum(*args, lmax=0) == green_radial(0, 0.2, 0.8, ctx2, ring).value
    s8, s9, s64 = (green_polar_sum(*args, lmax=n) for n in (8, 9, 64))
    # partial waves fall off like (r</r>)^l, so the tail after l = 8 is below twice the l = 9 term
    assert abs(s8 - s64) <= 2 * abs(s9 - s8)
    assert abs(s9 - s64) < abs(s8 - s64)


def test_polar_sum_is_real_from_exponentials(ring, ctx2):
    dth = 0.7
    total = sum(green_radial(l, 1.2, 1.6, ctx2, ring).value * complex(math.cos(l * dth),
                                                                        math.sin(l * dth))
                for l in range(-30, 31))
    assert abs(total.imag) <= 1e-12 * max(1.0, abs(total.real))
    assert total.real == pytest.approx(green_polar_sum(1.2, dth, 1.6, 0.0, ctx2, ring, lmax=30),
                                       rel=1e-12)


@pytest.mark.parametrize("l", [0, 1, 3])
def test_regular_at_origin(ring, ctx2, l):
    from annular_green.special import bessel_jy

    ratios = [green_radial(l, f * ring.b, 0.6, ctx2, ring).value / bessel_jy(l, ctx2.k * f * ring.b)[0]
              for f in (1e-3, 1e-4)]
    assert math.isfinite(ratios[0])
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-9)


def test_boundary_radius_belongs_to_mid(ring, ctx2):
    assert green_radial(1, 1.0, 1.5, ctx2, ring).region is Region.MID
    assert green_radial(1, 1.2, 2.0, ctx2, ring).region is Region.MID
    with pytest.raises(CrossRegionUnsupported):
        green_radial(0, 0.5, 3.0, ctx2, ring)
