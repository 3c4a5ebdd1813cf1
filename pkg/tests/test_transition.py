import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import ndtr

from levyruin import (
    BrownianRisk,
    CramerLundbergExp,
    cl_tilt_integral,
    integrate_tilted,
    kendall_first_passage_cdf,
    phi_inverse,
    psi1_psi2,
    transition_measure,
)
from levyruin.transition import cl_density_series, density_at, gaussian_tilted_moment


def test_rejects_nonpositive_horizon(bm):
    with pytest.raises(ValueError):
        transition_measure(bm, 0.0)
    with pytest.raises(ValueError):
        transition_measure(bm, -1.0)


def test_cl_atom_location_and_mass(cl):
    meas = transition_measure(cl, 1.0)
    loc, mass = meas.atom
    assert loc == 2.0
    assert mass == pytest.approx(math.exp(-1.0), abs=1e-15)


def test_brownian_has_no_atom(bm):
    assert transition_measure(bm, 0.7).atom is None


@pytest.mark.parametrize("r", [0.1, 1.0, 5.0])
def test_total_mass_one(bm, cl, r):
    for model in (bm, cl):
        meas = transition_measure(model, r)
        mass = quad(
            lambda z: float(density_at(model, r, z)),
            meas.support_lo, meas.support_hi, limit=500,
        )[0]
        if meas.atom:
            mass += meas.atom[1]
        assert mass == pytest.approx(1.0, abs=1e-9)


def test_density_nonnegative(bm, cl):
    zg = np.linspace(-30.0, 30.0, 301)
    for model, r in ((bm, 0.5), (cl, 2.0)):
        assert np.all(density_at(model, r, zg) >= 0.0)


def test_cl_series_matches_bessel_route(cl):
    zg = np.linspace(-6.0, 2.0 - 1e-9, 200)
    a = density_at(cl, 1.0, zg)
    b = cl_density_series(cl, 1.0, zg)
    assert np.max(np.abs(a - b)) < 1e-14


def test_cl_density_survives_large_horizon(cl):
    # The raw series overflows here; the scaled-Bessel route must not.
    v = float(density_at(cl, 200.0, 200.0))
    assert np.isfinite(v) and v > 0.0


def test_integrate_tilted_zero_function(bm):
    meas = transition_measure(bm, 1.0)
    assert integrate_tilted(meas, lambda z: np.zeros_like(z)) == 0.0


def test_integrate_tilted_unit_function_brownian(bm):
    # E[X_r^+]/r for X_r ~ N(c r, r):
    # (1/sqrt(2 pi r)) exp(-r c^2/2) + c N(c sqrt(r))
    meas = transition_measure(bm, 1.0)
    got = integrate_tilted(meas, lambda z: np.ones_like(z))
    want = math.exp(-0.5) / math.sqrt(2 * math.pi) + ndtr(1.0)
    assert got == pytest.approx(want, abs=1e-8)


def test_integrate_tilted_exponential_tilt_matches_closed_form(bm):
    for (c, r, q) in ((1.0, 1.0, 0.5), (0.5, 2.0, 1.0), (2.0, 0.5, 2.0)):
        model = BrownianRisk(c=c, sigma=1.0)
        meas = transition_measure(model, r)
        d = math.sqrt(c * c + 2 * q)
        p1, p2 = psi1_psi2(c, r, q)
        got1 = integrate_tilted(meas, lambda z: np.exp((d - c) * z), growth=d - c)
        got2 = integrate_tilted(meas, lambda z: np.exp(-(d + c) * z))
        assert got1 == pytest.approx(p1, rel=1e-10)
        assert got2 == pytest.approx(p2, rel=1e-10)
        # the general-volatility closed form agrees too
        assert gaussian_tilted_moment(model, r, d - c) == pytest.approx(p1, rel=1e-12)
        assert gaussian_tilted_moment(model, r, -(d + c)) == pytest.approx(p2, rel=1e-12)


def test_integrate_tilted_vector_valued(cl):
    meas = transition_measure(cl, 1.0)
    tilts = np.array([0.0, 0.2, 0.5])

    def f(z):
        return np.exp(tilts[:, None] * z[None, :])

    got = integrate_tilted(meas, f)
    for k, a in enumerate(tilts):
        single = integrate_tilted(meas, lambda z: np.exp(a * z), growth=float(a))
        assert got[k] == pytest.approx(single, rel=1e-9)


def test_psi_large_r_limits():
    c, q = 1.0, 0.5
    r = 60.0
    p1, p2 = psi1_psi2(c, r, q)
    assert p1 / math.exp(r * q) == pytest.approx(math.sqrt(c * c + 2 * q), rel=1e-10)
    assert p2 / math.exp(r * q) == pytest.approx(0.0, abs=1e-12)


def test_psi_rejects_bad_arguments():
    with pytest.raises(ValueError):
        psi1_psi2(1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        psi1_psi2(1.0, 1.0, 0.0)


def test_cl_tilt_integral_against_quadrature(cl):
    for r in (0.5, 1.0, 2.0):
        meas = transition_measure(cl, r)
        for q in (0.5, 1.5):
            fq = phi_inverse(cl, q)
            series = cl_tilt_integral(cl, r, fq)
            quadr = r * integrate_tilted(meas, lambda z: np.exp(fq * z), growth=fq)
            assert series == pytest.approx(quadr, abs=1e-7, rel=1e-9)


def test_cl_tilt_integral_zero_tilt_is_positive_part_mean(cl):
    r = 1.0
    meas = transition_measure(cl, r)
    series = cl_tilt_integral(cl, r, 0.0)
    quadr = r * integrate_tilted(meas, lambda z: np.ones_like(z))
    assert series == pytest.approx(quadr, abs=1e-9)


def test_cl_tilt_integral_no_claims_limit():
    # eta -> 0: X_r = c r surely, so the integral is c r exp((fq c - eta) r).
    model = CramerLundbergExp(c=2.0, eta=1e-12, alpha=1.0)
    fq = 0.3
    got = cl_tilt_integral(model, 1.0, fq)
    assert got == pytest.approx(2.0 * math.exp(0.6), rel=1e-9)


def test_cl_tilt_integral_rejects_tilt_below_pole(cl):
    with pytest.raises(ValueError):
        cl_tilt_integral(cl, 1.0, -1.0)


def test_kendall_cdf_basics(bm, cl):
    # reaches any level eventually under positive drift
    assert kendall_first_passage_cdf(cl, 0.5, 200.0) == pytest.approx(1.0, abs=2e-3)
    assert kendall_first_passage_cdf(bm, 0.5, 200.0) == pytest.approx(1.0, abs=2e-3)
    # cannot outrun the drift plus diffusion tail
    assert kendall_first_passage_cdf(bm, 30.0, 1.0) < 1e-100
    assert kendall_first_passage_cdf(cl, 30.0, 1.0) == 0.0


def test_kendall_cdf_brownian_against_reflection_formula(bm):
    # drifted Brownian first passage: P(tau_z <= r) =
    # N((cr - z)/sqrt(r)) + exp(2 c z) N((-cr - z)/sqrt(r))
    for (z, r) in ((1.0, 1.0), (0.5, 2.0), (2.0, 0.7)):
        want = ndtr((r - z) / math.sqrt(r)) + math.exp(2 * z) * ndtr((-r - z) / math.sqrt(r))
        assert kendall_first_passage_cdf(bm, z, r) == pytest.approx(want, abs=1e-8)


def test_kendall_cdf_cl_straight_line_atom(cl):
    # Before z/c the level is unreachable; exactly at z/c the only way is
    # "no claim", with probability exp(-eta z / c).
    z = 1.0
    t0 = z / cl.c
    assert kendall_first_passage_cdf(cl, z, 0.9 * t0) == 0.0
    assert kendall_first_passage_cdf(cl, z, t0) == pytest.approx(
        math.exp(-cl.eta * t0), abs=1e-12
    )


def test_support_upper_follows_tilt(bm, cl):
    meas = transition_measure(bm, 4.0)
    assert meas.support_upper(2.0) > meas.support_hi
    assert meas.support_upper(0.0) == meas.support_hi
    meas_cl = transition_measure(cl, 4.0)
    assert meas_cl.support_upper(5.0) == meas_cl.support_hi  # capped at c*r
