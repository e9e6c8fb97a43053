"""Closed-form wave construction, inverse maps and transformations."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarwave import (DomainError, ModelParams, PhysicalityError,
                       TravellingWaveState, WaveFamily, apply_T1,
                       apply_T2_tilde, flux_constant, make_wave, motility,
                       motility_deriv, profile, travelling_wave_rhs,
                       validate_physical, wave_speed)
from polarwave.model import g_fn, g_inv, h_fn, h_inv


# ----------------------------------------------------------- inverse maps

@given(st.floats(min_value=1e-6, max_value=1.0 - 1e-6))
def test_g_roundtrip(y):
    assert g_inv(g_fn(y)) == pytest.approx(y, rel=1e-9, abs=1e-12)


@given(st.floats(min_value=1.0 + 1e-6, max_value=50.0))
def test_h_roundtrip(y):
    # conditioning: h(y) ~ -1/(2 y^2) for large y, so dy ~ y^3 * dc
    assert h_inv(h_fn(y)) == pytest.approx(y, rel=1e-7, abs=1e-10)


@given(st.floats(min_value=-30.0, max_value=50.0))
def test_g_inv_in_range(c):
    # below c ~ -33 the result is within one ulp of 1 and rounds to it
    assert 0.0 < g_inv(c) < 1.0


def test_h_inv_rejects_out_of_range():
    with pytest.raises(DomainError):
        h_inv(0.5)


def test_g_fn_domain():
    with pytest.raises(DomainError):
        g_fn(1.5)


# ----------------------------------------------------------------- speeds

def test_speed_values_reference_point():
    p = ModelParams(kappa=1.0, alpha=0.2)
    assert wave_speed(WaveFamily.S1, p) == pytest.approx(-2.0)
    assert wave_speed(WaveFamily.S2, p) == pytest.approx(2.0)
    assert wave_speed(WaveFamily.S3, p) == pytest.approx(1.5)
    assert wave_speed(WaveFamily.S4, p) == pytest.approx(0.5)


@given(st.floats(min_value=0.05, max_value=0.95),
       st.floats(min_value=0.1, max_value=10.0))
def test_speed_symmetries(alpha, kappa):
    p = ModelParams(kappa=kappa, alpha=alpha)
    assert wave_speed(WaveFamily.S2, p) == pytest.approx(
        -wave_speed(WaveFamily.S1, p))
    assert wave_speed(WaveFamily.S4, p) == pytest.approx(
        2.0 - wave_speed(WaveFamily.S3, p))
    q = ModelParams(kappa=kappa, alpha=1.0 - alpha)
    assert wave_speed(WaveFamily.S3, q) == pytest.approx(
        1.0 - wave_speed(WaveFamily.S1, p))


def test_physicality_s2():
    assert validate_physical(WaveFamily.S2,
                             ModelParams(1.0, 0.4)).physical
    v = validate_physical(WaveFamily.S2, ModelParams(1.0, 0.7))
    assert not v.physical and "impenetrability" in v.reason
    with pytest.raises(PhysicalityError):
        make_wave(WaveFamily.S2, ModelParams(1.0, 0.7))


def test_physicality_s4():
    # s4 < 0 requires kappa(1/(1-alpha) - 1) > 1
    assert validate_physical(WaveFamily.S4, ModelParams(1.0, 0.7)).physical
    assert not validate_physical(WaveFamily.S4,
                                 ModelParams(1.0, 0.2)).physical


# --------------------------------------------------------------- profiles

@pytest.mark.parametrize("family,alpha", [
    (WaveFamily.S1, 0.2), (WaveFamily.S2, 0.2),
    (WaveFamily.S3, 0.5), (WaveFamily.S4, 0.8),
])
def test_far_field_limits(family, alpha):
    """Each wave connects an unpolarised state to a fully polarised one.
    For S1/S2 the unpolarised side is the rest state (R, V) = (1, 0) and
    the polarised density follows from the flux; for S3/S4 the polarised
    side is the unit-density state moving at speed 1 and the unpolarised
    density follows from the flux."""
    p = ModelParams(kappa=1.0, alpha=alpha)
    w = make_wave(family, p)
    s = w.speed
    z = np.array([-35.0, 35.0])
    r, a = w.r_at(z), w.a_at(z)
    states = sorted(zip(np.round(a, 6), np.round(r, 6)))
    (a_un, r_un), (a_pol, r_pol) = states
    assert a_un == pytest.approx(0.0, abs=1e-5)
    assert a_pol == pytest.approx(1.0, abs=1e-5)
    if family in (WaveFamily.S1, WaveFamily.S2):
        assert r_un == pytest.approx(1.0, abs=1e-5)
        assert r_pol == pytest.approx(s / (s - 1.0), abs=1e-5)
    else:
        assert r_pol == pytest.approx(1.0, abs=1e-5)
        assert r_un == pytest.approx((s - 1.0) / s, abs=1e-5)


def test_front_value_at_zero():
    # the polarity profile crosses its switching threshold at z = 0
    for family in (WaveFamily.S1, WaveFamily.S2):
        p = ModelParams(kappa=1.0, alpha=0.3)
        st_ = profile(family, p, 0.0)
        assert st_.A == pytest.approx(p.alpha, abs=1e-9)


def test_flux_relation_holds_pointwise():
    for family in (WaveFamily.S1, WaveFamily.S3):
        p = ModelParams(kappa=2.0, alpha=0.3)
        w = make_wave(family, p)
        z = np.linspace(-10, 10, 401)
        c = flux_constant(family, w.speed)
        assert np.allclose(w.r_at(z) * (w.v_at(z) - w.speed), c, atol=1e-9)


def test_flux_constant_families():
    assert flux_constant(WaveFamily.S1, -2.0) == pytest.approx(2.0)
    assert flux_constant(WaveFamily.S2, 2.0) == pytest.approx(-2.0)
    assert flux_constant(WaveFamily.S3, 1.5) == pytest.approx(-0.5)
    assert flux_constant(WaveFamily.S4, 0.5) == pytest.approx(0.5)


def test_ode_residual_spot_check():
    """Central-difference derivative of the profile matches the ODE
    right-hand side away from the front corner."""
    p = ModelParams(kappa=1.0, alpha=0.2)
    w = make_wave(WaveFamily.S1, p)
    h = 1e-5
    for z in (-3.0, -1.0, -0.4, 0.4, 2.0):
        dR = (w.r_at(z + h) - w.r_at(z - h)) / (2 * h)
        dA = (w.a_at(z + h) - w.a_at(z - h)) / (2 * h)
        rhs = travelling_wave_rhs(
            TravellingWaveState(float(w.r_at(z)), float(w.a_at(z))),
            p, w.speed, flux=w.flux)
        assert dR == pytest.approx(rhs[0], abs=1e-7)
        assert dA == pytest.approx(rhs[1], abs=1e-7)


# -------------------------------------------------------- transformations

def test_t1_maps_s1_to_s2():
    p = ModelParams(kappa=1.0, alpha=0.2)
    w2 = apply_T1(make_wave(WaveFamily.S1, p))
    ref = make_wave(WaveFamily.S2, p)
    assert w2.family is WaveFamily.S2
    assert w2.speed == pytest.approx(ref.speed)
    z = np.linspace(-15, 15, 301)
    assert np.max(np.abs(w2.r_at(z) - ref.r_at(z))) < 1e-6
    assert np.max(np.abs(w2.a_at(z) - ref.a_at(z))) < 1e-6


def test_t1_involution():
    p = ModelParams(kappa=1.0, alpha=0.2)
    w = make_wave(WaveFamily.S1, p)
    back = apply_T1(apply_T1(w))
    z = np.linspace(-12, 12, 201)
    assert np.max(np.abs(back.r_at(z) - w.r_at(z))) < 1e-6
    assert np.max(np.abs(back.a_at(z) - w.a_at(z))) < 1e-6


def test_t2_maps_s1_to_s3():
    p = ModelParams(kappa=1.0, alpha=0.2)
    w3 = apply_T2_tilde(make_wave(WaveFamily.S1, p))
    ref = make_wave(WaveFamily.S3, ModelParams(kappa=1.0, alpha=0.8))
    assert w3.family is WaveFamily.S3
    assert w3.params.alpha == pytest.approx(0.8)
    assert w3.speed == pytest.approx(ref.speed)
    z = np.linspace(-15, 15, 301)
    assert np.max(np.abs(w3.r_at(z) - ref.r_at(z))) < 1e-9
    assert np.max(np.abs(w3.a_at(z) - ref.a_at(z))) < 1e-9


def test_t2_involution():
    p = ModelParams(kappa=1.0, alpha=0.3)
    w = make_wave(WaveFamily.S1, p)
    back = apply_T2_tilde(apply_T2_tilde(w))
    z = np.linspace(-12, 12, 201)
    assert np.max(np.abs(back.r_at(z) - w.r_at(z))) < 1e-12
    assert np.max(np.abs(back.a_at(z) - w.a_at(z))) < 1e-12


# -------------------------------------------------------------- motility

def test_motility_step_and_smooth():
    p = ModelParams(kappa=1.0, alpha=0.4)
    assert motility(0.2, p) == 0.0
    assert motility(0.6, p) == 1.0
    ps = ModelParams(kappa=1.0, alpha=0.4, m_eps=0.01)
    assert float(motility(0.4, ps)) == pytest.approx(0.5)
    # smooth derivative peaks at the threshold
    d = motility_deriv(np.array([0.3, 0.4, 0.5]), ps)
    assert d[1] > d[0] and d[1] > d[2]
    with pytest.raises(DomainError):
        motility_deriv(0.4, p)


def test_monotone_profiles():
    p = ModelParams(kappa=1.0, alpha=0.2)
    z = np.linspace(-20, 20, 2001)
    a = make_wave(WaveFamily.S1, p).a_at(z)
    assert np.all(np.diff(a) >= -1e-12)
