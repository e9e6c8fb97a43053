"""Evans-function machinery: scaling arithmetic, contours, shooting,
the front jump, and winding numbers."""

import numpy as np
import pytest

from polarwave import (Contour, EvansConfig, ModelParams, ScaledComplex,
                       WaveFamily, asymptotic_matrix, evans_det,
                       jump_apply, linearized_matrix, shoot_unstable,
                       winding_number)
from polarwave.evans import (_mode_eigenvalue, _mode_vector,
                             boundary_vectors_stable)
from polarwave.model import DomainError

P = ModelParams(kappa=1.0, alpha=0.2)
S = -2.0


# ----------------------------------------------------------- ScaledComplex

def test_scaled_complex_roundtrip():
    for v in (1.0 + 2.0j, 1e-200 - 3e-201j, 0.0j):
        sc = ScaledComplex.from_value(v)
        assert sc.value() == pytest.approx(v)


def test_scaled_complex_mantissa_invariant():
    sc = ScaledComplex.from_value(3.7e120 + 1.1e120j)
    assert 0.5 <= abs(sc.mantissa) <= 2.0
    assert sc.log_abs() == pytest.approx(np.log(abs(3.7e120 + 1.1e120j)))


def test_scaled_complex_phase():
    sc = ScaledComplex.from_value(-1e-300j, log_scale=50.0)
    assert sc.phase() == pytest.approx(-np.pi / 2)


# ----------------------------------------------------------------- contours

def test_c1_is_closed_and_encloses_origin():
    c = Contour.c1()
    assert c.point(0.0) == pytest.approx(c.point(1.0 - 1e-12), abs=1e-6)
    ts = np.linspace(0, 1, 1000, endpoint=False)
    pts = np.array([c.point(t) for t in ts])
    # winding of the path itself around 0 is one full turn
    ang = np.unwrap(np.angle(pts))
    assert (ang[-1] - ang[0]) / (2 * np.pi) == pytest.approx(1.0, abs=0.01)
    assert c.min_real() == pytest.approx(-0.05, abs=1e-6)


def test_c2_excludes_origin():
    c = Contour.c2()
    ts = np.linspace(0, 1, 2000, endpoint=False)
    pts = np.array([c.point(t) for t in ts])
    assert np.min(np.abs(pts)) >= 0.1 - 1e-9
    assert np.max(np.abs(pts)) <= 5.0 + 1e-9
    assert np.min(pts.real) >= -1e-9
    ang = np.unwrap(np.angle(pts - (-0.1 + 0j)))  # any interiorless point
    # the annulus boundary does not wind around the origin
    ang0 = np.unwrap(np.angle(pts + 1e-30))
    assert abs(ang0[-1] - ang0[0]) < 2 * np.pi


def test_contour_validation():
    with pytest.raises(DomainError):
        Contour.c1(d_l=-0.2, r=0.1)
    with pytest.raises(DomainError):
        Contour.c2(r_i=1.0, r_o=0.5)


# ------------------------------------------------------- shooting and jump

def test_mode_vector_is_eigenvector():
    lam = 0.3 + 0.4j
    mu = _mode_eigenvalue(lam, WaveFamily.S1, S, P.kappa)
    v = _mode_vector(mu, lam, S, P.kappa)
    m = asymptotic_matrix("minus", WaveFamily.S1, lam, S, P.kappa)
    assert np.linalg.norm(m @ v - mu * v) < 1e-12


def test_mode_vector_regular_at_zero():
    mu = _mode_eigenvalue(0.0, WaveFamily.S1, S, P.kappa)
    v = _mode_vector(mu, 0.0, S, P.kappa)
    assert np.all(np.isfinite(v.view(float)))


def test_jump_maps_unit_polarity_to_x_vector():
    """Applying the front jump to (0, 0, 1) reproduces the closed-form
    stable boundary vector X."""
    x, _ = boundary_vectors_stable(0.3, WaveFamily.S1, P)
    jumped = jump_apply(np.array([0.0, 0.0, 1.0]), WaveFamily.S1, P)
    assert np.linalg.norm(jumped - x) < 1e-12


def _transport(z0, z1, v, lam, m_eps):
    """Integrate the linearisation from z0 to z1 (m_eps = 0 keeps only
    the smooth coefficients; m_eps > 0 adds the mollified front term)."""
    from scipy.integrate import solve_ivp

    def rhs(z, y):
        w = y[:3] + 1j * y[3:]
        dw = linearized_matrix(z, lam, WaveFamily.S1, P, m_eps=m_eps) @ w
        return np.concatenate([dw.real, dw.imag])

    sol = solve_ivp(rhs, (z0, z1), np.concatenate([v.real, v.imag]),
                    rtol=1e-11, atol=1e-13, method="DOP853")
    return sol.y[:3, -1] + 1j * sol.y[3:, -1]


def test_jump_against_mollified_delta():
    """Sharpening a mollified front term converges, at first order in
    the width, to smooth transport composed with the algebraic jump."""
    lam = 0.2 + 0.1j
    v_right = np.array([0.1 + 0.05j, -0.2j, 1.0 + 0.3j], dtype=complex)
    prev = None
    for m_eps in (1e-2, 1e-3, 1e-4):
        span = 60.0 * m_eps
        got = _transport(span, -span, v_right, lam, m_eps)
        # reference: smooth transport to 0+, jump, smooth transport out
        at_zero = _transport(span, 0.0, v_right, lam, 0.0)
        target = _transport(0.0, -span,
                            jump_apply(at_zero, WaveFamily.S1, P),
                            lam, 0.0)
        err = np.linalg.norm(got - target) / np.linalg.norm(target)
        assert err < 5.0 * m_eps
        if prev is not None:
            assert err < prev
        prev = err


def test_shot_vector_schwarz_symmetry():
    """D(conj lambda) = conj D(lambda) for this real system."""
    lam = 0.4 + 0.7j
    d1 = evans_det(lam, WaveFamily.S1, P)
    d2 = evans_det(np.conj(lam), WaveFamily.S1, P)
    aligned = d2.mantissa * np.exp(d2.log_scale - d1.log_scale)
    assert abs(aligned - np.conj(d1.mantissa)) < 1e-8 * abs(d1.mantissa)


def test_shoot_start_insensitivity():
    """Starting further out in the tail leaves the shot direction (and
    hence the zero set of D) unchanged; the amplitude picks up exactly
    the extra tail growth exp(delta_z * mu)."""
    lam = 0.3 + 0.2j
    v1, _ = shoot_unstable(lam, WaveFamily.S1, P)
    v2, _ = shoot_unstable(lam, WaveFamily.S1, P,
                           EvansConfig(z_start=-25.0))
    v1 = v1 / np.linalg.norm(v1)
    v2 = v2 / np.linalg.norm(v2)
    phase = v1[0] / v2[0]
    assert np.linalg.norm(v1 - v2 * phase / abs(phase)) < 1e-8

    mu = _mode_eigenvalue(lam, WaveFamily.S1, S, P.kappa)
    d1 = evans_det(lam, WaveFamily.S1, P)
    d2 = evans_det(lam, WaveFamily.S1, P, EvansConfig(z_start=-25.0))
    ratio = (d2.mantissa / d1.mantissa) * np.exp(d2.log_scale - d1.log_scale)
    assert ratio == pytest.approx(np.exp(5.0 * mu), rel=1e-8)


def test_z_start_sign_validation():
    with pytest.raises(DomainError):
        shoot_unstable(0.3, WaveFamily.S1, P, EvansConfig(z_start=5.0))


# ---------------------------------------------------------------- windings

def test_translation_eigenvalue_at_origin():
    d0 = evans_det(0.0, WaveFamily.S1, P)
    d_ref = evans_det(0.1, WaveFamily.S1, P)
    rel = abs(d0.mantissa) * np.exp(d0.log_scale - d_ref.log_scale) \
        / abs(d_ref.mantissa)
    assert rel < 1e-6


def test_winding_reference_case():
    assert winding_number(Contour.c1(), WaveFamily.S1, P) == 1
