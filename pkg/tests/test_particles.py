"""Spring-chain (particle) dynamics."""

import numpy as np
import pytest

from polarwave import (ModelParams, WaveFamily, make_wave,
                       measure_front_speed, particle_rhs,
                       polarised_tail_chain, resting_chain,
                       simulate_particles)
from polarwave.particles import ParticleState, front_position


def test_resting_chain_is_equilibrium():
    p = ModelParams(kappa=1.0, alpha=0.4)
    st = resting_chain(50)
    dx, da = particle_rhs(st, p)
    assert np.allclose(dx, 0.0)
    assert np.allclose(da, 0.0)


def test_resting_chain_stays_at_rest():
    p = ModelParams(kappa=1.0, alpha=0.4)
    snaps, violations = simulate_particles(resting_chain(30), p, t_end=2.0)
    assert violations == []
    assert np.allclose(snaps[-1].x, snaps[0].x, atol=1e-12)
    assert np.allclose(snaps[-1].a, 0.0, atol=1e-12)


def test_fully_polarised_chain_translates():
    """A uniformly polarised chain above threshold moves rigidly at the
    single-cell speed M = 1."""
    p = ModelParams(kappa=1.0, alpha=0.4)
    st = ParticleState(x=np.arange(40, dtype=float),
                       a=np.ones(40), t=0.0)
    snaps, _ = simulate_particles(st, p, t_end=3.0)
    disp = snaps[-1].x - st.x
    assert np.allclose(disp, snaps[-1].t, atol=1e-6)
    assert np.allclose(np.diff(snaps[-1].x), 1.0, atol=1e-9)


def test_front_position_interpolates():
    st = ParticleState(x=np.arange(5, dtype=float),
                       a=np.array([0.0, 0.0, 0.5, 1.0, 1.0]), t=0.0)
    assert front_position(st, 0.25) == pytest.approx(1.5)
    assert np.isnan(front_position(st, -0.5))


def test_polarisation_front_speed_approaches_continuum():
    """The polarisation front of a long chain travels near the
    continuum wave speed; agreement improves with chain length."""
    p = ModelParams(kappa=1.0, alpha=0.2)
    s_exact = make_wave(WaveFamily.S1, p).speed
    errs = []
    for n in (100, 300):
        st = polarised_tail_chain(n, n // 4)
        snaps, violations = simulate_particles(st, p, t_end=10.0,
                                               snapshot_every=0.25)
        assert violations == []
        errs.append(abs(measure_front_speed(snaps, p.alpha) - s_exact))
    assert errs[-1] < 0.35 * abs(s_exact)
    assert errs[1] <= errs[0] + 0.02
