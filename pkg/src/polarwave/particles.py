"""Discrete spring-chain model of the migrating cell sheet.

Each cell carries a position x_i and a polarity a_i.  Velocity is the
active motility M(a_i) plus linear spring forces from the neighbours;
polarity relaxes toward the actual velocity.  Used to cross-validate
the continuum travelling waves on kymograph-style data.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import DomainError, ModelParams, motility


@dataclass(frozen=True)
class ParticleState:
    x: np.ndarray
    a: np.ndarray
    t: float = 0.0

    def ordered(self) -> bool:
        return bool(np.all(np.diff(self.x) > 0))


def resting_chain(n: int, rho0: float = 1.0, a0: float = 0.0) -> ParticleState:
    """Uniformly spaced chain at density rho0 with constant polarity."""
    x = np.arange(n, dtype=float) / rho0
    return ParticleState(x=x, a=np.full(n, float(a0)), t=0.0)


def particle_rhs(state: ParticleState, params: ModelParams, bc: str = "free",
                 rest_length: float = 1.0):
    """Velocities and polarity rates of the chain.

    dx_i = M(a_i) + kappa * (x_{i+1} - 2 x_i + x_{i-1}) in the interior;
    boundary cells feel a single spring with the given rest length
    (bc='free') or are held fixed (bc='clamped').  da_i = -a_i + dx_i.
    """
    x, a = state.x, state.a
    if x.size < 2:
        raise DomainError("particle chain needs at least 2 cells")
    k = params.kappa
    dx = np.empty_like(x)
    dx[1:-1] = k * (x[2:] - 2.0 * x[1:-1] + x[:-2])
    if bc == "free":
        dx[0] = k * (x[1] - x[0] - rest_length)
        dx[-1] = -k * (x[-1] - x[-2] - rest_length)
        dx += motility(a, params)
    elif bc == "clamped":
        dx[1:-1] += motility(a[1:-1], params)
        dx[0] = 0.0
        dx[-1] = 0.0
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    da = -a + dx
    return dx, da


def simulate_particles(initial: ParticleState, params: ModelParams, t_end: float,
                       dt: float | None = None, bc: str = "free",
                       rest_length: float = 1.0, snapshot_every: float = 0.5):
    """Fixed-step RK4 integration; returns a list of snapshots.

    Snapshots carry an `ordering_ok` flag in a parallel list when cells
    overtake each other (reported, never corrected).
    """
    if dt is None:
        dt = 1e-3 * min(1.0, 1.0 / params.kappa)
    if dt <= 0:
        raise DomainError("dt must be positive")

    def rhs(x, a):
        st = ParticleState(x=x, a=a)
        return particle_rhs(st, params, bc=bc, rest_length=rest_length)

    x, a = initial.x.copy(), initial.a.copy()
    t = initial.t
    snapshots = [ParticleState(x=x.copy(), a=a.copy(), t=t)]
    violations = []
    next_snap = t + snapshot_every
    n_steps = int(np.ceil((t_end - t) / dt))
    for _ in range(n_steps):
        step = min(dt, t_end - t)
        k1x, k1a = rhs(x, a)
        k2x, k2a = rhs(x + 0.5 * step * k1x, a + 0.5 * step * k1a)
        k3x, k3a = rhs(x + 0.5 * step * k2x, a + 0.5 * step * k2a)
        k4x, k4a = rhs(x + step * k3x, a + step * k3a)
        x = x + step / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        a = a + step / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
        t += step
        if t + 1e-12 >= next_snap or t >= t_end - 1e-12:
            snap = ParticleState(x=x.copy(), a=a.copy(), t=t)
            snapshots.append(snap)
            if not snap.ordered():
                violations.append(t)
            next_snap += snapshot_every
    return snapshots, violations


def front_position(state: ParticleState, alpha: float) -> float:
    """Position where the polarity profile crosses alpha, by linear
    interpolation between neighbouring cells; NaN without a crossing."""
    a, x = state.a, state.x
    d = a - alpha
    sign_change = np.nonzero(d[:-1] * d[1:] < 0)[0]
    if sign_change.size == 0:
        return float("nan")
    i = int(sign_change[0])
    w = d[i] / (d[i] - d[i + 1])
    return float(x[i] + w * (x[i + 1] - x[i]))


def measure_front_speed(snapshots, alpha: float, fit_fraction: float = 0.5) -> float:
    """Linear-regression slope of the front position over the last
    `fit_fraction` of the snapshots."""
    ts = np.array([s.t for s in snapshots])
    pos = np.array([front_position(s, alpha) for s in snapshots])
    ok = np.isfinite(pos)
    ts, pos = ts[ok], pos[ok]
    if ts.size < 3:
        raise DomainError("not enough front crossings to fit a speed")
    start = ts[0] + (1.0 - fit_fraction) * (ts[-1] - ts[0])
    sel = ts >= start
    coeff = np.polyfit(ts[sel], pos[sel], 1)
    return float(coeff[0])


def polarised_tail_chain(n: int, n_polarised: int, rho0: float = 1.0) -> ParticleState:
    """Chain at rest with the rightmost cells polarised (a = 1); seeds a
    leftward-running polarisation front."""
    st = resting_chain(n, rho0=rho0)
    a = st.a.copy()
    a[n - n_polarised:] = 1.0
    return replace(st, a=a)
