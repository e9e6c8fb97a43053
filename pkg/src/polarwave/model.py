"""Closed-form travelling waves of the 1D cell migration model.

The model couples cell density rho, polarity a and velocity
v = M(a) - kappa * rho^-3 * rho_x, where M is a threshold motility
switching from 0 to 1 at polarity alpha.  Four wave families exist:

  S1  polarisation wave of a departing sheet   (speed s1 < 0)
  S2  polarisation wave of a colliding sheet   (speed s2 = -s1)
  S3  depolarisation wave, departing sheet     (speed s3 = 1 - s1 > 1)
  S4  depolarisation wave, colliding sheet     (speed s4 = 1 - s2)

All profiles are closed forms built from the monotone auxiliary
functions g(y) = 1/y + log(1/y - 1) on (0, 1) and
h(y) = 1/y + log(1 - 1/y) on (1, inf) and their numerical inverses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class PhysicalityError(ValueError):
    """Wave parameters violate the impenetrability of single cells."""


class NonMonotoneMapError(ValueError):
    """The coordinate change of T1 is not monotone on the requested range."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters: contractility kappa, threshold polarity alpha,
    and the smoothing width m_eps of the motility step (0 = exact step)."""

    kappa: float
    alpha: float
    m_eps: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.m_eps < 0:
            raise DomainError(f"m_eps must be nonnegative, got {self.m_eps}")


class WaveFamily(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"


@dataclass(frozen=True)
class TravellingWaveState:
    R: float
    A: float

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"density R must be positive, got {self.R}")


def motility(a, params: ModelParams):
    """Polarity-dependent motility: step at alpha, or its logistic smoothing."""
    a = np.asarray(a, dtype=float)
    if params.m_eps == 0.0:
        out = np.where(a > params.alpha, 1.0, 0.0)
    else:
        out = 1.0 / (1.0 + np.exp(-(a - params.alpha) / params.m_eps))
    return out if out.ndim else float(out)


def motility_deriv(a, params: ModelParams):
    """Derivative of the smoothed motility; requires m_eps > 0."""
    if params.m_eps <= 0:
        raise DomainError("motility derivative needs a positive smoothing width")
    a = np.asarray(a, dtype=float)
    m = 1.0 / (1.0 + np.exp(-(a - params.alpha) / params.m_eps))
    out = m * (1.0 - m) / params.m_eps
    return out if out.ndim else float(out)


def g_fn(y):
    """g(y) = 1/y + log(1/y - 1), strictly decreasing on (0, 1)."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0) or np.any(y >= 1):
        raise DomainError("g_fn requires y in (0, 1)")
    out = 1.0 / y + np.log(1.0 / y - 1.0)
    return out if out.ndim else float(out)


def h_fn(y):
    """h(y) = 1/y + log(1 - 1/y), strictly decreasing on (1, inf)."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 1):
        raise DomainError("h_fn requires y > 1")
    out = 1.0 / y + np.log(1.0 - 1.0 / y)
    return out if out.ndim else float(out)


def g_inv(c, tol: float = 1e-12, max_iter: int = 200):
    """Inverse of g on (0, 1), any real c.

    Substituting u = 1/y - 1 turns g(y) = c into u + log(u) = c - 1,
    solved in v = log(u) by Newton iteration on the convex function
    e^v + v.  Vectorised; residual |g(y) - c| <= tol.
    """
    c = np.asarray(c, dtype=float)
    t = c - 1.0
    # e^v + v = t; exact for t -> +-inf, Newton handles the middle
    v = np.where(t > 1.0, np.log(np.maximum(t, 1e-300)), t)
    for _ in range(max_iter):
        ev = np.exp(v)
        f = ev + v - t
        v = v - f / (ev + 1.0)
        if np.all(np.abs(f) <= 0.1 * tol):
            break
    y = 1.0 / (1.0 + np.exp(v))
    return y if y.ndim else float(y)


def h_inv(c, tol: float = 1e-12, max_iter: int = 200):
    """Inverse of h on (1, inf); requires c < 0 (the range of h).

    With w = 1/y and p = -log(1 - w), h(y) = c becomes
    e^-p + p = 1 - c with p > 0, again solved by guarded Newton.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c >= 0):
        raise DomainError("h_inv requires c < 0 (range of h)")
    t = 1.0 - c  # > 1
    # small-p expansion e^-p + p ~ 1 + p^2/2 seeds the flat region near c=0
    p = np.where(t < 1.5, np.sqrt(2.0 * (t - 1.0)), t)
    for _ in range(max_iter):
        ep = np.exp(-p)
        f = ep + p - t
        dp = f / (1.0 - ep)
        p = np.maximum(p - dp, 0.5 * p)  # keep p > 0
        if np.all(np.abs(f) <= 0.1 * tol):
            break
    y = 1.0 / (1.0 - np.exp(-p))
    return y if y.ndim else float(y)


def wave_speed(family: WaveFamily, params: ModelParams) -> float:
    """Closed-form wave speed of the given family."""
    k, al = params.kappa, params.alpha
    root_pol = math.sqrt(k * (1.0 / al - 1.0))
    root_dep = math.sqrt(k * (1.0 / (1.0 - al) - 1.0))
    return {
        WaveFamily.S1: -root_pol,
        WaveFamily.S2: root_pol,
        WaveFamily.S3: 1.0 + root_dep,
        WaveFamily.S4: 1.0 - root_dep,
    }[family]


def flux_constant(family: WaveFamily, s: float) -> float:
    """Mass-flux constant c with R (V - s) = c along the wave.

    S1/S2 connect to the resting state (R, A, V) = (1, 0, 0) giving
    c = -s; S3/S4 connect to the moving state (1, 1, 1) giving c = 1 - s.
    """
    if family in (WaveFamily.S1, WaveFamily.S2):
        return -s
    return 1.0 - s


@dataclass(frozen=True)
class Validity:
    physical: bool
    reason: str = ""


def validate_physical(family: WaveFamily, params: ModelParams) -> Validity:
    """S2 needs s2 > 1 and S4 needs s4 < 0; S1 and S3 always exist."""
    s = wave_speed(family, params)
    if family is WaveFamily.S2 and not s > 1.0:
        return Validity(False, f"S2 requires s2 > 1 (cell impenetrability); got s2 = {s:.6g}")
    if family is WaveFamily.S4 and not s < 0.0:
        return Validity(False, f"S4 requires s4 < 0 (cell impenetrability); got s4 = {s:.6g}")
    return Validity(True)


@dataclass(frozen=True)
class WaveSolution:
    """A travelling wave: family tag, speed and profile evaluators.

    The evaluators accept scalars or arrays of the wave coordinate z.
    """

    family: WaveFamily
    params: ModelParams
    speed: float
    r_at: Callable = field(repr=False)
    a_at: Callable = field(repr=False)
    flux: float = 0.0

    def v_at(self, z):
        """Velocity from the flux relation V = s + c / R."""
        r = self.r_at(z)
        return self.speed + self.flux / r

    def sample(self, z):
        """Arrays (z, R, A, V) on the given grid."""
        z = np.asarray(z, dtype=float)
        return z, self.r_at(z), self.a_at(z), self.v_at(z)


def _piecewise(z, mask_fn, varying_fn, const_val):
    """Evaluate a profile that is `const_val` off the mask and
    `varying_fn(z)` on it; scalar-safe."""
    z1 = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.full(z1.shape, const_val)
    m = mask_fn(z1)
    if np.any(m):
        out[m] = varying_fn(z1[m])
    return out if np.ndim(z) else float(out[0])


def _a_exp_branch(z, mask_fn, on_fn, off_fn):
    """Two-branch polarity profile; scalar-safe."""
    z1 = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty(z1.shape)
    m = mask_fn(z1)
    if np.any(m):
        out[m] = np.asarray(on_fn(z1[m]))
    if np.any(~m):
        out[~m] = np.asarray(off_fn(z1[~m]))
    return out if np.ndim(z) else float(out[0])


def _require_physical(family: WaveFamily, params: ModelParams):
    v = validate_physical(family, params)
    if not v.physical:
        raise PhysicalityError(v.reason)


def make_wave(family: WaveFamily, params: ModelParams) -> WaveSolution:
    """Construct the closed-form wave of a family; raises PhysicalityError
    in the parameter regimes where the mathematical solution would force
    cells through each other."""
    _require_physical(family, params)
    k, al = params.kappa, params.alpha
    s = wave_speed(family, params)

    if family is WaveFamily.S1:
        mc = g_fn(s / (s - 1.0))
        r_inf = s / (s - 1.0)

        def r_at(z):
            return _piecewise(z, lambda zz: zz < 0,
                              lambda zz: g_inv(mc - zz * s / k), r_inf)

        def a_at(z):
            return _a_exp_branch(
                z, lambda zz: zz < 0,
                lambda zz: s * al * (1.0 - 1.0 / np.asarray(r_at(zz))),
                lambda zz: 1.0 + (al - 1.0) * np.exp(zz / (s - 1.0)))

    elif family is WaveFamily.S2:
        nc = h_fn(s / (s - 1.0))
        r_inf = s / (s - 1.0)

        def r_at(z):
            return _piecewise(z, lambda zz: zz >= 0,
                              lambda zz: h_inv(nc - zz * s / k), r_inf)

        def a_at(z):
            return _a_exp_branch(
                z, lambda zz: zz >= 0,
                lambda zz: s * al * (1.0 - 1.0 / np.asarray(r_at(zz))),
                lambda zz: 1.0 + (al - 1.0) * np.exp(zz / (s - 1.0)))

    elif family is WaveFamily.S3:
        mc = g_fn((s - 1.0) / s)
        r_rest = (s - 1.0) / s

        def r_at(z):
            return _piecewise(z, lambda zz: zz >= 0,
                              lambda zz: g_inv(mc + (1.0 - s) * zz / k), r_rest)

        def a_at(z):
            return _a_exp_branch(
                z, lambda zz: zz >= 0,
                lambda zz: 1.0 + (1.0 - s) * (1.0 - al) * (1.0 / np.asarray(r_at(zz)) - 1.0),
                lambda zz: al * np.exp(zz / s))

    else:  # S4
        nc = h_fn((s - 1.0) / s)
        r_rest = (s - 1.0) / s

        def r_at(z):
            return _piecewise(z, lambda zz: zz < 0,
                              lambda zz: h_inv(nc + (1.0 - s) * zz / k), r_rest)

        def a_at(z):
            return _a_exp_branch(
                z, lambda zz: zz < 0,
                lambda zz: 1.0 + (1.0 - s) * (1.0 - al) * (1.0 / np.asarray(r_at(zz)) - 1.0),
                lambda zz: al * np.exp(zz / s))

    return WaveSolution(
        family=family, params=params, speed=s, r_at=r_at, a_at=a_at,
        flux=flux_constant(family, s),
    )


def profile(family: WaveFamily, params: ModelParams, z: float) -> TravellingWaveState:
    """Pointwise (R, A) of a family's closed-form profile."""
    w = make_wave(family, params)
    return TravellingWaveState(R=float(w.r_at(z)), A=float(w.a_at(z)))


def velocity_profile(solution: WaveSolution, z):
    return solution.v_at(z)


def travelling_wave_rhs(state: TravellingWaveState, params: ModelParams, s: float,
                        flux: float | None = None):
    """Right-hand side (R', A') of the travelling-wave ODE.

    The default flux = -s reproduces the system with the resting state
    (1, 0) prescribed at z = -inf (families S1/S2); S3/S4 waves satisfy
    the analogous system with flux = 1 - s, obtained by passing it in.
    """
    if s == 0.0:
        raise DomainError("travelling wave ODE is singular at s = 0")
    c = -s if flux is None else flux
    R, A = state.R, state.A
    m = motility(A, params)
    dR = R * R / params.kappa * ((m - s) * R - c)
    V = s + c / R
    dA = (V - A) * R / c
    return dR, dA


_T1_FAMILY = {WaveFamily.S1: WaveFamily.S2, WaveFamily.S2: WaveFamily.S1,
              WaveFamily.S3: WaveFamily.S4, WaveFamily.S4: WaveFamily.S3}
_T2_FAMILY = {WaveFamily.S1: WaveFamily.S3, WaveFamily.S3: WaveFamily.S1,
              WaveFamily.S2: WaveFamily.S4, WaveFamily.S4: WaveFamily.S2}


def apply_T1(solution: WaveSolution, z_max: float = 40.0, n_quad: int = 160001) -> WaveSolution:
    """Transformation T1: Abar = A, 1/R + 1/Rbar = 2, sbar = -s, with the
    coordinate change zbar(z) = int_0^z (1 - 2 R).

    The integral is evaluated by trapezoid quadrature on [-z_max, z_max]
    with linear tail extensions from the constant asymptotic densities.
    Raises NonMonotoneMapError if R crosses 1/2 on the sampled range.
    """
    z = np.linspace(-z_max, z_max, n_quad)
    r = np.asarray(solution.r_at(z))
    if np.any(np.abs(1.0 - 2.0 * r) < 1e-12) or (np.any(r > 0.5) and np.any(r < 0.5)):
        raise NonMonotoneMapError("R crosses 1/2: the T1 coordinate map is not monotone")
    integrand = 1.0 - 2.0 * r
    zbar = np.concatenate([[0.0], cumulative_trapezoid(integrand, z)])
    i0 = n_quad // 2  # z grid is symmetric, z[i0] = 0
    zbar = zbar - zbar[i0]

    sign = 1.0 if integrand[0] > 0 else -1.0  # orientation of zbar(z)
    zb_sorted = sign * zbar  # increasing along z whichever the orientation
    if np.any(np.diff(zb_sorted) <= 0):
        raise NonMonotoneMapError("T1 coordinate map is not strictly monotone on the sample")
    z_sorted = z

    slope_lo = 1.0 - 2.0 * float(solution.r_at(z_sorted[0]))
    slope_hi = 1.0 - 2.0 * float(solution.r_at(z_sorted[-1]))

    def z_of_zbar(zb):
        zb = sign * np.asarray(zb, dtype=float)
        out = np.interp(zb, zb_sorted, z_sorted)
        lo = zb < zb_sorted[0]
        hi = zb > zb_sorted[-1]
        out = np.where(lo, z_sorted[0] + (zb - zb_sorted[0]) / (sign * slope_lo), out)
        out = np.where(hi, z_sorted[-1] + (zb - zb_sorted[-1]) / (sign * slope_hi), out)
        return out

    def r_at(zb, sol=solution):
        r = np.asarray(sol.r_at(z_of_zbar(zb)))
        out = r / (2.0 * r - 1.0)
        return out if out.ndim else float(out)

    def a_at(zb, sol=solution):
        return sol.a_at(z_of_zbar(zb))

    new_family = _T1_FAMILY[solution.family]
    sbar = -solution.speed
    return WaveSolution(family=new_family, params=solution.params, speed=sbar,
                        r_at=r_at, a_at=a_at, flux=flux_constant(new_family, sbar))


def apply_T2_tilde(solution: WaveSolution) -> WaveSolution:
    """Transformation T2 restricted to travelling waves: Abar = 1 - A,
    Rbar = R, sbar = 1 - s, alphabar = 1 - alpha.

    The underlying space-time map x -> t - x reverses the wave
    coordinate, so profiles are evaluated at zbar = -z.
    """
    new_params = replace(solution.params, alpha=1.0 - solution.params.alpha)
    new_family = _T2_FAMILY[solution.family]
    sbar = 1.0 - solution.speed

    def r_at(zb, sol=solution):
        return sol.r_at(-np.asarray(zb, dtype=float))

    def a_at(zb, sol=solution):
        out = 1.0 - np.asarray(sol.a_at(-np.asarray(zb, dtype=float)))
        return out if out.ndim else float(out)

    return WaveSolution(family=new_family, params=new_params, speed=sbar,
                        r_at=r_at, a_at=a_at, flux=flux_constant(new_family, sbar))
