"""Evans function for the polarisation (S1) and fast depolarisation (S2)
waves, with argument-principle winding numbers over closed contours.

The point spectrum of the linearised operator consists of the zeros of
the Evans function D(lambda): the Wronskian of the solution shot from
the unstable direction at the far (resting) end of the wave and the two
closed-form solutions spanning the stable subspace at the other end,
all evaluated at the front position z = 0.  A wave is spectrally stable
when the only zero with non-negative real part is the translation
eigenvalue at lambda = 0.

The determinant grows like exp(mu * |z_start|), so shot vectors carry a
separate real log-scale (see ScaledComplex); rescaling by positive
reals leaves winding numbers untouched.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import pi

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .model import (DomainError, ModelParams, WaveFamily, make_wave,
                    motility_deriv)


class ContourThroughZero(Exception):
    """|D| nearly vanishes on the contour; the winding number is not
    defined there."""


class WindingResolutionError(Exception):
    """The accumulated phase did not settle to an integer multiple of
    2 pi within the refinement budget."""


class ShootingError(Exception):
    """The ODE integrator failed while propagating the unstable mode."""


@dataclass(frozen=True)
class ScaledComplex:
    """A complex value mantissa * exp(log_scale) with the mantissa kept
    in [0.5, 2] in magnitude (or exactly 0)."""
    mantissa: complex
    log_scale: float = 0.0

    def __post_init__(self):
        m = abs(self.mantissa)
        if m != 0.0 and not (0.5 <= m <= 2.0):
            raise DomainError("mantissa magnitude outside [0.5, 2]")

    @staticmethod
    def from_value(value: complex, log_scale: float = 0.0) -> "ScaledComplex":
        value = complex(value)
        m = abs(value)
        if m == 0.0:
            return ScaledComplex(0j, 0.0)
        shift = np.log(m)
        return ScaledComplex(value / m, log_scale + shift)

    def value(self) -> complex:
        return self.mantissa * np.exp(self.log_scale)

    def log_abs(self) -> float:
        if self.mantissa == 0:
            return -np.inf
        return self.log_scale + float(np.log(abs(self.mantissa)))

    def phase(self) -> float:
        return float(np.angle(self.mantissa))


@dataclass(frozen=True)
class Contour:
    """Closed counterclockwise path built from line and circular-arc
    pieces; `point(t)` maps t in [0, 1) around the path proportionally
    to arc length."""
    segments: tuple

    @staticmethod
    def c1(d_l: float = -0.05, r: float = 0.1) -> "Contour":
        """Lens around the origin: a vertical chord at Re = d_l closed
        by the right-hand arc of the circle |lambda| = r."""
        if not -r < d_l <= 0.0:
            raise DomainError("need -r < d_l <= 0 for a closed lens")
        h = np.sqrt(r * r - d_l * d_l)
        th = float(np.angle(d_l + 1j * h))
        return Contour((
            ("line", complex(d_l, h), complex(d_l, -h)),
            ("arc", 0j, r, -th, th),
        ))

    @staticmethod
    def c2(r_i: float = 0.1, r_o: float = 5.0) -> "Contour":
        """Boundary of the right-half-plane annulus r_i <= |lambda| <=
        r_o; excludes the origin."""
        if not 0.0 < r_i < r_o:
            raise DomainError("need 0 < r_i < r_o")
        return Contour((
            ("arc", 0j, r_o, -pi / 2.0, pi / 2.0),
            ("line", complex(0.0, r_o), complex(0.0, r_i)),
            ("arc", 0j, r_i, pi / 2.0, -pi / 2.0),
            ("line", complex(0.0, -r_i), complex(0.0, -r_o)),
        ))

    @staticmethod
    def polyline(points) -> "Contour":
        pts = [complex(p) for p in points]
        segs = tuple(("line", pts[i], pts[(i + 1) % len(pts)])
                     for i in range(len(pts)))
        return Contour(segs)

    def _lengths(self) -> np.ndarray:
        out = []
        for seg in self.segments:
            if seg[0] == "line":
                out.append(abs(seg[2] - seg[1]))
            else:
                _, _, r, th0, th1 = seg
                out.append(abs(th1 - th0) * r)
        return np.array(out)

    def point(self, t: float) -> complex:
        t = t % 1.0
        lengths = self._lengths()
        cum = np.cumsum(lengths) / lengths.sum()
        idx = int(np.searchsorted(cum, t, side="right"))
        idx = min(idx, len(self.segments) - 1)
        t0 = 0.0 if idx == 0 else cum[idx - 1]
        frac = (t - t0) / (cum[idx] - t0)
        seg = self.segments[idx]
        if seg[0] == "line":
            return seg[1] + frac * (seg[2] - seg[1])
        _, center, r, th0, th1 = seg
        th = th0 + frac * (th1 - th0)
        return center + r * np.exp(1j * th)

    def min_real(self) -> float:
        ts = np.linspace(0.0, 1.0, 512, endpoint=False)
        return min(self.point(t).real for t in ts)


@dataclass(frozen=True)
class EvansConfig:
    z_start: float | None = None   # resolved per family: -20 (S1), +20 (S2)
    ode_rel_tol: float = 1e-10
    ode_abs_tol: float = 1e-12
    renorm_threshold: float = 1e6
    contour_samples_init: int = 256
    max_depth: int = 20

    def resolve_z_start(self, family: WaveFamily) -> float:
        if self.z_start is not None:
            if family is WaveFamily.S1 and self.z_start >= 0:
                raise DomainError("S1 shoots from negative z")
            if family is WaveFamily.S2 and self.z_start <= 0:
                raise DomainError("S2 shoots from positive z")
            return self.z_start
        return -20.0 if family is WaveFamily.S1 else 20.0


_EVANS_FAMILIES = (WaveFamily.S1, WaveFamily.S2)


def _check_family(family: WaveFamily) -> None:
    if family not in _EVANS_FAMILIES:
        raise DomainError("Evans function implemented for S1 and S2")


@lru_cache(maxsize=32)
def _profile_cache(family: WaveFamily, params: ModelParams,
                   z_reach: float = 30.0, step: float = 1e-3):
    """Cubic splines of the varying-branch profile (R, A); the constant
    branch is closed-form.  Direct profile inversion per integrator
    stage would dominate the contour-scan cost."""
    wave = make_wave(family, params)
    if family is WaveFamily.S1:
        z = np.arange(-z_reach, 0.0 + step / 2, step)
    else:
        z = np.arange(0.0, z_reach + step / 2, step)
    return wave, CubicSpline(z, wave.r_at(z)), CubicSpline(z, wave.a_at(z))


def _profile_at(z: float, family: WaveFamily, params: ModelParams):
    """(R, A, varying?) at z with spline-cached varying branch."""
    wave, r_sp, a_sp = _profile_cache(family, params)
    s = wave.speed
    varying = z < 0.0 if family is WaveFamily.S1 else z > 0.0
    if varying:
        return float(r_sp(z)), float(a_sp(z)), True
    return s / (s - 1.0), float(wave.a_at(z)), False


def linearized_matrix(z: float, lam: complex, family: WaveFamily,
                      params: ModelParams, m_eps: float = 0.0) -> np.ndarray:
    """Coefficient matrix of the linearised travelling-wave system in
    the variables (delta rho, delta v, delta a).

    The motility derivative is a delta-distribution at z = 0; for the
    default m_eps = 0 its contribution is excluded here and applied
    separately as a jump (see jump_apply).  A positive m_eps instead
    includes the smoothed motility derivative, which serves as a
    brute-force oracle for the jump formula.
    """
    _check_family(family)
    lam = complex(lam)
    wave, _, _ = _profile_cache(family, params)
    s = wave.speed
    kappa = params.kappa
    R, A, varying = _profile_at(z, family, params)
    Rp = (s / kappa) * R * R * (1.0 - R) if varying else 0.0
    Ap = 1.0 + ((A - s) / s) * R
    if m_eps > 0.0:
        mp = motility_deriv(
            A, ModelParams(kappa=params.kappa, alpha=params.alpha,
                           m_eps=m_eps))
    else:
        mp = 0.0
    return np.array([
        [3.0 * Rp / R, -R**3 / kappa, mp * R**3 / kappa],
        [(2.0 * Rp * s - R * R * lam) / R**3,
         -Rp / R - R * s / kappa, mp * R * s / kappa],
        [0.0, (Ap - 1.0) * R / s, R * (lam + 1.0) / s],
    ], dtype=complex)


def _mode_eigenvalue(lam: complex, family: WaveFamily, s: float,
                     kappa: float) -> complex:
    """Spatial rate of the single unstable (S1) / stable-at-plus-infinity
    (S2) mode at the resting end of the wave."""
    root = np.sqrt(s * s + 4.0 * kappa * lam + 0j)
    sign = 1.0 if family is WaveFamily.S1 else -1.0
    return (-s + sign * root) / (2.0 * kappa)


def _mode_vector(mu: complex, lam: complex, s: float,
                 kappa: float) -> np.ndarray:
    """Eigenvector of the resting-end asymptotic matrix for eigenvalue
    mu (branch-consistent closed form, regular at lambda = 0)."""
    return np.array([-1.0 / (kappa * mu), 1.0, 1.0 / (lam + 1.0 - s * mu)],
                    dtype=complex)


def boundary_vectors_stable(lam: complex, family: WaveFamily,
                            params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form stable-subspace solutions at z = 0 on the polarised
    end of the wave (jump across the front already incorporated)."""
    _check_family(family)
    lam = complex(lam)
    wave, _, _ = _profile_cache(family, params)
    s, kappa, alpha = wave.speed, params.kappa, params.alpha
    root = np.sqrt(s * s + 4.0 * kappa * lam + 0j)
    # The X vector carries the front jump applied to (0, 0, 1); it has
    # the same closed form for both families (the decreasing polarity
    # of S2 flips both the jump factor and A'(0), cancelling out).
    x = np.array([-s**3 / ((s - 1.0)**2 * (alpha - 1.0) * kappa),
                  -s**2 / ((alpha - 1.0) * kappa), 1.0], dtype=complex)
    if family is WaveFamily.S1:
        y = np.array([s**2 * (-s + root) / ((s - 1.0)**2 * kappa),
                      2.0 * lam, 0.0], dtype=complex)
    else:
        y = np.array([-s**2 * (s + root) / ((s - 1.0)**2 * kappa),
                      2.0 * lam, 0.0], dtype=complex)
    return x, y


def jump_apply(vec: np.ndarray, family: WaveFamily,
               params: ModelParams) -> np.ndarray:
    """Transport a solution vector across the front discontinuity.

    The motility derivative integrates to a (sign-carrying) unit point
    mass at z = 0, so delta rho and delta v jump by an amount
    proportional to delta a(0) / A'(0).  For S1 (increasing polarity)
    this maps the right limit to the left limit; for S2 (decreasing
    polarity, which flips the sign of the point mass) it maps the left
    limit to the right limit.  The arithmetic is identical in both
    directions: subtract (delta a / A'(0)) (1/kappa) (R^3, R s, 0).
    """
    _check_family(family)
    wave, _, _ = _profile_cache(family, params)
    s, kappa, alpha = wave.speed, params.kappa, params.alpha
    r0 = s / (s - 1.0)
    ap0 = (alpha - 1.0) / (s - 1.0)
    factor = vec[2] / (ap0 * kappa)
    u = np.array([r0**3, r0 * s, 0.0], dtype=complex)
    return np.array(vec, dtype=complex) - factor * u


def shoot_unstable(lam: complex, family: WaveFamily, params: ModelParams,
                   config: EvansConfig = EvansConfig()):
    """Propagate the resting-end mode to z = 0.

    Returns (vector, log_scale): the solution direction at z = 0 with
    the positive real growth factor split off into log_scale so that
    determinant phases stay well conditioned.
    """
    _check_family(family)
    lam = complex(lam)
    wave, _, _ = _profile_cache(family, params)
    s, kappa = wave.speed, params.kappa
    mu = _mode_eigenvalue(lam, family, s, kappa)
    y = _mode_vector(mu, lam, s, kappa)
    log_scale = float(np.log(np.linalg.norm(y)))
    y = y / np.linalg.norm(y)

    z0 = config.resolve_z_start(family)

    _, r_sp, a_sp = _profile_cache(family, params)
    r_const = s / (s - 1.0)
    is_s1 = family is WaveFamily.S1

    def rhs(z, y):
        # inlined linearized_matrix @ y (without the delta term); the
        # matrix builder itself is kept for tests and the jump oracle
        varying = z < 0.0 if is_s1 else z > 0.0
        if varying:
            R = float(r_sp(z))
            A = float(a_sp(z))
            Rp = (s / kappa) * R * R * (1.0 - R)
        else:
            R = r_const
            A = float(wave.a_at(z))
            Rp = 0.0
        Ap = 1.0 + ((A - s) / s) * R
        d0 = 3.0 * Rp / R * y[0] - R**3 / kappa * y[1]
        d1 = ((2.0 * Rp * s - R * R * lam) / R**3 * y[0]
              + (-Rp / R - R * s / kappa) * y[1])
        d2 = (Ap - 1.0) * R / s * y[1] + R * (lam + 1.0) / s * y[2]
        return np.array([d0, d1, d2])

    # integrate in chunks, renormalizing between chunks
    n_chunks = max(1, int(np.ceil(abs(z0) / 5.0)))
    edges = np.linspace(z0, 0.0, n_chunks + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (a, b), y, method="DOP853",
                        rtol=config.ode_rel_tol, atol=config.ode_abs_tol)
        if not sol.success:
            raise ShootingError(
                f"integration failed at lambda={lam}, z in [{a}, {b}]: "
                f"{sol.message}")
        y = sol.y[:, -1]
        norm = float(np.linalg.norm(y))
        if norm > config.renorm_threshold or norm < 1.0 / config.renorm_threshold:
            y = y / norm
            log_scale += np.log(norm)
    return y, log_scale


def evans_det(lam: complex, family: WaveFamily, params: ModelParams,
              config: EvansConfig = EvansConfig()) -> ScaledComplex:
    """Evans function D(lambda) as a scale-split complex number.

    D is the Wronskian of the shot solution and the two closed-form
    stable solutions at z = 0; it vanishes exactly when they are
    linearly dependent, i.e. when lambda is an eigenvalue.
    """
    shot, log_scale = shoot_unstable(lam, family, params, config)
    x, y = boundary_vectors_stable(lam, family, params)
    det = complex(np.linalg.det(np.column_stack([shot, x, y])))
    return ScaledComplex.from_value(det, log_scale)


def _map_lambda(fn, items):
    n_threads = int(os.environ.get("POLARWAVE_THREADS", "1"))
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def winding_number(contour: Contour, family: WaveFamily, params: ModelParams,
                   config: EvansConfig = EvansConfig()) -> int:
    """Number of Evans-function zeros enclosed by the contour, via the
    argument principle.

    Samples D along the contour, then adaptively bisects segments until
    each phase increment is below pi/2; the total phase change must be
    an integer multiple of 2 pi within 0.05 of a turn.
    """
    n0 = config.contour_samples_init
    ts = list(np.linspace(0.0, 1.0, n0, endpoint=False))

    def eval_at(t: float) -> ScaledComplex:
        return evans_det(contour.point(t), family, params, config)

    ds = _map_lambda(eval_at, ts)
    samples = dict(zip(ts, ds))

    def check_exact_zero(t: float, d: ScaledComplex) -> None:
        if d.mantissa == 0:
            raise ContourThroughZero(
                f"D vanishes at lambda={contour.point(t)}")

    for t, d in samples.items():
        check_exact_zero(t, d)

    def wrapped(p0: float, p1: float) -> float:
        d = p1 - p0
        return (d + pi) % (2.0 * pi) - pi

    # refine cyclic segment list until all phase jumps are < pi/2
    order = sorted(samples)
    for _ in range(config.max_depth):
        refine = []
        for i, t0 in enumerate(order):
            t1 = order[(i + 1) % len(order)]
            p0 = samples[t0].phase()
            p1 = samples[t1].phase()
            if abs(wrapped(p0, p1)) >= pi / 2.0:
                mid = (t0 + (t1 if t1 > t0 else t1 + 1.0)) / 2.0 % 1.0
                refine.append((t0, mid, t1))
        if not refine:
            break
        mids = [m for _, m, _ in refine]
        for (t0, mid, t1), d in zip(refine, _map_lambda(eval_at, mids)):
            check_exact_zero(mid, d)
            # |D| varies smoothly along the contour; a midpoint orders
            # of magnitude below both interval ends means the contour
            # passes (numerically) through a zero of D
            floor = min(samples[t0].log_abs(), samples[t1].log_abs())
            if d.log_abs() < floor + np.log(1e-8):
                raise ContourThroughZero(
                    f"|D| collapses at lambda={contour.point(mid)} "
                    f"(log|D| {d.log_abs():.2f} vs neighbours {floor:.2f})")
            samples[mid] = d
        order = sorted(samples)
    else:
        raise WindingResolutionError(
            "phase jumps above pi/2 persist at maximum refinement depth")

    total = 0.0
    for i, t0 in enumerate(order):
        t1 = order[(i + 1) % len(order)]
        total += wrapped(samples[t0].phase(), samples[t1].phase())
    turns = total / (2.0 * pi)
    w = int(round(turns))
    if abs(turns - w) > 0.05:
        raise WindingResolutionError(
            f"accumulated phase {turns:.4f} turns is not close to an integer")
    return w


def evans_scan(path, family: WaveFamily, params: ModelParams,
               config: EvansConfig = EvansConfig(), samples: int = 256):
    """Evaluate D along a contour or an explicit sequence of complex
    points; returns a list of (lambda, mantissa, log_scale) rows."""
    if isinstance(path, Contour):
        lams = [path.point(t)
                for t in np.linspace(0.0, 1.0, samples, endpoint=False)]
    else:
        lams = [complex(p) for p in path]
    ds = _map_lambda(
        lambda lam: evans_det(lam, family, params, config), lams)
    return [(lam, d.mantissa, d.log_scale) for lam, d in zip(lams, ds)]
