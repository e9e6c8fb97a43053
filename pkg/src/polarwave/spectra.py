"""Essential and absolute spectra of the linearised travelling-wave operator.

Provides the constant asymptotic matrices of the linearisation far from
the front, their spatial eigenvalues in closed form, Morse indices,
Fredholm borders (essential spectrum), the absolute spectrum (closed
form plus an independent numeric oracle based on branch-tracked
eigenvalue gaps), and the ideal exponential weights that shift the
essential spectrum maximally to the left.

Conventions: the spectral parameter is a Python/NumPy complex number;
all square roots use the principal branch, so every closed form is
analytic to the right of the branch point at -s^2/(4 kappa).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .model import DomainError, WaveFamily


class OnBorderError(Exception):
    """A spatial eigenvalue sits on the imaginary axis: the Morse index
    is not defined there."""


_SIDES = ("minus", "plus")


def _check_side(side: str) -> None:
    if side not in _SIDES:
        raise DomainError(f"side must be one of {_SIDES}, got {side!r}")


def _check_speed(s: float) -> None:
    if s == 0.0 or s == 1.0:
        raise DomainError("wave speed must differ from 0 and 1")


def asymptotic_matrix(side: str, family: WaveFamily, lam: complex,
                      s: float, kappa: float) -> np.ndarray:
    """Constant limit of the linearisation matrix far from the front.

    For the polarisation wave (S1) the minus side is the resting state
    and the plus side the polarised state.  For the fast depolarisation
    wave (S2) the roles of the two sides are exchanged, so its matrices
    are the S1 ones with the sides swapped.
    """
    _check_side(side)
    _check_speed(s)
    if family is WaveFamily.S2:
        side = "plus" if side == "minus" else "minus"
    elif family is not WaveFamily.S1:
        raise DomainError("asymptotic matrices implemented for S1 and S2")
    lam = complex(lam)
    if side == "minus":
        return np.array([
            [0.0, -1.0 / kappa, 0.0],
            [-lam, -s / kappa, 0.0],
            [0.0, -1.0 / s, (lam + 1.0) / s],
        ], dtype=complex)
    return np.array([
        [0.0, -s**3 / (kappa * (s - 1.0)**3), 0.0],
        [(1.0 / s - 1.0) * lam, s**2 / (kappa * (1.0 - s)), 0.0],
        [0.0, 1.0 / (1.0 - s), (lam + 1.0) / (s - 1.0)],
    ], dtype=complex)


def spatial_eigenvalues(side: str, lam: complex, s: float,
                        kappa: float) -> tuple[complex, complex, complex]:
    """Closed-form eigenvalues (mu1, mu2, mu3) of the asymptotic matrix.

    The plus-side values are exactly s/(s-1) times the minus-side ones.
    """
    _check_side(side)
    _check_speed(s)
    lam = complex(lam)
    root = np.sqrt(s * s + 4.0 * kappa * lam + 0j)
    mu1 = (lam + 1.0) / s
    mu2 = (-s + root) / (2.0 * kappa)
    mu3 = (-s - root) / (2.0 * kappa)
    if side == "plus":
        f = s / (s - 1.0)
        mu1, mu2, mu3 = f * mu1, f * mu2, f * mu3
    return complex(mu1), complex(mu2), complex(mu3)


def morse_index(side: str, lam: complex, s: float, kappa: float,
                axis_tol: float = 1e-10) -> int:
    """Dimension of the unstable subspace of the asymptotic matrix.

    Raises OnBorderError when a spatial eigenvalue lies within
    `axis_tol` of the imaginary axis (essential-spectrum border)."""
    mus = spatial_eigenvalues(side, lam, s, kappa)
    res = np.real(mus)
    if np.any(np.abs(res) < axis_tol):
        raise OnBorderError(
            f"spatial eigenvalue on the imaginary axis at lambda={lam}")
    return int(np.count_nonzero(res > 0.0))


@dataclass(frozen=True)
class SpectrumCurve:
    """A labelled sampled curve in the complex spectral plane."""
    label: str
    points: np.ndarray


@dataclass(frozen=True)
class AbsSpectrum:
    """Absolute spectrum: a real segment plus two symmetric branches."""
    segment: SpectrumCurve
    branch_plus: SpectrumCurve
    branch_minus: SpectrumCurve

    def all_points(self) -> np.ndarray:
        return np.concatenate([self.segment.points,
                               self.branch_plus.points,
                               self.branch_minus.points])


def fredholm_borders(s: float, kappa: float,
                     mu_range: tuple[float, float] = (-5.0, 5.0),
                     samples: int = 401) -> tuple[SpectrumCurve, SpectrumCurve]:
    """Essential-spectrum borders traced by the real spatial frequency mu:
    the line lambda = -1 + i mu s and the parabola lambda = -mu^2 kappa
    + i mu s."""
    _check_speed(s)
    if samples < 2:
        raise DomainError("need at least 2 samples")
    mu = np.linspace(mu_range[0], mu_range[1], samples)
    line = -1.0 + 1j * mu * s
    parabola = -mu * mu * kappa + 1j * mu * s
    return (SpectrumCurve("line-border", line),
            SpectrumCurve("parabola-border", parabola))


def branch_point(s: float, kappa: float) -> float:
    """Rightmost point of the absolute spectrum, -s^2/(4 kappa)."""
    return -s * s / (4.0 * kappa)


def _branch_im(lam1: np.ndarray, s: float, kappa: float) -> np.ndarray:
    return ((s * s + 2.0 * kappa * (1.0 + lam1))
            * np.sqrt(s * s + kappa * (1.0 + lam1)**2)
            / (s * s * np.sqrt(kappa)))


def absolute_spectrum_closed(s: float, kappa: float,
                             lam1_min: float = -8.0,
                             samples: int = 201) -> AbsSpectrum:
    """Closed-form absolute spectrum: the real segment
    [-(s^2+2 kappa)/(2 kappa), -s^2/(4 kappa)] joined at its left end by
    two branches symmetric about the real axis."""
    _check_speed(s)
    if s >= 0:
        raise DomainError("closed form stated for negative wave speed")
    seg_left = -(s * s + 2.0 * kappa) / (2.0 * kappa)
    seg_right = branch_point(s, kappa)
    seg = np.linspace(seg_left, seg_right, samples).astype(complex)
    if lam1_min >= seg_left:
        raise DomainError("branch range must extend left of the segment")
    lam1 = np.linspace(lam1_min, seg_left, samples)
    im = _branch_im(lam1, s, kappa)
    return AbsSpectrum(
        segment=SpectrumCurve("abs-real-segment", seg),
        branch_plus=SpectrumCurve("abs-branch-plus", lam1 - 1j * im),
        branch_minus=SpectrumCurve("abs-branch-minus", lam1 + 1j * im),
    )


def _eigs(lam: complex, s: float, kappa: float) -> np.ndarray:
    return np.linalg.eigvals(
        asymptotic_matrix("minus", WaveFamily.S1, lam, s, kappa))


def _match(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Reorder `cur` so each entry continues the matching branch of
    `prev` (minimal total displacement)."""
    cost = np.abs(prev[:, None] - cur[None, :])
    _, cols = linear_sum_assignment(cost)
    return cur[cols]


def morse_index_at_infinity(s: float, kappa: float) -> int:
    """Common Morse index far to the right of the spectral plane."""
    return morse_index("minus", 100.0 + 0j, s, kappa)


def absolute_spectrum_numeric(s: float, kappa: float,
                              box: tuple[float, float, float, float] = (-8.0, 0.5, -4.0, 4.0),
                              tol: float = 1e-6,
                              n_re: int = 81, n_im: int = 161) -> np.ndarray:
    """Numeric oracle for the absolute spectrum, independent of the
    closed forms.

    The absolute spectrum is where the real parts of the eigenvalue
    branches ranked i_inf and i_inf + 1 (by descending real part)
    coalesce.  Each vertical scan line of the box tracks the three
    eigenvalue branches by continuity (minimal-displacement matching);
    the signed gap between the two branches that were ranked
    (i_inf, i_inf + 1) at the start of a grid interval changes sign
    where the ranking swaps, so a sign change brackets a crossing and
    bisection refines it to `tol` in the imaginary coordinate.
    """
    re_min, re_max, im_min, im_max = box
    i_inf = morse_index_at_infinity(s, kappa)
    points: list[complex] = []

    def gap(lam2: float, lam1: float, order_ref: np.ndarray) -> float:
        mus = _match(order_ref, _eigs(lam1 + 1j * lam2, s, kappa))
        return float(mus[i_inf - 1].real - mus[i_inf].real)

    for lam1 in np.linspace(re_min, re_max, n_re):
        lam2s = np.linspace(im_min, im_max, n_im)
        mus = _eigs(lam1 + 1j * lam2s[0], s, kappa)
        for k in range(n_im - 1):
            # rank branches at the start of the interval
            order = np.argsort(-mus.real, kind="stable")
            mus = mus[order]
            g_lo = float(mus[i_inf - 1].real - mus[i_inf].real)
            mus_hi = _match(mus, _eigs(lam1 + 1j * lam2s[k + 1], s, kappa))
            g_hi = float(mus_hi[i_inf - 1].real - mus_hi[i_inf].real)
            if g_lo == 0.0:
                points.append(lam1 + 1j * lam2s[k])
            elif g_lo * g_hi < 0.0:
                lo, hi = lam2s[k], lam2s[k + 1]
                while hi - lo > tol:
                    mid = 0.5 * (lo + hi)
                    if g_lo * gap(mid, lam1, mus) < 0.0:
                        hi = mid
                    else:
                        lo = mid
                points.append(lam1 + 0.5j * (lo + hi))
            mus = mus_hi
    return np.array(points, dtype=complex)


@dataclass(frozen=True)
class Weights:
    """Two-sided exponential weight rates (positive for a leftward wave)."""
    eta_minus: float
    eta_plus: float


def ideal_weights(s: float, kappa: float) -> Weights:
    """Weight rates that push the essential spectrum furthest left; the
    shifted parabola vertex then coincides with the branch point."""
    _check_speed(s)
    if s >= 0:
        raise DomainError("ideal weights stated for negative wave speed")
    return Weights(eta_minus=-s / (2.0 * kappa),
                   eta_plus=s * s / (2.0 * kappa * (1.0 - s)))


def weighted_border_max_real(s: float, kappa: float, eta_minus: float,
                             eta_plus: float,
                             mu_range: tuple[float, float] = (-20.0, 20.0),
                             samples: int = 4001) -> float:
    """Largest real part over the essential-spectrum borders after
    shifting by the given exponential weights.

    A weight exp(eta z) moves the admissible spatial frequency from
    i*mu to eta + i*mu; substituting into the dispersion relations of
    each side gives the four shifted border curves sampled here."""
    _check_speed(s)
    mu = np.linspace(mu_range[0], mu_range[1], samples)
    m_minus = eta_minus + 1j * mu
    m_plus = eta_plus + 1j * mu
    c = (s - 1.0) / s
    curves = [
        s * m_minus - 1.0,                          # minus-side line
        kappa * m_minus**2 + s * m_minus,           # minus-side parabola
        (s - 1.0) * m_plus - 1.0,                   # plus-side line
        kappa * (c * m_plus)**2 + s * (c * m_plus),  # plus-side parabola
    ]
    return float(max(np.max(curve.real) for curve in curves))
