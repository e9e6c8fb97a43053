"""Travelling waves of a one-dimensional collective-cell-migration model.

Closed-form wave profiles, particle (spring-chain) and continuum
simulation, essential/absolute spectra with exponential weights, and an
Evans function with argument-principle winding numbers.
"""

__version__ = "0.1.0"

from .model import (DomainError, ModelParams, NonMonotoneMapError,
                    PhysicalityError, TravellingWaveState, Validity,
                    WaveFamily, WaveSolution, apply_T1, apply_T2_tilde,
                    flux_constant, make_wave, motility, motility_deriv,
                    profile, travelling_wave_rhs, validate_physical,
                    velocity_profile, wave_speed)
from .particles import (ParticleState, measure_front_speed,
                        particle_rhs, polarised_tail_chain, resting_chain,
                        simulate_particles)
from .pde import (ClassificationError, FieldState, Grid, Outcome, SimConfig,
                  UnstableStepError, classify_outcome, exact_wave_ic,
                  find_threshold_alpha, measure_wave_speed, simulate,
                  stable_dt, step_ic)
from .spectra import (AbsSpectrum, OnBorderError, SpectrumCurve, Weights,
                      absolute_spectrum_closed, absolute_spectrum_numeric,
                      asymptotic_matrix, branch_point, fredholm_borders,
                      ideal_weights, morse_index, morse_index_at_infinity,
                      spatial_eigenvalues, weighted_border_max_real)
from .evans import (Contour, ContourThroughZero, EvansConfig, ScaledComplex,
                    ShootingError, WindingResolutionError,
                    boundary_vectors_stable, evans_det, evans_scan,
                    jump_apply, linearized_matrix, shoot_unstable,
                    winding_number)

__all__ = [name for name in dir() if not name.startswith("_")]
