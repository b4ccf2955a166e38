"""Pseudo-spectral incompressible Hall-MHD with dyadic-analysis diagnostics.

Subpackages:

* :mod:`hallmhd.spectral` — periodic grid, FFT transforms, differential
  operators, Leray projection, norms, random fields, checkpoints.
* :mod:`hallmhd.lp` — dyadic (Littlewood-Paley) partition, Besov norms,
  paraproducts, commutators, and the inequality-constant harness.
* :mod:`hallmhd.dynamics` — integrating-factor Runge-Kutta stepping for
  the original and extended formulations, energy audit, cross-checks.
* :mod:`hallmhd.experiments` — decay-rate fits against the exact heat
  oracle, smallness-threshold scan, global-regime diagnostics.
* :mod:`hallmhd.config`, :mod:`hallmhd.cli` — validated JSON run
  configuration and the command-line entry point.
"""

from .spectral import (Grid, PhysicalParams, SpectralError, SpectralField,
                       dealias, differential, inner_l2, lambda_pow,
                       leray_project, load_checkpoint, norms, pin_mean,
                       random_field, save_checkpoint, transform_forward,
                       transform_inverse)
from .lp import (BesovSpec, ConstantReport, DyadicPartition, MixedNormSpec,
                 besov_norm, build_partition, commutator_block, dyadic_block,
                 lambda_commutator, low_cutoff, mixed_norm, paraproduct,
                 verify_inequality)
from .dynamics import (BlowupError, CflError, ExtendedState, IntegratorConfig,
                       SolverState, blowup_indicator, cross_check_formulations,
                       energy_audit, hall_term, integrate, make_extended,
                       make_state, step, step_extended, total_energy)
from .experiments import (DataSpec, DecayFit, DecayReport, RegularityParams,
                          decay_experiment, fit_decay, gen_initial_data,
                          global_regime_run, heat_norm_history,
                          heat_oracle_radial, smallness_scan)
from .config import ConfigError, RunConfig
from .timeseries import TimeSeries

__version__ = "0.1.0"
