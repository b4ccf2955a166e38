"""Decay-rate, smallness-threshold, and negative-Besov experiments.

Conventions:

* Initial data with a flat three-dimensional spectrum on a low band
  behaves like data whose dyadic blocks satisfy
  ``sup_j 2^{-gamma j} ||block_j|| < inf`` with ``gamma = 3/2``; the heat
  flow of such data decays like ``(1 + t)^{-(s + gamma)/2}`` in the
  homogeneous ``H^s`` norm.
* ``heat_oracle_radial`` evaluates that continuum decay law exactly from
  the radial spectral density and serves as the reference for the
  log-log fitting routine.
* ``decay_experiment`` runs the full nonlinear system at small amplitude
  and fits the measured norms over a window where the box spectrum still
  resolves the continuum power law: ``1/(mu k_hi^2) << t << 1/(mu
  k_min^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn, gammainc

from . import dynamics as dyn
from . import lp
from . import spectral as sp
from .spectral import Grid, SpectralError, SpectralField
from .timeseries import TimeSeries


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegularityParams:
    """Regularity/decay indices for an experiment.

    ``sigma`` is the Sobolev regularity of the data (must lie in (0, 2)
    for the product and commutator machinery to apply), ``gamma`` the
    negative dyadic decay index in [0, 5/2), and ``s`` the derivative
    order of the tracked norm.
    """

    sigma: float = 1.0
    gamma: float = 1.5
    s: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma < 2.0:
            raise SpectralError(
                f"sigma must lie in (0, 2), got {self.sigma}")
        if not 0.0 <= self.gamma < 2.5:
            raise SpectralError(
                f"gamma must lie in [0, 5/2), got {self.gamma}")
        if self.s < 0.0:
            raise SpectralError(f"s must be >= 0, got {self.s}")


@dataclass(frozen=True)
class DataSpec:
    """Random divergence-free initial data on a spectral band.

    ``amplitude`` is the L2 norm of each generated field.  ``slope`` is
    the power-law exponent of the coefficient envelope |c(k)| ~ |k|^-slope
    (slope 0 gives a flat 3-d spectrum, i.e. gamma = 3/2 data).
    """

    band: tuple[float, float]
    amplitude: float = 1.0
    slope: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        lo, hi = self.band
        if not 0.0 <= lo < hi:
            raise SpectralError(f"invalid band {self.band}")
        if self.amplitude <= 0.0:
            raise SpectralError(f"amplitude must be positive")


def gen_initial_data(grid: Grid, spec: DataSpec,
                     rng: np.random.Generator | None = None
                     ) -> tuple[SpectralField, SpectralField]:
    """Generate a divergence-free (u, B) pair normalized in L2."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    fields = []
    for _ in range(2):
        f = sp.random_field(grid, rng, components=3, band=spec.band,
                            slope=spec.slope, divergence_free=True)
        scale = spec.amplitude / sp.norms(f, "L2")
        fields.append(SpectralField(grid, scale * f.coef,
                                    divergence_free=True))
    return fields[0], fields[1]


# ---------------------------------------------------------------------------
# continuum radial oracle and log-log fitting
# ---------------------------------------------------------------------------

def heat_oracle_radial(s: float, gamma: float, times: np.ndarray,
                       diffusivity: float = 1.0,
                       rho_max: float = 1.0) -> np.ndarray:
    """Exact heat-flow norm history for radial power-law data.

    The data has radial spectral density |c(rho)|^2 = rho^(2*gamma - 3)
    supported on [0, rho_max], so the squared norm of order ``s`` at
    time t is proportional to

        int_0^rho_max rho^(2s + 2*gamma - 1) exp(-2 mu t rho^2) drho,

    which evaluates in closed form through the regularized lower
    incomplete gamma function.  The returned norm decays like
    t^(-(s + gamma)/2) once 2 mu t rho_max^2 >> 1.
    """
    a = s + gamma
    if a <= 0.0:
        raise SpectralError(f"need s + gamma > 0, got {a}")
    t = np.asarray(times, dtype=float)
    if np.any(t < 0.0):
        raise SpectralError("times must be nonnegative")
    z = 2.0 * diffusivity * t * rho_max**2
    # int_0^X x^(2a-1) e^(-x^2) dx = Gamma(a) * gammainc(a, X^2) / 2
    sq = np.where(
        z > 0.0,
        0.5 * gamma_fn(a) * gammainc(a, z)
        / np.maximum(2.0 * diffusivity * t, 1e-300)**a,
        rho_max**(2.0 * a) / (2.0 * a))
    return np.sqrt(sq)


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log(value) against log(1 + t)."""

    slope: float
    intercept: float
    residual: float
    window: tuple[float, float]
    n_points: int


def fit_decay(series: TimeSeries,
              window: tuple[float, float] | None = None) -> DecayFit:
    """Fit values ~ C (1 + t)^slope over the given time window."""
    t, v = series.times, series.values
    if window is None:
        window = (float(t[0]), float(t[-1]))
    lo, hi = window
    mask = (t >= lo) & (t <= hi) & (v > 0.0)
    if int(mask.sum()) < 3:
        raise SpectralError(
            f"fit window {window} selects {int(mask.sum())} points; need >= 3")
    x = np.log1p(t[mask])
    y = np.log(v[mask])
    design = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), res, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.sqrt(res[0] / mask.sum())) if res.size else 0.0
    return DecayFit(float(slope), float(intercept), residual,
                    (float(lo), float(hi)), int(mask.sum()))


def heat_norm_history(field: SpectralField, diffusivity: float,
                      times: np.ndarray, s: float) -> TimeSeries:
    """Exact ``H^s``-norm history of the heat semigroup applied to a field."""
    grid = field.grid
    ksq = grid.k_magnitude()**2
    weight = grid.volume * np.where(ksq > 0.0, ksq**s, 0.0)
    power = np.sum(np.abs(field.coef)**2, axis=0)
    series = TimeSeries(f"heat_Hs{s}")
    for t in np.asarray(times, dtype=float):
        val = np.sqrt(np.sum(weight * power * np.exp(-2.0 * diffusivity
                                                     * t * ksq)))
        series.append(t, float(val))
    return series


# ---------------------------------------------------------------------------
# nonlinear decay experiment
# ---------------------------------------------------------------------------

@dataclass
class DecayReport:
    """Fitted decay exponents of a small-data run and its heat baseline."""

    fit_s0: DecayFit
    fit_s1: DecayFit
    heat_fit_s0: DecayFit
    heat_fit_s1: DecayFit
    series: dict[str, TimeSeries] = field(default_factory=dict)

    @property
    def exponent_gap(self) -> float:
        return self.fit_s1.slope - self.fit_s0.slope


def _combined_norm(state: dyn.SolverState, s: float) -> float:
    kind = "L2" if s == 0.0 else "Hdot"
    nu = sp.norms(state.u, kind, s=s)
    nb = sp.norms(state.B, kind, s=s)
    return float(np.sqrt(nu * nu + nb * nb))


def decay_experiment(grid: Grid, params: dyn.PhysicalParams,
                     data: DataSpec, cfg: dyn.IntegratorConfig,
                     sample_every: int = 1,
                     fit_window: tuple[float, float] | None = None
                     ) -> DecayReport:
    """Run small-data Hall-MHD and fit decay exponents of the norms.

    The s=0 and s=1 norms of (u, B) are sampled along one trajectory and
    fitted against log(1 + t); the exact heat semigroup applied to the
    same initial data gives the linear baseline.  The fit window is
    capped at one tenth of the e-folding time of the fundamental mode so
    the box spectrum still mimics the continuum power law.
    """
    u0, B0 = gen_initial_data(grid, data)
    mu_min = min(params.mu, params.nu)
    t_cap = 0.1 / (mu_min * grid.k_min**2)
    if fit_window is None:
        k_hi = data.band[1]
        fit_window = (2.0 / (mu_min * k_hi**2), min(cfg.t_end, t_cap))
    else:
        fit_window = (fit_window[0], min(fit_window[1], t_cap))

    s0 = TimeSeries("norm_s0")
    s1 = TimeSeries("norm_s1")

    def observer(state: dyn.SolverState) -> None:
        s0.append(state.t, _combined_norm(state, 0.0))
        s1.append(state.t, _combined_norm(state, 1.0))

    state = dyn.make_state(u0, B0)
    observer(state)
    dyn.integrate(state, params, cfg, sample_every=sample_every,
                  observer=observer)

    times = s0.times

    def combined_heat(order: float) -> TimeSeries:
        hu = heat_norm_history(u0, params.mu, times, order)
        hb = heat_norm_history(B0, params.nu, times, order)
        out = TimeSeries(f"heat_s{order}")
        for t, vu, vb in zip(times, hu.values, hb.values):
            out.append(float(t), float(np.hypot(vu, vb)))
        return out

    heat0 = combined_heat(0.0)
    heat1 = combined_heat(1.0)

    return DecayReport(
        fit_s0=fit_decay(s0, fit_window),
        fit_s1=fit_decay(s1, fit_window),
        heat_fit_s0=fit_decay(heat0, fit_window),
        heat_fit_s1=fit_decay(heat1, fit_window),
        series={"norm_s0": s0, "norm_s1": s1,
                "heat_s0": heat0, "heat_s1": heat1})


# ---------------------------------------------------------------------------
# smallness threshold and global-regime diagnostics
# ---------------------------------------------------------------------------

@dataclass
class ScanReport:
    """Bisection history for the operational smallness threshold.

    ``threshold`` is the largest tested amplitude whose energy history
    satisfies sup_t E(t) <= 2 E(0).
    """

    threshold: float
    history: list[tuple[float, float]]
    grid_n: int


def energy_growth_factor(grid: Grid, params: dyn.PhysicalParams,
                         data: DataSpec, cfg: dyn.IntegratorConfig,
                         sample_every: int = 4) -> float:
    """sup_t E(t) / E(0) for a run from the given data."""
    u0, B0 = gen_initial_data(grid, data)
    state = dyn.make_state(u0, B0)
    e0 = dyn.total_energy(state)
    sup = [e0]

    def observer(s: dyn.SolverState) -> None:
        sup.append(dyn.total_energy(s))

    dyn.integrate(state, params, cfg, sample_every=sample_every,
                  observer=observer)
    return float(max(sup) / e0)


def smallness_scan(grid: Grid, params: dyn.PhysicalParams,
                   band: tuple[float, float], cfg: dyn.IntegratorConfig,
                   seed: int = 0, amp_lo: float = 1e-3,
                   amp_hi: float = 64.0, n_iter: int = 8) -> ScanReport:
    """Bisect the largest amplitude with sup_t E(t) <= 2 E(0).

    Amplitudes are L2 norms of each of u and B.  The bracket is first
    expanded/validated, then bisected ``n_iter`` times.
    """
    history: list[tuple[float, float]] = []

    def growth(amp: float) -> float:
        spec = DataSpec(band=band, amplitude=amp, seed=seed)
        try:
            g = energy_growth_factor(grid, params, spec, cfg)
        except (dyn.CflError, dyn.BlowupError):
            # unstable at this amplitude: counts as exceeding the bound
            g = float("inf")
        history.append((amp, g))
        return g

    if growth(amp_lo) > 2.0:
        raise SpectralError(
            f"lower bracket amplitude {amp_lo} already exceeds the "
            "energy-doubling criterion")
    if growth(amp_hi) <= 2.0:
        return ScanReport(amp_hi, history, grid.n)
    lo, hi = amp_lo, amp_hi
    for _ in range(n_iter):
        mid = float(np.sqrt(lo * hi))
        if growth(mid) <= 2.0:
            lo = mid
        else:
            hi = mid
    return ScanReport(lo, history, grid.n)


@dataclass
class GlobalRegimeReport:
    """Diagnostics of one sub-threshold run."""

    sup_energy_ratio: float
    blowup_integral: float
    blowup_tail_fraction: float
    besov_sup: float
    seed: int


def global_regime_run(grid: Grid, params: dyn.PhysicalParams,
                      data: DataSpec, cfg: dyn.IntegratorConfig,
                      gamma: float = 1.5, sample_every: int = 4
                      ) -> GlobalRegimeReport:
    """Track energy growth, the blow-up proxy, and the negative-Besov sup.

    The blow-up proxy is the time integral of the strongest controlled
    norms; its convergence is reported as the fraction contributed by
    the last quarter of the run.  The negative-Besov sup is
    sup_t of the ell-infinity dyadic norm of index -gamma of (u, B).
    """
    u0, B0 = gen_initial_data(grid, data)
    part = lp.build_partition(grid)
    besov = lp.BesovSpec(s=-gamma, p=2.0, r=np.inf)
    state = dyn.make_state(u0, B0)
    e0 = dyn.total_energy(state)

    energies = TimeSeries("energy")
    proxy = TimeSeries("blowup_proxy")
    besov_track = TimeSeries("besov_neg")

    def observer(s: dyn.SolverState) -> None:
        energies.append(s.t, dyn.total_energy(s))
        proxy.append(s.t, dyn.blowup_indicator(s))
        bu = lp.besov_norm(s.u, besov, part)
        bb = lp.besov_norm(s.B, besov, part)
        besov_track.append(s.t, float(np.hypot(bu, bb)))

    observer(state)
    dyn.integrate(state, params, cfg, sample_every=sample_every,
                  observer=observer)

    t, p = proxy.times, proxy.values
    total = float(np.trapezoid(p, t))
    t_cut = t[0] + 0.75 * (t[-1] - t[0])
    tail_mask = t >= t_cut
    tail = float(np.trapezoid(p[tail_mask], t[tail_mask]))
    return GlobalRegimeReport(
        sup_energy_ratio=float(np.max(energies.values) / e0),
        blowup_integral=total,
        blowup_tail_fraction=tail / total if total > 0.0 else 0.0,
        besov_sup=float(np.max(besov_track.values)),
        seed=data.seed)
