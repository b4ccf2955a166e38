import numpy as np
import pytest

from hallmhd import dynamics as dyn, experiments as ex, spectral as sp
from hallmhd.timeseries import TimeSeries


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------

def test_regularity_params_validation():
    ex.RegularityParams(sigma=1.0, gamma=1.5, s=0.5)
    for bad in [dict(sigma=0.0), dict(sigma=2.0), dict(gamma=-0.1),
                dict(gamma=2.5), dict(s=-1.0)]:
        with pytest.raises(sp.SpectralError):
            ex.RegularityParams(**bad)


def test_data_spec_validation():
    with pytest.raises(sp.SpectralError):
        ex.DataSpec(band=(2.0, 1.0))
    with pytest.raises(sp.SpectralError):
        ex.DataSpec(band=(0.0, 1.0), amplitude=0.0)


def test_gen_initial_data_normalized_and_deterministic(grid16):
    spec = ex.DataSpec(band=(0.0, 2.0), amplitude=0.25, seed=5)
    u, B = ex.gen_initial_data(grid16, spec)
    assert sp.norms(u, "L2") == pytest.approx(0.25, rel=1e-12)
    assert sp.norms(B, "L2") == pytest.approx(0.25, rel=1e-12)
    assert sp.norms(sp.differential(u, "divergence"), "L2") < 1e-13
    u2, B2 = ex.gen_initial_data(grid16, spec)
    assert np.array_equal(u.coef, u2.coef)
    assert np.array_equal(B.coef, B2.coef)


# ---------------------------------------------------------------------------
# continuum oracle and fitting
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("s", [0.0, 1.0])
@pytest.mark.parametrize("gamma", [0.5, 1.5, 2.5])
def test_heat_oracle_slopes(s, gamma):
    times = np.logspace(2, 4, 60)
    vals = ex.heat_oracle_radial(s, gamma, times)
    series = TimeSeries("oracle", [(float(t), float(v))
                                   for t, v in zip(times, vals)])
    fit = ex.fit_decay(series)
    assert fit.slope == pytest.approx(-(s + gamma) / 2, abs=0.02)


def test_heat_oracle_validation():
    with pytest.raises(sp.SpectralError):
        ex.heat_oracle_radial(0.0, 0.0, np.array([1.0]))
    with pytest.raises(sp.SpectralError):
        ex.heat_oracle_radial(1.0, 1.0, np.array([-1.0]))


def test_fit_decay_recovers_exact_power_law():
    t = np.linspace(0.0, 50.0, 200)
    series = TimeSeries("p", [(float(ti), float(3.0 * (1 + ti) ** -1.25))
                              for ti in t])
    fit = ex.fit_decay(series)
    assert fit.slope == pytest.approx(-1.25, abs=1e-12)
    assert np.exp(fit.intercept) == pytest.approx(3.0, rel=1e-10)
    assert fit.residual < 1e-12


def test_fit_decay_window_validation():
    series = TimeSeries("p", [(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)])
    with pytest.raises(sp.SpectralError):
        ex.fit_decay(series, window=(10.0, 20.0))


def test_heat_norm_history_matches_linear_run(grid16):
    # at negligible amplitude the nonlinear solver is the heat flow
    params = dyn.PhysicalParams(0.5, 0.5, 0.5)
    spec = ex.DataSpec(band=(0.0, 2.0), amplitude=1e-8, seed=2)
    u0, B0 = ex.gen_initial_data(grid16, spec)
    cfg = dyn.IntegratorConfig(dt=0.02, t_end=0.2)
    traj = dyn.integrate(dyn.make_state(u0, B0), params, cfg, sample_every=2)
    times = np.array([s.t for s in traj])
    exact = ex.heat_norm_history(u0, params.mu, times, 0.0)
    for state, (_, val) in zip(traj, exact.samples):
        assert sp.norms(state.u, "L2") == pytest.approx(val, rel=1e-7)


# ---------------------------------------------------------------------------
# global-regime diagnostics at desk scale
# ---------------------------------------------------------------------------

def test_global_regime_run_small(grid16):
    params = dyn.PhysicalParams(0.5, 0.5, 0.5)
    spec = ex.DataSpec(band=(0.0, 2.0), amplitude=0.02, seed=3)
    cfg = dyn.IntegratorConfig(dt=0.05, t_end=1.0)
    rep = ex.global_regime_run(grid16, params, spec, cfg, gamma=1.5,
                               sample_every=2)
    assert rep.sup_energy_ratio <= 1.0 + 1e-9
    assert np.isfinite(rep.blowup_integral)
    assert 0.0 <= rep.blowup_tail_fraction < 0.5
    assert np.isfinite(rep.besov_sup) and rep.besov_sup > 0.0


def test_smallness_scan_brackets(grid16):
    params = dyn.PhysicalParams(0.5, 0.5, 0.5)
    cfg = dyn.IntegratorConfig(dt=0.05, t_end=0.5)
    rep = ex.smallness_scan(grid16, params, (0.0, 2.0), cfg, seed=1,
                            amp_lo=1e-3, amp_hi=4.0, n_iter=2)
    assert rep.threshold >= 1e-3
    amps = [a for a, _ in rep.history]
    growths = [g for _, g in rep.history]
    assert all(np.isfinite(growths))
    # threshold growth within criterion, next tested amplitude above it
    tested = dict(rep.history)
    assert tested[min(amps, key=lambda a: abs(a - rep.threshold))] <= 2.0
