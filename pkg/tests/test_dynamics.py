import numpy as np
import pytest

from hallmhd import dynamics as dyn, spectral as sp


def small_fields(grid, amp=0.3, seed=7):
    rng = np.random.default_rng(seed)
    u = sp.random_field(grid, rng, 3, band=(0.4, 2.0), divergence_free=True)
    B = sp.random_field(grid, rng, 3, band=(0.4, 2.0), divergence_free=True)
    u = sp.SpectralField(grid, amp * u.coef / sp.norms(u, "L2"), True)
    B = sp.SpectralField(grid, amp * B.coef / sp.norms(B, "L2"), True)
    return u, B


@pytest.fixture
def params():
    return dyn.PhysicalParams(mu=0.5, nu=0.5, kappa=0.5)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def test_rhs_is_divergence_free(grid16, params):
    u, B = small_fields(grid16)
    du, dB = dyn.rhs_original(dyn.make_state(u, B), params)
    assert sp.norms(sp.differential(du, "divergence"), "L2") < 1e-13
    assert sp.norms(sp.differential(dB, "divergence"), "L2") < 1e-13


def test_velocity_advection_matches_convective_form(grid16, params):
    # independent oracle: evaluate B.grad B - u.grad u convectively from
    # spectral derivatives; after projection and dealiasing this equals
    # the rotational-form evaluation used by the solver
    u, B = small_fields(grid16)
    state = dyn.make_state(u, B)
    du, _ = dyn.rhs_original(state, params)
    resolved = du.coef - params.mu * sp.differential(u, "laplacian").coef

    kx, ky, kz = grid16.wavevectors()
    ks = (kx, ky, kz)

    def advection(w):
        wp = sp.transform_inverse(w)
        acc = np.zeros((3, grid16.n, grid16.n, grid16.n))
        for i in range(3):
            dw = sp.SpectralField(grid16, 1j * ks[i] * w.coef)
            acc += wp[i] * sp.transform_inverse(dw)
        return acc

    conv = advection(B) - advection(u)
    oracle = sp.leray_project(
        sp.dealias(sp.transform_forward(conv, grid16)))
    scale = np.max(np.abs(oracle.coef))
    assert np.max(np.abs(resolved - oracle.coef)) < 1e-12 * scale


def test_hall_term_energy_neutral(grid32):
    rng = np.random.default_rng(0)
    for _ in range(10):
        B = sp.random_field(grid32, rng, 3, band=(0.2, 3.0),
                            divergence_free=True)
        h = dyn.hall_term(B)
        rel = abs(sp.inner_l2(h, B)) / (sp.norms(h, "L2")
                                        * sp.norms(B, "L2"))
        assert rel < 1e-12


def test_hall_term_vanishes_on_curl_eigenfield(grid16):
    # for fields with curl B parallel to B the Hall nonlinearity is zero
    X, Y, Z = grid16.coordinates()
    shape = (grid16.n,) * 3
    b = np.stack([np.broadcast_to(np.cos(Z / grid16.M), shape),
                  np.broadcast_to(np.sin(Z / grid16.M), shape),
                  np.zeros(shape)])
    B = sp.transform_forward(b, grid16)
    assert np.max(np.abs(dyn.hall_term(B).coef)) == 0.0


def test_extended_rhs_consistent_with_original(grid16, params):
    # d/dt of v = u - kappa curl B must match dv from the extended system
    u, B = small_fields(grid16)
    ext = dyn.make_extended(u, B, params.kappa)
    du, dB, dv = dyn.rhs_extended(ext, params)
    ref = du.coef - params.kappa * sp.differential(dB, "curl").coef
    assert np.max(np.abs(dv.coef - ref)) < 1e-13 * np.max(np.abs(ref))


def test_extended_requires_equal_viscosities(grid16):
    u, B = small_fields(grid16)
    ext = dyn.make_extended(u, B, 0.5)
    with pytest.raises(sp.SpectralError):
        dyn.rhs_extended(ext, dyn.PhysicalParams(0.5, 0.4, 0.5))


def test_b_recovery_identity(grid16):
    u, B = small_fields(grid16)
    ext = dyn.make_extended(u, B, 0.5)
    rec = dyn.b_from_uv(ext.base.u, ext.v, 0.5)
    assert (np.max(np.abs(rec.coef - ext.base.B.coef))
            < 1e-13 * np.max(np.abs(B.coef)))


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

def test_linear_mode_decays_exactly(grid16, params):
    coef = np.zeros((3, 16, 16, 16), complex)
    coef[0, 0, 0, 2] = 1e-30  # negligible amplitude: linear regime
    B = sp.SpectralField(grid16, coef)
    zero = sp.SpectralField(grid16, np.zeros_like(coef))
    cfg = dyn.IntegratorConfig(dt=0.01, t_end=0.01)
    out = dyn.step(dyn.make_state(zero, B), params, cfg)
    ksq = (2 / grid16.M) ** 2
    ratio = out.B.coef[0, 0, 0, 2] / coef[0, 0, 0, 2]
    assert ratio == pytest.approx(np.exp(-params.nu * ksq * 0.01), rel=1e-13)


@pytest.mark.parametrize("scheme,order", [("IF-RK2", 2), ("IF-RK3", 3)])
def test_integrator_convergence_order(grid16, params, scheme, order):
    u, B = small_fields(grid16)
    state = dyn.make_state(u, B)
    T = 0.08

    def run(dt):
        cfg = dyn.IntegratorConfig(dt=dt, t_end=T, scheme=scheme)
        s = state
        for _ in range(int(round(T / dt))):
            s = dyn.step(s, params, cfg)
        return np.concatenate([s.u.coef.ravel(), s.B.coef.ravel()])

    a, b, c = run(0.008), run(0.004), run(0.002)
    measured = np.log2(np.linalg.norm(a - c) / np.linalg.norm(b - c))
    assert measured == pytest.approx(order, abs=0.5)


def test_hall_cfl_guard(grid16, params):
    u, B = small_fields(grid16, amp=5.0)
    cfg = dyn.IntegratorConfig(dt=0.5, t_end=1.0)
    with pytest.raises(dyn.CflError):
        dyn.step(dyn.make_state(u, B), params, cfg)


def test_integrator_config_validation():
    with pytest.raises(sp.SpectralError):
        dyn.IntegratorConfig(dt=0.0, t_end=1.0)
    with pytest.raises(sp.SpectralError):
        dyn.IntegratorConfig(dt=0.1, t_end=1.0, scheme="RK99")


def test_integrate_sampling(grid16, params):
    u, B = small_fields(grid16)
    cfg = dyn.IntegratorConfig(dt=0.01, t_end=0.06)
    traj = dyn.integrate(dyn.make_state(u, B), params, cfg, sample_every=2)
    assert [pytest.approx(s.t) for s in traj] == [0.0, 0.02, 0.04, 0.06]


def test_stepping_is_deterministic(grid16, params):
    u, B = small_fields(grid16)
    cfg = dyn.IntegratorConfig(dt=0.01, t_end=0.05)

    def run():
        traj = dyn.integrate(dyn.make_state(u, B), params, cfg)
        return traj[-1]

    a, b = run(), run()
    assert a.u.coef.tobytes() == b.u.coef.tobytes()
    assert a.B.coef.tobytes() == b.B.coef.tobytes()


# ---------------------------------------------------------------------------
# audits
# ---------------------------------------------------------------------------

def test_energy_audit_residual_and_fd_order(grid16, params):
    u, B = small_fields(grid16)
    cfg = dyn.IntegratorConfig(dt=0.004, t_end=0.2, scheme="IF-RK3")
    traj = dyn.integrate(dyn.make_state(u, B), params, cfg)
    r2 = np.max(np.abs(dyn.energy_audit(traj, params, fd_order=2).values))
    r4 = np.max(np.abs(dyn.energy_audit(traj, params, fd_order=4).values))
    assert r2 < 1e-3
    assert r4 < r2 / 10


def test_energy_audit_validation(grid16, params):
    u, B = small_fields(grid16)
    s = dyn.make_state(u, B)
    with pytest.raises(sp.SpectralError):
        dyn.energy_audit([s, s], params)
    with pytest.raises(sp.SpectralError):
        dyn.energy_audit([s, s, s], params, fd_order=3)


def test_total_energy_quadrature(grid16):
    u, B = small_fields(grid16, amp=1.0)
    state = dyn.make_state(u, B)
    up = sp.transform_inverse(state.u)
    Bp = sp.transform_inverse(state.B)
    quad = 0.5 * np.sum(up**2 + Bp**2) * grid16.dx**3
    assert dyn.total_energy(state) == pytest.approx(quad, rel=1e-12)


def test_cross_check_formulations_small_run(grid16, params):
    u, B = small_fields(grid16, amp=0.1)
    cfg = dyn.IntegratorConfig(dt=0.01, t_end=0.05)
    rep = dyn.cross_check_formulations(u, B, params, cfg)
    assert rep.max_v_consistency < 1e-12
    assert rep.max_b_identity < 1e-12


def test_blowup_indicator_positive(grid16):
    u, B = small_fields(grid16)
    assert dyn.blowup_indicator(dyn.make_state(u, B)) > 0.0
