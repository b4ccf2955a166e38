import numpy as np
import pytest

from hallmhd import spectral as sp

from conftest import brute_force_product


# ---------------------------------------------------------------------------
# grid and field validation
# ---------------------------------------------------------------------------

def test_grid_rejects_non_power_of_two():
    with pytest.raises(sp.SpectralError):
        sp.Grid(12, 1.0)


def test_grid_rejects_small_or_nonpositive():
    with pytest.raises(sp.SpectralError):
        sp.Grid(4, 1.0)
    with pytest.raises(sp.SpectralError):
        sp.Grid(16, 0.0)


def test_grid_geometry(grid16):
    assert grid16.dx == pytest.approx(2 * np.pi * 2.0 / 16)
    assert grid16.volume == pytest.approx((2 * np.pi * 2.0) ** 3)
    assert grid16.k_min == pytest.approx(0.5)
    assert grid16.dealias_cutoff() == 5


def test_field_component_validation(grid8):
    with pytest.raises(sp.SpectralError):
        sp.SpectralField(grid8, np.zeros((2, 8, 8, 8), complex))
    with pytest.raises(sp.SpectralError):
        sp.SpectralField(grid8, np.zeros((3, 4, 4, 4), complex))


# ---------------------------------------------------------------------------
# transforms and quadrature
# ---------------------------------------------------------------------------

def test_round_trip(grid16, rng):
    phys = rng.standard_normal((3, 16, 16, 16))
    f = sp.transform_forward(phys, grid16)
    assert np.max(np.abs(sp.transform_inverse(f) - phys)) < 1e-13


def test_constant_has_unit_zero_mode(grid8):
    f = sp.transform_forward(np.full((1, 8, 8, 8), 7.0), grid8)
    assert f.coef[0, 0, 0, 0] == pytest.approx(7.0)
    assert np.sum(np.abs(f.coef)) == pytest.approx(7.0)


def test_parseval(grid16, rng):
    phys = rng.standard_normal((1, 16, 16, 16))
    f = sp.transform_forward(phys, grid16)
    quad = np.sqrt(np.sum(phys**2) * grid16.dx**3)
    assert sp.norms(f, "L2") == pytest.approx(quad, rel=1e-12)


def test_real_field_hermitian(grid16, rng):
    f = sp.transform_forward(rng.standard_normal((1, 16, 16, 16)), grid16)
    assert f.hermitian_defect() < 1e-13


# ---------------------------------------------------------------------------
# differential operators
# ---------------------------------------------------------------------------

def test_single_mode_derivative(grid16):
    # cos(x / M) has coefficient 1/2 at modes m = (+-1, 0, 0)
    X, Y, Z = grid16.coordinates()
    shape = (grid16.n,) * 3
    cosx = np.broadcast_to(np.cos(X / grid16.M), shape)
    f = sp.transform_forward(cosx[None], grid16)
    assert f.coef[0, 1, 0, 0] == pytest.approx(0.5, abs=1e-13)
    g = sp.differential(f, "gradient")
    target = np.broadcast_to(-np.sin(X / grid16.M) / grid16.M, shape)
    assert np.max(np.abs(sp.transform_inverse(g)[0] - target)) < 1e-13


def test_curl_grad_and_div_curl_vanish(grid16, rng):
    scalar = sp.random_field(grid16, rng, 1, band=(0.2, 2.0))
    grad = sp.differential(scalar, "gradient")
    assert np.max(np.abs(sp.differential(grad, "curl").coef)) < 1e-14
    w = sp.random_field(grid16, rng, 3, band=(0.2, 2.0))
    div_curl = sp.differential(sp.differential(w, "curl"), "divergence")
    assert np.max(np.abs(div_curl.coef)) < 1e-13


def test_curl_curl_identity(grid16, rng):
    # curl curl w = grad div w - laplacian w
    w = sp.random_field(grid16, rng, 3, band=(0.2, 2.0),
                        divergence_free=False)
    cc = sp.differential(sp.differential(w, "curl"), "curl")
    gd = sp.differential(sp.differential(w, "divergence"), "gradient")
    lap = sp.differential(w, "laplacian")
    assert np.max(np.abs(cc.coef - (gd.coef - lap.coef))) < 1e-12


def test_leray_projection(grid16, rng):
    w = sp.random_field(grid16, rng, 3, band=(0.2, 2.0),
                        divergence_free=False)
    p = sp.leray_project(w)
    assert sp.norms(sp.differential(p, "divergence"), "L2") < 1e-13
    again = sp.leray_project(p)
    assert np.max(np.abs(again.coef - p.coef)) < 1e-14
    # gradients are annihilated
    g = sp.differential(sp.random_field(grid16, rng, 1, band=(0.2, 2.0)),
                        "gradient")
    assert np.max(np.abs(sp.leray_project(g).coef)) < 1e-14


def test_lambda_pow_single_mode(grid16):
    coef = np.zeros((1, 16, 16, 16), complex)
    coef[0, 2, 0, 0] = 1.0
    coef[0, -2, 0, 0] = 1.0
    f = sp.SpectralField(grid16, coef)
    k = 2 / grid16.M
    out = sp.lambda_pow(f, 0.7)
    assert out.coef[0, 2, 0, 0] == pytest.approx(k**0.7)
    # inverse power returns the original on mean-zero fields
    back = sp.lambda_pow(out, -0.7)
    assert np.max(np.abs(back.coef - coef)) < 1e-14


def test_lambda_pow_negative_requires_mean_zero(grid16):
    coef = np.zeros((1, 16, 16, 16), complex)
    coef[0, 0, 0, 0] = 1.0
    with pytest.raises(sp.SpectralError):
        sp.lambda_pow(sp.SpectralField(grid16, coef), -1.0)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def test_hdot1_equals_gradient_l2(grid16, rng):
    f = sp.random_field(grid16, rng, 1, band=(0.2, 2.0))
    grad = sp.differential(f, "gradient")
    assert sp.norms(f, "Hdot", s=1.0) == pytest.approx(
        sp.norms(grad, "L2"), rel=1e-12)


def test_lp_norm_p2_matches_l2(grid16, rng):
    f = sp.random_field(grid16, rng, 3, band=(0.2, 2.0))
    assert sp.norms(f, "Lp", p=2.0) == pytest.approx(
        sp.norms(f, "L2"), rel=1e-10)


def test_inner_l2_polarization(grid16, rng):
    f = sp.random_field(grid16, rng, 1, band=(0.2, 2.0))
    g = sp.random_field(grid16, rng, 1, band=(0.2, 2.0))
    fs = sp.transform_inverse(f)
    gs = sp.transform_inverse(g)
    quad = np.sum(fs * gs) * grid16.dx**3
    assert sp.inner_l2(f, g) == pytest.approx(quad, rel=1e-10)


# ---------------------------------------------------------------------------
# dealiased products against the direct-convolution oracle
# ---------------------------------------------------------------------------

def test_product_matches_convolution_oracle(grid8, rng):
    f = sp.random_field(grid8, rng, 1, band=(0.3, 2.0))
    g = sp.random_field(grid8, rng, 1, band=(0.3, 2.0))
    phys = sp.transform_inverse(f) * sp.transform_inverse(g)
    fft_prod = sp.dealias(sp.transform_forward(phys, grid8))
    oracle = brute_force_product(f, g)
    scale = np.max(np.abs(oracle.coef))
    assert np.max(np.abs(fft_prod.coef - oracle.coef)) < 1e-12 * max(scale, 1)


def test_dealias_zeroes_high_modes(grid16, rng):
    f = sp.transform_forward(rng.standard_normal((1, 16, 16, 16)), grid16)
    d = sp.dealias(f)
    cut = grid16.dealias_cutoff()
    modes = grid16.modes()
    for axis in range(3):
        idx = [slice(None)] * 4
        idx[axis + 1] = np.abs(modes) > cut
        assert np.max(np.abs(d.coef[tuple(idx)])) == 0.0


# ---------------------------------------------------------------------------
# random fields
# ---------------------------------------------------------------------------

def test_random_field_properties(grid16):
    rng = np.random.default_rng(7)
    f = sp.random_field(grid16, rng, 3, band=(0.3, 1.5),
                        divergence_free=True)
    assert f.is_mean_zero()
    assert sp.norms(sp.differential(f, "divergence"), "L2") < 1e-13
    assert f.hermitian_defect() < 1e-13
    # band support
    kmag = grid16.k_magnitude()
    outside = (kmag > 1.5)
    assert np.max(np.abs(f.coef[:, outside])) == 0.0
    # deterministic under reseeding
    g = sp.random_field(grid16, np.random.default_rng(7), 3,
                        band=(0.3, 1.5), divergence_free=True)
    assert np.array_equal(f.coef, g.coef)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def test_checkpoint_round_trip(tmp_path, grid16, rng):
    f = sp.random_field(grid16, rng, 3, band=(0.2, 2.0))
    path = tmp_path / "state.chk"
    sp.save_checkpoint(path, f, "u", 1.25)
    g, name, t = sp.load_checkpoint(path)
    assert name == "u" and t == 1.25
    assert g.grid == grid16
    assert np.array_equal(g.coef, f.coef.astype(np.complex64))
    # file-level bit-exactness under a save/load/save cycle
    path2 = tmp_path / "state2.chk"
    sp.save_checkpoint(path2, g, name, t)
    assert path.read_bytes() == path2.read_bytes()


def test_checkpoint_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.chk"
    path.write_bytes(b"NOPE" + b"\x00" * 64)
    with pytest.raises(sp.SpectralError):
        sp.load_checkpoint(path)
