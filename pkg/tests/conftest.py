import numpy as np
import pytest

from hallmhd import spectral as sp


@pytest.fixture
def grid8():
    return sp.Grid(8, 1.0)


@pytest.fixture
def grid16():
    return sp.Grid(16, 2.0)


@pytest.fixture
def grid32():
    return sp.Grid(32, 4.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def brute_force_product(f: sp.SpectralField, g: sp.SpectralField
                        ) -> sp.SpectralField:
    """Cyclic convolution of spectral coefficients by direct summation.

    Independent oracle for the FFT-based pointwise product: uses only
    array rolls and sums, never a transform.  O(n^6); for tiny grids
    only.
    """
    grid = f.grid
    n = grid.n
    assert f.components == 1 and g.components == 1
    fc, gc = f.coef[0], g.coef[0]
    conv = np.zeros_like(fc)
    for a0 in range(n):
        for a1 in range(n):
            for a2 in range(n):
                w = fc[a0, a1, a2]
                if w != 0.0:
                    conv += w * np.roll(gc, (a0, a1, a2), axis=(0, 1, 2))
    return sp.dealias(sp.SpectralField(grid, conv[None]))
