"""Spectral substrate: grid, transforms, differential operators, Leray
projection, dealiasing, norms, and the binary checkpoint format.

Conventions (fixed once, used everywhere):

* The domain is the periodic torus of side ``2*pi*M``.  Wavevectors are
  ``k = m / M`` with integer mode index ``m`` per axis, so the smallest
  nonzero |k| is ``1/M`` and the largest resolved |k| per axis is
  ``n/(2M)``.
* Coefficients are Fourier-series amplitudes (``norm="forward"`` FFT):
  a constant field 1 has coefficient 1 at k=0, and
  ``u(x) = sum_k c(k) exp(i k.x)``.
* Parseval with this convention reads
  ``int |u|^2 dx = V * sum_k |c(k)|^2`` with ``V = (2 pi M)^3``; all L2
  and Sobolev norms below include the volume factor.
* Mean modes (k=0) of every evolved field are pinned to zero; Lambda^s
  with s<0 and the inverse Laplacian are singular there.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import struct

import numpy as np

from . import kernels


class SpectralError(ValueError):
    """Invalid input to a spectral operation."""


# ---------------------------------------------------------------------------
# grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the torus of side 2*pi*M."""

    n: int
    M: float = 16.0

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise SpectralError(f"grid.n must be a power of two >= 8, got {self.n}")
        if self.M <= 0:
            raise SpectralError(f"grid.M must be positive, got {self.M}")

    @property
    def volume(self) -> float:
        return (2.0 * np.pi * self.M) ** 3

    @property
    def dx(self) -> float:
        return 2.0 * np.pi * self.M / self.n

    @property
    def k_min(self) -> float:
        return 1.0 / self.M

    @property
    def k_max_axis(self) -> float:
        return self.n / (2.0 * self.M)

    def modes(self) -> np.ndarray:
        """Integer mode indices along one axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    def wavevectors(self):
        """(kx, ky, kz) arrays of shape (n, n, n), units 1/M."""
        m = self.modes() / self.M
        return np.meshgrid(m, m, m, indexing="ij", sparse=True)

    def k_magnitude(self) -> np.ndarray:
        kx, ky, kz = self.wavevectors()
        return np.sqrt(kx**2 + ky**2 + kz**2)

    def coordinates(self):
        x = 2.0 * np.pi * self.M * np.arange(self.n) / self.n
        return np.meshgrid(x, x, x, indexing="ij", sparse=True)

    def dealias_cutoff(self) -> int:
        """Largest kept mode index under the 2/3 rule."""
        return self.n // 3

    def dealias_mask(self) -> np.ndarray:
        m = np.abs(self.modes())
        keep = m <= self.dealias_cutoff()
        return (keep[:, None, None] & keep[None, :, None]
                & keep[None, None, :])


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralField:
    """Real vector/scalar field stored as complex Fourier coefficients.

    ``coef`` has shape (c, n, n, n) with c in {1, 3}.  Fields are treated
    as immutable values; operations return new instances.
    """

    grid: Grid
    coef: np.ndarray
    divergence_free: bool = dc_field(default=False, compare=False)

    def __post_init__(self):
        n = self.grid.n
        if self.coef.ndim != 4 or self.coef.shape[1:] != (n, n, n):
            raise SpectralError(
                f"coefficient shape {self.coef.shape} incompatible with grid n={n}")
        if self.coef.shape[0] not in (1, 3):
            raise SpectralError("field must have 1 or 3 components")

    @property
    def components(self) -> int:
        return self.coef.shape[0]

    def with_coef(self, coef: np.ndarray, divergence_free: bool = False) -> "SpectralField":
        return SpectralField(self.grid, coef, divergence_free)

    def mean_mode(self) -> np.ndarray:
        return self.coef[:, 0, 0, 0]

    def is_mean_zero(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.mean_mode()) <= tol))

    def hermitian_defect(self) -> float:
        """Max |c(-k) - conj(c(k))| relative to max |c|."""
        flipped = self.coef[:, ::-1, ::-1, ::-1]
        flipped = np.roll(flipped, 1, axis=(1, 2, 3))
        scale = np.max(np.abs(self.coef))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(flipped - np.conj(self.coef))) / scale)


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosity, resistivity and Hall coefficient."""

    mu: float = 1.0
    nu: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        for name in ("mu", "nu", "kappa"):
            if getattr(self, name) <= 0:
                raise SpectralError(f"{name} must be strictly positive")


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------

def transform_forward(samples: np.ndarray, grid: Grid) -> SpectralField:
    """Physical samples (c, n, n, n) or (n, n, n) -> spectral field."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim == 3:
        arr = arr[None]
    n = grid.n
    if arr.ndim != 4 or arr.shape[1:] != (n, n, n) or arr.shape[0] not in (1, 3):
        raise SpectralError(
            f"sample shape {np.asarray(samples).shape} incompatible with grid n={n}")
    coef = np.fft.fftn(arr, axes=(1, 2, 3), norm="forward")
    return SpectralField(grid, coef)


def transform_inverse(field: SpectralField) -> np.ndarray:
    """Spectral field -> physical samples (c, n, n, n), real part."""
    phys = np.fft.ifftn(field.coef, axes=(1, 2, 3), norm="forward")
    return np.ascontiguousarray(phys.real)


# ---------------------------------------------------------------------------
# differential operators (exact spectral multipliers)
# ---------------------------------------------------------------------------

def differential(field: SpectralField, op: str) -> SpectralField:
    grid = field.grid
    kx, ky, kz = grid.wavevectors()
    c = field.coef
    if op == "gradient":
        if field.components != 1:
            raise SpectralError("gradient expects a scalar field")
        out = np.stack([1j * kx * c[0], 1j * ky * c[0], 1j * kz * c[0]])
        return SpectralField(grid, out)
    if op == "divergence":
        if field.components != 3:
            raise SpectralError("divergence expects a vector field")
        out = 1j * (kx * c[0] + ky * c[1] + kz * c[2])
        return SpectralField(grid, out[None])
    if op == "curl":
        if field.components != 3:
            raise SpectralError("curl expects a vector field")
        out = np.stack([
            1j * (ky * c[2] - kz * c[1]),
            1j * (kz * c[0] - kx * c[2]),
            1j * (kx * c[1] - ky * c[0]),
        ])
        return SpectralField(grid, out, divergence_free=True)
    if op == "laplacian":
        k2 = kx**2 + ky**2 + kz**2
        return SpectralField(grid, -k2 * c, field.divergence_free)
    raise SpectralError(f"unknown differential operator {op!r}")


def lambda_pow(field: SpectralField, s: float) -> SpectralField:
    """Fractional Laplacian power Lambda^s = (-Delta)^(s/2)."""
    if s == 0.0:
        return field
    if s < 0 and not field.is_mean_zero(1e-14 * max(1.0, float(np.max(np.abs(field.coef))))):
        raise SpectralError("Lambda^s with s<0 requires a mean-zero field")
    kmag = field.grid.k_magnitude()
    with np.errstate(divide="ignore"):
        w = np.where(kmag > 0, kmag**s, 0.0)
    return SpectralField(field.grid, w * field.coef, field.divergence_free)


def leray_project(field: SpectralField) -> SpectralField:
    """Divergence-free projection: c -> c - k (k.c)/|k|^2."""
    if field.components != 3:
        raise SpectralError("Leray projection expects a vector field")
    grid = field.grid
    kx, ky, kz = grid.wavevectors()
    k2 = kx**2 + ky**2 + kz**2
    k2s = np.where(k2 > 0, k2, 1.0)
    c = field.coef
    kdot = (kx * c[0] + ky * c[1] + kz * c[2]) / k2s
    out = np.stack([c[0] - kx * kdot, c[1] - ky * kdot, c[2] - kz * kdot])
    return SpectralField(grid, out, divergence_free=True)


def dealias(field: SpectralField) -> SpectralField:
    mask = field.grid.dealias_mask()
    return SpectralField(field.grid, field.coef * mask, field.divergence_free)


def pin_mean(field: SpectralField) -> SpectralField:
    coef = field.coef.copy()
    coef[:, 0, 0, 0] = 0.0
    return SpectralField(field.grid, coef, field.divergence_free)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def norms(field: SpectralField, kind: str, s: float | None = None,
          p: float | None = None) -> float:
    """L2 / Hdot(s) / H(s) by Parseval, Lp by physical quadrature.

    Vector fields use the pointwise Euclidean magnitude inside Lp.
    """
    grid = field.grid
    V = grid.volume
    if kind == "L2":
        return float(np.sqrt(V * kernels.weighted_l2sq(field.coef, np.float64(1.0))))
    if kind == "Hdot":
        if s is None:
            raise SpectralError("Hdot norm requires s")
        if s < 0 and not field.is_mean_zero(
                1e-14 * max(1.0, float(np.max(np.abs(field.coef))))):
            raise SpectralError("Hdot(s<0) requires a mean-zero field")
        kmag = grid.k_magnitude()
        with np.errstate(divide="ignore"):
            w = np.where(kmag > 0, kmag ** (2.0 * s), 0.0)
        return float(np.sqrt(V * kernels.weighted_l2sq(field.coef, w)))
    if kind == "H":
        if s is None:
            raise SpectralError("H norm requires s")
        l2 = norms(field, "L2")
        hd = norms(field, "Hdot", s=s)
        return float(np.hypot(l2, hd))
    if kind == "Lp":
        if p is None or p < 1:
            raise SpectralError("Lp norm requires p >= 1")
        phys = transform_inverse(field)
        mag = np.sqrt(np.sum(phys**2, axis=0))
        if np.isinf(p):
            return float(np.max(mag))
        dV = V / grid.n**3
        return float((np.sum(mag**p) * dV) ** (1.0 / p))
    raise SpectralError(f"unknown norm kind {kind!r}")


def inner_l2(a: SpectralField, b: SpectralField) -> float:
    """Spectral inner product int a.b dx (real fields)."""
    if a.grid != b.grid:
        raise SpectralError("fields live on different grids")
    return float(a.grid.volume * np.sum(a.coef * np.conj(b.coef)).real)


# ---------------------------------------------------------------------------
# random fields
# ---------------------------------------------------------------------------

def random_field(grid: Grid, rng: np.random.Generator, components: int = 1,
                 band: tuple[float, float] | None = None,
                 slope: float = 0.0, divergence_free: bool = False) -> SpectralField:
    """Seeded Gaussian random field with power-law radial envelope.

    |c(k)| ~ |k|^(-slope) on the band (k_lo, k_hi]; mean-zero, Hermitian
    (built from real white noise), dealiased.
    """
    white = rng.standard_normal((components, grid.n, grid.n, grid.n))
    f = transform_forward(white, grid)
    kmag = grid.k_magnitude()
    with np.errstate(divide="ignore"):
        env = np.where(kmag > 0, kmag ** (-slope), 0.0)
    if band is not None:
        k_lo, k_hi = band
        env = np.where((kmag > k_lo) & (kmag <= k_hi), env, 0.0)
    f = SpectralField(grid, f.coef * env)
    f = dealias(pin_mean(f))
    if divergence_free:
        if components != 3:
            raise SpectralError("divergence-free request needs 3 components")
        f = leray_project(f)
    return f


# ---------------------------------------------------------------------------
# checkpoint format
# ---------------------------------------------------------------------------

_MAGIC = b"HMHD1"


def save_checkpoint(path, field: SpectralField, name: str, t: float) -> None:
    """Portable little-endian layout: magic, n, M, components, name, t,
    then complex64 coefficients in row-major k order, component-major."""
    name_b = name.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IdI", field.grid.n, field.grid.M,
                             field.components))
        fh.write(struct.pack("<I", len(name_b)))
        fh.write(name_b)
        fh.write(struct.pack("<d", t))
        fh.write(np.ascontiguousarray(
            field.coef.astype("<c8")).tobytes())


def load_checkpoint(path) -> tuple[SpectralField, str, float]:
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != _MAGIC:
            raise SpectralError(f"bad checkpoint magic {magic!r}")
        n, M, ncomp = struct.unpack("<IdI", fh.read(16))
        (name_len,) = struct.unpack("<I", fh.read(4))
        name = fh.read(name_len).decode("utf-8")
        (t,) = struct.unpack("<d", fh.read(8))
        raw = fh.read(ncomp * n * n * n * 8)
        coef = np.frombuffer(raw, dtype="<c8").reshape(ncomp, n, n, n)
    field = SpectralField(Grid(n, M), coef.astype(np.complex128))
    return field, name, t
