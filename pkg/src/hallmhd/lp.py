"""Dyadic decomposition, Besov norms, Bony paraproducts, commutator
blocks, and ensemble verifiers for the frequency-space inequalities.

The radial profiles are built so the partition of unity telescopes
exactly: with a smooth cutoff ``chi`` equal to 1 on [0, 3/4] and 0 on
[4/3, inf), the annulus profile is ``phi(r) = chi(r/2) - chi(r)``
(supported in [3/4, 8/3]), hence sum_j phi(2^-j r) = 1 for every r > 0
up to roundoff, and the low cutoff S_j is exactly chi(2^-j |k|).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, field
import json
import math

import numpy as np

from .spectral import (Grid, SpectralField, SpectralError, dealias,
                       differential, lambda_pow, norms, pin_mean,
                       random_field, transform_forward, transform_inverse)


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

def _bump_transition(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t<=0, 1 for t>=1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def chi_profile(rho: np.ndarray) -> np.ndarray:
    """Smooth radial cutoff: 1 on [0, 3/4], 0 on [4/3, inf)."""
    rho = np.asarray(rho, dtype=np.float64)
    return _bump_transition((4.0 / 3.0 - rho) / (4.0 / 3.0 - 3.0 / 4.0))


def phi_profile(rho: np.ndarray) -> np.ndarray:
    """Smooth annulus profile supported in [3/4, 8/3]."""
    rho = np.asarray(rho, dtype=np.float64)
    return chi_profile(rho / 2.0) - chi_profile(rho)


@dataclass(frozen=True)
class DyadicPartition:
    """Resolvable dyadic band range for a grid, with the radial cutoffs."""

    grid: Grid
    j_min: int
    j_max: int
    # per-band multiplier caches; the smooth profiles are expensive to
    # evaluate on the full grid and reused for every block extraction
    _phi_cache: dict = field(default_factory=dict, repr=False, compare=False)
    _chi_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def bands(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def _kmag(self) -> np.ndarray:
        kmag = self._phi_cache.get("kmag")
        if kmag is None:
            kmag = self.grid.k_magnitude()
            self._phi_cache["kmag"] = kmag
        return kmag

    def phi_weights(self, j: int) -> np.ndarray:
        w = self._phi_cache.get(j)
        if w is None:
            w = phi_profile(self._kmag() * 2.0 ** (-j))
            self._phi_cache[j] = w
        return w

    def chi_weights(self, j: int) -> np.ndarray:
        w = self._chi_cache.get(j)
        if w is None:
            w = chi_profile(self._kmag() * 2.0 ** (-j))
            self._chi_cache[j] = w
        return w


def build_partition(grid: Grid) -> DyadicPartition:
    rho_min = grid.k_min
    rho_max = math.sqrt(3.0) * grid.k_max_axis
    j_min = math.ceil(math.log2(rho_min * 3.0 / 8.0))
    j_max = math.floor(math.log2(rho_max * 4.0 / 3.0))
    if j_max < j_min:
        raise SpectralError("grid too small to host one full dyadic band")
    return DyadicPartition(grid, j_min, j_max)


@dataclass(frozen=True)
class BesovSpec:
    """Homogeneous Besov space indices (s, p, r)."""

    s: float
    p: float = 2.0
    r: float = 2.0

    def __post_init__(self):
        if self.p < 1 or self.r < 1:
            raise SpectralError("Besov indices p, r must be >= 1")


@dataclass(frozen=True)
class MixedNormSpec:
    """Chemin-Lerner mixed time-space norm indices."""

    q: float
    besov: BesovSpec

    def __post_init__(self):
        if self.q < 1:
            raise SpectralError("time exponent q must be >= 1")


# ---------------------------------------------------------------------------
# blocks and norms
# ---------------------------------------------------------------------------

def dyadic_block(u: SpectralField, j: int, part: DyadicPartition) -> SpectralField:
    if not (part.j_min <= j <= part.j_max):
        raise SpectralError(f"band {j} outside resolvable range "
                            f"[{part.j_min}, {part.j_max}]")
    return SpectralField(u.grid, part.phi_weights(j) * u.coef,
                         u.divergence_free)


def low_cutoff(u: SpectralField, j: int, part: DyadicPartition) -> SpectralField:
    if j <= part.j_min:
        return SpectralField(u.grid, np.zeros_like(u.coef))
    if j > part.j_max + 1:
        coef = u.coef.copy()
        coef[:, 0, 0, 0] = 0.0
        return SpectralField(u.grid, coef, u.divergence_free)
    coef = part.chi_weights(j) * u.coef
    coef[:, 0, 0, 0] = 0.0
    return SpectralField(u.grid, coef, u.divergence_free)


def _band_lp(u: SpectralField, j: int, part: DyadicPartition, p: float) -> float:
    blk = dyadic_block(u, j, part)
    if p == 2.0:
        return norms(blk, "L2")
    return norms(blk, "Lp", p=p)


def _ell_r(values: np.ndarray, r: float) -> float:
    if np.isinf(r):
        return float(np.max(values)) if values.size else 0.0
    return float(np.sum(values ** r) ** (1.0 / r))


def besov_norm(u: SpectralField, spec: BesovSpec, part: DyadicPartition) -> float:
    if spec.s <= 0 and not u.is_mean_zero(
            1e-13 * max(1.0, float(np.max(np.abs(u.coef))))):
        raise SpectralError("Besov norm with s<=0 requires a mean-zero field")
    vals = np.array([2.0 ** (j * spec.s) * _band_lp(u, j, part, spec.p)
                     for j in part.bands])
    return _ell_r(vals, spec.r)


def mixed_norm(series, spec: MixedNormSpec, part: DyadicPartition) -> float:
    """L~^q_T(B^s_{p,r}) of a time-sorted list of (t, field) samples."""
    if len(series) == 0:
        raise SpectralError("mixed norm of an empty series")
    times = np.array([t for t, _ in series])
    if np.any(np.diff(times) <= 0):
        raise SpectralError("series must be strictly time-sorted")
    per_band = []
    for j in part.bands:
        vals = np.array([_band_lp(u, j, part, spec.besov.p)
                         for _, u in series])
        if np.isinf(spec.q):
            per_band.append(np.max(vals))
        else:
            per_band.append(np.trapezoid(vals ** spec.q, times)
                            ** (1.0 / spec.q))
    weights = 2.0 ** (np.arange(part.j_min, part.j_max + 1) * spec.besov.s)
    return _ell_r(weights * np.array(per_band), spec.besov.r)


# ---------------------------------------------------------------------------
# Bony decomposition and commutators
# ---------------------------------------------------------------------------

def _product(a: SpectralField, b: SpectralField) -> SpectralField:
    """Dealiased pointwise product of two scalar fields."""
    pa = transform_inverse(a)
    pb = transform_inverse(b)
    return dealias(transform_forward(pa * pb, a.grid))


def paraproduct(f: SpectralField, g: SpectralField, part: DyadicPartition,
                which: str) -> SpectralField:
    """Bony pieces: T_fg = sum_j S_{j-1}f . Delta_j g, remainder R."""
    for u in (f, g):
        if not u.is_mean_zero(1e-13 * max(1.0, float(np.max(np.abs(u.coef))))):
            raise SpectralError("paraproduct operands must be mean-zero")
    if which == "T_gf":
        return paraproduct(g, f, part, "T_fg")
    out = np.zeros_like(f.coef)
    if which == "T_fg":
        for j in part.bands:
            lo = low_cutoff(f, j - 1, part)
            out += _product(lo, dyadic_block(g, j, part)).coef
        return SpectralField(f.grid, out)
    if which == "R":
        for j in part.bands:
            for jp in (j - 1, j, j + 1):
                if part.j_min <= jp <= part.j_max:
                    out += _product(dyadic_block(f, j, part),
                                    dyadic_block(g, jp, part)).coef
        return SpectralField(f.grid, out)
    raise SpectralError(f"unknown paraproduct part {which!r}")


def commutator_block(j: int, f: SpectralField, g: SpectralField,
                     part: DyadicPartition) -> SpectralField:
    """[Delta_j, f]g = Delta_j(fg) - f Delta_j g, products dealiased."""
    fg = _product(f, g)
    first = dyadic_block(fg, j, part)
    second = _product(f, dyadic_block(g, j, part))
    return SpectralField(f.grid, first.coef - second.coef)


def lambda_commutator(s: float, f: SpectralField, g: SpectralField) -> SpectralField:
    """[Lambda^s, f]g with dealiased products (Kato-Ponce oracle)."""
    fg = _product(f, g)
    return SpectralField(f.grid, lambda_pow(fg, s).coef
                         - _product(f, lambda_pow(g, s)).coef)


# ---------------------------------------------------------------------------
# inequality verification harness
# ---------------------------------------------------------------------------

@dataclass
class ConstantReport:
    """Empirical constant of an inequality over a seeded ensemble."""

    inequality_id: str
    params: dict
    n_samples: int
    max_ratio: float
    min_ratio: float
    p95_ratio: float
    grid: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _ensemble_field(grid: Grid, rng: np.random.Generator,
                    band: tuple[float, float], slope: float) -> SpectralField:
    return random_field(grid, rng, 1, band=band, slope=slope)


def _besov(u, s, r, part):
    return besov_norm(u, BesovSpec(s, 2.0, r), part)


def verify_inequality(inequality_id: str, params: dict, grid: Grid,
                      n_samples: int = 200, seed: int = 0,
                      band: tuple[float, float] | None = None,
                      slope: float = 1.0) -> ConstantReport:
    """Max LHS/RHS of a frequency-space inequality over random fields.

    The ensemble is band-limited (default: the grid's full dealiased
    range with |k| >= 2/M so every band is fully resolved on n=32 and
    n=64 alike) with a power-law radial envelope, seeded.
    """
    part = build_partition(grid)
    rng = np.random.default_rng(seed)
    if band is None:
        # resolution-independent default so constants can be compared
        # across grids that both resolve it (n=32 keeps |m| <= 10)
        band = (2.0 / grid.M, min(9.0, 0.9 * grid.dealias_cutoff()) / grid.M)
    ratios = np.empty(n_samples)

    if inequality_id == "bernstein":
        j = int(params["j"])
        if not (part.j_min <= j <= part.j_max):
            raise SpectralError(f"band {j} not resolvable")
        kmag = grid.k_magnitude()
        annulus = (kmag >= 0.75 * 2.0**j) & (kmag <= (8.0 / 3.0) * 2.0**j)
        annulus &= grid.dealias_mask()
        if not np.any(annulus):
            raise SpectralError(f"annulus at j={j} holds no grid modes")
        for i in range(n_samples):
            u = _ensemble_field(grid, rng,
                                (0.5 * 2.0**j, (8.0 / 3.0) * 2.0**j), slope)
            u = SpectralField(grid, u.coef * annulus)
            grad_l2 = norms(u, "Hdot", s=1.0)
            ratios[i] = grad_l2 / (2.0**j * norms(u, "L2"))
    elif inequality_id == "sobolev_embed":
        s = float(params["s"])
        if not 0 <= s < 1.5:
            raise SpectralError("Sobolev embedding requires 0 <= s < 3/2")
        p = 6.0 / (3.0 - 2.0 * s)
        for i in range(n_samples):
            u = _ensemble_field(grid, rng, band, slope)
            ratios[i] = norms(u, "Lp", p=p) / norms(u, "Hdot", s=s)
    elif inequality_id == "interpolation":
        s1, s2 = float(params["s1"]), float(params["s2"])
        theta = float(params["theta"])
        r = float(params.get("r", 2.0))
        if not (s1 < s2 and 0 < theta < 1):
            raise SpectralError("interpolation requires s1 < s2, 0 < theta < 1")
        s_mid = theta * s1 + (1 - theta) * s2
        for i in range(n_samples):
            u = _ensemble_field(grid, rng, band, slope)
            lhs = _besov(u, s_mid, r, part)
            rhs = _besov(u, s1, r, part) ** theta * _besov(u, s2, r, part) ** (1 - theta)
            ratios[i] = lhs / rhs
    elif inequality_id == "product_law":
        s, r = float(params["s"]), float(params.get("r", 2.0))
        eta, theta = float(params["eta"]), float(params["theta"])
        if not (s > -1.5 and eta > 0 and theta > 0):
            raise SpectralError("product law requires s > -3/2 and eta, theta > 0")
        for i in range(n_samples):
            f = _ensemble_field(grid, rng, band, slope)
            g = _ensemble_field(grid, rng, band, slope)
            lhs = _besov(_product(f, g), s, r, part)
            rhs = (_besov(f, 1.5 - eta, np.inf, part) * _besov(g, s + eta, r, part)
                   + _besov(g, 1.5 - theta, np.inf, part) * _besov(f, s + theta, r, part))
            ratios[i] = lhs / rhs
    elif inequality_id == "commutator_est":
        s, r = float(params["s"]), float(params.get("r", 2.0))
        eta, theta = float(params["eta"]), float(params["theta"])
        if not (s > -1.5 and 0 < eta < 2.5 and theta > 0):
            raise SpectralError(
                "commutator estimate requires s > -3/2, 0 < eta < 5/2, theta > 0")
        for i in range(n_samples):
            f = _ensemble_field(grid, rng, band, slope)
            g = _ensemble_field(grid, rng, band, slope)
            # same quantity as commutator_block per band, but with the
            # product fg and the physical factor f computed once
            prod = _product(f, g)
            f_phys = transform_inverse(f)
            vals = np.empty(len(part.bands))
            for idx, j in enumerate(part.bands):
                blk_g = transform_inverse(dyadic_block(g, j, part))
                fg_j = dealias(transform_forward(f_phys * blk_g, grid))
                comm = dyadic_block(prod, j, part).coef - fg_j.coef
                vals[idx] = (2.0 ** (j * s)
                             * norms(SpectralField(grid, comm), "L2"))
            lhs = _ell_r(vals, r)
            rhs = (_besov(f, 2.5 - eta, r, part) * _besov(g, s + eta - 1.0, r, part)
                   + _besov(g, 1.5 - theta, np.inf, part) * _besov(f, s + theta, r, part))
            ratios[i] = lhs / rhs
    elif inequality_id == "kato_ponce":
        s = float(params["s"])
        p1 = float(params.get("p1", 4.0))
        p2 = float(params.get("p2", 4.0))
        p3 = float(params.get("p3", 4.0))
        p4 = float(params.get("p4", 4.0))
        if s <= 0:
            raise SpectralError("Kato-Ponce requires s > 0")
        if not (abs(1 / p1 + 1 / p2 - 0.5) < 1e-12
                and abs(1 / p3 + 1 / p4 - 0.5) < 1e-12):
            raise SpectralError("Kato-Ponce exponents must satisfy "
                                "1/p1+1/p2 = 1/p3+1/p4 = 1/2")
        for i in range(n_samples):
            f = _ensemble_field(grid, rng, band, slope)
            g = _ensemble_field(grid, rng, band, slope)
            lhs = norms(lambda_commutator(s, f, g), "L2")
            rhs = (norms(lambda_pow(f, s), "Lp", p=p1) * norms(g, "Lp", p=p2)
                   + norms(lambda_pow(g, s - 1.0), "Lp", p=p3)
                   * norms(differential(f, "gradient"), "Lp", p=p4))
            ratios[i] = lhs / rhs
    else:
        raise SpectralError(f"unknown inequality id {inequality_id!r}")

    return ConstantReport(
        inequality_id=inequality_id,
        params={k: (None if v is None else float(v)) for k, v in params.items()},
        n_samples=n_samples,
        max_ratio=float(np.max(ratios)),
        min_ratio=float(np.min(ratios)),
        p95_ratio=float(np.percentile(ratios, 95)),
        grid={"n": grid.n, "M": grid.M},
    )
