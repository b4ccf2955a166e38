"""JSON run configuration with strict validation.

Unknown keys are rejected with the full field path so typos fail loudly
instead of silently falling back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
from pathlib import Path
from typing import Any

from .dynamics import IntegratorConfig, PhysicalParams
from .experiments import DataSpec, RegularityParams
from .spectral import Grid, SpectralError


class ConfigError(ValueError):
    """Raised for malformed or inconsistent run configurations."""


def _require_mapping(obj: Any, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object, got {type(obj).__name__}")
    return obj


def _take(data: dict, path: str, known: dict[str, Any]) -> dict[str, Any]:
    """Extract known keys, rejecting anything unexpected."""
    unknown = set(data) - set(known)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{path}.{key}: unknown key")
    out = dict(known)
    out.update(data)
    return out


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class RunConfig:
    """Complete description of one simulation run."""

    grid: Grid
    params: PhysicalParams
    integrator: IntegratorConfig
    data: DataSpec
    regularity: RegularityParams = field(default_factory=RegularityParams)
    sample_every: int = 1
    output: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        top = _take(_require_mapping(raw, "config"), "config", {
            "grid": None, "physics": None, "integrator": None,
            "data": None, "regularity": {}, "sample_every": 1,
            "output": None,
        })
        for section in ("grid", "physics", "integrator", "data"):
            if top[section] is None:
                raise ConfigError(f"config.{section}: required section missing")

        g = _take(_require_mapping(top["grid"], "config.grid"), "config.grid",
                  {"n": None, "M": None})
        try:
            grid = Grid(int(g["n"]), _number(g["M"], "config.grid.M"))
        except SpectralError as exc:
            raise ConfigError(f"config.grid: {exc}") from exc

        p = _take(_require_mapping(top["physics"], "config.physics"),
                  "config.physics", {"mu": None, "nu": None, "kappa": None})
        try:
            params = PhysicalParams(
                _number(p["mu"], "config.physics.mu"),
                _number(p["nu"], "config.physics.nu"),
                _number(p["kappa"], "config.physics.kappa"))
        except SpectralError as exc:
            raise ConfigError(f"config.physics: {exc}") from exc

        i = _take(_require_mapping(top["integrator"], "config.integrator"),
                  "config.integrator",
                  {"dt": None, "t_end": None, "scheme": "IF-RK3",
                   "cfl_hall": 0.25})
        try:
            integrator = IntegratorConfig(
                dt=_number(i["dt"], "config.integrator.dt"),
                t_end=_number(i["t_end"], "config.integrator.t_end"),
                scheme=str(i["scheme"]),
                cfl_hall=_number(i["cfl_hall"], "config.integrator.cfl_hall"))
        except SpectralError as exc:
            raise ConfigError(f"config.integrator: {exc}") from exc

        d = _take(_require_mapping(top["data"], "config.data"), "config.data",
                  {"band": None, "amplitude": 1.0, "slope": 0.0, "seed": 0})
        band = d["band"]
        if (not isinstance(band, (list, tuple)) or len(band) != 2):
            raise ConfigError("config.data.band: expected [lo, hi]")
        try:
            data = DataSpec(
                band=(_number(band[0], "config.data.band[0]"),
                      _number(band[1], "config.data.band[1]")),
                amplitude=_number(d["amplitude"], "config.data.amplitude"),
                slope=_number(d["slope"], "config.data.slope"),
                seed=int(d["seed"]))
        except SpectralError as exc:
            raise ConfigError(f"config.data: {exc}") from exc

        r = _take(_require_mapping(top["regularity"], "config.regularity"),
                  "config.regularity",
                  {"sigma": 1.0, "gamma": 1.5, "s": 0.0})
        try:
            regularity = RegularityParams(
                sigma=_number(r["sigma"], "config.regularity.sigma"),
                gamma=_number(r["gamma"], "config.regularity.gamma"),
                s=_number(r["s"], "config.regularity.s"))
        except SpectralError as exc:
            raise ConfigError(f"config.regularity: {exc}") from exc

        sample_every = int(top["sample_every"])
        if sample_every < 1:
            raise ConfigError("config.sample_every: must be >= 1")
        output = top["output"]
        if output is not None and not isinstance(output, str):
            raise ConfigError("config.output: expected a string path")

        cfg = cls(grid=grid, params=params, integrator=integrator,
                  data=data, regularity=regularity,
                  sample_every=sample_every, output=output)
        cfg.validate_consistency()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())

    def validate_consistency(self) -> None:
        """Cross-field checks beyond per-section validation."""
        if self.data.band[1] > self.grid.dealias_cutoff() / self.grid.M:
            raise ConfigError(
                "config.data.band: upper edge exceeds the dealiased "
                f"spectral range (max {self.grid.dealias_cutoff() / self.grid.M:g})")
        # explicit Hall step limit at unit field strength; the stepper
        # re-checks against the actual field each step
        dt_hall = self.integrator.cfl_hall * self.grid.dx**2
        if self.integrator.dt > dt_hall:
            raise ConfigError(
                f"config.integrator.dt: {self.integrator.dt:g} exceeds the "
                f"Hall stability limit {dt_hall:g} for this grid")
