"""Run configuration: YAML-subset parsing, strict key validation, and unit
conversion. The grammar is documented in docs/config.md."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import yaml

from .basis import BasisKind
from .errors import ConfigurationError

# Multipliers to SI base units. Quantities appear as "8.4 MPa" strings.
UNITS = {
    "Pa": 1.0, "kPa": 1.0e3, "MPa": 1.0e6, "GPa": 1.0e9,
    "Pa.s": 1.0, "kPa.s": 1.0e3, "mPa.s": 1.0e-3,
    "m": 1.0, "mm": 1.0e-3, "cm": 1.0e-2,
    "m2": 1.0, "mm2": 1.0e-6,
    "s": 1.0, "ms": 1.0e-3, "min": 60.0, "h": 3600.0,
    "kg/m3": 1.0, "Mg/m3": 1.0e3, "g/cm3": 1.0e3,
    "m/s": 1.0, "m/s2": 1.0, "1/s": 1.0,
}


def parse_quantity(value):
    """'8.4 MPa' -> 8.4e6; bare numbers pass through."""
    if isinstance(value, (int, float)):
        return float(value)
    parts = str(value).split()
    if len(parts) == 1:
        try:
            return float(parts[0])
        except ValueError:
            raise ConfigurationError(f"cannot parse quantity {value!r}") from None
    if len(parts) != 2:
        raise ConfigurationError(f"cannot parse quantity {value!r}")
    try:
        mag = float(parts[0])
    except ValueError:
        raise ConfigurationError(f"cannot parse quantity {value!r}") from None
    unit = parts[1]
    if unit not in UNITS:
        raise ConfigurationError(
            f"unknown unit {unit!r} in {value!r}; known: {sorted(UNITS)}"
        )
    return mag * UNITS[unit]


@dataclass
class ProbeSpec:
    name: str
    x: float
    y: float


@dataclass
class RunConfig:
    """Validated run description.

    preset: one of the built-in scenes; overrides feed the preset builder
    (scalar quantities accept unit suffixes). output_dir receives the run
    artifacts; snapshot_every counts steps between VTK snapshots (0 = off).
    """

    preset: str = "terzaghi"
    scale: float = 1.0
    stabilization: str = "ppp"           # ppp | off
    basis: str = "gimp"                  # gimp | linear
    solver: str = "direct"               # direct | fixed_stress
    output_dir: str = "runs/out"
    snapshot_every: int = 0
    probes: list = field(default_factory=list)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stabilization not in ("ppp", "off"):
            raise ConfigurationError(
                f"stabilization must be 'ppp' or 'off', got {self.stabilization!r}"
            )
        if self.basis not in ("gimp", "linear"):
            raise ConfigurationError(f"basis must be 'gimp' or 'linear', got {self.basis!r}")
        if self.solver not in ("direct", "fixed_stress"):
            raise ConfigurationError(
                f"solver must be 'direct' or 'fixed_stress', got {self.solver!r}"
            )
        if self.snapshot_every < 0:
            raise ConfigurationError("snapshot_every must be >= 0 (0 disables)")
        if self.scale <= 0:
            raise ConfigurationError("scale must be positive")

    @property
    def stabilized(self):
        return self.stabilization == "ppp"

    @property
    def basis_kind(self):
        return BasisKind.GIMP if self.basis == "gimp" else BasisKind.LINEAR


_TOP_KEYS = {"preset", "scale", "stabilization", "basis", "solver",
             "output_dir", "snapshot_every", "probes", "overrides"}
_PROBE_KEYS = {"name", "x", "y"}
# preset-builder keyword arguments that accept unit-suffixed quantities
_QUANTITY_OVERRIDES = {"t_end", "dt"}


def parse_config(text):
    """Parse and validate config text; unknown keys are hard errors."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config parse error: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigurationError("config root must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(
            f"unknown config key(s): {sorted(unknown)}; allowed: {sorted(_TOP_KEYS)}"
        )
    probes = []
    for i, p in enumerate(raw.get("probes") or []):
        if not isinstance(p, dict):
            raise ConfigurationError(f"probes[{i}] must be a mapping")
        bad = set(p) - _PROBE_KEYS
        if bad:
            raise ConfigurationError(f"probes[{i}]: unknown key(s) {sorted(bad)}")
        try:
            probes.append(ProbeSpec(name=str(p["name"]),
                                    x=parse_quantity(p["x"]), y=parse_quantity(p["y"])))
        except KeyError as exc:
            raise ConfigurationError(f"probes[{i}]: missing key {exc}") from None
    overrides = dict(raw.get("overrides") or {})
    for key, val in overrides.items():
        if key in _QUANTITY_OVERRIDES:
            overrides[key] = parse_quantity(val)
    kwargs = {k: raw[k] for k in raw if k in _TOP_KEYS - {"probes", "overrides"}}
    # YAML reads a bare `off` as boolean False; map it back to the keyword
    if kwargs.get("stabilization") is False:
        kwargs["stabilization"] = "off"
    return RunConfig(probes=probes, overrides=overrides, **kwargs)


def serialize_config(cfg):
    """Inverse of parse_config up to formatting; round-trips to equality."""
    data = asdict(cfg)
    data["probes"] = [asdict(p) for p in cfg.probes]
    return yaml.safe_dump(data, sort_keys=True)
