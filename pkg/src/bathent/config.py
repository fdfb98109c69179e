"""Run configuration: a flat ``key = value`` text format.

Blank lines and ``#`` comments are ignored; every other line must be
``key = value`` with a documented key.  Values may be ``auto`` where noted.

Keys
----
``task``            evolve | asymptotic | rmax | markov | scan (optional; the CLI subcommand wins)
``solver``          TimeDomain | Equilibrium | Markov | MarkovApprox
``geometry``        Free1D | Free3D | Waveguide
``gamma``, ``s``, ``omega_c``, ``omega0`` (waveguide gap), ``temperature``,
``include_free_background`` (true/false)
``system_omega``    bare oscillator frequency (default 1)
``r``, ``kappa``    separation and initial squeezing
``grid``            auto | Uniform | QuadraticFromGap
``n_grid``, ``s_max``, ``dt``       auto or a number
``t_max``           final time (default 60)
``output_dt``       sampling of written time series (default 0.1)
``metric``          final | max, the scalar taken from a trajectory in ``scan``
``g``, ``vh_frequency``             effective-model coupling and van Hove frequency
``rmax_mode``       Asymptotic | Transient; ``r_lo``, ``r_hi`` (auto), ``rmax_tol``
``scan``            name of the scanned parameter, with either ``scan_values``
                    (comma list) or ``scan_min``, ``scan_max``, ``scan_points``,
                    ``scan_spacing`` (linear | log)
``block``           optional outer repetition over another parameter with ``block_values``
``output``          CSV path
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from . import bath
from .bath import BathSpec
from .errors import ConfigError, DomainError, ParseError, ValidationError
from .gaussian import SystemParams

SOLVERS = ("TimeDomain", "Equilibrium", "Markov", "MarkovApprox")
TASKS = ("evolve", "asymptotic", "rmax", "markov", "scan")
METRICS = ("final", "max")
SPACINGS = ("linear", "log")
RMAX_MODES = ("Asymptotic", "Transient")
GRID_CHOICES = ("auto", "Uniform", "QuadraticFromGap")

# parameters that may be scanned or blocked, with their CSV column labels
AXES = {
    "r": "r[c/Omega0]",
    "temperature": "T[Omega0]",
    "gamma": "gamma[Omega0]",
    "omega_c": "omega_c[Omega0]",
    "omega0": "omega0[Omega0]",
    "kappa": "kappa[1]",
    "s": "s[1]",
    "g": "g[Omega0]",
    "system_omega": "Omega0[Omega0]",
}


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    @property
    def label(self):
        return AXES[self.name]


@dataclass(frozen=True)
class RunConfig:
    solver: str
    system: SystemParams
    bath: BathSpec
    task: str | None = None
    grid: str = "auto"
    n_grid: int | None = None
    s_max: float | None = None
    t_max: float = 60.0
    dt: float | None = None
    output_dt: float = 0.1
    metric: str = "final"
    g: float | None = None
    vh_frequency: float | None = None
    rmax_mode: str = "Asymptotic"
    r_lo: float = 1e-3
    r_hi: float | None = None
    rmax_tol: float = 1e-3
    scan: Axis | None = None
    block: Axis | None = None
    output: str | None = None
    paper_scale: bool = False

    def with_(self, **changes):
        return replace(self, **changes)

    def at(self, name, value):
        """Copy with one scannable parameter set to ``value``."""
        value = float(value)
        try:
            if name in ("r", "kappa"):
                return replace(self, system=replace(self.system, **{name: value}))
            if name == "system_omega":
                return replace(self, system=replace(self.system, omega0=value))
            if name == "g":
                return replace(self, g=value)
            return replace(self, bath=replace(self.bath, **{name: value}))
        except DomainError as exc:
            raise ValidationError(f"{name} = {value}: {exc}") from exc

    @property
    def effective_vh_frequency(self):
        if self.vh_frequency is not None:
            return self.vh_frequency
        return self.bath.omega0 if self.bath.geometry == bath.WAVEGUIDE else 1.0


# ---------------------------------------------------------------------------
# parsing


def _number(text):
    return float(text)


def _auto_number(text):
    return None if text.lower() == "auto" else float(text)


def _auto_int(text):
    if text.lower() == "auto":
        return None
    value = float(text)
    if value != int(value):
        raise ValueError(f"{text!r} is not an integer")
    return int(value)


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"{text!r} is not a boolean")


def _word(choices):
    def parse(text):
        for c in choices:
            if c.lower() == text.lower():
                return c
        raise ValueError(f"{text!r} is not one of {', '.join(choices)}")

    return parse


def _number_list(text):
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(x) for x in items)


def _axis_name(text):
    if text not in AXES:
        raise ValueError(f"{text!r} cannot be scanned; choose from {', '.join(AXES)}")
    return text


KEYS = {
    "task": _word(TASKS),
    "solver": _word(SOLVERS),
    "geometry": _word(bath.GEOMETRIES),
    "gamma": _number,
    "s": _number,
    "omega_c": _number,
    "omega0": _number,
    "temperature": _number,
    "include_free_background": _bool,
    "system_omega": _number,
    "r": _number,
    "kappa": _number,
    "grid": _word(GRID_CHOICES),
    "n_grid": _auto_int,
    "s_max": _auto_number,
    "t_max": _number,
    "dt": _auto_number,
    "output_dt": _number,
    "metric": _word(METRICS),
    "g": _auto_number,
    "vh_frequency": _auto_number,
    "rmax_mode": _word(RMAX_MODES),
    "r_lo": _number,
    "r_hi": _auto_number,
    "rmax_tol": _number,
    "scan": _axis_name,
    "scan_values": _number_list,
    "scan_min": _number,
    "scan_max": _number,
    "scan_points": _auto_int,
    "scan_spacing": _word(SPACINGS),
    "block": _axis_name,
    "block_values": _number_list,
    "output": str,
}
REQUIRED = ("solver", "geometry", "gamma", "s", "omega_c")


def parse_text(text):
    """Parse config text into a ``{key: value}`` dict (syntax and value types only)."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ParseError(f"missing value for {key!r}", lineno)
        try:
            values[key] = KEYS[key](value)
        except ValueError as exc:
            raise ParseError(f"{key}: {exc}", lineno) from None
    return values


def _spaced(lo, hi, n, spacing):
    if n is None or n < 1:
        raise ValidationError("scan_points >= 1 required")
    if spacing == "log":
        if not (lo > 0 and hi > 0):
            raise ValidationError("log spacing requires scan_min > 0 and scan_max > 0")
        return tuple(float(x) for x in np.geomspace(lo, hi, n))
    return tuple(float(x) for x in np.linspace(lo, hi, n))


def _axis(values, prefix):
    name = values.get(prefix)
    keys = [k for k in values if k.startswith(prefix + "_")]
    if name is None:
        if keys:
            raise ValidationError(f"{', '.join(sorted(keys))} given without {prefix!r}")
        return None
    if prefix == "block":
        if "block_values" not in values:
            raise ValidationError("block requires block_values")
        return Axis(name, values["block_values"])
    ranged = [k for k in ("scan_min", "scan_max", "scan_points", "scan_spacing") if k in values]
    if "scan_values" in values:
        if ranged:
            raise ValidationError("give either scan_values or scan_min/scan_max/scan_points, not both")
        pts = values["scan_values"]
    else:
        missing = [k for k in ("scan_min", "scan_max", "scan_points") if k not in values]
        if missing:
            raise ValidationError(f"scan requires {', '.join(missing)} (or scan_values)")
        pts = _spaced(values["scan_min"], values["scan_max"], values["scan_points"],
                      values.get("scan_spacing", "linear"))
    if any(not math.isfinite(p) for p in pts):
        raise ValidationError("scan values must be finite")
    if list(pts) != sorted(pts):
        raise ValidationError("scan values must be ordered (rows are ordered by the scan axis)")
    return Axis(name, pts)


def _check_positive(values, *names, strict=True):
    for name in names:
        if name in values and values[name] is not None:
            v = values[name]
            if not math.isfinite(v) or (v <= 0 if strict else v < 0):
                op = ">" if strict else ">="
                raise ValidationError(f"{name} {op} 0 required, got {v}")


def build_config(values):
    """Validate a parsed dict and assemble a :class:`RunConfig`."""
    missing = [k for k in REQUIRED if k not in values]
    if missing:
        raise ValidationError(f"missing required key(s): {', '.join(missing)}")
    gamma = values["gamma"]
    if not (math.isfinite(gamma) and gamma >= 0):
        raise ValidationError(f"gamma > 0 required (0 allowed for an uncoupled run), got {gamma}")
    _check_positive(values, "omega_c", "system_omega", "t_max", "dt", "output_dt", "s_max", "r_lo", "r_hi",
                    "rmax_tol", "vh_frequency")
    _check_positive(values, "temperature", "r", "g", strict=False)
    if values.get("kappa", 1.0) < 1:
        raise ValidationError(f"kappa >= 1 required, got {values['kappa']}")
    if values["s"] < 1:
        raise ValidationError(f"s >= 1 required, got {values['s']}")
    if "n_grid" in values and values["n_grid"] is not None and values["n_grid"] < 1:
        raise ValidationError("n_grid >= 1 required")
    geometry = values["geometry"]
    gap = values.get("omega0", 0.0)
    if geometry == bath.WAVEGUIDE and not gap > 0:
        raise ValidationError("omega0 > 0 required for the Waveguide geometry")
    if geometry != bath.WAVEGUIDE and gap != 0:
        raise ValidationError("omega0 (gap) only applies to the Waveguide geometry")
    try:
        spec = BathSpec(
            geometry=geometry,
            gamma=gamma,
            s=values["s"],
            omega_c=values["omega_c"],
            omega0=gap,
            temperature=values.get("temperature", 0.0),
            include_free_background=values.get("include_free_background", True),
        )
        system = SystemParams(values.get("system_omega", 1.0), values.get("r", 0.1), values.get("kappa", 1.0))
    except DomainError as exc:
        raise ValidationError(str(exc)) from exc

    scan = _axis(values, "scan")
    block = _axis(values, "block")
    if scan is not None and block is not None and scan.name == block.name:
        raise ValidationError("scan and block must use different parameters")
    solver = values["solver"]
    if values.get("grid") == "Uniform" and geometry == bath.WAVEGUIDE:
        raise ValidationError("the Waveguide geometry requires grid = QuadraticFromGap")
    if values.get("grid") == "QuadraticFromGap" and geometry != bath.WAVEGUIDE:
        raise ValidationError("grid = QuadraticFromGap requires the Waveguide geometry")

    kwargs = {k: values[k] for k in (
        "task", "grid", "n_grid", "s_max", "t_max", "dt", "output_dt", "metric", "g", "vh_frequency",
        "rmax_mode", "r_lo", "r_hi", "rmax_tol", "output",
    ) if k in values}
    cfg = RunConfig(solver=solver, system=system, bath=spec, scan=scan, block=block, **kwargs)
    # every scanned point must itself be valid
    for axis in (scan, block):
        if axis is not None:
            for v in axis.values:
                cfg.at(axis.name, v)
    return cfg


def load_config(path):
    """Read, parse and validate a configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return build_config(parse_text(text))


def loads_config(text):
    return build_config(parse_text(text))
