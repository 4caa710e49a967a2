"""Run configuration: INI files with a fixed set of sections and keys.

Example::

    [run]
    name = fig5
    engine = both          ; sfa | tdse | both

    [pulse]
    omega = 0.05
    f0 = 0.075
    cycles = 1             ; comma-separated list runs each value in turn
    envelope = flat        ; flat | sin2

Every other section (``tdse``, ``sfa``, ``map``, ``analysis``) is optional
and falls back to the defaults in :data:`DEFAULTS`.  Unknown sections or
keys are rejected, and every error names the offending key together with
its line in the file.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .pulse import Envelope, PulseParams

ENGINES = ("sfa", "tdse", "both")


def _envelope_ok(value) -> bool:
    try:
        Envelope.parse(value)
    except ValueError:
        return False
    return True


# section -> key -> (type, default, check, description of the valid range)
_POS = (lambda v: v > 0, "> 0")
_NONNEG = (lambda v: v >= 0, ">= 0")
_ANY = (lambda v: True, "any")

DEFAULTS = {
    "run": {
        "name": (str, "run", _ANY),
        "engine": (str, "both", (lambda v: v in ENGINES, "one of sfa, tdse, both")),
    },
    "pulse": {
        "omega": (float, None, _POS),
        "f0": (float, None, _NONNEG),
        "cycles": ("floats", None, (lambda v: all(c > 0 for c in v), "positive numbers")),
        "envelope": (str, "flat", (lambda v: _envelope_ok(v), "flat or sin2")),
    },
    "tdse": {
        "r_max": (float, 1200.0, (lambda v: 50 <= v <= 1e5, "in [50, 1e5]")),
        "h_max": (float, 4.0, (lambda v: 0.5 <= v <= 20, "in [0.5, 20]")),
        "order": (int, 11, (lambda v: 4 <= v <= 30, "in [4, 30]")),
        "l_max": (int, 120, (lambda v: 1 <= v <= 2000, "in [1, 2000]")),
        "dt": (float, 0.05, (lambda v: 0 < v <= 1, "in (0, 1]")),
        "k_min": (float, 0.01, _POS),
        "k_max": (float, 4.0, _POS),
        "n_k": (int, 400, (lambda v: v >= 2, ">= 2")),
        "remove_bound": (bool, False, _ANY),
        "n_bound": (int, 20, (lambda v: 1 <= v <= 60, "in [1, 60]")),
        "post_time": (float, 0.0, _NONNEG),
        "checkpoint": (bool, True, _ANY),
        "strict_l_convergence": (bool, False, _ANY),
        "l_tol": (float, 1e-4, _POS),
    },
    "sfa": {
        "ip": (float, 0.5, _POS),
        "e_max": (float, 4.6, _POS),
        "e_step": (float, 0.002, _POS),
        "n_angles": (int, 256, (lambda v: 200 <= v <= 10000, "in [200, 10000]")),
    },
    "map": {
        "kz_min": (float, -4.0, _ANY),
        "kz_max": (float, 4.0, _ANY),
        "krho_max": (float, 2.0, _POS),
        "dk": (float, 0.005, (lambda v: 0 < v <= 0.5, "in (0, 0.5]")),
        "binary": (bool, False, _ANY),
    },
    "analysis": {
        "min_prominence": (float, 0.02, (lambda v: 0 < v < 1, "in (0, 1)")),
        "window": (float, 0.15, _POS),
        "compare_e_min": (float, 1.0, _NONNEG),
        "compare_e_max": (float, 3.5, _POS),
        "compare_kz_min": (float, 0.0, _ANY),
        "compare_kz_max": (float, 3.0, _ANY),
    },
}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` and ``line`` locate the problem."""

    def __init__(self, message, key=None, line=None, source=None):
        where = []
        if source:
            where.append(str(source))
        if line:
            where.append(f"line {line}")
        if key:
            where.append(key)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass
class RunConfig:
    name: str
    engine: str
    pulses: list
    tdse: dict
    sfa: dict
    map: dict
    analysis: dict
    source: str = "<memory>"
    raw: dict = field(default_factory=dict)

    @property
    def wants_sfa(self) -> bool:
        return self.engine in ("sfa", "both")

    @property
    def wants_tdse(self) -> bool:
        return self.engine in ("tdse", "both")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "engine": self.engine,
            "pulses": [p.as_dict() for p in self.pulses],
            "tdse": dict(self.tdse),
            "sfa": dict(self.sfa),
            "map": dict(self.map),
            "analysis": dict(self.analysis),
            "source": self.source,
        }


def _line_numbers(text: str) -> dict:
    """``(section, key) -> line`` and ``(section, None) -> line`` lookup."""
    out = {}
    section = None
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            out[(section, None)] = no
        elif "=" in s and section is not None:
            out[(section, s.split("=", 1)[0].strip().lower())] = no
    return out


def _convert(kind, text: str):
    if kind == "floats":
        vals = [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
        if not vals:
            raise ValueError("empty list")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("non-finite value")
        return vals
    if kind is bool:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError("expected a boolean")
    if kind is int:
        return int(text)
    if kind is float:
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("non-finite value")
        return v
    return text.strip()


def parse_config(text: str, source: str = "<memory>") -> RunConfig:
    """Parse and validate configuration text."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"syntax error: {exc}", source=source) from exc
    lines = _line_numbers(text)
    values: dict = {}
    for sec in cp.sections():
        if sec not in DEFAULTS:
            raise ConfigError(f"unknown section [{sec}]", line=lines.get((sec, None)), source=source)
        for key in cp[sec]:
            if key not in DEFAULTS[sec]:
                raise ConfigError("unknown key", f"{sec}.{key}", lines.get((sec, key)), source)
    for sec, spec in DEFAULTS.items():
        values[sec] = {}
        for key, (kind, default, (check, desc)) in spec.items():
            where = (f"{sec}.{key}", lines.get((sec, key)), source)
            if cp.has_option(sec, key):
                raw = cp.get(sec, key)
                try:
                    val = _convert(kind, raw)
                except ValueError as exc:
                    raise ConfigError(f"cannot parse {raw!r}: {exc}", *where) from exc
            elif default is None:
                raise ConfigError("required key missing", f"{sec}.{key}", lines.get((sec, None)), source)
            else:
                val = default
            if not check(val):
                raise ConfigError(f"value {val!r} out of range (must be {desc})", *where)
            values[sec][key] = val
    t, m, a = values["tdse"], values["map"], values["analysis"]
    if t["k_max"] <= t["k_min"]:
        raise ConfigError("k_max must exceed k_min", "tdse.k_max", lines.get(("tdse", "k_max")), source)
    if m["kz_max"] <= m["kz_min"]:
        raise ConfigError("kz_max must exceed kz_min", "map.kz_max", lines.get(("map", "kz_max")), source)
    if a["compare_e_max"] <= a["compare_e_min"]:
        raise ConfigError("compare_e_max must exceed compare_e_min", "analysis.compare_e_max",
                          lines.get(("analysis", "compare_e_max")), source)
    pv = values["pulse"]
    env = Envelope.parse(pv["envelope"])
    try:
        pulses = [PulseParams.from_cycles(pv["omega"], pv["f0"], c, env) for c in pv["cycles"]]
    except ValueError as exc:
        raise ConfigError(str(exc), "pulse", lines.get(("pulse", None)), source) from exc
    run = values["run"]
    if run["engine"] in ("sfa", "both"):
        for p in pulses:
            if not p.is_flat or abs(p.cycles - 1.0) > 1e-12:
                raise ConfigError(
                    "the sfa engine needs a one-cycle flat pulse; use engine = tdse",
                    "run.engine", lines.get(("run", "engine")), source,
                )
    return RunConfig(run["name"], run["engine"], pulses, values["tdse"], values["sfa"], values["map"],
                     values["analysis"], source, values)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), str(path))


PRESETS = ("fig1", "fig3", "fig4", "fig5")


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (available: {', '.join(PRESETS)})")
    return resources.files("timeslit.presets").joinpath(f"{name}.ini").read_text()


def load_preset(name: str) -> RunConfig:
    return parse_config(preset_text(name), f"preset:{name}")
