"""Scenario configuration files: flat TOML (``key = value``) or a JSON object."""

from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .engine import CoolingConfig
from .estimates import PhysicalInputs


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str, line: int | None = None):
        self.key = key
        self.line = line
        where = f" (line {line})" if line else ""
        prefix = f"{key}: " if key else ""
        super().__init__(f"{prefix}{message}{where}")


COOLING_KEYS = {f.name: f for f in dataclasses.fields(CoolingConfig)}
OUTPUT_KEYS = {
    "output_dir": "out",
    "fig3": True,
    "fig4": True,
    "fig5": True,
    "fig6": True,
    "fig4_cycles": 2,
    "plot_script": False,
}
INT_KEYS = {"max_cycles", "acc_states", "resolution", "samples_step1", "samples_step2",
            "samples_step3", "theta_nodes", "fig4_cycles"}


@dataclass(frozen=True)
class ScenarioConfig:
    cooling: CoolingConfig = field(default_factory=CoolingConfig)
    output_dir: str = "out"
    fig3: bool = True
    fig4: bool = True
    fig5: bool = True
    fig6: bool = True
    fig4_cycles: int = 2
    plot_script: bool = False

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self.cooling)
        d.update({k: getattr(self, k) for k in OUTPUT_KEYS})
        return d

    def canonical(self) -> str:
        """Canonical JSON of everything that affects the numerical output."""
        d = self.as_dict()
        d.pop("output_dir")
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


def _line_of(text: str, key: str) -> int | None:
    pat = re.compile(rf'^\s*"?{re.escape(key)}"?\s*[=:]')
    for i, line in enumerate(text.splitlines(), 1):
        if pat.search(line):
            return i
    return None


def _load(path: Path) -> tuple[dict, str]:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError(None, f"invalid JSON: {exc.msg}", exc.lineno) from exc
        if not isinstance(data, dict):
            raise ConfigError(None, "top level must be an object")
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(None, f"invalid config syntax: {exc}") from exc
    flat = {}
    for k, v in data.items():
        # one level of [section] tables is accepted and flattened
        if isinstance(v, dict):
            for k2, v2 in v.items():
                flat[k2] = v2
        else:
            flat[k] = v
    return flat, text


def _coerce(key: str, value, line):
    if key in INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}", line)
        return value
    if key in ("fig3", "fig4", "fig5", "fig6", "plot_script"):
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}", line)
        return value
    if key == "output_dir":
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a path string, got {value!r}", line)
        return value
    if key == "fractions":
        if value == "logarithmic":
            return None
        if not isinstance(value, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
            raise ConfigError(key, "expected \"logarithmic\" or a list of numbers", line)
        if any(x < 0 for x in value) or abs(sum(value) - 1.0) > 1e-9:
            raise ConfigError(key, f"fractions must be non-negative and sum to 1, got sum {sum(value)!r}", line)
        s = math.fsum(value)
        return tuple(float(x) / s for x in value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}", line)
    return float(value)


def config_from_mapping(data: dict, text: str = "") -> ScenarioConfig:
    cooling, output = {}, {}
    for key, value in data.items():
        line = _line_of(text, key) if text else None
        if key in COOLING_KEYS:
            cooling[key] = _coerce(key, value, line)
        elif key in OUTPUT_KEYS:
            output[key] = _coerce(key, value, line)
        else:
            raise ConfigError(key, "unknown key", line)
    if "fractions" in cooling and cooling["fractions"] is not None:
        n = len(cooling["fractions"])
        if cooling.setdefault("acc_states", n) != n:
            raise ConfigError("fractions", f"has {n} entries but acc_states = {cooling['acc_states']}",
                              _line_of(text, "fractions"))
    try:
        cc = CoolingConfig(**cooling)
    except ValueError as exc:
        key = str(exc).split()[0]
        raise ConfigError(key if key in COOLING_KEYS else None, str(exc),
                          _line_of(text, key) if text else None) from exc
    if output.get("fig4_cycles", 2) < 1:
        raise ConfigError("fig4_cycles", "must be >= 1", _line_of(text, "fig4_cycles"))
    return ScenarioConfig(cooling=cc, **output)


def parse_config(path) -> ScenarioConfig:
    """Read and validate a scenario file; missing keys take the demo-scenario defaults."""
    path = Path(path)
    data, text = _load(path)
    return config_from_mapping(data, text)


def load_inputs(path) -> PhysicalInputs:
    """Physical inputs for the estimator; ``mass_amu`` is required in a file."""
    path = Path(path)
    data, text = _load(path)
    names = {f.name for f in dataclasses.fields(PhysicalInputs)}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(key, "unknown key", _line_of(text, key))
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}", _line_of(text, key))
    if "mass_amu" not in data:
        raise ConfigError("mass_amu", "missing required input (molecular mass in amu)")
    try:
        return PhysicalInputs(**{k: float(v) for k, v in data.items()})
    except ValueError as exc:
        key = str(exc).split()[0]
        raise ConfigError(key, str(exc), _line_of(text, key)) from exc
