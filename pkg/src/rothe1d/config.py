"""Declarative run configuration: INI sections with CLI overrides.

Sections and keys (all optional; defaults reproduce the standard setup):

    [model]   coulomb_strength, softening
    [pulse]   e0, omega, t0, t1
    [grid]    l, n
    [rothe]   h, t_end, epsilon, snapshot_every, checkpoint_every,
              max_additions, max_iterations, seed
    [output]  directory
"""

import configparser
from dataclasses import dataclass

from .grid import UniformGrid
from .model import ModelConfig, PulseConfig

__all__ = ["ConfigError", "RunConfig", "load_run_config"]


class ConfigError(ValueError):
    """Invalid configuration file or override."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs: physics, grids, stepping, and output."""

    model: ModelConfig = ModelConfig()
    grid_half_length: float = 500.0
    grid_n: int = 4096
    h: float = 1e-3
    t_end: float = 100.0
    epsilon: float = 1e-7
    snapshot_every: int = 1000
    checkpoint_every: int = 10000
    max_additions: int = 5
    max_iterations: int = 50
    seed: int = 0
    output_dir: str = "out"

    def __post_init__(self):
        if self.h <= 0:
            raise ConfigError(f"h must be > 0, got {self.h}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}")
        for name in ("snapshot_every", "checkpoint_every", "max_iterations"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.max_additions < 0:
            raise ConfigError(f"max_additions must be >= 0, got {self.max_additions}")
        try:
            self.grid()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def grid(self):
        return UniformGrid(self.grid_half_length, self.grid_n)


_SCHEMA = {
    "model": {"coulomb_strength": float, "softening": float},
    "pulse": {"e0": float, "omega": float, "t0": float, "t1": float},
    "grid": {"l": float, "n": int},
    "rothe": {
        "h": float,
        "t_end": float,
        "epsilon": float,
        "snapshot_every": int,
        "checkpoint_every": int,
        "max_additions": int,
        "max_iterations": int,
        "seed": int,
    },
    "output": {"directory": str},
}


def _read_sections(path):
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            caster = _SCHEMA[section][key]
            try:
                values[(section, key)] = caster(raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key} = {raw!r}: expected {caster.__name__}") from exc
    return values


def load_run_config(path=None, **overrides):
    """Build a validated RunConfig from an optional INI file plus overrides.

    Override keys: h, epsilon, t_end, grid_l, grid_n, out, seed.  None values
    are ignored so CLI flags can be passed through unconditionally.
    """
    values = _read_sections(path) if path is not None else {}

    def pick(section, key, default):
        return values.get((section, key), default)

    mapped = {
        "h": ("rothe", "h"),
        "epsilon": ("rothe", "epsilon"),
        "t_end": ("rothe", "t_end"),
        "grid_l": ("grid", "l"),
        "grid_n": ("grid", "n"),
        "out": ("output", "directory"),
        "seed": ("rothe", "seed"),
    }
    for name, target in mapped.items():
        value = overrides.pop(name, None)
        if value is not None:
            values[target] = _SCHEMA[target[0]][target[1]](value)
    if overrides:
        raise ConfigError(f"unknown overrides: {sorted(overrides)}")

    try:
        pulse = PulseConfig(
            e0=pick("pulse", "e0", 0.225),
            omega=pick("pulse", "omega", 0.25),
            t0=pick("pulse", "t0", 20.0),
            t1=pick("pulse", "t1", 80.0),
        )
        model = ModelConfig(
            pulse=pulse,
            softening=pick("model", "softening", 0.25),
            coulomb_strength=pick("model", "coulomb_strength", 0.5),
        )
        return RunConfig(
            model=model,
            grid_half_length=pick("grid", "l", 500.0),
            grid_n=pick("grid", "n", 4096),
            h=pick("rothe", "h", 1e-3),
            t_end=pick("rothe", "t_end", 100.0),
            epsilon=pick("rothe", "epsilon", 1e-7),
            snapshot_every=pick("rothe", "snapshot_every", 1000),
            checkpoint_every=pick("rothe", "checkpoint_every", 10000),
            max_additions=pick("rothe", "max_additions", 5),
            max_iterations=pick("rothe", "max_iterations", 50),
            seed=pick("rothe", "seed", 0),
            output_dir=pick("output", "directory", "out"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
