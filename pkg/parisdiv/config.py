"""Run configuration: one YAML file with the sections model, control, grid,
sim and output.

Every entry is validated while parsing; problems are reported as
`ConfigError` with the dotted key and the line it came from.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

import yaml

from .dividend_payment_delay import PaymentDelaySpec, RuinNormalization
from .errors import ConfigError, InvalidArgumentError, UnsupportedModelError
from .grids import Grid, grids, make_grid
from .levy_model import BrownianDrift, CramerLundbergExp, RiskModel
from .parisian_ruin import BesselRadicand, ParisianSpec
from .simulate import SimConfig

logger = logging.getLogger(__name__)

SECTIONS = ("model", "control", "grid", "sim", "output")
MODEL_KEYS = {
    "cramer_lundberg": ("c", "lam", "xi"),
    "brownian": ("c", "sigma"),
}
CONTROL_KEYS = ("q", "zeta", "d", "a", "bessel_radicand", "ruin_normalization")
GRID_KEYS = ("x_min", "x_max", "n_points", "spacing")
SIM_KEYS = (
    "n_paths",
    "seed",
    "euler_step",
    "horizon_epsilon",
    "batch_size",
    "workers",
    "kind",
    "x0",
    "time_cap",
)
SIM_KINDS = ("ruin_delay", "payment_delay", "ruin_probability")
OUTPUT_KEYS = ("path", "format")

Barrier = Union[float, str, List[float]]


@dataclass
class RunConfig:
    model: RiskModel
    q: Optional[float] = None
    zeta: ParisianSpec = field(default_factory=lambda: ParisianSpec(0.0))
    d: PaymentDelaySpec = field(default_factory=lambda: PaymentDelaySpec(0.0))
    a: Optional[Barrier] = None
    radicand: BesselRadicand = BesselRadicand.TILTED
    normalization: RuinNormalization = RuinNormalization.SCALED
    grid: Optional[Grid] = None
    sim: SimConfig = field(default_factory=SimConfig)
    sim_kind: str = "ruin_delay"
    x0: float = 1.0
    time_cap: Optional[float] = None
    output_path: Optional[str] = None
    output_format: str = "csv"


class _Source:
    """Parsed YAML plus the source line of every key."""

    def __init__(self, text: str) -> None:
        try:
            root = yaml.compose(text)
            self.data = yaml.safe_load(text)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigError(
                f"malformed YAML: {e}", line=mark.line + 1 if mark else None
            ) from e
        self.lines: Dict[str, int] = {}
        if root is not None:
            self._index(root, "")
        if self.data is None:
            self.data = {}
        if not isinstance(self.data, dict):
            raise ConfigError("top level must be a mapping")

    def _index(self, node: yaml.Node, prefix: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key = f"{prefix}{key_node.value}"
                self.lines[key] = key_node.start_mark.line + 1
                self._index(value_node, key + ".")

    def error(self, message: str, key: str) -> ConfigError:
        return ConfigError(message, key=key, line=self.lines.get(key))

    def section(self, name: str, allowed: tuple, required: bool = False) -> Dict[str, Any]:
        value = self.data.get(name)
        if value is None:
            if required:
                raise self.error(f"missing section {name!r}", name)
            return {}
        if not isinstance(value, dict):
            raise self.error(f"section {name!r} must be a mapping", name)
        for key in value:
            if key not in allowed:
                raise self.error(f"unknown key {key!r}", f"{name}.{key}")
        return value

    def number(self, section: Dict[str, Any], name: str, key: str, default: Any = None) -> Any:
        if key not in section:
            return default
        value = section[key]
        dotted = f"{name}.{key}"
        if isinstance(value, bool):
            raise self.error(f"expected a number, got {value!r}", dotted)
        if isinstance(value, str):
            # YAML 1.1 reads 1e-8 (no dot) as a string
            try:
                value = float(value)
            except ValueError:
                raise self.error(f"expected a number, got {value!r}", dotted) from None
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise self.error(f"expected a finite number, got {value!r}", dotted)
        return value

    def integer(self, section: Dict[str, Any], name: str, key: str, default: Any = None) -> Any:
        value = self.number(section, name, key, default)
        if value is None or isinstance(value, int):
            return value
        if not float(value).is_integer():
            raise self.error(f"expected an integer, got {value!r}", f"{name}.{key}")
        return int(value)

    def choice(self, section: Dict[str, Any], name: str, key: str, options: tuple, default: str) -> str:
        value = section.get(key, default)
        if value not in options:
            raise self.error(f"expected one of {list(options)}, got {value!r}", f"{name}.{key}")
        return value


def _parse_model(src: _Source) -> RiskModel:
    raw = src.data.get("model")
    if not isinstance(raw, dict):
        raise src.error("missing section 'model'", "model")
    variant = raw.get("variant")
    if variant not in MODEL_KEYS:
        raise src.error(f"model.variant must be one of {list(MODEL_KEYS)}, got {variant!r}", "model.variant")
    params = MODEL_KEYS[variant]
    section = src.section("model", ("variant",) + params, required=True)
    values = {}
    for key in params:
        if key not in section:
            raise src.error(f"missing parameter {key!r}", "model")
        values[key] = float(src.number(section, "model", key))
    try:
        if variant == "cramer_lundberg":
            return CramerLundbergExp(**values)
        return BrownianDrift(**values)
    except (InvalidArgumentError, UnsupportedModelError) as e:
        raise src.error(str(e), "model") from e


def _parse_barrier(src: _Source, control: Dict[str, Any]) -> Optional[Barrier]:
    if "a" not in control:
        return None
    raw = control["a"]
    if raw == "optimal":
        return "optimal"
    if isinstance(raw, list):
        out = []
        for i, item in enumerate(raw):
            out.append(float(src.number({"a": item}, "control", "a")))
            if out[-1] < 0:
                raise src.error(f"barrier a[{i}] must be >= 0", "control.a")
        if not out:
            raise src.error("barrier list is empty", "control.a")
        return out
    a = float(src.number(control, "control", "a"))
    if a < 0:
        raise src.error(f"barrier a must be >= 0, got {a}", "control.a")
    return a


def parse_config(text: str) -> RunConfig:
    """Build a validated RunConfig from YAML text."""
    src = _Source(text)
    for key in src.data:
        if key not in SECTIONS:
            raise src.error(f"unknown section {key!r}", str(key))
    model = _parse_model(src)
    cfg = RunConfig(model=model)

    control = src.section("control", CONTROL_KEYS)
    q = src.number(control, "control", "q")
    if q is not None:
        if q < 0:
            raise src.error(f"q must be >= 0, got {q}", "control.q")
        cfg.q = float(q)
    try:
        cfg.zeta = ParisianSpec(float(src.number(control, "control", "zeta", 0.0)))
    except InvalidArgumentError as e:
        raise src.error(str(e), "control.zeta") from e
    try:
        cfg.d = PaymentDelaySpec(float(src.number(control, "control", "d", 0.0)))
    except InvalidArgumentError as e:
        raise src.error(str(e), "control.d") from e
    cfg.a = _parse_barrier(src, control)
    cfg.radicand = BesselRadicand(
        src.choice(control, "control", "bessel_radicand", tuple(r.value for r in BesselRadicand), "tilted")
    )
    cfg.normalization = RuinNormalization(
        src.choice(control, "control", "ruin_normalization", tuple(r.value for r in RuinNormalization), "scaled")
    )

    grid = src.section("grid", GRID_KEYS)
    if grid:
        x_min = src.number(grid, "grid", "x_min")
        x_max = src.number(grid, "grid", "x_max", x_min)
        n_points = src.integer(grid, "grid", "n_points", 1)
        if x_min is None:
            raise src.error("missing x_min", "grid")
        if x_min < 0:
            raise src.error(f"x_min must be >= 0, got {x_min}", "grid.x_min")
        spacing = src.choice(grid, "grid", "spacing", tuple(grids), "linear")
        try:
            cfg.grid = make_grid(float(x_min), float(x_max), n_points, spacing)
        except InvalidArgumentError as e:
            raise src.error(str(e), "grid") from e

    sim = src.section("sim", SIM_KEYS)
    defaults = SimConfig()
    try:
        cfg.sim = SimConfig(
            n_paths=src.integer(sim, "sim", "n_paths", defaults.n_paths),
            seed=src.integer(sim, "sim", "seed", defaults.seed),
            euler_step=float(src.number(sim, "sim", "euler_step", defaults.euler_step)),
            horizon_epsilon=float(src.number(sim, "sim", "horizon_epsilon", defaults.horizon_epsilon)),
            batch_size=src.integer(sim, "sim", "batch_size", defaults.batch_size),
            workers=src.integer(sim, "sim", "workers", defaults.workers),
        )
    except InvalidArgumentError as e:
        raise src.error(str(e), "sim") from e
    cfg.sim_kind = src.choice(sim, "sim", "kind", SIM_KINDS, "ruin_delay")
    cfg.x0 = float(src.number(sim, "sim", "x0", 1.0))
    if cfg.x0 < 0:
        raise src.error(f"x0 must be >= 0, got {cfg.x0}", "sim.x0")
    time_cap = src.number(sim, "sim", "time_cap")
    if time_cap is not None:
        if time_cap <= 0:
            raise src.error(f"time_cap must be > 0, got {time_cap}", "sim.time_cap")
        cfg.time_cap = float(time_cap)

    output = src.section("output", OUTPUT_KEYS)
    path = output.get("path")
    if path is not None and not isinstance(path, str):
        raise src.error("output.path must be a string", "output.path")
    cfg.output_path = path
    cfg.output_format = src.choice(output, "output", "format", ("csv", "json"), "csv")
    logger.debug("parsed config for %s model", model.kind)
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}", key=path) from e
    return parse_config(text)
