"""Command-line interface.

Usage: parisdiv [--verbose] COMMAND CONFIG.yaml

Exit codes: 0 on success, 2 on invalid configuration or unsupported model,
1 on numerical failure.
"""

import argparse
import io
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

from .config import RunConfig, load_config
from .dividend_payment_delay import PaymentDelayValue
from .dividend_ruin_delay import (
    BarrierPolicy,
    hjb_verify,
    optimal_barrier_details,
    value_ruin_delay,
    value_ruin_delay_derivative,
)
from .errors import (
    ConfigError,
    InternalConsistencyError,
    InvalidArgumentError,
    ParisdivError,
    UnsupportedModelError,
)
from .parisian_ruin import (
    V,
    V_derivatives,
    classical_ruin_probability,
    parisian_ruin_probability,
)
from .simulate import (
    simulate_parisian_ruin_prob,
    simulate_payment_delay,
    simulate_ruin_delay,
)

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
CONTINUITY_TOL = 1e-8


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return FLOAT_FORMAT % value if math.isfinite(value) else "null"
    if value is None:
        return "null"
    return '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_json(record: Dict[str, Any]) -> str:
    """Flat JSON object with floats printed to 17 significant digits."""
    return "{" + ", ".join(f'"{k}": {_fmt(v)}' for k, v in record.items()) + "}\n"


def to_csv(frame: pd.DataFrame) -> str:
    buf = io.StringIO()
    frame.to_csv(buf, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return buf.getvalue()


def _emit(cfg: RunConfig, frame: Optional[pd.DataFrame], record: Optional[Dict[str, Any]]) -> None:
    if frame is not None and cfg.output_format == "csv":
        text = to_csv(frame)
    elif frame is not None:
        text = "".join(to_json(row) for row in frame.to_dict(orient="records"))
    else:
        text = to_json(record or {})
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_q(cfg: RunConfig) -> float:
    if cfg.q is None or not cfg.q > 0:
        raise ConfigError(f"control.q must be > 0, got {cfg.q}", key="control.q")
    return cfg.q


def _require_grid(cfg: RunConfig) -> List[float]:
    if cfg.grid is None or not cfg.grid.points:
        raise ConfigError("grid section is required", key="grid")
    return cfg.grid.points


def _barrier(cfg: RunConfig, q: float) -> float:
    if cfg.a is None or cfg.a == "optimal":
        return optimal_barrier_details(cfg.model, q, cfg.zeta, cfg.radicand).a_star
    if isinstance(cfg.a, list):
        raise ConfigError("this command takes a single barrier", key="control.a")
    return float(cfg.a)


def cmd_value_ruin_delay(cfg: RunConfig) -> pd.DataFrame:
    q = _require_q(cfg)
    xs = _require_grid(cfg)
    a = _barrier(cfg, q)
    policy = BarrierPolicy(a)
    rows = []
    for x in xs:
        rows.append(
            {
                "x": x,
                "v": value_ruin_delay(cfg.model, q, cfg.zeta, policy, x, cfg.radicand),
                "v_prime": value_ruin_delay_derivative(
                    cfg.model, q, cfg.zeta, policy, x, 1, cfg.radicand
                ),
                "barrier": a,
                "V": V(cfg.model, q, cfg.zeta, x, cfg.radicand),
                "V_prime": V_derivatives(cfg.model, q, cfg.zeta, x, 1, cfg.radicand),
            }
        )
    return pd.DataFrame(rows, columns=["x", "v", "v_prime", "barrier", "V", "V_prime"])


def cmd_optimal_barrier(cfg: RunConfig) -> Dict[str, Any]:
    q = _require_q(cfg)
    res = optimal_barrier_details(cfg.model, q, cfg.zeta, cfg.radicand)
    return {
        "a_star": res.a_star,
        "V_second_at_a_star": res.V_second_at_a_star,
        "method": res.method,
    }


def cmd_ruin_prob(cfg: RunConfig) -> pd.DataFrame:
    xs = _require_grid(cfg)
    rows = []
    for x in xs:
        parisian = parisian_ruin_probability(cfg.model, cfg.zeta, x, cfg.radicand)
        classical = classical_ruin_probability(cfg.model, x)
        if parisian > classical + 1e-12:
            raise InternalConsistencyError(
                f"Parisian ruin {parisian} exceeds classical ruin {classical} at x={x}"
            )
        rows.append({"x": x, "parisian_ruin_prob": parisian, "classical_ruin_prob": classical})
    return pd.DataFrame(rows, columns=["x", "parisian_ruin_prob", "classical_ruin_prob"])


def cmd_value_payment_delay(cfg: RunConfig) -> Dict[str, Any]:
    q = _require_q(cfg)
    xs = _require_grid(cfg)
    if cfg.a is None or cfg.a == "optimal":
        raise ConfigError("payment delay needs explicit barrier value(s)", key="control.a")
    barriers = cfg.a if isinstance(cfg.a, list) else [cfg.a]
    logger.info("finite-time ruin normalization: %s", cfg.normalization.value)
    rows = []
    worst_gap = 0.0
    for a in barriers:
        if not a > 0:
            raise ConfigError(f"barrier must be > 0, got {a}", key="control.a")
        value = PaymentDelayValue.solve(cfg.model, q, cfg.d, float(a), cfg.normalization)
        gap = value.continuity_gap()
        if gap > CONTINUITY_TOL * max(1.0, abs(value.va)):
            raise InternalConsistencyError(f"value not continuous at a={a}: gap {gap}")
        worst_gap = max(worst_gap, gap)
        for x in xs:
            rows.append(
                {
                    "x": x,
                    "v": value(x),
                    "va": value.va,
                    "region": "below" if x <= a else "above",
                }
            )
    summary = {
        "ruin_normalization": cfg.normalization.value,
        "n_barriers": len(barriers),
        "max_continuity_gap": worst_gap,
    }
    return {"frame": pd.DataFrame(rows, columns=["x", "v", "va", "region"]), "summary": summary}


def cmd_simulate(cfg: RunConfig) -> Dict[str, Any]:
    kind = cfg.sim_kind
    if kind == "ruin_probability":
        if cfg.time_cap is None:
            raise ConfigError("sim.time_cap is required for ruin probabilities", key="sim.time_cap")
        est = simulate_parisian_ruin_prob(cfg.model, cfg.zeta, cfg.x0, cfg.sim, cfg.time_cap)
    else:
        q = _require_q(cfg)
        policy = BarrierPolicy(_barrier(cfg, q))
        if kind == "ruin_delay":
            est = simulate_ruin_delay(cfg.model, q, cfg.zeta, policy, cfg.x0, cfg.sim)
        else:
            est = simulate_payment_delay(cfg.model, q, cfg.d, policy, cfg.x0, cfg.sim)
    return {
        "mean": est.mean,
        "std_error": est.std_error,
        "n_paths": est.n_effective,
        "censoring_bias_bound": est.censoring_bias_bound,
        "seed": cfg.sim.seed,
    }


def cmd_verify(cfg: RunConfig) -> Dict[str, Any]:
    q = _require_q(cfg)
    a = _barrier(cfg, q)
    grid = cfg.grid.points if cfg.grid is not None else None
    if grid is not None and not grid:
        raise ConfigError("verification grid is empty", key="grid")
    report = hjb_verify(cfg.model, q, cfg.zeta, BarrierPolicy(a), grid, radicand=cfg.radicand)
    frame = pd.DataFrame(
        {
            "x": report.grid,
            "hjb_value": report.hjb_values,
            "v_prime": report.derivative_values,
            "pass": report.point_pass,
        },
        columns=["x", "hjb_value", "v_prime", "pass"],
    )
    return {
        "frame": frame,
        "summary": {
            "max_violation": report.max_violation,
            "passed": report.passed,
            "barrier": a,
            "n_points": report.n_points,
        },
    }


def _run(command: str, cfg: RunConfig) -> None:
    if command == "verify":
        out = cmd_verify(cfg)
        if cfg.output_path:
            _emit(cfg, out["frame"], None)
        else:
            sys.stdout.write(to_csv(out["frame"]))
        sys.stdout.write(to_json(out["summary"]))
        return
    if command == "value-payment-delay":
        # stdout stays a clean table; the run summary goes to stderr
        out = cmd_value_payment_delay(cfg)
        _emit(cfg, out["frame"], None)
        sys.stderr.write(to_json(out["summary"]))
        return
    tables: Dict[str, Callable[[RunConfig], pd.DataFrame]] = {
        "value-ruin-delay": cmd_value_ruin_delay,
        "ruin-prob": cmd_ruin_prob,
    }
    reports: Dict[str, Callable[[RunConfig], Dict[str, Any]]] = {
        "optimal-barrier": cmd_optimal_barrier,
        "simulate": cmd_simulate,
    }
    if command in tables:
        _emit(cfg, tables[command](cfg), None)
    else:
        _emit(cfg, None, reports[command](cfg))


COMMANDS = (
    "value-ruin-delay",
    "optimal-barrier",
    "ruin-prob",
    "value-payment-delay",
    "simulate",
    "verify",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parisdiv",
        description="Dividend barriers and Parisian ruin for spectrally negative risk models",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="YAML run configuration")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        cfg = load_config(args.config)
        _run(args.command, cfg)
    except (ConfigError, InvalidArgumentError, UnsupportedModelError) as e:
        logger.error("invalid configuration: %s", e)
        return 2
    except ParisdivError as e:
        logger.error("numerical failure: %s", e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
