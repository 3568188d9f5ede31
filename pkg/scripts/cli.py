#!/usr/bin/env python3
"""
Batch command-line front end for asdgic-lattice.

Every subcommand writes one table to stdout (CSV with a header row, or a
JSON list of records) and logs to stderr. Exit codes: 0 on success, 1 when
a regime condition is not met, 2 on any input error.

Usage:
    python scripts/cli.py regions config/scenarios/symmetric_unit.yaml
    python scripts/cli.py gap --power 1 --noise 1 --gain 4
    python scripts/cli.py gap-table --snrs 0.1,0.5,1,10,20
    python scripts/cli.py gap-curve --xmin 0.05 --xmax 50 --steps 200
    python scripts/cli.py simulate config/scenarios/thm2_symmetric.yaml --trials 100000
    python scripts/cli.py binning config/scenarios/binning.yaml --q-list 2,10,100
    python scripts/cli.py validate config/scenarios/weak_interference.yaml
    python scripts/cli.py nsm-table --families integer-cubic:1,hexagonal,D4,E8
"""

import argparse
import logging
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np
import yaml
from pydantic import ValidationError

from bounds import (
    achievable_sum_rate,
    binning_sum_rate_bound,
    binning_vanishing_threshold,
    gap_curve,
    gap_symmetric,
    gap_tilde,
    outer_sum_rate,
)
from config_loader import DEFAULT_ENGINE_CONFIG, EngineConfig, Scenario
from errors import ChannelError, ConditionNotMetError, InvalidGridError, NoApplicableRegimeError
from lattice import LatticeFamily, make_lattice, parse_family, shaping_loss_bits
from logging_config import level_from_name, setup_logging
from model import RegimeFlags, classify_regime
from run_metrics import MetricsCollector, TimingContext, log_metrics_summary
from simulate import (
    MIN_SWEEP_POINTS,
    Scheme,
    StateMode,
    result_record,
    run_analog,
    run_digital,
    sweep_alpha,
)
from utils import OUTPUT_FORMATS, format_value, parse_float_list, write_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONDITION = 1
EXIT_INPUT = 2

REGIONS_COLUMNS = ["outer_bits", "achievable_bits", "kind", "limiting_decoder", "flags"]
GAP_COLUMNS = ["x", "term_outer", "term_inner_raw", "term_inner_env", "gap"]
SYMMETRIC_GAP_COLUMNS = ["power", "noise", "gain", "gap"]
SWEEP_COLUMNS = ["alpha", "pre_mod_var", "pre_mod_se", "is_argmin"]
BINNING_COLUMNS = ["q1", "q2", "gamma", "entropy_term", "value"]
VALIDATE_COLUMNS = [
    "p1",
    "p2",
    "n1",
    "n2",
    "a12",
    "a21",
    "q1",
    "q2",
    "strong_interference",
    "flags",
]
NSM_COLUMNS = ["family", "dim", "sigma2", "stderr", "samples", "nsm", "shaping_loss_bits"]

DEFAULT_SWEEP_POINTS = 101
DEFAULT_NSM_FAMILIES = "integer-cubic:1,hexagonal,D4,E8"

# Flag names rendered into the "flags" column, in order
FLAG_FIELDS = (
    "strong_interference",
    "imbalanced_dec1",
    "imbalanced_dec2",
    "balanced_dec1",
    "balanced_dec2",
    "equality_dec1",
    "equality_dec2",
)


def format_flags(flags: RegimeFlags) -> str:
    """Render regime flags as ``key=value`` pairs joined by ';'."""
    data = flags.to_dict()
    return ";".join(f"{name}={format_value(data[name])}" for name in FLAG_FIELDS)


def sweep_grid(points: int) -> List[float]:
    """``points`` coefficients spaced 1/(points-1), starting one step above 0.

    With 101 points this is 0.01, 0.02, ..., 1.01, so both 0.5 and 1.0
    lie on the grid.
    """
    if points < MIN_SWEEP_POINTS:
        raise InvalidGridError(f"Sweep needs >= {MIN_SWEEP_POINTS} points, got {points}")
    step = 1.0 / (points - 1)
    return [float(v) for v in np.round(np.arange(1, points + 1) * step, 12)]


def parse_family_list(text: str) -> List[Tuple[LatticeFamily, Optional[int]]]:
    """Parse ``family[:dim]`` tokens separated by commas."""
    entries = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        name, _, dim = token.partition(":")
        entries.append((parse_family(name), int(dim) if dim else None))
    if not entries:
        raise ValueError("Expected at least one lattice family")
    return entries


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with global flags followed by one subcommand."""
    parser = argparse.ArgumentParser(
        prog="asdgic",
        description="Rate bounds and lattice-scheme simulation for the "
        "additive state-dependent Gaussian interference channel",
    )
    parser.add_argument(
        "--config", default=str(DEFAULT_ENGINE_CONFIG), help="Engine configuration YAML"
    )
    parser.add_argument("--format", choices=OUTPUT_FORMATS, help="Output format (default: csv)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--log-json", action="store_true", help="JSON log lines on stderr")
    parser.add_argument("--log-file", help="Also write JSON logs to this file")
    parser.add_argument("--metrics-file", help="Append run metrics to this JSON file")
    parser.add_argument("--grid-density", type=int, help="Envelope grid points per side")
    parser.add_argument("--boost-cap", type=float, help="Largest envelope power boost")
    parser.add_argument(
        "--allow-zero-noise",
        action="store_true",
        help="Accept n1/n2 = 0 in scenarios (noiseless diagnostic limit)",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    regions = sub.add_parser("regions", help="Outer bound, achievable sum rate and regime flags")
    regions.add_argument("scenario", help="Scenario YAML file")

    gap_table = sub.add_parser("gap-table", help="Worst-case symmetric gap at given SNRs")
    gap_table.add_argument("--snrs", required=True, help="Comma-separated SNR values x = P/N")

    gap = sub.add_parser("gap", help="Gap of the symmetric channel at one (P, N, a)")
    gap.add_argument("--power", type=float, required=True)
    gap.add_argument("--noise", type=float, required=True)
    gap.add_argument("--gain", type=float, required=True)

    curve = sub.add_parser("gap-curve", help="Worst-case gap over a log-spaced SNR grid")
    curve.add_argument("--xmin", type=float, default=0.05)
    curve.add_argument("--xmax", type=float, default=50.0)
    curve.add_argument("--steps", type=int, default=200)

    simulate = sub.add_parser("simulate", help="Monte-Carlo simulation of a lattice scheme")
    simulate.add_argument("scenario", help="Scenario YAML file")
    simulate.add_argument("--scheme", choices=[s.value for s in Scheme])
    simulate.add_argument("--decoder", type=int, choices=(1, 2))
    simulate.add_argument("--family", choices=[f.value for f in LatticeFamily])
    simulate.add_argument("--dim", type=int)
    simulate.add_argument("--trials", type=int)
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--workers", type=int, help="Worker threads (no effect on results)")
    simulate.add_argument("--chunk-size", type=int)
    simulate.add_argument("--state-mode", choices=[m.value for m in StateMode])
    simulate.add_argument("--state-value", type=float)
    simulate.add_argument("--alphas", help="Comma-separated scaling coefficient override")
    simulate.add_argument(
        "--digital", type=int, metavar="K", help="Nested-coset mode, fine = coarse / 2^K"
    )
    simulate.add_argument("--sweep-alpha", action="store_true", help="Sweep the coefficient")
    simulate.add_argument("--grid-points", type=int, default=DEFAULT_SWEEP_POINTS)

    binning = sub.add_parser("binning", help="Random-binning sum-rate upper bound")
    binning.add_argument("scenario", help="Scenario YAML file")
    binning.add_argument("--q-list", help="Equal state variances (default: scenario q1, q2)")
    binning.add_argument("--decoder", type=int, choices=(1, 2), default=1)

    validate = sub.add_parser("validate", help="Validate a scenario and echo its regime flags")
    validate.add_argument("scenario", help="Scenario YAML file")

    nsm_table = sub.add_parser("nsm-table", help="Second moments of the lattice families")
    nsm_table.add_argument("--families", default=DEFAULT_NSM_FAMILIES, help="family[:dim] list")
    nsm_table.add_argument("--samples", type=int, help="Monte-Carlo samples per family")
    nsm_table.add_argument("--seed", type=int)

    return parser


class _Context:
    """Resolved engine config and output settings shared by the handlers."""

    def __init__(self, args: argparse.Namespace, engine: EngineConfig, stdout: TextIO) -> None:
        self.args = args
        self.engine = engine
        self.stdout = stdout
        self.scenario: Optional[Scenario] = None
        self.trials: Optional[int] = None

    def load_scenario(self) -> Scenario:
        self.scenario = Scenario.load(Path(self.args.scenario))
        return self.scenario

    @property
    def fmt(self) -> str:
        if self.args.format:
            return self.args.format
        return self.scenario.format if self.scenario else "csv"

    def envelope(self) -> Tuple[int, float]:
        env = self.engine.envelope
        if self.scenario is not None and self.scenario.envelope is not None:
            env = self.scenario.envelope
        density = self.args.grid_density or env.grid_density
        cap = self.args.boost_cap or env.boost_cap
        return density, cap

    def emit(self, rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> None:
        write_table(rows, columns, self.fmt, self.stdout)


def _cmd_regions(ctx: _Context) -> int:
    scenario = ctx.load_scenario()
    params = scenario.to_params(ctx.args.allow_zero_noise)
    density, cap = ctx.envelope()
    outer = outer_sum_rate(params)
    achievable = achievable_sum_rate(params, density, cap)
    ctx.emit(
        [
            {
                "outer_bits": outer.value,
                "achievable_bits": achievable.value,
                "kind": achievable.kind,
                "limiting_decoder": achievable.limiting_decoder,
                "flags": format_flags(achievable.conditions),
            }
        ],
        REGIONS_COLUMNS,
    )
    return EXIT_OK


def _cmd_gap_table(ctx: _Context) -> int:
    density, cap = ctx.envelope()
    rows = [gap_tilde(x, density, cap).to_dict() for x in parse_float_list(ctx.args.snrs)]
    ctx.emit(rows, GAP_COLUMNS)
    return EXIT_OK


def _cmd_gap(ctx: _Context) -> int:
    density, cap = ctx.envelope()
    args = ctx.args
    value = gap_symmetric(args.power, args.noise, args.gain, density, cap)
    ctx.emit(
        [{"power": args.power, "noise": args.noise, "gain": args.gain, "gap": value}],
        SYMMETRIC_GAP_COLUMNS,
    )
    return EXIT_OK


def _cmd_gap_curve(ctx: _Context) -> int:
    density, cap = ctx.envelope()
    args = ctx.args
    rows = [row.to_dict() for row in gap_curve(args.xmin, args.xmax, args.steps, density, cap)]
    ctx.emit(rows, GAP_COLUMNS)
    return EXIT_OK


def _cmd_simulate(ctx: _Context) -> int:
    args = ctx.args
    scenario = ctx.load_scenario()
    params = scenario.to_params(args.allow_zero_noise)
    spec = scenario.scheme_spec(
        ctx.engine,
        scheme=args.scheme,
        decoder=args.decoder,
        family=args.family,
        dim=args.dim,
        trials=args.trials,
        seed=args.seed,
        chunk_size=args.chunk_size,
        alphas=tuple(parse_float_list(args.alphas)) if args.alphas else None,
        state_mode=args.state_mode,
        state_value=args.state_value,
    )
    workers = args.workers or ctx.engine.simulation.workers
    nesting = args.digital
    if nesting is None and scenario.simulation is not None:
        nesting = scenario.simulation.nesting_exponent

    if args.sweep_alpha:
        sweep = sweep_alpha(params, spec, sweep_grid(args.grid_points), workers)
        ctx.trials = spec.trials * args.grid_points
        ctx.emit(sweep.rows(), SWEEP_COLUMNS)
        return EXIT_OK

    if nesting is not None:
        result = run_digital(params, spec, nesting, workers)
    else:
        result = run_analog(params, spec, workers)
    ctx.trials = spec.trials
    record = result_record(params, spec, result)
    ctx.emit([record], list(record))
    return EXIT_OK


def _cmd_binning(ctx: _Context) -> int:
    args = ctx.args
    scenario = ctx.load_scenario()
    params = scenario.to_params(args.allow_zero_noise)
    if args.q_list:
        pairs = [(q, q) for q in parse_float_list(args.q_list)]
    else:
        pairs = [(params.q1, params.q2)]
    rows = []
    for q1, q2 in pairs:
        bound = binning_sum_rate_bound(params, q1, q2, args.decoder)
        rows.append(
            {
                "q1": bound.q1,
                "q2": bound.q2,
                "gamma": bound.gamma,
                "entropy_term": bound.entropy_term,
                "value": bound.value,
            }
        )
    logger.info(
        "Binning bound vanishes for equal state variances above threshold",
        extra={"threshold": binning_vanishing_threshold(params, args.decoder)},
    )
    ctx.emit(rows, BINNING_COLUMNS)
    return EXIT_OK


def _cmd_validate(ctx: _Context) -> int:
    scenario = ctx.load_scenario()
    params = scenario.to_params(ctx.args.allow_zero_noise)
    row = params.to_dict()
    row["flags"] = format_flags(classify_regime(params))
    ctx.emit([row], VALIDATE_COLUMNS)
    return EXIT_OK


def _cmd_nsm_table(ctx: _Context) -> int:
    args = ctx.args
    samples = args.samples or ctx.engine.lattice.mc_samples
    seed = args.seed if args.seed is not None else ctx.engine.lattice.mc_seed
    rows = []
    for family, dim in parse_family_list(args.families):
        lat = make_lattice(family, dim, samples=samples, seed=seed)
        rows.append(
            {
                "family": family.value,
                "dim": lat.n,
                "sigma2": lat.sigma2,
                "stderr": lat.sigma2_stderr,
                "samples": lat.sigma2_samples,
                "nsm": lat.nsm,
                "shaping_loss_bits": shaping_loss_bits(lat),
            }
        )
    ctx.emit(rows, NSM_COLUMNS)
    return EXIT_OK


HANDLERS = {
    "regions": _cmd_regions,
    "gap": _cmd_gap,
    "gap-table": _cmd_gap_table,
    "gap-curve": _cmd_gap_curve,
    "simulate": _cmd_simulate,
    "binning": _cmd_binning,
    "validate": _cmd_validate,
    "nsm-table": _cmd_nsm_table,
}


def _diagnostic(stderr: TextIO, kind: str, error: BaseException) -> None:
    message = " ".join(str(error).split())
    stderr.write(f"error: {kind}: {message}\n")


def run_command(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Parse ``argv``, run one subcommand and return its exit code.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])
        stdout: Table destination (default: sys.stdout)
        stderr: Diagnostics and log destination (default: sys.stderr)

    Returns:
        0 on success, 1 when a regime condition is not met, 2 on input errors
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    try:
        with redirect_stdout(stdout), redirect_stderr(stderr):
            args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_INPUT

    try:
        engine = EngineConfig.load(Path(args.config))
    except (FileNotFoundError, yaml.YAMLError, ValidationError) as e:
        _diagnostic(stderr, "config", e)
        return EXIT_INPUT

    level = logging.DEBUG if args.verbose else level_from_name(engine.logging.level)
    setup_logging(
        "",
        level=level,
        json_format=args.log_json or engine.logging.json_format,
        log_file=args.log_file,
        context={"command": args.command},
        stream=stderr,
    )

    collector = MetricsCollector(args.metrics_file)
    ctx = _Context(args, engine, stdout)
    code = EXIT_INPUT
    try:
        with TimingContext(args.command, collector) as timer:
            try:
                code = HANDLERS[args.command](ctx)
            finally:
                timer.trials = ctx.trials
    except (ConditionNotMetError, NoApplicableRegimeError) as e:
        _diagnostic(stderr, "condition not met", e)
        code = EXIT_CONDITION
    except ChannelError as e:
        _diagnostic(stderr, type(e).__name__, e)
    except ValidationError as e:
        _diagnostic(stderr, "invalid scenario", e)
    except yaml.YAMLError as e:
        _diagnostic(stderr, "invalid YAML", e)
    except FileNotFoundError as e:
        _diagnostic(stderr, "file not found", e)
    except ValueError as e:
        _diagnostic(stderr, "invalid input", e)

    log_metrics_summary(collector)
    collector.save_metrics()
    return code


def main() -> None:
    """Main entry point for the asdgic CLI."""
    sys.exit(run_command())


if __name__ == "__main__":
    main()
