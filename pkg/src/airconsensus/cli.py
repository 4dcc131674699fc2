"""Scenario-driven command line front end.

Runs one scenario (trace + summary) or a Monte Carlo batch (per-run
samples + aggregate statistics). Exit codes: 0 converged, 2 max-steps,
1 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .analysis import monte_carlo, predicted_consensus, summarize_run
from .channel import TIME_INVARIANT, sample
from .config import PRESET_NAMES, ConfigError, ScenarioConfig, parse_config, preset
from .linalg import PowerIterationError, perron_matrix, second_eigenvalue_modulus
from .protocol import CLASSICAL, SUPERPOSITION, effective_matrix, run

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MAX_STEPS = 2


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="airconsensus",
        description="Simulate consensus over a wireless multiple-access channel.",
    )
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config", type=Path, help="path to a JSON scenario document")
    source.add_argument("--preset", choices=PRESET_NAMES, help="named built-in scenario")
    parser.add_argument("--seed", type=int, help="override the scenario's top-level seed")
    parser.add_argument("--runs", type=int, help="Monte Carlo mode: number of runs (>= 2)")
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--quiet", action="store_true", help="suppress the result line")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    if (args.config is None) == (args.preset is None):
        print("error: exactly one of --config or --preset is required", file=sys.stderr)
        return EXIT_USAGE

    if args.config is not None:
        try:
            doc: Any = json.loads(args.config.read_text())
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except json.JSONDecodeError as exc:
            print(
                f"error: {args.config}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}",
                file=sys.stderr,
            )
            return EXIT_USAGE
    else:
        doc = preset(args.preset)
    if args.seed is not None:
        if not isinstance(doc, dict):
            print("error: config document must be a JSON object", file=sys.stderr)
            return EXIT_USAGE
        doc["seed"] = args.seed
        # An explicit override must win over seeds frozen into the document.
        if isinstance(doc.get("channel"), dict):
            doc["channel"].pop("seed", None)
        if isinstance(doc.get("initial_state"), dict):
            doc["initial_state"].pop("seed", None)

    try:
        cfg = parse_config(doc)
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE

    try:
        args.out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {args.out_dir}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.runs is not None:
        if args.runs < 2:
            print("error: --runs must be at least 2", file=sys.stderr)
            return EXIT_USAGE
        return _run_montecarlo(cfg, args.runs, args.out_dir, args.quiet)
    return _run_scenario(cfg, args.out_dir, args.quiet)


def _predictions(cfg: ScenarioConfig):
    """Predicted consensus value and contraction rate, where they exist
    (time-invariant superposition, or the classical protocol)."""
    if cfg.protocol.variant == SUPERPOSITION and cfg.channel.mode == TIME_INVARIANT:
        D = effective_matrix(sample(cfg.channel, 0), cfg.protocol.mixing)
    elif cfg.protocol.variant == CLASSICAL:
        D = perron_matrix(cfg.topology, cfg.protocol.step_size)
    else:
        return None, None
    try:
        predicted = predicted_consensus(D, cfg.x0)
    except (PowerIterationError, RuntimeError):
        return None, None
    return predicted, second_eigenvalue_modulus(D)


def _run_scenario(cfg: ScenarioConfig, out_dir: Path, quiet: bool) -> int:
    trace = run(
        cfg.topology, cfg.channel, cfg.protocol, cfg.x0, tol=cfg.tol, max_steps=cfg.max_steps
    )
    predicted, rate_predicted = _predictions(cfg)
    summary = summarize_run(trace, predicted_value=predicted, rate_predicted=rate_predicted)

    trace_path = out_dir / cfg.trace_file
    summary_path = out_dir / cfg.summary_file
    doc = _flatten({"config": cfg.resolved, "result": _summary_dict(summary)})
    try:
        _write_trace(trace_path, trace)
        summary_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        print(f"error: cannot write {exc.filename or trace_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if not quiet:
        print(
            f"{trace.reason} after {trace.steps} steps: consensus {summary.consensus_value:.12g} "
            f"(spread {summary.spread_final:.3e}); wrote {trace_path} and {summary_path}"
        )
    return EXIT_OK if summary.converged else EXIT_MAX_STEPS


def _run_montecarlo(cfg: ScenarioConfig, runs: int, out_dir: Path, quiet: bool) -> int:
    result = monte_carlo(
        cfg.topology,
        cfg.channel,
        cfg.protocol,
        cfg.x0,
        runs,
        tol=cfg.tol,
        max_steps=cfg.max_steps,
    )
    samples_path = out_dir / cfg.samples_file
    lines = ["run,seed,consensus_value,steps,converged"]
    for idx in range(result.runs):
        lines.append(
            f"{idx},{result.seeds[idx]},{result.consensus_values[idx]:.17g},"
            f"{result.steps[idx]},{int(result.converged[idx])}"
        )
    doc = _flatten(
        {
            "config": cfg.resolved,
            "montecarlo": {
                "runs": result.runs,
                "non_converged": result.non_converged,
                "mean_consensus": result.mean_consensus,
                "std_consensus": result.std_consensus,
                "mean_steps": result.mean_steps,
                "initial_mean": float(np.mean(cfg.x0)),
                "samples_file": cfg.samples_file,
            },
        }
    )
    summary_path = out_dir / cfg.summary_file
    try:
        samples_path.write_text("\n".join(lines) + "\n")
        summary_path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    except OSError as exc:
        print(f"error: cannot write {exc.filename or samples_path}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if not quiet:
        print(
            f"{result.runs} runs ({result.non_converged} not converged): "
            f"mean consensus {result.mean_consensus:.12g}, std {result.std_consensus:.6g}, "
            f"mean steps {result.mean_steps:.1f}; wrote {samples_path} and {summary_path}"
        )
    return EXIT_OK


def _write_trace(path: Path, trace) -> None:
    lines = ["step,agent,x"]
    for state in trace.states:
        for agent, value in enumerate(state.x, start=1):
            lines.append(f"{state.step},{agent},{value:.17g}")
    path.write_text("\n".join(lines) + "\n")


def _summary_dict(summary) -> dict:
    return {
        "consensus_value": summary.consensus_value,
        "predicted_value": summary.predicted_value,
        "steps": summary.steps_to_converge,
        "spread_final": summary.spread_final,
        "rate_measured": summary.rate_measured,
        "rate_predicted": summary.rate_predicted,
        "converged": summary.converged,
        "reason": "converged" if summary.converged else "max-steps",
        "hull_violated": summary.hull_violated,
    }


def _flatten(tree: Mapping[str, Any], prefix: str = "") -> dict:
    """Nested mappings to dotted flat keys; lists and scalars stay values."""
    flat: dict[str, Any] = {}
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, prefix=f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


if __name__ == "__main__":
    sys.exit(main())
