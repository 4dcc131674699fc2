"""Scenario configuration: JSON parsing, validation, defaults, presets.

A scenario document is a JSON object with sections ``topology``,
``channel``, ``protocol``, and optionally ``initial_state``, ``run``,
``outputs``, plus a top-level ``seed`` from which any missing channel or
initial-state seed is derived. Validation is all-at-once: every problem
in the document is reported in a single error, and nothing is run on an
invalid config.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Union

import numpy as np

from .channel import IID_PER_STEP, MODES, ChannelModel, ConstantLaw, UniformLaw, derive_seed
from .graph import WeightedDigraph, complete_graph, graph_from_arcs, is_strongly_connected, ring_graph, step_size_bound
from .protocol import (
    CLASSICAL,
    DEFAULT_MAX_STEPS,
    DEFAULT_SPREAD_TOL,
    NAIVE,
    SUPERPOSITION,
    VARIANTS,
    ProtocolConfig,
)

# Stream tags for seeds derived from the top-level seed.
_CHANNEL_SEED_TAG = 1
_STATE_SEED_TAG = 2

DEFAULT_TRACE_FILE = "trace.csv"
DEFAULT_SUMMARY_FILE = "summary.json"
DEFAULT_SAMPLES_FILE = "samples.csv"


class ConfigError(ValueError):
    """One or more scenario validation failures, reported together."""

    def __init__(self, problems):
        self.problems = tuple(problems)
        super().__init__(
            "invalid scenario config:\n" + "\n".join(f"  - {p}" for p in self.problems)
        )


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved, validated scenario.

    ``resolved`` echoes the whole configuration with every default and
    derived seed made explicit, so any run is reproducible from its
    summary alone.
    """

    topology: WeightedDigraph
    channel: Optional[ChannelModel]
    protocol: ProtocolConfig
    x0: np.ndarray
    tol: float
    max_steps: int
    trace_file: str
    summary_file: str
    samples_file: str
    resolved: dict


def parse_config(doc: Union[str, Mapping[str, Any]]) -> ScenarioConfig:
    """Parse and validate a scenario document (JSON text or mapping)."""
    if isinstance(doc, str):
        try:
            raw = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"])
    else:
        raw = copy.deepcopy(dict(doc))
    if not isinstance(raw, dict):
        raise ConfigError(["top-level document must be a JSON object"])

    problems: list[str] = []
    known = {"topology", "channel", "protocol", "initial_state", "run", "outputs", "seed"}
    for key in raw:
        if key not in known:
            problems.append(f"unknown section {key!r}")

    seed = raw.get("seed")
    if seed is not None and not (isinstance(seed, int) and seed >= 0):
        problems.append(f"seed: must be a nonnegative integer, got {seed!r}")
        seed = None

    topology, topo_echo = _parse_topology(raw.get("topology"), problems)
    protocol = _parse_protocol(raw.get("protocol"), topology, problems)
    variant = protocol.variant if protocol is not None else None
    channel, channel_echo = _parse_channel(raw.get("channel"), topology, variant, seed, problems)
    x0, state_echo = _parse_initial_state(raw.get("initial_state"), topology, seed, problems)
    tol, max_steps = _parse_run(raw.get("run"), problems)
    trace_file, summary_file, samples_file = _parse_outputs(raw.get("outputs"), problems)

    if problems:
        raise ConfigError(problems)

    resolved = {
        "topology": topo_echo,
        "channel": channel_echo,
        "protocol": {
            "variant": protocol.variant,
            "mixing": list(protocol.mixing) if isinstance(protocol.mixing, tuple) else protocol.mixing,
            "step_size": protocol.step_size,
        },
        "initial_state": state_echo,
        "run": {"tol": tol, "max_steps": max_steps},
        "outputs": {"trace": trace_file, "summary": summary_file, "samples": samples_file},
    }
    return ScenarioConfig(
        topology=topology,
        channel=channel,
        protocol=protocol,
        x0=x0,
        tol=tol,
        max_steps=max_steps,
        trace_file=trace_file,
        summary_file=summary_file,
        samples_file=samples_file,
        resolved=resolved,
    )


def _parse_topology(section, problems):
    if not isinstance(section, dict):
        problems.append("topology: section is required and must be an object")
        return None, None
    kind = section.get("kind")
    try:
        if kind == "complete":
            n = _require_int(section, "n", "topology.n", minimum=2)
            weight = float(section.get("weight", 1.0))
            g = complete_graph(n, weight)
            echo = {"kind": "complete", "n": n, "weight": weight}
        elif kind == "ring":
            n = _require_int(section, "n", "topology.n", minimum=2)
            weight = float(section.get("weight", 1.0))
            g = ring_graph(n, weight)
            echo = {"kind": "ring", "n": n, "weight": weight}
        elif kind == "custom":
            n = _require_int(section, "n", "topology.n", minimum=1)
            arcs = section.get("arcs")
            if not isinstance(arcs, list) or not all(
                isinstance(a, list) and len(a) == 3 for a in arcs
            ):
                raise ValueError("topology.arcs must be a list of [j, i, weight] triples")
            g = graph_from_arcs(n, [(int(j), int(i), float(w)) for j, i, w in arcs])
            echo = {"kind": "custom", "n": n, "arcs": [[j, i, g.weights[(j, i)]] for j, i in g.arc_order]}
        else:
            raise ValueError(f"topology.kind must be 'complete', 'ring' or 'custom', got {kind!r}")
    except (ValueError, TypeError, KeyError) as exc:
        problems.append(f"topology: {exc}")
        return None, None
    return g, echo


def _parse_channel(section, topology, variant, seed, problems):
    if variant == CLASSICAL:
        if section is not None:
            problems.append("channel: the classical variant does not use a channel section")
        return None, None
    if not isinstance(section, dict):
        problems.append("channel: section is required and must be an object")
        return None, None
    law_spec = section.get("law")
    law = None
    if not isinstance(law_spec, dict):
        problems.append("channel.law: required object, e.g. {\"kind\": \"uniform\", \"lo\": 0.0, \"hi\": 10.0}")
    else:
        try:
            kind = law_spec.get("kind")
            if kind == "uniform":
                law = UniformLaw(float(law_spec["lo"]), float(law_spec["hi"]))
            elif kind == "constant":
                law = ConstantLaw(float(law_spec["value"]))
            else:
                raise ValueError(f"kind must be 'uniform' or 'constant', got {kind!r}")
        except (ValueError, TypeError, KeyError) as exc:
            problems.append(f"channel.law: {exc}")
    mode = section.get("mode")
    if mode not in MODES:
        problems.append(f"channel.mode: must be one of {MODES}, got {mode!r}")
        mode = IID_PER_STEP
    channel_seed = section.get("seed")
    if channel_seed is None:
        if seed is None:
            problems.append("channel.seed: required (or provide a top-level seed to derive it from)")
        else:
            channel_seed = derive_seed(seed, _CHANNEL_SEED_TAG)
    elif not (isinstance(channel_seed, int) and channel_seed >= 0):
        problems.append(f"channel.seed: must be a nonnegative integer, got {channel_seed!r}")
        channel_seed = None
    if topology is None or law is None or channel_seed is None:
        return None, None
    model = ChannelModel(topology=topology, law=law, mode=mode, seed=channel_seed)
    if isinstance(law, UniformLaw):
        law_echo = {"kind": "uniform", "lo": law.lo, "hi": law.hi}
    else:
        law_echo = {"kind": "constant", "value": law.value}
    return model, {"law": law_echo, "mode": mode, "seed": channel_seed}


def _parse_protocol(section, topology, problems):
    if not isinstance(section, dict):
        problems.append("protocol: section is required and must be an object")
        return None
    variant = section.get("variant")
    if variant not in VARIANTS:
        problems.append(f"protocol.variant: must be one of {VARIANTS}, got {variant!r}")
        return None
    mixing = section.get("mixing")
    step_size = section.get("step_size")
    if variant == SUPERPOSITION:
        if step_size is not None:
            problems.append("protocol.step_size: only the classical variant takes a step size")
        mixing = _validate_mixing(mixing, topology, problems)
        if mixing is None:
            return None
        _require_strong_connectivity(topology, variant, problems)
        return ProtocolConfig(variant=SUPERPOSITION, mixing=mixing)
    if variant == CLASSICAL:
        if mixing is not None:
            problems.append("protocol.mixing: only the superposition variant takes a mixing weight")
        if not isinstance(step_size, (int, float)):
            problems.append("protocol.step_size: required number for the classical variant")
            return None
        step_size = float(step_size)
        if topology is not None:
            try:
                bound = step_size_bound(topology)
            except ValueError as exc:
                problems.append(f"protocol.step_size: {exc}")
                return None
            if not (0.0 < step_size < bound):
                problems.append(
                    f"protocol.step_size: must lie in (0, {bound:.6g}) for this topology, got {step_size}"
                )
                return None
        _require_strong_connectivity(topology, variant, problems)
        return ProtocolConfig(variant=CLASSICAL, step_size=step_size)
    # naive
    if mixing is not None or step_size is not None:
        problems.append("protocol: the naive variant takes no mixing or step_size")
    return ProtocolConfig(variant=NAIVE)


def _validate_mixing(mixing, topology, problems):
    if isinstance(mixing, (int, float)) and not isinstance(mixing, bool):
        if not (0.0 < float(mixing) < 1.0):
            problems.append(
                f"protocol.mixing: must lie in the open interval (0, 1), got {mixing}"
            )
            return None
        return float(mixing)
    if isinstance(mixing, list) and all(isinstance(v, (int, float)) for v in mixing):
        if topology is not None and len(mixing) != topology.n:
            problems.append(
                f"protocol.mixing: per-agent list must have length {topology.n}, got {len(mixing)}"
            )
            return None
        if not all(0.0 < float(v) < 1.0 for v in mixing):
            problems.append(
                "protocol.mixing: every per-agent weight must lie in the open interval (0, 1)"
            )
            return None
        return [float(v) for v in mixing]
    problems.append("protocol.mixing: required number (or per-agent list) for the superposition variant")
    return None


def _require_strong_connectivity(topology, variant, problems):
    if topology is not None and not is_strongly_connected(topology):
        problems.append(
            f"topology: must be strongly connected for the {variant} variant"
        )


def _parse_initial_state(section, topology, seed, problems):
    if section is None:
        section = {"kind": "uniform", "lo": 0.0, "hi": math.tau}
    if not isinstance(section, dict):
        problems.append("initial_state: must be an object")
        return None, None
    kind = section.get("kind")
    if kind == "explicit":
        values = section.get("values")
        if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
            problems.append("initial_state.values: must be a list of numbers")
            return None, None
        if topology is not None and len(values) != topology.n:
            problems.append(
                f"initial_state.values: must have length {topology.n}, got {len(values)}"
            )
            return None, None
        x0 = np.array(values, dtype=float)
        return x0, {"kind": "explicit", "values": [float(v) for v in values]}
    if kind == "uniform":
        try:
            lo = float(section.get("lo", 0.0))
            hi = float(section.get("hi", math.tau))
        except (TypeError, ValueError):
            problems.append("initial_state: lo and hi must be numbers")
            return None, None
        if not lo < hi:
            problems.append(f"initial_state: needs lo < hi, got ({lo}, {hi})")
            return None, None
        state_seed = section.get("seed")
        if state_seed is None:
            if seed is None:
                problems.append(
                    "initial_state.seed: required (or provide a top-level seed to derive it from)"
                )
                return None, None
            state_seed = derive_seed(seed, _STATE_SEED_TAG)
        elif not (isinstance(state_seed, int) and state_seed >= 0):
            problems.append(f"initial_state.seed: must be a nonnegative integer, got {state_seed!r}")
            return None, None
        if topology is None:
            return None, None
        rng = np.random.default_rng(state_seed)
        x0 = rng.uniform(lo, hi, topology.n)
        return x0, {"kind": "uniform", "lo": lo, "hi": hi, "seed": state_seed}
    problems.append(f"initial_state.kind: must be 'uniform' or 'explicit', got {kind!r}")
    return None, None


def _parse_run(section, problems):
    if section is None:
        return DEFAULT_SPREAD_TOL, DEFAULT_MAX_STEPS
    if not isinstance(section, dict):
        problems.append("run: must be an object")
        return DEFAULT_SPREAD_TOL, DEFAULT_MAX_STEPS
    tol = section.get("tol", DEFAULT_SPREAD_TOL)
    max_steps = section.get("max_steps", DEFAULT_MAX_STEPS)
    if not isinstance(tol, (int, float)) or not tol > 0:
        problems.append(f"run.tol: must be a positive number, got {tol!r}")
        tol = DEFAULT_SPREAD_TOL
    if not isinstance(max_steps, int) or max_steps < 0:
        problems.append(f"run.max_steps: must be a nonnegative integer, got {max_steps!r}")
        max_steps = DEFAULT_MAX_STEPS
    return float(tol), max_steps


def _parse_outputs(section, problems):
    defaults = (DEFAULT_TRACE_FILE, DEFAULT_SUMMARY_FILE, DEFAULT_SAMPLES_FILE)
    if section is None:
        return defaults
    if not isinstance(section, dict):
        problems.append("outputs: must be an object")
        return defaults
    names = []
    for key, default in zip(("trace", "summary", "samples"), defaults):
        value = section.get(key, default)
        if not isinstance(value, str) or not value:
            problems.append(f"outputs.{key}: must be a non-empty filename")
            value = default
        names.append(value)
    return tuple(names)


def _require_int(section, key, label, minimum):
    value = section.get(key)
    if not isinstance(value, int) or value < minimum:
        raise ValueError(f"{label} must be an integer >= {minimum}, got {value!r}")
    return value


# A 5-node balanced, strongly connected stand-in topology (each node sends
# to the next one and the one after, all unit weights, so in-weight equals
# out-weight everywhere). The original experiments' exact digraph is not
# available; this stand-in is documented, not claimed identical.
STANDIN_ARCS = sorted(
    [[v, v % 5 + 1, 1.0] for v in range(1, 6)] + [[v, (v + 1) % 5 + 1, 1.0] for v in range(1, 6)]
)

_STANDIN_TOPOLOGY = {"kind": "custom", "n": 5, "arcs": STANDIN_ARCS}
_U010 = {"kind": "uniform", "lo": 0.0, "hi": 10.0}
_INIT = {"kind": "uniform", "lo": 0.0, "hi": math.tau, "seed": 4242}

PRESETS: dict[str, dict] = {
    "ti-sigma02": {
        "topology": _STANDIN_TOPOLOGY,
        "channel": {"law": _U010, "mode": "time-invariant", "seed": 7},
        "protocol": {"variant": "superposition", "mixing": 0.2},
        "initial_state": _INIT,
    },
    "ti-sigma05": {
        "topology": _STANDIN_TOPOLOGY,
        "channel": {"law": _U010, "mode": "time-invariant", "seed": 7},
        "protocol": {"variant": "superposition", "mixing": 0.5},
        "initial_state": _INIT,
    },
    "tv-sigma05": {
        "topology": _STANDIN_TOPOLOGY,
        "channel": {"law": _U010, "mode": "iid-per-step", "seed": 7},
        "protocol": {"variant": "superposition", "mixing": 0.5},
        "initial_state": _INIT,
    },
    "tv-complete-n30-sigma08": {
        "topology": {"kind": "complete", "n": 30},
        "channel": {"law": _U010, "mode": "iid-per-step", "seed": 7},
        "protocol": {"variant": "superposition", "mixing": 0.8},
        "initial_state": _INIT,
    },
}

PRESET_NAMES = tuple(sorted(PRESETS))


def preset(name: str) -> dict:
    """Deep copy of a named preset scenario document."""
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}") from None
