"""Predictions and decompositions for consensus runs.

Covers the consensus-value prediction from the dominant left eigenvector,
the split of the superposition update into an equal-gain part plus a
zero-mean channel disturbance, convergence-rate measurement, and seeded
Monte Carlo statistics over channel realizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelModel, ChannelRealization, derive_seed
from .graph import WeightedDigraph
from .linalg import dominant_left_eigenvector
from .protocol import (
    CONVERGED,
    DEFAULT_MAX_STEPS,
    DEFAULT_SPREAD_TOL,
    ProtocolConfig,
    Trace,
    effective_matrix,
    run,
)

#: Tolerance of the built-in fixed-point verification in predicted_consensus.
FIXED_POINT_TOL = 1e-10

#: Fraction of the fitting window dropped at each end by measure_rate.
RATE_FIT_TRIM = 0.10


@dataclass(frozen=True)
class DisturbanceDecomposition:
    """Matrices A (n x n) and B (n x n^2) with x+ = A x + B nu.

    A is the equal-gain update (diagonal ``1 - mixing``, ``mixing / |N_i|``
    on arcs); B is block-diagonal with one length-n row block per agent
    holding ``mixing / |N_i|`` at its neighbor positions. nu is the stacked
    per-arc disturbance, row-major: (nu_11, ..., nu_1n, nu_21, ..., nu_nn).
    """

    state_matrix: np.ndarray
    input_matrix: np.ndarray


@dataclass(frozen=True)
class RunSummary:
    """Machine-readable outcome of a single run."""

    consensus_value: float
    predicted_value: Optional[float]
    steps_to_converge: int
    spread_final: float
    rate_measured: Optional[float]
    rate_predicted: Optional[float]
    converged: bool
    hull_violated: bool


@dataclass(frozen=True)
class MonteCarloResult:
    """Statistics of the consensus value over independently seeded runs."""

    runs: int
    non_converged: int
    mean_consensus: float
    std_consensus: float
    mean_steps: float
    consensus_values: tuple[float, ...]
    steps: tuple[int, ...]
    seeds: tuple[int, ...]
    converged: tuple[bool, ...]


def predicted_consensus(D: np.ndarray, x0: Sequence[float]) -> float:
    """Predicted agreement value ``w' x0`` for a time-invariant update matrix.

    ``w`` is the dominant left eigenvector of the primitive row-stochastic
    ``D``. Before returning, the eigenvector is re-verified against the
    fixed-point form in which the mixing weight has cancelled: with
    constant diagonal, ``w_i`` must equal the sum over receivers ``j`` of
    ``w_j * D_ji / (1 - D_jj)``, i.e. the prediction depends on the
    channel coefficients but not on the mixing weight. For non-constant
    diagonals the mixing does not cancel and the rearranged per-row eigen
    identity is checked instead.
    """
    D = np.asarray(D, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    pair = dominant_left_eigenvector(D)
    w = pair.left_vector
    diag = np.diag(D)
    off = D - np.diag(diag)
    if np.ptp(diag) <= 1e-13:
        reconstructed = (w / (1.0 - diag)) @ off
        residual = float(np.max(np.abs(reconstructed - w)))
    else:
        residual = float(np.max(np.abs(w @ off - (1.0 - diag) * w)))
    if residual > FIXED_POINT_TOL:
        raise RuntimeError(
            f"left eigenvector failed the fixed-point check (residual {residual:.3e})"
        )
    return float(w @ x0)


def fixed_point_residual(r: ChannelRealization, w: Sequence[float]) -> float:
    """Deviation of ``w`` from the coefficient-only fixed-point equation.

    For a common mixing weight, the consensus-defining eigenvector solves
    ``w_i = sum over receivers j of w_j * h_ji / (sum_l h_jl)``, which
    involves only channel coefficients. Returns the max-norm residual.
    """
    w = np.asarray(w, dtype=float)
    sums = r.gains.sum(axis=1)
    if (sums <= 0.0).any():
        raise ValueError("every node needs at least one in-neighbor")
    # ratios[j-1, i-1] = h_ji / sum_l h_jl, the share node i contributes at j
    ratios = r.gains / sums[:, None]
    return float(np.max(np.abs(w @ ratios - w)))


def disturbance_vector(r: ChannelRealization, x: Sequence[float]) -> np.ndarray:
    """Stacked per-arc disturbances nu of length n^2, row-major.

    For an arc ``(j, i)``: ``nu_ij = x_j * (|N_i| h_ij - sum_l h_il) / sum_l h_il``;
    exactly zero off the arc set. Zero-mean for iid coefficients, since the
    coefficient shares of a row are exchangeable.
    """
    x = np.asarray(x, dtype=float)
    n = r.topology.n
    if x.shape != (n,):
        raise ValueError(f"state vector must have length {n}, got shape {x.shape}")
    degrees = np.array([r.topology.in_degree(i) for i in range(1, n + 1)], dtype=float)
    sums = r.gains.sum(axis=1)
    nu = np.zeros((n, n))
    mask = r.gains > 0.0
    rows, cols = np.nonzero(mask)
    nu[rows, cols] = (
        x[cols] * (degrees[rows] * r.gains[rows, cols] - sums[rows]) / sums[rows]
    )
    return nu.reshape(n * n)


def decomposition_matrices(
    topology: WeightedDigraph, mixing: float
) -> DisturbanceDecomposition:
    """Build the equal-gain and disturbance-gain matrices for a common mixing weight."""
    if not 0.0 < mixing < 1.0:
        raise ValueError(f"mixing must lie in (0, 1), got {mixing}")
    n = topology.n
    degrees = np.array([topology.in_degree(i) for i in range(1, n + 1)], dtype=float)
    if (degrees == 0).any():
        raise ValueError("every node needs at least one in-neighbor")
    A = np.zeros((n, n))
    B = np.zeros((n, n * n))
    for j, i in topology.arc_order:
        share = mixing / degrees[i - 1]
        A[i - 1, j - 1] = share
        B[i - 1, (i - 1) * n + (j - 1)] = share
    np.fill_diagonal(A, 1.0 - mixing)
    return DisturbanceDecomposition(state_matrix=A, input_matrix=B)


def stacked_arc_indicator(n: int) -> np.ndarray:
    """Length-n^2 indicator of arc positions in the stacked disturbance vector
    of a fully connected topology: 0 at the n self-pair (diagonal) positions,
    1 everywhere else.

    Satisfies ``ones' B == (mixing / (n - 1)) * indicator'`` for the fully
    connected disturbance-gain matrix B.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    xi = np.ones(n * n)
    xi[np.arange(n) * (n + 1)] = 0.0
    return xi


def decomposition_deviation(
    r: ChannelRealization, x: Sequence[float], mixing: float
) -> float:
    """Max absolute gap between the one-step update and its decomposition.

    ``effective_matrix @ x`` and ``A x + B nu`` are algebraically equal;
    the returned value is pure floating-point roundoff (<= 1e-12 for
    well-scaled inputs).
    """
    x = np.asarray(x, dtype=float)
    direct = effective_matrix(r, mixing) @ x
    deco = decomposition_matrices(r.topology, mixing)
    split = deco.state_matrix @ x + deco.input_matrix @ disturbance_vector(r, x)
    return float(np.max(np.abs(direct - split)))


def measure_rate(trace: Trace) -> float:
    """Least-squares slope of log(spread) per step over the decay window.

    The first and last 10% of the positive-spread steps are dropped to
    exclude the transient and the floating-point floor. Raises on traces
    with fewer than 10 usable steps or no decay to fit (already at
    consensus).
    """
    spreads = trace.spreads()
    positive = np.nonzero(spreads > 0.0)[0]
    if len(positive) < 10:
        raise ValueError(
            f"trace too short to fit a rate: {len(positive)} positive-spread steps, need >= 10"
        )
    trim = int(math.floor(RATE_FIT_TRIM * len(positive)))
    window = positive[trim : len(positive) - trim]
    y = np.log(spreads[window])
    if np.ptp(y) == 0.0:
        raise ValueError("spread is constant; no decay to fit")
    slope = np.polyfit(window.astype(float), y, 1)[0]
    return float(slope)


def summarize_run(
    trace: Trace,
    predicted_value: Optional[float] = None,
    rate_predicted: Optional[float] = None,
) -> RunSummary:
    """Condense a trace into the flat run summary."""
    x0 = trace.initial
    final = trace.final
    lo, hi = float(np.min(x0)), float(np.max(x0))
    arr = trace.state_array()
    hull_violated = bool((arr < lo - 1e-12).any() or (arr > hi + 1e-12).any())
    try:
        rate_measured: Optional[float] = measure_rate(trace)
    except ValueError:
        rate_measured = None
    return RunSummary(
        consensus_value=float(np.mean(final)),
        predicted_value=predicted_value,
        steps_to_converge=trace.steps,
        spread_final=float(np.max(final) - np.min(final)),
        rate_measured=rate_measured,
        rate_predicted=rate_predicted,
        converged=trace.reason == CONVERGED,
        hull_violated=hull_violated,
    )


def monte_carlo(
    topology: WeightedDigraph,
    channel: Optional[ChannelModel],
    protocol: ProtocolConfig,
    x0: Sequence[float],
    runs: int,
    tol: float = DEFAULT_SPREAD_TOL,
    max_steps: int = DEFAULT_MAX_STEPS,
    base_seed: Optional[int] = None,
    vary_channel: bool = True,
) -> MonteCarloResult:
    """Run ``runs`` independent replicates and aggregate consensus statistics.

    Per-run channel seeds are derived deterministically from ``base_seed``
    (default: the channel's own seed), so repeated calls reproduce the same
    result; ``vary_channel=False`` reuses the configured seed in every run.
    The initial state is held fixed. Non-converged runs are counted in
    ``non_converged`` and still reported, never dropped.

    Sums are accumulated with exact (compensated) summation so the
    statistics do not depend on aggregation order.
    """
    if runs < 2:
        raise ValueError(f"need at least 2 runs, got {runs}")
    base = channel.seed if (base_seed is None and channel is not None) else base_seed
    values: list[float] = []
    steps: list[int] = []
    seeds: list[int] = []
    converged: list[bool] = []
    for idx in range(runs):
        if channel is not None and vary_channel:
            seed = derive_seed(base if base is not None else 0, idx)
            model = replace(channel, seed=seed)
        else:
            model = channel
            seed = channel.seed if channel is not None else 0
        trace = run(topology, model, protocol, x0, tol=tol, max_steps=max_steps)
        converged.append(trace.reason == CONVERGED)
        values.append(float(np.mean(trace.final)))
        steps.append(trace.steps)
        seeds.append(seed)
    mean = math.fsum(values) / runs
    var = math.fsum((v - mean) ** 2 for v in values) / (runs - 1)
    return MonteCarloResult(
        runs=runs,
        non_converged=converged.count(False),
        mean_consensus=mean,
        std_consensus=math.sqrt(var),
        mean_steps=math.fsum(steps) / runs,
        consensus_values=tuple(values),
        steps=tuple(steps),
        seeds=tuple(seeds),
        converged=tuple(converged),
    )
