"""Shared test helpers: random graph generators and independent oracles.

The oracles here deliberately take the dumbest correct route (explicit
matrix powers, transitive closure, characteristic polynomial) so they
stay independent of the library code they check.
"""

from __future__ import annotations

import numpy as np

from airconsensus.graph import WeightedDigraph


def random_strongly_connected(rng, n, extra_prob=0.35, w_lo=0.5, w_hi=10.0):
    """Random spanning cycle (guarantees strong connectivity) plus extra arcs."""
    order = rng.permutation(n) + 1
    weights = {}
    for t in range(n):
        j, i = int(order[t]), int(order[(t + 1) % n])
        weights[(j, i)] = float(rng.uniform(w_lo, w_hi))
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            if j != i and (j, i) not in weights and rng.random() < extra_prob:
                weights[(j, i)] = float(rng.uniform(w_lo, w_hi))
    return WeightedDigraph(n, weights)


def random_digraph(rng, n, arc_prob=0.3, w_lo=0.5, w_hi=10.0):
    """Arbitrary random digraph; may be disconnected or even arc-free."""
    weights = {}
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            if j != i and rng.random() < arc_prob:
                weights[(j, i)] = float(rng.uniform(w_lo, w_hi))
    return WeightedDigraph(n, weights)


def random_balanced(rng, n, w_lo=0.5, w_hi=10.0):
    """Union of two random full-length cycles, each with one constant weight.

    Every node gains equal in- and out-weight from each cycle, so the
    result is balanced (and strongly connected) by construction.
    """
    weights: dict[tuple[int, int], float] = {}
    for _ in range(2):
        order = rng.permutation(n) + 1
        w = float(rng.uniform(w_lo, w_hi))
        for t in range(n):
            arc = (int(order[t]), int(order[(t + 1) % n]))
            weights[arc] = weights.get(arc, 0.0) + w
    return WeightedDigraph(n, weights)


def closure_strongly_connected(g: WeightedDigraph) -> bool:
    """Transitive-closure oracle: boolean powers of (I + adjacency) up to n."""
    n = g.n
    reach = np.eye(n, dtype=bool)
    adj = np.zeros((n, n), dtype=bool)
    for j, i in g.weights:
        adj[j - 1, i - 1] = True
    for _ in range(n):
        reach = reach | (reach @ adj)
    return bool(reach.all())


def primitive_by_explicit_powers(A: np.ndarray) -> bool:
    """Primitivity oracle: form every power up to the bound (n-1)^2 + 1."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    pattern = (A > 0).astype(float)
    power = pattern.copy()
    for _ in range((n - 1) ** 2 + 1):
        if (power > 0).all():
            return True
        power = (power @ pattern > 0).astype(float)
    return bool((power > 0).all())


def charpoly_moduli(A: np.ndarray) -> np.ndarray:
    """Eigenvalue moduli (descending) via Faddeev-LeVerrier characteristic
    polynomial coefficients and polynomial root finding; a route through
    trace recursions rather than an eigendecomposition of A itself.

    Recursion: M_1 = A, c_k = -tr(M_k) / k, M_{k+1} = A (M_k + c_k I).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = [1.0]
    M = A.copy()
    for k in range(1, n + 1):
        c = -np.trace(M) / k
        coeffs.append(c)
        M = A @ (M + c * np.eye(n))
    return np.sort(np.abs(np.roots(coeffs)))[::-1]


def symmetric_doubly_stochastic(rng, n):
    """Random convex mix of exactly symmetric doubly stochastic parts
    (identity, equal-share complete graph, symmetrized cycle)."""
    cycle = np.zeros((n, n))
    for v in range(n):
        cycle[v, (v + 1) % n] = 1.0
    parts = [np.eye(n), (np.ones((n, n)) - np.eye(n)) / (n - 1), (cycle + cycle.T) / 2]
    coeffs = rng.uniform(0.1, 1.0, 3)
    coeffs /= coeffs.sum()
    return sum(c * part for c, part in zip(coeffs, parts))


def random_primitive_posdiag(rng, n, density=0.4):
    """Random primitive nonnegative matrix with a strictly positive diagonal.

    A strongly connected zero pattern plus a positive diagonal is always
    primitive.
    """
    g = random_strongly_connected(rng, n, extra_prob=density)
    A = np.zeros((n, n))
    for j, i in g.weights:
        A[i - 1, j - 1] = rng.uniform(0.1, 2.0)
    A[np.diag_indices(n)] = rng.uniform(0.1, 2.0, n)
    return A
