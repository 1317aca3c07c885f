"""Scalar quantities used across solvers, certificates, and experiments.

Log-likelihoods, the trace-regularized objective, entropy, the mean
off-diagonal Bernoulli KL divergence, spectral distances, the Dunn cluster
index, and the counting statistics over level sets of an inferred
probability matrix. Every sum over node pairs uses ordered pairs (each
unordered pair contributes twice), so the algebraic identities between these
quantities hold verbatim.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .graphs import Graph
from .symmat import offdiag_mask, require_symmetric, spectral_norm

__all__ = [
    "bernoulli_loglik",
    "regularized_objective",
    "entropy",
    "matrix_kl",
    "spectral_distance",
    "squared_spectral_distance",
    "dunn_index",
    "LambdaStats",
    "lambda_stats",
]


def _adjacency(graph_or_adj):
    if isinstance(graph_or_adj, Graph):
        return graph_or_adj.adjacency()
    adj = np.asarray(graph_or_adj)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise InputError(f"adjacency must be square, got shape {adj.shape}")
    return adj.astype(bool)


def _checked_offdiag(m, name, lo=0.0, hi=1.0):
    m = require_symmetric(m, name=name)
    off = offdiag_mask(m.shape[0])
    vals = m[off]
    if np.any(vals < lo) or np.any(vals > hi):
        raise DomainError(
            f"{name} off-diagonal entries must lie in [{lo}, {hi}]"
        )
    return m, off


def bernoulli_loglik(m, graph_or_adj):
    """Log-probability of the observed edges under edge-probability matrix m.

    Sums ``A log m + (1-A) log(1-m)`` over ordered off-diagonal pairs. A
    certain miss (an observed edge where m is 0, or a non-edge where m is 1)
    makes the result -inf; that is a value, not an error. Always <= 0, with
    equality exactly when m reproduces the adjacency off the diagonal.
    """
    adj = _adjacency(graph_or_adj)
    m, off = _checked_offdiag(m, "probability matrix")
    if adj.shape != m.shape:
        raise InputError(
            f"shape mismatch: adjacency {adj.shape} vs matrix {m.shape}"
        )
    edge_vals = m[adj & off]
    nonedge_vals = m[~adj & off]
    if np.any(edge_vals == 0.0) or np.any(nonedge_vals == 1.0):
        return float("-inf")
    total = 0.0
    if edge_vals.size:
        total += float(np.log(edge_vals).sum())
    if nonedge_vals.size:
        total += float(np.log1p(-nonedge_vals).sum())
    return total


def regularized_objective(m, graph_or_adj, trace_penalty):
    """Log-likelihood minus ``trace_penalty`` times the trace of m."""
    return bernoulli_loglik(m, graph_or_adj) - float(trace_penalty) * float(
        np.trace(np.asarray(m, dtype=float))
    )


def entropy(p):
    """Off-diagonal entrywise entropy ``-sum p log p`` with 0 log 0 = 0.

    Note this keeps only the ``p log p`` half of the Bernoulli entropy of
    each pair; the complementary ``(1-p) log(1-p)`` half is deliberately
    excluded to match the likelihood-envelope bounds that consume it.
    """
    p, off = _checked_offdiag(p, "probability matrix")
    vals = p[off]
    pos = vals[vals > 0.0]
    return float(-(pos * np.log(pos)).sum())


def matrix_kl(x, y):
    """Mean off-diagonal Bernoulli KL divergence of x from y.

    Averages the entrywise divergence over all n(n-1) ordered pairs.
    Nonnegative; zero iff the off-diagonals agree. Where y hits {0, 1}
    against a disagreeing x entry the divergence is +inf (returned, not
    raised); the conventions 0 log 0 = 0 apply on the x side.
    """
    x, off = _checked_offdiag(x, "first matrix")
    y, _ = _checked_offdiag(y, "second matrix")
    if x.shape != y.shape:
        raise InputError(f"shape mismatch: {x.shape} vs {y.shape}")
    xv = x[off]
    yv = y[off]
    total = 0.0
    head = xv > 0.0
    if np.any(head & (yv == 0.0)):
        return float("inf")
    sel = head & (yv > 0.0)
    total += float((xv[sel] * np.log(xv[sel] / yv[sel])).sum())
    tail = xv < 1.0
    if np.any(tail & (yv == 1.0)):
        return float("inf")
    sel = tail & (yv < 1.0)
    total += float(
        ((1.0 - xv[sel]) * np.log((1.0 - xv[sel]) / (1.0 - yv[sel]))).sum()
    )
    n = x.shape[0]
    return total / (n * (n - 1))


def spectral_distance(m1, m2):
    """Operator-norm distance between two symmetric matrices."""
    m1 = require_symmetric(m1, name="first matrix")
    m2 = require_symmetric(m2, name="second matrix")
    if m1.shape != m2.shape:
        raise InputError(f"shape mismatch: {m1.shape} vs {m2.shape}")
    return spectral_norm(m1 - m2)


def squared_spectral_distance(m1, m2):
    """Operator-norm distance between the squares of two matrices.

    The square of an adjacency matrix counts common neighbors, which is
    observable without knowing edge probabilities; this makes the squared
    distance usable for cross-validation on real graphs.
    """
    m1 = require_symmetric(m1, name="first matrix")
    m2 = require_symmetric(m2, name="second matrix")
    if m1.shape != m2.shape:
        raise InputError(f"shape mismatch: {m1.shape} vs {m2.shape}")
    return spectral_norm(m1 @ m1 - m2 @ m2)


def dunn_index(points, labels):
    """Cluster separation score: min inter-cluster gap over max diameter.

    ``points`` are embedding coordinates, one row per node; ``labels``
    assigns each row to a cluster. Distances are Euclidean. The gap between
    two clusters is their minimum pairwise distance; a cluster's diameter is
    its maximum pairwise distance. If every cluster is a single point (all
    diameters zero) the index is +inf.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    labels = np.asarray(labels)
    if labels.shape[0] != points.shape[0]:
        raise InputError(
            f"{labels.shape[0]} labels for {points.shape[0]} points"
        )
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise DomainError("Dunn index needs at least two clusters")
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    groups = [np.flatnonzero(labels == u) for u in uniq]
    max_diameter = 0.0
    for idx in groups:
        if idx.size > 1:
            max_diameter = max(max_diameter, float(dist[np.ix_(idx, idx)].max()))
    min_gap = float("inf")
    for a in range(len(groups)):
        for b in range(a + 1, len(groups)):
            gap = float(dist[np.ix_(groups[a], groups[b])].min())
            min_gap = min(min_gap, gap)
    if max_diameter == 0.0:
        return float("inf")
    return min_gap / max_diameter


@dataclass(frozen=True)
class LambdaStats:
    """Ordered-pair counts of box-boundary level sets of an inferred matrix.

    The box for the constrained solver pins off-diagonal entries to
    [1/n, 1-1/n]; these counts record how many pairs sit at the floor, at
    the ceiling, or strictly between, split by edge/non-edge class. The
    ``z_statistic`` (non-edges at the floor minus non-edges strictly
    interior) is the correction term in the trace bound for that solver.
    """

    floor: float
    ceiling: float
    edges_at_floor: int
    nonedges_at_floor: int
    nonedges_at_ceiling: int
    nonedges_interior: int
    pairs_at_floor: int
    z_statistic: int


def lambda_stats(p_star, graph, level_eps=1e-6):
    """Count level-set membership of off-diagonal entries at the box edges.

    Membership at a level means within ``level_eps`` of it; everything else
    inside the box counts as interior. Counts are over ordered pairs.
    """
    if not isinstance(graph, Graph):
        raise InputError("lambda_stats expects a Graph")
    p_star = require_symmetric(p_star, name="inferred matrix")
    n = graph.n
    if p_star.shape[0] != n:
        raise InputError(
            f"matrix size {p_star.shape[0]} does not match graph size {n}"
        )
    if level_eps < 0:
        raise InputError("level_eps must be nonnegative")
    floor = 1.0 / n
    ceiling = 1.0 - 1.0 / n
    adj = graph.adjacency()
    off = offdiag_mask(n)
    at_floor = np.abs(p_star - floor) <= level_eps
    at_ceiling = np.abs(p_star - ceiling) <= level_eps
    interior = (
        (p_star > floor + level_eps) & (p_star < ceiling - level_eps)
    )
    edges = adj & off
    nonedges = ~adj & off
    edges_at_floor = int(np.sum(at_floor & edges))
    nonedges_at_floor = int(np.sum(at_floor & nonedges))
    nonedges_at_ceiling = int(np.sum(at_ceiling & nonedges))
    nonedges_interior = int(np.sum(interior & nonedges))
    return LambdaStats(
        floor=floor,
        ceiling=ceiling,
        edges_at_floor=edges_at_floor,
        nonedges_at_floor=nonedges_at_floor,
        nonedges_at_ceiling=nonedges_at_ceiling,
        nonedges_interior=nonedges_interior,
        pairs_at_floor=edges_at_floor + nonedges_at_floor,
        z_statistic=nonedges_at_floor - nonedges_interior,
    )
