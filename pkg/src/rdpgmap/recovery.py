"""Primal recovery from a near-optimal dual matrix.

The dual solver produces a PSD matrix Q with fixed diagonal. Stationarity of
the Lagrangian pins the edge-probability matrix entrywise: each off-diagonal
entry of P is an explicit piecewise function of the matching entry of Q, and
each diagonal entry is then determined by complementary slackness, which
forces diag(PQ) = 0 exactly. This module inverts those conditions, packages
the result, and reconstructs the full multiplier set so optimality can be
verified arithmetically rather than trusted.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graphs import Graph
from .metrics import regularized_objective
from .symmat import numerical_rank, offdiag_mask, require_symmetric
from .symmat import eigh as _eigh

__all__ = [
    "PrimalSolution",
    "recover_offdiag",
    "recover_diag",
    "recover_primal",
    "DualCertificate",
    "assemble_certificate",
    "duality_gap",
]


@dataclass(frozen=True, eq=False)
class PrimalSolution:
    """Recovered edge-probability matrix with optimality diagnostics.

    ``objective`` is the trace-regularized log-likelihood recomputed from
    ``matrix``, not copied from the solver. ``rank`` counts eigenvalues above
    the tolerance used at construction and doubles as the embedding
    dimension. ``psd_residual`` is how far the matrix dips below the PSD
    cone (0 when it does not); ``comp_residual`` is the Frobenius norm of
    the product with the dual matrix, which is 0 at an exact optimum.
    """

    matrix: np.ndarray
    trace_penalty: float
    objective: float
    rank: int
    psd_residual: float
    comp_residual: float
    status: str = "recovered"
    converged: bool = True
    multiplier_report: dict = field(default=None, repr=False)


def _validated(q, graph, trace_penalty):
    if not isinstance(graph, Graph):
        raise InputError("expected a Graph")
    q = require_symmetric(q, name="dual matrix")
    if q.shape[0] != graph.n:
        raise InputError(
            f"dual matrix size {q.shape[0]} does not match graph size {graph.n}"
        )
    if not trace_penalty > 0:
        raise InputError(f"trace penalty must be positive, got {trace_penalty}")
    return q


def recover_offdiag(q, graph):
    """Off-diagonal edge probabilities implied by a dual matrix.

    Edges: probability 1 while the dual entry stays above -1, then -1/q
    once it saturates. Non-edges: probability 0 while the entry stays below
    1, then 1 - 1/q. Values land in [0, 1] with no clamping; the diagonal
    of the returned matrix is zero and must be filled by ``recover_diag``.
    """
    q = _validated(q, graph, 1.0)
    adj = graph.adjacency()
    off = offdiag_mask(graph.n)
    p = np.zeros_like(q)
    edge_sat = adj & (q <= -1.0)
    edge_free = adj & (q > -1.0)
    p[edge_free] = 1.0
    p[edge_sat] = -1.0 / q[edge_sat]
    nonedge_sat = ~adj & off & (q >= 1.0)
    p[nonedge_sat] = 1.0 - 1.0 / q[nonedge_sat]
    return p


def recover_diag(q, graph, trace_penalty):
    """Diagonal of the recovered matrix, one entry per node.

    Complementary slackness requires every diagonal entry of PQ to vanish;
    since the dual diagonal is pinned to the trace penalty, each latent
    squared norm is the negated row inner product of P and Q off the
    diagonal, divided by the penalty. Both contributions reduce to closed
    forms: max(-1, q) on edges and max(0, q - 1) on non-edges. Isolated
    nodes get 0 when the dual row is slack there. Entries are returned raw,
    without clamping, so diag(PQ) = 0 holds to roundoff; a materially
    negative entry means the dual matrix was far from optimal.
    """
    q = _validated(q, graph, trace_penalty)
    adj = graph.adjacency()
    off = offdiag_mask(graph.n)
    edge_part = np.where(adj, np.maximum(-1.0, q), 0.0)
    nonedge_part = np.where(~adj & off, np.maximum(0.0, q - 1.0), 0.0)
    return -(edge_part.sum(axis=1) + nonedge_part.sum(axis=1)) / float(
        trace_penalty
    )


def recover_primal(q, graph, trace_penalty, rank_tol=1e-3):
    """Full edge-probability matrix recovered from a dual matrix.

    Combines ``recover_offdiag`` and ``recover_diag`` and recomputes the
    trace-regularized objective from scratch. ``rank_tol`` is the eigenvalue
    magnitude below which directions are treated as numerically absent when
    reporting the embedding dimension.
    """
    q = _validated(q, graph, trace_penalty)
    p = recover_offdiag(q, graph)
    np.fill_diagonal(p, recover_diag(q, graph, trace_penalty))
    w, _ = _eigh(p)
    psd_residual = float(max(0.0, -w[0]))
    comp_residual = float(np.linalg.norm(p @ q))
    return PrimalSolution(
        matrix=p,
        trace_penalty=float(trace_penalty),
        objective=regularized_objective(p, graph, trace_penalty),
        rank=numerical_rank(p, rank_tol),
        psd_residual=psd_residual,
        comp_residual=comp_residual,
    )


@dataclass(frozen=True, eq=False)
class DualCertificate:
    """Arithmetic evidence that a primal-dual pair is (near) optimal.

    Each off-diagonal pair carries two exponential-cone constraints, one for
    log p and one for log(1-p), and each constraint carries a multiplier
    triple with a closed form in the dual entry. The certificate stores the
    reconstructed triples and the worst-case violations of the conditions
    an exact optimum satisfies: primal and dual cone membership,
    per-constraint complementarity, the matrix complementarity PQ = 0, the
    pinned dual diagonal, and semidefiniteness of both matrices.
    ``degenerate_pairs`` counts pairs where a probability sits exactly at
    0 or 1, so a logarithm is infinite and the zero-multiplier convention
    carries the complementarity product.
    """

    stationarity_residual: float
    cone_violation: float
    comp_norm: float
    comp_scaled: float
    diag_residual: float
    min_eig_p: float
    min_eig_q: float
    degenerate_pairs: int
    multipliers: dict = field(repr=False)


def assemble_certificate(p, q, graph, trace_penalty):
    """Reconstruct multipliers from q and measure every optimality residual.

    The multiplier closed forms depend only on which side of the saturation
    threshold each dual entry sits, so they are exact even when q is only
    approximately optimal; all approximation error shows up in the measured
    residuals instead.
    """
    q = _validated(q, graph, trace_penalty)
    p = require_symmetric(p, name="primal matrix")
    if p.shape != q.shape:
        raise InputError(f"shape mismatch: {p.shape} vs {q.shape}")
    n = graph.n
    adj = graph.adjacency()
    off = offdiag_mask(n)
    edges = adj & off
    nonedges = ~adj & off

    r = np.zeros_like(q)
    s = np.zeros_like(q)
    t = np.zeros_like(q)
    u = np.zeros_like(q)
    v = np.zeros_like(q)
    w = np.zeros_like(q)

    e_sat = edges & (q <= -1.0)
    e_free = edges & (q > -1.0)
    t[edges] = -1.0
    r[e_sat] = -q[e_sat]
    r[e_free] = 1.0
    u[e_free] = q[e_free] + 1.0
    s[edges] = -1.0 - np.log(r[edges])

    ne_sat = nonedges & (q >= 1.0)
    ne_free = nonedges & (q < 1.0)
    w[nonedges] = -1.0
    u[ne_free] = 1.0
    u[ne_sat] = q[ne_sat]
    r[ne_free] = 1.0 - q[ne_free]
    v[nonedges] = -1.0 - np.log(u[nonedges])

    with np.errstate(divide="ignore"):
        alpha = np.where(off & (p > 0.0), np.log(np.where(p > 0.0, p, 1.0)), -np.inf)
        beta = np.where(
            off & (p < 1.0), np.log(np.where(p < 1.0, 1.0 - p, 1.0)), -np.inf
        )

    # 0 * log(0) = 0 wherever the multiplier vanishes against an infinite log
    t_alpha = t * np.where(t != 0.0, alpha, 0.0)
    w_beta = w * np.where(w != 0.0, beta, 0.0)
    stat_alpha = np.where(off, r * p + s + t_alpha, 0.0)
    stat_beta = np.where(off, u * (1.0 - p) + v + w_beta, 0.0)
    stationarity = float(
        max(np.abs(stat_alpha).max(), np.abs(stat_beta).max())
    )

    # dual cone: third coordinate negative needs u >= -w exp(v/w - 1),
    # third coordinate zero needs the first two nonnegative
    def _dual_cone_violation(first, second, third, mask):
        neg = mask & (third < 0.0)
        zero = mask & (third == 0.0)
        viol = 0.0
        if np.any(neg):
            bound = -third[neg] * np.exp(second[neg] / third[neg] - 1.0)
            viol = max(viol, float(np.max(bound - first[neg])))
        if np.any(zero):
            viol = max(viol, float(np.max(-first[zero])))
            viol = max(viol, float(np.max(-second[zero])))
        return max(viol, 0.0)

    cone = _dual_cone_violation(r, s, t, off)
    cone = max(cone, _dual_cone_violation(u, v, w, off))
    # primal cone with second coordinate 1: first >= exp(third)
    with np.errstate(over="ignore"):
        cone = max(cone, float(np.max(np.exp(alpha[off]) - p[off])))
        cone = max(
            cone, float(np.max(np.exp(beta[off]) - (1.0 - p[off])))
        )

    comp_norm = float(np.linalg.norm(p @ q))
    scale = 1.0 + float(np.linalg.norm(p)) * float(np.linalg.norm(q))
    wp, _ = _eigh(p)
    wq, _ = _eigh(q)
    degenerate = int(np.sum((p[off] == 0.0) | (p[off] == 1.0)))
    return DualCertificate(
        stationarity_residual=stationarity,
        cone_violation=cone,
        comp_norm=comp_norm,
        comp_scaled=comp_norm / scale,
        diag_residual=float(np.max(np.abs(np.diag(q) - trace_penalty))),
        min_eig_p=float(wp[0]),
        min_eig_q=float(wq[0]),
        degenerate_pairs=degenerate,
        multipliers={"r": r, "s": s, "t": t, "u": u, "v": v, "w": w},
    )


def duality_gap(primal, dual):
    """Dual minus primal objective; nonnegative up to roundoff at optima.

    Accepts any two objects with an ``objective`` attribute, so solver
    outputs and hand-built solutions mix freely.
    """
    return float(dual.objective) - float(primal.objective)
