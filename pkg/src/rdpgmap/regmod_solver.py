"""Projected gradient ascent for the box-constrained variant of the MAP
problem.

The variant pins every off-diagonal probability into [1/n, 1-1/n], which
bounds the likelihood gradient entrywise by n and keeps every logarithm
finite, so a primal first-order method is stable at the fixed step 1/(2n^2)
dictated by the worst-case curvature of the log terms on the box.

The feasible set is the intersection of the PSD cone with the off-diagonal
box. Projecting onto it exactly at every step is wasteful: the alternating
correction scheme contracts slowly for this pair of sets, so a converged
projection costs hundreds of eigendecompositions. Instead each gradient
step runs a single correction cycle and carries the correction pair to the
next step. As the iterate settles, the carried corrections converge to the
exact projection corrections of the limit, so the projection error vanishes
together with the gradient map and the whole solve costs one
eigendecomposition per iteration. The correction pair divided by the step
is exactly the implied dual matrix, which gives multiplier-level
stationarity residuals for free; a final full-accuracy projection polishes
the returned matrix.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, InputError
from .graphs import Graph
from .metrics import regularized_objective
from .recovery import PrimalSolution
from .symmat import (
    dykstra_warm,
    numerical_rank,
    offdiag_mask,
    project_offdiag_box,
    require_symmetric,
)
from .symmat import eigh as _eigh

__all__ = [
    "RegModOptions",
    "regmod_objective",
    "regmod_gradient",
    "solve_regmod",
]


@dataclass(frozen=True)
class RegModOptions:
    """Knobs for ``solve_regmod``; the box itself is derived from n.

    ``tol`` stops on the step-normalized iterate displacement relative to
    the iterate scale; ``kkt_tol`` stops earlier when the multiplier
    residuals implied by the carried projection corrections all clear it,
    checked every ``check_every`` iterations. ``dykstra_tol`` and
    ``dykstra_max_iter`` govern the final polishing projection.
    """

    trace_penalty: float
    max_iter: int = 30000
    tol: float = 1e-7
    dykstra_tol: float = 1e-10
    dykstra_max_iter: int = 5000
    kkt_tol: float = 1e-6
    check_every: int = 25
    rank_tol: float = 1e-3

    def __post_init__(self):
        if not self.trace_penalty > 0:
            raise ConfigError(
                f"trace penalty must be positive, got {self.trace_penalty}"
            )
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.check_every < 1:
            raise ConfigError(
                f"check_every must be >= 1, got {self.check_every}"
            )
        for name in ("tol", "dykstra_tol", "kkt_tol", "rank_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(
                    f"{name} must be positive, got {getattr(self, name)}"
                )


def _box(n):
    return 1.0 / n, 1.0 - 1.0 / n


def _validated(p, graph):
    if not isinstance(graph, Graph):
        raise InputError("expected a Graph")
    p = require_symmetric(p, name="probability matrix")
    if p.shape[0] != graph.n:
        raise InputError(
            f"matrix size {p.shape[0]} does not match graph size {graph.n}"
        )
    off = offdiag_mask(graph.n)
    if np.any(p[off] <= 0.0) or np.any(p[off] >= 1.0):
        raise DomainError(
            "off-diagonal entries must lie strictly inside (0, 1)"
        )
    return p


def regmod_objective(p, graph, trace_penalty):
    """Trace-regularized log-likelihood on the open off-diagonal box.

    Identical formula to the unconstrained objective, but demands strictly
    interior off-diagonal entries so the value is always finite.
    """
    p = _validated(p, graph)
    return regularized_objective(p, graph, trace_penalty)


def regmod_gradient(p, graph, trace_penalty):
    """Ascent gradient: a/p - (1-a)/(1-p) off the diagonal, -C on it."""
    p = _validated(p, graph)
    return _gradient(
        p, graph.adjacency(), offdiag_mask(graph.n), float(trace_penalty)
    )


def _gradient(p, adj, off, c):
    g = np.zeros_like(p)
    e = adj & off
    ne = ~adj & off
    g[e] = 1.0 / p[e]
    g[ne] = -1.0 / (1.0 - p[ne])
    np.fill_diagonal(g, -c)
    return g


def _multiplier_report(x, psd_corr, box_corr, step, c, lo, hi, n):
    # at a fixed point step*gradient = psd_corr + box_corr; the PSD
    # correction is -step times a PSD multiplier orthogonal to x, and the
    # box correction is signed by which bound each entry sits on
    q_hat = -psd_corr / step
    b = box_corr / step
    wq, _ = _eigh(q_hat)
    off = offdiag_mask(n)
    margin = 1e-6
    collapsed = hi - lo <= 2.0 * margin
    at_hi = off & (x >= hi - margin)
    at_lo = off & (x <= lo + margin)
    interior = off & ~at_hi & ~at_lo
    sign_viol = 0.0
    if not collapsed:
        # a collapsed box pins entries from both sides, so any sign is valid
        if np.any(at_hi):
            sign_viol = max(sign_viol, float(np.max(-b[at_hi], initial=0.0)))
        if np.any(at_lo):
            sign_viol = max(sign_viol, float(np.max(b[at_lo], initial=0.0)))
    interior_mass = float(np.max(np.abs(b[interior]), initial=0.0))
    comp = float(np.linalg.norm(x @ q_hat))
    comp_scale = 1.0 + float(np.linalg.norm(x)) * float(np.linalg.norm(q_hat))
    return {
        "dual_diag_residual": float(np.max(np.abs(np.diag(q_hat) - c))),
        "complementarity": comp / comp_scale,
        "psd_mult_min_eig": float(wq[0]),
        "box_mult_sign_violation": sign_viol,
        "box_mult_interior_mass": interior_mass,
    }, comp


def _report_clears(report, c, kkt_tol):
    return (
        report["dual_diag_residual"] <= kkt_tol * max(1.0, c)
        and report["complementarity"] <= kkt_tol
        and report["box_mult_sign_violation"] <= kkt_tol
        and report["box_mult_interior_mass"] <= kkt_tol
        and report["psd_mult_min_eig"] >= -kkt_tol * max(1.0, c)
    )


def solve_regmod(graph, options):
    """Maximize the box-constrained objective over PSD matrices.

    Fixed-step projected gradient ascent with a carried correction pair:
    each iteration costs one eigendecomposition. Returns a
    ``PrimalSolution`` whose ``multiplier_report`` carries the stationarity
    diagnostics implied by the carried corrections; ``status`` is
    ``grad_map`` or ``kkt`` on convergence and ``max_iter`` otherwise, with
    the last iterate returned and flagged either way.
    """
    if not isinstance(graph, Graph):
        raise InputError("expected a Graph")
    if not isinstance(options, RegModOptions):
        raise InputError("expected RegModOptions")
    n = graph.n
    if n < 2:
        raise InputError(f"need at least two nodes, got {n}")
    c = float(options.trace_penalty)
    lo, hi = _box(n)
    adj = graph.adjacency()
    off = offdiag_mask(n)
    box_proj = lambda m: project_offdiag_box(m, lo, hi)

    density = 2.0 * graph.m / (n * (n - 1))
    x = np.full((n, n), min(max(density, lo), hi))
    np.fill_diagonal(x, 1.0)
    step = 1.0 / (2.0 * n * n)
    state = None
    status = "max_iter"
    iterations = 0
    disp = np.inf
    report = None

    for k in range(1, options.max_iter + 1):
        iterations = k
        g = _gradient(x, adj, off, c)
        cand = x + step * g
        z, info, state = dykstra_warm(
            cand, box_proj, state, tol=options.dykstra_tol, max_iter=1,
        )
        disp = float(np.linalg.norm(z - x)) / step
        scale = max(1.0, float(np.linalg.norm(z)))
        x = z
        if disp <= options.tol * scale:
            status = "grad_map"
            break
        if k % options.check_every == 0:
            report, _ = _multiplier_report(
                x, state[0], state[1], step, c, lo, hi, n
            )
            if _report_clears(report, c, options.kkt_tol):
                status = "kkt"
                break

    psd_corr, box_corr = state
    report, comp = _multiplier_report(
        x, psd_corr, box_corr, step, c, lo, hi, n
    )
    # the single-cycle loop leaves a projection residual of the same order
    # as the remaining gradient map; one converged projection cleans the
    # returned matrix without disturbing the multiplier picture
    x, polish, _ = dykstra_warm(
        x, box_proj, None, tol=options.dykstra_tol,
        max_iter=options.dykstra_max_iter,
    )
    fx = regularized_objective(x, graph, c)
    report["grad_map"] = disp
    report["projection_residual"] = float(
        max(polish.psd_residual, polish.err_estimate)
    )
    w, _ = _eigh(x)
    return PrimalSolution(
        matrix=x,
        trace_penalty=c,
        objective=fx,
        rank=numerical_rank(x, options.rank_tol),
        psd_residual=float(max(0.0, -w[0])),
        comp_residual=comp,
        status=status,
        converged=status in ("grad_map", "kkt"),
        multiplier_report=report,
    )
