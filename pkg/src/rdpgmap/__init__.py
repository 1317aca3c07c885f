"""Maximum-a-posteriori estimation of the edge-probability matrix of a
random dot product graph.

The estimator solves a trace-regularized Bernoulli likelihood problem over
positive semidefinite matrices through its much smaller dual: project a
gradient flow onto the cone slice with a fixed diagonal, then read the
primal matrix off the optimality conditions in closed form. Everything
downstream (certificates, embeddings, sweeps) consumes the primal/dual
pair. :func:`solve_map` runs the whole pipeline in one call.
"""

from .certify import (
    CertReport,
    CertRow,
    check_entry_bounds,
    check_kkt,
    check_likelihood_theorem,
    check_rank_relation,
    check_regmod_trace,
    check_trace_bounds,
    combine_reports,
    sandwich,
)
from .dual_solver import (
    DualSolution,
    SolverOptions,
    dual_gradient,
    dual_objective,
    solve_dual,
)
from .embedding import Embedding, ase, embed_from_p
from .errors import (
    ConfigError,
    DomainError,
    InputError,
    ModelViolationError,
    NumericalError,
    ParseError,
    RdpgmapError,
)
from .graphs import (
    BallsConfig,
    Graph,
    SphereCapsConfig,
    gen_balls,
    gen_sbm,
    gen_sphere_caps,
    karate,
    prob_from_latent,
    sample_rdpg,
)
from .metrics import (
    bernoulli_loglik,
    dunn_index,
    entropy,
    lambda_stats,
    matrix_kl,
    regularized_objective,
    spectral_distance,
    squared_spectral_distance,
)
from .recovery import (
    DualCertificate,
    PrimalSolution,
    assemble_certificate,
    duality_gap,
    recover_diag,
    recover_offdiag,
    recover_primal,
)
from .regmod_solver import RegModOptions, solve_regmod
from .sweep import (
    SweepConfig,
    SweepRecord,
    aggregate,
    export,
    load_records,
    run_sweep,
    select_c,
    sweep_filename,
)

__all__ = [
    "solve_map",
    "Graph",
    "sample_rdpg",
    "prob_from_latent",
    "gen_sbm",
    "gen_sphere_caps",
    "gen_balls",
    "SphereCapsConfig",
    "BallsConfig",
    "karate",
    "SolverOptions",
    "DualSolution",
    "solve_dual",
    "dual_objective",
    "dual_gradient",
    "RegModOptions",
    "solve_regmod",
    "PrimalSolution",
    "DualCertificate",
    "recover_primal",
    "recover_offdiag",
    "recover_diag",
    "assemble_certificate",
    "duality_gap",
    "CertReport",
    "CertRow",
    "check_entry_bounds",
    "check_trace_bounds",
    "check_kkt",
    "check_rank_relation",
    "check_likelihood_theorem",
    "check_regmod_trace",
    "combine_reports",
    "sandwich",
    "Embedding",
    "ase",
    "embed_from_p",
    "bernoulli_loglik",
    "regularized_objective",
    "entropy",
    "matrix_kl",
    "spectral_distance",
    "squared_spectral_distance",
    "dunn_index",
    "lambda_stats",
    "SweepConfig",
    "SweepRecord",
    "run_sweep",
    "aggregate",
    "select_c",
    "export",
    "load_records",
    "sweep_filename",
    "RdpgmapError",
    "InputError",
    "ConfigError",
    "DomainError",
    "ModelViolationError",
    "ParseError",
    "NumericalError",
]

__version__ = "0.1.0"


def solve_map(graph, trace_penalty, rank_tol=1e-3, options=None):
    """Infer the probability matrix of a graph: solve, recover, certify.

    Parameters
    ----------
    graph : Graph
        Observed simple graph.
    trace_penalty : float
        Diagonal level of the dual variable; larger values shrink the
        trace of the estimate and with it the embedding rank.
    rank_tol : float
        Eigenvalue threshold for the reported rank.
    options : SolverOptions, optional
        Full solver control; ``trace_penalty`` must match when given.

    Returns
    -------
    primal : PrimalSolution
        The inferred matrix with rank and recovery residuals.
    dual : DualSolution
        The dual matrix the primal was read from.
    report : CertReport
        Optimality and bound certificate for the pair.
    """
    if options is None:
        options = SolverOptions(trace_penalty=trace_penalty)
    elif options.trace_penalty != trace_penalty:
        raise ConfigError(
            f"options carry trace_penalty={options.trace_penalty}, "
            f"called with {trace_penalty}"
        )
    dual = solve_dual(graph, options)
    primal = recover_primal(dual.matrix, graph, trace_penalty,
                            rank_tol=rank_tol)
    report = combine_reports(
        check_entry_bounds(primal.matrix, dual.matrix, graph, trace_penalty),
        check_trace_bounds(primal.matrix, graph, trace_penalty),
        check_kkt(primal.matrix, dual.matrix, graph, trace_penalty),
        check_rank_relation(primal.matrix, dual.matrix, graph,
                            trace_penalty, tau=rank_tol),
    )
    return primal, dual, report
