"""Turn the analytic facts about optimal solutions into pass/fail reports.

Every check evaluates a concrete inequality on concrete matrices. Checks
whose hypotheses fail (penalty too small, graph with an isolated node,
empty edge set) are reported as not-applicable rows instead of being
dropped, so a report always shows the full picture. Probabilistic
statements are never hard assertions here: envelope rows carry their slack
for frequency tests done elsewhere, with ``passed`` left unset.

Rows come in two shapes. Inequality rows store the observed left and right
sides of ``lhs <= rhs`` and pass when the slack ``rhs - lhs`` clears the
negative tolerance. Residual rows store a nonnegative residual against its
allowance, so the slack is ``allowance - residual``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graphs import Graph
from .metrics import bernoulli_loglik, entropy, lambda_stats
from .recovery import assemble_certificate, recover_offdiag
from .symmat import eigh, numerical_rank, offdiag_mask, require_symmetric

__all__ = [
    "CertRow",
    "CertReport",
    "check_entry_bounds",
    "check_trace_bounds",
    "check_kkt",
    "sandwich",
    "check_likelihood_theorem",
    "check_regmod_trace",
    "check_rank_relation",
    "combine_reports",
]


@dataclass(frozen=True)
class CertRow:
    """One checked inequality: passed is None when not applicable."""

    name: str
    anchor: str
    lhs: float
    rhs: float
    slack: float
    passed: bool | None
    note: str = ""

    def as_dict(self):
        def clean(v):
            if isinstance(v, float) and not math.isfinite(v):
                return str(v)
            return v

        return {
            "name": self.name,
            "anchor": self.anchor,
            "lhs": clean(self.lhs),
            "rhs": clean(self.rhs),
            "slack": clean(self.slack),
            "passed": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True)
class CertReport:
    """Itemized check results plus the aggregate verdict."""

    rows: tuple
    overall: bool
    tolerances: dict = field(default_factory=dict)

    def row(self, name):
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def as_dict(self):
        return {
            "rows": [r.as_dict() for r in self.rows],
            "overall": self.overall,
            "tolerances": dict(self.tolerances),
        }


def _finish(rows, tolerances):
    overall = all(r.passed for r in rows if r.passed is not None)
    return CertReport(rows=tuple(rows), overall=overall, tolerances=tolerances)


def _ineq(name, anchor, lhs, rhs, tol, note=""):
    lhs = float(lhs)
    rhs = float(rhs)
    slack = rhs - lhs
    return CertRow(name, anchor, lhs, rhs, slack, bool(slack >= -tol), note)


def _na(name, anchor, note):
    return CertRow(name, anchor, math.nan, math.nan, math.nan, None, note)


def _checked_pair(p, graph, name="matrix"):
    if not isinstance(graph, Graph):
        raise InputError("expected a Graph")
    p = require_symmetric(p, name=name)
    if p.shape[0] != graph.n:
        raise InputError(
            f"{name} size {p.shape[0]} does not match graph size {graph.n}"
        )
    return p


def _worst_pair(lhs_val, rhs_val, mask):
    # pick the index with the smallest slack so the row shows the
    # binding instance of the bound
    slack = np.where(mask, rhs_val - lhs_val, np.inf)
    idx = np.unravel_index(int(np.argmin(slack)), slack.shape)
    return float(lhs_val[idx]), float(rhs_val[idx]), idx


def check_entry_bounds(p, q, graph, trace_penalty, tol=1e-6):
    """Entrywise bounds tying optimal entries to degrees and the penalty.

    Rows gated on their hypotheses: the plain rows need nothing, the
    floor/ceiling rows need trace_penalty >= 1, and the refined rows need
    trace_penalty >= max degree. The diagonal lower bound also needs
    trace_penalty >= 1 (it runs through the edge floor) and takes the
    minimum degree over each node's neighbors, since only an adjacent node
    carries the guaranteed edge mass; it is skipped when the graph has an
    isolated node. The variant that uses the graph-wide minimum degree is
    reported informationally: it overshoots whenever the lightest node is
    not adjacent to the node being bounded. The dual edge ceiling is
    checked on edges only: the supporting argument runs through the
    per-node stationarity identity, which controls edge entries alone.
    """
    p = _checked_pair(p, graph, "primal matrix")
    q = _checked_pair(q, graph, "dual matrix")
    c = float(trace_penalty)
    n = graph.n
    deg = graph.degrees().astype(float)
    adj = graph.adjacency()
    off = offdiag_mask(n)
    edges = adj & off
    nonedges = ~adj & off
    diag_p = np.diag(p)
    rows = []
    root = np.sqrt(np.outer(deg, deg))

    if deg.min() <= 0:
        rows.append(_na(
            "diag-lower", "diagonal floor from the lightest neighbor",
            "skipped: isolated node present",
        ))
        rows.append(_na(
            "diag-lower-min-degree",
            "diagonal floor from the lightest node anywhere",
            "skipped: isolated node present",
        ))
    elif c >= 1.0 - tol:
        nbr_min = np.where(adj, deg[None, :], np.inf).min(axis=1)
        lhs, rhs, idx = _worst_pair(
            1.0 / (c * nbr_min), diag_p, np.ones(n, bool)
        )
        rows.append(_ineq(
            "diag-lower", "diagonal floor from the lightest neighbor",
            lhs, rhs, tol, f"binding node {idx[0]}",
        ))
        g_lhs, g_rhs, g_idx = _worst_pair(
            np.full((n,), 1.0 / (c * deg.min())), diag_p, np.ones(n, bool)
        )
        held = bool(g_rhs - g_lhs >= -tol)
        rows.append(CertRow(
            "diag-lower-min-degree",
            "diagonal floor from the lightest node anywhere",
            g_lhs, g_rhs, g_rhs - g_lhs, None,
            f"informational: holds={held}; binding node {g_idx[0]}; valid "
            "only when that node neighbors the bounded one",
        ))
    else:
        note = f"skipped: needs penalty >= 1, got {c}"
        rows.append(_na(
            "diag-lower", "diagonal floor from the lightest neighbor", note))
        rows.append(_na(
            "diag-lower-min-degree",
            "diagonal floor from the lightest node anywhere", note))

    lhs, rhs, idx = _worst_pair(diag_p, deg / c, np.ones(n, bool))
    rows.append(_ineq(
        "diag-upper", "diagonal ceiling from the node degree",
        lhs, rhs, tol, f"binding node {idx[0]}",
    ))

    if off.any():
        lhs, rhs, idx = _worst_pair(p, root / c, off)
        rows.append(_ineq(
            "offdiag-upper", "off-diagonal ceiling from the degree product",
            lhs, rhs, tol, f"binding pair {idx}",
        ))
    else:
        rows.append(_na(
            "offdiag-upper", "off-diagonal ceiling from the degree product",
            "skipped: no off-diagonal pairs",
        ))

    if edges.any():
        lhs, rhs, idx = _worst_pair(
            q, np.minimum.outer(deg, deg) - 1.0, edges
        )
        rows.append(_ineq(
            "dual-edge-upper", "dual ceiling from the smaller endpoint degree",
            lhs, rhs, tol, f"binding pair {idx}; edges only",
        ))
    else:
        rows.append(_na(
            "dual-edge-upper", "dual ceiling from the smaller endpoint degree",
            "skipped: no edges",
        ))

    if c >= 1.0 - tol:
        if edges.any():
            lhs, rhs, idx = _worst_pair(np.full_like(p, 1.0 / c), p, edges)
            rows.append(_ineq(
                "edge-lower", "edge floor at the reciprocal penalty",
                lhs, rhs, tol, f"binding pair {idx}",
            ))
        else:
            rows.append(_na(
                "edge-lower", "edge floor at the reciprocal penalty",
                "skipped: no edges",
            ))
        if nonedges.any():
            lhs, rhs, idx = _worst_pair(
                p, np.full_like(p, 1.0 - 1.0 / c), nonedges
            )
            rows.append(_ineq(
                "nonedge-upper", "nonedge ceiling at one minus the reciprocal",
                lhs, rhs, tol, f"binding pair {idx}",
            ))
        else:
            rows.append(_na(
                "nonedge-upper", "nonedge ceiling at one minus the reciprocal",
                "skipped: no nonedges",
            ))
    else:
        note = f"skipped: needs penalty >= 1, got {c}"
        rows.append(_na(
            "edge-lower", "edge floor at the reciprocal penalty", note))
        rows.append(_na(
            "nonedge-upper", "nonedge ceiling at one minus the reciprocal",
            note))

    if c >= deg.max() - tol:
        guarded = nonedges & (root < c * (1.0 - 1e-12))
        if guarded.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                ceil = np.where(root < c, c / (c - root), np.inf)
            lhs, rhs, idx = _worst_pair(q, ceil, guarded)
            skipped = int(nonedges.sum() - guarded.sum())
            rows.append(_ineq(
                "nonedge-dual-upper",
                "dual nonedge ceiling under a dominant penalty",
                lhs, rhs, tol,
                f"binding pair {idx}; {skipped} pairs at the degenerate "
                "degree product skipped",
            ))
        else:
            rows.append(_na(
                "nonedge-dual-upper",
                "dual nonedge ceiling under a dominant penalty",
                "skipped: no guarded nonedges",
            ))
        with np.errstate(divide="ignore", invalid="ignore"):
            spill = np.where(
                nonedges & (root < c), root / (c * (c - root)), 0.0
            )
        refined = deg / c - spill.sum(axis=1)
        lhs, rhs, idx = _worst_pair(refined, diag_p, np.ones(n, bool))
        rows.append(_ineq(
            "diag-lower-refined",
            "diagonal floor refined under a dominant penalty",
            lhs, rhs, tol, f"binding node {idx[0]}",
        ))
    else:
        note = f"skipped: needs penalty >= max degree {deg.max():g}, got {c}"
        rows.append(_na(
            "nonedge-dual-upper",
            "dual nonedge ceiling under a dominant penalty", note))
        rows.append(_na(
            "diag-lower-refined",
            "diagonal floor refined under a dominant penalty", note))

    return _finish(rows, {"entry_bounds": tol})


def check_trace_bounds(p, graph, trace_penalty, tol=1e-6):
    """Trace window: 0 <= tr P <= 2m/C, refined floor when C > n."""
    p = _checked_pair(p, graph, "primal matrix")
    c = float(trace_penalty)
    n = graph.n
    tr = float(np.trace(p))
    rows = [
        _ineq("trace-nonneg", "trace of a PSD matrix", 0.0, tr, tol),
        _ineq("trace-upper", "trace ceiling from the edge count",
              tr, 2.0 * graph.m / c, tol),
    ]
    if c > n:
        floor = 2.0 * graph.m / c - n**3 / (c * (c - n))
        rows.append(_ineq(
            "trace-lower-refined",
            "trace floor under a dominant penalty", floor, tr, tol,
        ))
    else:
        rows.append(_na(
            "trace-lower-refined", "trace floor under a dominant penalty",
            f"skipped: needs penalty > {n}, got {c}",
        ))
    return _finish(rows, {"trace_bounds": tol})


def check_kkt(p, q, graph, trace_penalty, certificate=None, tol=1e-5,
              psd_tol=1e-4):
    """Optimality system: orthogonality, stationarity, and feasibility.

    ``certificate`` is the multiplier bundle from
    ``assemble_certificate``; it is built on the fly when omitted.
    The eigenvalue floors use the looser ``psd_tol``: the primal is
    rebuilt entrywise from the dual, so its spectrum is controlled only
    through accumulated entry error, which grows with the matrix size;
    the allowance scales as ``psd_tol * max(1, n / 30)``.
    """
    p = _checked_pair(p, graph, "primal matrix")
    q = _checked_pair(q, graph, "dual matrix")
    c = float(trace_penalty)
    if certificate is None:
        certificate = assemble_certificate(p, q, graph, c)
    cert = certificate
    eig_allow = psd_tol * max(1.0, graph.n / 30.0)
    rows = [
        _ineq("complementarity", "product of primal and dual optima",
              cert.comp_scaled, 0.0, tol),
        _ineq("stationarity", "per-pair multiplier balance",
              cert.stationarity_residual, 0.0, tol),
        _ineq("cone-feasibility", "multiplier cone membership",
              cert.cone_violation, 0.0, tol),
        _ineq("dual-diag", "dual diagonal pinned at the penalty",
              cert.diag_residual, 0.0, tol),
        _ineq("primal-psd", "primal eigenvalue floor",
              -cert.min_eig_p, 0.0, eig_allow),
        _ineq("dual-psd", "dual eigenvalue floor",
              -cert.min_eig_q, 0.0, eig_allow),
    ]
    off = offdiag_mask(graph.n)
    value_map = recover_offdiag(q, graph)
    gap = float(np.max(np.abs((p - value_map)[off]), initial=0.0))
    rows.append(_ineq(
        "value-map", "off-diagonal entries match the dual value map",
        gap, 0.0, tol,
    ))
    return _finish(rows, {"kkt": tol, "kkt_psd": psd_tol})


def sandwich(graph, trace_penalty):
    """Certified objective window (lower, upper) for the dual optimum.

    Lower: value of the feasible dual point that scales the adjacency
    structure by the penalty. Upper: value of the degree-scaled
    diagonally dominant construction, which needs the penalty to dominate
    every degree; otherwise the upper end is +inf.
    """
    if not isinstance(graph, Graph):
        raise InputError("expected a Graph")
    c = float(trace_penalty)
    if c <= 0:
        raise InputError(f"trace penalty must be positive, got {c}")
    m = graph.m
    deg = graph.degrees().astype(float)
    lower = -2.0 * m * math.log(c) - 2.0 * m
    if graph.n > 0 and c > deg.max():
        pos = deg > 0
        upper = -2.0 * m - float(
            np.sum(deg[pos] * (math.log(c) - np.log(deg[pos])))
        )
    else:
        upper = math.inf
    return lower, upper


def check_likelihood_theorem(p_true, p_star, graph, trace_penalty, eta,
                             tol=1e-6):
    """Likelihood gap bounds between the generating and inferred matrices.

    The deterministic row must pass whenever the penalty is at least one.
    The two envelope rows are probabilistic: their slack is recorded and
    ``passed`` is left unset, because a single draw can legitimately fall
    outside them. The nominal coverage probability is reported in its own
    row, along with whether each side and the joint event held here.
    """
    if not isinstance(graph, Graph):
        raise InputError("expected a Graph")
    p_true = _checked_pair(p_true, graph, "generating matrix")
    p_star = _checked_pair(p_star, graph, "inferred matrix")
    c = float(trace_penalty)
    eta = float(eta)
    if eta <= 0:
        raise InputError(f"eta must be positive, got {eta}")
    n = graph.n
    m = graph.m
    deg = graph.degrees().astype(float)
    diff = bernoulli_loglik(p_true, graph) - bernoulli_loglik(p_star, graph)
    rows = []
    if c >= 1.0 - tol:
        rows.append(_ineq(
            "likelihood-gap-deterministic",
            "likelihood gap below the trace gap", diff,
            c * float(np.trace(p_true)) - c * float(np.trace(p_star)), tol,
        ))
    else:
        rows.append(_na(
            "likelihood-gap-deterministic",
            "likelihood gap below the trace gap",
            f"skipped: needs penalty >= 1, got {c}",
        ))

    prob = 1.0 - 4.0 * math.exp(-eta**2 / (8.0 * n * (n - 1) + 4.0 * eta))
    if c > deg.max():
        h = entropy(p_true)
        pos = deg > 0
        dlogd = float(np.sum(deg[pos] * np.log(deg[pos])))
        low = -eta - h + 2.0 * m * math.log(c) - dlogd
        up = eta - h + 2.0 * m * math.log(c) + 2.0 * m
        low_slack = diff - low
        up_slack = up - diff
        rows.append(CertRow(
            "envelope-lower", "probabilistic likelihood-gap floor",
            low, diff, low_slack, None, "probabilistic: slack recorded only",
        ))
        rows.append(CertRow(
            "envelope-upper", "probabilistic likelihood-gap ceiling",
            diff, up, up_slack, None, "probabilistic: slack recorded only",
        ))
        rows.append(CertRow(
            "envelope-event", "nominal coverage of the envelope pair",
            prob, prob, 0.0, None,
            f"lower_held={bool(low_slack >= 0)} "
            f"upper_held={bool(up_slack >= 0)} "
            f"joint_held={bool(low_slack >= 0 and up_slack >= 0)}",
        ))
    else:
        note = (
            f"skipped: needs penalty > max degree {deg.max():g}, got {c}"
        )
        rows.append(_na(
            "envelope-lower", "probabilistic likelihood-gap floor", note))
        rows.append(_na(
            "envelope-upper", "probabilistic likelihood-gap ceiling", note))
        rows.append(_na(
            "envelope-event", "nominal coverage of the envelope pair", note))
    return _finish(rows, {"likelihood": tol, "eta": eta})


def check_regmod_trace(p_star, graph, trace_penalty, stats=None, tol=1e-6):
    """Trace bounds for the box-constrained variant via level-set counts.

    The simplified bound uses the count statistic directly. The four-term
    bound is evaluated twice: once with coefficients that follow from the
    per-node stationarity argument (a hard row, tight on the two-node
    fixture), and once with the larger coefficients sometimes quoted for
    it (informational, since they can fail on valid optima).
    """
    p_star = _checked_pair(p_star, graph, "inferred matrix")
    c = float(trace_penalty)
    n = graph.n
    if stats is None:
        stats = lambda_stats(p_star, graph)
    tr = float(np.trace(p_star))
    base = 2.0 * graph.m / c
    rows = [
        _ineq(
            "regmod-trace-simplified",
            "trace ceiling from the level-count statistic",
            tr, base + stats.z_statistic / n, tol,
            f"z={stats.z_statistic}",
        )
    ]
    four = (
        base
        + stats.pairs_at_floor / n
        - stats.edges_at_floor / c
        - (n - 1) * stats.nonedges_at_ceiling / c
        - stats.nonedges_interior / (c * (n - 1))
    )
    rows.append(_ineq(
        "regmod-trace-four-term",
        "trace ceiling from the four level counts",
        tr, four, tol,
        f"counts=({stats.pairs_at_floor},{stats.edges_at_floor},"
        f"{stats.nonedges_at_ceiling},{stats.nonedges_interior})",
    ))
    printed = (
        base
        + stats.pairs_at_floor / n
        - stats.edges_at_floor
        - (n - 1) * stats.nonedges_at_ceiling / c
        - stats.nonedges_interior / (n - 1)
    )
    rows.append(CertRow(
        "regmod-trace-four-term-steep",
        "four-count ceiling with undamped coefficients",
        tr, printed, printed - tr, None,
        f"informational; holds={bool(printed - tr >= -tol)}",
    ))
    return _finish(rows, {"regmod_trace": tol})


def check_rank_relation(p, q, graph=None, trace_penalty=None, tau=1e-3,
                        slack_sum=2, slack_floor=1):
    """Rank split between the primal and dual optima.

    Orthogonality forces the ranks to split n between them, up to
    ``slack_sum`` numerical leeway. When the graph and penalty are given
    and the penalty dominates every degree, the dual rank also has a floor
    of n/2 minus ``slack_floor``.
    """
    p = require_symmetric(p, name="primal matrix")
    q = require_symmetric(q, name="dual matrix")
    if p.shape != q.shape:
        raise InputError(
            f"shape mismatch: {p.shape} vs {q.shape}"
        )
    n = p.shape[0]
    rank_p = numerical_rank(p, tau)
    rank_q = numerical_rank(q, tau)
    rows = [_ineq(
        "rank-additivity", "rank split forced by orthogonality",
        rank_p + rank_q, n + slack_sum, 0.0,
        f"rank_p={rank_p} rank_q={rank_q} tau={tau}",
    )]
    if graph is not None and trace_penalty is not None:
        if not isinstance(graph, Graph):
            raise InputError("expected a Graph")
        c = float(trace_penalty)
        if c > graph.degrees().max():
            rows.append(_ineq(
                "rank-dual-floor",
                "dual rank floor from diagonal dominance",
                n / 2.0 - slack_floor, rank_q, 0.0, f"tau={tau}",
            ))
        else:
            rows.append(_na(
                "rank-dual-floor",
                "dual rank floor from diagonal dominance",
                "skipped: penalty does not dominate the degrees",
            ))
    else:
        rows.append(_na(
            "rank-dual-floor", "dual rank floor from diagonal dominance",
            "skipped: graph or penalty not supplied",
        ))
    return _finish(rows, {"rank": float(tau)})


def combine_reports(*reports):
    """Concatenate reports into one, AND-ing the verdicts."""
    rows = []
    tolerances = {}
    for rep in reports:
        rows.extend(rep.rows)
        tolerances.update(rep.tolerances)
    return _finish(rows, tolerances)
