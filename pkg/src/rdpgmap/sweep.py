"""Regularization sweeps, replicate studies, and experiment persistence.

A sweep runs the full inference pipeline over a grid of trace penalties
with independent replicates per grid point and records one metrics row per
(penalty, replicate) cell. When the generating probability matrix is known,
each replicate samples its own graph from it and the true-matrix distances
are filled; when only a graph is given those columns are null, never zero,
so downstream cross-validation cannot silently mix them up. All randomness
derives from the base seed XOR the replicate index: a replicate sees the
same sampled graph at every grid point, rows never share RNG state, and
results are identical under any scheduling.
"""

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .certify import (
    check_entry_bounds,
    check_kkt,
    check_rank_relation,
    check_trace_bounds,
    combine_reports,
)
from .dual_solver import SolverOptions, solve_dual
from .embedding import embed_from_p
from .errors import ConfigError, InputError
from .graphs import Graph, sample_rdpg
from .metrics import dunn_index, spectral_distance, squared_spectral_distance
from .recovery import duality_gap, recover_primal

__all__ = [
    "SweepConfig",
    "SweepRecord",
    "RECORD_FIELDS",
    "run_sweep",
    "aggregate",
    "select_c",
    "export",
    "load_records",
    "sweep_filename",
]

DEFAULT_GRID = tuple(float(c) for c in range(2, 26))


@dataclass(frozen=True)
class SweepConfig:
    """Sweep layout: grid, replication, seeding, and output.

    ``c_grid`` must be strictly increasing and positive. ``rank_tol`` is
    the eigenvalue threshold that turns the inferred matrix into an
    embedding dimension. ``with_dunn`` only matters when labels are
    supplied; ``with_certificates`` controls the per-row certificate
    column, the most expensive metric. ``output_path`` triggers an export
    after the run (format from the extension). ``jobs`` bounds the worker
    pool; any value yields identical results.
    """

    c_grid: tuple = DEFAULT_GRID
    replicates: int = 1
    base_seed: int = 0
    rank_tol: float = 1e-3
    with_dunn: bool = True
    with_certificates: bool = True
    output_path: str = None
    jobs: int = 1

    def __post_init__(self):
        grid = tuple(float(c) for c in self.c_grid)
        if len(grid) == 0:
            raise ConfigError("penalty grid is empty")
        if grid[0] <= 0:
            raise ConfigError(f"penalties must be positive, got {grid[0]}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("penalty grid must be strictly increasing")
        object.__setattr__(self, "c_grid", grid)
        if self.replicates < 1:
            raise ConfigError(
                f"replicates must be >= 1, got {self.replicates}"
            )
        if not self.rank_tol > 0:
            raise ConfigError(
                f"rank_tol must be positive, got {self.rank_tol}"
            )
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")


RECORD_FIELDS = (
    "c",
    "replicate",
    "d_star",
    "dist_true",
    "dist_adj",
    "dist_adj_sq",
    "dist_true_sq",
    "duality_gap",
    "dunn",
    "trace",
    "wall_time",
    "cert_pass",
)


@dataclass(frozen=True)
class SweepRecord:
    """One sweep cell: penalty, replicate id, and the measured metrics.

    ``d_star`` is the embedding dimension read off the inferred matrix.
    ``dist_true`` and ``dist_true_sq`` are operator-norm distances to the
    generating matrix and between the squares, null when it is unknown;
    ``dist_adj`` and ``dist_adj_sq`` are the observable counterparts
    against the adjacency matrix. A row from a failed solve carries a null
    ``d_star`` and null metrics with ``cert_pass`` False.
    """

    c: float
    replicate: int
    d_star: int = None
    dist_true: float = None
    dist_adj: float = None
    dist_adj_sq: float = None
    dist_true_sq: float = None
    duality_gap: float = None
    dunn: float = None
    trace: float = None
    wall_time: float = None
    cert_pass: bool = None

    def as_dict(self):
        return {name: getattr(self, name) for name in RECORD_FIELDS}

    @property
    def failed(self):
        return self.d_star is None


def _check_labels(labels, n):
    if labels is None:
        return None
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise InputError(
            f"labels must have one entry per node, got shape {labels.shape} "
            f"for n={n}"
        )
    return labels


def _run_cell(c, replicate, p_true, base_graph, labels, config):
    start = time.perf_counter()
    try:
        if base_graph is None:
            graph = sample_rdpg(p_true, seed=config.base_seed ^ replicate)
        else:
            graph = base_graph
        sol = solve_dual(graph, SolverOptions(trace_penalty=c))
        prim = recover_primal(
            sol.matrix, graph, c, rank_tol=config.rank_tol
        )
        p_star = prim.matrix
        adj = graph.adjacency().astype(float)
        dist_true = dist_true_sq = None
        if p_true is not None:
            dist_true = spectral_distance(p_true, p_star)
            dist_true_sq = squared_spectral_distance(p_true, p_star)
        dunn = None
        if labels is not None and config.with_dunn:
            emb = embed_from_p(p_star, max(1, prim.rank))
            dunn = dunn_index(emb.x, labels)
        cert_pass = None
        if config.with_certificates:
            report = combine_reports(
                check_entry_bounds(p_star, sol.matrix, graph, c),
                check_trace_bounds(p_star, graph, c),
                check_kkt(p_star, sol.matrix, graph, c),
                check_rank_relation(
                    p_star, sol.matrix, graph, c, tau=config.rank_tol
                ),
            )
            cert_pass = bool(report.overall)
        return SweepRecord(
            c=float(c),
            replicate=int(replicate),
            d_star=int(prim.rank),
            dist_true=dist_true,
            dist_adj=spectral_distance(adj, p_star),
            dist_adj_sq=squared_spectral_distance(adj, p_star),
            dist_true_sq=dist_true_sq,
            duality_gap=duality_gap(prim, sol),
            dunn=dunn,
            trace=float(np.trace(p_star)),
            wall_time=time.perf_counter() - start,
            cert_pass=cert_pass,
        )
    except Exception:
        return SweepRecord(
            c=float(c),
            replicate=int(replicate),
            wall_time=time.perf_counter() - start,
            cert_pass=False,
        )


def run_sweep(target, config, labels=None):
    """Run the pipeline over every (penalty, replicate) cell.

    ``target`` is either a generating probability matrix (each replicate
    samples its own graph from it) or a :class:`Graph` (the same graph is
    reused, so extra replicates only repeat the deterministic solve).
    Returns records sorted by (penalty, replicate); failures become failed
    rows rather than aborting the sweep. When ``config.output_path`` is
    set the records are also exported there.
    """
    if not isinstance(config, SweepConfig):
        raise InputError("expected a SweepConfig")
    if isinstance(target, Graph):
        p_true, base_graph = None, target
        n = target.n
    else:
        p_true = np.asarray(target, dtype=float)
        if p_true.ndim != 2 or p_true.shape[0] != p_true.shape[1]:
            raise InputError(
                "target must be a Graph or a square probability matrix, "
                f"got shape {p_true.shape}"
            )
        base_graph = None
        n = p_true.shape[0]
    labels = _check_labels(labels, n)

    cells = [
        (c, r) for c in config.c_grid for r in range(config.replicates)
    ]
    if config.jobs == 1:
        records = [
            _run_cell(c, r, p_true, base_graph, labels, config)
            for c, r in cells
        ]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(
                lambda cell: _run_cell(
                    cell[0], cell[1], p_true, base_graph, labels, config
                ),
                cells,
            ))
    records.sort(key=lambda rec: (rec.c, rec.replicate))
    if config.output_path is not None:
        export(records, config.output_path)
    return records


_AGGREGATE_FIELDS = tuple(
    name for name in RECORD_FIELDS if name not in ("c", "replicate")
)


def aggregate(records):
    """Per-penalty mean and standard-deviation bands for every metric.

    Returns one dict per grid value, sorted by penalty, with ``<field>_mean``
    and ``<field>_sd`` entries. Null metrics are skipped; a field with no
    valid values at some penalty aggregates to null. The deviation is the
    population kind, so a single replicate gives zero-width bands.
    """
    groups = {}
    for rec in records:
        groups.setdefault(rec.c, []).append(rec)
    out = []
    for c in sorted(groups):
        row = {"c": c, "count": len(groups[c])}
        for name in _AGGREGATE_FIELDS:
            vals = [
                float(getattr(rec, name))
                for rec in groups[c]
                if getattr(rec, name) is not None
            ]
            if vals:
                arr = np.asarray(vals)
                row[f"{name}_mean"] = float(arr.mean())
                row[f"{name}_sd"] = float(arr.std())
            else:
                row[f"{name}_mean"] = None
                row[f"{name}_sd"] = None
        out.append(row)
    return out


_CRITERION_FIELD = {
    "true_spectral": "dist_true",
    "empirical_squared": "dist_adj_sq",
}


def select_c(records, criterion="empirical_squared"):
    """Penalty whose mean curve is lowest; ties go to the smaller penalty.

    ``true_spectral`` scores against the generating matrix and therefore
    needs records from a known-matrix sweep; ``empirical_squared`` scores
    the squared-adjacency distance, which is observable on real graphs.
    """
    if criterion not in _CRITERION_FIELD:
        raise InputError(
            f"criterion must be one of {sorted(_CRITERION_FIELD)}, "
            f"got {criterion!r}"
        )
    field = _CRITERION_FIELD[criterion]
    curve = aggregate(records)
    best_c, best_val = None, math.inf
    for row in curve:
        val = row[f"{field}_mean"]
        if val is None:
            if criterion == "true_spectral":
                raise InputError(
                    "true_spectral selection needs records with the "
                    "generating matrix known"
                )
            continue
        if val < best_val:
            best_c, best_val = row["c"], val
    if best_c is None:
        raise InputError("no usable rows to select from")
    return best_c


def _format_csv_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_csv_value(name, text):
    if text == "":
        return None
    if name == "cert_pass":
        return text == "true"
    if name in ("replicate", "d_star"):
        return int(text)
    return float(text)


def export(records, path, fmt=None):
    """Write records to CSV (header = field order) or JSON (array of objects).

    The format comes from ``fmt`` or the file extension. Floats are written
    with full repr so a round-trip through :func:`load_records` is exact.
    """
    if fmt is None:
        fmt = "json" if str(path).endswith(".json") else "csv"
    if fmt not in ("csv", "json"):
        raise InputError(f"format must be csv or json, got {fmt!r}")
    rows = [rec.as_dict() for rec in records]
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(RECORD_FIELDS)
            for row in rows:
                writer.writerow(
                    [_format_csv_value(row[name]) for name in RECORD_FIELDS]
                )
    else:
        with open(path, "w") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")


def load_records(path, fmt=None):
    """Read records written by :func:`export`."""
    if fmt is None:
        fmt = "json" if str(path).endswith(".json") else "csv"
    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != RECORD_FIELDS:
                raise InputError(f"unexpected CSV header in {path}")
            return [
                SweepRecord(**{
                    name: _parse_csv_value(name, text)
                    for name, text in zip(RECORD_FIELDS, row)
                })
                for row in reader
            ]
    if fmt == "json":
        with open(path) as fh:
            rows = json.load(fh)
        return [SweepRecord(**row) for row in rows]
    raise InputError(f"format must be csv or json, got {fmt!r}")


def sweep_filename(experiment, n, seed, fmt="csv"):
    """Canonical sweep output name: ``<experiment>_<n>_<seed>.<ext>``."""
    return f"{experiment}_{n}_{seed}.{fmt}"
