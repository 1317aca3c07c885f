"""Reading and writing graphs and symmetric matrices.

Three interchange formats:

* edge list: one ``i j`` pair per line, 0-indexed, ``#`` starts a comment.
  Writers emit a leading ``# n=<n>`` comment so isolated trailing nodes
  survive a round trip; readers honor it when present.
* CSV: n rows of n comma-separated reals. Readers skip one optional
  non-numeric header row.
* JSON: ``{"n": ..., "edges": [[i, j], ...]}`` for graphs or
  ``{"n": ..., "matrix": [[...], ...]}`` for matrices.
"""

import json
import os
import re

import numpy as np

from .errors import InputError, ParseError
from .graphs import Graph
from .symmat import require_symmetric

__all__ = [
    "read_edgelist",
    "write_edgelist",
    "read_matrix_csv",
    "write_matrix_csv",
    "read_json",
    "write_graph_json",
    "write_matrix_json",
    "load_graph",
    "load_matrix",
]

_N_COMMENT = re.compile(r"#\s*n\s*=\s*(\d+)")


def read_edgelist(path):
    """Parse an edge-list file into a :class:`Graph`.

    Node count comes from a ``# n=<count>`` comment when present, otherwise
    from the largest node index seen.
    """
    edges = []
    n_hint = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            if n_hint is None:
                m = _N_COMMENT.search(raw)
                if m:
                    n_hint = int(m.group(1))
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(
                    f"expected two node indices, got {len(parts)} tokens", lineno
                )
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node index in {parts!r}", lineno) from None
            if i < 0 or j < 0:
                raise ParseError(f"negative node index in ({i}, {j})", lineno)
            if i == j:
                raise ParseError(f"self loop at node {i}", lineno)
            edges.append((i, j))
    max_seen = max((max(i, j) for i, j in edges), default=-1)
    n = n_hint if n_hint is not None else max_seen + 1
    if n <= max_seen:
        raise ParseError(f"declared n={n} but node {max_seen} appears")
    if n < 1:
        raise ParseError("empty edge list with no '# n=' comment")
    return Graph(n, edges)


def write_edgelist(graph, path):
    with open(path, "w") as fh:
        fh.write(f"# n={graph.n}\n")
        for i, j in graph.edges:
            fh.write(f"{i} {j}\n")


def read_matrix_csv(path):
    """Parse a CSV matrix file into an exactly symmetric ndarray."""
    rows = []
    start = 1
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty CSV file")
    try:
        [float(tok) for tok in lines[0].split(",")]
    except ValueError:
        start = 2  # header row
    for lineno, line in enumerate(lines[start - 1 :], start=start):
        if not line.strip():
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise ParseError("non-numeric entry", lineno) from None
        rows.append(row)
    if not rows:
        raise ParseError("CSV file has no data rows")
    width = len(rows[0])
    for offset, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                f"row has {len(row)} entries, expected {width}", start + offset
            )
    m = np.asarray(rows, dtype=float)
    if m.shape[0] != m.shape[1]:
        raise InputError(f"matrix must be square, got shape {m.shape}")
    return require_symmetric(m, name=os.path.basename(path))


def write_matrix_csv(m, path):
    np.savetxt(path, np.asarray(m, dtype=float), delimiter=",", fmt="%.17g")


def read_json(path):
    """Parse a JSON file into a :class:`Graph` or a symmetric ndarray."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(data, dict) or "n" not in data:
        raise ParseError("JSON object must have an 'n' field")
    if "edges" in data:
        return Graph(data["n"], [tuple(e) for e in data["edges"]])
    if "matrix" in data:
        m = np.asarray(data["matrix"], dtype=float)
        if m.shape != (data["n"], data["n"]):
            raise InputError(
                f"matrix shape {m.shape} does not match n={data['n']}"
            )
        return require_symmetric(m, name=os.path.basename(path))
    raise ParseError("JSON object needs an 'edges' or 'matrix' field")


def write_graph_json(graph, path):
    with open(path, "w") as fh:
        json.dump({"n": graph.n, "edges": [list(e) for e in graph.edges]}, fh)
        fh.write("\n")


def write_matrix_json(m, path):
    m = np.asarray(m, dtype=float)
    with open(path, "w") as fh:
        json.dump({"n": m.shape[0], "matrix": m.tolist()}, fh)
        fh.write("\n")


def _sniff(path, fmt):
    if fmt is not None:
        return fmt
    ext = os.path.splitext(path)[1].lower()
    if ext == ".json":
        return "json"
    if ext == ".csv":
        return "csv"
    return "edgelist"


def load_graph(path, fmt=None):
    """Load a graph, dispatching on ``fmt`` or the file extension.

    CSV input is interpreted as a 0/1 adjacency matrix.
    """
    fmt = _sniff(path, fmt)
    if fmt == "edgelist":
        return read_edgelist(path)
    if fmt == "csv":
        return Graph.from_adjacency(read_matrix_csv(path))
    if fmt == "json":
        out = read_json(path)
        if not isinstance(out, Graph):
            raise InputError(f"{path} holds a matrix, expected a graph")
        return out
    raise InputError(f"unknown graph format {fmt!r}")


def load_matrix(path, fmt=None):
    """Load a symmetric matrix from CSV or JSON."""
    fmt = _sniff(path, fmt)
    if fmt == "csv":
        return read_matrix_csv(path)
    if fmt == "json":
        out = read_json(path)
        if isinstance(out, Graph):
            raise InputError(f"{path} holds a graph, expected a matrix")
        return out
    raise InputError(f"unknown matrix format {fmt!r}")
