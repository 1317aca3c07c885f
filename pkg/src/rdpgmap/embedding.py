"""Spectral embeddings: the classical adjacency baseline and the inferred-P
variant.

Both take the d algebraically largest eigenpairs, clamp negative eigenvalues
to zero, and scale eigenvectors by square roots of eigenvalues, so the
embedding Gram matrix is always PSD with rank at most d. Embeddings are
unique only up to orthogonal transformation; comparisons should use
rotation-invariant statistics (Gram matrices, pairwise distances, cluster
indices), never raw coordinates.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .symmat import require_symmetric
from .symmat import eigh as _eigh

__all__ = ["Embedding", "ase", "embed_from_p"]


@dataclass(frozen=True, eq=False)
class Embedding:
    """Node coordinates from a truncated eigendecomposition.

    Columns of ``x`` are ordered by descending eigenvalue. ``source`` is
    ``"ase"`` when built from an adjacency matrix and ``"inferred-p"`` when
    built from an inferred probability matrix.
    """

    x: np.ndarray
    k: int
    source: str

    def gram(self):
        """Rank-<= k PSD matrix the embedding represents."""
        return self.x @ self.x.T


def _top_embedding(m, d, source, name):
    m = require_symmetric(m, name=name)
    n = m.shape[0]
    if not 1 <= d <= n:
        raise InputError(f"embedding dimension must be in [1, {n}], got {d}")
    w, v = _eigh(m)
    top = np.clip(w[::-1][:d], 0.0, None)
    x = v[:, ::-1][:, :d] * np.sqrt(top)
    return Embedding(x=x, k=int(d), source=source)


def ase(m, d):
    """Adjacency spectral embedding: top-d scaled eigenvectors of m.

    Negative eigenvalues among the top d are clamped to zero, which keeps
    the Gram matrix PSD; adjacency matrices routinely have them.
    """
    return _top_embedding(m, d, "ase", "matrix")


def embed_from_p(p, k):
    """Embedding of an inferred probability matrix into k dimensions.

    Same construction as ``ase``; separated so downstream code can tell
    baseline embeddings from inferred ones by the ``source`` field.
    """
    return _top_embedding(p, k, "inferred-p", "probability matrix")
