"""Graphs, latent-position models, and synthetic generators.

A :class:`Graph` is a simple undirected graph on nodes ``0..n-1`` stored as
a canonical edge set. Generators produce either edge-probability matrices
directly (stochastic block model) or latent positions whose Gram matrix is
the probability matrix (spherical caps, balls). Sampling is seeded and
deterministic.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InputError, ModelViolationError
from .symmat import require_symmetric, symmetrize

__all__ = [
    "Graph",
    "prob_from_latent",
    "sample_rdpg",
    "gen_sbm",
    "SphereCapsConfig",
    "gen_sphere_caps",
    "BallsConfig",
    "gen_balls",
    "karate",
    "DEFAULT_BLOCK_MATRIX",
    "DEFAULT_BLOCK_SIZES",
]

# entries may stray this far outside [0, 1] before a latent model is rejected
_PROB_EPS = 1e-12


class Graph:
    """Simple undirected graph with a fixed node count.

    Parameters
    ----------
    n : int
        Number of nodes, at least 1. Isolated nodes are allowed, so ``n``
        is stored explicitly rather than inferred from the edges.
    edges : iterable of (int, int)
        Unordered node pairs. Duplicates collapse; self loops are invalid.
    """

    def __init__(self, n, edges=()):
        n = int(n)
        if n < 1:
            raise InputError(f"graph needs at least one node, got n={n}")
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                raise InputError(f"self loop at node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InputError(f"edge ({i}, {j}) out of range for n={n}")
            canon.add((min(i, j), max(i, j)))
        self.n = n
        self.edges = tuple(sorted(canon))
        self._adjacency = None

    @classmethod
    def from_adjacency(cls, a):
        """Build from a symmetric 0/1 (or boolean) adjacency matrix."""
        a = np.asarray(a)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"adjacency must be square, got shape {a.shape}")
        if a.dtype != bool:
            vals = np.unique(a)
            if not np.all(np.isin(vals, (0, 1))):
                raise InputError("adjacency entries must be 0 or 1")
            a = a.astype(bool)
        if np.any(np.diag(a)):
            raise InputError("adjacency has a nonzero diagonal (self loop)")
        if np.any(a != a.T):
            raise InputError("adjacency is not symmetric")
        i, j = np.nonzero(np.triu(a, 1))
        return cls(a.shape[0], zip(i.tolist(), j.tolist()))

    @property
    def m(self):
        """Number of edges."""
        return len(self.edges)

    def adjacency(self):
        """Boolean adjacency matrix (cached)."""
        if self._adjacency is None:
            a = np.zeros((self.n, self.n), dtype=bool)
            for i, j in self.edges:
                a[i, j] = a[j, i] = True
            self._adjacency = a
        return self._adjacency

    def degrees(self):
        return self.adjacency().sum(axis=1)

    def __eq__(self, other):
        return (
            isinstance(other, Graph) and self.n == other.n and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def prob_from_latent(x):
    """Gram matrix of latent positions, validated as an edge-probability matrix.

    Parameters
    ----------
    x : array_like, shape (n, d)
        One latent position per row.

    Returns
    -------
    ndarray, shape (n, n)
        ``x @ x.T``, exactly symmetric. The diagonal holds squared norms and
        is not required to lie in [0, 1]; off-diagonal entries are.

    Raises
    ------
    ModelViolationError
        If any off-diagonal entry falls outside [0, 1]. The error lists the
        offending pairs.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise InputError(f"latent positions must be a 2-d array, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("latent positions contain non-finite entries")
    p = symmetrize(x @ x.T)
    n = p.shape[0]
    off = ~np.eye(n, dtype=bool)
    bad = off & ((p < -_PROB_EPS) | (p > 1.0 + _PROB_EPS))
    if np.any(bad):
        pairs = [(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(bad, 1)))]
        raise ModelViolationError(
            f"{len(pairs)} latent dot products outside [0, 1], first {pairs[:5]}",
            pairs,
        )
    p = np.clip(p, 0.0, None)
    p[off & (p > 1.0)] = 1.0
    return p


def _require_prob_matrix(p, name="probability matrix"):
    p = require_symmetric(p, name=name)
    off = ~np.eye(p.shape[0], dtype=bool)
    if np.any(p[off] < -_PROB_EPS) or np.any(p[off] > 1.0 + _PROB_EPS):
        raise InputError(f"{name} has off-diagonal entries outside [0, 1]")
    return p


def sample_rdpg(p, seed):
    """Sample a graph with independent edges ``A_ij ~ Bernoulli(p_ij)``.

    The diagonal of ``p`` is ignored. Sampling is deterministic in
    ``(p, seed)``.
    """
    p = _require_prob_matrix(p)
    n = p.shape[0]
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(n, 1)
    hits = rng.random(iu[0].size) < p[iu]
    edges = zip(iu[0][hits].tolist(), iu[1][hits].tolist())
    return Graph(n, edges)


DEFAULT_BLOCK_MATRIX = np.array(
    [
        [0.25, 0.05, 0.02],
        [0.05, 0.35, 0.07],
        [0.02, 0.07, 0.40],
    ]
)
DEFAULT_BLOCK_SIZES = (15, 10, 25)


def gen_sbm(sizes=DEFAULT_BLOCK_SIZES, block_matrix=None):
    """Stochastic block model probability matrix.

    Parameters
    ----------
    sizes : sequence of int
        Nodes per block, all positive.
    block_matrix : array_like, shape (k, k), optional
        Symmetric positive semidefinite matrix of within/between block
        probabilities. Defaults to a three-block matrix with assortative
        structure.

    Returns
    -------
    p : ndarray, shape (n, n)
        ``p[i, j] = block_matrix[b(i), b(j)]`` including the diagonal, so the
        matrix is positive semidefinite with rank equal to the block matrix's.
    labels : ndarray, shape (n,)
        Block index of each node.
    """
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) == 0 or any(s < 1 for s in sizes):
        raise ConfigError(f"block sizes must be positive, got {sizes}")
    b = DEFAULT_BLOCK_MATRIX if block_matrix is None else block_matrix
    b = require_symmetric(b, name="block matrix")
    if len(sizes) != b.shape[0]:
        raise ConfigError(
            f"{len(sizes)} block sizes but block matrix is {b.shape[0]} x {b.shape[0]}"
        )
    if np.any(b < 0.0) or np.any(b > 1.0):
        raise ConfigError("block matrix entries must lie in [0, 1]")
    eigs = np.linalg.eigvalsh(b)
    if eigs[0] < -1e-10 * max(1.0, abs(eigs[-1])):
        raise ConfigError(
            f"block matrix must be positive semidefinite, min eigenvalue {eigs[0]:.3e}"
        )
    labels = np.repeat(np.arange(len(sizes)), sizes)
    p = symmetrize(b[np.ix_(labels, labels)])
    return p, labels


def _split_sizes(n, k, sizes):
    if sizes is None:
        base = n // k
        out = [base + (1 if i < n % k else 0) for i in range(k)]
    else:
        out = [int(s) for s in sizes]
        if len(out) != k:
            raise ConfigError(f"{len(out)} sizes given for {k} groups")
        if sum(out) != n:
            raise ConfigError(f"sizes {out} do not sum to n={n}")
    if any(s < 1 for s in out):
        raise ConfigError(f"every group needs at least one point, got {out}")
    return out


def _unit(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ConfigError(f"{name} must be a 3-vector, got shape {v.shape}")
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ConfigError(f"{name} has zero norm")
    return v / norm


def _rotation_from_z(center):
    """Rotation matrix taking the north pole (0, 0, 1) to ``center``."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, center))
    if c > 1.0 - 1e-14:
        return np.eye(3)
    if c < -1.0 + 1e-14:
        return np.diag([1.0, -1.0, -1.0])
    axis = np.cross(z, center)
    axis /= np.linalg.norm(axis)
    angle = np.arccos(np.clip(c, -1.0, 1.0))
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


@dataclass(frozen=True)
class SphereCapsConfig:
    """Latent positions drawn uniformly from spherical caps on the unit sphere.

    Each cap is ``(center, angular_radius)`` with the center a unit 3-vector.
    Every cap must sit inside the nonnegative orthant so all pairwise dot
    products are valid probabilities.
    """

    n: int
    # default centers lean toward distinct axes but keep enough distance
    # from the orthant walls that a 0.25-radius cap never crosses them
    caps: tuple = (
        ((0.9316, 0.2571, 0.2571), 0.25),
        ((0.2571, 0.2571, 0.9316), 0.25),
    )
    sizes: tuple = None
    seed: int = 0


def gen_sphere_caps(config):
    """Sample latent positions from uniform spherical caps.

    Returns
    -------
    x : ndarray, shape (n, 3)
        Unit-norm latent positions.
    labels : ndarray, shape (n,)
        Cap index of each point.
    """
    if config.n < 1:
        raise ConfigError(f"need n >= 1, got {config.n}")
    if len(config.caps) < 1:
        raise ConfigError("need at least one cap")
    centers, radii = [], []
    for idx, (center, radius) in enumerate(config.caps):
        center = _unit(center, f"cap {idx} center")
        radius = float(radius)
        if not 0.0 < radius < np.pi / 2:
            raise ConfigError(f"cap {idx} radius must be in (0, pi/2), got {radius}")
        # cap inside the nonnegative orthant: along each axis the farthest
        # point of the cap must still have a nonnegative coordinate
        for k in range(3):
            if np.arccos(np.clip(center[k], -1.0, 1.0)) + radius > np.pi / 2 + 1e-9:
                raise ConfigError(
                    f"cap {idx} leaves the nonnegative orthant along axis {k}"
                )
        centers.append(center)
        radii.append(radius)
    sizes = _split_sizes(config.n, len(config.caps), config.sizes)
    rng = np.random.default_rng(config.seed)
    xs, labels = [], []
    for idx, (center, radius, size) in enumerate(zip(centers, radii, sizes)):
        # uniform on the cap: height uniform in [cos r, 1], azimuth uniform
        z = rng.uniform(np.cos(radius), 1.0, size=size)
        phi = rng.uniform(0.0, 2.0 * np.pi, size=size)
        s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        local = np.column_stack((s * np.cos(phi), s * np.sin(phi), z))
        pts = local @ _rotation_from_z(center).T
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        xs.append(pts / norms)
        labels.extend([idx] * size)
    x = np.vstack(xs)
    prob_from_latent(x)  # raises if any dot product strays outside [0, 1]
    return x, np.asarray(labels)


@dataclass(frozen=True)
class BallsConfig:
    """Latent positions drawn uniformly from solid balls.

    Each ball is ``(center, radius)`` and must lie inside the nonnegative
    part of the unit ball, which keeps all dot products in [0, 1].
    """

    n: int
    balls: tuple = (
        ((0.55, 0.25, 0.25), 0.2),
        ((0.25, 0.55, 0.25), 0.2),
    )
    sizes: tuple = None
    seed: int = 0


def gen_balls(config):
    """Sample latent positions uniformly from solid balls.

    Returns
    -------
    x : ndarray, shape (n, 3)
    labels : ndarray, shape (n,)
    """
    if config.n < 1:
        raise ConfigError(f"need n >= 1, got {config.n}")
    if len(config.balls) < 1:
        raise ConfigError("need at least one ball")
    centers, radii = [], []
    for idx, (center, radius) in enumerate(config.balls):
        center = np.asarray(center, dtype=float)
        if center.shape != (3,):
            raise ConfigError(f"ball {idx} center must be a 3-vector")
        radius = float(radius)
        if radius <= 0.0:
            raise ConfigError(f"ball {idx} radius must be positive, got {radius}")
        if np.linalg.norm(center) + radius > 1.0 + 1e-12:
            raise ConfigError(f"ball {idx} pokes out of the unit ball")
        if np.min(center) - radius < -1e-12:
            raise ConfigError(f"ball {idx} leaves the nonnegative orthant")
        centers.append(center)
        radii.append(radius)
    sizes = _split_sizes(config.n, len(config.balls), config.sizes)
    rng = np.random.default_rng(config.seed)
    xs, labels = [], []
    for idx, (center, radius, size) in enumerate(zip(centers, radii, sizes)):
        direction = rng.normal(size=(size, 3))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        # radius ~ R * u^(1/3) makes the density uniform over the ball
        rad = radius * rng.random(size) ** (1.0 / 3.0)
        xs.append(center + direction * rad[:, None])
        labels.extend([idx] * size)
    x = np.vstack(xs)
    prob_from_latent(x)
    return x, np.asarray(labels)


# Zachary's karate club: 34 members, 78 ties, split into the instructor's
# faction (label 0, node 0) and the president's (label 1, node 33).
_KARATE_EDGES = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8),
    (0, 10), (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31),
    (1, 2), (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30),
    (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32),
    (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33),
    (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32),
    (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27),
    (24, 31), (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32),
    (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
)

_KARATE_LABELS = (
    0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0,
    0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
)


def karate():
    """Bundled karate-club graph.

    Returns
    -------
    graph : Graph
        34 nodes, 78 edges.
    labels : ndarray, shape (34,)
        Faction of each member (0 or 1).
    """
    return Graph(34, _KARATE_EDGES), np.asarray(_KARATE_LABELS)
