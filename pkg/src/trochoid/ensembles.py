"""Core ensemble containers and dense-matrix generation.

Conventions: matrices are real n x n with row-major semantics; for a digraph
adjacency, entry (u, v) is the total weight of edges u -> v.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpecError
from .rng import TAG_IID, VectorStreams, normalize_seed


@dataclass
class DenseMatrix:
    """A square real matrix whose spectrum is under study."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidSpecError(f"matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidSpecError("matrix entries must be finite")
        self.entries = a

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def copy(self) -> DenseMatrix:
        return DenseMatrix(self.entries.copy())


@dataclass
class SparseDigraph:
    """Weighted directed edge list plus the cycles that produced it.

    ``edges`` holds (source, target, weight) with weights already accumulated
    per ordered pair; ``cycles`` records each generated cycle as a tuple of
    distinct node ids, in traversal order, with its edge weight in
    ``cycle_weights``.
    """

    n: int
    edges: list[tuple[int, int, float]]
    cycles: list[tuple[int, ...]] = field(default_factory=list)
    cycle_weights: list[float] = field(default_factory=list)

    def __post_init__(self):
        for u, v, w in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidSpecError(f"edge ({u}, {v}) out of node range [0, {self.n})")
            if w == 0:
                raise InvalidSpecError(f"edge ({u}, {v}) has zero weight")
        for cyc in self.cycles:
            if len(set(cyc)) != len(cyc):
                raise InvalidSpecError(f"cycle {cyc} repeats a node")
        if not self.cycle_weights:
            self.cycle_weights = [1.0] * len(self.cycles)
        if len(self.cycle_weights) != len(self.cycles):
            raise InvalidSpecError("cycle_weights must match cycles one-to-one")

    def row_sums(self) -> np.ndarray:
        out = np.zeros(self.n)
        for u, _, w in self.edges:
            out[u] += w
        return out

    def cycle_length_gcd(self) -> int:
        """Greatest common divisor of all recorded cycle lengths (0 if none)."""
        g = 0
        for cyc in self.cycles:
            g = int(np.gcd(g, len(cyc)))
        return g


def generate_base_iid(n: int, seed: int) -> DenseMatrix:
    """Gaussian i.i.d. matrix with mean 0 and variance 1/n.

    Row i is produced by its own derived stream, so the output is identical
    regardless of how generation is scheduled.
    """
    if n < 1:
        raise InvalidSpecError(f"dimension must be >= 1, got {n}")
    seed = normalize_seed(seed)
    streams = VectorStreams.for_indices(seed, TAG_IID, np.arange(n))
    m = np.empty((n, n))
    col = 0
    while col < n:
        z0, z1 = streams.normal_pair()
        m[:, col] = z0
        if col + 1 < n:
            m[:, col + 1] = z1
        col += 2
    m *= 1.0 / np.sqrt(n)
    return DenseMatrix(m)


def combine_correlated(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Superpose two unit-scaled ensembles, restoring total variance to 1/n."""
    if a.n != b.n:
        raise InvalidSpecError(f"dimension mismatch: {a.n} vs {b.n}")
    return DenseMatrix((a.entries + b.entries) / np.sqrt(2.0))


def adjacency_matrix(g: SparseDigraph, scale: float = 1.0) -> DenseMatrix:
    """Dense adjacency of a digraph: M[u, v] = scale * total weight of u -> v."""
    if scale == 0:
        raise InvalidSpecError("scale must be nonzero")
    m = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        m[u, v] += scale * w
    return DenseMatrix(m)
