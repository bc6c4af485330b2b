"""Sparse digraphs assembled from directed cycles.

Three ensembles: every node in exactly d cycles of length k (regular), nodes
assigned to cycles at random with a target mean membership (poisson), and a
two-species mixture of cycle lengths (mixed).

Construction is a configuration-model slot shuffle: d copies of every node id
are shuffled and chopped into k-tuples, each tuple becoming one directed
cycle; tuples with repeated nodes are repaired by local swaps.

When the gcd g of all cycle lengths divides n, slots are stratified by node
phase class (node i belongs to class i mod g) and each cycle steps through
the classes in order.  Every edge then advances the phase by exactly one, so
the adjacency spectrum is invariant under rotation by exp(2*pi*i/g) as an
exact matrix identity, not just statistically.  Phase classes are equally
sized, so per-node membership counts and degree distributions are unchanged.
When g does not divide n the plain unstratified shuffle is used and the
rotation symmetry holds only statistically.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np

from .ensembles import SparseDigraph
from .errors import GenerationError, InvalidSpecError
from .rng import TAG_GRAPH, Stream, normalize_seed


@dataclass(frozen=True)
class RegularCyclicSpec:
    """Each node in exactly ``d`` cycles of length ``k``, edge weight ``weight``."""

    n: int
    d: int
    k: int
    weight: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise InvalidSpecError(f"cycles per node must be >= 1, got {self.d}")
        if self.k < 2:
            raise InvalidSpecError(f"cycle length must be >= 2, got {self.k}")
        if self.k > self.n:
            raise InvalidSpecError(f"cycle length {self.k} exceeds node count {self.n}")
        if (self.d * self.n) % self.k != 0:
            raise InvalidSpecError(
                f"d*n = {self.d * self.n} must be divisible by k = {self.k}"
            )
        if self.weight == 0:
            raise InvalidSpecError("edge weight must be nonzero")

    @property
    def cycle_count(self) -> int:
        return self.d * self.n // self.k


@dataclass(frozen=True)
class PoissonCyclicSpec:
    """Cycles of length ``k`` with nodes assigned at random, mean membership ``mean_degree``.

    ``stratified`` keeps the node phases aligned so the spectrum is exactly
    k-fold rotation symmetric (the default).  Stratification concentrates
    the allowed edge pairs, which inflates short cross-cycle walk counts by
    a finite-size factor ~ k * d^2 / n; set it to False for the plain
    uniform assignment when unbiased small-n trace moments matter more than
    exact symmetry.
    """

    n: int
    mean_degree: float
    k: int
    weight: float = 1.0
    stratified: bool = True

    def __post_init__(self):
        if self.mean_degree <= 0:
            raise InvalidSpecError(f"mean degree must be positive, got {self.mean_degree}")
        if self.k < 2:
            raise InvalidSpecError(f"cycle length must be >= 2, got {self.k}")
        if self.k > self.n:
            raise InvalidSpecError(f"cycle length {self.k} exceeds node count {self.n}")
        if self.cycle_count < 1:
            raise InvalidSpecError("parameters round to zero cycles")

    @property
    def cycle_count(self) -> int:
        return int(round(self.mean_degree * self.n / self.k))


@dataclass(frozen=True)
class CycleSpecies:
    """One species of a mixed ensemble: ``d`` cycles of length ``k`` per node."""

    d: int
    k: int
    weight: float = 1.0

    def __post_init__(self):
        if self.d < 0:
            raise InvalidSpecError(f"cycles per node must be >= 0, got {self.d}")
        if self.k < 2:
            raise InvalidSpecError(f"cycle length must be >= 2, got {self.k}")
        if self.weight == 0:
            raise InvalidSpecError("edge weight must be nonzero")


@dataclass(frozen=True)
class MixedCyclicSpec:
    """Exactly two cycle species sharing the same node set."""

    n: int
    species: tuple[CycleSpecies, CycleSpecies]

    def __post_init__(self):
        if len(self.species) != 2:
            raise InvalidSpecError("mixed ensemble takes exactly two species")
        s1, s2 = self.species
        if s1.k == s2.k:
            raise InvalidSpecError("species must have distinct cycle lengths")
        for s in self.species:
            if s.d > 0 and (s.d * self.n) % s.k != 0:
                raise InvalidSpecError(
                    f"d*n = {s.d * self.n} must be divisible by k = {s.k}"
                )
            if s.k > self.n:
                raise InvalidSpecError(f"cycle length {s.k} exceeds node count {self.n}")


_MAX_SWAPS_PER_NODE = 100


def _repair_tuples(tuples: list[list[int]], stream: Stream, budget: int) -> None:
    """Swap entries between tuples until no tuple repeats a node."""
    bad = [i for i, t in enumerate(tuples) if len(set(t)) != len(t)]
    attempts = 0
    while bad:
        i = bad.pop()
        t = tuples[i]
        while len(set(t)) != len(t):
            if attempts >= budget:
                raise GenerationError(
                    f"could not remove repeated nodes within {budget} swap attempts"
                )
            attempts += 1
            seen: set[int] = set()
            dup_pos = 0
            for pos, node in enumerate(t):
                if node in seen:
                    dup_pos = pos
                    break
                seen.add(node)
            j = stream.below(len(tuples))
            pos_j = stream.below(len(tuples[j]))
            other = tuples[j]
            if i == j or other[pos_j] in t or t[dup_pos] in other:
                continue
            t[dup_pos], other[pos_j] = other[pos_j], t[dup_pos]
            if len(set(other)) != len(other):
                bad.append(j)


def _stratification(n: int, lengths: list[int]) -> int:
    """Largest phase count g with g | n and g | every cycle length (1 = none)."""
    g = 0
    for k in lengths:
        g = gcd(g, k)
    return gcd(g, n)


def _chop_regular(
    n: int, d: int, k: int, g: int, stream: Stream, budget: int
) -> list[list[int]]:
    """Slot-shuffle d*n node slots into d*n/k cycle tuples, phase-stratified when g > 1."""
    c = d * n // k
    if g > 1:
        # class j supplies positions p with p % g == j; one pool per class,
        # holding d slots per class member (d * n/g slots = c * k/g needed)
        pools = []
        for j in range(g):
            pool = [int(x) for x in np.repeat(np.arange(j, n, g), d)]
            stream.shuffle(pool)
            pools.append(pool)
        tuples = [[pools[p % g][ci * (k // g) + p // g] for p in range(k)] for ci in range(c)]
        if k > g:
            _repair_stratified(tuples, g, stream, budget)
        return tuples
    pool = list(np.repeat(np.arange(n), d))
    stream.shuffle(pool)
    tuples = [pool[ci * k : (ci + 1) * k] for ci in range(c)]
    _repair_tuples(tuples, stream, budget)
    return tuples


def _repair_stratified(tuples: list[list[int]], g: int, stream: Stream, budget: int) -> None:
    """Swap repair that only exchanges same-phase positions across tuples."""
    bad = [i for i, t in enumerate(tuples) if len(set(t)) != len(t)]
    attempts = 0
    while bad:
        i = bad.pop()
        t = tuples[i]
        while len(set(t)) != len(t):
            if attempts >= budget:
                raise GenerationError(
                    f"could not remove repeated nodes within {budget} swap attempts"
                )
            attempts += 1
            seen: set[int] = set()
            dup_pos = 0
            for pos, node in enumerate(t):
                if node in seen:
                    dup_pos = pos
                    break
                seen.add(node)
            j = stream.below(len(tuples))
            positions = list(range(dup_pos % g, len(tuples[j]), g))
            pos_j = positions[stream.below(len(positions))]
            other = tuples[j]
            if i == j or other[pos_j] in t or t[dup_pos] in other:
                continue
            t[dup_pos], other[pos_j] = other[pos_j], t[dup_pos]
            if len(set(other)) != len(other):
                bad.append(j)


def _accumulate_edges(
    cycles: list[tuple[int, ...]], weights: list[float], n: int
) -> list[tuple[int, int, float]]:
    acc: dict[tuple[int, int], float] = {}
    for cyc, w in zip(cycles, weights):
        k = len(cyc)
        for a in range(k):
            key = (cyc[a], cyc[(a + 1) % k])
            acc[key] = acc.get(key, 0.0) + w
    return [(u, v, w) for (u, v), w in acc.items() if w != 0.0]


def generate_regular_cyclic(spec: RegularCyclicSpec, seed: int) -> SparseDigraph:
    """Digraph in which every node belongs to exactly ``d`` k-cycles."""
    seed = normalize_seed(seed)
    stream = Stream.derived(seed, TAG_GRAPH, 1)
    g = _stratification(spec.n, [spec.k])
    tuples = _chop_regular(
        spec.n, spec.d, spec.k, g, stream, _MAX_SWAPS_PER_NODE * spec.n
    )
    cycles = [tuple(int(x) for x in t) for t in tuples]
    weights = [spec.weight] * len(cycles)
    edges = _accumulate_edges(cycles, weights, spec.n)
    return SparseDigraph(spec.n, edges, cycles, weights)


def generate_poisson_cyclic(spec: PoissonCyclicSpec, seed: int) -> SparseDigraph:
    """Digraph whose cycle memberships per node are asymptotically Poisson.

    Unlike the regular ensemble, phase stratification here never needs the
    class sizes to match exactly, so it is applied for every k > 1.
    """
    seed = normalize_seed(seed)
    stream = Stream.derived(seed, TAG_GRAPH, 2)
    c = spec.cycle_count
    cycles: list[tuple[int, ...]] = []
    if spec.stratified:
        classes = [list(range(j, spec.n, spec.k)) for j in range(spec.k)]
        for _ in range(c):
            cycles.append(tuple(cls[stream.below(len(cls))] for cls in classes))
    else:
        for _ in range(c):
            cycles.append(tuple(stream.sample_distinct(spec.n, spec.k)))
    weights = [spec.weight] * c
    edges = _accumulate_edges(cycles, weights, spec.n)
    return SparseDigraph(spec.n, edges, cycles, weights)


def generate_mixed_cyclic(spec: MixedCyclicSpec, seed: int) -> SparseDigraph:
    """Digraph carrying two cycle species; a species with d = 0 is omitted."""
    seed = normalize_seed(seed)
    active = [s for s in spec.species if s.d > 0]
    if not active:
        raise InvalidSpecError("at least one species must have d >= 1")
    g = _stratification(spec.n, [s.k for s in active])
    cycles: list[tuple[int, ...]] = []
    weights: list[float] = []
    for idx, s in enumerate(active):
        stream = Stream.derived(seed, TAG_GRAPH, 3, idx)
        tuples = _chop_regular(spec.n, s.d, s.k, g, stream, _MAX_SWAPS_PER_NODE * spec.n)
        cycles.extend(tuple(int(x) for x in t) for t in tuples)
        weights.extend([s.weight] * len(tuples))
    edges = _accumulate_edges(cycles, weights, spec.n)
    return SparseDigraph(spec.n, edges, cycles, weights)
