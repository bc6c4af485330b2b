"""Eigenvalue computation and quantitative checks against boundary laws."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .boundaries import BoundaryCurve
from .ensembles import DenseMatrix, SparseDigraph
from .errors import EigensolverError, InvalidSpecError
from .geometry import contains, distance_to_polygon, inflate

_DEFAULT_EIG_CAP = 4000


@dataclass
class Spectrum:
    """Eigenvalues of one generated matrix plus provenance metadata."""

    eigenvalues: np.ndarray
    source: dict | None = None

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


@dataclass
class ContainmentReport:
    """How much of a spectrum a (possibly inflated) boundary curve contains."""

    total: int
    inside: int
    outside: int
    excluded_outliers: list[complex] = field(default_factory=list)
    worst_violation: float = 0.0

    @property
    def inside_fraction(self) -> float:
        counted = self.total - len(self.excluded_outliers)
        return self.inside / counted if counted else 1.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "inside": self.inside,
            "outside": self.outside,
            "excluded_outliers": [[z.real, z.imag] for z in self.excluded_outliers],
            "worst_violation": self.worst_violation,
        }


def compute_eigenvalues(
    m: DenseMatrix, source: dict | None = None, max_n: int = _DEFAULT_EIG_CAP
) -> Spectrum:
    """Full nonsymmetric eigendecomposition (LAPACK Hessenberg + shifted QR).

    Validates the trace identity sum(eigenvalues) == trace within 1e-6 * n.
    """
    if m.n > max_n:
        raise InvalidSpecError(f"matrix dimension {m.n} exceeds eigensolver cap {max_n}")
    try:
        ev = np.linalg.eigvals(m.entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigensolver did not converge for n={m.n}: {exc}") from exc
    trace_gap = abs(ev.sum() - np.trace(m.entries))
    if trace_gap > 1e-6 * m.n:
        raise EigensolverError(
            f"trace identity violated: |sum(eig) - trace| = {trace_gap:.3e} for n={m.n}"
        )
    return Spectrum(eigenvalues=ev, source=source)


def phase_certificate(g: SparseDigraph) -> np.ndarray | None:
    """Node phases theta with theta(v) == theta(u) + 1 (mod p) on every edge.

    p is the gcd of the recorded cycle lengths.  When such a potential
    exists, D A D^-1 = exp(2*pi*i/p) A holds exactly for D = diag of phase
    rotations, so the adjacency spectrum is exactly p-fold rotation
    symmetric.  Returns the phase array, or None when p < 2 or no
    consistent assignment exists.
    """
    p = g.cycle_length_gcd()
    if p < 2:
        return None
    neighbors: list[list[tuple[int, int]]] = [[] for _ in range(g.n)]
    for u, v, _ in g.edges:
        neighbors[u].append((v, 1))
        neighbors[v].append((u, -1))
    phase = np.full(g.n, -1, dtype=int)
    for start in range(g.n):
        if phase[start] >= 0:
            continue
        phase[start] = 0
        queue = [start]
        while queue:
            u = queue.pop()
            for v, step in neighbors[u]:
                want = (phase[u] + step) % p
                if phase[v] < 0:
                    phase[v] = want
                    queue.append(v)
                elif phase[v] != want:
                    return None
    return phase


def digraph_spectrum(
    g: SparseDigraph, scale: float = 1.0, source: dict | None = None
) -> Spectrum:
    """Adjacency eigenvalues, exploiting exact phase structure when present.

    With a phase certificate of order p, the permuted adjacency is block
    cyclic and its spectrum consists of the p-th roots of the spectrum of
    the product of the blocks (plus exact zeros when classes are unequal).
    Computing it that way keeps the multiset exactly rotation symmetric,
    which a direct dense solve cannot guarantee: defective zero clusters
    scatter into m-gons at the u^(1/m) scale and drown the symmetry signal.
    Graphs without a certificate fall back to the dense solver.
    """
    phase = phase_certificate(g)
    if phase is None:
        return compute_eigenvalues(adjacency_dense(g, scale), source=source)
    p = g.cycle_length_gcd()
    classes = [np.flatnonzero(phase == j) for j in range(p)]
    if any(len(c) == 0 for c in classes):
        return compute_eigenvalues(adjacency_dense(g, scale), source=source)
    start = int(np.argmin([len(c) for c in classes]))
    index_of = {}
    for j, cls in enumerate(classes):
        index_of.update({int(u): (j, i) for i, u in enumerate(cls)})
    blocks = [
        np.zeros((len(classes[(start + j) % p]), len(classes[(start + j + 1) % p])))
        for j in range(p)
    ]
    for u, v, w in g.edges:
        ju, iu = index_of[u]
        _, iv = index_of[v]
        blocks[(ju - start) % p][iu, iv] += scale * w
    product = blocks[0]
    for b in blocks[1:]:
        product = product @ b
    try:
        mu = np.linalg.eigvals(product)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"block eigensolver did not converge: {exc}") from exc
    roots = mu.astype(complex) ** (1.0 / p)
    rotations = np.exp(2j * np.pi * np.arange(p) / p)
    ev = (roots[:, None] * rotations[None, :]).ravel()
    ev = np.concatenate([ev, np.zeros(g.n - ev.size, dtype=complex)])
    trace_gap = abs(ev.sum())  # phase structure forbids self-loops, so trace is 0
    if trace_gap > 1e-6 * g.n:
        raise EigensolverError(f"trace identity violated in block solve: {trace_gap:.3e}")
    return Spectrum(eigenvalues=ev, source=source)


def adjacency_dense(g: SparseDigraph, scale: float) -> DenseMatrix:
    from .ensembles import adjacency_matrix

    return adjacency_matrix(g, scale)


def detect_deterministic_outliers(
    s: Spectrum, g: SparseDigraph | None, scale: float = 1.0
) -> list[complex]:
    """Eigenvalues forced by constant row sums.

    A digraph whose rows all sum to r has the all-ones right eigenvector with
    eigenvalue r; when every recorded cycle length shares a divisor p, the
    spectrum is p-fold rotation symmetric, replicating that eigenvalue at
    r * exp(2*pi*i*j/p).  Returns the matched eigenvalues (within 1e-6), or
    an empty list when row sums are not constant or there is no digraph.
    """
    if g is None:
        return []
    sums = g.row_sums()
    if sums.size == 0 or np.ptp(sums) > 1e-9 * max(1.0, np.abs(sums).max()):
        return []
    r = scale * sums[0]
    p = max(g.cycle_length_gcd(), 1)
    found: list[complex] = []
    taken: set[int] = set()
    for j in range(p):
        target = r * np.exp(2j * np.pi * j / p)
        dist = np.abs(s.eigenvalues - target)
        for idx in np.argsort(dist):
            if idx not in taken:
                break
        if dist[idx] < 1e-6:
            taken.add(int(idx))
            found.append(complex(s.eigenvalues[idx]))
    return found


def containment(
    s: Spectrum,
    curve: BoundaryCurve,
    inflation: float = 0.0,
    exclusions: list[complex] | None = None,
) -> ContainmentReport:
    """Count eigenvalues inside the curve scaled by (1 + inflation).

    Membership uses the nonzero winding rule, so curves that self-intersect
    past their cusp threshold still define a region.  ``exclusions`` are
    removed from the census before counting; ``worst_violation`` is the
    largest distance from an outside point to the inflated curve, in units
    of the curve's mean radius.
    """
    if s.n == 0:
        raise InvalidSpecError("cannot test an empty spectrum")
    if inflation < 0:
        raise InvalidSpecError(f"inflation must be >= 0, got {inflation}")
    ev = list(s.eigenvalues)
    excluded: list[complex] = []
    for target in exclusions or []:
        dist = [abs(e - target) for e in ev]
        idx = int(np.argmin(dist))
        if dist[idx] < 1e-6:
            excluded.append(complex(ev.pop(idx)))
    points = np.array(ev, dtype=complex)
    poly = inflate(curve.polygon(), inflation)
    if points.size:
        mask = contains(points, poly)
        inside = int(mask.sum())
        outside_pts = points[~mask]
    else:
        inside, outside_pts = 0, points
    worst = 0.0
    if outside_pts.size:
        worst = float(distance_to_polygon(outside_pts, poly).max() / curve.mean_radius())
    return ContainmentReport(
        total=s.n,
        inside=inside,
        outside=len(ev) - inside,
        excluded_outliers=excluded,
        worst_violation=worst,
    )


def rotation_symmetry_residual(s: Spectrum, k: int, max_n: int = 2000) -> float:
    """Assignment distance between the spectrum and its rotation by 2*pi/k.

    Minimal-cost bipartite matching between {lambda} and {exp(2*pi*i/k) *
    lambda}, total cost normalized by the eigenvalue count.  Zero (to solver
    noise) exactly when the multiset is rotation invariant.
    """
    if k < 2:
        raise InvalidSpecError(f"rotation order must be >= 2, got {k}")
    if s.n > max_n:
        raise InvalidSpecError(f"assignment cost grows as n^3; refusing n={s.n} > {max_n}")
    ev = s.eigenvalues
    rotated = ev * np.exp(2j * np.pi / k)
    cost = np.abs(ev[:, None] - rotated[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / s.n)


def conjugation_pairing_residual(s: Spectrum, max_n: int = 2000) -> float:
    """How far the spectrum is from being closed under complex conjugation.

    Assignment matching, like the rotation residual; a simple lexicographic
    sort would misalign eigenvalues whose real parts tie at rounding level.
    """
    if s.n > max_n:
        raise InvalidSpecError(f"assignment cost grows as n^3; refusing n={s.n} > {max_n}")
    cost = np.abs(s.eigenvalues[:, None] - np.conj(s.eigenvalues)[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
