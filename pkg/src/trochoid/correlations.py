"""Inducing cyclic correlations of a chosen order in a dense random matrix.

The generator sweeps nodes in index order.  At node v it looks at every
in-edge (b -> v) from earlier nodes, forms the aggregate weight of all
length-k cycles that close through that edge using only earlier nodes, and
flips the edge's sign with probability p whenever the aggregate has the
unwanted sign.  Only signs ever change: |output| == |input| entrywise.

The cycle aggregate for edge (b -> v) is

    w(b) = sum_a M[v, a] * P[a, b] * M[b, v]

where P is the k-2 step path-weight matrix of the leading v x v block,
built by the recursion P_1 = S, P_j = S @ P_(j-1) with the diagonal zeroed
after each product (discarding walks that return to their origin).

Two implementations are provided:

* ``induce_cyclic_correlations(..., variant="reference")`` rebuilds P from
  scratch at every node: transparent, but O(n^4) matmul work for k >= 4.
* ``variant="fast"`` never materializes P.  Because a sweep step only
  modifies column v, the leading block S only ever grows at its border, so
  the diagonals of its powers can be maintained incrementally; row-times-P
  products then unroll into matrix-vector chains.  O(k) matvecs per node.

Both variants consume one independent random stream per edge, so their flip
decisions coincide and outputs match bit-for-bit whenever the aggregate
signs do (ties at |w| ~ 1e-16 are the only way they can diverge).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import DenseMatrix, generate_base_iid
from .errors import InvalidSpecError
from .rng import edge_flip_uniforms, normalize_seed


@dataclass(frozen=True)
class DenseCyclicSpec:
    """Parameters for the dense cyclic-correlation generator."""

    n: int
    k: int
    flip_prob: float
    sign: int = 1

    def __post_init__(self):
        if self.k < 3:
            raise InvalidSpecError(f"correlation order must be >= 3, got {self.k}")
        if self.k >= self.n:
            raise InvalidSpecError(f"order k={self.k} must be below dimension n={self.n}")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise InvalidSpecError(f"flip probability must be in [0, 1], got {self.flip_prob}")
        if self.sign not in (-1, 1):
            raise InvalidSpecError(f"target sign must be +1 or -1, got {self.sign}")


def _apply_flips(m: np.ndarray, v: int, w: np.ndarray, spec: DenseCyclicSpec, seed: int) -> None:
    if spec.flip_prob <= 0.0:
        return
    flips = spec.sign * w < 0
    if spec.flip_prob < 1.0:
        flips &= edge_flip_uniforms(seed, v, v) < spec.flip_prob
    m[:v, v][flips] *= -1.0


def _induce_reference(m: np.ndarray, spec: DenseCyclicSpec, seed: int) -> np.ndarray:
    k = spec.k
    for v in range(k - 1, m.shape[0]):
        s = m[:v, :v]
        p = s.copy()
        for _ in range(k - 3):
            p = s @ p
            np.fill_diagonal(p, 0.0)
        w = (m[v, :v] @ p) * m[:v, v]
        _apply_flips(m, v, w, spec, seed)
    return m


def _power_diagonals(s: np.ndarray, max_power: int) -> list[np.ndarray]:
    """diag(S^m) for m = 2..max_power, computed directly (startup block only)."""
    out = []
    p = s
    for _ in range(2, max_power + 1):
        p = p @ s
        out.append(np.diag(p).copy())
    return out


def _induce_fast(m: np.ndarray, spec: DenseCyclicSpec, seed: int) -> np.ndarray:
    k = spec.k
    n = m.shape[0]
    v0 = k - 1
    # q[m-2] holds diag(S^m), m = 2..k-2, padded out to full length n
    top = k - 2
    q = [np.empty(n) for _ in range(max(top - 1, 0))]
    for i, d in enumerate(_power_diagonals(m[:v0, :v0], top)):
        q[i][:v0] = d

    for v in range(v0, n):
        s = m[:v, :v]
        row = m[v, :v]

        # r[a] = row @ S^a
        r = [row]
        for _ in range(k - 2):
            r.append(r[-1] @ s)

        # delta_j = diag stripped at recursion level j, from power diagonals:
        # delta_j = q_j - sum_{i=2}^{j-1} q_(j-i) * delta_i, with q_1 = diag(S)
        diag_s = np.diagonal(s)
        delta: dict[int, np.ndarray] = {}
        for j in range(2, top + 1):
            acc = q[j - 2][:v].copy()
            for i in range(2, j):
                qprev = diag_s if j - i == 1 else q[j - i - 2][:v]
                acc -= qprev * delta[i]
            delta[j] = acc

        # u = row @ P_(k-2)  unrolled through the recursion
        u = r[k - 2].copy()
        for i in range(2, top + 1):
            u -= r[k - 2 - i] * delta[i]

        w = u * m[:v, v]
        _apply_flips(m, v, w, spec, seed)

        if v + 1 == n:
            break

        # Grow the maintained diagonals for the bordered block
        #   S' = [[S, c], [row, d]]  with c the (possibly flipped) column.
        c = m[:v, v].copy()
        d = m[v, v]
        sc = [c]  # sc[a] = S^a @ c
        for _ in range(max(top - 2, 0)):
            sc.append(s @ sc[-1])
        bl = [row]  # bl[i-1] = bottom row of S'^i restricted to old columns
        tr = [c]  # tr[i-1] = right column of S'^i restricted to old rows
        br = [d]  # br[i-1] = bottom-right scalar of S'^i
        for mm in range(2, top + 1):
            rd = sum((r[mm - 2 - i] @ c) * bl[i - 1] for i in range(1, mm - 1))
            bl_m = r[mm - 1] + (rd if mm > 2 else 0.0) + d * bl[mm - 2]
            br_m = row @ tr[mm - 2] + d * br[mm - 2]
            tr_m = s @ tr[mm - 2] + br[mm - 2] * c
            grow = sum(sc[mm - 1 - i] * bl[i - 1] for i in range(1, mm))
            q[mm - 2][:v] += grow
            q[mm - 2][v] = br_m
            bl.append(bl_m)
            tr.append(tr_m)
            br.append(br_m)
    return m


def induce_cyclic_correlations(
    m: DenseMatrix,
    spec: DenseCyclicSpec,
    seed: int,
    variant: str = "fast",
) -> DenseMatrix:
    """Return a copy of ``m`` with order-k cyclic correlations induced.

    ``variant`` selects the path-weight evaluation strategy ("reference" or
    "fast"); both produce the same flip pattern.
    """
    if m.n != spec.n:
        raise InvalidSpecError(f"matrix dimension {m.n} does not match spec n={spec.n}")
    seed = normalize_seed(seed)
    out = m.entries.copy()
    if variant == "reference":
        _induce_reference(out, spec, seed)
    elif variant == "fast":
        _induce_fast(out, spec, seed)
    else:
        raise InvalidSpecError(f"unknown variant {variant!r}")
    return DenseMatrix(out)


def generate_dense_cyclic(spec: DenseCyclicSpec, seed: int, variant: str = "fast") -> DenseMatrix:
    """Gaussian base matrix with order-k cyclic correlations induced."""
    seed = normalize_seed(seed)
    base = generate_base_iid(spec.n, seed)
    return induce_cyclic_correlations(base, spec, seed, variant=variant)
