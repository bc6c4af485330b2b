import numpy as np
import pytest

from trochoid.correlations import (
    DenseCyclicSpec,
    generate_dense_cyclic,
    induce_cyclic_correlations,
)
from trochoid.ensembles import DenseMatrix, generate_base_iid
from trochoid.errors import InvalidSpecError
from trochoid.moments import trace_power_moment


def test_spec_validation():
    with pytest.raises(InvalidSpecError):
        DenseCyclicSpec(n=10, k=2, flip_prob=0.5)  # order below 3
    with pytest.raises(InvalidSpecError):
        DenseCyclicSpec(n=5, k=5, flip_prob=0.5)  # order not below dimension
    with pytest.raises(InvalidSpecError):
        DenseCyclicSpec(n=10, k=3, flip_prob=1.5)
    with pytest.raises(InvalidSpecError):
        DenseCyclicSpec(n=10, k=3, flip_prob=0.5, sign=2)


def test_zero_flip_probability_is_identity():
    m = generate_base_iid(60, seed=5)
    out = induce_cyclic_correlations(m, DenseCyclicSpec(n=60, k=4, flip_prob=0.0), seed=9)
    np.testing.assert_array_equal(out.entries, m.entries)


def test_only_signs_change():
    m = generate_base_iid(80, seed=2)
    out = induce_cyclic_correlations(m, DenseCyclicSpec(n=80, k=3, flip_prob=0.8), seed=3)
    np.testing.assert_array_equal(np.abs(out.entries), np.abs(m.entries))
    assert not np.array_equal(out.entries, m.entries)


def test_determinism():
    spec = DenseCyclicSpec(n=70, k=4, flip_prob=0.5)
    a = generate_dense_cyclic(spec, seed=11)
    b = generate_dense_cyclic(spec, seed=11)
    np.testing.assert_array_equal(a.entries, b.entries)


def test_induced_third_moment_positive():
    m = generate_dense_cyclic(DenseCyclicSpec(n=500, k=3, flip_prob=1.0, sign=1), seed=3)
    assert trace_power_moment(m, 3) > 0


def test_negative_sign_target():
    m = generate_dense_cyclic(DenseCyclicSpec(n=500, k=3, flip_prob=1.0, sign=-1), seed=3)
    assert trace_power_moment(m, 3) < 0


def test_uncorrelated_third_moment_small():
    m = generate_dense_cyclic(DenseCyclicSpec(n=200, k=3, flip_prob=0.0), seed=8)
    assert abs(trace_power_moment(m, 3)) < 5 / np.sqrt(200)


def test_fourth_order_flips_raise_fourth_moment():
    raised, baseline = [], []
    for seed in range(10):
        spec1 = DenseCyclicSpec(n=500, k=4, flip_prob=1.0)
        spec0 = DenseCyclicSpec(n=500, k=4, flip_prob=0.0)
        raised.append(trace_power_moment(generate_dense_cyclic(spec1, seed), 4))
        baseline.append(trace_power_moment(generate_dense_cyclic(spec0, seed), 4))
    gap = np.mean(raised) - np.mean(baseline)
    stderr = np.sqrt(
        np.var(raised, ddof=1) / len(raised) + np.var(baseline, ddof=1) / len(baseline)
    )
    assert gap > 3 * stderr


def _oracle_sweep(base: np.ndarray, k: int) -> np.ndarray:
    """Literal step-by-step walk-through of the flip procedure (p = 1).

    Pure-python loops throughout: path weights by explicit recursion on the
    leading block, cycle weight of each in-edge by explicit summation.
    """
    m = base.copy()
    n = m.shape[0]
    for v in range(k - 1, n):
        sub = [[m[i, j] for j in range(v)] for i in range(v)]
        paths = [row[:] for row in sub]  # length-1 path weights
        for _ in range(k - 3):
            nxt = [[0.0] * v for _ in range(v)]
            for i in range(v):
                for j in range(v):
                    if i == j:
                        continue  # walks returning to their origin are dropped
                    nxt[i][j] = sum(sub[i][a] * paths[a][j] for a in range(v))
            paths = nxt
        for b in range(v):
            cycle_weight = sum(m[v, a] * paths[a][b] for a in range(v)) * m[b, v]
            if cycle_weight < 0:
                m[b, v] = -m[b, v]
    return m


@pytest.mark.parametrize("k", [3, 4, 5])
def test_matches_stepwise_oracle_at_tiny_n(k):
    n = 6 if k == 3 else 8
    base = generate_base_iid(n, seed=21)
    spec = DenseCyclicSpec(n=n, k=k, flip_prob=1.0, sign=1)
    for variant in ("reference", "fast"):
        out = induce_cyclic_correlations(base, spec, seed=4, variant=variant)
        np.testing.assert_array_equal(out.entries, _oracle_sweep(base.entries, k))


@pytest.mark.parametrize("k", [3, 4, 5, 6])
def test_fast_variant_matches_reference_bit_exactly(k):
    # k = 6 matters: it is the smallest order where the incremental update
    # needs the cross-correction between maintained power diagonals
    for seed in range(5):
        base = generate_base_iid(200, seed=100 + seed)
        spec = DenseCyclicSpec(n=200, k=k, flip_prob=0.6, sign=1)
        ref = induce_cyclic_correlations(base, spec, seed=seed, variant="reference")
        fast = induce_cyclic_correlations(base, spec, seed=seed, variant="fast")
        np.testing.assert_array_equal(ref.entries, fast.entries)


def test_dimension_mismatch_rejected():
    m = generate_base_iid(10, seed=1)
    with pytest.raises(InvalidSpecError):
        induce_cyclic_correlations(m, DenseCyclicSpec(n=12, k=3, flip_prob=1.0), seed=1)


def test_unknown_variant_rejected():
    m = generate_base_iid(10, seed=1)
    with pytest.raises(InvalidSpecError):
        induce_cyclic_correlations(
            m, DenseCyclicSpec(n=10, k=3, flip_prob=1.0), seed=1, variant="turbo"
        )


def test_non_square_rejected_at_construction():
    with pytest.raises(InvalidSpecError):
        DenseMatrix(np.zeros((3, 4)))
