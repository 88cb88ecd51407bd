import numpy as np
import pytest

from conftest import bump_series
from warpbench.averaging import (
    arithmetic_mean,
    dba,
    extend_dataset,
    medoid_index,
    neighbor_weights,
    shape_dba,
    weighted_shape_dba,
)
from warpbench.data import Dataset, TimeSeries
from warpbench.distances import dtw_cost


def test_arithmetic_mean_examples(rng):
    x = TimeSeries(rng.standard_normal((8, 2)))
    assert np.array_equal(arithmetic_mean([x]).series.values, x.values)
    neg = TimeSeries(-x.values)
    assert np.allclose(arithmetic_mean([x, neg]).series.values, 0.0)
    a = TimeSeries(np.array([0.0, 0.0]))
    b = TimeSeries(np.array([2.0, 2.0]))
    assert np.array_equal(arithmetic_mean([a, b]).series.values[:, 0], [1.0, 1.0])


def test_arithmetic_mean_rejects_empty_and_ragged(rng):
    with pytest.raises(ValueError):
        arithmetic_mean([])
    with pytest.raises(ValueError):
        arithmetic_mean([TimeSeries(np.zeros(3)), TimeSeries(np.zeros(4))])


def test_dba_fixed_point(rng):
    x = TimeSeries(rng.standard_normal(16))
    proto = dba([x], init=x)
    assert np.allclose(proto.series.values, x.values)
    assert proto.converged and proto.iterations == 1


def test_dba_identical_copies_default_init(rng):
    x = TimeSeries(rng.standard_normal(12))
    proto = dba([x, x, x])  # medoid init is x itself
    assert np.allclose(proto.series.values, x.values, atol=1e-12)


def oracle_dba_iteration(group, init, align, sweeps=30):
    """Plain re-implementation of the barycenter pass, run to a fixed point."""
    proto = init.values.copy()
    for _ in range(sweeps):
        sums = np.zeros_like(proto)
        counts = np.zeros(proto.shape[0])
        for s in group:
            _, path = align(TimeSeries(proto), s)
            i, j = path.indices()
            np.add.at(sums, i, s.values[j])
            np.add.at(counts, i, 1.0)
        new = sums / counts[:, None]
        if np.allclose(new, proto, atol=0, rtol=0):
            break
        proto = new
    return proto


def test_dba_identical_copies_arbitrary_init_matches_oracle(rng):
    from warpbench.distances import dtw

    x = TimeSeries(rng.standard_normal(12))
    init = TimeSeries(rng.standard_normal(12))
    proto = dba([x, x, x], init=init)
    expected = oracle_dba_iteration([x, x, x], init, dtw)
    assert np.allclose(proto.series.values, expected, atol=1e-12)
    # every associate comes from x, so prototype values are means of x values
    assert proto.series.values.min() >= x.values.min() - 1e-12
    assert proto.series.values.max() <= x.values.max() + 1e-12


def test_dba_beats_mean_on_shifted_spikes():
    spike = np.zeros(24)
    spike[8] = 5.0
    a = TimeSeries(spike)
    b = TimeSeries(np.roll(spike, 1))
    group = [a, b]
    proto = dba(group)
    mean = arithmetic_mean(group)
    dba_obj = sum(dtw_cost(proto.series, s) for s in group)
    mean_obj = sum(dtw_cost(mean.series, s) for s in group)
    assert dba_obj < mean_obj


def test_dba_objective_monotone(rng):
    for _ in range(15):
        group = [TimeSeries(rng.standard_normal(20)) for _ in range(6)]
        proto = dba(group)
        trace = proto.objective_trace
        assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


def test_dba_permutation_invariant(rng):
    group = [TimeSeries(rng.standard_normal(18)) for _ in range(5)]
    init = TimeSeries(rng.standard_normal(18))
    p1 = dba(group, init=init)
    p2 = dba(group[::-1], init=init)
    assert np.allclose(p1.series.values, p2.series.values, atol=1e-12)


def test_shape_dba_reach_zero_matches_dba(rng):
    group = [TimeSeries(rng.standard_normal(16)) for _ in range(5)]
    init = group[0]
    a = dba(group, init=init)
    b = shape_dba(group, 0, init=init)
    assert np.array_equal(a.series.values, b.series.values)
    assert a.objective_trace == b.objective_trace


def test_shape_dba_identity_set(rng):
    x = TimeSeries(rng.standard_normal(14))
    proto = shape_dba([x, x], 3, init=x)
    assert np.allclose(proto.series.values, x.values, atol=1e-12)


def test_shape_dba_stays_in_distribution(rng):
    group = [bump_series(48, float(c)) for c in rng.uniform(14, 34, size=10)]
    proto = shape_dba(group, 5)
    lo = min(s.values.min() for s in group)
    hi = max(s.values.max() for s in group)
    assert proto.series.values.min() >= lo - 1e-9
    assert proto.series.values.max() <= hi + 1e-9


def test_medoid_index_hand():
    a = TimeSeries(np.array([0.0, 0.0]))
    b = TimeSeries(np.array([0.1, 0.1]))
    c = TimeSeries(np.array([5.0, 5.0]))
    assert medoid_index([a, b, c]) in (0, 1)
    assert medoid_index([c, c, a]) == 0


def test_neighbor_weights_examples(rng):
    ref = TimeSeries(np.array([0.0, 0.0, 0.0]))
    pool = [
        TimeSeries(np.array([1.0, 1.0, 1.0])),  # dtw cost 3
        TimeSeries(np.array([2.0, 2.0, 2.0])),  # dtw cost 12
        TimeSeries(np.array([9.0, 9.0, 9.0])),
    ]
    nw = neighbor_weights(ref, pool, 2)
    assert nw.d_nn == 3.0
    assert nw.weights[0] == pytest.approx(0.5)  # at d_NN exactly
    assert nw.weights[1] == pytest.approx(0.5 ** (12.0 / 3.0))
    assert list(nw.neighbor_indices) == [0, 1]


def test_neighbor_weights_distance_zero(rng):
    ref = TimeSeries(np.array([1.0, 2.0, 3.0]))
    pool = [TimeSeries(ref.values.copy()), TimeSeries(np.array([9.0, 9.0, 9.0]))]
    nw = neighbor_weights(ref, pool, 1)
    assert nw.weights[0] == 1.0


def test_neighbor_weights_strictly_decreasing(rng):
    ref = TimeSeries(rng.standard_normal(10))
    pool = [TimeSeries(ref.values + (i + 1) * 0.5) for i in range(6)]
    nw = neighbor_weights(ref, pool, 6)
    order = np.argsort(nw.dtw_distances)
    w = nw.weights[order]
    assert all(b < a for a, b in zip(w, w[1:]))


def test_neighbor_weights_rejects_oversized_n(rng):
    ref = TimeSeries(rng.standard_normal(5))
    with pytest.raises(ValueError):
        neighbor_weights(ref, [ref], 2)


def test_weighted_shape_dba_equal_weights_matches_unweighted(rng):
    ref = TimeSeries(rng.standard_normal(12))
    neighbors = [TimeSeries(rng.standard_normal(12)) for _ in range(3)]
    weighted = weighted_shape_dba(ref, neighbors, [1.0, 1.0, 1.0], reach=2)
    plain = shape_dba([ref] + neighbors, 2, init=ref)
    assert np.allclose(weighted.series.values, plain.series.values, atol=1e-12)


def test_weighted_shape_dba_zero_weight_limit(rng):
    ref = TimeSeries(rng.standard_normal(10))
    neighbors = [TimeSeries(rng.standard_normal(10)) for _ in range(2)]
    proto = weighted_shape_dba(ref, neighbors, [1e-9, 1e-9], reach=1)
    assert np.allclose(proto.series.values, ref.values, atol=1e-6)


def test_weighted_shape_dba_aligned_weighted_means():
    # aligned constant series keep a diagonal path, so each timestamp is a
    # plain weighted average of the values
    ref = TimeSeries(np.array([0.0, 0.0, 0.0, 0.0]))
    n1 = TimeSeries(np.array([4.0, 4.0, 4.0, 4.0]))
    one = weighted_shape_dba(ref, [n1], [1.0], reach=0, max_iters=1)
    assert np.allclose(one.series.values[:, 0], 2.0)
    three = weighted_shape_dba(ref, [n1], [3.0], reach=0, max_iters=1)
    assert np.allclose(three.series.values[:, 0], 3.0)


def test_extend_dataset_doubles_and_labels_convex(rng):
    samples = [bump_series(24, float(c)) for c in rng.uniform(8, 16, size=6)]
    labels = rng.uniform(0.0, 1.0, size=6)
    ds = Dataset(samples, labels=labels)
    out = extend_dataset(ds, n_neighbors=2, reach=2)
    assert len(out) == 12
    assert np.array_equal(out.labels[:6], labels)
    assert out.labels[6:].min() >= labels.min() - 1e-12
    assert out.labels[6:].max() <= labels.max() + 1e-12


def test_extend_dataset_n1_degeneracy(rng):
    # with one neighbor the min-max step always yields weights (1, 0), so
    # the synthetic label equals the reference label
    samples = [bump_series(20, 8.0), bump_series(20, 9.0), bump_series(20, 14.0)]
    ds = Dataset(samples, labels=np.array([1.0, 0.0, 0.3]))
    out = extend_dataset(ds, n_neighbors=1, reach=1)
    assert np.allclose(out.labels[3:], ds.labels)


def test_extend_dataset_requires_labels(rng):
    ds = Dataset([bump_series(16, 6.0), bump_series(16, 8.0)])
    with pytest.raises(ValueError):
        extend_dataset(ds, 1, 1)
