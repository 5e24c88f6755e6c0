"""Tests for arithmetic mean, DBA, ShapeDBA, and SoftDBA prototypes."""

import numpy as np
import pytest

from helpers import random_series_list
from tsproto.averaging import (
    AssociationTable,
    AveragingConfig,
    arithmetic_mean,
    barycenter_update,
    compute_barycenter,
    dba,
    shape_dba,
    soft_dba,
)
from tsproto.distances import WarpingPath, dtw, soft_dtw, soft_dtw_gradient
from tsproto.series import TimeSeries


def _non_increasing(trace, slack=1e-9):
    return all(b <= a + slack for a, b in zip(trace, trace[1:]))


# ---------------------------------------------------------------------------
# arithmetic mean


def test_arithmetic_mean_two_series():
    result = arithmetic_mean([TimeSeries([0.0, 2.0]), TimeSeries([2.0, 0.0])])
    np.testing.assert_array_equal(result.values, [1.0, 1.0])


def test_arithmetic_mean_singleton():
    x = TimeSeries([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(arithmetic_mean([x]).values, x.values)


def test_arithmetic_mean_stays_in_column_range():
    rng = np.random.default_rng(0)
    members = random_series_list(rng, 9, 14)
    stacked = np.stack([m.values for m in members])
    mean = arithmetic_mean(members).values
    assert (mean >= stacked.min(axis=0) - 1e-12).all()
    assert (mean <= stacked.max(axis=0) + 1e-12).all()


def test_arithmetic_mean_rejects_unequal_lengths():
    with pytest.raises(ValueError, match=r"lengths \[2, 3\]"):
        arithmetic_mean([TimeSeries([1.0, 2.0]), TimeSeries([1.0, 2.0, 3.0])])


def test_arithmetic_mean_rejects_empty_set():
    with pytest.raises(ValueError, match="empty"):
        arithmetic_mean([])


# ---------------------------------------------------------------------------
# barycenter update


def test_barycenter_update_two_point_association():
    average = TimeSeries([0.0])
    members = [TimeSeries([1.0]), TimeSeries([3.0])]
    paths = [WarpingPath(np.array([[0, 0]])), WarpingPath(np.array([[0, 0]]))]
    np.testing.assert_array_equal(barycenter_update(average, members, paths).values, [2.0])


def test_barycenter_update_diagonal_identity():
    x = TimeSeries([0.5, 1.5, -1.0])
    diagonal = WarpingPath(np.stack([np.arange(3), np.arange(3)], axis=1))
    result = barycenter_update(x, [x], [diagonal])
    np.testing.assert_array_equal(result.values, x.values)


def test_barycenter_update_matches_materialized_associations():
    rng = np.random.default_rng(1)
    for _ in range(20):
        average = TimeSeries(rng.normal(size=rng.integers(2, 15)))
        members = random_series_list(rng, int(rng.integers(1, 6)), int(rng.integers(2, 15)))
        paths = [dtw(average, m).path for m in members]
        fast = barycenter_update(average, members, paths).values
        table = AssociationTable.from_paths(len(average), members, paths)
        assert (table.cardinalities >= 1).all()
        np.testing.assert_allclose(fast, table.barycenters(), rtol=1e-12, atol=1e-12)


def test_barycenter_update_requires_one_path_per_member():
    x = TimeSeries([1.0])
    with pytest.raises(ValueError, match="one warping path per member"):
        barycenter_update(x, [x, x], [WarpingPath(np.array([[0, 0]]))])


# ---------------------------------------------------------------------------
# dba


def test_dba_identical_series_converges_immediately():
    member = TimeSeries(np.sin(np.linspace(0, 3, 20)))
    result = dba([member] * 5, AveragingConfig(method="dba", seed=0))
    np.testing.assert_array_equal(result.average.values, member.values)
    assert result.objective_trace == (0.0,)
    assert result.iterations_run == 1
    assert result.converged


def test_dba_objective_trace_non_increasing():
    rng = np.random.default_rng(2)
    for trial in range(20):
        members = random_series_list(rng, 10, int(rng.integers(8, 20)))
        result = dba(members, AveragingConfig(method="dba", seed=trial))
        assert len(result.objective_trace) == result.iterations_run
        assert _non_increasing(result.objective_trace)
        assert all(v >= 0 for v in result.objective_trace)


def test_dba_output_within_global_value_range():
    rng = np.random.default_rng(3)
    for trial in range(10):
        members = random_series_list(rng, 6, 12, spread=rng.uniform(0.5, 4))
        result = dba(members, AveragingConfig(method="dba", seed=trial))
        low = min(m.values.min() for m in members)
        high = max(m.values.max() for m in members)
        assert result.average.values.min() >= low - 1e-12
        assert result.average.values.max() <= high + 1e-12


def test_dba_average_keeps_initialization_length():
    rng = np.random.default_rng(4)
    members = [TimeSeries(rng.normal(size=n)) for n in (8, 12, 10)]
    config = AveragingConfig(method="dba", init="provided-series", initial_series=members[1])
    result = dba(members, config)
    assert len(result.average) == 12


def test_dba_rejects_empty_set():
    with pytest.raises(ValueError, match="empty"):
        dba([], AveragingConfig(method="dba"))


def test_dba_bit_reproducible():
    rng = np.random.default_rng(11)
    members = random_series_list(rng, 7, 16)
    config = AveragingConfig(method="dba", seed=2)
    first = dba(members, config)
    second = dba(members, config)
    np.testing.assert_array_equal(first.average.values, second.average.values)
    assert first.objective_trace == second.objective_trace
    assert first.iterations_run == second.iterations_run


# ---------------------------------------------------------------------------
# shape_dba


def test_shape_dba_reach_one_identical_to_dba():
    rng = np.random.default_rng(5)
    for trial in range(10):
        members = random_series_list(rng, 8, 15)
        base = AveragingConfig(method="dba", seed=trial)
        reach_one = AveragingConfig(method="shape_dba", reach=1, seed=trial)
        a = dba(members, base)
        b = shape_dba(members, reach_one)
        np.testing.assert_array_equal(a.average.values, b.average.values)
        assert a.objective_trace == b.objective_trace
        assert a.iterations_run == b.iterations_run
        assert a.converged == b.converged


def test_shape_dba_identical_series():
    member = TimeSeries(np.cos(np.linspace(0, 2, 16)))
    result = shape_dba([member] * 4, AveragingConfig(method="shape_dba", reach=5, seed=0))
    np.testing.assert_array_equal(result.average.values, member.values)
    assert result.objective_trace == (0.0,)


def test_shape_dba_trace_non_increasing_and_in_range():
    rng = np.random.default_rng(6)
    for trial in range(10):
        members = random_series_list(rng, 8, 18)
        result = shape_dba(members, AveragingConfig(method="shape_dba", reach=5, seed=trial))
        assert _non_increasing(result.objective_trace)
        low = min(m.values.min() for m in members)
        high = max(m.values.max() for m in members)
        assert result.average.values.min() >= low - 1e-12
        assert result.average.values.max() <= high + 1e-12


# ---------------------------------------------------------------------------
# soft_dba


def test_soft_dba_identical_series_is_stationary():
    # Stationarity of the member holds up to softmin smoothing, i.e. when
    # the sample-to-sample increments dominate gamma; near-tied samples
    # (e.g. around the extrema of a smooth sine) genuinely pull the
    # smoothed barycenter away from the member.
    rng = np.random.default_rng(0)
    member = TimeSeries(5.0 * np.arange(12) + rng.uniform(-0.2, 0.2, 12))
    config = AveragingConfig(method="soft_dba", gamma=1.0, init="provided-series", initial_series=member)
    result = soft_dba([member] * 5, config)
    first, last = result.objective_trace[0], result.objective_trace[-1]
    assert abs(last - first) <= config.tolerance * abs(first)
    assert np.abs(result.average.values - member.values).max() <= 1e-3


def test_soft_dba_trace_non_increasing():
    rng = np.random.default_rng(7)
    for trial in range(20):
        members = random_series_list(rng, int(rng.integers(3, 8)), 12)
        result = soft_dba(members, AveragingConfig(method="soft_dba", gamma=1.0, seed=trial))
        assert len(result.objective_trace) == result.iterations_run
        assert _non_increasing(result.objective_trace, slack=0.0)  # accepted steps only


def test_soft_dba_gradient_step_descends():
    rng = np.random.default_rng(8)
    for _ in range(10):
        members = random_series_list(rng, 5, 10)
        center = rng.normal(size=10)
        gamma = 1.0

        def objective(c):
            return sum(soft_dtw(c, m.values, gamma) for m in members)

        grad = np.zeros(10)
        for m in members:
            grad += soft_dtw_gradient(center, m.values, gamma)
        eta = 1e-4 / max(1.0, np.linalg.norm(grad))
        assert objective(center - eta * grad) < objective(center)


def test_soft_dba_rejects_unequal_lengths():
    members = [TimeSeries(np.zeros(5) + 1), TimeSeries(np.zeros(7) + 1)]
    with pytest.raises(ValueError, match="equal-length"):
        soft_dba(members, AveragingConfig(method="soft_dba"))


# ---------------------------------------------------------------------------
# config and dispatcher


def test_config_validation():
    with pytest.raises(ValueError, match="unknown averaging method"):
        AveragingConfig(method="median")
    with pytest.raises(ValueError, match="requires initial_series"):
        AveragingConfig(method="dba", init="provided-series")
    with pytest.raises(ValueError, match="gamma"):
        AveragingConfig(method="soft_dba", gamma=-1.0)


def test_medoid_initialization_picks_central_member():
    rng = np.random.default_rng(9)
    members = [TimeSeries(np.ones(6) + rng.normal(0, 0.01, 6)) for _ in range(4)]
    members.append(TimeSeries(np.full(6, 8.0)))  # outlier cannot be the medoid
    distances = np.array([[dtw(a, b).distance for b in members] for a in members])
    medoid = members[int(np.argmin(distances.sum(axis=1)))]
    config = AveragingConfig(method="dba", init="medoid", max_iterations=1)
    result = dba(members, config)
    expected_initial_objective = sum(dtw(medoid, m).distance ** 2 for m in members)
    assert result.objective_trace[0] == pytest.approx(expected_initial_objective, rel=1e-12)


def test_compute_barycenter_dispatches_mean():
    members = [TimeSeries([0.0, 2.0]), TimeSeries([2.0, 0.0])]
    result = compute_barycenter(members, AveragingConfig(method="mean"))
    np.testing.assert_array_equal(result.average.values, [1.0, 1.0])
    assert result.iterations_run == 1
