import itertools

import numpy as np
import pytest

from app.core.errors import InputError, UndefinedMetricError, UnsupportedDimensionError
from app.evaluation.evaluation_access import format_report, read_scores_csv
from app.evaluation.evaluation_validator import SeedMetrics
from app.netdata.netdata_validator import GroundTruthMembership
from app.services.evaluation import (
    aggregate,
    auc,
    membership_error,
    normalize_memberships,
    roc_points,
    unaligned_membership_error,
)


def brute_force_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p, q in itertools.product(pos, neg))
    return total / (len(pos) * len(neg))


def test_auc_extremes():
    assert auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    assert auc([1, 2, 3], [0, 1, 1]) == 1.0
    assert auc([3, 2, 1], [0, 1, 1]) == 0.0
    assert auc([5, 5, 5, 5], [0, 1, 0, 1]) == 0.5


def test_auc_matches_pair_count_with_ties():
    rng = np.random.default_rng(0)
    scores = rng.integers(0, 5, size=40).astype(float)
    labels = rng.integers(0, 2, size=40)
    assert auc(scores, labels) == pytest.approx(brute_force_auc(scores, labels))


def test_auc_one_class_is_undefined():
    with pytest.raises(UndefinedMetricError):
        auc([0.2, 0.3], [1, 1])


def test_auc_length_mismatch():
    with pytest.raises(InputError):
        auc([0.2, 0.3], [1])


def test_roc_points_span_unit_square():
    pts = roc_points([0.9, 0.8, 0.3, 0.1], [1, 0, 1, 0])
    assert tuple(pts[0, 1:]) == (0.0, 0.0)
    assert tuple(pts[-1, 1:]) == (1.0, 1.0)
    assert np.all(np.diff(pts[:, 1]) >= 0)
    assert np.all(np.diff(pts[:, 2]) >= 0)


def test_normalize_memberships_columns_sum_to_one():
    U = np.array([[1.0, -1.0, 0.0], [3.0, 2.0, 0.0]])
    out = normalize_memberships(U)
    assert np.allclose(out.sum(axis=0), 1.0)
    assert np.allclose(out[:, 0], [0.25, 0.75])
    assert np.allclose(out[:, 1], [0.0, 1.0])
    assert np.allclose(out[:, 2], [0.5, 0.5])


def test_membership_error_is_relabeling_invariant():
    truth = GroundTruthMembership(assignments=[0, 0, 1, 1, 2, 2], d=3)
    assert membership_error(truth.one_hot, truth) == 0.0
    assert membership_error(truth.one_hot[[2, 0, 1]], truth) == 0.0
    assert unaligned_membership_error(truth.one_hot[[2, 0, 1]], truth) > 0


def test_uniform_memberships_distance():
    truth = GroundTruthMembership(assignments=np.repeat(np.arange(3), 10), d=3)
    uniform = np.ones((3, 30))
    assert membership_error(uniform, truth) == pytest.approx(np.sqrt(20.0))


def test_aligned_never_exceeds_unaligned():
    rng = np.random.default_rng(1)
    truth = GroundTruthMembership(assignments=rng.integers(0, 4, size=20), d=4)
    U = rng.random((4, 20))
    assert membership_error(U, truth) <= unaligned_membership_error(U, truth)


def test_membership_error_dimension_limit():
    truth = GroundTruthMembership(assignments=np.arange(9), d=9)
    with pytest.raises(UnsupportedDimensionError):
        membership_error(np.eye(9), truth)


def test_membership_error_shape_mismatch():
    truth = GroundTruthMembership(assignments=[0, 1], d=2)
    with pytest.raises(InputError):
        membership_error(np.ones((3, 2)), truth)


def test_aggregate_mean_and_standard_error():
    rows = [
        SeedMetrics(seed=0, auc=0.8, membership_distance=1.0),
        SeedMetrics(seed=1, auc=0.9, membership_distance=3.0),
    ]
    report = aggregate(rows)
    assert report.auc_mean == pytest.approx(0.85)
    assert report.auc_se == pytest.approx(np.std([0.8, 0.9], ddof=1) / np.sqrt(2))
    assert report.membership_distance_mean == pytest.approx(2.0)
    assert report.baseline_auc_mean is None


def test_single_seed_has_zero_standard_error():
    report = aggregate([SeedMetrics(seed=0, auc=1.0)])
    assert report.auc_se == 0.0
    text = format_report(report)
    assert "auc = 1.0\n" in text
    assert text.startswith("seeds = 1\n")


def test_aggregate_needs_rows():
    with pytest.raises(InputError):
        aggregate([])


def test_read_scores_csv_requires_columns(tmp_path):
    path = tmp_path / "scores.csv"
    path.write_text("score\n0.5\n")
    with pytest.raises(InputError):
        read_scores_csv(path)


def test_auc_hand_counted_example():
    assert auc([0.9, 0.8, 0.7, 0.85], [1, 1, 0, 0]) == 0.75


def test_normalize_memberships_examples():
    out = normalize_memberships(np.array([[2.0, -1.0], [0.0, -2.0], [2.0, -3.0]]))
    assert np.allclose(out[:, 0], [0.5, 0.0, 0.5])
    assert np.allclose(out[:, 1], [1 / 3, 1 / 3, 1 / 3])


def test_auc_with_labels_as_scores_of_one_class_is_undefined():
    with pytest.raises(UndefinedMetricError):
        auc([1, 1, 1], [1, 1, 1])
