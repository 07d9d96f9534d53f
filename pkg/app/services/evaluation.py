"""
Link-prediction and membership-recovery metrics.
"""
from itertools import permutations
from typing import List, Sequence

import numpy as np
from scipy.stats import rankdata

from app.core.errors import InputError, UndefinedMetricError, UnsupportedDimensionError
from app.evaluation.evaluation_validator import MetricReport, SeedMetrics
from app.netdata.netdata_validator import GroundTruthMembership

MAX_ALIGNMENT_DIM = 8


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """
    Mann-Whitney AUC: fraction of (positive, negative) pairs ranked
    correctly, ties counting one half.
    """
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    if scores.size != labels.size:
        raise InputError(f"{scores.size} scores but {labels.size} labels")

    positive = labels == 1
    n_pos = int(positive.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative label")

    ranks = rankdata(scores)
    u_stat = ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u_stat / (n_pos * n_neg))


def roc_points(scores: Sequence[float], labels: Sequence[int]) -> np.ndarray:
    """Rows of (threshold, false positive rate, true positive rate)."""
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel() == 1
    n_pos = max(int(labels.sum()), 1)
    n_neg = max(int((~labels).sum()), 1)

    thresholds = np.unique(scores)[::-1]
    rows = [(np.inf, 0.0, 0.0)]
    for threshold in thresholds:
        predicted = scores >= threshold
        tpr = (predicted & labels).sum() / n_pos
        fpr = (predicted & ~labels).sum() / n_neg
        rows.append((threshold, fpr, tpr))
    return np.array(rows, dtype=float)


def normalize_memberships(U: np.ndarray) -> np.ndarray:
    """Clip at zero and rescale columns to sum 1; empty columns become uniform."""
    U = np.clip(np.asarray(U, dtype=float), 0.0, None)
    d = U.shape[0]
    totals = U.sum(axis=0)
    out = np.full_like(U, 1.0 / d)
    nonzero = totals > 0
    out[:, nonzero] = U[:, nonzero] / totals[nonzero]
    return out


def unaligned_membership_error(U: np.ndarray, truth: GroundTruthMembership) -> float:
    U0 = truth.one_hot
    if U.shape != U0.shape:
        raise InputError(f"membership shape {U.shape} does not match truth {U0.shape}")
    return float(np.linalg.norm(normalize_memberships(U) - U0))


def membership_error(U: np.ndarray, truth: GroundTruthMembership) -> float:
    """
    min over group relabelings P of ||P normalize(U) - U0||_F, searched
    exhaustively (d <= 8).
    """
    U0 = truth.one_hot
    if U.shape != U0.shape:
        raise InputError(f"membership shape {U.shape} does not match truth {U0.shape}")
    d = U.shape[0]
    if d > MAX_ALIGNMENT_DIM:
        raise UnsupportedDimensionError(
            f"exhaustive alignment supports d <= {MAX_ALIGNMENT_DIM}, got d={d}"
        )

    normalized = normalize_memberships(U)
    best = np.inf
    for perm in permutations(range(d)):
        best = min(best, float(np.linalg.norm(normalized[list(perm)] - U0)))
    return best


def _mean_and_se(values: List[float]):
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return None, None
    se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), se


def aggregate(per_seed: List[SeedMetrics]) -> MetricReport:
    """Mean and standard error (sample std / sqrt(#seeds)) of every metric."""
    if not per_seed:
        raise InputError("no per-seed metrics to aggregate")

    auc_mean, auc_se = _mean_and_se([m.auc for m in per_seed])
    dist = [m.membership_distance for m in per_seed if m.membership_distance is not None]
    raw = [m.unaligned_distance for m in per_seed if m.unaligned_distance is not None]
    base = [m.baseline_auc for m in per_seed if m.baseline_auc is not None]

    dist_mean, dist_se = _mean_and_se(dist)
    raw_mean, _ = _mean_and_se(raw)
    base_mean, base_se = _mean_and_se(base)

    return MetricReport(
        per_seed=per_seed,
        auc_mean=auc_mean,
        auc_se=auc_se,
        membership_distance_mean=dist_mean,
        membership_distance_se=dist_se,
        unaligned_distance_mean=raw_mean,
        baseline_auc_mean=base_mean,
        baseline_auc_se=base_se,
    )
