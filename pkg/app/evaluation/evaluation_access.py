from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd

from app.core.errors import InputError
from app.evaluation.evaluation_validator import MetricReport
from app.netdata.netdata_access import FLOAT_FORMAT

_AGGREGATE_KEYS = [
    ("auc", "auc_mean"),
    ("auc_se", "auc_se"),
    ("membership_distance", "membership_distance_mean"),
    ("membership_distance_se", "membership_distance_se"),
    ("unaligned_distance", "unaligned_distance_mean"),
    ("baseline_auc", "baseline_auc_mean"),
    ("baseline_auc_se", "baseline_auc_se"),
]


def format_report(report: MetricReport) -> str:
    """Flat "key = value" block; floats keep full round-trip precision."""
    lines = [f"seeds = {len(report.per_seed)}"]
    for key, attr in _AGGREGATE_KEYS:
        value = getattr(report, attr)
        if value is not None:
            lines.append(f"{key} = {float(value)!r}")
    return "\n".join(lines) + "\n"


def write_report(report: MetricReport, path: Path) -> None:
    Path(path).write_text(format_report(report))


def write_per_seed_csv(report: MetricReport, path: Path) -> None:
    df = pd.DataFrame([m.model_dump() for m in report.per_seed])
    df = df.dropna(axis=1, how="all")
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def write_roc_csv(points: np.ndarray, path: Path) -> None:
    df = pd.DataFrame(points, columns=["threshold", "fpr", "tpr"])
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_scores_csv(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """Score file with at least the columns `score` and `label`."""
    df = pd.read_csv(path)
    missing = {"score", "label"} - set(df.columns)
    if missing:
        raise InputError(f"{path}: missing columns {sorted(missing)}")
    return df["score"].to_numpy(dtype=float), df["label"].to_numpy(dtype=int)
