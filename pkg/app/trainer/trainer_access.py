import json
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.core.errors import InputError
from app.core.logging_utils import get_logger
from app.inference.inference_validator import MembershipMatrix
from app.netdata.netdata_access import (
    FLOAT_FORMAT,
    read_adjacency_csv,
    read_matrix_csv,
    read_memberships_csv,
    read_pairs_csv,
    write_adjacency_csv,
    write_matrix_csv,
    write_memberships_csv,
    write_pairs_csv,
)
from app.netdata.netdata_validator import ObservationMask, ObservedNetwork
from app.trainer.trainer_validator import FittedModel, ModelManifest

logger = get_logger(__name__)

MEMBERSHIPS_FILE = "memberships.csv"
M_MEAN_FILE = "m_mean.csv"
BETA_FILE = "beta.csv"
TRAIN_FILE = "train_pairs.csv"
TEST_FILE = "test_pairs.csv"
NETWORK_FILE = "network.csv"
CONFIG_FILE = "config.json"
DIAGNOSTICS_FILE = "diagnostics.log"


def format_diagnostics(model: FittedModel) -> str:
    lines = [
        f"iteration={r.iteration} f={r.f_value!r} elbo={r.elbo!r} "
        f"penalized_bound={r.penalized_bound!r} sweeps={r.estep_sweeps} "
        f"warnflag={int(r.mstep_warnflag)} seconds={r.seconds:.3f}"
        for r in model.diagnostics
    ]
    return "\n".join(lines) + "\n" if lines else ""


def _write_beta_csv(model: FittedModel, path: Path) -> None:
    """Column `beta` holds the posterior mean, cov_k columns the covariance rows."""
    p = model.beta_mean.size
    df = pd.DataFrame(model.beta_cov.reshape(p, p), columns=[f"cov_{k}" for k in range(p)])
    df.insert(0, "beta", model.beta_mean)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


def _read_beta_csv(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    df = pd.read_csv(path)
    beta = df["beta"].to_numpy(dtype=float)
    cov = df.drop(columns=["beta"]).to_numpy(dtype=float).reshape(beta.size, beta.size)
    return beta, cov


def save_model(
    model: FittedModel,
    net: ObservedNetwork,
    train: ObservationMask,
    test: ObservationMask,
    out_dir: Path,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    write_memberships_csv(model.U.values, out_dir / MEMBERSHIPS_FILE)
    write_matrix_csv(model.M_mean, out_dir / M_MEAN_FILE)
    _write_beta_csv(model, out_dir / BETA_FILE)
    write_pairs_csv(train, out_dir / TRAIN_FILE)
    write_pairs_csv(test, out_dir / TEST_FILE)
    write_adjacency_csv(net, out_dir / NETWORK_FILE)

    manifest = ModelManifest(
        config=model.config,
        n=net.n,
        directed=net.directed,
        include_diagonal=net.include_diagonal,
    )
    (out_dir / CONFIG_FILE).write_text(
        json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
    )
    (out_dir / DIAGNOSTICS_FILE).write_text(format_diagnostics(model))

    logger.info(f"Model written to {out_dir}")
    return out_dir


def load_model(
    model_dir: Path,
) -> Tuple[FittedModel, ObservedNetwork, ObservationMask, ObservationMask]:
    """Read back a directory written by save_model (diagnostics are not restored)."""
    model_dir = Path(model_dir)
    if not (model_dir / CONFIG_FILE).exists():
        raise InputError(f"{model_dir} is not a model directory (no {CONFIG_FILE})")

    try:
        manifest = ModelManifest.model_validate_json((model_dir / CONFIG_FILE).read_text())
    except ValidationError as e:
        raise InputError(f"{model_dir / CONFIG_FILE}: {e}")

    net = read_adjacency_csv(
        model_dir / NETWORK_FILE,
        directed=manifest.directed,
        include_diagonal=manifest.include_diagonal,
    )
    mirrored = not manifest.directed
    train = read_pairs_csv(model_dir / TRAIN_FILE, net.n, mirrored=mirrored)
    test = read_pairs_csv(model_dir / TEST_FILE, net.n, mirrored=mirrored)

    beta, beta_cov = _read_beta_csv(model_dir / BETA_FILE)
    model = FittedModel(
        U=MembershipMatrix(
            values=read_memberships_csv(model_dir / MEMBERSHIPS_FILE),
            nonnegative=manifest.config.nonnegative,
        ),
        M_mean=read_matrix_csv(model_dir / M_MEAN_FILE),
        beta_mean=beta,
        beta_cov=beta_cov,
        config=manifest.config,
    )
    return model, net, train, test
