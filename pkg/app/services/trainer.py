"""
Outer variational-EM loop, initialization, link scoring and gamma
cross-validation.
"""
import time
from typing import Iterable, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError
from scipy import linalg
from scipy.special import ndtr

from app.core.errors import FitError, InputError, SMGBError
from app.core.logging_utils import get_logger
from app.inference.inference_validator import MembershipMatrix, MstepProblem
from app.netdata.netdata_service import split_mask
from app.netdata.netdata_validator import ObservationMask, ObservedNetwork, SideInfo
from app.services.estep import elbo, initial_state, observed_matrix, run_estep
from app.services.evaluation import auc
from app.services.kernel import rbf_matrix, spectral_decompose
from app.services.mstep import optimize_memberships
from app.trainer.trainer_validator import (
    CrossValidationResult,
    FitConfig,
    FittedModel,
    GammaScore,
    IterationRecord,
)

logger = get_logger(__name__)

INIT_SCALE = 0.1
CV_INNER_FRACTION = 0.8
_CONSTANT_ROW_STD = 1e-8


def _spectral_rows(
    net: ObservedNetwork, d: int, seed: int, observed: Optional[np.ndarray]
) -> np.ndarray:
    A = net.adjacency.astype(float)
    if observed is not None:
        fill = A[observed].mean() if observed.any() else 0.0
        A = np.where(observed, A, fill)
    A = 0.5 * (A + A.T)
    A = A - A.mean()

    w, V = linalg.eigh(A)
    order = np.argsort(w)[::-1][:d]
    rows = np.random.default_rng(seed).normal(0.0, INIT_SCALE, size=(d, net.n))
    for k, idx in enumerate(order):
        row = V[:, idx]
        # a constant eigenvector keeps its Gaussian row
        if row.std() < _CONSTANT_ROW_STD:
            continue
        rows[k] = INIT_SCALE * row / row.std()
    return rows


def init_memberships(
    n: int,
    d: int,
    seed: int,
    net: Optional[ObservedNetwork] = None,
    observed: Optional[np.ndarray] = None,
    mode: str = "gaussian",
    nonnegative: bool = False,
) -> np.ndarray:
    """
    Gaussian mode: iid N(0, 0.1^2) entries. Spectral mode: leading
    eigenvectors of the symmetrized, mean-centered adjacency (unobserved
    entries filled with the observed mean), each row scaled to std 0.1.
    """
    if n < 1 or d < 1:
        raise InputError(f"n and d must be positive, got n={n}, d={d}")

    if mode == "spectral":
        if net is None:
            raise InputError("spectral initialization needs the observed network")
        U = _spectral_rows(net, d, seed, observed)
    else:
        rng = np.random.default_rng(seed)
        U = rng.normal(0.0, INIT_SCALE, size=(d, n))

    if nonnegative:
        U = np.abs(U)
    return U


def fit(
    net: ObservedNetwork,
    train: ObservationMask,
    side: Optional[SideInfo],
    config: FitConfig,
) -> FittedModel:
    """
    Alternate kernel/eigendecomposition, E-step and M-step until the
    largest change in U drops below tol_outer or max_outer is reached.
    """
    if len(train) == 0:
        raise InputError("training mask is empty")
    if side is None:
        side = SideInfo.empty(net.n)
    if side.n != net.n:
        raise InputError(f"side information is for n={side.n}, network has n={net.n}")

    params = config.kernel_params
    observed = observed_matrix(net, train)
    U = init_memberships(
        net.n,
        config.d,
        config.seed,
        net=net,
        observed=observed,
        mode=config.init_mode,
        nonnegative=config.nonnegative,
    )
    state = initial_state(net, train, side, config.sigma_beta_sq)
    diagnostics: List[IterationRecord] = []

    logger.info(
        f"Fitting n={net.n}, d={config.d}, gamma={config.gamma}, "
        f"lambda={config.l1_strength}, train pairs={len(train)}"
    )

    def estep_at(U_now, state_now, iteration):
        step = "rbf_matrix"
        try:
            K = rbf_matrix(U_now, params)
            step = "spectral_decompose"
            cache = spectral_decompose(K, config.rank_m, config.spectral_method)
            step = "run_estep"
            result = run_estep(
                state_now,
                cache,
                net,
                train,
                side,
                config.sigma_beta_sq,
                tol_e=config.tol_e,
                max_e=config.max_e,
            )
            step = "elbo"
            bound = elbo(result.state, cache, net, train, side, config.sigma_beta_sq)
        except SMGBError as e:
            raise FitError(iteration, step, e)
        return cache, result, bound

    for iteration in range(1, config.max_outer + 1):
        started = time.perf_counter()

        cache, estep_result, bound = estep_at(U, state, iteration)
        state = estep_result.state

        prob = MstepProblem(
            cache=cache,
            M_mean=state.M_mean,
            l1_strength=config.l1_strength,
            kernel_params=params,
            nonnegative=config.nonnegative,
        )
        try:
            mstep = optimize_memberships(U, prob, max_iter=config.max_mstep)
        except SMGBError as e:
            raise FitError(iteration, "optimize_memberships", e)

        record = IterationRecord(
            iteration=iteration,
            f_value=mstep.penalized_value,
            elbo=bound,
            penalized_bound=bound - config.l1_strength * float(np.abs(U).sum()),
            estep_sweeps=estep_result.sweeps,
            mstep_warnflag=mstep.warnflag,
            seconds=time.perf_counter() - started,
        )
        diagnostics.append(record)
        logger.info(
            f"iter={iteration} f={record.f_value:.6g} elbo={record.elbo:.6g} "
            f"sweeps={record.estep_sweeps} seconds={record.seconds:.3f}"
        )

        delta = float(np.max(np.abs(mstep.U - U)))
        U = mstep.U
        if delta < config.tol_outer:
            logger.info(f"Converged after {iteration} outer iterations (max |dU|={delta:.3e})")
            break

    # refresh q at the returned U so <M> belongs to it
    _, estep_result, _ = estep_at(U, state, len(diagnostics) + 1)
    state = estep_result.state

    return FittedModel(
        U=MembershipMatrix(values=U, nonnegative=config.nonnegative),
        M_mean=state.M_mean,
        beta_mean=state.beta_mean,
        beta_cov=state.beta_cov,
        config=config,
        diagnostics=diagnostics,
    )


def predict_probabilities(scores: np.ndarray) -> np.ndarray:
    return ndtr(np.asarray(scores, dtype=float))


def score_pairs(
    model: FittedModel,
    side: Optional[SideInfo],
    pairs: Iterable[Tuple[int, int]],
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Posterior-mean predictor <x_ij> = <m_ij> + <beta>^T r_ij for each pair,
    together with its probit probability Phi(<x_ij>).
    """
    pairs = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
    n = model.n
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        raise InputError(f"pair index out of range for n={n}")

    i, j = pairs[:, 0], pairs[:, 1]
    scores = model.M_mean[i, j].copy()
    if side is not None and side.p > 0 and model.beta_mean.size:
        scores += side.features[i, j] @ model.beta_mean
    return scores, predict_probabilities(scores)


def cross_validate_gamma(
    net: ObservedNetwork,
    train: ObservationMask,
    side: Optional[SideInfo],
    config: FitConfig,
) -> CrossValidationResult:
    """
    Pick gamma from config.gamma_grid by validation AUC on a seeded inner
    split of the training mask (ties go to the smaller gamma), then refit
    on the whole training mask.
    """
    grid = list(config.gamma_grid)
    if not grid:
        raise InputError("gamma grid is empty")

    inner_train, validation = split_mask(train, CV_INNER_FRACTION, config.seed)
    labels = net.adjacency[validation.pairs[:, 0], validation.pairs[:, 1]]

    table: List[GammaScore] = []
    failures: List[str] = []
    for gamma in grid:
        candidate = config.model_copy(update={"gamma": gamma})
        try:
            model = fit(net, inner_train, side, candidate)
            scores, _ = score_pairs(model, side, validation.pairs)
            value = auc(scores, labels)
        except (SMGBError, ValidationError) as e:
            logger.warning(f"gamma={gamma} skipped: {e}")
            failures.append(f"gamma={gamma}: {e}")
            continue
        logger.info(f"gamma={gamma} validation AUC={value:.4f}")
        table.append(GammaScore(gamma=gamma, validation_auc=value))

    if not table:
        raise SMGBError(f"every gamma in the grid failed: {'; '.join(failures)}")

    best = sorted(table, key=lambda row: (-row.validation_auc, row.gamma))[0]
    logger.info(f"Selected gamma={best.gamma}; refitting on the full training mask")
    model = fit(net, train, side, config.model_copy(update={"gamma": best.gamma}))

    return CrossValidationResult(
        best_gamma=best.gamma, table=table, failures=failures, model=model
    )
