"""
L1-penalized maximization with L-BFGS-B on split variables.

x = x_pos - x_neg with both parts bounded below by zero turns the penalty
lambda * ||x||_1 into the linear term lambda * sum(x_pos + x_neg). With the
nonnegativity option only x_pos is kept.
"""
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.optimize import minimize

from app.core.errors import NumericError
from app.core.logging_utils import get_logger

logger = get_logger(__name__)

FunAndGrad = Callable[[np.ndarray], Tuple[float, np.ndarray]]

# L-BFGS-B status for an abnormal line-search termination
_LINE_SEARCH_FAILURE = 2

# no relative-reduction stop: -n log det K puts a large offset on f
_FTOL = 0.0


class L1Result(BaseModel):
    x: np.ndarray
    value: float
    n_iter: int
    warnflag: bool
    message: Optional[str] = None

    class Config:
        arbitrary_types_allowed = True


def maximize_l1(
    fun_and_grad: FunAndGrad,
    x0: np.ndarray,
    l1_strength: float,
    nonnegative: bool = False,
    max_iter: int = 100,
    gtol: float = 1e-5,
) -> L1Result:
    """
    Maximize f(x) - l1_strength * ||x||_1, where fun_and_grad returns f and
    its gradient at x (same shape as x0). The returned point never has a
    lower penalized value than the (feasible) starting point.
    """
    shape = x0.shape
    x0 = np.asarray(x0, dtype=float).ravel()
    size = x0.size

    if nonnegative:
        start = np.clip(x0, 0.0, None)
    else:
        start = np.concatenate([np.clip(x0, 0.0, None), np.clip(-x0, 0.0, None)])

    def unsplit(v: np.ndarray) -> np.ndarray:
        return v if nonnegative else v[:size] - v[size:]

    best = {"value": -np.inf, "v": start.copy()}

    def objective(v: np.ndarray):
        x = unsplit(v)
        try:
            f, g = fun_and_grad(x.reshape(shape))
        except NumericError as e:
            logger.debug(f"Objective failed at a trial point: {e}")
            return np.inf, np.zeros_like(v)
        g = np.asarray(g, dtype=float).ravel()

        attained = f - l1_strength * float(np.sum(np.abs(x)))
        if attained > best["value"]:
            best["value"] = attained
            best["v"] = v.copy()

        if nonnegative:
            grad = -g + l1_strength
        else:
            grad = np.concatenate([-g + l1_strength, g + l1_strength])
        return -(f - l1_strength * float(np.sum(v))), grad

    objective(start)
    if not np.isfinite(best["value"]):
        raise NumericError("objective is not finite at the starting point")

    res = minimize(
        objective,
        start,
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, None)] * start.size,
        options={"maxiter": max_iter, "gtol": gtol, "ftol": _FTOL},
    )

    warnflag = res.status == _LINE_SEARCH_FAILURE
    if warnflag:
        logger.warning(f"L-BFGS-B line search failed: {res.message}; keeping best iterate")

    return L1Result(
        x=unsplit(best["v"]).reshape(shape),
        value=float(best["value"]),
        n_iter=int(res.nit),
        warnflag=bool(warnflag),
        message=str(res.message),
    )
