"""
Moments of the unit-variance normal truncated to one side of zero.
"""
import numpy as np
from scipy.special import erfcx, log_ndtr

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


def mills_ratio(t):
    """
    phi(t) / Phi(t), written as sqrt(2/pi) / erfcx(-t / sqrt(2)).
    erfcx stays accurate in the far left tail, where the ratio grows like -t.
    """
    t = np.asarray(t, dtype=float)
    return SQRT_2_OVER_PI / erfcx(-t / np.sqrt(2.0))


def expected_z(x_mean, y, observed):
    """
    Mean of q(z) = N(x_mean, 1) restricted to the side of zero given by y
    (z > 0 for y = 1, z <= 0 for y = 0). Unobserved entries are untruncated.
    Works elementwise on arrays.
    """
    x = np.asarray(x_mean, dtype=float)
    s = 2.0 * np.asarray(y, dtype=float) - 1.0
    shift = s * mills_ratio(s * x)
    out = np.where(observed, x + shift, x)
    return out.item() if out.ndim == 0 else out


def truncated_variance(t):
    """Variance of s*z when s*z ~ N(t, 1) truncated to positive values."""
    lam = mills_ratio(t)
    return 1.0 - lam * (t + lam)


def truncated_entropy_excess(t):
    """
    Entropy of the truncated normal minus that of N(0, 1):
    log Phi(t) - t * lambda(t) / 2.
    """
    t = np.asarray(t, dtype=float)
    return log_ndtr(t) - 0.5 * t * mills_ratio(t)
