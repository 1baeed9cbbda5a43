"""Shared test oracles."""
import numpy as np


def fit_scaling_degree(ns, values, max_degree=3, rtol=1e-6):
    """Smallest polynomial degree reproducing (ns, values) within rtol.

    The built schedules are exactly polynomial in n, so degree detection is
    an exact scaling-exponent measurement (a log-log power fit is biased at
    small n for polynomials with roots, e.g. (n-1)(n-2)/2).
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    scale = max(np.abs(values).max(), 1.0)
    for degree in range(max_degree + 1):
        coeffs = np.polyfit(ns, values, degree)
        residual = np.abs(np.polyval(coeffs, ns) - values).max()
        if residual <= rtol * scale:
            return degree
    return None
