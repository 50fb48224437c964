"""Central finite-difference derivatives used for standard errors."""

import numpy as np


def hessian(f, x, rel_step=1e-4):
    """Symmetric central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    out = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i] = h[i]
            ej[j] = h[j]
            if i == j:
                val = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h[i] * h[i])
            else:
                val = (
                    f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
                ) / (4.0 * h[i] * h[j])
            out[i, j] = val
            out[j, i] = val
    return out


def jacobian(g, x, rel_step=1e-6):
    """Central-difference Jacobian of a vector function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    g0 = np.asarray(g(x), dtype=float)
    out = np.empty((g0.size, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h[i]
        out[:, i] = (np.asarray(g(x + e)) - np.asarray(g(x - e))) / (2.0 * h[i])
    return out


def se_from_hessian(hess, jac=None):
    """Standard errors from an observed-information Hessian.

    Returns (se, available): non-positive-definite directions are flagged
    rather than silently reported as NaN.
    """
    n = hess.shape[0]
    se = np.full(n if jac is None else jac.shape[0], np.nan)
    try:
        cov = np.linalg.inv(hess)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(hess)
    if jac is not None:
        cov = jac @ cov @ jac.T
    d = np.diag(cov)
    ok = np.isfinite(d) & (d > 0)
    se[ok] = np.sqrt(d[ok])
    return se, ok
