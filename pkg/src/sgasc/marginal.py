"""AR(1)-GJR-GARCH(1,1) marginal model with standardised skew Student-t innovations.

The skewing construction splices two half-bodies of a symmetric kernel with
inverse scalings ``eta`` and ``1/eta``.  The "raw" density built this way has
non-zero mean for ``eta != 1``; the model works with the location/scale
standardised version (mean 0, variance 1).  Both are exposed: the raw variants
(``*_raw``) are kept for testing and for the left-tail mass ``varsigma`` that
enters the stationarity constraint.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special, stats

from . import _kernels
from ._numdiff import hessian, jacobian, se_from_hessian
from .errors import ConstraintError, ConvergenceError, DomainError

__all__ = [
    "MarginalParams",
    "MarginalFit",
    "skewt_logpdf",
    "skewt_cdf",
    "skewt_quantile",
    "skewt_logpdf_raw",
    "skewt_cdf_raw",
    "skewt_quantile_raw",
    "skewt_moments_raw",
    "varsigma",
    "varsigma_closed",
    "filter_marginal",
    "fit_marginal",
]

ETA_RANGE = (0.1, 10.0)
NU_RANGE = (2.01, 150.0)
PIT_CLAMP = 1e-10


def _check_shape_params(eta, nu):
    if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(nu))):
        raise DomainError("eta and nu must be finite")
    if np.any(np.asarray(eta) <= 0):
        raise DomainError(f"skewness parameter must be positive, got {eta}")
    if np.any(np.asarray(nu) <= 2):
        raise DomainError(f"degrees of freedom must exceed 2, got {nu}")


def _kernel_scale(nu):
    # unit-variance Student-t kernel: g(z) = c * t_nu(c z), c = sqrt(nu/(nu-2))
    return math.sqrt(nu / (nu - 2.0))


def _t_logpdf(x, nu):
    # classical Student-t log-density, vectorised without scipy.stats overhead
    const = (
        special.gammaln((nu + 1.0) / 2.0)
        - special.gammaln(nu / 2.0)
        - 0.5 * math.log(nu * math.pi)
    )
    return const - 0.5 * (nu + 1.0) * np.log1p(x * x / nu)


def skewt_logpdf_raw(x, eta, nu):
    """Log-density of the unstandardised two-piece skew-t (unit-variance kernel)."""
    _check_shape_params(eta, nu)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite evaluation point")
    c = _kernel_scale(nu)
    z = np.where(x >= 0, x / eta, x * eta)
    return (
        math.log(2.0 / (eta + 1.0 / eta))
        + math.log(c)
        + _t_logpdf(c * z, nu)
    )


def skewt_cdf_raw(x, eta, nu):
    """CDF of the unstandardised two-piece skew-t."""
    _check_shape_params(eta, nu)
    x = np.asarray(x, dtype=float)
    c = _kernel_scale(nu)
    e2 = eta * eta
    neg = 2.0 / (1.0 + e2) * stats.t.cdf(c * eta * x, nu)
    pos = 1.0 - 2.0 * e2 / (1.0 + e2) * stats.t.sf(c * x / eta, nu)
    return np.where(x < 0, neg, pos)


def skewt_quantile_raw(p, eta, nu):
    """Quantile of the unstandardised two-piece skew-t."""
    _check_shape_params(eta, nu)
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise DomainError("quantile level must lie strictly inside (0, 1)")
    c = _kernel_scale(nu)
    e2 = eta * eta
    p0 = 1.0 / (1.0 + e2)
    lo = stats.t.ppf(np.minimum(p, p0) * (1.0 + e2) / 2.0, nu) / (c * eta)
    hi = stats.t.isf((1.0 - np.maximum(p, p0)) * (1.0 + e2) / (2.0 * e2), nu) * eta / c
    return np.where(p < p0, lo, hi)


def skewt_moments_raw(eta, nu):
    """Mean and standard deviation of the unstandardised two-piece skew-t."""
    _check_shape_params(eta, nu)
    c = _kernel_scale(nu)
    # E|T| for the classical t, rescaled to the unit-variance kernel
    abs_t = (
        2.0
        * math.sqrt(nu)
        * math.exp(special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0))
        / (math.sqrt(math.pi) * (nu - 1.0))
    )
    mean = (eta - 1.0 / eta) * abs_t / c
    m2 = (eta**3 + eta**-3) / (eta + 1.0 / eta)
    var = m2 - mean * mean
    return mean, math.sqrt(var)


def skewt_logpdf(eps, eta, nu):
    """Log-density of the mean-0 / variance-1 skew Student-t."""
    m, s = skewt_moments_raw(eta, nu)
    return math.log(s) + skewt_logpdf_raw(m + s * np.asarray(eps, dtype=float), eta, nu)


def skewt_cdf(eps, eta, nu):
    """CDF of the mean-0 / variance-1 skew Student-t."""
    m, s = skewt_moments_raw(eta, nu)
    return skewt_cdf_raw(m + s * np.asarray(eps, dtype=float), eta, nu)


def skewt_quantile(p, eta, nu):
    """Quantile of the mean-0 / variance-1 skew Student-t."""
    m, s = skewt_moments_raw(eta, nu)
    return (skewt_quantile_raw(p, eta, nu) - m) / s


_VS_NODES, _VS_WEIGHTS = np.polynomial.legendre.leggauss(200)
_VS_THETA = 0.25 * math.pi * (_VS_NODES + 1.0)  # map to (0, pi/2)
_VS_W = 0.25 * math.pi * _VS_WEIGHTS


def varsigma(eta, nu):
    """Left-tail mass P(eps < 0) of the unstandardised skew-t, by quadrature.

    Used in the volatility stationarity constraint.  The integral over the
    negative half-line is evaluated with fixed Gauss-Legendre nodes after the
    substitution x = -tan(theta); see :func:`varsigma_closed` for the two
    closed-form candidates in circulation.
    """
    _check_shape_params(eta, nu)
    x = -np.tan(_VS_THETA)
    jac = 1.0 / np.cos(_VS_THETA) ** 2
    dens = np.exp(skewt_logpdf_raw(x, eta, nu))
    return float(np.sum(_VS_W * dens * jac))


def varsigma_closed(eta):
    """Closed-form candidates for the left-tail mass.

    Returns ``(1/(1+eta^2), eta/(1+eta^2))``: direct integration of the density
    gives the first; the second also circulates in print.  The quadrature value
    in :func:`varsigma` agrees with the first.
    """
    e2 = eta * eta
    return 1.0 / (1.0 + e2), eta / (1.0 + e2)


@dataclass(frozen=True)
class MarginalParams:
    """Parameters of the AR(1)-GJR-GARCH(1,1) skew-t marginal."""

    phi0: float
    phi1: float
    varpi: float
    theta1: float
    theta2: float
    theta3: float
    eta: float
    nu: float

    def validate(self):
        if not all(
            np.isfinite(v)
            for v in (self.phi0, self.phi1, self.varpi, self.theta1, self.theta2, self.theta3, self.eta, self.nu)
        ):
            raise ConstraintError("non-finite marginal parameter")
        if abs(self.phi1) >= 1:
            raise ConstraintError(f"|phi1| < 1 required, got {self.phi1}")
        if self.varpi <= 0:
            raise ConstraintError(f"varpi > 0 required, got {self.varpi}")
        if self.theta1 < 0:
            raise ConstraintError(f"theta1 >= 0 required, got {self.theta1}")
        if abs(self.theta2) >= 1:
            raise ConstraintError(f"|theta2| < 1 required, got {self.theta2}")
        if not 0 <= self.theta3 < 1:
            raise ConstraintError(f"theta3 in [0, 1) required, got {self.theta3}")
        _check_shape_params(self.eta, self.nu)
        sig = varsigma(self.eta, self.nu)
        if self.theta1 + self.theta2 * sig + self.theta3 >= 1:
            raise ConstraintError(
                "stationarity violated: theta1 + theta2*varsigma + theta3 = "
                f"{self.theta1 + self.theta2 * sig + self.theta3:.6f} >= 1"
            )
        return self

    def as_array(self):
        return np.array(
            [self.phi0, self.phi1, self.varpi, self.theta1, self.theta2, self.theta3, self.eta, self.nu]
        )


PARAM_NAMES = ("phi0", "phi1", "varpi", "theta1", "theta2", "theta3", "eta", "nu")


@dataclass
class MarginalFit:
    """Filtered marginal model: parameters, paths, PITs and log-likelihood."""

    params: MarginalParams
    mu: np.ndarray
    sigma: np.ndarray
    pit: np.ndarray
    loglik: float
    std_errors: dict | None = None
    returns: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.mu, self.sigma, self.pit):
            arr.flags.writeable = False

    @property
    def eps(self):
        return (self.returns - self.mu) / self.sigma

    def forecast_one_step(self):
        """One-step-ahead conditional mean and volatility."""
        p = self.params
        y_last = self.returns[-1]
        e = (y_last - self.mu[-1]) / self.sigma[-1]
        lev = p.theta2 * e * e if e <= 0 else 0.0
        sig2 = p.varpi + p.theta1 * e * e + lev + p.theta3 * self.sigma[-1] ** 2
        mu = p.phi0 + p.phi1 * y_last
        return mu, math.sqrt(sig2)


def _initial_state(returns, params):
    mu1 = params.phi0 / (1.0 - params.phi1)
    head = returns[: min(50, len(returns))]
    sig2_1 = float(np.var(head, ddof=1))
    if not sig2_1 > 0:
        raise ConstraintError("degenerate variance in the initialisation window")
    return mu1, sig2_1


def filter_marginal(returns, params):
    """Run the marginal recursions and return paths, PITs and log-likelihood.

    mu_1 is the unconditional AR mean and sigma^2_1 the sample variance of the
    first 50 observations; both recursions then follow the model equations.
    """
    y = np.ascontiguousarray(returns, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise DomainError("returns must be a 1-d sequence of length >= 2")
    if not np.all(np.isfinite(y)):
        raise DomainError("returns contain non-finite values")
    params.validate()
    mu1, sig2_1 = _initial_state(y, params)
    mu, sig2 = _kernels.gjr_filter(
        y, params.phi0, params.phi1, params.varpi,
        params.theta1, params.theta2, params.theta3, mu1, sig2_1,
    )
    sigma = np.sqrt(sig2)
    eps = (y - mu) / sigma
    loglik = float(np.sum(skewt_logpdf(eps, params.eta, params.nu)) - np.sum(np.log(sigma)))
    pit = np.clip(skewt_cdf(eps, params.eta, params.nu), PIT_CLAMP, 1.0 - PIT_CLAMP)
    return MarginalFit(params=params, mu=mu, sigma=sigma, pit=pit, loglik=loglik, returns=y)


# ---------------------------------------------------------------------------
# maximum likelihood
# ---------------------------------------------------------------------------


def _logistic_into(x, lo, hi):
    return lo + (hi - lo) / (1.0 + np.exp(-x))


def _logit_from(v, lo, hi):
    return -np.log((hi - lo) / (v - lo) - 1.0)


def _to_natural(theta):
    return np.array(
        [
            theta[0],
            math.tanh(theta[1]),
            math.exp(theta[2]),
            math.exp(theta[3]),
            math.tanh(theta[4]),
            _logistic_into(theta[5], 0.0, 1.0),
            _logistic_into(theta[6], *ETA_RANGE),
            _logistic_into(theta[7], *NU_RANGE),
        ]
    )


def _from_natural(p):
    return np.array(
        [
            p.phi0,
            np.arctanh(np.clip(p.phi1, -0.999, 0.999)),
            math.log(p.varpi),
            math.log(max(p.theta1, 1e-8)),
            np.arctanh(np.clip(p.theta2, -0.999, 0.999)),
            _logit_from(np.clip(p.theta3, 1e-6, 1 - 1e-6), 0.0, 1.0),
            _logit_from(np.clip(p.eta, ETA_RANGE[0] + 1e-6, ETA_RANGE[1] - 1e-6), *ETA_RANGE),
            _logit_from(np.clip(p.nu, NU_RANGE[0] + 1e-6, NU_RANGE[1] - 1e-6), *NU_RANGE),
        ]
    )


def _neg_loglik(theta, y, sig2_1):
    nat = _to_natural(theta)
    phi0, phi1, varpi, th1, th2, th3, eta, nu = nat
    sig = varsigma(eta, nu)
    stat = th1 + th2 * sig + th3
    penalty = 0.0
    if stat > 0.9999:
        penalty = 1e4 * (stat - 0.9999) ** 2
    mu1 = phi0 / (1.0 - phi1)
    mu, sig2 = _kernels.gjr_filter(y, phi0, phi1, varpi, th1, th2, th3, mu1, sig2_1)
    if not np.all(np.isfinite(sig2)) or np.any(sig2 <= 0):
        return 1e10
    sigma = np.sqrt(sig2)
    eps = (y - mu) / sigma
    ll = np.sum(skewt_logpdf(eps, eta, nu)) - np.sum(np.log(sigma))
    if not np.isfinite(ll):
        return 1e10
    return -ll / len(y) + penalty


def _start_values(y):
    v = float(np.var(y, ddof=1))
    r1 = float(np.corrcoef(y[:-1], y[1:])[0, 1]) if len(y) > 10 else 0.0
    return MarginalParams(
        phi0=float(np.mean(y)) * (1 - np.clip(r1, -0.5, 0.5)),
        phi1=float(np.clip(r1, -0.5, 0.5)),
        varpi=0.05 * v,
        theta1=0.05,
        theta2=0.10,
        theta3=0.80,
        eta=1.0,
        nu=8.0,
    )


def fit_marginal(returns, start=None, compute_se=True):
    """Maximum-likelihood fit of the marginal model.

    Quasi-Newton search over transformed (unconstrained) parameters, with the
    stationarity constraint enforced by a penalty plus a post-check.  Numeric
    standard errors are delta-method mapped back to the natural scale.
    """
    y = np.ascontiguousarray(returns, dtype=float)
    if y.size < 250:
        warnings.warn(f"only {y.size} observations; estimates may be unstable")
    if not np.all(np.isfinite(y)):
        raise DomainError("returns contain non-finite values")
    if float(np.std(y)) < 1e-12:
        raise ConstraintError("constant return series: variance is degenerate")

    head = y[: min(50, len(y))]
    sig2_1 = float(np.var(head, ddof=1))
    if not sig2_1 > 0:
        raise ConstraintError("degenerate variance in the initialisation window")

    start_params = start if start is not None else _start_values(y)
    x0 = _from_natural(start_params)
    obj = lambda th: _neg_loglik(th, y, sig2_1)

    res = optimize.minimize(obj, x0, method="BFGS", options={"gtol": 1e-7, "maxiter": 600})
    best = res.x if res.fun <= obj(x0) else x0
    polish = optimize.minimize(obj, best, method="Nelder-Mead",
                               options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000})
    if polish.fun < res.fun:
        best, fbest = polish.x, polish.fun
    else:
        best, fbest = res.x, res.fun

    if not np.isfinite(fbest) or fbest >= 1e9:
        raise ConvergenceError("marginal optimiser failed to find a usable iterate",
                               best=_to_natural(best))

    nat = _to_natural(best)
    params = MarginalParams(*nat)
    try:
        params.validate()
    except ConstraintError as exc:
        raise ConvergenceError(f"optimum violates constraints: {exc}", best=params) from exc

    fit = filter_marginal(y, params)
    if compute_se:
        fit.std_errors = _marginal_std_errors(obj, best, len(y))
    return fit


def _marginal_std_errors(obj, theta, T):
    hess = hessian(lambda th: obj(th) * T, theta)
    jac = jacobian(lambda th: _to_natural(th), theta)
    se, ok = se_from_hessian(hess, jac)
    return {
        name: (float(se[i]) if ok[i] else None) for i, name in enumerate(PARAM_NAMES)
    }
