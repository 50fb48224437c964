"""Numba kernels for the sequential recursions (GJR variance, per-family GAS filters).

Everything here is deliberately scalar-loop code: the recursions are not
vectorisable.  Python-level orchestration, input validation and the expensive
probability transforms (normal / Student-t quantiles of the PITs) live in the
calling modules; the kernels only see plain float64 arrays.
"""

import math

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# marginal model recursions
# ---------------------------------------------------------------------------


@njit(cache=True)
def gjr_filter(y, phi0, phi1, varpi, th1, th2, th3, mu1, sig2_1):
    """Conditional mean and variance paths of the AR(1)-GJR-GARCH(1,1) model.

    The variance recursion acts on the standardised innovation
    e = (y - mu) / sigma, with the leverage term active for e <= 0.
    """
    T = y.shape[0]
    mu = np.empty(T)
    sig2 = np.empty(T)
    mu[0] = mu1
    sig2[0] = sig2_1
    for t in range(1, T):
        mu[t] = phi0 + phi1 * y[t - 1]
        e = (y[t - 1] - mu[t - 1]) / math.sqrt(sig2[t - 1])
        e2 = e * e
        lev = th2 * e2 if e <= 0.0 else 0.0
        sig2[t] = varpi + th1 * e2 + lev + th3 * sig2[t - 1]
    return mu, sig2


@njit(cache=True)
def gjr_simulate(eps, phi0, phi1, varpi, th1, th2, th3, y_prev, sig2_1):
    """Generate returns from pre-drawn standardised innovations."""
    T = eps.shape[0]
    y = np.empty(T)
    mu = np.empty(T)
    sig2 = np.empty(T)
    sig2[0] = sig2_1
    mu[0] = phi0 + phi1 * y_prev
    y[0] = mu[0] + math.sqrt(sig2[0]) * eps[0]
    for t in range(1, T):
        e = eps[t - 1]
        e2 = e * e
        lev = th2 * e2 if e <= 0.0 else 0.0
        sig2[t] = varpi + th1 * e2 + lev + th3 * sig2[t - 1]
        mu[t] = phi0 + phi1 * y[t - 1]
        y[t] = mu[t] + math.sqrt(sig2[t]) * eps[t]
    return y, mu, sig2


# ---------------------------------------------------------------------------
# link mapping (modified logistic), shared by the GAS kernels
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _link_linear(x, lo, hi):
    k = lo + (hi - lo) / (1.0 + math.exp(-x))
    dk = (k - lo) * (hi - k) / (hi - lo)
    return k, dk


@njit(cache=True, inline="always")
def _link_log(x, llo, lhi):
    # logistic on the log scale: kappa = exp(modified logistic of x)
    ell = llo + (lhi - llo) / (1.0 + math.exp(-x))
    k = math.exp(ell)
    dk = k * (ell - llo) * (lhi - ell) / (lhi - llo)
    return k, dk


@njit(cache=True, inline="always")
def _scale_score(score, fim, dk, zeta):
    # zeta in {0, 1/2, 1}; the reparameterised information is fim * dk**2,
    # so zeta=1/2 collapses to score / sqrt(fim) (dk > 0 everywhere).
    if zeta == 0.0:
        return score * dk
    if zeta == 1.0:
        return score / (fim * dk)
    return score / math.sqrt(fim)


# ---------------------------------------------------------------------------
# per-family one-observation evaluations: log-density, score, Fisher info
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def gauss_step(x, y, r):
    omr = 1.0 - r * r
    s2 = x * x + y * y
    p = x * y
    logc = -0.5 * math.log(omr) - (r * r * s2 - 2.0 * r * p) / (2.0 * omr)
    score = r / omr + (p * (1.0 + r * r) - r * s2) / (omr * omr)
    fim = (1.0 + r * r) / (omr * omr)
    return logc, score, fim


@njit(cache=True, inline="always")
def studentt_step(x, y, r, nu, lognorm):
    omr = 1.0 - r * r
    q = x * x - 2.0 * r * x * y + y * y
    m = nu * omr
    logc = (
        lognorm
        - 0.5 * math.log(omr)
        - 0.5 * (nu + 2.0) * math.log1p(q / m)
        + 0.5 * (nu + 1.0) * (math.log1p(x * x / nu) + math.log1p(y * y / nu))
    )
    score = (nu + 2.0) * (nu * r + x * y) / (m + q) - (nu + 1.0) * r / omr
    fim = ((nu + 2.0) / (nu + 4.0) * (1.0 + 2.0 * r * r) - r * r) / (omr * omr)
    return logc, score, fim


@njit(cache=True, inline="always")
def clayton_logpdf(lu, lv, k):
    a = -k * lu
    b = -k * lv
    sm1 = math.expm1(a) + math.expm1(b)
    lns = math.log1p(sm1)
    return math.log1p(k) - (1.0 + k) * (lu + lv) - (2.0 + 1.0 / k) * lns


@njit(cache=True, inline="always")
def clayton_score(lu, lv, k):
    # analytic score suffers catastrophic cancellation as k -> 0; switch to a
    # central difference of the (stable) log-density there
    if k < 1e-3:
        h = 0.25 * k
        return (clayton_logpdf(lu, lv, k + h) - clayton_logpdf(lu, lv, k - h)) / (2.0 * h)
    a = -k * lu
    b = -k * lv
    ea = math.exp(a)
    eb = math.exp(b)
    s = ea + eb - 1.0
    lns = math.log(s)
    return (
        1.0 / (1.0 + k)
        - lu
        - lv
        + lns / (k * k)
        + (2.0 * k + 1.0) / k * (ea * lu + eb * lv) / s
    )


@njit(cache=True, inline="always")
def gumbel_logpdf_score(lu, lv, k):
    xt = -lu
    yt = -lv
    lxt = math.log(xt)
    lyt = math.log(yt)
    a = k * lxt
    b = k * lyt
    m = a if a > b else b
    lns = m + math.log(math.exp(a - m) + math.exp(b - m))
    w = math.exp(lns / k)
    s = math.exp(lns)
    sk = math.exp(a) * lxt + math.exp(b) * lyt
    logc = (
        -w
        + xt
        + yt
        + (k - 1.0) * (lxt + lyt)
        + (2.0 / k - 2.0) * lns
        + math.log1p((k - 1.0) / w)
    )
    wk = w * (-lns / (k * k) + sk / (k * s))
    score = (
        -wk
        + lxt
        + lyt
        - 2.0 / (k * k) * lns
        + (2.0 / k - 2.0) * sk / s
        + (w - (k - 1.0) * wk) / (w * (w + k - 1.0))
    )
    return logc, score


@njit(cache=True, inline="always")
def frank_logpdf(u, v, k):
    # c = k (1 - e^{-k}) e^{-k(u+v)} / D^2 with
    # D = (1 - e^{-k}) - (1 - e^{-ku})(1 - e^{-kv}); k(1-e^{-k}) > 0 for k != 0.
    # D is regrouped into two same-signed addends to avoid cancellation.
    g1 = -math.expm1(-k)
    d = -math.exp(-k * u) * math.expm1(-k * v) + math.exp(-k) * math.expm1(k * (1.0 - v))
    return math.log(k * g1) - k * (u + v) - 2.0 * math.log(abs(d))


@njit(cache=True, inline="always")
def frank_score(u, v, k):
    g1 = -math.expm1(-k)
    gu = -math.expm1(-k * u)
    gv = -math.expm1(-k * v)
    d = -math.exp(-k * u) * math.expm1(-k * v) + math.exp(-k) * math.expm1(k * (1.0 - v))
    dd = math.exp(-k) - u * math.exp(-k * u) * gv - v * math.exp(-k * v) * gu
    return 1.0 / k + math.exp(-k) / g1 - (u + v) - 2.0 * dd / d


@njit(cache=True, inline="always")
def plackett_logpdf(u, v, k):
    km1 = k - 1.0
    a = 1.0 + km1 * (u + v)
    d = a * a - 4.0 * k * km1 * u * v
    return math.log(k) + math.log(1.0 + km1 * (u + v - 2.0 * u * v)) - 1.5 * math.log(d)


@njit(cache=True, inline="always")
def plackett_score(u, v, k):
    km1 = k - 1.0
    w = u + v - 2.0 * u * v
    a = 1.0 + km1 * (u + v)
    d = a * a - 4.0 * k * km1 * u * v
    dd = 2.0 * a * (u + v) - 4.0 * (2.0 * k - 1.0) * u * v
    return 1.0 / k + w / (1.0 + km1 * w) - 1.5 * dd / d


@njit(cache=True, inline="always")
def pchip_eval(xs, coeffs, x):
    """Evaluate a piecewise-cubic interpolant (scipy PchipInterpolator layout)."""
    n = xs.shape[0]
    if x <= xs[0]:
        i = 0
    elif x >= xs[n - 1]:
        i = n - 2
    else:
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if xs[mid] <= x:
                lo = mid
            else:
                hi = mid
        i = lo
    t = x - xs[i]
    return ((coeffs[0, i] * t + coeffs[1, i]) * t + coeffs[2, i]) * t + coeffs[3, i]


# ---------------------------------------------------------------------------
# GAS filters (one per family); return the latent path including the
# one-step-ahead value at index T
# ---------------------------------------------------------------------------


@njit(cache=True)
def gas_filter_gaussian(x, y, omega, a, b, lo, hi, zeta):
    T = x.shape[0]
    kt = np.empty(T + 1)
    kap = np.empty(T)
    ss = np.empty(T)
    ll = np.empty(T)
    kt[0] = omega / (1.0 - b)
    for t in range(T):
        k, dk = _link_linear(kt[t], lo, hi)
        logc, score, fim = gauss_step(x[t], y[t], k)
        s = _scale_score(score, fim, dk, zeta)
        kap[t] = k
        ss[t] = s
        ll[t] = logc
        kt[t + 1] = omega + a * s + b * kt[t]
    return kt, kap, ss, ll


@njit(cache=True)
def gas_filter_studentt(x, y, nu, lognorm, omega, a, b, lo, hi, zeta):
    T = x.shape[0]
    kt = np.empty(T + 1)
    kap = np.empty(T)
    ss = np.empty(T)
    ll = np.empty(T)
    kt[0] = omega / (1.0 - b)
    for t in range(T):
        k, dk = _link_linear(kt[t], lo, hi)
        logc, score, fim = studentt_step(x[t], y[t], k, nu, lognorm)
        s = _scale_score(score, fim, dk, zeta)
        kap[t] = k
        ss[t] = s
        ll[t] = logc
        kt[t + 1] = omega + a * s + b * kt[t]
    return kt, kap, ss, ll


@njit(cache=True)
def gas_filter_clayton(lu, lv, omega, a, b, lo, hi, zeta, fim_xs, fim_c):
    T = lu.shape[0]
    kt = np.empty(T + 1)
    kap = np.empty(T)
    ss = np.empty(T)
    ll = np.empty(T)
    kt[0] = omega / (1.0 - b)
    for t in range(T):
        k, dk = _link_linear(kt[t], lo, hi)
        logc = clayton_logpdf(lu[t], lv[t], k)
        score = clayton_score(lu[t], lv[t], k)
        fim = pchip_eval(fim_xs, fim_c, k)
        s = _scale_score(score, fim, dk, zeta)
        kap[t] = k
        ss[t] = s
        ll[t] = logc
        kt[t + 1] = omega + a * s + b * kt[t]
    return kt, kap, ss, ll


@njit(cache=True)
def gas_filter_gumbel(lu, lv, omega, a, b, lo, hi, zeta, fim_xs, fim_c):
    T = lu.shape[0]
    kt = np.empty(T + 1)
    kap = np.empty(T)
    ss = np.empty(T)
    ll = np.empty(T)
    kt[0] = omega / (1.0 - b)
    for t in range(T):
        k, dk = _link_linear(kt[t], lo, hi)
        logc, score = gumbel_logpdf_score(lu[t], lv[t], k)
        fim = pchip_eval(fim_xs, fim_c, k)
        s = _scale_score(score, fim, dk, zeta)
        kap[t] = k
        ss[t] = s
        ll[t] = logc
        kt[t + 1] = omega + a * s + b * kt[t]
    return kt, kap, ss, ll


@njit(cache=True)
def gas_filter_frank(u, v, omega, a, b, lo, hi, zeta, dead, fim_xs, fim_c):
    # kappa within the dead zone around 0 is pushed to +-dead before evaluation;
    # the reported path keeps the unclamped mapped value
    T = u.shape[0]
    kt = np.empty(T + 1)
    kap = np.empty(T)
    ss = np.empty(T)
    ll = np.empty(T)
    kt[0] = omega / (1.0 - b)
    for t in range(T):
        k, dk = _link_linear(kt[t], lo, hi)
        ke = k
        if abs(ke) < dead:
            ke = dead if ke >= 0.0 else -dead
        logc = frank_logpdf(u[t], v[t], ke)
        score = frank_score(u[t], v[t], ke)
        fim = pchip_eval(fim_xs, fim_c, abs(ke))
        s = _scale_score(score, fim, dk, zeta)
        kap[t] = k
        ss[t] = s
        ll[t] = logc
        kt[t + 1] = omega + a * s + b * kt[t]
    return kt, kap, ss, ll


@njit(cache=True)
def gas_filter_plackett(u, v, omega, a, b, llo, lhi, zeta, fim_xs, fim_c):
    # log-scale link; the Fisher grid is indexed by log(kappa)
    T = u.shape[0]
    kt = np.empty(T + 1)
    kap = np.empty(T)
    ss = np.empty(T)
    ll = np.empty(T)
    kt[0] = omega / (1.0 - b)
    for t in range(T):
        k, dk = _link_log(kt[t], llo, lhi)
        logc = plackett_logpdf(u[t], v[t], k)
        score = plackett_score(u[t], v[t], k)
        # grid stores the log-parameter information E[score^2] * k^2
        fim = pchip_eval(fim_xs, fim_c, math.log(k)) / (k * k)
        s = _scale_score(score, fim, dk, zeta)
        kap[t] = k
        ss[t] = s
        ll[t] = logc
        kt[t + 1] = omega + a * s + b * kt[t]
    return kt, kap, ss, ll
