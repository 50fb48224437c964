"""Bivariate copula families with score-driven dynamics in mind.

Six families: gaussian, studentt, clayton, gumbel, frank, plackett.  For each
one this module provides the log-density, CDF, score in the dynamic parameter
kappa, Fisher information, conditional CDF (h-function) and its inverse,
exact sampling, tail-dependence coefficients and (where a closed form exists)
Kendall's tau.

Scores are analytic for gaussian, studentt, clayton and gumbel and validated
against finite differences; frank and plackett use fourth-order central
differences of the log-density.  Fisher information is closed form for the
elliptical families,

    gaussian:  I(rho) = (1 + rho^2) / (1 - rho^2)^2
    studentt:  I(rho) = [ (nu+2)/(nu+4) (1 + 2 rho^2) - rho^2 ] / (1 - rho^2)^2

and interpolated from a persisted simulation grid for the others (see
:mod:`sgasc.fim`).

The dynamic parameter is driven through a modified logistic link
lambda(x) = lo + (hi - lo) / (1 + exp(-x)); plackett uses the same link on the
log scale.  Frank's parameter space excludes a dead zone around 0 where the
density formula degenerates; evaluations inside it are clamped to the nearest
edge.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, NotAvailable

__all__ = [
    "FAMILIES",
    "LinkSpec",
    "CopulaSpec",
    "default_link",
    "make_spec",
    "map_link",
    "map_link_inverse",
    "map_link_deriv",
    "copula_logpdf",
    "copula_cdf",
    "copula_score",
    "copula_hfunc",
    "copula_hinv",
    "copula_sample",
    "fisher_info",
    "tail_dependence",
    "kendall_tau_analytic",
    "FRANK_DEAD_ZONE",
]

FAMILIES = ("gaussian", "studentt", "clayton", "gumbel", "frank", "plackett")

FRANK_DEAD_ZONE = 0.01

_LINK_BOUNDS = {
    "gaussian": (-1.0, 1.0, "linear"),
    "studentt": (-1.0, 1.0, "linear"),
    "clayton": (0.0, 17.0, "linear"),
    "gumbel": (1.0, 17.0, "linear"),
    "frank": (-30.0, 30.0, "linear"),
    "plackett": (0.001, 100.0, "log"),
}


@dataclass(frozen=True)
class LinkSpec:
    """Modified logistic mapping onto (lower, upper); optionally on log scale."""

    lower: float
    upper: float
    scale: str = "linear"

    def __post_init__(self):
        if not self.lower < self.upper:
            raise DomainError(f"link bounds must satisfy lower < upper, got {self}")
        if self.scale not in ("linear", "log"):
            raise DomainError(f"unknown link scale {self.scale!r}")
        if self.scale == "log" and self.lower <= 0:
            raise DomainError("log-scale link requires positive bounds")


@dataclass(frozen=True)
class CopulaSpec:
    """Copula family, static shape parameters and the link for kappa."""

    family: str
    psi: tuple = ()
    link: LinkSpec = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown copula family {self.family!r}")
        if self.link is None:
            object.__setattr__(self, "link", default_link(self.family))
        if self.family == "studentt":
            if len(self.psi) != 1:
                raise DomainError("studentt requires psi = (nu,)")
            nu = self.psi[0]
            if not 2.0 < nu <= 150.0:
                raise DomainError(f"studentt nu must lie in (2, 150], got {nu}")
        elif self.psi:
            raise DomainError(f"{self.family} takes no static shape parameters")

    @property
    def nu(self):
        return self.psi[0] if self.family == "studentt" else None

    def with_nu(self, nu):
        return CopulaSpec("studentt", (float(nu),), self.link)


def default_link(family):
    lo, hi, scale = _LINK_BOUNDS[family]
    return LinkSpec(lo, hi, scale)


def _spec_unchecked(family, psi=(), link=None):
    # bypasses the psi domain check; limit experiments only (e.g. nu -> inf)
    spec = CopulaSpec.__new__(CopulaSpec)
    object.__setattr__(spec, "family", family)
    object.__setattr__(spec, "psi", tuple(psi))
    object.__setattr__(spec, "link", link if link is not None else default_link(family))
    return spec


def make_spec(family, nu=None, link=None):
    """Convenience constructor for a CopulaSpec."""
    psi = (float(nu),) if family == "studentt" else ()
    if family == "studentt" and nu is None:
        raise DomainError("studentt requires a degrees-of-freedom value")
    return CopulaSpec(family, psi, link)


# ---------------------------------------------------------------------------
# link mapping
# ---------------------------------------------------------------------------


def map_link(x, link):
    """lambda(x) = lower + (upper - lower) / (1 + exp(-x)); log scale composes exp."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("link argument must be finite")
    if link.scale == "linear":
        lo, hi = link.lower, link.upper
        return lo + (hi - lo) * special.expit(x)
    llo, lhi = math.log(link.lower), math.log(link.upper)
    return np.exp(llo + (lhi - llo) * special.expit(x))


def map_link_inverse(value, link):
    value = np.asarray(value, dtype=float)
    if np.any(value <= link.lower) or np.any(value >= link.upper):
        raise DomainError(
            f"inverse link requires values strictly inside ({link.lower}, {link.upper})"
        )
    if link.scale == "linear":
        p = (value - link.lower) / (link.upper - link.lower)
    else:
        p = (np.log(value) - math.log(link.lower)) / (
            math.log(link.upper) - math.log(link.lower)
        )
    return special.logit(p)


def map_link_deriv(x, link):
    x = np.asarray(x, dtype=float)
    if link.scale == "linear":
        k = map_link(x, link)
        return (k - link.lower) * (link.upper - k) / (link.upper - link.lower)
    llo, lhi = math.log(link.lower), math.log(link.upper)
    ell = llo + (lhi - llo) * special.expit(x)
    return np.exp(ell) * (ell - llo) * (lhi - ell) / (lhi - llo)


# ---------------------------------------------------------------------------
# family domains and input checks
# ---------------------------------------------------------------------------


def _check_kappa(spec, kappa):
    k = np.asarray(kappa, dtype=float)
    if not np.all(np.isfinite(k)):
        raise DomainError("kappa must be finite")
    fam = spec.family
    if fam in ("gaussian", "studentt"):
        if np.any(np.abs(k) >= 1):
            raise DomainError(f"{fam} correlation must lie in (-1, 1), got {kappa}")
    elif fam == "clayton":
        if np.any(k <= 0):
            raise DomainError(f"clayton kappa must be positive, got {kappa}")
    elif fam == "gumbel":
        if np.any(k < 1):
            raise DomainError(f"gumbel kappa must be >= 1, got {kappa}")
    elif fam == "frank":
        if np.any(k == 0):
            raise DomainError("frank kappa must be nonzero")
    elif fam == "plackett":
        if np.any(k <= 0):
            raise DomainError(f"plackett kappa must be positive, got {kappa}")
    return k


def _frank_effective(kappa):
    k = np.asarray(kappa, dtype=float)
    small = np.abs(k) < FRANK_DEAD_ZONE
    return np.where(small, np.where(k >= 0, FRANK_DEAD_ZONE, -FRANK_DEAD_ZONE), k)


def _check_uv_open(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
        raise DomainError("PITs must lie strictly inside (0, 1)")
    return u, v


# ---------------------------------------------------------------------------
# log-densities
# ---------------------------------------------------------------------------


def copula_logpdf(spec, u, v, kappa):
    """Log copula density log c(u, v; kappa, psi)."""
    u, v = _check_uv_open(u, v)
    k = _check_kappa(spec, kappa)
    fam = spec.family
    if fam == "gaussian":
        x = special.ndtri(u)
        y = special.ndtri(v)
        omr = 1.0 - k * k
        return -0.5 * np.log(omr) - (k * k * (x * x + y * y) - 2.0 * k * x * y) / (2.0 * omr)
    if fam == "studentt":
        nu = spec.nu
        x = special.stdtrit(nu, u)
        y = special.stdtrit(nu, v)
        omr = 1.0 - k * k
        q = x * x - 2.0 * k * x * y + y * y
        lognorm = (
            special.gammaln((nu + 2.0) / 2.0)
            + special.gammaln(nu / 2.0)
            - 2.0 * special.gammaln((nu + 1.0) / 2.0)
        )
        return (
            lognorm
            - 0.5 * np.log(omr)
            - 0.5 * (nu + 2.0) * np.log1p(q / (nu * omr))
            + 0.5 * (nu + 1.0) * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
        )
    if fam == "clayton":
        lu = np.log(u)
        lv = np.log(v)
        sm1 = np.expm1(-k * lu) + np.expm1(-k * lv)
        lns = np.log1p(sm1)
        return np.log1p(k) - (1.0 + k) * (lu + lv) - (2.0 + 1.0 / k) * lns
    if fam == "gumbel":
        xt = -np.log(u)
        yt = -np.log(v)
        lxt = np.log(xt)
        lyt = np.log(yt)
        lns = np.logaddexp(k * lxt, k * lyt)
        w = np.exp(lns / k)
        return (
            -w
            + xt
            + yt
            + (k - 1.0) * (lxt + lyt)
            + (2.0 / k - 2.0) * lns
            + np.log1p((k - 1.0) / w)
        )
    if fam == "frank":
        g1 = -np.expm1(-k)
        # cancellation-free regrouping of (1-e^-k) - (1-e^-ku)(1-e^-kv):
        # both addends share the sign of k
        d = -np.exp(-k * u) * np.expm1(-k * v) + np.exp(-k) * np.expm1(k * (1.0 - v))
        return np.log(k * g1) - k * (u + v) - 2.0 * np.log(np.abs(d))
    # plackett
    km1 = k - 1.0
    a = 1.0 + km1 * (u + v)
    d = a * a - 4.0 * k * km1 * u * v
    return np.log(k) + np.log1p(km1 * (u + v - 2.0 * u * v)) - 1.5 * np.log(d)


# ---------------------------------------------------------------------------
# CDFs
# ---------------------------------------------------------------------------


def copula_cdf(spec, u, v, kappa):
    """Copula CDF C(u, v; kappa, psi); grounded with uniform margins.

    kappa is a scalar; u and v may be broadcastable arrays.
    """
    k = float(_check_kappa(spec, kappa))
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u < 0) | (u > 1) | (v < 0) | (v > 1)):
        raise DomainError("CDF arguments must lie in [0, 1]")
    scalar = u.ndim == 0 and v.ndim == 0
    u, v = np.broadcast_arrays(np.atleast_1d(u), np.atleast_1d(v))
    fam = spec.family
    out = _cdf_dispatch(fam, spec, u.astype(float), v.astype(float), k)
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def _cdf_dispatch(fam, spec, u, v, k):
    lo_mask = (u <= 0) | (v <= 0)
    if fam == "gaussian":
        from ._bvcdf import norm_bicdf

        with np.errstate(divide="ignore"):
            x = special.ndtri(u)
            y = special.ndtri(v)
        out = norm_bicdf(x, y, float(k))
        out = np.where(u >= 1, v, np.where(v >= 1, u, out))
        return np.where(lo_mask, 0.0, out)
    if fam == "studentt":
        from ._bvcdf import t_copula_cdf

        return t_copula_cdf(u, v, float(k), spec.nu)
    if fam == "clayton":
        with np.errstate(divide="ignore", invalid="ignore"):
            lu = np.log(u)
            lv = np.log(v)
            sm1 = np.expm1(-k * lu) + np.expm1(-k * lv)
            out = np.exp(-np.log1p(sm1) / k)
        return np.where(lo_mask, 0.0, out)
    if fam == "gumbel":
        with np.errstate(divide="ignore", invalid="ignore"):
            lxt = np.log(-np.log(u))
            lyt = np.log(-np.log(v))
            w = np.exp(np.logaddexp(k * lxt, k * lyt) / k)
            out = np.exp(-w)
        out = np.where(u >= 1, v, np.where(v >= 1, u, out))
        return np.where(lo_mask, 0.0, out)
    if fam == "frank":
        gu = np.expm1(-k * u)
        gv = np.expm1(-k * v)
        g1 = np.expm1(-k)
        out = -np.log1p(gu * gv / g1) / k
        return np.where(lo_mask, 0.0, out)
    # plackett; series expansion avoids the 0/0 at kappa = 1
    km1 = k - 1.0
    if abs(km1) < 1e-6:
        out = u * v * (1.0 + km1 * (1.0 - u) * (1.0 - v))
    else:
        a = 1.0 + km1 * (u + v)
        d = a * a - 4.0 * k * km1 * u * v
        out = (a - np.sqrt(np.maximum(d, 0.0))) / (2.0 * km1)
    return np.where(lo_mask, 0.0, out)


# ---------------------------------------------------------------------------
# scores
# ---------------------------------------------------------------------------


def copula_score(spec, u, v, kappa):
    """Score d log c / d kappa at (u, v).

    Analytic for gaussian, studentt, clayton (central difference of the stable
    log-density below kappa=1e-3) and gumbel; fourth-order central differences
    for frank and plackett.
    """
    u, v = _check_uv_open(u, v)
    k = _check_kappa(spec, kappa)
    fam = spec.family
    if fam == "gaussian":
        x = special.ndtri(u)
        y = special.ndtri(v)
        omr = 1.0 - k * k
        return k / omr + (x * y * (1.0 + k * k) - k * (x * x + y * y)) / (omr * omr)
    if fam == "studentt":
        nu = spec.nu
        x = special.stdtrit(nu, u)
        y = special.stdtrit(nu, v)
        omr = 1.0 - k * k
        q = x * x - 2.0 * k * x * y + y * y
        return (nu + 2.0) * (nu * k + x * y) / (nu * omr + q) - (nu + 1.0) * k / omr
    if fam == "clayton":
        return _clayton_score(u, v, k)
    if fam == "gumbel":
        return _gumbel_score(u, v, k)
    if fam == "frank":
        g1 = -np.expm1(-k)
        gu = -np.expm1(-k * u)
        gv = -np.expm1(-k * v)
        d = -np.exp(-k * u) * np.expm1(-k * v) + np.exp(-k) * np.expm1(k * (1.0 - v))
        dd = np.exp(-k) - u * np.exp(-k * u) * gv - v * np.exp(-k * v) * gu
        return 1.0 / k + np.exp(-k) / g1 - (u + v) - 2.0 * dd / d
    # plackett
    km1 = k - 1.0
    w = u + v - 2.0 * u * v
    a = 1.0 + km1 * (u + v)
    d = a * a - 4.0 * k * km1 * u * v
    dd = 2.0 * a * (u + v) - 4.0 * (2.0 * k - 1.0) * u * v
    return 1.0 / k + w / (1.0 + km1 * w) - 1.5 * dd / d


def _clayton_score(u, v, k):
    k = np.asarray(k, dtype=float)
    lu = np.log(u)
    lv = np.log(v)
    small = k < 1e-3
    ks = np.where(small, 1.0, k)  # placeholder to keep the analytic branch finite
    a = np.exp(-ks * lu)
    b = np.exp(-ks * lv)
    s = a + b - 1.0
    analytic = (
        1.0 / (1.0 + ks)
        - lu
        - lv
        + np.log(s) / (ks * ks)
        + (2.0 * ks + 1.0) / ks * (a * lu + b * lv) / s
    )
    if np.any(small):
        def logpdf(kk):
            sm1 = np.expm1(-kk * lu) + np.expm1(-kk * lv)
            return np.log1p(kk) - (1.0 + kk) * (lu + lv) - (2.0 + 1.0 / kk) * np.log1p(sm1)

        kk = np.where(small, k, 1.0)
        h = 0.25 * kk
        fd = (logpdf(kk + h) - logpdf(kk - h)) / (2.0 * h)
        return np.where(small, fd, analytic)
    return analytic


def _gumbel_score(u, v, k):
    xt = -np.log(u)
    yt = -np.log(v)
    lxt = np.log(xt)
    lyt = np.log(yt)
    a = k * lxt
    b = k * lyt
    lns = np.logaddexp(a, b)
    s = np.exp(lns)
    w = np.exp(lns / k)
    sk = np.exp(a) * lxt + np.exp(b) * lyt
    wk = w * (-lns / (k * k) + sk / (k * s))
    return (
        -wk
        + lxt
        + lyt
        - 2.0 / (k * k) * lns
        + (2.0 / k - 2.0) * sk / s
        + (w - (k - 1.0) * wk) / (w * (w + k - 1.0))
    )


# ---------------------------------------------------------------------------
# conditional CDFs (h-functions), inverses and sampling
# ---------------------------------------------------------------------------


def copula_hfunc(spec, u, v, kappa):
    """Conditional CDF h(v | u) = P(V <= v | U = u)."""
    u, v = _check_uv_open(u, v)
    k = _check_kappa(spec, kappa)
    fam = spec.family
    if fam == "gaussian":
        x = special.ndtri(u)
        y = special.ndtri(v)
        return special.ndtr((y - k * x) / np.sqrt(1.0 - k * k))
    if fam == "studentt":
        nu = spec.nu
        x = special.stdtrit(nu, u)
        y = special.stdtrit(nu, v)
        arg = (y - k * x) * np.sqrt((nu + 1.0) / ((nu + x * x) * (1.0 - k * k)))
        return special.stdtr(nu + 1.0, arg)
    if fam == "clayton":
        lu = np.log(u)
        lv = np.log(v)
        lns = np.log1p(np.expm1(-k * lu) + np.expm1(-k * lv))
        return np.exp(-(1.0 + k) * lu - (1.0 / k + 1.0) * lns)
    if fam == "gumbel":
        xt = -np.log(u)
        yt = -np.log(v)
        lxt = np.log(xt)
        lns = np.logaddexp(k * lxt, k * np.log(yt))
        w = np.exp(lns / k)
        return np.exp(-w + (1.0 / k - 1.0) * lns + (k - 1.0) * lxt + xt)
    if fam == "frank":
        g1 = np.expm1(-k)
        gu = np.expm1(-k * u)
        gv = np.expm1(-k * v)
        return np.exp(-k * u) * gv / (g1 + gu * gv)
    # plackett
    km1 = k - 1.0
    a = 1.0 + km1 * (u + v)
    d = a * a - 4.0 * k * km1 * u * v
    return 0.5 * (1.0 - (a - 2.0 * k * v) / np.sqrt(d))


def copula_hinv(spec, u, q, kappa):
    """Inverse of the h-function in v: returns v with h(v | u) = q."""
    u = np.asarray(u, dtype=float)
    q = np.asarray(q, dtype=float)
    k = _check_kappa(spec, kappa)
    fam = spec.family
    if fam == "gaussian":
        x = special.ndtri(u)
        y = k * x + np.sqrt(1.0 - k * k) * special.ndtri(q)
        return special.ndtr(y)
    if fam == "studentt":
        nu = spec.nu
        x = special.stdtrit(nu, u)
        qt = special.stdtrit(nu + 1.0, q)
        y = k * x + qt * np.sqrt((nu + x * x) * (1.0 - k * k) / (nu + 1.0))
        return special.stdtr(nu, y)
    if fam == "clayton":
        lu = np.log(u)
        t = np.expm1(-k / (k + 1.0) * np.log(q))
        return np.exp(-np.log1p(t * np.exp(-k * lu)) / k)
    if fam == "frank":
        g1 = np.expm1(-k)
        gu = np.expm1(-k * u)
        t = q * g1 / (np.exp(-k * u) - q * gu)
        return -np.log1p(t) / k
    # gumbel, plackett: monotone bisection on the h-function
    return _hinv_bisect(spec, u, q, kappa)


def _hinv_bisect(spec, u, q, kappa, iters=80):
    u = np.atleast_1d(np.asarray(u, dtype=float))
    q = np.atleast_1d(np.asarray(q, dtype=float))
    u, q = np.broadcast_arrays(u, q)
    lo = np.full(u.shape, 1e-12)
    hi = np.full(u.shape, 1.0 - 1e-12)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        too_low = copula_hfunc(spec, u, mid, kappa) < q
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
    return 0.5 * (lo + hi)


def copula_sample(spec, kappa, n, rng):
    """Draw n pairs from the copula at kappa.

    Elliptical families use correlated latent draws mapped through their own
    margins; the others invert the conditional h-function.
    """
    k = float(_check_kappa(spec, kappa))
    fam = spec.family
    if fam == "gaussian":
        z = rng.standard_normal((n, 2))
        z2 = k * z[:, 0] + math.sqrt(1.0 - k * k) * z[:, 1]
        return special.ndtr(z[:, 0]), special.ndtr(z2)
    if fam == "studentt":
        nu = spec.nu
        z = rng.standard_normal((n, 2))
        z2 = k * z[:, 0] + math.sqrt(1.0 - k * k) * z[:, 1]
        w = np.sqrt(rng.chisquare(nu, n) / nu)
        return special.stdtr(nu, z[:, 0] / w), special.stdtr(nu, z2 / w)
    u = rng.uniform(size=n)
    q = rng.uniform(size=n)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    q = np.clip(q, 1e-12, 1 - 1e-12)
    v = copula_hinv(spec, u, q, k)
    return u, np.clip(v, 1e-12, 1 - 1e-12)


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------


def fisher_info(spec, kappa):
    """Fisher information of the scalar dynamic parameter, E[score^2]."""
    k = _check_kappa(spec, kappa)
    fam = spec.family
    if fam == "gaussian":
        omr = 1.0 - k * k
        return (1.0 + k * k) / (omr * omr)
    if fam == "studentt":
        nu = spec.nu
        omr = 1.0 - k * k
        return ((nu + 2.0) / (nu + 4.0) * (1.0 + 2.0 * k * k) - k * k) / (omr * omr)
    from . import fim

    return fim.interpolate(fam, k)


def tail_dependence(spec, kappa):
    """(lower, upper) tail-dependence coefficients at kappa."""
    k = float(_check_kappa(spec, kappa))
    fam = spec.family
    if fam == "studentt":
        nu = spec.nu
        lam = 2.0 * special.stdtr(nu + 1.0, -math.sqrt((nu + 1.0) * (1.0 - k) / (1.0 + k)))
        return lam, lam
    if fam == "clayton":
        return 2.0 ** (-1.0 / k), 0.0
    if fam == "gumbel":
        return 0.0, 2.0 - 2.0 ** (1.0 / k)
    return 0.0, 0.0


def kendall_tau_analytic(spec, kappa):
    """Closed-form Kendall's tau; raises NotAvailable for frank/plackett."""
    k = float(_check_kappa(spec, kappa))
    fam = spec.family
    if fam in ("gaussian", "studentt"):
        return 2.0 / math.pi * math.asin(k)
    if fam == "clayton":
        return k / (k + 2.0)
    if fam == "gumbel":
        return 1.0 - 1.0 / k
    raise NotAvailable(f"no closed-form Kendall tau for {fam}")
