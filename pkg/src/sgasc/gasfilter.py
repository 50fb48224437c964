"""Score-driven (GAS) recursion for the dynamic copula parameter of one regime.

The latent parameter evolves on the unconstrained scale,

    kappa_t = lambda(ktilde_t),
    ktilde_t = omega + a * s_{t-1} + b * ktilde_{t-1},

started from the fixed point omega / (1 - b) of the score-free recursion.  The
scaled score s_t combines the score of the copula log-density in the natural
parameter with the link derivative and a power zeta of the inverse Fisher
information; in the reparameterised coordinates the information is
I(kappa) * lambda'(ktilde)^2, so

    zeta = 0   ->  s = score * lambda'
    zeta = 1/2 ->  s = score / sqrt(I(kappa))          (lambda' > 0 cancels)
    zeta = 1   ->  s = score / (I(kappa) * lambda').

zeta = 1/2 is the default scaling.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import _kernels, fim
from .copula import (
    CopulaSpec,
    copula_score,
    fisher_info,
    map_link,
    map_link_deriv,
    tail_dependence,
)
from .errors import DomainError, FilterDivergenceError, RootBracketError

__all__ = [
    "GasParams",
    "GasPath",
    "scaled_score",
    "gas_filter",
    "unconditional_init",
    "long_run",
    "half_life",
]


@dataclass(frozen=True)
class GasParams:
    """Per-regime GAS parameters: level, score loading, persistence, copula."""

    omega: float
    a: float
    b: float
    spec: CopulaSpec
    zeta: float = 0.5

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.omega, self.a, self.b)):
            raise DomainError("non-finite GAS parameter")
        if self.a < 0:
            raise DomainError(f"score loading must be >= 0, got {self.a}")
        if abs(self.b) >= 1:
            raise DomainError(f"|b| < 1 required for stationarity, got {self.b}")
        if self.zeta not in (0.0, 0.5, 1.0):
            raise DomainError(f"zeta must be one of 0, 1/2, 1, got {self.zeta}")


@dataclass
class GasPath:
    """Filtered GAS path: latent and natural parameters, scores, log-densities."""

    kappa_tilde: np.ndarray
    kappa: np.ndarray
    scaled_scores: np.ndarray
    logliks: np.ndarray
    kappa_tilde_next: float

    def __post_init__(self):
        for arr in (self.kappa_tilde, self.kappa, self.scaled_scores, self.logliks):
            arr.flags.writeable = False

    @property
    def loglik(self):
        return float(np.sum(self.logliks))


def unconditional_init(omega, b):
    """Fixed point omega / (1 - b) of the score-free recursion."""
    if abs(b) >= 1:
        raise DomainError(f"|b| < 1 required, got {b}")
    return omega / (1.0 - b)


def scaled_score(spec, u, v, kappa_tilde, zeta=0.5):
    """Scaled score of one observation at latent parameter kappa_tilde."""
    if zeta not in (0.0, 0.5, 1.0):
        raise DomainError(f"zeta must be one of 0, 1/2, 1, got {zeta}")
    kappa = map_link(kappa_tilde, spec.link)
    kappa = _effective_kappa(spec, kappa)
    score = copula_score(spec, u, v, kappa)
    if zeta == 0.0:
        return score * map_link_deriv(kappa_tilde, spec.link)
    info = fisher_info(spec, kappa)
    if np.any(np.asarray(info) <= 0):
        raise FilterDivergenceError("non-positive Fisher information")
    if zeta == 0.5:
        return score / np.sqrt(info)
    return score / (info * map_link_deriv(kappa_tilde, spec.link))


def _effective_kappa(spec, kappa):
    if spec.family == "frank":
        from .copula import _frank_effective

        return _frank_effective(kappa)
    return kappa


def _prepared_inputs(pits, spec):
    u = np.ascontiguousarray(pits[:, 0], dtype=float)
    v = np.ascontiguousarray(pits[:, 1], dtype=float)
    if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
        raise DomainError("PIT pairs must lie strictly inside (0, 1)^2")
    fam = spec.family
    if fam == "gaussian":
        return (special.ndtri(u), special.ndtri(v))
    if fam == "studentt":
        nu = spec.nu
        lognorm = (
            special.gammaln((nu + 2.0) / 2.0)
            + special.gammaln(nu / 2.0)
            - 2.0 * special.gammaln((nu + 1.0) / 2.0)
        )
        return (special.stdtrit(nu, u), special.stdtrit(nu, v), nu, lognorm)
    if fam in ("clayton", "gumbel"):
        return (np.log(u), np.log(v))
    return (u, v)


def gas_filter(pits, params):
    """Run the GAS recursion over a (T, 2) array of PIT pairs."""
    pits = np.asarray(pits, dtype=float)
    if pits.ndim != 2 or pits.shape[1] != 2 or pits.shape[0] < 1:
        raise DomainError("pits must be a (T, 2) array with T >= 1")
    spec = params.spec
    fam = spec.family
    link = spec.link
    zeta = float(params.zeta)
    prep = _prepared_inputs(pits, spec)
    args = (params.omega, params.a, params.b)
    if fam == "gaussian":
        kt, kap, ss, ll = _kernels.gas_filter_gaussian(
            *prep, *args, link.lower, link.upper, zeta
        )
    elif fam == "studentt":
        x, y, nu, lognorm = prep
        kt, kap, ss, ll = _kernels.gas_filter_studentt(
            x, y, nu, lognorm, *args, link.lower, link.upper, zeta
        )
    elif fam == "clayton":
        xs, cs = fim.kernel_arrays(fam)
        kt, kap, ss, ll = _kernels.gas_filter_clayton(
            *prep, *args, link.lower, link.upper, zeta, xs, cs
        )
    elif fam == "gumbel":
        xs, cs = fim.kernel_arrays(fam)
        kt, kap, ss, ll = _kernels.gas_filter_gumbel(
            *prep, *args, link.lower, link.upper, zeta, xs, cs
        )
    elif fam == "frank":
        from .copula import FRANK_DEAD_ZONE

        xs, cs = fim.kernel_arrays(fam)
        kt, kap, ss, ll = _kernels.gas_filter_frank(
            *prep, *args, link.lower, link.upper, zeta, FRANK_DEAD_ZONE, xs, cs
        )
    else:
        xs, cs = fim.kernel_arrays(fam)
        kt, kap, ss, ll = _kernels.gas_filter_plackett(
            *prep, *args, math.log(link.lower), math.log(link.upper), zeta, xs, cs
        )
    if not (np.all(np.isfinite(kt)) and np.all(np.isfinite(ll))):
        bad = np.flatnonzero(~(np.isfinite(kt[:-1]) & np.isfinite(ll)))
        t = int(bad[0]) if bad.size else len(ll) - 1
        raise FilterDivergenceError(
            f"GAS filter produced a non-finite value at t={t}", t=t
        )
    return GasPath(
        kappa_tilde=kt[:-1],
        kappa=kap,
        scaled_scores=ss,
        logliks=ll,
        kappa_tilde_next=float(kt[-1]),
    )


def long_run(params):
    """Long-run natural parameter lambda(omega / (1 - b)) and its tail dependence."""
    bar = map_link(unconditional_init(params.omega, params.b), params.spec.link)
    return float(bar), tail_dependence(params.spec, float(bar))


def half_life(params, variant="geometric"):
    """Half-life of the dependence dynamics.

    geometric: ln(1/2) / ln(b), the latent AR decay half-life.  The reported
    alternative ("mapped") measures the time for the natural parameter to fall
    to half its long-run value along the score-free path
    kappa(h) = lambda(lambda^{-1}(kappa_bar) * b^h), solved by bracketed
    root-finding; it reproduces published state-identification tables.
    """
    b = params.b
    if not 0 < b < 1:
        raise DomainError(f"half-life requires 0 < b < 1, got {b}")
    if variant == "geometric":
        return math.log(0.5) / math.log(b)
    if variant not in ("paperEquation", "mapped"):
        raise DomainError(f"unknown half-life variant {variant!r}")
    xbar = unconditional_init(params.omega, params.b)
    rbar = float(map_link(xbar, params.spec.link))
    target = rbar / 2.0

    def gap(h):
        return float(map_link(xbar * b**h, params.spec.link)) - target

    lo, hi = 1e-9, 1e9
    glo, ghi = gap(lo), gap(hi)
    if glo == 0.0 or glo * ghi > 0:
        raise RootBracketError(
            f"no sign change for the half-life equation on [{lo}, {hi}]"
        )
    from scipy.optimize import brentq

    return float(brentq(gap, lo, hi, xtol=1e-10, rtol=1e-12))
