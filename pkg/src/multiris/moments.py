"""Method-of-moments engine for the end-to-end channel magnitudes.

Raw moments flow bottom-up through the chain: single Nakagami links,
per-element double-Nakagami products, per-surface element sums, then
either the all-surface sum (every surface reflecting) or the best-surface
maximum (only the strongest reflecting).  Two-moment fits map any stage
onto gamma or log-normal laws; fourth moments feed the fits of the
squared magnitudes used by the capacity formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp
from scipy.integrate import quad

from .distributions import Gamma, GeneralizedGamma, LogNormal
from .scenario import NakagamiParams, Topology
from .special import SeriesControl, SeriesTruncationError, log_lauricella_fa_many

__all__ = [
    "MomentVector",
    "DegenerateMomentsError",
    "nakagami_moment",
    "nakagami_moments",
    "double_nakagami_moment",
    "double_nakagami_moments",
    "sum_moments",
    "fit_gamma",
    "fit_lognormal",
    "fit_gamma_from_vector",
    "fit_lognormal_from_vector",
    "fit_lognormal_squared",
    "gamma_to_gen_gamma_sq",
    "gamma_tail_lognormal",
    "element_gamma_fit",
    "surface_gamma_fits",
    "mv_moment",
    "mv_moments",
    "r_moments",
    "z_moments",
    "ChannelFits",
    "fit_channels",
]


class DegenerateMomentsError(ValueError):
    """Second moment does not exceed the squared first moment."""


@dataclass(frozen=True)
class MomentVector:
    """Raw moments mu(0..K) of a nonnegative random variable; mu[0] = 1."""

    mu: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.mu, dtype=float)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("need at least orders 0 and 1")
        if not np.isclose(arr[0], 1.0):
            raise ValueError("zeroth moment must be 1")
        if np.any(arr <= 0):
            raise ValueError("raw moments of a positive variable must be positive")
        object.__setattr__(self, "mu", arr)

    @classmethod
    def from_orders(cls, moments) -> "MomentVector":
        """Build from moments mu(1..K)."""
        return cls(np.concatenate(([1.0], np.asarray(moments, dtype=float))))

    @property
    def order(self) -> int:
        return self.mu.size - 1

    def __getitem__(self, k: int) -> float:
        return float(self.mu[k])

    def log_convexity_slack(self) -> float:
        """Most negative value of mu[k-1]*mu[k+1] - mu[k]^2, relative.

        Genuine moment sequences are log-convex, so this is >= 0 up to
        rounding; used as a structural sanity check.
        """
        mu = self.mu
        if mu.size < 3:
            return 0.0
        gaps = mu[:-2] * mu[2:] - mu[1:-1] ** 2
        return float(np.min(gaps / (mu[1:-1] ** 2)))


def nakagami_moment(p: NakagamiParams, k: int) -> float:
    """k-th raw moment of a Nakagami magnitude."""
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if k == 0:
        return 1.0
    return float(
        np.exp(
            sp.gammaln(p.m + 0.5 * k)
            - sp.gammaln(p.m)
            - 0.5 * k * (np.log(p.m) - np.log(p.omega))
        )
    )


def nakagami_moments(p: NakagamiParams, orders: int) -> MomentVector:
    return MomentVector.from_orders([nakagami_moment(p, k) for k in range(1, orders + 1)])


def double_nakagami_moment(
    h: NakagamiParams, g: NakagamiParams, kappa: float, k: int
) -> float:
    """k-th raw moment of the per-element cascade kappa * h * g."""
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if k == 0:
        return 1.0
    lam = np.sqrt(h.m * g.m / (kappa**2 * h.omega * g.omega))
    return float(
        np.exp(
            sp.gammaln(h.m + 0.5 * k)
            + sp.gammaln(g.m + 0.5 * k)
            - sp.gammaln(h.m)
            - sp.gammaln(g.m)
            - k * np.log(lam)
        )
    )


def double_nakagami_moments(
    h: NakagamiParams, g: NakagamiParams, kappa: float, orders: int
) -> MomentVector:
    return MomentVector.from_orders(
        [double_nakagami_moment(h, g, kappa, k) for k in range(1, orders + 1)]
    )


def _fold_pair(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    out = np.zeros(K + 1)
    for k in range(K + 1):
        l = np.arange(k + 1)
        binom = np.array([math.comb(k, int(v)) for v in l], dtype=float)
        out[k] = float(np.sum(binom * a[l] * b[k - l]))
    return out


def sum_moments(parts: list[MomentVector], K: int | None = None) -> MomentVector:
    """Moments of a sum of independent variables by pairwise binomial folding.

    Algebraically identical to expanding the full multinomial, but costs
    O(n K^2) instead of growing exponentially with the number of parts.
    """
    if not parts:
        raise ValueError("need at least one part")
    K = K if K is not None else min(p.order for p in parts)
    if any(p.order < K for p in parts):
        raise ValueError("every part must carry moments up to the requested order")
    acc = parts[0].mu[: K + 1]
    for part in parts[1:]:
        acc = _fold_pair(acc, part.mu[: K + 1], K)
    return MomentVector(acc)


def iid_sum_moments(part: MomentVector, count: int, K: int | None = None) -> MomentVector:
    """Moments of the sum of ``count`` i.i.d. copies of ``part``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    K = K if K is not None else part.order
    acc = part.mu[: K + 1]
    for _ in range(count - 1):
        acc = _fold_pair(acc, part.mu[: K + 1], K)
    return MomentVector(acc)


def fit_gamma(mu1: float, mu2: float) -> Gamma:
    """Gamma parameters matching a first and second raw moment."""
    var = mu2 - mu1**2
    if mu1 <= 0 or var <= 0:
        raise DegenerateMomentsError("need mu1 > 0 and mu2 > mu1^2")
    return Gamma(alpha=mu1**2 / var, beta=mu1 / var)


def fit_lognormal(mu1: float, mu2: float) -> LogNormal:
    """Log-normal parameters matching a first and second raw moment."""
    if mu1 <= 0 or mu2 <= mu1**2:
        raise DegenerateMomentsError("need mu1 > 0 and mu2 > mu1^2")
    return LogNormal(
        nu=float(np.log(mu1**2 / np.sqrt(mu2))),
        zeta=float(np.sqrt(np.log(mu2 / mu1**2))),
    )


def fit_gamma_from_vector(mv: MomentVector) -> Gamma:
    return fit_gamma(mv[1], mv[2])


def fit_lognormal_from_vector(mv: MomentVector) -> LogNormal:
    return fit_lognormal(mv[1], mv[2])


def fit_lognormal_squared(mv: MomentVector) -> LogNormal:
    """Log-normal fit of the squared variable, from orders 2 and 4."""
    if mv.order < 4:
        raise ValueError("need moments up to order 4")
    return fit_lognormal(mv[2], mv[4])


def gamma_to_gen_gamma_sq(g: Gamma) -> GeneralizedGamma:
    """Law of the square of a gamma-fitted magnitude, exactly remapped."""
    return GeneralizedGamma(a=g.beta**-2, d=g.alpha / 2.0, p=0.5)


def gamma_tail_lognormal(g: Gamma) -> LogNormal:
    """Mean/variance-matched log-normal of a gamma law.

    The two lower tails agree closely once the gamma shape is large,
    which is what makes the two fitted families interchangeable there.
    """
    zeta2 = np.log((g.alpha + 1.0) / g.alpha)
    nu = np.log(g.mean * np.sqrt(g.alpha / (g.alpha + 1.0)))
    return LogNormal(nu=float(nu), zeta=float(np.sqrt(zeta2)))


def element_gamma_fit(h: NakagamiParams, g: NakagamiParams, kappa: float) -> Gamma:
    """Two-moment gamma fit of one element's cascade magnitude."""
    return fit_gamma(
        double_nakagami_moment(h, g, kappa, 1), double_nakagami_moment(h, g, kappa, 2)
    )


def surface_gamma_fits(topology: Topology) -> list[Gamma]:
    """Per-surface gamma fits of the element sums (shape scaled by count)."""
    fits = []
    for ris, h, g in zip(topology.riss, topology.hop1, topology.hop2):
        base = element_gamma_fit(h, g, ris.kappa)
        fits.append(Gamma(alpha=ris.elements * base.alpha, beta=base.beta))
    return fits


def _mv_moments_series(fits: list[Gamma], ks: list[int], ctl: SeriesControl) -> np.ndarray:
    """Best-surface moments through the type-A multi-series resummation.

    The convolution shells of the series depend on the surface
    parameters only, so all requested orders share one pass per surface
    term.
    """
    alphas = np.array([f.alpha for f in fits])
    betas = np.array([f.beta for f in fits])
    beta_sum = betas.sum()
    chi = betas / beta_sum
    lam = alphas.sum()
    ks_arr = np.asarray(ks, dtype=float)

    log_accum = np.full(len(ks), -np.inf)
    for n in range(len(fits)):
        others = [t for t in range(len(fits)) if t != n]
        log_pref = (
            -ks_arr * np.log(beta_sum)
            + float(np.sum(alphas * np.log(chi)))
            + sp.gammaln(lam + ks_arr)
            - sp.gammaln(alphas[n])
            - float(np.sum(sp.gammaln(alphas[others] + 1.0)))
        )
        try:
            log_fa = log_lauricella_fa_many(
                lam + ks_arr,
                [1.0] * len(others),
                alphas[others] + 1.0,
                chi[others],
                ctl,
            )
        except SeriesTruncationError as err:
            raise SeriesTruncationError(
                f"best-surface moment series for surface {n} not converged", err.partial
            ) from err
        log_accum = np.logaddexp(log_accum, log_pref + log_fa)
    return np.exp(log_accum)


def _mv_moment_quadrature(fits: list[Gamma], k: int) -> float:
    """Best-surface moment by adaptive quadrature of the order-statistic integral."""
    hi = max(f.mean + 12.0 * np.sqrt(f.var) for f in fits)
    total = 0.0
    for n, f in enumerate(fits):
        others = [g for i, g in enumerate(fits) if i != n]

        def integrand(x, f=f, others=others):
            acc = f.pdf(x) * x**k
            for g in others:
                acc *= g.cdf(x)
            return acc

        part, _ = quad(
            integrand,
            0.0,
            hi,
            epsabs=1e-10 * f.mean**k,
            epsrel=1e-8,
            limit=400,
            points=[f.mean],
        )
        total += part
    return total


def mv_moment(
    fits: list[Gamma],
    k: int,
    ctl: SeriesControl | None = None,
    method: str = "auto",
) -> float:
    """k-th raw moment of the maximum of independent gamma variables.

    ``method`` picks the truncated multi-series ("series"), the
    order-statistic quadrature ("quadrature"), or series with automatic
    quadrature fallback on truncation failure ("auto").
    """
    if not fits:
        raise ValueError("need at least one surface fit")
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if k == 0:
        return 1.0
    ctl = ctl or SeriesControl()
    if len(fits) == 1:
        return fits[0].moment(k)
    if method == "series":
        return float(_mv_moments_series(fits, [k], ctl)[0])
    if method == "quadrature":
        return _mv_moment_quadrature(fits, k)
    if method == "auto":
        try:
            return float(_mv_moments_series(fits, [k], ctl)[0])
        except SeriesTruncationError:
            return _mv_moment_quadrature(fits, k)
    raise ValueError(f"unknown method {method!r}")


def mv_moments(
    fits: list[Gamma],
    orders: int,
    ctl: SeriesControl | None = None,
    method: str = "auto",
) -> MomentVector:
    ctl = ctl or SeriesControl()
    ks = list(range(1, orders + 1))
    if len(fits) == 1:
        return MomentVector.from_orders([fits[0].moment(k) for k in ks])
    if method == "series":
        return MomentVector.from_orders(_mv_moments_series(fits, ks, ctl))
    if method == "quadrature":
        return MomentVector.from_orders([_mv_moment_quadrature(fits, k) for k in ks])
    if method == "auto":
        try:
            return MomentVector.from_orders(_mv_moments_series(fits, ks, ctl))
        except SeriesTruncationError:
            return MomentVector.from_orders([_mv_moment_quadrature(fits, k) for k in ks])
    raise ValueError(f"unknown method {method!r}")


def r_moments(
    direct: NakagamiParams,
    fits: list[Gamma],
    orders: int = 4,
    ctl: SeriesControl | None = None,
    method: str = "auto",
) -> MomentVector:
    """Moments of direct-plus-best-surface magnitude via binomial combination."""
    mv = mv_moments(fits, orders, ctl, method)
    h0 = nakagami_moments(direct, orders)
    return sum_moments([h0, mv], orders)


def z_moments(topology: Topology, orders: int = 4) -> MomentVector:
    """Moments of the all-surfaces magnitude: direct plus every element sum."""
    parts = [nakagami_moments(topology.direct, orders)]
    for ris, h, g in zip(topology.riss, topology.hop1, topology.hop2):
        element = double_nakagami_moments(h, g, ris.kappa, orders)
        parts.append(iid_sum_moments(element, ris.elements, orders))
    return sum_moments(parts, orders)


@dataclass(frozen=True)
class ChannelFits:
    """Every fitted model of one scenario, for both combining schemes."""

    z_mv: MomentVector
    r_mv: MomentVector
    z_gamma: Gamma
    z_lognormal: LogNormal
    z_sq_gen_gamma: GeneralizedGamma
    z_sq_lognormal: LogNormal
    r_lognormal: LogNormal
    r_sq_lognormal: LogNormal
    surface_fits: tuple[Gamma, ...]
    mv_method: str


def fit_channels(
    topology: Topology,
    orders: int = 4,
    ctl: SeriesControl | None = None,
    mv_method: str = "auto",
) -> ChannelFits:
    """Run the full moment chain and all two-moment fits for a scenario."""
    if orders < 4:
        raise ValueError("need at least four moments for the squared-channel fits")
    surf = surface_gamma_fits(topology)
    zmv = z_moments(topology, orders)
    method_used = mv_method
    if mv_method == "auto":
        try:
            rmv = r_moments(topology.direct, surf, orders, ctl, "series")
            method_used = "series"
        except SeriesTruncationError:
            rmv = r_moments(topology.direct, surf, orders, ctl, "quadrature")
            method_used = "quadrature"
    else:
        rmv = r_moments(topology.direct, surf, orders, ctl, mv_method)
    z_gamma = fit_gamma_from_vector(zmv)
    return ChannelFits(
        z_mv=zmv,
        r_mv=rmv,
        z_gamma=z_gamma,
        z_lognormal=fit_lognormal_from_vector(zmv),
        z_sq_gen_gamma=gamma_to_gen_gamma_sq(z_gamma),
        z_sq_lognormal=fit_lognormal_squared(zmv),
        r_lognormal=fit_lognormal_from_vector(rmv),
        r_sq_lognormal=fit_lognormal_squared(rmv),
        surface_fits=tuple(surf),
        mv_method=method_used,
    )
