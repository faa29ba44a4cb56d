"""Evaluable densities and CDFs for every law in the channel models.

Alongside the textbook families this module carries the two composite
laws the link analysis needs: the maximum of independent gamma variables
(product of regularized lower incomplete gammas, evaluated in logs so
the deep lower tail cannot underflow silently) and the sum of a Nakagami
magnitude with that maximum, approximated by an M-step staircase
discretization of the convolution integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .scenario import NakagamiParams

__all__ = [
    "Gamma",
    "LogNormal",
    "GeneralizedGamma",
    "Nakagami",
    "DoubleNakagami",
    "MaxOfGammas",
    "StaircaseControl",
    "StaircaseR",
    "FittedDistribution",
]


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _maybe_scalar(values, scalar: bool):
    return float(values) if scalar else values


def _bisect_quantile(cdf, q: float, lo: float, hi: float, iters: int = 200) -> float:
    """Quantile by bisection on the CDF; hi is doubled until it brackets q."""
    if not 0.0 < q < 1.0:
        raise ValueError("quantile level must lie in (0, 1)")
    while cdf(hi) < q and hi < 1e300:
        hi *= 2.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(hi, 1e-300):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Gamma:
    """Gamma law in shape/rate form."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("gamma parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha / self.beta

    @property
    def var(self) -> float:
        return self.alpha / self.beta**2

    def moment(self, k: int) -> float:
        return float(np.exp(sp.gammaln(self.alpha + k) - sp.gammaln(self.alpha)) / self.beta**k)

    def pdf(self, x):
        x, scalar = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        out[pos] = np.exp(
            self.alpha * np.log(self.beta)
            - sp.gammaln(self.alpha)
            + (self.alpha - 1.0) * np.log(xp)
            - self.beta * xp
        )
        return _maybe_scalar(out, scalar)

    def cdf(self, x):
        x, scalar = _as_array(x)
        out = sp.gammainc(self.alpha, self.beta * np.maximum(x, 0.0))
        return _maybe_scalar(out, scalar)

    def quantile(self, q: float) -> float:
        return _bisect_quantile(self.cdf, q, 0.0, self.mean + 10.0 * np.sqrt(self.var))


@dataclass(frozen=True)
class LogNormal:
    """Log-normal law with log-mean nu and log-std zeta."""

    nu: float
    zeta: float

    def __post_init__(self):
        if self.zeta <= 0:
            raise ValueError("zeta must be positive")

    @property
    def mean(self) -> float:
        return float(np.exp(self.nu + 0.5 * self.zeta**2))

    @property
    def var(self) -> float:
        return float((np.exp(self.zeta**2) - 1.0) * np.exp(2.0 * self.nu + self.zeta**2))

    def moment(self, k: int) -> float:
        return float(np.exp(k * self.nu + 0.5 * (k * self.zeta) ** 2))

    def pdf(self, x):
        x, scalar = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        out[pos] = np.exp(-((np.log(xp) - self.nu) ** 2) / (2.0 * self.zeta**2)) / (
            xp * self.zeta * np.sqrt(2.0 * np.pi)
        )
        return _maybe_scalar(out, scalar)

    def cdf(self, x):
        x, scalar = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = 0.5 + 0.5 * sp.erf((np.log(x[pos]) - self.nu) / (self.zeta * np.sqrt(2.0)))
        return _maybe_scalar(out, scalar)

    def quantile(self, q: float) -> float:
        return float(np.exp(self.nu + self.zeta * np.sqrt(2.0) * sp.erfinv(2.0 * q - 1.0)))


@dataclass(frozen=True)
class GeneralizedGamma:
    """Three-parameter generalized gamma with scale a, power d, exponent p."""

    a: float
    d: float
    p: float

    def __post_init__(self):
        if self.a <= 0 or self.d <= 0 or self.p <= 0:
            raise ValueError("generalized gamma parameters must be positive")

    def pdf(self, x):
        x, scalar = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        out[pos] = np.exp(
            np.log(self.p)
            - self.d * np.log(self.a)
            - sp.gammaln(self.d / self.p)
            + (self.d - 1.0) * np.log(xp)
            - (xp / self.a) ** self.p
        )
        return _maybe_scalar(out, scalar)

    def cdf(self, x):
        x, scalar = _as_array(x)
        out = sp.gammainc(self.d / self.p, (np.maximum(x, 0.0) / self.a) ** self.p)
        return _maybe_scalar(out, scalar)

    def quantile(self, q: float) -> float:
        return _bisect_quantile(self.cdf, q, 0.0, self.a)


@dataclass(frozen=True)
class Nakagami:
    """Nakagami magnitude law; `params.omega` is the mean-square value."""

    params: NakagamiParams

    @property
    def m(self) -> float:
        return self.params.m

    @property
    def omega(self) -> float:
        return self.params.omega

    def pdf(self, x):
        x, scalar = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        r = self.m / self.omega
        out[pos] = np.exp(
            np.log(2.0)
            + self.m * np.log(r)
            - sp.gammaln(self.m)
            + (2.0 * self.m - 1.0) * np.log(xp)
            - r * xp**2
        )
        return _maybe_scalar(out, scalar)

    def cdf(self, x):
        x, scalar = _as_array(x)
        out = sp.gammainc(self.m, self.m / self.omega * np.maximum(x, 0.0) ** 2)
        return _maybe_scalar(out, scalar)

    def quantile(self, q: float) -> float:
        return _bisect_quantile(self.cdf, q, 0.0, 4.0 * np.sqrt(self.omega))


@dataclass(frozen=True)
class DoubleNakagami:
    """Product of two independent Nakagami magnitudes scaled by kappa."""

    h: NakagamiParams
    g: NakagamiParams
    kappa: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must lie in (0, 1]")

    @property
    def lam(self) -> float:
        return float(
            np.sqrt(self.h.m * self.g.m / (self.kappa**2 * self.h.omega * self.g.omega))
        )

    def pdf(self, x):
        x, scalar = _as_array(x)
        out = np.zeros_like(x)
        pos = x > 0
        xp = x[pos]
        mh, mg = self.h.m, self.g.m
        lam = self.lam
        # kve carries e^{+z}; fold it back in log space to survive tiny scales
        z = 2.0 * lam * xp
        log_k = np.log(sp.kve(mg - mh, z)) - z
        out[pos] = np.exp(
            np.log(4.0)
            + (mh + mg) * np.log(lam)
            - sp.gammaln(mh)
            - sp.gammaln(mg)
            + (mh + mg - 1.0) * np.log(xp)
            + log_k
        )
        return _maybe_scalar(out, scalar)

    def cdf(self, x):
        """Numeric CDF by adaptive quadrature of the density."""
        from scipy.integrate import quad

        x, scalar = _as_array(x)
        flat = np.atleast_1d(x)
        out = np.zeros_like(flat)
        for i, xi in enumerate(flat):
            if xi > 0:
                out[i], _ = quad(self.pdf, 0.0, xi, epsabs=1e-12, epsrel=1e-10, limit=200)
        out = np.clip(out, 0.0, 1.0)
        return _maybe_scalar(out.reshape(np.shape(x)), scalar)


@dataclass(frozen=True)
class MaxOfGammas:
    """Maximum of independent gamma variables (per-surface element sums).

    The CDF is the product of the per-variable regularized incomplete
    gammas, accumulated in log space; linear values below the double
    floor come back as exact zeros, with ``log_cdf`` exposing the
    unsaturated magnitude.
    """

    parts: tuple[Gamma, ...]

    def __post_init__(self):
        if not self.parts:
            raise ValueError("need at least one gamma part")
        object.__setattr__(self, "parts", tuple(self.parts))

    def log_cdf(self, x):
        x, scalar = _as_array(x)
        xs = np.maximum(x, 0.0)
        with np.errstate(divide="ignore"):
            acc = np.zeros_like(xs)
            for g in self.parts:
                acc += np.log(sp.gammainc(g.alpha, g.beta * xs))
        return _maybe_scalar(acc, scalar)

    def cdf(self, x):
        x, scalar = _as_array(x)
        out = np.exp(self.log_cdf(x))
        return _maybe_scalar(out, scalar)

    def pdf(self, x):
        x, scalar = _as_array(x)
        xs = np.maximum(x, 0.0)
        cdfs = np.array([sp.gammainc(g.alpha, g.beta * xs) for g in self.parts])
        pdfs = np.array([g.pdf(xs) for g in self.parts])
        out = np.zeros_like(xs)
        for k in range(len(self.parts)):
            others = np.prod(np.delete(cdfs, k, axis=0), axis=0) if len(self.parts) > 1 else 1.0
            out += pdfs[k] * others
        out = np.where(x > 0, out, 0.0)
        return _maybe_scalar(out, scalar)

    def quantile(self, q: float) -> float:
        hi = max(g.mean + 10.0 * np.sqrt(g.var) for g in self.parts)
        return _bisect_quantile(self.cdf, q, 0.0, hi)


@dataclass(frozen=True)
class StaircaseControl:
    """Strip count of the staircase convolution approximation."""

    steps: int = 100

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


@dataclass(frozen=True)
class StaircaseR:
    """Sum of a Nakagami direct magnitude and a max-of-gammas reflection.

    The CDF discretizes the convolution over the direct magnitude into
    ``control.steps`` strips, freezing the reflection CDF at the left
    edge of each strip; the density is the exact derivative of that
    staircase (product rule over both factors of every strip).
    """

    direct: NakagamiParams
    reflections: MaxOfGammas
    control: StaircaseControl = StaircaseControl()

    def _grids(self, x):
        m = np.arange(1, self.control.steps + 1, dtype=float)
        steps = float(self.control.steps)
        x = np.asarray(x, dtype=float)[..., None]
        return m / steps * x, (m - 1.0) / steps * x, (steps - m + 1.0) / steps * x, m, steps

    def cdf(self, x):
        x_in, scalar = _as_array(x)
        h = Nakagami(self.direct)
        hi_grid, lo_grid, mv_grid, _, _ = self._grids(x_in)
        terms = (h.cdf(hi_grid) - h.cdf(lo_grid)) * self.reflections.cdf(mv_grid)
        out = np.clip(terms.sum(axis=-1), 0.0, 1.0)
        out = np.where(x_in > 0, out, 0.0)
        return _maybe_scalar(out, scalar)

    def pdf(self, x):
        x_in, scalar = _as_array(x)
        h = Nakagami(self.direct)
        hi_grid, lo_grid, mv_grid, m, steps = self._grids(x_in)
        a = m / steps
        b = (m - 1.0) / steps
        c = (steps - m + 1.0) / steps
        d_h = a * h.pdf(hi_grid) - b * h.pdf(lo_grid)
        block = h.cdf(hi_grid) - h.cdf(lo_grid)
        terms = d_h * self.reflections.cdf(mv_grid) + block * c * self.reflections.pdf(mv_grid)
        out = np.maximum(terms.sum(axis=-1), 0.0)
        out = np.where(x_in > 0, out, 0.0)
        return _maybe_scalar(out, scalar)

    def quantile(self, q: float) -> float:
        hi = Nakagami(self.direct).quantile(0.999) + self.reflections.quantile(0.999)
        return _bisect_quantile(self.cdf, q, 0.0, hi)


FittedDistribution = Gamma | LogNormal | GeneralizedGamma
