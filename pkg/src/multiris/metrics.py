"""Outage probability, ergodic capacity, and energy efficiency.

Every metric exists in at least two independent routes (a fitted-model
closed form and a quadrature of the underlying CDF) so the Monte Carlo
engine can arbitrate; results carry their scheme/metric/method tags to
keep the routes from being conflated downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .distributions import Gamma, LogNormal, MaxOfGammas, StaircaseControl, StaircaseR
from .moments import ChannelFits
from .scenario import NakagamiParams, db_to_linear
from .special import upsilon

__all__ = [
    "MetricResult",
    "op_era_gamma",
    "op_era_lognormal",
    "ec_era_gamma",
    "ec_era_lognormal",
    "op_ora",
    "ec_ora",
    "CircuitPower",
    "energy_efficiency",
    "EnergyEfficiencyRule",
    "min_feasible_power_dbm",
    "ee_curves",
    "ee_crossing",
]


@dataclass(frozen=True)
class MetricResult:
    """One evaluated metric with full provenance of how it was produced."""

    scheme: str  # era | ora
    metric: str  # op | ec | ee
    method: str  # gamma-analytic | lognormal-analytic | quadrature | staircase | monte-carlo
    value: float
    meta: dict = field(default_factory=dict)


def _validate_snr(rho_bar: float, rho_th: float | None = None):
    if rho_bar <= 0:
        raise ValueError("rho_bar must be positive")
    if rho_th is not None and rho_th <= 0:
        raise ValueError("rho_th must be positive")


def op_era_gamma(fit: Gamma, rho_bar: float, rho_th: float) -> float:
    """Outage of the all-surfaces scheme under the gamma magnitude fit."""
    _validate_snr(rho_bar, rho_th)
    return float(fit.cdf(np.sqrt(rho_th / rho_bar)))


def op_era_lognormal(fit: LogNormal, rho_bar: float, rho_th: float) -> float:
    """Outage of the all-surfaces scheme under the log-normal magnitude fit."""
    _validate_snr(rho_bar, rho_th)
    return float(fit.cdf(np.sqrt(rho_th / rho_bar)))


def _ec_from_magnitude_cdf(cdf, rho_bar: float, upper_quantile: float) -> float:
    """Capacity integral (1/ln2) * int 1/(z+1) [1 - F(sqrt(z/rho))] dz.

    Integrated in the magnitude variable u = sqrt(z/rho), truncated where
    the survival function is below 1e-12.
    """

    def integrand(u):
        return 2.0 * rho_bar * u / (rho_bar * u**2 + 1.0) * (1.0 - cdf(u))

    value, _ = quad(
        integrand,
        0.0,
        upper_quantile,
        epsabs=1e-12,
        epsrel=1e-9,
        limit=500,
        points=[0.5 * upper_quantile],
    )
    return value / np.log(2.0)


def ec_era_gamma(fit: Gamma, rho_bar: float) -> float:
    """Capacity of the all-surfaces scheme by quadrature of the gamma fit."""
    _validate_snr(rho_bar)
    upper = fit.quantile(1.0 - 1e-12)
    return _ec_from_magnitude_cdf(fit.cdf, rho_bar, upper)


def ec_era_lognormal(fit_sq: LogNormal, rho_bar: float) -> float:
    """Capacity from the log-normal fit of the squared magnitude."""
    _validate_snr(rho_bar)
    return upsilon(fit_sq.nu, fit_sq.zeta, rho_bar)


def _staircase(direct: NakagamiParams, fits, control: StaircaseControl | None) -> StaircaseR:
    return StaircaseR(direct, MaxOfGammas(tuple(fits)), control or StaircaseControl())


def op_ora(
    direct: NakagamiParams,
    fits,
    rho_bar: float,
    rho_th: float,
    method: str = "staircase",
    lognormal_fit: LogNormal | None = None,
    control: StaircaseControl | None = None,
) -> float:
    """Outage of the best-surface scheme.

    ``staircase`` evaluates the discretized convolution CDF; ``lognormal``
    uses the moment-matched log-normal fit (pass it in).
    """
    _validate_snr(rho_bar, rho_th)
    threshold = float(np.sqrt(rho_th / rho_bar))
    if method == "staircase":
        return float(_staircase(direct, fits, control).cdf(threshold))
    if method == "lognormal":
        if lognormal_fit is None:
            raise ValueError("lognormal method needs the fitted law")
        return float(lognormal_fit.cdf(threshold))
    raise ValueError(f"unknown method {method!r}")


def ec_ora(
    direct: NakagamiParams,
    fits,
    rho_bar: float,
    method: str = "quadrature",
    lognormal_sq_fit: LogNormal | None = None,
    control: StaircaseControl | None = None,
) -> float:
    """Capacity of the best-surface scheme.

    ``quadrature`` integrates the staircase survival function;
    ``lognormal`` feeds the squared-magnitude fit to the closed form.
    """
    _validate_snr(rho_bar)
    if method == "quadrature":
        model = _staircase(direct, fits, control)
        upper = model.quantile(1.0 - 1e-12)
        return _ec_from_magnitude_cdf(model.cdf, rho_bar, upper)
    if method == "lognormal":
        if lognormal_sq_fit is None:
            raise ValueError("lognormal method needs the fitted law")
        return upsilon(lognormal_sq_fit.nu, lognormal_sq_fit.zeta, rho_bar)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CircuitPower:
    """Static dissipation per reflecting element and per terminal, in mW."""

    element_mw: float = 7.8
    source_mw: float = 10.0
    dest_mw: float = 10.0

    def total_mw(self, active_elements: float, tx_power_dbm: float) -> float:
        return (
            float(db_to_linear(tx_power_dbm))  # dBm -> mW
            + active_elements * self.element_mw
            + self.source_mw
            + self.dest_mw
        )


def energy_efficiency(
    rate_bps_hz: float,
    bandwidth_hz: float,
    tx_power_dbm: float,
    active_elements: float,
    circuit: CircuitPower = CircuitPower(),
) -> float:
    """Delivered megabits per joule at a target spectral efficiency."""
    if rate_bps_hz <= 0 or bandwidth_hz <= 0:
        raise ValueError("rate and bandwidth must be positive")
    if active_elements < 0:
        raise ValueError("active element count must be >= 0")
    total_mw = circuit.total_mw(active_elements, tx_power_dbm)
    bits_per_s = bandwidth_hz * rate_bps_hz
    return bits_per_s / (total_mw * 1e-3) / 1e6


@dataclass(frozen=True)
class EnergyEfficiencyRule:
    """Deterministic transmit-power selection for the efficiency study.

    For each target rate, the transmit power is the smallest grid value
    (``step_dbm`` spacing, between ``min_power_dbm`` and
    ``max_power_dbm``) whose analytic capacity meets the rate; an
    infeasible rate scores zero efficiency.
    """

    min_power_dbm: float = 0.0
    max_power_dbm: float = 50.0
    step_dbm: float = 0.1


def min_feasible_power_dbm(
    ec_of_power, rate_bps_hz: float, rule: EnergyEfficiencyRule
) -> float | None:
    """Smallest grid power whose capacity reaches the rate, or None.

    Capacity is nondecreasing in power, so the grid is bisected.
    """
    n_steps = int(round((rule.max_power_dbm - rule.min_power_dbm) / rule.step_dbm))
    lo, hi = 0, n_steps
    power = lambda i: rule.min_power_dbm + i * rule.step_dbm
    if ec_of_power(power(hi)) < rate_bps_hz:
        return None
    if ec_of_power(power(lo)) >= rate_bps_hz:
        return power(lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ec_of_power(power(mid)) >= rate_bps_hz:
            hi = mid
        else:
            lo = mid
    return power(hi)


def ee_curves(
    fits: ChannelFits,
    direct: NakagamiParams,
    noise_dbm: float,
    bandwidth_hz: float,
    rates: np.ndarray,
    era_elements: float,
    ora_elements: float,
    rule: EnergyEfficiencyRule = EnergyEfficiencyRule(),
    circuit: CircuitPower = CircuitPower(),
) -> dict:
    """Efficiency-versus-rate curves for both schemes under the power rule.

    Capacities come from the quadrature routes (gamma fit for the
    all-surfaces scheme, staircase for the best-surface scheme).
    """
    rates = np.asarray(rates, dtype=float)
    stair = _staircase(direct, fits.surface_fits, None)
    stair_upper = stair.quantile(1.0 - 1e-12)
    z_upper = fits.z_gamma.quantile(1.0 - 1e-12)

    def ec_era(p_dbm):
        rho = float(db_to_linear(p_dbm - noise_dbm))
        return _ec_from_magnitude_cdf(fits.z_gamma.cdf, rho, z_upper)

    def ec_ora_q(p_dbm):
        rho = float(db_to_linear(p_dbm - noise_dbm))
        return _ec_from_magnitude_cdf(stair.cdf, rho, stair_upper)

    out = {"rate": rates}
    for scheme, ec_fn, elements in (
        ("era", ec_era, era_elements),
        ("ora", ec_ora_q, ora_elements),
    ):
        ee = np.zeros(rates.size)
        p_star = np.full(rates.size, np.nan)
        for i, rate in enumerate(rates):
            p = min_feasible_power_dbm(ec_fn, rate, rule)
            if p is not None:
                p_star[i] = p
                ee[i] = energy_efficiency(rate, bandwidth_hz, p, elements, circuit)
        out[scheme] = {"ee": ee, "power_dbm": p_star}
    return out


def ee_crossing(curves: dict) -> float | None:
    """Rate at which the best-surface efficiency stops winning, or None.

    Scans for the first sign change of (ora - era) among rates where both
    schemes are feasible; linear interpolation between grid neighbors.
    """
    rates = curves["rate"]
    diff = curves["ora"]["ee"] - curves["era"]["ee"]
    feasible = (curves["ora"]["ee"] > 0) & (curves["era"]["ee"] > 0)
    for i in range(1, rates.size):
        if not (feasible[i - 1] and feasible[i]):
            continue
        if diff[i - 1] > 0 >= diff[i]:
            frac = diff[i - 1] / (diff[i - 1] - diff[i])
            return float(rates[i - 1] + frac * (rates[i] - rates[i - 1]))
    return None
