"""Scenario definition: geometry, link budget, and per-link fading parameters.

A scenario is one source, one destination, and N reflecting surfaces in a
2-D plane.  Distances feed an urban-microcell non-line-of-sight
attenuation law whose linearized value becomes the mean-square gain of
the matching Nakagami link; shape parameters are drawn once per
(surface, hop) pair from a seeded uniform range and then frozen, so the
whole construction is a pure function of (config, seed).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "NakagamiParams",
    "RisConfig",
    "Topology",
    "LinkBudget",
    "ScenarioConfig",
    "path_loss_db",
    "db_to_linear",
    "linear_to_db",
    "snr_threshold",
    "noise_power_dbm",
    "build_topology",
    "load_config",
    "config_from_dict",
]

REFERENCE_DISTANCE_M = 1.0


def db_to_linear(value_db) -> float:
    """Power-convention dB to linear: 10^(dB/10).  Used everywhere."""
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value) -> float:
    value = np.asarray(value, dtype=float)
    if np.any(value <= 0):
        raise ValueError("linear value must be positive")
    return 10.0 * np.log10(value)


@dataclass(frozen=True)
class NakagamiParams:
    """Shape m and mean-square gain omega of one fading link."""

    m: float
    omega: float

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("shape m must be positive")
        if self.omega <= 0:
            raise ValueError("spread omega must be positive")


@dataclass(frozen=True)
class RisConfig:
    """One reflecting surface: element count, reflection loss, placement."""

    elements: int
    kappa: float
    position: tuple[float, float]

    def __post_init__(self):
        if self.elements < 1:
            raise ValueError("elements must be >= 1")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must lie in (0, 1]")
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))


@dataclass(frozen=True)
class Topology:
    """Fully resolved scenario: geometry plus per-link fading parameters.

    ``hop1[n]`` describes source-to-surface links of surface n (the
    elements of one surface share parameters), ``hop2[n]`` the
    surface-to-destination links, ``direct`` the source-destination path.
    """

    source_pos: tuple[float, float]
    dest_pos: tuple[float, float]
    riss: tuple[RisConfig, ...]
    direct: NakagamiParams
    hop1: tuple[NakagamiParams, ...]
    hop2: tuple[NakagamiParams, ...]
    gains_db: tuple[float, float, float]  # (source, dest, surface)
    carrier_ghz: float
    shape_seed: int | None = None

    def __post_init__(self):
        if not (len(self.riss) == len(self.hop1) == len(self.hop2)):
            raise ValueError("riss/hop1/hop2 must have equal length")

    @property
    def n_ris(self) -> int:
        return len(self.riss)

    @property
    def total_elements(self) -> int:
        return sum(r.elements for r in self.riss)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power against the thermal-noise floor of the receiver."""

    tx_power_dbm: float
    bandwidth_hz: float
    noise_figure_db: float

    @property
    def noise_dbm(self) -> float:
        return noise_power_dbm(self.bandwidth_hz, self.noise_figure_db)

    @property
    def rho_bar(self) -> float:
        """Linear average transmit SNR."""
        return float(db_to_linear(self.tx_power_dbm - self.noise_dbm))


def noise_power_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    """Thermal noise power: -174 dBm/Hz density plus bandwidth and NF."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return -174.0 + 10.0 * np.log10(bandwidth_hz) + noise_figure_db


def path_loss_db(dist_m: float, fc_ghz: float, gain_sum_db: float = 0.0) -> float:
    """Urban-microcell NLoS path gain in dB (negative), antenna gains included.

    ``dist_m`` must be at least the 1 m reference distance.
    """
    if dist_m < REFERENCE_DISTANCE_M:
        raise ValueError("distance must be >= 1 m reference")
    if fc_ghz <= 0:
        raise ValueError("carrier frequency must be positive")
    return (
        gain_sum_db
        - 22.7
        - 26.0 * np.log10(fc_ghz)
        - 36.7 * np.log10(dist_m / REFERENCE_DISTANCE_M)
    )


def snr_threshold(rate_bps_hz: float) -> float:
    """Linear SNR needed for a target spectral efficiency: 2^rate - 1."""
    if rate_bps_hz <= 0:
        raise ValueError("rate must be positive")
    return float(2.0**rate_bps_hz - 1.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario description (see load_config for the JSON form)."""

    source: tuple[float, float]
    dest: tuple[float, float]
    ris_elements: tuple[int, ...]
    ris_kappa: tuple[float, ...]
    ris_positions: tuple[tuple[float, float] | None, ...]
    position_ranges: tuple[tuple[tuple[float, float], tuple[float, float]] | None, ...]
    fc_ghz: float
    gains_db: tuple[float, float, float]
    bandwidth_hz: float
    noise_figure_db: float
    tx_power_dbm: float | None
    tx_power_sweep: tuple[float, float, float] | None
    m_range: tuple[float, float]
    seed: int
    ris_height_m: float = 0.0
    fold_height: bool = False

    @property
    def n_ris(self) -> int:
        return len(self.ris_elements)

    def link_budget(self, tx_power_dbm: float | None = None) -> LinkBudget:
        power = tx_power_dbm if tx_power_dbm is not None else self.tx_power_dbm
        if power is None:
            raise ValueError("scenario has no fixed tx power; pass one explicitly")
        return LinkBudget(power, self.bandwidth_hz, self.noise_figure_db)

    def tx_power_grid(self) -> np.ndarray:
        if self.tx_power_sweep is None:
            if self.tx_power_dbm is None:
                raise ValueError("no tx power configured")
            return np.array([self.tx_power_dbm])
        lo, hi, step = self.tx_power_sweep
        return np.arange(lo, hi + 0.5 * step, step)


_REQUIRED_KEYS = {
    "riss",
    "source",
    "dest",
    "fc_ghz",
    "gains_db",
    "bandwidth_hz",
    "noise_figure_db",
    "m_range",
    "seed",
}
_OPTIONAL_KEYS = {"tx_power_dbm", "tx_power_sweep", "ris_height_m", "fold_height"}
_RIS_KEYS = {"elements", "kappa", "position", "position_range"}


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Validate a parsed JSON document; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise ValueError("config root must be an object")
    unknown = set(raw) - _REQUIRED_KEYS - _OPTIONAL_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    missing = _REQUIRED_KEYS - set(raw)
    if missing:
        raise ValueError(f"missing config keys: {sorted(missing)}")
    if "tx_power_dbm" not in raw and "tx_power_sweep" not in raw:
        raise ValueError("config needs tx_power_dbm or tx_power_sweep")

    riss = raw["riss"]
    if not isinstance(riss, list) or not riss:
        raise ValueError("riss must be a non-empty list")
    elements, kappas, positions, ranges = [], [], [], []
    for i, entry in enumerate(riss):
        unknown = set(entry) - _RIS_KEYS
        if unknown:
            raise ValueError(f"riss[{i}]: unknown keys {sorted(unknown)}")
        if "elements" not in entry or "kappa" not in entry:
            raise ValueError(f"riss[{i}]: needs elements and kappa")
        if ("position" in entry) == ("position_range" in entry):
            raise ValueError(f"riss[{i}]: exactly one of position/position_range")
        elements.append(int(entry["elements"]))
        kappas.append(float(entry["kappa"]))
        if "position" in entry:
            x, y = entry["position"]
            positions.append((float(x), float(y)))
            ranges.append(None)
        else:
            rng_spec = entry["position_range"]
            (x0, x1), (y0, y1) = rng_spec["x"], rng_spec["y"]
            positions.append(None)
            ranges.append(((float(x0), float(x1)), (float(y0), float(y1))))

    sweep = None
    if "tx_power_sweep" in raw:
        s = raw["tx_power_sweep"]
        sweep = (float(s["from"]), float(s["to"]), float(s["step"]))
    gains = raw["gains_db"]
    m_lo, m_hi = raw["m_range"]

    return ScenarioConfig(
        source=(float(raw["source"][0]), float(raw["source"][1])),
        dest=(float(raw["dest"][0]), float(raw["dest"][1])),
        ris_elements=tuple(elements),
        ris_kappa=tuple(kappas),
        ris_positions=tuple(positions),
        position_ranges=tuple(ranges),
        fc_ghz=float(raw["fc_ghz"]),
        gains_db=(float(gains["source"]), float(gains["dest"]), float(gains["ris"])),
        bandwidth_hz=float(raw["bandwidth_hz"]),
        noise_figure_db=float(raw["noise_figure_db"]),
        tx_power_dbm=float(raw["tx_power_dbm"]) if "tx_power_dbm" in raw else None,
        tx_power_sweep=sweep,
        m_range=(float(m_lo), float(m_hi)),
        seed=int(raw["seed"]),
        ris_height_m=float(raw.get("ris_height_m", 0.0)),
        fold_height=bool(raw.get("fold_height", False)),
    )


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def _distance(p: tuple[float, float], q: tuple[float, float], extra: float = 0.0) -> float:
    d2 = float(np.hypot(p[0] - q[0], p[1] - q[1]))
    if extra > 0.0:
        return float(np.hypot(d2, extra))
    return d2


def build_topology(config: ScenarioConfig) -> Topology:
    """Resolve a config into frozen per-link fading parameters.

    Deterministic given the seed.  The draw order is fixed: first any
    surface positions sampled from ranges (x then y, surface order),
    then shape values m for the direct link and for each surface's two
    hops.  Surface height is ignored unless fold_height is set, in which
    case it enters the hop distances as a vertical offset.
    """
    rng = np.random.default_rng(config.seed)

    positions = []
    for pos, rng_spec in zip(config.ris_positions, config.position_ranges):
        if pos is not None:
            positions.append(pos)
        else:
            (x0, x1), (y0, y1) = rng_spec
            positions.append((float(rng.uniform(x0, x1)), float(rng.uniform(y0, y1))))

    m_lo, m_hi = config.m_range
    m_direct = float(rng.uniform(m_lo, m_hi))
    m_hops = [(float(rng.uniform(m_lo, m_hi)), float(rng.uniform(m_lo, m_hi))) for _ in positions]

    g_src, g_dst, g_ris = config.gains_db
    height = config.ris_height_m if config.fold_height else 0.0

    d_direct = _distance(config.source, config.dest)
    if d_direct <= 0:
        raise ValueError("source and destination are coincident")
    direct = NakagamiParams(
        m_direct, float(db_to_linear(path_loss_db(d_direct, config.fc_ghz, g_src + g_dst)))
    )

    riss, hop1, hop2 = [], [], []
    for (pos, (m_h, m_g), elements, kappa) in zip(
        positions, m_hops, config.ris_elements, config.ris_kappa
    ):
        d1 = _distance(config.source, pos, height)
        d2 = _distance(pos, config.dest, height)
        if d1 <= 0 or d2 <= 0:
            raise ValueError("surface coincident with source or destination")
        riss.append(RisConfig(elements, kappa, pos))
        hop1.append(
            NakagamiParams(m_h, float(db_to_linear(path_loss_db(d1, config.fc_ghz, g_src + g_ris))))
        )
        hop2.append(
            NakagamiParams(m_g, float(db_to_linear(path_loss_db(d2, config.fc_ghz, g_ris + g_dst))))
        )

    return Topology(
        source_pos=config.source,
        dest_pos=config.dest,
        riss=tuple(riss),
        direct=direct,
        hop1=tuple(hop1),
        hop2=tuple(hop2),
        gains_db=config.gains_db,
        carrier_ghz=config.fc_ghz,
        shape_seed=config.seed,
    )
