"""Canonical urban-microcell scenarios used by the demos and tests.

One source at the origin, one destination 100 m away, five surfaces
scattered between them.  Element allocations and placements can be
swapped independently; everything else follows the default link budget
(3 GHz carrier, 10 MHz bandwidth, 10 dB noise figure, 5 dB antenna
gains, unit reflection coefficients, shapes drawn from U[2, 3]).
"""

from __future__ import annotations

from .scenario import ScenarioConfig, Topology, build_topology, config_from_dict

__all__ = [
    "POSITION_SETS",
    "ELEMENT_SETS",
    "DEFAULT_SEED",
    "baseline_dict",
    "baseline_config",
    "baseline_topology",
]

POSITION_SETS: dict[str, list[tuple[float, float]]] = {
    "A": [(7.0, 2.0), (13.0, 6.0), (41.0, 8.0), (75.0, 4.0), (93.0, 3.0)],
    "B": [(5.0, 2.0), (13.0, 7.0), (37.0, 6.0), (69.0, 1.0), (91.0, 3.0)],
}

ELEMENT_SETS: dict[str, list[int]] = {
    "uniform25": [25, 25, 25, 25, 25],
    "uniform40": [40, 40, 40, 40, 40],
    "ascending": [20, 30, 40, 50, 60],
    "descending": [60, 50, 40, 30, 20],
}

DEFAULT_SEED = 20230217


def baseline_dict(
    elements: str | list[int] = "uniform25",
    positions: str | list[tuple[float, float]] = "A",
    seed: int = DEFAULT_SEED,
    tx_power_dbm: float | None = 20.0,
    tx_power_sweep: tuple[float, float, float] | None = None,
) -> dict:
    """The scenario as a raw config dict (same schema as the JSON files)."""
    elems = ELEMENT_SETS[elements] if isinstance(elements, str) else list(elements)
    pos = POSITION_SETS[positions] if isinstance(positions, str) else list(positions)
    if len(elems) != len(pos):
        raise ValueError("element and position lists must have equal length")
    raw = {
        "source": [0.0, 0.0],
        "dest": [100.0, 0.0],
        "riss": [
            {"elements": int(l), "kappa": 1.0, "position": [float(x), float(y)]}
            for l, (x, y) in zip(elems, pos)
        ],
        "fc_ghz": 3.0,
        "gains_db": {"source": 5.0, "dest": 5.0, "ris": 5.0},
        "bandwidth_hz": 1.0e7,
        "noise_figure_db": 10.0,
        "m_range": [2.0, 3.0],
        "seed": seed,
    }
    if tx_power_sweep is not None:
        lo, hi, step = tx_power_sweep
        raw["tx_power_sweep"] = {"from": lo, "to": hi, "step": step}
    else:
        raw["tx_power_dbm"] = tx_power_dbm
    return raw


def baseline_config(**kwargs) -> ScenarioConfig:
    return config_from_dict(baseline_dict(**kwargs))


def baseline_topology(**kwargs) -> Topology:
    return build_topology(baseline_config(**kwargs))
