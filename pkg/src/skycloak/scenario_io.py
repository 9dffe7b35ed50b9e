"""Scenario files: strict unit-tagged JSON in, SI-unit problem instances out.

A scenario file carries every dimensioned quantity as ``{"value": ...,
"unit": "..."}`` so that nothing is ambiguous at the boundary: frequencies
in Hz or GHz, distances in m or km, powers in W or dBm, gains linear or in
dB/dBi, angles in rad or deg. Everything is converted to SI (Hz, m, W,
linear, rad) on load. Unknown keys are rejected at every nesting level; a
typo never silently falls back to a default.

UE positions come either as an explicit list or as a ``uniform_square``
sampler resolved from the scenario's RNG seed at load time; the resolved
positions are part of the returned object so every downstream run is
replayable. The scenario hash is the SHA-256 of the canonical (sorted-key)
JSON encoding of the raw file, so it is stable under field reordering.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import (
    SHADOWING_ROWS,
    SatelliteLink,
    SRParams,
    UavLinkBudget,
    gamma_from_sr,
)
from .planner import Scenario

__all__ = [
    "ScenarioError",
    "LoadedScenario",
    "load_scenario",
    "scenario_to_dict",
    "scenario_hash",
    "default_scenario_dict",
    "dbm_to_watts",
    "watts_to_dbm",
    "db_to_linear",
    "linear_to_db",
]


class ScenarioError(ValueError):
    """Malformed scenario file: unknown field, missing field, or bad unit."""


def dbm_to_watts(x: float) -> float:
    return 10.0 ** ((x - 30.0) / 10.0)


def watts_to_dbm(w: float) -> float:
    if w <= 0.0:
        raise ValueError("dBm is undefined for nonpositive power")
    return 10.0 * math.log10(w) + 30.0


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def linear_to_db(g: float) -> float:
    if g <= 0.0:
        raise ValueError("dB is undefined for nonpositive gain")
    return 10.0 * math.log10(g)


_FREQ = {"Hz": lambda v: v, "GHz": lambda v: v * 1e9}
_DIST = {"m": lambda v: v, "km": lambda v: v * 1e3}
_POWER = {"W": lambda v: v, "dBm": dbm_to_watts}
_GAIN = {"linear": lambda v: v, "dB": db_to_linear, "dBi": db_to_linear}
_ANGLE = {"rad": lambda v: v, "deg": math.radians}


def _check_keys(node: dict, allowed, required, path: str) -> None:
    if not isinstance(node, dict):
        raise ScenarioError(f"{path}: expected an object, got {type(node).__name__}")
    unknown = sorted(set(node) - set(allowed))
    if unknown:
        raise ScenarioError(f"{path}: unknown field(s) {unknown}")
    missing = sorted(set(required) - set(node))
    if missing:
        raise ScenarioError(f"{path}: missing required field(s) {missing}")


def _quantity(node, units: dict, path: str):
    _check_keys(node, ("value", "unit"), ("value", "unit"), path)
    unit = node["unit"]
    if unit not in units:
        raise ScenarioError(
            f"{path}: unit {unit!r} not one of {sorted(units)}")
    return units[unit], node["value"]


def _scalar(node, units: dict, path: str) -> float:
    conv, v = _quantity(node, units, path)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ScenarioError(f"{path}: value must be a number")
    return float(conv(float(v)))


def _point2(node, path: str) -> np.ndarray:
    conv, v = _quantity(node, _DIST, path)
    arr = np.asarray(v, dtype=float)
    if arr.shape != (2,):
        raise ScenarioError(f"{path}: value must be a 2-element [x, y]")
    return np.array([conv(arr[0]), conv(arr[1])])


def _plain_number(raw: dict, key: str, default=None) -> float:
    if key not in raw:
        if default is None:
            raise ScenarioError(f"missing required field '{key}'")
        return default
    v = raw[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ScenarioError(f"{key}: must be a plain number")
    return float(v)


@dataclass(frozen=True)
class LoadedScenario:
    """A parsed scenario plus its replay context."""

    scenario: Scenario
    seed: int
    ue_mode: str          # "explicit" | "uniform_square"
    raw: dict             # the file contents as read
    hash: str             # canonical-JSON SHA-256 of raw


def scenario_hash(raw: dict) -> str:
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


_TOP_KEYS = (
    "shadowing", "satellite", "uav", "bob", "willie", "ue_placement", "noise",
    "varpi", "eps", "P_tot", "Pa_max", "H_min", "H_max", "R_tg",
    "delta", "i_max", "rng_seed",
)
_TOP_REQUIRED = tuple(k for k in _TOP_KEYS if k not in ("delta", "i_max", "rng_seed"))


def _parse_shadowing(node, path: str) -> SRParams:
    if isinstance(node, str):
        if node not in SHADOWING_ROWS:
            raise ScenarioError(
                f"{path}: unknown shadowing row {node!r}; "
                f"expected one of {sorted(SHADOWING_ROWS)} or explicit {{b, m, omega}}")
        return SHADOWING_ROWS[node]
    _check_keys(node, ("b", "m", "omega"), ("b", "m", "omega"), path)
    return SRParams(b=float(node["b"]), m=float(node["m"]), omega=float(node["omega"]))


def _resolve_ues(node, seed: int, path: str):
    _check_keys(node, ("explicit", "uniform_square"), (), path)
    if ("explicit" in node) == ("uniform_square" in node):
        raise ScenarioError(
            f"{path}: give exactly one of 'explicit' or 'uniform_square'")
    if "explicit" in node:
        conv, v = _quantity(node["explicit"], _DIST, f"{path}.explicit")
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ScenarioError(f"{path}.explicit: value must be a list of [x, y] pairs")
        return conv(arr), "explicit"
    sq = node["uniform_square"]
    _check_keys(sq, ("side", "count"), ("side", "count"), f"{path}.uniform_square")
    side = _scalar(sq["side"], _DIST, f"{path}.uniform_square.side")
    count = sq["count"]
    if not isinstance(count, int) or isinstance(count, bool) or count < 0:
        raise ScenarioError(f"{path}.uniform_square.count: must be a nonnegative integer")
    rng = np.random.default_rng([1, seed])  # stream 1: UE placement
    ues = rng.uniform(-side / 2.0, side / 2.0, size=(count, 2))
    return ues, "uniform_square"


def load_scenario(source, seed: int | None = None) -> LoadedScenario:
    """Parse a scenario file (path, JSON string content not accepted) or dict.

    ``seed`` overrides the file's ``rng_seed`` for UE sampling and any
    downstream Monte Carlo. Raises ScenarioError on any unknown field,
    missing field, or unmappable unit.
    """
    if isinstance(source, dict):
        raw = source
    else:
        try:
            raw = json.loads(Path(source).read_text())
        except OSError as e:
            raise ScenarioError(f"cannot read scenario file {source}: {e}") from e
        except json.JSONDecodeError as e:
            raise ScenarioError(f"scenario file {source} is not valid JSON: {e}") from e
    _check_keys(raw, _TOP_KEYS, _TOP_REQUIRED, "scenario")

    sr = _parse_shadowing(raw["shadowing"], "shadowing")
    sat_node = raw["satellite"]
    _check_keys(sat_node, ("fc", "d", "G"), ("fc", "d", "G"), "satellite")
    sat = SatelliteLink(
        fc=_scalar(sat_node["fc"], _FREQ, "satellite.fc"),
        d=_scalar(sat_node["d"], _DIST, "satellite.d"),
        G=_scalar(sat_node["G"], _GAIN, "satellite.G"),
    )
    uav_node = raw["uav"]
    _check_keys(uav_node, ("beta0_chi", "beta0_kappa", "phi_min"),
                ("beta0_chi", "beta0_kappa", "phi_min"), "uav")
    budget = UavLinkBudget(
        beta0_chi=_scalar(uav_node["beta0_chi"], _GAIN, "uav.beta0_chi"),
        beta0_kappa=_scalar(uav_node["beta0_kappa"], _GAIN, "uav.beta0_kappa"),
        phi_min=_scalar(uav_node["phi_min"], _ANGLE, "uav.phi_min"),
    )
    noise = raw["noise"]
    _check_keys(noise, ("sigma_kappa2", "sigma_b2", "sigma_w2"),
                ("sigma_kappa2", "sigma_b2", "sigma_w2"), "noise")

    rng_seed = raw.get("rng_seed", 0)
    if not isinstance(rng_seed, int) or isinstance(rng_seed, bool) or rng_seed < 0:
        raise ScenarioError("rng_seed: must be a nonnegative integer")
    resolved_seed = rng_seed if seed is None else int(seed)
    ues, ue_mode = _resolve_ues(raw["ue_placement"], resolved_seed, "ue_placement")

    i_max = raw.get("i_max", 50)
    if not isinstance(i_max, int) or isinstance(i_max, bool):
        raise ScenarioError("i_max: must be an integer")

    scenario = Scenario(
        sr=sr,
        gamma=gamma_from_sr(sr),
        sat=sat,
        budget=budget,
        bob=_point2(raw["bob"], "bob"),
        willie=_point2(raw["willie"], "willie"),
        ues=ues,
        sigma_kappa2=_scalar(noise["sigma_kappa2"], _POWER, "noise.sigma_kappa2"),
        sigma_b2=_scalar(noise["sigma_b2"], _POWER, "noise.sigma_b2"),
        sigma_w2=_scalar(noise["sigma_w2"], _POWER, "noise.sigma_w2"),
        varpi=_plain_number(raw, "varpi"),
        eps=_plain_number(raw, "eps"),
        P_tot=_scalar(raw["P_tot"], _POWER, "P_tot"),
        Pa_max=_scalar(raw["Pa_max"], _POWER, "Pa_max"),
        H_min=_scalar(raw["H_min"], _DIST, "H_min"),
        H_max=_scalar(raw["H_max"], _DIST, "H_max"),
        R_tg=_plain_number(raw, "R_tg"),
        delta=_plain_number(raw, "delta", 1e-6),
        i_max=i_max,
    )
    return LoadedScenario(scenario=scenario, seed=resolved_seed, ue_mode=ue_mode,
                          raw=raw, hash=scenario_hash(raw))


def scenario_to_dict(ls: LoadedScenario) -> dict:
    """Serialize back to the file schema in canonical SI units.

    UE positions are always written out explicitly (resolved), so the
    round trip load -> dict -> load reproduces the same Scenario without
    reconsuming the RNG.
    """
    s = ls.scenario
    return {
        "shadowing": {"b": s.sr.b, "m": s.sr.m, "omega": s.sr.omega},
        "satellite": {
            "fc": {"value": s.sat.fc, "unit": "Hz"},
            "d": {"value": s.sat.d, "unit": "m"},
            "G": {"value": s.sat.G, "unit": "linear"},
        },
        "uav": {
            "beta0_chi": {"value": s.budget.beta0_chi, "unit": "linear"},
            "beta0_kappa": {"value": s.budget.beta0_kappa, "unit": "linear"},
            "phi_min": {"value": s.budget.phi_min, "unit": "rad"},
        },
        "bob": {"value": list(s.bob), "unit": "m"},
        "willie": {"value": list(s.willie), "unit": "m"},
        "ue_placement": {"explicit": {"value": s.ues.tolist(), "unit": "m"}},
        "noise": {
            "sigma_kappa2": {"value": s.sigma_kappa2, "unit": "W"},
            "sigma_b2": {"value": s.sigma_b2, "unit": "W"},
            "sigma_w2": {"value": s.sigma_w2, "unit": "W"},
        },
        "varpi": s.varpi,
        "eps": s.eps,
        "P_tot": {"value": s.P_tot, "unit": "W"},
        "Pa_max": {"value": s.Pa_max, "unit": "W"},
        "H_min": {"value": s.H_min, "unit": "m"},
        "H_max": {"value": s.H_max, "unit": "m"},
        "R_tg": s.R_tg,
        "delta": s.delta,
        "i_max": s.i_max,
        "rng_seed": ls.seed,
    }


def default_scenario_dict(varpi: float = 0.1, seed: int = 12) -> dict:
    """The stock evaluation scenario in engineering units.

    K = 5 UEs drawn uniformly on a 600 m square, Bob at [200, -100] m,
    the warden at [100, -200] m, a 2 GHz satellite at 500 km with 30 dBi
    combined gain, light shadowing, eps = 0.01, 1 W UAV budget, 10 W
    satellite cap, altitude 50..500 m with a 50 degree elevation mask.
    """
    return {
        "shadowing": "light",
        "satellite": {
            "fc": {"value": 2.0, "unit": "GHz"},
            "d": {"value": 500.0, "unit": "km"},
            "G": {"value": 30.0, "unit": "dBi"},
        },
        "uav": {
            "beta0_chi": {"value": -38.5, "unit": "dB"},
            "beta0_kappa": {"value": -60.0, "unit": "dB"},
            "phi_min": {"value": 50.0, "unit": "deg"},
        },
        "bob": {"value": [200.0, -100.0], "unit": "m"},
        "willie": {"value": [100.0, -200.0], "unit": "m"},
        "ue_placement": {
            "uniform_square": {"side": {"value": 600.0, "unit": "m"}, "count": 5},
        },
        "noise": {
            "sigma_kappa2": {"value": -114.0, "unit": "dBm"},
            "sigma_b2": {"value": -104.0, "unit": "dBm"},
            "sigma_w2": {"value": -104.0, "unit": "dBm"},
        },
        "varpi": varpi,
        "eps": 0.01,
        "P_tot": {"value": 1.0, "unit": "W"},
        "Pa_max": {"value": 10.0, "unit": "W"},
        "H_min": {"value": 50.0, "unit": "m"},
        "H_max": {"value": 500.0, "unit": "m"},
        "R_tg": 6.0,
        "delta": 1e-6,
        "i_max": 50,
        "rng_seed": seed,
    }
