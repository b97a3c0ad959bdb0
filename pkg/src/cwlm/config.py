"""JSON run configuration for the command-line front end.

Schema (all keys optional unless noted)::

    {
      "name": "ideal_sudden_jump",
      "scenario": "ideal" | "experimental" | "experimental_detuned",
      "scenario_options": {"omega": 10.0, "t_a": 1.0, "a_vq": 2.0},
      "model": "ideal" | "experimental",        # required without a scenario
      "correlators": {"s_qq": ..., "s_vv": ..., "a_vq": ..., "s_qv": ..., "a_qv": ...},
      "hamiltonian": {"omega_x": 1.0, "omega_y": 0.0, "delta": 0.0},
      "rates": {"gamma_d": 0.0, "gamma_up": 0.0, "gamma_down": 0.0},
      "prep": "Z+" | [px, py, pz],
      "post": "Z-" | "none" | [px, py, pz] | {"mode": "faulty", "psi1": "Z-", "p_e": 0.02},
      "p_e": 0.0,                 # turns a pure "post" into a faulty one
      "frame_correction": false,  # post-select on exp(-iHT)|post>
      "T": [0.4, 0.8, 1.2],       # required, every value > 0
      "T_unit": "abs" | "t_a" | "inv_omega",
      "grid": {"n": 512, "chi_max": null, "o_max": null},
      "products": {
        "joint": true, "marginals": true, "moments": true,
        "slices": {"axis": 2, "values": [0.0, 1.0]},
        "differences": true, "certainty": true,
        "certainty_given": 0.0,
        "shifts": {"p_i": "Z+", "p_f": "Z+", "axis": "x", "xi": 0.05, "grid2d": false}
      }
    }

Correlator entries follow :class:`cwlm.detectors.DetectorCorrelators`
(scalar, diagonal pair or 2x2 matrix) and override the preset values.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .detectors import (SCENARIOS, DetectorCorrelators, DissipationRates, SystemConfig,
                        scenario)
from .errors import CWLMError
from .qubit import (BlochVector, PostSelection, build_postselection,
                    frame_rotate, state_vector)

T_UNITS = ("abs", "t_a", "inv_omega")
_TOP_KEYS = {"name", "scenario", "scenario_options", "model", "correlators", "hamiltonian",
             "rates", "prep", "post", "p_e", "frame_correction", "T", "T_unit", "grid",
             "products", "description", "comment"}
_PRODUCT_KEYS = {"joint", "marginals", "moments", "slices", "differences", "certainty",
                 "certainty_given", "shifts"}


class ConfigError(CWLMError, ValueError):
    """Malformed or schema-violating run configuration."""


@dataclass(frozen=True)
class ShiftRequest:
    p_i: object = "Z+"
    p_f: object = "Z+"
    axis: str = "x"
    xi: float = 0.05
    grid2d: bool = False


@dataclass(frozen=True)
class Products:
    joint: bool = True
    marginals: bool = False
    moments: bool = True
    slice_axis: int = 2
    slice_values: tuple[float, ...] = ()
    differences: bool = False
    certainty: bool = False
    certainty_given: float = 0.0
    shifts: ShiftRequest | None = None

    @property
    def needs_pair(self) -> bool:
        return self.differences or self.certainty


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    prep: BlochVector
    post: object
    p_e: float
    frame_correction: bool
    T: tuple[float, ...]
    n: int = 512
    chi_max: object = None
    o_max: object = None
    products: Products = field(default_factory=Products)
    name: str = "run"

    def postselection(self, T: float, target=None) -> PostSelection:
        """Post-selection for duration T (``target`` replaces the configured state)."""
        post = _postselection(self.post if target is None else target, self.p_e)
        if self.frame_correction:
            post = frame_rotate(post, self.system.hamiltonian, T)
        return post


def _postselection(state, p_e: float) -> PostSelection:
    if isinstance(state, dict) or state is None or (isinstance(state, str) and state.lower() == "none"):
        return build_postselection(state)
    if p_e:
        return build_postselection(None, psi1=state, p_e=p_e)
    return build_postselection(state)


def _state(value, what: str):
    try:
        return BlochVector.of(value)
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _number(value, what: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number, got {value!r}") from None
    if not np.isfinite(x):
        raise ConfigError(f"{what} must be finite")
    return x


def _system(raw: dict) -> SystemConfig:
    tag = raw.get("scenario")
    if tag is not None:
        if tag not in SCENARIOS:
            raise ConfigError(f"unknown scenario {tag!r}; expected one of {SCENARIOS}")
        opts = raw.get("scenario_options", {}) or {}
        unknown = set(opts) - {"omega", "t_a", "a_vq"}
        if unknown:
            raise ConfigError(f"unknown scenario_options {sorted(unknown)}")
        sysc = scenario(tag, **{k: _number(v, k) for k, v in opts.items()})
    else:
        if "model" not in raw or "correlators" not in raw:
            raise ConfigError("without a scenario, 'model' and 'correlators' are required")
        sysc = SystemConfig(raw["model"], DetectorCorrelators(**_correlator_args(raw["correlators"], None)),
                            name=raw.get("name", "custom"))
    if "correlators" in raw and tag is not None:
        sysc = replace(sysc, correlators=DetectorCorrelators(
            **_correlator_args(raw["correlators"], sysc.correlators)))
    if "hamiltonian" in raw:
        h = raw["hamiltonian"]
        unknown = set(h) - {"omega_x", "omega_y", "delta"}
        if unknown:
            raise ConfigError(f"unknown hamiltonian keys {sorted(unknown)}")
        sysc = sysc.with_hamiltonian(**{k: _number(v, k) for k, v in h.items()})
    if "rates" in raw:
        r = raw["rates"]
        unknown = set(r) - {"gamma_d", "gamma_up", "gamma_down"}
        if unknown:
            raise ConfigError(f"unknown rate keys {sorted(unknown)}")
        base = sysc.rates
        sysc = replace(sysc, rates=DissipationRates(
            **{k: _number(r.get(k, getattr(base, k)), k) for k in ("gamma_d", "gamma_up", "gamma_down")}))
    if "name" in raw:
        sysc = replace(sysc, name=str(raw["name"]))
    return sysc


def _correlator_args(raw: dict, base: DetectorCorrelators | None) -> dict:
    keys = ("s_qq", "s_vv", "a_vq", "s_qv", "a_qv")
    unknown = set(raw) - set(keys)
    if unknown:
        raise ConfigError(f"unknown correlator keys {sorted(unknown)}")
    if base is None:
        missing = {"s_qq", "s_vv", "a_vq"} - set(raw)
        if missing:
            raise ConfigError(f"missing correlators {sorted(missing)}")
        return {k: raw[k] for k in keys if k in raw}
    return {k: raw.get(k, getattr(base, k)) for k in keys}


def _times(raw: dict, sysc: SystemConfig) -> tuple[float, ...]:
    if "T" not in raw:
        raise ConfigError("'T' (list of measurement durations) is required")
    values = raw["T"] if isinstance(raw["T"], list) else [raw["T"]]
    if not values:
        raise ConfigError("'T' must not be empty")
    values = [_number(v, "T") for v in values]
    if min(values) <= 0:
        raise ConfigError("all T values must be positive")
    unit = raw.get("T_unit", "abs")
    if unit not in T_UNITS:
        raise ConfigError(f"T_unit must be one of {T_UNITS}")
    if unit == "t_a":
        scale = float(np.mean(sysc.t_a))
    elif unit == "inv_omega":
        omega = np.sqrt(sysc.hamiltonian.omega_bar_sq)
        if omega == 0:
            raise ConfigError("T_unit 'inv_omega' needs a nonzero Rabi frequency")
        scale = 1.0 / omega
    else:
        scale = 1.0
    return tuple(v * scale for v in values)


def _products(raw: dict) -> Products:
    p = raw.get("products", {}) or {}
    unknown = set(p) - _PRODUCT_KEYS
    if unknown:
        raise ConfigError(f"unknown products {sorted(unknown)}")
    slices = p.get("slices") or {}
    axis = int(slices.get("axis", 2)) if slices else 2
    if axis not in (1, 2):
        raise ConfigError("slices.axis must be 1 or 2 (the conditioning output)")
    shifts = p.get("shifts")
    req = None
    if shifts:
        shifts = {} if shifts is True else dict(shifts)
        unknown = set(shifts) - {"p_i", "p_f", "axis", "xi", "grid2d"}
        if unknown:
            raise ConfigError(f"unknown shift options {sorted(unknown)}")
        req = ShiftRequest(**shifts)
        _state(req.p_i, "shifts.p_i")
        _state(req.p_f, "shifts.p_f")
        if req.axis not in ("x", "y", "z"):
            raise ConfigError("shifts.axis must be x, y or z")
        if _number(req.xi, "shifts.xi") <= 0:
            raise ConfigError("shifts.xi must be positive")
    return Products(
        joint=bool(p.get("joint", True)),
        marginals=bool(p.get("marginals", False)),
        moments=bool(p.get("moments", True)),
        slice_axis=axis,
        slice_values=tuple(_number(v, "slice value") for v in slices.get("values", [])),
        differences=bool(p.get("differences", False)),
        certainty=bool(p.get("certainty", False)),
        certainty_given=_number(p.get("certainty_given", 0.0), "certainty_given"),
        shifts=req,
    )


def parse_config(raw: dict) -> RunConfig:
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    try:
        sysc = _system(raw)
        prep = _state(raw.get("prep", "Z+"), "prep")
        post = raw.get("post", "none")
        p_e = _number(raw.get("p_e", 0.0), "p_e")
        if not 0 <= p_e <= 1:
            raise ConfigError("p_e must lie in [0, 1]")
        _postselection(post, p_e)
        if not isinstance(post, (str, dict)):
            state_vector(post)
        grid = raw.get("grid", {}) or {}
        unknown = set(grid) - {"n", "chi_max", "o_max"}
        if unknown:
            raise ConfigError(f"unknown grid keys {sorted(unknown)}")
        n = int(grid.get("n", 512))
        return RunConfig(
            system=sysc, prep=prep, post=post, p_e=p_e,
            frame_correction=bool(raw.get("frame_correction", False)),
            T=_times(raw, sysc), n=n, chi_max=grid.get("chi_max"), o_max=grid.get("o_max"),
            products=_products(raw), name=str(raw.get("name", sysc.name)),
        )
    except ConfigError:
        raise
    except (CWLMError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from None
    return parse_config(raw)


__all__ = ["ConfigError", "Products", "RunConfig", "ShiftRequest", "load_config",
           "parse_config"]
