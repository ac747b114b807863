"""Strict TOML model definitions.

Example::

    rho = 0.05

    [model]
    family = "log_ak"
    gamma = 0.1

    [grid]
    k_lo = 0.1
    k_hi = 10.0
    n = 400

    [assumption6]
    k_star = 1.0
    k_plus = 1.0
    c_star = 0.0
    gamma = 0.1
    delta = 1.0
    theta = 1.0
    a = 1.0
    b = 0.0
    C = 0.0

Unknown tables or keys raise :class:`ConfigError` naming the key.
"""

import hashlib
import importlib
import sys
from dataclasses import dataclass
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .hjb import SolveConfig, ValueGrid
from .model import (Assumption6Params, ModelSpec, make_ak_crra, make_linear_counterexample,
                    make_log_ak, make_rck_cobb_douglas)

FAMILY_KEYS = {
    "log_ak": {"gamma"},
    "ak_crra": {"gamma", "theta"},
    "rck_cobb_douglas": {"alpha", "d", "theta", "tfp"},
    "linear_counterexample": set(),
    "custom": {"factory"},
}
REQUIRED = {
    "log_ak": {"gamma"},
    "ak_crra": {"gamma", "theta"},
    "rck_cobb_douglas": {"alpha", "d"},
    "linear_counterexample": set(),
    "custom": {"factory"},
}
TOP_KEYS = {"rho", "model", "grid", "policy", "assumption6", "solve"}
GRID_KEYS = {"k_lo", "k_hi", "n"}
POLICY_KEYS = {"c_cap"}
A6_KEYS = {"k_star", "k_plus", "c_star", "gamma", "delta", "theta", "a", "b", "C"}
SOLVE_KEYS = {"max_iters", "residual_tol", "relaxation", "scheme", "dt", "horizon"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: ModelSpec
    grid: ValueGrid
    a6: Optional[Assumption6Params]
    solve: SolveConfig
    horizon: Optional[float]
    raw: dict
    config_hash: str


def _reject_unknown(table, allowed, where):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{where}{key}'")


def _number(table, key, where, cast=float):
    val = table[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"key '{where}{key}' must be a number, got {val!r}")
    return cast(val)


def _build_model(raw):
    if "rho" not in raw:
        raise ConfigError("missing key 'rho'")
    rho = _number(raw, "rho", "")
    model_t = raw.get("model")
    if not isinstance(model_t, dict) or "family" not in model_t:
        raise ConfigError("missing key 'model.family'")
    family = model_t["family"]
    if family not in FAMILY_KEYS:
        raise ConfigError(f"unknown model.family {family!r}; expected one of {sorted(FAMILY_KEYS)}")
    _reject_unknown(model_t, FAMILY_KEYS[family] | {"family"}, "model.")
    missing = REQUIRED[family] - set(model_t)
    if missing:
        raise ConfigError(f"missing key 'model.{sorted(missing)[0]}' for family {family!r}")
    grid_t = raw.get("grid", {})
    _reject_unknown(grid_t, GRID_KEYS, "grid.")
    k_lo = _number(grid_t, "k_lo", "grid.") if "k_lo" in grid_t else None
    k_hi = _number(grid_t, "k_hi", "grid.") if "k_hi" in grid_t else None
    policy_t = raw.get("policy", {})
    _reject_unknown(policy_t, POLICY_KEYS, "policy.")
    c_cap = _number(policy_t, "c_cap", "policy.") if "c_cap" in policy_t else None

    defaults = {"rck_cobb_douglas": (0.2, 10.0)}.get(family, (0.1, 10.0))
    k_domain = (k_lo if k_lo is not None else defaults[0],
                k_hi if k_hi is not None else defaults[1])
    p = {k: v for k, v in model_t.items() if k != "family"}
    try:
        if family == "log_ak":
            model = make_log_ak(float(p["gamma"]), rho, k_domain, c_cap)
        elif family == "ak_crra":
            model = make_ak_crra(float(p["gamma"]), float(p["theta"]), rho, k_domain, c_cap)
        elif family == "rck_cobb_douglas":
            model = make_rck_cobb_douglas(float(p["alpha"]), float(p["d"]), rho,
                                          float(p.get("theta", 1.0)), float(p.get("tfp", 1.0)),
                                          k_domain, c_cap)
        elif family == "linear_counterexample":
            model = make_linear_counterexample(rho, k_domain, c_cap)
        else:
            model = _custom(p["factory"], rho, k_domain, c_cap)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model parameters: {exc}") from exc
    n = int(_number(grid_t, "n", "grid.")) if "n" in grid_t else 400
    return model, n


def _custom(spec, rho, k_domain, c_cap):
    """``factory = "package.module:function"`` called as ``fn(rho=, k_domain=, c_cap=)``."""
    if not isinstance(spec, str) or ":" not in spec:
        raise ConfigError("model.factory must look like 'module:function'")
    mod_name, fn_name = spec.split(":", 1)
    try:
        fn = getattr(importlib.import_module(mod_name), fn_name)
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"cannot import model.factory {spec!r}: {exc}") from exc
    model = fn(rho=rho, k_domain=k_domain, c_cap=c_cap)
    if not isinstance(model, ModelSpec):
        raise ConfigError("model.factory must return a ModelSpec")
    return model


def parse_config(raw, config_hash=""):
    if not isinstance(raw, dict):
        raise ConfigError("config must be a table")
    _reject_unknown(raw, TOP_KEYS, "")
    for key in TOP_KEYS - {"rho"}:
        if key in raw and not isinstance(raw[key], dict):
            raise ConfigError(f"key '{key}' must be a table")
    model, n = _build_model(raw)
    grid = ValueGrid.template(*model.k_domain, n)

    a6 = None
    if "assumption6" in raw:
        t = raw["assumption6"]
        _reject_unknown(t, A6_KEYS, "assumption6.")
        missing = A6_KEYS - set(t)
        if missing:
            raise ConfigError(f"missing key 'assumption6.{sorted(missing)[0]}'")
        vals = {k: _number(t, k, "assumption6.") for k in A6_KEYS}
        try:
            a6 = Assumption6Params(vals["k_star"], vals["k_plus"], vals["c_star"], vals["gamma"],
                                   vals["delta"], vals["theta"], vals["a"], vals["b"], vals["C"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid assumption6 parameters: {exc}") from exc

    solve_t = dict(raw.get("solve", {}))
    _reject_unknown(solve_t, SOLVE_KEYS, "solve.")
    horizon = solve_t.pop("horizon", None)
    try:
        solve = SolveConfig(**solve_t)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solve parameters: {exc}") from exc
    return RunConfig(model, grid, a6, solve, None if horizon is None else float(horizon),
                     raw, config_hash)


def load_config(path):
    """Parse a TOML model definition into a :class:`RunConfig`."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        raw = tomllib.loads(data.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(raw, hashlib.sha256(data).hexdigest())
