"""Run configuration: TOML files, presets for the worked examples, validation.

A configuration is a nested mapping::

    q = 0.05
    seed = 0

    [model]
    kind = "cramer-lundberg"        # or "cramer-lundberg-diffusion", "stable"
    c = 1.0
    lam = 1.0
    sigma = 0.0
    alpha = 1.5                     # stable only
    orientation = "spectrally-negative"   # or "dual"
    [model.claims]
    dist = "lomax"                  # "exponential" (rate), "lomax" (scale, shape), "gamma" (shape, scale)
    scale = 1.0
    shape = 1.5

    [regime]
    type = "no-cost"                # "cost" (needs beta) or "dual"
    beta = 0.01

    [problem]
    x = [1.0]
    K = [0.9]
    lambda = [0.0, 1.0]
    b = [0.5, 1.0]

    [numerics]
    method = "auto"                 # "numeric-inversion" or "closed-form"
    precision = 1e-10
    n_terms = 20
    euler_terms = 12
    grid_step = 0.01
    search_bound = 10.0

    [simulation]
    n_paths = 100000
    dt = 0.01
    antithetic = false
    policy = "optimal"              # "barrier", "band" or "none"
    level = 1.0                     # barrier
    lower = 0.5                     # band
    upper = 1.5

    [output]
    dir = "."
    format = "csv"                  # or "svg" (CSV is always written)
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import sys

from . import levy
from .constrained import Dual, NoCost, TransactionCost
from .errors import ConfigError, DomainError
from .inversion import InversionParams
from .scale import ScaleEvaluator, ScaleMethod

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

PRESETS = {
    1: {
        "q": 0.05,
        "model": {"kind": "cramer-lundberg", "c": 1.0, "lam": 1.0,
                  "claims": {"dist": "lomax", "scale": 1.0, "shape": 1.5}},
        "regime": {"type": "no-cost"},
        "problem": {"K": [0.8, 0.85, 0.9]},
    },
    2: {
        "q": 0.03,
        "model": {"kind": "cramer-lundberg-diffusion", "c": 1.0, "lam": 0.4, "sigma": 0.5,
                  "orientation": "dual", "claims": {"dist": "gamma", "shape": 2.0, "scale": 1.0}},
        "regime": {"type": "dual"},
        "problem": {"K": [0.93, 0.95, 0.97]},
    },
    3: {
        "q": 0.1,
        "model": {"kind": "stable", "alpha": 1.5},
        "regime": {"type": "cost", "beta": 0.01},
        "problem": {"x": [3.0], "K": [0.35, 0.4, 0.5]},
    },
}

_SCHEMA = {
    "q": None,
    "seed": None,
    "model": {"kind", "c", "lam", "sigma", "alpha", "orientation", "claims"},
    "regime": {"type", "beta"},
    "problem": {"x", "K", "lambda", "b"},
    "numerics": {"method", "precision", "n_terms", "euler_terms", "grid_step", "search_bound"},
    "simulation": {"n_paths", "dt", "horizon", "antithetic", "policy", "level", "lower", "upper"},
    "output": {"dir", "format"},
}

_CLAIM_FIELDS = {
    "exponential": ("rate",),
    "lomax": ("scale", "shape"),
    "gamma": ("shape", "scale"),
}


def load(path) -> dict:
    """Read a TOML configuration file."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError([("--config", f"cannot read {path}: {exc.strerror}")]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([("--config", f"invalid TOML: {exc}")]) from None


def preset(n: int) -> dict:
    if n not in PRESETS:
        raise ConfigError([("--paper-example", f"must be one of {sorted(PRESETS)}")])
    return copy.deepcopy(PRESETS[n])


def merge(base: dict, override: dict) -> dict:
    """Recursive dictionary update; ``override`` wins."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def config_hash(cfg: dict) -> str:
    """Digest of everything except the output block, so results do not depend on where they are written."""
    cfg = {k: v for k, v in cfg.items() if k != "output"}
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _number(problems, where, value, positive=False, nonneg=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append((where, f"expected a number, got {value!r}"))
        return None
    if integer and int(value) != value:
        problems.append((where, f"expected an integer, got {value!r}"))
        return None
    value = float(value)
    if not math.isfinite(value):
        problems.append((where, "must be finite"))
    elif positive and not value > 0:
        problems.append((where, "must be positive"))
    elif nonneg and value < 0:
        problems.append((where, "must be nonnegative"))
    return value


def _number_list(problems, where, value, lo=None, hi=None):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        problems.append((where, "expected a nonempty list of numbers"))
        return None
    out = []
    for i, v in enumerate(value):
        num = _number(problems, f"{where}[{i}]", v)
        if num is None:
            return None
        if (lo is not None and num < lo) or (hi is not None and num > hi):
            problems.append((f"{where}[{i}]", f"must lie in [{lo}, {hi if hi is not None else 'inf'}]"))
        out.append(num)
    return out


def validate(cfg: dict) -> dict:
    """Return ``cfg`` if it is valid; otherwise raise ConfigError listing every problem."""
    problems = []
    for key in cfg:
        if key not in _SCHEMA:
            problems.append((key, "unknown key"))
    for section, fields in _SCHEMA.items():
        if fields is None or section not in cfg:
            continue
        if not isinstance(cfg[section], dict):
            problems.append((section, "expected a table"))
            continue
        for key in cfg[section]:
            if key not in fields:
                problems.append((f"{section}.{key}", "unknown key"))
    if "q" not in cfg:
        problems.append(("q", "missing"))
    else:
        _number(problems, "q", cfg["q"], positive=True)
    if "seed" in cfg:
        _number(problems, "seed", cfg["seed"], nonneg=True, integer=True)
    if not isinstance(cfg.get("model"), dict):
        problems.append(("model", "missing"))
    else:
        try:
            build_model(cfg["model"])
        except ConfigError as exc:
            problems.extend(exc.problems)
    regime = cfg.get("regime", {})
    if isinstance(regime, dict):
        kind = regime.get("type", "no-cost")
        if kind not in ("no-cost", "cost", "dual"):
            problems.append(("regime.type", f"must be no-cost, cost or dual, got {kind!r}"))
        if kind == "cost":
            if "beta" not in regime:
                problems.append(("regime.beta", "required for the cost regime"))
            else:
                _number(problems, "regime.beta", regime["beta"], positive=True)
        model = cfg.get("model", {})
        orient = model.get("orientation", "spectrally-negative") if isinstance(model, dict) else None
        if kind == "dual" and orient != "dual":
            problems.append(("regime.type", "the dual regime needs model.orientation = 'dual'"))
        if kind != "dual" and orient == "dual":
            problems.append(("model.orientation", "dual reserves need regime.type = 'dual'"))
    problem = cfg.get("problem", {})
    if isinstance(problem, dict):
        if "x" in problem:
            _number_list(problems, "problem.x", problem["x"], lo=0.0)
        if "K" in problem:
            _number_list(problems, "problem.K", problem["K"], lo=0.0, hi=1.0)
        if "lambda" in problem:
            _number_list(problems, "problem.lambda", problem["lambda"], lo=0.0)
        if "b" in problem:
            _number_list(problems, "problem.b", problem["b"], lo=0.0)
    num = cfg.get("numerics", {})
    if isinstance(num, dict):
        if "method" in num and num["method"] not in {m.value for m in ScaleMethod}:
            problems.append(("numerics.method", f"unknown method {num['method']!r}"))
        if "precision" in num:
            p = _number(problems, "numerics.precision", num["precision"], positive=True)
            if p is not None and not p < 1:
                problems.append(("numerics.precision", "must lie in (0, 1)"))
        for key in ("n_terms", "euler_terms"):
            if key in num:
                _number(problems, f"numerics.{key}", num[key], positive=True, integer=True)
        for key in ("grid_step", "search_bound"):
            if key in num:
                _number(problems, f"numerics.{key}", num[key], positive=True)
    sim = cfg.get("simulation", {})
    if isinstance(sim, dict):
        if "n_paths" in sim:
            n = _number(problems, "simulation.n_paths", sim["n_paths"], positive=True, integer=True)
            if n is not None and n < 2:
                problems.append(("simulation.n_paths", "need at least two paths"))
        for key in ("dt", "horizon"):
            if key in sim:
                _number(problems, f"simulation.{key}", sim[key], positive=True)
        for key in ("level", "lower", "upper"):
            if key in sim:
                _number(problems, f"simulation.{key}", sim[key], nonneg=True)
        if "antithetic" in sim and not isinstance(sim["antithetic"], bool):
            problems.append(("simulation.antithetic", "expected true or false"))
        policy = sim.get("policy", "optimal")
        if policy not in ("optimal", "barrier", "band", "none"):
            problems.append(("simulation.policy", f"unknown policy {policy!r}"))
        elif policy == "barrier" and "level" not in sim:
            problems.append(("simulation.level", "required for a barrier policy"))
        elif policy == "band":
            for key in ("lower", "upper"):
                if key not in sim:
                    problems.append((f"simulation.{key}", "required for a band policy"))
    out = cfg.get("output", {})
    if isinstance(out, dict):
        if "format" in out and out["format"] not in ("csv", "svg"):
            problems.append(("output.format", "must be csv or svg"))
        if "dir" in out and not isinstance(out["dir"], str):
            problems.append(("output.dir", "expected a path string"))
    if problems:
        raise ConfigError(problems)
    return cfg


def build_model(block: dict) -> levy.ProcessModel:
    problems = []
    kind = block.get("kind")
    if kind not in {k.value for k in levy.ModelKind}:
        raise ConfigError([("model.kind", f"unknown model kind {kind!r}")])
    orient = block.get("orientation", "spectrally-negative")
    if orient not in {o.value for o in levy.Orientation}:
        raise ConfigError([("model.orientation", f"unknown orientation {orient!r}")])
    claims = None
    if "claims" in block:
        cb = block["claims"]
        if not isinstance(cb, dict):
            raise ConfigError([("model.claims", "expected a table")])
        dist = cb.get("dist")
        if dist not in _CLAIM_FIELDS:
            raise ConfigError([("model.claims.dist", f"unknown claim distribution {dist!r}")])
        args = []
        for name in _CLAIM_FIELDS[dist]:
            if name not in cb:
                problems.append((f"model.claims.{name}", "missing"))
            else:
                args.append(_number(problems, f"model.claims.{name}", cb[name], positive=True))
        for key in cb:
            if key != "dist" and key not in _CLAIM_FIELDS[dist]:
                problems.append((f"model.claims.{key}", "unknown key"))
        if problems:
            raise ConfigError(problems)
        cls = {"exponential": levy.Exponential, "lomax": levy.Lomax, "gamma": levy.Gamma}[dist]
        try:
            claims = cls(*args)
        except DomainError as exc:
            raise ConfigError([("model.claims", str(exc))]) from None
    params = {}
    for key in ("c", "lam", "sigma", "alpha"):
        if key in block:
            params[key] = _number(problems, f"model.{key}", block[key])
    for key in ("lam", "sigma"):
        if params.get(key) is not None and params[key] < 0:
            problems.append((f"model.{key}", "must be nonnegative"))
    alpha = params.get("alpha")
    if kind == levy.ModelKind.STABLE.value and alpha is not None and not 1 < alpha < 2:
        problems.append(("model.alpha", f"must lie in (1, 2), got {alpha}"))
    if problems:
        raise ConfigError(problems)
    try:
        return levy.ProcessModel(kind, claims=claims, orientation=orient, **params)
    except DomainError as exc:
        raise ConfigError([("model", str(exc))]) from None


def build_regime(cfg: dict):
    regime = cfg.get("regime", {})
    kind = regime.get("type", "no-cost")
    if kind == "cost":
        return TransactionCost(float(regime["beta"]))
    if kind == "dual":
        return Dual()
    return NoCost()


def build_evaluator(cfg: dict) -> ScaleEvaluator:
    num = cfg.get("numerics", {})
    params = InversionParams(
        n_terms=int(num.get("n_terms", 20)),
        euler_terms=int(num.get("euler_terms", 12)),
        precision=float(num.get("precision", 1e-10)),
    )
    return ScaleEvaluator(
        build_model(cfg["model"]),
        float(cfg["q"]),
        method=num.get("method", "auto"),
        inversion=params,
        grid_step=float(num.get("grid_step", 1e-2)),
        search_bound=float(num.get("search_bound", 10.0)),
    )
