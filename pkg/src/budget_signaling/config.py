"""YAML run configuration: parsing with line-aware diagnostics, defaults, dumping.

Example document::

    model:
      cost: {family: power, a: 2, b: 2}
      output: {family: affine, gamma: 0}
      noncog: {family: quadratic}
      alpha: 1.0
      budget: 2.0            # or a list, which makes a sweep
    distribution: {family: uniform, t_lo: 1, t_hi: 3}
"""
from __future__ import annotations

from dataclasses import dataclass

import yaml

from .errors import SchemaError, UnknownFamily
from .families import make_family
from .model import ModelPrimitives, TypeDistribution

DEFAULTS = {
    "grids": {"types": 2001, "messages": 201, "ic_types": 201, "off_path": 50},
    "tolerances": {"ic": 1e-4, "ode_rtol": 1e-9, "ode_atol": 1e-11},
    "oracle": {"types": 400, "signals": 400},
    "output": {"dir": "out"},
    "seed": 0,
    "workers": 1,
}

_TOP_KEYS = {"model", "distribution", "grids", "tolerances", "oracle", "output", "seed", "workers"}
_MODEL_KEYS = {"cost", "output", "noncog", "alpha", "budget"}


@dataclass(frozen=True)
class RunConfig:
    cost: tuple  # (family name, params dict)
    output: tuple
    noncog: tuple
    alpha: float
    budgets: tuple  # one entry per solve job
    sweep: bool  # budget was given as a list
    distribution: tuple  # (family name, t_lo, t_hi, params dict)
    type_grid: int = 2001
    message_grid: int = 201
    ic_types: int = 201
    off_path_grid: int = 50
    ic_tolerance: float = 1e-4
    ode_rtol: float = 1e-9
    ode_atol: float = 1e-11
    oracle_types: int = 400
    oracle_signals: int = 400
    out_dir: str = "out"
    seed: int = 0
    workers: int = 1

    def primitives(self, budget):
        return ModelPrimitives.from_names(self.cost, self.output, self.noncog, self.alpha, budget)

    def type_distribution(self):
        name, lo, hi, params = self.distribution
        return TypeDistribution.from_name(name, lo, hi, **params)

    @property
    def jobs(self):
        return list(self.budgets)


# --- line lookup ------------------------------------------------------------------


def _line_index(text):
    """Map dotted key paths to 1-based line numbers using the YAML node tree."""
    index = {}

    def walk(node, path):
        index[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = f"{path}.{k.value}" if path else str(k.value)
                index[key] = k.start_mark.line + 1
                walk(v, key)
                index[key] = k.start_mark.line + 1
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, f"{path}[{i}]")

    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return index
    if root is not None:
        walk(root, "")
    return index


class _Reader:
    def __init__(self, text):
        self.lines = _line_index(text)

    def fail(self, message, path, cls=SchemaError):
        raise cls(message, field=path, line=self.lines.get(path))

    def mapping(self, value, path):
        if not isinstance(value, dict):
            self.fail("expected a mapping", path)
        return value

    def number(self, value, path, positive=False, nonnegative=False):
        if isinstance(value, bool):
            self.fail("expected a number", path)
        try:
            x = float(value)  # YAML 1.1 reads 1e-4 as a string
        except (TypeError, ValueError):
            self.fail(f"expected a number, got {value!r}", path)
        if x != x or x in (float("inf"), float("-inf")):
            self.fail("must be finite", path)
        if positive and not x > 0:
            self.fail(f"must be positive, got {x}", path)
        if nonnegative and x < 0:
            self.fail(f"must be nonnegative, got {x}", path)
        return x

    def integer(self, value, path, minimum=1):
        x = self.number(value, path)
        if x != int(x) or x < minimum:
            self.fail(f"must be an integer >= {minimum}, got {value!r}", path)
        return int(x)

    def unknown(self, data, allowed, path):
        for k in data:
            if k not in allowed:
                sub = f"{path}.{k}" if path else str(k)
                self.fail(f"unknown key (allowed: {', '.join(sorted(allowed))})", sub)

    def family(self, kind, value, path):
        entry = dict(self.mapping(value, path))
        name = entry.pop("family", None)
        if not isinstance(name, str):
            self.fail("missing 'family' name", f"{path}.family" if "family" in value else path)
        params = {k: self.number(v, f"{path}.{k}") for k, v in entry.items()}
        try:
            make_family(kind, name, **params)
        except UnknownFamily as exc:
            msg = str(exc).split(": ", 1)[-1]
            self.fail(msg, f"{path}.family", UnknownFamily)
        return name, params


def parse_config(text):
    """Parse a YAML document into a RunConfig with defaults filled in."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                          line=None if mark is None else mark.line + 1) from None
    r = _Reader(text)
    data = r.mapping(data, "")
    r.unknown(data, _TOP_KEYS, "")
    for key in ("model", "distribution"):
        if key not in data:
            r.fail("required section missing", key)

    model = r.mapping(data["model"], "model")
    r.unknown(model, _MODEL_KEYS, "model")
    for key in _MODEL_KEYS:
        if key not in model:
            r.fail("required key missing", f"model.{key}")
    cost = r.family("cost", model["cost"], "model.cost")
    output = r.family("output", model["output"], "model.output")
    noncog = r.family("noncog", model["noncog"], "model.noncog")
    alpha = r.number(model["alpha"], "model.alpha", nonnegative=True)
    raw = model["budget"]
    sweep = isinstance(raw, list)
    if sweep:
        if not raw:
            r.fail("budget list is empty", "model.budget")
        budgets = tuple(r.number(v, f"model.budget[{i}]", positive=True) for i, v in enumerate(raw))
    else:
        budgets = (r.number(raw, "model.budget", positive=True),)

    dist = dict(r.mapping(data["distribution"], "distribution"))
    for key in ("t_lo", "t_hi"):
        if key not in dist:
            r.fail("required key missing", f"distribution.{key}")
    t_lo = r.number(dist.pop("t_lo"), "distribution.t_lo", positive=True)
    t_hi = r.number(dist.pop("t_hi"), "distribution.t_hi", positive=True)
    if not t_lo < t_hi:
        r.fail(f"need t_lo < t_hi, got [{t_lo}, {t_hi}]", "distribution.t_hi")
    dname, dparams = r.family("distribution", dist, "distribution")

    sections = {}
    for key in ("grids", "tolerances", "oracle", "output"):
        sec = r.mapping(data.get(key, {}) or {}, key)
        r.unknown(sec, set(DEFAULTS[key]), key)
        sections[key] = {**DEFAULTS[key], **sec}
    g, tol, orc = sections["grids"], sections["tolerances"], sections["oracle"]
    out_dir = sections["output"]["dir"]
    if not isinstance(out_dir, str) or not out_dir:
        r.fail("expected a non-empty path", "output.dir")

    return RunConfig(
        cost=cost, output=output, noncog=noncog, alpha=alpha, budgets=budgets, sweep=sweep,
        distribution=(dname, t_lo, t_hi, dparams),
        type_grid=r.integer(g["types"], "grids.types", 2),
        message_grid=r.integer(g["messages"], "grids.messages", 2),
        ic_types=r.integer(g["ic_types"], "grids.ic_types", 2),
        off_path_grid=r.integer(g["off_path"], "grids.off_path", 2),
        ic_tolerance=r.number(tol["ic"], "tolerances.ic", positive=True),
        ode_rtol=r.number(tol["ode_rtol"], "tolerances.ode_rtol", positive=True),
        ode_atol=r.number(tol["ode_atol"], "tolerances.ode_atol", positive=True),
        oracle_types=r.integer(orc["types"], "oracle.types", 1),
        oracle_signals=r.integer(orc["signals"], "oracle.signals", 2),
        out_dir=out_dir,
        seed=r.integer(data.get("seed", DEFAULTS["seed"]), "seed", 0),
        workers=r.integer(data.get("workers", DEFAULTS["workers"]), "workers", 1),
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg):
    fam = lambda pair: {"family": pair[0], **pair[1]}
    dname, t_lo, t_hi, dparams = cfg.distribution
    return {
        "model": {
            "cost": fam(cfg.cost), "output": fam(cfg.output), "noncog": fam(cfg.noncog),
            "alpha": cfg.alpha,
            "budget": list(cfg.budgets) if cfg.sweep else cfg.budgets[0],
        },
        "distribution": {"family": dname, "t_lo": t_lo, "t_hi": t_hi, **dparams},
        "grids": {"types": cfg.type_grid, "messages": cfg.message_grid, "ic_types": cfg.ic_types,
                  "off_path": cfg.off_path_grid},
        "tolerances": {"ic": cfg.ic_tolerance, "ode_rtol": cfg.ode_rtol, "ode_atol": cfg.ode_atol},
        "oracle": {"types": cfg.oracle_types, "signals": cfg.oracle_signals},
        "output": {"dir": cfg.out_dir},
        "seed": cfg.seed,
        "workers": cfg.workers,
    }


def dump_config(cfg):
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
