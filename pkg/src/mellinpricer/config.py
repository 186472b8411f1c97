"""Run-configuration loading for the command-line front end.

One JSON format, schema-validated before any computation.  Parse errors
report line/column; schema errors report the offending field path; the
correlation-matrix definiteness check reports the offending eigenvalue.
"""

from dataclasses import dataclass, field
import json
import math
from typing import Optional

import jsonschema
import numpy as np

from .errors import ConfigError, NotPositiveDefiniteError
from .levy_models import CharacteristicModel, KouJumps, MertonJumps, NoJumps, validate_correlation
from .mellin import ContourSpec
from .oracles import McConfig
from .payoffs import OptionSpec

FORMAT_VERSION = 1

_JUMP_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {"variant": {"const": "none"}},
            "required": ["variant"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "variant": {"const": "merton"},
                "intensity": {"type": "number", "minimum": 0},
                "mean": {"type": "number"},
                "std": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["variant", "intensity", "mean", "std"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "variant": {"const": "kou"},
                "intensity": {"type": "number", "minimum": 0},
                "up_prob": {"type": "number", "minimum": 0, "maximum": 1},
                "up_rate": {"type": "number", "exclusiveMinimum": 0},
                "down_rate": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["variant", "intensity", "up_prob", "up_rate", "down_rate"],
            "additionalProperties": False,
        },
    ],
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "model": {
            "type": "object",
            "properties": {
                "type": {"enum": ["gbm", "merton", "kou"]},
                "vols": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "corr": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "number"}},
                    "minItems": 1,
                },
                "jumps": {"type": "array", "items": _JUMP_SCHEMA},
                "drift_convention": {"enum": ["martingale", "paper_literal"]},
            },
            "required": ["type", "vols", "corr"],
            "additionalProperties": False,
        },
        "option": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["basket_put", "basket_call_via_parity"]},
                "style": {"enum": ["european", "american"]},
                "strike": {"type": "number", "exclusiveMinimum": 0},
                "maturity": {"type": "number", "exclusiveMinimum": 0},
                "spots": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "rate": {"type": "number", "minimum": 0},
            },
            "required": ["kind", "style", "strike", "maturity", "spots", "rate"],
            "additionalProperties": False,
        },
        "numerics": {
            "type": "object",
            "properties": {
                "abscissa": {
                    "anyOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}}, {"type": "null"}]
                },
                "half_width": {
                    "anyOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}}, {"type": "null"}]
                },
                "nodes": {
                    "anyOf": [{"type": "integer"}, {"type": "array", "items": {"type": "integer"}}, {"type": "null"}]
                },
                "time_steps": {"type": "integer", "minimum": 16},
            },
            "additionalProperties": False,
        },
        "validation": {
            "type": "object",
            "properties": {
                "oracles": {
                    "type": "array",
                    "items": {"enum": ["black_scholes", "binomial", "mc", "lsq"]},
                },
                "mc_paths": {"type": "integer", "minimum": 10000},
                "mc_steps": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "antithetic": {"type": "boolean"},
                "binomial_steps": {"type": "integer", "minimum": 100},
                "lsq_exercise_dates": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "converge": {
            "type": "object",
            "properties": {
                "knob": {"enum": ["nodes", "time_steps"]},
                "doublings": {"type": "integer", "minimum": 2, "maximum": 12},
            },
            "required": ["knob"],
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {
                "format": {"enum": ["table", "csv", "json"]},
                "path": {"anyOf": [{"type": "string"}, {"type": "null"}]},
            },
            "additionalProperties": False,
        },
    },
    "required": ["model", "option"],
    "additionalProperties": False,
}

_JUMP_BUILDERS = {
    "none": lambda d: NoJumps(),
    "merton": lambda d: MertonJumps(intensity=d["intensity"], mean=d["mean"], std=d["std"]),
    "kou": lambda d: KouJumps(
        intensity=d["intensity"],
        up_prob=d["up_prob"],
        up_rate=d["up_rate"],
        down_rate=d["down_rate"],
    ),
}


@dataclass
class RunConfig:
    """Parsed configuration with lazily built domain objects."""

    raw: dict
    model: CharacteristicModel
    option: OptionSpec
    contour: Optional[ContourSpec]
    time_steps: int
    oracles: list
    mc: McConfig
    binomial_steps: int
    lsq_exercise_dates: int
    converge_knob: Optional[str] = None
    converge_doublings: int = 5
    output_format: str = "table"
    output_path: Optional[str] = None
    seed: int = field(default=0)


def _build_model(block):
    family = block["type"]
    vols = block["vols"]
    n = len(vols)
    corr = block["corr"]
    if len(corr) != n or any(len(row) != n for row in corr):
        raise ConfigError(f"model.corr must be {n}x{n} to match model.vols")
    try:
        validate_correlation(np.asarray(corr, dtype=float))
    except (NotPositiveDefiniteError, ValueError) as exc:
        raise ConfigError(f"model.corr: {exc}") from exc
    jump_dicts = block.get("jumps", [])
    if jump_dicts and len(jump_dicts) != n:
        raise ConfigError("model.jumps must have one entry per asset")
    jumps = tuple(_JUMP_BUILDERS[d["variant"]](d) for d in jump_dicts) or tuple(
        NoJumps() for _ in range(n)
    )
    for k, jump in enumerate(jumps):
        variant = type(jump).__name__
        if family == "gbm" and not isinstance(jump, NoJumps):
            raise ConfigError(f"model.jumps[{k}]: gbm models take no jumps (got {variant})")
        if family == "merton" and isinstance(jump, KouJumps):
            raise ConfigError(f"model.jumps[{k}]: merton models take merton/none jumps")
        if family == "kou" and isinstance(jump, MertonJumps):
            raise ConfigError(f"model.jumps[{k}]: kou models take kou/none jumps")
    convention = block.get("drift_convention", "martingale")
    return CharacteristicModel.calibrated(vols, corr, jumps, 0.0, convention)


def _build_contour(block, n):
    if block is None:
        return None
    fields = [block.get("abscissa"), block.get("half_width"), block.get("nodes")]
    if all(v is None for v in fields):
        return None
    if any(v is None for v in fields):
        raise ConfigError("numerics: abscissa, half_width and nodes must be given together")

    def broadcast(v):
        return tuple(v) if isinstance(v, list) else (v,) * n

    try:
        return ContourSpec(broadcast(fields[0]), broadcast(fields[1]), broadcast(fields[2]))
    except ValueError as exc:
        raise ConfigError(f"numerics: {exc}") from exc


def parse_config(raw):
    """Validate a parsed JSON document and build the domain objects."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config field {path}: {exc.message}") from exc

    model = _build_model(raw["model"])
    opt = raw["option"]
    try:
        option = OptionSpec(
            strike=opt["strike"],
            maturity=opt["maturity"],
            style=opt["style"],
            kind=opt["kind"],
            spot=tuple(opt["spots"]),
            rate=opt["rate"],
        )
    except ValueError as exc:
        raise ConfigError(f"option: {exc}") from exc
    if option.n != model.n:
        raise ConfigError(
            f"option.spots has {option.n} assets but model.vols has {model.n}"
        )
    # The drift convention is rate-dependent; rebuild now the rate is known.
    convention = raw["model"].get("drift_convention", "martingale")
    model = CharacteristicModel.calibrated(
        raw["model"]["vols"], raw["model"]["corr"], model.triplet.jumps, option.rate, convention
    )

    numerics = raw.get("numerics", {})
    validation = raw.get("validation", {})
    converge = raw.get("converge")
    output = raw.get("output", {})
    seed = validation.get("seed", 0)
    try:
        mc = McConfig(
            paths=validation.get("mc_paths", 100_000),
            steps=validation.get("mc_steps", 1),
            seed=seed,
            antithetic=validation.get("antithetic", False),
        )
    except ValueError as exc:
        raise ConfigError(f"validation: {exc}") from exc

    return RunConfig(
        raw=raw,
        model=model,
        option=option,
        contour=_build_contour(numerics, option.n),
        time_steps=numerics.get("time_steps", 64),
        oracles=validation.get("oracles", _default_oracles(option, raw["model"]["type"])),
        mc=mc,
        binomial_steps=validation.get("binomial_steps", 10_000),
        lsq_exercise_dates=validation.get("lsq_exercise_dates", 32),
        converge_knob=converge["knob"] if converge else None,
        converge_doublings=converge.get("doublings", 5) if converge else 5,
        output_format=output.get("format", "table"),
        output_path=output.get("path"),
        seed=seed,
    )


def _default_oracles(option, family):
    if option.style == "european":
        names = ["mc"]
        if option.n == 1 and family == "gbm":
            names.insert(0, "black_scholes")
        return names
    names = ["lsq"]
    if option.n == 1 and family == "gbm":
        names.insert(0, "binomial")
    return names


def load_config(path):
    """Read, parse and validate a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(raw)


def reseed(config, seed):
    """Return a copy of the configuration with a new Monte Carlo seed."""
    config.seed = seed
    config.mc = McConfig(
        paths=config.mc.paths, steps=config.mc.steps, seed=seed, antithetic=config.mc.antithetic
    )
    return config
