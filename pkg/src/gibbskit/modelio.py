"""Model and experiment files: versioned JSON validated with jsonschema.

A model file names an alphabet, a dimension, optional forbidden patterns, a
potential and a set of named boundary frames. Saving is canonical (sorted keys,
fixed indentation) so load -> save -> load is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .lattice import FiniteRegion
from .potential import (
    InteractionPotential,
    InteractionTerm,
    IsingParams,
    Potential,
    a_phi,
    geometric_pair_potential,
    ising,
    table_potential,
    zero_potential,
)
from .subshift import (
    Alphabet,
    ConstantBoundary,
    FramedConfiguration,
    Pattern,
    PeriodicBoundary,
    SftSpec,
    TabulatedBoundary,
)

MODEL_SCHEMA_ID = "gibbskit.model/1"
CONFIG_SCHEMA_ID = "gibbskit.config/1"

SUITES = (
    "spec-check",
    "dlr-check",
    "kms-check",
    "conformal-check",
    "capocaccia-check",
    "sample",
    "transfer-1d",
    "all",
)

_site = {"type": "array", "items": {"type": "integer"}, "minItems": 1}
_symbol = {"type": ["integer", "string"]}
_pattern_table = {
    "type": "array",
    "items": {
        "type": "object",
        "additionalProperties": False,
        "required": ["pattern", "value"],
        "properties": {"pattern": {"type": "array", "items": _symbol}, "value": {"type": "number"}},
    },
}

MODEL_SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "name", "dimension", "alphabet", "potential"],
    "properties": {
        "schema": {"const": MODEL_SCHEMA_ID},
        "name": {"type": "string"},
        "dimension": {"type": "integer", "minimum": 1},
        "alphabet": {"type": "array", "items": _symbol, "minItems": 1, "uniqueItems": True},
        "forbidden": {
            "type": "object",
            "additionalProperties": False,
            "required": ["shape", "patterns"],
            "properties": {
                "shape": {"type": "array", "items": _site, "minItems": 1},
                "patterns": {"type": "array", "items": {"type": "array", "items": _symbol}},
            },
        },
        "potential": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {"kind": {"const": "zero"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "J", "h"],
                    "properties": {
                        "kind": {"const": "ising"},
                        "J": {"type": "number"},
                        "h": {"type": "number"},
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "terms"],
                    "properties": {
                        "kind": {"const": "interaction"},
                        "terms": {
                            "type": "array",
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["shape", "table"],
                                "properties": {
                                    "shape": {"type": "array", "items": _site, "minItems": 1},
                                    "table": _pattern_table,
                                },
                            },
                        },
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "window", "table"],
                    "properties": {
                        "kind": {"const": "table"},
                        "window": {"type": "array", "items": _site, "minItems": 1},
                        "table": _pattern_table,
                    },
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "c", "q"],
                    "properties": {
                        "kind": {"const": "geometric_pair"},
                        "c": {"type": "number"},
                        "q": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    },
                },
            ]
        },
        "boundaries": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["type", "symbol"],
                        "properties": {"type": {"const": "constant"}, "symbol": _symbol},
                    },
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["type", "period", "values"],
                        "properties": {
                            "type": {"const": "periodic"},
                            "period": {"type": "array", "items": {"type": "integer", "minimum": 1}},
                            "values": {"type": "array", "items": _symbol},
                        },
                    },
                    {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["type", "default", "sites"],
                        "properties": {
                            "type": {"const": "tabulated"},
                            "default": _symbol,
                            "sites": {
                                "type": "array",
                                "items": {
                                    "type": "object",
                                    "additionalProperties": False,
                                    "required": ["site", "symbol"],
                                    "properties": {"site": _site, "symbol": _symbol},
                                },
                            },
                        },
                    },
                ]
            },
        },
    },
}

CONFIG_SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "model"],
    "properties": {
        "schema": {"const": CONFIG_SCHEMA_ID},
        "model": {"oneOf": [{"type": "string"}, {"type": "object"}]},
        "suites": {"type": "array", "items": {"enum": list(SUITES)}, "minItems": 1},
        "seed": {"type": "integer", "minimum": 0},
        "boundaries": {"type": "array", "items": {"type": "string"}},
        "max_region": {"type": "integer", "minimum": 1, "maximum": 12},
        "annulus": {"type": "integer", "minimum": 1},
        "measure": {"enum": ["gibbs", "uniform"]},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                k: {"type": "number", "exclusiveMinimum": 0}
                for k in ("spec", "gibbsian", "limit", "measure", "kms")
            },
        },
        "sampler": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "shape": {"type": "array", "items": {"type": "integer", "minimum": 3}, "minItems": 1},
                "sweeps": {"type": "integer", "minimum": 2},
                "burn_in": {"type": "integer", "minimum": 0},
                "batches": {"type": "integer", "minimum": 2},
                "sigmas": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "kms": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "instances": {"type": "integer", "minimum": 1},
                "max_class": {"type": "integer", "minimum": 1, "maximum": 12},
                "beta": {"type": "number"},
            },
        },
    },
}


class ModelError(ValueError):
    """A model or config file does not satisfy its schema."""


@dataclass(frozen=True)
class Model:
    name: str
    sft: SftSpec
    potential: Potential
    interaction: InteractionPotential | None
    boundaries: dict[str, FramedConfiguration]
    source: dict

    @property
    def dim(self) -> int:
        return self.sft.dim


def _validate(doc: Any, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ModelError(f"{what} invalid at {where}: {e.message}") from None


def _table(entries) -> dict[tuple, float]:
    return {tuple(e["pattern"]): float(e["value"]) for e in entries}


def model_from_dict(doc: Mapping) -> Model:
    _validate(doc, MODEL_SCHEMA, "model")
    d = doc["dimension"]
    symbols = tuple(doc["alphabet"])
    if "forbidden" in doc:
        fb = doc["forbidden"]
        shape = FiniteRegion(tuple(tuple(s) for s in fb["shape"]), d)
        if list(shape.sites) != sorted(set(shape.sites)):
            raise ModelError("forbidden shape sites must be distinct and in lexicographic order")
        try:
            sft = SftSpec(Alphabet(symbols), d, shape, frozenset(tuple(p) for p in fb["patterns"]))
        except ValueError as e:
            raise ModelError(f"forbidden patterns: {e}") from None
    else:
        sft = SftSpec.full_shift(symbols, d)

    pot = doc["potential"]
    interaction = None
    kind = pot["kind"]
    try:
        if kind == "zero":
            f = zero_potential(d, symbols)
        elif kind == "ising":
            if set(symbols) != {-1, 1}:
                raise ModelError("the ising shorthand needs the alphabet [-1, 1]")
            interaction = ising(IsingParams(pot["J"], pot["h"]), d)
            f = a_phi(interaction)
        elif kind == "interaction":
            terms = tuple(
                InteractionTerm.of(FiniteRegion.of(t["shape"], d), _table(t["table"])) for t in pot["terms"]
            )
            interaction = InteractionPotential(d, symbols, terms)
            f = a_phi(interaction)
        elif kind == "table":
            f = table_potential(FiniteRegion.of(pot["window"], d), _table(pot["table"]), symbols)
        else:
            f = geometric_pair_potential(pot["c"], pot["q"], d)
    except (ValueError, TypeError) as e:
        if isinstance(e, ModelError):
            raise
        raise ModelError(f"potential: {e}") from None

    boundaries = {}
    for name, b in sorted(doc.get("boundaries", {}).items()):
        boundaries[name] = _boundary(b, d, symbols)
    return Model(doc["name"], sft, f, interaction, boundaries, json.loads(json.dumps(doc)))


def _boundary(b: Mapping, d: int, symbols: tuple) -> FramedConfiguration:
    empty = Pattern(FiniteRegion((), d), ())
    if b["type"] == "constant":
        rule = ConstantBoundary(b["symbol"])
        used = [b["symbol"]]
    elif b["type"] == "periodic":
        if len(b["period"]) != d:
            raise ModelError("periodic boundary has the wrong dimension")
        try:
            rule = PeriodicBoundary(tuple(b["period"]), tuple(b["values"]))
        except ValueError as e:
            raise ModelError(f"periodic boundary: {e}") from None
        used = list(b["values"])
    else:
        table = {tuple(e["site"]): e["symbol"] for e in b["sites"]}
        if any(len(s) != d for s in table):
            raise ModelError("tabulated boundary site has the wrong dimension")
        rule = TabulatedBoundary.of(b["default"], table)
        used = [b["default"], *table.values()]
    bad = [u for u in used if u not in symbols]
    if bad:
        raise ModelError(f"boundary uses symbols outside the alphabet: {bad}")
    return FramedConfiguration(empty, rule, d)


def dumps_model(doc: Mapping) -> str:
    """Canonical text of a model document."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_model(path: str | Path) -> Model:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: not valid JSON ({e})") from None
    return model_from_dict(doc)


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(dumps_model(model.source))


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    suites: tuple[str, ...]
    seed: int
    boundaries: tuple[str, ...]
    max_region: int
    annulus: int | None
    measure: str
    tolerances: dict
    sampler: dict
    kms: dict
    source: dict


DEFAULT_TOLERANCES = {"spec": 1e-10, "gibbsian": 1e-8, "limit": 1e-12, "measure": 1e-8, "kms": 1e-10}


def config_from_dict(doc: Mapping, base: Path | None = None) -> ExperimentConfig:
    _validate(doc, CONFIG_SCHEMA, "config")
    m = doc["model"]
    if isinstance(m, str):
        path = Path(m)
        if not path.is_absolute() and base is not None:
            path = base / path
        if not path.exists():
            raise ModelError(f"model file {path} not found")
        model = load_model(path)
    else:
        model = model_from_dict(m)
    names = tuple(doc.get("boundaries", sorted(model.boundaries)))
    missing = [n for n in names if n not in model.boundaries]
    if missing:
        raise ModelError(f"unknown boundary ids: {missing}")
    if not names:
        raise ModelError("the model defines no boundary frames")
    suites = tuple(doc.get("suites", ["all"]))
    if "all" in suites:
        suites = tuple(s for s in SUITES if s != "all")
    return ExperimentConfig(
        model=model,
        suites=suites,
        seed=doc.get("seed", 0),
        boundaries=names,
        max_region=doc.get("max_region", 3),
        annulus=doc.get("annulus"),
        measure=doc.get("measure", "gibbs"),
        tolerances={**DEFAULT_TOLERANCES, **doc.get("tolerances", {})},
        sampler=dict(doc.get("sampler", {})),
        kms=dict(doc.get("kms", {})),
        source=json.loads(json.dumps(doc)),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ModelError(f"config file {path} not found") from None
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: not valid JSON ({e})") from None
    return config_from_dict(doc, path.parent)
