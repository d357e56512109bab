"""Kernel-spec file format: a small JSON document, schema-validated.

Canonical shape::

    {
      "family": "exponential",
      "params": {"rate": 1.0},
      "a": [1.0, 1.0, "inf"],
      "grid": {"t_max": 20.0, "n_steps": 20000},
      "outputs": ["lambdas", "probs", "rates", "verdicts"]
    }

"inf" is the only accepted non-numeric token and disables an axis.
Families and their params:

    exponential      rate
    biexponential    rate1, rate2           (rate1 < rate2)
    sinusoidal       omega
    hypoexponential  rate1 .. rateN         (N >= 1)
    tabulated        (top-level "samples": [[t, f(t)], ...])

Any family accepts an optional "weight" param scaling the waiting
function.  Unknown keys are rejected before any computation runs.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .evolution_solver import TimeGrid
from .kernel_families import (
    AnisotropyWeights,
    BiExponential,
    Exponential,
    Hypoexponential,
    KernelSpec,
    Scaled,
    Sinusoidal,
    Tabulated,
)

__all__ = ["SpecFileError", "LoadedSpec", "load_spec_file", "parse_spec_dict",
           "SCHEMA", "DEFAULT_GRID", "OUTPUT_KINDS"]

OUTPUT_KINDS = ("lambdas", "probs", "rates", "verdicts")
DEFAULT_GRID = {"t_max": 20.0, "n_steps": 20000}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["family", "a"],
    "properties": {
        "family": {"enum": ["exponential", "biexponential", "sinusoidal",
                            "hypoexponential", "tabulated"]},
        "params": {
            "type": "object",
            "additionalProperties": {"type": "number"},
        },
        "a": {
            "type": "array",
            "minItems": 3,
            "maxItems": 3,
            "items": {"anyOf": [{"type": "number", "exclusiveMinimum": 0},
                                {"const": "inf"}]},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["t_max", "n_steps"],
            "properties": {
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "n_steps": {"type": "integer", "minimum": 2},
            },
        },
        "samples": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "number"},
            },
        },
        "outputs": {
            "type": "array",
            "items": {"enum": list(OUTPUT_KINDS)},
            "uniqueItems": True,
        },
    },
}


class SpecFileError(ValueError):
    """Schema violation or malformed field in a kernel-spec file."""


@dataclass(frozen=True)
class LoadedSpec:
    """A validated spec file: the kernel, its grid, requested outputs,
    and the raw document for echoing into reports."""

    kernel: KernelSpec
    grid: TimeGrid
    outputs: tuple[str, ...]
    raw: dict


def _build_waiting(family: str, params: dict, samples):
    params = dict(params)
    weight = params.pop("weight", None)
    try:
        if family == "exponential":
            base = Exponential(rate=params.pop("rate"))
        elif family == "biexponential":
            base = BiExponential(rate1=params.pop("rate1"),
                                 rate2=params.pop("rate2"))
        elif family == "sinusoidal":
            base = Sinusoidal(omega=params.pop("omega"))
        elif family == "hypoexponential":
            rates = []
            for key in sorted(params):
                if not re.fullmatch(r"rate\d+", key):
                    raise SpecFileError(
                        f"params.{key}: hypoexponential accepts rate1..rateN")
            for key in sorted(params, key=lambda k: int(k[4:])):
                rates.append(params.pop(key))
            if not rates:
                raise SpecFileError("params: hypoexponential needs rate1..rateN")
            base = Hypoexponential(tuple(rates))
        elif family == "tabulated":
            if samples is None:
                raise SpecFileError("samples: required for the tabulated family")
            times = tuple(pair[0] for pair in samples)
            values = tuple(pair[1] for pair in samples)
            base = Tabulated(times, values)
        else:  # unreachable past schema validation
            raise SpecFileError(f"family: unknown family {family!r}")
    except KeyError as exc:
        raise SpecFileError(f"params.{exc.args[0]}: required for family {family!r}") from None
    except ValueError as exc:
        if isinstance(exc, SpecFileError):
            raise
        raise SpecFileError(f"params: {exc}") from None
    if params:
        extra = ", ".join(sorted(params))
        raise SpecFileError(f"params: unknown keys for family {family!r}: {extra}")
    if samples is not None and family != "tabulated":
        raise SpecFileError("samples: only valid with the tabulated family")
    if weight is not None:
        if weight < 0:
            raise SpecFileError("params.weight: must be nonnegative")
        base = Scaled(base, weight)
    return base


def parse_spec_dict(doc: dict) -> LoadedSpec:
    """Validate and materialize a spec document."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SpecFileError(f"{path}: {exc.message}") from None

    waiting = _build_waiting(doc["family"], doc.get("params", {}),
                             doc.get("samples"))
    a_vals = [math.inf if x == "inf" else float(x) for x in doc["a"]]
    try:
        aniso = AnisotropyWeights(*a_vals)
    except ValueError as exc:
        raise SpecFileError(f"a: {exc}") from None
    grid_doc = doc.get("grid", DEFAULT_GRID)
    grid = TimeGrid(t_max=float(grid_doc["t_max"]),
                    n_steps=int(grid_doc["n_steps"]))
    outputs = tuple(doc.get("outputs", OUTPUT_KINDS))
    return LoadedSpec(kernel=KernelSpec(waiting, aniso), grid=grid,
                      outputs=outputs, raw=doc)


def load_spec_file(path: str | Path) -> LoadedSpec:
    """Read, validate and materialize a kernel-spec JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecFileError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFileError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SpecFileError(f"{path}: top level must be an object")
    return parse_spec_dict(doc)
