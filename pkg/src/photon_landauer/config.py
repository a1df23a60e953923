"""JSON run configuration: schema validation and construction of model objects.

The published schemas live next to this module in ``schemas/``. A config is
first checked against ``config.schema.json`` and then turned into library
objects, whose own constructors enforce the physical invariants (positive
temperatures, stable spring matrices and so on).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .current import TransportProblem
from .errors import ConfigurationError
from .oracle import OracleSettings
from .spectra import (
    BathState,
    ConstantCoupling,
    ConstantDOS,
    LeadSpectrum,
    PowerLawDOS,
    PumpDrive,
    Side,
    TabulatedCoupling,
    TabulatedDOS,
)
from .transmission import CenterKernel, CenterModel, TabulatedPairCoupling, TrivialKernel

DEFAULT_MAX_DEVIATION = 0.10
FORMATS = ("csv", "json")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    """Return a bundled schema, ``"config"`` or ``"result"``."""
    text = resources.files(__package__).joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _validator(name):
    schema = load_schema(name)
    cls = jsonschema.validators.validator_for(schema)
    return cls(schema)


def _describe(err) -> str:
    if err.validator == "not" and err.validator_value == {"required": ["center"]}:
        return "a 'center' block is only allowed with kernel variant 'center'"
    if err.validator == "required" and "center" in err.validator_value and not err.absolute_path:
        return "kernel variant 'center' needs a 'center' block"
    msg = err.message
    # jsonschema echoes the whole instance in some messages
    return msg if len(msg) <= 200 else msg[:197] + "..."


def validate(document: dict, schema: str = "config") -> None:
    """Raise ConfigurationError listing every schema violation in ``document``."""
    errors = sorted(_validator(schema).iter_errors(document), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            where = "/".join(str(p) for p in err.absolute_path) or "<root>"
            lines.append(f"{where}: {_describe(err)}")
        raise ConfigurationError(f"{schema} schema violation:\n  " + "\n  ".join(lines))


@dataclass(frozen=True)
class GridSpec:
    e1: np.ndarray
    e2: np.ndarray


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration for one CLI invocation.

    Args:
        problem: the transport problem (leads, baths, pump, kernel, tolerances).
        oracle: oracle discretisation settings, ``None`` if the block is absent.
        max_deviation: relative deviation accepted by the oracle command.
        grid: (e1, e2) axes for the transmission dump, ``None`` if absent.
        output_format: ``"csv"`` or ``"json"``.
        output_path: destination file, ``None`` for stdout.
        document: the raw parsed JSON.
    """

    problem: TransportProblem
    oracle: OracleSettings | None
    max_deviation: float
    grid: GridSpec | None
    output_format: str
    output_path: str | None
    document: dict

    @property
    def kernel_variant(self) -> str:
        return "center" if isinstance(self.problem.kernel, CenterKernel) else "trivial"


def _coupling(spec):
    if isinstance(spec, (int, float)):
        return ConstantCoupling(float(spec))
    return TabulatedCoupling(tuple(spec["energies"]), tuple(spec["values"]))


def _dos(spec):
    if spec is None:
        return None
    model = spec["model"]
    if model == "constant":
        return ConstantDOS(float(spec.get("rho0", 1.0)))
    if model == "power_law":
        return PowerLawDOS(float(spec.get("rho0", 1.0)), int(spec.get("exponent", 2)))
    return TabulatedDOS(tuple(spec["energies"]), tuple(spec["values"]))


def _lead(side, spec):
    lo, hi = spec["band"]
    return LeadSpectrum(
        side,
        float(lo),
        math.inf if hi is None else float(hi),
        dos=_dos(spec.get("dos")),
        coupling=_coupling(spec.get("coupling", 1.0)),
        allow_ir_divergence=bool(spec.get("allow_ir_divergence", False)),
    )


def _kernel(doc, left, right, pump):
    spec = doc["kernel"]
    scale = float(spec.get("coupling_scale", 1.0))
    if spec["variant"] == "trivial":
        raw = spec.get("coupling", "separable")
        if raw == "separable":
            coupling = None
        elif isinstance(raw, (int, float)):
            coupling = float(raw)
        else:
            coupling = TabulatedPairCoupling(
                tuple(raw["left_energies"]), tuple(raw["right_energies"]), tuple(map(tuple, raw["values"]))
            )
        return TrivialKernel(left, right, coupling, scale)
    c = doc["center"]
    center = CenterModel(
        tuple(map(tuple, c["spring_matrix"])),
        tuple(_coupling(x) for x in c["left_coupling"]),
        tuple(_coupling(x) for x in c["right_coupling"]),
        float(c.get("eta", 1e-6)),
    )
    return CenterKernel(left, right, center, scale, bool(spec.get("dressed", False)), pump.frequency)


def _axis(spec):
    return np.linspace(float(spec["from"]), float(spec["to"]), int(spec["steps"]))


def _oracle(spec):
    if spec is None:
        return None, DEFAULT_MAX_DEVIATION
    settings = OracleSettings(
        modes_per_lead=int(spec.get("modes_per_lead", 40)),
        ramp_cycles=float(spec.get("ramp_cycles", 10.0)),
        measure_cycles=spec.get("measure_cycles"),
        method=spec.get("method", "splitting"),
        dt=spec.get("dt"),
        center_temperature=spec.get("center_temperature", "R"),
    )
    return settings, float(spec.get("max_deviation", DEFAULT_MAX_DEVIATION))


def build(document: dict) -> RunConfig:
    """Validate ``document`` and build the run configuration.

    Raises:
        ConfigurationError: on a schema violation or an unphysical model.
    """
    validate(document, "config")
    with warnings.catch_warnings():
        # the IR opt-in warning is meant for library users; the CLI already asked
        warnings.simplefilter("ignore", RuntimeWarning)
        left = _lead(Side.LEFT, document["left"])
        right = _lead(Side.RIGHT, document["right"])
    pump = PumpDrive(float(document["pump"]["frequency"]))
    tol = document.get("tolerances", {})
    problem = TransportProblem(
        kernel=_kernel(document, left, right, pump),
        left_bath=BathState(float(document["left"]["temperature"])),
        right_bath=BathState(float(document["right"]["temperature"])),
        pump=pump,
        abs_tol=float(tol.get("abs_tol", 1e-10)),
        rel_tol=float(tol.get("rel_tol", 1e-8)),
        max_subdivisions=int(tol.get("max_subdivisions", 500)),
    )
    oracle, max_dev = _oracle(document.get("oracle"))
    grid_doc = document.get("transmission_grid")
    grid = GridSpec(_axis(grid_doc["e1"]), _axis(grid_doc["e2"])) if grid_doc else None
    out = document.get("output", {})
    return RunConfig(
        problem=problem,
        oracle=oracle,
        max_deviation=max_dev,
        grid=grid,
        output_format=out.get("format", "json"),
        output_path=out.get("path"),
        document=document,
    )


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def load(path) -> RunConfig:
    """Read, validate and build a config file.

    Raises:
        ConfigurationError: unreadable file, invalid JSON, schema violation
            or unphysical parameters.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        document = json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        if not isinstance(exc, json.JSONDecodeError):
            raise ConfigurationError(f"{path}: {exc}") from exc
        raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return build(document)
