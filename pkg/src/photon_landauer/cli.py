"""Batch command-line front end: ``photon-landauer {current,sweep,transmission,oracle}``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(unconverged quadrature, unstable time stepping), 4 oracle mismatch.

JSON output formats every float with 17 significant digits, so identical
inputs give byte-identical files. CSV output is comma-separated with a header
row and LF line endings; missing values are empty cells.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import __version__
from .config import FORMATS, RunConfig, load
from .current import SWEEP_AXES, current_right, sweep
from .errors import ConfigurationError, ConvergenceError, DomainError, NumericalError
from .oracle import compare

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_MISMATCH = 4

PROG = "photon-landauer"
SWEEP_COLUMNS = ("value", "J_R", "J_L", "J_N", "J_A", "R_c", "R_a", "err", "converged")
TRANSMISSION_COLUMNS = ("eps1", "eps2", "T")


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def format_float(x) -> str:
    """17 significant digits (exact round trip); non-finite values become ``null``."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _json(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj) -> str:
    """Deterministic JSON text for a result document (trailing newline included)."""
    return _json(obj) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "" if not math.isfinite(v) else format(float(v), ".17g")
    return str(v)


def dumps_csv(columns, rows) -> str:
    """CSV text with a header row; every row has exactly ``len(columns)`` cells."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _flatten(record: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in record.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _warn(message: str) -> None:
    print(f"{PROG}: {message}", file=sys.stderr)


def cmd_current(cfg: RunConfig):
    """Returns (exit code, document, csv columns, csv rows)."""
    code = EXIT_OK
    try:
        breakdown = current_right(cfg.problem)
    except ConvergenceError as exc:
        if exc.best is None:
            raise
        _warn(f"warning: {exc}")
        breakdown, code = exc.best, EXIT_NUMERICAL
    record = {"command": "current", **breakdown.as_record()}
    columns = tuple(k for k in record if k != "command")
    return code, record, columns, [record]


def sweep_grid(start: float, stop: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise ConfigurationError(f"--steps must be >= 2, got {steps}")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ConfigurationError("sweep limits must be finite")
    return np.linspace(start, stop, steps)


def cmd_sweep(cfg: RunConfig, axis: str, start: float, stop: float, steps: int):
    grid = sweep_grid(start, stop, steps)
    points = sweep(cfg.problem, axis, grid)
    rows = []
    code = EXIT_OK
    for pt in points:
        b = pt.breakdown
        row = {"value": pt.value}
        for key in ("J_R", "J_L", "J_N", "J_A", "R_c", "R_a"):
            row[key] = None if b is None else getattr(b, key)
        row["err"] = None if b is None else b.J_R_error
        row["converged"] = pt.converged
        if pt.error is not None:
            row["message"] = pt.error
            _warn(f"warning: {axis} = {pt.value!r}: {pt.error}")
        if not pt.converged:
            code = EXIT_NUMERICAL
        rows.append(row)
    doc = {"command": "sweep", "axis": axis, "rows": rows}
    # the CSV header names the swept parameter itself
    table = [{axis: r["value"], **r} for r in rows]
    return code, doc, (axis,) + SWEEP_COLUMNS[1:], table


def transmission_grid(kernel, e1, e2):
    """Evaluate ``kernel`` on the outer-product grid.

    Returns:
        (values, n_bad) where cells outside the kernel's domain hold NaN.
    """
    x, y = np.meshgrid(np.asarray(e1, dtype=float), np.asarray(e2, dtype=float), indexing="ij")
    out = np.full(x.shape, np.nan)
    ok = (x > 0) & (y > 0)
    if np.any(ok):
        try:
            out[ok] = kernel(x[ok], y[ok])
        except (DomainError, NumericalError):
            # isolate the offending cells
            for idx in zip(*np.nonzero(ok)):
                try:
                    out[idx] = float(kernel(x[idx], y[idx]))
                except (DomainError, NumericalError):
                    pass
    return out, int(np.count_nonzero(np.isnan(out)))


def cmd_transmission(cfg: RunConfig):
    if cfg.grid is None:
        raise ConfigurationError("the transmission command needs a 'transmission_grid' block in the config")
    values, bad = transmission_grid(cfg.problem.kernel, cfg.grid.e1, cfg.grid.e2)
    if bad:
        _warn(f"warning: {bad} grid cell(s) outside the transmission domain left empty")
    rows = []
    for i, a in enumerate(cfg.grid.e1):
        for j, b in enumerate(cfg.grid.e2):
            t = values[i, j]
            rows.append({"eps1": float(a), "eps2": float(b), "T": None if math.isnan(t) else float(t)})
    doc = {"command": "transmission", "kernel": cfg.kernel_variant, "warnings": bad, "rows": rows}
    return EXIT_OK, doc, TRANSMISSION_COLUMNS, rows


def cmd_oracle(cfg: RunConfig):
    if cfg.oracle is None:
        raise ConfigurationError("the oracle command needs an 'oracle' block in the config")
    report = compare(cfg.problem, cfg.oracle)
    within = report.relative_deviation <= cfg.max_deviation
    rec = report.as_record()
    doc = {
        "command": "oracle",
        "analytic": rec.pop("analytic"),
        "simulated": rec.pop("simulated"),
        "relative_deviation": rec.pop("relative_deviation"),
        "max_deviation": cfg.max_deviation,
        "within_bound": within,
        **rec,
    }
    if not within:
        _warn(
            f"oracle mismatch: relative deviation {report.relative_deviation:.3g} "
            f"exceeds the bound {cfg.max_deviation:.3g}"
        )
    flat = _flatten({k: v for k, v in doc.items() if k != "command"})
    return (EXIT_OK if within else EXIT_MISMATCH), doc, tuple(flat), [flat]


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
    common.add_argument("--output", metavar="PATH", help="output file (default: config output.path, else stdout)")
    common.add_argument("--format", choices=FORMATS, help="output format (default: config output.format, else json)")

    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Pumped photon transport between two leads: currents, sweeps, transmission maps, oracle checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("current", parents=[common], help="cycle-averaged currents and rates")
    sw = sub.add_parser("sweep", parents=[common], help="currents along a parameter grid")
    sw.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sw.add_argument("--from", dest="start", required=True, type=float, metavar="F")
    sw.add_argument("--to", dest="stop", required=True, type=float, metavar="T")
    sw.add_argument("--steps", required=True, type=int, metavar="N", help="number of grid points (>= 2)")
    sub.add_parser("transmission", parents=[common], help="dump T on the config's (eps1, eps2) grid")
    sub.add_parser("oracle", parents=[common], help="compare against the time-domain simulation")
    return parser


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _dispatch(args, cfg):
    if args.command == "current":
        return cmd_current(cfg)
    if args.command == "sweep":
        return cmd_sweep(cfg, args.axis, args.start, args.stop, args.steps)
    if args.command == "transmission":
        return cmd_transmission(cfg)
    return cmd_oracle(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the config exit code
        return int(exc.code or 0)
    try:
        cfg = load(args.config)
        fmt = args.format or cfg.output_format
        path = args.output or cfg.output_path
        code, doc, columns, rows = _dispatch(args, cfg)
    except (ConfigurationError, DomainError) as exc:
        _warn(f"error: {exc}")
        return EXIT_CONFIG
    except NumericalError as exc:
        _warn(f"numerical failure: {exc}")
        return EXIT_NUMERICAL
    text = dumps_json(doc) if fmt == "json" else dumps_csv(columns, rows)
    try:
        with _sink(path) as out:
            out.write(text)
    except OSError as exc:
        _warn(f"error: cannot write {path}: {exc.strerror}")
        return EXIT_CONFIG
    return code
