"""Deterministic JSON/CSV output and solution files.

Floats are written with 17 significant digits in JSON and 10 in CSV, keys
in insertion order, so identical inputs give byte-identical files.
Non-finite floats become ``null`` in JSON and ``nan``/``inf`` in CSV.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .profiles import VortexProfile, profile_from_spec
from .vortex.modes import FourierMode
from .vortex.radial import RadialSolution


def _fmt_json_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = "%.17g" % x
    # keep floats recognisable as floats
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float at 17 significant digits."""

    def emit(o, level):
        pad, inner = " " * (indent * level), " " * (indent * (level + 1))
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{inner}{json.dumps(k)}: {emit(v, level + 1)}" for k, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(emit(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(inner + emit(v, level + 1) for v in o) + "\n" + pad + "]"
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, float):
            return _fmt_json_float(o)
        return json.dumps(o)

    return emit(to_jsonable(obj), 0) + "\n"


def write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps(obj))


def _fmt_csv(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.10g" % v
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt_csv(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(csv_text(header, rows))


# --- radial eigenfunctions -------------------------------------------------------

SOLUTION_COLUMNS = ["r", "re_u_r", "im_u_r", "re_flux", "im_flux"]


def solution_to_dict(solution: RadialSolution, profile: VortexProfile) -> dict:
    """Everything needed to re-check the identities without solving again."""
    table = np.column_stack([solution.grid, solution.u_r.real, solution.u_r.imag,
                             solution.flux.real, solution.flux.imag])
    return {"m": solution.mode.m, "k": solution.mode.k,
            "s": {"re": solution.s.real, "im": solution.s.imag},
            "profile": profile.to_spec(),
            "residual": solution.residual,
            "columns": SOLUTION_COLUMNS,
            "data": table}


def solution_from_dict(data: dict):
    """Inverse of :func:`solution_to_dict`; returns (solution, profile)."""
    try:
        mode = FourierMode(data["m"], data["k"])
        s = complex(data["s"]["re"], data["s"]["im"])
        table = np.asarray(data["data"], dtype=float)
        profile = profile_from_spec(data["profile"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed solution file: {exc}") from exc
    if table.ndim != 2 or table.shape[1] != len(SOLUTION_COLUMNS):
        raise ValueError("solution data must have five columns")
    sol = RadialSolution(mode=mode, s=s, grid=table[:, 0], u_r=table[:, 1] + 1j * table[:, 2],
                         flux=table[:, 3] + 1j * table[:, 4],
                         residual=float(data.get("residual") or float("nan")))
    return sol, profile


def load_solution(path):
    return solution_from_dict(json.loads(Path(path).read_text()))
