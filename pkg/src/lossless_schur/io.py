"""JSON file formats for matrices, realizations, charts and coordinates.

Matrices are ``{"rows": r, "cols": c, "re": [[...]], "im": [[...]]}`` with
row-major nested lists; ``"im"`` is omitted for real matrices.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .charts import Chart, ChartCoordinates
from .errors import LosslessError
from .fit import FitProblem
from .numcore import OutputNormalPair
from .schur import BalancedRealization


class FormatError(LosslessError, ValueError):
    """A file does not follow the expected JSON layout."""


def matrix_to_json(M) -> dict:
    M = np.atleast_2d(np.asarray(M))
    out: dict[str, Any] = {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
                           "re": np.real(M).tolist()}
    if np.iscomplexobj(M) and np.any(M.imag):
        out["im"] = np.imag(M).tolist()
    return out


def matrix_from_json(obj, name: str = "matrix") -> np.ndarray:
    try:
        r, c = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float) if "im" in obj else None
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{name}: malformed matrix object ({exc})") from exc
    if r == 0 or c == 0:
        return np.zeros((r, c), dtype=complex if im is not None else float)
    if re.shape != (r, c) or (im is not None and im.shape != (r, c)):
        raise FormatError(f"{name}: entries do not match declared shape {r}x{c}")
    M = re if im is None else re + 1j * im
    if not np.all(np.isfinite(M)):
        raise FormatError(f"{name}: non-finite entries")
    return M


def realization_to_json(R: BalancedRealization) -> dict:
    real = R.max_imag() == 0
    conv = (lambda M: M.real) if real else (lambda M: M)
    return {"p": R.p, "n": R.n, **{k: matrix_to_json(conv(getattr(R, k))) for k in "ABCD"}}


def realization_from_json(obj) -> BalancedRealization:
    try:
        p, n = int(obj["p"]), int(obj["n"])
        mats = {k: matrix_from_json(obj[k], k) for k in "ABCD"}
    except KeyError as exc:
        raise FormatError(f"realization: missing field {exc}") from exc
    shapes = {"A": (n, n), "B": (n, p), "C": (p, n), "D": (p, p)}
    for k, shp in shapes.items():
        if mats[k].shape != shp:
            raise FormatError(f"realization: {k} has shape {mats[k].shape}, expected {shp}")
    return BalancedRealization(mats["A"], mats["B"], mats["C"], mats["D"])


def _maybe_real(M, real):
    return np.real(M) if real else M


def chart_to_json(chart: Chart) -> dict:
    real = chart.real
    return {
        "kind": chart.kind,
        "pairs": [{"U": matrix_to_json(_maybe_real(pr.U, real)),
                   "W": matrix_to_json(_maybe_real(pr.W, real))} for pr in chart.pairs],
        "base_ref": matrix_to_json(_maybe_real(chart.base_ref, real)),
    }


def chart_from_json(obj) -> Chart:
    try:
        kind = obj["kind"]
        pairs = [OutputNormalPair(matrix_from_json(pr["U"], "U"), matrix_from_json(pr["W"], "W"))
                 for pr in obj["pairs"]]
        base_ref = matrix_from_json(obj["base_ref"], "base_ref")
    except (KeyError, TypeError) as exc:
        raise FormatError(f"chart: missing or malformed field {exc}") from exc
    return Chart(kind, tuple(pairs), base_ref).validate()


def coords_to_json(coords: ChartCoordinates, real: bool = False) -> dict:
    return {"V": [matrix_to_json(_maybe_real(V, real)) for V in coords.V_list],
            "g0": [float(x) for x in coords.g0]}


def coords_from_json(obj) -> ChartCoordinates:
    try:
        Vs = [matrix_from_json(V, f"V[{i}]") for i, V in enumerate(obj["V"])]
        g0 = np.asarray(obj["g0"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"coordinates: missing or malformed field {exc}") from exc
    return ChartCoordinates(Vs, g0)


def read_json(path) -> Any:
    """Load a JSON file; syntax errors become :class:`FormatError` with line context."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines() or [""]
        line = lines[min(exc.lineno, len(lines)) - 1]
        raise FormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line.strip()[:120]}") from exc


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def problem_to_json(problem: FitProblem) -> dict:
    out = {
        "p": problem.p, "n": problem.n, "atlas": problem.atlas,
        "samples": [{"z": [float(z.real), float(z.imag)], "F": matrix_to_json(F)}
                    for z, F in zip(problem.points, problem.values)],
        "max_iters": problem.max_iters, "h": problem.h, "q_min": problem.q_min,
        "seed": problem.seed, "target": problem.target,
    }
    if problem.init is not None:
        out["init"] = realization_to_json(problem.init)
    return out


def problem_from_json(obj) -> FitProblem:
    """Fit problem ``{"n", "atlas", "samples": [{"z": [re, im], "F": matrix}], ...}``."""
    try:
        samples = obj["samples"]
        z = [complex(*s["z"]) for s in samples]
        F = [matrix_from_json(s["F"], f"samples[{k}].F") for k, s in enumerate(samples)]
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"fit problem: missing or malformed field {exc}") from exc
    if not F:
        raise FormatError("fit problem: no samples")
    if "p" in obj and any(M.shape != (int(obj["p"]),) * 2 for M in F):
        raise FormatError("fit problem: sample shapes do not match p")
    settings = {k: obj[k] for k in ("atlas", "max_iters", "h", "q_min", "seed", "target") if k in obj}
    init = realization_from_json(obj["init"]) if obj.get("init") is not None else None
    try:
        return FitProblem(np.array(z), np.array(F), n, init=init, **settings)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"fit problem: {exc}") from exc
