"""File formats: edge lists, vectors, matrices, g tables and result files.

Text formats
------------
* edge list: one ``u v [w]`` record per line, whitespace separated; ``#``
  starts a comment; a missing weight means 1.
* vector: comma/whitespace separated numbers (CSV, possibly over several
  lines) or a JSON array.
* matrix: CSV rows or a JSON array of arrays.
* g table: two-column CSV ``t,g(t)`` covering t = 0 and t = 2.

Results are written as JSON (floats via ``repr``, the shortest string that
reads back to the identical double) or CSV (floats with 17 significant
digits). Path keys are rendered as ``"[1,0,2]"`` with ``"[]"`` for the empty
path, in canonical order.
"""

from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import LengthMismatch, OutputError, ParseError
from .graph_core import Graph, SpectralFunction, load_graph
from .scattering import ScatteringOutput, path_key

_SPLIT = re.compile(r"[,\s]+")


def _text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc


def _number(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{where}: cannot parse {token!r} as a number") from None


def parse_edge_list(text: str, source: str = "<edges>") -> list[tuple]:
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (2, 3):
            raise ParseError(f"{source}, line {lineno}: expected 'u v [w]', got {raw.strip()!r}")
        try:
            u, v = int(fields[0]), int(fields[1])
        except ValueError:
            raise ParseError(f"{source}, line {lineno}: vertex ids must be integers") from None
        w = _number(fields[2], f"{source}, line {lineno}, column 3") if len(fields) == 3 else 1.0
        records.append((u, v, w))
    return records


def read_edge_list(path, one_based: bool = False, n: int | None = None) -> Graph:
    return load_graph(parse_edge_list(_text(path), str(path)), n=n, one_based=one_based)


def parse_vector(text: str, source: str = "<vector>") -> np.ndarray:
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{source}, line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        arr = np.asarray(data)
        if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.number):
            raise ParseError(f"{source}: expected a flat JSON array of numbers")
        return arr.astype(float)
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for col, tok in enumerate(_SPLIT.split(line), start=1):
            if tok:
                values.append(_number(tok, f"{source}, line {lineno}, column {col}"))
    return np.array(values, dtype=float)


def read_signal(path, n: int | None = None) -> np.ndarray:
    x = parse_vector(_text(path), str(path))
    if n is not None and x.size != n:
        raise LengthMismatch(f"{path}: signal has {x.size} entries, graph has {n} vertices")
    return x


def parse_matrix(text: str, source: str = "<matrix>") -> np.ndarray:
    stripped = text.strip()
    if stripped.startswith("["):
        try:
            arr = np.asarray(json.loads(stripped), dtype=float)
        except (json.JSONDecodeError, ValueError) as exc:
            raise ParseError(f"{source}: {exc}") from None
    else:
        rows = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                rows.append(
                    [_number(tok, f"{source}, line {lineno}, column {c}") for c, tok in enumerate(_SPLIT.split(line), 1) if tok]
                )
        if len({len(r) for r in rows}) > 1:
            raise ParseError(f"{source}: rows have different lengths")
        arr = np.array(rows, dtype=float)
    if arr.ndim != 2:
        raise ParseError(f"{source}: expected a two-dimensional array")
    return arr


def read_matrix(path) -> np.ndarray:
    return parse_matrix(_text(path), str(path))


def read_g_table(path) -> SpectralFunction:
    table = read_matrix(path)
    if table.shape[1] != 2:
        raise ParseError(f"{path}: a g table needs exactly two columns (t, g)")
    return SpectralFunction.from_table(table[:, 0], table[:, 1])


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _plain(obj):
    """Convert numpy scalars/arrays into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def scattering_to_dict(out: ScatteringOutput) -> dict:
    windowed = {path_key(p): v.tolist() for p, v in out.windowed.items()}
    nonwindowed = {path_key(p): float(v) for p, v in out.nonwindowed.items()}
    return {
        "metadata": {**out.metadata, "layer_energies": {str(m): e for m, e in out.layer_energies.items()}},
        "windowed": windowed,
        "nonwindowed": nonwindowed,
        "coefficients": [
            {"path": k, "windowed": windowed[k], "nonwindowed": nonwindowed[k]} for k in windowed
        ],
    }


def scattering_from_dict(data: dict) -> ScatteringOutput:
    def key(s: str) -> tuple:
        return tuple(json.loads(s))

    meta = dict(data.get("metadata", {}))
    energies = {int(m): e for m, e in meta.pop("layer_energies", {}).items()}
    return ScatteringOutput(
        windowed={key(k): np.array(v, dtype=float) for k, v in data["windowed"].items()},
        nonwindowed={key(k): float(v) for k, v in data["nonwindowed"].items()},
        layer_energies=energies,
        metadata=meta,
    )


def to_dict(obj) -> dict:
    if isinstance(obj, ScatteringOutput):
        return scattering_to_dict(obj)
    if hasattr(obj, "as_dict"):
        return obj.as_dict()
    if isinstance(obj, dict):
        return obj
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_json(obj) -> str:
    return json.dumps(_plain(to_dict(obj)), indent=2, allow_nan=True) + "\n"


def _csv_rows(obj, part: str = "nonwindowed") -> tuple[list, list]:
    if isinstance(obj, ScatteringOutput):
        if part == "nonwindowed":
            return ["path", "value"], [[path_key(p), _fmt(v)] for p, v in obj.nonwindowed.items()]
        n = obj.metadata.get("n", len(next(iter(obj.windowed.values()), [])))
        header = ["path"] + [f"v{i}" for i in range(n)]
        return header, [[path_key(p), *map(_fmt, v)] for p, v in obj.windowed.items()]
    data = to_dict(obj)
    if "records" in data:
        header = ["name", "lhs", "rhs", "slack", "pass"]
        return header, [[r["name"], _fmt(r["lhs"]), _fmt(r["rhs"]), _fmt(r["slack"]), r["pass"]] for r in data["records"]]
    if "checks" in data:
        header = ["id", "name", "trials", "max_violation", "tolerance", "pass"]
        rows = [
            [c["id"], c["name"], c["trials"], c["max_violation"] if isinstance(c["max_violation"], str) else _fmt(c["max_violation"]), _fmt(c["tolerance"]), c["pass"]]
            for c in data["checks"]
        ]
        return header, rows
    raise TypeError(f"no CSV layout for {type(obj).__name__}")


def dumps_csv(obj, part: str = "nonwindowed") -> str:
    header, rows = _csv_rows(obj, part)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_output(obj, path, fmt: str = "json", part: str = "nonwindowed") -> None:
    """Write a ScatteringOutput, StabilityReport, Certificate or plain dict.

    ``part`` selects the CSV layout for scattering outputs: ``"nonwindowed"``
    gives ``path,value`` rows, ``"windowed"`` one row of n values per path.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"format must be 'json' or 'csv', got {fmt!r}")
    text = dumps_json(obj) if fmt == "json" else dumps_csv(obj, part)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_output(path) -> ScatteringOutput:
    """Load a scattering JSON file written by :func:`write_output`."""
    try:
        data = json.loads(_text(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}, line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scattering_from_dict(data)


def write_vector(x: Iterable[float], path, fmt: str = "csv") -> None:
    x = np.asarray(x, dtype=float)
    text = json.dumps(x.tolist()) if fmt == "json" else ",".join(map(_fmt, x))
    Path(path).write_text(text + "\n")


def write_matrix(A, path, fmt: str = "csv") -> None:
    A = np.asarray(A, dtype=float)
    if fmt == "json":
        text = json.dumps(A.tolist())
    else:
        text = "\n".join(",".join(map(_fmt, row)) for row in A)
    Path(path).write_text(text + "\n")
