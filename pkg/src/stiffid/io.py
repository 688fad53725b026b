"""Field files, experiment manifests and deterministic report writers.

Field files come in two flavours selected by extension:

* JSON (canonical)::

    {"format_version": "1.0", "reference_point": [x, y, z],
     "nodes": [{"p": [x, y, z], "dp": [dx, dy, dz]}, ...]}

* CSV with header ``px,py,pz,dpx,dpy,dpz``, optionally preceded by a
  ``# reference_point=x,y,z`` comment line.

Node coordinates are absolute; displacements in mm. Floats are written with
17 significant digits so that values survive a round trip unchanged.
"""
from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .compliance import NM_TO_NMM, LoadCase
from .errors import FieldFileError, ValidationError
from .geometry import DisplacementField

FORMAT_VERSION = "1.0"
CSV_HEADER = ["px", "py", "pz", "dpx", "dpy", "dpz"]


def fmt_float(x):
    return format(float(x), ".17g")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    return json.dumps(obj)


def dumps(obj, indent=2):
    """Deterministic JSON: sorted keys, 17-significant-digit floats, non-finite as null."""
    return _encode(_plain(obj), indent, 0) + "\n"


def write_json(obj, path=None):
    text = dumps(obj)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    _write_text(path, text)


def _write_text(path, text):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise FieldFileError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise FieldFileError(f"cannot read {path}: {exc.strerror or exc}") from exc


def field_to_dict(field):
    return {
        "format_version": FORMAT_VERSION,
        "reference_point": field.origin,
        "nodes": [{"p": p, "dp": dp} for p, dp in zip(field.absolute_positions, field.displacements)],
    }


def field_from_dict(d, source="<dict>"):
    try:
        ref = d.get("reference_point", [0.0, 0.0, 0.0])
        nodes = d["nodes"]
        p = np.array([node["p"] for node in nodes], dtype=float).reshape(-1, 3)
        dp = np.array([node["dp"] for node in nodes], dtype=float).reshape(-1, 3)
    except (KeyError, TypeError, ValueError) as exc:
        raise FieldFileError(f"{source}: malformed field file ({exc})") from exc
    return DisplacementField(p, dp, ref)


def write_field(field, path):
    """Write JSON, or CSV when ``path`` ends in ``.csv``."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        lines = []
        if np.any(field.origin != 0):
            lines.append("# reference_point=" + ",".join(fmt_float(v) for v in field.origin))
        lines.append(",".join(CSV_HEADER))
        for p, dp in zip(field.absolute_positions, field.displacements):
            lines.append(",".join(fmt_float(v) for v in (*p, *dp)))
        _write_text(path, "\n".join(lines) + "\n")
    else:
        _write_text(path, dumps(field_to_dict(field)))


def read_field(path):
    path = Path(path)
    text = _read_text(path)
    if path.suffix.lower() == ".csv":
        return _parse_csv_field(text, path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FieldFileError(f"{path}: invalid JSON ({exc})") from exc
    return field_from_dict(data, path)


def _parse_csv_field(text, path):
    ref = [0.0, 0.0, 0.0]
    body = []
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("#"):
            key, _, val = s[1:].partition("=")
            if key.strip() == "reference_point":
                ref = [float(v) for v in val.split(",")]
        elif s:
            body.append(s)
    rows = list(csv.reader(body))
    if not rows or [h.strip() for h in rows[0]] != CSV_HEADER:
        raise FieldFileError(f"{path}: expected CSV header {','.join(CSV_HEADER)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 6)
    except ValueError as exc:
        raise FieldFileError(f"{path}: bad numeric value ({exc})") from exc
    return DisplacementField(data[:, :3], data[:, 3:], ref)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, (float, np.floating)) else str(v) for v in r))
    _write_text(path, "\n".join(lines) + "\n")


def read_manifest(path):
    """Experiment manifest: loads and the field files they produced.

    ::

        {"experiments": [{"label": "Fx", "F": [1000, 0, 0], "M": [0, 0, 0],
                          "field": "fx.json"}, ...]}

    ``M`` is in N*mm; ``M_Nm`` may be given instead. Field paths are relative
    to the manifest's directory.
    """
    path = Path(path)
    try:
        data = json.loads(_read_text(path))
        entries = data["experiments"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise FieldFileError(f"{path}: malformed manifest ({exc})") from exc
    out = []
    for i, e in enumerate(entries):
        try:
            F = e.get("F", [0.0, 0.0, 0.0])
            if "M_Nm" in e:
                M = [NM_TO_NMM * float(v) for v in e["M_Nm"]]
            else:
                M = e.get("M", [0.0, 0.0, 0.0])
            load = LoadCase(F, M, e.get("label", f"exp{i + 1}"))
            field_path = path.parent / e["field"]
        except KeyError as exc:
            raise ValidationError(f"{path}: experiment {i + 1} lacks {exc}") from exc
        out.append((load, field_path))
    return out


def write_manifest(path, entries):
    """``entries``: iterable of (LoadCase, field path relative to the manifest)."""
    exps = [{"label": load.label, "F": load.F, "M": load.M, "field": str(fp)} for load, fp in entries]
    write_json({"experiments": exps}, path)
