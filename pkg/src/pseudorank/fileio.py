"""File formats: long-format CSV data, scenario and plan JSON, output envelopes."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from referencing import Registry, Resource
from referencing.jsonschema import DRAFT202012

from . import __version__
from .grouped import Group, GroupedData

TOOL = "pseudorank"
FORMAT_ENV = "PSEUDORANK_FORMAT"
FORMATS = ("text", "csv", "json")
BUNDLED_PREFIX = "bundled:"


class DataError(ValueError):
    """Malformed or unusable data file."""


class SchemaError(ValueError):
    """JSON input that violates its schema."""


# ---------------------------------------------------------------------------
# bundled resources
# ---------------------------------------------------------------------------


def data_path(*parts: str) -> Path:
    return Path(str(resources.files("pseudorank").joinpath("data", *parts)))


def resolve_input(path: str, kind: str) -> Path:
    """``bundled:NAME`` names a shipped scenario or plan; anything else is a path."""
    if path.startswith(BUNDLED_PREFIX):
        name = path[len(BUNDLED_PREFIX):]
        p = data_path(kind, f"{name}.json")
        if not p.exists():
            available = sorted(q.stem for q in data_path(kind).glob("*.json"))
            raise SchemaError(f"no bundled {kind[:-1]} named {name!r}; available: {', '.join(available)}")
        return p
    return Path(path)


# ---------------------------------------------------------------------------
# CSV data
# ---------------------------------------------------------------------------


def _parse_value(raw: str, line: int) -> float:
    text = raw.strip()
    if not text:
        raise DataError(f"line {line}: empty value field")
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"line {line}: value {text!r} is not a number") from None
    if not math.isfinite(v):
        raise DataError(f"line {line}: value {text!r} is not finite")
    return v


def parse_long_csv(text: str) -> GroupedData:
    """Parse ``group,value`` or ``a,b,value`` long-format CSV text.

    Groups (or cells) keep the order of their first appearance.
    """
    reader = csv.reader(io.StringIO(text.removeprefix("\ufeff"), newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("line 1: file is empty") from None
    except csv.Error as exc:
        raise DataError(f"line 1: {exc}") from None
    names = [h.strip().lower() for h in header]
    if names == ["group", "value"]:
        factorial = False
    elif names == ["a", "b", "value"]:
        factorial = True
    else:
        raise DataError(f"line 1: header must be 'group,value' or 'a,b,value', got {','.join(header)!r}")
    cells: dict = {}
    width = len(names)
    try:
        for row in reader:
            line = reader.line_num
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != width:
                raise DataError(f"line {line}: expected {width} fields, got {len(row)}")
            keys = tuple(f.strip() for f in row[:-1])
            if any(not k for k in keys):
                raise DataError(f"line {line}: empty group label")
            cells.setdefault(keys, []).append(_parse_value(row[-1], line))
    except csv.Error as exc:
        raise DataError(f"line {reader.line_num}: {exc}") from None
    if not cells:
        raise DataError("line 2: no observations")
    if not factorial:
        if len(cells) < 2:
            raise DataError("need at least 2 groups")
        return GroupedData(tuple(Group(k[0], v) for k, v in cells.items()))
    a_levels = list(dict.fromkeys(k[0] for k in cells))
    b_levels = list(dict.fromkeys(k[1] for k in cells))
    if len(a_levels) != 2 or len(b_levels) != 2 or len(cells) != 4:
        raise DataError(
            f"a 2x2 file needs exactly two levels per factor and all four cells "
            f"(found a={a_levels}, b={b_levels})")
    groups = tuple(Group(f"{a}:{b}", v) for (a, b), v in cells.items())
    return GroupedData(groups, tuple(cells.keys())).as_2x2()


def read_long_csv(path) -> GroupedData:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not valid UTF-8 (byte {exc.start})") from None
    return parse_long_csv(text)


def write_long_csv(data: GroupedData) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if data.factor_labels is not None:
        w.writerow(["a", "b", "value"])
        for (a, b), g in zip(data.factor_labels, data.groups):
            w.writerows([a, b, repr(float(v))] for v in g.values)
    else:
        w.writerow(["group", "value"])
        for g in data.groups:
            w.writerows([g.label, repr(float(v))] for v in g.values)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# JSON inputs
# ---------------------------------------------------------------------------


def load_schema(name: str) -> dict:
    return json.loads(data_path("schemas", f"{name}.schema.json").read_text(encoding="utf-8"))


def _registry() -> Registry:
    schemas = [json.loads(p.read_text(encoding="utf-8")) for p in sorted(data_path("schemas").glob("*.schema.json"))]
    return Registry().with_resources(
        (s["$id"], Resource.from_contents(s, default_specification=DRAFT202012)) for s in schemas)


def validate(obj, schema_name: str) -> None:
    schema = load_schema(schema_name)
    validator = jsonschema.Draft202012Validator(schema, registry=_registry())
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        first = errors[0]
        raise SchemaError(f"{first.json_path}: {first.message}")


def load_json(path, schema_name: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    validate(obj, schema_name)
    return obj


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def jsonable(obj):
    """Plain JSON types; non-finite floats become null, fractions become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def envelope(command: str, payload, seed: int | None = None) -> dict:
    out = {"tool": TOOL, "version": __version__, "command": command}
    if seed is not None:
        out["seed"] = seed
    out["payload"] = jsonable(payload)
    return out


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def dumps_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow(["" if v is None else _cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps_table(rows, title: str = "", notes=()) -> str:
    """Left-aligned text table; floats shown with 6 significant digits."""
    def show(v):
        if v is None:
            return "-"
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    cells = [[show(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))] if cells else []
    lines = [title] if title else []
    for k, r in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    lines.extend(f"note: {n}" for n in notes if n)
    return "\n".join(lines) + "\n"


def default_format() -> str:
    fmt = os.environ.get(FORMAT_ENV, "text").strip().lower()
    return fmt if fmt in FORMATS else "text"
