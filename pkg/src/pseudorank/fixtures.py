"""Golden-fixture replay.

A manifest lists fixtures; each one is a single CLI invocation (with
``{fixtures}`` standing for the manifest's directory) plus checks on the JSON
envelope it prints.  A check names a path such as ``payload.rows[1].p[0]``
and either an ``expected`` number with an explicit ``tol``, or an exact
``expected`` string (used for rationals like ``"7/12"``).
"""

from __future__ import annotations

import io
import json
import math
import re
from pathlib import Path

from .fileio import data_path, load_json

_TOKEN = re.compile(r"([^.\[\]]+)|\[(\d+)\]")


def default_manifest() -> Path:
    return data_path("fixtures", "manifest.json")


def lookup(obj, path: str):
    for name, index in _TOKEN.findall(path):
        obj = obj[int(index)] if index else obj[name]
    return obj


def _check(payload, check: dict) -> str | None:
    path = check["path"]
    try:
        actual = lookup(payload, path)
    except (KeyError, IndexError, TypeError):
        return f"{path}: missing from output"
    expected = check["expected"]
    if "tol" not in check:
        if actual != expected:
            return f"{path}: expected {expected!r} exactly, got {actual!r}"
        return None
    tol = float(check["tol"])
    if not isinstance(actual, (int, float)) or isinstance(actual, bool):
        return f"{path}: expected a number, got {actual!r}"
    if not math.isfinite(actual) or abs(actual - expected) > tol:
        return f"{path}: expected {expected!r} +/- {tol:g}, got {actual!r} (off by {abs(actual - expected):.3g})"
    return None


def replay_one(fixture: dict, root: Path) -> dict:
    from .cli import main

    argv = [a.replace("{fixtures}", str(root)) for a in fixture["argv"]] + ["--format", "json"]
    buf = io.StringIO()
    code = main(argv, stdout=buf)
    failures = []
    expected_code = fixture.get("exit_code", 0)
    if code != expected_code:
        failures.append(f"exit code {code}, expected {expected_code}")
    payload = None
    if buf.getvalue():
        try:
            payload = json.loads(buf.getvalue())
        except json.JSONDecodeError as exc:
            failures.append(f"output is not JSON: {exc}")
    for check in fixture.get("checks", []):
        if payload is None:
            failures.append(f"{check['path']}: no output")
            continue
        msg = _check(payload, check)
        if msg:
            failures.append(msg)
    return {"name": fixture["name"], "kind": fixture.get("kind", ""), "passed": not failures,
            "checks": len(fixture.get("checks", [])), "failures": failures}


def replay_all(manifest=None) -> list[dict]:
    """Replay every fixture in the manifest; a missing file is a hard error."""
    path = Path(manifest) if manifest else default_manifest()
    if not path.exists():
        raise FileNotFoundError(f"fixture manifest not found: {path}")
    spec = load_json(path, "manifest")
    root = path.parent
    for fx in spec["fixtures"]:
        for f in fx.get("files", []):
            if not (root / f).exists():
                raise FileNotFoundError(f"fixture {fx['name']!r} needs missing file {root / f}")
    return [replay_one(fx, root) for fx in spec["fixtures"]]
