"""Run configuration, result envelopes and CSV tables.

Config files are flat ``key = value`` text (UTF-8, ``#`` starts a comment).
Unknown keys are errors. See `CONFIG_KEYS` for the full key set.
"""
import csv
import datetime as _dt
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, NumericalError

SCHEMA_VERSION = "jtgeom.envelope/1"
CSV_VERSION = "jtgeom.csv/1"


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _matrix(text):
    rows = [_floats(r) for r in text.split(";") if r.strip()]
    if len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows must have equal length")
    return tuple(rows)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text

    return parse


# key -> (parser, default)
CONFIG_KEYS = {
    "model": (str, "e_x_e"),
    "F": (float, 1.0),
    "omega": (float, 1.0),
    "loop.kind": (_choice("nontrivial", "contractible"), "nontrivial"),
    "loop.base": (_floats, None),
    "loop.steps": (int, 256),
    "loop.radius": (float, 0.05),
    "vibronic.n_max": (int, 20),
    "vibronic.k": (int, None),
    "vibronic.tol": (float, 1e-6),
    "vibronic.max_dim": (int, 500_000),
    "rotor.N": (int, None),
    "rotor.parity": (_choice("odd", "even", "both", "antiperiodic", "periodic"), "odd"),
    "rotor.count": (int, 4),
    "apes.axes": (_ints, None),
    "apes.dir1": (_floats, None),
    "apes.dir2": (_floats, None),
    "apes.lo": (float, -2.0),
    "apes.hi": (float, 2.0),
    "apes.points": (int, 101),
    "perturb.type": (_choice("quadratic", "field"), "quadratic"),
    "perturb.grid": (_floats, (0.0, 0.1, 0.2)),
    "perturb.field": (_matrix, None),
    "perturb.n_max": (int, None),
    "output.dir": (str, None),
    "output.format": (_choice("json", "csv", "both"), "json"),
}


def _parse_value(key, raw, line=None, column=None):
    if key not in CONFIG_KEYS:
        raise ConfigError(f"unknown key {key!r}", line, column)
    parser, _ = CONFIG_KEYS[key]
    try:
        return parser(raw)
    except ValueError as err:
        raise ConfigError(f"bad value {raw!r} for {key!r}: {err}", line, column) from None


def parse_config(text):
    """Parse config text into a dict of explicitly set keys."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            col = len(body) - len(body.lstrip()) + 1
            raise ConfigError("expected 'key = value'", lineno, col)
        key_part, raw = body.split("=", 1)
        key = key_part.strip()
        col = len(key_part) - len(key_part.lstrip()) + 1
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, col)
        vcol = len(key_part) + 2 + len(raw) - len(raw.lstrip())
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, col)
        values[key] = _parse_value(key, raw.strip(), lineno, vcol)
    return values


def load_config(path=None, overrides=()):
    values = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
        values = parse_config(text)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        values[key.strip()] = _parse_value(key.strip(), raw.strip())
    full = {k: default for k, (_, default) in CONFIG_KEYS.items()}
    full.update(values)
    return full


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if not math.isfinite(x):
            raise NumericalError("non-finite number in output")
        return x
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def envelope(command, config, payload=None, error=None, version="0", timestamp=True):
    env = {
        "schema": SCHEMA_VERSION,
        "tool": "jtgeom",
        "version": version,
        "command": command,
        "config": to_jsonable(config),
        "status": "ok" if error is None else "error",
        "payload": to_jsonable(payload if payload is not None else {}),
    }
    if error is not None:
        env["error"] = {"code": error.code, "message": str(error)}
    if timestamp:
        env["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return env


def dumps(env):
    return json.dumps(env, sort_keys=True, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


ENVELOPE_SCHEMA = {
    "type": "object",
    "required": ["schema", "tool", "version", "command", "config", "status", "payload"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "tool": {"const": "jtgeom"},
        "version": {"type": "string"},
        "command": {"type": "string"},
        "config": {"type": "object"},
        "timestamp": {"type": "string"},
        "status": {"enum": ["ok", "error"]},
        "payload": {"type": "object"},
        "error": {
            "type": "object",
            "required": ["code", "message"],
            "properties": {"code": {"type": "string"}, "message": {"type": "string"}},
        },
    },
}


def csv_text(command, columns, rows):
    """CSV with a versioned comment line; ``None`` cells are left empty."""
    buf = _io.StringIO()
    buf.write(f"# {CSV_VERSION} command={command}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        cells = row if isinstance(row, (list, tuple)) else [row[c] for c in columns]
        w.writerow(["" if c is None else (repr(float(c)) if isinstance(c, (float, np.floating)) else c) for c in cells])
    return buf.getvalue()


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]
