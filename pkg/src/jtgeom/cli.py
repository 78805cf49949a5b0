"""Command-line harness.

    jtgeom <verb> [--config FILE] [--set key=value ...] [--out DIR]
                  [--format json|csv|both] [--threads N] [--seed N] [--no-timestamp]

Verbs: model-info, trough, berry, holonomy, vibronic, rotor, apes-scan,
perturb-scan. The JSON envelope is printed to stdout and, with ``--out``,
written to ``DIR/<verb>.json``; tables go to ``DIR/<verb>.csv``.

Exit codes: 0 ok, 2 config error, 3 capacity, 4 numerical error.
"""
import argparse
import hashlib
import sys
from pathlib import Path

import numpy as np
from scipy.stats import special_ortho_group

from . import __version__
from .errors import ConfigError, InvalidParameterError, JTError
from .holonomy import make_loop, subspace_holonomy, transport_ground
from .io import csv_text, dumps, envelope, load_config
from .model import apes, build_model, induced_configuration_rotation
from .perturb import SCAN_COLUMNS, add_field, add_quadratic, bracket_transitions, robustness_scan
from .trough import find_trough, verify_trough_spectrum
from .vibronic import low_spectrum, rotor_spectrum

VERBS = ("model-info", "trough", "berry", "holonomy", "vibronic", "rotor", "apes-scan", "perturb-scan")


def _model(cfg):
    return build_model(cfg["model"], cfg["F"], cfg["omega"])


def _loop(cfg, spec):
    base = cfg["loop.base"]
    if base is None:
        base = (0.0,) if spec.model.N == 2 else (np.pi / 2,) + (0.0,) * (spec.model.N - 2)
    return make_loop(spec, cfg["loop.kind"], base, cfg["loop.steps"], cfg["loop.radius"])


def cmd_model_info(cfg, opts):
    model = _model(cfg)
    rng = np.random.default_rng(opts.seed)
    U = special_ortho_group.rvs(model.N, random_state=rng)
    R = induced_configuration_rotation(model, U)
    Q = rng.standard_normal(model.M)
    resid = np.abs(model.hamiltonian(R @ Q) - U @ model.hamiltonian(Q) @ U.T).max()
    payload = {
        "name": model.name,
        "N": model.N,
        "M": model.M,
        "F": model.F,
        "omega": model.omega,
        "trace_constant": model.c,
        "coupling_checksums": [hashlib.sha256(np.ascontiguousarray(v).tobytes()).hexdigest()[:16] for v in model.V],
        "equivariance_residual": float(resid),
        "Qstar": None,
        "Emin": None,
    }
    if model.F > 0:
        spec = find_trough(model)
        payload["Qstar"] = spec.Qstar
        payload["Emin"] = spec.Emin
    return payload, None


def cmd_trough(cfg, opts):
    model = _model(cfg)
    spec = find_trough(model)
    report = verify_trough_spectrum(model, spec.Q_M)
    payload = {
        "Qstar": spec.Qstar,
        "Emin": spec.Emin,
        "Q_M": spec.Q_M,
        "gradient_norm": spec.gradient_norm,
        "is_pattern": report.is_pattern,
        "x_value": report.x_value,
        "ratios": report.ratios,
    }
    return payload, None


def _transport_table(model, loop, record):
    cols = ["step", "t"] + [f"Q{i + 1}" for i in range(model.M)] + [f"C{i + 1}" for i in range(model.N)]
    t = np.linspace(0.0, 1.0, loop.steps + 1)
    rows = [[i, t[i], *loop.points[i], *record.vectors[i]] for i in range(loop.steps + 1)]
    return cols, rows


def cmd_berry(cfg, opts):
    model = _model(cfg)
    spec = find_trough(model)
    loop = _loop(cfg, spec)
    record = transport_ground(model, loop)
    payload = {"phase_raw": record.phase_raw, "min_gap": record.min_gap, "steps": loop.steps, "kind": loop.kind}
    table = _transport_table(model, loop, record)
    try:
        h = subspace_holonomy(model, loop)
    except JTError as err:
        err.payload, err.tables = payload, {"berry": table}
        raise
    payload.update(phase=h.gamma0, flipped_count=h.flipped_count, W_det=h.W_det)
    return payload, {"berry": table}


def cmd_holonomy(cfg, opts):
    model = _model(cfg)
    spec = find_trough(model)
    loop = _loop(cfg, spec)
    h = subspace_holonomy(model, loop)
    payload = {
        "gamma0": h.gamma0,
        "phase_raw": h.phase_raw,
        "W": h.W,
        "W_det": h.W_det,
        "flipped_count": h.flipped_count,
        "diagnostics": h.diagnostics,
    }
    return payload, None


def cmd_vibronic(cfg, opts):
    model = _model(cfg)
    s = low_spectrum(model, cfg["vibronic.n_max"], cfg["vibronic.k"], cfg["vibronic.tol"], cfg["vibronic.max_dim"])
    payload = {
        "levels": s.levels,
        "degeneracies": s.degeneracies,
        "ground_cluster_size": s.degeneracies[0],
        "ground_splitting": s.ground_splitting,
        "n_max": s.n_max,
        "reference_n_max": s.reference_n_max,
        "ground_shift": s.ground_shift,
        "converged": s.converged,
        "residual": s.residual,
    }
    rows = [[i, e] for i, e in enumerate(s.levels)]
    return payload, {"vibronic": (["index", "energy"], rows)}


def cmd_rotor(cfg, opts):
    N = cfg["rotor.N"]
    if N is None:
        N = _model(cfg).N
    r = rotor_spectrum(N, cfg["rotor.parity"], cfg["rotor.count"])
    levels = [{"L": lv.L, "energy": lv.energy, "degeneracy": lv.degeneracy} for lv in r.levels]
    rows = [[lv.L, lv.energy, lv.degeneracy] for lv in r.levels]
    return {"N": r.N, "parity": r.parity, "levels": levels}, {"rotor": (["L", "energy", "degeneracy"], rows)}


def _plane(cfg, M):
    if cfg["apes.dir1"] is not None or cfg["apes.dir2"] is not None:
        if cfg["apes.dir1"] is None or cfg["apes.dir2"] is None:
            raise ConfigError("apes.dir1 and apes.dir2 must be given together")
        d1, d2 = np.array(cfg["apes.dir1"]), np.array(cfg["apes.dir2"])
        if d1.shape != (M,) or d2.shape != (M,):
            raise ConfigError(f"apes directions must have length {M}")
        if abs(np.linalg.norm(d1) - 1) > 1e-9 or abs(np.linalg.norm(d2) - 1) > 1e-9 or abs(d1 @ d2) > 1e-9:
            raise ConfigError("apes directions must be orthonormal")
        return d1, d2
    axes = cfg["apes.axes"] or (0, M - 1)
    if len(axes) != 2 or len(set(axes)) != 2 or not all(0 <= a < M for a in axes):
        raise ConfigError(f"apes.axes must be two distinct indices in [0, {M})")
    return np.eye(M)[axes[0]], np.eye(M)[axes[1]]


def cmd_apes_scan(cfg, opts):
    model = _model(cfg)
    d1, d2 = _plane(cfg, model.M)
    n = cfg["apes.points"]
    if n < 2:
        raise InvalidParameterError("apes.points must be >= 2")
    grid = np.linspace(cfg["apes.lo"], cfg["apes.hi"], n)
    rows = []
    for x in grid:
        for y in grid:
            rows.append([x, y, *apes(model, x * d1 + y * d2)])
    arr = np.array(rows)
    i = int(np.argmin(arr[:, 2]))
    payload = {
        "points": n,
        "lo": cfg["apes.lo"],
        "hi": cfg["apes.hi"],
        "dir1": d1,
        "dir2": d2,
        "lower_min": arr[i, 2],
        "lower_argmin": arr[i, :2],
        "lower_argmin_radius": float(np.hypot(arr[i, 0], arr[i, 1])),
    }
    cols = ["x", "y"] + [f"E{k}" for k in range(model.N)]
    return payload, {"apes-scan": (cols, rows)}


def cmd_perturb_scan(cfg, opts):
    model = _model(cfg)
    spec = find_trough(model)
    loop = _loop(cfg, spec)
    if cfg["perturb.type"] == "quadratic":
        p = add_quadratic(model, 0.0)
    else:
        field = cfg["perturb.field"]
        W = np.array(field) if field is not None else np.diag(np.r_[np.ones(model.N - 1), -(model.N - 1)])
        p = add_field(model, W, 0.0)
    rows = robustness_scan(p, loop, cfg["perturb.grid"], cfg["perturb.n_max"], threads=opts.threads)
    payload = {
        "type": cfg["perturb.type"],
        "steps": loop.steps,
        "n_max": cfg["perturb.n_max"],
        "rows": rows,
        "transitions": bracket_transitions(rows),
    }
    return payload, {"perturb-scan": (list(SCAN_COLUMNS), rows)}


COMMANDS = {
    "model-info": cmd_model_info,
    "trough": cmd_trough,
    "berry": cmd_berry,
    "holonomy": cmd_holonomy,
    "vibronic": cmd_vibronic,
    "rotor": cmd_rotor,
    "apes-scan": cmd_apes_scan,
    "perturb-scan": cmd_perturb_scan,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="jtgeom", description="Jahn-Teller trough geometry, Berry phases and vibronic degeneracy.")
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--format", choices=("json", "csv", "both"), help="files written to --out")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-timestamp", action="store_true", help="omit the timestamp (byte-identical reruns)")
    return ap


def _write(out, fmt, verb, env, tables):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if fmt in ("json", "both"):
        (out / f"{verb}.json").write_text(dumps(env), encoding="utf-8")
    if fmt in ("csv", "both"):
        for name, (cols, rows) in (tables or {}).items():
            (out / f"{name}.csv").write_text(csv_text(verb, cols, rows), encoding="utf-8")


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    opts = build_parser().parse_args(argv)
    cfg = {}
    tables = None
    try:
        cfg = load_config(opts.config, opts.overrides)
        payload, tables = COMMANDS[opts.verb](cfg, opts)
        env = envelope(opts.verb, cfg, payload, version=__version__, timestamp=not opts.no_timestamp)
        code = 0
    except JTError as err:
        payload = getattr(err, "payload", None)
        tables = getattr(err, "tables", None)
        try:
            env = envelope(opts.verb, cfg, payload, error=err, version=__version__, timestamp=not opts.no_timestamp)
        except JTError:
            env = envelope(opts.verb, cfg, None, error=err, version=__version__, timestamp=not opts.no_timestamp)
        code = err.exit_code
        print(f"jtgeom {opts.verb}: {err.code}: {err}", file=sys.stderr)
    text = dumps(env)
    stdout.write(text)
    out = opts.out or cfg.get("output.dir")
    if out:
        _write(out, opts.format or cfg.get("output.format") or "json", opts.verb, env, tables)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
