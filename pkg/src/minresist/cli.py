"""Command-line driver: solver runs, sweeps, validation, mesh export.

Subcommands: ``free``, ``free-nonsym``, ``restricted``, ``sweep``,
``validate``, ``export-mesh``.  A JSON job file (``--config``) can supply
any field; explicit flags win.  Exit codes: 0 success, 1 malformed job,
2 solver stall, 3 validation failure.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import freeopt, mesh, restricted, resistance, symmetry
from .geometry import TWO_PI, build_upper_boundary, validate_decomposition
from .manifest import Stopwatch


class JobError(Exception):
    """Malformed job specification; the message names the offending field."""


def _fmt(x, digits=13):
    return f"{x:.{digits}g}"


def emit_table(rows):
    """CSV table: one row per run manifest (13 significant digits)."""
    lines = ["M,k,n,objective,runtime_seconds,seeds,rounds"]
    for man in rows:
        cfg = man.config
        if "n1" in cfg:
            ncol = f"{cfg['n1']}/{cfg.get('n2', 0)}"
        else:
            ncol = str(cfg.get("n", ""))
        k = cfg.get("k")
        lines.append(",".join([
            _fmt(cfg["M"]), "" if k is None else str(k), ncol,
            _fmt(man.final_value), f"{man.wall_time:.2f}",
            str(man.extra.get("seeds", man.extra.get("seed", ""))),
            str(man.extra.get("rounds", man.extra.get("round", ""))),
        ]))
    return "\n".join(lines) + "\n"


def _write_artifacts(outdir, tag, manifests, best_manifest, solution_json,
                     points=None):
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    best_manifest.save(outdir / f"{tag}.manifest.json")
    (outdir / f"{tag}.history.csv").write_text(best_manifest.history_csv())
    (outdir / f"{tag}.results.csv").write_text(emit_table([best_manifest]))
    (outdir / f"{tag}.solution.json").write_text(solution_json)
    if len(manifests) > 1:
        data = [json.loads(m.to_json()) for m in manifests]
        (outdir / f"{tag}.runs.json").write_text(json.dumps(data, indent=2))


def _points_json(pts):
    return json.dumps(
        {"points": [[float(f"{c:.17g}") for c in p] for p in np.atleast_2d(pts)]},
        indent=2)


def _require(spec, field):
    if spec.get(field) is None:
        raise JobError(f"missing required field: {field}")
    return spec[field]


def _seeds(spec):
    s = spec.get("seeds", "1,2,3,4,5")
    if isinstance(s, (list, tuple)):
        return tuple(int(x) for x in s)
    if isinstance(s, int):
        return tuple(range(1, s + 1))
    return tuple(int(x) for x in str(s).split(","))


def _opts(spec):
    kw = {}
    if spec.get("grad_tol") is not None:
        kw["grad_tol"] = float(spec["grad_tol"])
    return freeopt.OptimizerOptions(**kw)


def _exit_for(man):
    return 2 if man.termination_reason == "stall" else 0


def run_free(spec, nonsymmetric=False):
    M = float(_require(spec, "M"))
    k = None if nonsymmetric else int(_require(spec, "k"))
    n = int(spec.get("n", 17))
    seeds = _seeds(spec)
    rounds = int(spec.get("rounds", 3))
    pts, man, all_m = freeopt.run_free_problem(
        M, k, n, seeds=seeds, rounds=rounds, opts=_opts(spec),
        nonsymmetric=nonsymmetric)
    man.extra.update({"seeds": ",".join(map(str, seeds)), "rounds": rounds})
    tag = f"free{'-nonsym' if nonsymmetric else ''}_M{M:g}" \
          + ("" if k is None else f"_k{k}")
    _write_artifacts(spec.get("out", "."), tag, all_m, man, _points_json(pts))
    print(emit_table([man]), end="")
    return _exit_for(man)


def run_restricted(spec):
    M = float(_require(spec, "M"))
    k = int(_require(spec, "k"))
    n1 = int(spec.get("n1", 200))
    n2 = spec.get("n2")
    n2 = None if n2 is None else int(n2)
    v, man, all_m = restricted.run_restricted_problem(
        M, k, n1_target=n1, n2_target=n2, opts=_opts(spec),
        free_seeds=_seeds(spec)[:3])
    tag = f"restricted_M{M:g}_k{k}"
    _write_artifacts(spec.get("out", "."), tag, all_m, man, v.to_json())
    print(emit_table([man]), end="")
    return _exit_for(man)


def _sweep_values(mspec):
    if isinstance(mspec, str) and ":" in mspec:
        a, b, s = (float(x) for x in mspec.split(":"))
        count = int(round((b - a) / s)) + 1
        return [round(a + i * s, 10) for i in range(count)]
    if isinstance(mspec, (list, tuple)):
        return [float(x) for x in mspec]
    raise JobError("sweep requires M as start:stop:step or a list")


def run_sweep(spec):
    k = int(_require(spec, "k"))
    Ms = _sweep_values(_require(spec, "M"))
    n1 = int(spec.get("n1", 60))
    n2 = spec.get("n2")
    n2 = None if n2 is None else int(n2)
    outdir = Path(spec.get("out", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    opts = _opts(spec)

    def one(M):
        v, man, _ = restricted.run_restricted_problem(
            M, k, n1_target=n1, n2_target=n2, opts=opts,
            free_seeds=_seeds(spec)[:2])
        (outdir / f"sweep_M{M:g}_k{k}.solution.json").write_text(v.to_json())
        man.save(outdir / f"sweep_M{M:g}_k{k}.manifest.json")
        return man

    workers = int(os.environ.get("NEWTON_THREADS", os.cpu_count() or 1))
    if workers > 1 and len(Ms) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            manifests = list(pool.map(one, Ms))
    else:
        manifests = [one(M) for M in Ms]
    table = emit_table(manifests)
    (outdir / f"sweep_k{k}.results.csv").write_text(table)
    print(table, end="")
    return 2 if any(m.termination_reason == "stall" for m in manifests) else 0


def run_validate(spec):
    n_cfg = int(spec.get("n", 100))
    worst = 0.0
    watch = Stopwatch()
    for seed in range(1, n_cfg + 1):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 51))
        r = np.sqrt(rng.uniform(0, 1, n)) * 0.98
        phi = rng.uniform(0, TWO_PI, n)
        z = rng.uniform(0.05, 1.5, n)
        pts = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        ub = build_upper_boundary(pts)
        report = validate_decomposition(ub)
        worst = max(worst, abs(report["residual"]))
    ok = worst <= 1e-9
    print(f"validate: {n_cfg} configurations, worst flux residual "
          f"{worst:.3e}, {watch.elapsed():.1f}s -> "
          f"{'PASS' if ok else 'FAIL'}")
    return 0 if ok else 3


def _load_solution(spec):
    path = spec.get("solution")
    if path is None:
        raise JobError("missing required field: solution")
    data = json.loads(Path(path).read_text())
    if "points" in data:
        return np.array(data["points"], dtype=float)
    v = restricted.RestrictedVars.from_json(json.dumps(data))
    return restricted.assemble_points(v)


def run_export_mesh(spec):
    pts = _load_solution(spec)
    k = spec.get("k")
    if k is not None:
        pts = symmetry.orbit(pts, int(k))
    resolution = float(spec.get("mesh_resolution", TWO_PI / 512))
    m = mesh.body_mesh(pts, resolution=resolution)
    info = m.check()
    outdir = Path(spec.get("out", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(spec["solution"]).stem
    mesh.write_ply(m, outdir / f"{stem}.ply")
    mesh.write_obj(m, outdir / f"{stem}.obj")
    value = mesh.mesh_resistance(m)
    exact = resistance.evaluate(pts)
    print(f"mesh: V={info['vertices']} E={info['edges']} F={info['faces']} "
          f"chi={info['euler_characteristic']} "
          f"watertight={info['watertight']} "
          f"resistance={value:.13g} (exact {exact:.13g})")
    return 0 if info["watertight"] and info["euler_characteristic"] == 2 else 3


_RUNNERS = {
    "free": run_free,
    "free-nonsym": lambda spec: run_free(spec, nonsymmetric=True),
    "restricted": run_restricted,
    "sweep": run_sweep,
    "validate": run_validate,
    "export-mesh": run_export_mesh,
}


def _build_parser():
    p = argparse.ArgumentParser(prog="minresist",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="mode", required=True)
    for name in _RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--M", type=str, default=None)
        sp.add_argument("--k", type=int, default=None)
        sp.add_argument("--n", type=int, default=None)
        sp.add_argument("--n1", type=int, default=None)
        sp.add_argument("--n2", type=int, default=None)
        sp.add_argument("--seeds", type=str, default=None)
        sp.add_argument("--rounds", type=int, default=None)
        sp.add_argument("--grad-tol", type=float, default=None,
                        dest="grad_tol")
        sp.add_argument("--out", type=str, default=None)
        sp.add_argument("--mesh-resolution", type=float, default=None,
                        dest="mesh_resolution")
        sp.add_argument("--solution", type=str, default=None)
        sp.add_argument("--config", type=str, default=None)
    return p


def run_job(spec):
    """Execute one job specification dict; returns the process exit code."""
    mode = spec.get("mode")
    if mode not in _RUNNERS:
        raise JobError(f"invalid mode: {mode!r}")
    if spec.get("M") is not None and mode != "sweep":
        try:
            spec["M"] = float(spec["M"])
        except (TypeError, ValueError):
            raise JobError(f"invalid M: {spec['M']!r}")
        if spec["M"] <= 0:
            raise JobError("M must be positive")
    return _RUNNERS[mode](spec)


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code else 0
    spec = {}
    if args.config:
        try:
            spec.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as e:
            print(f"error: config: {e}", file=sys.stderr)
            return 1
    for key in ("M", "k", "n", "n1", "n2", "seeds", "rounds", "grad_tol",
                "out", "mesh_resolution", "solution"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    spec["mode"] = args.mode
    try:
        return run_job(spec)
    except JobError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
