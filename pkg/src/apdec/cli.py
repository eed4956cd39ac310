"""Batch front end.

    apdec run      --case sod_1d --degree 3 --cells 256
    apdec converge --case transport_gaussian --degrees 1 2 3 --cells 32 64 128 256
    apdec apstudy  --case transport_gaussian --eps 1e-9 1e-6 1e-3 1 --cells 64 128
    apdec cases

Every command writes into ``--out`` (default ``$APDEC_OUTPUT_DIR`` or
``./apdec-output``) together with a ``manifest.json``.  A flat ``key = value``
file given by ``--config`` supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .basis import FESpace
from .cases import BenchmarkCase, case_names, get_case, run_case
from .errors import ConfigError, MeshError, StateError
from .mesh import lattice_indices, load_mesh_2d
from .residual import SchemeConfig
from .verify import convergence_table

OUTPUT_ENV = "APDEC_OUTPUT_DIR"


# ---------------------------------------------------------------------------
# output writers


def write_profile_csv(path, space: FESpace, u: np.ndarray) -> None:
    """1D snapshot: ``x,u_1..u_K`` at the DoF points, sorted by x."""
    vals = space.to_values(u).reshape(space.n_dofs, -1)
    x = space.points[:, 0]
    order = np.argsort(x, kind="stable")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + [f"u_{k + 1}" for k in range(vals.shape[1])])
        for i in order:
            w.writerow([repr(float(x[i]))] + [repr(float(v)) for v in vals[i]])


def write_vtk(path, space: FESpace, u: np.ndarray, title: str = "apdec") -> None:
    """Legacy ASCII unstructured grid: all DoF points, one triangle per cell
    through its vertex DoFs, point data per component."""
    vals = space.to_values(u).reshape(space.n_dofs, -1)
    alphas = lattice_indices(space.degree, 3)
    corner = [alphas.index(tuple(space.degree if b == a else 0 for b in range(3))) for a in range(3)]
    tris = space.cell_dofs[:, corner]
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {space.n_dofs} double"]
    lines += [f"{x:.12g} {y:.12g} 0" for x, y in space.points]
    lines.append(f"CELLS {len(tris)} {4 * len(tris)}")
    lines += [f"3 {a} {b} {c}" for a, b, c in tris]
    lines.append(f"CELL_TYPES {len(tris)}")
    lines += ["5"] * len(tris)
    lines.append(f"POINT_DATA {space.n_dofs}")
    for k in range(vals.shape[1]):
        lines += [f"SCALARS u_{k + 1} double 1", "LOOKUP_TABLE default"]
        lines += [f"{v:.12g}" for v in vals[:, k]]
    Path(path).write_text("\n".join(lines) + "\n")


def slice_points(space: FESpace, n: int = 401) -> np.ndarray:
    """Horizontal line through the middle of the domain's bounding box."""
    lo, hi = space.points.min(axis=0), space.points.max(axis=0)
    y = 0.5 * (lo[1] + hi[1])
    x = np.linspace(lo[0], hi[0], n)
    return np.stack([x, np.full(n, y)], axis=1)


def write_slice_csv(path, space: FESpace, u: np.ndarray, n: int = 401) -> None:
    pts = slice_points(space, n)
    vals = space.evaluate(u, pts).reshape(len(pts), -1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"] + [f"u_{k + 1}" for k in range(vals.shape[1])])
        for p, v in zip(pts, vals):
            w.writerow([repr(float(p[0])), repr(float(p[1]))] + [repr(float(c)) for c in v])


def write_snapshot(out: Path, stem: str, space: FESpace, u: np.ndarray) -> list:
    if space.dim == 1:
        path = out / f"{stem}.csv"
        write_profile_csv(path, space, u)
        return [path.name]
    vtk, sl = out / f"{stem}.vtk", out / f"{stem}_slice.csv"
    write_vtk(vtk, space, u, stem)
    write_slice_csv(sl, space, u)
    return [vtk.name, sl.name]


def write_manifest(out: Path, payload: dict) -> Path:
    payload = dict(payload, version=__version__, python=platform.python_version(),
                   numpy=np.__version__)
    path = out / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    return str(obj)


# ---------------------------------------------------------------------------
# argument handling


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; dashes and underscores are interchangeable."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _common(p: argparse.ArgumentParser, multi: bool = False) -> None:
    p.add_argument("--config", help="key = value file supplying defaults")
    p.add_argument("--case", help="benchmark name (see `apdec cases`)")
    if multi:
        p.add_argument("--degrees", type=int, nargs="+", choices=(1, 2, 3))
        p.add_argument("--cells", type=int, nargs="+")
    else:
        p.add_argument("--degree", type=int, choices=(1, 2, 3))
        p.add_argument("--cells", type=int)
        p.add_argument("--mesh", help="2D mesh file (overrides --cells)")
    p.add_argument("--cfl", type=float)
    p.add_argument("--lam", type=float, help="kinetic speed lambda (default: the case's)")
    p.add_argument("--T", dest="T", type=float, help="final time")
    p.add_argument("--corrections", type=int, help="DeC iterations including the prediction")
    p.add_argument("--subtimesteps", type=int)
    p.add_argument("--scheme", choices=("galerkin_jump", "lxf_blend"))
    p.add_argument("--theta", type=float, nargs="+", help="jump coefficients theta_1..theta_d")
    p.add_argument("--jump-scaling", choices=("reference", "physical"))
    p.add_argument("--maxwellian", choices=("nodal", "coefficient"))
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./apdec-output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apdec", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"apdec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one case and write snapshots")
    _common(run)
    run.add_argument("--eps", type=float)
    run.add_argument("--output-times", type=float, nargs="+", default=None)

    conv = sub.add_parser("converge", help="mesh-refinement study with EOC table")
    _common(conv, multi=True)
    conv.add_argument("--eps", type=float)
    conv.add_argument("--reference", choices=("exact", "fine_grid"))
    conv.add_argument("--component", type=int, default=None, help="0-based component for the rates")

    ap = sub.add_parser("apstudy", help="errors over a grid of relaxation parameters")
    _common(ap, multi=True)
    ap.add_argument("--eps", type=float, nargs="+")
    ap.add_argument("--reference", choices=("exact", "fine_grid"))

    sub.add_parser("cases", help="list the benchmark catalogue")
    return parser


_CASTS = {"degree": int, "cells": int, "cfl": float, "lam": float, "T": float, "eps": float,
          "corrections": int, "subtimesteps": int, "component": int}


def resolve(args: argparse.Namespace) -> dict:
    """Merge the config file under the explicit flags."""
    opts = {k: v for k, v in vars(args).items() if v is not None}
    if args.config:
        for key, raw in read_config_file(args.config).items():
            if key in opts or key == "config":
                continue
            sweep = args.command != "run"
            listy = key in ("degrees", "theta", "output_times") or (
                key == "cells" and sweep) or (key == "eps" and args.command == "apstudy")
            cast = _CASTS.get(key, float if key in ("theta", "output_times", "eps") else str)
            if key == "degrees":
                cast = int
            try:
                opts[key] = [cast(x) for x in raw.replace(",", " ").split()] if listy else cast(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc
    if "case" not in opts:
        raise ConfigError(f"--case is required; available: {', '.join(case_names())}")
    return opts


def output_dir(opts: dict, default_name: str) -> Path:
    base = opts.get("out") or os.environ.get(OUTPUT_ENV) or "apdec-output"
    out = Path(base)
    if not opts.get("out"):
        out = out / default_name
    out.mkdir(parents=True, exist_ok=True)
    return out


def config_overrides(case: BenchmarkCase, degree: int, opts: dict) -> dict:
    """Translate CLI options to :meth:`BenchmarkCase.config` overrides."""
    scheme = case.scheme(degree)
    if any(k in opts for k in ("scheme", "theta", "jump_scaling")):
        theta = tuple(opts.get("theta", scheme.theta))
        scheme = SchemeConfig(opts.get("scheme", scheme.variant), theta, degree,
                              opts.get("jump_scaling", scheme.jump_scaling))
    out = {"scheme": scheme}
    for key in ("cfl", "lam", "T", "corrections", "subtimesteps", "maxwellian"):
        if key in opts:
            out[key] = opts[key]
    if "eps" in opts and not isinstance(opts["eps"], list):
        out["eps"] = opts["eps"]
    if "output_times" in opts:
        out["output_times"] = tuple(opts["output_times"])
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_run(opts: dict) -> int:
    case = get_case(opts["case"])
    degree = int(opts.get("degree", 1))
    mesh = load_mesh_2d(opts["mesh"]) if "mesh" in opts else None
    cells = opts.get("cells", case.default_cells)
    overrides = config_overrides(case, degree, opts)
    out = output_dir(opts, f"{case.name}_B{degree}")
    files = []

    space_box = {}

    def snapshot(t, u):
        files.extend(write_snapshot(out, f"{case.name}_B{degree}_t{t:.6g}", space_box["space"], u))

    start = time.perf_counter()
    if mesh is None:
        mesh = case.build_mesh(cells)
    space_box["space"] = FESpace(mesh, degree)
    space, result = run_case(case, degree, mesh=mesh, callback=snapshot, **overrides)
    wall = time.perf_counter() - start
    files.extend(write_snapshot(out, f"{case.name}_B{degree}_final", space, result.u))
    config = case.config(degree, **overrides)
    write_manifest(out, {
        "command": "run", "case": case.name, "degree": degree,
        "cells": int(mesh.n_cells), "mesh": opts.get("mesh"), "dofs": int(space.n_dofs),
        "config": config, "time": result.t, "steps": result.steps,
        "wall_seconds": wall, "files": files,
    })
    print(f"{case.name} B{degree}: t={result.t:.6g} after {result.steps} steps "
          f"({wall:.1f}s) -> {out}")
    return 0


CONVERGENCE_COLUMNS = ["degree", "h", "dofs", "L1", "L2", "Linf", "eoc_L1", "eoc_L2", "eoc_Linf"]


def _fmt(x) -> str:
    return "" if isinstance(x, float) and np.isnan(x) else repr(float(x)) if isinstance(x, float) else str(x)


def cmd_converge(opts: dict) -> int:
    case = get_case(opts["case"])
    degrees = opts.get("degrees", [1, 2, 3])
    cells = opts.get("cells") or [32, 64, 128, 256]
    comp = int(opts.get("component", 0))
    out = output_dir(opts, f"{case.name}_convergence")
    path = out / f"{case.name}_convergence.csv"
    start = time.perf_counter()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CONVERGENCE_COLUMNS)
        for d in degrees:
            rows = convergence_table(case, d, cells, component=comp,
                                     reference=opts.get("reference"), **config_overrides(case, d, opts))
            for r in rows:
                rec = [d, r.h, r.errors.dofs, r.errors.L1[comp], r.errors.L2[comp],
                       r.errors.Linf[comp], *r.eoc]
                w.writerow([_fmt(x) for x in rec])
                print(" ".join(f"{c}={_fmt(x)}" for c, x in zip(CONVERGENCE_COLUMNS, rec)))
    write_manifest(out, {"command": "converge", "case": case.name, "degrees": degrees,
                         "cells": cells, "component": comp, "reference": opts.get("reference", case.reference),
                         "overrides": {str(d): config_overrides(case, d, opts) for d in degrees},
                         "wall_seconds": time.perf_counter() - start, "files": [path.name]})
    return 0


AP_COLUMNS = ["degree", "eps", "h", "dofs", "L1", "L2", "Linf", "eoc_L2", "order_reduced"]


def cmd_apstudy(opts: dict) -> int:
    case = get_case(opts["case"])
    degrees = opts.get("degrees", [1])
    cells = opts.get("cells") or [64, 128]
    eps_list = opts.get("eps") or [1e-9, 1e-6, 1e-3, 1.0]
    if not isinstance(eps_list, list):
        eps_list = [eps_list]
    out = output_dir(opts, f"{case.name}_apstudy")
    path = out / f"{case.name}_apstudy.csv"
    start = time.perf_counter()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(AP_COLUMNS)
        for d in degrees:
            for eps in eps_list:
                over = config_overrides(case, d, opts)
                over["eps"] = float(eps)
                rows = convergence_table(case, d, cells, reference=opts.get("reference"), **over)
                for r in rows:
                    rate = r.eoc[1]
                    reduced = "" if np.isnan(rate) else str(bool(rate < d + 1 - 0.5))
                    rec = [d, float(eps), r.h, r.errors.dofs, r.errors.L1[0], r.errors.L2[0],
                           r.errors.Linf[0], rate, reduced]
                    w.writerow([_fmt(x) for x in rec])
                    print(" ".join(f"{c}={_fmt(x)}" for c, x in zip(AP_COLUMNS, rec)))
    write_manifest(out, {"command": "apstudy", "case": case.name, "degrees": degrees,
                         "cells": cells, "eps": eps_list,
                         "wall_seconds": time.perf_counter() - start, "files": [path.name]})
    return 0


def cmd_cases() -> int:
    for name in case_names():
        c = get_case(name)
        print(f"{name:20s} {c.dim}D  {c.variant:14s} {c.description}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "cases":
            return cmd_cases()
        opts = resolve(args)
        return {"run": cmd_run, "converge": cmd_converge, "apstudy": cmd_apstudy}[args.command](opts)
    except (ConfigError, MeshError) as exc:
        print(f"apdec: error: {exc}", file=sys.stderr)
        return 2
    except StateError as exc:
        print(f"apdec: non-physical state: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
