"""Command-line front end.

Commands: classify, verify, simulate, linearize, gauge.  Reports are JSON
lines on stdout (one object per check or per input file); a human-readable
summary goes to stderr.  Exit codes: 0 all checks pass, 1 check failure,
2 input error, 3 command inapplicable to the parameter point.  DGSYM_LOG
sets the logging level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .fields import Grid, LogPolarField, read_snapshot, sample_trajectory, write_trajectory
from .flows import verify_symmetry_flow
from .linearize import (NotLinearizable, gauge_act_field, heat_pair_to_dg,
                        linearization_data, z_flow_se_from_zero)
from .params import (DGParams, GaugeElement, canonical_gauge, classify,
                     compute_invariants, gauge_act_params, predicate_report,
                     rational_str, reference_points)
from .pde import (HJSimilaritySolution, ScaleSimilaritySolution, evolve,
                  heat_solution, residual, se_gaussian, se_residual)
from .symmetry import (GeneratorNotAdmissible, basis_generator,
                       determining_residuals, is_admissible, parse_generator,
                       residuals_all_zero, verify_commutator_table,
                       verify_infinite_relations)

log = logging.getLogger("dgsym")

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_INAPPLICABLE = 0, 1, 2, 3


def _emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")


def _say(msg):
    sys.stderr.write(msg + "\n")


class InputError(Exception):
    pass


def _load_params(path) -> DGParams:
    try:
        return DGParams.load(path)
    except (OSError, ValueError, KeyError, ZeroDivisionError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _parse_grid(spec: str, bc: str) -> Grid:
    try:
        npts_s, dx_s = spec.split(",")
        npts, dx = int(npts_s), float(dx_s)
    except ValueError as exc:
        raise InputError(f"--grid expects 'N,dx', got {spec!r}") from exc
    if bc == "periodic":
        half = npts * dx / 2.0
        return Grid.make(n=1, npts=npts, extent=(-half, half), bc=bc)
    half = (npts - 1) * dx / 2.0
    return Grid.make(n=1, npts=npts, extent=(-half, half), bc=bc)


def _rationals(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"expected a rational 'p/q', got {text!r}") from exc


# ---------------------------------------------------------------------------
# classify

def _classify_report(path, p: DGParams) -> dict:
    cls = classify(p)
    inv = compute_invariants(p)
    g, _ = canonical_gauge(p)
    out = {
        "file": str(path) if path else None,
        "n": p.n,
        "class": cls.tag,
        "algebra": cls.algebra,
        "invariants": inv.to_json_dict(),
        "predicates": cls.predicates,
        "canonical_gauge": {"Lambda": rational_str(g.Lambda),
                            "gamma": rational_str(g.gamma)},
    }
    if cls.tag in ("Sym1b", "Sym1c"):
        data = linearization_data(p)
        out.update(data.to_json_dict())
    return out


def cmd_classify(args) -> int:
    paths = []
    for entry in args.params:
        if os.path.isdir(entry):
            paths.extend(sorted(
                os.path.join(entry, f) for f in os.listdir(entry)
                if f.endswith(".json")))
        else:
            paths.append(entry)
    if not paths:
        raise InputError("no parameter files given")
    bad = 0
    for path in paths:
        try:
            p = _load_params(path)
        except InputError as exc:
            bad += 1
            _emit({"file": str(path), "error": str(exc)})
            _say(f"{path}: error: {exc}")
            continue
        report = _classify_report(path, p)
        _emit(report)
        _say(f"{path}: {report['class']}  ({report['algebra']})")
    return EXIT_INPUT if bad else EXIT_OK


# ---------------------------------------------------------------------------
# verify

_DETERMINING_SETS = {
    "GalSub": ("galsub", ["H", "D", "C", "P:1", "B:1", "E", "R"]),
    "FinSub": ("finsub", ["H", "D", "A", "P:1", "E", "R"]),
    "Sym3": ("sym3-nu2", ["H", "D", "C", "A", "P:1", "B:1", "E", "R"]),
    "ExpSub": ("expsub-nu2", ["H", "D", "P:1", "E", "R", "F"]),
    "InfSub": ("infsub", ["H", "D", "P:1", "E", "R", "Yf:1+z^2+z^3"]),
    "EhrSub": ("sym1b-nu2", ["H", "D", "C", "P:1", "B:1", "E", "R"]),
    "generic": ("generic", ["H", "D", "P:1", "E", "R"]),
}


def _point_for(args, default_key: str) -> DGParams:
    if args.params:
        return _load_params(args.params[0])
    key = (args.point_class or default_key).lower()
    pts = reference_points(args.n or 1)
    if key not in pts:
        raise InputError(f"unknown reference class {key!r}; "
                         f"choose from {sorted(pts)}")
    return pts[key]


def _suite_commutators(args, rows):
    p = _point_for(args, "sym3-nu2")
    if args.n:
        p = p.replace(n=args.n)
    for row in verify_commutator_table(p):
        rows.append({"suite": "commutators", "check": row.label,
                     "pass": row.passed, "detail": row.detail})
    if predicate_report(p)["InfSub"]:
        for row in verify_infinite_relations(p):
            rows.append({"suite": "commutators", "check": row.label,
                         "pass": row.passed})


def _suite_determining(args, rows):
    sub = args.subfamily or "Sym3"
    if sub not in _DETERMINING_SETS:
        raise InputError(f"unknown subfamily {sub!r}; choose from "
                         f"{sorted(_DETERMINING_SETS)}")
    key, gens = _DETERMINING_SETS[sub]
    p = _load_params(args.params[0]) if args.params else reference_points(args.n or 1)[key]
    gens = args.gen or gens
    for gname in gens:
        name = parse_generator(gname)
        X = basis_generator(name, p, require_admissible=False)
        res = determining_residuals(p, X)
        ok = residuals_all_zero(res)
        nonzero = [lbl for lbl, e in res if not e.is_zero]
        rows.append({"suite": "determining", "subfamily": sub,
                     "generator": str(name), "pass": ok,
                     "nonzero": nonzero})
    if sub == "generic":
        # negative control: these must fail outside their subfamilies
        for gname in ("C", "B:1"):
            X = basis_generator(gname, p, require_admissible=False)
            nonzero = [lbl for lbl, e in determining_residuals(p, X)
                       if not e.is_zero]
            rows.append({"suite": "determining", "subfamily": "generic",
                         "generator": gname, "expected_nonzero": True,
                         "pass": bool(nonzero), "nonzero": nonzero})


def _bundled_solution(p: DGParams):
    tag = classify(p).tag
    if tag in ("Sym1b",):
        data = linearization_data(p)
        fp = heat_solution(data.diffusion, "forward" if p.nu1 > 0 else "backward",
                           amplitude=0.8, focus_time=1.5, offset=0.5)
        fm = heat_solution(data.diffusion, "backward" if p.nu1 > 0 else "forward",
                           amplitude=0.6, focus_time=-0.75, offset=0.4)
        return heat_pair_to_dg(fp, fm, p)
    if tag == "Sym1c":
        data = linearization_data(p)
        return z_flow_se_from_zero(se_gaussian(data.se_coefficient, b0=-0.3),
                                   0.5, p)
    if tag == "Sym3" and p.nu2 == 0:
        return ScaleSimilaritySolution(p)
    if tag == "Sym2a":
        return HJSimilaritySolution(p)
    raise InputError(f"no bundled closed-form solution for class {tag}; "
                     "supply a linearizable or similarity point")


def _suite_flow(args, rows):
    p = _load_params(args.params[0]) if args.params else reference_points(1)["sym1b"]
    sol = _bundled_solution(p)
    grid = args.grid_obj or Grid.make(npts=64, extent=(-4, 4))
    gens = args.gen or ["P:1", "B:1", "H", "D", "C"]
    eps = args.eps if args.eps is not None else 0.3
    baseline_tol = args.tol if args.tol else 0.05
    lo, hi = 3.0, 5.0
    for gname in gens:
        name = parse_generator(gname)
        if not is_admissible(name, p):
            rows.append({"suite": "flow", "generator": str(name),
                         "skipped": True, "pass": True,
                         "detail": f"not admissible at {classify(p).tag}"})
            continue
        rep = verify_symmetry_flow(p, name, eps, sol, grid, (0.02, 0.18),
                                   baseline_tol=baseline_tol)
        ok = lo <= rep.ratio_l2 <= hi
        rows.append({"suite": "flow", "generator": str(name), "pass": ok,
                     **rep.to_json_dict()})


def _suite_gauge(args, rows):
    import random

    rng = random.Random(args.seed or 0)
    count = 200

    def rq(lo=-4, hi=4, den=6):
        return Fraction(rng.randint(lo, hi), rng.randint(1, den))

    bad = 0
    for _ in range(count):
        nu1 = rq()
        while nu1 == 0:
            nu1 = rq()
        p = DGParams(n=1, nu1=nu1, nu2=rq(), mu0=rq(), mu1=rq(), mu2=rq(),
                     mu3=rq(), mu4=rq(), mu5=rq())
        lam = rq()
        while lam == 0:
            lam = rq()
        g = GaugeElement(lam, rq())
        q = gauge_act_params(g, p)
        if compute_invariants(q) != compute_invariants(p) \
                or classify(q).tag != classify(p).tag:
            bad += 1
    rows.append({"suite": "gauge", "check": "invariance-sample",
                 "samples": count, "violations": bad, "pass": bad == 0})


def cmd_verify(args) -> int:
    rows = []
    suites = [args.suite] if args.suite != "all" \
        else ["commutators", "determining", "flow", "gauge"]
    for suite in suites:
        if suite in ("commutators",):
            _suite_commutators(args, rows)
        elif suite == "determining":
            _suite_determining(args, rows)
        elif suite in ("flow", "flows"):
            _suite_flow(args, rows)
        elif suite == "gauge":
            _suite_gauge(args, rows)
        else:
            raise InputError(f"unknown suite {suite!r}")
    rows.sort(key=lambda r: (r.get("suite", ""), str(r.get("check", r.get("generator", "")))))
    failures = 0
    for row in rows:
        _emit(row)
        if not row.get("pass", False):
            failures += 1
    npass = len(rows) - failures
    _say(f"verify: {npass}/{len(rows)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_CHECK


# ---------------------------------------------------------------------------
# simulate

def _make_init(spec: str, grid: Grid, p: DGParams):
    kind, _, payload = spec.partition(":")
    opts = {}
    if payload and kind != "file":
        for item in payload.split(","):
            key, _, val = item.partition("=")
            opts[key] = float(val)
    xs = grid.coords()
    if kind == "bump":
        ra, sa, w = opts.get("ra", 0.3), opts.get("sa", 0.2), opts.get("w", 1.0)
        q = sum(np.asarray(x) ** 2 for x in xs)
        field = LogPolarField(grid, 0.0, ra * np.exp(-q / w ** 2),
                              sa * np.exp(-q / w ** 2))
        return field, None
    if kind == "planewave":
        if grid.bc != "periodic":
            raise InputError("plane-wave initial data needs a periodic grid")
        a, b = grid.bounds[0]
        mode = max(1, int(round(opts.get("k", 1.0) * (b - a) / (2 * np.pi))))
        k = 2 * np.pi * mode / (b - a)
        s = k * xs[0]
        return LogPolarField(grid, 0.0, np.zeros(grid.shape), s), None
    if kind == "se-packet":
        pack = se_gaussian(float(p.nu1), n=grid.n, b0=opts.get("b0", -0.25),
                           k=(opts["k"],) * grid.n if "k" in opts else None)
        r, s = pack.rs(xs, 0.0)
        return LogPolarField(grid, 0.0, r, s), pack
    if kind == "file":
        return read_snapshot(payload, grid), None
    raise InputError(f"unknown initial condition {spec!r}")


def cmd_simulate(args) -> int:
    p = _load_params(args.params[0])
    grid = _parse_grid(args.grid or "64,0.125", args.bc)
    field0, closed_form = _make_init(args.init, grid, p)
    dx2 = min(grid.spacings) ** 2
    dt = args.dt if args.dt else 0.2 * dx2
    steps = args.steps or int(np.ceil((args.t_final or 0.1) / dt))

    bc_values = None
    if grid.bc == "dirichlet":
        if closed_form is not None:
            bc_values = closed_form.rs
        else:
            r0, s0 = field0.r.copy(), field0.s.copy()
            bc_values = lambda xs, t: (r0, s0)

    traj = evolve(p, field0, steps, dt=dt, bc_values=bc_values,
                  save_every=max(1, args.save_every))
    rep = residual(p, traj) if len(traj) >= 3 else None
    outdir = args.out or "dgsym-run"
    write_trajectory(traj, outdir, params_json=p.to_json_dict(), dt=dt)
    row = {"command": "simulate", "class": classify(p).tag, "steps": steps,
           "dt": dt, "out": outdir,
           "residual": rep.to_json_dict() if rep else None}
    _emit(row)
    _say(f"simulate: {steps} steps of dt={dt:.3g} written to {outdir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# linearize

def cmd_linearize(args) -> int:
    p = _load_params(args.params[0])
    try:
        data = linearization_data(p)
    except NotLinearizable as exc:
        _say(f"linearize: {exc}")
        return EXIT_INAPPLICABLE

    grid = args.grid_obj or Grid.make(npts=64, extent=(-4, 4))
    fine = grid.refine(2)
    t_final = args.t_final or 0.2
    times = np.linspace(0.0, t_final, 9)
    times_fine = np.linspace(0.0, t_final, 17)
    outdir = args.out or "dgsym-linearize"

    if data.branch == "real":
        fwd = "forward" if p.nu1 > 0 else "backward"
        bwd = "backward" if p.nu1 > 0 else "forward"
        fp = heat_solution(data.diffusion, fwd, amplitude=0.8,
                           focus_time=t_final + 1.0, offset=0.5)
        fm = heat_solution(data.diffusion, bwd, amplitude=0.6,
                           focus_time=-0.3, offset=0.4)
        sol = heat_pair_to_dg(fp, fm, p)
        traj = sample_trajectory(sol, grid, times)
        rep = residual(p, traj)
        rep_fine = residual(p, sample_trajectory(sol, fine, times_fine))
        ratio = rep.l2 / rep_fine.l2 if rep_fine.l2 else float("inf")
        write_trajectory(traj, outdir, params_json=p.to_json_dict())
        ok = 3.0 <= ratio <= 5.0
        _emit({"command": "linearize", **data.to_json_dict(), "branch": "heat",
               "residual": rep.to_json_dict(),
               "residual_fine": rep_fine.to_json_dict(),
               "convergence_ratio": ratio, "pass": ok, "out": outdir})
        _say(f"linearize(heat): residual l2={rep.l2:.3e}, ratio={ratio:.2f}")
        return EXIT_OK if ok else EXIT_CHECK

    pack = se_gaussian(data.se_coefficient, n=p.n, b0=-0.3)
    sol = z_flow_se_from_zero(pack, 0.5, p)
    traj = sample_trajectory(sol, grid, times)
    rep = residual(p, traj)
    se_side = gauge_act_field(data.gauge_to_linear(), sol)
    se_rep = se_residual(data.se_coefficient,
                         sample_trajectory(se_side, grid, times))
    se_rep_fine = se_residual(data.se_coefficient,
                              sample_trajectory(se_side, fine, times_fine))
    ratio = se_rep.l2 / se_rep_fine.l2 if se_rep_fine.l2 else float("inf")
    # round trip: gauge there and back restores (r, s)
    f0 = traj[0]
    back = gauge_act_field(data.gauge_from_linear(),
                           gauge_act_field(data.gauge_to_linear(), f0))
    rt_err = float(max(np.max(np.abs(back.r - f0.r)), np.max(np.abs(back.s - f0.s))))
    write_trajectory(traj, outdir, params_json=p.to_json_dict())
    ok = 3.0 <= ratio <= 5.0 and rt_err < (args.tol or 1e-10)
    _emit({"command": "linearize", **data.to_json_dict(),
           "branch": "schroedinger", "dg_residual": rep.to_json_dict(),
           "se_residual": se_rep.to_json_dict(),
           "se_residual_fine": se_rep_fine.to_json_dict(),
           "convergence_ratio": ratio, "roundtrip_error": rt_err,
           "pass": ok, "out": outdir})
    _say(f"linearize(se): se-residual l2={se_rep.l2:.3e}, ratio={ratio:.2f}, "
         f"roundtrip={rt_err:.2e}")
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# gauge

def cmd_gauge(args) -> int:
    p = _load_params(args.params[0])
    if args.lam is None:
        raise InputError("gauge needs --lambda")
    lam = _rationals(args.lam)
    gam = _rationals(args.gamma or "0")
    if lam == 0:
        raise InputError("Lambda must be nonzero")
    g = GaugeElement(lam, gam)
    q = gauge_act_params(g, p)
    row = {"command": "gauge",
           "Lambda": rational_str(lam), "gamma": rational_str(gam),
           "params": q.to_json_dict(),
           "class_before": classify(p).tag, "class_after": classify(q).tag,
           "invariants": compute_invariants(q).to_json_dict()}
    _emit(row)
    if args.out:
        q.dump(args.out)
        _say(f"gauge: wrote {args.out}")
    if args.traj:
        from .fields import read_trajectory
        traj = read_trajectory(args.traj)
        out = traj.__class__(traj.grid, [gauge_act_field(g, f) for f in traj.fields])
        write_trajectory(out, args.traj_out or (args.traj.rstrip("/") + "-gauged"),
                         params_json=q.to_json_dict())
        _say("gauge: transformed trajectory written")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgsym", description=__doc__)
    ap.add_argument("--version", action="version", version=f"dgsym {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--params", nargs="*", default=[],
                        help="parameter JSON file(s) or a directory")
        sp.add_argument("--grid", help="grid as 'N,dx'")
        sp.add_argument("--dt", type=float)
        sp.add_argument("--gen", nargs="*", help="generator names, e.g. B:1 Yf:z^2")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--out", help="output file or directory")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--n", type=int, help="spatial dimension override")

    sp = sub.add_parser("classify", help="gauge invariants and symmetry class")
    common(sp)

    sp = sub.add_parser("verify", help="symbolic and numeric check suites")
    common(sp)
    sp.add_argument("--suite", default="all",
                    choices=["commutators", "determining", "flow", "flows",
                             "gauge", "all"])
    sp.add_argument("--class", dest="point_class",
                    help="reference class name, e.g. sym3-nu2")
    sp.add_argument("--subfamily",
                    help="determining-equation subfamily, e.g. GalSub")

    sp = sub.add_parser("simulate", help="evolve an initial field")
    common(sp)
    sp.add_argument("--bc", default="periodic", choices=["periodic", "dirichlet"])
    sp.add_argument("--init", default="bump",
                    help="bump[:ra=..,sa=..,w=..] | planewave[:k=..] | "
                         "se-packet[:k=..] | file:PATH")
    sp.add_argument("--t-final", dest="t_final", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--save-every", dest="save_every", type=int, default=1)

    sp = sub.add_parser("linearize", help="heat-pair / Schroedinger linearization")
    common(sp)
    sp.add_argument("--t-final", dest="t_final", type=float)

    sp = sub.add_parser("gauge", help="act on parameters (and trajectories)")
    common(sp)
    sp.add_argument("--lambda", dest="lam", help="rational Lambda, e.g. 2 or 3/2")
    sp.add_argument("--gamma", help="rational gamma")
    sp.add_argument("--traj", help="trajectory directory to transform")
    sp.add_argument("--traj-out", dest="traj_out")

    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("DGSYM_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    if getattr(args, "grid", None) and args.command in ("verify", "linearize"):
        args.grid_obj = _parse_grid(args.grid, "dirichlet")
    else:
        args.grid_obj = None
    handlers = {"classify": cmd_classify, "verify": cmd_verify,
                "simulate": cmd_simulate, "linearize": cmd_linearize,
                "gauge": cmd_gauge}
    try:
        if args.command in ("classify", "simulate", "linearize", "gauge") \
                and not args.params:
            raise InputError(f"{args.command} needs --params")
        return handlers[args.command](args)
    except GeneratorNotAdmissible as exc:
        _say(f"inapplicable: {exc}")
        return EXIT_INAPPLICABLE
    except NotLinearizable as exc:
        _say(f"inapplicable: {exc}")
        return EXIT_INAPPLICABLE
    except (InputError, ValueError) as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
