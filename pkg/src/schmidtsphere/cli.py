"""Command line interface.

Exit codes: 0 success, 1 unknown subcommand, 2 invalid input, 3 numerical
failure (for example a lift through a non-regular point).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config
from .errors import ConfigError, SingularityError
from .factorizations import complex_svd, hua, quasi_diag, rect_diag, takagi
from .fields import induced_field, speed_limit_bound, strong_stab_search, weyl_average
from .lift import LocalHamiltonian, equivalence_check, integrate_full, lift_schedule
from .reduced import (
    ControlSchedule,
    LocalControl,
    chamber_diameter,
    control_time_lower_bound,
    integrate_reduced,
    lie_rank,
    reach_sample,
)
from .states import MAX_ENUMERABLE, Kind, sing_sorted
from .symlie import verify_all

COMMANDS = (
    "factorize",
    "field",
    "evolve-reduced",
    "evolve-full",
    "lift",
    "verify-equivalence",
    "verify-lie",
    "rank",
    "bounds",
    "reach",
    "stabilize",
)

USAGE = "usage: schmidtsphere {" + ",".join(COMMANDS) + "} [options]\n"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x) -> str:
    return "%.17g" % x


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return config.encode_matrix(obj) if obj.ndim == 2 else {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(args, report: dict, summary: str, csv=None) -> None:
    """Write ``report.json`` (and ``trajectory.csv``) to ``--out``; print the summary."""
    report = _to_jsonable(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        if csv is not None:
            _write_csv(out / "trajectory.csv", *csv)
    elif csv is None:
        print(json.dumps(report, sort_keys=True))
    print(summary)


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) {', '.join(missing)}")


def _load_h0(args):
    return config.parse_h0(config.read_json(args.h0))


def _load_schedule(args, H0, T=None):
    if args.schedule is None:
        if T is None:
            raise UsageError(f"{args.command}: give --schedule or --T")
        return ControlSchedule.constant(LocalControl.identity(H0.d1, H0.d2), T)
    return config.parse_schedule(config.read_json(args.schedule), H0.d1, H0.d2, T)


def _fmt_vec(v) -> str:
    return "(" + ", ".join("%.8f" % x for x in v) + ")"


# -- subcommands -----------------------------------------------------------------


def cmd_factorize(args):
    _need(args, "state")
    state = config.parse_state(config.read_json(args.state))
    psi = state.coeffs
    if state.kind is Kind.DISTINGUISHABLE:
        V, s, W = complex_svd(psi)
        report = {"kind": state.kind.value, "V": V, "W": W, "sigma": s}
        resid = np.linalg.norm(V @ psi @ W.conj().T - rect_diag(s, *psi.shape))
        summary = f"sigma={_fmt_vec(s)}"
    elif state.kind is Kind.BOSONIC:
        V, s = takagi(psi)
        report = {"kind": state.kind.value, "V": V, "sigma": s}
        resid = np.linalg.norm(V @ psi @ V.T - np.diag(s))
        summary = f"sigma={_fmt_vec(s)}"
    else:
        V, xi = hua(psi)
        report = {"kind": state.kind.value, "V": V, "xi": xi, "qsing": np.asarray(sing_sorted(state))}
        resid = np.linalg.norm(V @ psi @ V.T - quasi_diag(xi, psi.shape[0]))
        summary = f"xi={_fmt_vec(xi)} qsing={_fmt_vec(report['qsing'])}"
        if psi.shape[0] % 2:
            summary += " (zero singular value of odd d dropped)"
    if args.check:
        report["residual"] = float(resid)
        report["unitarity_defect"] = float(np.linalg.norm(V.conj().T @ V - np.eye(V.shape[0])))
        summary += f" residual={resid:.3g}"
    _emit(args, report, summary)
    return 0


def _read_unitary(args, H0):
    if args.unitary is None:
        return np.eye(H0.d1), np.eye(H0.d2)
    data = config.read_json(args.unitary)
    errors = config._Errors()
    V = config.parse_matrix(data.get("V"), "V", errors) if isinstance(data, dict) and "V" in data else None
    if V is None:
        errors.add("V", "missing or invalid")
    W = config.parse_matrix(data["W"], "W", errors) if isinstance(data, dict) and "W" in data else V
    errors.raise_if_any()
    ctrl = LocalControl(V, W)
    return ctrl.pair


def cmd_field(args):
    _need(args, "h0")
    H0 = _load_h0(args)
    U = _read_unitary(args, H0)
    f = induced_field(H0, U)
    report = {"kind": H0.kind.value, "field": f.matrix, "spectral_norm": f.norm(), "skew_defect": f.skew_defect}
    _emit(args, report, f"field n={f.n} spectral_norm={f.norm():.12g}")
    return 0


def cmd_evolve_reduced(args):
    _need(args, "h0", "sigma0", "dt")
    H0 = _load_h0(args)
    p0 = config.parse_point(args.sigma0, H0.n)
    sched = _load_schedule(args, H0, args.T)
    traj = integrate_reduced(H0, sched, p0, args.dt)
    header = ["t"] + [f"sigma_{i + 1}" for i in range(H0.n)]
    rows = [[t, *p] for t, p in zip(traj.times, traj.points)]
    report = {"T": sched.T, "dt": args.dt, "points": len(traj), "final": traj.final}
    _emit(args, report, f"evolve-reduced T={sched.T:.12g} final={_fmt_vec(traj.final)}", (header, rows))
    return 0


def _full_local(H0, sched: ControlSchedule):
    """Piecewise-constant local Hamiltonian from generator segments."""
    hams = []
    for seg in sched.segments:
        if seg.generator is None:
            hams.append(None)
        else:
            E, F = seg.generator
            hams.append(LocalHamiltonian(H0.kind, E, None if H0.kind.indistinguishable else F))
    bps = sched.breakpoints

    def local(t):
        k = min(int(np.searchsorted(bps, t, side="right")) - 1, len(hams) - 1)
        return hams[max(k, 0)]

    return local


def cmd_evolve_full(args):
    _need(args, "h0", "state", "dt")
    H0 = _load_h0(args)
    state = config.parse_state(config.read_json(args.state))
    if args.schedule is None and args.T is None:
        raise UsageError("evolve-full: give --schedule or --T")
    sched = _load_schedule(args, H0, args.T) if args.schedule else None
    T = sched.T if sched is not None else args.T
    local = _full_local(H0, sched) if sched is not None else None
    if sched is not None and any(s.generator is None and not np.allclose(s.V, np.eye(H0.d1)) for s in sched.segments):
        raise UsageError("evolve-full: schedule segments must be generators {E, F} or identity")
    traj = integrate_full(H0, local, state, T, args.dt)
    svals = traj.singular_values()
    d1, d2 = H0.d1, H0.d2
    idx = [f"{i + 1}{j + 1}" for i in range(d1) for j in range(d2)]
    header = ["t"] + [f"re_{k}" for k in idx] + [f"im_{k}" for k in idx] + [f"s_{i + 1}" for i in range(svals.shape[1])]
    rows = [[t, *psi.real.ravel(), *psi.imag.ravel(), *s] for t, psi, s in zip(traj.times, traj.states, svals)]
    report = {"T": T, "dt": args.dt, "points": len(traj.times), "final_singular_values": svals[-1]}
    note = " (zero singular value of odd d dropped)" if H0.kind is Kind.FERMIONIC and d1 % 2 else ""
    _emit(args, report, f"evolve-full T={T:.12g} final sing={_fmt_vec(svals[-1])}{note}", (header, rows))
    return 0


def cmd_lift(args):
    _need(args, "h0", "sigma0", "dt")
    H0 = _load_h0(args)
    p0 = config.parse_point(args.sigma0, H0.n)
    sched = _load_schedule(args, H0, args.T)
    records = lift_schedule(H0, sched, p0, args.dt)
    peak = max(math.hypot(np.linalg.norm(np.array(r["H"]["E"]["re"]) + 1j * np.array(r["H"]["E"]["im"])),
                          np.linalg.norm(np.array(r["H"]["F"]["re"]) + 1j * np.array(r["H"]["F"]["im"])))
               for r in records)
    report = {"T": sched.T, "dt": args.dt, "compensators": records, "max_norm": peak}
    _emit(args, report, f"lift points={len(records)} max compensator norm={peak:.6g}")
    return 0


def cmd_verify_equivalence(args):
    _need(args, "h0", "sigma0", "dt")
    H0 = _load_h0(args)
    p0 = config.parse_point(args.sigma0, H0.n)
    sched = _load_schedule(args, H0, args.T)
    rep = equivalence_check(H0, sched, p0, dt=args.dt, phase_insensitive=args.phase_insensitive,
                            projection=args.projection, seed=args.seed)
    _emit(args, rep.to_dict(), f"max_dev={rep.max_dev:.3e} regular_fraction={rep.regular_fraction:.6f}")
    return 0


def cmd_verify_lie(args):
    if args.h0:
        H0 = _load_h0(args)
        cases = [(H0.kind, H0.d1, H0.d2)]
    elif args.kind:
        d1 = args.d1 or (4 if args.kind == "fermionic" else 3)
        cases = [(Kind(args.kind), d1, args.d2 or d1)]
    else:
        cases = [(Kind.DISTINGUISHABLE, 3, 2), (Kind.BOSONIC, 3, 3), (Kind.FERMIONIC, 4, 4), (Kind.FERMIONIC, 5, 5)]
    results = []
    ok = True
    for kind, d1, d2 in cases:
        r = verify_all(kind, d1, d2, trials=args.trials, seed=args.seed)
        r.update({"kind": kind.value, "d1": d1, "d2": d2})
        ok = ok and all(v["pass"] for v in r.values() if isinstance(v, dict))
        results.append(r)
    _emit(args, {"results": results, "pass": ok}, f"verify-lie {'PASS' if ok else 'FAIL'} ({len(cases)} case(s))")
    return 0


def cmd_rank(args):
    _need(args, "h0")
    H0 = _load_h0(args)
    r = lie_rank(H0, samples=args.samples, seed=args.seed)
    full = H0.n * (H0.n - 1) // 2
    _emit(args, {"rank": r, "dim_so_n": full, "n": H0.n, "full": r == full}, f"rank={r} dim so({H0.n})={full}")
    return 0


def cmd_bounds(args):
    _need(args, "h0")
    H0 = _load_h0(args)
    b = speed_limit_bound(H0)
    t = control_time_lower_bound(H0)
    report = {"speed_bound": b, "control_time_lower_bound": t, "chamber_diameter": chamber_diameter(H0.n), "n": H0.n}
    _emit(args, report, f"speed_bound={b:.12g} control_time_lower_bound={t:.12g}")
    return 0


def cmd_reach(args):
    _need(args, "h0", "sigma0", "T")
    H0 = _load_h0(args)
    p0 = config.parse_point(args.sigma0, H0.n)
    pts = reach_sample(H0, p0, args.T, args.trials, seed=args.seed, jobs=args.jobs)
    header = ["trial"] + [f"sigma_{i + 1}" for i in range(H0.n)]
    rows = [[k, *p] for k, p in enumerate(pts)]
    report = {"T": args.T, "trials": args.trials, "seed": args.seed, "endpoints": pts}
    _emit(args, report, f"reach trials={args.trials}", (header, rows) if args.out else None)
    return 0


def cmd_stabilize(args):
    _need(args, "h0", "sigma0")
    H0 = _load_h0(args)
    p0 = config.parse_point(args.sigma0, H0.n)
    res = strong_stab_search(H0, p0, samples=args.samples, seed=args.seed)
    report = {"method": res.method, "residual": res.residual, "field_norm": res.field_norm, "V": res.V, "W": res.W}
    if H0.n <= MAX_ENUMERABLE:
        report["weyl_average_max"] = float(np.max(np.abs(weyl_average(H0, (res.V, res.W)))))
    _emit(args, report, f"stabilize method={res.method} residual={res.residual:.3e}")
    return 0


HANDLERS = {
    "factorize": cmd_factorize,
    "field": cmd_field,
    "evolve-reduced": cmd_evolve_reduced,
    "evolve-full": cmd_evolve_full,
    "lift": cmd_lift,
    "verify-equivalence": cmd_verify_equivalence,
    "verify-lie": cmd_verify_lie,
    "rank": cmd_rank,
    "bounds": cmd_bounds,
    "reach": cmd_reach,
    "stabilize": cmd_stabilize,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="schmidtsphere", description="Reduced control on the Schmidt sphere.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--h0", help="drift Hamiltonian JSON")
        p.add_argument("--state", help="state JSON")
        p.add_argument("--schedule", help="control schedule JSON")
        p.add_argument("--sigma0", help="initial Schmidt point, e.g. '0.8,0.6'")
        p.add_argument("--T", type=float, help="time horizon")
        p.add_argument("--dt", type=float, help="time step")
        p.add_argument("--out", help="output directory for report.json / trajectory.csv")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--phase-insensitive", action="store_true")
        if name == "factorize":
            p.add_argument("--check", action="store_true", help="report residual norms")
        if name == "field":
            p.add_argument("--unitary", help="JSON with V (and W) matrices; identity if omitted")
        if name == "verify-equivalence":
            p.add_argument("--projection", action="store_true", help="also check the projection direction")
        if name in ("rank", "stabilize"):
            p.add_argument("--samples", type=int, default=20 if name == "rank" else 16)
        if name == "reach":
            p.add_argument("--trials", type=int, default=100)
        if name == "verify-lie":
            p.add_argument("--kind", choices=[k.value for k in Kind])
            p.add_argument("--d1", type=int)
            p.add_argument("--d2", type=int)
            p.add_argument("--trials", type=int, default=100)
    return parser


def _validate(args):
    if args.dt is not None and not args.dt > 0:
        raise UsageError("--dt must be positive")
    if args.T is not None and not (args.T >= 0 and math.isfinite(args.T)):
        raise UsageError("--T must be a finite non-negative number")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    for name in ("samples", "trials"):
        if getattr(args, name, 1) < 1:
            raise UsageError(f"--{name} must be >= 1")


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        sys.stdout.write(USAGE)
        return 0 if argv else 1
    if argv[0] not in COMMANDS:
        sys.stderr.write(f"unknown subcommand {argv[0]!r}\n" + USAGE)
        return 1
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        return HANDLERS[args.command](args)
    except SystemExit as exc:  # --help inside a subcommand
        return int(exc.code or 0)
    except (UsageError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except SingularityError as exc:
        sys.stderr.write(f"numerical failure: {exc} (gap {exc.gap})\n")
        return 3
    except ArithmeticError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
