"""Command-line front end.

    bogo-gas bound --n 100000 --kappa 2 --hard-core 0.01
    bogo-gas sweep --n 1e6 --kappa 0.8:1.2:0.05 --a 0.01 --output sweep.csv
    bogo-gas verify --suite all

Single runs emit JSON, sweeps emit CSV.  Floats are written with 17
significant digits and keys in a fixed order, so identical inputs give
byte-identical files.  Exit status: 0 success, 1 solver failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import bogoliubov as bg
from . import bound_assembler as ba
from . import condensate as cd
from . import ideal_gas as ig
from . import scattering as sc
from . import verify as vf

SCHEMA_VERSION = "1.0"
ELL_EXPONENT = 11.0 / 18.0

SWEEP_COLUMNS = ["N", "kappa", "a", "N0", "mu0", "f0_plus", "density_density", "f_bec",
                 "f0_bec", "bog_correction", "selected_branch", "total", "tail_flags", "error"]


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- formatting

def fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with 17-significant-digit floats and insertion-ordered keys."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if hasattr(obj, "item"):   # numpy scalar
        return dumps(obj.item(), indent)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _envelope(command: str, payload: dict) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "command": command}
    out.update(payload)
    return out


# ---------------------------------------------------------------- parameter parsing

def _positive(name):
    def conv(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name}: not a number: {text!r}")
        if not v > 0 or not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"{name} must be positive and finite")
        return v
    return conv


def _nonneg(text):
    v = float(text)
    if not v >= 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError("value must be nonnegative and finite")
    return v


def parse_kv(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise argparse.ArgumentTypeError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = float(v)
    return out


def parse_grid(text: str) -> list[float]:
    """'1e4,1e5' or 'start:stop:step' (stop inclusive)."""
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or not parts[2] > 0 or parts[1] < parts[0]:
            raise argparse.ArgumentTypeError(f"bad range {text!r}; use start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        # round to the step's decimals so the grid is exactly reproducible
        digits = max(0, -int(math.floor(math.log10(step))) + 2)
        return [round(start + i * step, digits) for i in range(count)]
    vals = [float(p) for p in text.split(",") if p.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty grid")
    return vals


def read_config(path: str) -> dict:
    """Plain key=value lines; '#' starts a comment."""
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("-", "_")] = v.strip()
    return cfg


def _potential_from_args(args):
    if getattr(args, "hard_core", None) is not None:
        return sc.PotentialSpec.hard_core(args.hard_core)
    if getattr(args, "square_barrier", None) is not None:
        kv = args.square_barrier
        try:
            return sc.PotentialSpec.square_barrier(kv["R"], kv["V0"])
        except KeyError as exc:
            raise UsageError(f"--square-barrier needs R=..,V0=.. (missing {exc})")
    if getattr(args, "tabulated", None) is not None:
        return sc.read_tabulated(args.tabulated)
    if getattr(args, "a", None) is not None:
        return args.a
    raise UsageError("give one of --a, --hard-core, --square-barrier, --tabulated")


def _add_potential(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--a", type=_nonneg, help="scattering length of the unscaled potential")
    g.add_argument("--hard-core", type=_positive("--hard-core"), metavar="R")
    g.add_argument("--square-barrier", type=parse_kv, metavar="R=..,V0=..")
    g.add_argument("--tabulated", metavar="PATH", help="two-column r, V(r) file")


def _add_temperature(p):
    p.add_argument("--n", type=_positive("--n"), required=True, help="particle number N")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--kappa", type=_positive("--kappa"), help="beta / beta_c")
    g.add_argument("--beta", type=_positive("--beta"))


def _state(args):
    if args.beta is not None:
        return ig.solve_mu0(args.beta, args.n)
    return ig.state_from_kappa(args.kappa, args.n)


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--output", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bogo-gas",
                                     description="Free-energy upper bound for the dilute Bose gas on the unit torus.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_common()]

    p = sub.add_parser("scatter", parents=common, help="zero-energy scattering length")
    _add_potential(p)
    p.add_argument("--n", type=_positive("--n"), help="also report the scaled quantities at this N")
    p.add_argument("--ell", type=_positive("--ell"), help="truncation radius (default N^-11/18 or 4R)")
    p.add_argument("--ell-exponent", type=_positive("--ell-exponent"), default=ELL_EXPONENT)

    p = sub.add_parser("ideal", parents=common, help="ideal Bose gas at given N and temperature")
    _add_temperature(p)

    p = sub.add_parser("bogoliubov", parents=common, help="Bogoliubov correction and spectrum data")
    _add_temperature(p)
    _add_potential(p)
    p.add_argument("--delta-bog", type=_positive("--delta-bog"), default=bg.DELTA_BOG)

    p = sub.add_parser("condensate", parents=common, help="interacting condensate free energy")
    _add_temperature(p)
    _add_potential(p)
    p.add_argument("--n0", type=_positive("--n0"), help="condensate target (default: ideal N0)")
    p.add_argument("--regime-eps", type=_positive("--regime-eps"), default=cd.REGIME_EPS)

    p = sub.add_parser("bound", parents=common, help="assembled free-energy upper bound")
    _add_temperature(p)
    _add_potential(p)
    p.add_argument("--form", choices=["theorem", "condensed", "noncondensed"], default="theorem")
    p.add_argument("--delta-bog", type=_positive("--delta-bog"), default=bg.DELTA_BOG)
    p.add_argument("--ell-exponent", type=_positive("--ell-exponent"), default=ELL_EXPONENT)

    p = sub.add_parser("sweep", parents=common, help="grid over N, kappa, a; CSV output")
    p.add_argument("--n", type=parse_grid, required=True)
    p.add_argument("--kappa", type=parse_grid, required=True)
    p.add_argument("--a", type=parse_grid, required=True)
    p.add_argument("--delta-bog", type=_positive("--delta-bog"), default=bg.DELTA_BOG)
    p.add_argument("--jobs", type=int, default=None,
                   help="worker processes (default $BOGO_GAS_JOBS or the CPU count)")

    p = sub.add_parser("verify", parents=common, help="run the built-in invariant checks")
    p.add_argument("--suite", choices=["all"] + list(vf.SUITES), default="all")
    return parser


def _apply_config(parser: argparse.ArgumentParser, cfg: dict):
    """Install file values as subcommand defaults and relax the flags they satisfy."""
    subs = parser._subparsers._group_actions[0].choices
    used = set()
    for sp in subs.values():
        acts = {a.dest: a for a in sp._actions if a.dest not in ("help", "config")}
        vals = {}
        for k, v in cfg.items():
            if k in acts:
                act = acts[k]
                try:
                    vals[k] = act.type(v) if act.type else v
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"config {k}={v!r}: {exc}")
                used.add(k)
        if not vals:
            continue
        sp.set_defaults(**vals)
        for act in sp._actions:
            if act.dest in vals:
                act.required = False
        for grp in sp._mutually_exclusive_groups:
            if any(a.dest in vals for a in grp._group_actions):
                grp.required = False
    unknown = sorted(set(cfg) - used)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            cfg = read_config(known.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        _apply_config(parser, cfg)
    return parser.parse_args(argv)


# ---------------------------------------------------------------- commands

def cmd_scatter(args) -> dict:
    V = _potential_from_args(args)
    if not isinstance(V, sc.PotentialSpec):
        raise UsageError("scatter needs a potential, not --a")
    sol = sc.solve_zero_energy(V)
    out = {"potential": V.kind, "support_radius": V.support_radius,
           "scattering_length": sol.scattering_length}
    if V.kind == "square_barrier":
        out["closed_form"] = sc.square_barrier_length(V.radius, V.height)
    terms = {"app:scattering/scattering_length": sol.scattering_length}
    if args.n is not None:
        scaled = sc.solve_zero_energy(V.scaled(args.n))
        ell = args.ell if args.ell is not None else args.n ** -args.ell_exponent
        out["N"] = args.n
        out["a_N"] = scaled.scattering_length
        out["ell"] = ell
        out["energy_functional"] = sc.energy_functional(scaled, ell)
        out["energy_closed_form"] = sc.energy_f_ell(scaled.scattering_length, ell)
        terms["eq:energy_f_ell"] = out["energy_functional"]
    else:
        ell = args.ell if args.ell is not None else 4.0 * V.support_radius
        out["ell"] = ell
        out["energy_functional"] = sc.energy_functional(sol, ell)
        out["energy_closed_form"] = sc.energy_f_ell(sol.scattering_length, ell)
        terms["eq:energy_f_ell"] = out["energy_functional"]
    out["paper_terms"] = terms
    return out


def _state_dict(st: ig.IdealGasState) -> dict:
    return {"N": st.n_total, "beta": st.beta, "beta_c": st.beta_c, "kappa": st.kappa,
            "mu0": st.mu0, "N0": st.n0, "N0_over_N": st.n0 / st.n_total,
            "mu0_residual": st.residual, "excited_tail_bound": st.tail_bound}


def cmd_ideal(args) -> dict:
    st = _state(args)
    fb, fp = ig.f0_bec(st), ig.f0_plus(st)
    out = _state_dict(st)
    out.update({"f0_bec": fb, "f0_plus": fp, "f0_total": fb + fp})
    out["paper_terms"] = {"eq:Tc_ideal": st.beta_c, "eq:mu0_definition_implicit": st.mu0,
                          "eq:free_energy_ideal_condensate": fb, "eq:free_energy_ideal_cloud": fp}
    return out


def cmd_bogoliubov(args) -> dict:
    st = _state(args)
    a = ba.resolve_scattering_length(_potential_from_args(args))
    model = bg.BogoliubovModel.from_state(st, a, args.delta_bog)
    corr = bg.correction_sum(model.coupling, model.beta)
    direct, direct_tail = bg.bog_free_energy_direct(model)
    shells = model.pb_shells()
    out = _state_dict(st)
    out.update({
        "a": a, "a_N": model.a_n, "delta_bog": model.delta_bog,
        "P_B_radius": model.p_cut, "P_B_points": 0 if shells is None else shells.n_points,
        "e0_ground": bg.e0_ground(model),
        "bog_correction": corr.value, "bog_correction_tail_bound": corr.tail_bound,
        "bog_free_energy_direct": direct, "bog_free_energy_direct_tail_bound": direct_tail,
    })
    if st.kappa > 1:
        rep = bg.bog_expansion_check(model)
        out["expansion_residual"] = rep.residual
        out["expansion_budget_shape"] = rep.budget_shape
        out["expansion_residual_full_sum"] = rep.residual_full_sum
    out["paper_terms"] = {"eq:E_0": out["e0_ground"], "eq:main_result/bog_correction": corr.value,
                          "eq:free_energy_cloud_computation_1": direct}
    return out


def cmd_condensate(args) -> dict:
    st = _state(args)
    a = ba.resolve_scattering_length(_potential_from_args(args))
    if not a > 0:
        raise UsageError("condensate needs a > 0")
    a_n = a / st.n_total
    n0 = args.n0 if args.n0 is not None else st.n0
    model = cd.solve_mu(st.beta, 4 * math.pi * a_n, n0)
    mom = cd.moments(model)
    fbec = cd.f_bec_from_model(model, n0)
    reg = cd.classify_regime(n0, st.n_total, args.regime_eps)
    out = {"N": st.n_total, "beta": st.beta, "kappa": st.kappa, "a": a, "a_N": a_n, "N0": n0,
           "h": model.h, "mu": model.mu, "eta": model.eta, "log_Z": mom.log_z, "m1": mom.m1,
           "m2": mom.m2, "variance": mom.variance, "entropy_cl": mom.entropy_cl, "f_bec": fbec,
           "condensed_expansion": cd.condensed_expansion(st.beta, n0, a_n),
           "noncondensed_expansion": cd.noncondensed_expansion(st.beta, n0),
           "regime": reg.label, "regime_lower": reg.lower, "regime_upper": reg.upper,
           "regime_eps": reg.eps}
    out["paper_terms"] = {"eq:mu_definition": model.mu, "eq:free_energy_interacting_condensate": fbec,
                          "eq:g_variance": mom.variance,
                          "eq:f_bec_expansion_condensed": out["condensed_expansion"],
                          "eq:f_bec_expansion_noncondensed": out["noncondensed_expansion"]}
    return out


_FORM_LABEL = {"theorem": "eq:main_result", "condensed": "eq:main_result_condensed",
               "noncondensed": "eq:main_result_non_condensed"}


def report_dict(rep: ba.FreeEnergyReport) -> dict:
    label = _FORM_LABEL[rep.kind]
    inputs = dict(rep.inputs)
    return {
        "form": rep.kind,
        "inputs": inputs,
        "terms": dict(rep.terms),
        "selected_branch": rep.selected_branch,
        "total": rep.total,
        "error_scale": rep.error_scale,
        "error_scale_note": "C * N^(11/18) with unspecified C; not added to total",
        "diagnostics": dict(rep.diagnostics),
        "paper_terms": {f"{label}/{k}": v for k, v in rep.terms.items()} | {f"{label}/total": rep.total},
    }


def cmd_bound(args) -> dict:
    pot = _potential_from_args(args)
    kappa = args.kappa if args.kappa is not None else args.beta / ig.beta_c(args.n)
    fn = {"theorem": ba.theorem_bound, "condensed": ba.corollary_condensed,
          "noncondensed": ba.corollary_noncondensed}[args.form]
    try:
        rep = fn(args.n, kappa, pot, args.delta_bog)
    except ValueError as exc:
        if isinstance(exc, ba.AssemblyError):
            raise
        raise UsageError(str(exc))
    out = report_dict(rep)
    out["inputs"]["ell"] = args.n ** -args.ell_exponent
    return out


def _tail_flags(rep: ba.FreeEnergyReport) -> str:
    d, n = rep.diagnostics, rep.inputs["N"]
    flags = []
    if abs(d["mu0_residual"]) > 1e-10 * n:
        flags.append("mu0_residual")
    if d["excited_tail_bound"] > 1e-10 * n:
        flags.append("excited_tail")
    if d["bog_correction_tail_bound"] > 1e-10 * max(abs(rep.terms["bog_correction"]), 1e-300):
        flags.append("bog_tail")
    return ";".join(flags) if flags else "none"


def sweep_point(point) -> dict:
    n, kappa, a, delta_bog = point
    row = {"N": n, "kappa": kappa, "a": a}
    try:
        rep = ba.theorem_bound(n, kappa, a, delta_bog)
    except Exception as exc:   # recorded in-row, the sweep goes on
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    t = rep.terms
    row.update({"N0": t["N0"], "mu0": t["mu0"], "f0_plus": t["f0_plus"],
                "density_density": t["density_density"], "f_bec": t["f_bec"],
                "f0_bec": t["condensate_branch_ideal"], "bog_correction": t["bog_correction"],
                "selected_branch": rep.selected_branch, "total": rep.total,
                "tail_flags": _tail_flags(rep), "error": ""})
    return row


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        env = os.environ.get("BOGO_GAS_JOBS")
        if env:
            try:
                jobs = int(env)
            except ValueError:
                raise UsageError(f"BOGO_GAS_JOBS={env!r} is not an integer")
        else:
            jobs = os.cpu_count() or 1
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return jobs


def run_sweep(ns, kappas, avals, delta_bog=bg.DELTA_BOG, jobs=1) -> list[dict]:
    points = [(float(n), float(k), float(a), delta_bog) for n in ns for k in kappas for a in avals]
    if jobs == 1 or len(points) == 1:
        return [sweep_point(p) for p in points]
    with ProcessPoolExecutor(max_workers=min(jobs, len(points))) as pool:
        # map keeps grid order whatever the completion order
        return list(pool.map(sweep_point, points))


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        out = []
        for col in SWEEP_COLUMNS:
            v = row.get(col, "")
            out.append(format(v, ".17g") if isinstance(v, float) else v)
        w.writerow(out)
    return buf.getvalue()


def cmd_verify(args) -> dict:
    results = vf.run_suite(args.suite)
    return {"suite": args.suite, "passed": all(r["passed"] for r in results), "checks": results}


COMMANDS = {"scatter": cmd_scatter, "ideal": cmd_ideal, "bogoliubov": cmd_bogoliubov,
            "condensate": cmd_condensate, "bound": cmd_bound, "verify": cmd_verify}

_SOLVER_ERRORS = (ArithmeticError, RuntimeError, ig.SolverError, sc.ScatteringError,
                  cd.CondensateError, ba.AssemblyError, ValueError)


def _fail(code: int, kind: str, msg: str, command=None) -> int:
    rec = {"schema_version": SCHEMA_VERSION, "command": command,
           "error": {"kind": kind, "message": msg, "exit_code": code}}
    sys.stderr.write(dumps(rec) + "\n")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        return _fail(2, "usage", str(exc))
    except SystemExit as exc:   # argparse already printed its message
        return int(exc.code or 0)

    fmt = args.format or ("csv" if args.command == "sweep" else "json")
    try:
        if args.command == "sweep":
            if fmt != "csv":
                raise UsageError("sweep writes CSV only")
            jobs = resolve_jobs(args.jobs)
            rows = run_sweep(args.n, args.kappa, args.a, args.delta_bog, jobs)
            _emit(rows_to_csv(rows), args.output)
            return 0
        if fmt != "json":
            raise UsageError(f"{args.command} writes JSON only")
        payload = COMMANDS[args.command](args)
        _emit(dumps(_envelope(args.command, payload)) + "\n", args.output)
        if args.command == "verify" and not payload["passed"]:
            return 1
        return 0
    except UsageError as exc:
        return _fail(2, "usage", str(exc), args.command)
    except _SOLVER_ERRORS as exc:
        return _fail(1, type(exc).__name__, str(exc), args.command)


if __name__ == "__main__":
    sys.exit(main())
