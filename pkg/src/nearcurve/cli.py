"""Command line front end: ``nearcurve <group> <action> ...``.

Every command prints one JSON document (or CSV for scans) to stdout, or to
``--out`` when given. Exit codes: 0 ok, 2 precondition, 3 certification,
4 incomplete pipeline.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import kernels
from .errors import NearCurveError, PipelineIncomplete
from .forms import IntegerForm, singularity_scan


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from e


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from e


def _load_form(path: str, nvars: int | None = None) -> IntegerForm:
    """JSON form file, or a file holding a polynomial expression."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return IntegerForm.from_json(text)
    return IntegerForm.parse(text.strip(), nvars=nvars or 3)


def _emit(args, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _report_dict(r) -> dict:
    return {
        "form_id": r.form_id,
        "B": r.B,
        "gamma": str(r.gamma),
        "tau": str(r.tau),
        "N": r.N,
        "N_star": r.N_star,
        "per_line": dict(sorted(r.per_line.items())),
        "overlap": r.overlap,
        "strategy": r.strategy,
        "override": r.override,
    }


# -- commands ----------------------------------------------------------------------------


def cmd_forms_check(args):
    F = _load_form(args.file)
    out = {"form": F.to_dict(), "height": F.height(), "primitive": F.content() == 1}
    if F.nvars == 3:
        v = singularity_scan(F, seed=args.seed)
        out["singularity"] = {"status": v.status, "witness": v.witness, "note": v.note}
    _emit(args, out)


def cmd_geometry_flexes(args):
    from .geometry import flex_report

    F = _load_form(args.file)
    R = flex_report(F, precision=args.precision_bits, seed=args.seed, override=args.override)
    _emit(args, R.to_dict())


def cmd_count_scan(args):
    from .counting import CountQuery, count_gamma

    F = _load_form(args.file)
    flexes = None
    if args.exclude_tangents:
        from .geometry import flex_report

        flexes = flex_report(F, precision=args.precision_bits, seed=args.seed, override=args.override)
    q = CountQuery(F, args.B, args.gamma)
    r = count_gamma(q, flexes, threads=args.threads, form_id=Path(args.file).stem, override=args.override)
    _emit(args, _report_dict(r))


def cmd_detmethod_run(args):
    from .counting import CountQuery
    from .detmethod import run_pipeline

    F = _load_form(args.file)
    q = CountQuery(F, args.B, F.degree - args.tau)
    res = run_pipeline(q, Dmax=args.Dmax, threads=args.threads, override=args.override)
    _emit(args, res.to_json() + "\n")
    if not res.complete:
        raise PipelineIncomplete(f"{len(res.uncovered)} boxes have no auxiliary form of degree <= {args.Dmax}")


def cmd_thue_count(args):
    from .thue import Sublattice2, count_thue_lattice

    F = _load_form(args.file, nvars=2)
    lat = None
    if args.eta is not None:
        lat = Sublattice2(args.eta, args.s0, args.t0)
    n = count_thue_lattice(F, lat, args.B, args.P)
    out = {"B": args.B, "P": args.P, "count": n}
    if lat is not None:
        out["lattice"] = {"eta": lat.eta, "s0": lat.s0, "t0": lat.t0,
                          "basis": [list(r) for r in lat.basis], "det": lat.det}
    _emit(args, out)


def cmd_lattice_minima(args):
    from .lattice import gamma_minima

    L, res = gamma_minima(args.M, args.B, args.r, args.s)
    _emit(args, {
        "M": args.M, "B": args.B, "r": args.r, "s": args.s,
        "det": str(L.det),
        "minima": [str(m) for m in res.minima],
        "vectors": [[str(x) for x in v] for v in res.vectors],
        "basis": None if res.basis is None else [[str(x) for x in v] for v in res.basis],
    })


def cmd_experiment_scaling(args):
    from .counting import CountQuery
    from .experiments import SLACK, fit_and_report
    from .geometry import flex_report

    F = _load_form(args.file)
    flexes = flex_report(F, precision=args.precision_bits, seed=args.seed, override=args.override)
    plan = [CountQuery(F, B, args.gamma) for B in args.B_list]
    res = fit_and_report(plan, flexes, csv_path=args.out, plot_path=args.plot, threads=args.threads,
                         form_id=Path(args.file).stem, slack=args.slack if args.slack is not None else SLACK)
    summary = {
        "fit": res.fit.to_dict(),
        "bound": None if res.bound is None else str(res.bound),
        "slack": res.slack,
        "within": res.within,
    }
    if args.out is None:
        sys.stdout.write(res.csv)
    sys.stderr.write(json.dumps(summary) + "\n")


# -- parser ---------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--precision-bits", type=int, default=128)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write the result here instead of stdout")
    common.add_argument("--plot", default=None, help="SVG path (experiment scaling)")
    common.add_argument("--override", action="store_true", help="proceed when singularity is inconclusive")

    p = argparse.ArgumentParser(prog="nearcurve", parents=[common],
                                description="Integer points near plane curves, exactly.")
    p.add_argument("--version", action="version", version=f"%(prog)s ({kernels.BACKEND} kernels)")
    groups = p.add_subparsers(dest="group", required=True)

    def group(name, help_):
        g = groups.add_parser(name, help=help_)
        return g.add_subparsers(dest="action", required=True)

    forms = group("forms", "inspect a form")
    s = forms.add_parser("check", parents=[common], help="normalize, height, singularity verdict")
    s.add_argument("file")
    s.set_defaults(func=cmd_forms_check)

    geo = group("geometry", "flexes and patches")
    s = geo.add_parser("flexes", parents=[common], help="inflection points and tangent lines")
    s.add_argument("file")
    s.set_defaults(func=cmd_geometry_flexes)

    cnt = group("count", "exact counts")
    s = cnt.add_parser("scan", parents=[common], help="N_gamma (and N* with --exclude-tangents)")
    s.add_argument("file")
    s.add_argument("--B", type=int, required=True)
    s.add_argument("--gamma", type=_frac, required=True)
    s.add_argument("--exclude-tangents", action="store_true")
    s.set_defaults(func=cmd_count_scan)

    dm = group("detmethod", "box cover and auxiliary forms")
    s = dm.add_parser("run", parents=[common], help="run the covering pipeline")
    s.add_argument("file")
    s.add_argument("--B", type=int, required=True)
    s.add_argument("--tau", type=_frac, required=True)
    s.add_argument("--Dmax", type=int, default=6)
    s.set_defaults(func=cmd_detmethod_run)

    th = group("thue", "binary form inequalities")
    s = th.add_parser("count", parents=[common], help="1 <= |F(s,t)| <= P on a sublattice")
    s.add_argument("file")
    s.add_argument("--B", type=int, required=True)
    s.add_argument("--P", type=int, required=True)
    s.add_argument("--eta", type=int, default=None)
    s.add_argument("--s0", type=int, default=1)
    s.add_argument("--t0", type=int, default=0)
    s.set_defaults(func=cmd_thue_count)

    lat = group("lattice", "successive minima")
    s = lat.add_parser("minima", parents=[common], help="minima of the box lattice at (r/M, s/M)")
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--B", type=int, required=True)
    s.add_argument("--r", type=int, default=0)
    s.add_argument("--s", type=int, default=0)
    s.set_defaults(func=cmd_lattice_minima)

    ex = group("experiment", "scaling experiments")
    s = ex.add_parser("scaling", parents=[common], help="count over several B and fit the exponent")
    s.add_argument("file")
    s.add_argument("--gamma", type=_frac, required=True)
    s.add_argument("--B-list", type=_int_list, required=True)
    s.add_argument("--slack", type=float, default=None)
    s.set_defaults(func=cmd_experiment_scaling)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NearCurveError as e:
        sys.stderr.write(f"error: {e}\n")
        return e.exit_code
    except (OSError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
