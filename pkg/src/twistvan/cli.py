"""Command-line interface.

Subcommands: enumerate, lvalues, moments, predict, ratios, report, hist.
Exit codes: 0 ok, 2 configuration error, 3 numerical-contract violation,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import central_values as cv
from . import characters, curve_model, experiment_harness as eh
from . import moment_engine as me
from . import ratio_conjecture as rc
from .errors import ConfigError, RecordIOError, TwistvanError


def _add_curve_arg(p):
    p.add_argument("--curve", required=True, help="curve config path or builtin label (11A, 307A)")


def _add_sign_arg(p):
    p.add_argument("--sign", required=True, choices=["plus", "minus"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistvan",
        description="Vanishing statistics of quadratic twists of elliptic curve L-functions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list a twist family as CSV")
    _add_curve_arg(p)
    _add_sign_arg(p)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=int, choices=[1, -1], default=None)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")

    p = sub.add_parser("lvalues", help="batch central values for a family")
    _add_curve_arg(p)
    _add_sign_arg(p)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=1e-9)
    p.add_argument("--out", required=True, help="binary records path")
    p.add_argument("--csv", default=None, help="also export a CSV")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--cache-dir", default=None)

    p = sub.add_parser("moments", help="moment polynomial and its closed forms (JSON)")
    _add_curve_arg(p)
    _add_sign_arg(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=int, choices=[1, -1], default=None)
    p.add_argument("--P", type=int, default=1000)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--records", default=None, help="records file for the empirical moment")

    p = sub.add_parser("predict", help="two-term vanishing-ratio prediction (JSON)")
    _add_curve_arg(p)
    _add_sign_arg(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--P", type=int, default=rc.DEFAULT_PRIME_CUTOFF)
    p.add_argument("--raw-sum", action="store_true", help="disable checkpoint smoothing")

    p = sub.add_parser("ratios", help="empirical ratio report for one (curve, q) (JSON)")
    _add_curve_arg(p)
    _add_sign_arg(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--P", type=int, default=rc.DEFAULT_PRIME_CUTOFF)

    p = sub.add_parser("report", help="run the full pipeline from a suite manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--cache-dir", default=None)
    p.add_argument(
        "--figures",
        action="store_true",
        help="render figures via the render_figures tool (requires the figures package)",
    )

    p = sub.add_parser("hist", help="histogram a CSV column")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--column", default="resid1")
    p.add_argument("--bin", type=float, default=0.0002)
    p.add_argument("--out", default=None)
    return parser


def _cmd_enumerate(args) -> int:
    curve = curve_model.load_curve(args.curve)
    prog = (args.q, args.lam) if args.q is not None else None
    if (args.q is None) != (args.lam is None):
        raise ConfigError("--q and --lambda must be given together")
    sel = characters.FamilySelector(args.sign, args.X, curve, prog)
    if args.out:
        n = characters.export_family_csv(sel, args.out)
        print(f"wrote {n} discriminants to {args.out}")
    else:
        ds = characters.enumerate_family(sel)
        w = csv.writer(sys.stdout, lineterminator="\n")
        if prog:
            w.writerow(["d", f"chi_{args.q}"])
            for d in ds:
                w.writerow([int(d), characters.kronecker(int(d), args.q)])
        else:
            w.writerow(["d"])
            for d in ds:
                w.writerow([int(d)])
    return 0


def _cmd_lvalues(args) -> int:
    curve = curve_model.load_curve(args.curve)
    sel = characters.FamilySelector(args.sign, args.X, curve)
    policy = cv.VanishingPolicy(epsilon=args.epsilon)
    table = None
    ds = characters.enumerate_family(sel)
    if len(ds):
        n_max, _ = cv.cutoff_terms(curve, int(np.abs(ds).max()), args.epsilon)
        if args.cache_dir:
            eh.cache_management(curve, n_max, args.cache_dir)
        table = curve_model.an_table(curve, n_max)
    records = cv.batch(curve, sel, policy, workers=args.workers, table=table, out=args.out)
    if args.csv:
        cv.export_records_csv(records, args.csv)
    vanished = sum(r.vanished for r in records)
    print(f"{len(records)} records, {vanished} vanished -> {args.out}")
    return 0


def _cmd_moments(args) -> int:
    curve = curve_model.load_curve(args.curve)
    override = (args.q, args.lam) if args.q is not None else None
    if (args.q is None) != (args.lam is None):
        raise ConfigError("--q and --lambda must be given together")
    poly = me.upsilon_poly(curve, args.k, args.sign, override, prime_cutoff=args.P)
    out = {
        "coefficients": poly.coefficients,
        "leading_closed_form": poly.h0 * float(me.g_k(args.k)),
        "beta": None,
        "empirical": None,
        "integral": me.mean_upsilon(poly, args.X),
        "P": poly.prime_cutoff,
        "stability": poly.stability_delta,
    }
    if poly.degree >= 1:
        out["beta"] = poly.coefficients[-2] / (
            poly.coefficients[-1] * poly.degree
        )
    if args.records:
        _, records = cv.read_records(args.records, curve)
        sel = characters.FamilySelector(args.sign, args.X, curve, override)
        out["empirical"] = me.empirical_moment(records, sel, args.k)
    print(json.dumps(out))
    return 0


def _cmd_predict(args) -> int:
    curve = curve_model.load_curve(args.curve)
    pred = rc.r_predicted(
        curve, args.sign, args.q, args.X, prime_cutoff=args.P, smoothed=not args.raw_sum
    )
    print(
        json.dumps(
            {
                "q": pred.q,
                "a_q": pred.a_q,
                "R_main": pred.r_main,
                "beta_plus": pred.beta_plus.beta,
                "beta_minus": pred.beta_minus.beta,
                "R_second": pred.value,
                "P": args.P,
                "stability": max(
                    pred.beta_plus.stability_delta, pred.beta_minus.stability_delta
                ),
            }
        )
    )
    return 0


def _cmd_ratios(args) -> int:
    curve = curve_model.load_curve(args.curve)
    sel = characters.FamilySelector(args.sign, args.X, curve)
    _, records = cv.read_records(args.records, curve)
    pred = rc.r_predicted(curve, args.sign, args.q, args.X, prime_cutoff=args.P)
    rep = eh.ratio_report(records, sel, args.q, pred)
    print(
        json.dumps(
            {
                "curve": rep.curve_label,
                "q": rep.q,
                "a_q": rep.a_q,
                "vanished_plus": rep.vanished_plus,
                "vanished_minus": rep.vanished_minus,
                "r_empirical": rep.r_empirical,
                "r_main": rep.r_main,
                "r_second": rep.r_second,
                "resid1": rep.resid1,
                "resid2": rep.resid2,
            }
        )
    )
    return 0


def _cmd_report(args) -> int:
    manifest = eh.SuiteManifest.load(args.manifest)
    out_dir = Path(args.out_dir)
    eh.run_suite(manifest, out_dir, args.cache_dir)
    suite_csv = out_dir / f"suite_{manifest.sign}.csv"
    print(f"suite written to {suite_csv}")
    if args.figures:
        exe = shutil.which("render_figures")
        if exe is None:
            raise ConfigError(
                "--figures requires the render_figures tool (install the "
                "figures package); the report CSVs were still written"
            )
        for kind in ("hist_overlay", "scatter_q", "grid_by_aq"):
            img = out_dir / f"{kind}_{manifest.sign}.png"
            subprocess.run(
                [exe, "--kind", kind, "--in", str(suite_csv), "--out", str(img)],
                check=True,
            )
            print(f"figure written to {img}")
    return 0


def _cmd_hist(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise RecordIOError(f"input CSV not found: {path}")
    values = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            cell = row.get(args.column)
            if cell:
                values.append(float(cell))
    h = eh.histogram(values, args.bin)
    out = sys.stdout if args.out is None else open(args.out, "w", newline="")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["bin_start", "bin_end", "count"])
        for idx in sorted(h.bins):
            w.writerow(
                [repr(idx * h.bin_width), repr((idx + 1) * h.bin_width), h.bins[idx]]
            )
    finally:
        if args.out is not None:
            out.close()
    return 0


COMMANDS = {
    "enumerate": _cmd_enumerate,
    "lvalues": _cmd_lvalues,
    "moments": _cmd_moments,
    "predict": _cmd_predict,
    "ratios": _cmd_ratios,
    "report": _cmd_report,
    "hist": _cmd_hist,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except TwistvanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
