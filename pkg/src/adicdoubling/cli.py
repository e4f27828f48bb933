"""Command line entry point.

Subcommands: nt, select, find-x, build, scan, diag, verify.  Outputs are
canonical JSON (*.cert.json, *.tree.json, *.report.json), CSV rows for
the scan/diagnostic paths, and matplotlib figures rendered alongside the
delimited files.  All searches are deterministic, so reruns with the same
configuration produce byte-identical JSON and CSV.

Exit codes: 0 success, 2 validation, 3 search exhausted, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import measures, numtheory, selection, torus, weights
from .errors import AdicDoublingError, ValidationError, VerificationFailedError
from .intervals import PlainInterval
from .serialize import dumps, frac_str, loads, to_jsonable


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from exc


def _params(text: str) -> measures.WeightParams:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("params must be q,a,b")
    try:
        return measures.WeightParams(int(parts[0]), Fraction(parts[1]), Fraction(parts[2]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def load_config(path: str) -> dict[str, str]:
    """Flat key = value file; # starts a comment."""
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line without '=': {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    if {"q", "a", "b"} <= values.keys():
        try:
            measures.WeightParams(
                int(values["q"]), Fraction(values["a"]), Fraction(values["b"])
            )
        except ValueError as exc:
            raise ValidationError(f"bad weight parameters in config: {exc}") from exc
    return values


def _emit(args, name: str, text: str) -> Path:
    out = Path(args.out_dir) / f"{args.prefix}.{name}"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(out)
    return out


def _emit_csv(args, name: str, header: list[str], rows) -> Path:
    out = Path(args.out_dir) / f"{args.prefix}.{name}"
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(out)
    return out


def _cmd_nt(args) -> int:
    if args.nt_op == "order-profile":
        result = numtheory.order_profile(args.u, args.v, args.probe_depth)
        _emit(args, "profile.json", dumps(result))
    elif args.nt_op == "solve-pairs":
        profile = numtheory.order_profile(args.u, args.v)
        pairs = numtheory.solve_pairs(profile, args.m1, args.k, args.count)
        payload = {
            "kind": "congruence-pairs",
            "u": args.u,
            "v": args.v,
            "pairs": [to_jsonable(p) for p in pairs],
        }
        _emit(args, "pairs.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    elif args.nt_op == "far":
        result = numtheory.far_number_check(args.delta, args.base, args.max_level)
        _emit(args, "far.json", dumps(result))
    elif args.nt_op == "three-base":
        n = numtheory.unique_three_base_solution(
            args.p1, args.m1, args.k1, args.p2, args.m2, args.k2, args.q
        )
        payload = {"kind": "three-base-solution", "n": n}
        _emit(args, "threebase.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    elif args.nt_op == "totient":
        print(numtheory.totient(args.n))
    elif args.nt_op == "order":
        print(numtheory.multiplicative_order(args.a, args.modulus))
    return 0


def _cmd_select(args) -> int:
    domain = PlainInterval(args.domain[0], args.domain[1])
    epsilon = args.epsilon if args.epsilon is not None else Fraction(1, 16)
    multipliers = args.multipliers if args.multipliers is not None else [1]
    if args.two_base is not None:
        p, q, m, n = args.two_base
        cert = selection.select_two_base(p, q, m, n, domain, epsilon)
        _emit(args, "cert.json", dumps(cert))
        return 0
    if args.u is None or args.v is None:
        raise ValidationError("select needs --u and --v (flags or config)")
    if args.alpha_list:
        family = selection.build_family(args.u, args.v, multipliers, args.alpha_list, domain)
        _emit(args, "family.json", dumps(family))
        return 0
    cert = selection.select_revolving(args.u, args.v, multipliers, domain, epsilon)
    _emit(args, "cert.json", dumps(cert))
    return 0


def _cmd_find_x(args) -> int:
    if args.bases is None or args.epsilon is None:
        raise ValidationError("find-x needs --bases and --epsilon (flags or config)")
    cert = torus.find_x(
        args.bases,
        args.epsilon,
        x_min=args.x_min if args.x_min is not None else 1,
        x_max=args.x_max if args.x_max is not None else 10**6,
    )
    _emit(args, "cert.json", dumps(cert))
    return 0


def _cmd_build(args) -> int:
    if args.bases is None or args.alphas is None:
        raise ValidationError("build needs --bases and --alphas (flags or config)")
    params = args.params if args.params is not None else measures.DEFAULT_PARAMS
    x_max = args.x_max if args.x_max is not None else 10**6
    if args.compact:
        tree = measures.build_compactified(args.bases, args.alphas, params, x_max=x_max)
    else:
        certs = []
        x_min = 1
        for alpha in args.alphas:
            cert = torus.find_x(
                args.bases,
                measures.default_epsilon_schedule(alpha),
                x_min=x_min,
                x_max=x_max,
            )
            certs.append(cert)
            x_min = cert.x + 1
        tree = measures.build_finite_base_measure(args.bases, args.alphas, certs, params)
    measures.verify_tree(tree)
    _emit(args, "tree.json", dumps(tree))
    if not args.no_figures:
        from . import plots

        out = Path(args.out_dir) / f"{args.prefix}.density.png"
        plots.save_density_figure(tree, str(out))
        print(out)
    return 0


def _load_tree(path: str) -> measures.MeasureTree:
    tree = loads(Path(path).read_text())
    if not isinstance(tree, measures.MeasureTree):
        raise ValidationError(f"{path} does not hold a measure tree")
    return tree


def _cmd_scan(args) -> int:
    tree = _load_tree(args.tree)
    check = args.check_bases if args.check_bases is not None else []
    report = measures.scan_doubling(tree, bases_to_check=check)
    _emit(args, "report.json", dumps(report))
    _emit_csv(
        args,
        "scan.csv",
        ["stage_alpha", "scale_level", "worst_ratio"],
        report.ratio_rows,
    )
    if not args.no_figures:
        from . import plots

        fig1 = Path(args.out_dir) / f"{args.prefix}.scan.png"
        plots.save_scan_figure(report, str(fig1))
        print(fig1)
        fig2 = Path(args.out_dir) / f"{args.prefix}.stages.png"
        plots.save_stage_figure(report, str(fig2))
        print(fig2)
    return 0


def _diag_family(args, tree):
    if args.family == "windows":
        spans = []
        for entry in tree.entries:
            spans.extend(weights.stage_window_family(tree, entry))
        return spans
    if args.family.startswith("adic:"):
        base = int(args.family.split(":", 1)[1])
        spans = []
        for entry in tree.entries:
            spans.extend(weights.stage_adic_family(tree, base, entry))
        return spans
    raise ValidationError(f"unknown family {args.family!r}")


def _cmd_diag(args) -> int:
    if args.functional == "vmo-step":
        scales = [Fraction(10) ** (-k) for k in range(args.vmo_scales)]
        rows = [
            (frac_str(scale), frac_str(value), frac_str(value))
            for scale, value in weights.vmo_step_diagnostic(scales)
        ]
        _emit_csv(args, "diag.csv", ["scale", "value_lo", "value_hi"], rows)
        report = weights.vmo_step_report(scales)
        payload = {
            "kind": "oscillation-report",
            "family": report.family,
            "supremum": {"lo": frac_str(report.supremum.lo), "hi": frac_str(report.supremum.hi)},
            "diagnostics": {
                mode: [[frac_str(s), frac_str(v)] for s, v in rows_]
                for mode, rows_ in report.vmo_diagnostics.items()
            },
        }
        _emit(args, "report.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return 0

    tree = _load_tree(args.tree)
    view = weights.WeightView(tree)
    family = _diag_family(args, tree)
    rows = []
    figure_rows = []
    for span in family:
        if args.functional == "rh":
            enc = weights.rh_functional(view, span, args.r)
        elif args.functional == "ap":
            enc = weights.ap_functional(view, span, args.r)
        else:
            enc = weights.mean_oscillation(view, span)
        rows.append((frac_str(span.left), frac_str(span.right), frac_str(enc.lo), frac_str(enc.hi)))
        figure_rows.append((float(span.midpoint), float(enc.lo), float(enc.hi)))
    _emit_csv(args, "diag.csv", ["left", "right", "value_lo", "value_hi"], rows)
    if args.functional in ("rh", "ap"):
        top = max(range(len(family)), key=lambda i: Fraction(rows[i][3]))
        payload = {
            "kind": "functional-report",
            "functional": args.functional,
            "family": args.family,
            "r": frac_str(args.r),
            "supremum": {"lo": rows[top][2], "hi": rows[top][3]},
            "witness": {"left": rows[top][0], "right": rows[top][1]},
        }
        _emit(args, "report.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if args.functional == "bmo":
        report = weights.bmo_oscillation(view, family, label=args.family)
        payload = {
            "kind": "oscillation-report",
            "family": report.family,
            "supremum": {"lo": frac_str(report.supremum.lo), "hi": frac_str(report.supremum.hi)},
            "witness": (
                None
                if report.witness is None
                else {"left": frac_str(report.witness.left), "right": frac_str(report.witness.right)}
            ),
        }
        _emit(args, "report.json", json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if not args.no_figures:
        from . import plots

        out = Path(args.out_dir) / f"{args.prefix}.diag.png"
        plots.save_diag_figure(figure_rows, args.functional, str(out))
        print(out)
    return 0


def _cmd_verify(args) -> int:
    text = Path(args.file).read_text()
    obj = json.loads(text)
    kind = obj.get("kind")
    if kind == "congruence-pairs":
        profile = numtheory.order_profile(int(obj["u"]), int(obj["v"]))
        for rec in obj["pairs"]:
            pair = numtheory.CongruencePair(
                m2=int(rec["m2"]), j=int(rec["j"]), m1=int(rec["m1"]), k=int(rec["k"])
            )
            regenerated = numtheory.solve_pairs(profile, pair.m1, pair.k, count=1)[0]
            step = numtheory.congruence_progression(profile, pair.m1, pair.k)[1]
            if (pair.m2 - regenerated.m2) % step != 0 or pair.m2 < 1:
                raise VerificationFailedError("pair is not on the solution progression")
            big_v = profile.v ** (pair.m2 * profile.phi_u)
            big_u = profile.u ** (pair.m1 * profile.phi_v)
            if pair.k * big_v - pair.j * big_u != 1:
                raise VerificationFailedError("Bezout identity fails")
        print("ok")
        return 0
    parsed = loads(text)
    if kind == "selection-certificate":
        selection.verify_certificate(parsed)
    elif kind == "selection-family":
        for alpha, cert in parsed.entries:
            selection.verify_certificate(cert)
            if cert.epsilon > Fraction(1, cert.v ** (100 * alpha)):
                raise VerificationFailedError(
                    f"entry alpha={alpha} exceeds the v^(-100 alpha) budget"
                )
        for i, (_, cert_a) in enumerate(parsed.entries):
            spans_a = [t.interval.as_plain() for t in cert_a.targets]
            spans_a.append(cert_a.interval.as_plain())
            for _, cert_b in parsed.entries[i + 1 :]:
                spans_b = [t.interval.as_plain() for t in cert_b.targets]
                spans_b.append(cert_b.interval.as_plain())
                if any(a.overlaps(b) for a in spans_a for b in spans_b):
                    raise VerificationFailedError("family entries overlap")
    elif kind == "x-certificate":
        try:
            torus.verify_x_certificate(parsed)
        except ValueError as exc:
            raise VerificationFailedError(str(exc)) from exc
    elif kind == "measure-tree":
        measures.verify_tree(parsed)
    elif kind == "order-profile":
        fresh = numtheory.order_profile(parsed.u, parsed.v, parsed.probe_depth)
        if fresh != parsed:
            raise VerificationFailedError("order profile does not re-derive")
    else:
        raise ValidationError(f"cannot verify kind {kind!r}")
    if dumps(parsed) != text:
        raise VerificationFailedError("file is not in canonical serialized form")
    print("ok")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adicdoubling",
        description="grid-doubling measures with machine-checkable certificates",
    )
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--out-dir", default=".", help="directory for emitted files")
    parser.add_argument("--prefix", default="run", help="basename for emitted files")
    parser.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    sub = parser.add_subparsers(dest="command", required=True)

    nt = sub.add_parser("nt", help="number-theory operations")
    nt_sub = nt.add_subparsers(dest="nt_op", required=True)
    p = nt_sub.add_parser("order-profile")
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--probe-depth", type=int, default=12)
    p = nt_sub.add_parser("solve-pairs")
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--m1", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p = nt_sub.add_parser("far")
    p.add_argument("--delta", type=_fraction, required=True)
    p.add_argument("--base", type=int, required=True)
    p.add_argument("--max-level", type=int, default=12)
    p = nt_sub.add_parser("three-base")
    for name in ("p1", "m1", "k1", "p2", "m2", "k2", "q"):
        p.add_argument(f"--{name}", type=int, required=True)
    p = nt_sub.add_parser("totient")
    p.add_argument("--n", type=int, required=True)
    p = nt_sub.add_parser("order")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--modulus", type=int, required=True)

    sel = sub.add_parser("select", help="interval selection certificates")
    sel.add_argument("--u", type=int)
    sel.add_argument("--v", type=int)
    sel.add_argument("--multipliers", type=_int_list, default=None)
    sel.add_argument("--alpha-list", type=_int_list, default=None)
    sel.add_argument("--epsilon", type=_fraction, default=None)
    sel.add_argument("--domain", type=_fraction, nargs=2, default=[Fraction(0), Fraction(1)])
    sel.add_argument(
        "--two-base",
        type=int,
        nargs=4,
        metavar=("P", "Q", "M", "N"),
        default=None,
        help="select against the composite p^m q^n grid instead",
    )

    fx = sub.add_parser("find-x", help="simultaneous power approximation search")
    fx.add_argument("--bases", type=_int_list, default=None)
    fx.add_argument("--epsilon", type=_fraction, default=None)
    fx.add_argument("--x-min", type=int, default=None)
    fx.add_argument("--x-max", type=int, default=None)

    bld = sub.add_parser("build", help="construct a measure tree")
    bld.add_argument("--bases", type=_int_list, default=None)
    bld.add_argument("--alphas", type=_int_list, default=None)
    bld.add_argument("--params", type=_params, default=None)
    bld.add_argument("--compact", action="store_true")
    bld.add_argument("--x-max", type=int, default=None)

    scn = sub.add_parser("scan", help="doubling-ratio scan of a tree file")
    scn.add_argument("--tree", required=True)
    scn.add_argument("--check-bases", type=_int_list, default=None)

    dg = sub.add_parser("diag", help="weight-class diagnostics")
    dg.add_argument("--tree")
    dg.add_argument("--functional", choices=["rh", "ap", "bmo", "vmo-step"], required=True)
    dg.add_argument("--family", default="windows", help="windows or adic:N")
    dg.add_argument("--r", type=_fraction, default=Fraction(2))
    dg.add_argument("--vmo-scales", type=int, default=10)

    ver = sub.add_parser("verify", help="re-check a certificate or tree file")
    ver.add_argument("file")
    return parser


_CONFIG_FIELDS = {
    "bases": _int_list,
    "alphas": _int_list,
    "alpha_list": _int_list,
    "multipliers": _int_list,
    "epsilon": _fraction,
    "x_max": int,
    "x_min": int,
    "u": int,
    "v": int,
    "check_bases": _int_list,
}


def _apply_config(args, config: dict[str, str]) -> None:
    """Config values fill in any option not given on the command line
    (options start at None and are resolved to their working defaults
    inside the handlers)."""
    if "out_dir" in config and args.out_dir == ".":
        args.out_dir = config["out_dir"]
    if "prefix" in config and args.prefix == "run":
        args.prefix = config["prefix"]
    for key, value in config.items():
        name = key.replace("-", "_")
        converter = _CONFIG_FIELDS.get(name)
        if converter is None or not hasattr(args, name):
            continue
        if getattr(args, name) is None:
            try:
                setattr(args, name, converter(value))
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ValidationError(f"bad config value for {key}: {exc}") from exc
    if {"q", "a", "b"} <= config.keys() and getattr(args, "params", ...) is None:
        args.params = _params(",".join((config["q"], config["a"], config["b"])))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "nt": _cmd_nt,
        "select": _cmd_select,
        "find-x": _cmd_find_x,
        "build": _cmd_build,
        "scan": _cmd_scan,
        "diag": _cmd_diag,
        "verify": _cmd_verify,
    }
    try:
        if args.config:
            _apply_config(args, load_config(args.config))
        return handlers[args.command](args)
    except AdicDoublingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
