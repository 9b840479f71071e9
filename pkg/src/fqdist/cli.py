"""Command-line front end.

Exit codes: 0 when every asserted check passes, 2 when one fails, 1 for
operational errors (message on stderr), 64 for usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, analysis, fqset, harness, kernels, suite
from .errors import FqdistError
from .ffield import field_of_order, make_field
from .spectra import METRICS, distance_spectrum, dot_spectrum, support
from .vecspace import PinSpec, PointSet, generate, pin_slice, projection_size, valid_pins

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2
EXIT_USAGE = 64

VERIFY_CHECKS = ("distpinned", "dot", "cs", "identity", "bound", "sumproduct", "shparlinski", "ir", "corollary")


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _pin(text: str) -> PinSpec:
    try:
        return PinSpec.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"pin must look like j,z (got {text!r})")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _factors(text: str) -> list[list[int]]:
    return [_ints(part) for part in text.split(";")]


def _field_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("field")
    g.add_argument("--q", type=int, help="field order (prime power)")
    g.add_argument("--p", type=int, help="characteristic")
    g.add_argument("--k", type=int, default=1, help="extension degree (with --p)")


def _set_args(p: argparse.ArgumentParser, with_input: bool = True) -> None:
    _field_args(p)
    g = p.add_argument_group("point set")
    if with_input:
        g.add_argument("--in", dest="input", help=".fqset or .jsonl file")
        g.add_argument("--gen", help="generate instead of reading: random, product, random_product, "
                                     "line, sphere, full, grid")
    else:
        g.add_argument("--kind", dest="gen", required=True, help="generator family")
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--n", type=int, help="size for --gen random")
    g.add_argument("--factors", type=_factors, help="product factors, e.g. '0,1,2;0,3'")
    g.add_argument("--sizes", type=_ints, help="factor sizes for random_product")
    g.add_argument("--t", type=int, help="sphere radius value")
    g.add_argument("--m", type=int, help="grid side")
    g.add_argument("--seed", type=int, default=0)


def _field(args, parser):
    if args.q is not None:
        return field_of_order(args.q)
    if args.p is not None:
        return make_field(args.p, args.k)
    parser.error("give --q or --p/--k")


def _load(args, parser) -> PointSet:
    if getattr(args, "input", None):
        if args.gen:
            parser.error("--in and --gen are exclusive")
        return fqset.load_pointset(args.input)
    if not args.gen:
        parser.error("give --in FILE or --gen KIND")
    field = _field(args, parser)
    params = {"n": args.n, "factors": args.factors, "sizes": args.sizes, "t": args.t, "m": args.m}
    try:
        return generate(args.gen, field, args.d, args.seed, **{k: v for k, v in params.items() if v is not None})
    except KeyError as exc:
        parser.error(f"--gen {args.gen} needs --{exc.args[0]}")
    except ValueError as exc:
        parser.error(str(exc))


def _emit(obj, as_json: bool) -> None:
    if as_json:
        print(obj.to_json() if hasattr(obj, "to_json") else json.dumps(obj))
    else:
        print(obj.summary() if hasattr(obj, "summary") else obj)


# -- subcommands ----------------------------------------------------------------

def cmd_field_info(args, parser) -> int:
    f = _field(args, parser)
    info = f.describe()
    info["primitive_element"] = f.primitive_element
    info["sqrt_minus_one"] = f.sqrt_minus_one()
    if args.json:
        print(json.dumps(info))
    else:
        print(f"q={f.q} p={f.p} k={f.k}")
        print(f"modulus={info['modulus_str']}")
        print(f"primitive_element={info['primitive_element']}")
        print(f"sqrt_minus_one={info['sqrt_minus_one']}")
    return EXIT_OK


def cmd_gen(args, parser) -> int:
    E = _load(args, parser)
    if args.out:
        fqset.save_pointset(E, args.out)
        print(f"wrote {E.size} points to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(fqset.dumps(E))
    return EXIT_OK


def cmd_spectrum(args, parser) -> int:
    E = _load(args, parser)
    F = fqset.load_pointset(args.other) if args.other else E
    if args.pin is not None:
        F = pin_slice(E, args.pin)
    if args.metric == "dot":
        if args.engine != "direct":
            parser.error("the dot form only has the direct engine")
        s = dot_spectrum(F, E)
    else:
        s = distance_spectrum(F, E, args.engine, fft=args.fft)
    text = s.to_csv(args.seed if args.gen else None)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_delta(args, parser) -> int:
    E = _load(args, parser)
    F = pin_slice(E, args.pin) if args.pin is not None else E
    s = distance_spectrum(F, E, args.engine) if args.metric == "distance" else dot_spectrum(F, E)
    values = sorted(support(s, args.exclude_zero))
    if args.json:
        print(json.dumps({"support_size": len(values), "support": values}))
    else:
        print(f"support_size={len(values)} support=[{', '.join(map(str, values))}]")
    return EXIT_OK


def cmd_pins(args, parser) -> int:
    E = _load(args, parser)
    rows = []
    for j in range(1, E.d + 1):
        rows.append({"j": j, "slice_size": projection_size(E, j), "z": sorted(valid_pins(E, j))})
    best = analysis.best_pin(E) if E.size else None
    if args.json:
        print(json.dumps({"pins": rows, "best": None if best is None else [best.j, best.z]}))
    else:
        for r in rows:
            print(f"j={r['j']} slice_size={r['slice_size']} z={r['z']}")
        if best is not None:
            print(f"best={best.j},{best.z}")
    return EXIT_OK


def _need_pin(args, parser) -> PinSpec:
    if args.pin is None:
        parser.error(f"--check {args.check} needs --pin j,z")
    return args.pin


def cmd_verify(args, parser) -> int:
    if args.suite:
        return _run_suite(args)
    if not args.check:
        parser.error("give --check NAME or --suite paper")
    E = _load(args, parser)
    c = args.check
    if c == "distpinned":
        rep = analysis.theorem_check_distpinned(E, _need_pin(args, parser), with_identity=args.identity)
    elif c == "dot":
        rep = analysis.theorem_check_dot(E, _need_pin(args, parser), with_identity=args.identity)
    elif c == "cs":
        F = pin_slice(E, args.pin) if args.pin is not None else E
        rep = analysis.cs_chain(F, E, args.metric)
    elif c == "identity":
        rep = analysis.second_moment_identity(E, _need_pin(args, parser), args.metric, strict=False)
    elif c == "bound":
        rep = analysis.second_moment_bound(E, _need_pin(args, parser), args.metric)
    elif c == "sumproduct":
        rep = analysis.check_sumproduct(E)
    elif c == "shparlinski":
        if args.z is None:
            parser.error("--check shparlinski needs --z")
        rep = analysis.check_shparlinski(E, args.z)
    elif c == "ir":
        rep = analysis.check_ir_threshold(E)
    else:
        _, rep = analysis.best_slice(E)
    _emit(rep, args.json)
    return EXIT_OK if rep.passed else EXIT_FAILED


def _run_suite(args) -> int:
    log = None if args.json else print
    results = suite.run_suite(args.seed, log=log)
    if args.out:
        suite.write_outputs(results, args.out, args.seed)
    ok = all(r.passed for r in results)
    if args.json:
        print(json.dumps([{"criterion": r.number, "name": r.name, "passed": r.passed,
                           "instances": r.instances, "detail": r.detail} for r in results]))
    else:
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed (backend={kernels.BACKEND})")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_sweep(args, parser) -> int:
    config = harness.load_config(args.config)
    if args.jsonl:
        config.jsonl = True
    out = args.out or config.output
    summary = harness.run_sweep(config, out)
    msg = f"rows={summary.rows} failed={summary.failed} resumed_cells={summary.skipped_cells}"
    print(json.dumps(vars(summary)) if args.json else msg)
    return EXIT_OK if summary.ok else EXIT_FAILED


def cmd_search(args, parser) -> int:
    field = _field(args, parser)
    res = harness.search_extremal(field, args.d, target_size=args.target_size, sizes=args.sizes,
                                  steps=args.steps, seed=args.seed, restarts=args.restarts)
    if args.out:
        fqset.save_pointset(res.pointset, args.out)
    if args.trail:
        with open(args.trail, "w") as fh:
            fh.write("restart,step,delta_size,accepted\n")
            fh.writelines(f"{r},{s},{v},{a}\n" for r, s, v, a in res.trail)
    info = {"delta_size": res.delta_size, "initial_delta": res.initial_delta,
            "baseline_delta": res.baseline_delta, "factors": res.factors}
    if args.json:
        print(json.dumps(info))
    else:
        print(" ".join(f"{k}={v}" for k, v in info.items() if k != "factors"))
        print("factors=" + ";".join(",".join(map(str, f)) for f in res.factors))
    return EXIT_OK


def cmd_fmt_convert(args, parser) -> int:
    E = fqset.load_pointset(args.input)
    fqset.save_pointset(E, args.out)
    print(f"converted {E.size} points: {args.input} -> {args.out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> Parser:
    parser = Parser(prog="fqdist", description="Distance and dot-product sets over finite fields.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=Parser, metavar="COMMAND")
    sub.required = True

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=fn)
        return p

    p = add("field-info", cmd_field_info, "describe F_q")
    _field_args(p)

    p = add("gen", cmd_gen, "generate a point set")
    _set_args(p, with_input=False)
    p.add_argument("--out", help="write here (.fqset or .jsonl) instead of stdout")

    p = add("spectrum", cmd_spectrum, "incidence spectrum as CSV")
    _set_args(p)
    p.add_argument("--other", help="second set F (default: E itself)")
    p.add_argument("--pin", type=_pin, help="use the pinned slice j,z as F")
    p.add_argument("--metric", choices=METRICS, default="distance")
    p.add_argument("--engine", choices=("direct", "conv"), default="direct")
    p.add_argument("--fft", action="store_true", help="floating FFT in the conv engine")
    p.add_argument("--out")

    p = add("delta", cmd_delta, "distance set (or pinned distance set) size")
    _set_args(p)
    p.add_argument("--pin", type=_pin)
    p.add_argument("--metric", choices=METRICS, default="distance")
    p.add_argument("--engine", choices=("direct", "conv"), default="direct")
    p.add_argument("--exclude-zero", action="store_true")

    p = add("pins", cmd_pins, "valid pins and slice sizes")
    _set_args(p)

    p = add("verify", cmd_verify, "run a check, or the full battery with --suite paper")
    _set_args(p)
    p.add_argument("--check", choices=VERIFY_CHECKS)
    p.add_argument("--suite", choices=("paper",))
    p.add_argument("--pin", type=_pin)
    p.add_argument("--z", type=int, help="scalar for --check shparlinski")
    p.add_argument("--metric", choices=METRICS, default="distance")
    p.add_argument("--identity", action="store_true", help="also evaluate the character-sum identity")
    p.add_argument("--out", help="directory for suite CSVs")
    p.set_defaults(seed=7)

    p = add("sweep", cmd_sweep, "run a parameter sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--jsonl", action="store_true")

    p = add("search", cmd_search, "hill-climb for product sets with few distances")
    _field_args(p)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--target-size", type=int)
    p.add_argument("--sizes", type=_ints)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--trail", help="write the accept/reject trail as CSV")

    p = add("fmt-convert", cmd_fmt_convert, "convert between .fqset and .jsonl")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        return args.func(args, sub)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (FqdistError, ValueError, OSError) as exc:
        print(f"fqdist: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run() -> None:
    sys.exit(main())
