"""Command-line entry point.

Every command prints JSON (rationals as "p/q" strings) and is a pure
function of its flags, input files and seed.  Exit codes: 0 success,
1 usage or parse error, 2 an exact search hit its cap, 3 a checked
assertion failed.
"""
from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from fractions import Fraction

from . import dynamics as dyn
from . import enumeration, equilibria, generators, weights
from .model import (CompressedPacking, Instance, Packing, as_rational, compressed_from_dict, fmt_decimal,
                    fmt_rational, instance_from_dict, packing_from_dict, packing_to_dict, validate_packing)
from .packers import (OptIncomplete, SearchLimitExceeded, TieBreak, first_fit, gsc, next_fit, nfd, nfi,
                      opt_exact, size_lower_bound, steps)

EXIT_OK, EXIT_USAGE, EXIT_UNKNOWN, EXIT_MISMATCH = 0, 1, 2, 3

_RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


class CapError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- input helpers ---------------------------------------------------------

def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _load_instance(path: str) -> tuple[Instance, dict]:
    """An instance file, or a generator bundle (its instance is used)."""
    data = _read_json(path)
    if isinstance(data, dict) and "instance" in data:
        return instance_from_dict(data["instance"]), data
    return instance_from_dict(data), {}


def _load_packing(path: str):
    data = _read_json(path)
    if isinstance(data, dict) and "reference_packing" in data:
        data = data["reference_packing"]
    if isinstance(data, dict) and "bin_types" in data:
        return compressed_from_dict(data)
    return packing_from_dict(data)


def _parse_params(text: str | None) -> dict:
    out: dict = {}
    if not text:
        return out
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ValueError(f"parameter {part!r} is not of the form key=value")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _parse_order(text: str, instance: Instance, bundle: dict) -> list[int]:
    if text == "ne-reference":
        if "reference_packing" not in bundle:
            raise ValueError("--order ne-reference needs a generator bundle as --instance")
        ref = compressed_from_dict(bundle["reference_packing"]).expand(instance)
        return equilibria.ne_first_fit_order(ref, instance)
    order = [int(x) for x in text.split(",") if x.strip()]
    if sorted(order) != list(range(instance.n)):
        raise ValueError("--order must be a permutation of 0..n-1")
    return order


def _limit(v: str) -> int | None:
    return None if v in ("none", "None", "0") else int(v)


# -- output ---------------------------------------------------------------

def _annotate(obj):
    """Add a 12-digit decimal twin next to every rational string."""
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            out[k] = _annotate(v)
            if isinstance(v, str) and _RATIONAL.match(v) and "/" in v:
                out[f"{k}_decimal"] = fmt_decimal(Fraction(v))
            elif isinstance(v, list) and v and all(isinstance(x, str) and _RATIONAL.match(x) for x in v):
                out[f"{k}_decimal"] = [fmt_decimal(Fraction(x)) for x in v]
        return out
    if isinstance(obj, list):
        return [_annotate(x) for x in obj]
    return obj


def _emit(args, payload, out_path: str | None = None):
    if getattr(args, "decimal", False):
        payload = _annotate(payload)
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------

_ALGS = {
    "nf": lambda inst, a, order: next_fit(inst, order),
    "ff": lambda inst, a, order: first_fit(inst, order),
    "nfd": lambda inst, a, order: nfd(inst),
    "nfi": lambda inst, a, order: nfi(inst),
    "gsc": lambda inst, a, order: gsc(inst, tie=a.tie, order=order, limit=_limit(a.search_limit)),
    "steps": lambda inst, a, order: steps(inst),
    "opt": lambda inst, a, order: opt_exact(inst, cap=_limit(a.opt_cap)),
}


def cmd_pack(args) -> int:
    inst, bundle = _load_instance(args.instance)
    order = _parse_order(args.order, inst, bundle) if args.order else None
    if order is not None and args.alg not in ("nf", "ff", "gsc"):
        raise ValueError(f"--order is not used by {args.alg}")
    if args.alg == "gsc" and order is not None and TieBreak.parse(args.tie) is not TieBreak.INPUT_ORDER:
        raise ValueError("--order with gsc needs --tie input-order")
    result = _ALGS[args.alg](inst, args, order)
    if isinstance(result, list):
        payload = {"algorithm": args.alg, "tie": TieBreak.parse(args.tie).value,
                   "outputs": [{"bins": packing_to_dict(p)["bins"], "num_bins": p.num_bins} for p in result],
                   "bin_counts": sorted({p.num_bins for p in result})}
    else:
        payload = {"algorithm": args.alg, "bins": packing_to_dict(result)["bins"], "num_bins": result.num_bins}
        if args.alg == "opt":
            payload["lower_bound"] = size_lower_bound(inst)
    _emit(args, payload, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    inst, _ = _load_instance(args.instance)
    packing = _load_packing(args.packing)
    kinds = ("ne", "sne", "wpo", "spo") if args.kind == "all" else (args.kind,)
    if isinstance(packing, CompressedPacking):
        rep = packing.validate(inst)
        if not rep:
            raise ValueError(rep.reason)
        if kinds == ("ne",):
            ok = equilibria.is_nash(packing, inst)
            _emit(args, {"is_ne": "true" if ok else "false", "num_bins": packing.num_bins, "compressed": True})
            return EXIT_OK
        packing = packing.expand(inst)
    rep = validate_packing(packing, inst)
    if not rep:
        raise ValueError(rep.reason)
    report = equilibria.classify(packing, inst, search_limit=_limit(args.search_limit),
                                 pareto_cap=_limit(args.pareto_cap), kinds=kinds)
    full = report.to_dict()
    payload = {k: full[k] for k in ("is_ne", "is_sne", "is_wpo", "is_spo") if k[3:] in kinds}
    payload["witness"] = full["witness"]
    payload["num_bins"] = packing.num_bins
    _emit(args, payload)
    return EXIT_UNKNOWN if any(payload[f"is_{k}"] == "unknown" for k in kinds) else EXIT_OK


def cmd_dynamics(args) -> int:
    if args.staircase is not None:
        trace = dyn.staircase_schedule(args.staircase)
        expected = dyn.max_steps_formula(args.staircase)
        payload = {"n": args.staircase, "steps": trace.steps, "prefix": trace.prefix, "formula": expected,
                   "final_bins": trace.final.num_bins}
        if args.trace:
            with open(args.trace, "w") as fh:
                fh.write(trace.to_jsonl())
        _emit(args, payload)
        return EXIT_OK if trace.steps == expected else EXIT_MISMATCH
    if not args.instance:
        raise ValueError("dynamics needs --instance or --staircase N")
    inst, _ = _load_instance(args.instance)
    if args.start == "singletons":
        start = Packing([[i] for i in range(inst.n)])
    elif args.start == "ff":
        start = first_fit(inst)
    else:
        start = _load_packing(args.start)
        if isinstance(start, CompressedPacking):
            start = start.expand(inst)
    rep = validate_packing(start, inst)
    if not rep:
        raise ValueError(rep.reason)
    if args.policy == "random":
        policy = dyn.MovePolicy.random(args.seed)
    elif args.policy == "max-gain":
        policy = dyn.MovePolicy.max_gain()
    else:
        policy = dyn.MovePolicy.first_found()
    trace = dyn.run_dynamics(inst, start, policy, step_cap=args.step_cap)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(trace.to_jsonl())
    payload = {"policy": policy.kind, "seed": policy.seed, "steps": trace.steps,
               "start_bins": start.num_bins, "final_bins": trace.final.num_bins,
               "final": packing_to_dict(trace.final)["bins"],
               "phi_start": fmt_rational(dyn.potential_sq(start, inst)),
               "phi_final": fmt_rational(dyn.potential_sq(trace.final, inst)),
               "final_is_ne": equilibria.is_nash(trace.final, inst)}
    _emit(args, payload)
    return EXIT_OK


def cmd_generate(args) -> int:
    params = _parse_params(args.params)
    out = generators.generate(args.family, **params)
    _emit(args, out.to_dict(), args.out)
    return EXIT_OK


def cmd_census(args) -> int:
    inst, _ = _load_instance(args.instance)
    c = enumeration.census(inst, cap=_limit(args.cap))
    pr = enumeration.prices(inst, census_result=c)
    _emit(args, {"census": c.to_dict(), "prices": pr.to_dict()})
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "bins", "ne", "sne", "wpo", "spo", "packing"])
            for k, e in enumerate(c.entries):
                w.writerow([k, e.bins, int(e.ne), int(e.sne), int(e.wpo), int(e.spo),
                            json.dumps([list(b) for b in e.packing.bins])])
    return EXIT_OK


def cmd_weights_check(args) -> int:
    kw = {}
    for k, v in _parse_params(args.fn_params).items():
        kw[k] = as_rational(v) if k == "eps" else v
    fn = weights.make(args.fn, **kw)
    max_item = as_rational(args.max_item) if args.max_item else None
    rows = []
    modes = ("random", "grid") if args.mode == "both" else (args.mode,)
    for bound in args.bound:
        for mode in modes:
            if mode == "random":
                sampler = weights.RandomSampler(args.seed, args.trials, max_item)
            else:
                sampler = weights.GridSampler(max_item=max_item)
            res = weights.check_bin_bound(fn, as_rational(bound), sampler)
            rows.append(dict(function=fn.label(), **res.to_dict()))
    _emit(args, {"checks": rows})
    for r in rows:
        sys.stderr.write(f"{'PASS' if r['passed'] else 'FAIL'}  {r['function']}  bound {r['bound']}  "
                         f"{r['mode']}  worst {fmt_decimal(Fraction(r['worst_weight']))}\n")
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_MISMATCH


def cmd_converge_bound(args) -> int:
    n = args.n
    value = dyn.max_steps_formula(n)
    payload = {"n": n, "formula": value}
    code = EXIT_OK
    if args.oracle:
        if n > 8:
            raise CapError(f"exhaustive oracle refused: n={n} exceeds the cap of 8")
        oracle = dyn.longest_path_exhaustive(n)
        payload["oracle"] = oracle
        payload["match"] = oracle == value
        if oracle != value:
            code = EXIT_MISMATCH
    _emit(args, payload)
    return code


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="binpack-games", description="Bin packing games: packers, equilibria, dynamics.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--decimal", action="store_true", help="annotate rationals with 12-digit decimals")
    common.add_argument("--jobs", type=int, default=1, help="accepted for compatibility; runs single-process")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("pack", parents=[common], help="run a packing algorithm")
    s.add_argument("--alg", required=True, choices=sorted(_ALGS))
    s.add_argument("--instance", required=True)
    s.add_argument("--tie", default=TieBreak.LEX_MIN.value, help="gsc tie-break policy")
    s.add_argument("--order", help="comma-separated item order, or ne-reference for a bundle")
    s.add_argument("--search-limit", default="30")
    s.add_argument("--opt-cap", default="60")
    s.add_argument("--out")
    s.set_defaults(func=cmd_pack)

    s = sub.add_parser("check", parents=[common], help="classify a packing")
    s.add_argument("--instance", required=True)
    s.add_argument("--packing", required=True)
    s.add_argument("--kind", default="all", choices=["ne", "sne", "wpo", "spo", "all"])
    s.add_argument("--search-limit", default="30")
    s.add_argument("--pareto-cap", default="9")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("dynamics", parents=[common], help="run best-response dynamics")
    s.add_argument("--instance")
    s.add_argument("--start", default="singletons", help="singletons, ff, or a packing file")
    s.add_argument("--policy", default="first-found", choices=["first-found", "max-gain", "random"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--step-cap", type=int, default=10**6)
    s.add_argument("--staircase", type=int, help="replay the longest unit-weight schedule for n items")
    s.add_argument("--trace", help="write the move trace as JSON lines")
    s.set_defaults(func=cmd_dynamics)

    s = sub.add_parser("generate", parents=[common], help="build a lower-bound instance family")
    s.add_argument("--family", required=True, choices=sorted(generators.FAMILIES))
    s.add_argument("--params", help="k=v,... e.g. j=4,N=72")
    s.add_argument("--out")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("census", parents=[common], help="classify every packing of a small instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--cap", default=str(enumeration.DEFAULT_ENUM_CAP))
    s.add_argument("--csv", help="one row per packing")
    s.set_defaults(func=cmd_census)

    s = sub.add_parser("weights-check", parents=[common], help="test a per-bin weight bound")
    s.add_argument("--fn", required=True, choices=sorted(weights.FAMILIES))
    s.add_argument("--fn-params", help="eps=1/330, set=2, tag=step3 ...")
    s.add_argument("--bound", required=True, action="append")
    s.add_argument("--mode", default="both", choices=["random", "grid", "both"])
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--max-item")
    s.set_defaults(func=cmd_weights_check)

    s = sub.add_parser("converge-bound", parents=[common], help="longest improving path for n unit items")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--oracle", action="store_true")
    s.set_defaults(func=cmd_converge_bound)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CapError, SearchLimitExceeded, OptIncomplete, enumeration.EnumerationCapExceeded,
            dyn.StepCapExceeded) as exc:
        print(f"unknown: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
