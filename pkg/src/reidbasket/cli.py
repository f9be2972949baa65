"""Command-line surface: eval, pack, b5, classify, xi, diff.

Exit codes: 0 on success, 1 on validation failure (bad basket text,
invalid weighted basket, diff mismatch), 2 on usage errors.  Every run
emits a manifest: JSON outputs embed it; human output prints a compact
footer.  Rationals cross the boundary as exact "p/q" strings.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

from . import __version__
from .b5 import enumerate_b5
from .basket import Basket, BasketError, WeightedBasket, cartier_index, k3, plurigenus, validate
from .bounds import (
    RefinementState,
    birational_level,
    initial_xi,
    level_assumptions,
    refine_xi,
)
from .classify import ScenarioConfig, default_pg3_config, run_pg1, run_pg3
from .jsonio import (
    classification_to_dict,
    dump_file,
    dumps,
    frac_to_str,
    load_file,
    raw_candidate_to_dict,
    refine_step_to_dict,
    str_to_frac,
    weighted_to_dict,
)
from .packing import DescendantFilter, descendants, packing_dag, to_dot


class CliError(Exception):
    """Validation failure surfaced to the user; exits with status 1."""


def _parse_range(text: str, name: str) -> tuple[int, int]:
    parts = text.split("..")
    try:
        if len(parts) == 1:
            value = int(parts[0])
            return value, value
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
    except ValueError:
        pass
    raise CliError(f"{name}: expected an integer or A..B range, got {text!r}")


def _parse_fraction(text: str, name: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"{name}: expected a rational like 4/3, got {text!r}") from None


def _manifest(command: str, parameters: dict, t0: float) -> dict:
    return {
        "command": command,
        "engine_version": __version__,
        "parameters": parameters,
        "timing_seconds": round(time.perf_counter() - t0, 3),
    }


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _cmd_eval(args) -> int:
    t0 = time.perf_counter()
    basket = Basket.parse(args.basket)
    wb = WeightedBasket(basket, args.p2, args.chi)
    report = validate(wb)
    if not report:
        for problem in report.problems:
            print(f"invalid basket: {problem}", file=sys.stderr)
        return 1
    lo, hi = _parse_range(args.m, "--m")
    if lo < 2:
        raise CliError("--m: plurigenera start at m = 2")
    rows = []
    for m in range(lo, hi + 1):
        value = plurigenus(wb, m)
        rows.append((m, value, value.denominator == 1))
    volume, r_x = k3(wb), cartier_index(basket)
    manifest = _manifest(
        "eval",
        {"basket": str(basket), "p2": args.p2, "chi": args.chi, "m": f"{lo}..{hi}"},
        t0,
    )

    if args.out == "json":
        _emit(
            dumps(
                {
                    "manifest": manifest,
                    "basket": str(basket),
                    "p2": args.p2,
                    "chi": args.chi,
                    "k3": frac_to_str(volume),
                    "r_x": r_x,
                    "plurigenera": [
                        {"m": m, "value": frac_to_str(v), "integral": ok}
                        for m, v, ok in rows
                    ],
                }
            ),
            args.output,
        )
    elif args.out == "csv":
        lines = ["m,P_m,integral"]
        lines += [f"{m},{frac_to_str(v)},{str(ok).lower()}" for m, v, ok in rows]
        _emit("\n".join(lines), args.output)
    else:
        print(f"basket : {basket or '(empty)'}")
        print(f"P2     : {args.p2}")
        print(f"chi(O) : {args.chi}")
        print(f"K^3    : {frac_to_str(volume)}")
        print(f"r_X    : {r_x}")
        for m, value, ok in rows:
            flag = "" if ok else "   <- not an integer"
            print(f"P_{m:<3} = {frac_to_str(value)}{flag}")
        print(f"# manifest: {manifest['command']} v{__version__} "
              f"({manifest['timing_seconds']}s)")
    return 0


# ---------------------------------------------------------------------------
# pack
# ---------------------------------------------------------------------------

def _cmd_pack(args) -> int:
    t0 = time.perf_counter()
    basket = Basket.parse(args.basket)
    wb = WeightedBasket(basket, args.p2, args.chi)
    report = validate(wb)
    if not report:
        for problem in report.problems:
            print(f"invalid basket: {problem}", file=sys.stderr)
        return 1
    filt = DescendantFilter(
        k3_floor=_parse_fraction(args.min_k3, "--min-k3") if args.min_k3 else None,
        preserve_pm_upto=args.preserve_pm,
        rx_divisor=args.rx_divisor,
        integrality_upto=args.integral_upto,
    )
    found = descendants(wb, filt, max_depth=args.max_depth)
    manifest = _manifest(
        "pack",
        {
            "basket": str(basket),
            "p2": args.p2,
            "chi": args.chi,
            "min_k3": args.min_k3,
            "preserve_pm": args.preserve_pm,
            "rx_divisor": args.rx_divisor,
            "integral_upto": args.integral_upto,
            "max_depth": args.max_depth,
        },
        t0,
    )
    if args.report:
        from .report import save_packing_report

        paths = save_packing_report(wb, filt, args.report, max_depth=args.max_depth)
        print(f"# report written: {', '.join(paths)}", file=sys.stderr)

    if args.out == "json":
        _emit(
            dumps(
                {
                    "manifest": manifest,
                    "root": weighted_to_dict(wb),
                    "descendants": [weighted_to_dict(x) for x in found],
                }
            ),
            args.output,
        )
    elif args.out == "csv":
        lines = ["basket,p2,chi,k3,r_x"]
        lines += [
            f"\"{x.basket}\",{x.p2},{x.chi},{frac_to_str(k3(x))},{cartier_index(x.basket)}"
            for x in found
        ]
        _emit("\n".join(lines), args.output)
    elif args.out == "dot":
        _emit(to_dot(wb, filt.k3_floor, args.max_depth), args.output)
    else:
        print(f"root   : {basket or '(empty)'}  (P2={args.p2}, chi={args.chi}, "
              f"K^3={frac_to_str(k3(wb))})")
        print(f"kept   : {len(found)} basket(s)")
        for x in found:
            print(f"  {x.basket or '(empty)'}   K^3 = {frac_to_str(k3(x))}")
        print(f"# manifest: pack v{__version__} ({manifest['timing_seconds']}s)")
    return 0


# ---------------------------------------------------------------------------
# b5
# ---------------------------------------------------------------------------

def _cmd_b5(args) -> int:
    t0 = time.perf_counter()
    chi_range = _parse_range(args.chi, "--chi")
    p_ranges = [
        _parse_range(getattr(args, f"p{i}"), f"--p{i}") for i in range(2, 7)
    ]
    floor = _parse_fraction(args.min_k3, "--min-k3") if args.min_k3 else None
    results, report = enumerate_b5(
        chi_range,
        p_ranges,
        tail_r_max=args.tail_r_max,
        k3_floor=floor,
        sigma5_max=args.sigma5_max,
    )
    manifest = _manifest(
        "b5",
        {
            "chi": args.chi,
            "p": [getattr(args, f"p{i}") for i in range(2, 7)],
            "tail_r_max": args.tail_r_max,
            "sigma5_max": args.sigma5_max,
            "min_k3": args.min_k3,
            "counts": {
                "boxes_scanned": report.boxes_scanned,
                "candidates": report.candidates,
                "accepted": report.accepted,
            },
            "tail_cutoff": {
                "accepted_at_cutoff": report.tail_cutoff_accepted,
                "truncates": report.tail_cutoff_truncates,
            },
        },
        t0,
    )
    if args.out == "json":
        _emit(
            dumps(
                {
                    "manifest": manifest,
                    "results": [raw_candidate_to_dict(d, r) for d, r in results],
                }
            ),
            args.output,
        )
    elif args.out == "csv":
        lines = ["chi,p2,p3,p4,p5,p6,sigma5,tail,basket,k3"]
        for d, r in results:
            tail = ";".join(f"{m}x(1,{rr})" for rr, m in d.tail)
            lines.append(
                f"{d.chi},{d.p2},{d.p3},{d.p4},{d.p5},{d.p6},{d.sigma5},"
                f"\"{tail}\",\"{r.basket}\",{frac_to_str(r.k3)}"
            )
        _emit("\n".join(lines), args.output)
    else:
        print(f"accepted {report.accepted} of {report.candidates} evaluated "
              f"candidates ({report.boxes_scanned} boxes scanned)")
        for d, r in results:
            print(f"  {d}  ->  {r.basket}   K^3 = {frac_to_str(r.k3)}")
        if report.tail_cutoff_accepted:
            print(f"# note: {report.tail_cutoff_accepted} candidate(s) sit at "
                  f"tail_r_max = {args.tail_r_max}; "
                  f"truncates = {report.tail_cutoff_truncates}")
        print(f"# manifest: b5 v{__version__} ({manifest['timing_seconds']}s)")
    return 0


# ---------------------------------------------------------------------------
# classify
# ---------------------------------------------------------------------------

def _cmd_classify(args) -> int:
    if args.scenario == "pg1":
        result = run_pg1(args.subcase)
    else:
        cfg = None
        if args.config:
            cfg = ScenarioConfig.from_json_dict(load_file(args.config))
        result = run_pg3(cfg)

    if args.report:
        from .report import save_classification_report

        paths = save_classification_report(result, args.report)
        print(f"# report written: {', '.join(paths)}", file=sys.stderr)

    if args.out == "json":
        _emit(dumps(classification_to_dict(result)), args.output)
    elif args.out == "csv":
        lines = ["basket,p2,chi,k3,r_x"]
        lines += [
            f"\"{x.basket}\",{x.p2},{x.chi},{frac_to_str(k3(x))},{cartier_index(x.basket)}"
            for x in result.refined
        ]
        _emit("\n".join(lines), args.output)
    else:
        counts = result.manifest["counts"]
        print(f"scenario : {result.manifest['command']}")
        print(f"raw      : {counts['raw']}")
        print(f"refined  : {counts['refined']}")
        for wb in result.refined:
            print(f"  {wb.basket or '(empty)'}   P2={wb.p2} chi={wb.chi} "
                  f"K^3={frac_to_str(k3(wb))}")
        print(f"# manifest: {result.manifest['command']} v{__version__} "
              f"({result.manifest['timing_seconds']}s)")
    failures = result.manifest.get("revalidation_failures")
    if failures is None:
        failures = [
            f for sub in result.manifest.get("subcases", ())
            for f in sub.get("revalidation_failures", ())
        ]
    if failures:
        for f in failures:
            print(f"revalidation failure: {f}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# xi
# ---------------------------------------------------------------------------

def _cmd_xi(args) -> int:
    t0 = time.perf_counter()
    mu = _parse_fraction(args.mu, "--mu")
    beta = _parse_fraction(args.beta, "--beta")
    if args.xi:
        seed = _parse_fraction(args.xi, "--xi")
        seed_rule = "caller-supplied"
    else:
        seed = initial_xi(args.deg_kc, mu, beta)
        seed_rule = f"deg(K_C)/(1 + 1/mu + 1/beta) with deg(K_C) = {args.deg_kc}"
    state = RefinementState(
        m0=args.m0,
        mu=mu,
        beta=beta,
        xi=seed,
        deg_kc=args.deg_kc,
        rx=args.rx,
        zeta=_parse_fraction(args.zeta, "--zeta") if args.zeta else Fraction(1),
        m1=args.m1,
    )
    lo, hi = _parse_range(args.range, "--range")
    result = refine_xi(state, (lo, hi), max_rounds=args.rounds)
    level = birational_level(result.state)
    manifest = _manifest(
        "xi",
        {
            "m0": args.m0,
            "mu": args.mu,
            "beta": args.beta,
            "xi_seed": frac_to_str(seed),
            "deg_kc": args.deg_kc,
            "rx": args.rx,
            "range": f"{lo}..{hi}",
            "rounds": args.rounds,
        },
        t0,
    )
    if args.out == "json":
        _emit(
            dumps(
                {
                    "manifest": manifest,
                    "seed": frac_to_str(seed),
                    "seed_rule": seed_rule,
                    "steps": [refine_step_to_dict(s) for s in result.steps],
                    "xi": frac_to_str(result.state.xi),
                    "capped": result.capped,
                    "birational_level": level,
                    "assumptions": list(level_assumptions(result.state)),
                }
            ),
            args.output,
        )
    else:
        print(f"seed: xi >= {frac_to_str(seed)}   ({seed_rule})")
        for s in result.steps:
            where = f" at m = {s.m}" if s.m is not None else ""
            print(f"round {s.round}: {s.rule}{where}: "
                  f"xi {frac_to_str(s.old)} -> {frac_to_str(s.new)}")
        if result.capped:
            print(f"# round cap {args.rounds} reached before the fixpoint")
        for line in level_assumptions(result.state):
            print(f"assuming: {line}")
        print(f"xi >= {frac_to_str(result.state.xi)}; birational level {level}")
    return 0


# ---------------------------------------------------------------------------
# diff
# ---------------------------------------------------------------------------

def _refined_key_set(path: str) -> set[tuple[str, int, int]]:
    obj = load_file(path)
    refined = obj.get("refined")
    if refined is None:
        raise CliError(f"{path}: not a classification result (no 'refined' key)")
    out = set()
    for item in refined:
        wb = WeightedBasket(Basket.parse(item["basket"]), int(item["p2"]), int(item["chi"]))
        if "k3" in item and str_to_frac(item["k3"]) != k3(wb):
            raise CliError(
                f"{path}: stored K^3 {item['k3']} disagrees with recomputation "
                f"for {item['basket']}"
            )
        out.add((str(wb.basket), wb.p2, wb.chi))
    return out


def _cmd_diff(args) -> int:
    left = _refined_key_set(args.left)
    right = _refined_key_set(args.right)
    only_left = sorted(left - right)
    only_right = sorted(right - left)
    if not only_left and not only_right:
        print(f"refined sets identical ({len(left)} element(s))")
        return 0
    for basket, p2, chi in only_left:
        print(f"< {basket}  P2={p2} chi={chi}")
    for basket, p2, chi in only_right:
        print(f"> {basket}  P2={p2} chi={chi}")
    print(f"# {len(only_left)} only in {args.left}; {len(only_right)} only in {args.right}")
    return 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reidbasket",
        description="Exact Reid-basket arithmetic: plurigenera, packings, "
        "initial-basket synthesis, birationality bounds, classification runs.",
    )
    parser.add_argument("--version", action="version", version=f"reidbasket {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="plurigenus table, K^3 and r_X of a basket")
    p_eval.add_argument("basket", help="basket text, e.g. '7x(1,2),2x(2,5),2x(1,3),(1,4)'")
    p_eval.add_argument("--p2", type=int, required=True)
    p_eval.add_argument("--chi", type=int, required=True)
    p_eval.add_argument("--m", default="2..12", help="plurigenus range A..B (default 2..12)")
    p_eval.add_argument("--out", choices=("human", "json", "csv"), default="human")
    p_eval.add_argument("--output", help="write to file instead of stdout")
    p_eval.set_defaults(func=_cmd_eval)

    p_pack = sub.add_parser("pack", help="filtered packing descendants of a basket")
    p_pack.add_argument("basket")
    p_pack.add_argument("--p2", type=int, required=True)
    p_pack.add_argument("--chi", type=int, required=True)
    p_pack.add_argument("--min-k3", help="volume floor P/Q; prunes the search")
    p_pack.add_argument("--preserve-pm", type=int, help="require chi_m unchanged for 3 <= m <= M")
    p_pack.add_argument("--rx-divisor", type=int, help="require D | r_X")
    p_pack.add_argument("--integral-upto", type=int, help="require chi_m integral for m <= N")
    p_pack.add_argument("--max-depth", type=int)
    p_pack.add_argument("--out", choices=("human", "json", "csv", "dot"), default="human")
    p_pack.add_argument("--output", help="write to file instead of stdout")
    p_pack.add_argument("--report", help="directory for CSV + figure report")
    p_pack.set_defaults(func=_cmd_pack)

    p_b5 = sub.add_parser("b5", help="enumerate initial baskets over a plurigenus box")
    p_b5.add_argument("--chi", required=True, help="value or range A..B")
    for i in range(2, 7):
        p_b5.add_argument(f"--p{i}", required=True, help="value or range A..B")
    p_b5.add_argument("--tail-r-max", type=int, default=30)
    p_b5.add_argument("--sigma5-max", type=int)
    p_b5.add_argument("--min-k3", help="volume floor P/Q")
    p_b5.add_argument("--out", choices=("human", "json", "csv"), default="human")
    p_b5.add_argument("--output", help="write to file instead of stdout")
    p_b5.set_defaults(func=_cmd_b5)

    p_cls = sub.add_parser("classify", help="run a classification scenario")
    p_cls.add_argument("scenario", choices=("pg1", "pg3"))
    p_cls.add_argument("--subcase", type=int, choices=(1, 2, 3),
                       help="pg1 only: restrict to one sub-case")
    p_cls.add_argument("--config", help="pg3 only: flat JSON ScenarioConfig file")
    p_cls.add_argument("--out", choices=("human", "json", "csv"), default="human")
    p_cls.add_argument("--output", help="write to file instead of stdout")
    p_cls.add_argument("--report", help="directory for CSV + figure report")
    p_cls.set_defaults(func=_cmd_classify)

    p_xi = sub.add_parser("xi", help="xi refinement transcript and birational level")
    p_xi.add_argument("--m0", type=int, required=True)
    p_xi.add_argument("--mu", required=True, help="lower bound P/Q")
    p_xi.add_argument("--beta", required=True, help="lower bound P/Q")
    p_xi.add_argument("--xi", help="seed lower bound P/Q (default: seeded from deg K_C)")
    p_xi.add_argument("--deg-kc", type=int, default=2, help="deg K_C of the moving curve")
    p_xi.add_argument("--rx", type=int, help="Cartier index for quantization")
    p_xi.add_argument("--range", default="2..60", help="m range A..B (default 2..60)")
    p_xi.add_argument("--rounds", type=int, default=100,
                      help="round cap (default 100; 1 = single sweep)")
    p_xi.add_argument("--zeta", help="fibration multiplier zeta (default 1)")
    p_xi.add_argument("--m1", type=int, help="restriction level for curve separation")
    p_xi.add_argument("--out", choices=("human", "json"), default="human")
    p_xi.add_argument("--output", help="write to file instead of stdout")
    p_xi.set_defaults(func=_cmd_xi)

    p_diff = sub.add_parser("diff", help="symmetric difference of two refined sets")
    p_diff.add_argument("left")
    p_diff.add_argument("right")
    p_diff.set_defaults(func=_cmd_diff)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BasketError, CliError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
