"""Command-line front end: build / route / verify / count / sweep / dot.

Exit codes: 0 success, 1 verification failure, 2 input or structural
error.  All outputs are deterministic given flags (plus seed where one
applies); FABRIC_SEED provides the default seed.
"""

from __future__ import annotations

import argparse
import os
import random
import sys

from . import analysis, routing, topology, verify
from .errors import FabricError, StructuralError
from .permutation import Permutation, parse_permutation

NETWORK_KINDS = (
    topology.KIND_BUTTERFLY,
    topology.KIND_INVERSE_BUTTERFLY,
    topology.KIND_BENES,
    topology.KIND_BAND_EXCHANGE,
    topology.KIND_K_BENES,
    topology.KIND_KR_BENES,
)


def build_network(kind: str, n: int, k=None) -> topology.Network:
    if kind == topology.KIND_BUTTERFLY:
        return topology.build_butterfly(n)
    if kind == topology.KIND_INVERSE_BUTTERFLY:
        return topology.build_inverse_butterfly(n)
    if kind == topology.KIND_BENES:
        return topology.build_benes(n)
    if kind == topology.KIND_BAND_EXCHANGE:
        if k is None:
            raise FabricError("band-exchange needs --k")
        return topology.build_band_exchange(n, k)
    if kind == topology.KIND_K_BENES:
        if k is None:
            raise FabricError("k-benes needs --k")
        return topology.build_k_benes(n, k)
    if kind == topology.KIND_KR_BENES:
        return topology.build_kr_benes(n)
    raise FabricError(f"unknown network kind {kind!r}")


def _load_network(args) -> topology.Network:
    if getattr(args, "net", None):
        with open(args.net, encoding="utf-8") as fh:
            return topology.network_from_json(fh.read())
    if getattr(args, "kind", None) is None or getattr(args, "n", None) is None:
        raise FabricError("give --net FILE or --kind and --n")
    return build_network(args.kind, args.n, args.k)


def _load_permutation(args) -> Permutation:
    if getattr(args, "perm", None):
        return parse_permutation(args.perm)
    if getattr(args, "perm_file", None):
        with open(args.perm_file, encoding="utf-8") as fh:
            return parse_permutation(fh.read())
    raise FabricError("give --perm or --perm-file")


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_build(args) -> int:
    net = build_network(args.kind, args.n, args.k)
    _emit(topology.network_to_json(net), args.out)
    return 0


def cmd_route(args) -> int:
    net = _load_network(args)
    p = _load_permutation(args)
    algo = args.algo
    if algo != "auto" and algo != net.kind:
        raise FabricError(f"--algo {algo} does not match network kind {net.kind}")
    plan = routing.route(net, p, build_paths=False)
    _emit(routing.plan_to_json(plan), args.out)
    return 0


def cmd_verify(args) -> int:
    net = _load_network(args)
    p = _load_permutation(args)
    with open(args.plan, encoding="utf-8") as fh:
        plan = routing.plan_from_json(fh.read(), net)
    report = verify.verify_plan(net, plan, p)
    _emit(report.to_json(), args.out)
    return 0 if report.ok else 1


def cmd_count(args) -> int:
    report = analysis.count_report(args.n, args.k, exhaustive=args.exhaustive)
    _emit(report.to_json(), args.out)
    return 0


def cmd_sweep(args) -> int:
    n = args.n
    if n > 64:
        raise FabricError(f"sweep supports n <= 64, got {n}")
    net = topology.build_kr_benes(n)
    kdraw = random.Random(args.seed)
    rows = ["seed,k_exact,K,terminal_visits,overhead,verified"]
    for idx in range(args.trials):
        if args.dist == "uniform":
            k = kdraw.randrange(n)
        else:  # locality: geometric, biased toward small bounds
            k = 0
            while k < n - 1 and kdraw.random() < 0.5:
                k += 1
        trial_seed = args.seed + idx
        p = verify.gen_random_k_bounded(n, k, trial_seed)
        bound = analysis.boundedness(p)
        plan = routing.kr_benes_route(net, p, build_paths=False)
        ok = verify.verify_plan(net, plan, p).ok
        rows.append(
            f"{trial_seed},{bound.k_exact},{bound.K},"
            f"{plan.cost.terminal_visits},{plan.cost.overhead},{str(ok).lower()}"
        )
    _emit("\n".join(rows) + "\n", args.out)
    return 0


def cmd_dot(args) -> int:
    net = _load_network(args)
    _emit(topology.export_dot(net), args.out)
    return 0


def _add_net_args(sp, with_inline=True) -> None:
    sp.add_argument("--net", help="network JSON file")
    if with_inline:
        sp.add_argument("--kind", choices=NETWORK_KINDS, help="build the network inline")
        sp.add_argument("--n", type=int, help="line count (power of 2)")
        sp.add_argument("--k", type=int, help="band width (power of 2)")


def _add_perm_args(sp) -> None:
    sp.add_argument("--perm", help='comma-separated images of 0..n-1, e.g. "4,5,0,6,1,2,7,3"')
    sp.add_argument("--perm-file", help="file containing the permutation text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="benesfab",
        description="Build, route, and verify Benes-family switch fabrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("build", help="construct a network and write it as JSON")
    sp.add_argument("--kind", choices=NETWORK_KINDS, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("route", help="route a permutation and print the plan JSON")
    _add_net_args(sp)
    _add_perm_args(sp)
    sp.add_argument("--algo", choices=("auto", "benes", "k-benes", "kr-benes"), default="auto")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_route)

    sp = sub.add_parser("verify", help="check a plan file against a network and permutation")
    _add_net_args(sp)
    _add_perm_args(sp)
    sp.add_argument("--plan", required=True, help="plan JSON file")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("count", help="closed-form vs exhaustive bounded-permutation counts")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--exhaustive", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("sweep", help="route random bounded permutations, emit per-trial cost CSV")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, default=int(os.environ.get("FABRIC_SEED", "0")))
    sp.add_argument("--dist", choices=("uniform", "locality"), default="uniform")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("dot", help="export a network as Graphviz DOT")
    _add_net_args(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_dot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StructuralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FabricError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
