"""Command line entry point: `ncrelay bounds | simulate | verify-examples`."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .bounds import BoundKind
from .channel import ChannelError, random_channel
from .optimizer import ConfigError, NotDegradedError, SearchConfig, maximize, maximize_all
from .prob import ProbabilityError
from .sim import SimError, SimParams, sweep

EXIT_OK, EXIT_MISMATCH, EXIT_PARSE, EXIT_CONFIG = 0, 1, 2, 3

# (label, channel file, bound, published 4-decimal value)
HEADLINE = (
    ("bec gp-df", "bec_example.chan", BoundKind.GP_DF, 0.5),
    ("bec df", "bec_example.chan", BoundKind.DF, 0.3219),
    ("bsc df", "bsc_example.chan", BoundKind.DF, 0.2203),
    ("bsc cutset", "bsc_example.chan", BoundKind.CUTSET, 0.2566),
    ("bsc nub", "bsc_example.chan", BoundKind.NUB, 0.2453),
)


class _ParseFailure(Exception):
    pass


def _list(conv):
    def parse(text):
        try:
            return [conv(t) for t in text.split(",") if t.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e)) from None
    return parse


def _kind(text):
    try:
        return BoundKind.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_channel_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--channel", metavar="PATH",
                   help="channel spec file; bundled example names (bec_example.chan, bsc_example.chan) also work")
    g.add_argument("--random-channel", type=int, metavar="SEED",
                   help="test helper: random binary channel drawn from SEED")
    p.add_argument("--degraded", action="store_true", help="with --random-channel, draw a degraded channel")


def _add_search_args(p):
    d = SearchConfig()
    p.add_argument("--card-u", type=int, default=d.card_u, help="size of U (default %(default)s)")
    p.add_argument("--card-v", type=int, default=d.card_v, help="size of V (default %(default)s)")
    p.add_argument("--card-yhat", type=int, default=d.card_yhat, help="size of the compression alphabet (default %(default)s)")
    p.add_argument("--grid", type=int, default=d.grid_resolution, metavar="K", help="coarse simplex grid resolution (default %(default)s)")
    p.add_argument("--refine-iters", type=int, default=d.refine_iterations, metavar="N",
                   help="local refinement iterations (default %(default)s)")
    p.add_argument("--tol", type=float, default=d.tolerance, metavar="X", help="convergence tolerance (default %(default)s)")
    p.add_argument("--map-cap", type=int, default=d.map_enumeration_cap, metavar="N",
                   help="exhaustive relay-map enumeration limit before sampling (default %(default)s)")
    p.add_argument("--seed", type=int, default=d.seed, help="search or simulation seed (default %(default)s)")
    p.add_argument("--out", metavar="PATH", help="write the CSV here instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncrelay", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", help="optimize capacity bounds and print a CSV report")
    _add_channel_args(b)
    b.add_argument("--kinds", type=_list(_kind), default=None, metavar="LIST",
                   help="comma-separated bounds, e.g. df,cutset,nub (default: all)")
    _add_search_args(b)
    b.add_argument("--witness-dir", metavar="PATH", help="also write one witness file per bound here")

    s = sub.add_parser("simulate", help="Monte Carlo error rate of the GP-DF scheme")
    _add_channel_args(s)
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--witness", metavar="PATH", help="GP-DF witness file")
    src.add_argument("--witness-from-bound", action="store_true",
                     help="optimize the GP-DF bound first and simulate its witness")
    _add_search_args(s)
    dflt = SimParams(n=1, rate_r=0.0, rate_rtilde=0.0)
    s.add_argument("--n", type=_list(int), required=True, metavar="LIST", help="comma-separated blocklengths")
    s.add_argument("--rate", type=_list(float), required=True, metavar="LIST", help="comma-separated message rates R")
    s.add_argument("--rtilde", type=float, required=True, metavar="X", help="multicoding rate R~")
    s.add_argument("--eps-relay", type=float, default=dflt.eps_relay, metavar="X", help="relay typicality slack (default %(default)s)")
    s.add_argument("--eps-dec", type=float, default=dflt.eps_decoder, metavar="X", help="decoder typicality slack (default %(default)s)")
    s.add_argument("--trials", type=int, default=dflt.trials, metavar="N", help="trials per cell (default %(default)s)")

    v = sub.add_parser("verify-examples", help="recompute the five reference numbers")
    v.add_argument("--tol", type=float, default=1e-3, help=argparse.SUPPRESS)
    return ap


def _channel(args):
    if args.random_channel is not None:
        ch = random_channel(np.random.default_rng(args.random_channel), degraded=args.degraded)
        return ch, fileio.content_id(fileio.serialize_channel(ch))
    try:
        return fileio.load_channel(args.channel)
    except (OSError, UnicodeDecodeError, ValueError) as e:
        raise _ParseFailure(str(e)) from None


def _config(args) -> SearchConfig:
    return SearchConfig(grid_resolution=args.grid, refine_iterations=args.refine_iters,
                        tolerance=args.tol, card_u=args.card_u, card_v=args.card_v,
                        card_yhat=args.card_yhat, map_enumeration_cap=args.map_cap, seed=args.seed)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_bounds(args) -> int:
    ch, cid = _channel(args)
    cfg = _config(args)
    kinds = args.kinds
    if kinds is None:
        results = list(maximize_all(ch, cfg).values())
    else:
        results = [maximize(ch, k, cfg) for k in dict.fromkeys(kinds)]
    refs = {}
    if args.witness_dir:
        d = Path(args.witness_dir)
        d.mkdir(parents=True, exist_ok=True)
        for r in results:
            path = d / f"{cid}_{r.kind.cli_name}.wit"
            path.write_text(fileio.write_witness(r.kind, ch, r.witness, r.value), encoding="utf-8")
            refs[r.kind] = str(path)
    _emit(fileio.report_csv(cid, results, refs), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    ch, _ = _channel(args)
    base = SimParams(n=max(args.n or [1]), rate_r=max(args.rate or [0.0]), rate_rtilde=args.rtilde,
                     eps_relay=args.eps_relay, eps_decoder=args.eps_dec, trials=args.trials,
                     seed=args.seed)
    if not args.n or not args.rate:
        raise SimError("--n and --rate need at least one value each")
    if args.witness_from_bound:
        w = maximize(ch, BoundKind.GP_DF, _config(args)).witness
    else:
        try:
            text = Path(args.witness).read_text(encoding="utf-8")
            kind, w, _ = fileio.read_witness(text, ch)
        except (OSError, UnicodeDecodeError, ValueError) as e:
            raise _ParseFailure(str(e)) from None
        if kind not in (BoundKind.GP_DF, BoundKind.NUB, BoundKind.DEGRADED_CAPACITY):
            raise _ParseFailure(f"simulation needs a GP-DF shaped witness, got {kind.cli_name}")
    cells = sweep(ch, w, base, args.n, args.rate)
    _emit(fileio.simulation_csv(cells), args.out)
    return EXIT_OK


def cmd_verify_examples(args) -> int:
    cfg = SearchConfig()
    channels = {}
    status = EXIT_OK
    for label, fname, kind, ref in HEADLINE:
        if fname not in channels:
            channels[fname] = fileio.load_channel(fname)[0]
        got = maximize(channels[fname], kind, cfg).value
        diff = abs(got - ref)
        ok = diff <= args.tol
        if not ok:
            status = EXIT_MISMATCH
        print(f"{'PASS' if ok else 'FAIL'} {label}: computed={got:.6f} reference={ref:.4f} "
              f"|diff|={diff:.2e} tol={args.tol:g}")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"bounds": cmd_bounds, "simulate": cmd_simulate,
               "verify-examples": cmd_verify_examples}[args.command]
    try:
        return handler(args)
    except _ParseFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, NotDegradedError, SimError, ChannelError, ProbabilityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
