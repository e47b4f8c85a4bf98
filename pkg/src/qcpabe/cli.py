"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 protocol abort, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from pathlib import Path

from .bb84 import BB84Config, ChannelModel, run_bb84
from .errors import (
    BB84Aborted,
    BundleAuthenticationError,
    DuplicateTag,
    InsufficientSiftedBits,
    PolicySyntaxError,
    QcpabeError,
)
from .lsss import FieldPrime, build_lsss
from .policy import parse_policy
from .quantum import RandomSource
from .scenario import load_scenario
from .store import CloudStore, inspect_store

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_ABORT = 3
EXIT_IO = 4

_CHANNELS = {"ideal": ChannelModel.IDEAL, "eve": ChannelModel.INTERCEPT_RESEND}


def _err(msg: str) -> None:
    print(f"qcpabe: error: {msg}", file=sys.stderr)


def cmd_policy_compile(args) -> int:
    try:
        tree = parse_policy(args.policy)
        mat = build_lsss(tree, FieldPrime.for_bits(args.m))
    except PolicySyntaxError as exc:
        _err(str(exc))
        if exc.position is not None:
            print(f"  {args.policy}\n  {' ' * exc.position}^", file=sys.stderr)
        return EXIT_INVALID
    except (QcpabeError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    sys.stdout.write(mat.to_text())
    return EXIT_OK


def bb84_stats(raw: int, channel: ChannelModel, trials: int, seed: int,
               threshold: float = 0.11, check_fraction: float = 0.5) -> dict:
    target_m = max(1, math.floor(raw * (1 - check_fraction) / 4))
    config = BB84Config(target_m, raw, check_fraction, threshold)
    root = RandomSource(seed)
    qbers, aborts, short, checked = [], 0, 0, []
    for i in range(trials):
        try:
            res = run_bb84(config, channel, root.child(f"trial-{i}"))
        except BB84Aborted as exc:
            aborts += 1
            res = exc.result
        except InsufficientSiftedBits:
            short += 1
            continue
        qbers.append(res.qber)
        checked.append(res.checked_count)
    return {
        "raw": raw,
        "channel": channel.value,
        "trials": trials,
        "seed": seed,
        "threshold": threshold,
        "check_fraction": check_fraction,
        "completed": len(qbers),
        "insufficient": short,
        "qber_mean": statistics.fmean(qbers) if qbers else None,
        "qber_stddev": statistics.pstdev(qbers) if qbers else None,
        "checked_mean": statistics.fmean(checked) if checked else None,
        "abort_rate": aborts / trials,
    }


def cmd_bb84_stats(args) -> int:
    if args.raw < 1 or args.trials < 1:
        _err("--raw and --trials must be positive")
        return EXIT_INVALID
    try:
        stats = bb84_stats(args.raw, _CHANNELS[args.channel], args.trials, args.seed,
                           args.threshold, args.check_fraction)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INVALID
    fmt = lambda v: "n/a" if v is None else f"{v:.6f}"  # noqa: E731
    print(f"channel      {stats['channel']}")
    print(f"trials       {stats['trials']} ({stats['completed']} completed, {stats['insufficient']} short)")
    print(f"qber mean    {fmt(stats['qber_mean'])}")
    print(f"qber stddev  {fmt(stats['qber_stddev'])}")
    print(f"abort rate   {stats['abort_rate']:.4f}")
    if args.json:
        try:
            Path(args.json).write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            _err(f"cannot write {args.json}: {exc}")
            return EXIT_IO
    return EXIT_OK


def cmd_run(args) -> int:
    from .runner import run_scenario

    try:
        sc = load_scenario(args.scenario)
    except OSError as exc:
        _err(f"cannot read scenario: {exc}")
        return EXIT_IO
    except QcpabeError as exc:
        _err(f"{args.scenario}: {exc}")
        return EXIT_INVALID
    if args.seed is not None:
        sc.seed = args.seed
    if args.mode is not None:
        sc.mode = args.mode
    try:
        store = CloudStore(args.store) if args.store else None
        result = run_scenario(sc, store)
    except BB84Aborted as exc:
        _err(f"BB84 aborted (qber {exc.qber:.4f})")
        return EXIT_ABORT
    except (InsufficientSiftedBits, BundleAuthenticationError) as exc:
        _err(str(exc))
        return EXIT_ABORT
    except DuplicateTag as exc:
        _err(f"store already holds this record: {exc}")
        return EXIT_IO
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    except (QcpabeError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INVALID

    print(f"mt {result.mt.key}")
    for o in result.outcomes:
        attrs = "{" + ",".join(o.attributes) + "}"
        if o.phase == "initial":
            print(f"{o.du_id} {attrs}: {o.outcome}")
        else:
            print(f"{o.du_id} {attrs} after t={result.structure.clock} [{o.action}] {o.mt}: {o.outcome}")
    if args.out:
        try:
            result.ctx.transcript.write(args.out)
        except OSError as exc:
            _err(f"cannot write transcript: {exc}")
            return EXIT_IO
    return EXIT_OK


def cmd_store_inspect(args) -> int:
    root = Path(args.directory)
    if not root.is_dir():
        _err(f"{root} is not a directory")
        return EXIT_IO
    bad = 0
    for entry in inspect_store(root):
        if entry.error:
            bad += 1
            print(f"CORRUPT {entry.path}: {entry.error}")
        else:
            print(f"{entry.mt}\t{entry.kind}\t{entry.size}")
    return EXIT_INVALID if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcpabe", description="Quantum ciphertext-policy ABE toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("policy-compile", help="print the share-generating matrix of a policy")
    p.add_argument("policy")
    p.add_argument("--m", type=int, default=8, help="seed length; fixes the prime field")
    p.set_defaults(func=cmd_policy_compile)

    p = sub.add_parser("bb84-stats", help="QBER and abort statistics over repeated BB84 runs")
    p.add_argument("--raw", type=int, required=True, help="photons per run")
    p.add_argument("--channel", choices=sorted(_CHANNELS), default="ideal")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.11)
    p.add_argument("--check-fraction", type=float, default=0.5)
    p.add_argument("--json", help="also write the statistics as JSON to this path")
    p.set_defaults(func=cmd_bb84_stats)

    p = sub.add_parser("run", help="execute a scenario file")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--mode", choices=["semi", "full"], help="override the scenario mode")
    p.add_argument("--out", help="write the JSONL transcript here")
    p.add_argument("--store", help="persist ciphertext and share records in this directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("store-inspect", help="list records of a store directory")
    p.add_argument("directory")
    p.set_defaults(func=cmd_store_inspect)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
