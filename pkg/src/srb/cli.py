"""Command-line surface: encode, serve-repair, bootstrap, reconstruct,
simulate and metrics.

Every subcommand prints its effective configuration first; replaying that
line reproduces the outputs byte-identically.  Exit codes: 0 success,
2 usage or argument errors, 3 decode failures, 4 invariant breaches.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import analytics, codec, sim
from .errors import DecodeFailure, IntegrityError, ShardUnderflowError
from .field import parse_field
from .mbr import MbrParams, message_length


def _print_config(cmd: str, args: argparse.Namespace, keys: list[str]) -> None:
    pairs = " ".join(f"{k.replace('_', '-')}={getattr(args, k)}" for k in keys)
    print(f"effective-config: cmd={cmd} {pairs}")


def cmd_encode(args) -> int:
    _print_config("encode", args, ["blocks", "k", "alpha", "gamma", "field", "block_size", "gen", "out"])
    fld = parse_field(args.field)
    want = message_length(args.k, args.alpha)
    blocks_dir = Path(args.blocks)
    files = sorted(p for p in blocks_dir.iterdir() if p.is_file())
    if len(files) != want:
        raise ValueError(
            f"--blocks must contain exactly L = {want} block files "
            f"(k={args.k}, alpha={args.alpha}); found {len(files)}"
        )
    blocks = [p.read_bytes() for p in files]
    params = MbrParams(args.k, args.alpha)
    state = codec.encode_generation(
        blocks, args.gamma, params, fld, generation=args.gen, block_size=args.block_size
    )
    data = codec.state_to_bytes(state)
    Path(args.out).write_bytes(data)
    payload = state.payload_bytes()
    header = state.header_bytes()
    print(
        f"stored: {state.alpha} coded blocks for {want} input blocks = "
        f"{payload} bytes payload + {header} bytes header "
        f"({analytics.format_bytes(payload + header)})"
    )
    return 0


def cmd_serve_repair(args) -> int:
    _print_config("serve-repair", args, ["state", "target_gamma", "out"])
    state = codec.state_from_bytes(Path(args.state).read_bytes())
    share = codec.serve_repair(state, args.target_gamma)
    Path(args.out).write_bytes(codec.share_to_bytes(share))
    print(
        f"served: 1 coded block = {share.payload_bytes()} bytes payload + "
        f"{share.header_bytes()} bytes header"
    )
    return 0


def cmd_bootstrap(args) -> int:
    _print_config("bootstrap", args, ["target_gamma", "p", "out"])
    print("shares: " + " ".join(args.shares))
    shares = [codec.share_from_bytes(Path(p).read_bytes()) for p in args.shares]
    state = codec.bootstrap_node(shares, args.target_gamma, args.p)
    Path(args.out).write_bytes(codec.state_to_bytes(state))
    payload = sum(s.payload_bytes() for s in shares)
    header = sum(s.header_bytes() for s in shares)
    print(
        f"downloaded: {len(shares)} coded blocks = {payload} bytes payload + "
        f"{header} bytes header ({analytics.format_bytes(payload + header)})"
    )
    print(f"stored: {state.alpha} coded blocks recovered by repair")
    return 0


def cmd_reconstruct(args) -> int:
    _print_config("reconstruct", args, ["p", "out_dir"])
    print("states: " + " ".join(args.states))
    states = [codec.state_from_bytes(Path(p).read_bytes()) for p in args.states]
    blocks = codec.reconstruct_generation(states, args.p)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(blocks) - 1)))
    for i, block in enumerate(blocks):
        (out_dir / f"block-{i:0{width}d}.bin").write_bytes(block)
    total = sum(len(b) for b in blocks)
    print(
        f"recovered: {len(blocks)} blocks = {total} bytes "
        f"({analytics.format_bytes(total)}) into {out_dir}"
    )
    return 0


def cmd_simulate(args) -> int:
    config = sim.SimConfig.from_text(Path(args.config).read_text())
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    _print_config("simulate", args, ["config", "out"])
    print(f"seed={config.seed}")
    report = sim.run_simulation(config)
    text = sim.render_report(report)
    if args.out:
        Path(args.out).write_text(text)
    print(text, end="")
    return 0


def cmd_metrics(args) -> int:
    _print_config("metrics", args, ["paper_example"])
    if args.paper_example:
        params = analytics.reference_example_params()
    else:
        params = analytics.ProtocolParams(
            protocol=analytics.SRB,
            n_s=args.shard_nodes,
            total_blocks=args.blocks,
            alpha=args.alpha,
            k=args.k,
            p=args.p,
            block_size=args.block_size,
            delta=args.delta,
            rho=args.rho,
            c=args.c,
            total_nodes=args.total_nodes,
            shards=args.shards,
            malicious=args.malicious,
            mu=args.mu,
            p_frac=args.p_frac,
            v=args.v,
            tau=args.tau,
        )
    print(analytics.render_metrics(analytics.comparison_report(params)), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srb",
        description="Regenerating-code storage for sharded ledgers: encode coded "
        "node state, serve and consume repair shares, reconstruct blocks, "
        "simulate a shard, and compare protocol costs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode one generation of blocks for a node")
    p.add_argument("--blocks", required=True, help="directory with exactly L block files")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--gamma", type=int, required=True, help="node encoder coefficient")
    p.add_argument("--field", default="binary:16", help="prime:Q or binary:M[:POLY]")
    p.add_argument("--block-size", type=int, required=True, dest="block_size")
    p.add_argument("--gen", type=int, default=0, help="generation index")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("serve-repair", help="produce one repair share from stored state")
    p.add_argument("--state", required=True)
    p.add_argument("--target-gamma", type=int, required=True, dest="target_gamma")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_serve_repair)

    p = sub.add_parser("bootstrap", help="rebuild a node's state from repair shares")
    p.add_argument("--target-gamma", type=int, required=True, dest="target_gamma")
    p.add_argument("--shares", nargs="+", required=True)
    p.add_argument("--p", type=int, default=0, help="tolerated corrupt shares")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("reconstruct", help="recover the original blocks from node states")
    p.add_argument("--states", nargs="+", required=True)
    p.add_argument("--p", type=int, default=0, help="tolerated corrupt states")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("simulate", help="run the shard simulator from a config file")
    p.add_argument("--config", required=True, help="key=value config file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", default=None, help="also write the report here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metrics", help="print the protocol comparison table")
    p.add_argument("--paper-example", action="store_true", dest="paper_example",
                   help="use the published example parameters")
    p.add_argument("--shard-nodes", type=int, default=0, dest="shard_nodes")
    p.add_argument("--blocks", type=int, default=0, help="L, blocks per shard")
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--block-size", type=int, default=0, dest="block_size")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--rho", type=int, default=2)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--total-nodes", type=int, default=0, dest="total_nodes")
    p.add_argument("--shards", type=int, default=0)
    p.add_argument("--malicious", type=int, default=0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--p-frac", type=float, default=0.0, dest="p_frac")
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.set_defaults(func=cmd_metrics)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DecodeFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (IntegrityError, ShardUnderflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
