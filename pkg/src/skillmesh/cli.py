"""Command-line entry points: gateway, mock-agent, fuse, bench."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from . import fusion as fusion_mod
from .gateway import GatewayConfig, run_gateway
from .mockagent import MockAgentConfig, serve


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skillmesh")
    sub = parser.add_subparsers(dest="command", required=True)

    gw = sub.add_parser("gateway", help="run the HTTP gateway")
    gw.add_argument("--config", help="gateway config JSON file")
    gw.add_argument("--listen", help="host:port override")

    ma = sub.add_parser("mock-agent", help="run one mock QA agent")
    ma.add_argument("--config", required=True, help="MockAgentConfig JSON file")

    fu = sub.add_parser("fuse", help="average adapter weight files")
    fu.add_argument("--inputs", nargs="+", required=True, help="input .sqtm files (>= 2)")
    fu.add_argument("--weights", help="comma-separated convex weights, e.g. 0.5,0.5")
    fu.add_argument("--output", required=True, help="output .sqtm file")

    be = sub.add_parser("bench", help="run a bench suite against a gateway")
    be.add_argument("--suite", required=True, help="BenchSuite JSON file")
    be.add_argument("--gateway", default="http://127.0.0.1:8470", help="gateway base URL")
    be.add_argument("--out", required=True, help="report JSON output path")
    be.add_argument("--csv", help="optional per-seed CSV output path")
    return parser


def _cmd_gateway(args: argparse.Namespace) -> int:
    config = GatewayConfig.load(args.config)
    if args.listen:
        host, _, port = args.listen.rpartition(":")
        config = GatewayConfig(**{**config.__dict__, "listen_host": host or "127.0.0.1",
                                  "listen_port": int(port)})
    print(f"gateway listening on http://{config.listen_host}:{config.listen_port}", flush=True)
    run_gateway(config)
    return 0


def _cmd_mock_agent(args: argparse.Namespace) -> int:
    cfg = MockAgentConfig.load(args.config)
    handle = serve(cfg)
    print(f"mock agent {cfg.agent_id!r} listening on {handle.base_url}", flush=True)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        handle.close()
    return 0


def _cmd_fuse(args: argparse.Namespace) -> int:
    weights = None
    if args.weights:
        weights = tuple(float(w) for w in args.weights.split(","))
    output = Path(args.output)
    spec = fusion_mod.FusionSpec(
        inputs=tuple(args.inputs), weights=weights, output_id=output.stem
    )
    maps = [fusion_mod.load_tensor_map(p) for p in args.inputs]
    fused = fusion_mod.average_adapters(spec, maps)
    fusion_mod.save_tensor_map(fused, output)
    total = sum(t.data.size for t in fused.entries.values())
    print(f"fused {len(maps)} maps ({len(fused.entries)} tensors, {total} values) -> {output}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    suite = bench_mod.BenchSuite.load(args.suite)
    report = bench_mod.run_bench(suite, args.gateway)
    report.save(args.out)
    if args.csv:
        bench_mod.write_csv(report, args.csv)
    print(bench_mod.format_report(report))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    commands = {
        "gateway": _cmd_gateway,
        "mock-agent": _cmd_mock_agent,
        "fuse": _cmd_fuse,
        "bench": _cmd_bench,
    }
    try:
        return commands[args.command](args)
    except Exception as exc:  # surface as a one-line error, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
