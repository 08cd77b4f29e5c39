"""Bridge command line: serve a model, or probe a running server."""

from __future__ import annotations

import argparse
import sys

from .backends import load_backend
from .conformance import conformance_check
from .server import BridgeServer, serve_stdio


def cmd_serve(args: argparse.Namespace) -> int:
    backend = load_backend(args.model)
    if args.endpoint == "stdio":
        serve_stdio(backend)
        return 0
    addr = args.endpoint[len("tcp:"):] if args.endpoint.startswith("tcp:") else args.endpoint
    host, _, port = addr.rpartition(":")
    server = BridgeServer(backend, host or "127.0.0.1", int(port))
    print(f"serving {args.model} on {server.endpoint}", file=sys.stderr, flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    report = conformance_check(args.endpoint, timeout=args.timeout)
    for line in report.lines:
        print(line)
    print("conformance:", "ok" if report.passed else "FAIL")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmbridge",
        description="Serve a causal language model's next-token log-probabilities "
        "over a newline-delimited JSON protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the server")
    p.add_argument(
        "--model",
        required=True,
        help='backend spec: "toy[:vocab_size]" or "hf:<model id or path>"',
    )
    p.add_argument(
        "--endpoint",
        default="tcp:127.0.0.1:9310",
        help='"tcp:host:port" or "stdio" for child-process mode',
    )
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("check", help="probe a running server for conformance")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--timeout", type=float, default=10.0)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
