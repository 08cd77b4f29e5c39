"""Command-line surface: train, profile, decode, sweep, emit-plots, serve-check.

Exit code 0 on success; engine failures print one machine-readable line
`error: <Kind>: <message>` to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import corpus as corpuslib
from .config import (
    DecoderSpec,
    ExperimentConfig,
    load_config,
    parse_decoder_spec,
)
from .decode import record_from_json_line, record_to_json_line
from .errors import ConfigError, DegenerateVocabError, EngineError
from .ngram import NGramModel, train_ngram
from .plotdata import decode_table, emit_plot_data
from .profile import estimate_profile, fit_line, load_profile, save_profile
from .provider import connect_remote_provider, serve_check
from .sweep import (
    correlation_report_to_csv,
    parse_sweep_csv,
    run_decoder,
    run_sweep,
    sweep_rows_to_csv,
)
from .vocab import build_vocabulary


def _open_provider(kind: str, model_path: str, endpoint: str):
    if kind == "remote":
        if not endpoint:
            raise ConfigError("remote provider needs --endpoint")
        return connect_remote_provider(endpoint)
    if not model_path:
        raise ConfigError("local provider needs --model")
    return NGramModel.load(model_path)


def cmd_train(args: argparse.Namespace) -> int:
    lines = corpuslib.read_lines(args.corpus)
    train_lines, holdout = corpuslib.split_corpus(lines, args.holdout_every)
    vocab = build_vocabulary(train_lines, args.min_count)
    if vocab.size <= 4:
        raise DegenerateVocabError(
            f"min_count={args.min_count} leaves no regular tokens"
        )
    model = train_ngram(train_lines, vocab, args.order)
    model.save(args.out)
    print(f"vocab_size {vocab.size}")
    print(f"model_hash {model.model_hash}")
    if holdout:
        print(f"holdout_perplexity {model.perplexity(holdout):.6f}")
    print(f"written {args.out}")
    return 0


def cmd_profile(args: argparse.Namespace) -> int:
    provider = _open_provider(args.provider, args.model, args.endpoint)
    lines = corpuslib.read_lines(args.corpus)
    _, holdout = corpuslib.split_corpus(lines, args.holdout_every)
    pairs = corpuslib.make_eval_pairs(
        holdout, provider, args.prefix_len, args.gen_len, args.eval_size
    )
    horizon = args.horizon if args.horizon is not None else args.gen_len - 1
    profile = estimate_profile(
        provider, pairs, window=args.window, horizon=horizon, corpus_id=args.corpus_id
    )
    save_profile(profile, args.out)
    fit = fit_line(profile)
    print(f"profile_rows {profile.horizon + 1}")
    print(f"sigma_mean {float(profile.sigma.mean()):.9f}")
    print(f"fit_slope {fit.slope:.9f}")
    print(f"fit_intercept {fit.intercept:.9f}")
    print(f"fit_mse {fit.mse:.9f}")
    print(f"written {args.out}")
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    provider = _open_provider(args.provider, args.model, args.endpoint)
    profile = load_profile(args.profile)
    spec = parse_decoder_spec(args.decoder)
    prefix = provider.encode(args.prompt)
    record = run_decoder(provider, spec, prefix, args.max_len, args.seed, profile=profile)
    text = provider.decode(record.tokens)
    print(text)
    print(f"tokens {len(record.tokens)}")
    print(f"det_fraction {record.det_fraction:.6f}")
    print(f"eui_count {record.eui_count}")
    print(f"backoff_count {record.backoff_count}")
    if args.out_record:
        with open(args.out_record, "w", encoding="utf-8") as fh:
            fh.write(record_to_json_line(record) + "\n")
        print(f"written {args.out_record}")
    if args.out_table:
        with open(args.out_table, "w", encoding="utf-8") as fh:
            fh.write(decode_table(record, profile, args.zone_width))
        print(f"written {args.out_table}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if not cfg.decoders:
        raise ConfigError("config defines no decoders (add decoder= or grid= lines)")
    model_path = args.model or cfg.model_path
    profile_path = args.profile or cfg.profile_path
    if not profile_path:
        raise ConfigError("sweep needs a profile path (flag or config)")
    provider = _open_provider(cfg.provider, model_path, cfg.endpoint)
    profile = load_profile(profile_path)
    lines = corpuslib.read_lines(args.corpus or cfg.corpus_path)
    _, holdout = corpuslib.split_corpus(lines, cfg.holdout_every)
    vocab = getattr(provider, "vocab", None)
    if vocab is None and cfg.mode == "text-completion":
        raise ConfigError(
            "text-completion sweeps filter stop words, which needs the local "
            "vocabulary; use a local model or mode = dialog"
        )
    pairs = corpuslib.make_eval_pairs(
        holdout, provider, cfg.prefix_len, cfg.gen_len, cfg.eval_size
    )
    result = run_sweep(
        provider,
        profile,
        pairs,
        cfg.decoders,
        cfg.seeds,
        max_len=cfg.gen_len,
        zone_width=cfg.zone_width,
        mode=cfg.mode,
        vocab=vocab,
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    results_path = os.path.join(cfg.out_dir, "sweep_results.csv")
    with open(results_path, "w", encoding="utf-8") as fh:
        fh.write(sweep_rows_to_csv(result.rows))
    corr_path = os.path.join(cfg.out_dir, "correlations.csv")
    with open(corr_path, "w", encoding="utf-8") as fh:
        fh.write(correlation_report_to_csv(result.correlations))
    print(f"configs {result.correlations.n_points}")
    print(f"rows {len(result.rows)}")
    print(f"written {results_path}")
    print(f"written {corr_path}")
    return 0


def cmd_emit_plots(args: argparse.Namespace) -> int:
    profile = load_profile(args.profile)
    records_by_label = None
    if args.records:
        records_by_label = {}
        with open(args.records, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = record_from_json_line(line)
                records_by_label.setdefault(record.decoder, record)
    sweep_rows = None
    if args.sweep:
        with open(args.sweep, "r", encoding="utf-8") as fh:
            sweep_rows = parse_sweep_csv(fh.read())
    written = emit_plot_data(
        args.out, profile, args.zone_width, records_by_label, sweep_rows
    )
    for path in written:
        print(f"written {path}")
    return 0


def cmd_serve_check(args: argparse.Namespace) -> int:
    ok, report = serve_check(args.endpoint, timeout=args.timeout)
    for line in report:
        print(line)
    print("serve-check:", "ok" if ok else "FAIL")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entrodec",
        description="Train word n-gram models, calibrate entropy baselines, "
        "decode with entropy-aware interventions, and sweep decoder grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="build vocab + n-gram model from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--holdout-every", type=int, default=10)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("profile", help="estimate the entropy baseline on held-out docs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", default="")
    p.add_argument("--provider", choices=("local", "remote"), default="local")
    p.add_argument("--endpoint", default="")
    p.add_argument("--out", required=True)
    p.add_argument("--prefix-len", type=int, default=32)
    p.add_argument("--gen-len", type=int, default=64)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--eval-size", type=int, default=200)
    p.add_argument("--holdout-every", type=int, default=10)
    p.add_argument("--corpus-id", default="")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("decode", help="decode one prompt and dump trace tables")
    p.add_argument("--model", default="")
    p.add_argument("--provider", choices=("local", "remote"), default="local")
    p.add_argument("--endpoint", default="")
    p.add_argument("--profile", required=True)
    p.add_argument("--decoder", required=True, help='e.g. "greedy" or "top_k k=30"')
    p.add_argument("--prompt", required=True)
    p.add_argument("--max-len", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--zone-width", type=float, default=1.5)
    p.add_argument("--out-record", default="")
    p.add_argument("--out-table", default="")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("sweep", help="run a decoder grid and correlate metrics")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus", default="")
    p.add_argument("--model", default="")
    p.add_argument("--profile", default="")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("emit-plots", help="write tidy plot-data tables")
    p.add_argument("--profile", required=True)
    p.add_argument("--records", default="")
    p.add_argument("--sweep", default="")
    p.add_argument("--out", required=True)
    p.add_argument("--zone-width", type=float, default=1.5)
    p.set_defaults(func=cmd_emit_plots)

    p = sub.add_parser("serve-check", help="probe a model server's protocol conformance")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--timeout", type=float, default=10.0)
    p.set_defaults(func=cmd_serve_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: OSError: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
