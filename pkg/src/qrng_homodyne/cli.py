"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 pipeline failure,
3 randomness suite failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import codecs
from .pipeline import (
    FIGURES,
    ConfigError,
    PipelineConfig,
    PipelineError,
    emit_figure_data,
    extractor_input,
    quantized_channels,
    run_pipeline,
)
from .stats import run_core_suite
from .toeplitz import HashParams, ToeplitzSeed, extract_stream

EXIT_OK, EXIT_CONFIG, EXIT_PIPELINE, EXIT_SUITE = 0, 1, 2, 3

log = logging.getLogger("qrng_homodyne")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_override(d: dict, assignment: str) -> None:
    key, sep, value = assignment.partition("=")
    if not sep:
        raise ConfigError(f"override {assignment!r} is not key=value")
    *parents, leaf = key.split(".")
    node = d
    for part in parents:
        node = node.setdefault(part, {})
    node[leaf] = _parse_value(value)


def load_config(args) -> PipelineConfig:
    d: dict = {}
    if getattr(args, "config", None):
        try:
            d = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    for item in getattr(args, "set", None) or []:
        _apply_override(d, item)
    if getattr(args, "seed_file", None):
        d["seed_source"] = args.seed_file
    if getattr(args, "samples", None) is not None:
        d.setdefault("trace", {})["num_samples"] = args.samples
    if getattr(args, "rng_seed", None) is not None:
        d.setdefault("trace", {})["rng_seed"] = args.rng_seed
    if getattr(args, "mode", None):
        d["quadrature_mode"] = args.mode
    return PipelineConfig.from_dict(d)


def cmd_simulate(args) -> int:
    cfg = load_config(args)
    x, p, clamped, dv = quantized_channels(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    codecs.write_samples(out / "x.bin", x, "X", cfg.adc.bits)
    codecs.write_samples(out / "p.bin", p, "P", cfg.adc.bits)
    print(json.dumps({
        "samples": cfg.trace.num_samples,
        "files": [str(out / "x.bin"), str(out / "p.bin")],
        "saturation_clamps": clamped,
        "sigma_total_sq": dv.sigma_total_sq,
    }, indent=2))
    return EXIT_OK


def cmd_extract(args) -> int:
    x, channel, bits = codecs.read_samples(args.samples_file)
    if args.mode == "Z":
        if not args.p_file:
            raise ConfigError("Z mode needs --p-file with the P channel samples")
        p, _, _ = codecs.read_samples(args.p_file)
        if p.size != x.size:
            raise ConfigError("X and P sample files differ in length")
        data, n = extractor_input(x, p, "Z", bits), 2 * bits
    else:
        data, n = x, bits
    params = HashParams(n=n, m=args.m, s=args.s)
    if args.seed_file:
        seed = ToeplitzSeed.from_bytes(Path(args.seed_file).read_bytes(), params)
    else:
        seed = ToeplitzSeed.from_host(params)
    out_bits = extract_stream(data, params, seed)
    codecs.write_bitstream(args.out, out_bits, args.format)
    print(json.dumps({"bits": int(out_bits.size), "out": args.out}))
    return EXIT_OK


def cmd_test(args) -> int:
    bits = codecs.read_bitstream(args.bits_file, args.format)
    if bits.size == 0:
        raise PipelineError("bitstream is empty")
    report = run_core_suite(bits, args.alpha)
    print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK if report.passed else EXIT_SUITE


def cmd_figures(args) -> int:
    cfg = load_config(args) if (args.config or args.set) else None
    names = FIGURES if args.figure == "all" else (args.figure,)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in names:
        path = out / f"{name}.csv"
        path.write_text(emit_figure_data(name, cfg))
        print(path)
    return EXIT_OK


def cmd_report(args) -> int:
    cfg = load_config(args)
    if args.out:
        cfg.bitstream_path = args.out
        cfg.bitstream_format = args.format
    if args.report:
        cfg.report_path = args.report
    report, _ = run_pipeline(cfg)
    print(report.to_json())
    if report.suite is not None and not report.suite.passed:
        return EXIT_SUITE
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import serve_random

    cfg = load_config(args)
    serve_random(args.port, cfg, capacity=args.capacity, host=args.host)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrng-homodyne", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def config_opts(p):
        p.add_argument("--config", help="JSON pipeline configuration")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key, dotted for nesting (e.g. hash.m=7)")
        p.add_argument("--seed-file", help="Toeplitz seed file (raw bytes, MSB first)")
        p.add_argument("--samples", type=int, help="number of samples to simulate")
        p.add_argument("--rng-seed", type=int, help="sampler seed")
        p.add_argument("--mode", choices=("X", "P", "Z"))

    p = sub.add_parser("simulate", help="simulate and quantize X/P traces into sample files")
    config_opts(p)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("extract", help="Toeplitz-hash a sample file into a bitstream")
    p.add_argument("samples_file")
    p.add_argument("--p-file", help="P channel samples (Z mode)")
    p.add_argument("--mode", choices=("X", "P", "Z"), default="X")
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--s", type=int, default=60)
    p.add_argument("--seed-file")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("raw", "ascii"), default="raw")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("test", help="run the core randomness tests on a bitstream")
    p.add_argument("bits_file")
    p.add_argument("--format", choices=("raw", "ascii"), default="raw")
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("figures", help="write figure data as CSV")
    p.add_argument("figure", choices=FIGURES + ("all",))
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("report", help="run the full pipeline and print its report")
    config_opts(p)
    p.add_argument("--out", help="bitstream output path")
    p.add_argument("--format", choices=("raw", "ascii"), default="raw")
    p.add_argument("--report", help="write the JSON report here too")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="serve extracted bytes over HTTP")
    config_opts(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--capacity", type=int, default=1 << 20)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        # Parameter and I/O problems outside PipelineConfig are config errors too.
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PipelineError as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
