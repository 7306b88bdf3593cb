"""Command-line interface.

Subcommands: ``estimate`` (sequence probability), ``predict`` (next-symbol
distribution, with priming samples and side information), ``density``
(real-valued density evaluation and mean prediction), ``simulate`` (process
generators), ``bench`` (benchmark reports with optional figures).

Exit codes: 0 success, 2 usage, 3 data error, 4 external-compressor failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .alphabet import Alphabet, DataError, Sequence, diamond_concat
from .bench import PredictorConfig, ProcessSpec, run_benchmark
from .coding import BuiltinCode, CodeMeasure, CompressorError, ExternalCompressor
from .density import DyadicPartition, MixtureDensity
from .measures import KTMixture, Krichevsky, Laplace
from .prediction import PairSequence, side_info_predict
from .processes import generate, ingest_csv


def read_token_blocks(path: str, token_mode: bool) -> list[list[str]]:
    """Blank-line separated samples; one symbol per character, or
    comma-separated tokens in token mode."""
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            text = open(path).read()
        except OSError as e:
            raise DataError(f"cannot open {path}: {e}") from e
    blocks: list[list[str]] = [[]]
    for line in text.splitlines():
        if not line.strip():
            if blocks[-1]:
                blocks.append([])
            continue
        if token_mode:
            blocks[-1].extend(t.strip() for t in line.split(",") if t.strip())
        else:
            blocks[-1].extend(line.strip())
    if blocks and not blocks[-1]:
        blocks.pop()
    return blocks or [[]]


def read_symbol_blocks(path: str, alphabet_spec: str | None):
    token_mode = alphabet_spec is not None and "," in alphabet_spec
    blocks = read_token_blocks(path, token_mode)
    if alphabet_spec is not None:
        alphabet = Alphabet.from_spec(alphabet_spec)
    else:
        seen = sorted({t for b in blocks for t in b})
        if not seen:
            raise DataError(f"{path}: no symbols found and no alphabet declared")
        alphabet = Alphabet(tuple(seen))
    return [Sequence.from_tokens(alphabet, b) for b in blocks], alphabet


def read_real_series(path: str) -> np.ndarray:
    if path == "-":
        vals = []
        for lineno, line in enumerate(sys.stdin, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                vals.append(float(line.split(",")[0]))
            except ValueError:
                raise DataError(f"stdin:{lineno}: not a number: {line!r}") from None
        if not vals:
            raise DataError("stdin: no numeric data")
        return np.asarray(vals)
    return ingest_csv(path)


def build_measure(args):
    if args.measure == "laplace":
        return Laplace(args.order)
    if args.measure == "kt":
        return Krichevsky(args.order)
    if args.measure == "mix":
        return KTMixture(max_order=args.max_order)
    if args.measure == "code":
        if args.compressor:
            return CodeMeasure(ExternalCompressor(args.compressor))
        return CodeMeasure(BuiltinCode())
    raise DataError(f"unknown measure {args.measure!r}")


def _emit(payload: dict, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    elif fmt == "csv":
        out.write("key,value\n")
        for k, v in payload.items():
            if isinstance(v, (list, tuple)):
                v = ";".join(str(u) for u in v)
            out.write(f"{k},{v}\n")
    else:
        for k, v in payload.items():
            out.write(f"{k}: {v}\n")


def cmd_estimate(args) -> int:
    samples, alphabet = read_symbol_blocks(args.file, args.alphabet)
    ms = diamond_concat(samples)
    measure = build_measure(args)
    payload = {
        "alphabet": "".join(alphabet.symbols) if all(len(s) == 1 for s in alphabet.symbols)
        else ",".join(alphabet.symbols),
        "samples": len(samples),
        "total_length": ms.total_length,
    }
    if args.measure == "code":
        seq = samples[0] if len(samples) == 1 else None
        if seq is None:
            raise DataError("code-based estimation is defined on a single sample")
        bits = measure.compressor.code_length(seq)
        payload["code_length_bits"] = bits
        payload["log2_weight"] = -bits
        payload["kraft_weight"] = 2.0 ** -bits
    else:
        log2p = measure.log2(ms)
        payload["log2_probability"] = log2p
        payload["probability"] = 2.0 ** log2p
        if args.measure == "mix" and not measure.exact_for(ms):
            payload["note"] = (
                f"approximate: orders >= {args.max_order} treated as uniform"
            )
    _emit(payload, args.format)
    return 0


def cmd_predict(args) -> int:
    if args.side_info:
        return _predict_side_info(args)
    token_mode = args.alphabet is not None and "," in args.alphabet
    blocks = read_token_blocks(args.file, token_mode)
    prim_blocks = read_token_blocks(args.priming, token_mode) if args.priming else []
    if args.alphabet is not None:
        alphabet = Alphabet.from_spec(args.alphabet)
    else:
        seen = sorted({t for b in prim_blocks + blocks for t in b})
        if not seen:
            raise DataError("no symbols found and no alphabet declared")
        alphabet = Alphabet(tuple(seen))
    observed = [Sequence.from_tokens(alphabet, b) for b in prim_blocks + blocks]
    ms = diamond_concat(observed)
    measure = build_measure(args)
    if args.measure == "code" and len(observed) > 1:
        raise DataError("code-based prediction works on a single sample "
                        "(no boundary-separated priming)")
    dist = measure.cond_dist(ms)
    payload = {alphabet.token(i): float(p) for i, p in enumerate(dist)}
    _emit({"next_symbol_distribution": payload} if args.format == "json" else payload,
          args.format)
    return 0


def _predict_side_info(args) -> int:
    if not args.given_y:
        raise DataError("--side-info needs --given-y")
    if args.file == "-":
        lines = [l.strip() for l in sys.stdin if l.strip()]
    else:
        try:
            lines = [l.strip() for l in open(args.file) if l.strip()]
        except OSError as e:
            raise DataError(f"cannot open {args.file}: {e}") from e
    pairs_tok = []
    for lineno, line in enumerate(lines, start=1):
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise DataError(f"{args.file}:{lineno}: expected 'x,y', got {line!r}")
        pairs_tok.append((parts[0], parts[1]))
    if args.alphabet:
        xa = Alphabet.from_spec(args.alphabet)
    else:
        xa = Alphabet(tuple(sorted({x for x, _ in pairs_tok})))
    ya = Alphabet(tuple(sorted({y for _, y in pairs_tok} | {args.given_y})))
    history = PairSequence(
        xa, ya, tuple((xa.index(x), ya.index(y)) for x, y in pairs_tok)
    )
    measure = build_measure(args)
    dist = side_info_predict(measure, history, ya.index(args.given_y))
    payload = {xa.token(i): float(p) for i, p in enumerate(dist)}
    _emit(payload, args.format)
    return 0


def _parse_interval(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise DataError(f"bad interval {text!r}, expected lo:hi") from None


def cmd_density(args) -> int:
    series = read_real_series(args.file)
    if args.interval:
        lo, hi = _parse_interval(args.interval)
    else:
        lo, hi = float(series.min()), float(series.max())
        pad = 1e-3 * (hi - lo if hi > lo else 1.0)
        lo, hi = lo - pad, hi + pad
    part = DyadicPartition(lo, hi)
    est = MixtureDensity(part, levels=args.levels, max_order=args.max_order,
                         clamp=args.clamp)
    log2d = est.log2_density(series)
    payload = {
        "n": int(series.size),
        "interval": f"{lo}:{hi}",
        "levels": args.levels,
        "max_order": args.max_order,
        "log2_density": log2d,
        "level_posterior": [float(b) for b in est.level_posterior(series)],
    }
    if args.predict:
        payload["predicted_next"] = est.predict_mean(series)
    _emit(payload, args.format)
    if args.plot:
        from .plots import save_density_figure

        save_density_figure(est, series, args.plot)
    return 0


def _process_spec(args) -> ProcessSpec:
    params = {}
    if args.process == "bernoulli":
        params["p"] = args.p
    elif args.process == "constant":
        params["value"] = args.value
    elif args.process == "four-mixture":
        params["lam"] = args.lam
        if getattr(args, "mix_functions", None):
            try:
                fns = json.loads(args.mix_functions)
                params["functions"] = tuple(tuple(float(v) for v in f) for f in fns)
            except (ValueError, TypeError):
                raise DataError(
                    "--mix-functions must be JSON like [[5,16,0],[7,5,0.628],...]"
                ) from None
    elif args.process == "sine":
        if args.phase is not None:
            params["phase"] = args.phase
    elif args.process == "markov":
        if not args.transition:
            raise DataError("markov process needs --transition JSON")
        try:
            params["transition"] = json.loads(args.transition)
        except ValueError:
            raise DataError("--transition must be a JSON matrix") from None
    elif args.process == "csv":
        if not args.csv:
            raise DataError("csv process needs --csv PATH")
        params["path"] = args.csv
        params["column"] = args.column
    return ProcessSpec(args.process, params, args.seed)


def cmd_simulate(args) -> int:
    spec = _process_spec(args)
    out = generate(spec, args.n)
    if isinstance(out, Sequence):
        text = out.text() + "\n"
        values = out.data.astype(float)
    else:
        text = "\n".join(f"{v:.12g}" for v in out) + "\n"
        values = out
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.plot:
        from .plots import save_series_figure

        save_series_figure(values, args.plot, title=args.process)
    return 0


def cmd_bench(args) -> int:
    spec = _process_spec(args)
    config = PredictorConfig(
        backend=args.backend,
        mode=args.mode,
        levels=args.levels,
        max_order=args.max_order,
        compressor=args.compressor,
    )
    lengths = [int(v) for v in str(args.n).split(",")]
    report = run_benchmark(spec, config, args.runs, lengths, seed=args.seed,
                           workers=args.workers)
    if args.format == "json":
        text = report.to_json()
    elif args.format == "md":
        text = report.to_markdown()
    else:
        text = report.to_csv()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.runs_log:
        with open(args.runs_log, "w") as fh:
            fh.write(report.runs_csv())
    if args.plot:
        from .plots import save_benchmark_figure

        save_benchmark_figure(report, args.plot)
    return 0


def _add_measure_options(p: argparse.ArgumentParser):
    p.add_argument("--measure", choices=["laplace", "kt", "mix", "code"], default="mix")
    p.add_argument("--order", type=int, default=0, help="Markov order for laplace/kt")
    p.add_argument("--max-order", type=int, default=None,
                   help="order cap for the mixture (default: exact)")
    p.add_argument("--alphabet", default=None,
                   help="symbol declaration, e.g. '01' or 'a,b,c' (default: inferred)")
    p.add_argument("--compressor", default=None,
                   help="external compressor command for --measure code")
    p.add_argument("--format", choices=["text", "json"], default="text")


def _add_process_options(p: argparse.ArgumentParser):
    p.add_argument("--process", required=True,
                   choices=["sine", "four-mixture", "bernoulli", "markov",
                            "constant", "csv"])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--p", type=float, default=0.5, help="bernoulli parameter")
    p.add_argument("--value", type=float, default=1.0, help="constant value")
    p.add_argument("--lam", type=float, default=0.1, help="segment length parameter")
    p.add_argument("--mix-functions", default=None,
                   help="JSON [[amp,period,phase],...] overriding the four defaults")
    p.add_argument("--phase", type=int, default=None, help="fix the sine phase")
    p.add_argument("--transition", default=None, help="JSON transition matrix")
    p.add_argument("--csv", default=None, help="csv file for the csv process")
    p.add_argument("--column", default=None, help="csv column (name or index)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktmix",
        description="Sequence probability estimation, prediction and "
                    "quantized density estimation for time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="probability of a (multi-)sample file")
    p.add_argument("file", help="symbol file ('-' for stdin); blank lines separate samples")
    _add_measure_options(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("predict", help="next-symbol distribution")
    p.add_argument("file", help="observed word ('-' for stdin)")
    p.add_argument("--priming", default=None,
                   help="file of earlier non-adjacent samples")
    p.add_argument("--side-info", action="store_true",
                   help="file holds 'x,y' pairs; predict x given --given-y")
    p.add_argument("--given-y", default=None, help="visible side-information symbol")
    _add_measure_options(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("density", help="real-valued density of a series")
    p.add_argument("file", help="csv or newline floats ('-' for stdin)")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--max-order", type=int, default=8)
    p.add_argument("--interval", default=None, help="lo:hi (default: data range padded)")
    p.add_argument("--clamp", action="store_true",
                   help="clip out-of-interval values instead of failing")
    p.add_argument("--predict", action="store_true", help="emit the predicted next value")
    p.add_argument("--plot", default=None, help="write a conditional-density figure")
    p.add_argument("--format", choices=["text", "json", "csv"], default="text")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simulate", help="generate a synthetic series")
    _add_process_options(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--plot", default=None, help="write a series figure")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="benchmark against the inertial baseline")
    _add_process_options(p)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--n", required=True, help="sample length(s), comma separated")
    p.add_argument("--mode", choices=["density-mean", "cell-mean", "cell-argmax"],
                   default="cell-argmax")
    p.add_argument("--backend", choices=["mix", "code"], default="mix")
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--max-order", type=int, default=8)
    p.add_argument("--compressor", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json", "md"], default="csv")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--runs-log", default=None, help="write the per-run log as csv")
    p.add_argument("--plot", default=None, help="write a report figure")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CompressorError as e:
        print(f"ktmix: compressor failure: {e}", file=sys.stderr)
        return 4
    except DataError as e:
        print(f"ktmix: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
