"""Command-line entry point: ``tplab <subcommand> [options]``.

Exit status is 0 on success, 2 on bad parameters, and 1 when ``--strict``
is given and a statistical comparison fails.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds, harness
from .bitstring import BitString
from .channel import TearConfig, read_dump, read_truth, shuffle, tear, unconstrained_tear, write_dump
from .debruijn import generate
from .oracle_decoder import AmbiguityError, Codebook, NoMatchError, tiling_decode
from .pilot_codec import DEFAULT_DELTA, code_to_dict, decode, encode, load_code, make_code, save_code

DEFAULT_SEED = 20200610


def default_seed() -> int:
    env = os.environ.get("TPLAB_SEED")
    return int(env) if env else DEFAULT_SEED


def _floats(text: str) -> list[float]:
    """``0.1,0.5,2`` or an inclusive range ``start:stop:step``."""
    if ":" in text:
        a, b, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return [round(a + i * step, 12) for i in range(count)]
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _estimates_out(estimates, args) -> int:
    text = harness.to_json(estimates) if args.format == "json" else harness.to_csv(estimates)
    _emit(text, args.out)
    for e in estimates:
        print(e.line(), file=sys.stderr)
    if args.strict and any(e.passed is False for e in estimates):
        return 1
    return 0


def _resolve_p(args, n: int) -> float:
    if args.p is not None:
        return args.p
    if args.alpha is not None:
        return args.alpha / math.log2(n)
    raise ValueError("give --p or --alpha")


def cmd_bounds(args) -> int:
    rows = [bounds.bound_set(a, args.L or (), args.beta or (), args.gamma or ()) for a in args.alpha]
    if args.format == "csv":
        flat = []
        for bs in rows:
            row = {"alpha": bs.alpha, "capacity": bs.capacity, "det_capacity": bs.det_capacity,
                   "interleave_rate": bs.interleave_rate, "beta_star": bs.beta_star}
            row.update({f"converse_L{k}": v for k, v in bs.converse.items()})
            row.update({f"coverage_A_{k}": v for k, v in bs.coverage_A.items()})
            row.update({f"coverage_expect_{k}": v for k, v in bs.coverage_expect.items()})
            flat.append(row)
        _emit(harness.table_to_csv(flat), args.out)
    else:
        payload = [bs.to_dict() for bs in rows]
        _emit(json.dumps(payload[0] if len(payload) == 1 else payload, indent=2), args.out)
    return 0


def cmd_sweep(args) -> int:
    rows = harness.sweep(args.kind, args.grid, alpha=args.alpha, L=args.L, n=args.n,
                         mc_trials=args.trials, gamma=args.gamma, seed=args.seed, workers=args.workers)
    text = json.dumps(rows, indent=2) if args.format == "json" else harness.table_to_csv(rows)
    _emit(text, args.out)
    return 0


def _channel_input(args, rng_seed: int) -> BitString:
    if args.input is not None:
        return BitString(args.input)
    if args.input_file is not None:
        return BitString(Path(args.input_file).read_text())
    if args.code is not None:
        code = load_code(args.code)
        if args.message is not None:
            u = args.message
        else:
            u = np.random.default_rng([rng_seed, 1]).integers(0, code.M, size=code.m - 1).tolist()
        return encode(code, u)
    if args.n is None:
        raise ValueError("tear needs --input, --input-file, --code or --n")
    return BitString.random(args.n, np.random.default_rng([rng_seed, 2]))


def cmd_tear(args) -> int:
    if args.truth and not args.out:
        raise ValueError("--truth needs --out")
    x = _channel_input(args, args.seed)
    n = len(x)
    if args.n is not None and args.n != n:
        raise ValueError(f"--n {args.n} disagrees with input length {n}")
    cfg = TearConfig(n, _resolve_p(args, n), args.seed)
    fs = (unconstrained_tear if args.unconstrained else tear)(x, cfg)
    if not args.no_shuffle:
        fs = shuffle(fs, [args.seed, 3])
    if args.out:
        write_dump(args.out, fs, cfg.p, cfg.seed, truth_path=args.truth)
    else:
        sys.stdout.write(f"n={fs.n} p={cfg.p!r} seed={cfg.seed}\n")
        sys.stdout.write("".join(f"{f}\n" for f in fs.fragments))
    return 0


def cmd_make_code(args) -> int:
    code = make_code(args.n, args.m, args.delta, args.M, args.seed)
    if args.out:
        save_code(code, args.out)
    else:
        _emit(json.dumps(code_to_dict(code), indent=2), None)
    print(f"k_p={code.k_p} k_f={code.k_f} N_min={code.N_min} rejections={code.rejections} "
          f"rate={code.rate:.6g}", file=sys.stderr)
    return 0


def cmd_encode(args) -> int:
    code = load_code(args.code)
    if args.message is None:
        raise ValueError("encode needs --message")
    x = encode(code, args.message)
    _emit(json.dumps({"message": list(args.message), "codeword": str(x)}, indent=2), args.out)
    return 0


def cmd_decode(args) -> int:
    code = load_code(args.code)
    fs, meta = read_dump(args.fragments)
    if fs.n != code.n:
        raise ValueError(f"dump has n={fs.n} but the code has n={code.n}")
    rep = decode(code, fs)
    if args.truth:
        truth = read_truth(args.truth)
        rep.misalignments = sum(1 for a in rep.alignments if a.start != truth[a.fragment][0])
    _emit(json.dumps(rep.to_dict(), indent=2), args.out)
    return 0


def cmd_oracle(args) -> int:
    if args.codebook or args.fragments:
        if not (args.codebook and args.fragments):
            raise ValueError("tiling decode needs both --codebook and --fragments")
        words = [BitString(line) for line in Path(args.codebook).read_text().split() if line]
        cb = Codebook(words)
        fs, _ = read_dump(args.fragments)
        try:
            result = {"status": "decoded", "index": tiling_decode(cb, fs, args.gamma)}
        except AmbiguityError as exc:
            result = {"status": "ambiguous", "matches": exc.matches}
        except NoMatchError:
            result = {"status": "no_match"}
        _emit(json.dumps(result, indent=2), args.out)
        return 0
    if args.n is None or args.rate is None or args.alpha is None:
        raise ValueError("oracle experiment needs --n, --rate and --alpha")
    est = harness.oracle_experiment(args.n, args.rate, args.alpha, args.gamma, args.trials,
                                    seed=args.seed, workers=args.workers, samples=args.samples)
    return _estimates_out(est, args)


def cmd_verify_lemmas(args) -> int:
    est = harness.verify_lemmas(args.n, args.alpha, args.trials, seed=args.seed, workers=args.workers)
    return _estimates_out(est, args)


def cmd_codec_exp(args) -> int:
    if args.code:
        code = load_code(args.code)
    else:
        code = make_code(args.n, args.m, args.delta, args.M, args.code_seed)
    est = harness.codec_experiment(code, _resolve_p(args, code.n), args.trials,
                                   seed=args.seed, workers=args.workers)
    return _estimates_out(est, args)


def cmd_pilot(args) -> int:
    _emit(str(generate(args.order).seq), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tplab", description="Torn-paper channel toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(fmt="json"):
        # fresh parents per subcommand: argparse shares parent actions, so
        # per-subcommand defaults would otherwise leak across subcommands
        c = argparse.ArgumentParser(add_help=False)
        c.add_argument("--seed", type=int, default=default_seed())
        c.add_argument("--out", help="write output here instead of stdout")
        c.add_argument("--format", choices=("csv", "json"), default=fmt)
        return c

    def runs():
        r = argparse.ArgumentParser(add_help=False)
        r.add_argument("--trials", type=int, default=100)
        r.add_argument("--workers", type=int, default=1)
        r.add_argument("--strict", action="store_true", help="exit 1 if any comparison fails")
        return r

    p = sub.add_parser("bounds", parents=[common()], help="closed-form rates and bounds")
    p.add_argument("--alpha", type=_floats, required=True)
    p.add_argument("--L", type=_ints)
    p.add_argument("--beta", type=_floats)
    p.add_argument("--gamma", type=_floats)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", parents=[common("csv")], help="analytic sweep over alpha, beta or L")
    p.add_argument("--kind", choices=("alpha", "beta", "L"), required=True)
    p.add_argument("--grid", type=_floats, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=0, help="Monte Carlo trials per point (alpha sweep)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tear", parents=[common()], help="tear and shuffle one input into a fragment dump")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="input as a 0/1 string")
    src.add_argument("--input-file")
    src.add_argument("--code", help="code file; tears an encoded message")
    p.add_argument("--message", type=_ints)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--unconstrained", action="store_true")
    p.add_argument("--no-shuffle", action="store_true")
    p.add_argument("--truth", help="sidecar file for ground-truth intervals (needs --out)")
    p.set_defaults(func=cmd_tear)

    p = sub.add_parser("make-code", parents=[common()], help="build a pilot-interleaved code file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--M", type=int, default=16)
    p.set_defaults(func=cmd_make_code)

    p = sub.add_parser("encode", parents=[common()], help="encode an index tuple")
    p.add_argument("--code", required=True)
    p.add_argument("--message", type=_ints)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common()], help="decode a fragment dump")
    p.add_argument("--code", required=True)
    p.add_argument("--fragments", required=True)
    p.add_argument("--truth", help="optional truth sidecar to count misalignments")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("oracle", parents=[common("csv"), runs()], help="tiling decoder or its experiment")
    p.add_argument("--codebook", help="one codeword per line")
    p.add_argument("--fragments")
    p.add_argument("--n", type=int)
    p.add_argument("--rate", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=64, help="estimator draws for huge codebooks")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify-lemmas", parents=[common("csv"), runs()], help="fragment statistics vs limits")
    p.add_argument("--n", type=int, default=1 << 20)
    p.add_argument("--alpha", type=float, default=1.0)
    p.set_defaults(func=cmd_verify_lemmas)

    p = sub.add_parser("codec-exp", parents=[common("csv"), runs()], help="pilot codec Monte Carlo")
    p.add_argument("--code")
    p.add_argument("--n", type=int, default=1 << 16)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--M", type=int, default=16)
    p.add_argument("--code-seed", type=int, default=0)
    p.add_argument("--p", type=float)
    p.add_argument("--alpha", type=float)
    p.set_defaults(func=cmd_codec_exp)

    p = sub.add_parser("pilot", parents=[common()], help="print the de Bruijn pilot of an order")
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_pilot)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors (2) and --help (0)
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"tplab {args.command}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
