"""Command-line front end: ``msac encode|decode|simulate|bench|analyze``.

Exit codes: 0 success, 2 usage, 3 bad input format or corrupt message,
4 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis, container
from . import describe as ds
from .align import NotSubsequence
from .seqcore import FormatError, read_bits, write_bits
from .simulate import SourceParams, generate

EXIT_OK, EXIT_USAGE, EXIT_FORMAT, EXIT_INTERNAL = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _params(args, **overrides) -> SourceParams:
    values = dict(n=args.n, p=args.p, q=args.q, d_x=args.dx, d_y=args.dy, seed=args.seed)
    values.update(overrides)
    try:
        return SourceParams(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _trials(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    return args.trials


def _print_description(m: container.Message, y) -> None:
    if m.mode == container.MODE_PURE:
        print("deletions per run, by extent:", container.decode_pure_description(m, y).as_tuples())
        return
    g = container.decode_general_description(m, y)
    print("extensions per run, by extent:", g.ins.extend_counts.as_tuples())
    print("break flags:", g.ins.break_flags.to_str())
    print("bursts:", [(slot, bits.to_str()) for slot, bits in g.ins.bursts])
    print("substitution mask:", g.sub.mask.to_str())
    print("deletions per run, by extent:", g.deletion.as_tuples())


def cmd_encode(args) -> int:
    x, y = read_bits(args.source), read_bits(args.side_info)
    m = container.encode(x, y, args.mode)
    Path(args.output).write_bytes(m.to_bytes())
    rate = m.payload_bits / len(y) if len(y) else float("inf") if m.payload_bits else 0.0
    print(f"mode={'pure' if m.mode == container.MODE_PURE else 'general'} "
          f"payload_bits={m.payload_bits} message_bytes={len(m)} rate={rate:.6f}")
    if args.verbose:
        _print_description(m, y)
    return EXIT_OK


def cmd_decode(args) -> int:
    data = Path(args.message).read_bytes()
    y = read_bits(args.side_info)
    x = container.decode(data, y)
    write_bits(args.output, x)
    print(f"decoded {len(x)} bits")
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params(args)
    inst = generate(params)
    prefix = args.prefix
    for name, seq in (("x", inst.x), ("y", inst.y), ("zx", inst.z_x), ("zy", inst.z_y),
                      ("dx", inst.d_xpat), ("dy", inst.d_ypat)):
        write_bits(f"{prefix}.{name}.bits", seq)
    Path(f"{prefix}.params").write_text(params.to_text())
    print(f"wrote {prefix}.{{x,y,zx,zy,dx,dy}}.bits and {prefix}.params "
          f"(len X = {len(inst.x)}, len Y = {len(inst.y)})")
    return EXIT_OK


def _parse_floats(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise UsageError("empty list")
    return values


def cmd_bench(args) -> int:
    trials = _trials(args)
    if args.n < 1:
        raise UsageError("--n must be positive")
    if args.which == "table1":
        d = _parse_floats(args.d)
        if len(d) != 1:
            raise UsageError("table1 takes a single --d")
        _params(args, d_x=d[0])
        reports = analysis.run_table1(trials, args.n, d[0], args.seed, args.workers)
    else:
        ds_ = _parse_floats(args.d)
        for d in ds_:
            _params(args, d_x=d)
        reports = analysis.run_sweep(ds_, trials, args.n, args.p, args.seed, args.workers)
    if args.format == "csv":
        sys.stdout.write(analysis.reports_to_csv(reports))
    else:
        sys.stdout.write(analysis.format_table(reports))
        if args.which == "sweep":
            for r in reports:
                d = r.params.d_x
                line = f"d={d:g} rate={r.mean_rate:.6f} h2(d)={analysis.h2(d):.6f}"
                if args.p == 0.5:
                    line += f" h2(d)-c*d={analysis.theoretical_rate_pure(d):.6f}"
                print(line)
            if len(reports) > 1:
                print(f"fitted c = {analysis.fit_c(reports):.4f} "
                      f"(theory {analysis.theoretical_c():.4f})")
    return EXIT_OK


def cmd_analyze(args) -> int:
    params = _params(args)
    trials = _trials(args)
    d = params.d_x
    print(f"c = {analysis.theoretical_c():.6f}")
    print(f"h2(d) = {analysis.h2(d):.6f}")
    if 0 < d < 0.5:
        print(f"h2(d) - c*d = {analysis.theoretical_rate_pure(d):.6f}")
    if params.pure_deletion:
        est = analysis.estimate_description_entropy(params, trials)
        print(f"plug-in H(V)/n = {est:.6f} ({trials} trials)")
        if params.n <= 12:
            print(f"exact H(X|Y)/n = {analysis.bruteforce_conditional_entropy(params):.6f}")
    report = analysis.evaluate(params, trials, ("msac",) if params.pure_deletion else ("no_si",))
    for c in report.codecs.values():
        print(f"{c.codec}: mean {c.mean_bits:.1f} bits, rate {c.rate:.6f} per Y bit")
    return EXIT_OK


def _add_params(p: argparse.ArgumentParser, n_default: int = 1000) -> None:
    p.add_argument("--n", type=int, default=n_default, help="length of Z_X")
    p.add_argument("--p", type=float, default=0.5, help="Bernoulli parameter of Z_X")
    p.add_argument("--q", type=float, default=0.0, help="BSC crossover probability")
    p.add_argument("--dx", type=float, default=0.0, help="deletion probability producing X")
    p.add_argument("--dy", type=float, default=0.0, help="deletion probability producing Y")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="msac", description="Compress bit sequences against edited side information.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode SOURCE given SIDE_INFO")
    p.add_argument("source")
    p.add_argument("side_info")
    p.add_argument("output")
    p.add_argument("--mode", choices=("auto", "pure", "general"), default="auto")
    p.add_argument("--verbose", "-v", action="store_true", help="print the decoded description")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="recover the source from MESSAGE and SIDE_INFO")
    p.add_argument("message")
    p.add_argument("side_info")
    p.add_argument("output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="sample one instance of the source model")
    p.add_argument("prefix")
    _add_params(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="rate benchmarks")
    p.add_argument("which", choices=("table1", "sweep"))
    _add_params(p, n_default=10**6)
    p.add_argument("--d", default=None, help="deletion probability, or a comma list for sweep")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("analyze", help="theoretical rates and entropy estimates for one parameter set")
    _add_params(p)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench" and args.d is None:
        args.d = "0.01" if args.which == "table1" else "0.005,0.01,0.02"
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"msac: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except container.CorruptionError as exc:
        print(f"msac: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (FormatError, NotSubsequence, ds.DescriptionError) as exc:
        print(f"msac: invalid input: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"msac: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - reported, not expected
        print(f"msac: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
