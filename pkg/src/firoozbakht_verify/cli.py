"""Command-line entry point: ``prv <command> [options]``.

Exit status: 0 every asserted check Holds, 1 an asserted check Fails (the
record is printed), 2 Unresolved comparisons remain at --max-bits, 3 usage,
IO or checkpoint error.
"""

from __future__ import annotations

import argparse
import sys

from .checkpoint import CheckpointError
from .compare import DEFAULT_MAX_BITS
from .runner import (
    EXIT_HALTED,
    EXIT_USAGE,
    ROSSER_WHAT,
    RunConfig,
    RunHalted,
    UsageError,
    run,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; usage errors are 3 here
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--from", dest="n_from", type=int, default=None,
                        help="first index / argument")
    common.add_argument("--to", dest="n_to", type=int, default=None,
                        help="last index / argument (inclusive)")
    common.add_argument("--max-n", dest="n_to", type=int,
                        help="same as --to; for firoozbakht the largest prime index used")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--max-bits", type=int, default=DEFAULT_MAX_BITS,
                        help="precision cap of the interval ladder (power of two, 64..4096)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="report path (default: stdout)")
    common.add_argument("--checkpoint", default=None, help="checkpoint JSON path")
    common.add_argument("--resume", action="store_true",
                        help="continue from --checkpoint if it exists")
    common.add_argument("--sample", default="dense", help="dense or geo:RATIO")
    common.add_argument("--assert-from", type=int, default=None,
                        help="index from which failures count (default: --from)")
    common.add_argument("--stated-thresholds", action="store_true",
                        help="assert each check only from its stated validity threshold")
    common.add_argument("--chunk", type=int, default=4096, help=argparse.SUPPRESS)
    common.add_argument("--halt-after", type=int, default=None, help=argparse.SUPPRESS)

    p = _Parser(prog="prv", description="Desk-scale checks around p_n^(1/n) being decreasing.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("firoozbakht", parents=[common],
                   help="p_{n+1}^(1/(n+1)) < p_n^(1/n) for consecutive n")
    r = sub.add_parser("rosser", parents=[common], help="two-sided pi/theta/psi/p_n bounds")
    r.add_argument("--what", type=_csv_list, default=(),
                   help=f"comma list from {','.join(ROSSER_WHAT)} (default: all)")
    lm = sub.add_parser("lemmas", parents=[common], help="lemma checks")
    lm.add_argument("--id", "--ids", dest="ids", type=_csv_list, default=(),
                    help="lemma1_step1, lemma1_step2, lemma2, lemma3 (default: all)")
    iq = sub.add_parser("inequalities", parents=[common], help="the inequality catalog")
    iq.add_argument("--ids", type=_csv_list, default=(),
                    help="2.4,2.5,2.6,3.1,3.3,3.6,3.7,3.11,3.13,3.15,z (default: all)")
    iq.add_argument("--m-factor", type=int, default=3, help="m = factor * n for 2.6")
    g = sub.add_parser("gaps", parents=[common], help="Kourbatov inequality and Cramer ratios")
    g.add_argument("--b", default="1", help="Kourbatov constant, e.g. 1 or 1.17")
    sub.add_parser("all", parents=[common], help="every suite at its stated threshold")
    t = sub.add_parser("thresholds", parents=[common], help="empirical validity onsets")
    t.add_argument("--ids", type=_csv_list, default=(), help="check ids (default: all cheap ones)")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = dict(command=ns.command, n_from=ns.n_from, n_to=ns.n_to, threads=ns.threads,
                  max_bits=ns.max_bits, fmt=ns.fmt, out=ns.out, checkpoint=ns.checkpoint,
                  resume=ns.resume, sample=ns.sample, assert_from=ns.assert_from,
                  stated_thresholds=ns.stated_thresholds or ns.command == "all",
                  chunk=ns.chunk, halt_after=ns.halt_after)
    for name in ("what", "ids", "b", "m_factor"):
        if hasattr(ns, name):
            fields[name] = getattr(ns, name)
    return RunConfig(**fields)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(config_from_args(args)).exit_code
    except (UsageError, CheckpointError, OSError, ValueError) as e:
        print(f"prv: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RunHalted as e:
        print(f"prv: {e}", file=sys.stderr)
        return EXIT_HALTED
    except KeyboardInterrupt:
        print("prv: interrupted; checkpoint saved", file=sys.stderr)
        return EXIT_HALTED


if __name__ == "__main__":
    sys.exit(main())
