#!/usr/bin/env python3
"""Prime gap statistics: Cramer ratio maximum, its histogram and Kourbatov onsets.

    python3 scripts/gap_stats.py --n-max 1000000 --b 1 --b 117/100
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from fractions import Fraction

from firoozbakht_verify.classical import GapSummary, b_label, enc_hi, enc_lo, gap_statistics


@dataclass
class Config:
    n_max: int = 10**6
    bs: list[Fraction] = field(default_factory=lambda: [Fraction(1), Fraction(117, 100)])
    ratio_from: int = 5  # first gap index with a Cramer ratio below 1


def _report(s: GapSummary, ratio_from: int) -> None:
    print(f"b = {b_label(s.b)}: {s.count} gaps, onset k0 = {s.kourbatov_onset}, "
          f"failures {s.kourbatov_failures} at k = {s.failing_ks[:20]}")
    print(f"  max ratio g/(log p)^2 = [{float(enc_lo(s.max_ratio)):.6f}, "
          f"{float(enc_hi(s.max_ratio)):.6f}] at n = {s.max_ratio_n}")
    tail = gap_statistics(s.n_hi + 1, s.b, n_min=ratio_from)
    print(f"  from n = {ratio_from}: max ratio {float(enc_hi(tail.max_ratio)):.6f} "
          f"at n = {tail.max_ratio_n}")
    edges = GapSummary.bucket_edges()
    for lo, count in zip(edges, s.histogram):
        if count:
            print(f"  ratio >= {float(lo):4.2f}: {count}")


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=Config.n_max,
                   help="largest gap index k (gap p_{k+1} - p_k)")
    p.add_argument("--b", action="append", type=Fraction, default=None,
                   help="Kourbatov constant as a rational, repeatable")
    a = p.parse_args()
    cfg = Config(n_max=a.n_max, bs=a.b or Config().bs)
    for b in cfg.bs:
        t0 = time.perf_counter()
        s = gap_statistics(cfg.n_max + 1, b)
        _report(s, cfg.ratio_from)
        print(f"  {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
