#!/usr/bin/env python3
"""Desk-scale sweep: prime-root monotonicity, classical bounds and the inequality catalog.

Prints one line per experiment and writes a JSON summary.

    python3 scripts/desk_scale.py --n-max 1000000 --out desk_scale.json
"""

from __future__ import annotations

import argparse
import json
import time
from dataclasses import asdict, dataclass

from firoozbakht_verify.classical import find_validity_threshold
from firoozbakht_verify.inequalities import (
    binomial_term_suite,
    check_range,
    compute_term_factors,
    geometric_samples,
    ineq_2_6_samples,
    lemma2_summary,
    small_prime_bound,
    verify_firoozbakht_range,
)


@dataclass
class Config:
    n_max: int = 10**6
    sample_top: int = 10**7
    samples: int = 60
    term_ns: tuple[int, ...] = (89, 500, 5000)
    onset_max: int = 10**4
    out: str | None = None


ONSET_IDS = ("pn_bounds", "pi_bounds", "theta_bounds", "psi_bounds", "lemma1_step1",
             "lemma1_step2", "ineq_2_4", "ineq_2_5", "ineq_2_6", "ineq_3_1", "ineq_3_7",
             "ineq_3_11", "ineq_3_13", "ineq_3_15", "kourbatov_b1")


def _timed(label: str, fn):
    t0 = time.perf_counter()
    value = fn()
    print(f"{label:<32} {time.perf_counter() - t0:7.2f} s  {value}")
    return value


def run(cfg: Config) -> dict:
    out: dict = {"config": asdict(cfg)}

    rep = _timed("prime roots", lambda: verify_firoozbakht_range(1, cfg.n_max))
    out["firoozbakht"] = {"checked": rep.checked, "violations": rep.violations,
                          "levels": dict(rep.levels)}

    s = _timed("p_n <= 2^n", lambda: lemma2_summary(cfg.n_max))
    out["lemma2"] = asdict(s)

    out["small_prime_bound"] = _timed("p_195340 bound", small_prime_bound)
    out["X_89"] = _timed("X(89) lower end", lambda: float(compute_term_factors(89, 2).X.lo))

    ns = geometric_samples(195340, cfg.sample_top, cfg.samples)

    def sampled_holds() -> dict:
        counts = {cid: sum(r.verdict == "Holds" for r in check_range(cid, ns))
                  for cid in ("ineq_2_4", "ineq_2_5", "ineq_3_13", "ineq_3_15")}
        counts["ineq_2_6"] = sum(r.verdict == "Holds" for r in ineq_2_6_samples(ns))
        return counts

    sampled = _timed(f"sampled large n ({len(ns)} points)", sampled_holds)
    out["sampled"] = {"points": len(ns), "holds": sampled}

    terms = {}
    for nv in cfg.term_ns:
        r = _timed(f"binomial terms n={nv}", lambda nv=nv: binomial_term_suite(nv).holds)
        terms[nv] = r
    out["binomial_terms"] = terms

    onsets = {}
    for cid in ONSET_IDS:
        onsets[cid] = _timed(f"onset {cid}", lambda cid=cid: find_validity_threshold(
            cid, cfg.onset_max))
    out["onsets"] = onsets
    return out


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n-max", type=int, default=Config.n_max)
    p.add_argument("--sample-top", type=int, default=Config.sample_top)
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--onset-max", type=int, default=Config.onset_max)
    p.add_argument("--out", default=None)
    a = p.parse_args()
    cfg = Config(n_max=a.n_max, sample_top=a.sample_top, samples=a.samples,
                 onset_max=a.onset_max, out=a.out)
    result = run(cfg)
    if cfg.out:
        with open(cfg.out, "w") as f:
            json.dump(result, f, indent=2, default=str)
            f.write("\n")


if __name__ == "__main__":
    main()
