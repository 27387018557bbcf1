"""Chunked, ordered, resumable execution of check suites."""

from __future__ import annotations

import hashlib
import json
import math
import multiprocessing as mp
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import classical as cl
from . import inequalities as iq
from .checkpoint import CHECKPOINT_VERSION, Checkpoint, CheckpointError, load_checkpoint, \
    save_checkpoint
from .compare import DEFAULT_MAX_BITS, Ordering, Verdict, exact_power_compare
from .interval import FLOAT_REL
from .primes import DEFAULT_INDEX_CAP, default_cache, nth_primes
from .report import FORMATS, ReportWriter, Row, Summary, row_from, row_from_gap, \
    rows_from_bound

EXIT_OK, EXIT_FAIL, EXIT_UNRESOLVED, EXIT_USAGE = 0, 1, 2, 3
EXIT_HALTED = 130

COMMANDS = ("firoozbakht", "rosser", "lemmas", "inequalities", "gaps", "all", "thresholds")
ROSSER_WHAT = ("pi", "theta", "psi", "pn")
LEMMA_IDS = ("lemma1_step1", "lemma1_step2", "lemma2", "lemma3")
INEQ_ALIASES = {
    "2.4": "ineq_2_4", "2.5": "ineq_2_5", "2.6": "ineq_2_6", "3.1": "ineq_3_1",
    "3.3": "ineq_3_3_term", "3.6": "ineq_3_6", "3.7": "ineq_3_7", "3.11": "ineq_3_11",
    "3.13": "ineq_3_13", "3.15": "ineq_3_15", "z": "z_monotone",
}
PER_TERM = ("ineq_3_3_term", "ineq_3_6")
TERM_SUITE_NS = (89, 500, 5000)
DEFAULT_TO = {"all": 10**4, "thresholds": 10**4}
# quadratic-cost checks are left out of default threshold scans
THRESHOLD_SKIP = ("ineq_3_3_term", "ineq_3_6")


class UsageError(ValueError):
    pass


class RunHalted(Exception):
    """Raised after ``halt_after`` indices, with the checkpoint saved."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    n_from: int | None = None
    n_to: int | None = None
    threads: int = 1
    max_bits: int = DEFAULT_MAX_BITS
    fmt: str = "csv"
    out: str | None = None
    checkpoint: str | None = None
    resume: bool = False
    sample: str = "dense"
    assert_from: int | None = None
    stated_thresholds: bool = False
    what: tuple[str, ...] = ()
    ids: tuple[str, ...] = ()
    b: str = "1"
    m_factor: int = 3
    chunk: int = 4096
    checkpoint_every_s: float = 10.0
    checkpoint_every_n: int = 100_000
    halt_after: int | None = None

    # fields that do not change the report
    _RUNTIME = ("threads", "checkpoint", "resume", "checkpoint_every_s", "checkpoint_every_n",
                "halt_after")

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if not (64 <= self.max_bits <= 4096 and self.max_bits & (self.max_bits - 1) == 0):
            raise UsageError("--max-bits must be a power of two in [64, 4096]")
        if self.fmt not in FORMATS:
            raise UsageError(f"--format must be one of {FORMATS}")
        if self.n_from is not None and self.n_to is not None and self.n_from > self.n_to:
            raise UsageError("--from must not exceed --to")
        if self.n_from is not None and self.n_from < 1:
            raise UsageError("--from must be >= 1")
        if self.chunk < 1 or self.m_factor < 2:
            raise UsageError("chunk must be >= 1 and m factor >= 2")
        if self.out:
            suffix = Path(self.out).suffix.lower()
            implied = {".csv": "csv", ".json": "json", ".jsonl": "json"}.get(suffix)
            if implied is not None and implied != self.fmt:
                raise UsageError(f"--out {self.out} implies {implied} output but --format is "
                                 f"{self.fmt}; one format per run")
        if (self.checkpoint or self.resume) and not self.out:
            raise UsageError("--checkpoint/--resume need --out")
        if self.resume and not self.checkpoint:
            raise UsageError("--resume needs --checkpoint")
        try:
            cl.sample_points(1, 1, self.sample)
            Fraction(self.b)
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(str(e)) from None

    def digest(self) -> str:
        d = {k: v for k, v in asdict(self).items() if k not in self._RUNTIME}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True)
class Stage:
    """One check over an index list; ``assert_from`` None means the check's own threshold."""

    check_id: str
    indices: Sequence[int]
    assert_from: int | None = None
    params: tuple = ()

    def max_prime_index(self) -> int:
        """Largest prime index the stage reads from the shared table (0 if none)."""
        if not len(self.indices):
            return 0
        top = max(self.indices[0], self.indices[-1])
        if self.check_id in ("firoozbakht", "lemma2") or self.check_id.startswith("kourbatov"):
            return top + 1
        if self.check_id in ("lemma3", "pn_bounds"):
            return top
        if self.check_id == "ineq_2_6":
            m = self.params[0] * top
            return m if m <= DEFAULT_INDEX_CAP else 0
        return 0

    def max_prime_value(self) -> int:
        if self.check_id in ("pi_bounds", "theta_bounds", "psi_bounds") and len(self.indices):
            return max(self.indices[0], self.indices[-1])
        return 0


# -- stage construction -----------------------------------------------------------


def _points(lo: int, hi: int, policy: str) -> Sequence[int]:
    if hi < lo:
        return range(0)
    return range(lo, hi + 1) if policy == "dense" else cl.sample_points(lo, hi, policy)


def _assert(cfg: RunConfig, lo: int) -> int | None:
    if cfg.stated_thresholds:
        return None
    return cfg.assert_from if cfg.assert_from is not None else lo


def _require_to(cfg: RunConfig) -> int:
    to = cfg.n_to if cfg.n_to is not None else DEFAULT_TO.get(cfg.command)
    if to is None:
        raise UsageError(f"{cfg.command} needs --to or --max-n")
    return to


def _resolve_ids(raw: Sequence[str], allowed: Sequence[str]) -> list[str]:
    out = []
    for tok in raw:
        cid = INEQ_ALIASES.get(tok, tok)
        if cid not in allowed:
            raise UsageError(f"unknown id {tok!r}; choose from {', '.join(allowed)}")
        out.append(cid)
    return out


def _ineq_stage(cfg: RunConfig, cid: str, lo: int, to: int, assert_from) -> Stage:
    lo = max(lo, iq.CATALOG[cid].min_n if cid in iq.CATALOG else iq.MIN_N_2_6)
    params = (cfg.m_factor,) if cid == "ineq_2_6" else ()
    return Stage(cid, _points(lo, to, cfg.sample), assert_from, params)


def build_stages(cfg: RunConfig) -> list[Stage]:
    cmd = cfg.command
    to = _require_to(cfg)
    if cmd == "firoozbakht":
        # --to is the last prime index; rows are the pairs (n, n+1) with n + 1 <= --to
        lo = cfg.n_from or 1
        af = 1 if cfg.stated_thresholds else _assert(cfg, lo)
        return [Stage("firoozbakht", range(lo, to), af)]
    if cmd == "rosser":
        what = _resolve_ids(cfg.what or ROSSER_WHAT, ROSSER_WHAT)
        lo = max(cfg.n_from or 2, 2)
        return [Stage(f"{w}_bounds", _points(lo, to, cfg.sample), _assert(cfg, lo)) for w in what]
    if cmd == "lemmas":
        ids = _resolve_ids(cfg.ids or LEMMA_IDS, LEMMA_IDS)
        stages = []
        for cid in ids:
            low = {"lemma1_step1": 1, "lemma1_step2": 2, "lemma2": 1, "lemma3": 2}[cid]
            lo = max(cfg.n_from or low, low)
            stages.append(Stage(cid, _points(lo, to, "dense" if cid == "lemma3" else cfg.sample),
                                _assert(cfg, lo)))
        return stages
    if cmd == "inequalities":
        ids = _resolve_ids(cfg.ids or list(INEQ_ALIASES), list(INEQ_ALIASES.values()))
        lo = cfg.n_from or 1
        return [_ineq_stage(cfg, cid, lo, to, _assert(cfg, max(lo, 1))) for cid in ids]
    if cmd == "gaps":
        lo = cfg.n_from or 1
        return [Stage(f"kourbatov_b{cl.b_label(Fraction(cfg.b))}", range(lo, to + 1),
                      cfg.assert_from, (cfg.b,))]
    if cmd == "thresholds":
        known = sorted(cl.load_all())
        ids = list(cfg.ids) or [c for c in known if c not in THRESHOLD_SKIP]
        ids = [INEQ_ALIASES.get(c, c) for c in ids]
        for c in ids:
            if c not in known:
                raise UsageError(f"unknown check id {c!r}; choose from {', '.join(known)}")
        return [Stage("thresholds", range(len(ids)), None, (tuple(ids), to))]
    # all: every suite at the stated thresholds
    sp = cfg.sample
    stages = [Stage("firoozbakht", range(1, to), 1)]
    stages += [Stage(f"{w}_bounds", _points(2, to, sp), None) for w in ROSSER_WHAT]
    stages += [Stage("lemma1_step1", _points(1, to, sp)), Stage("lemma1_step2", _points(2, to, sp)),
               Stage("lemma2", _points(1, to, sp)), Stage("lemma3", range(2, min(to, 2000) + 1))]
    for cid in INEQ_ALIASES.values():
        if cid in PER_TERM:
            stages.append(Stage(cid, tuple(v for v in TERM_SUITE_NS if v <= to)))
        else:
            stages.append(_ineq_stage(cfg, cid, 1, to, None))
    stages.append(Stage("kourbatov_b1", range(1, to + 1), None, ("1",)))
    return stages


# -- chunk evaluation (runs in workers) --------------------------------------------------


@dataclass
class ChunkResult:
    rows: list[Row]
    gaps: cl.GapSummary | None = None
    notes: dict = field(default_factory=dict)


def _float_enc(v: float) -> tuple[float, float]:
    return v * (1 - FLOAT_REL), v * (1 + FLOAT_REL)


def _lemma3_rows(ns: np.ndarray, asserted_from: int) -> list[Row]:
    table = default_cache.ensure_index(int(ns.max()))
    ps = table.slice(1, int(ns.max())).tolist()
    rows = []
    for mm in ns.tolist():
        pm = ps[mm - 1]
        equal = [nn for nn in range(1, mm)
                 if exact_power_compare(pm, mm, ps[nn - 1], nn) is Ordering.EQUAL]
        verdict = Verdict.FAILS if equal else Verdict.HOLDS
        a = _float_enc(math.log(pm) / mm)
        b = _float_enc(math.log(ps[mm - 2]) / (mm - 1))
        rec = iq.InequalityRecord("lemma3", mm, mm - 1, a, b, verdict, 0, mm >= asserted_from)
        rows.append(row_from(rec))
    return rows


def _rows(recs, af) -> list[Row]:
    return [row_from(r, None if af is None else r.n >= af) for r in recs]


def run_chunk(stage: Stage, idx: Sequence[int], max_bits: int) -> ChunkResult:
    cid, af = stage.check_id, stage.assert_from
    ns = np.asarray(idx, dtype=np.int64)
    if len(ns) == 0:
        return ChunkResult([])
    if cid == "firoozbakht":
        return ChunkResult(_rows(iq.firoozbakht_records(ns, max_bits=max_bits), af))
    if cid.endswith("_bounds"):
        subject = cid[: -len("_bounds")]
        recs = cl.RANGE_CHECKS[subject](ns, max_bits=max_bits)
        return ChunkResult([row for r in recs for row in
                            rows_from_bound(r, None if af is None else r.argument >= af)])
    if cid.startswith("kourbatov"):
        b = Fraction(stage.params[0])
        table = default_cache.ensure_index(int(ns.max()) + 1)
        ps = table.primes[ns - 1]
        gaps = (table.primes[ns] - ps).astype(np.int64)
        recs = cl.kourbatov_batch(ns, ps, gaps, b, max_bits)
        gs = cl.GapSummary(b)
        for r in recs:
            gs.add(r)
        rows = [row_from_gap(r, af is not None and r.n >= af) for r in recs]
        return ChunkResult(rows, gs)
    if cid == "lemma2":
        return ChunkResult(_rows(iq.lemma2_range(ns), af))
    if cid == "lemma3":
        return ChunkResult(_lemma3_rows(ns, 2 if af is None else af))
    if cid == "ineq_2_6":
        factor = stage.params[0]
        ms = factor * ns
        top = int(ms.max())
        if top <= DEFAULT_INDEX_CAP:
            table = default_cache.ensure_index(top)
            pns, pms = table.primes[ns - 1], table.primes[ms - 1]
        else:
            got = nth_primes(ns.tolist() + ms.tolist())
            pns = [got[v] for v in ns.tolist()]
            pms = [got[v] for v in ms.tolist()]
        recs = iq.ineq_2_6_batch(ns, ms, pns, pms, max_bits=max_bits, assert_from=af)
        return ChunkResult([row_from(r) for r in recs])
    if cid == "ineq_3_3_term":
        recs = [iq.check_binomial_term(v, k, max_bits, af)
                for v in ns.tolist() for k in range(1, v + 1)]
        return ChunkResult([row_from(r) for r in recs])
    if cid == "ineq_3_6":
        recs = [r for v in ns.tolist() for r in iq.ineq_3_6_terms(v, max_bits, af)]
        return ChunkResult([row_from(r) for r in recs])
    if cid == "z_monotone":
        rows = []
        for r in iq.z_records(ns, max_bits=max_bits, assert_from=af):
            v = iq.all_hold([r.verdict, Verdict(r.extras["positive"])])
            rows.append(replace(row_from(r), verdict=str(v)))
        return ChunkResult(rows)
    if cid == "thresholds":
        ids, to = stage.params
        return ChunkResult([_threshold_row(ids[k], to) for k in ns.tolist()])
    return ChunkResult([row_from(r) for r in
                        iq.check_range(cid, ns, max_bits=max_bits, assert_from=af)])


def _threshold_row(cid: str, to: int) -> Row:
    entry = cl.load_all()[cid]
    scan = cl.threshold_scan(cid, to)
    thr = entry.stated_threshold
    if scan.onset is None:
        verdict = Verdict.UNRESOLVED if scan.unresolved else Verdict.FAILS
    elif thr is None or scan.onset <= thr:
        verdict = Verdict.HOLDS
    else:
        verdict = Verdict.FAILS
    onset = "" if scan.onset is None else str(scan.onset)
    bound = "" if thr is None else str(thr)
    return Row(cid, scan.onset, thr, str(verdict), onset, onset, bound, bound, 0,
               thr is not None)


# -- coordinator -------------------------------------------------------------------------


def _chunks(stage: Stage, size: int) -> list[Sequence[int]]:
    idx = stage.indices
    if stage.check_id in PER_TERM:
        size = 1  # each index already expands to n rows
    return [idx[k: k + size] for k in range(0, len(idx), size)]


def _ordered(pool, stage: Stage, chunks, max_bits: int) -> Iterator[ChunkResult]:
    if pool is None:
        for c in chunks:
            yield run_chunk(stage, c, max_bits)
        return
    window = 2 * pool._max_workers
    pending = []
    it = iter(chunks)
    for c in it:
        pending.append(pool.submit(run_chunk, stage, c, max_bits))
        if len(pending) >= window:
            break
    while pending:
        res = pending.pop(0).result()
        nxt = next(it, None)
        if nxt is not None:
            pending.append(pool.submit(run_chunk, stage, nxt, max_bits))
        yield res


def _prepare_tables(stages: list[Stage]) -> None:
    """Build the shared prime table once, before workers fork."""
    top = max((s.max_prime_index() for s in stages), default=0)
    if top:
        default_cache.ensure_index(min(top, DEFAULT_INDEX_CAP))
    lim = max((s.max_prime_value() for s in stages), default=0)
    if lim:
        default_cache.ensure_limit(lim)


def _notes(cfg: RunConfig, stages: list[Stage]) -> dict:
    notes = {}
    covers = any(s.check_id == "firoozbakht" and len(s.indices)
                 and s.indices[-1] + 1 >= iq.ASSERT_LARGE for s in stages)
    if covers:
        notes["small_prime_bound"] = iq.small_prime_bound()
    return notes


@dataclass
class RunResult:
    exit_code: int
    summary: dict


def run(cfg: RunConfig, log=None) -> RunResult:
    """Execute ``cfg``; raises UsageError / CheckpointError / OSError / RunHalted."""
    log = log or sys.stderr
    cfg.validate()
    stages = build_stages(cfg)
    digest = cfg.digest()
    t0 = time.monotonic()
    state = None
    if cfg.resume and Path(cfg.checkpoint).exists():
        state = load_checkpoint(cfg.checkpoint, digest)
        if state.command != cfg.command:
            raise CheckpointError("checkpoint belongs to another command")
    if state is None:
        state = Checkpoint(CHECKPOINT_VERSION, cfg.command, digest, 0, 0, None, 0)
        summary = Summary(cfg.command)
    else:
        summary = Summary.from_state(state.summary)
    base_wall = state.wall_time_s

    if state.done:
        return _finish(cfg, summary, log)

    _prepare_tables(stages)
    if cfg.out:
        stream = open(cfg.out, "r+b" if state.output_offset else "wb")
        stream.seek(state.output_offset)
        stream.truncate()
        text = _ByteCounter(stream, state.output_offset)
    else:
        stream = None
        text = _ByteCounter(sys.stdout, 0)
    writer = ReportWriter(text, cfg.fmt)
    if state.output_offset == 0:
        writer.header()

    def checkpoint(done: bool = False) -> None:
        if stream is not None:
            stream.flush()
        state.output_offset = text.offset
        state.violations = summary.violations
        state.wall_time_s = base_wall + time.monotonic() - t0
        summary.wall_time_s = state.wall_time_s
        state.summary = asdict(summary)
        state.done = done
        if cfg.checkpoint:
            save_checkpoint(state, cfg.checkpoint)

    pool = None
    if cfg.threads > 1:
        pool = ProcessPoolExecutor(cfg.threads, mp_context=mp.get_context("fork"))
    processed = 0
    since_save, last_save = 0, time.monotonic()
    try:
        for s_idx in range(state.stage, len(stages)):
            stage = stages[s_idx]
            chunks = _chunks(stage, cfg.chunk)
            first = state.next_chunk if s_idx == state.stage else 0
            state.stage, state.next_chunk = s_idx, first
            for c, res in zip(chunks[first:], _ordered(pool, stage, chunks[first:], cfg.max_bits)):
                writer.write(res.rows)
                summary.add(res.rows)
                if res.gaps is not None:
                    summary.add_gaps(res.gaps)
                state.next_chunk += 1
                state.last_completed_n = int(c[-1])
                processed += len(c)
                since_save += len(c)
                if cfg.checkpoint and (since_save >= cfg.checkpoint_every_n
                                       or time.monotonic() - last_save >= cfg.checkpoint_every_s):
                    checkpoint()
                    since_save, last_save = 0, time.monotonic()
                if cfg.halt_after is not None and processed >= cfg.halt_after:
                    checkpoint()
                    raise RunHalted(f"halted after {processed} indices")
            state.stage, state.next_chunk = s_idx + 1, 0
        summary.notes.update(_notes(cfg, stages))
        checkpoint(done=True)
    except KeyboardInterrupt:
        checkpoint()
        raise
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
        if stream is not None:
            stream.close()
        else:
            sys.stdout.flush()
    return _finish(cfg, summary, log)


class _ByteCounter:
    """Text facade over a binary (or text) stream that tracks the byte offset."""

    def __init__(self, stream, offset: int):
        self.stream, self.offset = stream, offset
        self._binary = "b" in getattr(stream, "mode", "")

    def write(self, s: str) -> None:
        data = s.encode()
        self.offset += len(data)
        self.stream.write(data if self._binary else s)


def _finish(cfg: RunConfig, summary: Summary, log) -> RunResult:
    out = summary.finish()
    if cfg.out:
        Path(cfg.out + ".summary.json").write_text(json.dumps(out, indent=2, sort_keys=True)
                                                   + "\n")
    t = summary.totals
    print(f"{cfg.command}: {t['total']} records, {t['Holds']} Holds, {t['Fails']} Fails, "
          f"{t['Unresolved']} Unresolved; asserted {summary.asserted['total']}, "
          f"probes {summary.probes['total']}; {summary.wall_time_s:.1f} s", file=log)
    if summary.first_failure is not None:
        print(f"counterexample: {json.dumps(summary.first_failure)}", file=log)
        return RunResult(EXIT_FAIL, out)
    if t["Unresolved"]:
        return RunResult(EXIT_UNRESOLVED, out)
    return RunResult(EXIT_OK, out)
