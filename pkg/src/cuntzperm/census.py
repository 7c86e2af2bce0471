"""Symmetry actions and the counting pipelines.

Work is split into units, each a block of permutations: either a slice of
all permutations of W_n^k in lexicographic order, or a slice of the fiber
over one labeled tuple.  Units return small count dictionaries; merging
sums them in unit-id order, so reports do not depend on worker count or
completion order.  An optional checkpoint file is an append-only JSON-lines
log of finished units that a rerun replays instead of recomputing.
"""

from __future__ import annotations

import json
import logging
import os
import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from math import factorial
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .batch import (check_d_rows, decide_b_rows, decide_d_rows, fixed_by_inner,
                    permutation_block)
from .shapes import relabel
from .trees import LabeledTuple, fiber_inverse_block, fiber_size, invert_rows, letter_perms
from .tuplesearch import OrbitRep, enumerate_tuples
from .words import DomainError, Shape, WordPerm, embed, shift_embed

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = 1
#: exhaustive scans enumerate all (n^k)! permutations
MAX_EXHAUSTIVE = 9
#: a confirming inverse search needs arrays of n^(m+k-1) entries
MAX_CONFIRM_WORDS = 1 << 22


class CensusError(RuntimeError):
    pass


class Interrupted(CensusError):
    """Raised when a run stops early on purpose (``stop_after``)."""


# symmetry

@dataclass(frozen=True)
class SymmetryElement:
    """Position permutation and vertex relabeling, both 0-based image tuples."""

    positions: tuple
    relabeling: tuple

    def __post_init__(self):
        for p in (self.positions, self.relabeling):
            if sorted(p) != list(range(len(p))):
                raise DomainError(f"{p} is not a permutation")

    def __mul__(self, other: "SymmetryElement") -> "SymmetryElement":
        return SymmetryElement(tuple(self.positions[i] for i in other.positions),
                               tuple(self.relabeling[i] for i in other.relabeling))

    def inverse(self) -> "SymmetryElement":
        return SymmetryElement(tuple(np.argsort(self.positions).tolist()),
                               tuple(np.argsort(self.relabeling).tolist()))

    @classmethod
    def identity(cls, n: int, m: int) -> "SymmetryElement":
        return cls(tuple(range(n)), tuple(range(m)))

    @classmethod
    def random(cls, n: int, m: int, rng: random.Random) -> "SymmetryElement":
        p, r = list(range(n)), list(range(m))
        rng.shuffle(p)
        rng.shuffle(r)
        return cls(tuple(p), tuple(r))


def act(g: SymmetryElement, tup: LabeledTuple) -> LabeledTuple:
    """Tree i of the result is rho o t_j o rho^-1 with j = pi^-1(i)."""
    if len(g.positions) != tup.n or len(g.relabeling) != tup.vertices:
        raise DomainError("symmetry element does not match the tuple size")
    src = np.argsort(g.positions)
    return LabeledTuple(tup.n, tup.k,
                        tuple(relabel(tup.trees[int(src[i])], g.relabeling) for i in range(tup.n)))


def inner_action(pi: WordPerm, sigma: WordPerm) -> WordPerm:
    """shift(pi) o sigma o embed(pi^-1): the inner automorphism of pi after sigma."""
    if pi.k != 1 or pi.n != sigma.n:
        raise DomainError("inner_action needs a letter permutation on the same alphabet")
    if sigma.k < 2:
        raise DomainError("inner_action needs k >= 2")
    return shift_embed(pi, 1, sigma.k) * sigma * embed(pi.inverse(), sigma.k)


def first_letter_relabeling(pi: WordPerm, k: int) -> tuple:
    """Vertex relabeling induced on (k-1)-words by pi on their first letter."""
    n = pi.n
    S = n ** (k - 1)
    r = np.arange(S)
    return tuple(int(x) for x in pi.images[r % n] + n * (r // n))


# per-block kernels

def _d_stats(sigs: np.ndarray, n: int, k: int, max_level: Optional[int], offset: int,
             bounds: Optional[np.ndarray] = None) -> dict:
    """Condition (d) statistics; ``offset`` shifts the row numbers of stragglers."""
    if bounds is None:
        bounds = decide_d_rows(sigs, n, k)
    pos = np.flatnonzero(bounds > 0)
    levels: Counter = Counter()
    stragglers = []
    unconfirmed = 0
    if pos.size:
        caps = bounds[pos].copy()
        if max_level is not None:
            caps = np.minimum(caps, max_level)
        # confirm by explicit inverse search where memory allows
        limit = int(np.log(MAX_CONFIRM_WORDS) / np.log(n)) - (k - 1)
        ok = caps <= limit
        unconfirmed = int((~ok).sum())
        if ok.any():
            rows = pos[ok]
            found, _ = check_d_rows(sigs[rows], n, k, caps[ok])
            for r, m, cap, bound in zip(rows, found, caps[ok], bounds[rows]):
                if m == 0:
                    if cap >= bound:
                        raise CensusError(f"row {offset + r}: no inverse by the certified level {bound}")
                    stragglers.append(int(offset + r))
                else:
                    levels[int(m)] += 1
    return dict(d=int(pos.size), levels={str(m): c for m, c in sorted(levels.items())},
                stragglers=stragglers, unconfirmed=unconfirmed)


def _free_count(sigs: np.ndarray, n: int, k: int, limit: int) -> tuple[int, int]:
    """(checked, free) over at most ``limit`` rows."""
    rows = sigs[:limit]
    if rows.shape[0] == 0:
        return 0, 0
    fixed = fixed_by_inner(rows, n, k, letter_perms(n))
    return int(rows.shape[0]), int((fixed == 1).sum())


def exhaustive_unit(n: int, k: int, start: int, stop: int, checks: Sequence[str],
                    max_level: Optional[int] = None, free_limit: int = 0) -> dict:
    sigs = permutation_block(n ** k, start, stop)
    b = decide_b_rows(sigs, n, k)
    out = dict(b=int(b.sum()))
    if "d" in checks:
        bounds = decide_d_rows(sigs, n, k)
        # (d) implies (b), always
        if ((bounds > 0) & ~b).any():
            raise CensusError("a (d)-permutation fails (b)")
        out.update(_d_stats(sigs, n, k, max_level, start, bounds))
        if free_limit and k >= 2:
            out["free_checked"], out["free"] = _free_count(sigs[bounds > 0], n, k, free_limit)
    return out


def fiber_unit(tuple_json: str, start: int, stop: int, max_level: Optional[int] = None,
               free_limit: int = 0) -> dict:
    tup = LabeledTuple.from_json(tuple_json)
    n, k = tup.n, tup.k
    sigs = invert_rows(fiber_inverse_block(tup, start, stop))
    bounds = decide_d_rows(sigs, n, k)
    out = _d_stats(sigs, n, k, max_level, start, bounds)
    if free_limit:
        out["free_checked"], out["free"] = _free_count(sigs[bounds > 0], n, k, free_limit)
    return out


# checkpointed execution

@dataclass
class Unit:
    uid: str
    fn: Callable
    args: tuple


class Checkpoint:
    """Append-only JSON-lines log; the first line is the run header."""

    def __init__(self, path: str, header: dict):
        self.path = path
        self.header = dict(header, format=CHECKPOINT_FORMAT)

    def load(self) -> dict:
        done: dict = {}
        if not os.path.exists(self.path):
            with open(self.path, "w") as f:
                f.write(json.dumps(self.header, sort_keys=True) + "\n")
            return done
        with open(self.path) as f:
            lines = f.read().split("\n")
        if not lines or not lines[0]:
            raise CensusError(f"{self.path}: missing header")
        if json.loads(lines[0]) != self.header:
            raise CensusError(f"{self.path}: header does not match this run")
        for ln in lines[1:]:
            if not ln:
                continue
            try:
                rec = json.loads(ln)
            except json.JSONDecodeError:
                # torn final write from an interrupted run
                log.warning("ignoring a partial checkpoint line")
                continue
            done[rec["unit"]] = rec["result"]
        return done

    def append(self, uid: str, result: dict):
        with open(self.path, "a") as f:
            f.write(json.dumps({"unit": uid, "result": result}, sort_keys=True) + "\n")
            f.flush()
            os.fsync(f.fileno())


def run_units(units: Sequence[Unit], jobs: int = 1, checkpoint: Optional[Checkpoint] = None,
              stop_after: Optional[int] = None) -> dict:
    """Run every unit once; returns uid -> result."""
    done = checkpoint.load() if checkpoint else {}
    todo = [u for u in units if u.uid not in done]
    log.info("%d units, %d already done", len(units), len(units) - len(todo))
    finished = 0

    def record(uid, res):
        nonlocal finished
        done[uid] = res
        if checkpoint:
            checkpoint.append(uid, res)
        finished += 1
        if stop_after is not None and finished >= stop_after and len(done) < len(units):
            raise Interrupted(f"stopped after {finished} units")

    if jobs <= 1 or len(todo) <= 1:
        for u in todo:
            record(u.uid, u.fn(*u.args))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {pool.submit(u.fn, *u.args): u.uid for u in todo}
            try:
                for fut in as_completed(futs):
                    record(futs[fut], fut.result())
            except BaseException:
                for f in futs:
                    f.cancel()
                raise
    return done


def _merge(results: Iterable[dict]) -> dict:
    total: dict = {}
    levels: Counter = Counter()
    stragglers: list = []
    for res in results:
        for key, val in res.items():
            if key == "levels":
                levels.update({int(m): c for m, c in val.items()})
            elif key == "stragglers":
                stragglers.extend(val)
            else:
                total[key] = total.get(key, 0) + val
    if levels:
        total["levels"] = {str(m): c for m, c in sorted(levels.items())}
    total["stragglers"] = stragglers
    return total


# reports

@dataclass
class CensusReport:
    n: int
    k: int
    mode: str
    b_count: Optional[int] = None
    d_count: Optional[int] = None
    outer: Optional[int] = None
    max_inverse_level: Optional[int] = None
    levels: dict = field(default_factory=dict)
    per_type: dict = field(default_factory=dict)
    orbits: list = field(default_factory=list)
    stragglers: list = field(default_factory=list)
    unconfirmed: int = 0
    freeness: Optional[dict] = None
    fixtures_diff: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def check(self):
        """Totals must equal the sums of their breakdowns."""
        if self.orbits:
            if self.b_count is not None and "b" in self.orbits[0]:
                assert self.b_count == sum(o["b"] for o in self.orbits)
            if self.d_count is not None and "d_count" in self.orbits[0]:
                assert self.d_count == sum(o["d_count"] for o in self.orbits)
        if self.per_type and self.b_count is not None:
            assert self.b_count == sum(v["b"] for v in self.per_type.values())
        if self.levels and self.d_count is not None and self.mode != "orbit-reps":
            assert sum(self.levels.values()) + len(self.stragglers) + self.unconfirmed == self.d_count
        return self

    def to_dict(self) -> dict:
        return {
            "shape": {"n": self.n, "k": self.k},
            "mode": self.mode,
            "totals": {"b": self.b_count, "d": self.d_count, "outer": self.outer},
            "max_inverse_level": self.max_inverse_level,
            "inverse_levels": self.levels,
            "per_type": self.per_type,
            "orbits": self.orbits,
            "stragglers": self.stragglers,
            "unconfirmed": self.unconfirmed,
            "freeness": self.freeness,
            "fixtures_diff": self.fixtures_diff,
            "config": self.config,
            "version": __version__,
        }

    def to_json(self) -> str:
        self.check()
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _blocks(total: int, block: int):
    for s in range(0, total, block):
        yield s, min(total, s + block)


def _apply_d(report: CensusReport, merged: dict):
    report.levels = merged.get("levels", {})
    report.stragglers = merged.get("stragglers", [])
    report.unconfirmed = merged.get("unconfirmed", 0)
    if report.levels:
        report.max_inverse_level = max(int(m) for m in report.levels)
    if "free_checked" in merged:
        report.freeness = {"checked": merged["free_checked"], "free": merged["free"]}


def census_exhaustive(n: int, k: int, checks: Sequence[str] = ("b", "d"),
                      max_level: Optional[int] = None, jobs: int = 1,
                      checkpoint: Optional[str] = None, block: int = 1 << 16,
                      free_limit: int = 1 << 30, stop_after: Optional[int] = None) -> CensusReport:
    """Scan every permutation of W_n^k."""
    Shape(n, k)
    size = n ** k
    if size > MAX_EXHAUSTIVE:
        raise DomainError(f"exhaustive scans need n^k <= {MAX_EXHAUSTIVE}")
    checks = tuple(sorted(set(checks)))
    total = factorial(size)
    units = [Unit(f"perm:{s:012d}", exhaustive_unit, (n, k, s, e, checks, max_level, free_limit))
             for s, e in _blocks(total, block)]
    config = dict(n=n, k=k, mode="exhaustive", checks=list(checks), max_level=max_level,
                  block=block)
    cp = Checkpoint(checkpoint, config) if checkpoint else None
    done = run_units(units, jobs, cp, stop_after)
    merged = _merge(done[u.uid] for u in units)
    rep = CensusReport(n, k, "exhaustive", b_count=merged["b"], config=config)
    if "d" in checks:
        rep.d_count = merged["d"]
        _apply_d(rep, merged)
    return rep.check()


def _type_key(rep: OrbitRep) -> str:
    return "".join(sorted(name.rstrip("0123456789") for name in rep.shapes))


def census_b(n: int, k: int, mode: str = "tuples", jobs: int = 1,
             checkpoint: Optional[str] = None) -> CensusReport:
    """Count permutations satisfying (b), exhaustively or from orbit representatives."""
    if mode == "exhaustive":
        return census_exhaustive(n, k, ("b",), jobs=jobs, checkpoint=checkpoint)
    if mode != "tuples":
        raise DomainError(f"unknown mode {mode!r}")
    if k < 2:
        raise DomainError("tuples mode needs k >= 2")
    reps = list(enumerate_tuples(n, k))
    fib = factorial(n) ** (n ** (k - 1))
    rep = CensusReport(n, k, "tuples", config=dict(n=n, k=k, mode="tuples"))
    per_type: dict = {}
    for r in reps:
        key = _type_key(r)
        slot = per_type.setdefault(key, {"representatives": 0, "labeled": 0, "b": 0,
                                         "shape_triples": set()})
        slot["representatives"] += 1
        slot["labeled"] += r.orbit_size
        slot["b"] += r.orbit_size * fib
        slot["shape_triples"].add(tuple(sorted(r.shapes)))
        rep.orbits.append(dict(rep=json.loads(r.tuple.to_json())["trees"], shapes=list(r.shapes),
                               size=r.orbit_size, s=r.s, fiber=fib, b=r.orbit_size * fib))
    for slot in per_type.values():
        slot["shape_triples"] = len(slot["shape_triples"])
    rep.per_type = dict(sorted(per_type.items()))
    rep.b_count = sum(o["b"] for o in rep.orbits)
    return rep.check()


def _mates(tup: LabeledTuple, count: int, seed: int) -> list[LabeledTuple]:
    rng = random.Random(seed)
    return [act(SymmetryElement.random(tup.n, tup.vertices, rng), tup) for _ in range(count)]


def fiber_d_counts(tuples: Sequence[LabeledTuple], max_level: Optional[int] = None,
                   jobs: int = 1, checkpoint: Optional[str] = None, block: int = 1 << 18,
                   free_limit: int = 0, stop_after: Optional[int] = None, tag: str = "",
                   span: Optional[int] = None) -> list[dict]:
    """Merged (d) statistics over the fiber of each tuple, in input order.

    ``span`` restricts every fiber to its first ``span`` indices.
    """
    units = []
    groups = []
    for i, tup in enumerate(tuples):
        if tup.k < 2:
            raise DomainError("fibers need k >= 2")
        text = tup.to_json()
        ids = []
        size = fiber_size(tup) if span is None else min(span, fiber_size(tup))
        for s, e in _blocks(size, block):
            uid = f"fiber:{i:06d}:{s:012d}"
            units.append(Unit(uid, fiber_unit, (text, s, e, max_level, free_limit)))
            ids.append(uid)
        groups.append(ids)
    config = dict(mode="fibers", tag=tag, max_level=max_level, block=block, span=span,
                  tuples=[t.to_json() for t in tuples])
    cp = Checkpoint(checkpoint, config) if checkpoint else None
    done = run_units(units, jobs, cp, stop_after)
    return [_merge(done[u] for u in ids) for ids in groups]


def census_d(n: int, k: int, scope: str = "orbit-reps",
             tuples: Optional[Sequence[LabeledTuple]] = None, max_level: Optional[int] = None,
             jobs: int = 1, checkpoint: Optional[str] = None, verify_mates: int = 1,
             seed: int = 0, block: int = 1 << 18, free_limit: int = 16,
             stop_after: Optional[int] = None, span: Optional[int] = None) -> CensusReport:
    """Count (d)-permutations.

    ``scope`` is ``all`` (every permutation, exhaustive shapes only),
    ``orbit-reps`` (one fiber per orbit, scaled by orbit size after checking
    ``verify_mates`` random orbit mates) or ``tuple-list`` (the given tuples).
    ``span`` limits each fiber to its first indices, for restricted test runs.
    """
    if scope == "all":
        return census_exhaustive(n, k, ("b", "d"), max_level, jobs, checkpoint,
                                 stop_after=stop_after)
    config = dict(n=n, k=k, mode=scope, max_level=max_level, verify_mates=verify_mates,
                  seed=seed, span=span)
    rep = CensusReport(n, k, scope, config=config)
    if scope == "tuple-list":
        if not tuples:
            raise DomainError("tuple-list scope needs tuples")
        stats = fiber_d_counts(tuples, max_level, jobs, checkpoint, block, free_limit,
                               stop_after, tag=scope, span=span)
        for tup, st in zip(tuples, stats):
            rep.orbits.append(dict(rep=json.loads(tup.to_json())["trees"], fiber=fiber_size(tup),
                                   d_count=st["d"], d_per_element=st["d"]))
        merged = _merge(stats)
    elif scope == "orbit-reps":
        reps = list(enumerate_tuples(n, k))
        work = [r.tuple for r in reps]
        owners = []
        for i, r in enumerate(reps):
            mates = _mates(r.tuple, verify_mates, seed + i)
            work.extend(mates)
            owners.extend([i] * len(mates))
        stats = fiber_d_counts(work, max_level, jobs, checkpoint, block, free_limit,
                               stop_after, tag=scope, span=span)
        for i, owner in enumerate(owners):
            got, want = stats[len(reps) + i]["d"], stats[owner]["d"]
            if got != want:
                raise CensusError(f"orbit {owner}: a mate has {got} (d)-members, the representative {want}")
        for r, st in zip(reps, stats):
            rep.orbits.append(dict(rep=json.loads(r.tuple.to_json())["trees"],
                                   shapes=list(r.shapes), size=r.orbit_size, s=r.s,
                                   fiber=fiber_size(r.tuple), d_per_element=st["d"],
                                   d_count=st["d"] * r.orbit_size))
        # the level histogram covers representatives' fibers only
        merged = _merge(stats[:len(reps)])
    else:
        raise DomainError(f"unknown scope {scope!r}")
    rep.d_count = sum(o["d_count"] for o in rep.orbits)
    _apply_d(rep, merged)
    return rep.check()


def outer_classes(report: CensusReport) -> int:
    """(d)-count divided by n!, after checking that the inner action was free."""
    if report.d_count is None:
        raise CensusError("report has no (d)-count")
    f = report.freeness
    if not f or f["checked"] == 0:
        raise CensusError("freeness of the inner action was not verified")
    if f["free"] != f["checked"]:
        raise CensusError(f"inner action has fixed points on {f['checked'] - f['free']} checked permutations")
    q, r = divmod(report.d_count, factorial(report.n))
    if r:
        raise CensusError("(d)-count is not a multiple of n!")
    report.outer = q
    return q
