"""Set-associative LRU simulation of n private L1 caches in front of one shared L2.

The hierarchy is inclusive on fill: an L1 miss looks up the L2, an L2 miss
fills the L2, and the line is then installed in the requesting core's L1.
Writes allocate exactly like reads. There is no coherence traffic.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numba
import numpy as np

from .trace import Trace


class GeometryError(ValueError):
    pass


def _pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class CacheGeometry:
    capacity: int
    line_size: int = 64
    associativity: int = 8

    def __post_init__(self) -> None:
        for name in ("capacity", "line_size", "associativity"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not _pow2(int(v)):
                raise GeometryError(f"{name} must be a power of two, got {v!r}")
        if self.capacity % (self.line_size * self.associativity):
            raise GeometryError(
                f"capacity {self.capacity} not divisible by line_size*associativity "
                f"({self.line_size}*{self.associativity})")

    @property
    def lines(self) -> int:
        return self.capacity // self.line_size

    @property
    def sets(self) -> int:
        return self.lines // self.associativity

    @classmethod
    def fully_associative(cls, lines: int, line_size: int = 64) -> CacheGeometry:
        return cls(lines * line_size, line_size, lines)


@dataclass(frozen=True)
class CacheCounters:
    accesses: int
    hits: int
    misses: int

    @property
    def miss_rate(self) -> float:
        return self.misses / self.accesses if self.accesses else 0.0


@dataclass(frozen=True)
class SimStats:
    l1: tuple[CacheCounters, ...]
    l2: CacheCounters

    @property
    def n(self) -> int:
        return len(self.l1)

    @property
    def per_core_l1_miss_rate(self) -> list[float]:
        return [c.miss_rate for c in self.l1]

    @property
    def l1_accesses(self) -> int:
        return sum(c.accesses for c in self.l1)

    @property
    def l1_misses(self) -> int:
        return sum(c.misses for c in self.l1)

    @property
    def l1_miss_rate(self) -> float:
        """Aggregate over all cores: total L1 misses / total L1 accesses."""
        acc = self.l1_accesses
        return self.l1_misses / acc if acc else 0.0

    @property
    def l2_miss_rate(self) -> float:
        return self.l2.miss_rate

    def rows(self):
        for i, c in enumerate(self.l1):
            yield f"l1_{i}", c
        yield "l2", self.l2

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["cache_id", "accesses", "hits", "misses", "miss_rate"])
        for name, c in self.rows():
            out.writerow([name, c.accesses, c.hits, c.misses, repr(c.miss_rate)])
        return buf.getvalue()


def parse_stats_csv(text: str) -> SimStats:
    rows = list(csv.DictReader(io.StringIO(text)))
    l1, l2 = [], None
    for r in rows:
        c = CacheCounters(int(r["accesses"]), int(r["hits"]), int(r["misses"]))
        if r["cache_id"] == "l2":
            l2 = c
        else:
            l1.append(c)
    if l2 is None:
        raise ValueError("stats CSV has no l2 row")
    return SimStats(tuple(l1), l2)


@numba.njit(cache=True, nogil=True)
def _lookup(tags, fill, base, s, ways, blk):
    # Ways of set s live in tags[base + s*ways : ...], most recently used first.
    start = base + s * ways
    k = fill[s]
    for i in range(k):
        if tags[start + i] == blk:
            for j in range(i, 0, -1):
                tags[start + j] = tags[start + j - 1]
            tags[start] = blk
            return True
    if k < ways:
        fill[s] = k + 1
        k += 1
    for j in range(k - 1, 0, -1):
        tags[start + j] = tags[start + j - 1]
    tags[start] = blk
    return False


@numba.njit(cache=True, nogil=True)
def _run(cores, blocks1, blocks2, n, s1, w1, s2, w2):
    l1_tags = np.zeros(n * s1 * w1, dtype=np.uint64)
    l1_fill = np.zeros(n * s1, dtype=np.int64)
    l2_tags = np.zeros(s2 * w2, dtype=np.uint64)
    l2_fill = np.zeros(s2, dtype=np.int64)
    counts = np.zeros((n + 1, 3), dtype=np.int64)  # accesses, hits, misses
    m1 = np.uint64(s1 - 1)
    m2 = np.uint64(s2 - 1)
    for r in range(cores.shape[0]):
        c = cores[r]
        b1 = blocks1[r]
        set1 = np.int64(b1 & m1)
        counts[c, 0] += 1
        fill_view = l1_fill[c * s1:(c + 1) * s1]
        if _lookup(l1_tags, fill_view, c * s1 * w1, set1, w1, b1):
            counts[c, 1] += 1
            continue
        counts[c, 2] += 1
        b2 = blocks2[r]
        counts[n, 0] += 1
        if _lookup(l2_tags, l2_fill, 0, np.int64(b2 & m2), w2, b2):
            counts[n, 1] += 1
        else:
            counts[n, 2] += 1
    return counts


def simulate(trace: Trace, l1_geom: CacheGeometry, l2_geom: CacheGeometry, n: int | None = None) -> SimStats:
    """Replay ``trace`` in order and return per-cache hit/miss counters."""
    if n is None:
        n = trace.n
    if n != trace.n:
        raise ValueError(f"trace header declares {trace.n} cores, simulation asked for {n}")
    trace.validate()
    blocks1 = trace.address >> np.uint64(l1_geom.line_size.bit_length() - 1)
    blocks2 = trace.address >> np.uint64(l2_geom.line_size.bit_length() - 1)
    counts = _run(trace.core, blocks1, blocks2, n, l1_geom.sets, l1_geom.associativity,
                  l2_geom.sets, l2_geom.associativity)
    l1 = tuple(CacheCounters(*map(int, counts[c])) for c in range(n))
    stats = SimStats(l1, CacheCounters(*map(int, counts[n])))
    _check_conservation(stats)
    return stats


def _check_conservation(stats: SimStats) -> None:
    for name, c in stats.rows():
        if c.hits + c.misses != c.accesses:
            raise RuntimeError(f"{name}: hits + misses != accesses ({c})")
    if stats.l2.accesses != stats.l1_misses:
        raise RuntimeError("L2 accesses differ from the sum of L1 misses")
