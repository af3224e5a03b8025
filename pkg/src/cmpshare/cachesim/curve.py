"""L1 miss rate against L1 size, multicore with sharing versus a one-core reference."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .generate import SharingSpec, generate_trace
from .sim import CacheGeometry, simulate


@dataclass(frozen=True)
class CurvePoint:
    l1_bytes: int
    mr_multicore: float
    mr_singlecore: float


def miss_curve(spec: SharingSpec, l1_sizes: Sequence[int], l2_geom: CacheGeometry,
               l1_assoc: int = 8, workers: int = 1) -> list[CurvePoint]:
    """Aggregate L1 miss rate of the ``spec.n``-core trace and of its one-core reference, per size.

    Both traces are generated once and replayed at every size. Sizes may be
    simulated concurrently; each run is independent so the result is not
    affected by scheduling.
    """
    sizes = [int(s) for s in l1_sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("l1_sizes must be strictly increasing")
    geoms = [CacheGeometry(s, spec.line_size, min(l1_assoc, s // spec.line_size)) for s in sizes]
    multi = generate_trace(spec)
    single = generate_trace(spec.single_core())

    def run(geom):
        return CurvePoint(geom.capacity,
                          simulate(multi, geom, l2_geom).l1_miss_rate,
                          simulate(single, geom, l2_geom).l1_miss_rate)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, geoms))
    return [run(g) for g in geoms]
