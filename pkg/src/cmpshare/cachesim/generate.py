"""Synthetic multithreaded traces with a tunable share of producer/consumer data.

Layout of one generated trace:

* Every core runs the same private access pattern (an SPMD-style thread) in
  its own address range ``core * 2**40``. Block popularity within the private
  working set is Zipf-distributed with exponent ``zipf_s``.
* Each reference slot of a core is, with probability ``sharing_fraction``, a
  read of the current epoch's shared blocks instead of the next private
  reference. A core's ``j``-th shared read within an epoch hits shared block
  ``j mod shared_block_count``.
* An epoch spans ``epoch_length`` slots per core. When it opens, the producer
  core ``epoch mod n`` writes every shared block once. Shared blocks live at
  ``2**60 + (epoch * shared_block_count + block) * line_size``, so each epoch's
  blocks are new addresses: consumers meet them cold in L1 while the
  producer's writes have already placed them in L2.
* Slots are interleaved round-robin across cores; the producer burst precedes
  the epoch's first slot.

Randomness comes from numpy's PCG64 bit generator (128-bit LCG state with the
XSL-RR output function) seeded through ``SeedSequence(seed).spawn(2)``: child
0 drives the private stream, child 1 the per-core shared/private coin flips.
Uniform doubles are ``(next_uint64 >> 11) * 2**-53``; Zipf ranks are drawn by
inverse CDF (``searchsorted`` on the cumulative weights, right side).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .trace import Trace

PRIVATE_STRIDE = 1 << 40
SHARED_BASE = 1 << 60


class SharingSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SharingSpec:
    """Generator parameters.

    ``private_refs_per_core`` is the number of reference slots each core
    issues; with ``sharing_fraction = 0`` all of them are private. Producer
    writes are issued on top of these slots.
    """

    n: int = 8
    private_refs_per_core: int = 1_000_000
    sharing_fraction: float = 0.5
    private_working_set: int = 16384
    shared_block_count: int = 4096
    epoch_length: int = 1024
    zipf_s: float = 1.5
    seed: int = 1
    line_size: int = 64

    def __post_init__(self) -> None:
        if not 0.0 <= self.sharing_fraction <= 1.0:
            raise SharingSpecError(f"sharing_fraction must lie in [0, 1], got {self.sharing_fraction}")
        for name in ("n", "private_refs_per_core", "private_working_set",
                     "shared_block_count", "epoch_length", "line_size"):
            if int(getattr(self, name)) < 1:
                raise SharingSpecError(f"{name} must be positive, got {getattr(self, name)}")
        if self.zipf_s < 0:
            raise SharingSpecError(f"zipf_s must be >= 0, got {self.zipf_s}")
        if not 0 <= self.seed < 1 << 64:
            raise SharingSpecError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.line_size & (self.line_size - 1):
            raise SharingSpecError(f"line_size must be a power of two, got {self.line_size}")
        if self.private_working_set * self.line_size > PRIVATE_STRIDE:
            raise SharingSpecError("private working set overflows the per-core address range")

    def single_core(self) -> SharingSpec:
        """The one-core, no-sharing reference run with the same private stream."""
        return replace(self, n=1, sharing_fraction=0.0)


def _rngs(seed: int):
    private_ss, share_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(private_ss)), np.random.Generator(np.random.PCG64(share_ss))


def private_offsets(spec: SharingSpec) -> np.ndarray:
    """Block indices (within a core's range) of the private stream, ``private_refs_per_core`` long."""
    rng, _ = _rngs(spec.seed)
    weights = np.arange(1, spec.private_working_set + 1, dtype=np.float64) ** -spec.zipf_s
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    u = rng.random(spec.private_refs_per_core)
    return np.minimum(np.searchsorted(cdf, u, side="right"), spec.private_working_set - 1).astype(np.uint64)


def generate_trace(spec: SharingSpec) -> Trace:
    n, R, L, B = spec.n, spec.private_refs_per_core, spec.epoch_length, spec.shared_block_count
    line = np.uint64(spec.line_size)
    priv = private_offsets(spec)
    _, share_rng = _rngs(spec.seed)

    if spec.sharing_fraction > 0:
        # slot-major (R, n): row t holds every core's t-th slot
        shared = share_rng.random((n, R)).T < spec.sharing_fraction
    else:
        shared = np.zeros((R, n), dtype=bool)

    # k-th private slot of a core takes priv[k]
    priv_idx = np.cumsum(~shared, axis=0) - 1
    core_base = (np.arange(n, dtype=np.uint64) * np.uint64(PRIVATE_STRIDE))[None, :]
    addr = core_base + priv[np.clip(priv_idx, 0, None)] * line

    epoch = np.arange(R) // L
    if shared.any():
        # j-th shared slot of a core within its epoch reads block j mod B
        csum = np.cumsum(shared, axis=0)
        epoch_start = epoch * L
        before = np.where(epoch_start[:, None] > 0, csum[np.maximum(epoch_start - 1, 0)], 0)
        j = (csum - 1 - before) % B
        shared_addr = (np.uint64(SHARED_BASE)
                       + (epoch[:, None].astype(np.uint64) * np.uint64(B) + j.astype(np.uint64)) * line)
        addr = np.where(shared, shared_addr, addr)

    cores = np.broadcast_to(np.arange(n, dtype=np.int32), (R, n))
    slot_core, slot_addr = cores.reshape(-1), addr.reshape(-1)
    slot_write = np.zeros(R * n, dtype=bool)
    if not shared.any():
        return Trace(n, slot_core, slot_write, slot_addr)

    parts_c, parts_w, parts_a = [], [], []
    burst_blocks = np.arange(B, dtype=np.uint64)
    for e in range(int(epoch[-1]) + 1):
        producer = e % n
        parts_c.append(np.full(B, producer, dtype=np.int32))
        parts_w.append(np.ones(B, dtype=bool))
        parts_a.append(np.uint64(SHARED_BASE) + (np.uint64(e * B) + burst_blocks) * line)
        sl = slice(e * L * n, min((e + 1) * L, R) * n)
        parts_c.append(slot_core[sl])
        parts_w.append(slot_write[sl])
        parts_a.append(slot_addr[sl])
    return Trace(n, np.concatenate(parts_c), np.concatenate(parts_w), np.concatenate(parts_a))
