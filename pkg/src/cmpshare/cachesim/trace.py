"""In-memory memory-reference traces and the line-oriented ``CMPTRACE`` text format.

File layout::

    CMPTRACE 1 <n>
    <core> <R|W> <hex-address>
    ...

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = "CMPTRACE"
VERSION = "1"


class TraceError(ValueError):
    """Malformed trace input. ``index`` is the record index, ``line`` the 1-based file line."""

    def __init__(self, msg: str, index: int | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if index is not None:
            where.append(f"record {index}")
        super().__init__(f"{msg} ({', '.join(where)})" if where else msg)
        self.index = index
        self.line = line


@dataclass(eq=False)
class Trace:
    n: int
    core: np.ndarray      # int32
    is_write: np.ndarray  # bool
    address: np.ndarray   # uint64

    def __post_init__(self) -> None:
        self.core = np.ascontiguousarray(self.core, dtype=np.int32)
        self.is_write = np.ascontiguousarray(self.is_write, dtype=np.bool_)
        self.address = np.ascontiguousarray(self.address, dtype=np.uint64)
        if self.n < 1:
            raise TraceError(f"trace header needs n >= 1, got {self.n}")
        if not (len(self.core) == len(self.is_write) == len(self.address)):
            raise TraceError("trace columns differ in length")

    def __len__(self) -> int:
        return len(self.core)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.core, other.core)
                and np.array_equal(self.is_write, other.is_write)
                and np.array_equal(self.address, other.address))

    @classmethod
    def from_records(cls, n: int, records) -> Trace:
        """Build from ``(core, op, address)`` tuples, ``op`` being ``"R"`` or ``"W"``."""
        records = list(records)
        core = np.array([r[0] for r in records], dtype=np.int64)
        ops = [r[1] for r in records]
        for i, op in enumerate(ops):
            if op not in ("R", "W"):
                raise TraceError(f"bad op {op!r}", index=i)
        addr = np.array([r[2] for r in records], dtype=np.uint64)
        return cls(n, core, np.array([op == "W" for op in ops], dtype=bool), addr)

    def validate(self) -> None:
        bad = np.flatnonzero((self.core < 0) | (self.core >= self.n))
        if bad.size:
            i = int(bad[0])
            raise TraceError(f"core {int(self.core[i])} out of range for n={self.n}", index=i)

    def records(self):
        for c, w, a in zip(self.core.tolist(), self.is_write.tolist(), self.address.tolist()):
            yield c, "W" if w else "R", a


def write_trace(trace: Trace, dest) -> None:
    """Write ``trace`` to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_records(trace, dest)
        return
    with open(dest, "w", encoding="ascii", newline="\n") as fh:
        _write_records(trace, fh)


def _write_records(trace: Trace, fh) -> None:
    fh.write(f"{MAGIC} {VERSION} {trace.n}\n")
    ops = np.where(trace.is_write, "W", "R")
    chunk = 1 << 16
    for start in range(0, len(trace), chunk):
        sl = slice(start, start + chunk)
        fh.writelines(
            f"{c} {o} {a:x}\n"
            for c, o, a in zip(trace.core[sl].tolist(), ops[sl].tolist(), trace.address[sl].tolist())
        )


def read_trace(path) -> Trace:
    """Parse a trace file. A file with no header and no records is an empty 1-core trace."""
    path = Path(path)
    n = None
    cores, writes, addrs = [], [], []
    with open(path, encoding="ascii", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 3 or parts[0] != MAGIC:
                    raise TraceError(f"expected header '{MAGIC} {VERSION} <n>', got {line!r}", line=lineno)
                if parts[1] != VERSION:
                    raise TraceError(f"unsupported trace version {parts[1]!r}", line=lineno)
                try:
                    n = int(parts[2])
                except ValueError:
                    raise TraceError(f"bad core count {parts[2]!r}", line=lineno) from None
                if n < 1:
                    raise TraceError(f"core count must be >= 1, got {n}", line=lineno)
                continue
            idx = len(cores)
            if len(parts) != 3:
                raise TraceError(f"expected '<core> <R|W> <hex-address>', got {line!r}", index=idx, line=lineno)
            c, op, a = parts
            try:
                core = int(c)
                addr = int(a, 16)
            except ValueError:
                raise TraceError(f"bad record {line!r}", index=idx, line=lineno) from None
            if op not in ("R", "W"):
                raise TraceError(f"bad op {op!r}", index=idx, line=lineno)
            if not 0 <= core < n:
                raise TraceError(f"core {core} out of range for n={n}", index=idx, line=lineno)
            if not 0 <= addr < 1 << 64:
                raise TraceError(f"address {a} does not fit in 64 bits", index=idx, line=lineno)
            cores.append(core)
            writes.append(op == "W")
            addrs.append(addr)
    return Trace(n if n is not None else 1, np.array(cores, dtype=np.int32),
                 np.array(writes, dtype=bool), np.array(addrs, dtype=np.uint64))
