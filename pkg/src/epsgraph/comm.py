"""Deterministic in-process communicator over N logical ranks.

Ranks execute bulk-synchronously: a compute phase, then a collective, with
a logical barrier per collective.  The collectives below are plain
functions over the per-rank contribution lists, so message contents depend
only on program inputs — never on scheduling.  Payloads must be treated as
immutable after send; numpy payload arrays are marked read-only.

Per-rank accounting (bytes, message counts, phase timers, algorithm
counters) lives in ``stats``; an optional JSON-lines trace records every
simulated point-to-point transfer as (round, src, dst, bytes, tag).
Self-deliveries are free: they move no bytes and emit no trace rows.
"""

from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .errors import CommError


def payload_nbytes(obj) -> int:
    """Deterministic serialized-size model for payloads."""
    if obj is None:
        return 0
    if isinstance(obj, np.ndarray):
        return obj.nbytes
    if isinstance(obj, bytes):
        return len(obj)
    if isinstance(obj, str):
        return len(obj.encode("utf-8"))
    if isinstance(obj, (bool, int, float, np.integer, np.floating)):
        return 8
    if isinstance(obj, dict):
        return sum(payload_nbytes(k) + payload_nbytes(v) for k, v in obj.items())
    if isinstance(obj, (list, tuple)):
        return sum(payload_nbytes(x) for x in obj)
    raise CommError(f"unsized payload type {type(obj).__name__}")


def _freeze(obj):
    if isinstance(obj, np.ndarray):
        obj.flags.writeable = False
    elif isinstance(obj, dict):
        for v in obj.values():
            _freeze(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _freeze(v)


@dataclass
class RankStats:
    bytes_sent: int = 0
    messages_sent: int = 0
    phase_seconds: dict = field(default_factory=dict)
    counters: dict = field(default_factory=dict)


class Communicator:
    """Simulated N-rank message fabric: ring shift, allgather, alltoallv."""

    def __init__(self, nranks: int, trace_path: str | None = None):
        if nranks < 1:
            raise CommError("need at least one rank")
        self.nranks = nranks
        self.stats = [RankStats() for _ in range(nranks)]
        self._round = 0
        self._trace = open(trace_path, "w") if trace_path else None

    def close(self):
        if self._trace:
            self._trace.close()
            self._trace = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _record(self, src: int, dst: int, obj, tag: str) -> None:
        if src == dst:
            return
        nb = payload_nbytes(obj)
        if nb == 0:
            return  # nothing crosses the wire
        self.stats[src].bytes_sent += nb
        self.stats[src].messages_sent += 1
        if self._trace:
            self._trace.write(json.dumps(
                {"round": self._round, "src": src, "dst": dst,
                 "bytes": nb, "tag": tag}) + "\n")

    def ring_shift(self, payloads, tag: str = "ring"):
        """Rank j receives what rank (j+1) mod N sent; identity for N=1."""
        n = self.nranks
        if len(payloads) != n:
            raise CommError(
                f"simulated deadlock: ring_shift got {len(payloads)} "
                f"contributions for {n} ranks")
        self._round += 1
        for j, p in enumerate(payloads):
            _freeze(p)
            self._record(j, (j - 1 + n) % n, p, tag)
        return [payloads[(j + 1) % n] for j in range(n)]

    def allgather(self, items, tag: str = "allgather"):
        """Every rank ends with the full item list in rank order."""
        n = self.nranks
        if len(items) != n:
            raise CommError(
                f"simulated deadlock: allgather got {len(items)} "
                f"contributions for {n} ranks")
        self._round += 1
        for j, it in enumerate(items):
            _freeze(it)
            for k in range(n):
                self._record(j, k, it, tag)
        return tuple(items)

    def alltoallv(self, send, tag: str = "alltoallv"):
        """recv[k][j] = send[j][k]; the receive matrix is the send transpose."""
        n = self.nranks
        if len(send) != n or any(len(row) != n for row in send):
            raise CommError("alltoallv needs an N x N send matrix")
        self._round += 1
        for j in range(n):
            for k in range(n):
                _freeze(send[j][k])
                self._record(j, k, send[j][k], tag)
        return [[send[j][k] for j in range(n)] for k in range(n)]

    @contextmanager
    def phase(self, rank: int, name: str):
        """Accumulate wall time for one rank's compute phase."""
        t0 = time.perf_counter()
        try:
            yield
        finally:
            dt = time.perf_counter() - t0
            ps = self.stats[rank].phase_seconds
            ps[name] = ps.get(name, 0.0) + dt

    def add_counter(self, rank: int, name: str, k: int = 1) -> None:
        c = self.stats[rank].counters
        c[name] = c.get(name, 0) + k

    def stats_dict(self) -> list[dict]:
        """Stats as plain dicts (for JSON reports)."""
        return [{"rank": j, "bytes_sent": s.bytes_sent,
                 "messages_sent": s.messages_sent,
                 "phase_seconds": dict(s.phase_seconds),
                 "counters": dict(s.counters)}
                for j, s in enumerate(self.stats)]
