"""Resumable protocol machines and the query-side binary search primitives.

A protocol is written as a generator that yields :class:`Query` requests and
receives exact values back via ``send``; it returns the final
:class:`~fairdiv.model.Allocation` (optionally with a metadata dict).
:class:`ProtocolMachine` wraps such a generator so a caller -- an in-memory
driver, a test harness, or the HTTP gateway -- can advance it one answer at
a time and replay it later from the recorded answers alone.
"""

from __future__ import annotations

from typing import Callable, Generator, Iterable, NamedTuple

from fairdiv.model import (
    Allocation,
    Bundle,
    ContractViolation,
    MonotonicityViolation,
    Value,
    ValuationOracle,
    as_value,
)

__all__ = [
    "Query",
    "ProtocolMachine",
    "RunResult",
    "Memo",
    "leftmost_true",
    "rightmost_true",
    "ceil_log2",
]


class Query(NamedTuple):
    agent: int
    bundle: Bundle


def ceil_log2(m: int) -> int:
    """Smallest t with 2**t >= m; 0 for m <= 1."""
    return (m - 1).bit_length() if m > 1 else 0


class ProtocolMachine:
    """Drives one protocol run: exactly one of ``pending``/``result`` is set
    once started, every answer advances deterministically, and feeding the
    same answer sequence reproduces the same queries and allocation.
    """

    def __init__(self, protocol: str, n: int, m: int, generator: Generator, *, tie_break_seed: int = 0):
        self.protocol = protocol
        self.n = n
        self.m = m
        self.tie_break_seed = tie_break_seed
        self._gen = generator
        self._started = False
        self.pending: Query | None = None
        self.result: Allocation | None = None
        self.meta: dict = {}
        self.answers: list[Value] = []
        self.asked: list[Query] = []

    @property
    def done(self) -> bool:
        return self.result is not None

    @property
    def queries_emitted(self) -> int:
        return len(self.asked)

    def start(self) -> "ProtocolMachine":
        if self._started:
            raise ContractViolation("machine already started")
        self._started = True
        self._advance(None)
        return self

    def answer(self, value: Value) -> "ProtocolMachine":
        if not self._started:
            raise ContractViolation("machine not started")
        if self.pending is None:
            raise ContractViolation("no pending query to answer")
        value = as_value(value)
        if value < 0:
            raise ContractViolation("values are nonnegative")
        self.answers.append(value)
        self._advance(value)
        return self

    def _advance(self, value: Value | None) -> None:
        try:
            if value is None:
                nxt = next(self._gen)
            else:
                nxt = self._gen.send(value)
        except StopIteration as stop:
            self.pending = None
            out = stop.value
            if isinstance(out, tuple):
                self.result, self.meta = out
            else:
                self.result = out
            if not isinstance(self.result, Allocation):
                raise ContractViolation("protocol did not return an allocation") from None
            return
        if not isinstance(nxt, Query):
            raise ContractViolation("protocol yielded something that is not a Query")
        self.pending = nxt
        self.asked.append(nxt)


class RunResult(NamedTuple):
    allocation: Allocation
    queries: int
    protocol: str
    tie_break_seed: int
    machine: ProtocolMachine
    per_agent: tuple[int, ...]


def run_machine(machine: ProtocolMachine, oracles: list[ValuationOracle]) -> RunResult:
    """Answer the machine's queries from counted oracles until it finishes."""
    machine.start()
    while machine.pending is not None:
        agent, bundle = machine.pending
        machine.answer(oracles[agent].query(bundle))
    per_agent = tuple(o.query_count for o in oracles)
    return RunResult(
        allocation=machine.result,
        queries=sum(per_agent),
        protocol=machine.protocol,
        tie_break_seed=machine.tie_break_seed,
        machine=machine,
        per_agent=per_agent,
    )


class Memo:
    """Per-run answer cache so a protocol never pays twice for one bundle.

    Empty bundles are answered 0 without a query (values map the empty set
    to 0 by definition).  Every cache miss costs exactly one counted query.
    """

    def __init__(self):
        self._seen: dict = {}

    def ask(self, agent: int, bundle: Bundle):
        if len(bundle) == 0:
            return 0
        key = (agent, bundle.key())
        if key in self._seen:
            return self._seen[key]
        value = yield Query(agent, bundle)
        self._seen[key] = value
        return value


# ---------------------------------------------------------------------------
# Binary search over positions, with query-issuing predicates.
#
# Predicates are sub-generators (they may yield queries); callers invoke
# these helpers with ``yield from``.  Over an unknown range of R positions
# at most ceil(log2(R + 1)) predicate evaluations are issued -- callers that
# know an endpoint in advance search the remaining range and default.


def leftmost_true(lo: int, hi: int, pred: Callable[[int], Iterable], *, debug: bool = False):
    """First position in [lo, hi) where the upward-closed predicate holds, else None."""
    a, b = lo, hi
    while a < b:
        mid = (a + b) // 2
        ok = yield from pred(mid)
        if ok:
            b = mid
        else:
            a = mid + 1
    found = a if a < hi else None
    if debug and hi > lo:
        low_ok = yield from pred(lo)
        high_ok = yield from pred(hi - 1)
        if (found is None and (low_ok or high_ok)) or (
            found is not None and ((found > lo and low_ok) or not high_ok)
        ):
            raise MonotonicityViolation("predicate is not upward-closed on this range")
    return found


def rightmost_true(lo: int, hi: int, pred: Callable[[int], Iterable], *, debug: bool = False):
    """Last position in [lo, hi) where the downward-closed predicate holds, else None."""
    a, b = lo, hi
    while a < b:
        mid = (a + b) // 2
        ok = yield from pred(mid)
        if ok:
            a = mid + 1
        else:
            b = mid
    found = a - 1 if a > lo else None
    if debug and hi > lo:
        low_ok = yield from pred(lo)
        high_ok = yield from pred(hi - 1)
        if (found is None and (low_ok or high_ok)) or (
            found is not None and (not low_ok or (found < hi - 1 and high_ok))
        ):
            raise MonotonicityViolation("predicate is not downward-closed on this range")
    return found
