"""Protocol registry: id -> builder, agent-count support, query ceiling."""

from __future__ import annotations

from typing import Callable, NamedTuple

from fairdiv.model import (
    Allocation,
    ContractViolation,
    Instance,
    LineArrangement,
    ValuationOracle,
    build_oracles,
)
from fairdiv.machine import ProtocolMachine, RunResult, run_machine
from fairdiv.protocols import (
    contiguous_any,
    envy_cycle,
    identical3,
    size_dominant,
    three_additive,
    two_agent,
)

__all__ = [
    "REGISTRY",
    "ProtocolInfo",
    "make_machine",
    "run",
    "run_instance",
    "replay",
    "ceiling_for",
    "allocation_json",
]


class ProtocolInfo(NamedTuple):
    id: str
    build: Callable  # (n, m, line, seed, options) -> generator
    supports_n: Callable[[int], bool]
    ceiling: Callable | None  # (n, m, **options) -> int
    identical: bool  # True when only agent 0 is ever queried
    required_options: tuple[str, ...] = ()


REGISTRY: dict[str, ProtocolInfo] = {}


def _register(info: ProtocolInfo) -> None:
    REGISTRY[info.id] = info


_register(ProtocolInfo(
    id="two_agent_ef1",
    build=two_agent.steps,
    supports_n=lambda n: n == 2,
    ceiling=two_agent.ceiling,
    identical=False,
))
_register(ProtocolInfo(
    id="three_identical_contiguous_ef1",
    build=identical3.steps,
    supports_n=lambda n: n == 3,
    ceiling=identical3.ceiling,
    identical=True,
))
_register(ProtocolInfo(
    id="separate_designated_goods",
    build=identical3.separate_steps,
    supports_n=lambda n: n == 3,
    ceiling=identical3.separate_ceiling,
    identical=True,
    required_options=("designated",),
))
_register(ProtocolInfo(
    id="three_additive_ef1",
    build=three_additive.steps,
    supports_n=lambda n: n == 3,
    ceiling=three_additive.ceiling,
    identical=False,
))
_register(ProtocolInfo(
    id="envy_cycle_elimination",
    build=envy_cycle.steps,
    supports_n=lambda n: n >= 1,
    ceiling=envy_cycle.ceiling,
    identical=False,
))
_register(ProtocolInfo(
    id="envy_cycle_batched",
    build=envy_cycle.batched_steps,
    supports_n=lambda n: n >= 1,
    ceiling=envy_cycle.batched_ceiling,
    identical=False,
))
_register(ProtocolInfo(
    id="size_dominant_n2",
    build=size_dominant.steps,
    supports_n=lambda n: n >= 1,
    ceiling=size_dominant.ceiling,
    identical=False,
))
_register(ProtocolInfo(
    id="contiguous_identical_monotonic",
    build=contiguous_any.steps,
    supports_n=lambda n: n >= 1,
    ceiling=contiguous_any.ceiling,
    identical=True,
    required_options=("K",),
))


def _info(protocol: str) -> ProtocolInfo:
    try:
        return REGISTRY[protocol]
    except KeyError:
        raise ContractViolation(f"unknown protocol {protocol!r}") from None


def make_machine(protocol: str, n: int, m: int, *, line: LineArrangement | None = None,
                 seed: int = 0, **options) -> ProtocolMachine:
    info = _info(protocol)
    if not info.supports_n(n):
        raise ContractViolation(f"{protocol} does not support n={n}")
    for name in info.required_options:
        if name not in options:
            raise ContractViolation(f"{protocol} requires the {name!r} option")
    if line is None:
        line = LineArrangement.identity(m)
    if line.m != m:
        raise ContractViolation("line length disagrees with m")
    gen = info.build(n, m, line, seed, options)
    return ProtocolMachine(protocol, n, m, gen, tie_break_seed=seed)


def run(protocol: str, oracles: list[ValuationOracle], *, n: int | None = None,
        line: LineArrangement | None = None, seed: int = 0, **options) -> RunResult:
    """Drive a protocol against counted oracles.

    ``n`` defaults to the oracle count; identical-valuation protocols that
    query only agent 0 may be given a single oracle and an explicit n.
    """
    if not oracles:
        raise ContractViolation("need at least one oracle")
    m = oracles[0].m
    machine = make_machine(protocol, n if n is not None else len(oracles), m,
                           line=line, seed=seed, **options)
    return run_machine(machine, oracles)


def run_instance(protocol: str, instance: Instance, *, n: int | None = None,
                 line: LineArrangement | None = None, seed: int = 0, **options) -> RunResult:
    return run(protocol, build_oracles(instance), n=n, line=line, seed=seed, **options)


def replay(protocol: str, n: int, m: int, answers, *, line: LineArrangement | None = None,
           seed: int = 0, **options) -> ProtocolMachine:
    """Rebuild a finished machine from its answer log alone."""
    machine = make_machine(protocol, n, m, line=line, seed=seed, **options)
    machine.start()
    for value in answers:
        if machine.pending is None:
            raise ContractViolation("more answers than queries in replay")
        machine.answer(value)
    if not machine.done:
        raise ContractViolation("answer log ended before the protocol finished")
    return machine


def ceiling_for(protocol: str, n: int, m: int, **options) -> int | None:
    info = _info(protocol)
    return None if info.ceiling is None else info.ceiling(n, m, **options)


def allocation_json(result: RunResult, query_log_ref: str = "") -> dict:
    return {
        "bundles": result.allocation.as_index_lists(),
        "queries": result.queries,
        "query_log_ref": query_log_ref,
        "protocol": result.protocol,
        "tie_break_seed": result.tie_break_seed,
    }
