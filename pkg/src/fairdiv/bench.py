"""Instance generation and query-count benchmarking.

Benchmarks double as correctness tests: every run re-verifies EF1
before recording, and the recorded bound_ratio divides the measured
query count by the protocol's explicit ceiling, so ratios at most 1 are
the pass criterion wherever a ceiling is stated.
"""

from __future__ import annotations

import csv
import io
import random
import statistics
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from fairdiv.model import (
    AdditiveValuation,
    BinaryValuation,
    ContractViolation,
    Instance,
    KValuedValuation,
    SizeDominantValuation,
    Valuation,
    format_rational,
)
from fairdiv.audit import is_ef1
from fairdiv.protocols import REGISTRY, ceiling_for, run_instance

__all__ = [
    "FAMILIES",
    "ExperimentConfig",
    "RunRecord",
    "generate_instance",
    "run_experiment",
    "records_csv",
    "summarize",
    "backend_comparison",
]

FAMILIES = (
    "additive-uniform",
    "additive-zipf",
    "binary-sparse",
    "size-dominant",
    "kvalued",
    "identical-int",
)

# Which instance families satisfy each protocol's valuation-class
# precondition.  Identical-agent protocols get only the shared-weights
# family; the batched variant needs a small value alphabet.
_ALL = frozenset(FAMILIES)
PAIRINGS: dict[str, frozenset] = {
    "two_agent_ef1": _ALL,
    "three_identical_contiguous_ef1": frozenset({"identical-int"}),
    "three_additive_ef1": frozenset({"additive-uniform", "additive-zipf",
                                     "binary-sparse", "identical-int"}),
    "envy_cycle_elimination": _ALL,
    "envy_cycle_batched": frozenset({"kvalued", "binary-sparse"}),
    "size_dominant_n2": frozenset({"size-dominant"}),
    "contiguous_identical_monotonic": frozenset({"identical-int"}),
}

# Families whose tables are exponential in m stay at desk scale.
_TABLE_FAMILIES = frozenset({"size-dominant"})
_TABLE_LIMIT = 16


def _rng(family: str, m: int, n: int, seed: int, agent: int | None = None) -> random.Random:
    tag = f"{family}|{m}|{n}|{seed}" if agent is None else f"{family}|{m}|{n}|{seed}|{agent}"
    return random.Random(tag)


def _uniform_weights(rng: random.Random, m: int) -> list[int]:
    return [rng.randint(0, 1000) for _ in range(m)]


def _zipf_weights(rng: random.Random, m: int) -> list[int]:
    ranks = list(range(1, m + 1))
    rng.shuffle(ranks)
    return [1000 // r for r in ranks]


def _spread_units(rng: random.Random, m: int, units: int) -> list[int]:
    w = [0] * m
    for _ in range(units):
        w[rng.randrange(m)] += 1
    return w


def generate_instance(family: str, m: int, n: int, seed: int, **params) -> Instance:
    """A reproducible instance of the named family; same seed, same instance."""
    if family not in FAMILIES:
        raise ContractViolation(f"unknown instance family {family!r}")
    if m < 0 or n < 1:
        raise ContractViolation("need m >= 0 goods and n >= 1 agents")
    if family in _TABLE_FAMILIES and m > _TABLE_LIMIT:
        raise ContractViolation(f"{family} enumerates subsets; capped at m <= {_TABLE_LIMIT}")

    vals: list[Valuation] = []
    if family == "additive-uniform":
        for a in range(n):
            vals.append(AdditiveValuation(_uniform_weights(_rng(family, m, n, seed, a), m)))
    elif family == "additive-zipf":
        for a in range(n):
            vals.append(AdditiveValuation(_zipf_weights(_rng(family, m, n, seed, a), m)))
    elif family == "binary-sparse":
        ones = int(params.get("ones", 2))
        paired = bool(params.get("paired", True))
        if not 0 <= ones <= m:
            raise ContractViolation("ones must lie in 0..m")
        for a in range(n):
            draw = a // 2 if paired else a
            rng = _rng(family, m, n, seed, draw if paired else a)
            vals.append(BinaryValuation(m, rng.sample(range(m), ones)))
    elif family == "size-dominant":
        for a in range(n):
            rng = _rng(family, m, n, seed, a)
            vals.append(SizeDominantValuation(10 * max(m, 1), [rng.randrange(10) for _ in range(m)]))
    elif family == "kvalued":
        k = int(params.get("k", 4))
        for a in range(n):
            inner = AdditiveValuation(_uniform_weights(_rng(family, m, n, seed, a), m))
            vals.append(KValuedValuation(k, inner))
    elif family == "identical-int":
        K = int(params.get("K", 100))
        shared = AdditiveValuation(_spread_units(_rng(family, m, n, seed), m, K))
        vals = [shared] * n
    return Instance(vals)


@dataclass
class ExperimentConfig:
    protocol: str
    family: str
    m_schedule: Sequence[int]
    n: int
    seeds: Sequence[int]
    out: str | None = None
    params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.protocol not in REGISTRY:
            raise ContractViolation(f"unknown protocol {self.protocol!r}")
        allowed = PAIRINGS.get(self.protocol)
        if allowed is None:
            raise ContractViolation(f"{self.protocol} is not benchable; drive it directly")
        if self.family not in allowed:
            raise ContractViolation(
                f"{self.family} does not satisfy {self.protocol}'s valuation class; "
                f"allowed: {sorted(allowed)}")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        schedule = obj.get("m_schedule", obj.get("m", []))
        cfg = cls(
            protocol=obj["protocol"],
            family=obj["family"],
            m_schedule=[int(x) for x in schedule],
            n=int(obj.get("n", 2)),
            seeds=[int(s) for s in obj.get("seeds", [0])],
            out=obj.get("out"),
            params={k: v for k, v in obj.items()
                    if k not in ("protocol", "family", "m", "m_schedule", "n", "seeds", "out")},
        )
        cfg.validate()
        return cfg


@dataclass
class RunRecord:
    protocol: str
    m: int
    n: int
    seed: int
    queries: int
    bound_ratio: Fraction
    ef1: bool
    wall_ms: float

    def sort_key(self):
        return (self.protocol, self.m, self.n, self.seed)


def _protocol_options(cfg: ExperimentConfig, instance: Instance) -> dict:
    opts: dict = {}
    if cfg.protocol == "contiguous_identical_monotonic":
        # the protocol's K is the value ceiling, which for shared integer
        # weights is exactly the whole-line total
        opts["K"] = sum(instance.valuations[0].weights)
    elif cfg.protocol == "envy_cycle_batched":
        if cfg.family == "kvalued":
            opts["k"] = int(cfg.params.get("k", 4))
        else:
            opts["k"] = int(cfg.params.get("ones", 2)) + 1
    return opts


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """One record per (m, seed), EF1 re-verified, sorted, CSV emitted."""
    config.validate()
    records: list[RunRecord] = []
    for m in config.m_schedule:
        for seed in config.seeds:
            instance = generate_instance(config.family, m, config.n, seed, **config.params)
            opts = _protocol_options(config, instance)
            t0 = time.perf_counter()
            result = run_instance(config.protocol, instance, n=config.n, seed=seed, **opts)
            wall_ms = (time.perf_counter() - t0) * 1000.0
            ok = is_ef1(instance, result.allocation)
            if not ok:
                print(f"EF1 verification failed: protocol={config.protocol} "
                      f"family={config.family} m={m} n={config.n} seed={seed}",
                      file=sys.stderr)
                raise ContractViolation("benchmark found an unfair allocation; aborting")
            bound = ceiling_for(config.protocol, config.n, m, **opts)
            ratio = Fraction(result.queries, bound) if bound else Fraction(result.queries or 0)
            records.append(RunRecord(config.protocol, m, config.n, seed,
                                     result.queries, ratio, ok, wall_ms))
    records.sort(key=RunRecord.sort_key)
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(records_csv(records))
    return records


def records_csv(records: Sequence[RunRecord]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["protocol", "m", "n", "seed", "queries", "bound_ratio", "ef1", "wall_ms"])
    for r in records:
        w.writerow([r.protocol, r.m, r.n, r.seed, r.queries,
                    format_rational(r.bound_ratio), "true" if r.ef1 else "false",
                    f"{r.wall_ms:.3f}"])
    return out.getvalue()


# Protocols whose query count grows with log2 m; the rest are reported
# against m itself.
_LOG_AXIS = frozenset({
    "two_agent_ef1",
    "three_identical_contiguous_ef1",
    "separate_designated_goods",
    "three_additive_ef1",
    "envy_cycle_batched",
    "contiguous_identical_monotonic",
})


def summarize(records: Sequence[RunRecord]) -> dict[str, dict]:
    """Per-protocol maxima and a least-squares slope of queries against
    the protocol's natural axis (log2 m or m)."""
    by_protocol: dict[str, list[RunRecord]] = {}
    for r in records:
        by_protocol.setdefault(r.protocol, []).append(r)
    out: dict[str, dict] = {}
    for protocol, rs in sorted(by_protocol.items()):
        log_axis = protocol in _LOG_AXIS
        xs = [(max(r.m, 1)).bit_length() if log_axis else r.m for r in rs]
        ys = [r.queries for r in rs]
        try:
            slope = statistics.linear_regression(xs, ys).slope
        except statistics.StatisticsError:
            slope = 0.0
        out[protocol] = {
            "runs": len(rs),
            "max_queries": max(ys),
            "max_bound_ratio": format_rational(max(r.bound_ratio for r in rs)),
            "axis": "log2m" if log_axis else "m",
            "slope": round(slope, 4),
        }
    return out


def backend_comparison(m: int = 2000, n: int = 3, trials: int = 25, seed: int = 7) -> dict:
    """Wall time of the additive fairness kernel on both backends.

    The compiled extension and the pure fallback share one test vector;
    both must return identical flags.  Timing is reported per call in
    milliseconds; compiled entries are None when the extension is not
    built.
    """
    from fairdiv import _kernels_py

    try:
        from fairdiv import _kernels  # type: ignore[attr-defined]
    except ImportError:
        _kernels = None  # type: ignore[assignment]

    rng = random.Random(f"backend|{m}|{n}|{seed}")
    flat = [rng.randint(0, 1000) for _ in range(n * m)]
    owner = [rng.randrange(n) for _ in range(m)]

    def clock(fn) -> tuple[float, tuple]:
        best = None
        val = None
        for _ in range(trials):
            t0 = time.perf_counter()
            val = fn(flat, owner, n, m)
            dt = (time.perf_counter() - t0) * 1000.0
            best = dt if best is None or dt < best else best
        return best, val

    pure_ms, pure_val = clock(_kernels_py.additive_fairness_flags)
    report = {"m": m, "n": n, "pure_ms": round(pure_ms, 4),
              "compiled_ms": None, "speedup": None}
    if _kernels is not None:
        comp_ms, comp_val = clock(_kernels.additive_fairness_flags)
        if tuple(comp_val) != tuple(pure_val):
            raise ContractViolation("kernel backends disagree on fairness flags")
        report["compiled_ms"] = round(comp_ms, 4)
        report["speedup"] = round(pure_ms / comp_ms, 2) if comp_ms else None
    return report
