"""Exact fair-division engine: EF1 protocols under counted value queries,
fairness checkers with brute-force oracles, lower-bound adversaries, a
query-count benchmark harness, and an interactive session gateway."""

from fairdiv.model import (
    AdditiveValuation,
    Allocation,
    BinaryValuation,
    Bundle,
    BudgetExceeded,
    ContractViolation,
    EMPTY_BUNDLE,
    FairdivError,
    IncompleteSpecification,
    Instance,
    KValuedValuation,
    LineArrangement,
    MonotonicityViolation,
    QueryBudgetExhausted,
    QueryRecord,
    SizeDominantValuation,
    TableValuation,
    Valuation,
    ValuationOracle,
    Value,
    VirtualLine,
    as_value,
    build_oracle,
    build_oracles,
    format_rational,
    parse_rational,
    replay_log,
    valuation_from_json,
)
from fairdiv.audit import (
    brute_force_contiguous_ef1,
    brute_force_ef_exists,
    envy_graph,
    fairness_report,
    is_ef1,
    is_efx,
    is_envy_free,
    is_proportional,
)
from fairdiv.machine import ProtocolMachine, Query, RunResult
from fairdiv.protocols import (
    REGISTRY,
    allocation_json,
    ceiling_for,
    make_machine,
    replay,
    run,
    run_instance,
)

__version__ = "0.1.0"
