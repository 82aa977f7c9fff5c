"""Ground types: rationals, bundles, lines, valuations, counted oracles."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from fairdiv import (
    AdditiveValuation,
    BinaryValuation,
    Bundle,
    ContractViolation,
    EMPTY_BUNDLE,
    Instance,
    KValuedValuation,
    LineArrangement,
    SizeDominantValuation,
    TableValuation,
    build_oracle,
    format_rational,
    parse_rational,
    valuation_from_json,
)
from fairdiv.model import prefix_bundle, suffix_bundle

from conftest import rand_weights


# -- rational wire format ------------------------------------------------


def test_parse_rational_accepts_fraction_strings_and_int_shorthand():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("7") == 7
    assert parse_rational(5) == 5
    assert parse_rational("0") == 0


def test_format_rational_roundtrips():
    for v in (0, 7, Fraction(3, 4), Fraction(-1, 2) + Fraction(1, 2), Fraction(1535, 1536)):
        assert parse_rational(format_rational(v)) == v


def test_parse_rational_rejects_junk():
    for bad in ("", "1/0", "a/b", "1.5", None):
        with pytest.raises(ContractViolation):
            parse_rational(bad)


# -- line arrangements ----------------------------------------------------


def test_line_positions_and_goods_are_inverse_bijections():
    line = LineArrangement([2, 0, 3, 1])
    for pos in range(4):
        assert line.position_of(line.good_at(pos)) == pos
    for good in range(4):
        assert line.good_at(line.position_of(good)) == good


def test_line_rejects_non_permutations():
    with pytest.raises(ContractViolation):
        LineArrangement([0, 0, 1])
    with pytest.raises(ContractViolation):
        LineArrangement([1, 2])


def test_prefix_and_suffix_bundles():
    line = LineArrangement([0, 1, 2, 3])
    assert sorted(prefix_bundle(line, 2).goods) == [0, 1]
    assert len(prefix_bundle(line, 0)) == 0
    rev = LineArrangement([2, 1, 0])
    assert sorted(prefix_bundle(rev, 1).goods) == [2]
    assert sorted(suffix_bundle(rev, 2).goods) == [0]
    with pytest.raises(ContractViolation):
        prefix_bundle(line, 5)


# -- bundles ---------------------------------------------------------------


def test_bundle_equality_crosses_representations():
    line = LineArrangement([0, 1, 2, 3])
    by_set = Bundle.from_goods([1, 2])
    by_interval = Bundle.from_intervals(line, [(1, 3)])
    chained = Bundle.from_goods([1]).plus(2)
    assert by_set == by_interval == chained
    assert len(chained) == 2 and 2 in chained and 0 not in chained


def test_bundle_max_index_iterative_on_deep_chains():
    b = EMPTY_BUNDLE
    for g in range(30000):
        b = b.plus(g)
    assert b.max_index() == 29999
    assert len(b) == 30000


def test_bundle_rejects_bad_goods():
    with pytest.raises(ContractViolation):
        Bundle.from_goods([-1])
    line = LineArrangement([0, 1])
    with pytest.raises(ContractViolation):
        Bundle.from_intervals(line, [(0, 3)])


# -- valuations ------------------------------------------------------------


def test_additive_sums_weights():
    v = AdditiveValuation([3, 1, 1])
    assert v.evaluate(frozenset({1, 2})) == 2
    assert v.evaluate(frozenset()) == 0


def test_additive_rejects_negative_weights():
    with pytest.raises(ContractViolation):
        AdditiveValuation([1, -1])


def test_binary_counts_ones():
    v = BinaryValuation(3, {1})
    assert v.evaluate(frozenset({0, 1})) == 1
    with pytest.raises(ContractViolation):
        BinaryValuation(2, {5})


def test_table_requires_empty_at_zero_and_monotone():
    with pytest.raises(ContractViolation):
        TableValuation(1, {frozenset(): 1, frozenset({0}): 2})
    with pytest.raises(ContractViolation):
        TableValuation(2, {frozenset(): 0, frozenset({0}): 3,
                           frozenset({1}): 0, frozenset({0, 1}): 2})


def test_size_dominant_prefers_any_larger_bundle():
    # spec example: base 100, tiebreak [1,2,3]; {g1} = 101 < {g2,g3} = 205
    v = SizeDominantValuation(100, [1, 2, 3])
    assert v.evaluate(frozenset({0})) == 101
    assert v.evaluate(frozenset({1, 2})) == 205


def test_size_dominant_class_condition_exhaustive_m8():
    # |S| < |T| implies u(S) <= u(T), checked over all subset pairs at m=8
    rng = random.Random(4)
    base = 8 * 9  # at least sum(tiebreak)
    v = SizeDominantValuation(base, [rng.randint(0, 9) for _ in range(8)])
    from itertools import combinations
    subsets = [frozenset(c) for k in range(9) for c in combinations(range(8), k)]
    vals = {s: v.evaluate(s) for s in subsets}
    for s in subsets:
        for t in subsets:
            if len(s) < len(t):
                assert vals[s] <= vals[t]


def test_kvalued_is_monotone_and_takes_at_most_k_values():
    inner = AdditiveValuation([5, 3, 2, 7])
    v = KValuedValuation(3, inner)
    from itertools import combinations
    seen = set()
    prev = {}
    for k in range(5):
        for c in combinations(range(4), k):
            s = frozenset(c)
            val = v.evaluate(s)
            seen.add(val)
            prev[s] = val
    assert len(seen - {0}) <= 3
    assert prev[frozenset()] == 0
    for s, val in prev.items():
        for t, tval in prev.items():
            if s <= t:
                assert val <= tval


# -- counted oracles -------------------------------------------------------


def test_query_counts_every_call_including_repeats():
    inst = Instance([AdditiveValuation([8, 10] + [1] * 12)])
    o = build_oracle(inst, 0)
    allg = Bundle.from_goods(range(14))
    assert o.query(allg) == 30  # 8 + 10 + twelve ones
    assert o.query(allg) == 30
    assert o.query_count == 2
    assert len(o.log) == 2


def test_empty_bundle_is_zero_for_every_oracle():
    inst = Instance([AdditiveValuation([2, 3]), BinaryValuation(2, {0})])
    for a in range(2):
        o = build_oracle(inst, a)
        assert o.query(EMPTY_BUNDLE) == 0


def test_out_of_range_bundle_is_rejected():
    inst = Instance([AdditiveValuation([1, 1])])
    o = build_oracle(inst, 0)
    with pytest.raises(ContractViolation):
        o.query(Bundle.from_goods([5]))


def test_oracle_log_replays_exactly():
    from fairdiv import replay_log
    rng = random.Random(11)
    inst = Instance([AdditiveValuation(rand_weights(rng, 9))])
    o = build_oracle(inst, 0)
    for _ in range(25):
        k = rng.randint(0, 9)
        o.query(Bundle.from_goods(rng.sample(range(9), k)))
    assert replay_log(inst, o.log)


def test_monotone_audit_on_nested_pairs():
    # u(S) <= u(T) for sampled S within T across valuation classes
    rng = random.Random(7)
    vals = [
        AdditiveValuation(rand_weights(rng, 10)),
        BinaryValuation(10, set(rng.sample(range(10), 3))),
        SizeDominantValuation(10 * 9, [rng.randint(0, 9) for _ in range(10)]),
        KValuedValuation(4, AdditiveValuation(rand_weights(rng, 10))),
    ]
    for v in vals:
        for _ in range(1000):
            t = frozenset(rng.sample(range(10), rng.randint(0, 10)))
            s = frozenset(g for g in t if rng.random() < 0.6)
            assert v.evaluate(s) <= v.evaluate(t)


def test_additive_audit_on_disjoint_unions():
    rng = random.Random(8)
    from conftest import rand_fraction_weights
    v = AdditiveValuation(rand_fraction_weights(rng, 10))
    for _ in range(300):
        goods = rng.sample(range(10), rng.randint(0, 10))
        cut = rng.randint(0, len(goods))
        s, t = frozenset(goods[:cut]), frozenset(goods[cut:])
        assert v.evaluate(s | t) == v.evaluate(s) + v.evaluate(t)


# -- instance wire format ---------------------------------------------------


def test_instance_json_roundtrip_all_kinds():
    inst = Instance(
        [
            AdditiveValuation([Fraction(1, 2), 2, 0]),
            BinaryValuation(3, {2}),
            TableValuation(3, {
                frozenset(): 0, frozenset({0}): 1, frozenset({1}): 1,
                frozenset({2}): 2, frozenset({0, 1}): 2, frozenset({0, 2}): 2,
                frozenset({1, 2}): 3, frozenset({0, 1, 2}): 3,
            }),
            SizeDominantValuation(9, [1, 2, 3]),
            KValuedValuation(2, AdditiveValuation([1, 2, 3])),
        ],
        goods=["a", "b", "c"],
    )
    blob = inst.to_json()
    back = Instance.from_json(blob)
    assert back.to_json() == blob
    assert list(back.goods) == ["a", "b", "c"]


def test_table_wire_format_uses_subset_value_objects():
    v = TableValuation(2, {frozenset(): 0, frozenset({0}): 1,
                           frozenset({1}): 1, frozenset({0, 1}): 2})
    blob = v.to_json()
    assert all(set(row) == {"subset", "value"} for row in blob["entries"])
    assert valuation_from_json(blob, 2) == v


def test_instance_rejects_mismatched_declared_counts():
    blob = {"m": 3, "agents": [{"name": "a1", "valuation":
                                {"type": "additive", "weights": [1, 2]}}]}
    with pytest.raises(ContractViolation):
        Instance.from_json(blob)
