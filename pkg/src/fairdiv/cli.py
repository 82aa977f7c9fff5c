"""Command line entry points: run, check, bench, adversary, serve."""

from __future__ import annotations

import argparse
import json
import random
import sys

from fairdiv.model import (
    Allocation,
    Bundle,
    ContractViolation,
    FairdivError,
    Instance,
    LineArrangement,
    QueryBudgetExhausted,
    format_rational,
)
from fairdiv.audit import brute_force_ef_exists, fairness_report, is_ef1, is_efx
from fairdiv.protocols import REGISTRY, allocation_json, ceiling_for, run_instance
from fairdiv import adversaries as adv_mod
from fairdiv import bench as bench_mod

__all__ = ["main"]


def _load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _write_json(payload, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# -- run ---------------------------------------------------------------


def _cmd_run(args) -> int:
    instance = Instance.from_json(_load_json(args.instance))
    line = None
    if args.line:
        line = LineArrangement(_load_json(args.line))
    options = json.loads(args.options) if args.options else {}
    result = run_instance(args.protocol, instance, n=args.n, line=line,
                          seed=args.seed, **options)
    log_ref = ""
    if args.out:
        log_ref = args.out + ".log.jsonl"
        with open(log_ref, "w") as fh:
            for q, v in zip(result.machine.asked, result.machine.answers):
                fh.write(json.dumps({
                    "agent": q.agent,
                    "goods": q.bundle.sorted_goods(),
                    "value": format_rational(v),
                }) + "\n")
    payload = allocation_json(result, query_log_ref=log_ref)
    _write_json(payload, args.out)
    bound = ceiling_for(args.protocol, result.allocation.n, instance.m, **options)
    print(f"queries: {result.queries}" + (f" (ceiling {bound})" if bound else ""),
          file=sys.stderr)
    return 0


# -- check -------------------------------------------------------------


def _cmd_check(args) -> int:
    instance = Instance.from_json(_load_json(args.instance))
    obj = _load_json(args.allocation)
    bundles = obj["bundles"] if isinstance(obj, dict) else obj
    allocation = Allocation([Bundle.from_goods(b) for b in bundles])
    report = fairness_report(instance, allocation)
    _write_json(report, None)
    return 0 if report["ef1"] else 1


# -- bench -------------------------------------------------------------


def _cmd_bench(args) -> int:
    if args.backends:
        _write_json(bench_mod.backend_comparison(), None)
        return 0
    raw = _load_json(args.config)
    configs = raw if isinstance(raw, list) else [raw]
    all_records = []
    for obj in configs:
        cfg = bench_mod.ExperimentConfig.from_json(obj)
        records = bench_mod.run_experiment(cfg)
        all_records.extend(records)
        if not cfg.out:
            sys.stdout.write(bench_mod.records_csv(records))
    if args.summary:
        _write_json(bench_mod.summarize(all_records), args.summary)
    return 0


# -- adversary ---------------------------------------------------------


def _random_subset(rng: random.Random, m: int) -> frozenset:
    return frozenset(g for g in range(m) if rng.random() < 0.5)


def _transcript(adv) -> list[dict]:
    return [{"agent": rec.agent, "goods": sorted(rec.goods),
             "value": format_rational(rec.value)} for rec in adv.full_log]


def _drive_random(adv, budget: int, seed: int) -> None:
    rng = random.Random(f"adversary-driver|{seed}")
    for _ in range(budget):
        try:
            adv.answer(rng.randrange(adv.n), _random_subset(rng, adv.m))
        except QueryBudgetExhausted:
            break


def _default_budget(kind: str, adv) -> int:
    if kind == "additive-ef":
        return adv.budget
    if kind == "efx":
        return adv.budget
    if kind == "monotonic-ef":
        return adv.total_mid - 1  # one short of forcing the decision
    return 16 * adv.n  # pairs: plenty of halving steps


def _cmd_adversary(args) -> int:
    kind = args.kind
    if kind == "pairs":
        if not args.n:
            raise ContractViolation("pairs adversary needs --n")
        adv = adv_mod.pairs_ef1_adversary(args.n, args.m)
    elif kind == "monotonic-ef":
        adv = adv_mod.monotonic_ef_decision_adversary(args.m)
    elif kind == "additive-ef":
        adv = adv_mod.additive_ef_decision_adversary(args.m)
    elif kind == "efx":
        adv = adv_mod.efx_additive_adversary(args.m)
    else:  # pragma: no cover - argparse limits choices
        raise ContractViolation(f"unknown adversary kind {kind!r}")

    driver = args.driver
    verdicts: dict = {}
    materializations: dict = {}
    allocation = None

    if driver.startswith("budget:"):
        _drive_random(adv, int(driver.split(":", 1)[1]), args.seed)
    elif driver == "random":
        _drive_random(adv, _default_budget(kind, adv), args.seed)
    elif driver not in REGISTRY:
        raise ContractViolation("--driver must be a protocol id, 'random', or 'budget:<q>'")

    if driver in REGISTRY:
        from fairdiv.protocols import run as run_protocol

        n = args.n or adv.n
        options = json.loads(args.options) if args.options else {}
        result = run_protocol(driver, adv.oracles(), n=n, seed=args.seed, **options)
        allocation = result.allocation
        verdicts["queries"] = result.queries
        verdicts["allocation"] = allocation.as_index_lists()

    if kind == "pairs":
        vals = adv.materialize(allocation)
        materializations["valuations"] = [v.to_json() for v in vals]
        verdicts["replay_consistent"] = adv_mod.replay_consistency(adv, adv.full_log, vals)
        verdicts["min_queries_implied"] = adv.min_queries_implied()
        if allocation is not None:
            verdicts["ef1_under_materialized"] = is_ef1(Instance(vals), allocation)
    elif kind == "efx":
        if allocation is None:
            rng = random.Random(f"efx-commit|{args.seed}")
            left = frozenset(rng.sample(range(adv.m), adv.m // 2))
            allocation = Allocation([
                Bundle.from_goods(left),
                Bundle.from_goods(set(range(adv.m)) - left),
            ])
            verdicts["allocation"] = allocation.as_index_lists()
        val = adv.refute(allocation)
        materializations["refutation"] = val.to_json()
        verdicts["replay_consistent"] = adv_mod.replay_consistency(adv, adv.full_log, val)
        verdicts["is_efx"] = is_efx(Instance([val, val]), allocation)
    elif kind in ("monotonic-ef", "additive-ef"):
        worlds = adv.worlds_open() if kind == "monotonic-ef" else ("ef", "noef")
        verdicts["worlds_open"] = list(worlds)
        for world in worlds:
            val = adv.materialize(world)
            materializations[world] = val.to_json()
            verdicts[f"{world}_replay_consistent"] = adv_mod.replay_consistency(
                adv, adv.full_log, val)
            if adv.m <= 12:
                verdicts[f"{world}_ef_exists"] = brute_force_ef_exists(
                    Instance([val, val]))

    payload = {
        "kind": kind,
        "m": adv.m,
        "n": adv.n,
        "driver": driver,
        "answers": _transcript(adv),
        "materializations": materializations,
        "verdicts": verdicts,
    }
    _write_json(payload, args.out)
    return 0


# -- serve -------------------------------------------------------------


def _cmd_serve(args) -> int:
    import uvicorn

    from fairdiv.service import build_app

    app = build_app(store_path=args.store)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# -- parser ------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fairdiv",
                                description="EF1 allocation with counted value queries")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a protocol against an instance file")
    r.add_argument("--protocol", required=True, choices=sorted(REGISTRY))
    r.add_argument("--instance", required=True, help="instance JSON path")
    r.add_argument("--line", help="JSON file with a goods permutation")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--n", type=int, default=None,
                   help="agent count when the instance holds one shared valuation")
    r.add_argument("--options", help="extra protocol options as inline JSON")
    r.add_argument("--out", help="allocation JSON output path")
    r.set_defaults(fn=_cmd_run)

    c = sub.add_parser("check", help="audit an allocation against an instance")
    c.add_argument("--instance", required=True)
    c.add_argument("--allocation", required=True)
    c.set_defaults(fn=_cmd_check)

    b = sub.add_parser("bench", help="run benchmark experiments from a config")
    b.add_argument("--config", help="ExperimentConfig JSON (object or list)")
    b.add_argument("--summary", help="write per-protocol summary JSON here")
    b.add_argument("--backends", action="store_true",
                   help="compare the compiled and pure kernel backends")
    b.set_defaults(fn=_cmd_bench)

    a = sub.add_parser("adversary", help="drive a protocol against an adversary")
    a.add_argument("--kind", required=True,
                   choices=["monotonic-ef", "additive-ef", "efx", "pairs"])
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--n", type=int, default=None)
    a.add_argument("--driver", required=True,
                   help="protocol id, 'random', or 'budget:<q>'")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--options", help="protocol options as inline JSON")
    a.add_argument("--out", help="transcript JSON output path")
    a.set_defaults(fn=_cmd_adversary)

    s = sub.add_parser("serve", help="start the HTTP session gateway")
    s.add_argument("--port", type=int, default=8000)
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--store", help="append-only JSONL event store path")
    s.set_defaults(fn=_cmd_serve)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "bench" and not args.backends and not args.config:
        print("bench needs --config or --backends", file=sys.stderr)
        return 2
    try:
        return args.fn(args)
    except FairdivError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
