from __future__ import annotations

import io
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdship.bench import (
    GeneratorConfig,
    InstanceKey,
    MetricsRow,
    Reference,
    best_known,
    class_assignment,
    compute_gaps,
    generate_library,
    generate_slice,
    instance_name,
    parse_instance_name,
    sensitivity_summary,
    write_metrics_table,
    write_sensitivity_table,
)
from crowdship.model import Bundle, Offer, Point, Solution, dump_instance
from crowdship.orchestrator import RunReport


def report(name: str, objective: float, ub: float | None, status: str = "heuristic", variant: str = "H-DD"):
    off = Offer(0, Bundle(0, (1,)), 1.0, 0.5, objective, 0.25)
    sol = Solution.from_offers([off])
    gap = None if ub is None else (ub - objective) / ub
    return RunReport(name, variant, sol, ub, objective, gap, 1, 1, 0.0, status)


def test_library_size_and_naming():
    lib = generate_library(GeneratorConfig(master_seed=7))
    assert len(lib) == 1600
    names = [inst.name for inst in lib]
    assert len(set(names)) == 1600
    assert "01_c1_30_0.1" in names and "10_m5_120_0.5" in names
    assert all(t.outsource_cost == 4.95 for inst in lib[:40] for t in inst.tasks)


def test_reduced_instances_are_prefixes():
    cfg = GeneratorConfig(master_seed=2)
    full = generate_slice(cfg, tasks=[120], ratios=[0.5], patterns=["m2"], bases=[3])[0]
    for inst in generate_slice(cfg, patterns=["m2"], bases=[3]):
        assert inst.tasks == full.tasks[: len(inst.tasks)]
        assert inst.drivers == full.drivers[: len(inst.drivers)]
        assert len(inst.drivers) == round(parse_instance_name(inst.name).ratio * len(inst.tasks))


def test_generated_geometry():
    cfg = GeneratorConfig(master_seed=4)
    inst = generate_slice(cfg, tasks=[120], ratios=[0.5], patterns=["c2"], bases=[0])[0]
    assert len(inst.depots) == 1 and inst.depots[0].location == Point(0.0, 0.0)
    assert inst.depots[0].servable_tasks == frozenset(t.id for t in inst.tasks)
    for t in inst.tasks:
        assert -5 <= t.location.x <= 5 and -5 <= t.location.y <= 5
        assert 10 <= t.load <= 30 and t.load == int(t.load)
    for w in inst.drivers:
        assert w.origin == Point(0.0, 0.0) and w.capacity == 100.0 and w.class_tag == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 9), st.integers(3, 7))
def test_mixed_patterns_balanced(seed, base, pattern_index):
    cfg = GeneratorConfig(master_seed=seed)
    classes = class_assignment(cfg, base, pattern_index)
    assert len(classes) == cfg.full_drivers
    for n in range(3, cfg.full_drivers + 1, 3):
        assert Counter(classes[:n]) == Counter({1: n // 3, 2: n // 3, 3: n // 3})


def test_generation_deterministic():
    a = generate_slice(GeneratorConfig(master_seed=9), tasks=[60], ratios=[0.2], bases=[1])
    b = generate_slice(GeneratorConfig(master_seed=9), tasks=[60], ratios=[0.2], bases=[1])
    assert [dump_instance(x) for x in a] == [dump_instance(x) for x in b]
    c = generate_slice(GeneratorConfig(master_seed=10), tasks=[60], ratios=[0.2], bases=[1])
    assert dump_instance(a[0]) != dump_instance(c[0])


def test_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(task_sizes=(30, 35))
    with pytest.raises(ValueError):
        GeneratorConfig(patterns=("c1", "c2"))
    with pytest.raises(ValueError):
        GeneratorConfig(load_range=(0, 5))
    with pytest.raises(ValueError):
        generate_slice(GeneratorConfig(), patterns=["m9"])


def test_instance_names_round_trip():
    name = instance_name(3, "m4", 90, 0.3)
    assert name == "03_m4_90_0.3"
    assert parse_instance_name(name) == InstanceKey(3, "m4", 90, 0.3)
    with pytest.raises(ValueError):
        parse_instance_name("tiny")


def test_gap_examples():
    rows = compute_gaps([report("a", 98.5, 100.0), report("b", 7.0, 7.0)],
                        {"a": Reference(98.5, 99.0), "b": Reference(None, 0.0)})
    a, b = rows
    assert a.gap_h == pytest.approx(0.015, abs=1e-12)
    assert a.gap_opt == 0.0
    assert a.gap_bk == pytest.approx(0.5 / 99.0)
    assert b.gap_h == 0.0 and b.gap_opt is None and b.gap_bk is None
    assert "gap_bk" in b.note
    assert a.mean_acceptance == 0.5 and a.mean_detour == 0.25


def test_gap_without_upper_bound():
    (row,) = compute_gaps([report("a", 1.0, None, variant="SEQ")])
    assert row.gap_h is None and row.gap_opt is None and row.gap_bk is None


def test_best_known_prefers_optimum():
    refs = best_known([report("a", 3.0, 4.0), report("a", 2.5, 4.0, status="optimal"), report("b", 1.0, 2.0)])
    assert refs["a"] == Reference(2.5, 2.5)
    assert refs["b"] == Reference(None, 1.0)


def test_metrics_table_layout():
    out = io.StringIO()
    write_metrics_table(compute_gaps([report("a", 1.0, 2.0)]), out)
    head, line = out.getvalue().splitlines()
    assert head.split("\t")[:3] == ["instance", "variant", "objective"]
    assert len(line.split("\t")) == len(MetricsRow.__dataclass_fields__)


def test_sensitivity_single_offer_group():
    inst = generate_slice(GeneratorConfig(), tasks=[30], ratios=[0.1], patterns=["m1"], bases=[0])[0]
    w = inst.drivers[0]
    off = Offer(w.id, Bundle(0, (inst.tasks[0].id,)), 3.5, 0.9, 1.2, 0.7)
    rows = sensitivity_summary([Solution.from_offers([off])], [inst], ["class", "tasks"])
    assert len(rows) == 1
    r = rows[0]
    assert r.group == (w.class_tag, 30) and r.offers == 1
    assert (r.mean_acceptance, r.mean_compensation, r.mean_bundle_size, r.mean_detour) == (0.9, 3.5, 1.0, 0.7)
    out = io.StringIO()
    write_sensitivity_table(rows, ["class", "tasks"], out)
    assert out.getvalue().splitlines()[0].startswith("class\ttasks\toffers")
    with pytest.raises(ValueError):
        sensitivity_summary([Solution()], [inst], "colour")
    with pytest.raises(ValueError):
        sensitivity_summary([], [inst], "class")
