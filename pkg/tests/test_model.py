from __future__ import annotations

import os
import stat

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crowdship.bench import CLASS_COEFFICIENTS, GeneratorConfig, generate_slice
from crowdship.model import (
    Bundle,
    DepotSpec,
    DriverSpec,
    Instance,
    InstanceFormatError,
    InstanceValidationError,
    Offer,
    Point,
    Solution,
    TaskSpec,
    dump_instance,
    dump_solution,
    format_real,
    load_instance,
    load_solution,
    parse_instance,
    parse_solution,
    save_instance,
    save_solution,
    validate_solution,
)
from crowdship.oracle import exhaustive_optimum
from crowdship.probability import BehaviorCoefficients

from tiny import tiny_instance

MINIMAL = """CROWDSHIP-INSTANCE v1
NAME mini
SEED 7
DEPOTS 1
0 0 0 ALL
TASKS 1
1 1.5 2 10 4.95
DRIVERS 1
5 0 0 3 4 100 -5 -3 -4 2.5 1
"""


def test_minimal_file_parses():
    inst = parse_instance(MINIMAL)
    assert len(inst.tasks) == 1 and len(inst.drivers) == 1
    assert inst.name == "mini" and inst.seed == 7
    assert inst.depots[0].servable_tasks == frozenset({1})
    w = inst.drivers[0]
    assert w.behavior == CLASS_COEFFICIENTS[1] and w.class_tag == 1
    assert inst.tasks[0].location == Point(1.5, 2.0)


def test_unknown_servable_task_rejected():
    bad = MINIMAL.replace("0 0 0 ALL", "0 0 0 1,9")
    with pytest.raises(InstanceValidationError):
        parse_instance(bad)


def test_parse_error_reports_line():
    bad = MINIMAL.replace("1 1.5 2 10 4.95", "1 1.5 two 10 4.95")
    with pytest.raises(InstanceFormatError, match="field 'y'") as err:
        parse_instance(bad)
    assert err.value.line == 7


@pytest.mark.parametrize(
    "text",
    [
        MINIMAL.replace("CROWDSHIP-INSTANCE v1", "CROWDSHIP-INSTANCE v2"),
        MINIMAL.replace("TASKS 1", "TASKS 2"),
        MINIMAL + "extra\n",
    ],
)
def test_malformed_files(text):
    with pytest.raises(InstanceFormatError):
        parse_instance(text)


def test_validation_errors():
    c = CLASS_COEFFICIENTS[1]
    t = TaskSpec(1, Point(0, 0), 1.0, 1.0)
    w = DriverSpec(1, Point(0, 0), Point(1, 0), 10.0, c)
    with pytest.raises(InstanceValidationError):
        Instance((t, t), (DepotSpec(0, Point(0, 0), {1}),), (w,))
    with pytest.raises(InstanceValidationError):
        Instance((t, TaskSpec(2, Point(1, 1), 1.0, 1.0)), (DepotSpec(0, Point(0, 0), {1}),), (w,))
    with pytest.raises(ValueError):
        TaskSpec(3, Point(0, 0), 0.0, 1.0)
    with pytest.raises(ValueError):
        DriverSpec(2, Point(0, 0), Point(1, 0), 0.0, c)
    with pytest.raises(ValueError):
        Point(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Bundle(0, ())
    with pytest.raises(ValueError):
        Bundle(0, (1, 1))


def test_generated_instance_round_trip(tmp_path):
    inst = generate_slice(GeneratorConfig(master_seed=3), tasks=[30], ratios=[0.5],
                          patterns=["m1"], bases=[0])[0]
    assert len(inst.tasks) == 30 and len(inst.drivers) == 15
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    save_instance(inst, p1)
    save_instance(inst, p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = load_instance(p1)
    assert back == inst


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_round_trip_random_instances(seed):
    inst = tiny_instance(seed)
    assert parse_instance(dump_instance(inst)) == inst


def test_round_trip_extra_coefficients():
    b = BehaviorCoefficients(-4.0, -2.0, -3.0, 1.5, (-0.25,), (0.5, 1.0), (2.0, 3.0))
    w = DriverSpec(4, Point(0.1, 0.2), Point(3.0, 1.0 / 3.0), 50.0, b)
    t = TaskSpec(1, Point(1.0, 1.0), 10.0, 4.95)
    inst = Instance((t,), (DepotSpec(0, Point(0, 0), {1}),), (w,), name="x", seed=None)
    assert parse_instance(dump_instance(inst)) == inst


def test_format_real_round_trips():
    for v in (0.1, 1.0 / 3.0, 2.0**-40, 1e300, -4.95):
        assert float(format_real(v)) == v


def test_save_to_unwritable_path(tmp_path):
    d = tmp_path / "ro"
    d.mkdir()
    os.chmod(d, stat.S_IRUSR | stat.S_IXUSR)
    inst = parse_instance(MINIMAL)
    try:
        if os.access(d, os.W_OK):
            pytest.skip("running with privileges that ignore directory permissions")
        with pytest.raises(OSError):
            save_instance(inst, d / "x.txt")
    finally:
        os.chmod(d, stat.S_IRWXU)
    with pytest.raises(OSError):
        save_instance(inst, tmp_path / "missing" / "x.txt")


def test_empty_solution_is_feasible():
    inst = parse_instance(MINIMAL)
    sol = Solution()
    assert sol.objective == 0.0
    assert validate_solution(inst, sol) == []


def test_oracle_solution_validates_and_round_trips(tmp_path):
    inst = tiny_instance(4)
    sol = exhaustive_optimum(inst)
    assert validate_solution(inst, sol, tol=1e-9) == []
    save_solution(sol, tmp_path / "s.txt")
    assert load_solution(tmp_path / "s.txt") == sol
    assert parse_solution(dump_solution(sol)) == sol


def test_validate_reports_task_multiplicity():
    inst = tiny_instance(1, max_drivers=2)
    c = CLASS_COEFFICIENTS[1]
    w1 = DriverSpec(1, Point(0, 0), Point(1, 0), 100.0, c)
    w2 = DriverSpec(2, Point(0, 0), Point(0, 1), 100.0, c)
    inst = Instance(inst.tasks, inst.depots, (w1, w2))
    tid = inst.depots[0].servable_tasks and min(inst.depots[0].servable_tasks)
    o1 = Offer(1, Bundle(inst.depots[0].id, (tid,)), 1.0, 0.5, 0.1, 0.0)
    o2 = Offer(2, Bundle(inst.depots[0].id, (tid,)), 1.0, 0.5, 0.1, 0.0)
    report = validate_solution(inst, Solution.from_offers([o1, o2]))
    assert any("task multiplicity" in r for r in report)


def test_validate_reports_capacity_driver_and_objective():
    c = CLASS_COEFFICIENTS[1]
    tasks = tuple(TaskSpec(i, Point(i, 0), 30.0, 4.95) for i in (1, 2))
    w = DriverSpec(1, Point(0, 0), Point(3, 0), 40.0, c)
    inst = Instance(tasks, (DepotSpec(0, Point(0, 0), {1, 2}),), (w,))
    heavy = Offer(1, Bundle(0, (1, 2)), 1.0, 0.5, 0.1, 0.0)
    again = Offer(1, Bundle(0, (1,)), 1.0, 0.5, 0.1, 0.0)
    report = validate_solution(inst, Solution((heavy, again), objective=5.0))
    text = "\n".join(report)
    assert "capacity" in text
    assert "driver multiplicity" in text
    assert "objective mismatch" in text


def test_validate_reports_servability():
    c = CLASS_COEFFICIENTS[1]
    tasks = tuple(TaskSpec(i, Point(i, 0), 10.0, 4.95) for i in (1, 2))
    w = DriverSpec(1, Point(0, 0), Point(3, 0), 40.0, c)
    inst = Instance(tasks, (DepotSpec(0, Point(0, 0), {1}), DepotSpec(1, Point(1, 1), {2})), (w,))
    off = Offer(1, Bundle(0, (2,)), 1.0, 0.5, 0.1, 0.0)
    report = validate_solution(inst, Solution.from_offers([off]))
    assert any("servability" in r for r in report)


def test_solution_status_checked():
    with pytest.raises(ValueError):
        Solution(status="done")


def test_solution_file_format():
    off = Offer(3, Bundle(0, (2, 1)), 2.5, 0.75, 1.5, 0.25)
    text = dump_solution(Solution.from_offers([off], bound=None, status="heuristic"))
    lines = text.splitlines()
    assert lines[0] == "CROWDSHIP-SOLUTION v1"
    assert lines[1] == "OBJECTIVE 1.5"
    assert lines[2] == "BOUND none"
    assert lines[3] == "STATUS heuristic"
    assert lines[4] == "3 0 2,1 2.5 0.75 1.5 0.25"
