"""Bundle generation tests: goldens, determinism, faithfulness, extras."""

import random
import re
import xml.etree.ElementTree as ET

import pytest

from cascom.codegen import generate_bundle
from cascom.model import PropertyRef
from cascom.planner import Goal, SearchLimits, Solution, plan

from kbgen import random_kb, random_goal


def _comfort_bundle(d1, extras=None):
    task = d1.task("taskComfort")
    primary = plan(d1, Goal(task.produces, task.location))[0]
    return generate_bundle(d1, task, primary, extras or [])


def test_golden_bundle_bytes(d1, golden_d1_dir):
    bundle = _comfort_bundle(d1)
    assert [fn for fn, _ in bundle.files] == [
        "taskComfort.vsd.xml",
        "taskComfort.wrappers.properties",
        "taskComfort.plan.txt",
    ]
    for filename, content in bundle.files:
        assert content.encode() == (golden_d1_dir / filename).read_bytes(), filename


def test_plan_txt_matches_spec_string(d1):
    bundle = _comfort_bundle(d1)
    assert bundle.as_dict()["taskComfort.plan.txt"] == (
        "STREAM comfort <- ComfortCalc(t1, h1)\nOUTPUT comfort\n"
    )


def test_bare_sensor_bundle(d1):
    task = d1.task("taskTemp")
    primary = plan(d1, Goal(task.produces, task.location))[0]
    bundle = generate_bundle(d1, task, primary)
    files = bundle.as_dict()
    assert files["taskTemp.plan.txt"] == "OUTPUT t1\n"
    assert "<processing/>" in files["taskTemp.vsd.xml"]
    assert files["taskTemp.wrappers.properties"] == "t1=serial:room-a\n"


def test_regeneration_is_byte_identical(d1):
    first = _comfort_bundle(d1)
    second = _comfort_bundle(d1)
    assert first == second


def test_vsd_is_well_formed_xml(d1):
    for task_id in ("taskComfort", "taskTemp"):
        task = d1.task(task_id)
        primary = plan(d1, Goal(task.produces, task.location))[0]
        bundle = generate_bundle(d1, task, primary)
        root = ET.fromstring(bundle.as_dict()[f"{task_id}.vsd.xml"])
        assert root.tag == "virtual-sensor"
        assert root.attrib["name"] == task_id
        assert [child.tag for child in root] == ["output-structure", "processing", "sources"]


def test_bundle_with_extra_output(d1):
    extra_ref = PropertyRef("Humidity", "percent")
    extra_sol = plan(d1, Goal(extra_ref, "room-a"))[0]
    bundle = _comfort_bundle(d1, extras=[(extra_ref, extra_sol)])
    files = bundle.as_dict()
    assert files["taskComfort.plan.txt"].endswith(
        "OUTPUT comfort\nOUTPUT h1 # extra:Humidity\n"
    )
    assert '<field name="humidity" unit="percent"/>' in files["taskComfort.vsd.xml"]


def test_duplicate_extra_property_rejected(d1):
    dup = PropertyRef("ComfortIndex", "index")
    sol = plan(d1, Goal(dup, "room-a"))[0]
    with pytest.raises(ValueError, match="duplicate output property"):
        _comfort_bundle(d1, extras=[(dup, sol)])


def test_invalid_primary_rejected(d1):
    task = d1.task("taskComfort")
    broken = Solution(
        root="comfort",
        nodes=frozenset({"comfort", "t1"}),
        edges=frozenset({("comfort", 0, "t1")}),
    )
    with pytest.raises(ValueError, match="invalid primary solution"):
        generate_bundle(d1, task, broken)


def _edges_from_plan_txt(kb, text):
    """Reconstruct the dataflow edges from the STREAM lines."""
    edges = set()
    for line in text.splitlines():
        m = re.fullmatch(r"STREAM (\S+) <- \S+\((.*)\)", line)
        if not m:
            continue
        consumer = m.group(1)
        for port, producer in enumerate(m.group(2).split(", ")):
            edges.add((consumer, port, producer))
    return edges


def test_plan_txt_round_trips_dataflow():
    from cascom.model import TaskDescription

    checked = 0
    for seed in range(200):
        if checked >= 40:
            break
        rng = random.Random(seed)
        kb = random_kb(rng)
        prop, loc = random_goal(rng)
        solutions = plan(kb, Goal(prop, loc), SearchLimits(3, 16))
        if not solutions:
            continue
        checked += 1
        task = TaskDescription(id="t", label="t", produces=prop, location=loc)
        for sol in solutions:
            bundle = generate_bundle(kb, task, sol)
            recovered = _edges_from_plan_txt(kb, bundle.as_dict()["t.plan.txt"])
            assert recovered == set(sol.edges), f"seed {seed}"
    assert checked >= 20


def test_sensors_listed_exactly_once_in_wrappers():
    from cascom.model import TaskDescription

    for seed in range(60):
        rng = random.Random(seed)
        kb = random_kb(rng)
        prop, loc = random_goal(rng)
        solutions = plan(kb, Goal(prop, loc), SearchLimits(3, 4))
        if not solutions:
            continue
        task = TaskDescription(id="t", label="t", produces=prop, location=loc)
        for sol in solutions:
            bundle = generate_bundle(kb, task, sol)
            lines = bundle.as_dict()["t.wrappers.properties"].splitlines()
            listed = [line.split("=", 1)[0] for line in lines]
            expected = sorted(n for n in sol.nodes if kb.sensor(n) is not None)
            assert listed == expected
