"""SKB parser/serializer tests: demo document, errors, canonical form, round-trips."""

import random

import pytest

from cascom import parse_kb, serialize_kb
from cascom.model import (
    CostVector,
    KBValidationError,
    PropertyRef,
    SensorDescription,
    TaskDescription,
    build_kb,
)
from cascom.skb import SKBSyntaxError

from kbgen import random_kb


def test_empty_document_is_empty_kb():
    kb = parse_kb("")
    assert (len(kb.sensors), len(kb.components), len(kb.tasks)) == (0, 0, 0)
    assert kb.questions == ()


def test_demo_document_parses(d1):
    assert len(d1.sensors) == 2
    assert len(d1.components) == 1
    assert len(d1.tasks) == 2
    assert [q.facet_key for q in d1.questions] == ["domain", "phenomenon"]
    assert d1.question_for("phenomenon").options == ("comfort", "temperature")
    t1 = d1.sensor("t1")
    assert t1.produces == PropertyRef("Temperature", "celsius")
    assert t1.cost.as_tuple() == (2.0, 8.0, 10.0, 0.0)
    comfort = d1.component("comfort")
    assert comfort.inputs == (
        PropertyRef("Temperature", "celsius"),
        PropertyRef("Humidity", "percent"),
    )
    assert d1.task("taskComfort").facets == {"domain": "building", "phenomenon": "comfort"}


def test_missing_final_dot_is_syntax_error():
    text = '@prefix s: <skb:> .\ns:x a s:Task ;\n  s:produces s:P "u" ;\n  s:label "x"\n'
    with pytest.raises(SKBSyntaxError) as exc:
        parse_kb(text)
    assert exc.value.line >= 4


def test_syntax_error_reports_line_column_token():
    with pytest.raises(SKBSyntaxError) as exc:
        parse_kb("s:x a s:Sensor ;\n  s:measures ! ;\n")
    err = exc.value
    assert err.line == 2
    assert err.column == 14
    assert "!" in str(err)


def test_unknown_predicate_names_entity():
    text = 's:x a s:Task ;\n  s:produces s:P "u" ;\n  s:bogus "v" ;\n  s:label "x" .\n'
    with pytest.raises(SKBSyntaxError, match="s:bogus.*'x'"):
        parse_kb(text)


def test_unknown_entity_kind_rejected():
    with pytest.raises(SKBSyntaxError, match="unknown entity kind"):
        parse_kb("s:x a s:Gadget .\n")


def test_duplicate_id_rejected():
    text = (
        's:x a s:Task ;\n  s:produces s:P "u" ;\n  s:label "one" .\n'
        's:x a s:Task ;\n  s:produces s:P "u" ;\n  s:label "two" .\n'
    )
    with pytest.raises(KBValidationError, match="duplicate id 'x'"):
        parse_kb(text)


def test_duplicate_predicate_rejected():
    text = 's:x a s:Task ;\n  s:produces s:P "u" ;\n  s:produces s:Q "u" ;\n  s:label "x" .\n'
    with pytest.raises(SKBSyntaxError, match="duplicate predicate"):
        parse_kb(text)


def test_missing_predicate_names_entity():
    with pytest.raises(KBValidationError, match="'x' is missing required predicate s:label"):
        parse_kb('s:x a s:Task ;\n  s:produces s:P "u" .\n')


def test_negative_cost_names_entity():
    text = (
        "s:bad a s:Sensor ;\n"
        "  s:measures s:P ;\n"
        '  s:unit "u" ;\n'
        '  s:location "here" ;\n'
        '  s:wrapper "w" ;\n'
        "  s:costEnergy -1.0 ; s:costBandwidth 0.0 ; s:costLatency 0.0 ; s:costPrice 0.0 .\n"
    )
    with pytest.raises(KBValidationError, match="'bad'"):
        parse_kb(text)


def test_facet_requires_key_value_shape():
    text = 's:x a s:Task ;\n  s:produces s:P "u" ;\n  s:facet "oops" ;\n  s:label "x" .\n'
    with pytest.raises(SKBSyntaxError, match="key=value"):
        parse_kb(text)


def test_prefix_only_allowed_first():
    text = 's:x a s:Task ;\n  s:produces s:P "u" ;\n  s:label "x" .\n@prefix s: <skb:> .\n'
    with pytest.raises(SKBSyntaxError, match="@prefix"):
        parse_kb(text)


def test_comments_and_blank_lines_ignored(d1, d1_path):
    text = d1_path.read_text()
    commented = "# header comment\n" + text.replace(
        "s:t1 a s:Sensor ;", "s:t1 a s:Sensor ;  # temperature sensor"
    )
    assert parse_kb(commented) == d1


def test_serialize_empty_kb():
    assert serialize_kb(build_kb()) == "@prefix s: <skb:> .\n"


def test_demo_file_is_canonical(d1, d1_path):
    assert serialize_kb(d1) == d1_path.read_text()


def test_round_trip_identity(d1_path):
    kb = parse_kb(d1_path.read_text())
    assert parse_kb(serialize_kb(kb)) == kb


def test_canonical_idempotence(d1):
    once = serialize_kb(d1)
    assert serialize_kb(parse_kb(once)) == once


def test_entities_sorted_by_id():
    z_first = (
        "s:z1 a s:Sensor ;\n  s:measures s:P ;\n"
        '  s:unit "u" ;\n  s:location "x" ;\n  s:wrapper "w" ;\n'
        "  s:costEnergy 0.0 ; s:costBandwidth 0.0 ; s:costLatency 0.0 ; s:costPrice 0.0 .\n"
        "s:a1 a s:Sensor ;\n  s:measures s:P ;\n"
        '  s:unit "u" ;\n  s:location "x" ;\n  s:wrapper "w" ;\n'
        "  s:costEnergy 0.0 ; s:costBandwidth 0.0 ; s:costLatency 0.0 ; s:costPrice 0.0 .\n"
    )
    out = serialize_kb(parse_kb(z_first))
    assert out.index("s:a1") < out.index("s:z1")


def test_string_escaping_round_trips():
    task = TaskDescription(
        id="quirky",
        label='say "hi" \\ twice\nplease',
        produces=PropertyRef("P", "u"),
        facets={},
    )
    sensor = SensorDescription(
        id="s1",
        produces=PropertyRef("P", "u"),
        location="room-a",
        wrapper_type="w",
        cost=CostVector(),
    )
    kb = build_kb([sensor], [], [task])
    assert parse_kb(serialize_kb(kb)) == kb


def test_random_kbs_round_trip():
    for seed in range(60):
        kb = random_kb(random.Random(seed), with_tasks=True)
        text = serialize_kb(kb)
        assert parse_kb(text) == kb
        assert serialize_kb(parse_kb(text)) == text
