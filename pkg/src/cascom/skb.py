"""Parser and serializer for the SKB knowledge-base text format.

SKB is a strict, line-oriented subset of Turtle: one ``@prefix`` header,
then sensor/component/task statements made of ``predicate object`` pairs
separated by ``;`` and terminated by ``.``.  Parsing is strict; the
serializer emits a single canonical form (entities grouped by kind and
sorted by id) so equal knowledge bases always serialize byte-identically.
"""

from __future__ import annotations

import bisect
import math
import re

from .model import (
    ComponentDescription,
    CostVector,
    KBValidationError,
    KnowledgeBase,
    PropertyRef,
    SensorDescription,
    TaskDescription,
    build_kb,
)


class SKBSyntaxError(ValueError):
    """Syntax-level parse failure with 1-based line/column and the offending token."""

    def __init__(self, line: int, column: int, token: str, message: str):
        self.line = line
        self.column = column
        self.token = token
        super().__init__(f"line {line}, column {column}: {message} (at {token!r})")


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\n]+)
    | (?P<comment>\#[^\n]*)
    | (?P<prefix>@prefix(?![A-Za-z0-9_-]))
    | (?P<name>s:[A-Za-z][A-Za-z0-9_-]*)
    | (?P<ns>s:)
    | (?P<iri><skb:>)
    | (?P<kw_a>a(?![A-Za-z0-9_-]))
    | (?P<number>-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)
    | (?P<string>"(?:[^"\\\n]|\\.)*")
    | (?P<semi>;)
    | (?P<dot>\.)
    """,
    re.VERBOSE,
)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n"}

_EOF = ("eof", "", -1)


def _unescape(raw: str, pos_of: int, doc: "_Doc") -> str:
    body = raw[1:-1]
    if "\\" not in body:
        return body
    out: list[str] = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            nxt = body[i + 1]
            if nxt not in _ESCAPES:
                line, col = doc.position(pos_of)
                raise SKBSyntaxError(line, col, raw, f"unsupported escape '\\{nxt}'")
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Doc:
    """Token stream over a document, with offset -> (line, column) mapping."""

    def __init__(self, text: str):
        self.text = text
        self.line_starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self.line_starts.append(i + 1)
        self.tokens: list[tuple[str, str, int]] = []  # (kind, lexeme, offset)
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                line, col = self.position(pos)
                raise SKBSyntaxError(line, col, text[pos], "unexpected character")
            kind = m.lastgroup
            if kind not in ("ws", "comment"):
                self.tokens.append((kind, m.group(), pos))
            pos = m.end()
        self.idx = 0

    def position(self, offset: int) -> tuple[int, int]:
        row = bisect.bisect_right(self.line_starts, offset) - 1
        return row + 1, offset - self.line_starts[row] + 1

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx] if self.idx < len(self.tokens) else _EOF

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is not _EOF:
            self.idx += 1
        return tok

    def fail(self, tok: tuple[str, str, int], message: str):
        if tok is _EOF:
            line, col = self.position(len(self.text))
            raise SKBSyntaxError(line, col, "end of input", message)
        line, col = self.position(tok[2])
        raise SKBSyntaxError(line, col, tok[1], message)

    def expect(self, kind: str, what: str) -> tuple[str, str, int]:
        tok = self.next()
        if tok[0] != kind:
            self.fail(tok, f"expected {what}")
        return tok


def _local(name_lexeme: str) -> str:
    return name_lexeme[2:]  # strip "s:"


def parse_kb(text: str) -> KnowledgeBase:
    """Parse an SKB document into a validated knowledge base.

    Raises SKBSyntaxError for malformed input (with line/column) and
    KBValidationError for semantic problems such as duplicate ids or
    negative costs; both name the offending entity where known.
    """
    doc = _Doc(text)
    sensors: list[SensorDescription] = []
    components: list[ComponentDescription] = []
    tasks: list[TaskDescription] = []

    first = True
    while doc.peek() is not _EOF:
        kind, _, _ = doc.peek()
        if kind == "prefix":
            if not first:
                doc.fail(doc.peek(), "@prefix is only allowed as the first statement")
            doc.next()
            doc.expect("ns", "'s:'")
            doc.expect("iri", "'<skb:>'")
            doc.expect("dot", "'.'")
            first = False
            continue
        first = False
        _parse_statement(doc, sensors, components, tasks)

    return build_kb(sensors, components, tasks)


def _parse_statement(doc, sensors, components, tasks) -> None:
    subject = doc.expect("name", "an entity name like 's:name'")
    entity_id = _local(subject[1])
    doc.expect("kw_a", "'a'")
    kind_tok = doc.expect("name", "an entity kind (s:Sensor, s:Component, s:Task)")
    kind = _local(kind_tok[1])
    if kind not in ("Sensor", "Component", "Task"):
        doc.fail(kind_tok, f"unknown entity kind for '{entity_id}'")

    # Collect predicate/argument pairs until the closing '.'.
    preds: list[tuple[str, list[tuple[str, str, int]]]] = []
    while True:
        sep = doc.next()
        if sep[0] == "dot":
            break
        if sep[0] != "semi":
            doc.fail(sep, f"expected ';' or '.' in statement for '{entity_id}'")
        pred_tok = doc.expect("name", f"a predicate in statement for '{entity_id}'")
        args: list[tuple[str, str, int]] = []
        while doc.peek()[0] in ("name", "string", "number"):
            args.append(doc.next())
        preds.append((pred_tok, args))

    if kind == "Sensor":
        sensors.append(_build_sensor(doc, entity_id, preds))
    elif kind == "Component":
        components.append(_build_component(doc, entity_id, preds))
    else:
        tasks.append(_build_task(doc, entity_id, preds))


def _args_of(doc, entity_id, pred_tok, args, shapes):
    """Check the argument token kinds against one of the allowed shapes."""
    got = tuple(a[0] for a in args)
    if got not in shapes:
        doc.fail(pred_tok, f"malformed arguments for {pred_tok[1]} in '{entity_id}'")
    return args


class _Fields:
    """Accumulates predicate values for one entity, rejecting duplicates."""

    def __init__(self, doc, entity_id):
        self.doc = doc
        self.entity_id = entity_id
        self.values: dict[str, object] = {}

    def set_once(self, pred_tok, key, value):
        if key in self.values:
            self.doc.fail(pred_tok, f"duplicate predicate {pred_tok[1]} for '{self.entity_id}'")
        self.values[key] = value

    def require(self, key):
        if key not in self.values:
            raise KBValidationError(f"'{self.entity_id}' is missing required predicate s:{key}")
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)


def _string_arg(doc, args, i=0) -> str:
    tok = args[i]
    return _unescape(tok[1], tok[2], doc)


def _number_arg(doc, entity_id, pred_tok, args) -> float:
    value = float(args[0][1])
    if not math.isfinite(value):
        doc.fail(pred_tok, f"non-finite number for '{entity_id}'")
    return value


def _build_sensor(doc, entity_id, preds) -> SensorDescription:
    f = _Fields(doc, entity_id)
    costs: dict[str, float] = {}
    for pred_tok, args in preds:
        pred = _local(pred_tok[1])
        if pred == "measures":
            _args_of(doc, entity_id, pred_tok, args, {("name",)})
            f.set_once(pred_tok, "measures", _local(args[0][1]))
        elif pred in ("unit", "location", "wrapper"):
            _args_of(doc, entity_id, pred_tok, args, {("string",)})
            f.set_once(pred_tok, pred, _string_arg(doc, args))
        elif pred in ("costEnergy", "costBandwidth", "costLatency", "costPrice"):
            _args_of(doc, entity_id, pred_tok, args, {("number",)})
            f.set_once(pred_tok, pred, None)
            costs[pred] = _number_arg(doc, entity_id, pred_tok, args)
        else:
            doc.fail(pred_tok, f"unknown predicate {pred_tok[1]} for sensor '{entity_id}'")
    for key in ("costEnergy", "costBandwidth", "costLatency", "costPrice"):
        f.require(key)
    return SensorDescription(
        id=entity_id,
        produces=PropertyRef(f.require("measures"), f.require("unit")),
        location=f.require("location"),
        wrapper_type=f.require("wrapper"),
        cost=CostVector(
            energy=costs["costEnergy"],
            bandwidth=costs["costBandwidth"],
            latency=costs["costLatency"],
            price=costs["costPrice"],
        ),
    )


def _build_component(doc, entity_id, preds) -> ComponentDescription:
    f = _Fields(doc, entity_id)
    inputs: list[PropertyRef] = []
    costs: dict[str, float] = {}
    for pred_tok, args in preds:
        pred = _local(pred_tok[1])
        if pred == "input":
            _args_of(doc, entity_id, pred_tok, args, {("name", "string")})
            inputs.append(PropertyRef(_local(args[0][1]), _string_arg(doc, args, 1)))
        elif pred == "output":
            _args_of(doc, entity_id, pred_tok, args, {("name", "string")})
            f.set_once(pred_tok, "output", PropertyRef(_local(args[0][1]), _string_arg(doc, args, 1)))
        elif pred == "class":
            _args_of(doc, entity_id, pred_tok, args, {("string",)})
            f.set_once(pred_tok, "class", _string_arg(doc, args))
        elif pred in ("costEnergy", "costBandwidth", "costLatency", "costPrice"):
            _args_of(doc, entity_id, pred_tok, args, {("number",)})
            f.set_once(pred_tok, pred, None)
            costs[pred] = _number_arg(doc, entity_id, pred_tok, args)
        else:
            doc.fail(pred_tok, f"unknown predicate {pred_tok[1]} for component '{entity_id}'")
    if not inputs:
        raise KBValidationError(f"component '{entity_id}' has no s:input")
    for key in ("costEnergy", "costBandwidth", "costLatency", "costPrice"):
        f.require(key)
    return ComponentDescription(
        id=entity_id,
        inputs=tuple(inputs),
        output=f.require("output"),
        class_name=f.require("class"),
        cost=CostVector(
            energy=costs["costEnergy"],
            bandwidth=costs["costBandwidth"],
            latency=costs["costLatency"],
            price=costs["costPrice"],
        ),
    )


def _build_task(doc, entity_id, preds) -> TaskDescription:
    f = _Fields(doc, entity_id)
    facets: dict[str, str] = {}
    for pred_tok, args in preds:
        pred = _local(pred_tok[1])
        if pred == "produces":
            _args_of(doc, entity_id, pred_tok, args, {("name", "string")})
            f.set_once(pred_tok, "produces", PropertyRef(_local(args[0][1]), _string_arg(doc, args, 1)))
        elif pred == "location":
            _args_of(doc, entity_id, pred_tok, args, {("string",)})
            f.set_once(pred_tok, "location", _string_arg(doc, args))
        elif pred == "label":
            _args_of(doc, entity_id, pred_tok, args, {("string",)})
            f.set_once(pred_tok, "label", _string_arg(doc, args))
        elif pred == "facet":
            _args_of(doc, entity_id, pred_tok, args, {("string",)})
            raw = _string_arg(doc, args)
            key, eq, value = raw.partition("=")
            if not eq:
                doc.fail(pred_tok, f"facet must look like \"key=value\" in '{entity_id}'")
            if key in facets:
                doc.fail(pred_tok, f"duplicate facet key '{key}' for '{entity_id}'")
            facets[key] = value
        else:
            doc.fail(pred_tok, f"unknown predicate {pred_tok[1]} for task '{entity_id}'")
    return TaskDescription(
        id=entity_id,
        label=f.require("label"),
        produces=f.require("produces"),
        location=f.get("location"),
        facets=facets,
    )


# -- serialization --------------------------------------------------------


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _num(value: float) -> str:
    return repr(float(value))


def _cost_line(cost: CostVector) -> str:
    return (
        f"  s:costEnergy {_num(cost.energy)} ; s:costBandwidth {_num(cost.bandwidth)} ; "
        f"s:costLatency {_num(cost.latency)} ; s:costPrice {_num(cost.price)} ."
    )


def serialize_kb(kb: KnowledgeBase) -> str:
    """Render the canonical SKB form: sensors, components, tasks, sorted by id."""
    lines = ["@prefix s: <skb:> ."]
    for s in sorted(kb.sensors, key=lambda e: e.id):
        lines.append(f"s:{s.id} a s:Sensor ;")
        lines.append(f"  s:measures s:{s.produces.property_id} ;")
        lines.append(f"  s:unit {_quote(s.produces.unit)} ;")
        lines.append(f"  s:location {_quote(s.location)} ;")
        lines.append(f"  s:wrapper {_quote(s.wrapper_type)} ;")
        lines.append(_cost_line(s.cost))
    for c in sorted(kb.components, key=lambda e: e.id):
        lines.append(f"s:{c.id} a s:Component ;")
        for ref in c.inputs:
            lines.append(f"  s:input s:{ref.property_id} {_quote(ref.unit)} ;")
        lines.append(f"  s:output s:{c.output.property_id} {_quote(c.output.unit)} ;")
        lines.append(f"  s:class {_quote(c.class_name)} ;")
        lines.append(_cost_line(c.cost))
    for t in sorted(kb.tasks, key=lambda e: e.id):
        lines.append(f"s:{t.id} a s:Task ;")
        lines.append(f"  s:produces s:{t.produces.property_id} {_quote(t.produces.unit)} ;")
        if t.location is not None:
            lines.append(f"  s:location {_quote(t.location)} ;")
        for key in sorted(t.facets):
            lines.append(f"  s:facet {_quote(f'{key}={t.facets[key]}')} ;")
        lines.append(f"  s:label {_quote(t.label)} .")
    return "\n".join(lines) + "\n"


def load_kb(path) -> KnowledgeBase:
    """Read and parse an SKB file."""
    with open(path, encoding="utf-8") as fh:
        return parse_kb(fh.read())


def save_kb(kb: KnowledgeBase, path) -> None:
    """Write the canonical serialization to a file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_kb(kb))
