"""Backward AND-OR search composing sensors and components into solutions.

``plan`` returns the first ``max_solutions`` solutions in canonical order
(node count, then sorted edge list, then root id) without materializing the
full solution set: it enumerates component skeletons exhaustively (these
are few) and then assigns concrete sensors to sensor-fed ports with a
best-first expansion per skeleton, merging the per-skeleton streams.  This
keeps goals with astronomically many sensor combinations tractable.

A solution is a DAG: one node per sensor/component id, one edge
``(consumer id, input port index, producer id)`` per filled port.  Reusing
a node id merges occurrences, so a sensor feeding two ports is one node.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterator

from .model import KnowledgeBase, PropertyRef, SensorDescription, ComponentDescription

Edge = tuple[str, int, str]

#: Node-id prefix for hypothetical sensors in relaxed (advisory) search.
PLACEHOLDER_PREFIX = "missing:"


def placeholder_id(ref: PropertyRef) -> str:
    return f"{PLACEHOLDER_PREFIX}{ref.property_id}/{ref.unit}"


def placeholder_ref(node_id: str) -> PropertyRef:
    """Inverse of placeholder_id (property ids cannot contain '/')."""
    pid, _, unit = node_id[len(PLACEHOLDER_PREFIX):].partition("/")
    return PropertyRef(pid, unit)


class UnknownNodeError(ValueError):
    """A solution references a node id absent from the knowledge base."""


@dataclass(frozen=True)
class Goal:
    """The requested data stream: a property, optionally at a location."""

    produces: PropertyRef
    location: str | None = None


@dataclass(frozen=True)
class SearchLimits:
    max_depth: int = 8
    max_solutions: int = 64

    def __post_init__(self) -> None:
        if self.max_depth < 1 or self.max_solutions < 1:
            raise ValueError("search limits must be >= 1")


@dataclass(frozen=True)
class Solution:
    """A rooted DAG of sensor leaves and component nodes producing one stream."""

    root: str
    nodes: frozenset[str]
    edges: frozenset[Edge]

    def sort_key(self) -> tuple[int, tuple[Edge, ...], str]:
        return (len(self.nodes), tuple(sorted(self.edges)), self.root)

    def sensor_ids(self, kb: KnowledgeBase) -> list[str]:
        return sorted(n for n in self.nodes if kb.sensor(n) is not None)

    def component_ids(self, kb: KnowledgeBase) -> list[str]:
        return sorted(n for n in self.nodes if kb.component(n) is not None)

    def placeholder_ids(self) -> list[str]:
        return sorted(n for n in self.nodes if n.startswith(PLACEHOLDER_PREFIX))


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    reason: str | None = None
    node: str | None = None
    edge: Edge | None = None


# -- search ----------------------------------------------------------------


@dataclass(frozen=True)
class _Skeleton:
    """A solution with its sensor choices left open.

    ``slots`` are the sensor- or placeholder-fed ports; ``consumer`` is None
    for the degenerate skeleton whose root is itself a leaf.
    """

    root: tuple[str, object]  # ("node", comp_id) | ("sensor", ref) | ("placeholder", ref)
    comp_ids: tuple[str, ...]
    edges: tuple[Edge, ...]
    slots: tuple[tuple[str | None, int | None, PropertyRef, str], ...]


def _skeletons(kb: KnowledgeBase, goal: Goal, max_depth: int, relaxed: bool) -> list[_Skeleton]:
    location = goal.location
    found: list[_Skeleton] = []
    comp_heights: dict[str, int] = {}
    edges: list[Edge] = []
    slots: list[tuple[str | None, int | None, PropertyRef, str]] = []

    def need(prop: PropertyRef, budget: int, ancestors: frozenset[str], accept) -> None:
        has_sensor = any(
            s.matches_location(location) for s in kb.sensors_producing(prop)
        )
        usable = [c for c in kb.components_producing(prop) if c.id not in ancestors]
        if has_sensor:
            accept(("slot", prop), 1)
        for comp in usable:
            if comp.id in comp_heights:
                if comp_heights[comp.id] <= budget:
                    accept(("node", comp.id), comp_heights[comp.id])
            elif budget >= 2:
                expand(comp, budget, ancestors, accept)
        if relaxed and not has_sensor and not usable:
            accept(("placeholder", prop), 1)

    def expand(comp: ComponentDescription, budget: int, ancestors: frozenset[str], accept) -> None:
        deeper = ancestors | {comp.id}

        def fill(port: int, max_child: int) -> None:
            if port == len(comp.inputs):
                comp_heights[comp.id] = 1 + max_child
                accept(("node", comp.id), 1 + max_child)
                del comp_heights[comp.id]
                return

            def on_child(producer, height: int) -> None:
                if producer[0] == "node":
                    edges.append((comp.id, port, producer[1]))
                    fill(port + 1, max(max_child, height))
                    edges.pop()
                else:
                    kind = "sensor" if producer[0] == "slot" else "placeholder"
                    slots.append((comp.id, port, producer[1], kind))
                    fill(port + 1, max(max_child, height))
                    slots.pop()

            need(comp.inputs[port], budget - 1, deeper, on_child)

        fill(0, 0)

    def accept_root(producer, height: int) -> None:
        if producer[0] == "node":
            root = ("node", producer[1])
            all_slots = tuple(slots)
        else:
            kind = "sensor" if producer[0] == "slot" else "placeholder"
            root = (kind, producer[1])
            all_slots = tuple(slots) + ((None, None, producer[1], kind),)
        found.append(
            _Skeleton(
                root=root,
                comp_ids=tuple(sorted(comp_heights)),
                edges=tuple(edges),
                slots=all_slots,
            )
        )

    need(goal.produces, max_depth, frozenset(), accept_root)
    return found


def _assignments(kb: KnowledgeBase, skeleton: _Skeleton, location: str | None) -> Iterator[Solution]:
    """Yield the skeleton's solutions in canonical order.

    Sensor slots are assigned best-first with an admissible node-count bound:
    within one skeleton the sorted edge-list positions are fixed, so the
    canonical order reduces to (node count, per-slot producer vector).
    """
    ordered = sorted(
        skeleton.slots, key=lambda s: (s[0] is not None, s[0] or "", -1 if s[1] is None else s[1])
    )
    sensor_slots = [s for s in ordered if s[3] == "sensor"]
    placeholder_props = sorted({(s[2].property_id, s[2].unit) for s in ordered if s[3] == "placeholder"})
    base_count = len(skeleton.comp_ids) + len(placeholder_props)

    choices: list[tuple[str, ...]] = []
    group_of: list[PropertyRef] = []
    for _, _, prop, _ in sensor_slots:
        ids = tuple(
            s.id for s in kb.sensors_producing(prop) if s.matches_location(location)
        )
        choices.append(ids)  # non-empty by construction
        group_of.append(prop)
    groups = set(group_of)

    def bound(vector: tuple[str, ...]) -> int:
        total = base_count
        for prop in groups:
            assigned = {v for v, g in zip(vector, group_of) if g == prop}
            total += max(len(assigned), 1)
        return total

    fixed_slot_edges = [
        (s[0], s[1], placeholder_id(s[2])) for s in skeleton.slots if s[3] == "placeholder" and s[0] is not None
    ]

    heap: list[tuple[int, tuple[str, ...]]] = [(bound(()), ())]
    while heap:
        _, vector = heapq.heappop(heap)
        i = len(vector)
        if i < len(sensor_slots):
            for sensor_id in choices[i]:
                child = vector + (sensor_id,)
                heapq.heappush(heap, (bound(child), child))
            continue

        all_edges = list(skeleton.edges) + fixed_slot_edges
        for slot, sensor_id in zip(sensor_slots, vector):
            if slot[0] is not None:
                all_edges.append((slot[0], slot[1], sensor_id))
        kind, payload = skeleton.root
        if kind == "node":
            root = payload
        elif kind == "sensor":
            root = vector[-1]  # the root slot sorts last (consumer None first -> actually alone)
        else:
            root = placeholder_id(payload)
        nodes = set(skeleton.comp_ids)
        nodes.update(v for v in vector)
        nodes.update(placeholder_id(PropertyRef(p, u)) for p, u in placeholder_props)
        nodes.add(root)
        yield Solution(root=root, nodes=frozenset(nodes), edges=frozenset(all_edges))


def _solution_stream(kb: KnowledgeBase, goal: Goal, max_depth: int, relaxed: bool) -> Iterator[Solution]:
    skeletons = _skeletons(kb, goal, max_depth, relaxed)
    streams = [_assignments(kb, sk, goal.location) for sk in skeletons]
    return heapq.merge(*streams, key=lambda sol: sol.sort_key())


def plan(kb: KnowledgeBase, goal: Goal, limits: SearchLimits | None = None) -> list[Solution]:
    """All solutions for the goal in canonical order, truncated to max_solutions.

    An empty result is not an error: it is the signal that available sensors
    are insufficient, which the advisor turns into deployment recommendations.
    """
    limits = limits or SearchLimits()
    stream = _solution_stream(kb, goal, limits.max_depth, relaxed=False)
    return list(itertools.islice(stream, limits.max_solutions))


def relaxed_plan_stream(kb: KnowledgeBase, goal: Goal, max_depth: int) -> Iterator[Solution]:
    """Planner search where ports without any producer get placeholder leaves."""
    return _solution_stream(kb, goal, max_depth, relaxed=True)


# -- independent validity checking ------------------------------------------


def _produced_property(kb: KnowledgeBase, node_id: str) -> PropertyRef:
    sensor = kb.sensor(node_id)
    if sensor is not None:
        return sensor.produces
    comp = kb.component(node_id)
    if comp is not None:
        return comp.output
    raise UnknownNodeError(f"unknown node id '{node_id}'")


def validate_solution(kb: KnowledgeBase, goal: Goal, solution: Solution) -> ValidityReport:
    """Check every Solution invariant; report the first violation.

    Raises UnknownNodeError if the solution references ids missing from the
    knowledge base (placeholders from relaxed search are not valid here).
    """
    for node_id in sorted(solution.nodes):
        _produced_property(kb, node_id)
    if solution.root not in solution.nodes:
        return ValidityReport(False, "root is not among the solution nodes", node=solution.root)
    for edge in sorted(solution.edges):
        if edge[0] not in solution.nodes or edge[2] not in solution.nodes:
            return ValidityReport(False, "edge references a node outside the solution", edge=edge)
        _produced_property(kb, edge[0])
        _produced_property(kb, edge[2])

    # Acyclicity over consumer -> producer edges.
    producers: dict[str, list[Edge]] = {}
    for edge in solution.edges:
        producers.setdefault(edge[0], []).append(edge)
    state: dict[str, int] = {}  # 1 = on stack, 2 = done

    def cyclic(node: str) -> bool:
        state[node] = 1
        for e in producers.get(node, ()):
            mark = state.get(e[2])
            if mark == 1:
                return True
            if mark is None and cyclic(e[2]):
                return True
        state[node] = 2
        return False

    for node in sorted(solution.nodes):
        if state.get(node) is None and cyclic(node):
            return ValidityReport(False, "edges form a cycle", node=node)

    # Every input port of every component node filled exactly once.
    by_port: dict[tuple[str, int], list[Edge]] = {}
    for edge in solution.edges:
        consumer = kb.component(edge[0])
        if consumer is None:
            return ValidityReport(False, "edge consumer is not a component", edge=edge)
        if not 0 <= edge[1] < len(consumer.inputs):
            return ValidityReport(False, "edge port index out of range", edge=edge)
        by_port.setdefault((edge[0], edge[1]), []).append(edge)
    for node_id in sorted(solution.nodes):
        comp = kb.component(node_id)
        if comp is None:
            continue
        for port in range(len(comp.inputs)):
            incoming = by_port.get((node_id, port), [])
            if len(incoming) != 1:
                return ValidityReport(
                    False,
                    f"input port {port} of '{node_id}' has {len(incoming)} producers, expected 1",
                    node=node_id,
                )

    # Producer properties match the consuming ports.
    for edge in sorted(solution.edges):
        expected = kb.component(edge[0]).inputs[edge[1]]
        actual = _produced_property(kb, edge[2])
        if actual != expected:
            return ValidityReport(
                False,
                f"port {edge[1]} of '{edge[0]}' expects "
                f"{expected.property_id}/{expected.unit}, '{edge[2]}' produces "
                f"{actual.property_id}/{actual.unit}",
                edge=edge,
            )

    if _produced_property(kb, solution.root) != goal.produces:
        return ValidityReport(False, "root does not produce the goal property", node=solution.root)

    for node_id in sorted(solution.nodes):
        sensor = kb.sensor(node_id)
        if sensor is not None and not sensor.matches_location(goal.location):
            return ValidityReport(
                False,
                f"sensor '{node_id}' at '{sensor.location}' does not match goal location",
                node=node_id,
            )

    reachable = {solution.root}
    frontier = [solution.root]
    while frontier:
        node = frontier.pop()
        for e in producers.get(node, ()):
            if e[2] not in reachable:
                reachable.add(e[2])
                frontier.append(e[2])
    for node_id in sorted(solution.nodes):
        if node_id not in reachable:
            return ValidityReport(False, "node not reachable from the root", node=node_id)

    return ValidityReport(True)
