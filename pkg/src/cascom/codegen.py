"""Deterministic rendering of the configuration bundle for a chosen solution.

Three files per bundle: the virtual-sensor descriptor (XML), the wrapper
mapping (properties), and the declarative stream plan.  Rendering is pure
and byte-stable: the same solution always yields identical files.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .model import KnowledgeBase, PropertyRef, TaskDescription
from .planner import Edge, Goal, Solution, validate_solution


@dataclass(frozen=True)
class ConfigBundle:
    name: str
    files: tuple[tuple[str, str], ...]

    def as_dict(self) -> dict[str, str]:
        return dict(self.files)


def _xml_attr(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def _merge_graphs(primary: Solution, extras: list[tuple[PropertyRef, Solution]]):
    """Union of the primary and extra solution graphs.

    Node ids merge across solutions, so each port must resolve to the same
    producer everywhere; a conflict means the chosen extras are incompatible.
    """
    nodes: set[str] = set(primary.nodes)
    ports: dict[tuple[str, int], str] = {}
    edges: set[Edge] = set()
    for _, solution in [(None, primary)] + list(extras):
        nodes.update(solution.nodes)
        for edge in solution.edges:
            seen = ports.setdefault((edge[0], edge[1]), edge[2])
            if seen != edge[2]:
                raise ValueError(
                    f"conflicting producers for port {edge[1]} of '{edge[0]}': "
                    f"'{seen}' vs '{edge[2]}'"
                )
            edges.add(edge)
    return nodes, edges


def _topological_components(kb: KnowledgeBase, nodes: set[str], edges: set[Edge]) -> list[str]:
    """Component nodes, producers before consumers, ties broken by node id."""
    comp_nodes = sorted(n for n in nodes if kb.component(n) is not None)
    consumers: dict[str, list[str]] = {c: [] for c in comp_nodes}
    indegree = {c: 0 for c in comp_nodes}
    for consumer, _, producer in edges:
        if producer in indegree and consumer in indegree:
            consumers[producer].append(consumer)
            indegree[consumer] += 1
    ready = [c for c in comp_nodes if indegree[c] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        node = heapq.heappop(ready)
        order.append(node)
        for consumer in consumers[node]:
            indegree[consumer] -= 1
            if indegree[consumer] == 0:
                heapq.heappush(ready, consumer)
    return order


def generate_bundle(
    kb: KnowledgeBase,
    task: TaskDescription,
    primary: Solution,
    extras: list[tuple[PropertyRef, Solution]] | None = None,
) -> ConfigBundle:
    """Render `<task id>.vsd.xml`, `.wrappers.properties`, and `.plan.txt`."""
    extras = list(extras or [])

    report = validate_solution(kb, Goal(task.produces, task.location), primary)
    if not report.ok:
        raise ValueError(f"invalid primary solution: {report.reason}")
    seen_props = {task.produces.property_id}
    for ref, solution in extras:
        if ref.property_id in seen_props:
            raise ValueError(f"duplicate output property '{ref.property_id}'")
        seen_props.add(ref.property_id)
        report = validate_solution(kb, Goal(ref, task.location), solution)
        if not report.ok:
            raise ValueError(f"invalid solution for extra '{ref.property_id}': {report.reason}")

    extras.sort(key=lambda pair: pair[0].property_id)
    nodes, edges = _merge_graphs(primary, extras)
    comp_order = _topological_components(kb, nodes, edges)
    sensor_ids = sorted(n for n in nodes if kb.sensor(n) is not None)

    name = task.id
    vsd = _render_vsd(kb, name, task.produces, extras, comp_order, sensor_ids)
    wrappers = _render_wrappers(kb, sensor_ids)
    plan_txt = _render_plan(kb, primary, extras, edges, comp_order)
    return ConfigBundle(
        name=name,
        files=(
            (f"{name}.vsd.xml", vsd),
            (f"{name}.wrappers.properties", wrappers),
            (f"{name}.plan.txt", plan_txt),
        ),
    )


def _render_vsd(kb, name, primary_ref, extras, comp_order, sensor_ids) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<virtual-sensor name="{_xml_attr(name)}">',
        "  <output-structure>",
    ]
    for ref in [primary_ref] + [ref for ref, _ in extras]:
        lines.append(
            f'    <field name="{_xml_attr(ref.property_id.lower())}" unit="{_xml_attr(ref.unit)}"/>'
        )
    lines.append("  </output-structure>")
    if comp_order:
        lines.append("  <processing>")
        for node_id in comp_order:
            comp = kb.component(node_id)
            lines.append(
                f'    <processor id="{_xml_attr(node_id)}" class="{_xml_attr(comp.class_name)}"/>'
            )
        lines.append("  </processing>")
    else:
        lines.append("  <processing/>")
    lines.append("  <sources>")
    for node_id in sensor_ids:
        sensor = kb.sensor(node_id)
        lines.append(
            f'    <source alias="{_xml_attr(node_id)}" wrapper="{_xml_attr(sensor.wrapper_type)}"/>'
        )
    lines.append("  </sources>")
    lines.append("</virtual-sensor>")
    return "\n".join(lines) + "\n"


def _render_wrappers(kb, sensor_ids) -> str:
    lines = []
    for node_id in sensor_ids:
        sensor = kb.sensor(node_id)
        lines.append(f"{node_id}={sensor.wrapper_type}:{sensor.location}")
    return "\n".join(lines) + ("\n" if lines else "")


def _render_plan(kb, primary, extras, edges, comp_order) -> str:
    producer_at: dict[tuple[str, int], str] = {(e[0], e[1]): e[2] for e in edges}
    lines = []
    for node_id in comp_order:
        comp = kb.component(node_id)
        args = ", ".join(producer_at[(node_id, port)] for port in range(len(comp.inputs)))
        lines.append(f"STREAM {node_id} <- {comp.class_name}({args})")
    lines.append(f"OUTPUT {primary.root}")
    for ref, solution in extras:
        lines.append(f"OUTPUT {solution.root} # extra:{ref.property_id}")
    return "\n".join(lines) + "\n"
