"""Core data model: sensors, processing components, tasks, and the knowledge base.

All types are immutable after construction.  A ``KnowledgeBase`` validates
every invariant when built and precomputes the lookup indexes the rest of
the engine relies on, so it can be shared freely across threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_-]*\Z")

#: Sensor location that matches any requested location.
ANY_LOCATION = "*"


class KBValidationError(ValueError):
    """An entity or the knowledge base as a whole violates an invariant."""


def _check_ident(value: str, what: str, owner: str | None = None) -> None:
    where = f" in '{owner}'" if owner else ""
    if not isinstance(value, str) or not IDENT_RE.match(value):
        raise KBValidationError(f"invalid {what} {value!r}{where}")


@dataclass(frozen=True, order=True)
class PropertyRef:
    """A typed phenomenon: an identifier plus the unit it is expressed in."""

    property_id: str
    unit: str

    def validate(self, owner: str | None = None) -> None:
        _check_ident(self.property_id, "property id", owner)
        if not self.unit:
            raise KBValidationError(
                f"empty unit for property '{self.property_id}'"
                + (f" in '{owner}'" if owner else "")
            )


@dataclass(frozen=True)
class CostVector:
    """Per-node cost attributes; units are per sample except price."""

    energy: float = 0.0  # millijoules/sample
    bandwidth: float = 0.0  # bytes/sample
    latency: float = 0.0  # milliseconds
    price: float = 0.0  # currency units

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.energy, self.bandwidth, self.latency, self.price)

    def validate(self, owner: str | None = None) -> None:
        for name, v in zip(("energy", "bandwidth", "latency", "price"), self.as_tuple()):
            if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
                where = f" in '{owner}'" if owner else ""
                raise KBValidationError(f"cost {name} must be finite and >= 0{where}, got {v!r}")


@dataclass(frozen=True)
class SensorDescription:
    """A physical sensor: what it measures, where, and through which wrapper."""

    id: str
    produces: PropertyRef
    location: str
    wrapper_type: str
    cost: CostVector

    def validate(self) -> None:
        _check_ident(self.id, "sensor id")
        self.produces.validate(self.id)
        if not self.location:
            raise KBValidationError(f"sensor '{self.id}' has an empty location")
        if not self.wrapper_type:
            raise KBValidationError(f"sensor '{self.id}' has an empty wrapper type")
        _check_ident(self.wrapper_type, "wrapper type", self.id)
        self.cost.validate(self.id)

    def matches_location(self, location: str | None) -> bool:
        """Location rule: equal, sensor wildcard, or no location requested."""
        return location is None or self.location == ANY_LOCATION or self.location == location


@dataclass(frozen=True)
class ComponentDescription:
    """A data-processing component: typed inputs, one typed output, a class."""

    id: str
    inputs: tuple[PropertyRef, ...]
    output: PropertyRef
    class_name: str
    cost: CostVector

    def validate(self) -> None:
        _check_ident(self.id, "component id")
        if not self.inputs:
            raise KBValidationError(f"component '{self.id}' has no inputs")
        for ref in self.inputs:
            ref.validate(self.id)
        self.output.validate(self.id)
        if self.output in self.inputs:
            raise KBValidationError(f"component '{self.id}' lists its output among its inputs")
        _check_ident(self.class_name, "class name", self.id)
        self.cost.validate(self.id)


@dataclass(frozen=True)
class TaskDescription:
    """A user-facing task: the stream it needs plus facet annotations."""

    id: str
    label: str
    produces: PropertyRef
    location: str | None = None
    facets: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        _check_ident(self.id, "task id")
        if not self.label:
            raise KBValidationError(f"task '{self.id}' has an empty label")
        self.produces.validate(self.id)
        if self.location is not None and not self.location:
            raise KBValidationError(f"task '{self.id}' has an empty location")
        for k, v in self.facets.items():
            _check_ident(k, "facet key", self.id)
            _check_ident(v, "facet value", self.id)


@dataclass(frozen=True)
class Question:
    """A facet question derived from the task catalog."""

    facet_key: str
    text: str
    options: tuple[str, ...]


def derive_questions(tasks: tuple[TaskDescription, ...]) -> tuple[Question, ...]:
    """One question per facet key used by any task; options sorted and unique."""
    values: dict[str, set[str]] = {}
    for task in tasks:
        for key, value in task.facets.items():
            values.setdefault(key, set()).add(value)
    return tuple(
        Question(facet_key=key, text=f"Which {key}?", options=tuple(sorted(values[key])))
        for key in sorted(values)
    )


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable registry of sensors, components, and tasks plus derived questions."""

    sensors: tuple[SensorDescription, ...]
    components: tuple[ComponentDescription, ...]
    tasks: tuple[TaskDescription, ...]
    questions: tuple[Question, ...]

    def __post_init__(self) -> None:
        by_id: dict[str, object] = {}
        for entity in (*self.sensors, *self.components, *self.tasks):
            if entity.id in by_id:
                raise KBValidationError(f"duplicate id '{entity.id}'")
            by_id[entity.id] = entity
        sensors_by_prop: dict[PropertyRef, list[SensorDescription]] = {}
        for s in self.sensors:
            sensors_by_prop.setdefault(s.produces, []).append(s)
        components_by_output: dict[PropertyRef, list[ComponentDescription]] = {}
        for c in self.components:
            components_by_output.setdefault(c.output, []).append(c)
        for group in sensors_by_prop.values():
            group.sort(key=lambda s: s.id)
        for group in components_by_output.values():
            group.sort(key=lambda c: c.id)
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_sensors_by_prop", sensors_by_prop)
        object.__setattr__(self, "_components_by_output", components_by_output)
        object.__setattr__(self, "_tasks_by_id", {t.id: t for t in self.tasks})

    # -- lookups ---------------------------------------------------------

    def entity(self, node_id: str):
        """Sensor or component (or task) with the given id; KeyError if unknown."""
        return self._by_id[node_id]

    def sensor(self, node_id: str) -> SensorDescription | None:
        e = self._by_id.get(node_id)
        return e if isinstance(e, SensorDescription) else None

    def component(self, node_id: str) -> ComponentDescription | None:
        e = self._by_id.get(node_id)
        return e if isinstance(e, ComponentDescription) else None

    def task(self, task_id: str) -> TaskDescription | None:
        return self._tasks_by_id.get(task_id)

    def sensors_producing(self, ref: PropertyRef) -> tuple[SensorDescription, ...]:
        return tuple(self._sensors_by_prop.get(ref, ()))

    def components_producing(self, ref: PropertyRef) -> tuple[ComponentDescription, ...]:
        return tuple(self._components_by_output.get(ref, ()))

    def question_for(self, facet_key: str) -> Question | None:
        for q in self.questions:
            if q.facet_key == facet_key:
                return q
        return None


def build_kb(
    sensors: list[SensorDescription] | tuple[SensorDescription, ...] = (),
    components: list[ComponentDescription] | tuple[ComponentDescription, ...] = (),
    tasks: list[TaskDescription] | tuple[TaskDescription, ...] = (),
) -> KnowledgeBase:
    """Validate all entities and assemble a knowledge base with derived questions."""
    sensors = tuple(sensors)
    components = tuple(components)
    tasks = tuple(tasks)
    for entity in (*sensors, *components, *tasks):
        entity.validate()
    return KnowledgeBase(
        sensors=sensors,
        components=components,
        tasks=tasks,
        questions=derive_questions(tasks),
    )
