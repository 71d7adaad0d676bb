"""Scripted end-to-end wizard run: answers -> task -> solution -> bundle.

The HTTP session service and the `wizard` CLI subcommand share the helpers
here, so a scripted API session and a batch run produce byte-identical
bundles for the same inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import qa
from .advisor import derivable_context, recommend_deployments
from .codegen import ConfigBundle, generate_bundle
from .costs import CostModel, rank_solutions, resolve_model
from .model import KnowledgeBase, PropertyRef, TaskDescription
from .planner import Goal, SearchLimits, Solution, plan


class WizardError(ValueError):
    """A scripted run cannot proceed (bad input or semantic mismatch)."""


class NoSolutionError(WizardError):
    """Planning found nothing; carries the deployment recommendations."""

    def __init__(self, message: str, recommendations):
        super().__init__(message)
        self.recommendations = recommendations


@dataclass(frozen=True)
class WizardScript:
    """Inputs sufficient to drive all six phases non-interactively."""

    task_id: str
    answers: dict[str, str] = field(default_factory=dict)
    model: str = "lowest-total"
    extras: list[str] = field(default_factory=list)
    solution_index: int = 0

    @classmethod
    def from_json(cls, text: str) -> "WizardScript":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise WizardError(f"script is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise WizardError("script must be a JSON object")
        allowed = {"answers", "task_id", "model", "extras", "solution_index"}
        unknown = set(data) - allowed
        if unknown:
            raise WizardError(f"unknown script fields: {sorted(unknown)}")
        if "task_id" not in data:
            raise WizardError("script is missing 'task_id'")
        return cls(
            task_id=data["task_id"],
            answers=dict(data.get("answers", {})),
            model=data.get("model", "lowest-total"),
            extras=list(data.get("extras", [])),
            solution_index=int(data.get("solution_index", 0)),
        )


def select_task(kb: KnowledgeBase, answers: dict[str, str], task_id: str) -> TaskDescription:
    """The task must exist and be consistent with the given answers."""
    matching = qa.filter_tasks(kb, answers)
    for task in matching:
        if task.id == task_id:
            return task
    if kb.task(task_id) is None:
        raise WizardError(f"unknown task id '{task_id}'")
    raise WizardError(f"task '{task_id}' is filtered out by the given answers")


def resolve_extra_property(kb: KnowledgeBase, task: TaskDescription, property_id: str) -> PropertyRef:
    """Map a bare property id to the derivable PropertyRef at the task's location."""
    candidates = [
        ref
        for ref in derivable_context(kb, task.location)
        if ref.property_id == property_id and ref != task.produces
    ]
    if not candidates:
        raise WizardError(f"extra '{property_id}' is not derivable for task '{task.id}'")
    if len(candidates) > 1:
        units = ", ".join(ref.unit for ref in candidates)
        raise WizardError(f"extra '{property_id}' is ambiguous (units: {units})")
    return candidates[0]


def resolve_extras(
    kb: KnowledgeBase,
    task: TaskDescription,
    extra_refs: list[PropertyRef],
    model: CostModel,
    limits: SearchLimits,
) -> list[tuple[PropertyRef, Solution]]:
    """Pick the best-ranked solution for each extra property.

    Extras are resolved in sorted property order under the selected cost
    model, independent of the order the user picked them in.
    """
    resolved = []
    for ref in sorted(set(extra_refs)):
        ranked = rank_solutions(kb, plan(kb, Goal(ref, task.location), limits), model)
        if not ranked:
            raise WizardError(f"no solution for extra '{ref.property_id}'")
        resolved.append((ref, ranked[0][0]))
    return resolved


def build_bundle(
    kb: KnowledgeBase,
    task: TaskDescription,
    primary: Solution,
    extra_refs: list[PropertyRef],
    model: CostModel,
    limits: SearchLimits,
) -> ConfigBundle:
    extras = resolve_extras(kb, task, extra_refs, model, limits)
    return generate_bundle(kb, task, primary, extras)


def run_script(
    kb: KnowledgeBase,
    script: WizardScript,
    limits: SearchLimits | None = None,
    extra_models: tuple[CostModel, ...] = (),
) -> ConfigBundle:
    """Execute all six phases for a script and return the bundle."""
    limits = limits or SearchLimits()
    try:
        model = resolve_model(script.model, list(extra_models))
        task = select_task(kb, script.answers, script.task_id)
    except qa.UnknownAnswerError as exc:
        raise WizardError(str(exc)) from None
    except ValueError as exc:
        raise WizardError(str(exc)) from None

    solutions = plan(kb, Goal(task.produces, task.location), limits)
    if not solutions:
        raise NoSolutionError(
            f"no solution for task '{task.id}'",
            recommend_deployments(kb, Goal(task.produces, task.location), limits),
        )
    ranked = rank_solutions(kb, solutions, model)
    if not 0 <= script.solution_index < len(ranked):
        raise WizardError(
            f"solution_index {script.solution_index} out of range (0..{len(ranked) - 1})"
        )
    primary = ranked[script.solution_index][0]
    extra_refs = [resolve_extra_property(kb, task, pid) for pid in script.extras]
    return build_bundle(kb, task, primary, extra_refs, model, limits)
