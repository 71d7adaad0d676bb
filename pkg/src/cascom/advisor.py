"""Deployment recommendations and derivable-context closure (wizard phases 4 and 5)."""

from __future__ import annotations

from dataclasses import dataclass

from .costs import EQUAL_WEIGHTS, node_cost
from .model import KnowledgeBase, PropertyRef
from .planner import (
    PLACEHOLDER_PREFIX,
    Goal,
    SearchLimits,
    Solution,
    placeholder_ref,
    plan,
    relaxed_plan_stream,
)


@dataclass(frozen=True)
class Recommendation:
    """Sensors to deploy so an otherwise unsatisfiable goal becomes plannable.

    ``partial`` is the would-be solution with ``missing:`` placeholder leaves
    standing in for the sensors listed in ``missing``.
    """

    missing: tuple[tuple[PropertyRef, str | None], ...]
    partial: Solution
    present_cost: float


def recommend_deployments(
    kb: KnowledgeBase, goal: Goal, limits: SearchLimits | None = None
) -> list[Recommendation]:
    """Rank minimal sensor deployments that would complete the failed plan.

    Returns [] when the goal is already satisfiable.  Otherwise reruns the
    search allowing a placeholder leaf wherever a required property has no
    producer at all, and ranks the results by (number of distinct missing
    sensor specs, cost of the already-available nodes, canonical order).
    """
    limits = limits or SearchLimits()
    if plan(kb, goal, limits):
        return []

    recommendations = []
    for partial in relaxed_plan_stream(kb, goal, limits.max_depth):
        holes = partial.placeholder_ids()
        if not holes:  # cannot happen when plan() is empty; skip defensively
            continue
        missing = tuple(
            (placeholder_ref(node_id), goal.location) for node_id in holes
        )
        present = sum(
            node_cost(kb.entity(n), EQUAL_WEIGHTS)
            for n in partial.nodes
            if not n.startswith(PLACEHOLDER_PREFIX)
        )
        recommendations.append(Recommendation(missing=missing, partial=partial, present_cost=present))

    recommendations.sort(
        key=lambda r: (len(r.missing), r.present_cost, r.partial.sort_key())
    )
    return recommendations[: limits.max_solutions]


def derivable_context(kb: KnowledgeBase, location: str | None = None) -> list[PropertyRef]:
    """Every property producible at the location: sensor outputs closed under components.

    Least fixed point: start from sensors matching the location, then keep
    adding outputs of components whose inputs are all already derivable.
    """
    derivable: set[PropertyRef] = {
        s.produces for s in kb.sensors if s.matches_location(location)
    }
    pending = [c for c in kb.components if c.output not in derivable]
    changed = True
    while changed:
        changed = False
        remaining = []
        for comp in pending:
            if all(ref in derivable for ref in comp.inputs):
                derivable.add(comp.output)
                changed = True
            else:
                remaining.append(comp)
        pending = remaining
    return sorted(derivable)
