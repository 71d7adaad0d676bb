"""Linear cost models for evaluating and ranking solutions (wizard phase 6).

A model is a named weight vector over the four per-node cost attributes;
a solution's cost is the weighted sum over its distinct nodes, so a sensor
shared by two ports is paid for once.  The linear form is an explicit,
replaceable strategy: swap in another model by providing different weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import IDENT_RE, KnowledgeBase
from .planner import Solution

Weights = tuple[float, float, float, float]

EQUAL_WEIGHTS: Weights = (1.0, 1.0, 1.0, 1.0)


@dataclass(frozen=True)
class CostModel:
    """Named non-negative weights (energy, bandwidth, latency, price)."""

    name: str
    weights: Weights

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.name):
            raise ValueError(f"invalid cost model name {self.name!r}")
        if len(self.weights) != 4:
            raise ValueError(f"model '{self.name}' needs exactly 4 weights")
        for w in self.weights:
            if not math.isfinite(w) or w < 0:
                raise ValueError(f"model '{self.name}' has an invalid weight {w!r}")
        if not any(w > 0 for w in self.weights):
            raise ValueError(f"model '{self.name}' must have at least one positive weight")


def builtin_models() -> list[CostModel]:
    """The fixed catalog; the first entry is the default selection."""
    return [
        CostModel("lowest-total", (1.0, 1.0, 1.0, 1.0)),
        CostModel("energy-saver", (1.0, 0.0, 0.0, 0.0)),
        CostModel("cheapest", (0.0, 0.0, 0.0, 1.0)),
    ]


def parse_models(text: str) -> list[CostModel]:
    """Parse custom models: one `name w_energy w_bandwidth w_latency w_price` per line.

    Blank lines and lines starting with '#' are ignored.
    """
    models = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 'name w w w w', got {len(parts)} fields")
        try:
            weights = tuple(float(p) for p in parts[1:])
        except ValueError:
            raise ValueError(f"line {lineno}: weights must be numbers") from None
        try:
            models.append(CostModel(parts[0], weights))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return models


def load_models_file(path) -> list[CostModel]:
    with open(path, encoding="utf-8") as fh:
        return parse_models(fh.read())


def resolve_model(name: str, extra_models: list[CostModel] | tuple[CostModel, ...] = ()) -> CostModel:
    """Look up a model by name among the builtins plus any custom models."""
    for model in (*builtin_models(), *extra_models):
        if model.name == name:
            return model
    raise ValueError(f"unknown cost model '{name}'")


def node_cost(entity, weights: Weights) -> float:
    cost = entity.cost.as_tuple()
    return sum(w * c for w, c in zip(weights, cost))


def solution_cost(kb: KnowledgeBase, solution: Solution, model: CostModel) -> float:
    """Weighted cost summed over the solution's distinct nodes."""
    total = 0.0
    for node_id in solution.nodes:
        try:
            entity = kb.entity(node_id)
        except KeyError:
            raise ValueError(f"unknown node id '{node_id}' in solution") from None
        total += node_cost(entity, model.weights)
    return total


def rank_solutions(
    kb: KnowledgeBase, solutions: list[Solution], model: CostModel
) -> list[tuple[Solution, float]]:
    """Solutions with their costs, cheapest first; ties broken canonically.

    The first element is the default selection.
    """
    costed = [(solution, solution_cost(kb, solution, model)) for solution in solutions]
    costed.sort(key=lambda pair: (pair[1], pair[0].sort_key()))
    return costed
