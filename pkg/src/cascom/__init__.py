"""cascom: compose sensors and data-processing components into IoT middleware configurations."""

from .advisor import Recommendation, derivable_context, recommend_deployments
from .codegen import ConfigBundle, generate_bundle
from .costs import CostModel, builtin_models, parse_models, rank_solutions, solution_cost
from .model import (
    ComponentDescription,
    CostVector,
    KBValidationError,
    KnowledgeBase,
    PropertyRef,
    Question,
    SensorDescription,
    TaskDescription,
    build_kb,
)
from .planner import (
    Goal,
    SearchLimits,
    Solution,
    UnknownNodeError,
    ValidityReport,
    plan,
    validate_solution,
)
from .qa import UnknownAnswerError, filter_tasks, next_question
from .skb import SKBSyntaxError, load_kb, parse_kb, save_kb, serialize_kb
from .synth import SplitMix64, synth_kb
from .wizard import WizardScript, run_script

__version__ = "0.1.0"

__all__ = [
    "ComponentDescription",
    "ConfigBundle",
    "CostModel",
    "CostVector",
    "Goal",
    "KBValidationError",
    "KnowledgeBase",
    "PropertyRef",
    "Question",
    "Recommendation",
    "SKBSyntaxError",
    "SearchLimits",
    "SensorDescription",
    "Solution",
    "SplitMix64",
    "TaskDescription",
    "UnknownAnswerError",
    "UnknownNodeError",
    "ValidityReport",
    "WizardScript",
    "build_kb",
    "builtin_models",
    "derivable_context",
    "filter_tasks",
    "generate_bundle",
    "load_kb",
    "next_question",
    "parse_kb",
    "parse_models",
    "plan",
    "rank_solutions",
    "recommend_deployments",
    "run_script",
    "save_kb",
    "serialize_kb",
    "solution_cost",
    "synth_kb",
    "validate_solution",
]
