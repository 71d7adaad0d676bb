"""Command-line entry points: validate, plan, wizard, serve, synth, bench.

Exit codes: 0 success, 1 validation or semantic failure, 2 usage error.
All diagnostics go to stderr; machine-readable output goes to stdout as JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .advisor import recommend_deployments
from .costs import load_models_file, rank_solutions, resolve_model
from .model import KBValidationError, KnowledgeBase, PropertyRef
from .planner import Goal, SearchLimits, plan
from .skb import SKBSyntaxError, load_kb, save_kb
from .synth import synth_kb
from .wizard import NoSolutionError, WizardError, WizardScript, run_script


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _load(path: str) -> KnowledgeBase:
    return load_kb(path)


def _limits(args) -> SearchLimits:
    return SearchLimits(max_depth=args.limit_depth, max_solutions=args.limit_solutions)


def _extra_models(args):
    if getattr(args, "models", None):
        return tuple(load_models_file(args.models))
    return ()


def _solution_json(solution, cost=None) -> dict:
    data = {
        "root": solution.root,
        "nodes": sorted(solution.nodes),
        "edges": [list(e) for e in sorted(solution.edges)],
    }
    if cost is not None:
        data["cost"] = cost
    return data


def _recommendation_json(rec) -> dict:
    return {
        "missing": [
            {"property_id": ref.property_id, "unit": ref.unit, "location": loc}
            for ref, loc in rec.missing
        ],
        "present_cost": rec.present_cost,
        "partial": _solution_json(rec.partial),
    }


def cmd_validate(args) -> int:
    try:
        _load(args.kb)
    except (SKBSyntaxError, KBValidationError, OSError) as exc:
        return _fail(str(exc))
    return 0


def cmd_plan(args) -> int:
    try:
        kb = _load(args.kb)
        task = kb.task(args.task)
        if task is None:
            return _fail(f"unknown task id '{args.task}'")
        model = resolve_model(args.model, list(_extra_models(args)))
        goal = Goal(task.produces, task.location)
        ranked = rank_solutions(kb, plan(kb, goal, _limits(args)), model)
    except (SKBSyntaxError, KBValidationError, ValueError, OSError) as exc:
        return _fail(str(exc))
    out = {
        "goal": {
            "property_id": goal.produces.property_id,
            "unit": goal.produces.unit,
            "location": goal.location,
        },
        "model": model.name,
        "solutions": [_solution_json(s, c) for s, c in ranked],
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_wizard(args) -> int:
    try:
        kb = _load(args.kb)
        script = WizardScript.from_json(Path(args.script).read_text(encoding="utf-8"))
        bundle = run_script(kb, script, _limits(args), _extra_models(args))
    except NoSolutionError as exc:
        print(
            json.dumps(
                {
                    "error": str(exc),
                    "recommendations": [_recommendation_json(r) for r in exc.recommendations],
                },
                indent=2,
                sort_keys=True,
            ),
            file=sys.stderr,
        )
        return 1
    except (SKBSyntaxError, KBValidationError, WizardError, ValueError, OSError) as exc:
        return _fail(str(exc))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for filename, content in bundle.files:
        (out_dir / filename).write_bytes(content.encode("utf-8"))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        kb = _load(args.kb)
        app = create_app(kb, extra_models=_extra_models(args))
    except (SKBSyntaxError, KBValidationError, ValueError, OSError) as exc:
        return _fail(str(exc))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_synth(args) -> int:
    try:
        kb = synth_kb(args.sensors, args.components, args.seed)
        save_kb(kb, args.out)
    except (ValueError, OSError) as exc:
        return _fail(str(exc))
    return 0


def cmd_bench(args) -> int:
    started = time.perf_counter()
    try:
        kb = _load(args.kb)
    except (SKBSyntaxError, KBValidationError, OSError) as exc:
        return _fail(str(exc))
    loaded = time.perf_counter()

    units = sorted(
        {s.produces.unit for s in kb.sensors if s.produces.property_id == args.goal}
        | {c.output.unit for c in kb.components if c.output.property_id == args.goal}
    )
    if not units:
        return _fail(f"no producer of property '{args.goal}' in the knowledge base")
    if len(units) > 1:
        return _fail(f"property '{args.goal}' is ambiguous (units: {', '.join(units)})")

    plan(kb, Goal(PropertyRef(args.goal, units[0])))
    finished = time.perf_counter()
    print(
        json.dumps(
            {
                "load_ms": round((loaded - started) * 1000, 3),
                "plan_ms": round((finished - loaded) * 1000, 3),
                "total_ms": round((finished - started) * 1000, 3),
            },
            sort_keys=True,
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascom",
        description="Compose sensors and processing components into middleware configurations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a knowledge base")
    p.add_argument("kb")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plan", help="plan and rank solutions for a task")
    p.add_argument("--kb", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--model", default="lowest-total")
    p.add_argument("--models", help="file with custom cost models")
    p.add_argument("--limit-depth", type=int, default=8)
    p.add_argument("--limit-solutions", type=int, default=64)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("wizard", help="run all six phases from a script file")
    p.add_argument("--kb", required=True)
    p.add_argument("--script", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--models", help="file with custom cost models")
    p.add_argument("--limit-depth", type=int, default=8)
    p.add_argument("--limit-solutions", type=int, default=64)
    p.set_defaults(func=cmd_wizard)

    p = sub.add_parser("serve", help="serve the session API over HTTP")
    p.add_argument("--kb", required=True)
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--models", help="file with custom cost models")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("synth", help="generate a deterministic synthetic knowledge base")
    p.add_argument("--sensors", type=int, required=True)
    p.add_argument("--components", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="time loading the KB and planning a goal")
    p.add_argument("--kb", required=True)
    p.add_argument("--goal", required=True, help="property id to plan for")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
