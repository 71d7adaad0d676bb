"""Facet question-answer filtering of the task catalog (wizard phase 1)."""

from __future__ import annotations

from typing import Mapping

from .model import KnowledgeBase, Question, TaskDescription

#: Answers accumulated so far: facet key -> chosen value.
AnswerSet = Mapping[str, str]


class UnknownAnswerError(ValueError):
    """An answer uses a facet key or value the knowledge base does not define."""


def check_answers(kb: KnowledgeBase, answers: AnswerSet) -> None:
    """Validate every answer against the derived questions."""
    for key, value in answers.items():
        question = kb.question_for(key)
        if question is None:
            raise UnknownAnswerError(f"unknown facet key '{key}'")
        if value not in question.options:
            raise UnknownAnswerError(f"unknown value '{value}' for facet '{key}'")


def filter_tasks(kb: KnowledgeBase, answers: AnswerSet) -> list[TaskDescription]:
    """Tasks consistent with every answer, ordered by task id.

    A task lacking an answered facet key is excluded: answering a question
    commits the user to tasks that are actually annotated with it.
    """
    check_answers(kb, answers)
    matched = [
        task
        for task in kb.tasks
        if all(task.facets.get(key) == value for key, value in answers.items())
    ]
    return sorted(matched, key=lambda t: t.id)


def next_question(kb: KnowledgeBase, answers: AnswerSet) -> Question | None:
    """The most discriminating unanswered question, or None.

    Only questions that split the currently matching tasks into at least two
    non-empty value groups qualify; among those, pick the one whose largest
    group is smallest (bounding the remaining candidates in the worst case),
    breaking ties by facet key.
    """
    candidates = filter_tasks(kb, answers)
    if len(candidates) <= 1:
        return None
    best: tuple[int, str] | None = None
    for question in kb.questions:
        key = question.facet_key
        if key in answers:
            continue
        groups: dict[str, int] = {}
        for task in candidates:
            value = task.facets.get(key)
            if value is not None:
                groups[value] = groups.get(value, 0) + 1
        if len(groups) < 2:
            continue
        score = (max(groups.values()), key)
        if best is None or score < best:
            best = score
    return kb.question_for(best[1]) if best else None
