"""The interview protocol and answer scoring.

Per repeat: reset volatile state on a fresh copy of the memory, initialize
the summary by reflecting over the memories most relevant to the first
question, then ask the questions in order with memory and summary updates
in between. Stochasticity, if any, lives in the provider; the harness
itself is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from ..agent.actions import Observation
from ..agent.brain import AgentBrain
from ..lang import LanguageProvider
from .config import Category

INDECISIVE = "indecisive"


@dataclass
class InterviewResult:
    questions: list[str]
    answers: list[list[Optional[str]]]  # [repeat][question]
    reflection_counts: list[int]
    invalid_repeats: list[int] = field(default_factory=list)

    def answers_to(self, question_index: int = 0) -> list[Optional[str]]:
        return [repeat[question_index] for repeat in self.answers]


def interview(
    brain: AgentBrain,
    questions: Sequence[str],
    lm: LanguageProvider,
    repeats: int = 3,
    reflection_k: int = 15,
) -> InterviewResult:
    """Run the full protocol; repeats are independent (memory cloned)."""
    if not questions:
        raise ValueError("interview needs at least one question")
    base_memory = brain.memory
    result = InterviewResult(questions=list(questions), answers=[], reflection_counts=[])
    try:
        for repeat in range(repeats):
            brain.memory = base_memory.clone()
            brain.reset_volatile()
            count = brain.initialize_interview_summary(lm, questions[0], k=reflection_k)
            result.reflection_counts.append(count)
            tick = brain.last_tick
            repeat_answers: list[Optional[str]] = []
            valid = True
            for question in questions:
                tick += 1
                brain.sense([Observation("utterance", "interviewer", question, tick)])
                if brain.summary_due():
                    brain.update_summary(lm, tick=tick)
                answer = brain.answer_interview(lm, question)
                if answer is None:
                    valid = False
                repeat_answers.append(answer)
                brain.maybe_consolidate(lm, tick)
            result.answers.append(repeat_answers)
            if not valid:
                result.invalid_repeats.append(repeat)
    finally:
        brain.memory = base_memory
        brain.reset_volatile()
    return result


def classify_answer(answer: Optional[str], categories: Sequence[Category]) -> str:
    """Keyword categorization: exactly one matching category wins.

    Zero or multiple matches (both clubs, a club defined by someone else's
    choice, no club at all) are indecisive.
    """
    if not answer:
        return INDECISIVE
    low = answer.lower()
    matches = [
        c.name for c in categories if any(k.lower() in low for k in c.keywords)
    ]
    if len(matches) == 1:
        return matches[0]
    return INDECISIVE


@dataclass(frozen=True)
class AnswerDistribution:
    """Per-category probabilities from repeated interviews (exact counts)."""

    counts: dict
    repeats: int
    categories: tuple[str, ...]

    @classmethod
    def from_answers(
        cls, answers: Sequence[Optional[str]], categories: Sequence[Category]
    ) -> "AnswerDistribution":
        names = tuple(c.name for c in categories)
        counts = {name: 0 for name in names}
        counts[INDECISIVE] = 0
        for answer in answers:
            counts[classify_answer(answer, categories)] += 1
        return cls(counts=counts, repeats=len(answers), categories=names)

    def probability(self, name: str) -> float:
        return self.counts.get(name, 0) / self.repeats

    def probabilities(self) -> dict:
        return {name: count / self.repeats for name, count in self.counts.items()}


def affinity_score(a: AnswerDistribution, b: AnswerDistribution) -> float:
    """Probability the two agents pick the same category, independently.

    Indecisive answers contribute no agreement. Computed with exact
    rationals, returned as float.
    """
    if set(a.categories) != set(b.categories):
        raise ValueError(
            f"category sets differ: {sorted(a.categories)} vs {sorted(b.categories)}"
        )
    total = Fraction(0)
    for name in a.categories:
        total += Fraction(a.counts.get(name, 0), a.repeats) * Fraction(
            b.counts.get(name, 0), b.repeats
        )
    return float(total)


def success_rate(
    answers: Sequence[Optional[str]],
    target: str,
    categories: Optional[Sequence[Category]] = None,
) -> float:
    """Fraction of repeats whose (classified) answer equals the target."""
    if not answers:
        return 0.0
    if categories is not None:
        labels = [classify_answer(answer, categories) for answer in answers]
    else:
        labels = [answer if answer is not None else INDECISIVE for answer in answers]
    return sum(1 for label in labels if label == target) / len(labels)
