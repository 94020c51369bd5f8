"""Options, observations, external actions, and the controller-output parser."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

OPTION_KINDS = ("TALK", "MOVE", "REFLECT")
OBSERVATION_KINDS = ("utterance", "arrival", "proximity", "system")


@dataclass(frozen=True)
class Option:
    kind: str
    parameter: str = ""  # MOVE destination (location or agent name); empty otherwise

    def __post_init__(self):
        if self.kind not in OPTION_KINDS:
            raise ValueError(f"unknown option kind {self.kind!r}")


@dataclass(frozen=True)
class Observation:
    kind: str
    speaker: Optional[str]
    text: str
    tick: int

    def __post_init__(self):
        if self.kind not in OBSERVATION_KINDS:
            raise ValueError(f"unknown observation kind {self.kind!r}")
        if not self.text:
            raise ValueError("observation text must be non-empty")

    def dedup_key(self) -> tuple:
        return (self.kind, self.speaker, self.text)

    def formatted(self) -> str:
        if self.kind == "utterance" and self.speaker:
            return f"{self.speaker} said: {self.text}"
        return self.text


@dataclass(frozen=True)
class SayAction:
    text: str


@dataclass(frozen=True)
class MoveAction:
    target: str


Action = SayAction | MoveAction

FALLBACK = (Option("REFLECT"), "reconsider")

_KIND_RE = re.compile(r"\b(TALK|MOVE|REFLECT)\b", re.IGNORECASE)
_SUBGOAL_RE = re.compile(r"subgoal\s*:\s*(.*)", re.IGNORECASE)


def parse_option_completion(
    text: str, known_targets: Optional[set[str]] = None
) -> tuple[Option, str]:
    """Forgiving parse of ``<OPTION> [param] | subgoal: <text>``.

    Case-insensitive keyword scan; anything unparseable (including a MOVE
    target not in ``known_targets``) falls back to REFLECT / "reconsider"
    so every completion maps to a defined behavior.
    """
    match = _KIND_RE.search(text)
    if not match:
        return FALLBACK
    kind = match.group(1).upper()
    subgoal_match = _SUBGOAL_RE.search(text)
    subgoal = subgoal_match.group(1).strip() if subgoal_match else ""
    if kind != "MOVE":
        return Option(kind), subgoal
    tail = text[match.end():]
    param = tail.split("|", 1)[0].strip().strip(".,;:")
    if not param:
        return FALLBACK
    if known_targets is not None:
        resolved = _resolve_target(param, known_targets)
        if resolved is None:
            return FALLBACK
        param = resolved
    return Option("MOVE", param), subgoal


def _resolve_target(param: str, known: set[str]) -> Optional[str]:
    lowered = {name.lower(): name for name in known}
    return lowered.get(param.lower())
