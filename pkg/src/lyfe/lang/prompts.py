"""Prompt templates and token estimation.

Templates are versioned plain-text files with ``{slot}`` placeholders,
living outside code so prompt changes are data changes. The default set
ships inside the package at ``lyfe/templates``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class PromptError(Exception):
    """Template missing or a declared slot left unfilled."""


@dataclass(frozen=True)
class Prompt:
    template_id: str
    slots: dict[str, str] = field(default_factory=dict)


_SLOT_RE = re.compile(r"\{([a-z_][a-z0-9_]*)\}")


def estimate_tokens(text: str) -> int:
    """Default whitespace-word estimator: words * 4 // 3 (100 words -> 133)."""
    return len(text.split()) * 4 // 3


class TemplateSet:
    """Named templates with declared-slot validation at render time."""

    def __init__(self, templates: dict[str, str]):
        self._templates = dict(templates)

    @classmethod
    def builtin(cls) -> "TemplateSet":
        templates = {}
        root = resources.files("lyfe") / "templates"
        for entry in root.iterdir():
            if entry.name.endswith(".txt"):
                templates[entry.name[:-4]] = entry.read_text(encoding="utf-8")
        return cls(templates)

    @classmethod
    def from_dir(cls, path: Path | str) -> "TemplateSet":
        templates = {}
        for file in sorted(Path(path).glob("*.txt")):
            templates[file.stem] = file.read_text(encoding="utf-8")
        return cls(templates)

    def ids(self) -> list[str]:
        return sorted(self._templates)

    def declared_slots(self, template_id: str) -> set[str]:
        return set(_SLOT_RE.findall(self._template(template_id)))

    def _template(self, template_id: str) -> str:
        try:
            return self._templates[template_id]
        except KeyError:
            raise PromptError(f"unknown template {template_id!r}") from None

    def render(self, prompt: Prompt) -> str:
        text = self._template(prompt.template_id)
        missing = self.declared_slots(prompt.template_id) - set(prompt.slots)
        if missing:
            raise PromptError(
                f"template {prompt.template_id!r} missing slots: {sorted(missing)}"
            )
        return _SLOT_RE.sub(lambda m: str(prompt.slots[m.group(1)]), text)
