"""Language-model providers: scripted rules, recorded playback, remote HTTP.

Every ``complete`` call appends exactly one usage record to the shared
ledger, tagged with its call site; that ledger is the ground truth for the
cost analysis and the call-accounting checks.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .prompts import Prompt, TemplateSet, estimate_tokens
from .usage import UsageLedger, UsageRecord


class LanguageError(Exception):
    """Transient language-provider failure; callers fail open and retry."""


class ProviderExhaustedError(Exception):
    """Permanent failure (e.g. playback depleted). Deliberately not a
    LanguageError: per-call fail-safes must not swallow it, so a run can
    abort while preserving partial logs."""


class ProviderTimeoutError(LanguageError):
    pass


class ContextOverflowError(LanguageError):
    pass


class RulesParseError(LanguageError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Completion:
    text: str
    usage: UsageRecord


class LanguageProvider:
    """Base provider handling rendering, context limits, and the ledger."""

    name = "base"

    def __init__(
        self,
        templates: Optional[TemplateSet] = None,
        ledger: Optional[UsageLedger] = None,
        context_limit: int = 100_000,
        measure_wall: bool = False,
    ):
        self.templates = templates or TemplateSet.builtin()
        self.ledger = ledger if ledger is not None else UsageLedger()
        self.context_limit = context_limit
        self.measure_wall = measure_wall

    def complete(self, prompt: Prompt, call_site: str, agent_id: str = "") -> Completion:
        rendered = self.templates.render(prompt)
        prompt_tokens = estimate_tokens(rendered)
        if prompt_tokens > self.context_limit:
            raise ContextOverflowError(
                f"{prompt_tokens} tokens exceeds context limit {self.context_limit}"
            )
        start = time.monotonic() if self.measure_wall else None
        text, reported = self._respond(rendered, prompt)
        wall_ms = (time.monotonic() - start) * 1000.0 if start is not None else 0.0
        if reported is not None:
            prompt_tokens, completion_tokens = reported
        else:
            completion_tokens = estimate_tokens(text)
        record = UsageRecord(
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
            wall_ms=wall_ms,
            agent_id=agent_id,
            call_site=call_site,
        )
        self.ledger.append(record)
        return Completion(text=text, usage=record)

    def _respond(
        self, rendered: str, prompt: Prompt
    ) -> tuple[str, Optional[tuple[int, int]]]:
        """Return (text, server-reported (prompt, completion) tokens or None)."""
        raise NotImplementedError


@dataclass
class Rule:
    template_id: str  # "*" matches any template
    substrings: list[str] = field(default_factory=list)
    reply: str = ""

    def matches(self, template_id: str, rendered_lower: str) -> bool:
        if self.template_id != "*" and self.template_id != template_id:
            return False
        return all(s.lower() in rendered_lower for s in self.substrings)


class _SlotDefaults(dict):
    def __missing__(self, key):  # leave unknown placeholders literal
        return "{" + key + "}"


class ScriptedProvider(LanguageProvider):
    """Deterministic provider: first matching rule wins, else the default.

    Replies may reference prompt slots with ``{slot}`` so fixtures can relay
    live state (summaries, observations) through agents deterministically.
    """

    name = "scripted"

    def __init__(
        self,
        rules: list[Rule],
        default_response: str = "",
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.rules = list(rules)
        self.default_response = default_response
        self.rule_misses = 0
        self._miss_lock = threading.Lock()

    def _respond(self, rendered, prompt):
        lower = rendered.lower()
        for rule in self.rules:
            if rule.matches(prompt.template_id, lower):
                return self._fill(rule.reply, prompt), None
        with self._miss_lock:
            self.rule_misses += 1
        return self._fill(self.default_response, prompt), None

    @staticmethod
    def _fill(reply: str, prompt: Prompt) -> str:
        if "{" not in reply:
            return reply
        return reply.format_map(_SlotDefaults(prompt.slots))


class PlaybackProvider(LanguageProvider):
    """Replays a recorded list of completions in order."""

    name = "playback"

    def __init__(self, responses: list[str], loop: bool = False, **kwargs):
        super().__init__(**kwargs)
        self._responses = list(responses)
        self._index = 0
        self._loop = loop
        self._lock = threading.Lock()

    def _respond(self, rendered, prompt):
        with self._lock:
            if self._index >= len(self._responses):
                if not self._loop:
                    raise ProviderExhaustedError("playback exhausted")
                self._index = 0
            text = self._responses[self._index]
            self._index += 1
        return text, None


class RemoteChatProvider(LanguageProvider):
    """Generic chat-completion HTTP backend (provider-agnostic schema).

    Configured by ``lang.endpoint`` and ``lang.api_key_env``; the server's
    reported token counts override the local estimator.
    """

    name = "remote"

    def __init__(
        self,
        endpoint: str,
        api_key_env: str = "",
        model: str = "",
        timeout_ms: int = 30_000,
        retries: int = 1,
        **kwargs,
    ):
        kwargs.setdefault("measure_wall", True)
        super().__init__(**kwargs)
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.model = model
        self.timeout_ms = timeout_ms
        self.retries = retries

    def _respond(self, rendered, prompt):
        payload = json.dumps(
            {
                "model": self.model,
                "messages": [{"role": "user", "content": rendered}],
            }
        ).encode("utf-8")
        headers = {"content-type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env, "")
            if key:
                headers["authorization"] = f"Bearer {key}"
        last_err: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                req = urllib.request.Request(
                    self.endpoint, data=payload, headers=headers, method="POST"
                )
                with urllib.request.urlopen(req, timeout=self.timeout_ms / 1000.0) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                text = body["choices"][0]["message"]["content"]
                usage = body.get("usage") or {}
                reported = None
                if "prompt_tokens" in usage and "completion_tokens" in usage:
                    reported = (int(usage["prompt_tokens"]), int(usage["completion_tokens"]))
                return text, reported
            except (OSError, ValueError, KeyError, json.JSONDecodeError) as err:
                last_err = err
        raise ProviderTimeoutError(f"chat backend {self.endpoint} failed: {last_err}")


_WHEN_RE = re.compile(r"^when:\s*(\S+)\s*(.*)$")
_QUOTED_RE = re.compile(r'"((?:[^"\\]|\\.)*)"')


def scripted_rules_load(
    path: Path | str,
    templates: Optional[TemplateSet] = None,
    ledger: Optional[UsageLedger] = None,
) -> ScriptedProvider:
    """Parse a rules file into a ScriptedProvider.

    Format (UTF-8, one rule per block, order defines precedence)::

        default: I am not sure.

        when: controller contains "nearby: Richard"
        reply: TALK | subgoal: ask Richard about last night

        when: talk
        reply: Let us keep looking.
    """
    rules: list[Rule] = []
    default_response = ""
    pending: Optional[Rule] = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if stripped.startswith("default:"):
                if pending is not None:
                    raise RulesParseError("default: inside a rule block", lineno)
                default_response = stripped[len("default:"):].strip()
                continue
            if stripped.startswith("when:"):
                if pending is not None:
                    raise RulesParseError("when: without a reply: for previous rule", lineno)
                match = _WHEN_RE.match(stripped)
                if not match:
                    raise RulesParseError("malformed when: clause", lineno)
                template_id, rest = match.group(1), match.group(2)
                substrings = [s.replace('\\"', '"') for s in _QUOTED_RE.findall(rest)]
                if rest.strip() and not substrings:
                    raise RulesParseError("contains clause has no quoted substring", lineno)
                pending = Rule(template_id=template_id, substrings=substrings)
                continue
            if stripped.startswith("reply:"):
                if pending is None:
                    raise RulesParseError("reply: without a preceding when:", lineno)
                pending.reply = stripped[len("reply:"):].strip()
                rules.append(pending)
                pending = None
                continue
            raise RulesParseError(f"unrecognized line: {stripped!r}", lineno)
    if pending is not None:
        raise RulesParseError("rule block missing reply:", lineno)
    return ScriptedProvider(
        rules, default_response=default_response, templates=templates, ledger=ledger
    )
