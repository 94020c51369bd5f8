"""The agent brain: novelty-filtered senses, internal states, a cognitive
controller choosing options with subgoals, per-step option execution with
cheap termination checks, and the asynchronously updated self-monitor
summary feeding a summarize-and-forget memory.

The brain is world-agnostic: it receives observations plus a view object
(``tick``, ``nearby_names``, ``location_names``, ``agent_names``,
``at_destination(target)``) and returns at most one external action per
tick. All language calls go through the provider passed in, so scripted,
playback, and remote backends are interchangeable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional

from ..embedding import cosine_similarity
from ..embedding.providers import EmbeddingProvider, ZeroNormError
from ..lang import LanguageError, LanguageProvider, Prompt
from ..memory import HierarchyConfig, MemoryHierarchy, split_sentences
from .actions import (
    Action,
    MoveAction,
    Observation,
    Option,
    SayAction,
    parse_option_completion,
)

EventLogger = Callable[[int, str, dict], None]


@dataclass
class BrainConfig:
    workmem_capacity: int = 5
    recent_capacity: int = 20
    theta: float = 0.9
    link_threshold: float = 0.80
    novelty_window: int = 30
    obs_buffer_size: int = 48
    talk_budget: int = 90
    reflect_budget: int = 1
    move_budget: Optional[int] = None  # MOVE runs until arrival
    repetition_window: int = 4
    repetition_threshold: float = 0.9
    controller_k_long: int = 3
    controller_k_recent: int = 2
    talk_k_long: int = 3
    interview_k_long: int = 5
    interview_k_recent: int = 3
    group_window: int = 6
    prompt_observations: int = 10
    ablate_option_action: bool = False
    ablate_self_monitor: bool = False
    flat_memory: bool = False

    def hierarchy_config(self) -> HierarchyConfig:
        return HierarchyConfig(
            workmem_capacity=self.workmem_capacity,
            recent_capacity=self.recent_capacity,
            theta=self.theta,
            link_threshold=self.link_threshold,
            flat=self.flat_memory,
        )


def _bullets(texts: list[str]) -> str:
    return "\n".join(f"- {t}" for t in texts) if texts else "- none"


class AgentBrain:
    def __init__(
        self,
        agent_id: str,
        persona: str,
        goal: str,
        embedding: EmbeddingProvider,
        config: Optional[BrainConfig] = None,
        log_event: Optional[EventLogger] = None,
        hierarchy: Optional[MemoryHierarchy] = None,
    ):
        self.agent_id = agent_id
        self.persona = persona
        self.goal = goal
        self.embedding = embedding
        self.config = config or BrainConfig()
        self.log_event = log_event or (lambda tick, kind, payload: None)
        self.memory = hierarchy or MemoryHierarchy(
            embedding, owner=agent_id, config=self.config.hierarchy_config()
        )

        self.subgoal = ""
        self.current_option: Optional[Option] = None
        self.option_entered_tick = 0
        self.summary = ""
        self.observation_buffer: list[Observation] = []
        self.recent_own_utterances: list[str] = []
        self.last_tick = 0

        self._seen: dict[tuple, int] = {}
        self._new_obs_since_summary = 0
        self._summary_version = 0
        self._summary_lock = threading.Lock()
        self._termination_reason: Optional[str] = None

        self.summary_update_count = 0
        self.summary_trigger_log: list[tuple[int, int]] = []  # (tick, new obs behind call)
        self.invalid_interview_answers = 0

    # ------------------------------------------------------------------
    # sensing

    def sense(self, incoming: list[Observation]) -> int:
        """Admit novel observations into the buffer and workmem.

        Exact duplicates (kind+speaker+text) within the novelty window are
        dropped; an admitted observation refreshes its window.
        """
        admitted = 0
        for obs in incoming:
            self.last_tick = max(self.last_tick, obs.tick)
            key = obs.dedup_key()
            last = self._seen.get(key)
            if last is not None and obs.tick - last < self.config.novelty_window:
                continue
            self._seen[key] = obs.tick
            self.observation_buffer.append(obs)
            if len(self.observation_buffer) > self.config.obs_buffer_size:
                dropped = self.observation_buffer.pop(0)
                self.log_event(obs.tick, "buffer_overflow", {"dropped": dropped.text})
            self._remember(obs)
            admitted += 1
            self._new_obs_since_summary += 1
        return admitted

    def _remember(self, obs: Observation) -> None:
        if self.config.flat_memory:
            # single-bank ablation: memory is fed by the self-monitor (or, when
            # that is also ablated, by the raw stream below), never by workmem
            if not self.config.ablate_self_monitor:
                return
        try:
            item = self.memory.new_item(obs.formatted(), "observation", obs.tick)
        except ZeroNormError:
            return
        if self.config.ablate_self_monitor:
            # no self-monitor: the buffer streams straight into recentmem
            self.memory.recentmem.add_with_forgetting(item)
            if not self.config.flat_memory:
                self.memory.workmem.add_with_forgetting(item)
        else:
            self.memory.workmem.add_with_forgetting(item)

    def recent_observation_texts(self, limit: Optional[int] = None) -> list[str]:
        limit = limit or self.config.prompt_observations
        return [o.formatted() for o in self.observation_buffer[-limit:]]

    # ------------------------------------------------------------------
    # self-monitor summary

    def summary_due(self) -> bool:
        return not self.config.ablate_self_monitor and self._new_obs_since_summary > 0

    def summary_slot(self) -> str:
        """Prompt text for the summary slot (raw goal+buffer when ablated)."""
        if self.config.ablate_self_monitor:
            recent = "; ".join(self.recent_observation_texts())
            return f"(goal) {self.goal}. (recent observations) {recent}"
        return self.summary or "(nothing yet)"

    def update_summary(self, lm: LanguageProvider, tick: Optional[int] = None) -> Optional[str]:
        """One self-monitor pass; returns the new summary or None.

        Only fires when new observations arrived since the last update. On
        provider failure the old summary stays and the trigger remains set,
        so the update retries next tick.
        """
        tick = self.last_tick if tick is None else tick
        if self.config.ablate_self_monitor:
            return None
        if self._new_obs_since_summary == 0:
            return None
        if self.config.flat_memory:
            events = self.recent_observation_texts(self.config.workmem_capacity)
        else:
            events = [it.text for it in self.memory.workmem.snapshot()]
        snapshot_count = self._new_obs_since_summary
        basis_version = self._summary_version
        prompt = Prompt(
            "summary",
            {
                "persona": self.persona,
                "goal": self.goal,
                "old_summary": self.summary or "(nothing yet)",
                "events": _bullets(events),
            },
        )
        self.summary_trigger_log.append((tick, snapshot_count))
        try:
            completion = lm.complete(prompt, call_site="summary", agent_id=self.agent_id)
        except LanguageError:
            return None
        new_summary = completion.text.strip()
        if not new_summary:
            return None
        installed = self.install_summary(new_summary, basis_version, tick, snapshot_count)
        return new_summary if installed else None

    def install_summary(
        self, new_summary: str, basis_version: int, tick: int, consumed_obs: int
    ) -> bool:
        """Atomically replace the summary; stale updates are discarded.

        The displaced summary is sentence-split into recentmem, which is how
        self-monitor output becomes retrievable memory.
        """
        with self._summary_lock:
            if basis_version != self._summary_version:
                return False
            old = self.summary
            self.summary = new_summary
            self._summary_version += 1
            self._new_obs_since_summary = max(0, self._new_obs_since_summary - consumed_obs)
            self.summary_update_count += 1
        if old:
            for sentence in split_sentences(old):
                try:
                    item = self.memory.new_item(sentence, "summary", tick)
                except ZeroNormError:
                    continue
                self.memory.recentmem.add_with_forgetting(item)
        self.log_event(tick, "summary_update", {"summary": new_summary})
        return True

    # ------------------------------------------------------------------
    # option selection and execution

    def retrieve_texts(self, query: str, k_long: int, k_recent: int = 0) -> list[str]:
        if not query.strip():
            query = self.goal or self.agent_id
        items = self.memory.longmem.retrieve(query, k_long) if k_long else []
        if k_recent and not self.config.flat_memory:
            items = items + self.memory.recentmem.retrieve(query, k_recent)
        return [it.text for it in items]

    def select_option(self, lm: LanguageProvider, view) -> Optional[Option]:
        """One cognitive-controller call: choose an option plus subgoal."""
        memories = self.retrieve_texts(
            self.goal, self.config.controller_k_long, self.config.controller_k_recent
        )
        prompt = Prompt(
            "controller",
            {
                "persona": self.persona,
                "tick": str(view.tick),
                "goal": self.goal,
                "summary": self.summary_slot(),
                "memories": _bullets(memories),
                "observations": _bullets(self.recent_observation_texts()),
                "locations": ", ".join(view.location_names),
            },
        )
        try:
            completion = lm.complete(prompt, call_site="controller", agent_id=self.agent_id)
        except LanguageError:
            return None
        known = set(view.location_names) | set(view.agent_names)
        option, subgoal = parse_option_completion(completion.text, known)
        self.current_option = option
        self.subgoal = subgoal
        self.option_entered_tick = view.tick
        self._termination_reason = None
        self.log_event(
            view.tick,
            "option_enter",
            {"option": option.kind, "parameter": option.parameter, "subgoal": subgoal},
        )
        return option

    def step_option(self, lm: LanguageProvider, view) -> Optional[Action]:
        """Execute one action step inside the current option."""
        option = self.current_option
        if option is None:
            return None
        if option.kind == "MOVE":
            return MoveAction(option.parameter)  # no language call
        if option.kind == "TALK":
            conversation = [
                o.formatted()
                for o in self.observation_buffer
                if o.kind == "utterance"
            ][-self.config.group_window:]
            prompt = Prompt(
                "talk",
                {
                    "persona": self.persona,
                    "goal": self.goal,
                    "subgoal": self.subgoal or "(none)",
                    "summary": self.summary_slot(),
                    "memories": _bullets(
                        self.retrieve_texts(
                            f"{self.goal} {self.subgoal}", self.config.talk_k_long
                        )
                    ),
                    "conversation": _bullets(conversation),
                    "nearby": ", ".join(view.nearby_names) or "nobody",
                },
            )
            try:
                completion = lm.complete(prompt, call_site="talk", agent_id=self.agent_id)
            except LanguageError:
                return None  # silent skip this tick
            text = completion.text.strip()
            if not text:
                return None
            self.recent_own_utterances.append(text)
            keep = self.config.repetition_window + 1
            if len(self.recent_own_utterances) > keep:
                del self.recent_own_utterances[:-keep]
            self.log_event(view.tick, "utterance", {"text": text})
            return SayAction(text)
        # REFLECT: one insight into recentmem
        prompt = Prompt(
            "reflect",
            {
                "persona": self.persona,
                "goal": self.goal,
                "summary": self.summary_slot(),
                "memories": _bullets(
                    self.retrieve_texts(
                        f"{self.goal} {self.subgoal}", self.config.controller_k_long
                    )
                ),
                "observations": _bullets(self.recent_observation_texts()),
            },
        )
        try:
            completion = lm.complete(prompt, call_site="reflect", agent_id=self.agent_id)
        except LanguageError:
            return None
        insight = completion.text.strip()
        if insight:
            try:
                item = self.memory.new_item(insight, "reflection", view.tick)
            except ZeroNormError:
                return None
            bank = self.memory.longmem if self.config.flat_memory else self.memory.recentmem
            bank.add_with_forgetting(item)
            self.log_event(view.tick, "reflection", {"text": insight})
        return None

    def check_termination(self, now: int) -> bool:
        """Cheap, non-language termination test for the current option."""
        option = self.current_option
        if option is None:
            return False
        elapsed = now - self.option_entered_tick
        if option.kind == "REFLECT":
            if elapsed >= self.config.reflect_budget:
                self._termination_reason = "one_shot"
                return True
            return False
        if option.kind == "MOVE":
            if self.config.move_budget is not None and elapsed >= self.config.move_budget:
                self._termination_reason = "budget"
                return True
            return False  # arrival is world-reported via arrived()
        # TALK: time budget or own-repetition detection
        if elapsed >= self.config.talk_budget:
            self._termination_reason = "budget"
            return True
        if self.config.repetition_window > 0 and len(self.recent_own_utterances) >= 2:
            newest = self.recent_own_utterances[-1]
            window = self.recent_own_utterances[-1 - self.config.repetition_window:-1]
            try:
                newest_vec = self.embedding.embed(newest)
                best = max(
                    cosine_similarity(newest_vec, self.embedding.embed(prev))
                    for prev in window
                )
            except ZeroNormError:
                return False
            if best > self.config.repetition_threshold:
                self._termination_reason = "repetition"
                return True
        return False

    def exit_option(self, tick: int, reason: Optional[str] = None) -> None:
        option = self.current_option
        if option is None:
            return
        self.log_event(
            tick,
            "option_exit",
            {"option": option.kind, "reason": reason or self._termination_reason or "unknown"},
        )
        self.current_option = None
        self.subgoal = ""
        self._termination_reason = None

    # ------------------------------------------------------------------
    # per-tick drivers

    def maybe_consolidate(self, lm: LanguageProvider, tick: int) -> None:
        if self.memory.recent_is_full():
            result = self.memory.consolidate(lm, tick=tick)
            if result.moved:
                self.log_event(
                    tick,
                    "consolidation",
                    {
                        "moved": result.moved,
                        "clusters": result.clusters,
                        "llm_calls": result.llm_calls,
                        "evicted": [it.id for it in result.evicted],
                    },
                )

    def tick_action(
        self,
        observations: list[Observation],
        view,
        lm: LanguageProvider,
        inline_summary: bool = True,
    ) -> Optional[Action]:
        """Deterministic per-tick pass: sense, summary, option lifecycle.

        Realtime runners pass ``inline_summary=False`` and drive the summary
        from a separate worker so actions never wait on it.
        """
        self.sense(observations)
        self.last_tick = view.tick
        if inline_summary and self.summary_due():
            self.update_summary(lm, tick=view.tick)
        if self.config.ablate_option_action:
            # ablated controller: option re-chosen every action step
            if self.current_option is not None:
                self.exit_option(view.tick, reason="per_step")
            if self.select_option(lm, view) is None:
                return None
            action = self.step_option(lm, view)
        else:
            if self.current_option is not None:
                arrived = (
                    self.current_option.kind == "MOVE"
                    and view.at_destination(self.current_option.parameter)
                )
                if arrived:
                    self._termination_reason = "arrival"
                    self.exit_option(view.tick)
                elif self.check_termination(view.tick):
                    self.exit_option(view.tick)
            if self.current_option is None:
                if self.select_option(lm, view) is None:
                    return None
            action = self.step_option(lm, view)
        self.maybe_consolidate(lm, view.tick)
        return action

    # ------------------------------------------------------------------
    # interviews

    def reset_volatile(self) -> None:
        """Clear everything outside recentmem/longmem (interview repeats)."""
        self.subgoal = ""
        self.current_option = None
        self.summary = ""
        self.observation_buffer = []
        self.recent_own_utterances = []
        self._seen = {}
        self._new_obs_since_summary = 0
        self._summary_version = 0
        if not self.config.flat_memory:
            self.memory.workmem.clear()

    def initialize_interview_summary(
        self, lm: LanguageProvider, first_question: str, k: int = 15
    ) -> int:
        """Reflection over the memories most relevant to the first question.

        Returns the number of memories used (min(k, |longmem|)). Suppressed
        under the self-monitor ablation.
        """
        if self.config.ablate_self_monitor:
            return 0
        items = self.memory.longmem.retrieve(first_question, k)
        prompt = Prompt(
            "interview_reflection",
            {
                "persona": self.persona,
                "goal": self.goal,
                "question": first_question,
                "memories": _bullets([it.text for it in items]),
            },
        )
        try:
            completion = lm.complete(prompt, call_site="summary", agent_id=self.agent_id)
        except LanguageError:
            return len(items)
        text = completion.text.strip()
        if text:
            self.install_summary(text, self._summary_version, self.last_tick, 0)
        return len(items)

    def answer_interview(self, lm: LanguageProvider, question: str) -> Optional[str]:
        """Answer one interviewer question from summary plus retrieval."""
        memories = self.retrieve_texts(
            question, self.config.interview_k_long, self.config.interview_k_recent
        )
        prompt = Prompt(
            "interview",
            {
                "persona": self.persona,
                "goal": self.goal,
                "summary": self.summary_slot(),
                "memories": _bullets(memories),
                "question": question,
            },
        )
        try:
            completion = lm.complete(prompt, call_site="interview", agent_id=self.agent_id)
        except LanguageError:
            self.invalid_interview_answers += 1
            return None
        return completion.text.strip()
