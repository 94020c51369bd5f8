from .prompts import Prompt, PromptError, TemplateSet, estimate_tokens
from .providers import (
    Completion,
    ContextOverflowError,
    LanguageError,
    LanguageProvider,
    PlaybackProvider,
    ProviderExhaustedError,
    ProviderTimeoutError,
    RemoteChatProvider,
    Rule,
    RulesParseError,
    ScriptedProvider,
    scripted_rules_load,
)
from .usage import CALL_SITES, CostModel, CostReport, UsageLedger, UsageRecord, cost_report

__all__ = [
    "CALL_SITES",
    "Completion",
    "ContextOverflowError",
    "CostModel",
    "CostReport",
    "LanguageError",
    "LanguageProvider",
    "PlaybackProvider",
    "ProviderExhaustedError",
    "Prompt",
    "PromptError",
    "ProviderTimeoutError",
    "RemoteChatProvider",
    "Rule",
    "RulesParseError",
    "ScriptedProvider",
    "TemplateSet",
    "UsageLedger",
    "UsageRecord",
    "cost_report",
    "estimate_tokens",
    "scripted_rules_load",
]
