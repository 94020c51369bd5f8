from .config import (
    AblationFlags,
    AgentSpec,
    Category,
    InterviewSpec,
    KeyFact,
    ScenarioConfig,
    ScenarioError,
    builtin_scenario_path,
    load_scenario,
    parse_scenario,
    resolve_map_path,
    resolve_scenario_path,
)
from .interview import (
    INDECISIVE,
    AnswerDistribution,
    InterviewResult,
    affinity_score,
    classify_answer,
    interview,
    success_rate,
)
from .metrics import (
    DiffusionReport,
    DiffusionStatus,
    call_site_counts,
    consecutive_talk_durations,
    diffusion_metrics,
    option_enter_counts,
    success_table,
    text_matches,
)
from .runner import (
    ProviderSet,
    RunLog,
    apply_ablation,
    brain_config_for,
    run,
    run_interview_from_dump,
    safe_name,
)

__all__ = [
    "AblationFlags",
    "AgentSpec",
    "AnswerDistribution",
    "Category",
    "DiffusionReport",
    "DiffusionStatus",
    "INDECISIVE",
    "InterviewResult",
    "InterviewSpec",
    "KeyFact",
    "ProviderSet",
    "RunLog",
    "ScenarioConfig",
    "ScenarioError",
    "affinity_score",
    "apply_ablation",
    "brain_config_for",
    "builtin_scenario_path",
    "call_site_counts",
    "classify_answer",
    "consecutive_talk_durations",
    "diffusion_metrics",
    "interview",
    "load_scenario",
    "option_enter_counts",
    "parse_scenario",
    "resolve_map_path",
    "resolve_scenario_path",
    "run",
    "run_interview_from_dump",
    "safe_name",
    "success_rate",
    "success_table",
    "text_matches",
]
