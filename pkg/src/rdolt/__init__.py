"""Recursive three-tier reasoning engine with thought scoring and knowledge propagation."""

from .backend import (
    CompletionRequest,
    HttpBackend,
    ScriptedBackend,
    load_script,
    resolve_backend,
    scripted_replay,
)
from .bench import (
    BenchmarkItem,
    SweepReport,
    gen_last_letter,
    grade,
    last_letter_gold,
    last_letter_item,
    load_dataset,
    run_item,
    sweep_thought_counts,
    sweep_thresholds,
)
from .decomposer import build_decomposition_prompt, decompose, parse_plan
from .generator import (
    build_generation_prompt,
    generate_thoughts,
    generate_thoughts_sequential,
    parse_thought_list,
)
from .kpm import needs_regeneration, record_round, render_kpm_context, visible_history
from .model import (
    DecompositionPlan,
    KpmState,
    KpmStrategy,
    RoundOutcome,
    RunConfig,
    RunRecord,
    ScoreVector,
    ScorerMode,
    Task,
    Thought,
    ThoughtStatus,
    Tier,
    Variant,
    default_run_config,
    validate_score_vector,
)
from .pipeline import (
    extract_final_answer,
    normalize_answer,
    run_one_shot,
    run_task,
    run_vanilla,
    run_variant,
)
from .scoring import (
    DeterministicScorer,
    HumanScorer,
    JudgeScorer,
    RuleSet,
    default_rule_set,
    deterministic_score,
    human_score,
    judge_score,
    make_scorer,
    select_thoughts,
)
from .store import append_run_record, default_store_path, read_run_records

__version__ = "0.1.0"
