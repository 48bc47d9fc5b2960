"""Domain types shared across the engine: pure data plus validation, no I/O."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Optional

from .errors import ConfigError, OutOfRangeError, TotalMismatchError

SCORE_MIN = 0
SCORE_MAX = 10
TOTAL_MAX = 40


class Tier(str, Enum):
    """The three decomposition levels, ordered easy < intermediate < final."""

    EASY = "easy"
    INTERMEDIATE = "intermediate"
    FINAL = "final"

    @property
    def rank(self) -> int:
        return _TIER_RANK[self]

    @property
    def label(self) -> str:
        """Display form used in prompts and transcripts, e.g. 'Easy'."""
        return self.value.capitalize()

    # str's lexicographic comparisons must not leak through
    def __lt__(self, other):
        if not isinstance(other, Tier):
            return NotImplemented
        return self.rank < other.rank

    def __le__(self, other):
        if not isinstance(other, Tier):
            return NotImplemented
        return self.rank <= other.rank

    def __gt__(self, other):
        if not isinstance(other, Tier):
            return NotImplemented
        return self.rank > other.rank

    def __ge__(self, other):
        if not isinstance(other, Tier):
            return NotImplemented
        return self.rank >= other.rank

    @staticmethod
    def ordered() -> tuple["Tier", "Tier", "Tier"]:
        return (Tier.EASY, Tier.INTERMEDIATE, Tier.FINAL)


_TIER_RANK = {Tier.EASY: 0, Tier.INTERMEDIATE: 1, Tier.FINAL: 2}


class ThoughtStatus(str, Enum):
    PENDING = "pending"
    SELECTED = "selected"
    REJECTED = "rejected"


class Variant(str, Enum):
    """Execution modes differing in request granularity and regeneration caps."""

    SINGLE_STEP_SEQUENTIAL = "single_step_sequential"
    SINGLE_STEP_ONE_SHOT = "single_step_one_shot"
    FEW_SHOT_2 = "few_shot_2"
    MULTI_REQUEST_3 = "multi_request_3"
    MULTI_REQUEST_UNLIMITED = "multi_request_unlimited"


class ScorerMode(str, Enum):
    JUDGE = "judge"
    DETERMINISTIC = "deterministic"
    HUMAN = "human"


class KpmStrategy(str, Enum):
    """Which parts of the propagated history are rendered into prompts."""

    SELECTED_ONLY = "selected_only"
    SELECTED_AND_REJECTED = "selected_and_rejected"
    HIGHEST_SELECTED_ONLY = "highest_selected_only"
    LOWEST_REJECTED_ONLY = "lowest_rejected_only"


@dataclass(frozen=True)
class Task:
    """One problem to reason about: instructions, question, optional gold answer."""

    id: str
    statement: str
    instructions: str = ""
    gold_answer: Optional[str] = None
    source: str = "generic"

    def __post_init__(self):
        if not self.statement.strip():
            raise ValueError("task statement must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "statement": self.statement,
            "instructions": self.instructions,
            "gold_answer": self.gold_answer,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Task":
        return cls(
            id=d["id"],
            statement=d["statement"],
            instructions=d.get("instructions", ""),
            gold_answer=d.get("gold_answer"),
            source=d.get("source", "generic"),
        )


@dataclass(frozen=True)
class DecompositionPlan:
    """One sub-task description per tier."""

    easy: str
    intermediate: str
    final: str

    def __post_init__(self):
        for tier in Tier.ordered():
            if not self.for_tier(tier).strip():
                raise ValueError(f"empty description for tier {tier.value}")

    def for_tier(self, tier: Tier) -> str:
        return {
            Tier.EASY: self.easy,
            Tier.INTERMEDIATE: self.intermediate,
            Tier.FINAL: self.final,
        }[tier]

    def to_dict(self) -> dict[str, str]:
        return {"easy": self.easy, "intermediate": self.intermediate, "final": self.final}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DecompositionPlan":
        return cls(easy=d["easy"], intermediate=d["intermediate"], final=d["final"])


@dataclass(frozen=True)
class ScoreVector:
    """The four feature scores plus their total, all integers on a 0-10/0-40 scale."""

    validity: int
    coherence: int
    simplicity: int
    adaptiveness: int
    total: int

    @classmethod
    def of(cls, validity: int, coherence: int, simplicity: int, adaptiveness: int) -> "ScoreVector":
        """Build a vector with the total computed from its components."""
        return cls(validity, coherence, simplicity, adaptiveness,
                   validity + coherence + simplicity + adaptiveness)

    def components(self) -> tuple[int, int, int, int]:
        return (self.validity, self.coherence, self.simplicity, self.adaptiveness)

    def to_dict(self) -> dict[str, int]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScoreVector":
        return cls(
            validity=d["validity"],
            coherence=d["coherence"],
            simplicity=d["simplicity"],
            adaptiveness=d["adaptiveness"],
            total=d["total"],
        )


def validate_score_vector(v: ScoreVector) -> ScoreVector:
    """Return v unchanged iff components are in range and the total is their sum."""
    for name, value in zip(("validity", "coherence", "simplicity", "adaptiveness"),
                           v.components()):
        if not isinstance(value, int) or not SCORE_MIN <= value <= SCORE_MAX:
            raise OutOfRangeError(f"{name}={value} outside [{SCORE_MIN}, {SCORE_MAX}]")
    expected = sum(v.components())
    if v.total != expected:
        raise TotalMismatchError(f"total {v.total} != component sum {expected}")
    return v


@dataclass(frozen=True)
class Thought:
    """One candidate reasoning step at a tier, with its scores once evaluated."""

    id: str
    tier: Tier
    round: int
    ordinal: int
    text: str
    scores: Optional[ScoreVector] = None
    status: ThoughtStatus = ThoughtStatus.PENDING

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("thought text must be non-empty")
        if self.round < 0:
            raise ValueError("round must be >= 0")
        if self.ordinal < 1:
            raise ValueError("ordinal must be >= 1")
        if self.status is not ThoughtStatus.PENDING and self.scores is None:
            raise ValueError("a selected/rejected thought must carry scores")

    def with_scores(self, scores: ScoreVector, status: ThoughtStatus) -> "Thought":
        return replace(self, scores=scores, status=status)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "tier": self.tier.value,
            "round": self.round,
            "ordinal": self.ordinal,
            "text": self.text,
            "scores": self.scores.to_dict() if self.scores else None,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Thought":
        return cls(
            id=d["id"],
            tier=Tier(d["tier"]),
            round=d["round"],
            ordinal=d["ordinal"],
            text=d["text"],
            scores=ScoreVector.from_dict(d["scores"]) if d.get("scores") else None,
            status=ThoughtStatus(d.get("status", "pending")),
        )


def thought_id(tier: Tier, round_no: int, ordinal: int) -> str:
    """Deterministic thought id, unique within one run."""
    return f"{tier.value}-r{round_no}-t{ordinal}"


@dataclass(frozen=True)
class RoundOutcome:
    """Selection result of one (tier, round): who was generated, kept, dropped."""

    tier: Tier
    round: int
    generated: tuple[Thought, ...]
    selected: tuple[str, ...]
    rejected: tuple[str, ...]
    regenerated: bool = False

    def __post_init__(self):
        generated_ids = {t.id for t in self.generated}
        if set(self.selected) & set(self.rejected):
            raise ValueError("selected and rejected overlap")
        if set(self.selected) | set(self.rejected) != generated_ids:
            raise ValueError("selected + rejected must partition the generated ids")
        if self.generated and not self.selected and not self.regenerated:
            raise ValueError("an empty selection must be flagged as regenerated")

    def thought(self, tid: str) -> Thought:
        for t in self.generated:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def selected_thoughts(self) -> list[Thought]:
        return [t for t in self.generated if t.id in self.selected]

    def rejected_thoughts(self) -> list[Thought]:
        return [t for t in self.generated if t.id in self.rejected]

    def to_dict(self) -> dict[str, Any]:
        return {
            "tier": self.tier.value,
            "round": self.round,
            "generated": [t.to_dict() for t in self.generated],
            "selected": list(self.selected),
            "rejected": list(self.rejected),
            "regenerated": self.regenerated,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RoundOutcome":
        return cls(
            tier=Tier(d["tier"]),
            round=d["round"],
            generated=tuple(Thought.from_dict(t) for t in d["generated"]),
            selected=tuple(d["selected"]),
            rejected=tuple(d["rejected"]),
            regenerated=d.get("regenerated", False),
        )


@dataclass(frozen=True)
class KpmState:
    """Append-only history of round outcomes for one run, in (tier, round) order."""

    run_id: str
    rounds: tuple[RoundOutcome, ...] = ()
    latest_round: dict[str, int] = field(default_factory=dict)

    def outcomes_for(self, tier: Tier) -> list[RoundOutcome]:
        return [o for o in self.rounds if o.tier is tier]

    def last(self) -> Optional[RoundOutcome]:
        return self.rounds[-1] if self.rounds else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "rounds": [o.to_dict() for o in self.rounds],
            "latest_round": dict(self.latest_round),
        }

    def to_jsonl(self) -> str:
        """One line per recorded round; appending rounds only ever extends this."""
        return "".join(canonical_json(o.to_dict()) + "\n" for o in self.rounds)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "KpmState":
        return cls(
            run_id=d["run_id"],
            rounds=tuple(RoundOutcome.from_dict(o) for o in d["rounds"]),
            latest_round=dict(d.get("latest_round", {})),
        )


@dataclass(frozen=True)
class RunConfig:
    """Everything that parameterizes one run."""

    n_thoughts: int = 3
    threshold: int = 30
    variant: Optional[Variant] = None
    regen_cap: int = 3
    scorer_mode: ScorerMode = ScorerMode.JUDGE
    kpm_strategy: KpmStrategy = KpmStrategy.SELECTED_AND_REJECTED
    kpm_round_cap: int = 2
    temperature: float = 0.4
    max_context_tokens: int = 8192
    endpoint: str = ""
    model: str = ""
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.n_thoughts < 1:
            raise ConfigError("n_thoughts must be >= 1")
        if not 0 <= self.threshold <= TOTAL_MAX:
            raise ConfigError(f"threshold must be in [0, {TOTAL_MAX}]")
        if self.regen_cap < 0:
            raise ConfigError("regen_cap must be >= 0")
        if self.kpm_round_cap < 1:
            raise ConfigError("kpm_round_cap must be >= 1")
        if self.max_context_tokens < 1:
            raise ConfigError("max_context_tokens must be >= 1")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["variant"] = self.variant.value if self.variant else None
        d["scorer_mode"] = self.scorer_mode.value
        d["kpm_strategy"] = self.kpm_strategy.value
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        kwargs = dict(d)
        if kwargs.get("variant"):
            kwargs["variant"] = Variant(kwargs["variant"])
        if "scorer_mode" in kwargs:
            kwargs["scorer_mode"] = ScorerMode(kwargs["scorer_mode"])
        if "kpm_strategy" in kwargs:
            kwargs["kpm_strategy"] = KpmStrategy(kwargs["kpm_strategy"])
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in kwargs.items() if k in known})


def default_run_config() -> RunConfig:
    """The stock configuration: 3 thoughts, threshold 30, temperature 0.4."""
    return RunConfig()


@dataclass(frozen=True)
class Exchange:
    """One prompt/response pair, tagged with the request kind that produced it."""

    role: str  # decomposition | generation | scoring | one_shot
    prompt: str
    response: str
    tier: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {"role": self.role, "prompt": self.prompt,
                "response": self.response, "tier": self.tier}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Exchange":
        return cls(role=d["role"], prompt=d["prompt"], response=d["response"],
                   tier=d.get("tier"))


@dataclass
class RunRecord:
    """Full audit trail of one task run."""

    run_id: str
    task: Task
    config: RunConfig
    plan: Optional[DecompositionPlan] = None
    kpm: Optional[KpmState] = None
    transcript: list[Exchange] = field(default_factory=list)
    final_answer: Optional[str] = None
    normalized_answer: Optional[str] = None
    grade: Optional[str] = None  # correct | incorrect
    status: str = "completed"  # completed | failed
    error: Optional[str] = None
    timings: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "run_id": self.run_id,
            "task": self.task.to_dict(),
            "config": self.config.to_dict(),
            "plan": self.plan.to_dict() if self.plan else None,
            "kpm": self.kpm.to_dict() if self.kpm else None,
            "transcript": [e.to_dict() for e in self.transcript],
            "final_answer": self.final_answer,
            "normalized_answer": self.normalized_answer,
            "grade": self.grade,
            "status": self.status,
            "error": self.error,
            "timings": self.timings,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunRecord":
        return cls(
            run_id=d["run_id"],
            task=Task.from_dict(d["task"]),
            config=RunConfig.from_dict(d["config"]),
            plan=DecompositionPlan.from_dict(d["plan"]) if d.get("plan") else None,
            kpm=KpmState.from_dict(d["kpm"]) if d.get("kpm") else None,
            transcript=[Exchange.from_dict(e) for e in d.get("transcript", [])],
            final_answer=d.get("final_answer"),
            normalized_answer=d.get("normalized_answer"),
            grade=d.get("grade"),
            status=d.get("status", "completed"),
            error=d.get("error"),
            timings=d.get("timings", {}),
        )


def canonical_json(obj: Any) -> str:
    """Deterministic single-line JSON used by stores and replay comparisons."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"), sort_keys=True)
