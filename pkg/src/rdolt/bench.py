"""Dataset loading, grading, and the threshold / thought-count sweeps."""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .backend import Backend
from .errors import MalformedError, NotNumericError, RdoltError, UngradableError
from .model import RunConfig, RunRecord, Task, Tier, Variant
from .pipeline import (
    answer_kind_for_source,
    attributed_tier,
    normalize_answer,
    replace_config,
    run_variant,
)
from .scoring import make_scorer

DEFAULT_THRESHOLDS = (25, 30, 35, 40)
DEFAULT_THOUGHT_COUNTS = (3, 5, 7)

BackendSource = Union[Backend, Callable[[], Backend]]

DEFAULT_WORDS = (
    "artificial intelligence is the future machine learning model reasons "
    "about numbers words logic proof garden river mountain silver circuit "
    "window planet theory answer puzzle memory typical orange violet"
).split()


@dataclass(frozen=True)
class BenchmarkItem:
    """A gradable task: the task itself plus how its answers compare."""

    task: Task
    kind: str  # numeric | string | auto

    def __post_init__(self):
        if self.task.gold_answer is None:
            raise ValueError("benchmark items need a gold answer")


@dataclass
class SweepCell:
    """Results for one setting of a sweep axis."""

    setting: str
    attempted: int = 0
    correct: int = 0
    incorrect: int = 0
    ungradable: int = 0
    solved_by_tier: dict[str, int] = field(
        default_factory=lambda: {t.value: 0 for t in Tier.ordered()})

    @property
    def total_solved(self) -> int:
        return sum(self.solved_by_tier.values())

    @property
    def rate_pct(self) -> float:
        return 100.0 * self.correct / self.attempted if self.attempted else 0.0


@dataclass
class SweepReport:
    axis: str  # thresholds | thoughts
    columns: list
    cells: list[SweepCell] = field(default_factory=list)

    def cell(self, setting: str) -> SweepCell:
        for c in self.cells:
            if c.setting == setting:
                return c
        raise KeyError(setting)

    def to_csv(self) -> str:
        lines = ["axis,setting,easy_solved,intermediate_solved,final_solved,"
                 "total,rate_pct"]
        for c in self.cells:
            tiers = c.solved_by_tier
            lines.append(
                f"{self.axis},{c.setting},{tiers['easy']},{tiers['intermediate']},"
                f"{tiers['final']},{c.total_solved},{c.rate_pct:.2f}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        if self.axis == "thresholds":
            return self._thresholds_table()
        header = f"{'thoughts':>8} {'easy':>6} {'interm':>6} {'final':>6} {'total':>6} {'rate%':>8}"
        rows = [header, "-" * len(header)]
        for c in self.cells:
            tiers = c.solved_by_tier
            rows.append(f"{c.setting:>8} {tiers['easy']:>6} {tiers['intermediate']:>6} "
                        f"{tiers['final']:>6} {c.total_solved:>6} {c.rate_pct:>8.2f}")
        return "\n".join(rows) + "\n"

    def _thresholds_table(self) -> str:
        variants = []
        for c in self.cells:
            name = c.setting.rsplit("/", 1)[0]
            if name not in variants:
                variants.append(name)
        width = max([len(v) for v in variants] + [8])
        header = f"{'variant':<{width}} " + " ".join(
            f"tau>={t:<6}" for t in self.columns)
        rows = [header, "-" * len(header)]
        for name in variants:
            row = [f"{name:<{width}}"]
            for t in self.columns:
                row.append(f"{self.cell(f'{name}/{t}').rate_pct:<9.2f}")
            rows.append(" ".join(row))
        return "\n".join(rows) + "\n"


# --- dataset loading ---------------------------------------------------------

def load_dataset(path: str | Path, format: str) -> list[BenchmarkItem]:
    """Parse a dataset file into benchmark items with gold answers."""
    path = Path(path)
    if format == "gsm8k_jsonl":
        return _load_jsonl(path, _gsm8k_entry)
    if format == "lastletter_jsonl":
        return _load_jsonl(path, _lastletter_entry)
    if format == "generic_jsonl":
        return _load_jsonl(path, _generic_entry)
    if format == "svamp_json":
        return _load_json_array(path, _svamp_entry)
    if format == "multiarith_json":
        return _load_json_array(path, _multiarith_entry)
    raise ValueError(f"unknown dataset format {format!r}")


def _load_jsonl(path: Path, parse_entry) -> list[BenchmarkItem]:
    items = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedError(line_no, f"invalid JSON: {exc}")
            items.append(parse_entry(entry, line_no, path.stem))
    return items


def _load_json_array(path: Path, parse_entry) -> list[BenchmarkItem]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedError(0, f"invalid JSON: {exc}")
    if not isinstance(data, list):
        raise MalformedError(0, "expected a JSON array")
    return [parse_entry(entry, i + 1, path.stem) for i, entry in enumerate(data)]


def _gsm8k_entry(entry: dict, line_no: int, stem: str) -> BenchmarkItem:
    question = entry.get("question")
    answer = entry.get("answer")
    if not question or answer is None:
        raise MalformedError(line_no, "need 'question' and 'answer'")
    marker = str(answer).rsplit("####", 1)
    if len(marker) != 2 or not marker[1].strip():
        raise MalformedError(line_no, "no '####' gold marker in answer")
    gold = normalize_answer(marker[1], "numeric")
    task = Task(id=f"gsm8k-{line_no}", statement=question, gold_answer=gold,
                source="gsm8k")
    return BenchmarkItem(task=task, kind="numeric")


def _lastletter_entry(entry: dict, line_no: int, stem: str) -> BenchmarkItem:
    question = entry.get("question")
    answer = entry.get("answer")
    if not question or answer is None:
        raise MalformedError(line_no, "need 'question' and 'answer'")
    task = Task(id=f"lastletter-{line_no}", statement=question,
                gold_answer=str(answer), source="lastletter")
    return BenchmarkItem(task=task, kind="string")


def _generic_entry(entry: dict, line_no: int, stem: str) -> BenchmarkItem:
    statement = entry.get("statement") or entry.get("question")
    answer = entry.get("answer")
    if not statement or answer is None:
        raise MalformedError(line_no, "need 'statement' (or 'question') and 'answer'")
    source = entry.get("source", stem or "generic")
    task = Task(id=entry.get("id", f"{source}-{line_no}"), statement=statement,
                gold_answer=str(answer), source=source)
    return BenchmarkItem(task=task, kind=answer_kind_for_source(source))


def _svamp_entry(entry: dict, line_no: int, stem: str) -> BenchmarkItem:
    body = entry.get("Body", "")
    question = entry.get("Question")
    answer = entry.get("Answer")
    if not question or answer is None:
        raise MalformedError(line_no, "need 'Question' and 'Answer'")
    statement = f"{body} {question}".strip()
    task = Task(id=entry.get("ID", f"svamp-{line_no}"), statement=statement,
                gold_answer=normalize_answer(str(answer), "numeric"), source="svamp")
    return BenchmarkItem(task=task, kind="numeric")


def _multiarith_entry(entry: dict, line_no: int, stem: str) -> BenchmarkItem:
    question = entry.get("sQuestion")
    solutions = entry.get("lSolutions")
    if not question or not solutions:
        raise MalformedError(line_no, "need 'sQuestion' and 'lSolutions'")
    task = Task(id=str(entry.get("iIndex", f"multiarith-{line_no}")),
                statement=question.strip(),
                gold_answer=normalize_answer(str(solutions[0]), "numeric"),
                source="multiarith")
    return BenchmarkItem(task=task, kind="numeric")


# --- last-letter generation --------------------------------------------------

def last_letter_gold(sentence: str) -> str:
    """Oracle for the concatenation task, independent of the pipeline."""
    letters = []
    for word in sentence.split():
        alpha = [ch for ch in word if ch.isalpha()]
        if alpha:
            letters.append(alpha[-1].lower())
    return "".join(letters)


def last_letter_item(sentence: str, item_id: str = "lastletter-0") -> BenchmarkItem:
    statement = (f"Take the last letter of each word in the sentence: "
                 f"'{sentence}' and concatenate them to form a new string.")
    task = Task(id=item_id, statement=statement,
                gold_answer=last_letter_gold(sentence), source="lastletter")
    return BenchmarkItem(task=task, kind="string")


def gen_last_letter(word_lists: Sequence[str], seed: int, count: int) -> list[BenchmarkItem]:
    """Generate `count` concatenation items of 4-6 sampled words each."""
    if count < 1:
        raise ValueError("count must be >= 1")
    pool = list(word_lists) or list(DEFAULT_WORDS)
    rng = random.Random(seed)
    items = []
    for i in range(count):
        words = [rng.choice(pool) for _ in range(rng.randint(4, 6))]
        sentence = " ".join([words[0].capitalize()] + words[1:])
        items.append(last_letter_item(sentence, item_id=f"lastletter-gen-{i}"))
    return items


# --- grading -----------------------------------------------------------------

def grade(record: RunRecord, item: BenchmarkItem) -> str:
    """Exact-match after normalization; numeric compare uses 1e-6 tolerance."""
    if record.final_answer is None:
        raise UngradableError(f"run {record.run_id} produced no answer")
    kind = item.kind
    if kind == "auto":
        kind = "numeric"
        try:
            normalize_answer(item.task.gold_answer, "numeric")
            normalize_answer(record.final_answer, "numeric")
        except NotNumericError:
            kind = "string"
    try:
        got = normalize_answer(record.final_answer, kind)
        want = normalize_answer(item.task.gold_answer, kind)
    except NotNumericError:
        raise UngradableError(f"run {record.run_id} answer is not numeric")
    if kind == "numeric":
        return "correct" if abs(float(got) - float(want)) <= 1e-6 else "incorrect"
    return "correct" if got == want else "incorrect"


# --- sweeps --------------------------------------------------------------------

def sweep_thresholds(items: Sequence[BenchmarkItem], backend: BackendSource,
                     config: RunConfig,
                     thresholds: Sequence[int] = DEFAULT_THRESHOLDS,
                     variants: Sequence[Optional[Variant]] = (None,),
                     jobs: int = 1, prompt_dir: Optional[str] = None) -> SweepReport:
    """Run the full variant x threshold cross-product and tabulate rates."""
    report = SweepReport(axis="thresholds", columns=list(thresholds))
    for variant in variants:
        name = variant.value if variant else "default"
        for tau in thresholds:
            cfg = replace_config(config, threshold=tau,
                                 variant=variant.value if variant else None)
            cell = _run_cell(f"{name}/{tau}", items, backend, cfg, jobs, prompt_dir)
            report.cells.append(cell)
    return report


def sweep_thought_counts(items: Sequence[BenchmarkItem], backend: BackendSource,
                         config: RunConfig,
                         counts: Sequence[int] = DEFAULT_THOUGHT_COUNTS,
                         jobs: int = 1,
                         prompt_dir: Optional[str] = None) -> SweepReport:
    """Vary thoughts per step and tabulate per-tier solve attribution."""
    report = SweepReport(axis="thoughts", columns=list(counts))
    for n in counts:
        cfg = replace_config(config, n_thoughts=n)
        report.cells.append(_run_cell(str(n), items, backend, cfg, jobs, prompt_dir))
    return report


def run_item(item: BenchmarkItem, backend: BackendSource, config: RunConfig,
             prompt_dir: Optional[str] = None) -> RunRecord:
    """One graded run of one item."""
    resolved = backend() if callable(backend) else backend
    scorer = make_scorer(config)
    record = run_variant(item.task, resolved, scorer, config, prompt_dir=prompt_dir)
    record.grade = grade(record, item)
    return record


def _run_cell(setting: str, items: Sequence[BenchmarkItem], backend: BackendSource,
              config: RunConfig, jobs: int, prompt_dir: Optional[str]) -> SweepCell:
    cell = SweepCell(setting=setting, attempted=len(items))

    def one(item: BenchmarkItem):
        try:
            record = run_item(item, backend, config, prompt_dir)
            return record.grade, record
        except UngradableError:
            return "ungradable", None
        except RdoltError:
            # a failed run counts against the setting
            return "incorrect", None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, items))
    else:
        results = [one(item) for item in items]

    for outcome, record in results:
        if outcome == "correct":
            cell.correct += 1
            cell.solved_by_tier[attributed_tier(record).value] += 1
        elif outcome == "ungradable":
            cell.ungradable += 1
        else:
            cell.incorrect += 1
    return cell
