from __future__ import annotations

import pytest

from helpers import fixture_task, load_fixture

from rdolt.model import DecompositionPlan, RunConfig, ScorerMode, Task


@pytest.fixture(scope="session")
def lastletter_fixture() -> dict:
    return load_fixture("lastletter")


@pytest.fixture(scope="session")
def gsm8k_fixture() -> dict:
    return load_fixture("gsm8k")


@pytest.fixture(scope="session")
def mmlu_fixture() -> dict:
    return load_fixture("mmlu")


@pytest.fixture
def lastletter_task(lastletter_fixture) -> Task:
    return fixture_task(lastletter_fixture)


@pytest.fixture
def sample_task() -> Task:
    return Task(id="t1", statement="What is 2 + 3?", instructions="Answer with a number.",
                gold_answer="5", source="generic")


@pytest.fixture
def sample_plan() -> DecompositionPlan:
    return DecompositionPlan(
        easy="Identify the two numbers to combine.",
        intermediate="Add the numbers together.",
        final="State the sum as the final answer.",
    )


@pytest.fixture
def judge_config() -> RunConfig:
    return RunConfig(scorer_mode=ScorerMode.JUDGE)


@pytest.fixture
def det_config() -> RunConfig:
    return RunConfig(scorer_mode=ScorerMode.DETERMINISTIC)
