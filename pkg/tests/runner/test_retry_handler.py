from types import SimpleNamespace

import pytest
from abc_lab_shared.domain.entities import LedgerEntry
from abc_lab_shared.domain.exceptions import ResolutionExceeded, StageFailed

from src.processor.utils.retry_handler import escalation_schedule, retry_with_escalation


def failing_entry(stage: int) -> LedgerEntry:
    return LedgerEntry("c0_distance", stage, 1.0, 0.5, False)


class FlakyStep:
    def __init__(self, failures: int, resolution_retries: int = 1, alpha_retries: int = 1):
        self.failures = failures
        self.resolution_retries = resolution_retries
        self.alpha_retries = alpha_retries
        self.calls = []

    @retry_with_escalation()
    def step(self, state, resolution_factor=1, denominator_factor=1):
        self.calls.append((resolution_factor, denominator_factor))
        if len(self.calls) <= self.failures:
            raise StageFailed("c0_distance", state.n + 1, ledger=[failing_entry(state.n + 1)])
        return "ok"


class ExplodingStep:
    resolution_retries = 2
    alpha_retries = 2

    @retry_with_escalation()
    def step(self, state, resolution_factor=1, denominator_factor=1):
        raise ResolutionExceeded("limite de caixas", details={"cap": 64})


@pytest.mark.parametrize(
    "resolution_retries, alpha_retries, expected",
    [
        (0, 0, [(1, 1)]),
        (2, 0, [(1, 1), (2, 1), (4, 1)]),
        (0, 1, [(1, 1), (1, 2)]),
        (2, 2, [(1, 1), (2, 1), (4, 1), (4, 2), (4, 4)]),
    ],
)
def test_escalation_schedule(resolution_retries, alpha_retries, expected):
    assert escalation_schedule(resolution_retries, alpha_retries) == expected


def test_returns_on_first_success():
    step = FlakyStep(failures=0)

    assert step.step(SimpleNamespace(n=0)) == "ok"
    assert step.calls == [(1, 1)]


def test_escalates_resolution_before_denominator():
    step = FlakyStep(failures=2)

    assert step.step(SimpleNamespace(n=3)) == "ok"
    assert step.calls == [(1, 1), (2, 1), (2, 2)]


def test_raises_after_the_last_attempt():
    step = FlakyStep(failures=10)

    with pytest.raises(StageFailed) as error:
        step.step(SimpleNamespace(n=1))

    assert len(step.calls) == 3
    assert error.value.condition_id == "c0_distance"
    assert error.value.stage_index == 2
    assert [entry.condition_id for entry in error.value.ledger] == ["c0_distance"]


def test_decorator_arguments_override_instance_attributes():
    class Step(FlakyStep):
        @retry_with_escalation(resolution_retries=0, alpha_retries=0)
        def step(self, state, resolution_factor=1, denominator_factor=1):
            return FlakyStep.step.__wrapped__(self, state, resolution_factor, denominator_factor)

    step = Step(failures=10, resolution_retries=5, alpha_retries=5)

    with pytest.raises(StageFailed):
        step.step(SimpleNamespace(n=0))

    assert step.calls == [(1, 1)]


def test_resolution_exceeded_stops_immediately():
    with pytest.raises(StageFailed) as error:
        ExplodingStep().step(SimpleNamespace(n=0))

    assert error.value.condition_id == "kicker_resolution"
    assert error.value.stage_index == 1
    entry = error.value.ledger[-1]
    assert entry.bound == 64.0
    assert not entry.passed
    assert isinstance(error.value.__cause__, ResolutionExceeded)


class CappedStep:
    def __init__(self, alpha_retries: int):
        self.resolution_retries = 2
        self.alpha_retries = alpha_retries
        self.calls = []

    @retry_with_escalation()
    def step(self, state, resolution_factor=1, denominator_factor=1):
        self.calls.append((resolution_factor, denominator_factor))
        if resolution_factor > 1:
            raise ResolutionExceeded("limite de caixas", details={"boxes": 128, "cap": 64, "rows": 8})
        if denominator_factor == 1:
            raise StageFailed("c0_distance", state.n + 1, ledger=[failing_entry(state.n + 1)])
        return "ok"


def test_oversized_refinement_falls_back_to_larger_denominators():
    step = CappedStep(alpha_retries=2)

    assert step.step(SimpleNamespace(n=0)) == "ok"
    assert step.calls == [(1, 1), (2, 1), (1, 2)]


def test_oversized_refinement_without_denominator_retries():
    step = CappedStep(alpha_retries=0)

    with pytest.raises(StageFailed) as error:
        step.step(SimpleNamespace(n=0))

    assert step.calls == [(1, 1), (2, 1)]
    assert error.value.condition_id == "kicker_resolution"
    assert [entry.condition_id for entry in error.value.ledger] == ["c0_distance", "kicker_resolution"]
    entry = error.value.ledger[-1]
    assert (entry.measured, entry.bound) == (128.0, 64.0)
    assert entry.details["rows"] == 8
    assert entry.details["resolution_factor"] == 2
