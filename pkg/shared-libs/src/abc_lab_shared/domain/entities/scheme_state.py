import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple

from abc_lab_shared.domain.entities.map_expr import Identity, MapExpr, conjugated_rotation
from abc_lab_shared.domain.enums import SchemeMode, SurfaceKind


@dataclass(frozen=True)
class LedgerEntry:
    condition_id: str
    stage: int
    measured: float
    bound: float
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict, compare=False, hash=False)


@dataclass(frozen=True)
class Interval:
    low: Fraction
    high: Fraction

    @classmethod
    def around(cls, center: Fraction, nu: Fraction) -> "Interval":
        return cls(center - 2 * nu, center + 2 * nu)

    def contains(self, other: "Interval") -> bool:
        return self.low <= other.low and other.high <= self.high


@dataclass(frozen=True)
class IntervalLedger:
    intervals: Tuple[Interval, ...] = ()

    def append(self, interval: Interval) -> "IntervalLedger":
        return IntervalLedger(self.intervals + (interval,))

    def is_nested(self) -> bool:
        return all(outer.contains(inner) for outer, inner in zip(self.intervals, self.intervals[1:]))

    def __len__(self) -> int:
        return len(self.intervals)


def separation_delta(eta: float, eps_prev: float) -> float:
    """δ = exp(-η^(-2+ε_prev))."""
    return math.exp(-(eta ** (-2.0 + eps_prev)))


def ergodic_epsilon(n: int) -> float:
    return 1.0 / 2 ** (n + 1)


def emergence_epsilon(q: int) -> float:
    return 1.0 / (4 * q)


@dataclass(frozen=True)
class SchemeState:
    n: int
    h: MapExpr
    alpha: Fraction
    eps: float
    mode: SchemeMode
    eta: Optional[float] = None
    delta: Optional[float] = None
    eps_prev: Optional[float] = None
    nu: Optional[Fraction] = None
    ledger: Tuple[LedgerEntry, ...] = ()
    intervals: IntervalLedger = IntervalLedger()

    @classmethod
    def initial(cls, kind: SurfaceKind, mode: SchemeMode) -> "SchemeState":
        eps = ergodic_epsilon(0) if mode is SchemeMode.ERGODIC else emergence_epsilon(1)
        return cls(n=0, h=Identity(kind), alpha=Fraction(0), eps=eps, mode=mode)

    @property
    def kind(self) -> SurfaceKind:
        return self.h.kind

    @property
    def q(self) -> int:
        return self.alpha.denominator

    @property
    def f(self) -> MapExpr:
        return conjugated_rotation(self.h, self.alpha)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.ledger)

    def recomputed_delta(self) -> Optional[float]:
        if self.eta is None or self.eps_prev is None:
            return None
        return separation_delta(self.eta, self.eps_prev)

    def with_entries(self, *entries: LedgerEntry) -> "SchemeState":
        return replace(self, ledger=self.ledger + tuple(entries))
