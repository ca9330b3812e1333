from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from abc_lab_shared.domain.enums import SchemeMode, SurfaceKind


class RationalModel(BaseModel):
    p: int
    q: int = Field(..., ge=1)


class LedgerEntryModel(BaseModel):
    condition_id: str
    stage: int
    measured: float
    bound: float
    passed: bool
    details: Dict[str, Any] = Field(default_factory=dict)


class IntervalModel(BaseModel):
    low: RationalModel
    high: RationalModel


class StageLedger(BaseModel):
    stage: int
    mode: SchemeMode
    surface: SurfaceKind
    alpha: RationalModel
    q: int
    eps: float
    eta: Optional[float] = None
    delta: Optional[float] = None
    nu: Optional[RationalModel] = None
    tail_bound: Optional[float] = None
    passed: bool
    entries: List[LedgerEntryModel]
    intervals: List[IntervalModel] = Field(default_factory=list)


class RunManifest(BaseModel):
    version: str
    mode: str
    surface: SurfaceKind
    stages: int
    completed_stages: int
    passed: bool
    failed_condition: Optional[str] = None
    config: Dict[str, Any]
    files: List[str] = Field(default_factory=list)
