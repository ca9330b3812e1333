from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from abc_lab_shared.domain.enums import SurfaceKind


class KickerCertificate(BaseModel):
    q: int = Field(..., ge=1)
    eps: float = Field(..., gt=0.0, lt=1.0)
    surface: SurfaceKind
    n_theta: int
    n_y: int
    columns_per_row: int
    boxes: int
    y_grid: int
    max_distance: float
    radius: float
    tolerance: float
    passed: bool


class SeparationCertificate(BaseModel):
    q: int = Field(..., ge=1)
    eps0: float
    eta0: float
    colors: int = Field(..., ge=2)
    surface: SurfaceKind
    eta_meas: float
    y_values: List[float]
    masses: List[float]
    max_mass: float
    displacement_bound: float
    block_rows: int
    blocks_per_domain: int
    rows_per_block: int
    profile_rows: int = Field(..., ge=2)
    target_distance: Optional[float] = None
    target_mass: Optional[float] = None
    mass_at_target: Optional[float] = None


class ErgodicityReport(BaseModel):
    q: int
    region_eta: float
    resolution: int
    radius: float
    distances: List[float]
    max_distance: float
    mean_distance: float
    threshold: Optional[float] = None
    fraction_below: Optional[float] = None
    conjugated_region: bool = False
    orbit_proxy: str = "e^f_q(x) no lugar de e^f(x)"


class EmergenceReport(BaseModel):
    eps: float = Field(..., gt=0.0)
    q: int
    samples: int
    masses: List[float]
    integrands: List[float]
    floored: List[bool]
    mean_integrand: float
    slack: float
    orbit_proxy: str = "e^f_q(x) no lugar de e^f(x)"


class FactEmerResult(BaseModel):
    stage: int
    eta: float
    delta: float
    eps: float
    scale: float
    bound: float
    slack: float
    masses: List[float]
    max_mass: float
    passed: bool


class PropertyCheckResult(BaseModel):
    name: str
    passed: bool
    measured: float
    bound: float
    details: Dict[str, Any] = Field(default_factory=dict)
