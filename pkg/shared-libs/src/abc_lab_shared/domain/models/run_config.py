from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from abc_lab_shared.domain.enums import RunMode, SurfaceKind


class SeedConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    sampling: int = Field(0, ge=0, le=2**32 - 1)
    diagnostics: int = Field(1, ge=0, le=2**32 - 1)


class ResolutionConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kicker_box_cap: int = Field(2**18, ge=64)
    kicker_y_grid: int = Field(64, ge=4)
    y_grid: int = Field(64, ge=4)
    measure_support: int = Field(64, ge=4)
    leb_grid: int = Field(32, ge=4)
    eta_grid: int = Field(48, ge=8)
    support_cap: int = Field(4096, ge=64)

    @model_validator(mode="after")
    def validate_grid_fits_cap(self):
        leb_points = self.leb_grid * max(1, self.leb_grid // 2)
        if leb_points >= self.support_cap:
            raise ValueError(
                f"leb_grid={self.leb_grid} gera {leb_points} pontos e não cabe em support_cap={self.support_cap}"
            )
        if 2 * self.measure_support > self.support_cap:
            raise ValueError("measure_support excede metade de support_cap")
        return self


class SchemeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    condition_samples: int = Field(100, ge=1)
    c0_samples: int = Field(256, ge=1)
    bilipschitz_samples: int = Field(256, ge=2)
    max_nu_halvings: int = Field(32, ge=1, le=60)
    resolution_retries: int = Field(3, ge=0)
    alpha_retries: int = Field(3, ge=0)
    max_backtracks: int = Field(2, ge=0)
    colors: int = Field(2, ge=2)
    pearl_rank: int = Field(2, ge=1)
    threshold_scale: float = Field(1.0, gt=0.0)
    fd_step: float = Field(1e-5, gt=0.0, lt=1e-2)


class DiagnosticsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ergodicity: bool = True
    emergence: bool = True
    samples: int = Field(100, ge=2)
    emergence_samples: int = Field(48, ge=2)
    scales: List[float] = Field(default_factory=list)
    sweep: int = Field(6, ge=0)
    region_eta: Optional[float] = Field(None, ge=0.0, lt=1.0)
    threshold: Optional[float] = Field(None, gt=0.0)

    @field_validator("scales")
    @classmethod
    def validate_scales(cls, v):
        if any(scale <= 0.0 for scale in v):
            raise ValueError("scales devem ser positivas")
        return sorted(v, reverse=True)


class CheckConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trials: int = Field(100, ge=3)
    monte_carlo_samples: int = Field(1_000_000, ge=1000)
    sigma_bound: float = Field(3.0, gt=0.0)


class DiagnoseConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    map_file: Optional[str] = None
    q: Optional[int] = Field(None, ge=1)


class RunConfig(BaseModel):
    """
    Configuração completa de uma execução do laboratório
    """

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "mode": "ergodic",
                "surface": "annulus",
                "stages": 3,
                "seeds": {"sampling": 7, "diagnostics": 11},
                "resolutions": {"leb_grid": 32, "y_grid": 64},
                "output_dir": "runs/ergodic-annulus",
            }
        },
    )

    mode: RunMode
    surface: SurfaceKind
    stages: int = Field(0, ge=0, le=16)
    seeds: SeedConfig = Field(default_factory=SeedConfig)
    resolutions: ResolutionConfig = Field(default_factory=ResolutionConfig)
    scheme: SchemeConfig = Field(default_factory=SchemeConfig)
    diagnostics: DiagnosticsConfig = Field(default_factory=DiagnosticsConfig)
    diagnose: DiagnoseConfig = Field(default_factory=DiagnoseConfig)
    check: CheckConfig = Field(default_factory=CheckConfig)
    output_dir: str = Field("runs/latest", min_length=1)

