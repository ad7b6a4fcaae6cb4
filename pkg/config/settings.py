import os
from pathlib import Path

import toml
from pydantic import BaseModel, Field

# Get the settings file, next to this module unless overridden
SETTINGS_PATH = Path(os.environ.get("CRITICAL_ISING_SETTINGS", Path(__file__).with_name("settings.toml")))


class Limits(BaseModel):
    max_cut_vertex_cap: int = Field(30, ge=1)
    brute_force_cap: int = Field(24, ge=1)
    enumeration_budget: int = Field(10**9, ge=1)
    enumeration_chunk: int = Field(2**16, ge=1)
    lattice_check_budget: int = Field(10**6, ge=1)
    dense_cap: int = Field(10**4, ge=1)
    dense_eigen_cap: int = Field(4000, ge=1)
    max_cloud_size: int = Field(2**53, ge=2)


class Numerics(BaseModel):
    series_threshold: float = Field(1e-4, gt=0)
    jacobi_tolerance: float = Field(1e-12, gt=0)
    jacobi_max_sweeps: int = Field(100, ge=1)
    boundary_inset: float = Field(1e-12, gt=0, lt=0.5)
    ascent_tolerance: float = Field(1e-10, gt=0)
    ascent_max_sweeps: int = Field(10000, ge=1)
    regular_graph_retries: int = Field(10000, ge=1)


class Dynamics(BaseModel):
    burn_in_factor: float = Field(10.0, ge=0)
    random_chunk: int = Field(2**16, ge=1)


class Runtime(BaseModel):
    threads: int = Field(1, ge=1)
    log_level: str = "INFO"


class Settings(BaseModel):
    limits: Limits = Limits()
    numerics: Numerics = Numerics()
    dynamics: Dynamics = Dynamics()
    runtime: Runtime = Runtime()


def load_settings(path: Path = SETTINGS_PATH) -> Settings:
    if not Path(path).exists():
        return Settings()
    return Settings.model_validate(toml.load(path))


settings = load_settings()
