from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class LabOverrides(BaseModel):
    t: int = Field(..., ge=2, description="Even cloud size")
    bhat: Optional[float] = Field(None, gt=0)
    uhat: Optional[float] = Field(None, gt=0)
    delta: Optional[float] = Field(None, gt=0)
    delta_prime: Optional[float] = Field(None, gt=0)
    max_degree: Optional[int] = Field(None, ge=1)

    @field_validator("t")
    def t_must_be_even(cls, value):
        if value % 2:
            raise ValueError("Cloud size t must be even")
        return value

    @model_validator(mode="after")
    def check_bias_source(self):
        if self.bhat is None and self.delta is None:
            raise ValueError("Provide bhat or delta")
        if self.uhat is None and self.delta_prime is None:
            raise ValueError("Provide uhat or delta_prime")
        return self


class Couplings(BaseModel):
    t: int = Field(..., ge=1)
    beta: float = Field(..., ge=0)
    gamma: float = Field(0.0, ge=0)


# ==============================================
# Request bodies for the HTTP service
# ==============================================

class GraphPayload(BaseModel):
    text: str = Field(..., min_length=1, description="Edge-list document: 'n m' then m lines 'u v'")


class MaxCutRequest(BaseModel):
    graph: GraphPayload


class PartitionRequest(BaseModel):
    graph: GraphPayload
    couplings: Couplings
    method: Literal["brute", "mag", "orthant"] = "mag"
    signs: Optional[str] = None

    @model_validator(mode="after")
    def signs_for_orthant(self):
        if self.method == "orthant" and not self.signs:
            raise ValueError("Orthant method needs a sign pattern")
        return self


class SpectrumRequest(BaseModel):
    graph: GraphPayload
    couplings: Couplings
    delta: Optional[float] = Field(None, gt=0)


class ReduceRequest(BaseModel):
    graph: GraphPayload
    tau: float = Field(..., gt=1)
    A: int = Field(..., ge=0)
    mode: Literal["paper", "lab"] = "lab"
    epsilon: Optional[float] = Field(None, gt=0, lt=0.5)
    overrides: Optional[LabOverrides] = None


class DecideRequest(BaseModel):
    certificate: dict
    log_z_hat: float
    ln_r: float = Field(0.0, ge=0)
