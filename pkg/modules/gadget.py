import logging
import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import settings
from modules.errors import CloudSizeOverflowError, InstanceTooLargeError, ParameterRangeError
from modules.graph import Graph
from modules.landscape import g_mono

logger = logging.getLogger(__name__)


class GadgetParams(BaseModel):
    """Parameter schedule of the cloud gadget.

    Paper mode carries the whole schedule (epsilon, C, delta, delta', c); lab mode
    only needs (t, bhat, uhat) and the couplings derived from them.
    """

    model_config = ConfigDict(frozen=True)

    mode: Literal["paper", "lab"] = "lab"
    epsilon: Optional[float] = Field(None, gt=0, lt=0.5)
    tau: Optional[float] = Field(None, gt=1)
    C: Optional[int] = Field(None, ge=1)
    delta: Optional[float] = Field(None, gt=0)
    delta_prime: Optional[float] = Field(None, gt=0)
    t: int = Field(..., ge=2)
    bhat: float = Field(..., gt=0)
    uhat: float = Field(..., gt=0)
    beta: float = Field(..., gt=0)
    gamma: float = Field(..., gt=0)
    c: Optional[float] = Field(None, gt=0)
    max_degree: int = Field(3, ge=1)

    @field_validator("t")
    def t_must_be_even(cls, value):
        if value % 2:
            raise ValueError(f"cloud size t must be even, got {value}")
        return value

    @model_validator(mode="after")
    def check_ordering(self):
        if not self.bhat < self.uhat < self.t / 2:
            raise ValueError(f"need 0 < bhat < uhat < t/2, got bhat={self.bhat}, uhat={self.uhat}, t={self.t}")
        if self.mode == "paper":
            missing = [k for k in ("epsilon", "tau", "C", "delta", "delta_prime", "c") if getattr(self, k) is None]
            if missing:
                raise ValueError(f"paper-mode schedule is missing {missing}")
        return self

    @property
    def bhat_int(self) -> int:
        return max(1, int(round(self.bhat)))


class IsingInstance(BaseModel):
    """The cloud instance G_t(beta, gamma) held structurally; J is built only on demand."""

    model_config = ConfigDict(frozen=True)

    base: Graph
    t: int = Field(..., ge=1)
    beta: float = Field(..., ge=0)
    gamma: float = Field(0.0, ge=0)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def N(self) -> int:
        return self.base.n * self.t

    @property
    def log_k(self) -> float:
        # ln K = -1/2 * beta * n * t, the configuration-independent factor
        return -0.5 * self.beta * self.N


# ============================================
# Couplings from target biases
# ============================================

def _check_bias(t: int, b: float, name: str):
    if not 0 < b < t / 2:
        raise ParameterRangeError(f"{name} must lie in (0, t/2) = (0, {t / 2}), got {b}")


def beta_from_bhat(t: int, bhat: float) -> float:
    """beta = ln((t + 2 bhat) / (t - 2 bhat)) / (4 bhat), written as g(2 bhat / t) / (2t)."""
    _check_bias(t, bhat, "bhat")
    return g_mono(2.0 * bhat / t) / (2.0 * t)


def gamma_from_uhat(t: int, bhat: float, uhat: float, max_degree: int = 3) -> float:
    _check_bias(t, bhat, "bhat")
    _check_bias(t, uhat, "uhat")
    if not uhat > bhat:
        raise ParameterRangeError(f"uhat must exceed bhat, got uhat={uhat} <= bhat={bhat}")
    if max_degree < 1:
        raise ParameterRangeError(f"max degree must be >= 1, got {max_degree}")
    return (g_mono(2.0 * uhat / t) - g_mono(2.0 * bhat / t)) / (2.0 * t * max_degree)


# ============================================
# Schedules
# ============================================

def schedule_params(n: int, epsilon: float, tau: float, max_degree: int = 3) -> GadgetParams:
    if not 0 < epsilon < 0.5:
        raise ParameterRangeError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    if not tau > 1:
        raise ParameterRangeError(f"tau must exceed 1, got {tau}")
    if n < 4:
        raise ParameterRangeError(f"schedule needs n >= 4, got {n}")

    C = math.ceil(3 / epsilon)
    cap = settings.limits.max_cloud_size
    if C * math.log2(n) > math.log2(cap) + 1e-9:
        raise CloudSizeOverflowError(f"t = {n}^{C} exceeds the representable cloud size {cap}")
    t = n**C
    if t > cap:
        raise CloudSizeOverflowError(f"t = {n}^{C} exceeds the representable cloud size {cap}")
    if t % 2:
        raise ParameterRangeError(f"t = {n}^{C} is odd; the schedule needs an even vertex count n")

    delta, delta_prime = epsilon / 6, epsilon / 12
    bhat = float(t) ** (0.75 + delta)
    uhat = bhat + float(t) ** (0.75 + delta_prime)
    if bhat >= t / 2 or uhat >= t / 2:
        raise ParameterRangeError(f"schedule gives bhat={bhat:.6g}, uhat={uhat:.6g} not below t/2={t / 2}")

    beta = beta_from_bhat(t, bhat)
    gamma = gamma_from_uhat(t, bhat, uhat, max_degree)
    logger.info(f"Schedule: n={n}, epsilon={epsilon}, C={C}, t={t}, bhat={bhat:.6g}, uhat={uhat:.6g}")
    return GadgetParams(
        mode="paper", epsilon=epsilon, tau=tau, C=C, delta=delta, delta_prime=delta_prime,
        t=t, bhat=bhat, uhat=uhat, beta=beta, gamma=gamma, c=1 / (C + 1), max_degree=max_degree,
    )


def lab_params(
    t: int,
    bhat: Optional[float] = None,
    uhat: Optional[float] = None,
    delta: Optional[float] = None,
    delta_prime: Optional[float] = None,
    max_degree: int = 3,
    tau: Optional[float] = None,
    epsilon: Optional[float] = None,
) -> GadgetParams:
    """Desk-scale parameters: explicit (t, bhat, uhat), or bhat = round(t^(3/4+delta)), uhat = bhat + t^(3/4+delta')."""
    if bhat is None:
        if delta is None:
            raise ParameterRangeError("lab parameters need bhat or delta")
        bhat = float(round(t ** (0.75 + delta)))
    if uhat is None:
        if delta_prime is None:
            raise ParameterRangeError("lab parameters need uhat or delta_prime")
        uhat = bhat + t ** (0.75 + delta_prime)
    if t % 2:
        raise ParameterRangeError(f"cloud size t must be even, got {t}")

    return GadgetParams(
        mode="lab", epsilon=epsilon, tau=tau, delta=delta, delta_prime=delta_prime,
        t=t, bhat=bhat, uhat=uhat,
        beta=beta_from_bhat(t, bhat), gamma=gamma_from_uhat(t, bhat, uhat, max_degree),
        max_degree=max_degree,
    )


def realize_params(p: GadgetParams) -> GadgetParams:
    """Round bhat to an integer and recompute beta, gamma so the integer point maximizes Q exactly."""
    b = p.bhat_int
    if b == p.bhat:
        return p
    if not b < p.uhat:
        raise ParameterRangeError(f"rounded bhat={b} no longer below uhat={p.uhat}")
    data = p.model_dump()
    data.update(
        bhat=float(b),
        beta=beta_from_bhat(p.t, b),
        gamma=gamma_from_uhat(p.t, b, p.uhat, p.max_degree),
    )
    return GadgetParams(**data)


# ============================================
# Instance construction
# ============================================

def build_instance(g: Graph, p: GadgetParams) -> IsingInstance:
    if p.t % 2:
        raise ParameterRangeError(f"cloud size t must be even, got {p.t}")
    if g.max_degree > p.max_degree:
        raise ParameterRangeError(
            f"graph has max degree {g.max_degree} but gamma was derived for degree {p.max_degree}"
        )
    return IsingInstance(base=g, t=p.t, beta=p.beta, gamma=p.gamma)


def materialize_dense(inst: IsingInstance, cap: Optional[int] = None) -> np.ndarray:
    cap = cap or settings.limits.dense_cap
    N, t = inst.N, inst.t
    if N > cap:
        raise InstanceTooLargeError(f"dense J would be {N}x{N}; cap is {cap}")

    J = np.zeros((N, N))
    for v in range(inst.n):
        J[v * t:(v + 1) * t, v * t:(v + 1) * t] = inst.beta
    np.fill_diagonal(J, 0.0)
    for u, v in inst.base.edges:
        J[u * t:(u + 1) * t, v * t:(v + 1) * t] = -inst.gamma
        J[v * t:(v + 1) * t, u * t:(u + 1) * t] = -inst.gamma
    return J


def complete_graph_instance(N: int, beta: float) -> IsingInstance:
    """Curie-Weiss model J = (beta/N)(11^T - I), held as a single cloud of size N."""
    return IsingInstance(base=Graph(n=1), t=N, beta=beta / N, gamma=0.0)
