import logging
import math
from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel

from modules.dataValidation import LabOverrides
from modules.errors import BoundViolationError, GapNotCertifiedError, ParameterRangeError
from modules.gadget import GadgetParams, build_instance, lab_params, realize_params, schedule_params
from modules.graph import CutAssignment, Graph, max_cut_exact
from modules.landscape import OrthantMaximum, log_binomial, maximize_phi_orthant, q_profile
from modules.partition import LogWeight, OrthantWeight, magnetization_logZ, orthant_decomposition
from modules.spectral import diameter_bound_check, psd_shift

logger = logging.getLogger(__name__)


class Decision(str, Enum):
    MAXCUT_AT_LEAST_A = "MAXCUT_AT_LEAST_A"
    ALL_CUTS_BELOW_A_OVER_TAU = "ALL_CUTS_BELOW_A_OVER_TAU"
    INDETERMINATE = "INDETERMINATE"


class ReductionCertificate(BaseModel):
    mode: Literal["paper", "lab"]
    params: GadgetParams
    n: int
    num_edges: int
    A: int
    log_t1: float
    log_t2: float
    log_k_instance: float
    lambda_min: float
    log_k_shift: float
    spectral_diameter: float
    diameter_bound: float
    N: int
    c: Optional[float] = None
    gap: float
    required_gap: Optional[float] = None


def _check_cut_bound(g: Graph, p: GadgetParams, A: int):
    if not 0 <= A <= g.num_edges:
        raise ParameterRangeError(f"A={A} must lie in [0, |E|={g.num_edges}]")
    if p.tau is not None and A < p.tau * g.num_edges / 2:
        raise ParameterRangeError(f"A={A} is below tau*|E|/2 = {p.tau * g.num_edges / 2}")


def compute_T1(g: Graph, p: GadgetParams, A: int) -> LogWeight:
    """log T1: weight of the configurations with b_v = +-bhat_int along a cut of size A."""
    _check_cut_bound(g, p, A)
    b = p.bhat_int
    n, t = g.n, p.t
    log_k = -0.5 * p.beta * n * t
    return (
        log_k
        + n * float(log_binomial(t, t / 2 + b))
        + 2.0 * p.beta * n * b * b
        + 4.0 * p.gamma * b * b * (2 * A - g.num_edges)
    )


def compute_T2(g: Graph, p: GadgetParams, A: int) -> LogWeight:
    """log T2: (t+1)^n vectors, each bounded by K exp(n Q(bhat) + 4 gamma uhat^2 (2A/tau - |E|))."""
    if p.tau is None:
        raise ParameterRangeError("T2 needs the gap factor tau")
    if A / p.tau < g.num_edges / 2:
        raise ParameterRangeError(f"A/tau = {A / p.tau:.6g} is below |E|/2 = {g.num_edges / 2}")
    n, t = g.n, p.t
    log_k = -0.5 * p.beta * n * t
    return (
        log_k
        + n * math.log(t + 1.0)
        + n * q_profile(p.bhat, t, p.beta)
        + 4.0 * p.gamma * p.uhat**2 * (2 * A / p.tau - g.num_edges)
    )


def edi_lower_bound(g: Graph, p: GadgetParams, A: int) -> float:
    """Right-hand side of log T1 - log T2 >= -2n ln(t+1) + 4 gamma [bhat^2 (2A - |E|) - uhat^2 (2A/tau - |E|)]."""
    if p.tau is None:
        raise ParameterRangeError("the gap chain needs the gap factor tau")
    m = g.num_edges
    return -2.0 * g.n * math.log(p.t + 1.0) + 4.0 * p.gamma * (
        p.bhat**2 * (2 * A - m) - p.uhat**2 * (2 * A / p.tau - m)
    )


def resolve_params(
    g: Graph,
    epsilon: Optional[float],
    tau: Optional[float],
    mode: Literal["paper", "lab"],
    overrides: Optional[LabOverrides] = None,
) -> GadgetParams:
    if mode == "paper":
        if not g.is_regular(3):
            raise ParameterRangeError("paper mode needs a 3-regular base graph")
        if epsilon is None or tau is None:
            raise ParameterRangeError("paper mode needs epsilon and tau")
        return realize_params(schedule_params(g.n, epsilon, tau))

    if overrides is None:
        raise ParameterRangeError("lab mode needs explicit overrides (t and bhat/uhat or delta/delta')")
    p = lab_params(
        overrides.t, bhat=overrides.bhat, uhat=overrides.uhat, delta=overrides.delta,
        delta_prime=overrides.delta_prime, max_degree=overrides.max_degree or max(g.max_degree, 1),
        tau=tau, epsilon=epsilon,
    )
    return realize_params(p)


def build_certificate(
    g: Graph,
    epsilon: Optional[float],
    tau: Optional[float],
    A: int,
    mode: Literal["paper", "lab"] = "lab",
    overrides: Optional[LabOverrides] = None,
) -> ReductionCertificate:
    p = resolve_params(g, epsilon, tau, mode, overrides)
    inst = build_instance(g, p)

    log_t1 = compute_T1(g, p, A)
    log_t2 = compute_T2(g, p, A)
    shift = psd_shift(inst)
    check = diameter_bound_check(g, p)
    gap = log_t1 - log_t2

    required_gap = None
    if mode == "paper":
        required_gap = 2.0 * float(inst.N) ** p.c
        if gap < required_gap:
            raise GapNotCertifiedError(f"log T1 - log T2 = {gap:.6g} is below 2 N^c = {required_gap:.6g}")
    logger.info(f"Certificate ({mode}): n={g.n}, A={A}, t={p.t}, gap={gap:.6g}, diameter={check.actual:.6g}")

    return ReductionCertificate(
        mode=mode, params=p, n=g.n, num_edges=g.num_edges, A=A,
        log_t1=log_t1, log_t2=log_t2, log_k_instance=inst.log_k,
        lambda_min=shift.lambda_min, log_k_shift=shift.log_k_shift,
        spectral_diameter=check.actual, diameter_bound=check.bound,
        N=inst.N, c=p.c, gap=gap, required_gap=required_gap,
    )


def thresholds_met(log_z_hat: LogWeight, ln_r: float, cert: ReductionCertificate) -> tuple[bool, bool]:
    """(estimate clears T1, estimate stays under T2) for log Z(J - lambda_min I) known to within ln_r."""
    if ln_r < 0:
        raise ParameterRangeError(f"ln R must be non-negative, got {ln_r}")
    estimate = log_z_hat - cert.log_k_shift
    return estimate - ln_r >= cert.log_t1, cert.log_t2 >= estimate + ln_r


def decide_gap(log_z_hat: LogWeight, ln_r: float, cert: ReductionCertificate) -> Decision:
    """Read an estimate of log Z(J - lambda_min I), good to within ln_r, against the certificate.

    Both thresholds can only hold together when log T2 > log T1, i.e. the gap is
    negative; the first branch is then returned and a warning is logged.
    """
    above_t1, below_t2 = thresholds_met(log_z_hat, ln_r, cert)
    estimate = log_z_hat - cert.log_k_shift
    if above_t1 and below_t2:
        logger.warning(
            f"Estimate {estimate:.6g} clears log T1 = {cert.log_t1:.6g} and stays under log T2 = {cert.log_t2:.6g}; "
            f"the certificate gap {cert.gap:.6g} is not positive, so the decision is not sound"
        )
    if above_t1:
        decision = Decision.MAXCUT_AT_LEAST_A
    elif below_t2:
        decision = Decision.ALL_CUTS_BELOW_A_OVER_TAU
    else:
        decision = Decision.INDETERMINATE
    logger.info(f"Decision: {decision.value} (estimate log Z_J = {estimate:.6g}, ln R = {ln_r})")
    return decision


# ============================================
# Desk-scale verification
# ============================================

class VerifyReport(BaseModel):
    A: int
    max_cut: int
    log_z: float
    log_t1: float
    log_t2: float
    t1_holds: bool
    t2_holds: bool
    orthants: list[OrthantWeight]
    dominant_signs: str
    dominant_cut: int
    dominant_is_max_cut: bool
    # continuous maximizer of Phi on the dominant orthant, with the integer argmax beside it
    dominant_maximum: OrthantMaximum


def verify_small(g: Graph, p: GadgetParams, A: int, threads: Optional[int] = None) -> VerifyReport:
    """Exact log Z_J against T1 (asserted when max cut >= A) and T2 (reported only)."""
    p = realize_params(p)
    inst = build_instance(g, p)
    log_z = magnetization_logZ(inst, threads=threads)
    log_t1 = compute_T1(g, p, A)
    log_t2 = compute_T2(g, p, A)
    size, _ = max_cut_exact(g, threads=threads)

    t1_holds = log_z >= log_t1 - 1e-9 * max(1.0, abs(log_z))
    if size >= A and not t1_holds:
        raise BoundViolationError(f"log Z = {log_z:.12g} < log T1 = {log_t1:.12g} although max cut {size} >= A={A}")
    t2_holds = log_z <= log_t2
    if not t2_holds:
        logger.warning(f"log Z = {log_z:.6g} exceeds log T2 = {log_t2:.6g}; T2 is not certified at this scale")

    orthants = orthant_decomposition(inst, threads=threads)
    top = max(orthants, key=lambda o: o.log_z)
    maximum = maximize_phi_orthant(g, p, CutAssignment.from_string(top.signs))
    return VerifyReport(
        A=A, max_cut=size, log_z=log_z, log_t1=log_t1, log_t2=log_t2,
        t1_holds=t1_holds, t2_holds=t2_holds, orthants=orthants,
        dominant_signs=top.signs, dominant_cut=top.cut, dominant_is_max_cut=top.cut == size,
        dominant_maximum=maximum,
    )
