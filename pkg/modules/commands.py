"""Result documents shared by the command line and the HTTP service."""
import logging
import time
from typing import Literal, Optional

from pydantic import BaseModel

from modules.dataValidation import Couplings, LabOverrides
from modules.errors import ParameterRangeError
from modules.dynamics import GlauberSummary, run_replicas, summarize
from modules.gadget import GadgetParams, IsingInstance, complete_graph_instance, materialize_dense
from modules.graph import CutAssignment, Graph, max_cut_exact
from modules.landscape import (
    OrthantMaximum,
    QScan,
    maximize_phi_orthant,
    phi_upper_bound,
    q_maximizer_scan,
)
from modules.partition import brute_force_logZ, magnetization_logZ, magnetization_terms, orthant_logZ
from modules.reduction import ReductionCertificate, build_certificate, decide_gap, thresholds_met
from modules.spectral import EigenGroup, PsdShift, psd_shift, structured_spectrum

logger = logging.getLogger(__name__)


class MaxCutResult(BaseModel):
    n: int
    num_edges: int
    size: int
    witness: str


class PartitionResult(BaseModel):
    method: Literal["brute", "mag", "orthant"]
    N: int
    signs: Optional[str] = None
    logZ: float
    terms: int
    seconds: float


class SpectrumResult(BaseModel):
    eigenvalues: list[EigenGroup]
    lambda_min: float
    lambda_max: float
    diameter: float
    bound: float
    paper_bound: Optional[float] = None
    psd_shift: PsdShift


class MaximumResult(OrthantMaximum):
    signs: str
    upper_bound: float


class LandscapeResult(BaseModel):
    t: int
    bhat: float
    uhat: float
    beta: float
    gamma: float
    q_scan: Optional[QScan] = None
    maximum: Optional[MaximumResult] = None


class DecideResult(BaseModel):
    decision: str
    both_thresholds_met: bool
    log_z_hat: float
    ln_r: float
    log_t1: float
    log_t2: float
    log_k_shift: float


def instance_from(g: Graph, couplings: Couplings) -> IsingInstance:
    return IsingInstance(base=g, t=couplings.t, beta=couplings.beta, gamma=couplings.gamma)


def run_maxcut(g: Graph, threads: Optional[int] = None) -> MaxCutResult:
    size, witness = max_cut_exact(g, threads=threads)
    return MaxCutResult(n=g.n, num_edges=g.num_edges, size=size, witness=witness.to_string())


def run_partition(
    g: Graph,
    couplings: Couplings,
    method: Literal["brute", "mag", "orthant"] = "mag",
    signs: Optional[str] = None,
    threads: Optional[int] = None,
) -> PartitionResult:
    inst = instance_from(g, couplings)
    start = time.perf_counter()
    if method == "brute":
        log_z = brute_force_logZ(materialize_dense(inst), threads=threads)
        terms = 2**inst.N
    elif method == "mag":
        log_z = magnetization_logZ(inst, threads=threads)
        terms = magnetization_terms(inst)
    else:
        if signs is None:
            raise ParameterRangeError("orthant method needs a sign pattern")
        log_z = orthant_logZ(inst, CutAssignment.from_string(signs), threads=threads)
        terms = (inst.t // 2 + 1) ** inst.n
    seconds = time.perf_counter() - start
    logger.info(f"Partition ({method}): N={inst.N}, log Z = {log_z:.12g} in {seconds:.3f}s")
    return PartitionResult(method=method, N=inst.N, signs=signs, logZ=log_z, terms=terms, seconds=seconds)


def run_spectrum(g: Graph, couplings: Couplings, delta: Optional[float] = None) -> SpectrumResult:
    inst = instance_from(g, couplings)
    report = structured_spectrum(inst, delta=delta)
    bound = inst.t * inst.beta + 2.0 * g.max_degree * inst.t * inst.gamma
    return SpectrumResult(
        eigenvalues=report.groups, lambda_min=report.lambda_min, lambda_max=report.lambda_max,
        diameter=report.diameter, bound=bound, paper_bound=report.paper_bound, psd_shift=psd_shift(inst),
    )


def run_landscape(
    g: Graph,
    p: GadgetParams,
    scan_q: bool = False,
    signs: Optional[str] = None,
) -> LandscapeResult:
    result = LandscapeResult(t=p.t, bhat=p.bhat, uhat=p.uhat, beta=p.beta, gamma=p.gamma)
    if scan_q:
        result.q_scan = q_maximizer_scan(p.t, p.beta)
    if signs is not None:
        cut = CutAssignment.from_string(signs)
        best = maximize_phi_orthant(g, p, cut)
        result.maximum = MaximumResult(**best.model_dump(), signs=signs, upper_bound=phi_upper_bound(p, g, cut))
    return result


def run_reduce(
    g: Graph,
    tau: float,
    A: int,
    mode: Literal["paper", "lab"] = "lab",
    epsilon: Optional[float] = None,
    overrides: Optional[LabOverrides] = None,
) -> ReductionCertificate:
    return build_certificate(g, epsilon, tau, A, mode=mode, overrides=overrides)


def run_decide(cert: ReductionCertificate, log_z_hat: float, ln_r: float) -> DecideResult:
    decision = decide_gap(log_z_hat, ln_r, cert)
    above_t1, below_t2 = thresholds_met(log_z_hat, ln_r, cert)
    return DecideResult(
        decision=decision.value, both_thresholds_met=above_t1 and below_t2, log_z_hat=log_z_hat, ln_r=ln_r,
        log_t1=cert.log_t1, log_t2=cert.log_t2, log_k_shift=cert.log_k_shift,
    )


def run_glauber(
    N: int,
    beta: float,
    steps: int,
    stride: int,
    replicas: int,
    seed: int = 0,
    threads: Optional[int] = None,
):
    """Curie-Weiss chains: (summary, trajectories)."""
    inst = complete_graph_instance(N, beta)
    runs = run_replicas(inst, steps, seed, stride=stride, replicas=replicas, threads=threads)
    summary: GlauberSummary = summarize(runs, N, beta, seed)
    logger.info(f"Glauber: N={N}, beta={beta}, replicas={replicas}, E|m|/N = {summary.mean_abs_m_per_site:.6g}")
    return summary, runs
