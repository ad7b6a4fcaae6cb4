"""Heat-bath Glauber dynamics on cloud instances (the complete graph is a single cloud).

The local field of site i in cloud v is
    (J sigma)_i = beta (M_v - sigma_i) - gamma * sum_{u ~ v} M_u
with M_v the cloud magnetization, so each update costs O(deg v).
Randomness: one Philox stream per replica, spawned from a SeedSequence.
"""
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from numba import njit
from pydantic import BaseModel
from scipy.special import logsumexp
from scipy.stats import linregress

from config.settings import settings
from modules.errors import InstanceTooLargeError, ParameterRangeError
from modules.gadget import IsingInstance, complete_graph_instance
from modules.graph import CutAssignment, cut_size
from modules.landscape import log_binomial

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]


@dataclass
class SpinState:
    sigma: np.ndarray
    cloud_m: np.ndarray

    @property
    def m(self) -> int:
        return int(self.cloud_m.sum())

    @classmethod
    def random(cls, inst: IsingInstance, rng: np.random.Generator) -> "SpinState":
        sigma = 2 * rng.integers(0, 2, size=inst.N, dtype=np.int64) - 1
        return cls(sigma=sigma, cloud_m=sigma.reshape(inst.n, inst.t).sum(axis=1))


@dataclass(frozen=True)
class Trajectory:
    m: np.ndarray
    cloud_m: np.ndarray
    steps: int
    stride: int
    burn_in: int
    seed: int
    replica: Optional[int] = None
    final_state: Optional[SpinState] = None
    # sampled configurations as sum of 2^i over sites with sigma_i = +1, when recorded
    states: Optional[np.ndarray] = None

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"step": self.stride * np.arange(1, len(self.m) + 1), "m": self.m})
        if self.replica is not None:
            frame.insert(0, "replica", self.replica)
        return frame


def _neighbor_csr(inst: IsingInstance) -> tuple[np.ndarray, np.ndarray]:
    adj = inst.base.neighbors()
    ptr = np.zeros(inst.n + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(nbrs) for nbrs in adj])
    idx = np.array([u for nbrs in adj for u in nbrs], dtype=np.int64)
    return ptr, idx


@njit(cache=True, nogil=True)
def _heat_bath(sigma, cloud_m, cloud_of, nbr_ptr, nbr_idx, beta, gamma, sites, uniforms,
               record, stride, counter, out_m, out_cloud, out_pos, track, code, out_state):
    n = cloud_m.shape[0]
    for k in range(sites.shape[0]):
        i = sites[k]
        v = cloud_of[i]
        cross = 0
        for p in range(nbr_ptr[v], nbr_ptr[v + 1]):
            cross += cloud_m[nbr_idx[p]]
        field = beta * (cloud_m[v] - sigma[i]) - gamma * cross
        new = 1 if uniforms[k] * (1.0 + math.exp(-2.0 * field)) < 1.0 else -1
        if new != sigma[i]:
            cloud_m[v] += new - sigma[i]
            sigma[i] = new
            if track:
                code += new * (1 << i)
        counter += 1
        if record and counter % stride == 0:
            total = 0
            for w in range(n):
                out_cloud[out_pos, w] = cloud_m[w]
                total += cloud_m[w]
            out_m[out_pos] = total
            if track:
                out_state[out_pos] = code
            out_pos += 1
    return counter, out_pos, code


def local_fields(inst: IsingInstance, state: SpinState) -> np.ndarray:
    """(J sigma)_i for every site, from the cloud magnetizations."""
    adj = inst.base.adjacency()
    cross = adj @ state.cloud_m
    per_cloud_beta = inst.beta * np.repeat(state.cloud_m, inst.t)
    return per_cloud_beta - inst.beta * state.sigma - inst.gamma * np.repeat(cross, inst.t)


def default_burn_in(N: int) -> int:
    return int(settings.dynamics.burn_in_factor * N * math.log(N)) if N > 1 else 0


def _seed_value(seed: Seed) -> int:
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.entropy) if isinstance(seed.entropy, int) else 0
    return int(seed)


def glauber_run(
    inst: IsingInstance,
    steps: int,
    seed: Seed = 0,
    stride: int = 1,
    burn_in: Optional[int] = None,
    replica: Optional[int] = None,
    record_states: bool = False,
) -> Trajectory:
    """Single heat-bath chain: uniform site, sigma_i = +1 with probability 1/(1 + exp(-2 (J sigma)_i)).

    With record_states every sample also stores the full configuration, encoded
    the way brute_force_logZ enumerates it (bit i set when sigma_i = +1).
    """
    if steps < 1 or stride < 1:
        raise ParameterRangeError(f"need steps >= 1 and stride >= 1, got steps={steps}, stride={stride}")
    if record_states and inst.N > settings.limits.brute_force_cap:
        raise InstanceTooLargeError(
            f"state recording is limited to N <= {settings.limits.brute_force_cap} sites, got N={inst.N}"
        )
    burn_in = default_burn_in(inst.N) if burn_in is None else burn_in
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.Philox(seq))

    state = SpinState.random(inst, rng)
    cloud_of = np.repeat(np.arange(inst.n, dtype=np.int64), inst.t)
    nbr_ptr, nbr_idx = _neighbor_csr(inst)
    out_m = np.zeros(steps // stride, dtype=np.int64)
    out_cloud = np.zeros((steps // stride, inst.n), dtype=np.int64)
    out_state = np.zeros(steps // stride if record_states else 0, dtype=np.int64)
    code = int(np.sum(np.left_shift(1, np.flatnonzero(state.sigma > 0)))) if record_states else 0
    chunk = settings.dynamics.random_chunk

    for record, total in ((False, burn_in), (True, steps)):
        counter, out_pos, done = 0, 0, 0
        while done < total:
            size = min(chunk, total - done)
            sites = rng.integers(0, inst.N, size=size, dtype=np.int64)
            uniforms = rng.random(size)
            counter, out_pos, code = _heat_bath(
                state.sigma, state.cloud_m, cloud_of, nbr_ptr, nbr_idx, float(inst.beta), float(inst.gamma),
                sites, uniforms, record, stride, counter, out_m, out_cloud, out_pos, record_states, code, out_state,
            )
            done += size

    logger.debug(f"glauber_run: N={inst.N}, steps={steps}, burn_in={burn_in}, samples={len(out_m)}")
    return Trajectory(m=out_m, cloud_m=out_cloud, steps=steps, stride=stride, burn_in=burn_in,
                      seed=_seed_value(seq), replica=replica, final_state=state,
                      states=out_state if record_states else None)


def run_replicas(
    inst: IsingInstance,
    steps: int,
    seed: Seed = 0,
    stride: int = 1,
    replicas: int = 1,
    burn_in: Optional[int] = None,
    threads: Optional[int] = None,
) -> list[Trajectory]:
    """Independent chains on spawned Philox streams, returned in replica order."""
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = seq.spawn(replicas)
    workers = threads or settings.runtime.threads

    def run(k):
        return glauber_run(inst, steps, children[k], stride, burn_in, replica=k)

    if workers == 1:
        return [run(k) for k in range(replicas)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(replicas)))


def integrated_autocorrelation(x, c: float = 5.0) -> float:
    """tau_int = 1 + 2 sum_k rho_k with a self-consistent window k < c * tau_int."""
    x = np.asarray(x, dtype=float)
    if len(x) < 4 or np.var(x) == 0:
        return 1.0
    y = x - x.mean()
    size = 1 << (2 * len(y) - 1).bit_length()
    spectrum = np.fft.rfft(y, size)
    acf = np.fft.irfft(spectrum * np.conj(spectrum), size)[: len(y)]
    rho = acf / acf[0]
    tau = 1.0
    for k in range(1, len(rho)):
        tau += 2.0 * rho[k]
        if k >= c * tau:
            break
    return float(tau)


# ============================================
# Probes
# ============================================

class GlauberSummary(BaseModel):
    N: int
    beta: float
    steps: int
    stride: int
    replicas: int
    seed: int
    burn_in: int
    mean_abs_m: float
    mean_m2: float
    mean_abs_m_per_site: float
    autocorrelation_time: float


def summarize(trajectories: Sequence[Trajectory], N: int, beta: float, seed: int) -> GlauberSummary:
    m = np.concatenate([traj.m for traj in trajectories]).astype(float)
    first = trajectories[0]
    return GlauberSummary(
        N=N, beta=beta, steps=first.steps, stride=first.stride, replicas=len(trajectories), seed=seed,
        burn_in=first.burn_in, mean_abs_m=float(np.mean(np.abs(m))), mean_m2=float(np.mean(m * m)),
        mean_abs_m_per_site=float(np.mean(np.abs(m))) / N,
        autocorrelation_time=float(np.mean([integrated_autocorrelation(np.abs(t.m)) for t in trajectories])),
    )


class ExponentFit(BaseModel):
    beta: float
    alpha: float
    stderr: float
    sizes: list[int]
    mean_abs_m: list[float]
    mean_abs_m_per_site: list[float]


def magnetization_exponent(
    beta: float,
    sizes: Sequence[int],
    sweeps: int,
    replicas: int,
    seed: int = 0,
    burn_in_sweeps: Optional[float] = None,
    threads: Optional[int] = None,
) -> ExponentFit:
    """Fit E|m| ~ N^alpha on Curie-Weiss instances, sampling once per sweep after burn-in."""
    if len(sizes) < 4:
        raise ParameterRangeError(f"exponent fit needs at least 4 sizes, got {len(sizes)}")

    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    means = []
    for N, stream in zip(sizes, streams):
        inst = complete_graph_instance(N, beta)
        burn_in = None if burn_in_sweeps is None else int(burn_in_sweeps * N)
        runs = run_replicas(inst, sweeps * N, stream, stride=N, replicas=replicas, burn_in=burn_in, threads=threads)
        means.append(float(np.mean(np.abs(np.concatenate([run.m for run in runs])))))
        logger.info(f"beta={beta}, N={N}: E|m| = {means[-1]:.6g}")

    fit = linregress(np.log(sizes), np.log(means))
    return ExponentFit(
        beta=beta, alpha=float(fit.slope), stderr=float(fit.stderr), sizes=list(sizes),
        mean_abs_m=means, mean_abs_m_per_site=[m / N for m, N in zip(means, sizes)],
    )


class PatternShare(BaseModel):
    signs: str
    fraction: float
    cut: int


class PhaseOccupancy(BaseModel):
    samples: int
    unresolved: float
    patterns: list[PatternShare]


def phase_occupancy(
    inst: IsingInstance,
    steps: int,
    seed: Seed = 0,
    stride: Optional[int] = None,
    burn_in: Optional[int] = None,
) -> PhaseOccupancy:
    """Share of samples whose cloud-sign pattern equals each cut; samples with a zero cloud are unresolved."""
    traj = glauber_run(inst, steps, seed, stride or inst.N, burn_in)
    resolved = np.all(traj.cloud_m != 0, axis=1)
    counts = Counter(
        "".join("+" if x > 0 else "-" for x in row) for row in traj.cloud_m[resolved]
    )
    total = len(traj.m)
    patterns = [
        PatternShare(signs=signs, fraction=count / total, cut=cut_size(inst.base, CutAssignment.from_string(signs)))
        for signs, count in sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    ]
    return PhaseOccupancy(samples=total, unresolved=float(np.mean(~resolved)) if total else 0.0, patterns=patterns)


def curie_weiss_distribution(N: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact law of m on the complete graph: P(m) proportional to C(N, (N+m)/2) exp(beta (m^2 - N) / (2N))."""
    m = np.arange(-N, N + 1, 2)
    logw = log_binomial(N, (N + m) / 2) + beta * (m * m - N) / (2.0 * N)
    return m, np.exp(logw - logsumexp(logw))
