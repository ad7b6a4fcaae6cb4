"""log Z_J by three independent routes.

brute force over spins, the magnetization-vector decomposition
Z_J = K sum_b prod_v C(t, t/2 + b_v) exp(2 beta sum b_v^2 - 4 gamma sum_E b_u b_v),
and the same sum restricted to one sign orthant. All sums are streamed in the
natural-log domain with a fixed chunking, so results do not depend on --threads.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import logsumexp

from config.settings import settings
from modules.errors import (
    DomainError,
    InstanceTooLargeError,
    LengthMismatchError,
    NonSymmetricMatrixError,
    ParameterRangeError,
)
from modules.gadget import IsingInstance
from modules.graph import CutAssignment, cut_size
from modules.landscape import log_binomial

logger = logging.getLogger(__name__)

# natural-log weight, -inf for an empty sum
LogWeight = float


class MagVector(BaseModel):
    """Per-cloud integer bias b_v: cloud v has t/2 + b_v spins at +1."""

    model_config = ConfigDict(frozen=True)

    b: tuple[int, ...]

    def check(self, n: int, t: int) -> "MagVector":
        if len(self.b) != n:
            raise LengthMismatchError(f"magnetization vector has {len(self.b)} entries, expected {n}")
        if any(abs(x) > t // 2 for x in self.b):
            raise DomainError(f"every |b_v| must be <= t/2 = {t // 2}, got {self.b}")
        return self


class OrthantWeight(BaseModel):
    signs: str
    log_z: float
    cut: int


def _combine(chunk_values: Sequence[float]) -> LogWeight:
    # fixed left-to-right reduction order
    total = -math.inf
    for value in chunk_values:
        total = float(np.logaddexp(total, value))
    return total


def _map_chunks(func, total: int, threads: Optional[int]) -> list:
    chunk = settings.limits.enumeration_chunk
    ranges = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    workers = threads or settings.runtime.threads
    if workers == 1:
        return [func(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: func(*r), ranges))


# ============================================
# Brute force over spin configurations
# ============================================

def _check_symmetric(J: np.ndarray) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise NonSymmetricMatrixError(f"interaction matrix must be square, got shape {J.shape}")
    if not np.allclose(J, J.T, rtol=0.0, atol=1e-12):
        raise NonSymmetricMatrixError("interaction matrix is not symmetric")
    return J


def brute_force_logZ(J, threads: Optional[int] = None) -> LogWeight:
    """log sum over sigma in {-1,+1}^N of exp(sigma^T J sigma / 2)."""
    J = _check_symmetric(J)
    N = J.shape[0]
    cap = settings.limits.brute_force_cap
    if N > cap:
        raise InstanceTooLargeError(f"brute force enumerates 2^N spins; N={N} exceeds {cap}")

    shifts = np.arange(N, dtype=np.int64)

    def chunk_lse(lo, hi):
        index = np.arange(lo, hi, dtype=np.int64)
        sigma = 2.0 * ((index[:, None] >> shifts) & 1) - 1.0
        return float(logsumexp(0.5 * np.sum((sigma @ J) * sigma, axis=1)))

    return _combine(_map_chunks(chunk_lse, 1 << N, threads))


def boltzmann_distribution(J) -> np.ndarray:
    """exp(sigma^T J sigma / 2) / Z for every configuration, indexed like brute_force_logZ (bit i set when sigma_i = +1)."""
    J = _check_symmetric(J)
    N = J.shape[0]
    log_z = brute_force_logZ(J)
    index = np.arange(1 << N, dtype=np.int64)
    sigma = 2.0 * ((index[:, None] >> np.arange(N, dtype=np.int64)) & 1) - 1.0
    return np.exp(0.5 * np.sum((sigma @ J) * sigma, axis=1) - log_z)


# ============================================
# Magnetization-vector decomposition
# ============================================

def _require_even(inst: IsingInstance):
    if inst.t % 2:
        raise ParameterRangeError(f"magnetization decomposition needs an even cloud size, got t={inst.t}")


def contribution(inst: IsingInstance, b) -> LogWeight:
    """log of the total weight of configurations whose cloud biases equal b."""
    _require_even(inst)
    vec = MagVector(b=tuple(int(x) for x in b)).check(inst.n, inst.t)
    b = np.array(vec.b, dtype=float)
    value = inst.log_k + float(np.sum(log_binomial(inst.t, inst.t / 2 + b))) + 2.0 * inst.beta * float(b @ b)
    edges = inst.base.edge_array()
    if len(edges):
        value -= 4.0 * inst.gamma * float(np.sum(b[edges[:, 0]] * b[edges[:, 1]]))
    return value


def _count_terms(value_sets) -> int:
    return math.prod(len(values) for values in value_sets)


def _vector_weights(inst: IsingInstance, value_sets):
    """(lo, hi) -> (log weights, bias vectors) for flat indices lo..hi-1 in odometer order."""
    t, n = inst.t, inst.n
    sizes = [len(values) for values in value_sets]
    strides = [math.prod(sizes[v + 1:]) for v in range(n)]
    singles = [log_binomial(t, t / 2 + values) + 2.0 * inst.beta * values**2 for values in value_sets]
    edges = inst.base.edge_array()

    # the last coordinate moves fastest
    def weights(lo, hi):
        index = np.arange(lo, hi, dtype=np.int64)
        logw = np.full(len(index), inst.log_k)
        b = np.empty((len(index), n))
        for v in range(n):
            digit = (index // strides[v]) % sizes[v]
            logw += singles[v][digit]
            b[:, v] = value_sets[v][digit]
        if len(edges):
            logw -= 4.0 * inst.gamma * np.sum(b[:, edges[:, 0]] * b[:, edges[:, 1]], axis=1)
        return logw, b

    return weights


def _check_budget(total: int, budget: Optional[int]):
    budget = budget or settings.limits.enumeration_budget
    if total > budget:
        raise InstanceTooLargeError(f"{total} magnetization vectors exceed the enumeration budget {budget}")


def _enumerate_logZ(inst: IsingInstance, value_sets, budget: Optional[int], threads: Optional[int]) -> LogWeight:
    total = _count_terms(value_sets)
    _check_budget(total, budget)
    weights = _vector_weights(inst, value_sets)

    def chunk_lse(lo, hi):
        return float(logsumexp(weights(lo, hi)[0]))

    return _combine(_map_chunks(chunk_lse, total, threads))


def _full_range(t: int) -> np.ndarray:
    return np.arange(-(t // 2), t // 2 + 1, dtype=float)


def magnetization_terms(inst: IsingInstance) -> int:
    return (inst.t + 1) ** inst.n


def magnetization_logZ(inst: IsingInstance, budget: Optional[int] = None, threads: Optional[int] = None) -> LogWeight:
    _require_even(inst)
    return _enumerate_logZ(inst, [_full_range(inst.t)] * inst.n, budget, threads)


def orthant_logZ(
    inst: IsingInstance,
    signs: CutAssignment,
    budget: Optional[int] = None,
    threads: Optional[int] = None,
) -> LogWeight:
    """Same sum restricted to a_v b_v >= 0 (b_v = 0 belongs to both orthants)."""
    return _enumerate_logZ(inst, _orthant_values(inst, signs), budget, threads)


def _orthant_values(inst: IsingInstance, signs: CutAssignment) -> list[np.ndarray]:
    _require_even(inst)
    if len(signs) != inst.n:
        raise LengthMismatchError(f"sign pattern has {len(signs)} entries, instance has {inst.n} clouds")
    half = np.arange(0, inst.t // 2 + 1, dtype=float)
    return [a * half for a in signs.side]


def orthant_terms(inst: IsingInstance) -> int:
    return (inst.t // 2 + 1) ** inst.n


def orthant_argmax(
    inst: IsingInstance,
    signs: CutAssignment,
    budget: Optional[int] = None,
    threads: Optional[int] = None,
) -> tuple[MagVector, LogWeight]:
    """Integer bias vector of largest contribution in the orthant of `signs`; first in odometer order on ties."""
    value_sets = _orthant_values(inst, signs)
    total = _count_terms(value_sets)
    _check_budget(total, budget)
    weights = _vector_weights(inst, value_sets)

    def chunk_best(lo, hi):
        logw, b = weights(lo, hi)
        k = int(np.argmax(logw))
        return float(logw[k]), b[k]

    best_value, best_b = -math.inf, None
    for value, b in _map_chunks(chunk_best, total, threads):
        if value > best_value:
            best_value, best_b = value, b
    return MagVector(b=tuple(int(x) for x in best_b)), best_value


def sign_patterns(n: int) -> list[CutAssignment]:
    """All 2^(n-1) sign patterns with vertex 0 on the '-' side."""
    return [
        CutAssignment(side=(-1,) + tuple(1 if (mask >> (n - 2 - i)) & 1 else -1 for i in range(n - 1)))
        for mask in range(1 << (n - 1))
    ]


def orthant_decomposition(inst: IsingInstance, threads: Optional[int] = None) -> list[OrthantWeight]:
    weights = []
    for signs in sign_patterns(inst.n):
        weights.append(
            OrthantWeight(signs=signs.to_string(), log_z=orthant_logZ(inst, signs, threads=threads), cut=cut_size(inst.base, signs))
        )
    return weights


def magnetization_distribution(inst: IsingInstance, budget: int = 10**6) -> tuple[np.ndarray, np.ndarray]:
    """Exact law of the cloud-bias vector b under the Ising measure: (vectors, probabilities)."""
    _require_even(inst)
    full = _full_range(inst.t)
    total = len(full) ** inst.n
    if total > budget:
        raise InstanceTooLargeError(f"{total} magnetization vectors exceed the distribution budget {budget}")

    vectors = np.array(np.meshgrid(*([full] * inst.n), indexing="ij")).reshape(inst.n, -1).T
    logw = np.array([contribution(inst, vec) for vec in vectors.astype(int)])
    return vectors.astype(int), np.exp(logw - logsumexp(logw))
