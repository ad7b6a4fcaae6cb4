import logging
import math
from functools import singledispatch
from typing import Optional

import numpy as np
from pydantic import BaseModel

from config.settings import settings
from modules.errors import BoundViolationError, EigenSolverError, InstanceTooLargeError, NonSymmetricMatrixError
from modules.gadget import GadgetParams, IsingInstance, build_instance, materialize_dense
from modules.graph import Graph

logger = logging.getLogger(__name__)


class EigenGroup(BaseModel):
    value: float
    multiplicity: int


class SpectrumReport(BaseModel):
    groups: list[EigenGroup]
    lambda_min: float
    lambda_max: float
    diameter: float
    paper_bound: Optional[float] = None

    @property
    def count(self) -> int:
        return sum(group.multiplicity for group in self.groups)

    def eigenvalues(self, cap: Optional[int] = None) -> np.ndarray:
        """Expanded, sorted multiset; refuses to expand past the dense cap."""
        cap = cap or settings.limits.dense_cap
        if self.count > cap:
            raise InstanceTooLargeError(f"{self.count} eigenvalues exceed the expansion cap {cap}")
        return np.sort(np.concatenate([np.full(g.multiplicity, g.value) for g in self.groups]))


class PsdShift(BaseModel):
    lambda_min: float
    log_k_shift: float
    diameter: float


class DiameterCheck(BaseModel):
    actual: float
    bound: float
    paper_bound: Optional[float] = None
    # 1 + 8 t^(-1/2 + 2 delta), when delta is known
    reference_bound: Optional[float] = None


# ============================================
# Cyclic Jacobi for the base adjacency
# ============================================

def jacobi_eigenvalues(A, tol: Optional[float] = None, max_sweeps: Optional[int] = None) -> np.ndarray:
    """Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below tol * ||A||_F."""
    a = np.array(A, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n or not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise NonSymmetricMatrixError("Jacobi eigensolver needs a square symmetric matrix")
    tol = tol or settings.numerics.jacobi_tolerance
    max_sweeps = max_sweeps or settings.numerics.jacobi_max_sweeps

    scale = max(np.linalg.norm(a), 1.0)
    for sweep in range(max_sweeps):
        off = math.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * scale:
            logger.debug(f"Jacobi converged after {sweep} sweeps (n={n})")
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                tan = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                cos = 1.0 / math.sqrt(tan * tan + 1.0)
                sin = tan * cos

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cos * col_p - sin * col_q
                a[:, q] = sin * col_p + cos * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = cos * row_p - sin * row_q
                a[q, :] = sin * row_p + cos * row_q

    raise EigenSolverError(f"Jacobi did not converge in {max_sweeps} sweeps (n={n})")


# ============================================
# Structured and dense routes
# ============================================

def structured_spectrum(inst: IsingInstance, delta: Optional[float] = None) -> SpectrumReport:
    """Exact spectrum of J = J1 + J2 from the base adjacency spectrum.

    J1 = I_n (x) beta(11^T - I) and J2 = -gamma A (x) 11^T commute, so every
    adjacency eigenvalue lambda gives beta(t-1) - gamma t lambda on the cloud-constant
    vectors, and the n(t-1) vectors summing to zero on every cloud give -beta.
    With the schedule exponent delta the report also carries the reference
    value 1 + 8 t^(-1/2 + 2 delta) for t beta.
    """
    t, beta, gamma = inst.t, inst.beta, inst.gamma
    lambdas = jacobi_eigenvalues(inst.base.adjacency())
    groups = [EigenGroup(value=beta * (t - 1) - gamma * t * lam, multiplicity=1) for lam in lambdas]
    if t > 1:
        groups.append(EigenGroup(value=-beta, multiplicity=inst.n * (t - 1)))

    values = [group.value for group in groups]
    lo, hi = min(values), max(values)
    paper_bound = 1.0 + 8.0 * float(t) ** (-0.5 + 2.0 * delta) if delta is not None else None
    return SpectrumReport(groups=groups, lambda_min=lo, lambda_max=hi, diameter=hi - lo, paper_bound=paper_bound)


def dense_spectral_diameter(J) -> tuple[float, float]:
    J = np.asarray(J, dtype=float)
    cap = settings.limits.dense_eigen_cap
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise NonSymmetricMatrixError(f"matrix must be square, got shape {J.shape}")
    if J.shape[0] > cap:
        raise InstanceTooLargeError(f"dense eigensolve of size {J.shape[0]} exceeds cap {cap}")
    if not np.allclose(J, J.T, rtol=0.0, atol=1e-12):
        raise NonSymmetricMatrixError("matrix is not symmetric")
    eig = np.linalg.eigvalsh(J)
    return float(eig[0]), float(eig[-1])


def dense_split(inst: IsingInstance) -> tuple[np.ndarray, np.ndarray]:
    """(J1, J2): the intra-cloud block-diagonal part and the cross-cloud part."""
    J = materialize_dense(inst)
    t = inst.t
    J1 = np.zeros_like(J)
    for v in range(inst.n):
        J1[v * t:(v + 1) * t, v * t:(v + 1) * t] = J[v * t:(v + 1) * t, v * t:(v + 1) * t]
    return J1, J - J1


def diameter_bound_check(g: Graph, p: GadgetParams) -> DiameterCheck:
    """Structured diameter against t beta + 2 Delta t gamma (and 1 + N^(-1/2+eps) in paper mode)."""
    inst = build_instance(g, p)
    report = structured_spectrum(inst, delta=p.delta)
    actual = report.diameter
    bound = p.t * p.beta + 2.0 * p.max_degree * p.t * p.gamma
    if actual > bound * (1 + 1e-12):
        raise BoundViolationError(f"spectral diameter {actual:.12g} exceeds t*beta + 2*Delta*t*gamma = {bound:.12g}")

    paper_bound = None
    if p.mode == "paper":
        paper_bound = 1.0 + float(inst.N) ** (-0.5 + p.epsilon)
        if actual > paper_bound:
            raise BoundViolationError(f"spectral diameter {actual:.12g} exceeds 1 + N^(-1/2+eps) = {paper_bound:.12g}")
    return DiameterCheck(actual=actual, bound=bound, paper_bound=paper_bound, reference_bound=report.paper_bound)


# ============================================
# psd shift
# ============================================

@singledispatch
def psd_shift(source) -> PsdShift:
    """lambda_min and ln K_shift = -lambda_min N / 2, so that log Z(J - lambda_min I) = ln K_shift + log Z(J)."""
    J = np.asarray(source, dtype=float)
    lo, hi = dense_spectral_diameter(J)
    return PsdShift(lambda_min=lo, log_k_shift=-0.5 * lo * J.shape[0], diameter=hi - lo)


@psd_shift.register
def _(source: IsingInstance) -> PsdShift:
    report = structured_spectrum(source)
    return PsdShift(lambda_min=report.lambda_min, log_k_shift=-0.5 * report.lambda_min * source.N, diameter=report.diameter)
