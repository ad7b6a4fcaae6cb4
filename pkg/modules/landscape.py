"""Free-energy landscape of the cloud gadget.

Single-cloud profile Q(b) = 2 beta b^2 + t H(1/2 + b/t), the aggregate potential
Phi(b) = sum_v Q(b_v) - 4 gamma sum_{uv in E} b_u b_v, and the numerical checks
that back the certificate bounds: the unique maximizer of Q, the bias cap on
orthant maximizers of Phi, the binomial/entropy sandwich and the quartic
expansion of Q(bhat) - Q(0).
"""
import logging
import math
from typing import TYPE_CHECKING, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel
from scipy.optimize import brentq
from scipy.special import entr, gammaln, xlog1py

from config.settings import settings
from modules.errors import BoundViolationError, DomainError, LengthMismatchError
from modules.graph import CutAssignment, Graph, cut_size

if TYPE_CHECKING:
    from modules.gadget import GadgetParams, IsingInstance

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


# ============================================
# Scalar building blocks
# ============================================

def entropy(x):
    """H(x) = -(x ln x + (1-x) ln(1-x)) with 0 ln 0 = 0."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise DomainError(f"entropy is defined on [0, 1], got {x}")
    value = entr(arr) + entr(1.0 - arr)
    return float(value) if value.ndim == 0 else value


def log_ratio(x):
    """ln((1+x)/(1-x))."""
    return np.log1p(x) - np.log1p(-x)


def g_mono(y: float) -> float:
    """(1/y) ln((1+y)/(1-y)), strictly increasing on (0, 1) with limit 2 at 0."""
    if not 0 < y < 1:
        raise DomainError(f"g is defined on (0, 1), got {y}")
    if y < settings.numerics.series_threshold:
        y2 = y * y
        return 2.0 * (1.0 + y2 / 3.0 + y2 * y2 / 5.0)
    return (math.log1p(y) - math.log1p(-y)) / y


def _entropy_deficit(x):
    # (1+x) ln(1+x) + (1-x) ln(1-x), so that t H(1/2 + b/t) = t ln 2 - (t/2) * deficit(2b/t)
    return xlog1py(1.0 + x, x) + xlog1py(1.0 - x, -x)


def _check_bias_domain(b, t):
    if np.any(np.abs(np.asarray(b, dtype=float)) > t / 2):
        raise DomainError(f"bias must satisfy |b| <= t/2 = {t / 2}")


def q_profile(b, t: int, beta: float):
    _check_bias_domain(b, t)
    b = np.asarray(b, dtype=float)
    value = t * LN2 + 2.0 * beta * b * b - 0.5 * t * _entropy_deficit(2.0 * b / t)
    return float(value) if value.ndim == 0 else value


def q_derivative(b, t: int, beta: float):
    return 4.0 * beta * b - log_ratio(2.0 * np.asarray(b, dtype=float) / t)


# ============================================
# Unique maximizer of Q
# ============================================

class QScan(BaseModel):
    argmax: float
    value: float
    sign_changes: int
    boundary: bool


def q_maximizer_scan(t: int, beta: float, grid: Optional[float] = None) -> QScan:
    """Grid scan of dQ/db on (0, t/2), then bisection on the + to - crossing."""
    grid = grid or t / 8192
    if grid <= 0:
        raise DomainError(f"grid step must be positive, got {grid}")

    upper = t / 2 - settings.numerics.boundary_inset * t
    bs = np.append(np.arange(grid, upper, grid), upper)
    d = q_derivative(bs, t, beta)
    sign_changes = int(np.count_nonzero(np.diff(np.sign(d)) != 0))

    if d[0] <= 0:
        # subcritical: dQ/db < 0 on the whole half-line, maximum at the boundary b = 0
        return QScan(argmax=0.0, value=q_profile(0.0, t, beta), sign_changes=sign_changes, boundary=True)

    down = np.nonzero(d <= 0)[0]
    if len(down) == 0:
        return QScan(argmax=upper, value=q_profile(upper, t, beta), sign_changes=sign_changes, boundary=True)

    k = int(down[0])
    root = brentq(q_derivative, bs[k - 1], bs[k], args=(t, beta), xtol=1e-14 * t, rtol=4 * np.finfo(float).eps)
    return QScan(argmax=root, value=q_profile(root, t, beta), sign_changes=sign_changes, boundary=False)


# ============================================
# Aggregate potential
# ============================================

def _bias_vector(b, n: int) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    if b.shape != (n,):
        raise LengthMismatchError(f"bias vector has shape {b.shape}, expected ({n},)")
    return b


def phi(b, inst: "IsingInstance") -> float:
    b = _bias_vector(b, inst.n)
    value = float(np.sum(q_profile(b, inst.t, inst.beta)))
    edges = inst.base.edge_array()
    if len(edges):
        value -= 4.0 * inst.gamma * float(np.sum(b[edges[:, 0]] * b[edges[:, 1]]))
    return value


def phi_gradient(b, inst: "IsingInstance") -> np.ndarray:
    b = _bias_vector(b, inst.n)
    if np.any(np.abs(b) >= inst.t / 2):
        raise DomainError("phi_gradient needs |b_v| < t/2 strictly")
    S = inst.base.adjacency() @ b
    return 4.0 * inst.beta * b - 4.0 * inst.gamma * S - log_ratio(2.0 * b / inst.t)


def phi_upper_bound(params: "GadgetParams", g: Graph, signs: CutAssignment) -> float:
    """n Q(bhat) + 4 gamma uhat^2 * cut(signs): bound on Phi over the orthant of `signs` once |b_v| <= uhat."""
    return g.n * q_profile(params.bhat, params.t, params.beta) + 4.0 * params.gamma * params.uhat**2 * cut_size(g, signs)


class OrthantMaximum(BaseModel):
    b: list[float]
    value: float
    residual: float
    converged: bool
    sweeps: int
    max_abs_bias: float
    within_uhat: bool
    start_spread: float = 0.0
    # integer argmax of the exact contribution over the same orthant, when within budget
    lattice_argmax: Optional[list[int]] = None
    lattice_distance: Optional[float] = None
    lattice_matches_rounding: Optional[bool] = None


def _coordinate_argmax(c: float, t: int, beta: float, s_max: float) -> float:
    """Maximize h(s) = Q(s) - c s over s in [0, s_max].

    h'(s) = 4 beta s - c - ln((t+2s)/(t-2s)) is concave, so it has at most two
    roots; the maximizer is 0 or the larger root.
    """
    def dh(s):
        return 4.0 * beta * s - c - float(log_ratio(2.0 * s / t))

    bt = beta * t
    s_peak = min(0.5 * t * math.sqrt(1.0 - 1.0 / bt), s_max) if bt > 1 else 0.0
    if dh(s_peak) <= 0:
        return 0.0
    if dh(s_max) >= 0:
        return s_max

    root = brentq(dh, s_peak, s_max, xtol=1e-14 * t, rtol=4 * np.finfo(float).eps)
    if c > 0:
        # h'(0) < 0: the larger root competes with the corner s = 0
        h_root = q_profile(root, t, beta) - c * root
        if h_root <= q_profile(0.0, t, beta):
            return 0.0
    return root


def _projected_residual(b, a, grad, s_max) -> float:
    s = a * b
    outward = ((s <= 0) & (a * grad < 0)) | ((s >= s_max) & (a * grad > 0))
    return float(np.max(np.where(outward, 0.0, np.abs(grad)), initial=0.0))


def _ascend(inst: "IsingInstance", a: np.ndarray, start: float, tol: float, max_sweeps: int):
    t, beta, gamma = inst.t, inst.beta, inst.gamma
    s_max = t / 2 - settings.numerics.boundary_inset * t
    adj = inst.base.neighbors()
    b = a * min(start, s_max)

    residual = math.inf
    for sweep in range(1, max_sweeps + 1):
        for v in range(inst.n):
            S_v = sum(b[u] for u in adj[v])
            b[v] = a[v] * _coordinate_argmax(4.0 * gamma * a[v] * S_v, t, beta, s_max)
        residual = _projected_residual(b, a, phi_gradient(b, inst), s_max)
        if residual < tol * t:
            return b, residual, True, sweep
    return b, residual, False, max_sweeps


def maximize_phi_orthant(
    g: Graph,
    params: "GadgetParams",
    signs: CutAssignment,
    starts: Optional[Sequence[float]] = None,
    tol: Optional[float] = None,
    max_sweeps: Optional[int] = None,
    lattice_budget: Optional[int] = None,
) -> OrthantMaximum:
    """Projected round-robin coordinate ascent of Phi over {a_v b_v >= 0}.

    Runs from every start magnitude (default bhat and uhat) and keeps the best
    stationary point; disagreement between starts is reported, not resolved.
    When the orthant has at most `lattice_budget` integer vectors, the integer
    argmax of the exact contribution is located and compared with round(b*).
    """
    from modules.gadget import IsingInstance
    from modules.partition import orthant_argmax, orthant_terms

    if len(signs) != g.n:
        raise LengthMismatchError(f"sign pattern has {len(signs)} entries, graph has {g.n} vertices")
    inst = IsingInstance(base=g, t=params.t, beta=params.beta, gamma=params.gamma)
    a = np.array(signs.side, dtype=float)
    tol = tol or settings.numerics.ascent_tolerance
    max_sweeps = max_sweeps or settings.numerics.ascent_max_sweeps
    starts = list(starts) if starts else [params.bhat, params.uhat]

    runs = []
    for start in starts:
        b, residual, converged, sweeps = _ascend(inst, a, start, tol, max_sweeps)
        runs.append((phi(b, inst), b, residual, converged, sweeps))
        if not converged:
            logger.warning(f"Coordinate ascent hit {max_sweeps} sweeps (residual {residual:.3e}) for signs {signs.to_string()}")

    values = [run[0] for run in runs]
    value, b, residual, converged, sweeps = max(runs, key=lambda run: run[0])
    spread = max(values) - min(values)
    if spread > 1e-8 * max(1.0, abs(value)):
        logger.warning(f"Multi-start disagreement {spread:.3e} for signs {signs.to_string()}")

    max_abs = float(np.max(np.abs(b)))
    within = max_abs <= params.uhat + 1e-6 * params.t
    if converged and not within:
        raise BoundViolationError(
            f"stationary point has max |b_v| = {max_abs:.9g} > uhat = {params.uhat:.9g} for signs {signs.to_string()}"
        )
    result = OrthantMaximum(
        b=b.tolist(), value=value, residual=residual, converged=converged, sweeps=sweeps,
        max_abs_bias=max_abs, within_uhat=within, start_spread=spread,
    )

    budget = lattice_budget or settings.limits.lattice_check_budget
    if orthant_terms(inst) <= budget:
        best, _ = orthant_argmax(inst, signs, budget=budget)
        lattice = np.array(best.b, dtype=float)
        result.lattice_argmax = list(best.b)
        result.lattice_distance = float(np.max(np.abs(lattice - b)))
        result.lattice_matches_rounding = bool(np.array_equal(lattice, np.round(b)))
        if not result.lattice_matches_rounding:
            logger.warning(
                f"Integer argmax {best.b} is {result.lattice_distance:.3g} from b* for signs {signs.to_string()}"
            )
    return result


# ============================================
# Binomial sandwich and quartic expansion
# ============================================

class BinomialBounds(NamedTuple):
    lower: np.ndarray
    exact: np.ndarray
    upper: np.ndarray


def log_binomial(t: int, k):
    k = np.asarray(k, dtype=float)
    return gammaln(t + 1.0) - gammaln(k + 1.0) - gammaln(t - k + 1.0)


def binomial_entropy_gap(t: int, b) -> BinomialBounds:
    """t H(1/2 + b/t) - ln(t+1) <= ln C(t, t/2 + b) <= t H(1/2 + b/t)."""
    _check_bias_domain(b, t)
    b = np.asarray(b, dtype=float)
    upper = t * LN2 - 0.5 * t * _entropy_deficit(2.0 * b / t)
    return BinomialBounds(lower=upper - math.log(t + 1.0), exact=log_binomial(t, t / 2 + b), upper=upper)


class QbExpansion(NamedTuple):
    exact: float
    leading: float
    residual: float


def qb_expansion_check(t: int, bhat: float) -> QbExpansion:
    """Q(bhat) - Q(0) against its leading term (4/3) bhat^4 / t^3, with beta tuned so bhat is the maximizer."""
    # slack for t^(3/4+delta) landing on t/4 up to rounding
    if not 0 <= bhat <= t / 4 * (1 + 1e-12):
        raise DomainError(f"expansion check needs 0 <= bhat <= t/4, got {bhat}")
    if bhat == 0:
        return QbExpansion(0.0, 0.0, 0.0)

    x = 2.0 * bhat / t
    beta = g_mono(x) / (2.0 * t)
    exact = 2.0 * beta * bhat * bhat - 0.5 * t * float(_entropy_deficit(x))
    leading = 4.0 / 3.0 * bhat**4 / t**3
    return QbExpansion(exact, leading, exact - leading)


def qb_sweep(ts: Sequence[int], delta: float) -> pd.DataFrame:
    """qb_expansion_check along bhat = t^(3/4+delta), one row per t in ascending order."""
    rows = []
    for t in sorted(ts):
        bhat = float(t) ** (0.75 + delta)
        exact, leading, residual = qb_expansion_check(t, bhat)
        rows.append({"t": t, "bhat": bhat, "exact": exact, "leading": leading, "residual": residual})
    return pd.DataFrame(rows, columns=["t", "bhat", "exact", "leading", "residual"])
