import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from modules.commands import run_decide
from modules.dataValidation import LabOverrides
from modules.errors import ParameterRangeError
from modules.gadget import build_instance, lab_params
from modules.graph import max_cut_exact, parse_graph, random_regular
from modules.partition import magnetization_logZ
from modules.reduction import (
    Decision,
    build_certificate,
    compute_T1,
    compute_T2,
    decide_gap,
    edi_lower_bound,
    resolve_params,
    thresholds_met,
    verify_small,
)
from tests.conftest import PRISM_TEXT

K4_OVERRIDES = LabOverrides(t=8, bhat=2.0, uhat=3.0)


# ============================================
# T1, T2 and the gap chain
# ============================================

def test_k4_lab_bounds(k4, k4_lab):
    log_t1 = compute_T1(k4, k4_lab, 4)
    log_t2 = compute_T2(k4, k4_lab, 4)
    assert_allclose(log_t1, 15.790924, atol=1e-5)
    assert_allclose(log_t2, 29.360110, atol=1e-5)


def test_t1_closed_form(k4, k4_lab):
    beta, gamma = k4_lab.beta, k4_lab.gamma
    expected = -16 * beta + 4 * math.log(28) + 32 * beta + 4 * gamma * 4 * (2 * 4 - 6)
    assert_allclose(compute_T1(k4, k4_lab, 4), expected, rtol=1e-13)


def test_without_cross_coupling_t1_is_cut_free(k4, k4_lab):
    flat = k4_lab.model_copy(update={"gamma": 1e-300})
    assert_allclose(compute_T1(k4, flat, 4), compute_T1(k4, flat, 6), rtol=1e-14)


def test_bounds_increase_with_A(k4, k4_lab):
    assert compute_T1(k4, k4_lab, 5) > compute_T1(k4, k4_lab, 4)
    assert compute_T2(k4, k4_lab, 5) > compute_T2(k4, k4_lab, 4)


def test_A_below_tau_half_edges_rejected(k4, k4_lab):
    with pytest.raises(ParameterRangeError):
        compute_T1(k4, k4_lab, 3)
    with pytest.raises(ParameterRangeError):
        compute_T1(k4, k4_lab, 7)


def test_t2_needs_tau(k4):
    with pytest.raises(ParameterRangeError):
        compute_T2(k4, lab_params(8, bhat=2.0, uhat=3.0), 4)


def test_gap_chain_holds_on_random_draws():
    rng = np.random.default_rng(0)
    graphs = [random_regular(n, 3, seed=s) for n, s in ((4, 0), (6, 1), (8, 2), (10, 3))]
    for _ in range(1000):
        g = graphs[int(rng.integers(len(graphs)))]
        t = 2 * int(rng.integers(4, 2048))
        bhat = float(rng.integers(1, t // 4 + 1))
        uhat = float(rng.uniform(bhat + 0.5, t / 2 - 0.5))
        tau = float(rng.uniform(1.01, 2.0))
        m = g.num_edges
        A = int(rng.integers(math.ceil(tau * m / 2), m + 1)) if math.ceil(tau * m / 2) <= m else None
        if A is None:
            continue
        p = lab_params(t, bhat=bhat, uhat=uhat, tau=tau)
        gap = compute_T1(g, p, A) - compute_T2(g, p, A)
        assert gap >= edi_lower_bound(g, p, A) - 1e-9 * max(1.0, abs(gap))


# ============================================
# Certificates and decisions
# ============================================

def test_lab_certificate(k4):
    cert = build_certificate(k4, None, 1.1, 4, mode="lab", overrides=K4_OVERRIDES)
    assert cert.mode == "lab"
    assert cert.N == 32
    assert cert.params.max_degree == 3
    assert_allclose(cert.gap, cert.log_t1 - cert.log_t2)
    assert cert.spectral_diameter <= cert.diameter_bound
    assert_allclose(cert.log_k_shift, -0.5 * cert.lambda_min * 32)
    assert cert.required_gap is None


def test_scheduled_certificate_on_k4(k4):
    cert = build_certificate(k4, 0.48, 2.0, 6, mode="paper")
    assert cert.params.t == 16384
    assert cert.params.bhat == float(round(16384**0.83))
    assert_allclose(cert.required_gap, 2 * (4 * 16384) ** (1 / 8))
    assert cert.gap >= cert.required_gap
    assert cert.gap > 500


def test_scheduled_mode_needs_cubic_graph_and_parameters(k4, p2):
    with pytest.raises(ParameterRangeError):
        resolve_params(p2, 0.48, 2.0, "paper")
    with pytest.raises(ParameterRangeError):
        resolve_params(k4, None, 2.0, "paper")
    with pytest.raises(ParameterRangeError):
        resolve_params(k4, None, 1.1, "lab")


def test_decide_thresholds(k4):
    cert = build_certificate(k4, None, 1.1, 4, mode="lab", overrides=K4_OVERRIDES)
    cert = cert.model_copy(update={"log_t1": 10.0, "log_t2": 5.0, "log_k_shift": 1.0})
    assert decide_gap(11.6, 0.5, cert) is Decision.MAXCUT_AT_LEAST_A
    assert decide_gap(5.4, 0.5, cert) is Decision.ALL_CUTS_BELOW_A_OVER_TAU
    assert decide_gap(8.5, 0.5, cert) is Decision.INDETERMINATE
    # a loose estimate cannot decide
    assert decide_gap(11.6, 10.0, cert) is Decision.INDETERMINATE
    with pytest.raises(ParameterRangeError):
        decide_gap(8.5, -1.0, cert)


def test_decide_flags_overlapping_thresholds(k4):
    cert = build_certificate(k4, None, 1.1, 4, mode="lab", overrides=K4_OVERRIDES)
    cert = cert.model_copy(update={"log_t1": 5.0, "log_t2": 10.0, "log_k_shift": 0.0})
    assert thresholds_met(7.0, 0.5, cert) == (True, True)
    result = run_decide(cert, 7.0, 0.5)
    assert result.both_thresholds_met
    assert result.decision == Decision.MAXCUT_AT_LEAST_A.value
    assert not run_decide(cert, 7.0, 5.0).both_thresholds_met


# ============================================
# Desk-scale verification
# ============================================

def test_verify_k4(k4, k4_lab):
    report = verify_small(k4, k4_lab, 4)
    assert report.max_cut == 4
    assert report.t1_holds
    assert report.log_z >= report.log_t1
    assert len(report.orthants) == 8
    assert report.dominant_is_max_cut
    assert report.dominant_cut == 4


def test_verify_cubic_graphs(cubic6):
    p = lab_params(8, bhat=2.0, uhat=3.0, max_degree=3, tau=1.1)
    for g in cubic6:
        size, _ = max_cut_exact(g)
        report = verify_small(g, p, size)
        assert report.t1_holds
        assert report.max_cut == size


def test_exact_partition_function_decides_correctly(k4, cubic6):
    for g in [k4, *cubic6]:
        size, _ = max_cut_exact(g)
        cert = build_certificate(g, None, 1.1, size, mode="lab", overrides=K4_OVERRIDES)
        log_z = magnetization_logZ(build_instance(g, cert.params))
        assert decide_gap(log_z + cert.log_k_shift, 0.0, cert) is Decision.MAXCUT_AT_LEAST_A


def _exact_decision(g, A):
    cert = build_certificate(g, None, 1.1, A, mode="lab", overrides=K4_OVERRIDES)
    log_z = magnetization_logZ(build_instance(g, cert.params))
    return run_decide(cert, log_z + cert.log_k_shift, 0.0)


@pytest.mark.parametrize("A", [5, 6])
def test_k4_above_max_cut_meets_both_thresholds(k4, A, caplog):
    # max cut of K4 is 4; at t=8 log T1 < log Z < log T2 for every admissible A
    result = _exact_decision(k4, A)
    assert result.both_thresholds_met
    assert result.decision == Decision.MAXCUT_AT_LEAST_A.value
    assert result.log_t2 > result.log_t1
    assert "not sound" in caplog.text


@pytest.mark.parametrize("A", [8, 9])
def test_prism_above_max_cut_meets_both_thresholds(A):
    g = parse_graph(PRISM_TEXT)
    assert max_cut_exact(g)[0] == 7
    result = _exact_decision(g, A)
    assert result.both_thresholds_met
    assert result.decision == Decision.MAXCUT_AT_LEAST_A.value


def test_cubic_graphs_above_max_cut(cubic6):
    for g in cubic6:
        size, _ = max_cut_exact(g)
        for A in range(size + 1, g.num_edges + 1):
            assert _exact_decision(g, A).both_thresholds_met


def test_verify_reports_lattice_next_to_dominant_maximum(k4, k4_lab):
    report = verify_small(k4, k4_lab, 4)
    maximum = report.dominant_maximum
    assert maximum.converged
    a = np.array([1 if ch == "+" else -1 for ch in report.dominant_signs])
    assert maximum.lattice_argmax == (3 * a).tolist()
    assert maximum.lattice_matches_rounding is False
    assert np.all(a * np.array(maximum.b) > 0)
