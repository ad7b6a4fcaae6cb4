import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from modules.errors import DomainError, LengthMismatchError
from modules.gadget import IsingInstance, beta_from_bhat, lab_params
from modules.graph import CutAssignment, Graph, max_cut_exact, random_regular
from modules.landscape import (
    binomial_entropy_gap,
    entropy,
    g_mono,
    maximize_phi_orthant,
    phi,
    phi_gradient,
    phi_upper_bound,
    q_maximizer_scan,
    q_profile,
    qb_expansion_check,
    qb_sweep,
)
from modules.partition import sign_patterns


# ============================================
# Entropy, Q and g
# ============================================

def test_entropy_known_values():
    assert_allclose(entropy(0.5), math.log(2))
    assert entropy(0.0) == 0.0
    assert entropy(1.0) == 0.0
    assert_allclose(entropy(0.75), 0.5623351, atol=1e-7)


@pytest.mark.parametrize("x", [-0.1, 1.5])
def test_entropy_domain(x):
    with pytest.raises(DomainError):
        entropy(x)


def test_q_profile_known_values():
    assert_allclose(q_profile(0, 8, 0.3), 8 * math.log(2))
    assert_allclose(q_profile(0, 8, 0.3), 5.545177, atol=1e-6)
    beta = math.log(3) / 8
    assert_allclose(q_profile(2, 8, beta), math.log(3) + 8 * entropy(0.75), rtol=1e-14)
    assert_allclose(q_profile(2, 8, beta), 5.597293, atol=1e-6)
    assert_allclose(q_profile(-1.5, 8, beta), q_profile(1.5, 8, beta))
    with pytest.raises(DomainError):
        q_profile(4.5, 8, beta)


def test_g_mono_values():
    assert_allclose(g_mono(1e-9), 2.0)
    assert_allclose(g_mono(0.5), 2 * math.log(3), rtol=1e-14)
    for y in np.linspace(0.01, 0.5, 50):
        assert g_mono(y) <= 2 * (1 + y * y)
    with pytest.raises(DomainError):
        g_mono(1.0)


def test_g_mono_is_increasing():
    rng = np.random.default_rng(0)
    pairs = np.sort(rng.uniform(1e-6, 1 - 1e-6, size=(10_000, 2)), axis=1)
    for y1, y2 in pairs:
        if y1 < y2:
            assert g_mono(y2) > g_mono(y1)


# ============================================
# Maximizer of Q
# ============================================

def test_scan_finds_tuned_maximizer():
    scan = q_maximizer_scan(8, math.log(3) / 8)
    assert abs(scan.argmax - 2) <= 1e-8 * 8
    assert scan.sign_changes == 1
    assert not scan.boundary


def test_scan_subcritical_and_doubled():
    sub = q_maximizer_scan(8, 0.9 / 8)
    assert sub.argmax == 0.0
    assert sub.boundary
    assert q_maximizer_scan(8, math.log(3) / 4).argmax > 2


def test_scan_random_pairs():
    rng = np.random.default_rng(3)
    for _ in range(50):
        t = 2 * int(rng.integers(4, 500_000))
        bhat = float(rng.uniform(0.05, 0.45)) * t
        scan = q_maximizer_scan(t, beta_from_bhat(t, bhat))
        assert scan.sign_changes == 1
        assert abs(scan.argmax - bhat) <= 1e-8 * t


def test_scan_grid_must_be_positive():
    with pytest.raises(DomainError):
        q_maximizer_scan(8, 0.1, grid=-1.0)


# ============================================
# Aggregate potential
# ============================================

def test_phi_known_values(k4):
    inst = IsingInstance(base=k4, t=8, beta=0.14, gamma=0.02)
    assert_allclose(phi(np.zeros(4), inst), 4 * 8 * math.log(2))
    b = np.array([1.0, -2.0, 0.5, 3.0])
    assert_allclose(phi(b, inst), phi(-b, inst))
    separable = IsingInstance(base=k4, t=8, beta=0.14, gamma=0.0)
    assert_allclose(phi(b, separable), np.sum(q_profile(b, 8, 0.14)))
    with pytest.raises(LengthMismatchError):
        phi(np.zeros(3), inst)


def test_phi_gradient_matches_finite_differences(k4):
    inst = IsingInstance(base=k4, t=8, beta=math.log(3) / 8, gamma=0.01)
    rng = np.random.default_rng(5)
    h = 1e-5
    assert_allclose(phi_gradient(np.zeros(4), inst), 0.0)
    for _ in range(100):
        b = rng.uniform(-3.5, 3.5, size=4)
        fd = np.array([(phi(b + h * e, inst) - phi(b - h * e, inst)) / (2 * h) for e in np.eye(4)])
        assert_allclose(phi_gradient(b, inst), fd, rtol=1e-6, atol=1e-6)


def test_phi_gradient_zero_at_tuned_bias():
    inst = IsingInstance(base=Graph(n=1), t=8, beta=math.log(3) / 8)
    assert_allclose(phi_gradient([2.0], inst), 0.0, atol=1e-14)
    with pytest.raises(DomainError):
        phi_gradient([4.0], inst)


# ============================================
# Orthant maximization
# ============================================

def test_maximize_without_edges(k4_lab):
    g = Graph(n=3)
    result = maximize_phi_orthant(g, k4_lab, CutAssignment.from_string("-+-"))
    assert result.converged
    assert_allclose(result.b, [-2.0, 2.0, -2.0], atol=1e-8)
    assert_allclose(result.value, 3 * q_profile(2.0, 8, k4_lab.beta), rtol=1e-12)


def test_maximize_single_vertex(single, k4_lab):
    result = maximize_phi_orthant(single, k4_lab, CutAssignment.from_string("+"))
    assert_allclose(result.b, [2.0], atol=1e-8)


def test_maximize_k4_max_cut(k4, k4_lab):
    _, witness = max_cut_exact(k4)
    result = maximize_phi_orthant(k4, k4_lab, witness)
    assert result.converged
    assert result.within_uhat
    assert result.max_abs_bias <= k4_lab.uhat + 1e-6 * k4_lab.t
    assert np.all(np.array(witness.side) * np.array(result.b) >= 0)
    assert result.value <= phi_upper_bound(k4_lab, k4, witness) + 1e-9


def test_maximize_length_mismatch(k4, k4_lab):
    with pytest.raises(LengthMismatchError):
        maximize_phi_orthant(k4, k4_lab, CutAssignment.from_string("-+"))


@pytest.mark.parametrize("seed", range(20))
def test_orthant_maximizers_stay_below_uhat(seed):
    n = (6, 8, 10, 12)[seed % 4]
    g = random_regular(n, 3, seed=seed)
    p = lab_params(64, bhat=10.0, uhat=16.0, max_degree=3)
    if n <= 8:
        patterns = sign_patterns(n)
    else:
        rng = np.random.default_rng(seed)
        patterns = [CutAssignment(side=tuple(int(x) for x in rng.choice([-1, 1], size=n))) for _ in range(20)]
    for signs in patterns:
        result = maximize_phi_orthant(g, p, signs)
        assert result.converged
        assert result.max_abs_bias <= p.uhat + 1e-6 * p.t
        assert result.value <= phi_upper_bound(p, g, signs) + 1e-9 * abs(result.value)
        # far too many integer vectors to enumerate at t=64
        assert result.lattice_argmax is None


def test_lattice_argmax_next_to_k4_maximum(k4, k4_lab, caplog):
    _, witness = max_cut_exact(k4)
    result = maximize_phi_orthant(k4, k4_lab, witness)
    a = np.array(witness.side)
    assert result.lattice_argmax == (3 * a).tolist()
    assert_allclose(np.abs(result.b), 2.455, atol=5e-3)
    assert 0.5 < result.lattice_distance < 0.6
    assert result.lattice_matches_rounding is False
    assert "Integer argmax" in caplog.text


def test_lattice_argmax_matches_rounding_on_single_cloud(single):
    p = lab_params(8, bhat=3.65, uhat=3.8)
    result = maximize_phi_orthant(single, p, CutAssignment.from_string("+"))
    assert_allclose(result.b, [3.65], atol=1e-8)
    assert result.lattice_argmax == [4]
    assert_allclose(result.lattice_distance, 0.35, atol=1e-8)
    assert result.lattice_matches_rounding


def test_lattice_check_respects_budget(k4, k4_lab):
    _, witness = max_cut_exact(k4)
    result = maximize_phi_orthant(k4, k4_lab, witness, lattice_budget=100)
    assert result.lattice_argmax is None
    assert result.lattice_distance is None
    assert result.lattice_matches_rounding is None


# ============================================
# Binomial sandwich and quartic expansion
# ============================================

def test_binomial_gap_known_values():
    lower, exact, upper = binomial_entropy_gap(2, 0)
    assert_allclose([lower, exact, upper], [math.log(4) - math.log(3), math.log(2), math.log(4)])
    lower, exact, upper = binomial_entropy_gap(10, 5)
    assert_allclose([lower, exact, upper], [-math.log(11), 0.0, 0.0], atol=1e-12)


def test_binomial_gap_exhaustive_up_to_4096():
    for t in range(2, 4097, 2):
        b = np.arange(-(t // 2), t // 2 + 1)
        lower, exact, upper = binomial_entropy_gap(t, b)
        assert np.all(lower <= exact + 1e-9 * t) and np.all(exact <= upper + 1e-9 * t)


def test_binomial_gap_sampled_up_to_2_20():
    rng = np.random.default_rng(9)
    for k in range(13, 21):
        t = 2**k
        b = np.concatenate([[0, t // 2, -(t // 2)], rng.integers(-(t // 2), t // 2 + 1, size=2000)])
        lower, exact, upper = binomial_entropy_gap(t, b)
        assert np.all(lower <= exact + 1e-9 * t) and np.all(exact <= upper + 1e-9 * t)


def test_qb_expansion_known_values():
    exact, leading, _ = qb_expansion_check(8, 2)
    assert_allclose(exact, 0.052115, atol=1e-6)
    assert_allclose(leading, 1 / 24)
    assert qb_expansion_check(8, 0) == (0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        qb_expansion_check(8, 3)


def test_qb_expansion_large_t():
    t = 2**20
    exact, leading, residual = qb_expansion_check(t, round(t**0.8))
    assert residual / leading < 0.05


def test_qb_sweep_residual_scaling():
    delta = 0.04
    frame = qb_sweep([2**k for k in range(24, 9, -2)], delta)
    assert list(frame.columns) == ["t", "bhat", "exact", "leading", "residual"]
    assert frame["t"].is_monotonic_increasing
    assert (frame["residual"] > 0).all()
    slope = np.polyfit(np.log(frame["t"]), np.log(frame["residual"]), 1)[0]
    # residual ~ bhat^6 / t^5
    assert abs(slope - (6 * (0.75 + delta) - 5)) < 0.15
