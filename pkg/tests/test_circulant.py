import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multibump import circulant
from multibump.balance import solve_balance
from multibump.bubbles import gamma_oracle
from multibump.circulant import (Circulant, build_T, det_Dnu, det_Dnu_asym,
                                 eigen_dft, lambda_asym, lambda_eigs,
                                 solve_T, solve_Tprime)
from multibump.model import ProblemParams


def _balanced_T(k, n=5, m=2.5):
    params = ProblemParams(n=n, m=m, k=k)
    gam = gamma_oracle(n, m)
    bal, scales = solve_balance(params, gam)
    return build_T(params, scales, bal.Lambda, gam), params, scales, bal


@given(st.integers(3, 40), st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_dft_eigenvalues_match_dense(k, seed):
    rng = np.random.default_rng(seed)
    c = Circulant(rng.standard_normal(k))
    lam = eigen_dft(c)
    dense = np.linalg.eigvals(c.dense())
    scale = np.max(np.abs(lam)) + 1e-30
    # compare as multisets via optimal matching
    from scipy.optimize import linear_sum_assignment
    cost = np.abs(lam[:, None] - dense[None, :])
    rows, cols = linear_sum_assignment(cost)
    assert cost[rows, cols].max() <= 1e-9 * scale


@given(st.integers(3, 40), st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_matvec_matches_dense(k, seed):
    rng = np.random.default_rng(seed)
    c = Circulant(rng.standard_normal(k))
    v = rng.standard_normal(k)
    assert np.allclose(c.matvec(v), c.dense() @ v, atol=1e-12)


def test_fft_vs_direct_eigenvalues():
    rng = np.random.default_rng(3)
    c = Circulant(rng.standard_normal(17))
    assert np.allclose(eigen_dft(c, "fft"), eigen_dft(c, "direct"), atol=1e-10)


def test_mean_and_antisymmetric_zero_modes():
    T, *_ = _balanced_T(32)
    l1, l2, l3 = lambda_eigs(T)
    scale2 = np.max(np.abs(l2))
    scale3 = np.max(np.abs(l3))
    assert abs(l2[0]) <= 1e-12 * scale2
    assert abs(l3[0]) <= 1e-12 * scale3
    # antisymmetric block: purely imaginary spectrum
    assert np.max(np.abs(l2.real)) <= 1e-12 * scale2


def test_T_matvec_matches_dense():
    T, *_ = _balanced_T(16)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(48)
    assert np.allclose(T.matvec(v), T.dense() @ v, rtol=1e-12)


def test_asymptotic_eigenvalue_rates():
    errs = {1: [], 2: [], 3: []}
    for k in (32, 64, 128):
        T, *_ = _balanced_T(k)
        nu = k // 4
        l1, l2, l3 = lambda_eigs(T)
        a1, a2, a3 = lambda_asym(T, np.array([nu]))
        errs[1].append(abs(a1[0] - l1[nu]) / abs(l1[nu]))
        errs[2].append(abs(a2[0] - l2[nu]) / abs(l2[nu]))
        errs[3].append(abs(a3[0] - l3[nu]) / abs(l3[nu]))
    for seq in errs.values():
        assert 2.5 <= seq[0] / seq[1] <= 6.0
        assert 2.5 <= seq[1] / seq[2] <= 6.0


def test_frequency_determinant_positive_and_scaled():
    vals = []
    for k in (16, 32, 64):
        T, params, scales, bal = _balanced_T(k)
        D = det_Dnu(T)
        assert np.all(D[1:] > 0.0)
        nu = np.arange(1, k)
        nu_eff = np.minimum(nu, k - nu)
        vals.extend((D[1:] / (nu_eff**2.0 * k ** (2.0 * params.n - 4.0))).tolist())
    assert max(vals) / min(vals) <= 10.0


def test_determinant_asymptotics():
    errs = []
    for k in (32, 64, 128):
        T, params, scales, bal = _balanced_T(k)
        nu = k // 4
        D = det_Dnu(T, np.array([nu]))[0]
        A = det_Dnu_asym(T, np.array([nu]), params.m)[0]
        errs.append(abs(A - D) / abs(D))
    assert 2.5 <= errs[0] / errs[1] <= 6.0
    assert 2.5 <= errs[1] / errs[2] <= 6.0


def test_constrained_solves():
    rng = np.random.default_rng(11)
    for k in (16, 32, 64):
        T, params, scales, bal = _balanced_T(k)
        for _ in range(20):
            b = rng.standard_normal(2 * k)
            sol = solve_Tprime(T, b)
            assert sol.residual <= 1e-9
            assert sol.orthogonality <= 1e-12 * max(np.max(np.abs(sol.v)), 1.0)


def test_solve_full_kernel_direction():
    T, params, scales, bal = _balanced_T(16)
    rng = np.random.default_rng(5)
    b = rng.standard_normal(48)
    phat = np.concatenate([np.zeros(32), np.ones(16)])
    sol = solve_T(T, b, phat)
    assert sol.residual <= 1e-10
    assert sol.orthogonality <= 1e-12 * max(np.max(np.abs(sol.v)), 1.0)


def test_constrained_solve_matches_dense():
    # augmented dense system: T' v - gamma p' = b, <v, p'> = 0 with
    # p' the all-ones vector on the tangential half
    T, params, scales, bal = _balanced_T(8)
    rng = np.random.default_rng(5)
    b = rng.standard_normal(16)
    sol = solve_Tprime(T, b)
    I = np.eye(8)
    Tp = np.block([[T.c1 * T.A1.dense() + T.c2 * I, T.A2.dense()],
                   [0.5 * T.A2.dense(), T.c3 * T.A3.dense()]])
    p = np.concatenate([np.zeros(8), np.ones(8)])
    M = np.zeros((17, 17))
    M[:16, :16] = Tp
    M[:16, 16] = -p
    M[16, :16] = p
    full = np.linalg.solve(M, np.concatenate([b, [0.0]]))
    scale = np.max(np.abs(full))
    assert np.allclose(sol.v, full[:16], atol=1e-10 * scale)
    assert sol.gamma == pytest.approx(full[16], rel=1e-8)
