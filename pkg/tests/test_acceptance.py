"""End-to-end checks tying every module to its headline numerical claim."""

import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment
from scipy.special import gamma as gamma_fn

from multibump import errfield, nondegen, reduced, specfun
from multibump.balance import (sin_power_sum, solve_balance, solve_finite,
                               substitution_identity)
from multibump.bubbles import (eval_bubble, eval_Z0, eval_Z1, gamma_constants,
                               gamma_oracle, j_integral_quad, Bubble)
from multibump.circulant import (Circulant, build_T, det_Dnu, eigen_dft,
                                 lambda_asym, lambda_eigs, solve_Tprime)
from multibump.model import Configuration, ProblemParams, xi_norm

GAM = gamma_oracle(5, 2.5)


def _balanced(k, n=5, m=2.5):
    params = ProblemParams(n=n, m=m, k=k)
    gam = GAM if (n, m) == (5, 2.5) else gamma_oracle(n, m)
    bal, scales = solve_balance(params, gam)
    return params, gam, bal, scales


def test_spectral_condition_all_dimensions():
    # positive margin on a 2000-point grid plus both endpoint limits,
    # for every dimension from 5 through 48, within the time budget
    t0 = time.time()
    reports = specfun.verify_condition(5, 48, grid_size=2000)
    assert len(reports) == 44
    for rep in reports:
        assert rep.holds
        assert rep.min_margin > 0.0
        assert min(rep.endpoint_margins) > 0.0
    assert time.time() - t0 <= 30.0


def test_gamma_constants_quadrature_vs_closed_form():
    base = j_integral_quad(0.0, 3.5, 5)
    assert base == pytest.approx(np.pi**2.5 / gamma_fn(3.5), rel=1e-10)
    for n, m in ((5, 2.25), (6, 3.0), (7, 3.75)):
        quad = gamma_constants(n, m)
        oracle = gamma_oracle(n, m)
        for name in ("gamma1", "gamma2", "gamma3", "gamma4"):
            assert getattr(quad, name) == pytest.approx(
                getattr(oracle, name), rel=1e-8)


def test_circulant_diagonalization():
    rng = np.random.default_rng(0)
    for k in (3, 5, 8, 17, 32, 64):
        c = Circulant(rng.standard_normal(k))
        lam = eigen_dft(c)
        dense = np.linalg.eigvals(c.dense())
        cost = np.abs(lam[:, None] - dense[None, :])
        rows, cols = linear_sum_assignment(cost)
        assert cost[rows, cols].max() <= 1e-9 * np.max(np.abs(lam))
    # the translation blocks of the reduced matrix lose their zero mode
    for k in (16, 32, 64):
        params, gam, bal, scales = _balanced(k)
        T = build_T(params, scales, bal.Lambda, gam)
        l1, l2, l3 = lambda_eigs(T)
        assert abs(l2[0]) <= 1e-12 * np.max(np.abs(l2))
        assert abs(l3[0]) <= 1e-12 * np.max(np.abs(l3))


def test_eigenvalue_asymptotics_convergence_rate():
    # halving the lattice spacing shrinks the relative error of every
    # asymptotic eigenvalue formula by a factor consistent with k^-2 log k
    errs = {}
    for k in (32, 64, 128):
        params, gam, bal, scales = _balanced(k)
        T = build_T(params, scales, bal.Lambda, gam)
        nu = np.array([k // 4])
        l1, l2, l3 = lambda_eigs(T)
        a1, a2, a3 = lambda_asym(T, nu)
        fin, _ = solve_finite(params, GAM)
        bl = nondegen.build_blocks(params, scales, fin.r, fin.Lambda0,
                                   offset=fin.offset, gammas=GAM)
        exact = nondegen.eigen_series_exact(bl, k // 4)
        pred = nondegen.eigen_asym_series(bl, k // 4)
        e = {"l1": abs(a1[0].real / l1[k // 4].real - 1.0),
             "l2": abs(a2[0].imag / l2[k // 4].imag - 1.0),
             "l3": abs(a3[0].real / l3[k // 4].real - 1.0)}
        e.update({key: abs(pred[key] / exact[key] - 1.0) for key in exact})
        errs[k] = e
    for key in errs[32]:
        assert 2.5 <= errs[32][key] / errs[64][key] <= 6.0, key
        assert 2.5 <= errs[64][key] / errs[128][key] <= 6.0, key


def test_balancing_equations():
    mu_R0 = []
    for k in (8, 16, 32, 64):
        params, gam, bal, scales = _balanced(k)
        assert bal.residual_1 <= 1e-12
        assert bal.residual_2 <= 1e-12
        assert substitution_identity(bal, params, gam, scales.mu) <= 1e-10
        mu_R0.append(scales.mu * abs(bal.R0))
        fin, _ = solve_finite(params, gam)
        assert abs(fin.offset - bal.R0) * scales.mu * scales.d <= 1.0
    assert max(mu_R0) <= 2.0 * min(mu_R0)


def test_constrained_solver_sweep():
    # 100 random right-hand sides per ring size; residual measured as a
    # normwise backward error (the absolute residual of any computed
    # double-precision solution floors at eps * ||T|| * ||v||)
    rng = np.random.default_rng(0)
    pooled = []
    for k in (16, 32, 64):
        params, gam, bal, scales = _balanced(k)
        T = build_T(params, scales, bal.Lambda, gam)
        I = np.eye(k)
        Tp = np.block([[T.c1 * T.A1.dense() + T.c2 * I, T.A2.dense()],
                       [0.5 * T.A2.dense(), T.c3 * T.A3.dense()]])
        Tnorm = np.linalg.norm(Tp, np.inf)
        for _ in range(100):
            b = rng.standard_normal(2 * k)
            sol = solve_Tprime(T, b)
            v0, v2 = sol.v[:k], sol.v[k:]
            r0 = (T.c1 * T.A1.matvec(v0) + T.c2 * v0 + T.A2.matvec(v2)
                  - b[:k])
            r2 = (0.5 * T.A2.matvec(v0) + T.c3 * T.A3.matvec(v2)
                  - b[k:] - sol.gamma)
            res = max(np.max(np.abs(r0)), np.max(np.abs(r2)))
            vnorm = np.max(np.abs(sol.v))
            assert res <= 1e-10 * (np.linalg.norm(b) + Tnorm * vnorm)
            assert sol.orthogonality <= 1e-12 * max(vnorm, 1.0)
        scaled = det_Dnu(T)[1:]
        nu = np.arange(1, k)
        nu_eff = np.minimum(nu, k - nu)
        scaled = scaled / (nu_eff**2 * float(k) ** (2 * params.n - 4))
        assert scaled.max() / scaled.min() <= 10.0
        pooled.extend([scaled.min(), scaled.max()])
    assert max(pooled) / min(pooled) <= 10.0


def test_reduced_fixed_point():
    for k in (16, 32):
        params, gam, bal, scales = _balanced(k)
        T = build_T(params, scales, bal.Lambda, gam)
        # cancellation of the projections at the balanced ring
        pv = reduced.projection_E(Configuration.zero(k, 0.0), params, scales,
                                  bal, gam)
        m = params.m
        s0 = params.c0 * scales.mu ** (-m) * gam.gamma3 * bal.Lambda ** (-1 - m)
        s1 = (params.c0 * scales.mu ** (-m) * gam.gamma4 * bal.Lambda ** (-m)
              / scales.R)
        assert np.max(np.abs(pv.proj0)) <= 1e-10 * s0
        assert np.max(np.abs(pv.proj1)) <= 1e-10 * s1
        assert np.max(np.abs(pv.proj2)) <= 1e-10 * s1
        # contraction from a generic start inside the trust ball
        rng = np.random.default_rng(k)
        amp = 0.1 / scales.mu
        q0 = Configuration(amp * rng.standard_normal(k),
                           amp * rng.standard_normal(k),
                           amp * rng.standard_normal(k), 0.0)
        ball = scales.d ** (-scales.tau2)
        assert xi_norm(q0, scales, params.n) <= ball
        qstar, trace = reduced.fixed_point(params, scales, bal, gam, T,
                                           q0=q0, max_iter=8)
        # contraction factors are tiny until the steps bottom out at the
        # roundoff floor of the weighted norm
        floor = min(t["step"] for t in trace)
        assert all(t["ratio"] <= 0.5 for t in trace[1:]
                   if t["step"] > 100.0 * floor)
        assert trace[1]["ratio"] <= 0.5
        assert xi_norm(qstar, scales, params.n) <= 1e-2 * ball


def test_nondegeneracy_spectra():
    pooled = []
    for k in (16, 32, 64):
        params = ProblemParams(n=5, m=2.5, k=k)
        fin, scales = solve_finite(params, GAM)
        bl = nondegen.build_blocks(params, scales, fin.r, fin.Lambda0,
                                   offset=fin.offset, gammas=GAM)
        dets = np.array([nondegen.det3_hat(bl, nu) for nu in range(k)])
        assert abs(dets[0]) <= 1e-10 * np.max(np.abs(dets))
        ds = nondegen.det_hat_scaled(bl)
        assert np.all(ds > 0.0)
        assert ds.max() / ds.min() <= 10.0
        pooled.extend([ds.min(), ds.max()])
        # zero-kernel structure
        for blk in (bl.C, bl.E, bl.G):
            lam = eigen_dft(blk)
            assert abs(lam[0]) <= 1e-12 * np.max(np.abs(lam))
        h = nondegen.h_eigenvalues(bl)
        assert abs(h[1]) <= 1e-12 * np.max(np.abs(h))
        assert abs(h[-1]) <= 1e-12 * np.max(np.abs(h))
        if k <= 32:
            freq, dense = nondegen.logdet_comparison(bl)
            assert freq == pytest.approx(dense, rel=1e-8)


def test_error_norm_estimate():
    vals = {}
    for k in (8, 16, 32):
        params, gam, bal, scales = _balanced(k)
        vals[k] = errfield.error_norm_estimate(params, scales, bal.Lambda,
                                               N=100000, seed=0).value
    assert max(vals.values()) <= 2.0 * min(vals.values())
    params, gam, bal, scales = _balanced(16)
    single = vals[16]
    double = errfield.error_norm_estimate(params, scales, bal.Lambda,
                                          N=200000, seed=0).value
    assert abs(double - single) <= 0.10 * max(single, double)


def _fd_ratio(fn, dfn_value, h):
    err = lambda hh: abs((fn(hh) - fn(-hh)) / (2.0 * hh) - dfn_value)
    return err(h) / err(h / 10.0)


def test_derivatives_match_finite_differences():
    # central differences at step sizes h and h/10: the error ratio near
    # 100 pins the O(h^2) truncation order of every analytic derivative
    n, x = 5, 1.3
    g = lambda t: specfun.eval_g(x + t, n).value
    g1 = lambda t: specfun.eval_g1(x + t, n).value
    assert 70.0 <= _fd_ratio(g, specfun.eval_g1(x, n).value, 1e-2) <= 130.0
    assert 70.0 <= _fd_ratio(g1, specfun.eval_g2(x, n).value, 1e-2) <= 130.0
    # bubble kernels: rate and translation derivatives of the profile
    Q = np.array([1.0, 0.0, 0.0, 0.0, 0.0])
    pt = Q + 0.4
    rate = lambda dl: eval_bubble(pt, Bubble(Q, 1.3 + dl), n)
    z0 = eval_Z0(pt, Bubble(Q, 1.3), n)
    assert 70.0 <= _fd_ratio(rate, z0, 1e-2) <= 130.0
    nor = np.array([0.6, 0.8, 0.0, 0.0, 0.0])
    shift = lambda t: eval_bubble(pt + t * nor, Bubble(Q, 1.3), n)
    z1 = eval_Z1(pt, Bubble(Q, 1.3), n, nor)
    assert 70.0 <= _fd_ratio(shift, z1, 1e-2) <= 130.0
