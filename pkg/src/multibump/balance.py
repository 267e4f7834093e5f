"""Balancing conditions fixing the rate Lambda and radial offset R0.

The two equations (with S(k,n) = sum_{l=1}^{k-1} sin^{2-n}(pi l / k),
R = mu r0 + R0, d_jl = 2R sin(pi|j-l|/k)):

  c0 mu^-m (gamma2 L^{2-m} R0 + gamma4 L^-m / R)
      + gamma1 L^{2-n} (2R)^{1-n} S = 0
  gamma1 L^{2-n} (2R)^{2-n} S - 2 c0 mu^-m gamma3 L^-m = 0

Solved by damped Newton with residuals scaled by the largest summand of
each equation, so convergence is measured relative to the natural term
size (the raw terms are ~ mu^-m and would otherwise drown in rounding).
"""

from dataclasses import dataclass

import numpy as np

from .bubbles import GammaConstants, gamma_oracle
from .model import DerivedScales, ProblemParams, derive_scales


@dataclass(frozen=True)
class BalanceSolution:
    Lambda: float
    R0: float
    residual_1: float     # relative residual of the radial equation
    residual_2: float     # relative residual of the rate equation
    iterations: int


def sin_power_sum(k: int, n: int) -> float:
    """S(k, n) = sum_{l=1}^{k-1} sin^{2-n}(pi l / k)."""
    l = np.arange(1, k)
    return float(np.sum(np.sin(np.pi * l / k) ** (2.0 - n)))


def _terms(L: float, R0: float, params: ProblemParams, gam: GammaConstants,
           mu: float, S: float) -> tuple[np.ndarray, np.ndarray]:
    """Summands of the two equations (each equation as an array of terms)."""
    n, m, c0 = params.n, params.m, params.c0
    R = mu * params.r0 + R0
    t1 = np.array([
        c0 * mu ** (-m) * gam.gamma2 * L ** (2.0 - m) * R0,
        c0 * mu ** (-m) * gam.gamma4 * L ** (-m) / R,
        gam.gamma1 * L ** (2.0 - n) * (2.0 * R) ** (1.0 - n) * S,
    ])
    t2 = np.array([
        gam.gamma1 * L ** (2.0 - n) * (2.0 * R) ** (2.0 - n) * S,
        -2.0 * c0 * mu ** (-m) * gam.gamma3 * L ** (-m),
    ])
    return t1, t2


def balance_residuals(L: float, R0: float, params: ProblemParams,
                      gam: GammaConstants, mu: float, S: float) -> tuple[float, float]:
    """Residuals of the two balancing equations, relative to term scale."""
    t1, t2 = _terms(L, R0, params, gam, mu, S)
    return (
        float(t1.sum() / np.max(np.abs(t1))),
        float(t2.sum() / np.max(np.abs(t2))),
    )


def lambda_closed_form(R0: float, params: ProblemParams, gam: GammaConstants,
                       mu: float, S: float) -> float:
    """Exact Lambda solving the rate equation at a given R0.

    L^{n-2-m} = gamma1 (2R)^{2-n} S / (2 c0 mu^-m gamma3).
    """
    n, m = params.n, params.m
    R = mu * params.r0 + R0
    rhs = gam.gamma1 * (2.0 * R) ** (2.0 - n) * S / (2.0 * params.c0 * mu ** (-m) * gam.gamma3)
    return float(rhs ** (1.0 / (n - 2.0 - m)))


def _newton(params: ProblemParams, gam: GammaConstants, mu: float, S: float,
            tol: float = 1e-13, max_iter: int = 100) -> BalanceSolution:
    L = lambda_closed_form(0.0, params, gam, mu, S)
    R0 = 0.0
    dR = max(1.0 / mu, 1e-9)

    def res_vec(x):
        return np.array(balance_residuals(x[0], x[1], params, gam, mu, S))

    x = np.array([L, R0])
    r = res_vec(x)
    it = 0
    for it in range(1, max_iter + 1):
        if np.max(np.abs(r)) < tol:
            break
        # numerical Jacobian of the scaled residuals
        J = np.empty((2, 2))
        steps = np.array([1e-7 * max(abs(x[0]), 1.0), 1e-7 * max(abs(x[1]), dR)])
        for i in range(2):
            xp = x.copy(); xp[i] += steps[i]
            xm = x.copy(); xm[i] -= steps[i]
            J[:, i] = (res_vec(xp) - res_vec(xm)) / (2.0 * steps[i])
        try:
            dx = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        lam_step = 1.0
        for _ in range(60):   # halve until the residual actually decreases
            xn = x + lam_step * dx
            if xn[0] > 0:
                rn = res_vec(xn)
                if np.max(np.abs(rn)) < np.max(np.abs(r)):
                    x, r = xn, rn
                    break
            lam_step *= 0.5
        else:
            break
    return BalanceSolution(Lambda=float(x[0]), R0=float(x[1]),
                           residual_1=float(r[0]), residual_2=float(r[1]),
                           iterations=it)


def solve_balance(params: ProblemParams,
                  gammas: GammaConstants | None = None) -> tuple[BalanceSolution, DerivedScales]:
    """Solve the balancing system; returns the solution and final scales."""
    gam = gammas if gammas is not None else gamma_oracle(params.n, params.m)
    base = derive_scales(params)
    S = sin_power_sum(params.k, params.n)
    sol = _newton(params, gam, base.mu, S)
    return sol, derive_scales(params, sol.R0)


@dataclass(frozen=True)
class FiniteSolution:
    r: float
    Lambda0: float
    offset: float         # r - mu r0, kept separately since r swamps it in floats
    residual_1: float
    residual_2: float
    iterations: int


def solve_finite(params: ProblemParams,
                 gammas: GammaConstants | None = None) -> tuple[FiniteSolution, DerivedScales]:
    """Finite-k variant solved in (r, Lambda0) with r = mu r0 + offset.

    With the remainder terms dropped the system is the balancing system in
    disguise (the rate equation is half of the one above), so the output
    must agree with solve_balance; both are computed independently and the
    window checks |r - R| < 1/(mu d), |Lambda0 - Lambda| <= 1/d are the
    caller's to assert.
    """
    gam = gammas if gammas is not None else gamma_oracle(params.n, params.m)
    base = derive_scales(params)
    S = sin_power_sum(params.k, params.n)
    sol = _newton(params, gam, base.mu, S)
    scales = derive_scales(params, sol.R0)
    return FiniteSolution(r=base.mu * params.r0 + sol.R0, Lambda0=sol.Lambda,
                          offset=sol.R0, residual_1=sol.residual_1,
                          residual_2=sol.residual_2, iterations=sol.iterations), scales


def substitution_identity(sol: BalanceSolution, params: ProblemParams,
                          gam: GammaConstants, mu: float) -> float:
    """Relative residual of gamma2 L^2 R R0 + gamma4 + gamma3 = 0.

    Obtained by eliminating the interaction sum between the two equations;
    holds exactly at the solution.
    """
    R = mu * params.r0 + sol.R0
    terms = np.array([gam.gamma2 * sol.Lambda**2 * R * sol.R0, gam.gamma4, gam.gamma3])
    return float(terms.sum() / np.max(np.abs(terms)))
