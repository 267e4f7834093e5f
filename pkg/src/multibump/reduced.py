"""Projections of the error onto the bubble kernels and the fixed point.

projection_E evaluates the displayed leading terms of int E Z_{j,l} exactly
(pairwise interaction sums plus the curvature-window terms), with the
perturbed geometry Q_j = (R + f_j) n_j + g_j t_j and rates L_j = L + lam_j.

The reduced matrix T of the circulant module is the linearization of these
projections at q = 0 after a fixed block rescaling.  With

    F = (n-2)/2 * gamma1 * L^{2-n} (2R)^{1-n}

one has, writing qs = (lam/L, f, g),

    [ 2L/F * P0, 1/F * P1, 1/F * P2 ](q)  =  T qs + O(|qs|^2).

projection_linearized inverts that map on T qs, phi_remainder is the
difference in matrix units, and fixed_point iterates qs <- -T^{-1} Phi(qs)
through the constrained solve.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .balance import BalanceSolution
from .bubbles import GammaConstants, c_n, kernel_norm_sq, sphere_area
from .circulant import ReducedMatrixT, solve_T
from .model import (Configuration, DerivedScales, ProblemParams,
                    bubble_centers, q_perp, ring_frames, xi_norm)


@dataclass
class ProjectionVector:
    """Components of int E Z_{j,l} for l = 0 (rate), 1 (normal), 2 (tangent)."""

    proj0: np.ndarray
    proj1: np.ndarray
    proj2: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.proj0, self.proj1, self.proj2])


def scaling_factor(params: ProblemParams, scales: DerivedScales, Lambda: float,
                   gammas: GammaConstants) -> float:
    """F = (n-2)/2 gamma1 L^{2-n} (2R)^{1-n}, the projection/matrix scale."""
    n = params.n
    return ((n - 2.0) / 2.0 * gammas.gamma1 * Lambda ** (2.0 - n)
            * (2.0 * scales.R) ** (1.0 - n))


def projection_E(q: Configuration, params: ProblemParams, scales: DerivedScales,
                 bal: BalanceSolution, gammas: GammaConstants) -> ProjectionVector:
    """Leading terms of the kernel projections at configuration q."""
    n, m, c0 = params.n, params.m, params.c0
    a = (n - 2.0) / 2.0
    mu = scales.mu
    L = bal.Lambda + q.lam
    Q = bubble_centers(q, scales, n)
    nor, tan = ring_frames(q.k, n, q.alpha)

    diff = Q[:, None, :] - Q[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    np.fill_diagonal(dist, 1.0)
    La = L ** (-a)
    mask = ~np.eye(q.k, dtype=bool)

    # rate projection
    pair0 = La[None, :] * dist ** (2.0 - n)
    inter0 = -0.5 * gammas.gamma1 * L ** (-n / 2.0) * np.sum(np.where(mask, pair0, 0.0), axis=1)
    proj0 = inter0 + c0 * mu ** (-m) * gammas.gamma3 * L ** (-1.0 - m)

    # translation projections
    dn = np.einsum("jld,jd->jl", diff, nor)
    dt = np.einsum("jld,jd->jl", diff, tan)
    base = gammas.gamma1 * La[:, None] * La[None, :] * dist ** (-float(n))
    inter1 = np.sum(np.where(mask, base * dn, 0.0), axis=1)
    inter2 = np.sum(np.where(mask, base * dt, 0.0), axis=1)
    absQ = np.linalg.norm(Q, axis=1)
    Qn = np.einsum("jd,jd->j", Q, nor)
    Qt = np.einsum("jd,jd->j", Q, tan)
    # |Q_j| - mu r0 = R0 + f_j + g_j^2/(|Q_j| + R + f_j), stable against the
    # cancellation of two huge near-equal radii
    window = bal.R0 + q.f + q.g**2 / (absQ + scales.R + q.f)
    kw1 = c0 * mu ** (-m) * (gammas.gamma2 * L ** (2.0 - m) * window * Qn / absQ
                             + gammas.gamma4 * L ** (-m) * Qn / absQ**2)
    kw2 = c0 * mu ** (-m) * (gammas.gamma2 * L ** (2.0 - m) * window * Qt / absQ
                             + gammas.gamma4 * L ** (-m) * Qt / absQ**2)
    return ProjectionVector(proj0, inter1 + kw1, inter2 + kw2)


def to_matrix_units(pv: ProjectionVector, params: ProblemParams, scales: DerivedScales,
                    bal: BalanceSolution, gammas: GammaConstants) -> np.ndarray:
    """Map a projection vector to the units in which T acts."""
    F = scaling_factor(params, scales, bal.Lambda, gammas)
    return np.concatenate([
        2.0 * bal.Lambda / F * pv.proj0,
        pv.proj1 / F,
        pv.proj2 / F,
    ])


def scaled_coordinates(q: Configuration, bal: BalanceSolution) -> np.ndarray:
    """qs = (lam / L, f, g), the coordinates in which T is the Jacobian."""
    return np.concatenate([q.lam / bal.Lambda, q.f, q.g])


def configuration_from_scaled(qs: np.ndarray, bal: BalanceSolution,
                              alpha: float = 0.0) -> Configuration:
    k = qs.size // 3
    return Configuration(bal.Lambda * qs[:k], qs[k:2 * k], qs[2 * k:], alpha)


def projection_linearized(q: Configuration, T: ReducedMatrixT, params: ProblemParams,
                          scales: DerivedScales, bal: BalanceSolution,
                          gammas: GammaConstants) -> ProjectionVector:
    """Linear principal part of projection_E, back in projection units."""
    F = scaling_factor(params, scales, bal.Lambda, gammas)
    w = T.matvec(scaled_coordinates(q, bal))
    k = q.k
    return ProjectionVector(
        F / (2.0 * bal.Lambda) * w[:k],
        F * w[k:2 * k],
        F * w[2 * k:],
    )


def phi_remainder(q: Configuration, T: ReducedMatrixT, params: ProblemParams,
                  scales: DerivedScales, bal: BalanceSolution,
                  gammas: GammaConstants) -> np.ndarray:
    """Phi(q) = scaled projection_E minus the T-linearization (3k vector)."""
    pv = projection_E(q, params, scales, bal, gammas)
    return to_matrix_units(pv, params, scales, bal, gammas) - T.matvec(
        scaled_coordinates(q, bal))


def build_phat(q: Configuration, params: ProblemParams, scales: DerivedScales,
               bal: BalanceSolution) -> np.ndarray:
    """Rotation direction phat = M0 (R p + q^perp), p = (0, 0, 1) per block.

    M0 is the kernel Gram matrix; only its diagonal blocks act on the
    (0, -g, R + f) input since the rate block of the input vanishes.  The
    translation-kernel diagonal int U^{p-1} Z^2 is evaluated per bubble.
    """
    n = params.n
    L = bal.Lambda + q.lam
    cz = np.array([kernel_norm_sq(1, n, Lj) for Lj in L])
    vec = scales.R * np.concatenate([np.zeros(q.k), np.zeros(q.k), np.ones(q.k)]) + q_perp(q)
    k = q.k
    return np.concatenate([np.zeros(k), cz * vec[k:2 * k], cz * vec[2 * k:]])


def fixed_point(params: ProblemParams, scales: DerivedScales, bal: BalanceSolution,
                gammas: GammaConstants, T: ReducedMatrixT,
                q0: Configuration | None = None, alpha: float = 0.0,
                max_iter: int = 40, tol: float = 1e-12) -> tuple[Configuration, list[dict]]:
    """Iterate qs <- -T^{-1} Phi(qs); returns (q*, per-iterate trace).

    The trace records the Xi-norm of the iterate, the Xi-norm of the last
    step, the step contraction ratio and the multiplier gamma.
    """
    n = params.n
    q = q0 if q0 is not None else Configuration.zero(params.k, alpha)
    trace: list[dict] = []
    prev_step = None
    for t in range(max_iter):
        phi = phi_remainder(q, T, params, scales, bal, gammas)
        phat = build_phat(q, params, scales, bal)
        sol = solve_T(T, -phi, phat)
        q_new = configuration_from_scaled(sol.v, bal, alpha)
        dq = Configuration(q_new.lam - q.lam, q_new.f - q.f, q_new.g - q.g, alpha)
        step = xi_norm(dq, scales, n)
        ratio = step / prev_step if (prev_step is not None and prev_step > 0) else np.nan
        trace.append({
            "iter": t, "xi_norm": xi_norm(q_new, scales, n), "step": step,
            "ratio": float(ratio), "gamma": sol.gamma, "residual": sol.residual,
        })
        q = q_new
        if step <= tol * max(1.0, xi_norm(q, scales, n)):
            break
        prev_step = step
    return q, trace


def quad_projection_K(params: ProblemParams, scales: DerivedScales,
                      bal: BalanceSolution, l: int, tol: float = 1e-9) -> float:
    """Quadrature of int_{B_{d/2}(Q_1)} ||x| - mu r0|^m U_1^p Z_{1,l} dx.

    Reduced to polar coordinates (r, phi) of the invariant plane spanned by
    the ring normal at Q_1 and the orthogonal directions.  l = 2 vanishes by
    symmetry (the integrand is odd across the plane containing the axis).
    """
    if l == 2:
        return 0.0
    if l not in (0, 1):
        raise ValueError("kernel index must be 0, 1 or 2")
    n, m = params.n, params.m
    a = (n - 2.0) / 2.0
    p = (n + 2.0) / (n - 2.0)
    L, R = bal.Lambda, scales.R
    cn = c_n(n)
    mu_r0 = scales.mu * params.r0
    area = sphere_area(n - 2)

    nodes, weights = np.polynomial.legendre.leggauss(120)
    phis = 0.5 * np.pi * (nodes + 1.0)
    wphi = 0.5 * np.pi * weights
    sin_pow = np.sin(phis) ** (n - 2.0)

    def shell(r: float) -> float:
        u = r * np.cos(phis)
        v2 = (r * np.sin(phis)) ** 2
        absx = np.sqrt((R + u) ** 2 + v2)
        # |x| - mu r0 = R0 + u + v^2/(|x| + R + u), avoiding cancellation
        h = np.abs(bal.R0 + u + v2 / (absx + R + u)) ** m
        r2 = r * r
        Up = (cn * L**a) ** p * (1.0 + L**2 * r2) ** (-a * p)
        if l == 0:
            Z = a * cn * L ** (a - 1.0) * (1.0 - L**2 * r2) * (1.0 + L**2 * r2) ** (-a - 1.0)
            ang = np.dot(wphi, h * sin_pow)
        else:
            Z = -2.0 * a * cn * L ** (a + 2.0) * (1.0 + L**2 * r2) ** (-a - 1.0)
            ang = np.dot(wphi, h * u * sin_pow)
        return Up * Z * ang * r ** (n - 1.0)

    half = scales.d / 2.0
    pts = [x for x in (abs(bal.R0), 0.1 / L, 1.0 / L, 10.0 / L, 1e3 / L) if 0 < x < half]
    val, _ = integrate.quad(shell, 0.0, half, points=pts, limit=400,
                            epsabs=0.0, epsrel=tol)
    return float(area * val)
