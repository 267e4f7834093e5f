"""Circulant machinery and the reduced interaction matrix T.

T is the 3k x 3k block matrix

    [ c1 A1 + c2 I   0      A2   ]
    [ 0              c4 I   0    ]
    [ (1/2) A2       0      c3 A3]

with circulant blocks built from half-angle sines s_l = sin(pi l / k):

    A1 row: s_l^{2-n}                       (l = 1..k-1, zero diagonal)
    A2 row: sin(2 pi l / k) s_l^{-n}        (antisymmetric)
    A3 row: (1 - (n-2)/(n-1) s_l^2) s_l^{-n}, diagonal = -row sum

All blocks diagonalize in the common DFT basis; eigenvalues are indexed by
the frequency nu with multiplier lambda_nu = sum_l row_l e^{2 pi i nu l/k}.
"""

from dataclasses import dataclass

import numpy as np

from . import specfun
from .balance import sin_power_sum
from .bubbles import GammaConstants
from .model import DerivedScales, ProblemParams


@dataclass(frozen=True)
class Circulant:
    """A k x k circulant given by its first row (entry [j, l] = row[(l-j) % k])."""

    row: np.ndarray

    @property
    def k(self) -> int:
        return self.row.size

    def dense(self) -> np.ndarray:
        idx = (np.arange(self.k)[None, :] - np.arange(self.k)[:, None]) % self.k
        return self.row[idx]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        vh = np.fft.fft(v)
        out = np.fft.ifft(eigen_dft(self) * vh)
        return out.real if np.isrealobj(self.row) and np.isrealobj(v) else out


def eigen_dft(c: Circulant, method: str = "fft") -> np.ndarray:
    """Eigenvalues lambda_nu = sum_l row_l e^{2 pi i nu l / k}, nu = 0..k-1.

    method='fft' is the O(k log k) path; method='direct' the O(k^2)
    definition, kept for cross-checks.
    """
    if method == "fft":
        return np.fft.ifft(c.row) * c.k
    if method == "direct":
        k = c.k
        nu = np.arange(k)
        phase = np.exp(2j * np.pi * np.outer(nu, np.arange(k)) / k)
        return phase @ c.row.astype(complex)
    raise ValueError(method)


def _half_angle_rows(k: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    l = np.arange(1, k)
    s = np.sin(np.pi * l / k)
    a1 = np.zeros(k)
    a1[1:] = s ** (2.0 - n)
    a2 = np.zeros(k)
    a2[1:] = np.sin(2.0 * np.pi * l / k) * s ** (-float(n))
    a3 = np.zeros(k)
    a3[1:] = (1.0 - (n - 2.0) / (n - 1.0) * s**2) * s ** (-float(n))
    a3[0] = -a3[1:].sum()
    return a1, a2, a3


@dataclass(frozen=True)
class ReducedMatrixT:
    A1: Circulant
    A2: Circulant
    A3: Circulant
    c1: float
    c2: float
    c3: float
    c4: float
    n: int
    k: int
    Lambda: float
    R: float

    def dense(self) -> np.ndarray:
        k = self.k
        Z = np.zeros((k, k))
        I = np.eye(k)
        top = np.hstack([self.c1 * self.A1.dense() + self.c2 * I, Z, self.A2.dense()])
        mid = np.hstack([Z, self.c4 * I, Z])
        bot = np.hstack([0.5 * self.A2.dense(), Z, self.c3 * self.A3.dense()])
        return np.vstack([top, mid, bot])

    def matvec(self, v: np.ndarray) -> np.ndarray:
        k = self.k
        v0, v1, v2 = v[:k], v[k:2 * k], v[2 * k:]
        out0 = self.c1 * self.A1.matvec(v0) + self.c2 * v0 + self.A2.matvec(v2)
        out1 = self.c4 * v1
        out2 = 0.5 * self.A2.matvec(v0) + self.c3 * self.A3.matvec(v2)
        return np.concatenate([out0, out1, out2])


def build_T(params: ProblemParams, scales: DerivedScales, Lambda: float,
            gammas: GammaConstants) -> ReducedMatrixT:
    """Reduced matrix at the balanced ring (R and mu from scales)."""
    n, k, m = params.n, params.k, params.m
    a1, a2, a3 = _half_angle_rows(k, n)
    S = sin_power_sum(k, n)
    R, mu = scales.R, scales.mu
    c1 = 2.0 * R
    c2 = (n - 2.0 - 2.0 * m) / (n - 2.0) * (2.0 * R) * S
    c3 = (n - 1.0) / ((n - 2.0) * R)
    c4 = (2.0 * params.c0 * mu ** (-m) * gammas.gamma2 * Lambda ** (n - m)
          / ((n - 2.0) * gammas.gamma1 * (2.0 * R) ** (1.0 - n)))
    return ReducedMatrixT(Circulant(a1), Circulant(a2), Circulant(a3),
                          c1, c2, c3, c4, n=n, k=k, Lambda=Lambda, R=R)


# ---------------------------------------------------------------------------
# eigenvalues, their asymptotics, and the 2x2 frequency determinant
# ---------------------------------------------------------------------------

def lambda_eigs(T: ReducedMatrixT, method: str = "fft") -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lambda_1, lambda_2, lambda_3) for nu = 0..k-1; lambda_2 is imaginary."""
    return (eigen_dft(T.A1, method), eigen_dft(T.A2, method), eigen_dft(T.A3, method))


def lambda_asym(T: ReducedMatrixT, nu: np.ndarray,
                tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Leading asymptotics at frequency nu (x = 2 pi nu / k):

    lambda_1 ~ 2 (k/pi)^{n-2} g''(x),   lambda_2 ~ 4i (k/pi)^{n-1} g'(x),
    lambda_3 ~ -2 (k/pi)^n g(x).
    """
    n, k = T.n, T.k
    x = 2.0 * np.pi * np.asarray(nu, dtype=float) / k
    l1 = 2.0 * (k / np.pi) ** (n - 2.0) * specfun.g2_values(x, n, tol)
    l2 = 4j * (k / np.pi) ** (n - 1.0) * specfun.g1_values(x, n, tol)
    l3 = -2.0 * (k / np.pi) ** float(n) * specfun.g_values(x, n, tol)
    return l1, l2, l3


def det_Dnu(T: ReducedMatrixT, nu=None) -> np.ndarray:
    """D_nu = (c1 l1 + c2) c3 l3 - (1/2) l2^2 (real; l2 is purely imaginary)."""
    l1, l2, l3 = lambda_eigs(T)
    D = ((T.c1 * l1.real + T.c2) * T.c3 * l3.real + 0.5 * l2.imag**2)
    if nu is None:
        return D
    return D[np.asarray(nu)]


def det_Dnu_asym(T: ReducedMatrixT, nu: np.ndarray, m: float,
                 tol: float = 1e-12) -> np.ndarray:
    """Asymptotic 8 (k/pi)^{2n-2} [g'^2 - (n-1)/(n-2) g g'' + c g''(0) g],
    with c = (2m+2-n)(n-1)/(n-2)^2."""
    n, k = T.n, T.k
    x = 2.0 * np.pi * np.asarray(nu, dtype=float) / k
    g = specfun.g_values(x, n, tol)
    g1 = specfun.g1_values(x, n, tol)
    g2 = specfun.g2_values(x, n, tol)
    z = specfun.g2_at_zero(n)
    c = (2.0 * m + 2.0 - n) * (n - 1.0) / (n - 2.0) ** 2
    return 8.0 * (k / np.pi) ** (2.0 * n - 2.0) * (g1**2 - (n - 1.0) / (n - 2.0) * g * g2 + c * z * g)


# ---------------------------------------------------------------------------
# constrained solves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstrainedSolution:
    v: np.ndarray
    gamma: float
    residual: float
    orthogonality: float


def solve_Tprime(T: ReducedMatrixT, b: np.ndarray) -> ConstrainedSolution:
    """Solve the (lam, g) subsystem T' v = b + gamma p', v . p' = 0.

    p' = (0, 1) per block; at frequency nu the system is the 2x2 matrix
    [[c1 l1 + c2, l2], [l2/2, c3 l3]].  The nu = 0 row fixes gamma and
    forces the g-mean of v to vanish.
    """
    k = T.k
    b0, b2 = np.asarray(b[:k], dtype=float), np.asarray(b[k:], dtype=float)
    l1, l2, l3 = lambda_eigs(T)
    t11 = T.c1 * l1 + T.c2
    t12 = l2
    t21 = 0.5 * l2
    t22 = T.c3 * l3
    bh0 = np.fft.fft(b0)
    bh2 = np.fft.fft(b2)
    gamma = -float(bh2[0].real) / k
    yh0 = np.zeros(k, dtype=complex)
    yh2 = np.zeros(k, dtype=complex)
    yh0[0] = bh0[0] / t11[0]
    # yh2[0] = 0 by the constraint
    D = t11[1:] * t22[1:] - t12[1:] * t21[1:]
    rhs0 = bh0[1:]
    rhs2 = bh2[1:] + gamma * 0.0  # gamma p' has no nu != 0 content
    yh0[1:] = (t22[1:] * rhs0 - t12[1:] * rhs2) / D
    yh2[1:] = (-t21[1:] * rhs0 + t11[1:] * rhs2) / D
    v0 = np.fft.ifft(yh0).real
    v2 = np.fft.ifft(yh2).real
    v = np.concatenate([v0, v2])
    # residual of T' v - b - gamma p'
    r0 = T.c1 * T.A1.matvec(v0) + T.c2 * v0 + T.A2.matvec(v2) - b0
    r2 = 0.5 * T.A2.matvec(v0) + T.c3 * T.A3.matvec(v2) - b2 - gamma
    scale = max(np.max(np.abs(b)), np.max(np.abs(v)), 1e-300)
    res = float(max(np.max(np.abs(r0)), np.max(np.abs(r2))) / scale)
    return ConstrainedSolution(v=v, gamma=gamma, residual=res,
                               orthogonality=float(abs(v2.sum())))


def solve_T(T: ReducedMatrixT, b: np.ndarray, phat: np.ndarray) -> ConstrainedSolution:
    """Solve T v = b + gamma phat with v . p = 0, p = (0, 0, 1) per block.

    p spans the cokernel of T exactly (A2 and A3 rows sum to zero), so
    gamma = -(b . p)/(phat . p); the middle block is diagonal and the
    (lam, g) part reduces to solve_Tprime.
    """
    k = T.k
    b = np.asarray(b, dtype=float)
    p_dot_b = float(b[2 * k:].sum())
    p_dot_phat = float(phat[2 * k:].sum())
    gamma = -p_dot_b / p_dot_phat
    bp = b + gamma * phat
    v1 = bp[k:2 * k] / T.c4
    sub = solve_Tprime(T, np.concatenate([bp[:k], bp[2 * k:]]))
    v = np.concatenate([sub.v[:k], v1, sub.v[k:]])
    resid = T.matvec(v) - bp
    scale = max(np.max(np.abs(bp)), np.max(np.abs(v)) , 1e-300)
    return ConstrainedSolution(v=v, gamma=gamma,
                               residual=float(np.max(np.abs(resid)) / scale),
                               orthogonality=float(abs(v[2 * k:].sum())))
