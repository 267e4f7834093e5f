"""Problem parameters, derived scales and ring configurations.

A configuration is a ring of k bubble centers near the sphere of radius
mu*r0, each perturbed radially (f), tangentially (g) and in concentration
rate (lam).  Everything downstream (balancing, reduced matrix, error field)
consumes the objects defined here.
"""

from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """Raised when problem parameters are out of the admissible range."""


@dataclass(frozen=True)
class ProblemParams:
    """Dimension n, flatness order m and shape of the curvature model.

    The curvature profile is K(r) = 1 - c0 * min(|r - r0|, delta)^m, radial,
    with a plateau outside the window |r - r0| <= delta.  theta_K controls
    the admissible Hoelder range and only enters through the tau exponents.
    """

    n: int
    m: float
    theta_K: float = 3.0
    c0: float = 1.0
    r0: float = 1.0
    delta: float = 0.25
    k: int = 8
    Lambda_init: float = 1.0

    def __post_init__(self):
        if self.n < 5:
            raise ParameterError(f"need dimension n >= 5, got {self.n}")
        m_lo = min((self.n - 2) / 2.0, 2.0)
        if not (m_lo < self.m < self.n - 2):
            raise ParameterError(
                f"flatness order m must lie in ({m_lo}, {self.n - 2}), got {self.m}"
            )
        if self.theta_K <= 2.0:
            raise ParameterError("theta_K must exceed 2")
        if self.c0 <= 0 or self.r0 <= 0 or not (0 < self.delta < self.r0):
            raise ParameterError("need c0 > 0, r0 > 0 and 0 < delta < r0")
        if self.k < 3:
            raise ParameterError("need at least k = 3 bubbles on the ring")

    @property
    def p(self) -> float:
        """Critical Sobolev exponent (n+2)/(n-2)."""
        return (self.n + 2.0) / (self.n - 2.0)


@dataclass(frozen=True)
class DerivedScales:
    """Scales fixed by (n, m, k): blow-up mu, ring radius R, gap d, taus."""

    mu: float
    R: float
    d: float
    angle: float          # 2*pi/k between consecutive centers
    tau: float
    tau1: float
    tau2: float


def tau_exponents(params: ProblemParams) -> tuple[float, float, float]:
    """tau = 0.9 * min{theta_K - 2, (m-2)/2, (2m+2-n)/m}, tau1 = tau/4, tau2 = tau1/4."""
    n, m = params.n, params.m
    tau = 0.9 * min(params.theta_K - 2.0, (m - 2.0) / 2.0, (2.0 * m + 2.0 - n) / m)
    return tau, tau / 4.0, tau / 16.0


def derive_scales(params: ProblemParams, R0: float = 0.0) -> DerivedScales:
    """Scales of the k-ring: mu = k^((n-2)/(n-2-m)), R = mu*r0 + R0, d = 2R sin(pi/k)."""
    n, m, k = params.n, params.m, params.k
    mu = float(k) ** ((n - 2.0) / (n - 2.0 - m))
    R = mu * params.r0 + R0
    d = 2.0 * R * np.sin(np.pi / k)
    tau, tau1, tau2 = tau_exponents(params)
    return DerivedScales(mu=mu, R=R, d=d, angle=2.0 * np.pi / k, tau=tau, tau1=tau1, tau2=tau2)


@dataclass
class Configuration:
    """Perturbation q = (lam, f, g) of the symmetric ring, plus rotation alpha."""

    lam: np.ndarray
    f: np.ndarray
    g: np.ndarray
    alpha: float = 0.0

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        k = self.lam.size
        if self.f.size != k or self.g.size != k:
            raise ParameterError("lam, f, g must have equal length k")

    @property
    def k(self) -> int:
        return self.lam.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.lam, self.f, self.g])

    @classmethod
    def zero(cls, k: int, alpha: float = 0.0) -> "Configuration":
        return cls(np.zeros(k), np.zeros(k), np.zeros(k), alpha)

    @classmethod
    def from_vector(cls, vec: np.ndarray, alpha: float = 0.0) -> "Configuration":
        vec = np.asarray(vec, dtype=float)
        k = vec.size // 3
        return cls(vec[:k], vec[k:2 * k], vec[2 * k:], alpha)


def ring_angles(k: int, alpha: float = 0.0) -> np.ndarray:
    """theta_j = 2*pi*(j-1)/k + alpha for j = 1..k."""
    return 2.0 * np.pi * np.arange(k) / k + alpha


def ring_frames(k: int, n: int, alpha: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Outward normals n_j and tangents t_j of the ring, embedded in R^n."""
    th = ring_angles(k, alpha)
    nor = np.zeros((k, n))
    tan = np.zeros((k, n))
    nor[:, 0] = np.cos(th)
    nor[:, 1] = np.sin(th)
    tan[:, 0] = -np.sin(th)
    tan[:, 1] = np.cos(th)
    return nor, tan


def unperturbed_centers(k: int, n: int, R: float, alpha: float = 0.0) -> np.ndarray:
    """Centers Q_{j,alpha} = R*(cos theta_j, sin theta_j, 0, ...)."""
    nor, _ = ring_frames(k, n, alpha)
    return R * nor


def bubble_centers(q: Configuration, scales: DerivedScales, n: int) -> np.ndarray:
    """Perturbed centers Q_j = (R + f_j) n_j + g_j t_j in R^n."""
    nor, tan = ring_frames(q.k, n, q.alpha)
    return (scales.R + q.f)[:, None] * nor + q.g[:, None] * tan


def q_perp(q: Configuration) -> np.ndarray:
    """Rotation companion vector q^perp = (0, -g, f), length 3k."""
    return np.concatenate([np.zeros(q.k), -q.g, q.f])


def xi_norm(q: Configuration, scales: DerivedScales, n: int) -> float:
    """Weighted sup norm of the perturbation q.

    For n >= 6 a difference quotient of g across the ring is included; for
    n = 5 only plain sup norms enter.  The quotient divides by the half-angle
    sine sin(pi*(j-l)/k), which is bounded away from zero for j != l.
    """
    mu, d, tau1 = scales.mu, scales.d, scales.tau1
    k = q.k
    sup_lam = float(np.max(np.abs(q.lam)))
    sup_f = float(np.max(np.abs(q.f)))
    sup_g = float(np.max(np.abs(q.g)))
    if n == 5:
        return mu * (sup_lam + sup_f) + d**tau1 * sup_g
    # difference quotient sup_{j != l} |g_j - g_l| / |sin(pi (j-l)/k)|
    j = np.arange(k)
    diff = np.abs(q.g[:, None] - q.g[None, :])
    s = np.abs(np.sin(np.pi * (j[:, None] - j[None, :]) / k))
    mask = ~np.eye(k, dtype=bool)
    quot = float(np.max(diff[mask] / s[mask])) if k > 1 else 0.0
    return mu * (d**tau1 * sup_lam + d ** (1.5 * tau1) * sup_f) + d**tau1 * (sup_g + quot)
