"""Standard bubble profiles, their kernels and interaction constants.

U_{Q,L}(x) = c_n L^{(n-2)/2} (1 + L^2 |x-Q|^2)^{-(n-2)/2},
c_n = (n(n-2))^{(n-2)/4}, p = (n+2)/(n-2).

The gamma constants are produced twice: by adaptive quadrature
(gamma_constants) and in Beta/Gamma closed form (gamma_oracle).  Both
routes share only the exact unit-sphere areas; the integration itself is
independent, so they cross-validate each other.
"""

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import beta as beta_fn
from scipy.special import gamma as gamma_fn


def c_n(n: int) -> float:
    return (n * (n - 2.0)) ** ((n - 2.0) / 4.0)


def sphere_area(dim: int) -> float:
    """Surface area of the unit sphere S^dim in R^(dim+1)."""
    return 2.0 * np.pi ** ((dim + 1) / 2.0) / gamma_fn((dim + 1) / 2.0)


@dataclass(frozen=True)
class Bubble:
    """A single bubble: center Q in R^n and concentration rate L > 0."""

    Q: np.ndarray
    L: float


def eval_bubble(x: np.ndarray, b: Bubble, n: int) -> np.ndarray:
    """U_{Q,L} at points x of shape (..., n)."""
    a = (n - 2.0) / 2.0
    r2 = np.sum((np.asarray(x) - b.Q) ** 2, axis=-1)
    return c_n(n) * b.L**a * (1.0 + b.L**2 * r2) ** (-a)


def eval_bubble_grad(x: np.ndarray, b: Bubble, n: int) -> np.ndarray:
    """Gradient of U_{Q,L} at x, shape (..., n)."""
    a = (n - 2.0) / 2.0
    y = np.asarray(x) - b.Q
    r2 = np.sum(y**2, axis=-1)
    pref = -2.0 * a * c_n(n) * b.L ** (a + 2.0) * (1.0 + b.L**2 * r2) ** (-a - 1.0)
    return pref[..., None] * y


def eval_Z0(x: np.ndarray, b: Bubble, n: int) -> np.ndarray:
    """Kernel Z_0 = dU/dL = a c_n L^{a-1} (1 - L^2 r^2) / (1 + L^2 r^2)^{a+1}."""
    a = (n - 2.0) / 2.0
    r2 = np.sum((np.asarray(x) - b.Q) ** 2, axis=-1)
    return a * c_n(n) * b.L ** (a - 1.0) * (1.0 - b.L**2 * r2) * (1.0 + b.L**2 * r2) ** (-a - 1.0)


def eval_Z1(x: np.ndarray, b: Bubble, n: int, normal: np.ndarray) -> np.ndarray:
    """Translation kernel along the ring normal: grad U . n_j."""
    return eval_bubble_grad(x, b, n) @ np.asarray(normal)


def eval_Z2(x: np.ndarray, b: Bubble, n: int, tangent: np.ndarray) -> np.ndarray:
    """Translation kernel along the ring tangent: grad U . t_j."""
    return eval_bubble_grad(x, b, n) @ np.asarray(tangent)


# ---------------------------------------------------------------------------
# gamma constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaConstants:
    gamma1: float
    gamma2: float
    gamma3: float
    gamma4: float


def j_integral_exact(a: float, b: float, n: int) -> float:
    """Closed form of J(a,b,n) = int_{R^n} |y_1|^a (1+|y|^2)^{-b} dy.

    Reduces through the (y_1, |y'|) plane to a product of Beta functions:
    J = omega_{n-2} * (1/2) * B((n-1)/2, b-(n-1)/2) * B((a+1)/2, b-(n+a)/2).
    """
    if 2.0 * b <= n + a:
        raise ValueError("integral diverges: need 2b > n + a")
    return (
        sphere_area(n - 2)
        * 0.5
        * beta_fn((n - 1) / 2.0, b - (n - 1) / 2.0)
        * beta_fn((a + 1) / 2.0, b - (n + a) / 2.0)
    )


def j_integral_quad(a: float, b: float, n: int, tol: float = 1e-11) -> float:
    """J(a,b,n) by adaptive 1-D quadrature (independent of the Beta oracle).

    In polar coordinates of the (y_1, |y'|) half plane the integrand
    separates: an angular factor int_0^{pi/2} cos^a sin^{n-2} and a radial
    factor int_0^inf r^{a+n-1} (1+r^2)^{-b} dr, the latter compactified by
    r = t/(1-t).
    """
    if 2.0 * b <= n + a:
        raise ValueError("integral diverges: need 2b > n + a")
    ang, _ = integrate.quad(
        lambda ph: np.cos(ph) ** a * np.sin(ph) ** (n - 2.0),
        0.0, np.pi / 2.0, epsabs=0.0, epsrel=tol,
    )
    s = a + n - 1.0

    def radial(t: float) -> float:
        r = t / (1.0 - t)
        return r**s * (1.0 + r * r) ** (-b) / (1.0 - t) ** 2

    rad, _ = integrate.quad(radial, 0.0, 1.0, epsabs=0.0, epsrel=tol, limit=200)
    return 2.0 * sphere_area(n - 2) * ang * rad


def radial_integral_exact(s: float, b: float) -> float:
    """int_0^inf r^s (1+r^2)^{-b} dr = (1/2) B((s+1)/2, b-(s+1)/2)."""
    if 2.0 * b <= s + 1.0:
        raise ValueError("radial integral diverges")
    return 0.5 * beta_fn((s + 1) / 2.0, b - (s + 1) / 2.0)


def _gammas_from_j(n: int, m: float, J) -> GammaConstants:
    """Assemble the four constants from a J(a, b, n) evaluator."""
    p = (n + 2.0) / (n - 2.0)
    cpow = c_n(n) ** (p + 1.0)
    g1 = (n - 2.0) * cpow * J(0.0, (n + 2.0) / 2.0, n)
    g2 = (n - 2.0) * m * cpow * J(m, n + 1.0, n)
    # |y_1|^m |y|^2 (1+|y|^2)^{-(n+1)} = |y_1|^m [(1+|y|^2)^{-n} - (1+|y|^2)^{-(n+1)}]
    g4 = 0.5 * (n - 2.0) * m * cpow * (J(m, float(n), n) - J(m, n + 1.0, n) - J(m + 2.0, n + 1.0, n))
    g3 = m / (p + 1.0) * cpow * J(m, float(n), n)
    return GammaConstants(g1, g2, g3, g4)


def gamma_oracle(n: int, m: float) -> GammaConstants:
    """gamma_1..gamma_4 in Beta/Gamma closed form."""
    return _gammas_from_j(n, m, j_integral_exact)


def gamma_constants(n: int, m: float, tol: float = 1e-10) -> GammaConstants:
    """gamma_1..gamma_4 by adaptive quadrature (independent of the oracle)."""
    return _gammas_from_j(n, m, lambda a, b, nn: j_integral_quad(a, b, nn, tol))


def zeta_constant(n: int, m: float, c0: float) -> float:
    """zeta = c0 m(m-1)/(p+1) * int |y|^{m-2} U^{p+1} dy (unit bubble)."""
    p = (n + 2.0) / (n - 2.0)
    radial = radial_integral_exact(m - 2.0 + n - 1.0, float(n))
    return c0 * m * (m - 1.0) / (p + 1.0) * c_n(n) ** (p + 1.0) * sphere_area(n - 1) * radial


def zeta_constant_quad(n: int, m: float, c0: float, tol: float = 1e-11) -> float:
    """Quadrature route for zeta, for cross-validation."""
    p = (n + 2.0) / (n - 2.0)
    val, _ = integrate.quad(
        lambda t: (t / (1.0 - t)) ** (m + n - 3.0)
        * (1.0 + (t / (1.0 - t)) ** 2) ** (-float(n)) / (1.0 - t) ** 2,
        0.0, 1.0, epsabs=0.0, epsrel=tol,
    )
    return c0 * m * (m - 1.0) / (p + 1.0) * c_n(n) ** (p + 1.0) * sphere_area(n - 1) * val


def kernel_norm_sq(l: int, n: int, L: float = 1.0) -> float:
    """int U^{p-1} Z_l^2 for the kernels of a single bubble.

    l = 0 is the rate kernel dU/dL (scales as L^-2); l = 1, 2 are the
    translation kernels grad U . e (scale as L^2, equal by symmetry).
    """
    a = (n - 2.0) / 2.0
    p = (n + 2.0) / (n - 2.0)
    cpow = c_n(n) ** (p + 1.0)
    if l == 0:
        rad = (
            radial_integral_exact(n - 1.0, n + 2.0)
            - 2.0 * radial_integral_exact(n + 1.0, n + 2.0)
            + radial_integral_exact(n + 3.0, n + 2.0)
        )
        return a**2 * cpow * sphere_area(n - 1) * rad * L**-2.0
    if l in (1, 2):
        rad = radial_integral_exact(n + 1.0, n + 2.0)
        return 4.0 * a**2 / n * cpow * sphere_area(n - 1) * rad * L**2.0
    raise ValueError("kernel index must be 0, 1 or 2")


# ---------------------------------------------------------------------------
# pairwise interaction leading terms
# ---------------------------------------------------------------------------

def gamma1_exact(n: int) -> float:
    """gamma_1 alone (independent of m)."""
    p = (n + 2.0) / (n - 2.0)
    return (n - 2.0) * c_n(n) ** (p + 1.0) * j_integral_exact(0.0, (n + 2.0) / 2.0, n)


def _pair_setup(bj: Bubble, bl: Bubble, n: int, gammas: GammaConstants | None):
    g1 = gammas.gamma1 if gammas is not None else gamma1_exact(n)
    diff = np.asarray(bj.Q, dtype=float) - np.asarray(bl.Q, dtype=float)
    dist = float(np.linalg.norm(diff))
    return g1, diff, dist


def pair_gradient(bj: Bubble, bl: Bubble, n: int,
                  gammas: GammaConstants | None = None) -> np.ndarray:
    """Leading term of int p U_j^{p-1} grad U_j U_l (vector in R^n)."""
    a = (n - 2.0) / 2.0
    g1, diff, dist = _pair_setup(bj, bl, n, gammas)
    return g1 * bj.L ** (-a) * bl.L ** (-a) * diff / dist**n


def pair_Z0(bj: Bubble, bl: Bubble, n: int,
            gammas: GammaConstants | None = None) -> float:
    """Leading term of int p U_j^{p-1} Z_{j,0} U_l."""
    a = (n - 2.0) / 2.0
    g1, _, dist = _pair_setup(bj, bl, n, gammas)
    return -0.5 * g1 * bj.L ** (-n / 2.0) * bl.L ** (-a) * dist ** (2.0 - n)


def pair_grad_Z0(bj: Bubble, bl: Bubble, n: int,
                 gammas: GammaConstants | None = None) -> np.ndarray:
    """Leading term of int p U_j^{p-1} grad U_j Z_{l,0} (vector)."""
    a = (n - 2.0) / 2.0
    g1, diff, dist = _pair_setup(bj, bl, n, gammas)
    return 0.5 * (n - 2.0) * g1 * bj.L ** (-a) * bl.L ** (-n / 2.0) * diff / dist**n


def pair_Z0_Z0(bj: Bubble, bl: Bubble, n: int,
               gammas: GammaConstants | None = None) -> float:
    """Leading term of int p U_j^{p-1} Z_{j,0} Z_{l,0}."""
    g1, _, dist = _pair_setup(bj, bl, n, gammas)
    return 0.25 * (n - 2.0) * g1 * bj.L ** (-n / 2.0) * bl.L ** (-n / 2.0) * dist ** (2.0 - n)


def pair_gradient_quad(rho: float, n: int, L: float = 1.0,
                       tol: float = 1e-8) -> tuple[float, float]:
    """Quadrature oracle for the axial component of int p U_j^{p-1} dU_j/du U_l.

    Centers at 0 and rho*e1; integrates over the ball |x| < rho/2 in reduced
    (u, v) coordinates and returns (value, tail_bound) where tail_bound
    crudely dominates the neglected exterior.
    """
    a = (n - 2.0) / 2.0
    p = (n + 2.0) / (n - 2.0)
    cn = c_n(n)
    area = sphere_area(n - 2)

    def integrand(v: float, u: float) -> float:
        r2 = u * u + v * v
        U = cn * L**a * (1.0 + L**2 * r2) ** (-a)
        dUdu = -2.0 * a * cn * L ** (a + 2.0) * u * (1.0 + L**2 * r2) ** (-a - 1.0)
        rl2 = (u - rho) ** 2 + v * v
        Ul = cn * L**a * (1.0 + L**2 * rl2) ** (-a)
        return p * U ** (p - 1.0) * dUdu * Ul * v ** (n - 2.0)

    half = rho / 2.0
    val, _ = integrate.dblquad(
        integrand, -half, half,
        lambda u: 0.0, lambda u: np.sqrt(max(half * half - u * u, 0.0)),
        epsabs=0.0, epsrel=tol,
    )
    # Crude exterior bound: |U_l| <= c_n L^a everywhere and
    # U^{p-1} |grad U| ~ r^{-(n+3)} for |x| >= rho/2.
    def decay(t: float) -> float:
        r = half + t / (1.0 - t)
        U = cn * L**a * (1.0 + L**2 * r * r) ** (-a)
        grad = 2.0 * a * cn * L ** (a + 2.0) * r * (1.0 + L**2 * r * r) ** (-a - 1.0)
        return U ** (p - 1.0) * grad * r ** (n - 1.0) / (1.0 - t) ** 2

    ext = integrate.quad(decay, 0.0, 1.0, epsabs=0.0, epsrel=1e-9)[0]
    tail = p * cn * L**a * sphere_area(n - 1) * ext
    return float(area * val), float(tail)
