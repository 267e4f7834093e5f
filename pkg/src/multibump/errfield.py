"""The error density of the bubble-ring ansatz and its weighted sup norm.

For the ansatz W = sum_j U_j the residual of the equation is

    E = Delta W + hatK W^p = (hatK - 1) W^p + (W^p - sum_j U_j^p),

pointwise exact since each bubble solves the flat equation.  The second
difference is tiny compared to W^p near a center, so it is evaluated
through expm1/log1p around the dominant bubble rather than literally.

Norms are sups against piecewise weights adapted to the bubble cluster:
each point belongs to the cell of its nearest unperturbed center and to
an inner / middle / outer zone by distance; the weight decays like the
bubble core inside and like a tuned power in the rest of the cell.  The
sup is estimated by stratified random sampling (deterministic seeds), so
the estimate is a lower bound for the true sup.
"""

from dataclasses import dataclass

import numpy as np

from .model import DerivedScales, ProblemParams, unperturbed_centers

SIGMA = 1.01


def power_M(params: ProblemParams) -> float:
    """Exponent knob max{p, 2} in the middle/outer weight branches."""
    return max(params.p, 2.0)


def hatK_minus_1(points: np.ndarray, params: ProblemParams,
                 scales: DerivedScales) -> np.ndarray:
    """hatK(x) - 1 = -c0 min(||x|/mu - r0|, delta)^m (rescaled well profile)."""
    radial = np.linalg.norm(points, axis=-1) / scales.mu
    return -params.c0 * np.minimum(np.abs(radial - params.r0),
                                   params.delta) ** params.m


def bubble_values(points: np.ndarray, centers: np.ndarray,
                  Lambdas: np.ndarray, n: int) -> np.ndarray:
    """U_j(x) for every point/center pair, shape (N, k)."""
    a = (n - 2.0) / 2.0
    cn = (n * (n - 2.0)) ** ((n - 2.0) / 4.0)
    diff = points[:, None, :] - centers[None, :, :]
    r2 = np.einsum("Njd,Njd->Nj", diff, diff)
    return cn * Lambdas**a * (1.0 + Lambdas**2 * r2) ** (-a)


def eval_E(points: np.ndarray, centers: np.ndarray, Lambdas: np.ndarray,
           params: ProblemParams, scales: DerivedScales) -> np.ndarray:
    """Pointwise error density, no quadrature.

    The interaction part W^p - sum U_j^p is written around the dominant
    bubble i as U_i^p expm1(p log1p(S/U_i)) - sum_{j != i} U_j^p with
    S = sum_{j != i} U_j; the naive form loses the whole signal to
    rounding wherever one bubble dominates.
    """
    points = np.atleast_2d(points)
    p = params.p
    U = bubble_values(points, centers, Lambdas, params.n)
    i = np.argmax(U, axis=1)
    rows = np.arange(U.shape[0])
    Ui = U[rows, i]
    Umask = U.copy()
    Umask[rows, i] = 0.0
    S = Umask.sum(axis=1)
    W = Ui + S
    interaction = Ui**p * np.expm1(p * np.log1p(S / Ui)) - (Umask**p).sum(axis=1)
    return hatK_minus_1(points, params, scales) * W**p + interaction


@dataclass(frozen=True)
class RegionLabel:
    j: int                 # nearest unperturbed center (0-based)
    zone: str              # "inner", "middle" or "outer"


def classify(points: np.ndarray, params: ProblemParams,
             scales: DerivedScales) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-center index and zone code (0 inner, 1 middle, 2 outer).

    Zones split the cell of center j at distances d/2 and delta*mu/2.
    """
    Q = unperturbed_centers(params.k, params.n, scales.R)
    diff = points[:, None, :] - Q[None, :, :]
    dist = np.sqrt(np.einsum("Njd,Njd->Nj", diff, diff))
    j = np.argmin(dist, axis=1)
    dj = dist[np.arange(points.shape[0]), j]
    zone = np.where(dj <= scales.d / 2.0, 0,
                    np.where(dj < params.delta * scales.mu / 2.0, 1, 2))
    return j, zone


def _weights(points: np.ndarray, centers: np.ndarray, params: ProblemParams,
             scales: DerivedScales, inner_power: float) -> np.ndarray:
    d = scales.d
    Ms = power_M(params) * SIGMA
    n = params.n
    j, zone = classify(points, params, scales)
    diff = points - centers[j]
    r = np.linalg.norm(diff, axis=-1)
    inner = d ** (-(n - 2.0)) / (1.0 + r**inner_power)
    outer_exp = (n + 2.0 - Ms) if inner_power == 4.0 else (n - Ms)
    outer = d ** (-Ms) / (1.0 + r**outer_exp)
    return np.where(zone == 0, inner, outer)


def weight_V(points: np.ndarray, centers: np.ndarray, params: ProblemParams,
             scales: DerivedScales) -> np.ndarray:
    """Weight for right-hand sides: core decay |x-Q|^-4, outer n+2 power."""
    return _weights(np.atleast_2d(points), centers, params, scales, 4.0)


def weight_W(points: np.ndarray, centers: np.ndarray, params: ProblemParams,
             scales: DerivedScales) -> np.ndarray:
    """Weight for the error density: core decay |x-Q|^-2, outer n power."""
    return _weights(np.atleast_2d(points), centers, params, scales, 2.0)


def _directions(rng: np.random.Generator, N: int, n: int) -> np.ndarray:
    v = rng.standard_normal((N, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def sample_points(params: ProblemParams, scales: DerivedScales, N: int,
                  seed: int = 0) -> np.ndarray:
    """Stratified sample: 40% bubble cores, 40% mid-range annuli, 20% far.

    Each stratum gets its own child seed, so enlarging N refines rather
    than reshuffles the low-level streams only within a stratum.
    """
    n, k = params.n, params.k
    Q = unperturbed_centers(k, n, scales.R)
    n_core = (4 * N) // 10
    n_mid = (4 * N) // 10
    n_far = N - n_core - n_mid
    half = scales.d / 2.0
    mid_hi = params.delta * scales.mu / 2.0

    rng = np.random.default_rng([seed, 1])
    j = rng.integers(0, k, n_core)
    # log-uniform radii: the cell radius d/2 dwarfs the bubble core, and
    # the interesting ratios live across all the decades in between
    r_min = 1e-2
    radii = r_min * (half / r_min) ** rng.random(n_core)
    core = Q[j] + radii[:, None] * _directions(rng, n_core, n)

    rng = np.random.default_rng([seed, 2])
    j = rng.integers(0, k, n_mid)
    radii = half * (mid_hi / half) ** rng.random(n_mid)   # log-uniform
    mid = Q[j] + radii[:, None] * _directions(rng, n_mid, n)

    rng = np.random.default_rng([seed, 3])
    lo, hi = mid_hi, 50.0 * scales.mu
    radii = lo * (hi / lo) ** rng.random(n_far)           # log-uniform
    far = radii[:, None] * _directions(rng, n_far, n)

    return np.concatenate([core, mid, far], axis=0)


@dataclass(frozen=True)
class NormEstimate:
    value: float           # sampled sup of |field| / weight (a lower bound)
    argmax_point: np.ndarray
    samples: int


def sup_norm_sampled(field, weight, points: np.ndarray) -> NormEstimate:
    """max over sample points of |field| / weight, with its location."""
    vals = np.abs(np.asarray(field(points))) / np.asarray(weight(points))
    i = int(np.argmax(vals))
    return NormEstimate(value=float(vals[i]), argmax_point=points[i].copy(),
                        samples=points.shape[0])


def error_norm_estimate(params: ProblemParams, scales: DerivedScales,
                        Lambda: float, N: int = 100000,
                        seed: int = 0) -> NormEstimate:
    """Sampled double-weighted norm of E at the unperturbed configuration."""
    k = params.k
    Q = unperturbed_centers(k, params.n, scales.R)
    L = np.full(k, Lambda)
    pts = sample_points(params, scales, N, seed)
    return sup_norm_sampled(
        lambda x: eval_E(x, Q, L, params, scales),
        lambda x: weight_W(x, Q, params, scales), pts)
