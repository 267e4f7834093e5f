"""Series special function g and the spectral condition it must satisfy.

g(x)  = sum_{j>=1} (1 - cos(jx)) / j^n
g'(x) = sum_{j>=1} sin(jx) / j^(n-1)
g''(x)= sum_{j>=1} cos(jx) / j^(n-2)

The condition checked on (0, pi) is

    g''(x) < (n-2)/(n-1) * g'(x)^2 / g(x),

verified numerically on a uniform grid together with the analytic
endpoint limits at x -> 0+ and x = pi.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta


@dataclass(frozen=True)
class SeriesEval:
    value: float
    tail_bound: float
    terms_used: int


def _terms_needed(decay: float, tol: float) -> int:
    """Smallest N with integral tail bound of sum j^{-decay-1}-type below tol.

    For a series with |terms| <= c / j^s (s = decay + 1 > 1) the tail beyond N
    is at most c * N^{-s+1} / (s - 1).
    """
    if decay <= 0:
        raise ValueError("series must have summable decay")
    n_terms = (1.0 / (decay * tol)) ** (1.0 / decay)
    return max(8, int(np.ceil(n_terms)))


def _series(xs: np.ndarray, exponent: float, kind: str, tol: float,
            coeff_bound: float) -> tuple[np.ndarray, float, int]:
    """Evaluate sum_j kind(jx)/j^exponent by direct truncation.

    Two rigorous tail bounds are available and the cheaper one is used:
    the uniform bound coeff_bound * N^{1-exponent}/(exponent-1), and (for
    the oscillatory sin/cos sums, away from x = 0 mod 2 pi) the Dirichlet
    bound 2 * N^{-exponent} / min|sin(x/2)| from summation by parts.
    """
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    N_uni = _terms_needed(exponent - 1.0, tol / coeff_bound)
    N = N_uni
    tail = coeff_bound * N ** (1.0 - exponent) / (exponent - 1.0)
    if kind in ("sin", "cos") and xs.size:
        smin = float(np.min(np.abs(np.sin(xs / 2.0))))
        if smin > 0.0:
            N_dir = max(8, int(np.ceil((2.0 / (smin * tol)) ** (1.0 / exponent))))
            if N_dir < N_uni:
                N = N_dir
                tail = 2.0 * N ** (-exponent) / smin
    vals = np.zeros_like(xs)
    chunk = max(1, (1 << 22) // max(xs.size, 1))
    for start in range(1, N + 1, chunk):
        j = np.arange(start, min(start + chunk, N + 1), dtype=float)
        jx = np.multiply.outer(xs, j)
        if kind == "one_minus_cos":
            vals += ((1.0 - np.cos(jx)) / j**exponent).sum(axis=1)
        elif kind == "sin":
            vals += (np.sin(jx) / j**exponent).sum(axis=1)
        elif kind == "cos":
            vals += (np.cos(jx) / j**exponent).sum(axis=1)
        else:  # pragma: no cover
            raise ValueError(kind)
    return vals, tail, N


def g_values(xs, n: int, tol: float = 1e-12) -> np.ndarray:
    return _series(xs, float(n), "one_minus_cos", tol, 2.0)[0]


def g1_values(xs, n: int, tol: float = 1e-12) -> np.ndarray:
    return _series(xs, float(n - 1), "sin", tol, 1.0)[0]


def g2_values(xs, n: int, tol: float = 1e-12) -> np.ndarray:
    return _series(xs, float(n - 2), "cos", tol, 1.0)[0]


def eval_g(x: float, n: int, tol: float = 1e-12) -> SeriesEval:
    vals, tail, N = _series(x, float(n), "one_minus_cos", tol, 2.0)
    return SeriesEval(float(vals[0]), tail, N)


def eval_g1(x: float, n: int, tol: float = 1e-12) -> SeriesEval:
    vals, tail, N = _series(x, float(n - 1), "sin", tol, 1.0)
    return SeriesEval(float(vals[0]), tail, N)


def eval_g2(x: float, n: int, tol: float = 1e-12) -> SeriesEval:
    vals, tail, N = _series(x, float(n - 2), "cos", tol, 1.0)
    return SeriesEval(float(vals[0]), tail, N)


def g_at_pi(n: int) -> float:
    """Closed form g(pi) = 2 (1 - 2^{-n}) zeta(n)."""
    return 2.0 * (1.0 - 2.0 ** (-n)) * float(zeta(n, 1))


def g2_at_zero(n: int) -> float:
    """Closed form g''(0) = zeta(n-2)."""
    return float(zeta(n - 2, 1))


def g2_at_pi(n: int) -> float:
    """Closed form g''(pi) = -(1 - 2^{3-n}) zeta(n-2) (alternating series)."""
    return -(1.0 - 2.0 ** (3 - n)) * float(zeta(n - 2, 1))


def margin_limit_zero(n: int) -> float:
    """Limit of the condition margin as x -> 0+.

    Near 0: g ~ zeta(n-2) x^2/2, g' ~ zeta(n-2) x, g'' -> zeta(n-2), so
    rhs - lhs -> (2(n-2)/(n-1) - 1) zeta(n-2) = ((n-3)/(n-1)) zeta(n-2).
    """
    return (n - 3.0) / (n - 1.0) * float(zeta(n - 2, 1))


def margin_limit_pi(n: int) -> float:
    """Limit of the margin at x = pi, where g'(pi) = 0: margin = -g''(pi)."""
    return -g2_at_pi(n)


@dataclass
class ConditionReport:
    n: int
    grid: np.ndarray
    lhs: np.ndarray          # g''(x)
    rhs: np.ndarray          # (n-2)/(n-1) g'^2 / g
    margin: np.ndarray       # rhs - lhs, positive iff the condition holds
    endpoint_margins: tuple[float, float]
    min_margin: float
    holds: bool
    tail_bound: float = 0.0
    extras: dict = field(default_factory=dict)


def condition_margin(n: int, grid_size: int = 2000, tol: float = 1e-12) -> ConditionReport:
    """Margin of the spectral condition on a uniform interior grid of (0, pi).

    The verdict uses the rearranged quantity (n-2)/(n-1) g'^2 - g g'' (no
    division, stable where g is small) together with the endpoint limits.
    """
    xs = np.pi * np.arange(1, grid_size + 1) / (grid_size + 1)
    g, tg, _ = _series(xs, float(n), "one_minus_cos", tol, 2.0)
    g1, t1, _ = _series(xs, float(n - 1), "sin", tol, 1.0)
    g2, t2, _ = _series(xs, float(n - 2), "cos", tol, 1.0)
    ratio = (n - 2.0) / (n - 1.0)
    rhs = ratio * g1**2 / g
    margin = rhs - g2
    rearranged = ratio * g1**2 - g * g2
    ends = (margin_limit_zero(n), margin_limit_pi(n))
    min_margin = float(min(margin.min(), *ends))
    holds = bool(rearranged.min() > 0.0 and min(ends) > 0.0)
    return ConditionReport(
        n=n, grid=xs, lhs=g2, rhs=rhs, margin=margin,
        endpoint_margins=ends, min_margin=min_margin, holds=holds,
        tail_bound=max(tg, t1, t2),
        extras={"rearranged_min": float(rearranged.min())},
    )


def verify_condition(n_min: int = 5, n_max: int = 48, grid_size: int = 2000,
                     tol: float = 1e-12) -> list[ConditionReport]:
    """Run condition_margin for every dimension n in [n_min, n_max]."""
    if n_min < 5:
        raise ValueError("condition is only meaningful for n >= 5")
    return [condition_margin(n, grid_size, tol) for n in range(n_min, n_max + 1)]


def report_csv_rows(report: ConditionReport):
    """Yield (x, lhs, rhs, margin) tuples for CSV serialization."""
    for x, l, r, m in zip(report.grid, report.lhs, report.rhs, report.margin):
        yield (float(x), float(l), float(r), float(m))
