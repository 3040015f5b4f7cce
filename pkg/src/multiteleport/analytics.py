"""Closed-form success probabilities for single, separate and global multi-hop teleportation.

All functions are parameterized by the smaller Schmidt coefficient ``alpha``
of the channel ``alpha|00> + beta|11>`` with ``beta = sqrt(1 - alpha^2)``.
``n`` counts hop pairs: a chain of ``2n`` hops links ``2n + 1`` parties.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable

from .channels import channel_from_concurrence

EXACT_BINOMIAL_MAX_N = 30


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha <= math.sqrt(0.5) + 1e-15:
        raise ValueError(f"alpha must lie in (0, 1/sqrt(2)], got {alpha}")
    return alpha


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    return int(n)


def _alpha2(alpha: float) -> float:
    # alpha <= 1/sqrt(2); squaring sqrt(0.5) can round past 1/2
    return min(alpha * alpha, 0.5)


def _weighted_binomial(m: int, i: int, alpha2: float, beta2: float, pa: int, pb: int) -> float:
    """``C(m, i) * alpha2**pa * beta2**pb``, in log space once ``m`` is large."""
    if m <= 2 * EXACT_BINOMIAL_MAX_N:
        return math.comb(m, i) * alpha2**pa * beta2**pb
    log_c = math.lgamma(m + 1) - math.lgamma(i + 1) - math.lgamma(m - i + 1)
    return math.exp(log_c + pa * math.log(alpha2) + pb * math.log(beta2))


def p_single(alpha: float) -> float:
    """Success probability of one probabilistic teleportation hop: ``2 alpha^2``."""
    return 2.0 * _alpha2(_check_alpha(alpha))


def p_smtp(n: int, alpha: float) -> float:
    """Separate protocol over ``2n`` hops: ``(2 alpha^2)^(2n)``."""
    n = _check_n(n)
    return p_single(alpha) ** (2 * n)


def gmtp_branch_weight(n: int, i: int, alpha: float, a: complex, b: complex) -> float:
    """Probability that the global protocol ends with error index ``i``.

    The receiver then holds ``alpha^(2n-i) beta^i a|0> + alpha^i beta^(2n-i) b|1>``
    (normalized), reached through ``C(2n, i)`` distinct outcome families.
    """
    n = _check_n(n)
    alpha = _check_alpha(alpha)
    m = 2 * n
    if not 0 <= i <= m:
        raise ValueError(f"error index must lie in [0, {m}], got {i}")
    a2 = _alpha2(alpha)
    b2 = 1.0 - a2
    return abs(a) ** 2 * _weighted_binomial(m, i, a2, b2, m - i, i) + abs(
        b
    ) ** 2 * _weighted_binomial(m, i, a2, b2, i, m - i)


def p_gmtp(n: int, alpha: float) -> float:
    """Global protocol over ``2n`` hops.

    The balanced branch ``i = n`` needs no filtering; every other branch
    succeeds with the weight of its less likely orientation.
    """
    n = _check_n(n)
    alpha = _check_alpha(alpha)
    m = 2 * n
    a2 = _alpha2(alpha)
    b2 = 1.0 - a2
    total = _weighted_binomial(m, n, a2, b2, n, n)
    total += 2.0 * math.fsum(_weighted_binomial(m, i, a2, b2, m - i, i) for i in range(n))
    return total


def ratio_gmtp_smtp(n: int, alpha: float) -> float:
    return p_gmtp(n, alpha) / p_smtp(n, alpha)


def p_hetero(alpha1: float, alpha2: float) -> float:
    """Three parties, two different channels: set by the less entangled one."""
    return min(p_single(alpha1), p_single(alpha2))


@dataclass(frozen=True)
class SweepPoint:
    concurrence: float
    n: int
    p_smtp: float
    p_gmtp: float
    ratio: float

    def as_dict(self) -> dict:
        return asdict(self)


def sweep(n: int, concurrence_grid: Iterable[float]) -> list[SweepPoint]:
    points = []
    for c in concurrence_grid:
        if not 0.0 < c <= 1.0:
            raise ValueError(f"concurrence grid values must lie in (0, 1], got {c}")
        alpha = channel_from_concurrence(c).alpha
        ps, pg = p_smtp(n, alpha), p_gmtp(n, alpha)
        points.append(SweepPoint(float(c), n, ps, pg, pg / ps))
    return points


def concurrence_grid(start: float, step: float, stop: float) -> list[float]:
    """Inclusive grid ``start:step:stop`` without accumulated rounding drift."""
    if step <= 0 or stop < start:
        raise ValueError("grid needs step > 0 and stop >= start")
    count = int(round((stop - start) / step)) + 1
    return [round(start + k * step, 12) for k in range(count)]
