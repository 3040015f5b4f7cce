"""Partially entangled channel resource and the distortion-correcting filters."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import KrausPair, PureState

NORMALIZATION_TOL = 1e-12
RESCALE_HIGH = 1e6
RESCALE_LOW = 1e-6


@dataclass(frozen=True)
class Channel:
    """Two-qubit resource ``alpha|00> + beta|11>`` in canonical form ``0 <= alpha <= beta``."""

    alpha: float
    beta: float

    def __post_init__(self):
        a, b = sorted((abs(float(self.alpha)), abs(float(self.beta))))
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ValueError("channel coefficients must be finite")
        if abs(a * a + b * b - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"alpha^2 + beta^2 = {a * a + b * b!r}, expected 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_alpha(cls, alpha: float) -> Channel:
        return cls(alpha, math.sqrt(1.0 - alpha * alpha))

    @classmethod
    def from_alpha2(cls, alpha2: float) -> Channel:
        if not 0.0 <= alpha2 <= 1.0:
            raise ValueError(f"alpha^2 must lie in [0, 1], got {alpha2}")
        return cls(math.sqrt(alpha2), math.sqrt(1.0 - alpha2))

    @classmethod
    def maximal(cls) -> Channel:
        return cls(math.sqrt(0.5), math.sqrt(0.5))

    @property
    def alpha2(self) -> float:
        return self.alpha * self.alpha

    @property
    def is_product(self) -> bool:
        return self.alpha == 0.0


def concurrence(ch: Channel) -> float:
    return 2.0 * ch.alpha * ch.beta


def channel_from_concurrence(c: float) -> Channel:
    """Channel with the given concurrence, taking the ``alpha <= 1/sqrt(2)`` root."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"concurrence must lie in [0, 1], got {c}")
    # c^2 / (2 (1 + sqrt(1 - c^2))) avoids cancellation at small c
    alpha2 = c * c / (2.0 * (1.0 + math.sqrt(1.0 - c * c)))
    return Channel.from_alpha2(alpha2)


def channel_state(ch: Channel) -> PureState:
    return PureState(np.array([ch.alpha, 0.0, 0.0, ch.beta], dtype=np.complex128))


@dataclass(frozen=True)
class Distortion:
    """Diagonal factor ``diag(u, v)`` multiplying the payload amplitudes ``(a, b)``.

    Components are unnormalized; only their ratio matters, so they are
    rescaled by their max whenever either leaves ``[1e-6, 1e6]``.
    """

    u: float
    v: float

    def __post_init__(self):
        u, v = float(self.u), float(self.v)
        if not (u > 0.0 and v > 0.0) or not (math.isfinite(u) and math.isfinite(v)):
            raise ValueError(f"distortion components must be positive, got ({u}, {v})")
        if max(u, v) > RESCALE_HIGH or min(u, v) < RESCALE_LOW:
            top = max(u, v)
            u, v = u / top, v / top
            if u == 0.0 or v == 0.0:
                raise ValueError("distortion ratio underflows double precision")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def none(cls) -> Distortion:
        return cls(1.0, 1.0)

    def __mul__(self, other: Distortion) -> Distortion:
        return Distortion(self.u * other.u, self.v * other.v)

    def swapped(self) -> Distortion:
        return Distortion(self.v, self.u)

    @property
    def ratio(self) -> float:
        return min(self.u, self.v) / max(self.u, self.v)

    def is_balanced(self, rtol: float = 1e-12) -> bool:
        return abs(self.u - self.v) <= rtol * max(self.u, self.v)

    def matrix(self) -> np.ndarray:
        return np.diag([self.u, self.v]).astype(np.complex128)


def correction_kraus(d: Distortion) -> KrausPair:
    """Filter that undoes ``diag(u, v)``: the larger direction is damped by ``min/max``."""
    if d.u == d.v:
        return KrausPair.identity()
    r = d.ratio
    fail = math.sqrt(max(0.0, 1.0 - r * r))
    if d.u > d.v:
        es = np.diag([r, 1.0])
        ef = np.diag([fail, 0.0])
    else:
        es = np.diag([1.0, r])
        ef = np.diag([0.0, fail])
    return KrausPair(es, ef)
