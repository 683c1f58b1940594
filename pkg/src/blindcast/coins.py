"""Shared randomness generated by the source, and transmission probabilities.

Each doubling iteration of length ``T`` the source draws a protocol sequence
``S`` uniformly from the active protocols and, for every step, a global value
``x`` from that protocol's distribution. Active nodes then transmit with
probability ``2 ** -x`` (Deep-Broadcast divides the exponent by a
distance-dependent scale).

All PMFs are represented as arrays over ``0..y_max`` whose entry 0 carries the
leftover mass, and sampled by inverse CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Sequence

import numpy as np

Y2_DEFAULT_YMAX = 1 << 16


class Protocol(IntEnum):
    SHALLOW = 1
    GENERAL = 2
    SEMI_SHALLOW = 3
    DEEP = 4


NO_CD_PROTOCOLS = (Protocol.SHALLOW, Protocol.GENERAL)
CD_PROTOCOLS = (Protocol.SHALLOW, Protocol.GENERAL, Protocol.SEMI_SHALLOW, Protocol.DEEP)


@dataclass(frozen=True)
class Constants:
    """Protocol constants. ``c2`` only fixes which iteration the analysis looks
    at; no sampler reads it, but it is reported with every run."""

    C: int = 2
    c1: float = 1.0
    c2: float = 1.0
    c3: float = 1.0
    c4: float = 1.0
    y2_max: int = Y2_DEFAULT_YMAX

    def __post_init__(self) -> None:
        if self.C < 1:
            raise ValueError("C must be a positive integer")
        for name in ("c1", "c2", "c3", "c4"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.y2_max < 2:
            raise ValueError("y2_max must be at least 2")

    @classmethod
    def paper(cls, C: int) -> "Constants":
        return cls(C=C, c1=30.0 * C, c2=3500.0 * C, c3=2280.0 * C, c4=3840.0 * C)

    def as_dict(self) -> dict:
        return {"C": self.C, "c1": self.c1, "c2": self.c2, "c3": self.c3, "c4": self.c4,
                "y2_max": self.y2_max}


def log_conv(x: float) -> float:
    """``max(log2 x, 1)``."""
    if not x > 0:
        raise ValueError(f"log_conv needs a positive argument, got {x}")
    return max(math.log2(x), 1.0)


# -- PMF tables -------------------------------------------------------------


def _with_zero_mass(masses: np.ndarray) -> np.ndarray:
    """Prepend the leftover mass at y = 0 to masses for y = 1..len."""
    pmf = np.empty(masses.size + 1)
    pmf[1:] = masses
    pmf[0] = max(0.0, 1.0 - math.fsum(masses.tolist()))
    return pmf


@lru_cache(maxsize=256)
def pmf_y1_table(T: int, c1: float) -> np.ndarray:
    """Shallow-Broadcast: ``c1/sqrt(T)`` on each of ``1..floor(sqrt(T)/c1)``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    q = c1 / math.sqrt(T)
    k = math.floor(math.sqrt(T) / c1) if q <= 1 else 0
    table = _with_zero_mass(np.full(k, q))
    table.setflags(write=False)
    return table


def y2_weight(y: int | np.ndarray) -> np.ndarray | float:
    """``1 / (3 y log(y)^2)`` under the ``max(log2, 1)`` convention."""
    y = np.asarray(y, dtype=float)
    return 1.0 / (3.0 * y * np.maximum(np.log2(y), 1.0) ** 2)


def y2_tail(y_max: int) -> float:
    """Mass of ``y > y_max``, integral of the weight from ``y_max + 1/2``."""
    return math.log(2) / (3.0 * math.log2(y_max + 0.5))


@lru_cache(maxsize=16)
def pmf_y2_table(y_max: int = Y2_DEFAULT_YMAX) -> np.ndarray:
    """General-Broadcast, truncated at ``y_max`` with the tail folded into ``y_max``.

    Mass at 0 is the leftover of the untruncated distribution, so the
    truncation does not move mass onto ``x = 0``.
    """
    if y_max < 2:
        raise ValueError("y_max must be at least 2")
    masses = y2_weight(np.arange(1, y_max + 1))
    tail = y2_tail(y_max)
    masses[-1] += tail
    table = _with_zero_mass(masses)
    table.setflags(write=False)
    return table


def pmf_y2(y: int, y_max: int = Y2_DEFAULT_YMAX) -> float:
    table = pmf_y2_table(y_max)
    return float(table[y]) if 0 <= y < table.size else 0.0


@dataclass(frozen=True)
class SemiShallowShape:
    first_end: int      # A: first piece covers 1..A
    second_end: int     # B: second piece covers A+1..B
    first_prob: float   # per-value mass on the first piece (0 if empty)
    raw_mass: float     # total mass of both pieces before any normalization


def y3_shape(T: int, c3: float) -> SemiShallowShape:
    if T < 2:
        raise ValueError("Semi-Shallow needs T >= 2")
    L = log_conv(T)
    LL = log_conv(L)
    A = math.floor(math.sqrt(T / (c3 * c3 * L * L * LL)))
    B = math.floor(math.sqrt(T * L * L / (c3 * c3 * LL)))
    q1 = math.sqrt(c3 * c3 * L * L * LL / (2.0 * T))
    if q1 > 1.0:
        A, q1 = 0, 0.0
    B = max(B, A)
    second = 1.0 / (3.0 * np.arange(A + 1, B + 1) * LL)
    raw = A * q1 + math.fsum(second.tolist())
    return SemiShallowShape(A, B, q1 if A else 0.0, raw)


@lru_cache(maxsize=256)
def pmf_y3_table(T: int, c3: float) -> np.ndarray:
    """Semi-Shallow-Broadcast two-piece distribution.

    The two pieces as written can carry more than unit mass (about 1.17 for
    large T). When they do, both pieces are scaled down proportionally and
    ``x = 0`` gets no mass.
    """
    shape = y3_shape(T, c3)
    L = log_conv(T)
    LL = log_conv(L)
    masses = np.empty(shape.second_end)
    masses[: shape.first_end] = shape.first_prob
    masses[shape.first_end :] = 1.0 / (3.0 * np.arange(shape.first_end + 1, shape.second_end + 1) * LL)
    if shape.raw_mass > 1.0:
        masses /= shape.raw_mass
    table = _with_zero_mass(masses)
    table.setflags(write=False)
    return table


def pmf_y4_table(T: int) -> np.ndarray:
    """Deep-Broadcast: uniform on ``1..T``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    table = np.full(T + 1, 1.0 / T)
    table[0] = 0.0
    return table


# -- sampling ---------------------------------------------------------------


@lru_cache(maxsize=256)
def _cdf(table_key: tuple) -> np.ndarray:
    kind, *args = table_key
    pmf = {"y1": pmf_y1_table, "y2": pmf_y2_table, "y3": pmf_y3_table}[kind](*args)
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return cdf


def _draw(cdf: np.ndarray, rng: np.random.Generator, size: int | None) -> int | np.ndarray:
    u = rng.random(size)
    out = np.searchsorted(cdf, u, side="right")
    return int(out) if size is None else out.astype(np.int64)


def sample_y1(T: int, c1: float, rng: np.random.Generator, size: int | None = None):
    return _draw(_cdf(("y1", T, c1)), rng, size)


def sample_y2(rng: np.random.Generator, y_max: int = Y2_DEFAULT_YMAX, size: int | None = None):
    return _draw(_cdf(("y2", y_max)), rng, size)


def sample_y3(T: int, c3: float, rng: np.random.Generator, size: int | None = None):
    return _draw(_cdf(("y3", T, c3)), rng, size)


def sample_y4(T: int, rng: np.random.Generator, size: int | None = None):
    if T < 1:
        raise ValueError("T must be >= 1")
    out = rng.integers(1, T + 1, size=size)
    return int(out) if size is None else out.astype(np.int64)


def sample_sequence(T: int, protocols: Sequence[Protocol], rng: np.random.Generator) -> np.ndarray:
    """``T`` iid uniform draws from ``protocols`` (as int8 protocol codes)."""
    if T < 1 or not protocols:
        raise ValueError("need T >= 1 and at least one protocol")
    codes = np.asarray([int(p) for p in protocols], dtype=np.int8)
    return codes[rng.integers(0, codes.size, size=T)]


@dataclass(frozen=True)
class IterationRandomness:
    t: int
    S: np.ndarray
    x: np.ndarray

    @property
    def T(self) -> int:
        return 1 << self.t

    def __post_init__(self) -> None:
        if len(self.S) != self.T or len(self.x) != self.T:
            raise ValueError(f"iteration t={self.t} needs sequences of length {self.T}")
        if len(self.x) and np.min(self.x) < 0:
            raise ValueError("global values must be nonnegative")


def draw_iteration(
    t: int, protocols: Sequence[Protocol], constants: Constants, rng: np.random.Generator
) -> IterationRandomness:
    """The source's coins for iteration ``t``: ``S`` first, then every ``x[j]``.

    Values are drawn per protocol in code order over the positions holding
    that protocol, so the stream consumption is a fixed function of ``S``.
    """
    T = 1 << t
    S = sample_sequence(T, protocols, rng)
    x = np.zeros(T, dtype=np.int64)
    for proto in sorted(set(int(p) for p in protocols)):
        where = np.flatnonzero(S == proto)
        if not where.size:
            continue
        k = where.size
        if proto == Protocol.SHALLOW:
            x[where] = sample_y1(T, constants.c1, rng, size=k)
        elif proto == Protocol.GENERAL:
            x[where] = sample_y2(rng, constants.y2_max, size=k)
        elif proto == Protocol.SEMI_SHALLOW:
            x[where] = sample_y3(T, constants.c3, rng, size=k)
        else:
            x[where] = sample_y4(T, rng, size=k)
    S.setflags(write=False)
    x.setflags(write=False)
    return IterationRandomness(t=t, S=S, x=x)


# -- transmission probability ----------------------------------------------


def deep_scale(T: int, d: int | np.ndarray, c4: float) -> np.ndarray | float:
    """``c4 * d * log log (T / d)`` with ``d`` clamped to at least 1."""
    d = np.maximum(np.asarray(d, dtype=float), 1.0)
    inner = np.maximum(np.log2(T / d), 1.0)
    return c4 * d * np.maximum(np.log2(inner), 1.0)


def transmit_prob(protocol: Protocol, T: int, x: int, d: int | np.ndarray = 0,
                  constants: Constants | None = None):
    """Probability that an active node transmits in a step with global value ``x``.

    ``d`` is the node's hop distance (only read by Deep-Broadcast, where it
    may be an array of distances).
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if protocol != Protocol.DEEP:
        return 2.0 ** -x
    c4 = (constants or Constants()).c4
    p = np.exp2(-x / deep_scale(T, d, c4))
    return float(p) if np.ndim(p) == 0 else p


# -- single-transmission kernel ---------------------------------------------


def poisson_binomial_pmf(probs: Sequence[float] | np.ndarray) -> np.ndarray:
    """Exact distribution of the number of successes of independent coins."""
    pmf = np.zeros(len(probs) + 1)
    pmf[0] = 1.0
    for i, p in enumerate(np.asarray(probs, dtype=float), start=1):
        pmf[1 : i + 1] = pmf[1 : i + 1] * (1.0 - p) + pmf[:i] * p
        pmf[0] *= 1.0 - p
    return pmf


def prob_exactly_one(probs: Sequence[float] | np.ndarray) -> float:
    return float(poisson_binomial_pmf(probs)[1]) if len(probs) else 0.0


def single_tx_bound(probs: Sequence[float] | np.ndarray) -> float:
    """``f * 4 ** -f`` with ``f`` the expected number of successes."""
    f = float(np.sum(probs))
    return f * 4.0 ** -f
