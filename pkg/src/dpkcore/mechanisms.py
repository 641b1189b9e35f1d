"""Seeded Laplace/geometric noise and the multidimensional AboveThreshold engine."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

_MAX_CHUNK = 4096


class NoiseOracle:
    """Reproducible noise source.

    All samples come from inverse-CDF transforms of one stream of uniforms
    produced by ``numpy.random.default_rng(seed)``, so a seed fixes every draw.
    ``position`` counts samples handed out (each Laplace or geometric draw is
    one unit), which lets callers check how much randomness was consumed.

    With ``zero_noise=True`` every Laplace draw is exactly 0 and
    :meth:`laplace_cdf` is the CDF of the point mass at 0. Geometric draws
    still use the uniform stream.
    """

    def __init__(self, seed: int | tuple[int, ...] | None = 0, zero_noise: bool = False):
        self.seed = seed
        self.zero_noise = zero_noise
        self.position = 0
        self._rng = np.random.default_rng(seed)
        self._buf: list[float] = []
        self._chunk = 16

    @property
    def mode(self) -> str:
        return "zero-override" if self.zero_noise else "laplace"

    def spawn(self, key: int) -> NoiseOracle:
        """Independent child stream determined by this oracle's seed and ``key``."""
        base = self.seed
        if base is None:
            base = int(self._rng.integers(2**63))
            self.seed = base
        entropy = list(base) if isinstance(base, tuple) else [base]
        return NoiseOracle(seed=(*entropy, key), zero_noise=self.zero_noise)

    def _uniform_open(self) -> float:
        """Uniform on the open interval (0, 1)."""
        while True:
            if not self._buf:
                self._buf = self._rng.random(self._chunk).tolist()
                self._buf.reverse()
                self._chunk = min(2 * self._chunk, _MAX_CHUNK)
            u = self._buf.pop()
            if u > 0.0:
                return u

    def laplace(self, scale: float) -> float:
        if not scale > 0:
            raise ValueError(f"Laplace scale must be positive, got {scale}")
        self.position += 1
        if self.zero_noise:
            return 0.0
        u = self._uniform_open() - 0.5
        if u < 0:
            return scale * math.log1p(2.0 * u)
        return -scale * math.log1p(-2.0 * u)

    def laplace_array(self, scale: float, size: int) -> np.ndarray:
        """``size`` independent Laplace draws; same values as repeated :meth:`laplace`."""
        if not scale > 0:
            raise ValueError(f"Laplace scale must be positive, got {scale}")
        if self.zero_noise:
            self.position += size
            return np.zeros(size)
        return np.fromiter((self.laplace(scale) for _ in range(size)), dtype=float, count=size)

    def geometric(self, q: float) -> int:
        if not 0.0 < q <= 1.0:
            raise ValueError(f"geometric parameter must be in (0, 1], got {q}")
        self.position += 1
        if q == 1.0:
            return 1
        u = self._uniform_open()
        # P[X > k] = (1-q)^k, so X = 1 + floor(log U / log(1-q)).
        return 1 + int(math.log(u) / math.log1p(-q))

    def laplace_cdf(self, t: float, scale: float) -> float:
        """CDF of this oracle's Laplace noise at ``t``."""
        if self.zero_noise:
            if not scale > 0:
                raise ValueError(f"Laplace scale must be positive, got {scale}")
            return 1.0 if t >= 0 else 0.0
        return laplace_cdf(t, scale)


def laplace_sample(oracle: NoiseOracle, scale: float) -> float:
    return oracle.laplace(scale)


def geometric_sample(oracle: NoiseOracle, q: float) -> int:
    return oracle.geometric(q)


def laplace_cdf(t: float, scale: float) -> float:
    """``Pr[Lap(scale) <= t]``."""
    if not scale > 0:
        raise ValueError(f"Laplace scale must be positive, got {scale}")
    if t >= 0:
        return 1.0 - 0.5 * math.exp(-t / scale)
    return 0.5 * math.exp(t / scale)


class Answer(enum.Enum):
    ABOVE = "⊤"
    BELOW = "⊥"
    HALTED = "halted"

    def __repr__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MatConfig:
    epsilon: float
    delta_sensitivity: float
    thresholds: tuple[float, ...]

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.delta_sensitivity > 0:
            raise ValueError(f"sensitivity must be positive, got {self.delta_sensitivity}")
        object.__setattr__(self, "thresholds", tuple(float(x) for x in self.thresholds))

    @property
    def d(self) -> int:
        return len(self.thresholds)

    @property
    def threshold_scale(self) -> float:
        return 2.0 * self.delta_sensitivity / self.epsilon

    @property
    def query_scale(self) -> float:
        return 4.0 * self.delta_sensitivity / self.epsilon


@dataclass
class MatState:
    noisy_thresholds: list[float]
    halted: list[bool]
    queries_answered: int = 0
    history: list[list[Answer]] = field(default_factory=list)


def mat_init(config: MatConfig, oracle: NoiseOracle) -> MatState:
    """Perturb each threshold once with ``Lap(2Δ/ε)``."""
    scale = config.threshold_scale
    noisy = [t + oracle.laplace(scale) for t in config.thresholds]
    return MatState(noisy_thresholds=noisy, halted=[False] * config.d)


def mat_query(
    state: MatState, config: MatConfig, oracle: NoiseOracle, f: Sequence[float]
) -> list[Answer]:
    """Answer one vector query.

    The caller must guarantee that, across edge-neighboring inputs, the query
    vector changes by at most ``config.delta_sensitivity`` in l1 norm; the
    engine has no way to check this.

    Each live coordinate gets fresh ``Lap(4Δ/ε)`` noise and answers ABOVE
    (and halts) when ``f_j + noise >= T̂_j``. Halted coordinates answer HALTED
    without drawing noise.
    """
    if len(f) != config.d:
        raise ValueError(f"query has {len(f)} coordinates, expected {config.d}")
    scale = config.query_scale
    out = []
    for j, fj in enumerate(f):
        if state.halted[j]:
            out.append(Answer.HALTED)
            continue
        if fj + oracle.laplace(scale) >= state.noisy_thresholds[j]:
            state.halted[j] = True
            out.append(Answer.ABOVE)
        else:
            out.append(Answer.BELOW)
    state.queries_answered += 1
    state.history.append(out)
    return out
