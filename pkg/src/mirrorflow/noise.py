"""Volatility models for the gradient noise and reproducible Wiener streams.

Every model in the family is diagonal: sigma(x, t) acts coordinate-wise, so
a run only ever needs the diagonal vector. The full matrix accessor exists
for inspection and tests. The sup over the feasible set of the induced norm
of sigma sigma^T reduces to the largest squared diagonal entry; for the
state-scaled model that sup is estimated from a stored dense sample of the
feasible set and inflated by a 1.01 safety factor.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .schedules import PowerLaw


class NoiseModel(ABC):
    """Diagonal volatility sigma(x, t); immutable and shareable."""

    dim: int

    @property
    @abstractmethod
    def is_zero(self) -> bool:
        """True when the model contributes no noise at all; integrators then
        skip noise arithmetic entirely so runs match the deterministic ones
        bit for bit."""

    @abstractmethod
    def diag(self, x: np.ndarray, t: float) -> float | np.ndarray:
        """Diagonal of sigma(x, t); a scalar means a multiple of the identity."""

    @abstractmethod
    def sigma_star_sq(self, t: float) -> float:
        """sup over feasible x of the induced norm of sigma(x,t) sigma(x,t)^T."""

    #: True when sigma_star_sq is a sampled estimate rather than exact
    sigma_star_is_estimate: bool = False

    def matrix(self, x: np.ndarray, t: float) -> np.ndarray:
        """sigma(x, t) as an explicit (dim, dim) matrix."""
        d = self.diag(x, t)
        if np.isscalar(d):
            return float(d) * np.eye(self.dim)
        return np.diag(np.asarray(d, dtype=float))

    def sigma_star(self, t: float) -> float:
        return math.sqrt(self.sigma_star_sq(t))

    def sigma_star_power(self) -> PowerLaw:
        """sigma_star(t) as a power law, when the model admits one."""
        raise ValueError(f"{type(self).__name__} has no power-law volatility bound")


class ZeroNoise(NoiseModel):
    """No noise: the stochastic systems degenerate to the deterministic ones."""

    def __init__(self, dim: int):
        self.dim = int(dim)

    @property
    def is_zero(self) -> bool:
        return True

    def diag(self, x, t):
        return 0.0

    def sigma_star_sq(self, t: float) -> float:
        return 0.0


class ScalarPowerLawNoise(NoiseModel):
    """sigma(x, t) = sigma0 * t^alpha * I."""

    def __init__(self, sigma0: float, alpha: float, dim: int):
        if sigma0 < 0:
            raise ValueError("sigma0 must be non-negative")
        self.sigma0 = float(sigma0)
        self.alpha = float(alpha)
        self.dim = int(dim)

    @property
    def is_zero(self) -> bool:
        return self.sigma0 == 0.0

    def diag(self, x, t):
        return self.sigma0 * t**self.alpha

    def sigma_star_sq(self, t: float) -> float:
        return (self.sigma0 * t**self.alpha) ** 2

    def sigma_star_power(self) -> PowerLaw:
        if self.sigma0 == 0.0:
            raise ValueError("zero volatility has no positive power-law form")
        return PowerLaw(self.sigma0, self.alpha)


class DiagonalPowerLawNoise(NoiseModel):
    """Per-coordinate power laws sigma_i(t) = s0_i * t^alpha_i."""

    def __init__(self, sigma0s, alphas):
        self.sigma0s = np.asarray(sigma0s, dtype=float)
        self.alphas = np.asarray(alphas, dtype=float)
        if self.sigma0s.shape != self.alphas.shape:
            raise ValueError("sigma0s and alphas must have matching shapes")
        if np.any(self.sigma0s < 0):
            raise ValueError("sigma0s must be non-negative")
        self.dim = self.sigma0s.shape[0]

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.sigma0s == 0.0))

    def diag(self, x, t):
        return self.sigma0s * t**self.alphas

    def sigma_star_sq(self, t: float) -> float:
        return float(np.max((self.sigma0s * t**self.alphas) ** 2))

    def sigma_star_power(self) -> PowerLaw:
        if np.all(self.alphas == self.alphas[0]):
            s0 = float(self.sigma0s.max())
            if s0 == 0.0:
                raise ValueError("zero volatility has no positive power-law form")
            return PowerLaw(s0, float(self.alphas[0]))
        raise ValueError("mixed exponents: the sup switches coordinates over time")


class StateScaledNoise(NoiseModel):
    """Scalar power law modulated by a bounded Lipschitz factor of the state:
    sigma(x, t) = base(t) * (1 + gain * tanh(<direction, x - center>)) * I
    with |gain| <= 1/2, keeping the factor inside [1/2, 3/2]."""

    sigma_star_is_estimate = True

    def __init__(
        self,
        base: ScalarPowerLawNoise,
        direction: np.ndarray,
        center: np.ndarray,
        gain: float = 0.5,
        sample_points: np.ndarray | None = None,
    ):
        if not 0.0 <= gain <= 0.5:
            raise ValueError("gain must lie in [0, 1/2]")
        self.base = base
        self.dim = base.dim
        self.direction = np.asarray(direction, dtype=float)
        self.center = np.asarray(center, dtype=float)
        self.gain = float(gain)
        if sample_points is None:
            # dense feasible sample frozen at construction; sigma_star sup
            # is taken over it and padded by 1%
            rng = np.random.default_rng(1234)
            sample_points = rng.dirichlet(np.ones(self.dim), size=4096)
        self._factor_sup = float(
            max(self._factor(p) for p in np.asarray(sample_points, dtype=float))
        )

    def _factor(self, x: np.ndarray) -> float:
        return 1.0 + self.gain * math.tanh(float(self.direction @ (x - self.center)))

    @property
    def is_zero(self) -> bool:
        return self.base.is_zero

    def diag(self, x, t):
        return self.base.diag(x, t) * self._factor(x)

    def sigma_star_sq(self, t: float) -> float:
        return self.base.sigma_star_sq(t) * (self._factor_sup**2) * 1.01


class NoiseStream:
    """Reproducible Gaussian increment stream for one trajectory.

    The generator state is a pure function of (base_seed, trajectory_index),
    and `position` counts scalar draws, so any prefix can be replayed by
    rebuilding the stream. Batch draws and repeated single-step draws
    produce the identical sequence.
    """

    def __init__(self, base_seed: int, trajectory_index: int = 0):
        self.base_seed = int(base_seed)
        self.trajectory_index = int(trajectory_index)
        self.position = 0
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.base_seed, self.trajectory_index]))
        )

    def standard_normals(self, count: int) -> np.ndarray:
        self.position += int(count)
        return self._gen.standard_normal(count)

    def wiener_increments(self, h: float, n: int) -> np.ndarray:
        """n independent N(0, h) increments, advancing the stream."""
        if h <= 0:
            raise ValueError("step size must be positive")
        return self.standard_normals(n) * math.sqrt(h)

    def spawn(self, trajectory_index: int) -> "NoiseStream":
        """Fresh stream for another trajectory under the same base seed."""
        return NoiseStream(self.base_seed, trajectory_index)

    def __repr__(self) -> str:
        return (
            f"NoiseStream(base_seed={self.base_seed}, "
            f"trajectory_index={self.trajectory_index}, position={self.position})"
        )


def make_noise(kind: str, sigma0: float, alpha: float, dim: int) -> NoiseModel:
    """Instantiate a noise model by kind name."""
    if kind == "zero" or sigma0 == 0.0:
        return ZeroNoise(dim)
    if kind == "scalar":
        return ScalarPowerLawNoise(sigma0, alpha, dim)
    if kind == "diagonal":
        return DiagonalPowerLawNoise(np.full(dim, sigma0), np.full(dim, alpha))
    if kind == "state-scaled":
        base = ScalarPowerLawNoise(sigma0, alpha, dim)
        rng = np.random.default_rng(99)
        direction = rng.normal(size=dim)
        direction /= np.linalg.norm(direction)
        return StateScaledNoise(base, direction, np.full(dim, 1.0 / dim))
    raise ValueError(f"unknown noise kind {kind!r}")
