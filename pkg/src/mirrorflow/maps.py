"""Mirror maps: convex conjugates, dual-to-primal gradients, and Bregman
divergences in the dual space.

Two geometries are provided. The entropic map acts on the probability
simplex with the (l1, linf) norm pair; its dual gradient is the softmax.
The Euclidean map acts on all of R^n with the (l2, l2) pair; its dual
gradient is the identity. Both are 1-strongly-convex potentials with a
1-Lipschitz conjugate gradient.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from .errors import BoundaryMinimizer, InfeasiblePoint

SIMPLEX_TOL = 1e-9
INTERIOR_THRESHOLD = 1e-8


def log_sum_exp(z: np.ndarray) -> float:
    """Numerically stable log(sum(exp(z))) via max subtraction."""
    m = float(np.max(z))
    return m + float(np.log(np.sum(np.exp(z - m))))


def softmax(z: np.ndarray) -> np.ndarray:
    """Stable softmax; invariant under adding a multiple of the ones vector."""
    e = np.exp(z - np.max(z))
    return e / e.sum()


class MirrorMap(ABC):
    """Strongly convex potential on a feasible set, exposed through its
    conjugate: potential values, conjugate values, the dual-to-primal
    gradient, and the dual Bregman divergence.

    Instances are immutable; every method is pure.
    """

    kind: str
    primal_norm_name: str
    dual_norm_name: str
    #: strong-convexity modulus of the potential w.r.t. the primal norm
    mu: float = 1.0
    #: Lipschitz constant of the conjugate gradient w.r.t. the norm pair
    lipschitz_grad_conjugate: float = 1.0

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dimension must be a positive integer")
        self.dim = int(dim)

    @abstractmethod
    def psi(self, x: np.ndarray) -> float:
        """Potential value at a feasible point."""

    @abstractmethod
    def psi_star(self, z: np.ndarray) -> float:
        """Conjugate value sup_x <z, x> - psi(x) at a dual point."""

    @abstractmethod
    def grad_psi_star(self, z: np.ndarray) -> np.ndarray:
        """Gradient of the conjugate; maps any dual point into the feasible set."""

    @abstractmethod
    def dual_projection(self, z: np.ndarray) -> np.ndarray:
        """Canonical dual representative with the same conjugate gradient."""

    @abstractmethod
    def dual_of(self, x: np.ndarray) -> np.ndarray:
        """A dual point z with grad_psi_star(z) == x, for strictly feasible x."""

    @abstractmethod
    def require_feasible(self, x: np.ndarray) -> None:
        """Raise InfeasiblePoint if x is outside the feasible set tolerance."""

    @abstractmethod
    def primal_norm(self, v: np.ndarray) -> float:
        """Reference norm on the primal space."""

    @abstractmethod
    def dual_norm(self, v: np.ndarray) -> float:
        """Norm dual to the primal reference norm."""

    @property
    @abstractmethod
    def diameter(self) -> float:
        """Primal-norm diameter of the feasible set (inf if unbounded)."""

    @property
    @abstractmethod
    def psi_max(self) -> float:
        """Supremum of the potential over the feasible set (inf if unbounded)."""

    @abstractmethod
    def sample_feasible(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw `count` feasible points, shape (count, dim)."""

    def bregman_div_star(self, z_prime: np.ndarray, z: np.ndarray) -> float:
        """Bregman divergence of the conjugate,
        psi_star(z') - psi_star(z) - <grad_psi_star(z), z' - z>. Non-negative."""
        z_prime = np.asarray(z_prime, dtype=float)
        z = np.asarray(z, dtype=float)
        return (
            self.psi_star(z_prime)
            - self.psi_star(z)
            - float(self.grad_psi_star(z) @ (z_prime - z))
        )

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim})"


class EntropicSimplexMap(MirrorMap):
    """Entropy-based map on the probability simplex.

    The potential is sum_i x_i log x_i + log n, shifted so it is
    non-negative with minimum 0 at the barycenter; the shift leaves the
    conjugate gradient (the softmax) untouched and the conjugate becomes
    log_sum_exp(z) - log n. Strong convexity w.r.t. l1 holds with modulus 1,
    and the softmax is 1-Lipschitz for the (l1, linf) pair.
    """

    kind = "entropic-simplex"
    primal_norm_name = "l1"
    dual_norm_name = "linf"

    def psi(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        self.require_feasible(x)
        xc = np.clip(x, 0.0, None)
        # x log x extended by 0 at x = 0
        terms = np.where(xc > 0.0, xc * np.log(np.where(xc > 0.0, xc, 1.0)), 0.0)
        return float(terms.sum()) + np.log(self.dim)

    def psi_star(self, z: np.ndarray) -> float:
        return log_sum_exp(np.asarray(z, dtype=float)) - np.log(self.dim)

    def grad_psi_star(self, z: np.ndarray) -> np.ndarray:
        return softmax(np.asarray(z, dtype=float))

    def dual_projection(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return z - z.mean()

    def dual_of(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self.require_feasible(x)
        if float(x.min()) < INTERIOR_THRESHOLD:
            raise BoundaryMinimizer(
                f"coordinate {float(x.min()):.3e} below interior threshold "
                f"{INTERIOR_THRESHOLD:g}; no finite dual anchor"
            )
        z = np.log(x)
        return z - z.mean()

    def require_feasible(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise InfeasiblePoint(f"expected shape ({self.dim},), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InfeasiblePoint("non-finite coordinates")
        if abs(float(x.sum()) - 1.0) > SIMPLEX_TOL:
            raise InfeasiblePoint(f"coordinates sum to {float(x.sum()):.12f}, not 1")
        if float(x.min()) < -SIMPLEX_TOL:
            raise InfeasiblePoint(f"negative coordinate {float(x.min()):.3e}")

    def primal_norm(self, v: np.ndarray) -> float:
        return float(np.abs(v).sum())

    def dual_norm(self, v: np.ndarray) -> float:
        return float(np.abs(v).max())

    @property
    def diameter(self) -> float:
        # l1 distance between any two vertices
        return 2.0

    @property
    def psi_max(self) -> float:
        # attained at the vertices
        return float(np.log(self.dim))

    def sample_feasible(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.dirichlet(np.ones(self.dim), size=count)

    def barycenter(self) -> np.ndarray:
        return np.full(self.dim, 1.0 / self.dim)


class EuclideanMap(MirrorMap):
    """Half squared l2 norm on all of R^n; the conjugate gradient is the
    identity, so the dynamics reduce to unconstrained ones."""

    kind = "euclidean"
    primal_norm_name = "l2"
    dual_norm_name = "l2"

    def psi(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        self.require_feasible(x)
        return 0.5 * float(x @ x)

    def psi_star(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return 0.5 * float(z @ z)

    def grad_psi_star(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float).copy()

    def dual_projection(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=float).copy()

    def dual_of(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        self.require_feasible(x)
        return x.copy()

    def require_feasible(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise InfeasiblePoint(f"expected shape ({self.dim},), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InfeasiblePoint("non-finite coordinates")

    def primal_norm(self, v: np.ndarray) -> float:
        return float(np.linalg.norm(v))

    def dual_norm(self, v: np.ndarray) -> float:
        return float(np.linalg.norm(v))

    @property
    def diameter(self) -> float:
        return float("inf")

    @property
    def psi_max(self) -> float:
        return float("inf")

    def sample_feasible(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.normal(size=(count, self.dim))


def make_map(kind: str, dim: int) -> MirrorMap:
    """Instantiate a mirror map by kind name."""
    if kind == "entropic-simplex":
        return EntropicSimplexMap(dim)
    if kind == "euclidean":
        return EuclideanMap(dim)
    raise ValueError(f"unknown mirror map kind {kind!r}")
