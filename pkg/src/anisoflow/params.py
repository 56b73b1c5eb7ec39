"""Flow parameters (n, k, alpha, beta) and the derived constants."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .errors import DomainError

# |alpha - beta - k| below this counts as the critical regime
CRITICAL_EPS = 1e-12


@dataclass(frozen=True)
class FlowParams:
    """Speed ``r**(alpha/beta) * sigma_k**(1/beta)`` on hypersurfaces in R^(n+1)."""

    n: int
    k: int
    alpha: float
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        if int(self.k) != self.k or not 1 <= self.k <= self.n:
            raise DomainError(f"k must be an integer in [1, n={self.n}], got {self.k}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def gamma(self) -> float:
        return comb(self.n, self.k) ** (1.0 / self.beta)

    @property
    def excess(self) -> float:
        """alpha - beta - k; its sign decides the regime."""
        return self.alpha - self.beta - self.k

    @property
    def regime(self) -> str:
        e = self.excess
        if abs(e) <= CRITICAL_EPS:
            return "critical"
        return "super" if e > 0 else "sub"

    @property
    def qprime(self) -> float:
        """(alpha - k - beta) / beta, the exponent in the sphere solutions."""
        return 0.0 if self.regime == "critical" else self.excess / self.beta

    @property
    def grid_kind(self) -> str:
        return "periodic-circle" if self.n == 1 else "axisym-polar"
