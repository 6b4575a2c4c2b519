"""Barotropic pressure laws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PressureLaw:
    """Gamma-law pressure p(rho) = a^2 rho^gamma with a > 0, gamma > 1.

    p' stays positive on any band of strictly positive densities, which is all
    the solvers require.
    """

    a: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.gamma <= 1:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")

    def p(self, rho):
        return self.a**2 * np.power(rho, self.gamma)

    def dp(self, rho):
        return self.a**2 * self.gamma * np.power(rho, self.gamma - 1.0)

    @property
    def dp1(self) -> float:
        """p'(1), the diffusion coefficient of the linearized limit equation."""
        return self.a**2 * self.gamma
