"""Configured initial-data families for the sweeps.

All densities are mean-one perturbations; preparation tags control whether the
momentum starts on the Darcy manifold.
"""

from __future__ import annotations

import numpy as np

from .euler import EulerState
from .maxwell import EMState, make_em_initial
from .pressure import PressureLaw
from .spectral import Grid, ScalarField, VectorField, gradient


def cosine_density(grid: Grid, delta: float, mode: int = 1) -> ScalarField:
    """rho = 1 + delta * cos(mode * 2 pi x1 / L) (+ transverse flavor in 3D)."""
    xs = grid.nodes()
    w = 2.0 * np.pi * mode / grid.L
    pert = np.cos(w * xs[0])
    if grid.d >= 2:
        pert = pert + 0.5 * np.cos(w * xs[1])
    if grid.d >= 3:
        pert = pert + 0.5 * np.cos(w * xs[2]) * np.cos(w * xs[0])
    return ScalarField(grid, 1.0 + delta * (pert + np.zeros(grid.shape)))


def bump_density(grid: Grid, delta: float, kmax: int = 3, seed: int = 0) -> ScalarField:
    """Band-limited random bump: modes with 0 < |n|_inf <= kmax, unit peak."""
    rng = np.random.default_rng(seed)
    hat = np.zeros(grid.shape, dtype=complex)
    n1d = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    sel = np.ones(grid.shape, dtype=bool)
    for axis in range(grid.d):
        sh = [1] * grid.d
        sh[axis] = grid.N
        sel &= np.abs(n1d.reshape(sh)) <= kmax
    idx = np.argwhere(sel)
    for ind in idx:
        hat[tuple(ind)] = rng.normal() + 1j * rng.normal()
    vals = np.fft.ifftn(hat).real
    vals -= vals.mean()
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals /= peak
    return ScalarField(grid, 1.0 + delta * vals)


def limit_density(grid: Grid, family: str, delta: float, mode: int = 1,
                  seed: int = 0) -> ScalarField:
    if family == "cosine":
        return cosine_density(grid, delta, mode)
    if family == "bump":
        return bump_density(grid, delta, kmax=max(mode, 1), seed=seed)
    raise ValueError(f"unknown data family {family!r}")


def mode_velocity(grid: Grid, amplitude: float, mode: int = 1) -> VectorField:
    """O(1) single-mode velocity along e1 (rotated per component in 3D)."""
    xs = grid.nodes()
    w = 2.0 * np.pi * mode / grid.L
    comps = np.zeros((grid.d,) + grid.shape)
    comps[0] = amplitude * np.cos(w * xs[0]) + np.zeros(grid.shape)
    if grid.d >= 2:
        comps[1] = amplitude * np.sin(w * xs[0]) + np.zeros(grid.shape)
    if grid.d >= 3:
        comps[2] = amplitude * np.cos(w * xs[1]) + np.zeros(grid.shape)
    return VectorField(grid, comps)


def corrector_init(grid: Grid, scenario: str, delta: float) -> ScalarField:
    """rho_{1,0}: either zero or a mode-2 cosine of amplitude delta."""
    if scenario == "zero":
        return ScalarField.zeros(grid)
    if scenario == "mode2":
        xs = grid.nodes()
        w = 4.0 * np.pi / grid.L
        return ScalarField(grid, delta * np.cos(w * xs[0]) + np.zeros(grid.shape))
    raise ValueError(f"unknown corrector scenario {scenario!r}")


def euler_initial(rho_star0: ScalarField, law: PressureLaw, preparedness: str,
                  eps: float, u_amp: float = 1.0, mode: int = 1,
                  rho1_init: ScalarField | None = None) -> EulerState:
    """Euler data for one ladder rung, matched to the limit datum rho_star0.

    ill:  rho0 = rho0*, q0 = rho0 * u0 / eps with an O(1) single-mode velocity
          (the momentum variable absorbs 1/eps under the diffusive scaling).
    well: rho0 = rho0* + eps * rho_{1,0}, q0 = -grad p(rho0*) exactly.
    """
    grid = rho_star0.grid
    if preparedness == "ill":
        u0 = mode_velocity(grid, u_amp, mode)
        q0 = VectorField(grid, rho_star0.values * u0.components / eps)
        return EulerState(rho_star0, q0)
    if preparedness == "well":
        rho0 = rho_star0
        if rho1_init is not None:
            rho0 = rho_star0 + eps * rho1_init
        p = ScalarField(grid, law.p(rho_star0.values))
        q0 = -gradient(p)
        return EulerState(rho0, q0)
    raise ValueError(f"unknown preparedness {preparedness!r}")


def em_initial(rho_star0: ScalarField, law: PressureLaw, Be, eps: float,
               u_amp: float = 0.1, mode: int = 1) -> EMState:
    """Euler-Maxwell data: matched density, compatible E0, B0 = Be."""
    grid = rho_star0.grid
    u0 = mode_velocity(grid, u_amp, mode)
    return make_em_initial(rho_star0, u0, Be)
