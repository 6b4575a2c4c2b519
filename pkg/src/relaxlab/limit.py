"""Parabolic limit dynamics: filtration/porous-medium equation, Darcy flux,
and the first-order corrector driven by the limit trajectory."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, BlowupGuard, SamplingTooCoarse, VacuumError
from .pressure import PressureLaw
from .spectral import Grid, ScalarField, VectorField, dealias, gradient, l2_norm

RHO_MIN = 0.1


@dataclass
class LimitBundle:
    """Filtration-equation trajectory with the Darcy flux attached."""

    grid: Grid
    times: np.ndarray
    rho: list
    q: list
    diagnostics: dict = field(default_factory=dict)

    def rho_values_at(self, t: float) -> np.ndarray:
        """Linear-in-time interpolation of the density nodal values."""
        ts = self.times
        if t <= ts[0]:
            return self.rho[0].values
        if t >= ts[-1]:
            return self.rho[-1].values
        j = int(np.searchsorted(ts, t)) - 1
        w = (t - ts[j]) / (ts[j + 1] - ts[j])
        return (1.0 - w) * self.rho[j].values + w * self.rho[j + 1].values


@dataclass
class CorrectorBundle:
    grid: Grid
    times: np.ndarray
    rho1: list
    q1: list
    rho1_init: ScalarField


def darcy_flux(rho_star: ScalarField, law: PressureLaw) -> VectorField:
    """q* = -grad p(rho*)."""
    p = dealias(ScalarField(rho_star.grid, law.p(rho_star.values)))
    return -gradient(p)


def _check_samples(grid: Grid, sample_times):
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or len(times) < 1 or np.any(np.diff(times) <= 0):
        raise ValueError("sample_times must be strictly increasing")
    if times[0] != 0.0:
        raise ValueError("sample_times must start at t=0")
    return times


def solve_porous_medium(rho0: ScalarField, T: float, dt: float, law: PressureLaw,
                        sample_times=None, order: int = 2) -> LimitBundle:
    """Semi-implicit spectral stepping of d_t rho = Lap p(rho).

    The constant-coefficient part p'(1) Lap is implicit; the remainder
    Lap(p(rho) - p'(1) rho) is explicit and dealiased.
    """
    grid = rho0.grid
    if sample_times is None:
        sample_times = np.linspace(0.0, T, 51)
    times = _check_samples(grid, sample_times)
    if rho0.values.min() <= RHO_MIN:
        raise VacuumError(f"min(rho0) = {rho0.values.min():.3e} <= {RHO_MIN}")

    p1 = law.dp1
    k2 = grid.k2
    mask = grid.dealias_mask

    def explicit_hat(rho_phys):
        g = law.p(rho_phys) - p1 * rho_phys
        return -k2 * np.where(mask, np.fft.fftn(g), 0.0)

    r_hat = np.fft.fftn(rho0.values).astype(complex)
    mean_hat = r_hat[(0,) * grid.d]
    rho_phys = np.array(rho0.values)
    hist = None  # (r_hat, explicit) of previous step
    guard = 10.0 * l2_norm(rho0 - 1.0) + 1e-10

    rhos = [rho0]
    fluxes = [darcy_flux(rho0, law)]
    t = 0.0
    h_prev = None
    for t_target in times[1:]:
        span = t_target - t
        nsub = max(1, int(np.ceil(span / dt - 1e-12)))
        h = span / nsub
        if h_prev is not None and abs(h - h_prev) > 1e-13 * max(h, h_prev):
            hist = None
        h_prev = h
        for _ in range(nsub):
            ex = explicit_hat(rho_phys)
            if order == 2 and hist is not None:
                r_prev, ex_prev = hist
                r_new = ((4.0 * r_hat - r_prev) / (2.0 * h) + 2.0 * ex - ex_prev) \
                    / (1.5 / h + p1 * k2)
            else:
                r_new = (r_hat + h * ex) / (1.0 + h * p1 * k2)
            hist = (r_hat, ex)
            r_hat = r_new
            # mean conservation is exact in the algebra; pin out rounding drift
            r_hat[(0,) * grid.d] = mean_hat
            rho_phys = np.fft.ifftn(r_hat).real
            if rho_phys.min() <= RHO_MIN:
                raise VacuumError(f"min(rho) = {rho_phys.min():.3e} at t ~ {t:.4g}")
        t = t_target
        snap = ScalarField(grid, rho_phys)
        if l2_norm(snap - 1.0) > guard:
            raise BlowupGuard(f"limit solution left the smallness band at t={t:.4g}")
        rhos.append(snap)
        fluxes.append(darcy_flux(snap, law))

    diag = {"mass": np.array([r.mean() for r in rhos])}
    return LimitBundle(grid, times, rhos, fluxes, diag)


def solve_corrector(limit: LimitBundle, rho1_init: ScalarField, dt: float,
                    law: PressureLaw, sample_times=None) -> CorrectorBundle:
    """Linear variable-coefficient filtration solve d_t rho1 = Lap(p'(rho*) rho1).

    The stored rho* samples are interpolated linearly in time; they must be at
    least as fine as 10*dt.
    """
    grid = limit.grid
    if rho1_init.grid != grid:
        raise AlignmentError("rho1 initial datum on a different grid")
    spacing = float(np.max(np.diff(limit.times))) if len(limit.times) > 1 else 0.0
    if spacing > 10.0 * dt * (1.0 + 1e-9):
        raise SamplingTooCoarse(
            f"limit samples spaced {spacing:g} but corrector dt = {dt:g}"
        )
    if sample_times is None:
        sample_times = limit.times
    times = _check_samples(grid, sample_times)

    p1 = law.dp1
    k2 = grid.k2
    mask = grid.dealias_mask

    def explicit_hat(rho1_phys, t):
        coeff = law.dp(limit.rho_values_at(t))
        g = (coeff - p1) * rho1_phys
        return -k2 * np.where(mask, np.fft.fftn(g), 0.0)

    def q1_of(rho1_field, t):
        coeff = law.dp(limit.rho_values_at(t))
        prod = dealias(ScalarField(grid, coeff * rho1_field.values))
        return -gradient(prod)

    r_hat = np.fft.fftn(rho1_init.values).astype(complex)
    mean_hat = r_hat[(0,) * grid.d]
    rho1_phys = np.array(rho1_init.values)
    hist = None

    rho1s = [rho1_init]
    q1s = [q1_of(rho1_init, 0.0)]
    t = 0.0
    h_prev = None
    for t_target in times[1:]:
        span = t_target - t
        nsub = max(1, int(np.ceil(span / dt - 1e-12)))
        h = span / nsub
        if h_prev is not None and abs(h - h_prev) > 1e-13 * max(h, h_prev):
            hist = None
        h_prev = h
        for _ in range(nsub):
            ex = explicit_hat(rho1_phys, t)
            if hist is not None:
                r_prev, ex_prev = hist
                r_new = ((4.0 * r_hat - r_prev) / (2.0 * h) + 2.0 * ex - ex_prev) \
                    / (1.5 / h + p1 * k2)
            else:
                r_new = (r_hat + h * ex) / (1.0 + h * p1 * k2)
            hist = (r_hat, ex)
            r_hat = r_new
            r_hat[(0,) * grid.d] = mean_hat
            rho1_phys = np.fft.ifftn(r_hat).real
            t += h
        t = t_target
        snap = ScalarField(grid, rho1_phys)
        rho1s.append(snap)
        q1s.append(q1_of(snap, t))

    return CorrectorBundle(grid, times, rho1s, q1s, rho1_init)


def expand(limit: LimitBundle, corrector: CorrectorBundle, eps: float):
    """Asymptotic expansion (rho* + eps rho1, q* + eps q1) per sample."""
    if len(limit.times) != len(corrector.times) or not np.allclose(
        limit.times, corrector.times, rtol=0.0, atol=1e-12
    ):
        raise AlignmentError("limit and corrector sample grids differ")
    rho_a = [r + eps * r1 for r, r1 in zip(limit.rho, corrector.rho1)]
    q_a = [q + eps * q1 for q, q1 in zip(limit.q, corrector.q1)]
    return rho_a, q_a
