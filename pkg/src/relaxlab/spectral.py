"""Periodic tensor-product grids, real fields, and Fourier-multiplier calculus.

Fields live on [0, L)^d with N nodes per axis. Spectral coefficients follow the
numpy FFT layout; all derivative operators are diagonal multipliers, so the
operator identities (div grad = laplacian, curl grad = 0, ...) hold to rounding.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, MeanNotZero


class Grid:
    """Uniform periodic grid on [0, L)^d, N points per axis (N a power of two)."""

    def __init__(self, d: int, N: int, L: float = 2.0 * np.pi):
        if d not in (1, 2, 3):
            raise DimensionError(f"d must be 1, 2 or 3, got {d}")
        if N < 8 or (N & (N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 8, got {N}")
        if L <= 0:
            raise ValueError(f"L must be positive, got {L}")
        self.d = d
        self.N = N
        self.L = float(L)
        self.dx = self.L / N
        self.shape = (N,) * d
        self.cell_volume = self.dx**d

        # integer mode numbers n in [-N/2, N/2) and wavenumbers k = 2*pi*n/L
        n1d = np.fft.fftfreq(N, d=1.0 / N)
        k1d = 2.0 * np.pi * n1d / self.L
        self.k = []
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(d):
            sh = [1] * d
            sh[axis] = N
            self.k.append(k1d.reshape(sh))
            mask &= np.abs(n1d.reshape(sh)) <= N / 3.0
        self.k2 = sum(ki**2 for ki in self.k)
        self.dealias_mask = mask
        # inverse of |k|^2 with the zero mode excluded
        with np.errstate(divide="ignore"):
            inv = np.where(self.k2 > 0, 1.0 / np.where(self.k2 > 0, self.k2, 1.0), 0.0)
        self.inv_k2 = inv

    def nodes(self):
        """Coordinate arrays (sparse meshgrid) of the grid nodes."""
        x1d = np.arange(self.N) * self.dx
        if self.d == 1:
            return (x1d,)
        return np.meshgrid(*([x1d] * self.d), indexing="ij", sparse=True)

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.d == other.d
            and self.N == other.N
            and self.L == other.L
        )

    def __hash__(self):
        return hash((self.d, self.N, self.L))

    def __repr__(self):
        return f"Grid(d={self.d}, N={self.N}, L={self.L:g})"


class ScalarField:
    """Real scalar field over a Grid. Immutable after construction."""

    def __init__(self, grid: Grid, values: np.ndarray, hat: np.ndarray | None = None):
        values = np.array(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} != grid shape {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.values = values
        self.values.flags.writeable = False
        self._hat = hat

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "ScalarField":
        vals = np.fft.ifftn(hat).real
        return cls(grid, vals, hat=np.asarray(hat, dtype=complex))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "ScalarField":
        return cls(grid, func(*grid.nodes()) + np.zeros(grid.shape))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = np.fft.fftn(self.values)
        return self._hat

    def mean(self) -> float:
        return float(self.values.mean())

    def __add__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.grid, self.values + other.values)
        return ScalarField(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            return ScalarField(self.grid, self.values - other.values)
        return ScalarField(self.grid, self.values - other)

    def __rsub__(self, other):
        return ScalarField(self.grid, other - self.values)

    def __mul__(self, c):
        if isinstance(c, ScalarField):
            return ScalarField(self.grid, self.values * c.values)
        return ScalarField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarField(self.grid, -self.values)


class VectorField:
    """Real vector field with d components over a Grid. Immutable."""

    def __init__(self, grid: Grid, components: np.ndarray, hat: np.ndarray | None = None):
        comps = np.array(components, dtype=float)
        if comps.shape != (grid.d,) + grid.shape:
            raise ValueError(
                f"components shape {comps.shape} != {(grid.d,) + grid.shape}"
            )
        if not np.all(np.isfinite(comps)):
            raise ValueError("field values must be finite")
        self.grid = grid
        self.components = comps
        self.components.flags.writeable = False
        self._hat = hat

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "VectorField":
        comps = np.stack([np.fft.ifftn(h).real for h in hat])
        return cls(grid, comps, hat=np.asarray(hat, dtype=complex))

    @classmethod
    def from_scalars(cls, grid: Grid, scalars) -> "VectorField":
        return cls(grid, np.stack([np.asarray(s.values if isinstance(s, ScalarField) else s) for s in scalars]))

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((grid.d,) + grid.shape))

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = np.stack([np.fft.fftn(c) for c in self.components])
        return self._hat

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.components[i].copy())

    def __add__(self, other):
        if isinstance(other, VectorField):
            return VectorField(self.grid, self.components + other.components)
        return VectorField(self.grid, self.components + other)

    def __sub__(self, other):
        if isinstance(other, VectorField):
            return VectorField(self.grid, self.components - other.components)
        return VectorField(self.grid, self.components - other)

    def __mul__(self, c):
        if isinstance(c, ScalarField):
            return VectorField(self.grid, self.components * c.values)
        return VectorField(self.grid, self.components * c)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(self.grid, -self.components)


Field = ScalarField | VectorField


def _require_zero_mean(f: Field, what: str):
    if isinstance(f, ScalarField):
        comps = f.values[None]
    else:
        comps = f.components
    scale = np.sqrt(np.mean(comps**2))
    if scale == 0.0:
        return
    worst = max(abs(float(c.mean())) for c in comps)
    if worst > 1e-12 * scale:
        raise MeanNotZero(f"{what} requires a mean-zero field (|mean| = {worst:.3e})")


def gradient(f: ScalarField) -> VectorField:
    g = f.grid
    hat = np.stack([1j * ki * f.hat for ki in g.k])
    return VectorField.from_hat(g, hat)


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    hat = sum(1j * g.k[i] * v.hat[i] for i in range(g.d))
    return ScalarField.from_hat(g, hat)


def laplacian(f: ScalarField) -> ScalarField:
    return ScalarField.from_hat(f.grid, -f.grid.k2 * f.hat)


def curl(v: VectorField) -> VectorField:
    g = v.grid
    if g.d != 3:
        raise DimensionError(f"curl requires d=3, got d={g.d}")
    kx, ky, kz = g.k
    vx, vy, vz = v.hat
    hat = np.stack(
        [
            1j * (ky * vz - kz * vy),
            1j * (kz * vx - kx * vz),
            1j * (kx * vy - ky * vx),
        ]
    )
    return VectorField.from_hat(g, hat)


def dealias(f: Field) -> Field:
    """Zero all modes with any |n| > N/3 (2/3-rule)."""
    g = f.grid
    if isinstance(f, ScalarField):
        return ScalarField.from_hat(g, np.where(g.dealias_mask, f.hat, 0.0))
    return VectorField.from_hat(g, np.where(g.dealias_mask[None], f.hat, 0.0))


def fractional_op(f: ScalarField, sigma: float) -> ScalarField:
    """Apply the multiplier |k|^sigma, i.e. (-laplacian)^(sigma/2).

    The zero mode is annihilated for sigma != 0; negative exponents demand a
    mean-zero input.
    """
    g = f.grid
    if sigma == 0:
        return f
    if sigma < 0:
        _require_zero_mean(f, f"fractional_op(sigma={sigma})")
    kabs = np.sqrt(g.k2)
    with np.errstate(divide="ignore"):
        mult = np.where(g.k2 > 0, np.where(g.k2 > 0, kabs, 1.0) ** sigma, 0.0)
    return ScalarField.from_hat(g, mult * f.hat)


def inv_lap_gradient(f: ScalarField) -> VectorField:
    """Return grad(Lambda^-2 f); its divergence equals -f."""
    _require_zero_mean(f, "inv_lap_gradient")
    g = f.grid
    base = g.inv_k2 * f.hat
    hat = np.stack([1j * ki * base for ki in g.k])
    return VectorField.from_hat(g, hat)


def _norm_from_weight(f: Field, weight: np.ndarray) -> float:
    g = f.grid
    scale = g.L**g.d / float(g.N ** (2 * g.d))
    if isinstance(f, ScalarField):
        total = np.sum(weight * np.abs(f.hat) ** 2)
    else:
        total = np.sum(weight[None] * np.abs(f.hat) ** 2)
    return float(np.sqrt(scale * total))


def sobolev_norm(f: Field, s: float) -> float:
    """H^s norm with weight (1+|k|^2)^s; s=0 matches the L^2 quadrature norm."""
    return _norm_from_weight(f, (1.0 + f.grid.k2) ** s)


def hom_sobolev_norm(f: Field, s: float) -> float:
    """Homogeneous H^s norm with weight |k|^(2s); the zero mode is dropped."""
    if s < 0:
        _require_zero_mean(f, f"hom_sobolev_norm(s={s})")
    g = f.grid
    with np.errstate(divide="ignore"):
        w = np.where(g.k2 > 0, np.where(g.k2 > 0, g.k2, 1.0) ** s, 0.0)
    return _norm_from_weight(f, w)


def l2_norm(f: Field) -> float:
    return sobolev_norm(f, 0.0)
