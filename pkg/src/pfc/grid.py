"""Periodic 2D grid with FFT-based discrete differential operators.

Convention: the forward transform (numpy ``fft2``) is unnormalized and the
backward transform carries the 1/M^2 factor.  Fields are stored as M x M
real arrays with ``values[i, j]`` the sample at ``(i*h, j*h)``.

The first-derivative multiplier is zeroed on the Nyquist mode so that
derivatives of real fields stay real; the second-derivative multiplier
keeps the full -nu^2 (M/2)^2 weight there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridMismatchError(ValueError):
    """Two fields do not share the same grid."""


class MeanZeroError(ValueError):
    """Operation requires a mean-zero field."""


@dataclass
class Grid2D:
    """Uniform periodic square grid: M points per direction on (0, L)^2."""

    M: int
    L: float

    def __post_init__(self):
        if self.M < 4 or self.M % 2 != 0:
            raise ValueError(f"M must be even and >= 4, got {self.M}")
        if self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L}")
        self.h = self.L / self.M
        self.nu = 2.0 * np.pi / self.L
        # integer wavenumbers in FFT layout: 0..M/2-1, -M/2..-1
        ell = np.fft.fftfreq(self.M, d=1.0 / self.M)
        lx, ly = np.meshgrid(ell, ell, indexing="ij")
        self.k2 = self.nu**2 * (lx**2 + ly**2)
        # first derivatives: drop the unmatched Nyquist mode
        dx = 1j * self.nu * lx
        dy = 1j * self.nu * ly
        dx[self.M // 2, :] = 0.0
        dy[:, self.M // 2] = 0.0
        self.ikx = dx
        self.iky = dy
        x = self.h * np.arange(self.M)
        self.X, self.Y = np.meshgrid(x, x, indexing="ij")

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def volume(self) -> float:
        return self.L * self.L

    def __eq__(self, other):
        return isinstance(other, Grid2D) and self.M == other.M and self.L == other.L


@dataclass
class Field:
    """Real periodic grid function."""

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.M, self.grid.M):
            raise ValueError(
                f"field shape {self.values.shape} does not match grid M={self.grid.M}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite entries")


def constant_field(grid: Grid2D, c: float) -> Field:
    return Field(grid, np.full((grid.M, grid.M), float(c)))


def _check_same_grid(f: Field, g: Field):
    if f.grid != g.grid:
        raise GridMismatchError("fields live on different grids")


def forward(f: Field) -> np.ndarray:
    """Unnormalized forward transform of a field."""
    return np.fft.fft2(f.values)


def backward(grid: Grid2D, coeffs: np.ndarray) -> Field:
    """Normalized backward transform; imaginary roundoff is discarded."""
    return Field(grid, np.fft.ifft2(coeffs).real)


def inner(f: Field, g: Field) -> float:
    """Discrete L2 inner product h^2 * sum(f * g)."""
    _check_same_grid(f, g)
    return f.grid.cell_area * float(np.sum(f.values * g.values))


def norms(f: Field) -> tuple[float, float, float]:
    """Return (l2, l4, linf) norms of the field."""
    a = f.grid.cell_area
    v = f.values
    l2 = float(np.sqrt(a * np.sum(v * v)))
    l4 = float((a * np.sum(v**4)) ** 0.25)
    linf = float(np.max(np.abs(v)))
    return l2, l4, linf


def l2_norm(f: Field) -> float:
    return norms(f)[0]


def mean(f: Field) -> float:
    return float(np.mean(f.values))


def laplacian(f: Field) -> Field:
    out = np.fft.ifft2(-f.grid.k2 * np.fft.fft2(f.values)).real
    return Field(f.grid, out)


def gradient(f: Field) -> tuple[Field, Field]:
    fh = np.fft.fft2(f.values)
    gx = np.fft.ifft2(f.grid.ikx * fh).real
    gy = np.fft.ifft2(f.grid.iky * fh).real
    return Field(f.grid, gx), Field(f.grid, gy)


def inv_laplacian(f: Field, gamma: int = 1) -> Field:
    """Apply (-Laplacian)^(-gamma); requires a mean-zero field.

    The zero mode of the output is set to zero exactly.
    """
    if gamma < 1:
        raise ValueError("gamma must be a positive integer")
    m = mean(f)
    linf = float(np.max(np.abs(f.values)))
    if abs(m) > 1e-12 * max(linf, 1e-300):
        raise MeanZeroError(f"field has mean {m:.3e}, expected mean zero")
    fh = np.fft.fft2(f.values)
    mult = np.zeros_like(f.grid.k2)
    nz = f.grid.k2 > 0
    mult[nz] = f.grid.k2[nz] ** (-float(gamma))
    out = np.fft.ifft2(mult * fh).real
    return Field(f.grid, out)


def hminus1_norm(f: Field) -> float:
    """Discrete H^{-1} norm, defined through the inverse Laplacian."""
    val = inner(inv_laplacian(f, 1), f)
    return float(np.sqrt(max(val, 0.0)))


def save_snapshot(path, f: Field, t: float):
    """Write `M L t` then M comma-separated rows (row i = y index i)."""
    with open(path, "w") as fh:
        fh.write(f"{f.grid.M} {f.grid.L:.17g} {t:.17g}\n")
        for j in range(f.grid.M):
            fh.write(",".join(f"{v:.17g}" for v in f.values[:, j]) + "\n")


def load_snapshot(path) -> tuple[Field, float]:
    with open(path) as fh:
        head = fh.readline().split()
        M, L, t = int(head[0]), float(head[1]), float(head[2])
        vals = np.empty((M, M))
        for j in range(M):
            vals[:, j] = [float(x) for x in fh.readline().split(",")]
    return Field(Grid2D(M, L), vals), t
