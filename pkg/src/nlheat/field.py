"""Band-limited Fourier representation of E-valued fields on the d-torus.

Fields live on T^d = R^d / 2*pi*Z^d with normalised Lebesgue measure of
total mass 1, expanded in the basis e_k(x) = exp(i<k, x>).  Coefficients
are stored on the full wavenumber cube {-K, ..., K}^d with K = (M-1)/2,
one complex array per vector component.  All operators here act mode-wise
except the pointwise product, which goes through an oversampled physical
grid (2/3-rule dealiasing) so that products are exact on the retained band.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy import fft as sfft

#: tolerance for validating the reality (Hermitian symmetry) condition
REALITY_TOL = 1e-12


def dealias_points(modes_per_axis: int, cubic: bool = False) -> int:
    """Smallest FFT-friendly physical grid with dealiasing headroom.

    Quadratic products need G >= ceil(3M/2); cubic contractions need
    G >= 2M.
    """
    need = 2 * modes_per_axis if cubic else math.ceil(3 * modes_per_axis / 2)
    return sfft.next_fast_len(need)


@dataclass(frozen=True)
class TorusGrid:
    """Wavenumber cube and oversampled evaluation grid for one torus.

    Attributes:
        dim: spatial dimension d >= 1.
        modes_per_axis: odd M; wavenumbers run over {-(M-1)/2, ..., (M-1)/2}.
        points_per_axis: G >= M physical points per axis.  Defaults to the
            smallest fast size with quadratic dealiasing headroom.
    """

    dim: int
    modes_per_axis: int
    points_per_axis: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.modes_per_axis < 1 or self.modes_per_axis % 2 == 0:
            raise ValueError(
                f"modes_per_axis must be odd and positive, got {self.modes_per_axis}")
        if self.points_per_axis == 0:
            object.__setattr__(
                self, "points_per_axis", dealias_points(self.modes_per_axis))
        if self.points_per_axis < self.modes_per_axis:
            raise ValueError("points_per_axis must be >= modes_per_axis")

    @property
    def half_band(self) -> int:
        """Largest representable wavenumber K = (M-1)/2 per axis."""
        return (self.modes_per_axis - 1) // 2

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """1d integer wavenumbers -K..K (the storage order of each k axis)."""
        return np.arange(-self.half_band, self.half_band + 1)

    def axis_wavenumbers(self, axis: int) -> np.ndarray:
        """Wavenumbers along ``axis`` shaped for broadcasting over the cube."""
        shape = [1] * self.dim
        shape[axis] = self.modes_per_axis
        return self.wavenumbers.reshape(shape)

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|k|^2 on the full cube, shape (M,)*dim."""
        out = np.zeros((self.modes_per_axis,) * self.dim)
        for axis in range(self.dim):
            out = out + self.axis_wavenumbers(axis).astype(float) ** 2
        return out

    @property
    def mode_shape(self) -> tuple[int, ...]:
        return (self.modes_per_axis,) * self.dim

    def quadratic_headroom(self) -> bool:
        return self.points_per_axis >= math.ceil(3 * self.modes_per_axis / 2)

    def cubic_headroom(self) -> bool:
        return self.points_per_axis >= 2 * self.modes_per_axis


@dataclass(frozen=True)
class SpectralField:
    """E-valued trigonometric polynomial stored as Fourier coefficients.

    ``coeffs`` has shape (components, M, ..., M) with the k axes ordered
    -K..K.  Fields are immutable; every operation returns a new instance.
    """

    grid: TorusGrid
    coeffs: np.ndarray

    def __post_init__(self):
        expect = self.grid.mode_shape
        if self.coeffs.ndim != self.grid.dim + 1 or self.coeffs.shape[1:] != expect:
            raise ValueError(
                f"coeffs shape {self.coeffs.shape} does not match grid "
                f"(components, {expect})")
        if not np.iscomplexobj(self.coeffs):
            object.__setattr__(self, "coeffs", self.coeffs.astype(complex))

    @property
    def components(self) -> int:
        return self.coeffs.shape[0]

    # -- construction helpers ------------------------------------------------

    @classmethod
    def zero(cls, grid: TorusGrid, components: int = 1) -> "SpectralField":
        return cls(grid, np.zeros((components,) + grid.mode_shape, complex))

    @classmethod
    def constant(cls, grid: TorusGrid, values) -> "SpectralField":
        values = np.atleast_1d(np.asarray(values, dtype=complex))
        field = cls.zero(grid, len(values))
        centre = (slice(None),) + (grid.half_band,) * grid.dim
        field.coeffs[centre] = values
        return field

    @classmethod
    def from_components(cls, parts: "list[SpectralField]") -> "SpectralField":
        grid = parts[0].grid
        if any(p.grid != grid for p in parts):
            raise ValueError("component fields live on different grids")
        return cls(grid, np.concatenate([p.coeffs for p in parts], axis=0))

    def component(self, a: int) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs[a:a + 1])

    # -- reality -------------------------------------------------------------

    def reality_defect(self) -> float:
        """max |f_{-k} - conj(f_k)| over all components and modes."""
        flipped = np.flip(self.coeffs, axis=tuple(range(1, self.coeffs.ndim)))
        return float(np.max(np.abs(self.coeffs - np.conj(flipped))))

    def is_real(self, tol: float = REALITY_TOL) -> bool:
        scale = 1.0 + float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 1.0
        return self.reality_defect() <= tol * scale

    # -- linear operators ----------------------------------------------------

    def heat(self, t: float) -> "SpectralField":
        """Heat semigroup: multiply each coefficient by exp(-|k|^2 t)."""
        if t < 0:
            raise ValueError(f"heat semigroup needs t >= 0, got {t}")
        if t == 0:
            return self
        return SpectralField(self.grid, self.coeffs * np.exp(-self.grid.k_squared * t))

    def derivative(self, axis: int) -> "SpectralField":
        """Partial derivative along ``axis`` (0-based): f_k -> i*k_axis*f_k."""
        if not 0 <= axis < self.grid.dim:
            raise ValueError(f"axis {axis} out of range for dim {self.grid.dim}")
        mult = 1j * self.grid.axis_wavenumbers(axis)
        return SpectralField(self.grid, self.coeffs * mult)

    def project_band(self, radius: float) -> "SpectralField":
        """Zero all coefficients with Euclidean |k| > radius."""
        if radius < 0:
            raise ValueError("radius must be >= 0")
        mask = self.grid.k_squared <= radius * radius + 1e-9
        return SpectralField(self.grid, np.where(mask, self.coeffs, 0.0))

    def zero_mode(self, tol: float = REALITY_TOL) -> np.ndarray:
        """Spatial mean (f^a_0)_a as a real vector in E."""
        centre = (slice(None),) + (self.grid.half_band,) * self.grid.dim
        vals = self.coeffs[centre]
        scale = 1.0 + float(np.max(np.abs(self.coeffs)))
        if np.max(np.abs(vals.imag)) > tol * scale:
            raise ValueError("zero mode has non-negligible imaginary part")
        return vals.real.copy()

    def remove_mean(self) -> "SpectralField":
        """Project onto zero-mean fields (zero the k=0 coefficient)."""
        out = self.coeffs.copy()
        centre = (slice(None),) + (self.grid.half_band,) * self.grid.dim
        out[centre] = 0.0
        return SpectralField(self.grid, out)

    def rotate(self) -> "SpectralField":
        """Phase rotation: multiply by +i for k_1 > 0, -i for k_1 < 0.

        Applied per component; preserves the reality condition.
        """
        k1 = self.grid.axis_wavenumbers(0)
        mult = np.where(k1 > 0, 1j, np.where(k1 < 0, -1j, 1.0 + 0j))
        return SpectralField(self.grid, self.coeffs * mult)

    def scaled(self, factor: complex) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * factor)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        if self.grid != other.grid:
            raise ValueError("grid mismatch")
        return SpectralField(self.grid, self.coeffs - other.coeffs)


# -- transforms ---------------------------------------------------------------

def _band_indices(grid: TorusGrid, points: int) -> tuple[np.ndarray, ...]:
    pos = grid.wavenumbers % points
    return np.ix_(*([pos] * grid.dim))


def synthesize_coeffs(coeffs: np.ndarray, grid: TorusGrid,
                      points: int | None = None) -> np.ndarray:
    """Inverse transform of a stack of coefficient cubes onto the G^d grid.

    ``coeffs`` may have arbitrary leading axes; the trailing ``dim`` axes
    must be the wavenumber cube.  Returns complex values at the uniform
    grid x_j = 2*pi*j/G.
    """
    G = points or grid.points_per_axis
    if G < grid.modes_per_axis:
        raise ValueError("points must be >= modes_per_axis")
    lead = coeffs.shape[:-grid.dim]
    full = np.zeros(lead + (G,) * grid.dim, complex)
    full[(Ellipsis,) + _band_indices(grid, G)] = coeffs
    axes = tuple(range(len(lead), len(lead) + grid.dim))
    return sfft.ifftn(full, axes=axes) * G ** grid.dim


def synthesize(field: SpectralField, points: int | None = None) -> np.ndarray:
    """Pointwise values of the field on the uniform G^d grid (complex)."""
    return synthesize_coeffs(field.coeffs, field.grid, points)


def synthesize_real(field: SpectralField, points: int | None = None,
                    tol: float = 1e-10) -> np.ndarray:
    """As :func:`synthesize` but validates and drops the imaginary part."""
    vals = synthesize(field, points)
    scale = 1.0 + float(np.max(np.abs(vals)))
    if np.max(np.abs(vals.imag)) > tol * scale:
        raise ValueError("field is not real to tolerance")
    return vals.real


def analyze_values(values: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Forward transform; exact inverse of synthesis on band-limited data."""
    lead = values.ndim - grid.dim
    G = values.shape[-1]
    if values.shape[lead:] != (G,) * grid.dim:
        raise ValueError("physical array is not a uniform cube")
    if G < grid.modes_per_axis:
        raise ValueError("physical grid coarser than the wavenumber band")
    axes = tuple(range(lead, values.ndim))
    full = sfft.fftn(np.asarray(values, complex), axes=axes) / G ** grid.dim
    return full[(Ellipsis,) + _band_indices(grid, G)]


def analyze(values: np.ndarray, grid: TorusGrid) -> SpectralField:
    """Build a SpectralField from physical values, shape ([nc,] G, ..., G)."""
    values = np.asarray(values)
    if values.ndim == grid.dim:
        values = values[None]
    return SpectralField(grid, analyze_values(values, grid))


def pointwise_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased componentwise product of two band-limited fields.

    Exact Fourier coefficients on the retained band; requires quadratic
    oversampling headroom on the shared grid.
    """
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if f.components != g.components:
        raise ValueError("component count mismatch")
    if not f.grid.quadratic_headroom():
        raise ValueError(
            "insufficient oversampling for a dealiased product: need "
            f"G >= ceil(3M/2), have G = {f.grid.points_per_axis}")
    vals = synthesize(f) * synthesize(g)
    return SpectralField(f.grid, analyze_values(vals, f.grid))
