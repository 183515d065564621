"""Mild-solution integrator for the nonlinear heat equation.

The stepping is in integrating-factor form: the heat semigroup is applied
exactly in Fourier space and only the nonlinearity N(u) = B(u, Du) + P(u)
is treated explicitly, either with exponential Euler

    u_{t+h} = P_h u_t + h P_h N(u_t)

or with the two-stage ETD-RK2 scheme built from the phi functions
phi1(z) = (e^z - 1)/z and phi2(z) = (e^z - 1 - z)/z^2 at z = -|k|^2 h.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import SpectralField, TorusGrid, analyze_values, synthesize_coeffs
from .nonlinearity import NonlinearitySpec

SCHEMES = ("etd-rk2", "exponential-euler")


@dataclass(frozen=True)
class SolveConfig:
    """Time grid and safeguards for one solve."""

    t_end: float
    steps: int
    scheme: str = "etd-rk2"
    blowup_threshold: float = 1e8
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")


@dataclass
class Trajectory:
    """Snapshots, densely recorded zero-mode path, and blow-up status."""

    times: list
    fields: list
    zero_mode_times: np.ndarray
    zero_mode_path: np.ndarray           # (n_recorded, dim_E)
    status: str = "completed"            # "completed" | "blewup"
    blowup_time: float | None = None

    def zero_mode_sup(self) -> float:
        return float(np.max(np.linalg.norm(self.zero_mode_path, axis=1)))


def nonlinear_rhs_coeffs(coeffs: np.ndarray, grid: TorusGrid,
                         spec: NonlinearitySpec) -> tuple[np.ndarray, float]:
    """Fourier coefficients of B(u, Du) + P(u) and the physical sup of u.

    Tensor contractions are done in physical space on the oversampled grid;
    the result is analysed back onto the working band (dealiased for the
    polynomial degrees actually present).
    """
    if spec.has_cubic() and not grid.cubic_headroom():
        raise ValueError("cubic nonlinearity needs G >= 2M oversampling")
    if spec.has_quadratic() and not grid.quadratic_headroom():
        raise ValueError("quadratic nonlinearity needs G >= ceil(3M/2)")
    u_phys = synthesize_coeffs(coeffs, grid).real       # (nE, G..)
    sup_u = float(np.max(np.abs(u_phys))) if u_phys.size else 0.0
    out = np.zeros_like(u_phys)
    if np.any(spec.B):
        kmults = np.stack([1j * grid.axis_wavenumbers(i) * np.ones(grid.mode_shape)
                           for i in range(grid.dim)])
        du = synthesize_coeffs(kmults[:, None] * coeffs[None], grid).real
        out += np.einsum("icab,a...,ib...->c...", spec.B, u_phys, du)
    if np.any(spec.p0):
        out += spec.p0.reshape((-1,) + (1,) * grid.dim)
    if np.any(spec.p1):
        out += np.einsum("ca,a...->c...", spec.p1, u_phys)
    if np.any(spec.p2):
        out += np.einsum("cab,a...,b...->c...", spec.p2, u_phys, u_phys)
    if spec.has_cubic():
        out += np.einsum("cabe,a...,b...,e...->c...",
                         spec.p3, u_phys, u_phys, u_phys)
    return analyze_values(out, grid), sup_u


def evaluate_rhs_nonlinear(u: SpectralField, spec: NonlinearitySpec) -> SpectralField:
    """B(u, Du) + P(u) as a spectral field."""
    coeffs, _ = nonlinear_rhs_coeffs(u.coeffs, u.grid, spec)
    return SpectralField(u.grid, coeffs)


def _phi1(z: np.ndarray) -> np.ndarray:
    out = np.ones_like(z)
    nz = z != 0
    out[nz] = np.expm1(z[nz]) / z[nz]
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    out = np.full_like(z, 0.5)
    nz = np.abs(z) > 1e-6
    out[nz] = (np.expm1(z[nz]) - z[nz]) / z[nz] ** 2
    small = ~nz & (z != 0)
    out[small] = 0.5 + z[small] / 6.0 + z[small] ** 2 / 24.0
    return out


def solve(u0: SpectralField, spec: NonlinearitySpec,
          config: SolveConfig) -> Trajectory:
    """Integrate the flow from u0 over [0, t_end].

    The zero-mode vector is recorded at every step; spectral snapshots are
    taken at the step boundaries closest to the requested snapshot times
    (t = 0 and t = t_end are always included).
    """
    grid = u0.grid
    if spec.dim != grid.dim:
        raise ValueError("nonlinearity and field dimension mismatch")
    if spec.dim_E != u0.components:
        raise ValueError("nonlinearity and field component mismatch")
    h = config.t_end / config.steps
    centre = (slice(None),) + (grid.half_band,) * grid.dim
    k2 = grid.k_squared
    decay = np.exp(-k2 * h)
    z = -k2 * h
    phi1 = _phi1(z)
    phi2 = _phi2(z)

    snap_steps = {0, config.steps}
    for t in config.snapshot_times:
        snap_steps.add(int(round(min(max(t, 0.0), config.t_end) / h)))

    u = u0.coeffs.copy()
    times, fields = [], []
    zt = [0.0]
    zpath = [u[centre].real.copy()]
    status, blowup_time = "completed", None

    def record_snapshot(step):
        if step in snap_steps:
            times.append(step * h)
            fields.append(SpectralField(grid, u.copy()))

    record_snapshot(0)
    for step in range(1, config.steps + 1):
        n0, sup_u = nonlinear_rhs_coeffs(u, grid, spec)
        if not np.isfinite(sup_u) or sup_u > config.blowup_threshold:
            status, blowup_time = "blewup", (step - 1) * h
            break
        if config.scheme == "exponential-euler":
            u = decay * (u + h * n0)
        else:
            stage = decay * u + h * phi1 * n0
            n1, _ = nonlinear_rhs_coeffs(stage, grid, spec)
            u = stage + h * phi2 * (n1 - n0)
        if not np.all(np.isfinite(u)):
            status, blowup_time = "blewup", step * h
            break
        zt.append(step * h)
        zpath.append(u[centre].real.copy())
        record_snapshot(step)

    return Trajectory(times, fields, np.asarray(zt), np.asarray(zpath),
                      status, blowup_time)


def picard_nonlinearity(u0: SpectralField, t: float,
                        spec: NonlinearitySpec) -> SpectralField:
    """Quadratic first-iterate term B(P_t u0, D P_t u0) (P excluded)."""
    if t <= 0:
        raise ValueError("t must be positive")
    quad = NonlinearitySpec.from_parts(spec.dim, spec.dim_E, B=spec.B)
    return evaluate_rhs_nonlinear(u0.heat(t), quad)


def remainder_fields(trajectory: Trajectory, u0: SpectralField, drift) -> list:
    """Per-snapshot remainder R_t = u_t - P_t u0 - I_t as spectral fields.

    ``drift`` maps t to the constant-in-space vector I_t in E.
    """
    out = []
    grid = u0.grid
    centre = (slice(None),) + (grid.half_band,) * grid.dim
    for t, f in zip(trajectory.times, trajectory.fields):
        coeffs = f.coeffs - u0.heat(t).coeffs
        coeffs[centre] -= np.asarray(drift(t), dtype=complex)
        out.append(SpectralField(grid, coeffs))
    return out


def remainder_norms(trajectory: Trajectory, u0: SpectralField, drift,
                    alpha: float, partition=None) -> np.ndarray:
    """Hoelder C^alpha norms of the remainder at the snapshot times."""
    from .besov import holder_norm
    return np.asarray([holder_norm(r, alpha, partition)
                       for r in remainder_fields(trajectory, u0, drift)])
