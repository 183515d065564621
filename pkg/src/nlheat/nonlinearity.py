"""Bilinear and polynomial nonlinearity tensors for the heat equation.

The right-hand side of the evolution is Delta u + B(u, Du) + P(u) with
B(u, Du) = sum_i B_i(u, d_i u) bilinear and P polynomial of degree <= 3.
Tensors are stored output-first:

    B[i, c, a, b]      coefficient of T^c in B_i(T^a, T^b)
    p0[c], p1[c, a], p2[c, a, b], p3[c, a, b, e]

with p2, p3 symmetrised over their input slots.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial

import numpy as np

#: structure constants of so(3): [e_i, e_j] = eps_{ijk} e_k
SO3 = np.zeros((3, 3, 3))
for _i, _j, _k in [(0, 1, 2), (1, 2, 0), (2, 0, 1)]:
    SO3[_i, _j, _k] = 1.0
    SO3[_j, _i, _k] = -1.0


def _symmetrize(tensor: np.ndarray, slots: int) -> np.ndarray:
    """Symmetrise a p-tensor over its last ``slots`` input axes."""
    axes_in = list(range(1, slots + 1))
    out = np.zeros_like(tensor)
    for perm in permutations(axes_in):
        out += np.transpose(tensor, (0, *perm))
    return out / factorial(slots)


@dataclass(frozen=True)
class NonlinearitySpec:
    """Tensor data for B and P on a fixed basis of E."""

    dim: int
    dim_E: int
    B: np.ndarray          # (dim, dim_E, dim_E, dim_E)
    p0: np.ndarray         # (dim_E,)
    p1: np.ndarray         # (dim_E, dim_E)
    p2: np.ndarray         # (dim_E, dim_E, dim_E), symmetric in slots
    p3: np.ndarray         # (dim_E, dim_E, dim_E, dim_E), symmetric in slots

    def __post_init__(self):
        n = self.dim_E
        shapes = {
            "B": (self.dim, n, n, n), "p0": (n,), "p1": (n, n),
            "p2": (n, n, n), "p3": (n, n, n, n),
        }
        for name, shape in shapes.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")

    @classmethod
    def from_parts(cls, dim: int, dim_E: int, B=None, p0=None, p1=None,
                   p2=None, p3=None) -> "NonlinearitySpec":
        n = dim_E
        B = np.zeros((dim, n, n, n)) if B is None else np.asarray(B, float)
        p0 = np.zeros(n) if p0 is None else np.asarray(p0, float)
        p1 = np.zeros((n, n)) if p1 is None else np.asarray(p1, float)
        p2 = np.zeros((n, n, n)) if p2 is None else _symmetrize(np.asarray(p2, float), 2)
        p3 = np.zeros((n, n, n, n)) if p3 is None else _symmetrize(np.asarray(p3, float), 3)
        return cls(dim, n, B, p0, p1, p2, p3)

    def has_quadratic(self) -> bool:
        return bool(np.any(self.B) or np.any(self.p2))

    def has_cubic(self) -> bool:
        return bool(np.any(self.p3))

    def bilinear_on_basis(self, i: int, a: int, b: int) -> np.ndarray:
        """B_i(T^a, T^b) as a vector in E (0-based indices)."""
        return self.B[i, :, a, b].copy()

    def permuted(self, perm) -> "NonlinearitySpec":
        """Relabel the basis of E by the permutation ``perm`` (new <- old)."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        B = self.B[:, perm][:, :, perm][:, :, :, perm]
        del inv
        return NonlinearitySpec(
            self.dim, self.dim_E, B,
            self.p0[perm], self.p1[perm][:, perm],
            self.p2[perm][:, perm][:, :, perm],
            self.p3[perm][:, perm][:, :, perm][:, :, :, perm])


def asymmetry_witness(spec: NonlinearitySpec):
    """First (i, a, b), 0-based, with B_i(T^a, T^b) != B_i(T^b, T^a).

    Returns None when every B_i is symmetric, i.e. B is a total derivative.
    Exact tensor comparison, no tolerance.
    """
    for i in range(spec.dim):
        for a in range(spec.dim_E):
            for b in range(spec.dim_E):
                if a != b and np.any(spec.B[i, :, a, b] != spec.B[i, :, b, a]):
                    return (i, a, b)
    return None


def drift_direction(spec: NonlinearitySpec, a: int, b: int) -> np.ndarray:
    """Coefficient of E[Z_t] in the mean zero-mode velocity of the flow.

    For the adversarial pair with Y^b the rotation of X^a, the resonant
    zero-mode terms contribute  -Z_t * B_1(T^a,T^b) + Z_t * B_1(T^b,T^a),
    so the mean drift of the spatial mean points along
    B_1(T^b, T^a) - B_1(T^a, T^b).
    """
    return spec.bilinear_on_basis(0, b, a) - spec.bilinear_on_basis(0, a, b)


# -- presets -------------------------------------------------------------------

def _structure_constants(algebra) -> np.ndarray:
    if isinstance(algebra, str):
        if algebra == "so3":
            return SO3.copy()
        raise ValueError(f"unknown Lie algebra {algebra!r}")
    f = np.asarray(algebra, float)
    if f.ndim != 3 or f.shape[0] != f.shape[1] or f.shape[1] != f.shape[2]:
        raise ValueError("structure constants must form a cubic tensor")
    return f


def preset_antisym2(dim: int = 1) -> NonlinearitySpec:
    """Minimal asymmetric instance: dim_E = 2, B_1(x, y) = (x1 y2 - x2 y1) T^1."""
    B = np.zeros((dim, 2, 2, 2))
    B[0, 0, 0, 1] = 1.0
    B[0, 0, 1, 0] = -1.0
    return NonlinearitySpec.from_parts(dim, 2, B=B)


def preset_dym(dim: int = 3, algebra="so3") -> NonlinearitySpec:
    """Gauge heat flow with the divergence gauge-fixing term.

    E = g^dim with basis T^(j, alpha) = e_alpha dx^j, flattened as
    j * dim(g) + alpha.  The quadratic part implements
        B_i(X, V) = sum_j 2 [X^i, V^j] dx^j - sum_l [X^l, V^l] dx^i
    so that sum_i B_i(u, d_i u) reproduces the commutator transport and
    gauge-fixing terms, and the cubic part is P(X)^j = sum_i [X^i,[X^i,X^j]].
    """
    f = _structure_constants(algebra)
    if not np.any(f):
        raise ValueError("abelian Lie algebra gives a symmetric B; no witness")
    ng = f.shape[0]
    n = dim * ng

    def idx(j, alpha):
        return j * ng + alpha

    B = np.zeros((dim, n, n, n))
    for i in range(dim):
        for alpha in range(ng):
            for beta in range(ng):
                for gamma in range(ng):
                    fv = f[alpha, beta, gamma]
                    if fv == 0.0:
                        continue
                    for j in range(dim):
                        # 2 [X^i, V^j] dx^j
                        B[i, idx(j, gamma), idx(i, alpha), idx(j, beta)] += 2.0 * fv
                        # - [X^l, V^l] dx^i  (l renamed j)
                        B[i, idx(i, gamma), idx(j, alpha), idx(j, beta)] -= fv

    p3 = np.zeros((n, n, n, n))
    for j in range(dim):
        for i in range(dim):
            for alpha in range(ng):
                for beta in range(ng):
                    for gamma in range(ng):
                        for mu in range(ng):
                            for delta in range(ng):
                                val = f[beta, gamma, mu] * f[alpha, mu, delta]
                                if val != 0.0:
                                    p3[idx(j, delta), idx(i, alpha),
                                       idx(i, beta), idx(j, gamma)] += val
    return NonlinearitySpec.from_parts(dim, n, B=B, p3=p3)


def preset_dymh(dim: int = 3, algebra="so3",
                higgs_cubic: bool = True) -> NonlinearitySpec:
    """Gauge flow coupled to an adjoint Higgs component.

    E = g^dim + g; the Higgs block gets the transport coupling
    2 [X^i, d_i Phi] and the cubic terms sum_i [X^i, [X^i, Phi]] and,
    optionally, -|Phi|^2 Phi.
    """
    f = _structure_constants(algebra)
    if not np.any(f):
        raise ValueError("abelian Lie algebra gives a symmetric B; no witness")
    ng = f.shape[0]
    gauge = preset_dym(dim, algebra)
    n = (dim + 1) * ng

    def idx(j, alpha):
        return j * ng + alpha

    def hidx(alpha):
        return dim * ng + alpha

    B = np.zeros((dim, n, n, n))
    B[:, :dim * ng, :dim * ng, :dim * ng] = gauge.B
    p3 = np.zeros((n, n, n, n))
    p3[:dim * ng, :dim * ng, :dim * ng, :dim * ng] = gauge.p3

    for i in range(dim):
        for alpha in range(ng):
            for beta in range(ng):
                for gamma in range(ng):
                    fv = f[alpha, beta, gamma]
                    if fv != 0.0:
                        B[i, hidx(gamma), idx(i, alpha), hidx(beta)] += 2.0 * fv
    for i in range(dim):
        for alpha in range(ng):
            for beta in range(ng):
                for gamma in range(ng):
                    for mu in range(ng):
                        for delta in range(ng):
                            val = f[beta, gamma, mu] * f[alpha, mu, delta]
                            if val != 0.0:
                                p3[hidx(delta), idx(i, alpha),
                                   idx(i, beta), hidx(gamma)] += val
    if higgs_cubic:
        for alpha in range(ng):
            for beta in range(ng):
                p3[hidx(alpha), hidx(beta), hidx(beta), hidx(alpha)] -= 1.0
    return NonlinearitySpec.from_parts(dim, n, B=B, p3=p3)


def preset(name: str, dim: int | None = None, algebra="so3") -> NonlinearitySpec:
    """Named nonlinearity presets: ``antisym2``, ``dym``, ``dymh``."""
    if name == "antisym2":
        return preset_antisym2(dim or 1)
    if name == "dym":
        return preset_dym(dim or 3, algebra)
    if name == "dymh":
        return preset_dymh(dim or 3, algebra)
    raise ValueError(f"unknown preset {name!r}")
