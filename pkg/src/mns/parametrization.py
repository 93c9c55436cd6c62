"""Smooth parametrization of N x N unitaries by phases and mixing angles.

The chart is

    U(phi, theta) = D(phi_diag) * G_{(0,1)} * G_{(0,2)} * ... * G_{(N-2,N-1)},

where D = diag(exp(i*phi_d)) and each Givens factor G_{(i,j)}(theta, phi)
acts on the (i, j) plane as

    [[cos(theta),              -exp(+i*phi) sin(theta)],
     [exp(-i*phi) sin(theta),   cos(theta)            ]].

Pairs (i, j), i < j, are ordered lexicographically; the product is applied
right to left (the last pair acts on a vector first).  Parameter counts are
N(N+1)/2 phases (N diagonal + one per pair) and N(N-1)/2 angles, N**2 real
numbers in total.  All parameters live on the real line; the chart is smooth
and periodic, and ``realize`` of the all-zero vector is exactly the identity.

Packed vector layout (used by the optimizer and finite differences):
``[diagonal phases | pair phases (lex) | angles (lex)]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ValidationError

__all__ = [
    "UnitaryParams",
    "num_phases",
    "num_angles",
    "plane_pairs",
    "zero_params",
    "random_params",
    "realize",
    "realize_with_partials",
    "pack",
    "unpack",
]


def num_phases(dim: int) -> int:
    return dim * (dim + 1) // 2


def num_angles(dim: int) -> int:
    return dim * (dim - 1) // 2


@lru_cache(maxsize=None)
def plane_pairs(dim: int) -> tuple[tuple[int, int], ...]:
    """All index pairs (i, j) with i < j in lexicographic order."""
    return tuple((i, j) for i in range(dim) for j in range(i + 1, dim))


@dataclass(frozen=True)
class UnitaryParams:
    """Chart coordinates of one unitary.

    phases: length dim*(dim+1)//2, the dim diagonal phases followed by one
        phase per plane pair in lexicographic order.
    angles: length dim*(dim-1)//2, one mixing angle per pair, same order.
    """

    dim: int
    phases: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"dim must be >= 1, got {self.dim}")
        phases = np.asarray(self.phases, dtype=np.float64)
        angles = np.asarray(self.angles, dtype=np.float64)
        if phases.shape != (num_phases(self.dim),):
            raise ValidationError(
                f"expected {num_phases(self.dim)} phases for dim={self.dim}, "
                f"got shape {phases.shape}"
            )
        if angles.shape != (num_angles(self.dim),):
            raise ValidationError(
                f"expected {num_angles(self.dim)} angles for dim={self.dim}, "
                f"got shape {angles.shape}"
            )
        if not (np.all(np.isfinite(phases)) and np.all(np.isfinite(angles))):
            raise ValidationError("parameters must be finite")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "angles", angles)


def zero_params(dim: int) -> UnitaryParams:
    return UnitaryParams(dim, np.zeros(num_phases(dim)), np.zeros(num_angles(dim)))


def pack(params: UnitaryParams) -> np.ndarray:
    return np.concatenate([params.phases, params.angles])


def unpack(dim: int, x: np.ndarray) -> UnitaryParams:
    x = np.asarray(x, dtype=np.float64)
    np_, na = num_phases(dim), num_angles(dim)
    if x.shape != (np_ + na,):
        raise ValidationError(f"packed vector must have length {np_ + na}, got {x.shape}")
    return UnitaryParams(dim, x[:np_].copy(), x[np_:].copy())


def random_params(
    dim: int,
    angle_norm: float,
    phase_norm: float = 0.0,
    seed=None,
) -> UnitaryParams:
    """Draw parameters with Euclidean norms pinned exactly.

    The angle (and phase) vector points in a uniformly random direction and is
    rescaled so its 2-norm equals ``angle_norm`` (``phase_norm``) to machine
    precision.  ``angle_norm=0`` gives the identity chart point.
    """
    if angle_norm < 0 or phase_norm < 0:
        raise ValidationError("norms must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def sphere(n: int, radius: float) -> np.ndarray:
        if n == 0 or radius == 0.0:
            return np.zeros(n)
        v = rng.standard_normal(n)
        return v * (radius / np.linalg.norm(v))

    return UnitaryParams(dim, sphere(num_phases(dim), phase_norm), sphere(num_angles(dim), angle_norm))


def realize(params: UnitaryParams) -> np.ndarray:
    """Evaluate the chart: return the N x N unitary for these coordinates.

    realize(zero_params(N)) is exactly the identity (entries 0 and 1, no
    rounding); in general ||U^dag U - I||_F stays at the 1e-14 level.
    """
    n = params.dim
    pairs = plane_pairs(n)
    diag_phases = params.phases[:n]
    pair_phases = params.phases[n:]
    u = np.eye(n, dtype=np.complex128)
    # Right-to-left: the lexicographically last factor is applied first.
    for idx in range(len(pairs) - 1, -1, -1):
        i, j = pairs[idx]
        th = params.angles[idx]
        c, s = np.cos(th), np.sin(th)
        if s == 0.0 and c == 1.0:
            continue
        e = np.exp(1j * pair_phases[idx])
        ri = u[i].copy()
        rj = u[j]
        u[i] = c * ri - e * s * rj
        u[j] = np.conj(e) * s * ri + c * rj
    if np.any(diag_phases != 0.0):
        u = np.exp(1j * diag_phases)[:, None] * u
    return u


def _factor_matrices(params: UnitaryParams) -> list[np.ndarray]:
    n = params.dim
    pair_phases = params.phases[n:]
    mats = [np.diag(np.exp(1j * params.phases[:n]))]
    for idx, (i, j) in enumerate(plane_pairs(n)):
        th, ph = params.angles[idx], pair_phases[idx]
        g = np.eye(n, dtype=np.complex128)
        c, s = np.cos(th), np.sin(th)
        e = np.exp(1j * ph)
        g[i, i] = c
        g[i, j] = -e * s
        g[j, i] = np.conj(e) * s
        g[j, j] = c
        mats.append(g)
    return mats


def realize_with_partials(params: UnitaryParams) -> tuple[np.ndarray, np.ndarray]:
    """Return (U, dU) with dU[k] = dU/dx_k in packed-vector order.

    Partials are exact per-factor derivatives assembled from prefix/suffix
    products of the chart factors.
    """
    n = params.dim
    pairs = plane_pairs(n)
    k = len(pairs)
    factors = _factor_matrices(params)
    m = len(factors)

    prefix = [np.eye(n, dtype=np.complex128)]
    for f in factors[:-1]:
        prefix.append(prefix[-1] @ f)
    suffix = [np.eye(n, dtype=np.complex128)] * m
    acc = np.eye(n, dtype=np.complex128)
    for idx in range(m - 1, -1, -1):
        suffix[idx] = acc
        acc = factors[idx] @ acc
    u = acc  # full product

    pair_phases = params.phases[n:]
    out = np.zeros((n * n, n, n), dtype=np.complex128)

    # Diagonal phases: dU/dphi_d = i * E_dd * U (D is the leftmost factor).
    for d in range(n):
        out[d, d, :] = 1j * u[d, :]

    # Packed layout: [diag phases | pair phases | angles].
    for idx, (i, j) in enumerate(pairs):
        th, ph = params.angles[idx], pair_phases[idx]
        c, s = np.cos(th), np.sin(th)
        e = np.exp(1j * ph)
        left = prefix[idx + 1][:, (i, j)]
        right = suffix[idx + 1][(i, j), :]
        d_ph = np.array([[0.0, -1j * e * s], [-1j * np.conj(e) * s, 0.0]])
        d_th = np.array([[-s, -e * c], [np.conj(e) * c, -s]])
        out[n + idx] = left @ d_ph @ right
        out[n + k + idx] = left @ d_th @ right
    return u, out
