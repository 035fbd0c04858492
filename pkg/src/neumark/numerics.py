"""Small dense linear algebra used throughout the package.

Everything here works on plain ``numpy`` arrays. Single-qubit operators are
2x2 ``complex128`` arrays; the helpers below validate and canonicalize them.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NotNormalized, NotUnitary

UNITARY_TOL = 1e-10
NORM_TOL = 1e-9
# entries below this are treated as zero when fixing singular-vector phases
_PHASE_EPS = 1e-12
# below this one Euler angle is redundant and is folded into alpha
_DEGENERATE_EPS = 1e-14


def as_mat2(m) -> np.ndarray:
    """Return ``m`` as a finite 2x2 complex array (a copy)."""
    arr = np.array(m, dtype=np.complex128)
    if arr.shape != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def max_abs(m) -> float:
    """Max-norm (largest absolute entry)."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def unitarity_error(u) -> float:
    u = np.asarray(u)
    return max_abs(dagger(u) @ u - np.eye(u.shape[0]))


def wrap_angle(x: float) -> float:
    """Map an angle into (-pi, pi]."""
    r = math.pi - ((math.pi - x) % (2 * math.pi))
    # x a hair above pi rounds to exactly -pi
    return r + 2 * math.pi if r <= -math.pi else r


def rz(angle: float) -> np.ndarray:
    half = 0.5 * angle
    return np.array([[np.exp(-1j * half), 0], [0, np.exp(1j * half)]])


def ry(angle: float) -> np.ndarray:
    c, s = math.cos(0.5 * angle), math.sin(0.5 * angle)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


class Svd2Result(NamedTuple):
    left: np.ndarray
    singulars: tuple[float, float]
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.left @ np.diag(self.singulars) @ self.right


def _leading_phase(vec: np.ndarray) -> complex:
    for z in vec:
        if abs(z) > _PHASE_EPS:
            return z / abs(z)
    return 1.0


def svd2(m) -> Svd2Result:
    """Singular value decomposition ``m = left @ diag(s) @ right`` of a 2x2 matrix.

    Singular values come out in descending order. The phase freedom is fixed
    so that the first non-negligible entry of every left singular vector
    (column of ``left``) is real and non-negative; the matching row of
    ``right`` absorbs the compensating phase. For a zero singular value the
    right singular vector is normalized the same way on its own.
    """
    m = as_mat2(m)
    left, s, right = np.linalg.svd(m)
    left = left.astype(np.complex128)
    right = right.astype(np.complex128)
    for k in range(2):
        p = _leading_phase(left[:, k])
        left[:, k] *= np.conj(p)
        right[k, :] *= p
        if s[k] <= _PHASE_EPS:
            # right singular vector is conj(row); same leading-phase rule
            right[k, :] *= np.conj(_leading_phase(right[k, :]))
    return Svd2Result(left, (float(s[0]), float(s[1])), right)


class ZyzAngles(NamedTuple):
    """``u = exp(i*delta) * Rz(alpha) @ Ry(beta) @ Rz(gamma)``."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def matrix(self) -> np.ndarray:
        return zyz_matrix(self.alpha, self.beta, self.gamma, self.delta)


def zyz_matrix(alpha: float, beta: float, gamma: float, delta: float = 0.0) -> np.ndarray:
    return np.exp(1j * delta) * (rz(alpha) @ ry(beta) @ rz(gamma))


def zyz_decompose(u) -> ZyzAngles:
    """Euler decomposition of a single-qubit unitary.

    Returns angles with ``beta`` in [0, pi] and ``alpha``, ``gamma``, ``delta``
    in (-pi, pi].

    Raises:
        NotUnitary: if ``u`` deviates from unitarity by more than 1e-10.
    """
    u = as_mat2(u)
    err = unitarity_error(u)
    if err > UNITARY_TOL:
        raise NotUnitary(f"matrix is not unitary (error {err:.3e})")
    v = u * np.exp(-0.5j * np.angle(np.linalg.det(u)))
    beta = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    total = 2.0 * float(np.angle(v[1, 1]))
    diff = 2.0 * float(np.angle(v[1, 0]))
    if abs(v[1, 0]) < _DEGENERATE_EPS:
        alpha, gamma = wrap_angle(total), 0.0
    elif abs(v[0, 0]) < _DEGENERATE_EPS:
        alpha, gamma = wrap_angle(diff), 0.0
    else:
        alpha = wrap_angle(0.5 * (total + diff))
        gamma = wrap_angle(0.5 * (total - diff))
    # wrapping may flip the sign of an Rz factor; fit the phase against u
    w = rz(alpha) @ ry(beta) @ rz(gamma)
    delta = float(np.angle(np.sum(np.conj(w) * u)))
    return ZyzAngles(alpha, beta, gamma, wrap_angle(delta))


def fidelity(psi, phi) -> float:
    """Pure-state overlap ``|<psi|phi>|^2``."""
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    phi = np.asarray(phi, dtype=np.complex128).ravel()
    if psi.shape != phi.shape:
        raise DimensionMismatch(f"dimensions differ: {psi.size} vs {phi.size}")
    for v in (psi, phi):
        if abs(np.vdot(v, v).real - 1.0) > NORM_TOL:
            raise NotNormalized("state vector is not normalized")
    return float(min(1.0, abs(np.vdot(psi, phi)) ** 2))


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _phase_fixed_qr(z: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(z, mode="reduced")
    d = np.diag(r)
    d = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return q * d[np.newaxis, :]


def random_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed ``dim x dim`` unitary, deterministic in ``seed``."""
    if dim < 1:
        raise ValueError("dim must be positive")
    rng = np.random.default_rng(seed)
    return _phase_fixed_qr(_gaussian(rng, (dim, dim)))


def random_isometry(rows: int, cols: int, seed: int) -> np.ndarray:
    """``rows x cols`` matrix with orthonormal columns (thin QR of a Gaussian)."""
    if not 1 <= cols <= rows:
        raise ValueError("need 1 <= cols <= rows")
    rng = np.random.default_rng(seed)
    return _phase_fixed_qr(_gaussian(rng, (rows, cols)))
