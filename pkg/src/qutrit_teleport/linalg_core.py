"""Dense complex linear algebra for qutrit pairs.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. This module adds
the Gell-Mann basis, a Kronecker product, a few structural predicates and a
cyclic Jacobi eigensolver for small Hermitian matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SQRT3 = np.sqrt(3.0)

HERMITIAN_TOL = 1e-10
MAX_SWEEPS = 100
OFFDIAG_REL_TOL = 1e-13
MULTIPLICITY_TOL = 1e-8


class NotHermitian(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


@lru_cache(maxsize=None)
def _gell_mann() -> tuple[np.ndarray, ...]:
    mats = []
    # (row, col) pairs for the symmetric / antisymmetric off-diagonal generators
    for j, k in ((0, 1), (0, 2), (1, 2)):
        sym = np.zeros((3, 3), dtype=complex)
        sym[j, k] = sym[k, j] = 1.0
        anti = np.zeros((3, 3), dtype=complex)
        anti[j, k] = -1j
        anti[k, j] = 1j
        mats.append(sym)
        mats.append(anti)
    l1, l2, l4, l5, l6, l7 = mats
    l3 = np.diag([1.0, -1.0, 0.0]).astype(complex)
    l8 = np.diag([1.0, 1.0, -2.0]).astype(complex) / SQRT3
    basis = (l1, l2, l3, l4, l5, l6, l7, l8)
    for m in basis:
        m.setflags(write=False)
    return basis


def gell_mann_basis() -> list[np.ndarray]:
    """Return the eight Gell-Mann matrices in the standard order.

    ``lambda_1, lambda_2`` couple levels 1-2, ``lambda_4, lambda_5`` couple 1-3,
    ``lambda_6, lambda_7`` couple 2-3, ``lambda_3 = diag(1, -1, 0)`` and
    ``lambda_8 = diag(1, 1, -2) / sqrt(3)``. All satisfy
    ``Tr(l_i l_j) = 2 delta_ij``. The returned arrays are read-only.
    """
    return list(_gell_mann())


def gell_mann_stack() -> np.ndarray:
    """The basis as a read-only ``(8, 3, 3)`` array, convenient for einsum."""
    return _gell_mann_stack()


@lru_cache(maxsize=None)
def _gell_mann_stack() -> np.ndarray:
    stack = np.array(_gell_mann())
    stack.setflags(write=False)
    return stack


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product ``a (x) b`` with the first factor as the slow index."""
    a = np.asarray(a)
    b = np.asarray(b)
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol)


def is_unitary(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m @ dagger(m) - np.eye(m.shape[0]))) <= tol)


def is_projector(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return is_hermitian(m, tol) and bool(np.max(np.abs(m @ m - m)) <= tol)


def is_psd(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    if not is_hermitian(m, tol):
        return False
    return bool(eig_hermitian(m).eigenvalues[0] >= -tol)


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition of a Hermitian matrix.

    ``eigenvalues`` are ascending; column ``i`` of ``eigenvectors`` belongs to
    ``eigenvalues[i]``. ``residual`` is ``max_i |H v_i - lambda_i v_i|``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float

    @property
    def max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def min(self) -> float:
        return float(self.eigenvalues[0])

    def grouped(self, tol: float = MULTIPLICITY_TOL) -> list[tuple[float, int]]:
        """Distinct eigenvalues with multiplicities.

        Consecutive eigenvalues within ``tol`` of the first member of a group
        are merged; the reported value is the group mean.
        """
        groups: list[list[float]] = []
        for value in self.eigenvalues:
            if groups and abs(value - groups[-1][0]) <= tol:
                groups[-1].append(float(value))
            else:
                groups.append([float(value)])
        return [(float(np.mean(g)), len(g)) for g in groups]


def _jacobi_rotation(h: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    hpq = h[p, q]
    mag = abs(hpq)
    if mag == 0.0:
        return
    phase = hpq / mag
    app = h[p, p].real
    aqq = h[q, q].real
    tau = (aqq - app) / (2.0 * mag)
    t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # J = diag(1, conj(phase)) @ [[c, s], [-s, c]] zeroes h[p, q] under J^H h J
    j = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
    idx = [p, q]
    h[:, idx] = h[:, idx] @ j
    h[idx, :] = dagger(j) @ h[idx, :]
    v[:, idx] = v[:, idx] @ j
    h[p, q] = h[q, p] = 0.0
    h[p, p] = h[p, p].real
    h[q, q] = h[q, q].real


def eig_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    The input is symmetrized as ``(H + H^H) / 2`` first. Sweeps stop once the
    off-diagonal Frobenius norm drops below ``1e-13 * ||H||_F``.

    Raises:
        NotHermitian: if ``H`` deviates from Hermitian by more than ``tol``.
        NoConvergence: if 100 sweeps do not reach the threshold.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {h.shape}")
    if not is_hermitian(h, tol):
        raise NotHermitian(
            f"matrix asymmetry {np.max(np.abs(h - dagger(h))):.3e} exceeds {tol:.1e}"
        )
    original = 0.5 * (h + dagger(h))
    work = original.copy()
    n = work.shape[0]
    vecs = np.eye(n, dtype=complex)
    scale = np.linalg.norm(original)
    threshold = OFFDIAG_REL_TOL * scale

    offdiag = ~np.eye(n, dtype=bool)

    def off_norm() -> float:
        return float(np.linalg.norm(work[offdiag]))

    for _ in range(MAX_SWEEPS):
        if off_norm() <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _jacobi_rotation(work, vecs, p, q)
    else:
        if off_norm() > threshold:
            raise NoConvergence(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")

    values = np.diag(work).real.copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vecs = vecs[:, order]
    residual = float(np.max(np.linalg.norm(original @ vecs - vecs * values, axis=0), initial=0.0))
    return Spectrum(values, vecs, residual)
