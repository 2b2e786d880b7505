"""States, measurements and structural operators for qutrit teleportation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg_core import HERMITIAN_TOL, dagger, gell_mann_stack, is_projector, is_unitary

OMEGA = np.exp(2j * np.pi / 3)


class OutOfRange(ValueError):
    pass


class InvalidProtocol(ValueError):
    pass


@dataclass(frozen=True)
class PureQutritState:
    """A unit vector in C^3 together with its five hyperspherical angles.

    Amplitudes are ``(c5 + i s5 c4, s5 s4 (c3 + i s3 c2), s5 s4 s3 s2 e^{i t1})``
    with ``theta = (t1, ..., t5)``; ``t1`` lies in ``[0, 2 pi)`` and the others
    in ``[0, pi]`` when recovered from amplitudes.
    """

    theta: tuple[float, float, float, float, float]
    amplitudes: np.ndarray


@dataclass(frozen=True)
class InputProjector:
    matrix: np.ndarray
    alpha: np.ndarray


@dataclass(frozen=True)
class MeasurementProtocol:
    """Nine projectors on Alice's two qutrits and Bob's nine correction unitaries.

    ``projectors`` has shape ``(9, 9, 9)``; ``corrections`` has shape ``(9, 3, 3)``.
    The first tensor factor of each projector is the unknown input particle.
    """

    projectors: np.ndarray
    corrections: np.ndarray

    def validate(self, tol: float = HERMITIAN_TOL) -> None:
        """Raise :class:`InvalidProtocol` unless this is a complete rank-1 measurement."""
        p = np.asarray(self.projectors)
        u = np.asarray(self.corrections)
        if p.shape != (9, 9, 9) or u.shape != (9, 3, 3):
            raise InvalidProtocol(f"bad protocol shapes {p.shape}, {u.shape}")
        for k in range(9):
            if not is_projector(p[k], tol) or abs(np.trace(p[k]) - 1.0) > tol:
                raise InvalidProtocol(f"outcome {k} is not a rank-1 projector")
            if not is_unitary(u[k], tol):
                raise InvalidProtocol(f"correction {k} is not unitary")
        if np.max(np.abs(p.sum(axis=0) - np.eye(9))) > tol:
            raise InvalidProtocol("projectors do not sum to the identity")


def amplitudes_from_angles(theta) -> np.ndarray:
    t1, t2, t3, t4, t5 = (float(x) for x in theta)
    s2, s3, s4, s5 = np.sin([t2, t3, t4, t5])
    c2, c3, c4, c5 = np.cos([t2, t3, t4, t5])
    return np.array(
        [
            c5 + 1j * s5 * c4,
            s5 * s4 * (c3 + 1j * s3 * c2),
            s5 * s4 * s3 * s2 * np.exp(1j * t1),
        ]
    )


def angles_from_amplitudes(amplitudes: np.ndarray) -> tuple[float, float, float, float, float]:
    """Invert :func:`amplitudes_from_angles` for a unit vector.

    Where a sine product vanishes the remaining angles are undetermined and
    come out as 0.
    """
    a = np.asarray(amplitudes, dtype=complex)
    x = np.array([a[0].real, a[0].imag, a[1].real, a[1].imag, a[2].real, a[2].imag])
    x /= np.linalg.norm(x)
    # tail[k] = |x[k:]|, computed from the back so it stays accurate
    tail = np.sqrt(np.cumsum(x[::-1] ** 2)[::-1])
    t5 = np.arctan2(tail[1], x[0])
    t4 = np.arctan2(tail[2], x[1])
    t3 = np.arctan2(tail[3], x[2])
    t2 = np.arctan2(tail[4], x[3])
    t1 = np.arctan2(x[5], x[4]) % (2 * np.pi)
    return (float(t1), float(t2), float(t3), float(t4), float(t5))


def pure_state(theta) -> PureQutritState:
    theta = tuple(float(x) for x in theta)
    if len(theta) != 5:
        raise ValueError("pure_state takes five angles")
    return PureQutritState(theta, amplitudes_from_angles(theta))


def haar_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` Haar-random unit vectors in C^3 as an ``(n, 3)`` array."""
    z = rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_haar(rng: np.random.Generator) -> PureQutritState:
    vec = haar_vectors(rng, 1)[0]
    return PureQutritState(angles_from_amplitudes(vec), vec)


def alpha_components(vectors: np.ndarray) -> np.ndarray:
    """Bloch components ``alpha_i = <phi| l_i |phi>`` for a batch of vectors."""
    v = np.asarray(vectors, dtype=complex)
    return np.einsum("...a,iab,...b->...i", v.conj(), gell_mann_stack(), v).real


def input_projector(phi: PureQutritState | np.ndarray) -> InputProjector:
    vec = phi.amplitudes if isinstance(phi, PureQutritState) else np.asarray(phi, dtype=complex)
    return InputProjector(np.outer(vec, vec.conj()), alpha_components(vec))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random ``n x n`` unitary (QR of a Ginibre matrix with phase fix)."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_matrix(rng: np.random.Generator, dim: int = 9, rank: int | None = None) -> np.ndarray:
    """Induced-measure random state; ``rank=1`` gives a Haar-random pure state."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_protocol(rng: np.random.Generator) -> MeasurementProtocol:
    """Rank-1 measurement in a Haar-random basis of C^9 with Haar-random corrections."""
    basis = haar_unitary(rng, 9)
    projectors = np.einsum("ak,bk->kab", basis, basis.conj())
    corrections = np.array([haar_unitary(rng, 3) for _ in range(9)])
    return MeasurementProtocol(projectors, corrections)


def _check_a(a: float) -> float:
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise OutOfRange(f"a must lie in [0, 1], got {a!r}")
    return a


def horodecki_rho(a: float) -> np.ndarray:
    """The bound-entangled two-qutrit state with parameter ``a`` in [0, 1]."""
    a = _check_a(a)
    m = np.diag([a, a, a, a, a, a, (1 + a) / 2, a, (1 + a) / 2]).astype(complex)
    for i, j in ((0, 4), (0, 8), (4, 8)):
        m[i, j] = m[j, i] = a
    m[6, 8] = m[8, 6] = np.sqrt(1 - a * a) / 2
    return m / (8 * a + 1)


@lru_cache(maxsize=None)
def _interchange() -> np.ndarray:
    n = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            n[3 * j + i, 3 * i + j] = 1.0
    n = n.astype(complex)
    n.setflags(write=False)
    return n


def interchange() -> np.ndarray:
    """Swap operator ``N (e_i (x) e_j) = e_j (x) e_i`` (read-only)."""
    return _interchange()


def hat(p: np.ndarray) -> np.ndarray:
    n = _interchange()
    return n @ np.asarray(p) @ n


def partial_transpose(rho: np.ndarray) -> np.ndarray:
    """Transpose on the second qutrit: ``<ij|.|kl> -> <il|.|kj>``."""
    m4 = np.asarray(rho).reshape(3, 3, 3, 3)
    return m4.transpose(0, 3, 2, 1).reshape(9, 9)


def shift_operator() -> np.ndarray:
    return np.roll(np.eye(3), 1, axis=0).astype(complex)


def clock_operator() -> np.ndarray:
    return np.diag(OMEGA ** np.arange(3))


def maximally_entangled() -> np.ndarray:
    """|Phi_00> = (|00> + |11> + |22>) / sqrt(3) as a length-9 vector."""
    return np.eye(3).reshape(9).astype(complex) / np.sqrt(3)


def standard_protocol() -> MeasurementProtocol:
    """Generalized Bell measurement with Weyl corrections.

    ``|Phi_mn> = (X^m Z^n (x) I)|Phi_00>``. Projecting the input and Alice's
    half onto ``|Phi_mn>`` leaves Bob with ``(X^m Z^n)^H |phi>``, so the
    correction is ``U_mn = X^m Z^n``.
    """
    x = shift_operator()
    z = clock_operator()
    phi00 = maximally_entangled()
    projectors = []
    corrections = []
    for m in range(3):
        for n in range(3):
            w = np.linalg.matrix_power(x, m) @ np.linalg.matrix_power(z, n)
            vec = np.kron(w, np.eye(3)) @ phi00
            projectors.append(np.outer(vec, vec.conj()))
            corrections.append(w)
    return MeasurementProtocol(np.array(projectors), np.array(corrections))
