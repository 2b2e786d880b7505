"""Gell-Mann (operator Schmidt) coordinates of two-qutrit operators.

A 9x9 operator ``M`` is written as

    M = w/9 I(x)I + 1/6 r_i l_i(x)I + 1/6 s_i I(x)l_i + 1/4 t_ij l_i(x)l_j

with ``w = Tr M``. ``r`` belongs to the first tensor factor, ``s`` to the
second.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg_core import HERMITIAN_TOL, dagger, gell_mann_stack, is_unitary

IMAG_TOL = 1e-9


class NonHermitianInput(ValueError):
    pass


class NotUnitary(ValueError):
    pass


@dataclass(frozen=True)
class SchmidtComponents:
    r: np.ndarray
    s: np.ndarray
    t: np.ndarray
    unit_weight: float = 1.0


def _as_tensor(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (9, 9):
        raise ValueError(f"expected a 9x9 operator, got shape {m.shape}")
    # m4[i, j, k, l] = <i j| M |k l>
    return m.reshape(3, 3, 3, 3)


def decompose(rho: np.ndarray) -> SchmidtComponents:
    """Return ``r_i = Tr(M l_i(x)I)``, ``s_i = Tr(M I(x)l_i)``, ``t_ij = Tr(M l_i(x)l_j)``.

    Raises:
        NonHermitianInput: if any component has an imaginary part above 1e-9.
    """
    m4 = _as_tensor(rho)
    lam = gell_mann_stack()
    reduced_a = np.einsum("ijkj->ik", m4)
    reduced_b = np.einsum("ijil->jl", m4)
    r = np.einsum("ik,qki->q", reduced_a, lam)
    s = np.einsum("jl,qlj->q", reduced_b, lam)
    t = np.einsum("ijkl,pki,qlj->pq", m4, lam, lam)
    weight = np.trace(reduced_a)
    imag = max(np.max(np.abs(r.imag)), np.max(np.abs(s.imag)), np.max(np.abs(t.imag)), abs(weight.imag))
    if imag > IMAG_TOL:
        raise NonHermitianInput(f"Schmidt components have imaginary part {imag:.3e}")
    return SchmidtComponents(r.real.copy(), s.real.copy(), t.real.copy(), float(weight.real))


def reconstruct(c: SchmidtComponents) -> np.ndarray:
    lam = gell_mann_stack()
    eye = np.eye(3)
    local_a = np.einsum("q,qij->ij", c.r, lam)
    local_b = np.einsum("q,qij->ij", c.s, lam)
    out = (c.unit_weight / 9.0) * np.eye(9, dtype=complex)
    out += np.kron(local_a, eye) / 6.0
    out += np.kron(eye, local_b) / 6.0
    corr = np.einsum("pq,pik,qjl->ijkl", c.t, lam, lam).reshape(9, 9)
    out += corr / 4.0
    return out


def adjoint_orbit(u: np.ndarray) -> np.ndarray:
    """Orthogonal 8x8 matrix ``O`` with ``U (x.l) U^H = (x O).l``.

    ``O_ij = Tr(U l_i U^H l_j) / 2``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (3, 3) or not is_unitary(u, HERMITIAN_TOL):
        raise NotUnitary("adjoint_orbit needs a 3x3 unitary")
    lam = gell_mann_stack()
    rotated = np.einsum("ab,ibc,cd->iad", u, lam, dagger(u))
    return 0.5 * np.einsum("iad,jda->ij", rotated, lam).real
