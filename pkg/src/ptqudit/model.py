"""
Spin operators and the PT-symmetric qudit Hamiltonian ``-J Sx + i gamma Sz``.

The basis is ordered by descending ``Sz`` eigenvalue (``m = j, j-1, ..., -j``),
so mode 1 carries the strongest gain and mode ``d`` the strongest loss.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "Phase",
    "PTHamiltonian",
    "SpinRepresentation",
    "build_hamiltonian",
    "build_spin",
    "classify_phase",
    "parity_operator",
    "passive_hamiltonian",
    "pt_symmetry_check",
    "spectrum_closed_form",
    "two_qubit_identity_check",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinRepresentation:
    """Angular momentum matrices ``(Sx, Sy, Sz)`` for spin ``j = (d - 1) / 2``."""

    dim: int
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def j(self) -> float:
        return (self.dim - 1) / 2

    def commutator_error(self) -> float:
        """Largest entrywise deviation from ``[Sa, Sb] = i eps_abc Sc``."""
        s = (self.sx, self.sy, self.sz)
        err = 0.0
        for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            comm = s[a] @ s[b] - s[b] @ s[a]
            err = max(err, float(np.max(np.abs(comm - 1j * s[c]))))
        return err

    def casimir_error(self) -> float:
        """Largest entrywise deviation from ``S^2 = j (j + 1) I``."""
        total = self.sx @ self.sx + self.sy @ self.sy + self.sz @ self.sz
        target = self.j * (self.j + 1) * np.eye(self.dim)
        return float(np.max(np.abs(total - target)))


def build_spin(d: int) -> SpinRepresentation:
    """Spin matrices of dimension ``d`` from the ladder operators."""
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d}")
    d = int(d)
    j = (d - 1) / 2
    m = j - np.arange(d)
    # <m+1| S+ |m> sits one row above the diagonal when m descends.
    raising = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        raising[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    lowering = raising.conj().T
    sx = (raising + lowering) / 2
    sy = (raising - lowering) / 2j
    sz = np.diag(m).astype(complex)
    return SpinRepresentation(d, sx, sy, sz)


class Phase(enum.Enum):
    UNBROKEN = "unbroken"
    EXCEPTIONAL_POINT = "exceptional-point"
    BROKEN = "broken"


@dataclass(frozen=True)
class PTHamiltonian:
    """
    ``H = -J Sx + i gamma Sz`` for a qudit of dimension ``dim``.

    ``gap`` is ``sqrt(J^2 - gamma^2)``, imaginary in the broken phase.
    """

    coupling: float
    gamma: float
    dim: int
    matrix: np.ndarray = field(repr=False)
    spin: SpinRepresentation = field(repr=False, compare=False)

    @property
    def gap(self) -> complex:
        return cmath.sqrt(self.coupling**2 - self.gamma**2)

    @property
    def period(self) -> float:
        """Anti-period ``2 pi / gap``; infinite at and beyond the EP."""
        g = self.gap
        if g.imag != 0.0 or g.real == 0.0:
            return float("inf")
        return 2 * np.pi / g.real


def build_hamiltonian(coupling: float, gamma: float, dim: int = 4) -> PTHamiltonian:
    if not np.isfinite(coupling) or coupling <= 0:
        raise DomainError(f"coupling J must be positive, got {coupling}")
    if not np.isfinite(gamma) or gamma < 0:
        raise DomainError(f"gain/loss gamma must be >= 0, got {gamma}")
    spin = build_spin(dim)
    matrix = -coupling * spin.sx + 1j * gamma * spin.sz
    matrix.setflags(write=False)
    return PTHamiltonian(float(coupling), float(gamma), int(dim), matrix, spin)


def passive_hamiltonian(h: PTHamiltonian) -> np.ndarray:
    """Loss-only counterpart ``H - i gamma (d - 1)/2 I``; every mode decays or is neutral."""
    shift = h.gamma * (h.dim - 1) / 2
    return h.matrix - 1j * shift * np.eye(h.dim)


def parity_operator(d: int) -> np.ndarray:
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d}")
    return np.fliplr(np.eye(int(d))).astype(complex)


def pt_symmetry_check(h, tol: float = 1e-12) -> bool:
    """True iff ``P conj(H) P == H`` entrywise; accepts a PTHamiltonian or a matrix."""
    m = h.matrix if isinstance(h, PTHamiltonian) else np.asarray(h, dtype=complex)
    p = parity_operator(m.shape[0])
    return bool(np.max(np.abs(p @ m.conj() @ p - m)) <= tol)


def spectrum_closed_form(h: PTHamiltonian) -> np.ndarray:
    """Eigenvalues ``m * gap`` for ``m = -j..j``, sorted by real then imaginary part."""
    j = (h.dim - 1) / 2
    m = -j + np.arange(h.dim)
    values = m * h.gap
    return values[np.lexsort((values.imag, values.real))]


def classify_phase(h: PTHamiltonian, eps: float = 1e-12) -> Phase:
    """Phase label; ``eps`` is relative to ``J``."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    band = eps * h.coupling
    if h.gamma < h.coupling - band:
        return Phase.UNBROKEN
    if h.gamma > h.coupling + band:
        return Phase.BROKEN
    return Phase.EXCEPTIONAL_POINT


def two_qubit_identity_check(spin: SpinRepresentation, tol: float = 1e-12) -> bool:
    """
    Check the two-qubit form of the spin-3/2 operators.

    ``2 Sx = X.X + Y.Y + sqrt(3) I.X``, ``Sz = Z.I + (1/2) I.Z`` and
    ``P = X.X``, with ``.`` the Kronecker product.
    """
    if spin.dim != 4:
        raise DomainError(f"two-qubit identities need d = 4, got {spin.dim}")
    two_sx = (np.kron(PAULI_X, PAULI_X) + np.kron(PAULI_Y, PAULI_Y)
              + np.sqrt(3) * np.kron(IDENTITY_2, PAULI_X))
    sz = np.kron(PAULI_Z, IDENTITY_2) + 0.5 * np.kron(IDENTITY_2, PAULI_Z)
    ok_x = np.max(np.abs(2 * spin.sx - two_sx)) <= tol
    ok_z = np.max(np.abs(spin.sz - sz)) <= tol
    ok_p = np.max(np.abs(parity_operator(4) - np.kron(PAULI_X, PAULI_X))) <= tol
    return bool(ok_x and ok_z and ok_p)
