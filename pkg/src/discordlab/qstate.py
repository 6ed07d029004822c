"""Two-qubit state algebra for Bell-diagonal states.

A Bell-diagonal state is fixed by its correlation coefficients
``(c1, c2, c3)``::

    rho = 1/4 (I x I + sum_i c_i sigma_i x sigma_i)

Density matrices are plain ``numpy`` arrays of shape ``(4, 4)`` (two qubits,
ordering ``A x B``) or ``(2, 2)`` (one qubit). Entropies are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IDENTITY2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

for _m in (IDENTITY2, *PAULIS):
    _m.setflags(write=False)

# below this an eigenvalue contributes nothing to the entropy (0 log 0 = 0)
ZERO_PROB = 1e-15
# eigenvalues more negative than this mean the input is not a state
NEGATIVE_EIG_TOL = 1e-8


class InvalidStateError(ValueError):
    """Raised when a matrix is not (close enough to) a density matrix."""


class UnphysicalStateError(InvalidStateError):
    """Raised when Bell-diagonal coefficients lie outside the tetrahedron."""


@dataclass(frozen=True)
class BellDiagonal:
    """Correlation coefficients of a Bell-diagonal two-qubit state.

    Each coefficient must lie in ``[-1, 1]``. Physicality (membership of the
    tetrahedron) is deliberately not enforced here; use :func:`is_physical`.
    """

    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or abs(value) > 1.0:
                raise ValueError(f"{name}={value!r} outside [-1, 1]")
            object.__setattr__(self, name, value)

    @property
    def cmax(self) -> float:
        return max(abs(self.c1), abs(self.c2), abs(self.c3))

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])

    def __iter__(self):
        return iter((self.c1, self.c2, self.c3))

    @classmethod
    def from_array(cls, c) -> "BellDiagonal":
        c1, c2, c3 = (float(x) for x in c)
        return cls(c1, c2, c3)


def _bell_vector(label: str) -> np.ndarray:
    s = 1 / np.sqrt(2)
    vectors = {
        "psi+": [0, s, s, 0],
        "psi-": [0, s, -s, 0],
        "phi+": [s, 0, 0, s],
        "phi-": [s, 0, 0, -s],
    }
    return np.array(vectors[label], dtype=complex)


BELL_VERTICES = {
    "psi+": BellDiagonal(1.0, 1.0, -1.0),
    "psi-": BellDiagonal(-1.0, -1.0, -1.0),
    "phi+": BellDiagonal(1.0, -1.0, 1.0),
    "phi-": BellDiagonal(-1.0, 1.0, 1.0),
}


def bell_state(label: str) -> np.ndarray:
    """Projector onto the Bell state ``label`` (``psi+``, ``psi-``, ``phi+``, ``phi-``)."""
    v = _bell_vector(label)
    return np.outer(v, v.conj())


def eigenprobs_array(coeffs) -> np.ndarray:
    """Vectorized :func:`eigenprobs` over the last axis of ``coeffs`` (shape ``(..., 3)``)."""
    c = np.asarray(coeffs, dtype=float)
    c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2]
    return 0.25 * np.stack(
        [
            1 - c1 - c2 - c3,
            1 - c1 + c2 + c3,
            1 + c1 - c2 + c3,
            1 + c1 + c2 - c3,
        ],
        axis=-1,
    )


def eigenprobs(c: BellDiagonal) -> np.ndarray:
    """Spectrum of the Bell-diagonal state, in the sign order ``(---, -++, +-+, ++-)``.

    The entries are the weights on ``psi-``, ``phi-``, ``phi+`` and ``psi+``
    respectively; they sum to one even for unphysical ``c``.
    """
    return eigenprobs_array(c.as_array())


def is_physical_array(coeffs, tol: float = 1e-12) -> np.ndarray:
    return np.all(eigenprobs_array(coeffs) >= -tol, axis=-1)


def is_physical(c: BellDiagonal, tol: float = 1e-12) -> bool:
    """True if all four eigenvalues are ``>= -tol``."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    return bool(is_physical_array(c.as_array(), tol))


def require_physical(c: BellDiagonal, tol: float = 1e-12) -> None:
    if not is_physical(c, tol):
        raise UnphysicalStateError(
            f"unphysical Bell-diagonal state {tuple(c)}: eigenvalues {eigenprobs(c).tolist()}"
        )


def to_density(c: BellDiagonal) -> np.ndarray:
    """Build the 4x4 density matrix of a Bell-diagonal state."""
    rho = np.kron(IDENTITY2, IDENTITY2)
    for ci, sigma in zip(c, PAULIS):
        rho = rho + ci * np.kron(sigma, sigma)
    return rho / 4


def check_density(rho: np.ndarray, psd_tol: float = 1e-10) -> None:
    """Raise :class:`InvalidStateError` unless ``rho`` is Hermitian, unit trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"expected a square matrix, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
        raise InvalidStateError("matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > 1e-12:
        raise InvalidStateError(f"trace {np.trace(rho).real} != 1")
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -psd_tol:
        raise InvalidStateError(f"negative eigenvalue {lowest}")


def partial_trace(rho: np.ndarray, subsystem: str) -> np.ndarray:
    """Trace out ``subsystem`` (``"A"`` or ``"B"``) of a two-qubit state.

    Returns the 2x2 reduced state of the *other* qubit.
    """
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if subsystem == "A":
        return np.einsum("abad->bd", r)
    if subsystem == "B":
        return np.einsum("abcb->ac", r)
    raise ValueError(f"subsystem must be 'A' or 'B', got {subsystem!r}")


def entropy_from_probs(probs) -> float:
    """Shannon entropy in bits, with ``0 log 0 = 0``.

    Probabilities are clamped to ``[0, 1]``; anything below ``-1e-8`` is an error.
    """
    p = np.asarray(probs, dtype=float)
    if np.any(p < -NEGATIVE_EIG_TOL):
        raise InvalidStateError(f"negative eigenvalue {p.min()}")
    p = np.clip(p, 0.0, 1.0)
    p = p[p > ZERO_PROB]
    # sorted so that permuted spectra give bit-identical results
    return float(-np.sum(np.sort(p * np.log2(p))))


def binary_entropy(p: float) -> float:
    return entropy_from_probs([p, 1 - p])


def von_neumann_entropy(state) -> float:
    """Von Neumann entropy ``-Tr(rho log2 rho)`` in bits.

    ``state`` may be a :class:`BellDiagonal` (the spectrum is taken from
    :func:`eigenprobs`) or any Hermitian density matrix (spectrum from a
    Hermitian eigensolver).
    """
    if isinstance(state, BellDiagonal):
        return entropy_from_probs(eigenprobs(state))
    return entropy_from_probs(np.linalg.eigvalsh(np.asarray(state)))
