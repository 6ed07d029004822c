"""Correlation measures: mutual information, classical correlation, discord
and geometric discord.

Every measure has two independent routes:

* closed forms in the Bell-diagonal coefficients (``*_bd_closed``), and
* numeric oracles that work on an arbitrary two-qubit density matrix by
  optimizing over projective measurements on qubit A (``*_numeric``).

The oracles never look at the Bell-diagonal coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .qstate import (
    IDENTITY2,
    PAULIS,
    ZERO_PROB,
    BellDiagonal,
    UnphysicalStateError,
    binary_entropy,
    entropy_from_probs,
    eigenprobs_array,
    is_physical_array,
    partial_trace,
    require_physical,
    to_density,
    von_neumann_entropy,
)
from .sphere import canonical_axis, minimize_on_sphere

CLOSED_FORM = "closed_form"
NUMERIC_ORACLE = "numeric_oracle"

# values in [-CLAMP_TOL, 0) are round-off and reported as 0
CLAMP_TOL = 1e-9
MIN_OUTCOME_PROB = 1e-14


class ZeroProbabilityError(ValueError):
    """The requested measurement outcome has (numerically) zero probability."""


class OptimizationError(RuntimeError):
    """The measurement optimizer returned an inconsistent (too negative) value."""


@dataclass(frozen=True)
class MeasurementAxis:
    """Unit Bloch vector ``n`` of the measurement ``{(I + n.sigma)/2, (I - n.sigma)/2}``."""

    n: tuple

    def __post_init__(self):
        n = tuple(float(x) for x in self.n)
        if len(n) != 3 or abs(np.linalg.norm(n) - 1) > 1e-12:
            raise ValueError(f"measurement axis must be a unit 3-vector, got {n}")
        object.__setattr__(self, "n", n)

    @classmethod
    def from_vector(cls, v) -> "MeasurementAxis":
        """Normalize ``v`` and store the canonical representative of ``{v, -v}``."""
        return cls(tuple(canonical_axis(v)))

    def as_array(self) -> np.ndarray:
        return np.array(self.n)


@dataclass(frozen=True)
class CorrelationReport:
    mutual_info: float
    classical_corr: float
    discord: float
    geo_discord: float
    method: str
    optimizer_axis: Optional[MeasurementAxis] = None
    geo_axis: Optional[MeasurementAxis] = None

    def __post_init__(self):
        if self.method not in (CLOSED_FORM, NUMERIC_ORACLE):
            raise ValueError(f"unknown method {self.method!r}")
        if abs(self.mutual_info - self.classical_corr - self.discord) > 1e-9:
            raise ValueError("mutual_info != classical_corr + discord")
        for name in ("mutual_info", "classical_corr", "discord", "geo_discord"):
            if getattr(self, name) < -1e-10:
                raise ValueError(f"{name} is negative: {getattr(self, name)}")


def _clamp(value: float, what: str) -> float:
    if value >= 0:
        return value
    if value >= -CLAMP_TOL:
        return 0.0
    raise OptimizationError(f"{what} = {value:.3e} is negative beyond tolerance")


def hs_norm_sq(m) -> float:
    """Squared Hilbert-Schmidt (Frobenius) norm ``sum |m_jk|^2``."""
    m = np.asarray(m)
    return float(np.sum(np.abs(m) ** 2))


# -- measurement primitives ---------------------------------------------------


def _axes_array(axes) -> np.ndarray:
    if isinstance(axes, MeasurementAxis):
        return axes.as_array()[None, :]
    return np.atleast_2d(np.asarray(axes, dtype=float))


def projectors(axes) -> tuple[np.ndarray, np.ndarray]:
    """Qubit projectors ``(I +- n.sigma)/2`` for each axis; each of shape ``(m, 2, 2)``."""
    n = _axes_array(axes)
    n_sigma = np.einsum("mk,kij->mij", n, np.stack(PAULIS))
    return (IDENTITY2 + n_sigma) / 2, (IDENTITY2 - n_sigma) / 2


def _sandwich(rho: np.ndarray, p: np.ndarray) -> np.ndarray:
    # (P x I) rho (P x I) for a batch of qubit operators P
    k = np.einsum("mij,kl->mikjl", p, IDENTITY2).reshape(-1, 4, 4)
    return k @ np.asarray(rho) @ k


def _partial_trace_a_batch(m: np.ndarray) -> np.ndarray:
    return np.einsum("nabad->nbd", m.reshape(-1, 2, 2, 2, 2))


def _eigvalsh_2x2(m: np.ndarray) -> np.ndarray:
    """Eigenvalues of a batch of 2x2 Hermitian matrices, shape ``(n, 2)``."""
    a = m[:, 0, 0].real
    d = m[:, 1, 1].real
    half_gap = np.hypot((a - d) / 2, np.abs(m[:, 0, 1]))
    mid = (a + d) / 2
    return np.stack([mid - half_gap, mid + half_gap], axis=1)


def measured_state(rho: np.ndarray, axis: MeasurementAxis, outcome: int) -> tuple[float, np.ndarray]:
    """Probability and post-measurement state of B for outcome ``+1`` or ``-1`` on A.

    Raises:
        ZeroProbabilityError: if the outcome probability is below ``1e-14``.
    """
    if outcome not in (1, -1):
        raise ValueError("outcome must be +1 or -1")
    plus, minus = projectors(axis)
    p_op = plus if outcome == 1 else minus
    unnormalized = _partial_trace_a_batch(_sandwich(np.asarray(rho), p_op))[0]
    prob = float(np.trace(unnormalized).real)
    if prob < MIN_OUTCOME_PROB:
        raise ZeroProbabilityError(f"outcome {outcome:+d} has probability {prob:.3e}")
    return prob, unnormalized / prob


def _xlogx(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    out = np.zeros_like(x)
    mask = x > ZERO_PROB
    out[mask] = x[mask] * np.log2(x[mask])
    return out


def conditional_entropy_batch(rho: np.ndarray, axes) -> np.ndarray:
    """``sum_i p_i S(rho_B|i)`` for every axis in ``axes`` (shape ``(m, 3)``).

    Uses ``p S(M/p) = -sum eig(M) log eig(M) + p log p`` for the unnormalized
    conditional state ``M``, so zero-probability branches drop out smoothly.
    """
    rho = np.asarray(rho)
    total = 0.0
    for p_op in projectors(axes):
        m = _partial_trace_a_batch(_sandwich(rho, p_op))
        eigs = _eigvalsh_2x2(m)
        prob = np.trace(m, axis1=1, axis2=2).real
        total = total - _xlogx(eigs).sum(axis=1) + _xlogx(prob)
    return total


def conditional_entropy_measured(rho: np.ndarray, axis: MeasurementAxis) -> float:
    return float(conditional_entropy_batch(rho, axis)[0])


def dephase(rho: np.ndarray, axis: MeasurementAxis) -> np.ndarray:
    """Post-measurement (non-selective) state ``sum_i (P_i x I) rho (P_i x I)``."""
    plus, minus = projectors(axis)
    return (_sandwich(rho, plus) + _sandwich(rho, minus))[0]


def dephasing_distance_batch(rho: np.ndarray, axes) -> np.ndarray:
    rho = np.asarray(rho)
    plus, minus = projectors(axes)
    diff = rho - _sandwich(rho, plus) - _sandwich(rho, minus)
    return np.sum(np.abs(diff) ** 2, axis=(1, 2))


# -- numeric oracles ----------------------------------------------------------


def mutual_information(rho: np.ndarray) -> float:
    """``S(rho_A) + S(rho_B) - S(rho_AB)`` in bits."""
    rho = np.asarray(rho)
    s_a = von_neumann_entropy(partial_trace(rho, "B"))
    s_b = von_neumann_entropy(partial_trace(rho, "A"))
    return s_a + s_b - von_neumann_entropy(rho)


def classical_correlation_numeric(rho: np.ndarray, **grid) -> tuple[float, MeasurementAxis]:
    """Classical correlation ``J_A`` and the optimal measurement axis on A.

    ``grid`` is forwarded to :func:`~discordlab.sphere.minimize_on_sphere`.
    """
    rho = np.asarray(rho)
    s_b = von_neumann_entropy(partial_trace(rho, "A"))
    h_min, axis = minimize_on_sphere(lambda n: conditional_entropy_batch(rho, n), **grid)
    j = _clamp(s_b - h_min, "classical correlation")
    return j, MeasurementAxis(tuple(axis))


def geo_discord_numeric(rho: np.ndarray, **grid) -> tuple[float, MeasurementAxis]:
    """Geometric discord as ``min_n ||rho - Pi_n(rho)||^2`` over projective measurements on A."""
    rho = np.asarray(rho)
    value, axis = minimize_on_sphere(lambda n: dephasing_distance_batch(rho, n), **grid)
    return _clamp(value, "geometric discord"), MeasurementAxis(tuple(axis))


def discord_numeric(rho: np.ndarray, **grid) -> CorrelationReport:
    """Full :class:`CorrelationReport` from the numeric oracles."""
    rho = np.asarray(rho)
    mi = mutual_information(rho)
    j, axis = classical_correlation_numeric(rho, **grid)
    d = _clamp(mi - j, "discord")
    g, g_axis = geo_discord_numeric(rho, **grid)
    return CorrelationReport(
        mutual_info=mi,
        classical_corr=j,
        discord=d,
        geo_discord=g,
        method=NUMERIC_ORACLE,
        optimizer_axis=axis,
        geo_axis=g_axis,
    )


# -- Bell-diagonal closed forms -----------------------------------------------


def discord_bd_closed_many(coeffs) -> np.ndarray:
    """Vectorized closed-form discord over rows of ``coeffs`` (shape ``(n, 3)``).

    No physicality check; callers validate.
    """
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    cmax = np.max(np.abs(c), axis=1)
    terms = _xlogx(4 * eigenprobs_array(c))
    # sorting makes the sum independent of term order (exact symmetry)
    bracket = np.sort(terms, axis=1).sum(axis=1)
    measured = np.sort(np.stack([_xlogx(1 - cmax), _xlogx(1 + cmax)], axis=1), axis=1).sum(axis=1)
    return 0.25 * bracket - 0.5 * measured


def geo_discord_bd_closed_many(coeffs) -> np.ndarray:
    c = np.atleast_2d(np.asarray(coeffs, dtype=float))
    sq = np.sort(c**2, axis=1)
    # the largest square is cmax^2; dropping it is the same as subtracting it
    return 0.25 * (sq[:, 0] + sq[:, 1])


def discord_bd_closed(c: BellDiagonal) -> float:
    """Quantum discord of a physical Bell-diagonal state, in bits.

    Raises:
        UnphysicalStateError: if ``c`` is outside the tetrahedron.
    """
    require_physical(c)
    return float(discord_bd_closed_many(c.as_array())[0])


def geo_discord_bd_closed(c: BellDiagonal) -> float:
    """Geometric discord ``(c1^2 + c2^2 + c3^2 - cmax^2) / 4``."""
    require_physical(c)
    return float(geo_discord_bd_closed_many(c.as_array())[0])


def mutual_information_bd_closed(c: BellDiagonal) -> float:
    # both marginals are maximally mixed
    require_physical(c)
    return 2.0 - entropy_from_probs(eigenprobs_array(c.as_array()))


def classical_correlation_bd_closed(c: BellDiagonal) -> float:
    require_physical(c)
    return 1.0 - binary_entropy((1 + c.cmax) / 2)


def closed_form_report(c: BellDiagonal) -> CorrelationReport:
    require_physical(c)
    return CorrelationReport(
        mutual_info=mutual_information_bd_closed(c),
        classical_corr=classical_correlation_bd_closed(c),
        discord=_clamp(discord_bd_closed(c), "discord"),
        geo_discord=geo_discord_bd_closed(c),
        method=CLOSED_FORM,
    )


def numeric_report(c: BellDiagonal, **grid) -> CorrelationReport:
    require_physical(c)
    return discord_numeric(to_density(c), **grid)


def check_physical_rows(coeffs, tol: float = 1e-12) -> None:
    bad = ~is_physical_array(coeffs, tol)
    if np.any(bad):
        raise UnphysicalStateError(f"{int(bad.sum())} unphysical state(s), first {np.asarray(coeffs)[bad][0]}")
