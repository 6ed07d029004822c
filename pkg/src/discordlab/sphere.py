"""Minimization over measurement axes on the Bloch sphere.

A projective qubit measurement is fixed by an axis ``n`` up to sign, so the
search domain is the upper hemisphere. The optimizer evaluates a spherical
grid in one batch and then polishes the best grid point with Nelder-Mead in
a local tangent-plane chart (no coordinate singularity at the poles).
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import minimize

BatchObjective = Callable[[np.ndarray], np.ndarray]


def canonical_axis(n) -> np.ndarray:
    """Normalize ``n`` and pick the representative of ``{n, -n}``.

    The representative has a nonnegative third component; ties are broken on
    the second, then the first component.
    """
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("zero vector is not an axis")
    n = n / norm
    for component in (n[2], n[1], n[0]):
        if component > 0:
            return n
        if component < 0:
            return -n
    return n


def hemisphere_grid(n_theta: int = 64, n_phi: int = 128) -> np.ndarray:
    """Unit vectors on ``theta in [0, pi/2]`` x ``phi in [0, 2 pi)``, shape ``(n_theta * n_phi, 3)``.

    Both endpoints of ``theta`` are included and ``phi`` steps by ``2 pi / n_phi``,
    so all coordinate axes are on the grid whenever ``n_phi`` is a multiple of 4.
    """
    theta = np.linspace(0.0, np.pi / 2, n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    t, p = np.meshgrid(theta, phi, indexing="ij")
    grid = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)
    # cos(pi/2) etc. are ~6e-17; snap them so coordinate axes are exact
    grid[np.abs(grid) < 1e-15] = 0.0
    return grid.reshape(-1, 3)


def _tangent_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.eye(3)[np.argmin(np.abs(n))]
    e1 = np.cross(n, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def minimize_on_sphere(
    objective: BatchObjective,
    n_theta: int = 64,
    n_phi: int = 128,
    xtol: float = 1e-10,
    max_evals: int = 4000,
) -> tuple[float, np.ndarray]:
    """Minimize ``objective`` over measurement axes.

    Args:
        objective: maps an ``(m, 3)`` array of unit vectors to ``m`` values.
            It must be even (``f(n) == f(-n)``).
        n_theta, n_phi: grid resolution on the hemisphere.
        xtol: stopping step size of the local refinement (chart units ~ radians).
        max_evals: cap on refinement evaluations.

    Returns:
        ``(minimum, axis)`` with ``axis`` in canonical form.
    """
    grid = hemisphere_grid(n_theta, n_phi)
    values = np.asarray(objective(grid), dtype=float)
    best = int(np.argmin(values))
    n0 = grid[best]
    f0 = float(values[best])

    e1, e2 = _tangent_basis(n0)

    def chart(x):
        v = n0 + x[0] * e1 + x[1] * e2
        return v / np.linalg.norm(v)

    def local(x):
        return float(objective(chart(x)[None, :])[0])

    step = (np.pi / 2) / max(n_theta - 1, 1)
    simplex = np.array([[0.0, 0.0], [step, 0.0], [0.0, step]])
    res = minimize(
        local,
        np.zeros(2),
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": xtol,
            "fatol": 1e-15,
            "maxfev": max_evals,
        },
    )
    if res.fun < f0:
        return float(res.fun), canonical_axis(chart(res.x))
    return f0, canonical_axis(n0)
