import numpy as np
import pytest
from hypothesis import strategies as st

from discordlab.qstate import BellDiagonal

ACCEPTANCE = []


def bd_from_weights(w) -> BellDiagonal:
    """Bell-diagonal coefficients with spectrum proportional to ``w``.

    ``w`` is ordered like :func:`discordlab.qstate.eigenprobs`; the inversion
    is ``c1 = -l1 - l2 + l3 + l4`` etc., written out independently here.
    """
    lam = np.asarray(w, dtype=float)
    lam = lam / lam.sum()
    l1, l2, l3, l4 = lam
    c = (-l1 - l2 + l3 + l4, -l1 + l2 - l3 + l4, -l1 + l2 + l3 - l4)
    return BellDiagonal(*(min(1.0, max(-1.0, x)) for x in c))


weights = st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda w: sum(w) > 1e-3)
physical_states = weights.map(bd_from_weights)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def uniform_physical(rng, n):
    from discordlab.ordering import rejection_sample_tetrahedron

    pts, _ = rejection_sample_tetrahedron(rng, n)
    return [BellDiagonal.from_array(p) for p in pts]


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        mark = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{mark}] criterion {number}: {title} -- {detail}")
