"""Ordering of Bell-diagonal states by discord versus geometric discord.

Two states are ordered consistently when the discord difference and the
geometric-discord difference have the same sign. This module holds the
twelve triangular families inside the tetrahedron, pair verdicts, seeded
scans over a family and randomized searches for violating pairs.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .measures import (
    discord_bd_closed,
    discord_bd_closed_many,
    geo_discord_bd_closed,
    geo_discord_bd_closed_many,
    numeric_report,
)
from .qstate import BellDiagonal, is_physical, is_physical_array, require_physical

DEFAULT_EPS = 1e-9
WITNESS_CAP = 32
# oracle values agree with the closed forms far below this; see test_measures
ORACLE_EPS = 1e-8


class Status(str, enum.Enum):
    CONSISTENT = "consistent"
    VIOLATED = "violated"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OrderingVerdict:
    """Verdict for a pair ``(c, c')``; ``d_discord = D(c') - D(c)``, likewise ``d_geo``."""

    status: Status
    d_discord: float
    d_geo: float

    @property
    def violates_paper(self) -> bool:
        """Violation in the loose sense: a sign reversal, or a tie in one measure only."""
        return self.status is not Status.CONSISTENT


_CODES = (Status.CONSISTENT, Status.VIOLATED, Status.DEGENERATE)


def classify_codes(d_discord, d_geo, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Vectorized verdicts as integer codes (indices into ``(CONSISTENT, VIOLATED, DEGENERATE)``).

    Smallness is tested first: both differences within ``eps`` is
    consistent, exactly one within ``eps`` is degenerate, otherwise the sign
    of the product decides.
    """
    dd = np.asarray(d_discord, dtype=float)
    dg = np.asarray(d_geo, dtype=float)
    small_d = np.abs(dd) <= eps
    small_g = np.abs(dg) <= eps
    codes = np.where(dd * dg > 0, 0, 1)
    codes = np.where(small_d & small_g, 0, codes)
    return np.where(small_d ^ small_g, 2, codes)


def classify_status(d_discord: float, d_geo: float, eps: float = DEFAULT_EPS) -> Status:
    return _CODES[int(classify_codes(d_discord, d_geo, eps))]


def _measures(c: BellDiagonal, backend: str) -> tuple[float, float]:
    if backend == "closed":
        return discord_bd_closed(c), geo_discord_bd_closed(c)
    if backend == "oracle":
        report = numeric_report(c)
        return report.discord, report.geo_discord
    raise ValueError(f"unknown backend {backend!r}")


def ordering_consistent(
    c: BellDiagonal, c_prime: BellDiagonal, eps: float = DEFAULT_EPS, backend: str = "closed"
) -> OrderingVerdict:
    """Compare the discord ordering and the geometric-discord ordering of two states.

    ``backend`` is ``"closed"`` (closed forms) or ``"oracle"`` (numeric
    measurement optimization on the density matrices).
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    require_physical(c)
    require_physical(c_prime)
    d1, g1 = _measures(c, backend)
    d2, g2 = _measures(c_prime, backend)
    dd, dg = d2 - d1, g2 - g1
    return OrderingVerdict(classify_status(dd, dg, eps), dd, dg)


# -- the twelve families ------------------------------------------------------


@dataclass(frozen=True)
class Family:
    """One closed triangle in a coordinate plane.

    Members satisfy ``c[zero_axis] == 0``, ``lo <= c[interval_axis] <= hi``
    and ``|c[abs_axis]| <= 1 + bound_sign * c[interval_axis]``.
    """

    index: int
    zero_axis: int
    interval_axis: int
    interval: tuple[float, float]
    abs_axis: int
    bound_sign: int
    vertices: tuple[tuple[float, float, float], ...]

    def contains(self, c, tol: float = 1e-12) -> bool:
        c = tuple(c)
        t = c[self.interval_axis]
        lo, hi = self.interval
        return (
            abs(c[self.zero_axis]) <= tol
            and lo - tol <= t <= hi + tol
            and abs(c[self.abs_axis]) <= 1 + self.bound_sign * t + tol
        )

    def bound(self, t):
        return 1 + self.bound_sign * t


def _family(index, zero, interval_axis, interval, abs_axis, vertices):
    sign = 1 if interval[1] < 0 else -1
    return Family(index, zero, interval_axis, interval, abs_axis, sign, vertices)


_NEG, _POS = (-1.0, -0.5), (0.5, 1.0)

FAMILIES = (
    _family(1, 0, 1, _NEG, 2, ((0, -1, 0), (0, -0.5, 0.5), (0, -0.5, -0.5))),
    _family(2, 0, 1, _POS, 2, ((0, 1, 0), (0, 0.5, 0.5), (0, 0.5, -0.5))),
    _family(3, 0, 2, _NEG, 1, ((0, 0, -1), (0, -0.5, -0.5), (0, 0.5, -0.5))),
    _family(4, 0, 2, _POS, 1, ((0, 0, 1), (0, 0.5, 0.5), (0, -0.5, 0.5))),
    _family(5, 1, 0, _NEG, 2, ((-1, 0, 0), (-0.5, 0, 0.5), (-0.5, 0, -0.5))),
    _family(6, 1, 0, _POS, 2, ((1, 0, 0), (0.5, 0, 0.5), (0.5, 0, -0.5))),
    _family(7, 1, 2, _NEG, 0, ((0, 0, -1), (0.5, 0, -0.5), (-0.5, 0, -0.5))),
    _family(8, 1, 2, _POS, 0, ((0, 0, 1), (0.5, 0, 0.5), (-0.5, 0, 0.5))),
    _family(9, 2, 0, _NEG, 1, ((-1, 0, 0), (-0.5, 0.5, 0), (-0.5, -0.5, 0))),
    _family(10, 2, 0, _POS, 1, ((1, 0, 0), (0.5, -0.5, 0), (0.5, 0.5, 0))),
    _family(11, 2, 1, _NEG, 0, ((0, -1, 0), (0.5, -0.5, 0), (-0.5, -0.5, 0))),
    _family(12, 2, 1, _POS, 0, ((0, 1, 0), (0.5, 0.5, 0), (-0.5, 0.5, 0))),
)


def get_family(index: int) -> Family:
    if not isinstance(index, (int, np.integer)) or not 1 <= index <= len(FAMILIES):
        raise ValueError(f"family index must be in 1..{len(FAMILIES)}, got {index!r}")
    return FAMILIES[int(index) - 1]


def classify_families(c, tol: float = 1e-12) -> frozenset[int]:
    """Indices of all families containing ``c`` (boundaries included, up to ``tol``)."""
    return frozenset(f.index for f in FAMILIES if f.contains(c, tol))


def _snap_inside(points: np.ndarray, family: Family) -> np.ndarray:
    # Points on a triangle edge that lies in a tetrahedron face can round to
    # an eigenvalue of -1e-17; pull the free coordinate toward 0 by ulps.
    points = points.copy()
    for _ in range(8):
        bad = ~is_physical_array(points, tol=0.0)
        if not bad.any():
            break
        col = points[bad, family.abs_axis]
        points[bad, family.abs_axis] = np.nextafter(col, 0.0)
    bad = ~is_physical_array(points, tol=0.0)
    if bad.any():
        # tiny values near a vertex where the bound is exactly 0
        limit = np.maximum(family.bound(points[bad, family.interval_axis]), 0.0)
        col = points[bad, family.abs_axis]
        points[bad, family.abs_axis] = np.sign(col) * np.minimum(np.abs(col), limit)
    return points


def family_points(index: int, u, v) -> np.ndarray:
    """Vectorized :func:`family_point`; returns shape ``(n, 3)``."""
    fam = get_family(index)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any(u < 0) or np.any(v < 0) or np.any(u + v > 1):
        raise ValueError("(u, v) must satisfy u, v >= 0 and u + v <= 1")
    v0, v1, v2 = (np.array(x, dtype=float) for x in fam.vertices)
    pts = v0 + u[:, None] * (v1 - v0) + v[:, None] * (v2 - v0)
    return _snap_inside(pts, fam)


def family_point(index: int, u: float, v: float) -> BellDiagonal:
    """Point ``V0 + u (V1 - V0) + v (V2 - V0)`` of triangle ``index``."""
    return BellDiagonal.from_array(family_points(index, u, v)[0])


def uniform_triangle_uv(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n`` uniform draws from ``{u, v >= 0, u + v <= 1}`` by rejection from the unit square."""
    us, vs = [], []
    have = 0
    while have < n:
        draw = rng.random((2 * (n - have) + 4, 2))
        keep = draw[draw.sum(axis=1) <= 1]
        us.append(keep[:, 0])
        vs.append(keep[:, 1])
        have += len(keep)
    return np.concatenate(us)[:n], np.concatenate(vs)[:n]


# -- tetrahedron sampling -----------------------------------------------------


_CANDIDATE_BLOCK = 4096


def rejection_sample_tetrahedron(rng: np.random.Generator, n: int) -> tuple[np.ndarray, int]:
    """Uniform samples of the physical tetrahedron, by rejection from ``[-1, 1]^3``.

    Candidates are drawn in fixed-size blocks, so the first ``k`` samples
    for a given generator state do not depend on ``n``. Returns
    ``(samples, candidates_used)`` where ``candidates_used`` counts draws up
    to and including the last accepted one.
    """
    out = []
    got = 0
    used = 0
    while got < n:
        cand = rng.uniform(-1.0, 1.0, size=(_CANDIDATE_BLOCK, 3))
        ok = np.flatnonzero(is_physical_array(cand, tol=0.0))[: n - got]
        out.append(cand[ok])
        got += len(ok)
        used += int(ok[-1]) + 1 if got == n and len(ok) else _CANDIDATE_BLOCK
    return (np.concatenate(out) if out else np.empty((0, 3))), used


def sample_tetrahedron(rng: np.random.Generator) -> BellDiagonal:
    return BellDiagonal.from_array(rejection_sample_tetrahedron(rng, 1)[0][0])


# -- scans --------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    c: BellDiagonal
    c_prime: BellDiagonal
    verdict: OrderingVerdict
    oracle_verdict: Optional[OrderingVerdict] = None


@dataclass
class ScanReport:
    pairs_tested: int = 0
    consistent: int = 0
    violated: int = 0
    degenerate: int = 0
    witnesses: list = field(default_factory=list)
    seed: Optional[int] = None
    eps: float = DEFAULT_EPS
    family: Optional[int] = None
    pairing: str = "free"

    def merge(self, other: "ScanReport", cap: int = WITNESS_CAP) -> "ScanReport":
        """Combine tallies; witnesses of ``self`` come first."""
        return ScanReport(
            pairs_tested=self.pairs_tested + other.pairs_tested,
            consistent=self.consistent + other.consistent,
            violated=self.violated + other.violated,
            degenerate=self.degenerate + other.degenerate,
            witnesses=(self.witnesses + other.witnesses)[:cap],
            seed=self.seed,
            eps=self.eps,
            family=self.family,
            pairing=self.pairing,
        )


def _tally(first: np.ndarray, second: np.ndarray, eps: float, cap: int) -> ScanReport:
    d1, d2 = discord_bd_closed_many(first), discord_bd_closed_many(second)
    g1, g2 = geo_discord_bd_closed_many(first), geo_discord_bd_closed_many(second)
    dd, dg = d2 - d1, g2 - g1
    codes = classify_codes(dd, dg, eps)
    counts = np.bincount(codes, minlength=3)
    report = ScanReport(
        pairs_tested=len(codes),
        consistent=int(counts[0]),
        violated=int(counts[1]),
        degenerate=int(counts[2]),
        eps=eps,
    )
    for k in np.flatnonzero(codes == 1)[:cap]:
        report.witnesses.append(
            Witness(
                BellDiagonal.from_array(first[k]),
                BellDiagonal.from_array(second[k]),
                OrderingVerdict(Status.VIOLATED, float(dd[k]), float(dg[k])),
            )
        )
    return report


def default_workers() -> int:
    """Worker count from ``DISCORDLAB_THREADS`` (0 or unset means ``os.cpu_count()``)."""
    raw = os.environ.get("DISCORDLAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def tally_pairs(
    first: np.ndarray,
    second: np.ndarray,
    eps: float = DEFAULT_EPS,
    chunks: int = 1,
    workers: Optional[int] = None,
    cap: int = WITNESS_CAP,
) -> ScanReport:
    """Verdicts for row-aligned pairs ``(first[k], second[k])`` using the closed forms.

    The pair list is split into ``chunks`` contiguous pieces evaluated in a
    thread pool; merging in chunk order makes the result independent of
    ``chunks`` and ``workers``.
    """
    first = np.atleast_2d(np.asarray(first, dtype=float))
    second = np.atleast_2d(np.asarray(second, dtype=float))
    bounds = np.linspace(0, len(first), max(1, chunks) + 1).astype(int)
    pieces = [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    workers = workers or default_workers()
    with ThreadPoolExecutor(max_workers=min(workers, max(1, len(pieces)))) as pool:
        parts = list(pool.map(lambda ab: _tally(first[ab[0]:ab[1]], second[ab[0]:ab[1]], eps, cap), pieces))
    report = ScanReport(eps=eps)
    for part in parts:
        report = report.merge(part, cap)
    return report


def _distinct_pairs(rng: np.random.Generator, n_points: int, n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    i = rng.integers(0, n_points, size=n_pairs)
    j = rng.integers(0, n_points - 1, size=n_pairs)
    j = j + (j >= i)
    return i, j


def scan_points(
    points, n_pairs: int, eps: float = DEFAULT_EPS, seed: int = 0, **kwargs
) -> ScanReport:
    """Tally ``n_pairs`` random pairs of distinct indices into ``points``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) < 2:
        raise ValueError("need at least two points")
    rng = np.random.default_rng(seed)
    i, j = _distinct_pairs(rng, len(points), n_pairs)
    report = tally_pairs(points[i], points[j], eps, **kwargs)
    report.seed = seed
    return report


def scan_family(
    index: int,
    n_points: int = 200,
    n_pairs: int = 10_000,
    eps: float = DEFAULT_EPS,
    seed: int = 0,
    pairing: str = "free",
    oracle: bool = False,
    **kwargs,
) -> ScanReport:
    """Seeded ordering scan inside family ``index``.

    ``pairing="free"`` compares random pairs among ``n_points`` uniform
    points of the triangle. ``pairing="slice"`` pairs each drawn point with
    a fresh point sharing its interval coordinate (only the signed
    coordinate is redrawn), i.e. it compares states along one-parameter
    slices of the triangle.

    With ``oracle=True`` every witness is re-evaluated with the numeric
    measurement optimizer.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if pairing not in ("free", "slice"):
        raise ValueError(f"unknown pairing {pairing!r}")
    fam = get_family(index)
    rng = np.random.default_rng(seed)
    points = family_points(index, *uniform_triangle_uv(rng, n_points))
    if pairing == "free":
        i, j = _distinct_pairs(rng, n_points, n_pairs)
        first, second = points[i], points[j]
    else:
        first = points[rng.integers(0, n_points, size=n_pairs)]
        second = first.copy()
        half_width = fam.bound(first[:, fam.interval_axis])
        second[:, fam.abs_axis] = rng.uniform(-1.0, 1.0, size=n_pairs) * half_width
        second = _snap_inside(second, fam)
    report = tally_pairs(first, second, eps, **kwargs)
    report.seed = seed
    report.family = fam.index
    report.pairing = pairing
    if oracle:
        report.witnesses = [confirm_with_oracle(w, eps) for w in report.witnesses]
    return report


def confirm_with_oracle(w: Witness, eps: float = DEFAULT_EPS) -> Witness:
    verdict = ordering_consistent(w.c, w.c_prime, max(eps, ORACLE_EPS), backend="oracle")
    return Witness(w.c, w.c_prime, w.verdict, verdict)


# -- violation search ---------------------------------------------------------


class TetrahedronSampler:
    """Both states uniform in the tetrahedron."""

    name = "tetrahedron"

    def draw(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        pts, _ = rejection_sample_tetrahedron(rng, 2 * n)
        return pts[0::2], pts[1::2]


class FamilyPairSampler:
    """First state uniform in family ``a``, second uniform in family ``b``."""

    def __init__(self, a: int, b: int):
        self.a, self.b = get_family(a).index, get_family(b).index
        self.name = f"families {self.a},{self.b}"

    def draw(self, rng, n):
        first = family_points(self.a, *uniform_triangle_uv(rng, n))
        second = family_points(self.b, *uniform_triangle_uv(rng, n))
        return first, second


class SegmentSampler:
    """Both states uniform on the segment ``start + t (end - start)``, ``t in [0, 1]``.

    Parameter values listed in ``exclude`` (e.g. an open endpoint) are redrawn.
    """

    def __init__(self, start, end, exclude=(), name="segment"):
        self.start = np.asarray(start, dtype=float)
        self.end = np.asarray(end, dtype=float)
        self.exclude = tuple(exclude)
        self.name = name
        for t in (0.0, 0.5, 1.0):
            p = self.point(t)
            if not is_physical(BellDiagonal.from_array(p)):
                raise ValueError(f"segment leaves the tetrahedron at t={t}")

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return self.start + t[..., None] * (self.end - self.start)

    def _params(self, rng, n):
        t = rng.random(n)
        for bad in self.exclude:
            hit = t == bad
            while hit.any():
                t[hit] = rng.random(int(hit.sum()))
                hit = t == bad
        return t

    def draw(self, rng, n):
        return self.point(self._params(rng, n)), self.point(self._params(rng, n))


# c1 = -0.5, c2 = 0.5, 0 < c3 <= 1
EXAMPLE3 = SegmentSampler((-0.5, 0.5, 0.0), (-0.5, 0.5, 1.0), exclude=(0.0,), name="example3")
# c2 = -c1, c3 = 1, c1 != 0
EXAMPLE4 = SegmentSampler((-1.0, 1.0, 1.0), (1.0, -1.0, 1.0), exclude=(0.5,), name="example4")


def region_sampler(region: str):
    """Sampler for ``tetrahedron``, ``example3``, ``example4`` or ``families A,B``."""
    region = region.strip()
    if region == "tetrahedron":
        return TetrahedronSampler()
    if region == "example3":
        return EXAMPLE3
    if region == "example4":
        return EXAMPLE4
    if region.startswith("families"):
        parts = region[len("families"):].replace(" ", "").split(",")
        if len(parts) != 2:
            raise ValueError(f"expected 'families A,B', got {region!r}")
        return FamilyPairSampler(int(parts[0]), int(parts[1]))
    raise ValueError(f"unknown region {region!r}")


def find_violation(
    sampler,
    budget: int,
    eps: float = DEFAULT_EPS,
    seed: int = 0,
    include_ties: bool = False,
) -> Optional[Witness]:
    """First violating pair among ``budget`` seeded draws from ``sampler``, or ``None``.

    By default only strict sign reversals count; ``include_ties=True`` also
    accepts degenerate pairs (one measure tied, the other not).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = np.random.default_rng(seed)
    first, second = sampler.draw(rng, budget)
    dd = discord_bd_closed_many(second) - discord_bd_closed_many(first)
    dg = geo_discord_bd_closed_many(second) - geo_discord_bd_closed_many(first)
    codes = classify_codes(dd, dg, eps)
    hits = np.flatnonzero((codes == 1) | ((codes == 2) & include_ties))
    wanted = (Status.VIOLATED, Status.DEGENERATE) if include_ties else (Status.VIOLATED,)
    if len(hits) == 0:
        return None
    k = hits[0]
    c, c_prime = BellDiagonal.from_array(first[k]), BellDiagonal.from_array(second[k])
    verdict = ordering_consistent(c, c_prime, eps)
    if verdict.status not in wanted:
        raise RuntimeError("witness did not re-verify")
    return Witness(c, c_prime, verdict)


# -- figure data --------------------------------------------------------------


def _sweep(kind: str, n: int, c2: Optional[float]) -> tuple[np.ndarray, np.ndarray]:
    if kind == "fig2":
        if c2 is None or not -1.0 <= c2 <= -0.5:
            raise ValueError("fig2 needs c2 in [-1, -0.5]")
        r = 1.0 + c2
        # equal spacing 2r/(n-1); the positive half is mirrored so the
        # sweep is exactly symmetric about c3 = 0
        m = n // 2
        if n % 2:
            half = r * (2 * np.arange(0, m + 1) / (n - 1))
            param = np.concatenate([-half[:0:-1], half])
        else:
            half = r * ((2 * np.arange(1, m + 1) - 1) / (n - 1))
            param = np.concatenate([-half[::-1], half])
        coeffs = np.stack([np.zeros(n), np.full(n, c2), param], axis=1)
    elif kind == "fig3":
        param = np.arange(1, n + 1) / n
        coeffs = np.stack([np.full(n, -0.5), np.full(n, 0.5), param], axis=1)
    elif kind == "fig4":
        n_neg = n // 2
        n_pos = n - n_neg
        neg = -np.arange(n_neg, 0, -1) / max(n_neg, 1)
        pos = np.arange(1, n_pos + 1) / n_pos
        param = np.concatenate([neg, pos])
        coeffs = np.stack([param, -param, np.ones(n)], axis=1)
    else:
        raise ValueError(f"unknown curve {kind!r}")
    return param, coeffs


def curve_data(kind: str, n_samples: int, c2: Optional[float] = None) -> np.ndarray:
    """Rows ``(param, D, D_G)`` along the one-parameter sweeps of figures 2-4.

    * ``fig2``: ``c1 = 0``, fixed ``c2``, ``c3`` over ``[-(1 + c2), 1 + c2]``
      (odd ``n_samples`` puts ``c3 = 0`` on the grid);
    * ``fig3``: ``(-0.5, 0.5, c3)`` with ``c3 = k / n``, ``k = 1..n``;
    * ``fig4``: ``(c1, -c1, 1)`` with ``c1`` in ``[-1, 1]`` minus ``0``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    param, coeffs = _sweep(kind, n_samples, c2)
    if not np.all(is_physical_array(coeffs)):
        raise ValueError(f"{kind} sweep leaves the tetrahedron")
    return np.stack([param, discord_bd_closed_many(coeffs), geo_discord_bd_closed_many(coeffs)], axis=1)
