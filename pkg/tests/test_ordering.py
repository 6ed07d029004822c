import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import physical_states
from discordlab.measures import discord_bd_closed, geo_discord_bd_closed
from discordlab.ordering import (
    EXAMPLE3,
    EXAMPLE4,
    FAMILIES,
    FamilyPairSampler,
    OrderingVerdict,
    Status,
    TetrahedronSampler,
    classify_codes,
    classify_families,
    confirm_with_oracle,
    curve_data,
    family_point,
    family_points,
    find_violation,
    ordering_consistent,
    region_sampler,
    rejection_sample_tetrahedron,
    sample_tetrahedron,
    scan_family,
    scan_points,
    tally_pairs,
)
from discordlab.qstate import BellDiagonal, UnphysicalStateError, is_physical

triangle_uv = st.tuples(st.floats(0, 1), st.floats(0, 1)).filter(lambda uv: uv[0] + uv[1] <= 1)
family_ids = st.integers(1, 12)


class TestVerdict:
    def test_example2_is_a_tie_in_geometric_discord(self):
        v = ordering_consistent(BellDiagonal(0.1, 0, -0.75), BellDiagonal(0.1, 0, 0.9))
        assert v.status is Status.DEGENERATE
        assert v.violates_paper
        assert v.d_discord == pytest.approx(0.035, abs=1e-3)
        assert abs(v.d_geo) <= 1e-12

    def test_identical_states(self):
        c = BellDiagonal(0.2, -0.1, 0.3)
        v = ordering_consistent(c, c)
        assert v == OrderingVerdict(Status.CONSISTENT, 0.0, 0.0)
        assert not v.violates_paper

    def test_family1_same_slice(self):
        v = ordering_consistent(BellDiagonal(0, -0.75, 0.1), BellDiagonal(0, -0.75, 0.2))
        assert v.status is Status.CONSISTENT
        assert v.d_discord > 0 and v.d_geo > 0

    def test_family1_across_slices_reverses_order(self):
        # two members of the first triangle whose orderings disagree
        a, b = BellDiagonal(0, -0.75, 0.1), BellDiagonal(0, -0.55, 0.12)
        assert classify_families(a) == classify_families(b) == {1}
        for backend in ("closed", "oracle"):
            v = ordering_consistent(a, b, backend=backend)
            assert v.status is Status.VIOLATED
            assert v.d_discord < -1e-3 and v.d_geo > 1e-3

    def test_unphysical_rejected(self):
        with pytest.raises(UnphysicalStateError):
            ordering_consistent(BellDiagonal(1, 1, 1), BellDiagonal(0, 0, 0))

    @pytest.mark.parametrize(
        "dd, dg, expected",
        [
            (0.1, 0.2, Status.CONSISTENT),
            (-0.1, -0.2, Status.CONSISTENT),
            (0.1, -0.2, Status.VIOLATED),
            (0.0, 0.0, Status.CONSISTENT),
            (5e-10, -5e-10, Status.CONSISTENT),
            (0.1, 0.0, Status.DEGENERATE),
            (1e-12, 0.3, Status.DEGENERATE),
        ],
    )
    def test_classification_table(self, dd, dg, expected):
        assert classify_codes(dd, dg, 1e-9) == [Status.CONSISTENT, Status.VIOLATED, Status.DEGENERATE].index(expected)

    @settings(max_examples=50)
    @given(physical_states, physical_states)
    def test_symmetric(self, a, b):
        ab, ba = ordering_consistent(a, b), ordering_consistent(b, a)
        assert ab.status == ba.status
        assert ab.d_discord == -ba.d_discord
        assert ab.d_geo == -ba.d_geo


class TestFamilies:
    @pytest.mark.parametrize(
        "c, expected",
        [
            ((0, -1, 0), {1, 11}),
            ((0.3, 0.2, 0.1), set()),
            ((0, -0.75, 0.1), {1}),
            ((0.1, 0, -0.75), {7}),
            ((0.1, 0, 0.9), {8}),
            ((0, 0, 0), set()),
        ],
    )
    def test_classify(self, c, expected):
        assert classify_families(c) == expected

    def test_family_constraints_transcribed(self):
        # spot checks of the inequality rows, one per family
        probes = {
            1: (0, -0.6, 0.4), 2: (0, 0.6, -0.4), 3: (0, 0.4, -0.6), 4: (0, -0.4, 0.6),
            5: (-0.6, 0, 0.4), 6: (0.6, 0, -0.4), 7: (0.4, 0, -0.6), 8: (-0.4, 0, 0.6),
            9: (-0.6, 0.4, 0), 10: (0.6, -0.4, 0), 11: (0.4, -0.6, 0), 12: (-0.4, 0.6, 0),
        }  # fmt: skip
        for index, c in probes.items():
            assert classify_families(c) == {index}
            outside = np.array(c, dtype=float)
            fam = FAMILIES[index - 1]
            outside[fam.abs_axis] *= 1.1
            assert index not in classify_families(outside)

    @pytest.mark.parametrize("fam", FAMILIES, ids=lambda f: f"family{f.index}")
    def test_vertices_classify(self, fam):
        for v in fam.vertices:
            assert fam.index in classify_families(v)
            assert is_physical(BellDiagonal(*v), tol=0)

    def test_family_point_examples(self):
        assert tuple(family_point(1, 0, 0)) == (0, -1, 0)
        assert tuple(family_point(1, 1, 0)) == (0, -0.5, 0.5)
        centroid = family_point(1, 1 / 3, 1 / 3)
        np.testing.assert_allclose(tuple(centroid), (0, -2 / 3, 0), atol=1e-15)
        assert 1 in classify_families(centroid)

    def test_out_of_simplex(self):
        with pytest.raises(ValueError):
            family_point(1, 0.7, 0.4)
        with pytest.raises(ValueError):
            family_point(13, 0, 0)

    @given(family_ids, triangle_uv)
    def test_closure_and_physicality(self, index, uv):
        c = family_point(index, *uv)
        assert index in classify_families(c)
        assert is_physical(c, tol=0)

    @given(family_ids, st.floats(0, 1))
    def test_edges_stay_physical(self, index, t):
        for uv in ((t, 0.0), (0.0, t), (t, 1.0 - t)):
            assert is_physical(family_point(index, *uv), tol=0)


class TestTetrahedronSampling:
    def test_deterministic(self):
        a = [sample_tetrahedron(np.random.default_rng(5)) for _ in range(2)]
        assert a[0] == a[1]
        x, _ = rejection_sample_tetrahedron(np.random.default_rng(9), 50)
        y, _ = rejection_sample_tetrahedron(np.random.default_rng(9), 50)
        np.testing.assert_array_equal(x, y)

    def test_prefix_stable(self):
        x, _ = rejection_sample_tetrahedron(np.random.default_rng(9), 5000)
        y, _ = rejection_sample_tetrahedron(np.random.default_rng(9), 10)
        np.testing.assert_array_equal(x[:10], y)

    def test_acceptance_rate(self):
        # tetrahedron volume 8/3 inside the cube of volume 8
        samples, used = rejection_sample_tetrahedron(np.random.default_rng(0), 100_000)
        assert 100_000 / used == pytest.approx(1 / 3, abs=0.02)
        assert all(is_physical(BellDiagonal.from_array(c), tol=0) for c in samples[:2000])

    def test_uniform_coverage(self):
        # mean of a uniform tetrahedron is its centroid (the origin)
        samples, _ = rejection_sample_tetrahedron(np.random.default_rng(1), 50_000)
        np.testing.assert_allclose(samples.mean(axis=0), 0, atol=0.02)


class TestScan:
    def test_identical_points(self):
        p = [(0, -0.75, 0.1), (0, -0.75, 0.1)]
        r = scan_points(p, 1)
        assert (r.pairs_tested, r.consistent, r.violated, r.degenerate) == (1, 1, 0, 0)

    def test_counts_sum(self):
        r = scan_family(3, 50, 999, seed=1)
        assert r.consistent + r.violated + r.degenerate == r.pairs_tested == 999

    def test_chunking_does_not_change_results(self):
        base = scan_family(1, 200, 5000, seed=42)
        for chunks, workers in ((7, 1), (16, 4), (3, 8)):
            other = scan_family(1, 200, 5000, seed=42, chunks=chunks, workers=workers)
            assert (other.consistent, other.violated, other.degenerate) == (base.consistent, base.violated, base.degenerate)
            assert other.witnesses == base.witnesses

    def test_env_threads(self, monkeypatch):
        monkeypatch.setenv("DISCORDLAB_THREADS", "2")
        from discordlab.ordering import default_workers

        assert default_workers() == 2
        monkeypatch.setenv("DISCORDLAB_THREADS", "0")
        assert default_workers() >= 1

    def test_witnesses_reverify(self):
        r = scan_family(5, 200, 3000, seed=3)
        assert 0 < len(r.witnesses) <= 32
        for w in r.witnesses:
            assert ordering_consistent(w.c, w.c_prime).status is Status.VIOLATED
            assert ordering_consistent(w.c, w.c_prime, eps=r.eps / 10).status is Status.VIOLATED

    def test_witnesses_reverify_with_oracle(self):
        r = scan_family(2, 200, 3000, seed=11, oracle=True)
        assert r.witnesses
        for w in r.witnesses[:6]:
            assert w.oracle_verdict.status is Status.VIOLATED

    @pytest.mark.parametrize("index", range(1, 13))
    def test_slices_preserve_ordering(self, index):
        r = scan_family(index, 200, 10_000, seed=42, pairing="slice")
        assert r.violated == 0

    @settings(max_examples=40)
    @given(family_ids, triangle_uv, st.floats(-1, 1), st.floats(-1, 1))
    def test_slice_property(self, index, uv, s, t):
        fam = FAMILIES[index - 1]
        base = family_point(index, *uv).as_array()
        half = fam.bound(base[fam.interval_axis])
        pair = []
        for w in (s, t):
            p = base.copy()
            p[fam.abs_axis] = w * half
            pair.append(BellDiagonal.from_array(p))
        assert ordering_consistent(*pair).status is not Status.VIOLATED


class TestFindViolation:
    def test_example3(self):
        w = find_violation(EXAMPLE3, 1000, seed=7)
        assert w is not None
        assert w.verdict.status is Status.VIOLATED
        for c in (w.c, w.c_prime):
            assert c.c1 == -0.5 and c.c2 == 0.5 and 0 < c.c3 <= 1
        assert confirm_with_oracle(w).oracle_verdict.status is Status.VIOLATED

    def test_example4_has_none(self):
        assert find_violation(EXAMPLE4, 10_000, seed=7) is None

    def test_example2_families(self):
        w = find_violation(FamilyPairSampler(7, 8), 1000, seed=7)
        assert w is not None
        assert 7 in classify_families(w.c) and 8 in classify_families(w.c_prime)

    def test_tetrahedron(self):
        w = find_violation(TetrahedronSampler(), 1000, seed=0)
        assert w is not None and w.verdict.status is Status.VIOLATED

    def test_include_ties_finds_degenerate_pairs(self):
        # on example 3 the geometric discord is flat for c3 >= 1/2
        w = find_violation(EXAMPLE3, 1000, seed=1, include_ties=True)
        assert w is not None and w.verdict.violates_paper

    def test_region_parsing(self):
        assert region_sampler("families 7,8").name == "families 7,8"
        assert region_sampler("example4") is EXAMPLE4
        with pytest.raises(ValueError):
            region_sampler("families 7")
        with pytest.raises(ValueError):
            region_sampler("cube")

    def test_segments_respect_open_endpoints(self):
        rng = np.random.default_rng(0)
        a, b = EXAMPLE4.draw(rng, 2000)
        assert np.all(a[:, 0] != 0) and np.all(b[:, 0] != 0)
        np.testing.assert_array_equal(a[:, 1], -a[:, 0])

    def test_budget(self):
        with pytest.raises(ValueError):
            find_violation(EXAMPLE3, 0)


class TestCurves:
    @pytest.mark.parametrize("c2", [-0.6, -0.75, -0.9, -0.55])
    def test_fig2(self, c2):
        data = curve_data("fig2", 201, c2=c2)
        param, d, g = data.T
        np.testing.assert_array_equal(param, -param[::-1])
        np.testing.assert_array_equal(d, d[::-1])
        np.testing.assert_array_equal(g, g[::-1])
        assert param[100] == 0
        assert np.argmin(d) == 100 and np.argmin(g) == 100
        assert np.all(d >= g)

    def test_fig2_even_sample_count(self):
        param = curve_data("fig2", 100, c2=-0.75)[:, 0]
        assert 0 not in param
        np.testing.assert_array_equal(param, -param[::-1])
        np.testing.assert_allclose(np.diff(param), 0.5 / 99, rtol=1e-9)

    def test_fig2_requires_c2(self):
        with pytest.raises(ValueError):
            curve_data("fig2", 11)
        with pytest.raises(ValueError):
            curve_data("fig2", 11, c2=-0.3)

    def test_fig3_geometric_discord(self):
        param, _, g = curve_data("fig3", 100).T
        assert param[0] > 0 and param[-1] == 1
        expected = 0.25 * (0.5 + param**2 - np.maximum(0.25, param**2))
        np.testing.assert_allclose(g, expected, atol=1e-15)

    def test_fig3_has_opposite_steps(self):
        _, d, g = curve_data("fig3", 100).T
        dd, dg = np.diff(d), np.diff(g)
        assert np.any(dd * dg < 0)

    def test_fig4(self):
        param, d, g = curve_data("fig4", 100).T
        assert 0 not in param and param[0] == -1 and param[-1] == 1
        assert np.all(np.diff(param) > 0)
        np.testing.assert_allclose(g, param**2 / 2, atol=1e-12)
        # both measures depend on |c1| only and grow with it
        order_d = np.argsort(d, kind="stable")
        assert np.all(np.diff(np.abs(param)[order_d]) >= -1e-12)

    def test_matches_scalar_closed_forms(self):
        for kind in ("fig3", "fig4"):
            for p, d, g in curve_data(kind, 9):
                c = BellDiagonal(-0.5, 0.5, p) if kind == "fig3" else BellDiagonal(p, -p, 1)
                assert d == pytest.approx(discord_bd_closed(c), abs=1e-15)
                assert g == pytest.approx(geo_discord_bd_closed(c), abs=1e-15)


def test_tally_pairs_direct():
    first = np.array([[0, -0.75, 0.1], [0, -0.75, 0.1]])
    second = np.array([[0, -0.55, 0.12], [0, -0.75, 0.2]])
    r = tally_pairs(first, second)
    assert (r.violated, r.consistent) == (1, 1)
    assert tuple(r.witnesses[0].c) == (0, -0.75, 0.1)


def test_family_points_vectorized_matches_scalar():
    u = np.array([0.1, 0.3, 0.0])
    v = np.array([0.2, 0.7, 1.0])
    batch = family_points(9, u, v)
    for row, uu, vv in zip(batch, u, v):
        assert tuple(row) == tuple(family_point(9, uu, vv))
