import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import min_cover_size
from noisyrnn.covers import (
    ClassSizeError,
    GridClassSpec,
    block_output_mixture,
    block_tv,
    certify_recurrent_cover,
    empirical_cover_greedy,
    enumerate_grid_class,
    probe_grid,
    recurrent_output_tv,
    validate_cover,
)
from noisyrnn.networks import MLPSpec, RecurrentConfig, ShapeError
from noisyrnn.numerics import InvalidParameterError, RngStream


class TestEnumeration:
    def test_one_weight(self):
        members = list(enumerate_grid_class(GridClassSpec((1, 1), (1, -1))))
        assert [m.flat().tolist() for m in members] == [[-1.0], [1.0]]

    def test_two_weights_lexicographic(self):
        members = list(enumerate_grid_class(GridClassSpec((2, 1), (-1, 0, 1))))
        flats = [tuple(m.flat()) for m in members]
        assert len(flats) == 9 and flats == sorted(flats)

    @given(st.lists(st.integers(1, 2), min_size=2, max_size=3), st.integers(1, 3))
    def test_count(self, dims, n_values):
        spec = GridClassSpec(tuple(dims), tuple(range(n_values)))
        members = list(enumerate_grid_class(spec))
        assert len(members) == spec.size == n_values ** sum(a * b for a, b in zip(dims[:-1], dims[1:]))
        assert len(set(members)) == len(members)

    def test_cap(self):
        with pytest.raises(ClassSizeError):
            next(enumerate_grid_class(GridClassSpec((4, 4), (0, 1), cap=1000)))

    def test_free_positions(self):
        base = MLPSpec((2, 2), [[[0.5, 0.1], [0.2, 0.3]]])
        members = list(enumerate_grid_class(GridClassSpec((2, 2), (-1, 1), base, (3,))))
        assert [m.flat().tolist() for m in members] == [[0.5, 0.1, 0.2, -1.0], [0.5, 0.1, 0.2, 1.0]]

    def test_free_positions_validated(self):
        with pytest.raises(InvalidParameterError):
            GridClassSpec((1, 1), (0,), MLPSpec.zeros((1, 1)), (1,))
        with pytest.raises(ShapeError):
            GridClassSpec((1, 1), (0,), None, (0,))


def random_metric(gen, n):
    pts = gen.uniform(0, 1, (n, 2))
    return np.linalg.norm(pts[:, None] - pts[None], axis=2)


class TestGreedyCover:
    def test_all_zero(self):
        assert len(empirical_cover_greedy(np.zeros((5, 5)), 0.0)) == 1

    def test_zero_radius(self):
        D = np.ones((4, 4)) - np.eye(4)
        res = empirical_cover_greedy(D, 0.0)
        assert res.center_indices == (0, 1, 2, 3) and res.certified

    @given(st.integers(0, 10_000), st.floats(0.05, 0.8))
    def test_valid_and_above_minimum(self, seed, eps):
        D = random_metric(np.random.default_rng(seed), 8)
        res = empirical_cover_greedy(D, eps)
        assert res.certified and validate_cover(D, res.center_indices, eps)
        assert len(res) >= min_cover_size(D.tolist(), eps)

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidParameterError):
            empirical_cover_greedy(np.array([[0.0, 1.0], [2.0, 0.0]]), 0.5)

    def test_rejects_nonzero_diagonal(self):
        with pytest.raises(InvalidParameterError):
            empirical_cover_greedy(np.eye(2), 0.5)

    def test_ties_to_lowest_index(self):
        D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
        assert empirical_cover_greedy(D, 1.0).center_indices == (1,)
        assert empirical_cover_greedy(D, 2.0).center_indices == (0,)


class TestBlockDistributions:
    def test_hermite_mixture_mean(self):
        spec = MLPSpec((1, 1), [[[2.0]]])
        gm = block_output_mixture(spec, 0.3, [0.2], n_nodes=32)
        draws = np.tanh(np.random.default_rng(0).normal(0.2, 0.3, 400_000))   # 2 * 0.5 tanh(2x/2)
        assert gm.mean()[0] == pytest.approx(0.5 * draws.mean(), abs=3e-3)

    def test_deep_block_uses_draws(self):
        spec = MLPSpec.random((1, 2, 1), 0)
        assert len(block_output_mixture(spec, 0.2, [0.1], n_draws=64, rng=1).weights) == 64

    def test_equal_blocks(self):
        f = MLPSpec((1, 1), [[[1.0]]])
        assert block_tv(f, f, 0.5, probe_grid(1, 3), 1000, RngStream(0)).value == 0.0

    def test_probe_grid(self):
        g = probe_grid(2, 3)
        assert g.shape == (9, 2) and g.min() == -0.5 and g.max() == 0.5

    def test_single_step_matches_block(self):
        cfg = RecurrentConfig(1, 1, 1)
        f, g = MLPSpec((1, 1), [[[-1.0]]]), MLPSpec((1, 1), [[[1.0]]])
        u = 0.4
        blk = block_tv(f, g, 0.5, [[u]], 40_000, RngStream(1))
        rec = recurrent_output_tv(f, g, 0.5, cfg, [[u]], 512, 8, RngStream(2))
        assert abs(blk.value - rec.value) <= 3 * math.hypot(blk.stderr, rec.stderr) + 2e-3


class TestCertification:
    base = MLPSpec((2, 2), [[[0.9, 0.6], [-0.7, 0.0]]])
    grid = GridClassSpec((2, 2), (-1, 0, 1), base, (3,))
    cfg = RecurrentConfig(1, 2, 3)
    probes = probe_grid(2, 3)
    seqs = np.random.default_rng(0).uniform(-0.5, 0.5, (3, 1, 3))

    def run(self, subset, eps, **kw):
        return certify_recurrent_cover(self.grid, subset, self.cfg, 0.5, self.probes, self.seqs, eps,
                                       rng=RngStream(3), N=2000, n_paths=256, **kw)

    def test_full_subset_is_trivial(self):
        cert = self.run(None, 0.01)
        assert cert.report.passed
        assert cert.assignment == {0: 0, 1: 1, 2: 2}
        assert all(r[1] == 0.0 for r in cert.report.rows)

    def test_all_pairs_satisfy_inflation(self):
        cert = self.run(None, None)
        assert len(cert.report.rows) == 3 and cert.report.passed

    def test_small_radius_leaves_members_uncovered(self):
        cert = self.run([1], 0.01)
        assert not cert.report.passed
        assert set(cert.report.failures()) == {"member=0,center=1,uncovered",
                                                    "member=2,center=1,uncovered"}

    def test_large_radius_covers(self):
        cert = self.run([1], 1.0)
        assert cert.report.passed and set(cert.assignment.values()) == {1}

    def test_limits(self):
        with pytest.raises(InvalidParameterError):
            certify_recurrent_cover(self.grid, None, self.cfg, 0.0, self.probes, self.seqs, 0.1)
        with pytest.raises(InvalidParameterError):
            self.run([5], 0.1)
