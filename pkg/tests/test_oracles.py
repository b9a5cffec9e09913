import math

import numpy as np
import pytest

from rankpath import (
    OracleConfig,
    PiecewisePath,
    ScalarField,
    VarietyDescriptor,
    build_path,
    frobenius_distance,
    graph_upper_bound,
    sandwich,
    shorten,
)
from conftest import random_member

D22 = VarietyDescriptor(2, 2, 2, ScalarField.REAL)
CFG = OracleConfig(n_samples=48, seed=11)


class TestOracleConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(n_samples=0)
        with pytest.raises(ValueError):
            OracleConfig(edge_membership_tol=2.0)
        with pytest.raises(ValueError):
            OracleConfig(shorten_iterations=0)


class TestGraphUpperBound:
    def test_coincident(self):
        p = np.array([[1.0, 0.0], [0.0, 0.0]])
        assert graph_upper_bound(p, p.copy(), D22, CFG) == 0.0

    def test_on_ray(self):
        p = np.array([[1.0, 0.0], [0.0, 0.0]])
        value = graph_upper_bound(p, 2.0 * p, D22, CFG)
        assert value == pytest.approx(np.linalg.norm(p), abs=1e-9)

    def test_orthogonal_rank_one_sandwiched(self):
        p = np.array([[1.0, 0.0], [0.0, 0.0]])
        q = np.array([[0.0, 0.0], [0.0, 1.0]])
        value = graph_upper_bound(p, q, D22, CFG)
        _, cert = build_path(p, q, D22)
        assert math.sqrt(2.0) - 1e-9 <= value <= cert.length + CFG.edge_membership_tol

    def test_never_beats_the_chord(self, rng):
        d = VarietyDescriptor(3, 3, 2, ScalarField.COMPLEX)
        for seed in range(5):
            p = random_member(d, rng, rank=1)
            q = random_member(d, rng, rank=1)
            value = graph_upper_bound(p, q, d, OracleConfig(n_samples=32, seed=seed))
            assert value >= frobenius_distance(p, q) - 1e-9

    def test_median_monotone_in_samples(self):
        p = np.array([[1.0, 0.0], [0.0, 0.0]])
        q = np.array([[0.0, 0.0], [0.0, 1.0]])
        medians = []
        for n in (16, 32, 64):
            values = [
                graph_upper_bound(p, q, D22, OracleConfig(n_samples=n, seed=seed))
                for seed in range(20)
            ]
            medians.append(float(np.median(values)))
        assert medians[0] >= medians[1] >= medians[2]


class TestShorten:
    def test_single_point_unchanged(self):
        p = np.array([[1.0, 1.0], [0.0, 0.0]])
        path = PiecewisePath((p,))
        out = shorten(path, D22, CFG)
        assert len(out.breakpoints) == 1
        np.testing.assert_array_equal(out.breakpoints[0], p)

    def test_straight_segment_stays_exact(self):
        p = np.array([[1.0, 1.0], [0.0, 0.0]])
        path = PiecewisePath((p, 2.0 * p))
        out = shorten(path, D22, CFG)
        assert out.length() == pytest.approx(path.length(), abs=1e-10)

    def test_detour_through_zero_is_cut(self):
        u = np.array([1.0, 0.0])
        v = np.array([0.999, math.sqrt(1.0 - 0.999**2)])
        detour = PiecewisePath((np.outer(u, u), np.zeros((2, 2)), np.outer(v, v)))
        out = shorten(detour, D22, CFG)
        assert out.length() <= 0.99 * detour.length()
        np.testing.assert_array_equal(out.start, detour.start)
        np.testing.assert_array_equal(out.end, detour.end)

    def test_monotone_across_rounds_and_breakpoints_on_variety(self, rng):
        from rankpath import membership_residual

        d = VarietyDescriptor(3, 3, 2, ScalarField.COMPLEX)
        p = random_member(d, rng, rank=1)
        q = random_member(d, rng, rank=1)
        path, _ = build_path(p, q, d)
        lengths = [path.length()]
        for rounds in range(1, 6):
            cfg = OracleConfig(n_samples=8, seed=0, shorten_iterations=rounds)
            out = shorten(path, d, cfg)
            lengths.append(out.length())
            # shortened paths promise on-variety breakpoints, not segments:
            # the output is an estimate, not a certificate
            assert all(membership_residual(b, d) <= 1e-8 for b in out.breakpoints)
        assert all(a >= b - 1e-12 for a, b in zip(lengths, lengths[1:]))


class TestSandwich:
    def test_radial_collapses(self, rng):
        p = random_member(D22, rng, rank=1)
        result = sandwich(p, np.zeros((2, 2)), D22, CFG)
        norm = np.linalg.norm(p)
        assert result.outer == pytest.approx(norm)
        assert result.shortened == pytest.approx(norm)
        assert result.constructed == pytest.approx(norm)

    def test_coincident_vanishes(self, rng):
        p = random_member(D22, rng, rank=1)
        result = sandwich(p, p.copy(), D22, CFG)
        assert result.outer == result.shortened == result.constructed == 0.0

    def test_random_pairs_ordered(self, rng):
        d = VarietyDescriptor(3, 3, 2, ScalarField.COMPLEX)
        for _ in range(10):
            p = random_member(d, rng, rank=1)
            q = random_member(d, rng, rank=1)
            result = sandwich(p, q, d, CFG)
            assert result.outer <= result.shortened + 1e-9
            assert result.shortened <= result.constructed + 1e-9
            assert result.constructed <= 2.0 * result.outer + 1e-9
