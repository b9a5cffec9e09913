import json

import numpy as np
import pytest

from rankpath import (
    BranchKind,
    RankPairStrategy,
    ScalarField,
    TrialConfig,
    VarietyDescriptor,
    adversarial_pairs,
    build_path,
    emit_report,
    frobenius_inner,
    frobenius_norm,
    mix_seed,
    run_trials,
)
from rankpath.harness import (
    CSV_HEADER,
    report_from_json,
    report_to_json,
    trial_config_from_json,
    trial_config_to_json,
)

D332 = VarietyDescriptor(3, 3, 2, ScalarField.COMPLEX)


class TestSeedMix:
    def test_avalanche_spreads(self):
        seeds = {mix_seed(0, i) for i in range(1000)}
        assert len(seeds) == 1000
        assert all(0 <= s < 2**64 for s in seeds)

    def test_position_determined(self):
        assert mix_seed(42, 7) == mix_seed(42, 7)
        assert mix_seed(42, 7) != mix_seed(42, 8)
        assert mix_seed(42, 7) != mix_seed(43, 7)


class TestRunTrials:
    def test_grid_strategy_bounds(self):
        cfg = TrialConfig(D332, pairs=40, master_seed=5)
        report = run_trials(cfg)
        assert len(report.records) == 40
        assert report.bound_violations == 0
        assert report.max_ratio <= 2 * D332.t - 2 + 1e-6
        assert all(r.max_residual <= 1e-8 for r in report.records)

    def test_coincident_adversarial_first(self):
        cfg = TrialConfig(
            D332, pairs=1, master_seed=9, rank_pair_strategy=RankPairStrategy.ADVERSARIAL
        )
        report = run_trials(cfg)
        assert report.records[0].ratio == pytest.approx(1.0)
        assert report.records[0].outer == 0.0

    def test_deterministic_repeat(self):
        cfg = TrialConfig(D332, pairs=25, master_seed=3)
        assert report_to_json(run_trials(cfg)) == report_to_json(run_trials(cfg))

    def test_top_stratum_strategy(self):
        cfg = TrialConfig(
            D332,
            pairs=10,
            master_seed=1,
            rank_pair_strategy=RankPairStrategy.TOP_STRATUM_ONLY,
        )
        report = run_trials(cfg)
        assert all(r.rank_p == r.rank_q == D332.t - 1 for r in report.records)

    def test_real_field_fallbacks_never_violate(self):
        d = VarietyDescriptor(4, 4, 3, ScalarField.REAL)
        report = run_trials(TrialConfig(d, pairs=60, master_seed=17))
        assert report.bound_violations == 0
        for r in report.records:
            assert r.has_fallback or r.ratio <= 2 * d.t - 2 + 1e-6
            assert r.ratio <= r.certified_bound + 1e-9


class TestAdversarialPairs:
    def test_scaled_pair_ratio_one(self):
        pairs = adversarial_pairs(D332, seed=2, count=6)
        p, q = pairs[3]  # cycle slot for scaled pairs
        lam = q.reshape(-1)[np.argmax(np.abs(p))] / p.reshape(-1)[np.argmax(np.abs(p))]
        np.testing.assert_allclose(q, lam * p, atol=1e-12)
        _, cert = build_path(p, q, D332)
        assert cert.ratio == pytest.approx(1.0, abs=1e-9)

    def test_near_coincident_pair_certified(self):
        p, q = adversarial_pairs(D332, seed=2, count=6)[1]
        assert frobenius_norm(p - q) <= 1e-5 * frobenius_norm(p)
        _, cert = build_path(p, q, D332)
        assert cert.ratio <= cert.certified_bound + 1e-9

    def test_near_orthogonal_takes_two_leg_route(self):
        p, q = adversarial_pairs(D332, seed=2, count=6)[2]
        rel = abs(frobenius_inner(p, q)) / (frobenius_norm(p) * frobenius_norm(q))
        assert rel <= 1e-8
        _, cert = build_path(p, q, D332)
        assert cert.branch_trace[0].kind is BranchKind.ORTHOGONAL
        assert cert.ratio <= 2.0

    def test_tiny_inner_product_takes_general_branch(self):
        p, q = adversarial_pairs(D332, seed=2, count=6)[5]
        rel = abs(frobenius_inner(p, q)) / (frobenius_norm(p) * frobenius_norm(q))
        assert 1e-8 < rel < 1e-6
        _, cert = build_path(p, q, D332)
        assert cert.branch_trace[0].kind is BranchKind.GENERAL
        assert cert.ratio <= 2.0 * min(1, D332.t - 1) * 1.0 + 1e-9
        assert cert.max_relative_residual <= 1e-8

    def test_cross_strata_ranks_differ(self):
        d = VarietyDescriptor(4, 4, 4, ScalarField.COMPLEX)
        p, q = adversarial_pairs(d, seed=2, count=6)[4]
        from rankpath import rank_of

        assert rank_of(p, d) != rank_of(q, d)


class TestEmitReport:
    def test_json_round_trip(self, tmp_path):
        report = run_trials(TrialConfig(D332, pairs=8, master_seed=2))
        out = tmp_path / "report.json"
        emit_report(report, "JSON", out)
        text = out.read_text()
        assert text.endswith("\n")
        assert report_from_json(json.loads(text)) == report

    def test_csv_row_count_and_header(self, tmp_path):
        report = run_trials(TrialConfig(D332, pairs=9, master_seed=2))
        out = tmp_path / "report.csv"
        emit_report(report, "CSV", out)
        lines = out.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 9

    def test_empty_records_valid(self, tmp_path):
        report = run_trials(TrialConfig(D332, pairs=1, master_seed=2))
        empty = report.__class__(
            config=report.config,
            records=(),
            max_ratio=0.0,
            bound_violations=0,
            fallback_count=0,
        )
        json_path = tmp_path / "empty.json"
        csv_path = tmp_path / "empty.csv"
        emit_report(empty, "JSON", json_path)
        emit_report(empty, "CSV", csv_path)
        assert json.loads(json_path.read_text())["records"] == []
        assert csv_path.read_text() == CSV_HEADER + "\n"

    def test_config_json_round_trip(self):
        cfg = TrialConfig(
            D332,
            pairs=5,
            master_seed=11,
            rank_pair_strategy=RankPairStrategy.ADVERSARIAL,
            radius_range=(0.25, 3.0),
        )
        assert trial_config_from_json(trial_config_to_json(cfg)) == cfg


class TestParallelDeterminism:
    def test_serial_equals_parallel(self, tmp_path, monkeypatch):
        cfg = TrialConfig(D332, pairs=24, master_seed=6)
        monkeypatch.delenv("RANKPATH_THREADS", raising=False)
        serial = tmp_path / "serial.json"
        emit_report(run_trials(cfg), "JSON", serial)
        monkeypatch.setenv("RANKPATH_THREADS", "4")
        parallel = tmp_path / "parallel.json"
        emit_report(run_trials(cfg), "JSON", parallel)
        assert serial.read_bytes() == parallel.read_bytes()
