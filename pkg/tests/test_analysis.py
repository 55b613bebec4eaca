import math

import pytest

from mixroute.analysis import (
    CaptureQuery,
    bias_success,
    binomial_ci,
    capture_probability,
    figure_tables,
    format_table_a_csv,
    format_table_b_csv,
    grind_capture_rate,
    load_balance_report,
    monte_carlo_capture,
    path_probability,
)
from mixroute.board import import_transcript
from mixroute.engine import TimeFrameConfig, run_timeframe
from mixroute.topology import MixSpec, build_topology


class TestPathProbability:
    def topo(self):
        mixes = [
            MixSpec("a1", 1, layer=1), MixSpec("a2", 3, layer=1),
            MixSpec("b1", 2, layer=2), MixSpec("b2", 2, layer=2),
        ]
        return build_topology(mixes, 2)

    def test_product_of_shares(self):
        topo = self.topo()
        assert path_probability(["a1", "b1"], topo) == pytest.approx(0.25 * 0.5)

    def test_wrong_layer_rejected(self):
        topo = self.topo()
        with pytest.raises(ValueError):
            path_probability(["b1", "a1"], topo)  # layer order violated
        with pytest.raises(ValueError):
            path_probability(["a1"], topo)  # skips a layer
        with pytest.raises(ValueError):
            path_probability(["a1", "a2"], topo)  # repeats a layer


class TestCaptureProbability:
    def test_uniform_product(self):
        assert capture_probability(CaptureQuery((0.25,) * 4, "mpr")) == 0.25**4
        assert capture_probability(CaptureQuery((0.3,), "mpr")) == 0.3

    def test_mixed_capacities(self):
        q = CaptureQuery((0.2, 0.3, 0.5), "mpr")
        assert capture_probability(q) == pytest.approx(0.03)

    def test_baseline_constant_in_layers(self):
        for l in (1, 3, 7):
            q = CaptureQuery((0.25,) * l, "parallel-baseline")
            assert capture_probability(q) == 0.25

    def test_zero_fraction(self):
        assert capture_probability(CaptureQuery((0.0,) * 5, "mpr")) == 0.0

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            CaptureQuery((1.5,), "mpr")
        with pytest.raises(ValueError):
            CaptureQuery((0.5,), "other-mode")
        with pytest.raises(ValueError):
            capture_probability(CaptureQuery((0.2, 0.3), "parallel-baseline"))

    def test_monotone_decreasing_in_layers(self):
        values = [
            capture_probability(CaptureQuery((0.25,) * l, "mpr")) for l in range(1, 9)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_dominated_by_baseline(self):
        for f in (0.1, 0.5, 0.9):
            for l in (2, 4, 6):
                mpr = capture_probability(CaptureQuery((f,) * l, "mpr"))
                base = capture_probability(CaptureQuery((f,) * l, "parallel-baseline"))
                assert mpr < base


class TestFigureTables:
    def test_exact_grids(self):
        a, b = figure_tables()
        assert [row[0] for row in a] == [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]
        assert all(row[1] == row[0] ** 4 and row[2] == row[0] for row in a)
        assert [row[0] for row in b] == [3, 4, 5, 6, 7]
        assert all(row[1] == 0.25 ** row[0] and row[2] == 0.25 for row in b)

    def test_csv_roundtrip_exact(self):
        a, b = figure_tables()
        for text, rows in ((format_table_a_csv(a), a), (format_table_b_csv(b), b)):
            lines = text.strip().splitlines()
            assert len(lines) == len(rows) + 1
            for line, row in zip(lines[1:], rows):
                parts = line.split(",")
                assert float(parts[1]) == row[1]
                assert float(parts[2]) == row[2]


class TestBiasSuccess:
    def test_printed_formula(self):
        est = bias_success(1, 256, 1, 4)
        assert est.success_probability_exact == 1 / (2**256 * (1 / 4))
        assert est.success_probability == pytest.approx(float(4 / 2**256))

    def test_zero_candidates(self):
        assert bias_success(0, 256, 1, 2).success_probability == 0.0

    def test_valid_set_size(self):
        est = bias_success(1, 8, 2, 4, w=4)
        assert est.valid_set_size == 128

    def test_derivation_note_present(self):
        est = bias_success(1, 8, 1, 2)
        assert "2^bits * (b/B)" in est.derivation_note

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            bias_success(1, 256, 0, 4)
        with pytest.raises(ValueError):
            bias_success(1, 256, 5, 4)
        with pytest.raises(ValueError):
            bias_success(1, 0, 1, 4)


class TestMonteCarlo:
    def test_full_capture_when_everything_adversarial(self):
        mc = monte_carlo_capture(1.0, 2, trials=40, seed=1, frame_size=40)
        assert mc.rate == 1.0

    def test_one_layer_half(self):
        mc = monte_carlo_capture(0.5, 1, trials=2000, seed=2, frame_size=1000)
        assert abs(mc.rate - 0.5) < 0.05
        assert mc.ci_contains_analytic

    def test_ci_math(self):
        lo, hi = binomial_ci(50, 100)
        assert lo < 0.5 < hi
        assert binomial_ci(0, 0) == (0.0, 1.0)


class TestGrindRate:
    def test_n1_matches_passive_share(self):
        res = grind_capture_rate(trials=3000, fraction=0.5, n=1, w=8, seed=11)
        assert res.analytic == 0.5
        assert res.ci_contains_analytic

    def test_n0_is_zero(self):
        res = grind_capture_rate(trials=100, fraction=0.5, n=0, w=8, seed=12)
        assert res.rate == 0.0 and res.analytic == 0.0


class TestLoadBalance:
    def run_transcript(self, n, throughputs, layers=3, seed=0):
        mixes = []
        for layer in range(1, layers + 1):
            for j, b in enumerate(throughputs, start=1):
                mixes.append(MixSpec(f"L{layer}x{j}", b, layer=layer))
        cfg = TimeFrameConfig(
            n_messages=n, mixes=mixes, layers=layers, k=2, seed=seed, blocks=1,
            messages=[(f"r{i}", f"p{i}".encode()) for i in range(n)],
        )
        result = run_timeframe(cfg)
        assert result.delivered_all
        return import_transcript(result.transcript)

    def test_uniform_exact_split(self):
        entries = self.run_transcript(90, (1, 1, 1))
        report = load_balance_report(entries)
        assert report.balanced
        for row in report.rows:
            assert row.actual == 30
            assert row.deviation == 0

    def test_proportional_within_batch_bound(self):
        entries = self.run_transcript(60, (1, 2))
        report = load_balance_report(entries)
        assert report.balanced
        for row in report.rows:
            expected = 20 if "x1" in row.mix else 40
            assert row.expected == expected
            assert row.deviation < row.bound or row.deviation < 1


def test_monte_carlo_deterministic():
    a = monte_carlo_capture(0.5, 2, trials=300, seed=9, frame_size=150)
    b = monte_carlo_capture(0.5, 2, trials=300, seed=9, frame_size=150)
    assert (a.rate, a.captured) == (b.rate, b.captured)
