import itertools
import math

import numpy as np
import pytest

from iqambig.metrics import MetricDescriptor, ScoreTable
from iqambig.stats import (
    benchmark,
    fisher_z_test,
    fit_logistic,
    ingest_subjective,
    mann_whitney,
    plcc,
    rmse,
    srocc,
)


def logistic(q, b1, b2, b3, b4):
    return b1 + (b2 - b1) / (1.0 + np.exp(-(np.asarray(q) - b3) / b4))


class TestLogisticFit:
    def test_recovers_generating_parameters(self):
        beta = (90.0, 10.0, 0.5, 0.1)
        q = np.linspace(0.0, 1.0, 40)
        s = logistic(q, *beta)
        fit = fit_logistic(q, s)
        assert fit.converged
        assert fit.rmse < 1e-6
        assert fit.beta == pytest.approx(beta, rel=1e-4)

    def test_noisy_fit_tracks_the_curve(self):
        rng = np.random.default_rng(7)
        beta = (5.0, 95.0, 40.0, 8.0)
        q = np.linspace(20.0, 60.0, 60)
        s = logistic(q, *beta) + rng.normal(0.0, 2.0, size=q.size)
        fit = fit_logistic(q, s)
        assert fit.converged
        assert plcc(fit(q), s) > 0.99
        assert fit.rmse < 3.0

    def test_prediction_endpoints(self):
        fit = fit_logistic(np.linspace(0, 1, 20), logistic(np.linspace(0, 1, 20), 1, 9, 0.5, 0.15))
        assert fit(np.array([-50.0]))[0] == pytest.approx(1.0, abs=1e-6)
        assert fit(np.array([50.0]))[0] == pytest.approx(9.0, abs=1e-6)

    def test_input_validation(self):
        with pytest.raises(ValueError, match="at least 5"):
            fit_logistic([1, 2, 3, 4], [1, 2, 3, 4])
        with pytest.raises(ValueError, match="constant"):
            fit_logistic([2.0] * 6, [1, 2, 3, 4, 5, 6])
        with pytest.raises(ValueError, match="non-finite"):
            fit_logistic([1, 2, 3, 4, math.nan], [1, 2, 3, 4, 5])
        with pytest.raises(ValueError, match="1-D"):
            fit_logistic([[1, 2, 3, 4, 5]], [[1, 2, 3, 4, 5]])


class TestCorrelations:
    def test_plcc_hand_value(self):
        x = [1.0, 2.0, 3.0, 4.0]
        y = [2.0, 4.0, 5.0, 9.0]
        # deviation products sum to 11; sum of squares 5 and 26
        assert plcc(x, y) == pytest.approx(11.0 / math.sqrt(5.0 * 26.0))

    def test_plcc_affine_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=30)
        y = 2.0 * x + 3.0
        assert plcc(x, y) == pytest.approx(1.0)
        assert plcc(x, -y) == pytest.approx(-1.0)

    def test_plcc_rejects_constant(self):
        with pytest.raises(ValueError, match="constant"):
            plcc([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_srocc_is_rank_based(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        y = [1.0, 8.0, 27.0, 64.0, 125.0]  # monotone but nonlinear
        assert srocc(x, y) == pytest.approx(1.0)
        assert srocc(x, [-v for v in y]) == pytest.approx(-1.0)

    def test_srocc_midranks_for_ties(self):
        # classical formula with tie correction via Pearson on midranks
        x = [1.0, 2.0, 2.0, 4.0]
        y = [10.0, 20.0, 30.0, 40.0]
        rx = [1.0, 2.5, 2.5, 4.0]
        ry = [1.0, 2.0, 3.0, 4.0]
        assert srocc(x, y) == pytest.approx(plcc(rx, ry))

    def test_rmse(self):
        assert rmse([1.0, 2.0], [1.0, 4.0]) == pytest.approx(math.sqrt(2.0))
        assert rmse([3.0], [3.0]) == 0.0


class TestFisherZ:
    def test_frozen_values(self):
        res = fisher_z_test(0.9, 50, 0.8, 50)
        assert res.statistic == pytest.approx(1.811128102462, abs=1e-9)
        assert res.p_value == pytest.approx(0.070121024313, abs=1e-9)
        assert not res.significant  # alpha defaults to 0.01

        res = fisher_z_test(0.95, 30, 0.6, 40)
        assert res.statistic == pytest.approx(4.498593678293, abs=1e-9)
        assert res.p_value == pytest.approx(0.000006840445, abs=1e-12)
        assert res.significant

    def test_symmetry(self):
        a = fisher_z_test(0.9, 40, 0.7, 60)
        b = fisher_z_test(0.7, 60, 0.9, 40)
        assert a.statistic == pytest.approx(-b.statistic)
        assert a.p_value == pytest.approx(b.p_value)

    def test_identical_correlations(self):
        res = fisher_z_test(0.8, 30, 0.8, 30)
        assert res.statistic == 0.0
        assert res.p_value == pytest.approx(1.0)

    def test_input_validation(self):
        with pytest.raises(ValueError, match="magnitude"):
            fisher_z_test(1.0, 30, 0.5, 30)
        with pytest.raises(ValueError, match="at least 4"):
            fisher_z_test(0.5, 3, 0.5, 30)


def _midranks(values):
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size)
    sv = arr[order]
    i = 0
    while i < arr.size:
        j = i
        while j < arr.size and sv[j] == sv[i]:
            j += 1
        ranks[order[i:j]] = (i + j + 1) / 2.0
        i = j
    return ranks


def exact_mw_p(x, y):
    """Full enumeration over all group assignments; oracle for small n."""
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    n_x = len(x)
    offset = n_x * (n_x + 1) / 2.0
    u_obs = ranks[:n_x].sum() - offset
    us = [
        sum(ranks[i] for i in combo) - offset
        for combo in itertools.combinations(range(len(pooled)), n_x)
    ]
    c_le = sum(1 for u in us if u <= u_obs + 1e-9)
    c_ge = sum(1 for u in us if u >= u_obs - 1e-9)
    return min(1.0, 2.0 * min(c_le, c_ge) / len(us))


class TestMannWhitney:
    def test_disjoint_samples_hand_value(self):
        res = mann_whitney([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
        assert res.statistic == 0.0
        assert res.p_value == pytest.approx(0.1)
        assert not res.significant

    @pytest.mark.parametrize("seed", range(8))
    def test_exact_matches_full_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        n_x = int(rng.integers(2, 6))
        n_y = int(rng.integers(2, 6))
        # draw from a tiny lattice so ties occur often
        x = rng.integers(0, 4, size=n_x).astype(float)
        y = rng.integers(0, 4, size=n_y).astype(float)
        res = mann_whitney(x, y)
        assert res.p_value == pytest.approx(exact_mw_p(x, y), abs=1e-12)

    def test_identical_samples_not_significant(self):
        res = mann_whitney([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert res.p_value == 1.0
        assert not res.significant

    def test_shifted_large_samples_significant(self):
        rng = np.random.default_rng(11)
        x = rng.normal(0.0, 1.0, size=40)
        y = rng.normal(2.0, 1.0, size=40)  # 40*40 > 400: normal path
        res = mann_whitney(x, y)
        assert res.significant
        assert res.p_value < 1e-6

    def test_exact_and_normal_agree_near_the_crossover(self):
        rng = np.random.default_rng(5)
        x = rng.normal(0.0, 1.0, size=20)
        y = rng.normal(0.6, 1.0, size=20)
        exact = mann_whitney(x, y)  # 20*20 = 400: exact path
        approx = mann_whitney(np.concatenate([x, [x.mean()]]), y)  # 21*20: normal path
        assert exact.p_value == pytest.approx(approx.p_value, rel=0.25)

    def test_constant_pool_degenerate(self):
        x = np.full(25, 3.0)
        y = np.full(25, 3.0)  # 625 > 400 and zero variance
        res = mann_whitney(x, y)
        assert res.p_value == 1.0

    def test_input_validation(self):
        with pytest.raises(ValueError, match="non-empty"):
            mann_whitney([], [1.0])


class TestIngestSubjective:
    def write(self, tmp_path, rows, header="content,distortion,level,score,score_type"):
        path = tmp_path / "subjective.csv"
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        return path

    def test_mos_and_dmos(self, tmp_path):
        path = self.write(
            tmp_path,
            ["img1,gaussian-blur,1,75.5,mos", "img1,gaussian-blur,2,30.0,dmos"],
        )
        ratings = ingest_subjective(path)
        assert ratings[("img1", "gaussian-blur", 1)] == 75.5
        assert ratings[("img1", "gaussian-blur", 2)] == -30.0

    def test_bad_header(self, tmp_path):
        path = self.write(tmp_path, [], header="a,b,c")
        with pytest.raises(ValueError, match="header"):
            ingest_subjective(path)

    def test_duplicate_key(self, tmp_path):
        path = self.write(tmp_path, ["a,b,1,5,mos", "a,b,1,6,mos"])
        with pytest.raises(ValueError, match="duplicate"):
            ingest_subjective(path)

    def test_bad_score_type(self, tmp_path):
        path = self.write(tmp_path, ["a,b,1,5,opinion"])
        with pytest.raises(ValueError, match="score_type"):
            ingest_subjective(path)

    def test_non_finite_score(self, tmp_path):
        path = self.write(tmp_path, ["a,b,1,inf,mos"])
        with pytest.raises(ValueError, match="non-finite"):
            ingest_subjective(path)

    def test_short_row(self, tmp_path):
        path = self.write(tmp_path, ["a,b,1,5"])
        with pytest.raises(ValueError, match="fields"):
            ingest_subjective(path)


def synthetic_table(levels, noise_by_metric, seed=0):
    """Scores correlated with a hidden quality variable, one imperfection knob per metric."""
    rng = np.random.default_rng(seed)
    quality = np.linspace(90.0, 10.0, levels)
    entries = {}
    descriptors = {}
    subjective = {}
    for metric, noise in noise_by_metric.items():
        descriptors[metric] = MetricDescriptor(metric, "higher")
        for content in ("c1", "c2"):
            for level in range(1, levels + 1):
                q = quality[level - 1] + rng.normal(0.0, noise)
                entries[(content, "gaussian-blur", level, metric)] = q
    for content in ("c1", "c2"):
        for level in range(1, levels + 1):
            subjective[(content, "gaussian-blur", level)] = quality[level - 1]
    return ScoreTable(entries=entries, descriptors=descriptors), subjective


class TestBenchmark:
    def test_ranking_and_top_group(self):
        table, subjective = synthetic_table(12, {"sharp": 0.5, "fuzzy": 25.0}, seed=4)
        report = benchmark(table, subjective)
        rows = {row.metric: row for row in report.accuracy}
        assert rows["sharp"].plcc > rows["fuzzy"].plcc
        assert rows["sharp"].top_group  # best metric always tops its group
        assert rows["sharp"].fisher_p == 1.0
        assert not rows["fuzzy"].top_group
        assert report.coverage_gaps == {}
        assert report.alpha == 0.01

    def test_equal_metrics_share_the_top_group(self):
        table, subjective = synthetic_table(12, {"a": 1.0, "b": 1.0}, seed=9)
        report = benchmark(table, subjective)
        assert all(row.top_group for row in report.accuracy)

    def test_width_tests_present_and_ordered(self):
        table, subjective = synthetic_table(8, {"a": 1.0, "b": 1.0}, seed=2)
        widths = {
            ("a", "gaussian-blur"): [0.001, 0.002, 0.001, 0.003],
            ("b", "gaussian-blur"): [0.4, 0.5, 0.6, 0.7],
        }
        report = benchmark(table, subjective, widths=widths)
        assert len(report.width_tests) == 1
        cmp = report.width_tests[0]
        assert (cmp.metric_a, cmp.metric_b) == ("a", "b")
        assert cmp.u_statistic == 0.0  # every a-width below every b-width

    def test_missing_scores_counted_as_gaps(self):
        table, subjective = synthetic_table(8, {"a": 1.0}, seed=3)
        subjective[("c3", "gaussian-blur", 1)] = 50.0  # no scores for c3
        report = benchmark(table, subjective)
        assert report.coverage_gaps[("a", "gaussian-blur")] == 1
