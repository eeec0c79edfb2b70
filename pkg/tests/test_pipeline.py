import math

import numpy as np
import pytest

from countmech import (
    CapacityError,
    CountTable,
    InputError,
    PipelineConfig,
    PrivacyParam,
    generate_synthetic,
    in_F,
    rule_of_thumb_split,
    run_two_stage,
)
from countmech.pipeline import (
    CONSTRUCTORS,
    DATASETS,
    bench,
    config_with,
    construct_mechanism,
    loglog_slope,
    run_experiment,
)


@pytest.fixture(scope="module")
def table():
    return generate_synthetic("binomial", {"size": 10, "N": 2000}, seed=1)


class TestRuleOfThumb:
    def test_values(self):
        assert rule_of_thumb_split(1.0) == pytest.approx(0.106 + 0.533 * math.exp(-2.87))
        assert rule_of_thumb_split(1.0) == pytest.approx(0.1362, abs=5e-5)

    def test_asymptotes(self):
        assert rule_of_thumb_split(1e-9) == pytest.approx(0.639, abs=1e-6)
        assert rule_of_thumb_split(1e3) == pytest.approx(0.106, abs=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(InputError):
            rule_of_thumb_split(0.0)


class TestConfig:
    def test_budget_split(self):
        cfg = PipelineConfig(1.0, 5, split_fraction=0.25)
        assert (cfg.epsilon_1, cfg.epsilon_2) == (0.25, 0.75)
        assert PipelineConfig(1.0, 5, "staircase").epsilon_2 == 1.0

    @pytest.mark.parametrize("bad", [
        dict(epsilon_total=0.0), dict(constructor="greedy"), dict(split_fraction=1.0),
        dict(privatizer="cyclic-gaussian"), dict(error_kind="mae"), dict(seed=-1),
        dict(numeric_mode="decimal"), dict(lp_method="ipm"),
    ])
    def test_invalid(self, bad):
        args = dict(epsilon_total=1.0, n=5)
        args.update(bad)
        with pytest.raises(InputError):
            PipelineConfig(**args)

    def test_config_with(self):
        cfg = config_with(PipelineConfig(1.0, 5), constructor="lp-fixed")
        assert cfg.constructor == "lp-fixed" and cfg.n == 5


@pytest.mark.parametrize("constructor", CONSTRUCTORS)
def test_every_constructor_runs(table, constructor):
    cfg = PipelineConfig(1.0, table.n, constructor, seed=3)
    out, report = run_two_stage(table, cfg)
    assert out.N == table.N and out.categories == table.categories
    assert out.counts.min() >= 0 and out.counts.max() <= table.n - 1
    assert set(report.distances) == {"wasserstein1", "ks", "tv"}
    assert report.expected_count_error >= 0
    if cfg.is_baseline:
        assert report.z is None and report.f == 0.0
    else:
        assert report.z is not None and report.epsilon_1 + report.epsilon_2 == pytest.approx(1.0)


def test_fixed_point_holds_for_privatized_z(table):
    cfg = PipelineConfig(1.0, table.n, "heuristic-sandwich", seed=2)
    _, report = run_two_stage(table, cfg)
    T, _, _ = construct_mechanism(np.asarray(report.z), cfg)
    assert in_F(T, report.z, PrivacyParam.from_epsilon(cfg.epsilon_2), tol=1e-9)


def test_auto_picks_lowest_error(table):
    errors = {}
    for sel in ("max", "min", "sandwich"):
        _, rep = run_two_stage(table, PipelineConfig(1.0, table.n, f"heuristic-{sel}", seed=4))
        errors[sel] = rep.expected_count_error
    _, rep = run_two_stage(table, PipelineConfig(1.0, table.n, "heuristic-auto", seed=4))
    assert rep.selector == min(errors, key=errors.get)
    assert rep.expected_count_error == pytest.approx(min(errors.values()))


def test_determinism(table):
    cfg = PipelineConfig(0.8, table.n, "lp-fixed", seed=9)
    out1, rep1 = run_two_stage(table, cfg)
    out2, rep2 = run_two_stage(table, cfg)
    assert np.array_equal(out1.counts, out2.counts)
    assert rep1.to_json(include_timings=False) == rep2.to_json(include_timings=False)


def test_rational_mode(table):
    cfg = PipelineConfig(1.0, table.n, "heuristic-sandwich", seed=5, numeric_mode="rational")
    _, rep = run_two_stage(table, cfg)
    num, den = (int(x) for x in rep.lam.split("/"))
    assert num / den <= math.exp(cfg.epsilon_2)
    assert den <= 10 ** 6


def test_floor_z(table):
    cfg = PipelineConfig(1.0, table.n, seed=5, floor_z=True)
    _, rep = run_two_stage(table, cfg)
    # clamped then renormalized: full support, smallest entry near the floor
    assert min(rep.z) > 0
    assert min(rep.z) == pytest.approx(1 / (10 * table.N), rel=1e-2)


def test_gaussian_privatizer(table):
    cfg = PipelineConfig(1.0, table.n, privatizer="cyclic-gaussian", sigma=0.01, seed=2)
    _, rep = run_two_stage(table, cfg)
    assert rep.privatizer == "cyclic-gaussian"


def test_lp_capacity(table):
    cfg = PipelineConfig(1.0, table.n, "lp-fixed", lp_max_n=5)
    with pytest.raises(CapacityError):
        run_two_stage(table, cfg)


def test_empty_table():
    with pytest.raises(InputError):
        run_two_stage(CountTable.from_counts([], 3), PipelineConfig(1.0, 3))


class TestDatasets:
    @pytest.mark.parametrize("kind, N, n", [
        ("uniform", 3000, 30), ("left-skewed", 10_000, 70), ("right-skewed", 10_000, 70),
        ("bimodal", 20_000, 40), ("zero-inflated", 10_000, 80), ("top-inflated", 10_000, 80),
    ])
    def test_sizes(self, kind, N, n):
        t = generate_synthetic(kind, seed=0)
        assert t.N == N and t.n == n

    def test_mixture_parts(self):
        assert np.all(generate_synthetic("zero-inflated", seed=0).counts[:200] == 0)
        assert np.all(generate_synthetic("top-inflated", seed=0).counts[-100:] == 79)

    def test_skew_direction(self):
        left = generate_synthetic("left-skewed", seed=0).counts.mean()
        right = generate_synthetic("right-skewed", seed=0).counts.mean()
        assert left > 34.5 > right

    def test_binomial(self):
        t = generate_synthetic("binomial", {"size": 20, "p": 0.5, "N": 10_000}, seed=0)
        assert t.n == 21 and abs(t.counts.mean() - 10) < 0.1

    def test_errors(self):
        with pytest.raises(InputError):
            generate_synthetic("poisson")
        with pytest.raises(InputError):
            generate_synthetic("uniform", {"N": 10})
        assert len(DATASETS) == 7


def test_bench_rows_and_slope():
    rows = bench(["heuristic-sandwich", "truncated-geometric"], [8, 16], epsilon_total=1.0, seed=0, N=500)
    assert [(r["constructor"], r["n"]) for r in rows] == [
        ("heuristic-sandwich", 8), ("heuristic-sandwich", 16),
        ("truncated-geometric", 8), ("truncated-geometric", 16)]
    assert all(r["wall_ms"] > 0 for r in rows)
    assert loglog_slope([10, 100, 1000], [1, 100, 10_000]) == pytest.approx(2.0)
    with pytest.raises(InputError):
        bench(["nope"], [8])


def test_experiment_pairs_replicates(table):
    res = run_experiment(table, ["heuristic-sandwich", "unfixed-optimum"], 1.0, replicates=5, seed=1)
    assert res.metrics["heuristic-sandwich"]["wasserstein1"].shape == (5,)
    assert len(res.to_rows()) == 10
    assert set(res.summary()) == {"heuristic-sandwich", "unfixed-optimum"}
    # unfixed optimum minimizes over a superset of F for the same z
    assert np.all(res.metrics["unfixed-optimum"]["count_error"]
                  <= res.metrics["heuristic-sandwich"]["count_error"] + 1e-12)
