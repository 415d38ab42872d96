import math
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest

from cvsuperpose.errors import BracketError
from cvsuperpose.sweep import (
    FIGURES,
    PNES_COLUMNS,
    SWEEP_COLUMNS,
    PnesRecord,
    SweepRecord,
    ThresholdQuery,
    best_value,
    evaluate,
    figure_curves,
    figure_tasks,
    find_crossover,
    find_threshold,
    golden_section_max,
    improvement,
    optimize_r,
    records_frame,
    run_figure_sweep,
    write_figure,
)


class TestEvaluate:
    @pytest.mark.parametrize("s", [0.0, 0.25, 0.8])
    def test_tmss_epr(self, config, s):
        assert evaluate("epr", "tmss", s, config=config) == pytest.approx(2 * math.exp(-2 * s), abs=1e-12)

    def test_tmss_fidelity_at_zero(self, config):
        assert evaluate("fidelity", "tmss", 0.0, config=config) == pytest.approx(0.5, abs=1e-12)

    def test_vanishing_state_uses_limit(self, config):
        assert evaluate("epr", "sub_A", 0.0, config=config) == pytest.approx(4.0, abs=1e-5)

    def test_entropy_of_unsqueezed_addition(self, config):
        assert evaluate("entropy", "add_AB", 0.0, config=config) == pytest.approx(0.0, abs=1e-12)

    def test_coherent_needs_r(self, config):
        with pytest.raises(ValueError):
            evaluate("epr", "coherent_AB", 0.3, config=config)

    def test_unknown_names(self, config):
        with pytest.raises(ValueError):
            evaluate("purity", "tmss", 0.3, config=config)
        with pytest.raises(ValueError):
            evaluate("epr", "sub_C", 0.3, config=config)

    def test_routes_agree_for_coherent_entropy_and_epr(self, config):
        epr = evaluate("epr", "coherent_AB", 0.4, 0.3, config)
        fidelity = evaluate("fidelity", "coherent_AB", 0.4, 0.3, config)
        assert 0.0 < epr < 4.0
        assert 0.5 < fidelity < 1.0

    def test_asymmetric_r(self, config):
        symmetric = evaluate("epr", "coherent_AB", 0.3, 0.4, config)
        asymmetric = evaluate("epr", "coherent_AB", 0.3, 0.4, config, r_b=0.9)
        assert symmetric != pytest.approx(asymmetric)


class TestOptimize:
    def test_golden_section_on_parabola(self):
        x, y = golden_section_max(lambda v: -(v - 0.3) ** 2, 0.0, 1.0, tol=1e-8)
        assert x == pytest.approx(0.3, abs=1e-7)
        assert y == pytest.approx(0.0, abs=1e-12)

    def test_golden_section_narrow_interval(self):
        x, _ = golden_section_max(lambda v: v, 0.5, 0.5 + 1e-9, tol=1e-6)
        assert x == pytest.approx(0.5, abs=1e-8)

    def test_coherent_epr_optimum_at_weak_squeezing(self, config):
        r, value = optimize_r("epr", 0.06, "coherent_AB", config)
        assert 0.0 < r < 1.0
        assert value == pytest.approx(1.30, abs=0.02)

    def test_coherent_epr_optimum_beats_grid(self, config):
        r, value = optimize_r("epr", 0.3, "coherent_AB", config)
        grid = [evaluate("epr", "coherent_AB", 0.3, x, config) for x in np.linspace(0, 1, 11)]
        assert value <= min(grid) + 1e-12

    def test_needs_coherent_strategy(self, config):
        with pytest.raises(ValueError):
            optimize_r("epr", 0.3, "sub_AB", config)

    def test_coherent_entropy_at_weak_squeezing(self, config):
        _, value = optimize_r("entropy", 0.1, "coherent_AB", config)
        assert value == pytest.approx(1.0, abs=0.05)

    def test_single_mode_coherent_entropy_at_weak_squeezing(self, config):
        _, value = optimize_r("entropy", 0.1, "coherent_A", config)
        assert value == pytest.approx(1.0038, abs=0.01)

    def test_subtraction_is_epr_optimal_at_strong_squeezing(self, config):
        r, value = optimize_r("epr", 1.0, "coherent_AB", config)
        assert r == pytest.approx(0.0, abs=1e-5)
        assert value == pytest.approx(evaluate("epr", "sub_AB", 1.0, config=config), abs=1e-9)

    def test_weaker_squeezing_gives_lower_epr_optimum(self, config):
        assert best_value("epr", "coherent_AB", 0.01, config) < best_value("epr", "coherent_AB", 0.06, config)

    @pytest.mark.parametrize("metric, s", [("epr", 0.06), ("fidelity", 0.01)])
    def test_neighbours_of_optimum_are_no_better(self, config, metric, s):
        r, value = optimize_r(metric, s, "coherent_AB", config)
        for shifted in (r - 1e-3, r + 1e-3):
            neighbour = evaluate(metric, "coherent_AB", s, min(max(shifted, 0.0), 1.0), config)
            if metric == "epr":
                assert neighbour >= value - 1e-10
            else:
                assert neighbour <= value + 1e-10


class TestThresholds:
    def test_tmss_epr_reaches_one(self, config):
        query = ThresholdQuery("epr", "tmss", target=1.0, bracket=(0.1, 0.6))
        assert find_threshold(query, config) == pytest.approx(math.log(2) / 2, abs=1e-4)

    def test_target_at_endpoint(self, config):
        query = ThresholdQuery("epr", "tmss", target=2.0, bracket=(0.0, 1.0))
        assert find_threshold(query, config) == 0.0

    def test_no_straddle(self, config):
        query = ThresholdQuery("epr", "tmss", target=3.0, bracket=(0.1, 0.6))
        with pytest.raises(BracketError):
            find_threshold(query, config)

    def test_query_validation(self):
        with pytest.raises(ValueError):
            ThresholdQuery("epr", "tmss", target=2.0, bracket=(0.6, 0.1))
        with pytest.raises(ValueError):
            ThresholdQuery("epr", "coherent_AB", target=2.0, bracket=(0.1, 0.6))
        with pytest.raises(ValueError):
            ThresholdQuery("epr", "coherent_AB", target=2.0, bracket=(0.1, 0.6), r=0.5, optimize_r=True)

    def test_improvement_sign(self, config):
        # sub_A doubles the EPR correlation of the squeezed vacuum
        assert improvement("epr", "tmss", "sub_A", 0.4, config) == pytest.approx(2 * math.exp(-0.8), abs=1e-10)

    def test_crossover_without_order_change(self, config):
        with pytest.raises(BracketError):
            find_crossover("epr", "tmss", "sub_A", (0.1, 0.6), config)

    def test_crossover_bracket_validation(self, config):
        with pytest.raises(ValueError):
            find_crossover("epr", "tmss", "sub_A", (0.5, 0.5), config)


class TestRecords:
    def test_record_rejects_nan_value(self):
        with pytest.raises(ValueError):
            SweepRecord(0.1, float("nan"), "tmss", "epr", float("nan"))

    def test_sort_puts_missing_r_first(self):
        records = [SweepRecord(0.1, 0.5, "coherent_AB", "epr", 1.0), SweepRecord(0.1, float("nan"), "tmss", "epr", 1.6)]
        ordered = sorted(records, key=SweepRecord.sort_key)
        assert ordered[0].strategy == "tmss"

    def test_frames_have_fixed_columns(self):
        sweep = records_frame([SweepRecord(0.1, float("nan"), "tmss", "epr", 1.6)])
        pnes = records_frame([PnesRecord("diagonal", 0, "epr", 2.0)])
        assert list(sweep.columns) == SWEEP_COLUMNS
        assert list(pnes.columns) == PNES_COLUMNS


class TestFigures:
    def test_unknown_figure(self, config):
        with pytest.raises(ValueError):
            figure_tasks("7", config)

    def test_surface_task_count(self, config):
        assert len(figure_tasks("2", config)) == config.grid_s * config.grid_r

    def test_r_curve_tasks(self, config):
        tasks = figure_tasks("3b", config)
        assert len(tasks) == 2 * config.grid_r
        assert {t.s for t in tasks} == {0.01, 0.06}

    def test_fidelity_surface_is_a_probability(self, config):
        records = run_figure_sweep("5", config)
        assert records
        assert all(0.0 <= r.value <= 1.0 for r in records)

    def test_surface_sweep_sorted(self, config):
        records = run_figure_sweep("2", config)
        keys = [(r.s, r.r) for r in records]
        assert keys == sorted(keys)
        assert all(r.metric == "epr" and r.strategy == "coherent_AB" for r in records)

    def test_curve_sweep_files(self, config, tmp_path):
        records = run_figure_sweep("3a", config)
        paths = write_figure("3a", records, tmp_path)
        names = sorted(p.name for p in paths)
        assert names == sorted(f"fig3a_{s}.csv" for s in ("tmss", "sub_A", "sub_AB", "addsub_AB", "coherent_AB"))

        tmss = pd.read_csv(tmp_path / "fig3a_tmss.csv")
        assert list(tmss.columns) == SWEEP_COLUMNS
        assert tmss["r"].isna().all()
        np.testing.assert_allclose(tmss["value"], 2 * np.exp(-2 * tmss["s"]), atol=1e-11)

        coherent = pd.read_csv(tmp_path / "fig3a_coherent_AB.csv")
        assert coherent["r"].between(0, 1).all()
        assert (coherent["value"] <= tmss["value"] + 1e-9).all()

    def test_csv_text_format(self, config, tmp_path):
        write_figure("2", run_figure_sweep("2", replace(config, grid_s=2, grid_r=2)), tmp_path)
        text = (tmp_path / "fig2.csv").read_bytes().decode()
        assert text.startswith("s,r,strategy,metric,value\n")
        assert "\r" not in text

    def test_r_curve_stems(self, config):
        curves = figure_curves("3b", run_figure_sweep("3b", config))
        assert list(curves) == ["fig3b_coherent_AB_s0.01", "fig3b_coherent_AB_s0.06"]

    def test_parallel_matches_serial(self, config):
        serial = run_figure_sweep("2", config)
        parallel = run_figure_sweep("2", replace(config, workers=2))
        assert [r.value for r in serial] == pytest.approx([r.value for r in parallel], abs=0)

    @pytest.mark.slow
    def test_pnes_figure(self, tmp_path):
        records = run_figure_sweep("4")
        paths = write_figure("4", records, tmp_path)
        assert sorted(p.name for p in paths) == ["fig4_diagonal.csv", "fig4_ladder.csv"]
        diagonal = pd.read_csv(tmp_path / "fig4_diagonal.csv")
        assert list(diagonal.columns) == PNES_COLUMNS
        assert diagonal["value"].is_monotonic_decreasing

    def test_every_figure_is_known(self, config):
        for figure_id in FIGURES:
            if figure_id != "4":
                assert figure_tasks(figure_id, config)
