import json
import time

import numpy as np
import pytest

from conftest import V_S
from cvcoherence.errors import NoCrossingError, ParameterError, SweepPointError
from cvcoherence.metrics import coherence, ppt_value
from cvcoherence.sweep import (
    SweepConfig,
    coherence_surface,
    emit_report,
    find_threshold,
    load_config,
    load_report,
    report_csv,
    run_all_figures,
    run_sweep,
    scenario_state,
    source_state,
    squeezing_threshold_closed_form,
)


class TestRunSweep:
    def test_squeezed_loss(self):
        res = run_sweep(SweepConfig("squeezed_loss"))
        coh = res.column("coherence_bits")
        assert len(res.rows) == 41
        assert np.all(np.diff(coh) < 0)
        assert coh[-1] == 0.0
        assert coh[0] == pytest.approx(coherence(source_state("squeezed")).coherence_bits)
        assert res.column("ppt_value") == [None] * 41

    def test_epr_loss(self):
        res = run_sweep(SweepConfig("epr_loss"))
        loss = np.array(res.column("loss"))
        ppt = np.array(res.column("ppt_value"))
        assert np.all(ppt[loss < 1] < 1)
        assert res.column("squeezing_db_X") == [None] * 41

    def test_squeezed_noise(self):
        res = run_sweep(SweepConfig("squeezed_noise"))
        assert all(c > 0 for c in res.column("coherence_bits"))
        assert res.columns[0] == "excess_noise"

    def test_bad_configs(self):
        with pytest.raises(ParameterError):
            SweepConfig("nonsense")
        with pytest.raises(ParameterError):
            SweepConfig("squeezed_loss", grid=(0, 2, 5))
        with pytest.raises(ParameterError):
            SweepConfig("squeezed_noise", grid=(1, 0, 5))
        with pytest.raises(ParameterError):
            SweepConfig("squeezed_noise", grid=(0, 1, 1))

    def test_point_error(self):
        with pytest.raises(SweepPointError) as info:
            run_sweep(SweepConfig("squeezed_loss", source_db=(-3.0, 1.0), grid=(0, 1, 3)))
        assert info.value.index == 0

    def test_sampled_within_3_sigma(self):
        for scenario in ("squeezed_loss", "epr_noise_one_mode", "epr_noise_two_modes"):
            cfg = SweepConfig(scenario, grid=(0.0, 1.0, 6), sampling=(500_000, 12345))
            res = run_sweep(cfg)
            for name in ("squeezing_db_X", "squeezing_db_Y", "ppt_value", "coherence_bits"):
                truth = res.column(name)
                got = res.column(f"{name}_sampled")
                err = res.column(f"{name}_err")
                for t, g, e in zip(truth, got, err):
                    if t is None:
                        assert g is None and e is None
                        continue
                    assert abs(g - t) <= 3 * e, (scenario, name, t, g, e)
            assert res.metadata["seeds"] == [12345 ^ i for i in range(6)]


class TestThresholds:
    def test_squeezing(self):
        d = find_threshold("squeezed_noise", "squeezing_crosses_snl", 0.4)
        assert d == pytest.approx(0.74, abs=0.005)
        closed = squeezing_threshold_closed_form(V_S, 0.4)
        assert closed == pytest.approx(0.73952, abs=1e-5)
        assert d == pytest.approx(closed, abs=1e-6)

    def test_one_mode(self):
        d = find_threshold("epr_noise_one_mode", "ppt_crosses_one", 0.4)
        assert d == pytest.approx(2.14, abs=0.02)
        state = scenario_state("epr_noise_one_mode", 0.4, d)
        assert ppt_value(state).ppt_value == pytest.approx(1.0, abs=1e-6)

    def test_two_modes(self):
        d = find_threshold("epr_noise_two_modes", "ppt_crosses_one", 0.4)
        assert d == pytest.approx(0.74, abs=0.005)

    def test_override_source_uses_closed_form(self):
        src = (-6.0, 8.0)
        v_s = 10 ** (-0.6)
        for loss in (0.2, 0.5, 0.8):
            d = find_threshold("squeezed_noise", "squeezing_crosses_snl", loss, src)
            assert d == pytest.approx(squeezing_threshold_closed_form(v_s, loss), abs=1e-6)

    def test_no_crossing(self):
        with pytest.raises(NoCrossingError, match="delta=0"):
            find_threshold("epr_noise_one_mode", "ppt_crosses_one", 0.4, (0.0, 0.0))
        with pytest.raises(NoCrossingError, match="delta=100"):
            find_threshold("squeezed_noise", "squeezing_crosses_snl", 0.0)

    def test_bad_metric(self):
        with pytest.raises(ParameterError):
            find_threshold("squeezed_noise", "ppt_crosses_one")
        with pytest.raises(ParameterError):
            find_threshold("epr_noise_one_mode", "squeezing_crosses_snl")
        with pytest.raises(ParameterError):
            find_threshold("epr_noise_one_mode", "steering")


def test_two_mode_scenario_symmetry():
    for loss in (0.1, 0.4, 0.7):
        for d in (0.0, 0.5, 1.0):
            s = scenario_state("epr_noise_two_modes", loss, d)
            perm = [2, 3, 0, 1]
            from cvcoherence.core import CovarianceMatrix, GaussianState

            swapped = GaussianState(CovarianceMatrix(s.matrix[np.ix_(perm, perm)]))
            assert ppt_value(s).ppt_value == pytest.approx(ppt_value(swapped).ppt_value, abs=1e-12)


class TestReports:
    def test_parse_back(self, tmp_path):
        res = run_sweep(SweepConfig("epr_noise_one_mode", grid=(0, 5, 11)))
        csv_path, meta_path = emit_report(res, tmp_path / "out.csv")
        back = load_report(csv_path)
        assert back.columns == res.columns
        assert back.rows == res.rows
        meta = json.loads(meta_path.read_text())
        assert meta["config"]["scenario"] == "epr_noise_one_mode"
        assert meta["version"]

    def test_byte_identical(self, tmp_path):
        res = run_sweep(SweepConfig("squeezed_noise", grid=(0, 5, 7), sampling=(2_000, 3)))
        p1, _ = emit_report(res, tmp_path / "a.csv")
        p2, _ = emit_report(load_report(p1), tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_error_bar_columns(self):
        res = run_sweep(SweepConfig("squeezed_noise", grid=(0, 5, 3), sampling=(2_000, 3)))
        for name in ("coherence_bits_sampled", "coherence_bits_err", "ppt_value_err"):
            assert name in res.columns
        assert res.column("ppt_value_err") == [None] * 3

    def test_null_markers(self):
        text = report_csv(run_sweep(SweepConfig("squeezed_noise", grid=(0, 5, 3))))
        lines = text.splitlines()
        assert lines[0] == "excess_noise,squeezing_db_X,squeezing_db_Y,ppt_value,coherence_bits"
        assert all(line.split(",")[3] == "null" for line in lines[1:])


class TestFigures:
    def test_all_figures(self, tmp_path):
        start = time.perf_counter()
        written = run_all_figures(tmp_path)
        assert time.perf_counter() - start < 60
        assert len(written) == 10
        for name in ("surface_squeezed", "surface_epr_one_mode", "surface_epr_two_modes"):
            surf = load_report(written[name])
            coh = np.array(surf.column("coherence_bits")).reshape(41, 41)
            assert np.all(np.diff(coh, axis=0) <= 1e-12)
            assert np.all(np.diff(coh, axis=1) <= 1e-12)
        loss = load_report(written["squeezed_loss"])
        assert loss.column("coherence_bits")[0] == pytest.approx(
            coherence(source_state("squeezed")).coherence_bits, abs=1e-12
        )
        thresholds = json.loads(written["thresholds"].read_text())["thresholds"]
        assert thresholds["epr_noise_one_mode:ppt_crosses_one"] == pytest.approx(2.14, abs=0.02)

    def test_surface_matches_pointwise(self):
        losses = [0.0, 0.3, 0.9]
        noises = [0.0, 1.0, 4.0]
        surf = coherence_surface("epr_noise_two_modes", losses, noises)
        for (l, d, c) in surf.rows:
            s = scenario_state("epr_noise_two_modes", l, d)
            assert c == pytest.approx(coherence(s).coherence_bits, abs=1e-12)


def test_load_config(tmp_path):
    path = tmp_path / "c.ini"
    path.write_text(
        "[sweep]\nscenario = epr_noise_two_modes\nsource_db = -2.95, 4.15\nfixed_loss = 0.4\n"
        "grid = 0, 5, 11\n\n[sampling]\nn = 1000\nseed = 9\n\n[threshold]\nmetric = ppt_crosses_one\n"
    )
    cfg, metric = load_config(path)
    assert cfg.scenario == "epr_noise_two_modes"
    assert cfg.grid == (0.0, 5.0, 11)
    assert cfg.sampling == (1000, 9)
    assert metric == "ppt_crosses_one"
