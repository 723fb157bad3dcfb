"""Configuration parsing, subcommand dispatch, file formats, exit codes."""

import json

import numpy as np
import pytest

from hetsync import ConfigError
from hetsync.cli import dispatch, parse_angle, parse_config, parse_grid_spec
from hetsync.io import read_trajectory_csv

PI = np.pi


def minimal_config(**overrides):
    doc = {
        "M": 3, "N": 2,
        "alpha2": 1.5707963, "alpha4": 3.1415927,
        "r": 0.05, "K": 0.15,
        "omega": "co-rotating", "eta": 1e-5,
        "dt": 1e-3, "T": 2000, "stride": 100, "seed": 42,
        "initial": {"label": "DSS", "jitter": 0.01},
    }
    doc.update(overrides)
    return doc


class TestParseAngle:
    def test_literals(self):
        assert parse_angle("pi") == pytest.approx(PI)
        assert parse_angle("pi/2") == pytest.approx(PI / 2)
        assert parse_angle("-pi/2") == pytest.approx(-PI / 2)
        assert parse_angle("2pi/3") == pytest.approx(2 * PI / 3)

    def test_numbers(self):
        assert parse_angle("0.25") == 0.25
        assert parse_angle(1.5) == 1.5

    def test_garbage(self):
        with pytest.raises(ConfigError):
            parse_angle("tau")


class TestGridSpec:
    def test_linspace(self):
        assert parse_grid_spec("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]

    def test_single_value(self):
        assert parse_grid_spec("pi/2", angle=True) == [pytest.approx(PI / 2)]

    def test_bad_spec(self):
        with pytest.raises(ConfigError):
            parse_grid_spec("0:1")
        with pytest.raises(ConfigError):
            parse_grid_spec("0:1:0")


class TestParseConfig:
    def test_minimal_document_accepted(self):
        cfg = parse_config(minimal_config())
        assert cfg.params.N == 2
        assert cfg.params.omega == "co-rotating"
        assert cfg.initial_label == "DSS"
        assert cfg.jitter == 0.01

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_config(minimal_config(Kplus=0.3))

    def test_missing_key_named(self):
        doc = minimal_config()
        del doc["eta"]
        with pytest.raises(ConfigError, match="eta"):
            parse_config(doc)

    def test_preset_undefined_for_n5(self):
        with pytest.raises(ConfigError, match="harmonic list"):
            parse_config(minimal_config(N=5))

    def test_n5_with_explicit_harmonics_accepted(self):
        cfg = parse_config(minimal_config(
            N=5, g2_terms=[[1.0, 1, "pi/2"], [-0.05, 2, "pi"]]))
        assert cfg.params.N == 5
        assert cfg.params.g2_terms[1] == (-0.05, 2, pytest.approx(PI))

    def test_zero_dt_rejected(self):
        with pytest.raises(ConfigError, match="dt"):
            parse_config(minimal_config(dt=0.0))

    def test_bad_label_rejected(self):
        with pytest.raises(ConfigError, match="label"):
            parse_config(minimal_config(initial={"label": "DX", "jitter": 0.0}))

    def test_explicit_phases(self):
        cfg = parse_config(minimal_config(initial={"phases": [0, 1, 2, 3, 4, 5]}))
        assert cfg.initial_phases == (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)

    def test_wrong_phase_count(self):
        with pytest.raises(ConfigError, match="length"):
            parse_config(minimal_config(initial={"phases": [0, 1]}))

    def test_type_mismatch_named(self):
        with pytest.raises(ConfigError, match="stride"):
            parse_config(minimal_config(stride="hundred"))


class TestDispatch:
    def test_spectrum_reports_unstable_double_eigenvalue(self, tmp_path, capsys):
        code = dispatch(["spectrum", "--n", "3", "--label", "DSS",
                        "--r", "0.01", "--k", "0.16"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["label"] == "DSS"
        match = [e for e in payload["eigs"]
                 if abs(e["re"] - 0.24) < 1e-9 and e["mult"] == 2]
        assert match
        assert payload["zero_count"] == 0
        assert payload["nu"] == pytest.approx(0.625, abs=1e-6)

    def test_conditions_boundary_point_exits_zero(self, capsys):
        code = dispatch(["conditions", "--n", "3", "--r", "0.01", "--k", "0.15"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["c_psi"] is False
        assert payload["window"] is False

    def test_conditions_n2_json_round_trip(self, capsys):
        code = dispatch(["conditions", "--n", "2", "--r", "0.05", "--k", "0.15"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["window"] is True and payload["c_lambda_prime"] is True
        assert isinstance(payload["margins"]["c_omega"], float)

    def test_verify_cycle_outside_window_exits_one(self, capsys):
        code = dispatch(["verify-cycle", "--n", "2", "--r", "0.5", "--k", "0.7",
                        "--alpha2", "1.5707963"])
        assert code == 1
        assert "no certified cycle" in capsys.readouterr().err

    def test_verify_cycle_n2_evidence(self, tmp_path):
        out = tmp_path / "chain.json"
        code = dispatch(["verify-cycle", "--n", "2", "--r", "0.05", "--k", "0.15",
                        "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["chain"]["flags"]["closed"] is True
        assert len(payload["connections"]) == 6

    def test_scan_writes_regions_csv(self, tmp_path):
        out = tmp_path / "regions.csv"
        code = dispatch(["scan", "--n", "2", "--alpha2", "pi/2",
                        "--r", "0.03:0.07:3", "--k", "0.1:0.2:3",
                        "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "alpha2,r,K,c_omega,c_lambda,c_nu,c_psi,window"
        assert len(lines) == 10
        # (r, K) = (0.05, 0.15) sits in the window; c_psi is empty for n=2
        row = lines[5].split(",")
        assert row[-1] == "1"
        assert row[6] == ""

    def test_usage_error_exit_code(self):
        assert dispatch(["spectrum", "--n", "3", "--label", "DSS"]) == 2
        assert dispatch(["no-such-command"]) == 2

    def test_simulate_and_switches_roundtrip(self, tmp_path):
        cfg = minimal_config(T=50, seed=9)
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        code = dispatch(["simulate", "--config", str(cfg_path),
                        "--out-dir", str(tmp_path)])
        assert code == 0
        times, states, m, n = read_trajectory_csv(tmp_path / "trajectory.csv")
        assert (m, n) == (3, 2)
        assert times[0] == 0.0 and times[-1] == pytest.approx(50.0, abs=1e-3)
        assert np.all((states >= 0) & (states < 2 * PI))
        obs_lines = (tmp_path / "observables.csv").read_text().splitlines()
        assert obs_lines[0] == "t,R_1,R_2,R_3,arg_1,arg_2,arg_3,f_1,f_2,f_3"
        ev_lines = (tmp_path / "events.csv").read_text().splitlines()
        assert ev_lines[0] == "idx,population,t_enter,t_exit,duration"

        out2 = tmp_path / "events2.csv"
        code = dispatch(["switches", "--input", str(tmp_path / "trajectory.csv"),
                        "--out", str(out2)])
        assert code == 0
        assert out2.read_text().splitlines()[0] == "idx,population,t_enter,t_exit,duration"

    def test_simulate_byte_identical_reruns(self, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(minimal_config(T=20, seed=4)))
        a_dir, b_dir = tmp_path / "a", tmp_path / "b"
        for d in (a_dir, b_dir):
            assert dispatch(["simulate", "--config", str(cfg_path),
                            "--out-dir", str(d)]) == 0
        for name in ("trajectory.csv", "trajectory_unwrapped.csv",
                     "observables.csv", "events.csv"):
            assert (a_dir / name).read_bytes() == (b_dir / name).read_bytes(), name

    def test_potential_map_format(self, tmp_path):
        out = tmp_path / "map.csv"
        code = dispatch(["potential-map", "--r", "0.01", "--k", "0.16",
                        "--grid", "30", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "psi1,psi2,V,Q,R,vdot_DpS,vdot_pDS"
        first = lines[1].split(",")
        assert first[4] == ""  # the corner cell is indeterminate for R

    def test_seventeen_digit_roundtrip(self, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(minimal_config(T=5, seed=11)))
        assert dispatch(["simulate", "--config", str(cfg_path),
                        "--out-dir", str(tmp_path)]) == 0
        _, states, _, _ = read_trajectory_csv(tmp_path / "trajectory_unwrapped.csv")
        from hetsync import integrate_em
        from hetsync.cli import initial_state
        cfg = parse_config(minimal_config(T=5, seed=11))
        traj = integrate_em(initial_state(cfg), cfg.params, cfg.dt, 5.0,
                            cfg.stride, seed=11)
        assert np.array_equal(states, traj.states_unwrapped)

    def test_scaling_csv(self, tmp_path):
        out = tmp_path / "scaling.csv"
        code = dispatch(["scaling", "--n", "2", "--r", "0.05", "--k", "0.15",
                        "--etas", "1e-4,1e-5", "--reps", "1", "--t", "600",
                        "--seed-base", "7", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "eta,mean_residence,n_events,status"
        assert len(lines) == 3


class TestWorkerCap:
    def test_env_var_controls_pool(self, monkeypatch):
        from hetsync.cli import worker_count

        monkeypatch.setenv("HETSYNC_THREADS", "3")
        assert worker_count() == 3
        monkeypatch.setenv("HETSYNC_THREADS", "0")
        assert worker_count() >= 1
        monkeypatch.delenv("HETSYNC_THREADS")
        assert worker_count() >= 1
        monkeypatch.setenv("HETSYNC_THREADS", "many")
        with pytest.raises(ConfigError):
            worker_count()


class TestPlotRendering:
    def test_simulate_plot(self, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(minimal_config(T=20, seed=4)))
        code = dispatch(["simulate", "--config", str(cfg_path),
                        "--out-dir", str(tmp_path), "--plot"])
        assert code == 0
        assert (tmp_path / "simulation.png").stat().st_size > 0

    def test_scan_plot(self, tmp_path):
        out = tmp_path / "regions.csv"
        code = dispatch(["scan", "--n", "2", "--alpha2", "pi/2",
                        "--r", "0.02:0.1:6", "--k", "0.05:0.3:6",
                        "--out", str(out), "--plot"])
        assert code == 0
        assert (tmp_path / "regions.png").stat().st_size > 0

    def test_potential_map_plot(self, tmp_path):
        out = tmp_path / "map.csv"
        code = dispatch(["potential-map", "--r", "0.01", "--k", "0.16",
                        "--grid", "25", "--out", str(out), "--plot"])
        assert code == 0
        assert (tmp_path / "map.png").stat().st_size > 0

    def test_scaling_plot(self, tmp_path):
        out = tmp_path / "scaling.csv"
        code = dispatch(["scaling", "--n", "2", "--r", "0.05", "--k", "0.15",
                        "--etas", "1e-4,1e-5", "--reps", "1", "--t", "600",
                        "--seed-base", "7", "--out", str(out), "--plot"])
        assert code == 0
        assert (tmp_path / "scaling.png").stat().st_size > 0
