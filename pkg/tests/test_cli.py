import json

import numpy as np
import pytest

from relaybeam import fixtures
from relaybeam.cli import main, parse_scenario, reproduce, run
from relaybeam.errors import InputError
from relaybeam.indiv_diag import solve_diagonal
from relaybeam.problems import IndivPowerProblem


def cpair(z):
    return [float(np.real(z)), float(np.imag(z))]


def cmat(M):
    return [[cpair(v) for v in row] for row in np.asarray(M)]


def write_scenario(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def diagonal_scenario(tmp_path, solver="indiv-diag"):
    payload = {
        "mode": "individual",
        "sigma2": 1.0,
        "channel": {"stats": {"D": [1.0, 1.0, 1.0],
                              "R": cmat(np.diag([2.0, 1.0, 0.5])),
                              "Q": cmat(np.eye(3))}},
        "budget": {"Ps": 1.0, "P": [1.0, 1.0, 1.0]},
        "solver": {"name": solver},
        "seed": 7,
    }
    return write_scenario(tmp_path / "scenario.json", payload), payload


def fixture_scenario(tmp_path, solver="sdp"):
    R, Q = fixtures.indiv_fixture(4)
    payload = {
        "mode": "individual",
        "sigma2": 1.0,
        "channel": {"stats": {"D": [1.0] * 4, "R": cmat(R), "Q": cmat(Q)}},
        "budget": {"Ps": 1.0, "P": [2.0] * 4},
        "solver": {"name": solver},
        "seed": 11,
    }
    return write_scenario(tmp_path / "n4.json", payload), payload


class TestParseScenario:
    def test_minimal_diagonal(self, tmp_path):
        path, _ = diagonal_scenario(tmp_path)
        s = parse_scenario(path)
        assert s.mode == "individual"
        assert s.solver == "indiv-diag"
        assert s.stats().is_diagonal()

    def test_fixture_matrices_exact(self, tmp_path):
        path, _ = fixture_scenario(tmp_path)
        s = parse_scenario(path)
        R, Q = fixtures.indiv_fixture(4)
        stats = s.stats()
        assert np.array_equal(stats.R, R)
        assert np.array_equal(stats.Q, Q)

    def test_non_hermitian_rejected(self, tmp_path):
        bad = np.eye(3, dtype=complex)
        bad = bad.tolist()
        bad[0][1] = 5.0  # asymmetric entry
        payload = {
            "mode": "individual", "sigma2": 1.0,
            "channel": {"stats": {"D": [1, 1, 1],
                                  "R": cmat(np.eye(3)),
                                  "Q": [[cpair(v) for v in row] for row in
                                        [[1, 5, 0], [0, 1, 0], [0, 0, 1]]]}},
            "budget": {"Ps": 1.0, "P": [1, 1, 1]},
        }
        path = write_scenario(tmp_path / "bad.json", payload)
        with pytest.raises(InputError, match="Hermitian"):
            parse_scenario(path)

    def test_missing_field_named(self, tmp_path):
        payload = {"mode": "individual", "sigma2": 1.0,
                   "channel": {"stats": {"D": [1], "R": cmat(np.eye(1)),
                                         "Q": cmat(np.eye(1))}},
                   "budget": {"Ps": 1.0}}
        path = write_scenario(tmp_path / "missing.json", payload)
        with pytest.raises(InputError, match="budget.P"):
            parse_scenario(path)

    def test_both_channel_representations_rejected(self, tmp_path):
        payload = {"mode": "individual", "sigma2": 1.0,
                   "channel": {"stats": {"D": [1], "R": cmat(np.eye(1)),
                                         "Q": cmat(np.eye(1))},
                               "rician": {}},
                   "budget": {"Ps": 1.0, "P": [1]}}
        path = write_scenario(tmp_path / "two.json", payload)
        with pytest.raises(InputError, match="exactly one"):
            parse_scenario(path)

    def test_round_trip(self, tmp_path):
        path, payload = fixture_scenario(tmp_path)
        s = parse_scenario(path)
        assert s.to_dict() == {
            "mode": payload["mode"], "sigma2": payload["sigma2"],
            "channel": payload["channel"], "budget": payload["budget"],
            "solver": {"name": "sdp", "options": {}}, "seed": 11}

    def test_invalid_solver_for_mode(self, tmp_path):
        payload = {"mode": "total", "sigma2": 1.0,
                   "channel": {"stats": {"D": [1], "R": cmat(np.eye(1)),
                                         "Q": cmat(np.eye(1))}},
                   "budget": {"P0": 5.0},
                   "solver": {"name": "cdm"}}
        path = write_scenario(tmp_path / "bad_solver.json", payload)
        with pytest.raises(InputError, match="solver.name"):
            parse_scenario(path)


class TestRun:
    def test_n4_sdp_reports_rank_and_fallback(self, tmp_path):
        path, _ = fixture_scenario(tmp_path, solver="sdp")
        rep = run(parse_scenario(path))
        assert rep.metadata["rank_estimate"] == 2
        assert rep.metadata["fallback"] == "cdm"
        assert rep.snr > 0

    def test_n3_rank_one_path_no_fallback(self, tmp_path, rng):
        # dominant relay: relaxation is rank one, no fallback needed
        r = np.array([10.0, 0.1, 0.2])
        payload = {
            "mode": "individual", "sigma2": 1.0,
            "channel": {"stats": {"D": [1.0] * 3, "R": cmat(np.diag(r)),
                                  "Q": cmat(np.eye(3))}},
            "budget": {"Ps": 1.0, "P": [1.0] * 3},
            "solver": {"name": "sdp"},
        }
        path = write_scenario(tmp_path / "n3.json", payload)
        rep = run(parse_scenario(path))
        assert rep.metadata["rank_estimate"] == 1
        assert "fallback" not in rep.metadata

    def test_diagonal_cdm_matches_indiv_diag(self, tmp_path):
        path, _ = diagonal_scenario(tmp_path, solver="cdm")
        rep = run(parse_scenario(path))
        stats = parse_scenario(path).stats()
        ref = solve_diagonal(IndivPowerProblem(stats=stats, Ps=1.0,
                                               P=np.ones(3)))
        assert rep.snr == pytest.approx(ref.snr, rel=1e-4)

    def test_total_mode(self, tmp_path):
        payload = {"mode": "total", "sigma2": 1.0,
                   "channel": {"stats": {"D": [1.0, 2.0],
                                         "R": cmat(np.diag([2.0, 1.0])),
                                         "Q": cmat(np.eye(2))}},
                   "budget": {"P0": 10.0}}
        path = write_scenario(tmp_path / "tot.json", payload)
        rep = run(parse_scenario(path))
        assert rep.scenario_mode == "total"
        assert rep.solver == "total-diagonal"
        assert rep.snr > 0

    def test_determinism(self, tmp_path):
        path, _ = fixture_scenario(tmp_path, solver="grp")
        s = parse_scenario(path)
        r1 = run(s, samples=20000)
        r2 = run(s, samples=20000)
        assert r1.to_json() == r2.to_json()

    def test_snr_db_consistent(self, tmp_path):
        path, _ = diagonal_scenario(tmp_path)
        rep = run(parse_scenario(path))
        assert rep.snr_db == pytest.approx(10 * np.log10(rep.snr), abs=1e-12)


class TestMain:
    def test_solve_exit_0(self, tmp_path, capsys):
        path, _ = diagonal_scenario(tmp_path)
        assert main(["solve", path]) == 0
        out = capsys.readouterr().out
        assert json.loads(out)["snr"] > 0

    def test_missing_file_exit_3(self, capsys):
        assert main(["solve", "/nonexistent/scenario.json"]) == 3

    def test_invalid_schema_exit_3(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{\"mode\": \"bogus\"}")
        assert main(["solve", str(path)]) == 3

    def test_nonconvergence_exit_2(self, tmp_path):
        # eps = 0 can never satisfy the relative-change test
        payload = {
            "mode": "individual", "sigma2": 1.0,
            "channel": {"stats": {"D": [1.0] * 4,
                                  "R": cmat(fixtures.indiv_fixture(4)[0]),
                                  "Q": cmat(fixtures.indiv_fixture(4)[1])}},
            "budget": {"Ps": 1.0, "P": [2.0] * 4},
            "solver": {"name": "cdm", "options": {"eps": 0.0}},
        }
        path = write_scenario(tmp_path / "stall.json", payload)
        assert main(["solve", str(path)]) == 2

    def test_trace_and_export(self, tmp_path, capsys):
        path, _ = diagonal_scenario(tmp_path, solver="cdm")
        out_dir = tmp_path / "out"
        assert main(["solve", path, "--trace", "--out", str(out_dir)]) == 0
        report_path = capsys.readouterr().out.strip()
        rep = json.loads(open(report_path).read())
        assert rep["trace_file"] is not None
        assert main(["trace-export", report_path]) == 0
        csv = capsys.readouterr().out
        assert csv.splitlines()[0] == "sweep,slot,objective"

    def test_oracle_subcommand(self, tmp_path, capsys):
        path, _ = diagonal_scenario(tmp_path)
        assert main(["oracle", path]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["snr"] > 0


class TestReproduce:
    def test_total_cases_pass(self):
        rows, reports = reproduce("total-1")
        assert all(ok for *_, ok in rows)
        assert "total-1" in reports
        assert "assuming sigma2=1.0" in reports["total-1"]["assumption"]

    def test_indiv_case_passes(self):
        rows, reports = reproduce("indiv-n4")
        assert all(ok for *_, ok in rows)
        quantities = {r[1] for r in rows}
        assert {"sdp_objective", "cdm_objective", "pnorm_objective",
                "grp_objective"} <= quantities

    def test_unknown_case_rejected(self):
        with pytest.raises(InputError):
            reproduce("total-9")
