import json

import numpy as np
import pytest

from trochoid.cli import main
from trochoid.errors import CalibrationError, ConfigError
from trochoid.pipeline import calibrate_flip_prob, run_verify
from trochoid.presets import get_preset


def _write_config(tmp_path, config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return str(path)


def test_preset_parameters_are_pinned():
    fig1_left = get_preset("fig1-left")["ensemble"]
    assert (fig1_left["n"], fig1_left["k"], fig1_left["target_rho"]) == (1000, 5, 0.075)
    fig1_right = get_preset("fig1-right")["ensemble"]
    assert (fig1_right["n"], fig1_right["d"], fig1_right["k"]) == (999, 2, 3)
    fig3_top = get_preset("fig3-top")["ensemble"]
    assert (fig3_top["d"], fig3_top["k"]) == (2, 3)
    fig3_bottom = get_preset("fig3-bottom")["ensemble"]
    assert (fig3_bottom["mean_degree"], fig3_bottom["n"]) == (8.0, 1000)
    fig4 = get_preset("fig4")["ensemble"]
    assert fig4["n"] == 996
    assert [(s["d"], s["k"]) for s in fig4["species"]] == [(4, 3), (4, 4)]
    assert all(s["weight"] == 1.0 for s in fig4["species"])
    assert get_preset("fig2")["ensemble"]["kind"] == "dense-cyclic"


def test_get_preset_returns_a_copy():
    a = get_preset("fig4")
    a["ensemble"]["n"] = 5
    assert get_preset("fig4")["ensemble"]["n"] == 996


def test_unknown_preset_rejected():
    with pytest.raises(ConfigError):
        get_preset("fig99")


def test_generate_smallest_graph(tmp_path, capsys):
    config = {"ensemble": {"kind": "regular-cyclic", "n": 3, "d": 1, "k": 3}, "seeds": [1]}
    rc = main(["generate", "--config", _write_config(tmp_path, config), "--out-dir", str(tmp_path)])
    assert rc == 0
    manifest = json.loads(capsys.readouterr().out)
    mtx = [f for f in manifest["files"] if f.endswith(".mtx")][0]
    body = [ln for ln in open(mtx).read().splitlines()[2:] if ln.strip()]
    assert len(body) == 3  # one line per edge


def test_generate_divisibility_error_exits_2(tmp_path, capsys):
    config = {"ensemble": {"kind": "regular-cyclic", "n": 10, "d": 1, "k": 3}, "seeds": [1]}
    rc = main(["generate", "--config", _write_config(tmp_path, config)])
    assert rc == 2
    err = json.loads(capsys.readouterr().err)
    assert "divisible" in err["error"]["message"]


def test_empty_seed_list_is_config_error(tmp_path, capsys):
    config = {"ensemble": {"kind": "dense-iid", "n": 10}, "seeds": []}
    rc = main(["verify", "--config", _write_config(tmp_path, config)])
    assert rc == 2


def test_verify_writes_report_and_artifacts(tmp_path):
    config = {
        "ensemble": {"kind": "regular-cyclic", "n": 120, "d": 2, "k": 3},
        "seeds": [1, 2],
        "inflation": 0.03,
    }
    rc = main(["verify", "--config", _write_config(tmp_path, config), "--out-dir", str(tmp_path / "out")])
    assert rc == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["aggregate"]["inside_fraction"] > 0.9
    assert (tmp_path / "out" / "boundary.csv").exists()
    assert (tmp_path / "out" / "spectrum.csv").exists()
    assert (tmp_path / "out" / "figure.svg").exists()
    for entry in report["seeds"]:
        c = entry["containment"]
        assert set(c) == {"total", "inside", "outside", "excluded_outliers", "worst_violation"}
        assert c["inside"] + c["outside"] + len(c["excluded_outliers"]) == c["total"]


def test_verify_report_is_byte_deterministic(tmp_path):
    config = {
        "ensemble": {"kind": "poisson-cyclic", "n": 100, "mean_degree": 3.0, "k": 3},
        "seeds": [4, 5],
    }
    cfg = _write_config(tmp_path, config)
    main(["verify", "--config", cfg, "--out-dir", str(tmp_path / "a")])
    main(["verify", "--config", cfg, "--out-dir", str(tmp_path / "b")])
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    assert (tmp_path / "a" / "figure.svg").read_bytes() == (tmp_path / "b" / "figure.svg").read_bytes()


def test_generate_is_byte_deterministic(tmp_path):
    config = {"ensemble": {"kind": "dense-cyclic", "n": 40, "k": 3, "flip_prob": 0.5}, "seeds": [7]}
    cfg = _write_config(tmp_path, config)
    main(["generate", "--config", cfg, "--out-dir", str(tmp_path / "a")])
    main(["generate", "--config", cfg, "--out-dir", str(tmp_path / "b")])
    a = (tmp_path / "a" / "dense-cyclic-seed7.mtx").read_bytes()
    b = (tmp_path / "b" / "dense-cyclic-seed7.mtx").read_bytes()
    assert a == b


def test_boundary_subcommand(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    rc = main(["boundary", "--law", "dense", "--k", "5", "--rho", "0.075", "--out", str(out)])
    assert rc == 0
    assert out.read_text().splitlines()[0] == "phi,re,im"


def test_boundary_poly_terms(tmp_path):
    out = tmp_path / "poly.csv"
    rc = main(["boundary", "--law", "poly", "--term", "3:0.2", "--term", "4:0.1", "--out", str(out)])
    assert rc == 0
    first = out.read_text().splitlines()[1].split(",")
    assert float(first[1]) == pytest.approx(1.3)


def test_render_subcommand(tmp_path):
    from trochoid.boundaries import HypotrochoidParams, dense_hypotrochoid
    from trochoid.io import write_curve_csv, write_spectrum_csv

    write_spectrum_csv(np.array([0.3 + 0.1j]), tmp_path / "s.csv")
    write_curve_csv(dense_hypotrochoid(HypotrochoidParams(k=3, rho=0.1)), tmp_path / "c.csv")
    rc = main(["render", "--spectrum", str(tmp_path / "s.csv"), "--boundary", str(tmp_path / "c.csv"), "--out", str(tmp_path / "f.svg")])
    assert rc == 0


def test_render_missing_file_exits_1(tmp_path, capsys):
    rc = main(["render", "--spectrum", "/nonexistent.csv", "--boundary", "/nope.csv", "--out", str(tmp_path / "f.svg")])
    assert rc == 1


def test_calibrate_zero_target_is_zero():
    assert calibrate_flip_prob(100, 3, 0.0, [1]) == 0.0


def test_calibrate_unreachable_target_reports_range():
    with pytest.raises(CalibrationError) as err:
        calibrate_flip_prob(120, 3, 10.0, [1, 2])
    lo, hi = err.value.achievable
    assert hi < 10.0


def test_calibrate_reaches_moderate_target():
    p = calibrate_flip_prob(300, 3, 0.3, [1, 2, 3])
    assert 0.0 < p <= 1.0
    from trochoid.correlations import DenseCyclicSpec, generate_dense_cyclic
    from trochoid.moments import trace_power_moment

    measured = np.mean(
        [trace_power_moment(generate_dense_cyclic(DenseCyclicSpec(300, 3, p), s), 3) for s in (1, 2, 3)]
    )
    assert abs(measured - 0.3) / 0.3 < 0.10


def test_moments_subcommand(tmp_path, capsys):
    config = {"ensemble": {"kind": "dense-iid", "n": 200}, "seeds": [1, 2, 3]}
    rc = main(["moments", "--config", _write_config(tmp_path, config), "--mixed", "1,2", "--pure", "3"])
    assert rc == 0
    table = json.loads(capsys.readouterr().out)
    rows = {(r["order"]["kind"], r["order"].get("l", r["order"].get("k"))): r for r in table["moments"]}
    assert rows[("mixed", 1)]["empirical"] == pytest.approx(1.0, abs=0.1)
    assert rows[("mixed", 1)]["predicted"] == 1.0
    assert rows[("mixed", 2)]["predicted"] == 2.0
    assert rows[("pure", 3)]["stderr"] >= 0


def test_cli_requires_some_config(capsys):
    rc = main(["verify"])
    assert rc == 2


def test_fig1_right_generate_matches_quoted_shape(tmp_path, capsys):
    # the reference figure quotes 1000 nodes / 2000 edge slots; exact
    # membership in two 3-cycles per node needs 3 | 2n, hence 999 and 1998
    rc = main(["generate", "--preset", "fig1-right", "--seed", "3", "--out-dir", str(tmp_path)])
    assert rc == 0
    manifest = json.loads(capsys.readouterr().out)
    mtx = [f for f in manifest["files"] if f.endswith(".mtx")][0]
    lines = open(mtx).read().splitlines()
    n, _, nnz = (int(x) for x in lines[1].split())
    assert n == 999
    total_weight = sum(float(ln.split()[2]) for ln in lines[2:] if ln.strip())
    assert total_weight == 1998.0
    sidecar = json.loads(open([f for f in manifest["files"] if f.endswith(".json")][0]).read())
    assert len(sidecar["cycles"]) == 666


def test_thread_cap_env_var(monkeypatch):
    from trochoid.pipeline import max_workers

    monkeypatch.setenv("TROCHOID_THREADS", "2")
    assert max_workers() == 2
    monkeypatch.setenv("TROCHOID_THREADS", "junk")
    with pytest.raises(ConfigError):
        max_workers()
    monkeypatch.delenv("TROCHOID_THREADS")
    assert max_workers() >= 1


def test_fig4_report_carries_continuation_diagnostics(tmp_path):
    config = get_preset("fig4")
    config["seeds"] = [1]
    report = run_verify(config)
    diag = report["boundary"]["continuation"]
    assert diag["swept_angles"] == 1024
    assert diag["phi2_at_zero"] == 0.0
    assert 0 < diag["t1_at_zero"] < 1


def test_no_exclude_outliers_flag(tmp_path):
    config = {
        "ensemble": {"kind": "regular-cyclic", "n": 120, "d": 2, "k": 3},
        "seeds": [1],
        "inflation": 0.03,
    }
    cfg = _write_config(tmp_path, config)
    rc = main(["verify", "--config", cfg, "--out-dir", str(tmp_path / "kept"), "--no-exclude-outliers"])
    assert rc == 0
    kept = json.loads((tmp_path / "kept" / "report.json").read_text())
    entry = kept["seeds"][0]["containment"]
    # the row-sum eigenvalue family stays in the census and sits outside
    assert entry["excluded_outliers"] == []
    assert entry["outside"] >= 3
    assert kept["seeds"][0]["inside_fraction"] < 1.0


def test_verify_report_carries_moment_tables(tmp_path):
    config = {
        "ensemble": {"kind": "regular-cyclic", "n": 120, "d": 2, "k": 3},
        "seeds": [1, 2],
    }
    report = run_verify(config)
    per_seed = report["seeds"][0]["moments"]
    orders = {(r["order"]["kind"], r["order"].get("k", r["order"].get("l"))) for r in per_seed}
    assert orders == {("pure", 3), ("mixed", 1), ("mixed", 2)}
    agg = {(r["order"]["kind"], r["order"].get("k", r["order"].get("l"))): r for r in report["aggregate"]["moments"]}
    # raw cycle-count moment: d per node, and the walk-count prediction agrees
    assert agg[("pure", 3)]["empirical"] == pytest.approx(2.0, rel=0.2)
    assert agg[("pure", 3)]["predicted"] == 2.0
    assert agg[("mixed", 1)]["predicted"] == 2.0
    assert agg[("mixed", 1)]["stderr"] >= 0


def test_boundary_density_output(tmp_path):
    out = tmp_path / "c.csv"
    dens = tmp_path / "d.csv"
    rc = main([
        "boundary", "--law", "dense", "--k", "2", "--rho", "0.5",
        "--out", str(out), "--density-out", str(dens), "--density-resolution", "64",
    ])
    assert rc == 0
    assert dens.read_text().splitlines()[0] == "re,im,mu"
    rc = main([
        "boundary", "--law", "sparse", "--d-hat", "1", "--k", "3",
        "--out", str(out), "--density-out", str(dens),
    ])
    assert rc == 2  # density is a dense-law feature


def test_report_is_independent_of_thread_count(tmp_path, monkeypatch):
    config = {
        "ensemble": {"kind": "poisson-cyclic", "n": 150, "mean_degree": 4.0, "k": 3},
        "seeds": [1, 2, 3],
    }
    monkeypatch.setenv("TROCHOID_THREADS", "1")
    serial = json.dumps(run_verify(config), sort_keys=True)
    monkeypatch.setenv("TROCHOID_THREADS", "4")
    threaded = json.dumps(run_verify(config), sort_keys=True)
    assert serial == threaded
