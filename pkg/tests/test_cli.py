import io
import math

import numpy as np
import pytest

from satcov import cli


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    lines = text.strip().splitlines()
    head = lines[0].split(",")
    return head, [dict(zip(head, l.split(","))) for l in lines[1:]]


def write(tmp_path, text, name="s.ini"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def test_analyze_scenario1():
    code, out, _ = run(["analyze", "--theorem", "1"])
    assert code == 0
    head, rs = rows(out)
    assert head == ["gamma_db", "lower", "upper", "heuristic", "theorem", "order_used"]
    assert len(rs) == 21
    for r in rs:
        assert float(r["lower"]) <= float(r["heuristic"]) <= float(r["upper"])


def test_analyze_scenario2_theorem1_rejected(tmp_path):
    cfg = write(tmp_path, "[scenario]\nmean_visible = 300\n")
    code, out, err = run(["analyze", "--config", cfg, "--theorem", "1"])
    assert code == 3 and "use theorem 2" in err
    code, out, _ = run(["analyze", "--config", cfg, "--theorem", "2"])
    assert code == 0 and len(out.strip().splitlines()) == 22


def test_config_errors(tmp_path):
    assert run(["analyze", "--config", write(tmp_path, "[scenario]\nfoo = 1\n")])[0] == 2
    assert run(["analyze", "--config", write(tmp_path, "[other]\nx = 1\n")])[0] == 2
    assert run(["analyze", "--config", write(tmp_path, "[scenario]\nphi_clu_deg = 40\n")])[0] == 2
    assert run(["analyze", "--config", write(tmp_path, "[scenario]\nnakagami_m = abc\n")])[0] == 2
    assert run(["analyze", "--config", str(tmp_path / "missing.ini")])[0] == 2
    both = "[scenario]\nmean_visible = 50\nsat_density_per_km2 = 1e-5\n"
    assert run(["analyze", "--config", write(tmp_path, both)])[0] == 2


def test_degrees_and_thresholds(tmp_path):
    sc = cli.parse_scenario("[scenario]\ntheta_min_deg = 30\nphi_clu_deg = 2\nsir_thresholds_db = -5:5:2.5\naltitude_km = 600\n")
    p = cli.build_params(sc.values)
    assert p.min_elevation_rad == pytest.approx(math.radians(30))
    assert p.cluster_polar_angle_rad == pytest.approx(math.radians(2))
    assert p.sir_thresholds_db == (-5.0, -2.5, 0.0, 2.5, 5.0)
    assert p.sat_orbit_radius_km == pytest.approx(6971.0)


def test_sweep(tmp_path):
    cfg = write(tmp_path, "[scenario]\nsir_thresholds_db = 0\n[sweep]\nphi_clu_deg = 1, 2, 3\n")
    code, out, _ = run(["analyze", "--config", cfg])
    head, rs = rows(out)
    assert code == 0 and head[0] == "phi_clu_deg" and len(rs) == 3
    h = [float(r["heuristic"]) for r in rs]
    assert h[0] < h[1] < h[2]


def test_simulate_deterministic_and_dump(tmp_path):
    args = ["simulate", "--trials", "3000", "--seed", "4", "--out", str(tmp_path), "--dump-samples"]
    assert run(args)[0] == 0
    a = (tmp_path / "simulate.csv").read_bytes()
    s = (tmp_path / "samples.csv").read_bytes()
    assert run(args)[0] == 0
    assert (tmp_path / "simulate.csv").read_bytes() == a
    assert (tmp_path / "samples.csv").read_bytes() == s
    head, rs = rows(a.decode())
    assert head == ["gamma_db", "estimate", "ci95", "n_trials", "mode"]
    assert rs[0]["n_trials"] == "3000"


def test_dump_needs_out():
    assert run(["simulate", "--trials", "10", "--dump-samples"])[0] == 2


def test_simulate_shadowed_rician(tmp_path):
    cfg = write(tmp_path, "[scenario]\nfading = shadowed_rician\nsr_m = 2\nsr_b0 = 0.128\nsr_omega = 0.832\n")
    assert run(["simulate", "--config", cfg, "--trials", "1000"])[0] == 0
    bad = write(tmp_path, "[scenario]\nfading = shadowed_rician\n", "b.ini")
    assert run(["simulate", "--config", bad, "--trials", "1000"])[0] == 2


def test_simulate_nearest_vs_cluster_dense(tmp_path):
    cfg = write(tmp_path, "[scenario]\nmean_visible = 300\nsir_thresholds_db = -10:10:5\n")
    _, c, _ = run(["simulate", "--config", cfg, "--trials", "20000", "--mode", "cluster"])
    _, n, _ = run(["simulate", "--config", cfg, "--trials", "20000", "--mode", "nearest"])
    for a, b in zip(rows(c)[1], rows(n)[1]):
        assert float(a["estimate"]) >= float(b["estimate"])


def test_validate_gamma():
    code, out, _ = run(["validate-gamma", "--trials", "20000"])
    head, rs = rows(out)
    assert code == 0 and head[:3] == ["region", "m", "ks_distance"]
    for r in rs:
        if r["region"] == "interference":
            assert float(r["ks_distance"]) <= 0.05
            assert abs(float(r["mean_z"])) <= 3 and abs(float(r["var_z"])) <= 3


def test_sensitivity_cmd():
    code, out, _ = run(["sensitivity"])
    _, rs = rows(out)
    assert code == 0 and len(rs) == 8
    v = {r["name"]: float(r["value"]) for r in rs}
    assert v["dkD_dRclu"] > 0 and v["dthD_dRclu"] < 0


def test_reproduce_table1(tmp_path):
    code, _, _ = run(["reproduce", "table1", "--trials", "20000", "--out", str(tmp_path)])
    assert code == 0
    _, rs = rows((tmp_path / "table1.csv").read_text())
    for r in rs:
        assert float(r["cluster_mean_analytic"]) == pytest.approx(float(r["cluster_mean_reference"]), rel=0.02)
        assert float(r["full_sphere_analytic"]) == pytest.approx(float(r["full_sphere_reference"]), rel=0.02)
    assert "plot" in (tmp_path / "table1.gp").read_text()


def test_reproduce_fig8_monotone_in_phi(tmp_path):
    code, out, _ = run(["reproduce", "fig8"])
    assert code == 0
    _, rs = rows(out)
    for gd in {r["gamma_db"] for r in rs}:
        h = [float(r["heuristic"]) for r in rs if r["gamma_db"] == gd]
        assert np.all(np.diff(h) >= -1e-12)


def _crossing(rs, gd):
    # first cluster angle where the m = 1e20 curve overtakes m = 1
    sel = [r for r in rs if float(r["gamma_db"]) == gd]
    phis = sorted({float(r["phi_clu_deg"]) for r in sel})
    h = {(float(r["m"]), float(r["phi_clu_deg"])): float(r["heuristic"]) for r in sel}
    diff = [h[(1.0, x)] - h[(1e20, x)] for x in phis]
    for k in range(1, len(phis)):
        if diff[k - 1] >= 0 > diff[k]:
            return phis[k - 1] + (phis[k] - phis[k - 1]) * diff[k - 1] / (diff[k - 1] - diff[k])
    return phis[0] if diff[0] < 0 else math.inf


def test_reproduce_fig9_crossing_moves_left():
    code, out, _ = run(["reproduce", "fig9"])
    assert code == 0
    _, rs = rows(out)
    xs = [_crossing(rs, gd) for gd in (5.0, 0.0, -5.0, -10.0)]
    assert xs[0] > xs[1] >= xs[2] >= xs[3]


def test_reproduce_unknown():
    with pytest.raises(SystemExit):
        cli.main(["reproduce", "fig99"])


@pytest.mark.parametrize("fig", ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"])
def test_reproduce_runs(tmp_path, fig):
    code, _, err = run(["reproduce", fig, "--trials", "2000", "--out", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / f"{fig}.csv").stat().st_size > 0
    assert "data" in (tmp_path / f"{fig}.gp").read_text()
