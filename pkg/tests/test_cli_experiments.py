import json
from pathlib import Path

import numpy as np
import pytest

from aoinet.cli import main as cli_main
from aoinet.experiments import (Scenario, compare, rerun_from_manifest,
                                run_scenario, scenario_from_config,
                                scenario_from_preset)
from aoinet.params import ParamError


def tiny_scenario(tmp_path, **kw):
    base = dict(name="tiny", mode="sweep", out_dir=str(tmp_path),
                lam_grid=[5e-3], xi_grid=[0.3, 0.6], p_grid=[1.0],
                r_grid=[0.5], replications=2, slots=400, seed=3, workers=1,
                side=80.0)
    base.update(kw)
    return Scenario(**base)


def test_scenario_validation(tmp_path):
    with pytest.raises(ParamError):
        Scenario(name="x", mode="nonsense", out_dir=str(tmp_path))
    with pytest.raises(ParamError):
        tiny_scenario(tmp_path, xi_grid=[])


def test_scenario_from_config_aliases():
    sc = scenario_from_config({"lambda": 0.02, "xi": [0.1, 0.2], "p": 0.5,
                               "slots": 123})
    assert sc.lam_grid == [0.02]
    assert sc.xi_grid == [0.1, 0.2]
    assert sc.p_grid == [0.5]
    assert sc.slots == 123
    with pytest.raises(ParamError):
        scenario_from_config({"bogus_key": 1})


def test_presets_exist():
    for name in ("fig4", "fig5", "fig6", "fig7", "fig8", "fig9"):
        sc = scenario_from_preset(name, out_dir="/tmp/x")
        assert sc.name == name


def test_sweep_runs_and_is_deterministic(tmp_path):
    a_dir, b_dir = tmp_path / "a", tmp_path / "b"
    art1 = run_scenario(tiny_scenario(a_dir))
    art2 = run_scenario(tiny_scenario(b_dir))
    s1 = Path(art1["summary"]).read_bytes()
    s2 = Path(art2["summary"]).read_bytes()
    assert s1 == s2
    header = s1.decode().splitlines()
    assert header[0] == "# aoinet-sweep v1"
    # different seed changes simulation columns
    art3 = run_scenario(tiny_scenario(tmp_path / "c", seed=4))
    assert Path(art3["summary"]).read_bytes() != s1


def test_manifest_roundtrip(tmp_path):
    art = run_scenario(tiny_scenario(tmp_path / "orig"))
    redo = rerun_from_manifest(art["manifest"], out_dir=str(tmp_path / "redo"))
    assert (Path(art["summary"]).read_bytes()
            == Path(redo["summary"]).read_bytes())
    manifest = json.loads(Path(art["manifest"]).read_text())
    assert manifest["tool"] == "aoinet"
    assert "seed_rule" in manifest


def test_compare_zero_deviation_and_negative_control(tmp_path):
    art = run_scenario(tiny_scenario(tmp_path, name="cmp", mode="simulate"))
    res = compare(art["summary"], art["summary"])
    assert res["passed"]
    assert all(row.get("rel_err_avg_aoi", 0.0) == 0.0 for row in res["rows"])
    # perturb one value: comparison must flag it
    text = Path(art["summary"]).read_text().splitlines()
    hdr = text[1].split(",")
    col = hdr.index("sim_avg_aoi")
    parts = text[2].split(",")
    parts[col] = repr(float(parts[col]) * 2.0)
    text[2] = ",".join(parts)
    bad = tmp_path / "perturbed.csv"
    bad.write_text("\n".join(text) + "\n")
    res2 = compare(art["summary"], bad, rel_tol=0.05)
    assert not res2["passed"]


def test_compare_key_mismatch(tmp_path):
    art = run_scenario(tiny_scenario(tmp_path, name="k1", mode="simulate"))
    other = run_scenario(tiny_scenario(tmp_path, name="k2", mode="simulate",
                                       xi_grid=[0.11, 0.22]))
    with pytest.raises(ParamError):
        compare(art["summary"], other["summary"])


def test_policy_mode_rows(tmp_path):
    sc = tiny_scenario(tmp_path, name="pol", mode="policy",
                       lam_grid=[2e-2], xi_grid=[0.6], r_grid=[1.5],
                       policies=["aloha:1.0", "adaptive", "dsla"],
                       window_radius=10.0, slots=600, replications=2)
    art = run_scenario(sc)
    lines = Path(art["summary"]).read_text().splitlines()
    policies = [line.split(",")[1] for line in lines[2:]]
    assert policies == ["aloha:1.0", "adaptive", "dsla"]


def test_cli_end_to_end(tmp_path, capsys):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("lam = 0.005\nxi = 0.3, 0.6\nslots = 300\nside = 80\n")
    rc = cli_main(["simulate", "--config", str(cfg), "--out", str(tmp_path),
                   "--name", "s", "--replications", "1", "--workers", "1",
                   "--seed", "1"])
    assert rc == 0
    rc = cli_main(["analyze", "--config", str(cfg), "--out", str(tmp_path),
                   "--name", "a", "--workers", "1"])
    assert rc == 0
    rc = cli_main(["compare", "--sim", str(tmp_path / "s_summary.csv"),
                   "--analysis", str(tmp_path / "a_summary.csv"),
                   "--rel-tol", "0.5",
                   "--report", str(tmp_path / "report.csv")])
    assert rc == 0
    assert (tmp_path / "report.csv").read_text().startswith("# aoinet-compare v1")
    out = capsys.readouterr().out
    assert '"passed": true' in out


def test_cli_error_is_machine_readable(tmp_path, capsys):
    rc = cli_main(["simulate", "--config", str(tmp_path / "missing.cfg")])
    assert rc == 2
    err = capsys.readouterr().err
    rec = json.loads(err)
    assert rec["error"] == "FileNotFoundError"


def test_cli_rerun_from_manifest(tmp_path):
    art = run_scenario(tiny_scenario(tmp_path / "one", name="m"))
    rc = cli_main(["rerun", art["manifest"], "--out", str(tmp_path / "two")])
    assert rc == 0
    assert (Path(art["summary"]).read_bytes()
            == (tmp_path / "two" / "m_summary.csv").read_bytes())
