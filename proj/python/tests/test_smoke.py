import json
import os
from pathlib import Path

import pytest

import gridfire

DATA = Path(os.environ.get("GRIDFIRE_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def bypass_config(instance, beta):
    cfg = gridfire.DduConfig.default(instance, 1)
    b = [0.0] * instance.num_lines
    b[2] = beta
    cfg.beta = b
    cfg.expansion_step = 0.01
    cfg.expansion_digits = [6] * instance.num_lines
    return cfg


def test_rate_conversion():
    assert 100 * gridfire.annual_rate_to_horizon_probability(0.4, 24) == pytest.approx(0.11, abs=0.005)


def test_instance_round_trip():
    g = gridfire.GridInstance.load(DATA / "bypass6.json")
    assert (g.num_buses, g.num_lines) == (6, 5)
    assert gridfire.GridInstance.parse(g.to_json()).to_json() == g.to_json()


def test_risk_triggers_the_bypass():
    g = gridfire.wildfire_bypass_instance()
    calm = gridfire.solve_ddro(g, bypass_config(g, 0.0))
    fire = gridfire.solve_ddro(g, bypass_config(g, 0.15))
    assert calm.converged and fire.converged
    assert sum(calm.first_stage.y) == 0
    assert sum(fire.first_stage.y) == 1
    fs = fire.first_stage
    ref = fs.total_cost + gridfire.worst_case_expectation(g, bypass_config(g, 0.15), fs.z, fs.f_p)
    assert fire.objective == pytest.approx(ref, rel=1e-4)

    warm = gridfire.solve_ddro(g, bypass_config(g, 0.15), calm.cuts)
    assert warm.warm_cut_count == len(calm.cuts)
    assert warm.objective == pytest.approx(fire.objective, rel=1e-4)


def test_simulation_is_reproducible():
    g = gridfire.wildfire_bypass_instance()
    cfg = bypass_config(g, 0.15)
    z = g.initial_switching()
    a = gridfire.simulate(g, cfg, z, samples=500, seed=3)
    b = gridfire.simulate(g, cfg, z, samples=500, seed=3, threads=2)
    assert a.loss_of_load_pct == b.loss_of_load_pct
    assert a.cvar95_pct >= a.mean_pct


def test_errors_map_to_python():
    g = gridfire.wildfire_bypass_instance()
    with pytest.raises(gridfire.ConfigError):
        gridfire.DduConfig.parse('{"k_budget": 1, "nope": 2}', g)
    with pytest.raises(gridfire.SignatureError):
        gridfire.cuts_from_json(gridfire.random_radial_instance(3), gridfire.cuts_to_json(g, []))


def test_cli(tmp_path):
    code, _, err = gridfire.run_cli(
        ["rules", "--instance", str(DATA / "feeder11.json"), "--out", str(tmp_path)]
    )
    assert code == 0, err
    assert json.loads((tmp_path / "rules.json").read_text())["instance_rules_match"]
    code, _, err = gridfire.run_cli(["solve", "--instance", "/missing.json"])
    assert code == 2
    assert "error" in json.loads(err)
