import math
import pathlib

import pytest

import shipmg

DATA = pathlib.Path(__file__).resolve().parents[2] / "tests" / "data"


def small():
    return shipmg.Scenario.load(str(DATA / "small_sc2.yaml"))


def test_version():
    assert shipmg.__version__.count(".") == 2


def test_default_scenarios_round_trip_through_yaml():
    for case in ("sc1", "sc2"):
        s = shipmg.Scenario.default(case)
        assert shipmg.Scenario.from_yaml(s.to_yaml()) == s
    assert not shipmg.Scenario.default("sc1").has_bess
    assert shipmg.Scenario.default("sc2").has_fuel_cell


def test_invalid_configuration_raises():
    with pytest.raises(shipmg.ConfigError):
        shipmg.Scenario.load(str(DATA / "invalid.yaml"))
    s = shipmg.Scenario.default("sc2")
    with pytest.raises(ValueError):
        s.solver = "other"


def test_load_simulation_is_seeded():
    s = shipmg.Scenario.default("sc2")
    a = shipmg.simulate_load(s, 4)
    b = shipmg.simulate_load(s, 4)
    assert a == b
    assert len(a["hotel"]) == 96
    assert sum(a["zero_emission"]) == 40
    assert shipmg.simulate_load(s, 5)["hotel"] != a["hotel"]


def test_optimize_small_case(tmp_path):
    r = shipmg.optimize(small(), seed=3, out_dir=str(tmp_path))
    assert r["exit_code"] == 0
    assert r["status"] in ("optimal", "gap_reached")
    k = r["kpis"]
    assert math.isclose(k["total_co2"], 3.206 * k["total_fuel"], rel_tol=1e-12)
    soc = r["series"]["soc"]
    assert soc[0] == 0.5 and soc[-1] == 0.5
    assert all(0.2 - 1e-9 <= x <= 0.8 + 1e-9 for x in soc)
    assert (tmp_path / "kpis.csv").exists()


def test_optimize_reports_infeasible_scenarios():
    s = shipmg.Scenario.load(str(DATA / "small_sc1_zero_emission.yaml"))
    r = shipmg.optimize(s)
    assert r["exit_code"] == 2
    assert r["kpis"] is None


def test_compare():
    a = dict(total_cost=100.0, total_fuel=10.0, total_h2=0.0, total_co2=32.06, cii=2.0, lf_avg=0.5)
    b = dict(total_cost=110.0, total_fuel=5.0, total_h2=1.0, total_co2=16.03, cii=1.0, lf_avg=0.75)
    c = shipmg.compare(a, b)
    assert math.isclose(c["total_cost"], 10.0)
    assert math.isclose(c["total_co2"], -50.0)
    assert math.isclose(c["lf_avg"], 25.0)
    assert math.isclose(c["co2_saving"], 16.03)
