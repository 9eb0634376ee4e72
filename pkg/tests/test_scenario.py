import json

import numpy as np
import pytest

from d2dcluster.scenario import (
    AccessPoint,
    Device,
    Scenario,
    ScenarioError,
    ap_grid_positions,
    generate_scenario,
    load_scenario,
    save_scenario,
)


def test_generate_is_deterministic():
    a = generate_scenario(30, n_aps=2, seed=42)
    b = generate_scenario(30, n_aps=2, seed=42)
    assert a == b
    c = generate_scenario(30, n_aps=2, seed=43)
    assert a != c


def test_generate_respects_bounds():
    sc = generate_scenario(500, area=(60.0, 40.0), battery_range=(0.2, 0.3), seed=5)
    xy = sc.device_xy()
    assert xy[:, 0].min() >= 0 and xy[:, 0].max() <= 60
    assert xy[:, 1].min() >= 0 and xy[:, 1].max() <= 40
    b = sc.battery_fracs()
    assert b.min() >= 0.2 and b.max() <= 0.3


def test_ap_grid_single_ap_at_center():
    assert ap_grid_positions(1, 100.0, 100.0) == [(50.0, 50.0)]


def test_ap_grid_four_aps_at_quarter_points():
    assert ap_grid_positions(4, 100.0, 100.0) == [
        (25.0, 25.0),
        (75.0, 25.0),
        (25.0, 75.0),
        (75.0, 75.0),
    ]


def test_ap_grid_partial_row():
    assert ap_grid_positions(3, 100.0, 100.0) == [
        (25.0, 25.0),
        (75.0, 25.0),
        (25.0, 75.0),
    ]


def test_ap_grid_rejects_zero():
    with pytest.raises(ValueError):
        ap_grid_positions(0, 100.0, 100.0)


def test_save_load_round_trip(tmp_path):
    sc = generate_scenario(25, n_aps=4, seed=11)
    p = tmp_path / "sc.json"
    save_scenario(sc, p)
    assert load_scenario(p) == sc


def test_save_is_byte_stable(tmp_path):
    sc = generate_scenario(10, seed=3)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_scenario(sc, p1)
    save_scenario(load_scenario(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_unknown_top_level_field(tmp_path):
    sc = generate_scenario(3, seed=0)
    p = tmp_path / "sc.json"
    save_scenario(sc, p)
    doc = json.loads(p.read_text())
    doc["comment"] = "hi"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="unknown fields"):
        load_scenario(p)


def test_load_rejects_unknown_device_field(tmp_path):
    sc = generate_scenario(3, seed=0)
    p = tmp_path / "sc.json"
    save_scenario(sc, p)
    doc = json.loads(p.read_text())
    doc["devices"][1]["color"] = "red"
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match=r"devices\[1\]"):
        load_scenario(p)


def test_load_rejects_missing_field(tmp_path):
    sc = generate_scenario(3, seed=0)
    p = tmp_path / "sc.json"
    save_scenario(sc, p)
    doc = json.loads(p.read_text())
    del doc["devices"][0]["battery_frac"]
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="battery_frac"):
        load_scenario(p)


def test_load_rejects_non_numeric(tmp_path):
    sc = generate_scenario(2, seed=0)
    p = tmp_path / "sc.json"
    save_scenario(sc, p)
    doc = json.loads(p.read_text())
    doc["aps"][0]["tx_power"] = True
    p.write_text(json.dumps(doc))
    with pytest.raises(ScenarioError, match="tx_power"):
        load_scenario(p)


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "sc.json"
    p.write_text("{not json")
    with pytest.raises(ScenarioError, match="not valid JSON"):
        load_scenario(p)


def test_load_defaults_rating_to_one(tmp_path):
    sc = generate_scenario(2, seed=0)
    p = tmp_path / "sc.json"
    save_scenario(sc, p)
    doc = json.loads(p.read_text())
    for rec in doc["devices"]:
        del rec["rating"]
    p.write_text(json.dumps(doc))
    assert all(d.rating == 1.0 for d in load_scenario(p).devices)


def _one_device_scenario(**over):
    kw = dict(id=0, x=5.0, y=5.0, battery_frac=0.5)
    kw.update(over)
    return Scenario(
        area_width=10.0,
        area_height=10.0,
        devices=(Device(**kw),),
        aps=(AccessPoint(id=0, x=5.0, y=5.0, tx_power=10.0),),
    )


def test_validate_rejects_out_of_order_ids():
    sc = _one_device_scenario(id=3)
    with pytest.raises(ScenarioError, match="ids must be"):
        sc.validate()


def test_validate_rejects_out_of_area_device():
    sc = _one_device_scenario(x=11.0)
    with pytest.raises(ScenarioError, match="outside area"):
        sc.validate()


def test_validate_rejects_bad_battery():
    sc = _one_device_scenario(battery_frac=1.5)
    with pytest.raises(ScenarioError, match="battery_frac"):
        sc.validate()


def test_validate_rejects_nonpositive_tx_power():
    sc = Scenario(
        area_width=10.0,
        area_height=10.0,
        devices=(Device(id=0, x=1.0, y=1.0, battery_frac=0.5),),
        aps=(AccessPoint(id=0, x=5.0, y=5.0, tx_power=0.0),),
    )
    with pytest.raises(ScenarioError, match="tx_power"):
        sc.validate()


def test_array_views_match_declaration_order():
    sc = generate_scenario(8, n_aps=2, seed=9)
    xy = sc.device_xy()
    assert xy.shape == (8, 2)
    for i, d in enumerate(sc.devices):
        assert xy[i, 0] == d.x and xy[i, 1] == d.y
    assert np.array_equal(sc.battery_fracs(), [d.battery_frac for d in sc.devices])
