import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from d2dcluster.kernels import centroid_forces, greedy_capacity_assign
from d2dcluster.rforce import (
    DIST_FLOOR,
    Centroid,
    ForceVector,
    RForceParams,
    associate_centroids,
    centroid_charge,
    default_k,
    device_charge,
    finalize_solution,
    move_centroid,
    pairwise_force,
    phase1,
    phase2_pick_heads,
    phase3_associate_aps,
    repair_outage,
    run_rforce,
    total_force,
)
from d2dcluster.radio import RadioParams
from d2dcluster.scenario import AccessPoint, Device, Scenario, generate_scenario
from d2dcluster.solution import NONE, ClusterSolution


# ---------------------------------------------------------------- charges


def test_device_charge_is_negated_reliability():
    assert device_charge(0.4) == -0.4
    assert device_charge(0.0) == 0.0


def test_centroid_charge_decays_with_membership():
    assert centroid_charge(0, lam=0.8) == pytest.approx(0.8)
    assert centroid_charge(4, lam=0.8) == pytest.approx(0.16)
    assert centroid_charge(9, lam=0.5) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        centroid_charge(-1)


@given(st.floats(0.0, 1.0))
def test_device_charge_never_positive(reliab):
    assert device_charge(reliab) <= 0.0


@given(st.integers(0, 10_000), st.floats(0.01, 1.0))
def test_centroid_charge_always_positive(n, lam):
    assert centroid_charge(n, lam) > 0.0


# ----------------------------------------------------------------- forces


def test_like_charges_repel():
    f = pairwise_force(0.8, 0.8, (1.0, 0.0), (0.0, 0.0))
    assert f.fx == pytest.approx(0.64) and f.fy == 0.0


def test_opposite_charges_attract():
    f = pairwise_force(0.8, -1.0, (1.0, 0.0), (0.0, 0.0))
    assert f.fx == pytest.approx(-0.8) and f.fy == 0.0


def test_force_is_inverse_square():
    near = pairwise_force(0.8, 0.8, (1.0, 0.0), (0.0, 0.0))
    far = pairwise_force(0.8, 0.8, (2.0, 0.0), (0.0, 0.0))
    assert near.fx / far.fx == pytest.approx(4.0, rel=1e-12)


def test_force_zero_inside_distance_floor():
    f = pairwise_force(1.0, 1.0, (0.0, 0.0), (DIST_FLOOR / 2, 0.0))
    assert f == ForceVector(0.0, 0.0)


coord = st.floats(-100.0, 100.0)
charge = st.floats(-2.0, 2.0)


@given(charge, charge, coord, coord, coord, coord)
@settings(max_examples=200)
def test_pairwise_force_obeys_third_law(qa, qb, ax, ay, bx, by):
    f_ab = pairwise_force(qa, qb, (ax, ay), (bx, by))
    f_ba = pairwise_force(qb, qa, (bx, by), (ax, ay))
    # exact negation bit for bit, not just approximate
    assert f_ab.fx == -f_ba.fx and f_ab.fy == -f_ba.fy


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(0.01, 10.0))
@settings(max_examples=200)
def test_step_has_fixed_length(fx, fy, eta):
    c = Centroid(3.0, -2.0)
    move_centroid(c, ForceVector(fx, fy), eta)
    assert (c.prev_x, c.prev_y) == (3.0, -2.0)
    disp = math.hypot(c.x - 3.0, c.y + 2.0)
    if fx == 0.0 and fy == 0.0:
        assert disp == 0.0
    else:
        assert disp == pytest.approx(eta, rel=1e-9)


def test_move_centroid_known_step():
    c = Centroid(0.0, 0.0)
    move_centroid(c, ForceVector(3.0, 4.0), eta=0.4)
    assert c.x == pytest.approx(0.24) and c.y == pytest.approx(0.32)


# ------------------------------------------------------ greedy association


def test_greedy_assignment_respects_capacity():
    dev = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    cen = np.array([[0.0, 0.0], [2.0, 0.0]])
    assign, degree = greedy_capacity_assign(dev, cen, 1)
    assert assign.tolist() == [0, 1, -1]
    assert degree.tolist() == [1, 1]


def test_greedy_assignment_tie_keeps_lowest_index():
    dev = np.array([[1.0, 0.0]])
    cen = np.array([[0.0, 0.0], [2.0, 0.0]])
    assign, _ = greedy_capacity_assign(dev, cen, 5)
    assert assign.tolist() == [0]


def test_greedy_assignment_is_sequential():
    # device 0 takes the shared centroid first and squeezes device 1 out to
    # the far one even though device 1 is closer to the shared centroid
    dev = np.array([[0.1, 0.0], [0.0, 0.0]])
    cen = np.array([[0.0, 0.0], [50.0, 0.0]])
    assign, _ = greedy_capacity_assign(dev, cen, 1)
    assert assign.tolist() == [0, 1]


def test_associate_centroids_sets_degrees():
    cents = [Centroid(0.0, 0.0), Centroid(10.0, 0.0)]
    dev = np.array([[0.0, 0.0], [1.0, 0.0], [9.0, 0.0]])
    members = associate_centroids(cents, dev, delta_sr=10)
    assert members == [[0, 1], [2]]
    assert cents[0].degree == 2 and cents[1].degree == 1


def test_scalar_and_kernel_forces_agree(rng):
    k, n = 4, 30
    cen_xy = rng.uniform(0, 100, (k, 2))
    dev_xy = rng.uniform(0, 100, (n, 2))
    reliab = rng.uniform(0, 1, n)
    cents = [Centroid(x, y) for x, y in cen_xy]
    members = associate_centroids(cents, dev_xy, delta_sr=10)
    assign = np.full(n, -1, dtype=np.int64)
    for a, ms in enumerate(members):
        for i in ms:
            assign[i] = a
    cen_q = np.array([centroid_charge(c.degree) for c in cents])
    kern = centroid_forces(cen_xy, cen_q, dev_xy, -reliab, assign, 1.0, DIST_FLOOR, False)
    for a, c in enumerate(cents):
        f = total_force(c, cents, dev_xy[members[a]], -reliab[members[a]])
        assert kern[a, 0] == pytest.approx(f.fx, rel=1e-12, abs=1e-15)
        assert kern[a, 1] == pytest.approx(f.fy, rel=1e-12, abs=1e-15)


# ---------------------------------------------------------------- phase 1


def test_phase1_single_step_matches_scalar_path():
    dev_xy = np.array([[10.0, 10.0], [90.0, 10.0], [50.0, 80.0], [55.0, 85.0]])
    reliab = np.array([0.9, 0.5, 0.7, 0.2])
    init = np.array([[30.0, 20.0], [60.0, 70.0]])
    params = RForceParams(k_centroids=2, max_iters=1, stability_window=50)
    res = phase1(dev_xy, reliab, (100.0, 100.0), params, seed=0, initial_xy=init)
    assert res.iterations == 1 and not res.converged

    cents = [Centroid(x, y) for x, y in init]
    members = associate_centroids(cents, dev_xy, delta_sr=params.delta_sr)
    # forces come from one position snapshot, so compute them all before moving
    forces = [total_force(c, cents, dev_xy[members[a]],
                          [-reliab[i] for i in members[a]],
                          lam=params.lam, kappa=params.kappa)
              for a, c in enumerate(cents)]
    for c, f in zip(cents, forces):
        move_centroid(c, f, params.eta)
    manual = np.array([(c.x, c.y) for c in cents])
    assert np.allclose(res.centroid_xy, manual, rtol=1e-12, atol=1e-12)


def test_phase1_deterministic_in_seed():
    sc = generate_scenario(40, seed=3)
    reliab = np.linspace(0.1, 0.9, 40)
    params = RForceParams(max_iters=60)
    a = phase1(sc.device_xy(), reliab, (100.0, 100.0), params, seed=5)
    b = phase1(sc.device_xy(), reliab, (100.0, 100.0), params, seed=5)
    assert np.array_equal(a.centroid_xy, b.centroid_xy)
    assert a.members == b.members and a.iterations == b.iterations
    c = phase1(sc.device_xy(), reliab, (100.0, 100.0), params, seed=6)
    assert not np.array_equal(a.centroid_xy, c.centroid_xy)


def test_phase1_mirror_symmetry():
    # flipping the geometry across x = 0 flips the trajectories exactly
    rng = np.random.default_rng(8)
    dev_xy = rng.uniform(0, 100, (30, 2))
    reliab = rng.uniform(0, 1, 30)
    init = rng.uniform(0, 100, (3, 2))
    params = RForceParams(k_centroids=3, max_iters=80, stability_window=5)

    def flipx(a):
        out = a.copy()
        out[:, 0] = -out[:, 0]
        return out

    res = phase1(dev_xy, reliab, (100.0, 100.0), params, seed=0, initial_xy=init)
    mirrored = phase1(flipx(dev_xy), reliab, (100.0, 100.0), params, seed=0,
                      initial_xy=flipx(init))
    assert np.array_equal(mirrored.centroid_xy, flipx(res.centroid_xy))
    assert mirrored.members == res.members
    assert mirrored.iterations == res.iterations


def test_phase1_rejects_wrong_initial_shape():
    with pytest.raises(ValueError, match="initial_xy"):
        phase1(np.zeros((5, 2)), np.zeros(5), (10.0, 10.0),
               RForceParams(k_centroids=2), seed=0, initial_xy=np.zeros((3, 2)))


def test_phase1_captures_lone_centroid_near_device():
    # one centroid, one device: the fixed step can never settle, it flips
    # across the device every iteration, so max_iters binds while the
    # centroid stays trapped within a couple of steps of the device
    dev_xy = np.array([[50.0, 50.0]])
    params = RForceParams(k_centroids=1, max_iters=500)
    res = phase1(dev_xy, np.array([0.9]), (100.0, 100.0), params, seed=1)
    assert res.iterations == 500 and not res.converged
    assert math.hypot(*(res.centroid_xy[0] - dev_xy[0])) < 3 * params.eta
    assert res.members == [[0]]


def test_default_k_rounds_up():
    assert default_k(200, 10) == 20
    assert default_k(201, 10) == 21
    assert default_k(5, 10) == 1


# ---------------------------------------------------------------- phase 2


def test_phase2_snaps_to_nearest_unclaimed():
    dev = np.array([[0.0, 0.0], [5.0, 0.0], [10.0, 0.0]])
    cen = np.array([[4.4, 0.0], [4.6, 0.0]])
    members = [[0, 1], [2]]
    head_of = phase2_pick_heads(cen, dev, members)
    # centroid 0 claims device 1 and drags device 0 along; centroid 1 finds
    # both claimed and settles for device 2
    assert head_of.tolist() == [1, 1, 2]


def test_phase2_member_already_claimed_as_head_stays_put():
    dev = np.array([[0.0, 0.0], [5.5, 0.0]])
    cen = np.array([[0.1, 0.0], [5.0, 0.0]])
    members = [[0], [0, 1]]
    head_of = phase2_pick_heads(cen, dev, members)
    assert head_of.tolist() == [0, 1]


def test_phase2_surplus_centroids_logged(caplog):
    dev = np.array([[0.0, 0.0], [9.0, 0.0]])
    cen = np.array([[0.0, 0.0], [9.0, 0.0], [5.0, 5.0], [1.0, 1.0]])
    with caplog.at_level(logging.WARNING, logger="d2dcluster.rforce"):
        head_of = phase2_pick_heads(cen, dev, [[0], [1], [], []])
    assert head_of.tolist() == [0, 1]
    assert any("surplus centroids" in r.message for r in caplog.records)


# ---------------------------------------------------------------- phase 3


def test_phase3_greedy_by_distance_with_capacity():
    ap = np.array([[0.0, 0.0], [10.0, 0.0]])
    dev = np.array([[1.0, 0.0], [9.0, 0.0], [4.0, 0.0]])
    got = phase3_associate_aps(ap, [0, 1, 2], dev, delta_lr=1)
    assert got == {0: 0, 1: 1, 2: NONE}


def test_phase3_tie_breaks_on_ap_then_head():
    ap = np.array([[0.0, 0.0], [10.0, 0.0]])
    dev = np.array([[5.0, 0.0], [5.0, 0.0]])
    got = phase3_associate_aps(ap, [0, 1], dev, delta_lr=1)
    assert got == {0: 0, 1: 1}


def test_phase3_all_heads_served_with_capacity():
    ap = np.array([[50.0, 50.0]])
    dev = np.random.default_rng(0).uniform(0, 100, (20, 2))
    got = phase3_associate_aps(ap, list(range(20)), dev, delta_lr=30)
    assert all(v == 0 for v in got.values())


# -------------------------------------------------- pruning and repair


def _manual_scenario(dev_specs, ap_specs, area=(100.0, 100.0)):
    devices = tuple(Device(id=i, x=x, y=y, battery_frac=b)
                    for i, (x, y, b) in enumerate(dev_specs))
    aps = tuple(AccessPoint(id=m, x=x, y=y, tx_power=p)
                for m, (x, y, p) in enumerate(ap_specs))
    sc = Scenario(area_width=area[0], area_height=area[1], devices=devices, aps=aps)
    sc.validate()
    return sc


def test_finalize_drops_member_beyond_sr_range(radio):
    # head at (10,10); member at 35 m is past the 28 m admission distance
    sc = _manual_scenario(
        [(10.0, 10.0, 0.9), (10.0, 20.0, 0.9), (10.0, 45.0, 0.9)],
        [(50.0, 50.0, 10.0)],
    )
    head_of = np.array([0, 0, 0])
    sol = finalize_solution(sc, radio, head_of, {0: 0})
    assert sol.head_of == [0, 0, NONE]
    assert sol.heads == [0] and sol.ap_of_head == [0]


def test_finalize_dissolves_head_without_ap(radio):
    sc = _manual_scenario(
        [(10.0, 10.0, 0.9), (10.0, 20.0, 0.9)],
        [(50.0, 50.0, 10.0)],
    )
    sol = finalize_solution(sc, radio, np.array([0, 0]), {0: NONE})
    assert sol.head_of == [NONE, NONE]
    assert sol.heads == [] and sol.outage == [0, 1]


def test_finalize_dissolves_head_below_lr_snr(radio):
    # 10 W reaches exactly 100 m at SNR 1; a 212 m link is far below threshold
    sc = _manual_scenario(
        [(150.0, 150.0, 0.9), (150.0, 160.0, 0.9)],
        [(0.0, 0.0, 10.0)],
        area=(300.0, 300.0),
    )
    sol = finalize_solution(sc, radio, np.array([0, 0]), {0: 0})
    assert sol.heads == [] and sol.outage == [0, 1]


def test_repair_promotes_singletons_until_ap_full(radio):
    # 3 outage devices, AP has 2 spare slots: two nearest get promoted
    sc = _manual_scenario(
        [(50.0, 50.0, 0.9), (50.0, 60.0, 0.9), (50.0, 62.0, 0.9), (50.0, 70.0, 0.9)],
        [(50.0, 50.0, 10.0)],
    )
    sol = ClusterSolution(n_devices=4, head_of=[0, NONE, NONE, NONE],
                          heads=[0], ap_of_head=[0])
    got = repair_outage(sc, radio, sol, delta_lr=3)
    assert got.heads == [0, 1, 2]
    assert got.head_of == [0, 1, 2, NONE]
    assert got.ap_of_head == [0, 0, 0]


def test_repair_moves_no_members(radio):
    sc = _manual_scenario(
        [(40.0, 50.0, 0.9), (45.0, 50.0, 0.9), (80.0, 80.0, 0.9)],
        [(50.0, 50.0, 10.0)],
    )
    sol = ClusterSolution(n_devices=3, head_of=[0, 0, NONE], heads=[0], ap_of_head=[0])
    got = repair_outage(sc, radio, sol, delta_lr=30)
    assert got.head_of[0] == 0 and got.head_of[1] == 0
    assert got.head_of[2] == 2
    assert got.heads == [0, 2]


def test_repair_noop_when_ap_full(radio):
    sc = _manual_scenario(
        [(40.0, 50.0, 0.9), (60.0, 50.0, 0.9), (80.0, 80.0, 0.9)],
        [(50.0, 50.0, 10.0)],
    )
    sol = ClusterSolution(n_devices=3, head_of=[0, 1, NONE], heads=[0, 1],
                          ap_of_head=[0, 0])
    got = repair_outage(sc, radio, sol, delta_lr=2)
    assert got.head_of == sol.head_of
    assert got.outage == [2]


def test_repair_skips_unreachable_devices(radio):
    sc = _manual_scenario(
        [(10.0, 10.0, 0.9), (290.0, 290.0, 0.9)],
        [(0.0, 0.0, 10.0)],
        area=(300.0, 300.0),
    )
    sol = ClusterSolution(n_devices=2, head_of=[NONE, NONE], heads=[], ap_of_head=[])
    got = repair_outage(sc, radio, sol, delta_lr=30)
    assert got.head_of == [0, NONE]


# ------------------------------------------------------------- pipeline


def test_run_rforce_prefers_reliable_head(radio):
    # two candidates: a drained device and a healthy one a meter apart. The
    # drained one carries zero charge so the centroid orbits the healthy one.
    sc = _manual_scenario(
        [(50.0, 50.0, 0.12), (51.0, 50.0, 0.9)],
        [(50.0, 50.0, 10.0)],
    )
    sol = run_rforce(sc, radio, RForceParams(k_centroids=1), seed=0)
    assert 1 in sol.heads


def test_run_rforce_outputs_valid_structure(small_scenario, radio):
    sol = run_rforce(small_scenario, radio, seed=4)
    assert sol.n_devices == 20
    for h in sol.heads:
        assert sol.head_of[h] == h
    for i, h in enumerate(sol.head_of):
        assert h == NONE or sol.head_of[h] == h
    assert len(sol.ap_of_head) == len(sol.heads)


def test_run_rforce_deterministic(small_scenario, radio):
    a = run_rforce(small_scenario, radio, seed=9)
    b = run_rforce(small_scenario, radio, seed=9)
    assert a == b


def test_run_rforce_repair_flag_off(radio):
    sc = generate_scenario(60, seed=12)
    no_repair = run_rforce(sc, radio, RForceParams(repair=False), seed=2)
    repaired = run_rforce(sc, radio, RForceParams(repair=True), seed=2)
    assert len(repaired.outage) <= len(no_repair.outage)
    assert set(no_repair.heads) <= set(repaired.heads)


def test_params_validation():
    with pytest.raises(ValueError):
        RForceParams(lam=0.0)
    with pytest.raises(ValueError):
        RForceParams(eta=-0.1)
    with pytest.raises(ValueError):
        RForceParams(attraction="some")
    with pytest.raises(ValueError):
        RForceParams(k_centroids=0)
    assert RForceParams().eps == pytest.approx(0.04)
    assert RForceParams(stability_eps=0.2).eps == 0.2
