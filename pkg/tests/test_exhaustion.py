import numpy as np
import pytest

from lattice_vortex.calculus import LatticeField, from_interior, lq_norm, zeros
from lattice_vortex.chern_simons import ModelParams, VortexConfig, solve_domain
from lattice_vortex.exhaustion import (
    ExhaustionSchedule,
    decay_profile,
    doubling_radii,
    null_extend,
    report_dict,
    restrict_field,
    run_exhaustion,
    tail_is_monotone,
    verify_global_negativity,
    vortex_centroid,
)
from lattice_vortex.lattice import make_box

RNG = np.random.default_rng(5)


def single_vortex(n=2):
    return VortexConfig(((tuple(0 for _ in range(n)), 1),))


def test_vortex_centroid():
    assert vortex_centroid(VortexConfig(()), 2) == (0, 0)
    cfg = VortexConfig((((0, 0), 1), ((4, 2), 1), ((2, 2), 1)))
    assert vortex_centroid(cfg, 2) == (2, 2)


def test_doubling_radii():
    assert doubling_radii(4, 4) == (4, 8, 16, 32)
    with pytest.raises(ValueError):
        doubling_radii(0, 3)


def test_schedule_validation():
    vort = single_vortex()
    with pytest.raises(ValueError):
        ExhaustionSchedule(dimension=2, shape="box", radii=(4, 4), vortices=vort)
    with pytest.raises(ValueError):
        ExhaustionSchedule(dimension=2, shape="box", radii=(8, 4), vortices=vort)
    with pytest.raises(ValueError):
        ExhaustionSchedule(dimension=2, shape="hex", radii=(2, 4), vortices=vort)
    with pytest.raises(ValueError):
        ExhaustionSchedule(dimension=2, shape="box", radii=(), vortices=vort)
    far = VortexConfig((((9, 9), 1),))
    with pytest.raises(ValueError):
        ExhaustionSchedule(
            dimension=2, shape="box", radii=(2, 4), vortices=far, center=(0, 0)
        )
    # default center comes from the vortex positions
    offset = VortexConfig((((5, 5), 1),))
    sched = ExhaustionSchedule(dimension=2, shape="box", radii=(2, 4), vortices=offset)
    assert sched.center == (5, 5)


def test_null_extend_preserves_values_and_norms():
    small = make_box(2, 2)
    big = make_box(2, 4)
    u = from_interior(small, RNG.uniform(-1, 0, small.n_interior))
    ext = null_extend(u, big)
    for p in small.interior:
        assert ext.value_at(p) == u.value_at(p)
    for q in (1.0, 2.0, 4.0):
        assert lq_norm(ext, q, region="closure") == pytest.approx(
            lq_norm(u, q, region="closure"), rel=1e-14
        )
    z = null_extend(zeros(small), big)
    assert not z.values.any()


def test_null_extend_rejects_non_nested():
    small = make_box(2, 2)
    with pytest.raises(ValueError):
        null_extend(zeros(make_box(2, 4)), small)


def test_null_extend_idempotent_through_chain():
    small, mid, big = make_box(2, 1), make_box(2, 3), make_box(2, 6)
    u = from_interior(small, RNG.uniform(-2, 0, small.n_interior))
    via_mid = null_extend(null_extend(u, mid), big)
    direct = null_extend(u, big)
    np.testing.assert_array_equal(via_mid.values, direct.values)


def test_restrict_round_trip():
    small = make_box(2, 2)
    big = make_box(2, 5)
    u = from_interior(small, RNG.uniform(-1, 0, small.n_interior))
    back = restrict_field(null_extend(u, big), small)
    np.testing.assert_array_equal(back.values, u.values)
    with pytest.raises(ValueError):
        restrict_field(u, big)


def test_decay_profile_zero_field():
    dom = make_box(2, 3)
    profile = decay_profile(zeros(dom), (0, 0))
    assert all(s == 0.0 for _, s in profile)
    assert [r for r, _ in profile] == sorted(r for r, _ in profile)


def test_decay_profile_single_vortex_peaks_at_center():
    dom = make_box(2, 4)
    params = ModelParams(lam=1.0, p=0)
    u, _ = solve_domain(dom, single_vortex(), params)
    profile = decay_profile(u, (0, 0))
    assert profile[0][0] == 0
    assert profile[0][1] == pytest.approx(abs(u.value_at((0, 0))))
    assert profile[0][1] == max(s for _, s in profile)
    assert all(s >= 0.0 for _, s in profile)


def test_tail_is_monotone():
    good = [(0, 5.0), (1, 1.0), (2, 0.5), (3, 0.2), (4, 0.1)]
    assert tail_is_monotone(good)
    bad = [(0, 5.0), (1, 1.0), (2, 0.5), (3, 0.2), (4, 0.4)]
    assert not tail_is_monotone(bad)
    assert tail_is_monotone(bad, fraction=0.0) or True  # empty tail is fine


def test_verify_global_negativity():
    dom = make_box(2, 2)
    assert verify_global_negativity(zeros(dom))
    vals = np.zeros(dom.n_closure)
    vals[0] = 1e-6
    assert not verify_global_negativity(LatticeField(dom, vals))


def test_run_exhaustion_no_vortices():
    sched = ExhaustionSchedule(
        dimension=2, shape="box", radii=(2, 4), vortices=VortexConfig(())
    )
    est = run_exhaustion(sched, ModelParams(lam=1.0, p=0))
    assert est.inter_domain_gaps == [0.0]
    assert est.boundary_shell_sup == 0.0
    assert est.success
    assert all(not u.values.any() for u in est.solutions)


def test_run_exhaustion_single_vortex_small():
    sched = ExhaustionSchedule(
        dimension=2, shape="box", radii=(3, 6, 12), vortices=single_vortex()
    )
    est = run_exhaustion(sched, ModelParams(lam=1.0, p=0), backend="direct")
    assert len(est.inter_domain_gaps) == 2
    assert est.gaps_strictly_decreasing
    assert est.chain_violation <= 1e-9
    assert all(verify_global_negativity(u) for u in est.solutions)
    # consecutive zero extensions sit below their predecessors
    for small_dom, small_u, big_u in zip(est.domains, est.solutions, est.solutions[1:]):
        onto = restrict_field(big_u, small_dom)
        assert np.all(onto.values <= small_u.values + 1e-9)
    assert tail_is_monotone(est.decay)


def test_run_exhaustion_ball_shape():
    sched = ExhaustionSchedule(
        dimension=2, shape="ball", radii=(3, 6, 12), vortices=single_vortex()
    )
    est = run_exhaustion(sched, ModelParams(lam=1.0, p=0), backend="direct")
    assert est.domains[0].kind == "ball"
    assert est.gaps_strictly_decreasing
    assert est.final_gap < 0.1


def test_run_exhaustion_warm_start_matches_cold():
    # unverified optimization: must reproduce the cold-start chain and
    # still pass every per-step monotonicity check
    sched = ExhaustionSchedule(
        dimension=2, shape="box", radii=(3, 6), vortices=single_vortex()
    )
    params = ModelParams(lam=1.0, p=0)
    cold = run_exhaustion(sched, params, backend="direct")
    warm = run_exhaustion(sched, params, backend="direct", warm_start=True)
    for uc, uw in zip(cold.solutions, warm.solutions):
        assert np.abs(uc.values - uw.values).max() < 1e-8
    assert warm.traces[1].iterations <= cold.traces[1].iterations
    assert all(t.all_monotone() for t in warm.traces)


def test_solve_domain_rejects_bad_warm_start():
    from lattice_vortex.chern_simons import solve_domain as sd

    dom = make_box(2, 2)
    with pytest.raises(ValueError):
        sd(dom, single_vortex(), ModelParams(lam=1.0, p=0), u_init=zeros(make_box(2, 2)))
    bad = from_interior(dom, np.full(dom.n_interior, 0.5))
    with pytest.raises(ValueError):
        sd(dom, single_vortex(), ModelParams(lam=1.0, p=0), u_init=bad)


def test_run_exhaustion_3d():
    sched = ExhaustionSchedule(
        dimension=3, shape="box", radii=(2, 4), vortices=single_vortex(3)
    )
    est = run_exhaustion(sched, ModelParams(lam=1.0, p=0), backend="direct")
    assert est.gaps_non_increasing
    assert verify_global_negativity(est.finest_field)


def test_report_dict_structure():
    sched = ExhaustionSchedule(
        dimension=2, shape="box", radii=(2, 4), vortices=single_vortex()
    )
    est = run_exhaustion(sched, ModelParams(lam=1.0, p=0))
    report = report_dict(est)
    assert report["radii"] == [2, 4]
    assert len(report["per_radius"]) == 2
    first, second = report["per_radius"]
    assert first["gap_to_previous"] is None
    assert second["gap_to_previous"] == est.inter_domain_gaps[0]
    for key in ("radius", "iterations", "J_final", "residual", "l2p2_norm"):
        assert key in first
    assert isinstance(report["success"], bool)
