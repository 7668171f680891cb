import math

import numpy as np
import pytest

from spheretx import (
    AbsorptionMode,
    DomainError,
    ModelError,
    ReceiverKind,
    SimParams,
    TransmitterModel,
    TxSolidity,
    line_tx_cir_passive_1d,
    peak_time,
    run_ensemble,
    run_realization,
)
from spheretx import _kernels
from spheretx.simulation import (
    MoleculeState,
    detect_absorption,
    diffuse_step,
    init_molecules,
    log_record_times,
    tx_center,
)

from conftest import make_spec

P, A = ReceiverKind.PASSIVE, ReceiverKind.ABSORBING
VOL, SURF, POINT = TransmitterModel.UNIFORM_VOLUME, TransmitterModel.SURFACE_RELEASE, TransmitterModel.POINT
SEG, BRIDGE = AbsorptionMode.SEGMENT_INTERSECTION, AbsorptionMode.SEGMENT_INTERSECTION_WITH_BRIDGE


def rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------- release


@pytest.mark.parametrize("dim", ["1D", "3D"])
def test_point_release_at_center(dim):
    s = make_spec(dim)
    state = init_molecules(s, POINT, rng())
    assert np.all(state.positions == tx_center(s))
    assert state.alive.all() and len(state) == 1000


def test_uniform_ball_mean_radius():
    s = make_spec("3D", molecules=10**6)
    pos = init_molecules(s, VOL, rng(1)).positions
    radius = np.linalg.norm(pos - tx_center(s), axis=1)
    se = radius.std() / math.sqrt(radius.size)
    assert abs(radius.mean() - 0.75e-6) < 3 * se
    assert radius.max() <= 1e-6


def test_surface_release_on_sphere():
    s = make_spec("3D", molecules=10**4)
    pos = init_molecules(s, SURF, rng(2)).positions
    radius = np.linalg.norm(pos - tx_center(s), axis=1)
    assert np.allclose(radius, 1e-6, rtol=1e-14, atol=0)


def test_segment_release_1d():
    s = make_spec("1D", molecules=10**5)
    x = init_molecules(s, VOL, rng(3)).positions[:, 0]
    assert x.min() >= -3e-6 and x.max() <= -1e-6
    assert abs(x.mean() + 2e-6) < 4 * (2e-6 / math.sqrt(12)) / math.sqrt(x.size)


def test_surface_release_needs_3d(spec1):
    with pytest.raises(ModelError):
        init_molecules(spec1, SURF, rng())


# ---------------------------------------------------------------- stepping


def test_zero_diffusion_step_is_identity(spec3):
    state = init_molecules(spec3, VOL, rng())
    assert np.array_equal(diffuse_step(state, 0.0, 1e-4, rng()).positions, state.positions)


def test_step_variance():
    state = MoleculeState(np.zeros((10**6, 3)), np.ones(10**6, dtype=bool))
    moved = diffuse_step(state, 1e-9, 1e-4, rng(4)).positions
    var = moved.var(axis=0)
    assert np.allclose(var, 2e-13, rtol=0.01)


def test_absorbed_molecules_stay_put():
    alive = np.array([True, False, True])
    state = MoleculeState(np.zeros((3, 3)), alive)
    moved = diffuse_step(state, 1e-9, 1e-4, rng())
    assert np.all(moved.positions[1] == 0) and np.all(moved.positions[0] != 0)


def test_equal_seeds_equal_steps(spec3):
    state = init_molecules(spec3, VOL, rng(7))
    a = diffuse_step(state, 1e-9, 1e-6, rng(9)).positions
    b = diffuse_step(state, 1e-9, 1e-6, rng(9)).positions
    assert np.array_equal(a, b)


# ---------------------------------------------------------------- absorption


def test_absorption_geometry(spec3, spec1):
    far = ((-5e-6, 0, 0), (-4e-6, 3e-6, 0))
    assert not detect_absorption(*far, spec3, SEG, 1e-9, 1e-6)
    assert detect_absorption((-3e-6, 0, 0), (-0.5e-6, 0, 0), spec3, SEG, 1e-9, 1e-6)
    assert detect_absorption((-2e-6, 0.5e-6, 0), (2e-6, 0.5e-6, 0), spec3, SEG, 1e-9, 1e-6)
    assert not detect_absorption((-2e-6, 1.5e-6, 0), (2e-6, 1.5e-6, 0), spec3, SEG, 1e-9, 1e-6)
    assert detect_absorption((-2e-6,), (3e-6,), spec1, SEG, 1e-9, 1e-6)
    assert not detect_absorption((-3e-6,), (-2e-6,), spec1, SEG, 1e-9, 1e-6)


def test_bridge_probability():
    assert _kernels.bridge_probability(0.0, 1.0, 1e-9, 1e-6) == 1.0
    assert _kernels.bridge_probability(1e-8, 2e-8, 1e-9, 1e-6) == pytest.approx(math.exp(-2e-16 / 1e-15))
    with pytest.raises(ValueError):
        detect_absorption((-3e-6,), (-2e-6,), make_spec("1D"), BRIDGE, 1e-9, 1e-6)


# ---------------------------------------------------------------- realizations


def params(**kw):
    base = dict(dt=1e-6, horizon=1e-3, realizations=10, master_seed=3,
                record_times=np.array([0.0, 1e-5, 1e-4, 5e-4, 1e-3]))
    base.update(kw)
    return SimParams(**base)


@pytest.mark.parametrize("kind", [P, A])
@pytest.mark.parametrize("dim", ["1D", "3D"])
def test_first_record_is_zero_and_absorbing_monotone(kind, dim):
    s = make_spec(dim)
    counts = run_realization(s, kind, VOL, params(), 0)
    assert counts[0] == 0
    if kind is A:
        assert np.all(np.diff(counts) >= 0)


def test_no_diffusion_no_counts(spec3):
    counts = np.zeros(3, dtype=np.int64)
    pos = np.ascontiguousarray(init_molecules(spec3, VOL, rng()).positions)
    _kernels.walk_3d(rng(), pos, np.array([0, 10, 100]), 0.0, 1e-6, False, False,
                     1e-9, 1e-6, False, -2e-6, 1e-6, 8, counts)
    assert counts.tolist() == [0, 0, 0]


def test_single_realization_has_zero_std(spec3):
    res = run_ensemble(spec3, P, VOL, params(realizations=1, dt=1e-5))
    assert np.all(res.std_count == 0)


def test_determinism_and_thread_invariance(spec3):
    p = params(dt=1e-5, realizations=6)
    a = run_ensemble(spec3, A, VOL, p, threads=1)
    b = run_ensemble(spec3, A, VOL, p, threads=1)
    c = run_ensemble(spec3, A, VOL, p, threads=3)
    assert np.array_equal(a.counts, b.counts) and np.array_equal(a.counts, c.counts)
    assert np.array_equal(a.mean_count, c.mean_count) and np.array_equal(a.std_count, c.std_count)
    d = run_ensemble(spec3, A, VOL, SimParams(**{**p.__dict__, "master_seed": 4}))
    assert not np.array_equal(a.counts, d.counts)


def test_passive_1d_mean_at_peak():
    s = make_spec("1D", d=5e-6)
    tp = peak_time(s, P)
    p = SimParams(dt=1e-4, horizon=tp, realizations=100, master_seed=8, record_times=np.array([tp]))
    res = run_ensemble(s, P, VOL, p)
    want = line_tx_cir_passive_1d(s, res.times[0])
    assert abs(res.mean_count[0] - want) < 3 * res.standard_error[0]


def test_conservation_with_python_stepping():
    s = make_spec("3D", molecules=300)
    g = rng(12)
    state = init_molecules(s, VOL, g)
    absorbed = 0
    dt = 1e-5
    for _ in range(200):
        moved = diffuse_step(state, s.diffusion, dt, g)
        alive = moved.alive.copy()
        for i in np.flatnonzero(alive):
            if detect_absorption(state.positions[i], moved.positions[i], s, SEG, s.diffusion, dt):
                alive[i] = False
                absorbed += 1
        state = MoleculeState(moved.positions, alive)
        assert int(state.alive.sum()) + absorbed == s.molecules
    assert absorbed > 0


def test_bridge_counts_at_least_segment_counts():
    s = make_spec("1D")
    kw = dict(dt=1e-5, horizon=1e-3, realizations=20, record_times=np.array([1e-4, 1e-3]))
    seg = run_ensemble(s, A, VOL, SimParams(**kw, absorption_mode=SEG))
    bri = run_ensemble(s, A, VOL, SimParams(**kw, absorption_mode=BRIDGE, master_seed=1))
    noise = 4 * np.hypot(seg.standard_error, bri.standard_error)
    assert np.all(bri.mean_count >= seg.mean_count - noise)
    assert bri.mean_count[-1] > seg.mean_count[-1]


def test_smaller_step_never_loses_absorptions():
    s = make_spec("3D")
    rec = np.array([1e-4, 1e-3])
    coarse = run_ensemble(s, A, VOL, SimParams(dt=2e-5, horizon=1e-3, realizations=20, record_times=rec))
    fine = run_ensemble(s, A, VOL, SimParams(dt=1e-5, horizon=1e-3, realizations=20, record_times=rec,
                                             master_seed=5))
    noise = 4 * np.hypot(coarse.standard_error, fine.standard_error)
    assert np.all(fine.mean_count >= coarse.mean_count - noise)


# ---------------------------------------------------------------- reflective transmitter


def test_reflection_keeps_molecules_outside():
    g = rng(13)
    c = np.array([-2e-6, 0.0, 0.0])
    for _ in range(2000):
        direction = g.standard_normal(3)
        p = c + 1e-6 * (1 + 1e-3 * g.random()) * direction / np.linalg.norm(direction)
        q = p + 5e-7 * g.standard_normal(3)
        out = np.array(_kernels.reflect_off_sphere(*p, *q, *c, 1e-6, 8))
        assert np.linalg.norm(out - c) >= 1e-6 * (1 - 1e-12)


def test_reflection_mirrors_head_on_step():
    out = _kernels.reflect_off_sphere(2.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 8)
    assert out == pytest.approx((1.5, 0.0, 0.0))
    miss = _kernels.reflect_off_sphere(2.0, 2.0, 0.0, 3.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 8)
    assert miss == (3.0, 2.0, 0.0)


def test_reflective_needs_surface_release(spec3):
    with pytest.raises(ModelError):
        run_ensemble(spec3, A, VOL, params(tx_solidity=TxSolidity.REFLECTIVE))
    run_ensemble(spec3, A, SURF, params(tx_solidity=TxSolidity.REFLECTIVE, dt=1e-5, realizations=2))


# ---------------------------------------------------------------- parameters


def test_record_times_snap_to_steps():
    t = log_record_times(1e-6, 1e-3, 1e-7, 20)
    steps = t / 1e-7
    assert np.allclose(steps, np.rint(steps), rtol=0, atol=1e-6)
    assert t[-1] <= 1e-3 and np.all(np.diff(t) > 0)


def test_params_validation():
    with pytest.raises(DomainError):
        params(dt=0.0)
    with pytest.raises(DomainError):
        params(record_times=np.array([1e-4, 2e-3]))
    with pytest.raises(DomainError):
        params(record_times=np.array([2e-4, 1e-4]))
    with pytest.raises(DomainError):
        params(realizations=0)
    default = SimParams(dt=1e-6, horizon=1e-3)
    assert default.record_times[-1] == pytest.approx(1e-3)
