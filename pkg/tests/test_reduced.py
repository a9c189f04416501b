import math

import numpy as np
import pytest
from conftest import X, Y, Z
from scipy.linalg import expm

from schmidtsphere import (
    ControlSchedule,
    CouplingHamiltonian,
    LocalControl,
    chamber_diameter,
    chamber_distance,
    control_time_lower_bound,
    induced_field,
    integrate_lift,
    integrate_reduced,
    lie_rank,
    reach_sample,
    speed_limit_bound,
)
from schmidtsphere.errors import DimensionError, KindError, UnitarityError
from schmidtsphere.reduced import lie_closure_dim
from schmidtsphere.sampling import haar_unitary, random_coupling, random_local_coupling, random_local_unitary

XY = CouplingHamiltonian("distinguishable", [(X, Y)])


def _random_schedule(kind, d1, d2, rng, T=1.0, segments=4):
    bps = np.linspace(0, T, segments + 1)
    return ControlSchedule(bps, [LocalControl(*random_local_unitary(kind, d1, d2, rng)) for _ in range(segments)])


@pytest.mark.parametrize("method", ["expm", "rk4"])
def test_bell_rotation(method):
    sched = ControlSchedule.constant(LocalControl.identity(2, 2), math.pi / 4)
    traj = integrate_reduced(XY, sched, [1, 0], 1e-3, method=method)
    assert np.allclose(traj.final, [1 / math.sqrt(2)] * 2, atol=1e-10)
    assert traj.times[-1] == pytest.approx(math.pi / 4)
    assert np.allclose(traj.points, np.column_stack([np.cos(traj.times), np.sin(traj.times)]), atol=1e-10)


def test_reduced_oracle_piecewise(rng):
    H0 = random_coupling("distinguishable", 3, 3, rng)
    sched = _random_schedule("distinguishable", 3, 3, rng)
    traj = integrate_reduced(H0, sched, np.ones(3) / math.sqrt(3), 0.01)
    x = np.ones(3) / math.sqrt(3)
    for t0, t1, seg in sched.intervals():
        x = expm((t1 - t0) * induced_field(H0, seg.pair).matrix) @ x
        assert t1 in traj.times
    assert np.allclose(traj.final, x, atol=1e-12)
    assert np.allclose(np.linalg.norm(traj.points, axis=1), 1, atol=1e-12)


def test_rk4_converges(rng):
    H0 = random_coupling("bosonic", 3, 3, rng)
    sched = _random_schedule("bosonic", 3, 3, rng)
    x0 = np.array([0.8, 0.6, 0.0])
    ref = integrate_reduced(H0, sched, x0, 0.01).final
    e1 = np.linalg.norm(integrate_reduced(H0, sched, x0, 0.02, "rk4").final - ref)
    e2 = np.linalg.norm(integrate_reduced(H0, sched, x0, 0.01, "rk4").final - ref)
    assert e2 < e1 / 8


def test_lift_is_orthogonal_and_consistent(rng):
    H0 = random_coupling("fermionic", 5, 5, rng)
    sched = _random_schedule("fermionic", 5, 5, rng)
    lift = integrate_lift(H0, sched, 0.01)
    for R in lift.points:
        assert np.linalg.norm(R.T @ R - np.eye(2)) <= 1e-12
        assert np.linalg.det(R) == pytest.approx(1, abs=1e-12)
    x0 = np.array([0.6, 0.8])
    traj = integrate_reduced(H0, sched, x0, 0.01)
    assert np.allclose(lift.points @ x0, traj.points, atol=1e-12)


def test_integration_errors(rng):
    sched = ControlSchedule.constant(LocalControl.identity(2, 2), 1)
    with pytest.raises(DimensionError):
        integrate_reduced(XY, sched, [1, 0, 0], 0.1)
    with pytest.raises(ValueError):
        integrate_reduced(XY, sched, [1, 1], 0.1)
    with pytest.raises(ValueError):
        integrate_reduced(XY, sched, [1, 0], 0)
    with pytest.raises(ValueError):
        integrate_reduced(XY, sched, [1, 0], 0.1, method="euler")
    bos = CouplingHamiltonian("bosonic", [(X, X)])
    bad = ControlSchedule.constant(LocalControl(np.eye(2), haar_unitary(2, rng)), 1)
    with pytest.raises(KindError):
        integrate_reduced(bos, bad, [1, 0], 0.1)


def test_schedule_validation():
    c = LocalControl.identity(2)
    with pytest.raises(ValueError):
        ControlSchedule([0, 1, 1], [c, c])
    with pytest.raises(ValueError):
        ControlSchedule([0.5, 1], [c])
    with pytest.raises(DimensionError):
        ControlSchedule([0, 1, 2], [c])
    with pytest.raises(UnitarityError):
        LocalControl(2 * np.eye(2))
    s = ControlSchedule([0, 1, 2], [c, c])
    assert s.with_horizon(1.5).T == 1.5 and len(s.with_horizon(0.5)) == 1
    assert s.with_horizon(3).T == 3 and len(s.with_horizon(3)) == 2


def test_generator_control():
    c = LocalControl.from_generator(Z)
    assert np.allclose(c.V, expm(-1j * Z)) and np.allclose(c.W, c.V)
    assert np.array_equal(c.generator[1], Z)


def test_lie_closure_oracle():
    def L(i, j, n=3):
        m = np.zeros((n, n))
        m[i, j], m[j, i] = -1, 1
        return m

    assert lie_closure_dim([L(0, 1), L(1, 2)]) == 3
    assert lie_closure_dim([L(0, 1)]) == 1
    assert lie_closure_dim([L(0, 1, 4), L(2, 3, 4)]) == 2
    assert lie_closure_dim([L(0, 1, 4), L(1, 2, 4), L(2, 3, 4)]) == 6
    assert lie_closure_dim([]) == 0


@pytest.mark.parametrize("kind,d,n", [("distinguishable", 3, 3), ("bosonic", 4, 4), ("fermionic", 4, 2), ("fermionic", 5, 2)])
def test_lie_rank(rng, kind, d, n):
    assert lie_rank(random_coupling(kind, d, d, rng), seed=1) == n * (n - 1) // 2
    assert lie_rank(random_local_coupling(kind, d, d, rng)) == 0


def test_chamber_geometry():
    assert chamber_diameter(2) == pytest.approx(math.pi / 4, abs=1e-15)
    assert chamber_diameter(4) == pytest.approx(math.pi / 3, abs=1e-15)
    assert chamber_diameter(1) == 0
    assert chamber_distance([1, 0], [0.6, 0.8]) == pytest.approx(math.acos(0.6))
    assert control_time_lower_bound(XY) == pytest.approx(math.pi / 8, abs=1e-15)
    zero = CouplingHamiltonian("distinguishable", [(np.zeros((2, 2)), X)])
    assert control_time_lower_bound(zero) == math.inf


def test_reach_sample(rng):
    H0 = random_coupling("distinguishable", 3, 3, rng)
    p0 = [1, 0, 0]
    pts = reach_sample(H0, p0, 2.0, 40, seed=3)
    assert pts.shape == (40, 3)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1)
    assert np.array_equal(pts, reach_sample(H0, p0, 2.0, 40, seed=3, jobs=4))
    assert not np.array_equal(pts, reach_sample(H0, p0, 2.0, 40, seed=4))
    assert np.array_equal(reach_sample(H0, p0, 0, 5), np.tile(p0, (5, 1)))
    # no endpoint can be farther from p0 than the speed limit allows
    reach = max(chamber_distance(p0, q) for q in pts)
    assert reach <= 2.0 * speed_limit_bound(H0) + 1e-12
    # long horizons spread over the sphere: some endpoint leaves the start octant
    far = reach_sample(H0, p0, 20.0, 200, seed=5)
    assert np.min(far[:, 0]) < 0


def test_trajectory_speed_respects_bound(rng):
    H0 = random_coupling("fermionic", 4, 4, rng)
    traj = integrate_reduced(H0, _random_schedule("fermionic", 4, 4, rng), [1, 0], 0.01)
    speeds = np.linalg.norm(np.diff(traj.points, axis=0), axis=1) / np.diff(traj.times)
    assert np.max(speeds) <= speed_limit_bound(H0) * (1 + 1e-6)
