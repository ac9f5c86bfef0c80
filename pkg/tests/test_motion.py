import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sslkit.geom import Pose, Vec2
from sslkit.motion import (MotionLimits, arrival_time, arrival_time_array, min_time_array,
                           plan_1d, predict_robot_arrival_time)


def integrate(profile, substeps=64):
    """Integrate the phase list with the trapezoid rule on velocity."""
    x, v = 0.0, profile.v0
    for dur, acc in profile.phases:
        h = dur / substeps
        for _ in range(substeps):
            v_next = v + acc * h
            x += 0.5 * (v + v_next) * h
            v = v_next
    return x, v


def brute_force_time(d, v0, vmax, acc, dec, n=200_001):
    """Forward case only (0 <= v0 <= vmax, enough room to stop): scan peak speeds."""
    vp = np.linspace(v0, vmax, n)
    s_ramp = (vp ** 2 - v0 ** 2) / (2 * acc) + vp ** 2 / (2 * dec)
    ok = s_ramp <= d
    t = (vp - v0) / acc + vp / dec + (d - s_ramp) / vp
    return float(t[ok].min())


def test_plan_examples():
    lim = MotionLimits(v_max=2000, a_acc=1000, a_dec=1000)
    assert plan_1d(0, 0, lim).total_time == 0
    p = plan_1d(4000, 0, lim)
    assert p.total_time == pytest.approx(4.0, abs=1e-12)
    x, v = integrate(p)
    assert x == pytest.approx(4000, abs=1e-6) and abs(v) < 1e-9

    p = plan_1d(4000, 0, MotionLimits(v_max=1000, a_acc=1000, a_dec=1000))
    assert [d for d, _ in p.phases] == pytest.approx([1.0, 3.0, 1.0])
    assert p.total_time == pytest.approx(5.0)
    assert integrate(p)[0] == pytest.approx(4000, abs=1e-6)


def test_plan_handles_overshoot_and_overspeed():
    lim = MotionLimits(v_max=2000, a_acc=1000, a_dec=2000)
    # moving fast toward a target 100 mm away: brake past it, then come back
    p = plan_1d(100, 1500, lim)
    x, v = integrate(p)
    assert x == pytest.approx(100, abs=1e-6) and abs(v) < 1e-9
    assert p.total_time > 1500 / 2000
    # initial speed above the cap: first phase decelerates
    p = plan_1d(10_000, 3000, lim)
    assert p.phases[0][1] < 0
    assert integrate(p)[0] == pytest.approx(10_000, abs=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_plan_matches_brute_force_optimum(seed):
    r = np.random.default_rng(seed)
    for _ in range(20):
        vmax, acc, dec = r.uniform(500, 4000), r.uniform(500, 5000), r.uniform(500, 5000)
        v0 = r.uniform(0, vmax)
        d = v0 ** 2 / (2 * dec) + r.uniform(1, 8000)
        lim = MotionLimits(v_max=vmax, a_acc=acc, a_dec=dec)
        assert plan_1d(d, v0, lim).total_time == pytest.approx(
            brute_force_time(d, v0, vmax, acc, dec), abs=1e-4)


@settings(max_examples=400, deadline=None)
@given(st.floats(-1e4, 1e4), st.floats(-5000, 5000),
       st.floats(200, 5000), st.floats(200, 6000), st.floats(200, 6000))
def test_plan_respects_limits(d, v0, vmax, acc, dec):
    p = plan_1d(d, v0, MotionLimits(v_max=vmax, a_acc=acc, a_dec=dec))
    x, v = p.terminal()
    assert x == pytest.approx(d, abs=1e-6 * max(1.0, abs(d)))
    assert abs(v) < 1e-6
    vel = v0
    for dur, a in p.phases:
        assert dur > 0
        # accelerating phases may not exceed a_acc, braking phases may not exceed a_dec
        if abs(vel) < 1e-9:
            bound = max(acc, dec)  # direction of travel is ambiguous at rest
        else:
            bound = acc if vel * a > 0 else dec
        assert abs(a) <= bound * (1 + 1e-12)
        vel += a * dur
        assert abs(vel) <= max(vmax, abs(v0)) * (1 + 1e-9) + 1e-9


def test_vectorized_time_matches_plan(rng):
    lim = MotionLimits(v_max=2500, a_acc=2000, a_dec=3500)
    d = rng.uniform(-8000, 8000, 2000)
    v = rng.uniform(-4000, 4000, 2000)
    d[:50] = 0.0
    fast = min_time_array(d, v, lim.v_max, lim.a_acc, lim.a_dec)
    slow = [plan_1d(a, b, lim).total_time for a, b in zip(d, v)]
    np.testing.assert_allclose(fast, slow, rtol=1e-9, atol=1e-9)


def test_arrival_time_examples():
    lim = MotionLimits(v_max=2000, a_acc=2000, a_dec=2000)
    rest = Vec2(0, 0)
    assert arrival_time(Pose(Vec2(0, 0)), rest, Vec2(0, 0), lim) == 0
    assert arrival_time(Pose(Vec2(0, 0)), rest, Vec2(1000, 0), lim) == pytest.approx(
        2 * math.sqrt(1000 / 2000))
    spin = MotionLimits(w_max=1e9, aw=math.pi)
    assert arrival_time(Pose(Vec2(0, 0), 0.0), rest, Vec2(0, 0), spin,
                        target_theta=math.pi) == pytest.approx(2.0)


def test_lateral_velocity_counts():
    lim = MotionLimits(v_max=2000, a_acc=2000, a_dec=1000)
    # sliding sideways at 2 m/s: 2 s to brake (drifting 2000 mm off the line),
    # then a triangular move of 2000 mm back with a=2000 up, 1000 down
    vp = math.sqrt(2000 / (0.5 / 2000 + 0.5 / 1000))
    expected = 2.0 + vp / 2000 + vp / 1000
    t = predict_robot_arrival_time(Vec2(0, 0), Vec2(0, 2000), Vec2(100, 0), lim)
    assert t == pytest.approx(expected, abs=1e-12)


def test_arrival_array_matches_scalar(rng):
    lim = MotionLimits()
    pos = rng.uniform(-5000, 5000, (500, 2))
    vel = rng.uniform(-3000, 3000, (500, 2))
    target = (1234.0, -321.0)
    batch = arrival_time_array(pos, vel, target, lim)
    for p, v, t in zip(pos, vel, batch):
        assert t == pytest.approx(predict_robot_arrival_time(p, v, target, lim), rel=1e-9)


def test_limits_validated():
    with pytest.raises(ValueError):
        MotionLimits(v_max=0)
