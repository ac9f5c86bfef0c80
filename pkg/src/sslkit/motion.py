"""Time-optimal trapezoidal velocity planning.

A translation is decomposed into an axis pointing from start to target and a
lateral axis whose velocity is driven to zero; rotation is a third 1-D plan.
The arrival time is the slowest of the three.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import Pose, Vec2, normalize_angle


@dataclass(frozen=True)
class MotionLimits:
    v_max: float = 3000.0   # mm/s
    a_acc: float = 3000.0   # mm/s^2
    a_dec: float = 4000.0   # mm/s^2
    w_max: float = 10.0     # rad/s
    aw: float = 30.0        # rad/s^2

    def __post_init__(self) -> None:
        for name in ("v_max", "a_acc", "a_dec", "w_max", "aw"):
            if not getattr(self, name) > 0:
                raise ValueError(f"MotionLimits.{name} must be strictly positive")


@dataclass(frozen=True)
class TimeProfile:
    """Piecewise-constant acceleration plan starting at ``v0``."""

    phases: tuple[tuple[float, float], ...]
    v0: float = 0.0
    total_time: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "total_time", math.fsum(d for d, _ in self.phases))

    def terminal(self) -> tuple[float, float]:
        """Displacement and velocity at the end of the profile."""
        x, v = 0.0, self.v0
        for dur, acc in self.phases:
            x += v * dur + 0.5 * acc * dur * dur
            v += acc * dur
        return x, v

    def sample(self, t: float) -> tuple[float, float]:
        """Displacement and velocity at time ``t`` (clamped to the profile)."""
        x, v = 0.0, self.v0
        for dur, acc in self.phases:
            h = min(dur, t)
            x += v * h + 0.5 * acc * h * h
            v += acc * h
            t -= h
            if t <= 0.0:
                break
        return x, v


def _forward(d: float, v: float, vmax: float, acc: float, dec: float) -> list[tuple[float, float]]:
    # requires v >= 0 and v^2 / (2 dec) <= d
    s_stop = v * v / (2.0 * dec)
    if v > vmax:
        return [((v - vmax) / dec, -dec), ((d - s_stop) / vmax, 0.0), (vmax / dec, -dec)]
    vp = math.sqrt((d + v * v / (2.0 * acc)) / (0.5 / acc + 0.5 / dec))
    if vp <= vmax:
        return [((vp - v) / acc, acc), (vp / dec, -dec)]
    cruise = d - (vmax * vmax - v * v) / (2.0 * acc) - vmax * vmax / (2.0 * dec)
    return [((vmax - v) / acc, acc), (cruise / vmax, 0.0), (vmax / dec, -dec)]


def _plan(d: float, v: float, vmax: float, acc: float, dec: float) -> list[tuple[float, float]]:
    if d < 0.0 or (d == 0.0 and v < 0.0):
        return [(dur, -a) for dur, a in _plan(-d, -v, vmax, acc, dec)]
    if v < 0.0:
        # moving away from the target: stop first, then go from rest
        return [(-v / dec, dec)] + _plan(d + v * v / (2.0 * dec), 0.0, vmax, acc, dec)
    if d == 0.0 and v == 0.0:
        return []
    s_stop = v * v / (2.0 * dec)
    if s_stop > d:
        return [(v / dec, -dec)] + _plan(d - s_stop, 0.0, vmax, acc, dec)
    return _forward(d, v, vmax, acc, dec)


def plan_1d(distance: float, v0: float, limits: MotionLimits) -> TimeProfile:
    """Time-optimal rest-to-rest (or moving-to-rest) 1-D profile."""
    return _plan_axis(distance, v0, limits.v_max, limits.a_acc, limits.a_dec)


def _plan_axis(distance: float, v0: float, vmax: float, acc: float, dec: float) -> TimeProfile:
    phases = [(d, a) for d, a in _plan(float(distance), float(v0), vmax, acc, dec) if d > 0.0]
    return TimeProfile(tuple(phases), v0=float(v0))


def _forward_time(d: float, v: float, vmax: float, acc: float, dec: float) -> float:
    if v > vmax:
        return (v - vmax) / dec + (d - v * v / (2.0 * dec)) / vmax + vmax / dec
    vp = math.sqrt((d + v * v / (2.0 * acc)) / (0.5 / acc + 0.5 / dec))
    if vp <= vmax:
        return (vp - v) / acc + vp / dec
    cruise = d - (vmax * vmax - v * v) / (2.0 * acc) - vmax * vmax / (2.0 * dec)
    return (vmax - v) / acc + cruise / vmax + vmax / dec


def _axis_time(d: float, v: float, vmax: float, acc: float, dec: float) -> float:
    # closed form of the total duration of _plan, without building phases
    if d < 0.0 or (d == 0.0 and v < 0.0):
        d, v = -d, -v
    t = 0.0
    if v < 0.0:
        t = -v / dec
        d += v * v / (2.0 * dec)
        v = 0.0
    if d == 0.0 and v == 0.0:
        return t
    s_stop = v * v / (2.0 * dec)
    if s_stop > d:
        return t + v / dec + _forward_time(s_stop - d, 0.0, vmax, acc, dec)
    return t + _forward_time(d, v, vmax, acc, dec)


def _fly_through_time(d: float, v: float, vmax: float, acc: float, dec: float) -> float:
    # reach displacement d >= 0 with no terminal velocity constraint
    t = 0.0
    if v < 0.0:
        t += -v / dec
        d += v * v / (2.0 * dec)
        v = 0.0
    v = min(v, vmax)
    s_acc = (vmax * vmax - v * v) / (2.0 * acc)
    if s_acc >= d:
        return t + (math.sqrt(v * v + 2.0 * acc * d) - v) / acc
    return t + (vmax - v) / acc + (d - s_acc) / vmax


def _translation_time(px: float, py: float, vx0: float, vy0: float, tx: float, ty: float,
                      limits: MotionLimits, stop_at_target: bool = True) -> float:
    dx, dy = tx - px, ty - py
    d = math.hypot(dx, dy)
    ux, uy = (dx / d, dy / d) if d > 0.0 else (1.0, 0.0)
    v_along = vx0 * ux + vy0 * uy
    v_lateral = -vx0 * uy + vy0 * ux
    vmax, acc, dec = limits.v_max, limits.a_acc, limits.a_dec
    if stop_at_target:
        t_along = _axis_time(d, v_along, vmax, acc, dec)
    else:
        t_along = _fly_through_time(d, v_along, vmax, acc, dec)
    return max(t_along, _axis_time(0.0, v_lateral, vmax, acc, dec))


def arrival_time(start: Pose, v_start: Vec2, target: Vec2, limits: MotionLimits,
                 target_theta: float | None = None, w_start: float = 0.0,
                 stop_at_target: bool = True) -> float:
    """Predicted time for an omnidirectional robot to reach ``target``.

    With ``stop_at_target=False`` the along-track axis may fly through the
    target instead of braking to rest on it.
    """
    t = _translation_time(start.pos[0], start.pos[1], v_start[0], v_start[1],
                          target[0], target[1], limits, stop_at_target)
    if target_theta is not None:
        dth = normalize_angle(target_theta - start.theta)
        t = max(t, _axis_time(dth, w_start, limits.w_max, limits.aw, limits.aw))
    return t


def predict_robot_arrival_time(robot_pos: Vec2, robot_vel: Vec2, point: Vec2,
                               limits: MotionLimits) -> float:
    """Arrival time at ``point`` ignoring final heading."""
    return _translation_time(robot_pos[0], robot_pos[1], robot_vel[0], robot_vel[1],
                             point[0], point[1], limits)


# -- vectorized closed form, used for batch evaluation (heat maps) ---------

def _forward_time_array(d, v, vmax, acc, dec):
    s_stop = v * v / (2.0 * dec)
    fast = v > vmax
    t_fast = (v - vmax) / dec + (d - s_stop) / vmax + vmax / dec
    vp = np.sqrt((d + v * v / (2.0 * acc)) / (0.5 / acc + 0.5 / dec))
    t_tri = (vp - v) / acc + vp / dec
    cruise = d - (vmax * vmax - v * v) / (2.0 * acc) - vmax * vmax / (2.0 * dec)
    t_trap = (vmax - v) / acc + cruise / vmax + vmax / dec
    return np.where(fast, t_fast, np.where(vp <= vmax, t_tri, t_trap))


def min_time_array(distance, v0, vmax: float, acc: float, dec: float) -> np.ndarray:
    """Vectorized total time of :func:`plan_1d` for arrays of inputs."""
    d = np.asarray(distance, dtype=float)
    v = np.asarray(v0, dtype=float)
    d, v = np.broadcast_arrays(d, v)
    flip = (d < 0.0) | ((d == 0.0) & (v < 0.0))
    d = np.where(flip, -d, d)
    v = np.where(flip, -v, v)
    back = v < 0.0
    t = np.where(back, -v / dec, 0.0)
    d = np.where(back, d + v * v / (2.0 * dec), d)
    v = np.where(back, 0.0, v)
    s_stop = v * v / (2.0 * dec)
    over = s_stop > d
    t_over = v / dec + _forward_time_array(np.where(over, s_stop - d, 0.0), 0.0, vmax, acc, dec)
    t_fwd = _forward_time_array(np.where(over, 0.0, d), np.where(over, 0.0, v), vmax, acc, dec)
    return t + np.where(over, t_over, t_fwd)


def arrival_time_array(robot_pos, robot_vel, point, limits: MotionLimits) -> np.ndarray:
    """Vectorized :func:`predict_robot_arrival_time` over rows of positions."""
    p = np.atleast_2d(np.asarray(robot_pos, dtype=float))
    v = np.atleast_2d(np.asarray(robot_vel, dtype=float))
    delta = np.asarray(point, dtype=float) - p
    d = np.hypot(delta[..., 0], delta[..., 1])
    safe = np.where(d > 0.0, d, 1.0)
    ux = np.where(d > 0.0, delta[..., 0] / safe, 1.0)
    uy = np.where(d > 0.0, delta[..., 1] / safe, 0.0)
    vx = v[..., 0] * ux + v[..., 1] * uy
    vy = -v[..., 0] * uy + v[..., 1] * ux
    tx = min_time_array(d, vx, limits.v_max, limits.a_acc, limits.a_dec)
    ty = min_time_array(0.0, vy, limits.v_max, limits.a_acc, limits.a_dec)
    return np.maximum(tx, ty)
