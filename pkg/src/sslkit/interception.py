"""Search-based ball interception.

The ball rolls in a straight line under constant friction deceleration. The
search walks forward in fixed time steps and stops at the first ball position
the robot can reach (arrival time plus a safety margin) no later than the
ball does. A ball that comes to rest, or leaves the field first, terminates
the search at the stop point or the boundary crossing respectively.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .geom import FieldGeometry, Vec2, ray_field_exit
from .motion import MotionLimits, _translation_time, arrival_time_array


class InterceptError(RuntimeError):
    """The search horizon ran out before any terminal condition was met."""


@dataclass(frozen=True)
class BallModel:
    decel: float = 500.0  # mm/s^2, rolling friction

    def __post_init__(self) -> None:
        if not self.decel > 0:
            raise ValueError("BallModel.decel must be positive")


@dataclass(frozen=True)
class InterceptParams:
    dt: float = 1.0 / 60.0
    t_margin: float = 0.1
    max_horizon: float = 15.0

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("InterceptParams.dt must be positive")
        if self.t_margin < 0:
            raise ValueError("InterceptParams.t_margin must be non-negative")
        if not self.max_horizon > 0:
            raise ValueError("InterceptParams.max_horizon must be positive")


class InterceptKind(str, enum.Enum):
    NORMAL = "normal"
    BALL_STOPPED = "ball_stopped"
    OUT_OF_FIELD = "out_of_field"


@dataclass(frozen=True)
class InterceptResult:
    p_best: Vec2
    t_best: float
    kind: InterceptKind
    steps: int


def ball_stop_time(v0: Vec2, model: BallModel) -> float:
    return math.hypot(v0[0], v0[1]) / model.decel


def predict_ball_position(p0: Vec2, v0: Vec2, t: float, model: BallModel) -> Vec2:
    """Ball position after ``t`` seconds of uniformly decelerated rolling."""
    if t < 0:
        raise ValueError("prediction time must be non-negative")
    speed = math.hypot(v0[0], v0[1])
    if speed == 0.0:
        return Vec2(p0[0], p0[1])
    t = min(t, speed / model.decel)
    s = speed * t - 0.5 * model.decel * t * t
    return Vec2(p0[0] + v0[0] / speed * s, p0[1] + v0[1] / speed * s)


def ball_speed(v0: Vec2, t: float, model: BallModel) -> float:
    return max(math.hypot(v0[0], v0[1]) - model.decel * t, 0.0)


def intercept(ball_p: Vec2, ball_v: Vec2, robot_p: Vec2, robot_v: Vec2,
              limits: MotionLimits, model: BallModel = BallModel(),
              params: InterceptParams = InterceptParams(),
              field: FieldGeometry = FieldGeometry()) -> InterceptResult:
    """Best interception point and time for one robot.

    At step k the ball's predicted position P_k at time k*dt is compared with
    the robot's arrival time T_k (including ``params.t_margin``); the first k
    with T_k <= k*dt wins. The ball coming to rest or leaving the field ends
    the search early. At a given k the checks run in the order: ball out of
    the field, robot in time, ball at rest.

    """
    if not field.contains(ball_p) or not field.contains(robot_p):
        raise ValueError("ball and robot must start inside the field")
    speed = math.hypot(ball_v[0], ball_v[1])
    t_stop = speed / model.decel
    ux, uy = (ball_v[0] / speed, ball_v[1] / speed) if speed > 0.0 else (0.0, 0.0)
    bx, by, decel = ball_p[0], ball_p[1], model.decel
    dt, margin = params.dt, params.t_margin
    rx, ry, rvx, rvy = robot_p[0], robot_p[1], robot_v[0], robot_v[1]
    hl, hw = field.half_length, field.half_width
    k = 0
    while True:
        t = k * dt
        if t > params.max_horizon:
            raise InterceptError(
                f"no terminal condition within {params.max_horizon} s "
                f"(ball speed {speed:.1f} mm/s, decel {decel} mm/s^2)")
        tc = min(t, t_stop)
        s = speed * tc - 0.5 * decel * tc * tc
        px, py = bx + ux * s, by + uy * s
        if abs(px) > hl or abs(py) > hw:
            exit_p = ray_field_exit(ball_p, ball_v, field)
            t_exit = _translation_time(rx, ry, rvx, rvy, exit_p[0], exit_p[1], limits) + margin
            return InterceptResult(exit_p, t_exit, InterceptKind.OUT_OF_FIELD, k)
        tk = _translation_time(rx, ry, rvx, rvy, px, py, limits) + margin
        if tk <= t:
            return InterceptResult(Vec2(px, py), tk, InterceptKind.NORMAL, k)
        if t >= t_stop:
            return InterceptResult(Vec2(px, py), tk, InterceptKind.BALL_STOPPED, k)
        k += 1


@dataclass
class HeatMap:
    """Interception times for a robot at rest at each grid cell center.

    ``times[j, i]`` belongs to the cell centered at ``(xs[i], ys[j])``; rows
    run along increasing y.
    """

    xs: np.ndarray
    ys: np.ndarray
    times: np.ndarray
    kinds: np.ndarray  # InterceptKind values as strings
    steps: np.ndarray

    @property
    def out_of_field(self) -> np.ndarray:
        return self.kinds == InterceptKind.OUT_OF_FIELD.value


def grid_centers(nx: int, ny: int, field: FieldGeometry) -> tuple[np.ndarray, np.ndarray]:
    xs = -field.half_length + (np.arange(nx) + 0.5) * field.length / nx
    ys = -field.half_width + (np.arange(ny) + 0.5) * field.width / ny
    return xs, ys


def intercept_heatmap(ball_p: Vec2, ball_v: Vec2, nx: int, ny: int,
                      limits: MotionLimits, model: BallModel = BallModel(),
                      params: InterceptParams = InterceptParams(),
                      field: FieldGeometry = FieldGeometry()) -> HeatMap:
    """Run :func:`intercept` for a resting robot at every grid cell center.

    All cells advance through the search together, so each step costs one
    vectorized arrival-time evaluation over the still-unresolved cells.
    """
    if nx < 2 or ny < 2:
        raise ValueError("heat map grid must be at least 2x2")
    if not field.contains(ball_p):
        raise ValueError("ball must start inside the field")
    xs, ys = grid_centers(nx, ny, field)
    gx, gy = np.meshgrid(xs, ys)
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    n = len(cells)
    rest = np.zeros_like(cells)
    times = np.full(n, np.nan)
    kinds = np.full(n, "", dtype=object)
    steps = np.full(n, -1, dtype=int)
    active = np.arange(n)
    speed = math.hypot(ball_v[0], ball_v[1])
    t_stop = speed / model.decel
    dt, margin = params.dt, params.t_margin
    k = 0
    while active.size:
        t = k * dt
        if t > params.max_horizon:
            raise InterceptError(f"no terminal condition within {params.max_horizon} s")
        p = predict_ball_position(ball_p, ball_v, t, model)
        if not field.contains(p):
            exit_p = ray_field_exit(ball_p, ball_v, field)
            times[active] = arrival_time_array(cells[active], rest[active], exit_p, limits) + margin
            kinds[active] = InterceptKind.OUT_OF_FIELD.value
            steps[active] = k
            break
        tk = arrival_time_array(cells[active], rest[active], p, limits) + margin
        hit = tk <= t
        done = np.ones_like(hit) if t >= t_stop else hit
        idx = active[done]
        times[idx] = tk[done]
        kinds[idx] = np.where(hit[done], InterceptKind.NORMAL.value,
                              InterceptKind.BALL_STOPPED.value)
        steps[idx] = k
        active = active[~done]
        k += 1
    shape = (ny, nx)
    return HeatMap(xs, ys, times.reshape(shape), kinds.reshape(shape).astype(str),
                   steps.reshape(shape))


def write_heatmap_csv(hm: HeatMap, path) -> None:
    """Row-major CSV of t_best in seconds; one row per y, increasing y."""
    np.savetxt(path, hm.times, delimiter=",", fmt="%.6f")


def heatmap_pgm_bytes(hm: HeatMap) -> bytes:
    """8-bit binary PGM; dark is fast, out-of-field cells are white.

    The image's top row is the largest y so the picture reads like a field
    diagram.
    """
    times = hm.times
    flagged = hm.out_of_field
    finite = times[~flagged & np.isfinite(times)]
    top = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    scaled = np.clip(np.round(times / top * 254.0), 0, 254)
    img = np.where(flagged, 255, scaled).astype(np.uint8)[::-1]
    ny, nx = img.shape
    return f"P5\n{nx} {ny}\n255\n".encode("ascii") + img.tobytes()


def write_heatmap_pgm(hm: HeatMap, path) -> None:
    with open(path, "wb") as fh:
        fh.write(heatmap_pgm_bytes(hm))
