"""Deterministic kinematic soccer world with noisy, lossy vision.

Robots follow velocity commands under acceleration and speed caps, the ball
rolls with constant friction deceleration, and a robot that faces the ball
within ``catch_radius`` captures it. A ball meeting a robot anywhere else
stops dead against its body. :func:`observe` produces the camera
frames the team software would receive: Gaussian position and heading noise,
and whole frames dropped with probability ``packet_loss``.

:func:`pass_success_rate` runs the pass experiment: a passer kicks toward a
point, and a receiver standing off the pass line has to get to the ball
using only what the tracker reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from typing import Mapping, Sequence

import numpy as np

from .geom import FieldGeometry, Pose, Vec2, angle_between, normalize_angle
from .interception import BallModel, InterceptError, InterceptParams, intercept
from .motion import MotionLimits
from .radio import RobotCommand, decode, encode, packets_for, unpack_packets
from .tactics import select_skill
from .tracker import (CameraModel, Detection, DetectionFrame, Tracker, TrackerConfig)

BALL_RADIUS = 21.5
ROBOT_RADIUS = 90.0
KICK_SPEED_MAX = 6500.0
KICK_POWER_MAX = 127


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1.0 / 60.0
    sigma_xy: float = 0.0        # mm, per axis
    sigma_theta: float = 0.0     # rad
    packet_loss: float = 0.0
    seed: int = 0
    field: FieldGeometry = FieldGeometry()
    limits: MotionLimits = MotionLimits()
    ball_model: BallModel = BallModel()
    catch_radius: float = ROBOT_RADIUS + BALL_RADIUS
    catch_cone: float = math.radians(30.0)
    kick_cooldown: float = 0.25  # s during which the kicker cannot recapture

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.sigma_xy < 0 or self.sigma_theta < 0:
            raise ValueError("noise sigmas must be non-negative")
        if not 0.0 <= self.packet_loss <= 1.0:
            raise ValueError("packet_loss must lie in [0, 1]")


@dataclass(frozen=True)
class RobotState:
    team: str
    number: int
    pose: Pose
    vel: Vec2 = Vec2(0.0, 0.0)
    w: float = 0.0


@dataclass(frozen=True)
class SimState:
    t: float
    ball_pos: Vec2
    ball_vel: Vec2
    robots: tuple[RobotState, ...]
    holder: int | None = None      # index into robots
    ball_out: bool = False
    no_capture: tuple[tuple[int, float], ...] = ()  # (robot index, until t)


def _approach(cur: float, target: float, up: float, down: float) -> float:
    # accelerate toward target; speeding up is limited by `up`, slowing by `down`
    if abs(target) > abs(cur) and (target * cur >= 0.0):
        step = up
    else:
        step = down
    if target > cur:
        return min(target, cur + step)
    return max(target, cur - step)


def _robot_step(r: RobotState, cmd: RobotCommand | None, cfg: SimConfig) -> RobotState:
    lim = cfg.limits
    if cmd is None:
        des = Vec2(0.0, 0.0)
        w_des = 0.0
    else:
        des = Vec2(float(cmd.vx), float(cmd.vy)).rotate(r.pose.theta)
        w_des = cmd.w / 100.0
    n = des.norm()
    if n > lim.v_max:
        des = des * (lim.v_max / n)
    w_des = min(max(w_des, -lim.w_max), lim.w_max)
    dt = cfg.dt
    vx = _approach(r.vel.x, des.x, lim.a_acc * dt, lim.a_dec * dt)
    vy = _approach(r.vel.y, des.y, lim.a_acc * dt, lim.a_dec * dt)
    sp = math.hypot(vx, vy)
    if sp > lim.v_max:
        vx, vy = vx * lim.v_max / sp, vy * lim.v_max / sp
    w = _approach(r.w, w_des, lim.aw * dt, lim.aw * dt)
    hl, hw = cfg.field.half_length, cfg.field.half_width
    x = min(max(r.pose.pos.x + vx * dt, -hl), hl)
    y = min(max(r.pose.pos.y + vy * dt, -hw), hw)
    return RobotState(r.team, r.number, Pose(Vec2(x, y), r.pose.theta + w * dt), Vec2(vx, vy), w)


def _roll(p: Vec2, v: Vec2, dt: float, decel: float) -> tuple[Vec2, Vec2]:
    s = v.norm()
    if s == 0.0:
        return p, v
    if s <= decel * dt:
        d = s * s / (2.0 * decel)
        return p + v * (d / s), Vec2(0.0, 0.0)
    d = s * dt - 0.5 * decel * dt * dt
    s1 = s - decel * dt
    return p + v * (d / s), v * (s1 / s)


def _front(r: RobotState) -> Vec2:
    return r.pose.pos + Vec2(ROBOT_RADIUS, 0.0).rotate(r.pose.theta)


def _circle_entry(a: Vec2, b: Vec2, c: Vec2, radius: float) -> Vec2 | None:
    """First point of segment ``a``-``b`` within ``radius`` of ``c``, if any."""
    if a.dist(c) <= radius:
        return a
    ab = b - a
    L2 = ab.dot(ab)
    if L2 == 0.0:
        return None
    ac = a - c
    # |ac + s ab|^2 = r^2, smallest root in [0, 1]
    half_b = ac.dot(ab)
    disc = half_b * half_b - L2 * (ac.dot(ac) - radius * radius)
    if disc < 0.0:
        return None
    s = (-half_b - math.sqrt(disc)) / L2
    if not 0.0 <= s <= 1.0:
        return None
    return a + ab * s


def step(s: SimState, cfg: SimConfig,
         commands: Mapping[int, RobotCommand] | None = None) -> SimState:
    """Advance the world by one tick. ``commands`` maps robot index to command."""
    commands = commands or {}
    t1 = s.t + cfg.dt
    robots = tuple(_robot_step(r, commands.get(i), cfg) for i, r in enumerate(s.robots))
    blocked = {i: until for i, until in s.no_capture if until > t1}
    holder = s.holder
    ball_pos, ball_vel = s.ball_pos, s.ball_vel
    if s.ball_out:
        return replace(s, t=t1, robots=robots, no_capture=tuple(blocked.items()))
    if holder is not None:
        r = robots[holder]
        cmd = commands.get(holder)
        if cmd is not None and cmd.kick_power > 0:
            speed = cmd.kick_power / KICK_POWER_MAX * KICK_SPEED_MAX
            ball_pos = _front(r)
            ball_vel = Vec2(speed, 0.0).rotate(r.pose.theta)
            blocked[holder] = t1 + cfg.kick_cooldown
            holder = None
        else:
            return replace(s, t=t1, robots=robots, ball_pos=_front(r), ball_vel=r.vel,
                           no_capture=tuple(blocked.items()))
    p0 = ball_pos
    p1, v1 = _roll(ball_pos, ball_vel, cfg.dt, cfg.ball_model.decel)
    for i, r in enumerate(robots):
        if i in blocked:
            continue
        hit = _circle_entry(p0, p1, r.pose.pos, cfg.catch_radius)
        if hit is None:
            continue
        rel = hit - r.pose.pos
        heading = Vec2(1.0, 0.0).rotate(r.pose.theta)
        if rel.norm() == 0.0 or angle_between(heading, rel) < cfg.catch_cone:
            return SimState(t1, _front(r), r.vel, robots, i, False, tuple(blocked.items()))
        # the ball runs into the robot's body outside the dribbler and dies there
        return SimState(t1, hit, Vec2(0.0, 0.0), robots, None, False, tuple(blocked.items()))
    out = not cfg.field.contains(p1)
    return SimState(t1, p1, v1, robots, None, out, tuple(blocked.items()))


def make_rngs(seed) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (noise, loss) streams so sweeps share random numbers."""
    noise_ss, loss_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(noise_ss), np.random.default_rng(loss_ss)


def observe(s: SimState, cfg: SimConfig, noise_rng: np.random.Generator,
            loss_rng: np.random.Generator, camera_id: int = 0) -> DetectionFrame | None:
    """One camera frame of the world, or ``None`` when the frame is lost.

    Every call draws the same number of variates whatever the noise level, so
    runs that differ only in ``sigma_*`` or ``packet_loss`` stay aligned.
    """
    lost = loss_rng.random() < cfg.packet_loss
    z = noise_rng.standard_normal(2 + 3 * len(s.robots))
    if lost:
        return None
    dets = [Detection(camera_id, ("ball",),
                      Vec2(s.ball_pos.x + cfg.sigma_xy * z[0], s.ball_pos.y + cfg.sigma_xy * z[1]))]
    for i, r in enumerate(s.robots):
        zx, zy, zt = z[2 + 3 * i: 5 + 3 * i]
        dets.append(Detection(camera_id, ("robot", r.team, r.number),
                              Vec2(r.pose.pos.x + cfg.sigma_xy * zx,
                                   r.pose.pos.y + cfg.sigma_xy * zy),
                              normalize_angle(r.pose.theta + cfg.sigma_theta * zt)))
    return DetectionFrame(s.t, camera_id, tuple(dets))


# -- pass experiment -----------------------------------------------------------

@dataclass(frozen=True)
class PassScenario:
    passer_pos: Vec2 = Vec2(-4000.0, 0.0)
    pass_length: float = 8000.0
    receiver_offset: float = 3000.0
    max_pass_angle: float = math.radians(15.0)  # pass heading drawn from +-this
    kick_power: int = 80                        # ~4.1 m/s
    kick_delay: float = 0.3                     # s of vision before the kick
    timeout: float = 6.0
    kick_target: Vec2 = Vec2(6000.0, 0.0)       # where the receiver would shoot
    replan_every: int = 3                       # ticks between interception searches
    intercept_params: InterceptParams = InterceptParams()


@dataclass(frozen=True)
class TrialResult:
    success: bool
    t_end: float
    reason: str
    skills: tuple[str, ...] = ()


def _trial_setup(scn: PassScenario, trial_rng: np.random.Generator) -> SimState:
    angle = trial_rng.uniform(-scn.max_pass_angle, scn.max_pass_angle)
    direction = Vec2(1.0, 0.0).rotate(angle)
    target = scn.passer_pos + direction * scn.pass_length
    perp = Vec2(-direction.y, direction.x)
    side = -1.0 if target.y > 0 else 1.0
    if target.y == 0.0:
        side = 1.0 if trial_rng.random() < 0.5 else -1.0
    receiver = target + perp * (side * scn.receiver_offset)
    recv_theta = (scn.passer_pos - receiver).angle() + trial_rng.uniform(-0.3, 0.3)
    passer = RobotState("blue", 0, Pose(scn.passer_pos, angle))
    recv = RobotState("blue", 1, Pose(receiver, recv_theta))
    return SimState(0.0, _front(passer), Vec2(0.0, 0.0), (passer, recv), holder=0)


class Receiver:
    """Vision-driven receiving robot: tracker, interception search, skill choice
    and a trapezoidal go-to controller."""

    def __init__(self, number: int, cfg: SimConfig, scn: PassScenario, tracker: Tracker):
        self.number = number
        self.cfg = cfg
        self.scn = scn
        self.tracker = tracker
        self.target: Vec2 | None = None
        self.skills: list[str] = []
        self._tick = 0

    def command(self, t: float) -> RobotCommand:
        tr = self.tracker
        ball = tr.best(("ball",))
        me = tr.best(("robot", "blue", self.number))
        self._tick += 1
        if ball is None or me is None or me.theta is None:
            return RobotCommand()
        # extrapolate both estimates from the last vision frame to now
        lag = max(t - ball.state.t, 0.0)
        bp = ball.position + ball.velocity * lag
        bv = ball.velocity
        mlag = max(t - me.state.t, 0.0)
        mp = me.position + me.velocity * mlag
        theta = me.theta + (me.omega or 0.0) * mlag
        lim = self.cfg.limits
        moving = bv.norm() > 300.0
        if moving and (self.target is None or self._tick % self.scn.replan_every == 0):
            fld = self.cfg.field
            if fld.contains(bp) and fld.contains(mp):
                try:
                    res = intercept(bp, bv, mp, me.velocity, lim, self.cfg.ball_model,
                                    self.scn.intercept_params, fld)
                except InterceptError:
                    res = None
                if res is not None:
                    self.target = res.p_best
                    if res.p_best.dist(mp) > 1.0 and res.p_best.dist(self.scn.kick_target) > 1.0:
                        self.skills.append(
                            select_skill(mp, res.p_best, self.scn.kick_target).skill.value)
        goal = self.target if (moving and self.target is not None) else mp
        delta = goal - mp
        dist = delta.norm()
        if dist < 5.0:
            v_world = Vec2(0.0, 0.0)
        else:
            speed = min(lim.v_max, math.sqrt(2.0 * lim.a_dec * dist))
            v_world = delta * (speed / dist)
        face = (bp - mp)
        err = normalize_angle(face.angle() - theta) if face.norm() > 0 else 0.0
        w = math.copysign(min(lim.w_max, math.sqrt(2.0 * lim.aw * abs(err))), err)
        local = v_world.rotate(-theta)
        return RobotCommand(vx=int(round(min(max(local.x, -4095), 4095))),
                            vy=int(round(min(max(local.y, -4095), 4095))),
                            w=int(round(min(max(w * 100.0, -2047), 2047))))


def run_pass_trial(cfg: SimConfig, scn: PassScenario, trial: int) -> TrialResult:
    trial_rng = np.random.default_rng([cfg.seed, trial, 1])
    noise_rng, loss_rng = make_rngs([cfg.seed, trial, 2])
    state = _trial_setup(scn, trial_rng)
    fld = cfg.field
    cam = CameraModel(0, Vec2(0.0, 0.0), math.hypot(fld.half_length, fld.half_width))
    tracker = Tracker(TrackerConfig(refine_cameras=False), cameras=[cam])
    receiver = Receiver(1, cfg, scn, tracker)
    kicked = False
    while state.t < scn.timeout:
        frame = observe(state, cfg, noise_rng, loss_rng)
        if frame is not None:
            tracker.ingest_frame(frame)
        cmds = {1: receiver.command(state.t)}
        if not kicked and state.t >= scn.kick_delay:
            cmds[0] = RobotCommand(kick_power=scn.kick_power)
            kicked = True
        # commands travel over the radio link
        cmds = unpack_packets(decode(encode(p)) for p in packets_for(cmds))
        state = step(state, cfg, cmds)
        if kicked and state.holder == 1:
            return TrialResult(True, state.t, "captured", tuple(receiver.skills))
        if kicked and state.holder == 0:
            return TrialResult(False, state.t, "recaptured_by_passer", tuple(receiver.skills))
        if state.ball_out:
            return TrialResult(False, state.t, "out_of_field", tuple(receiver.skills))
        if kicked and state.holder is None and state.ball_vel.norm() == 0.0:
            return TrialResult(False, state.t, "ball_stopped", tuple(receiver.skills))
    return TrialResult(False, state.t, "timeout", tuple(receiver.skills))


def pass_success_rate(cfg: SimConfig, n_trials: int = 100,
                      scenario: PassScenario = PassScenario()) -> float:
    """Fraction of ``n_trials`` passes the receiver captures.

    Trial ``i`` uses the same geometry and noise draws for every config that
    shares ``cfg.seed``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    wins = sum(run_pass_trial(cfg, scenario, i).success for i in range(n_trials))
    return wins / n_trials


SWEEP_PARAMS = ("sigma_xy", "sigma_theta", "packet_loss")


def sweep(cfg: SimConfig, param: str, values: Sequence[float], n_trials: int = 100,
          scenario: PassScenario = PassScenario(),
          cache: dict | None = None) -> list[tuple[float, float]]:
    """Success rate as one noise parameter varies; returns (value, rate) rows.

    Pass the same ``cache`` dict to several sweeps to reuse points whose
    configuration coincides (e.g. the noiseless baseline).
    """
    if param == "loss":
        param = "packet_loss"
    if param not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param!r}; choose from {SWEEP_PARAMS}")
    cache = {} if cache is None else cache
    rows = []
    for v in values:
        point = replace(cfg, **{param: v})
        key = (point, scenario, n_trials)
        if key not in cache:
            cache[key] = pass_success_rate(point, n_trials, scenario)
        rows.append((v, cache[key]))
    return rows


def load_sim_config(text: str, base: SimConfig = SimConfig()) -> tuple[SimConfig, PassScenario]:
    """Parse ``key = value`` lines into a config and pass scenario.

    Keys are ``SimConfig``/``PassScenario`` field names plus dotted
    ``limits.*``, ``field.*``, ``ball_model.*`` and ``intercept.*``; ``#``
    starts a comment.
    """
    sim_kw: dict = {}
    scn_kw: dict = {}
    sub: dict[str, dict] = {"limits": {}, "field": {}, "ball_model": {}, "intercept": {}}
    sim_names = {f.name for f in fields(SimConfig)}
    scn_names = {f.name for f in fields(PassScenario)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if "." in key:
                group, name = key.split(".", 1)
                if group not in sub:
                    raise KeyError(key)
                sub[group][name] = float(value)
            elif key == "seed":
                sim_kw[key] = int(value)
            elif key in sim_names:
                sim_kw[key] = float(value)
            elif key in scn_names:
                if key in ("passer_pos", "kick_target"):
                    x, y = (float(v) for v in value.split(","))
                    scn_kw[key] = Vec2(x, y)
                elif key in ("kick_power", "replan_every"):
                    scn_kw[key] = int(value)
                else:
                    scn_kw[key] = float(value)
            else:
                raise KeyError(key)
        except KeyError:
            raise ValueError(f"line {lineno}: unknown key {key!r}") from None
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    ikw = sub.pop("intercept")
    if ikw:
        try:
            scn_kw["intercept_params"] = InterceptParams(**ikw)
        except TypeError as exc:
            raise ValueError(f"bad key in intercept.*: {exc}") from None
    for group, kw in sub.items():
        if kw:
            try:
                sim_kw[group] = replace(getattr(base, group), **kw)
            except TypeError as exc:
                raise ValueError(f"bad key in {group}.*: {exc}") from None
    return replace(base, **sim_kw), PassScenario(**scn_kw)
