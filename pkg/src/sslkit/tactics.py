"""Skill selection, marking and role assignment built on interception."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geom import FieldGeometry, GeometryError, Vec2, angle_between
from .interception import BallModel, InterceptParams, intercept
from .motion import MotionLimits, predict_robot_arrival_time

CHASE_MAX_DEG = 45.0
TOUCH_MIN_DEG = 120.0


class Skill(str, enum.Enum):
    CHASE = "chase"
    INTERCEPT = "intercept"
    TOUCH = "touch"


@dataclass(frozen=True)
class SkillChoice:
    skill: Skill
    theta: float  # radians


def skill_for_angle(theta: float) -> Skill:
    deg = math.degrees(theta)
    if deg < CHASE_MAX_DEG:
        return Skill.CHASE
    if deg <= TOUCH_MIN_DEG:
        return Skill.INTERCEPT
    return Skill.TOUCH


def select_skill(robot_p: Vec2, intercept_p: Vec2, kick_target: Vec2) -> SkillChoice:
    """Pick how to take the ball from the turn angle between the approach
    (robot -> interception point) and the shot (interception point -> target).

    Small turns chase the ball, large ones touch it straight back; in between
    the robot stops the ball and turns.
    """
    approach = Vec2(intercept_p[0] - robot_p[0], intercept_p[1] - robot_p[1])
    shot = Vec2(kick_target[0] - intercept_p[0], kick_target[1] - intercept_p[1])
    try:
        theta = angle_between(approach, shot)
    except GeometryError as exc:
        raise GeometryError(f"skill angle undefined: {exc}") from None
    return SkillChoice(skill_for_angle(theta), theta)


@dataclass(frozen=True)
class MarkingPoint:
    M: Vec2        # where the defender should stand
    O: Vec2        # receiver's best interception point
    P: Vec2        # point on the circle toward the goal
    radius: float  # |O - E|


def marking_point(B: Vec2, E: Vec2, G: Vec2, opp_limits: MotionLimits,
                  ball_speed_max: float = 6500.0, model: BallModel = BallModel(),
                  params: InterceptParams = InterceptParams(),
                  field: FieldGeometry = FieldGeometry(), lam: float = 0.15) -> MarkingPoint:
    """Defensive position against a pass from ``B`` to a receiver at ``E``.

    The ball is assumed to leave ``B`` toward ``E`` at ``ball_speed_max`` and
    the receiver, at rest, to intercept it at ``O``. Any robot with the same
    limits inside the circle of radius ``|OE|`` around ``O`` gets there first.
    The chosen point sits on the segment from ``O`` to where the circle meets
    the line to the goal ``G``, a fraction ``lam`` of the way back toward ``O``.
    """
    B, E, G = Vec2(*B), Vec2(*E), Vec2(*G)
    if B == E:
        raise GeometryError("ball and receiver coincide; pass direction undefined")
    if not field.contains(G):
        raise ValueError("goal point must lie inside the field")
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lam must lie in [0, 1]")
    ball_v = (E - B).unit() * ball_speed_max
    O = intercept(B, ball_v, E, Vec2(0.0, 0.0), opp_limits, model, params, field).p_best
    return marking_from_circle(O, O.dist(E), G, lam)


def marking_from_circle(O: Vec2, radius: float, G: Vec2, lam: float) -> MarkingPoint:
    O, G = Vec2(*O), Vec2(*G)
    og = O.dist(G)
    if og <= radius:
        P = G
    else:
        P = O + (G - O) * (radius / og)
    M = P + (O - P) * lam
    return MarkingPoint(M, O, P, radius)


@dataclass(frozen=True)
class BallTarget:
    """A role whose target is getting the ball."""

    position: Vec2
    velocity: Vec2 = Vec2(0.0, 0.0)


Target = Union[Vec2, tuple, BallTarget]


def role_cost(robot_p: Vec2, robot_v: Vec2, target: Target, limits: MotionLimits,
              model: BallModel, params: InterceptParams, field: FieldGeometry,
              mode: str = "time") -> float:
    """Cost of sending one robot to one target.

    ``mode="time"`` uses predicted arrival time (interception time for ball
    targets); ``mode="distance2"`` is the squared straight-line distance to the
    target's current position.
    """
    if mode == "distance2":
        p = target.position if isinstance(target, BallTarget) else target
        return (p[0] - robot_p[0]) ** 2 + (p[1] - robot_p[1]) ** 2
    if mode != "time":
        raise ValueError(f"unknown cost mode {mode!r}")
    if isinstance(target, BallTarget):
        return intercept(target.position, target.velocity, robot_p, robot_v,
                         limits, model, params, field).t_best
    return predict_robot_arrival_time(robot_p, robot_v, target, limits)


def cost_matrix(robots: Sequence[tuple[Vec2, Vec2]], targets: Sequence[Target],
                limits: MotionLimits, model: BallModel = BallModel(),
                params: InterceptParams = InterceptParams(),
                field: FieldGeometry = FieldGeometry(), mode: str = "time") -> np.ndarray:
    return np.array([[role_cost(p, v, t, limits, model, params, field, mode)
                      for t in targets] for p, v in robots], dtype=float).reshape(
                          len(robots), len(targets))


def assign_roles(robots: Sequence[tuple[Vec2, Vec2]], targets: Sequence[Target],
                 limits: MotionLimits, model: BallModel = BallModel(),
                 params: InterceptParams = InterceptParams(),
                 field: FieldGeometry = FieldGeometry(), mode: str = "time") -> list[int]:
    """Minimum-total-cost matching; ``result[i]`` is robot ``i``'s target index."""
    if len(robots) != len(targets):
        raise ValueError(f"{len(robots)} robots but {len(targets)} targets")
    if len(robots) > 16:
        raise ValueError("at most 16 robots can be assigned")
    if not robots:
        return []
    cost = cost_matrix(robots, targets, limits, model, params, field, mode)
    rows, cols = linear_sum_assignment(cost)
    out = [0] * len(robots)
    for r, c in zip(rows, cols):
        out[r] = int(c)
    return out
