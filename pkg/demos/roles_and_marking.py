"""
Who goes where
==============

Roles are handed out by total travel time, with the ball counted by when each
robot could actually intercept it. A defender marking a pass receiver stands
where it would beat the receiver to the ball.
"""

from sslkit import BallTarget, MotionLimits, Vec2, assign_roles, marking_point, select_skill
from sslkit.tactics import cost_matrix

limits = MotionLimits()
robots = [(Vec2(-4000, 1000), Vec2(0, 0)),
          (Vec2(-1000, -2000), Vec2(1500, 0)),
          (Vec2(2000, 500), Vec2(0, 0))]
targets = [Vec2(-5500, 0),                                    # goal keeper spot
           BallTarget(Vec2(0, 0), Vec2(-1500, -1000)),        # the rolling ball
           Vec2(3000, 2500)]                                  # wing

cost = cost_matrix(robots, targets, limits)
match = assign_roles(robots, targets, limits)
for i, j in enumerate(match):
    print(f"robot {i} -> target {j}  ({cost[i, j]:.2f} s)")
print(f"total {sum(cost[i, j] for i, j in enumerate(match)):.2f} s")

# How should a robot take a ball it meets at (1000, 0) when the goal is at +x?
for start in (Vec2(-1000, 0), Vec2(1000, -2000), Vec2(3000, 0)):
    choice = select_skill(start, Vec2(1000, 0), Vec2(6000, 0))
    print(f"from {tuple(start)}: {choice.skill.value} ({choice.theta * 57.2958:.0f} deg turn)")

mark = marking_point(B=Vec2(1000, 2000), E=Vec2(-2500, -1500), G=Vec2(-6000, 0),
                     opp_limits=limits)
print(f"\nreceiver would meet the pass at {tuple(round(c) for c in mark.O)}")
print(f"defender stands at {tuple(round(c) for c in mark.M)}, "
      f"{mark.M.dist(mark.O):.0f} mm from it vs the receiver's {mark.radius:.0f} mm")
