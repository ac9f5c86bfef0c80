"""
Time-optimal motion on one axis
===============================

A robot limited in speed, acceleration and braking gets from A to B fastest
by accelerating flat out, cruising, then braking flat out. Short moves never
reach the speed cap and the cruise disappears.
"""

import numpy as np

from sslkit import MotionLimits, Pose, Vec2, arrival_time, plan_1d

limits = MotionLimits(v_max=3000, a_acc=3000, a_dec=4000)

for distance in (200, 1000, 4000, 9000):
    profile = plan_1d(distance, 0.0, limits)
    shape = " / ".join(f"{dur:.3f}s @ {acc:+.0f}" for dur, acc in profile.phases)
    print(f"{distance:5d} mm  {profile.total_time:.3f} s   {shape}")

# Already moving the wrong way: brake first, then come back.
profile = plan_1d(500.0, -2500.0, limits)
print("\nreversing:", [f"{d:.3f}s@{a:+.0f}" for d, a in profile.phases])

# Sample the profile to see the velocity trace.
for t in np.linspace(0, profile.total_time, 6):
    x, v = profile.sample(t)
    print(f"  t={t:.2f}s  x={x:8.1f} mm  v={v:8.1f} mm/s")

# In the plane the slower of the along-track and sideways motions decides.
start = Pose(Vec2(0, 0), 0.0)
for side_speed in (0, 1000, 2500):
    t = arrival_time(start, Vec2(0, side_speed), Vec2(2000, 0), limits)
    print(f"sideways drift {side_speed:4d} mm/s -> arrival {t:.3f} s")
