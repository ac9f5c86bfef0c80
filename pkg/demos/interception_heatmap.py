"""
Where can a resting robot catch a rolling ball?
===============================================

Every cell of a 120x90 grid holds a robot at rest; the search tells how soon
that robot could meet the ball. A slow ball can be caught from almost
anywhere. A fast ball from the goal line leaves part of the field unable to
reach it before it rolls out.
"""

import numpy as np

from sslkit import MotionLimits, Vec2, intercept_heatmap, write_heatmap_pgm

limits = MotionLimits()

# ball positions are given as cm from the field corner, as in match diagrams
setups = {
    "slow": (Vec2(4000 - 6000, 4500 - 4500), Vec2(1000, 0)),
    "fast": (Vec2(0 - 6000, 4500 - 4500), Vec2(4000, 0)),
}

for name, (ball, vel) in setups.items():
    hm = intercept_heatmap(ball, vel, 120, 90, limits)
    flagged = hm.out_of_field
    t = hm.times[~flagged]
    print(f"{name}: ball at {tuple(ball)} mm, {vel.norm():.0f} mm/s")
    print(f"   fastest {t.min():.2f} s, median {np.median(t):.2f} s, "
          f"{flagged.sum()} cells only reach the exit point")
    write_heatmap_pgm(hm, f"heatmap_{name}.pgm")
    print(f"   wrote heatmap_{name}.pgm (dark = fast, white = ball escapes)")

# A coarse text rendering of the fast case, rows from +y down to -y.
hm = intercept_heatmap(*setups["fast"], 24, 12, limits)
shades = " .:-=+*#%@"
top = hm.times[~hm.out_of_field].max()
for row, flags in zip(hm.times[::-1], hm.out_of_field[::-1]):
    print("".join("X" if f else shades[min(int(v / top * 9), 9)] for v, f in zip(row, flags)))
