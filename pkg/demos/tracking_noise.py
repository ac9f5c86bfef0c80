"""
Filtering noisy vision
======================

Overhead cameras report the ball with a few millimetres of jitter, and now
and then something orange that is not the ball. The tracker smooths the real
ball with a constant-velocity Kalman filter and only trusts objects it has
seen for several frames in a row.
"""

import math

import numpy as np

from sslkit import CameraModel, Detection, DetectionFrame, Tracker, Vec2

rng = np.random.default_rng(0)
camera = CameraModel(0, Vec2(0, 0), 9000.0)
tracker = Tracker(cameras=[camera])

raw_err, filt_err = [], []
for k in range(600):
    t = k / 60
    truth = np.array([-5000 + 900 * t, -3000 + 450 * t])
    seen = truth + rng.normal(0, 10, 2)
    dets = [Detection(0, ("ball",), Vec2(*seen))]
    if 100 <= k < 103:  # a spectator's hand, three frames long
        dets.append(Detection(0, ("ball",), Vec2(4000, 4000)))
    world = tracker.ingest_frame(DetectionFrame(t, 0, tuple(dets)))
    ball = tracker.best(("ball",))
    if ball is not None:
        raw_err.append(seen - truth)
        filt_err.append(np.array(ball.position) - truth)
    if k in (0, 3, 4, 102, 110):
        print(f"frame {k:3d}: " + ", ".join(
            f"track {o.id} c={o.confidence:.1f}{' valid' if o.valid else ''}" for o in world))

rms = lambda e: math.sqrt(np.mean(np.sum(np.square(e), axis=1)))
print(f"\nraw error {rms(raw_err):.1f} mm, filtered {rms(filt_err):.1f} mm")
print("velocity estimate:", tuple(round(v) for v in tracker.best(("ball",)).velocity))

# Vision drops out for five frames; the track coasts on its model.
for k in range(600, 605):
    tracker.ingest_frame(DetectionFrame(k / 60, 0, ()))
ball = tracker.best(("ball",), valid_only=False)
print(f"after 5 blind frames: at {tuple(round(c) for c in ball.position)}, "
      f"confidence {ball.confidence:.1f}")
