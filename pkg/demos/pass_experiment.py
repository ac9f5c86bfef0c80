"""
Passing through noisy, lossy vision
===================================

A passer kicks an 8 m pass; the receiver starts 3 m off the line and only
knows what the tracker tells it. Adding camera noise or dropping frames shows
how much the vision pipeline matters. Each point here uses 20 passes to keep
the demo quick (the full experiment uses 100).
"""

from sslkit import PassScenario, SimConfig, sweep
from sslkit.simworld import run_pass_trial

base = SimConfig(seed=1)

result = run_pass_trial(base, PassScenario(), 0)
print(f"one clean pass: {result.reason} after {result.t_end:.2f} s, "
      f"skills used {sorted(set(result.skills))}")

cache = {}
for param, values in [("sigma_xy", [0, 20, 80]), ("loss", [0, 0.3, 0.9])]:
    rows = sweep(base, param, values, n_trials=20, cache=cache)
    print(param.ljust(9), "  ".join(f"{v:>5}: {rate:.2f}" for v, rate in rows))
