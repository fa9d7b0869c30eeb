"""Two constructions that pull the regret metrics apart -- and back together.

Construction 1 (repetition): wrap any algorithm so its n-th search point is
emitted 1+g(n) times with the recommendation pinned to the current point.
The windowed worst-case regret (RSR) of the wrapped run then tracks the *base*
run's best-search-point regret (ASR): a metric meant to be robust against
one-off lucky evaluations is defeated by a log-factor of repetition.

Construction 2 (probing): wrap a gradient method so every second evaluation
is spent at its current recommendation, discarding the value.  ASR of the
wrapped run suddenly matches the true recommendation quality -- the metric
was never measuring the algorithm, only where it happened to place probes.
"""

import numpy as np

from regretlab import (
    ExperimentSpec,
    NoisyBlackBox,
    RandomSearch,
    RegretConfig,
    RunTrace,
    asr_stream,
    make_sphere_problem,
    rsr_stream,
    run_spec,
    wrap_repeat_g,
)

# --- Construction 1: repetition makes RSR chase the base ASR ---------------

problem = make_sphere_problem(dim=2, noise_std=0.3, seed=5)
cfg = RegretConfig(g_exponent=0.5)
box = NoisyBlackBox(problem, np.random.default_rng(6))

base_trace = RunTrace()
base = RandomSearch(2, seed=9)
wrapped = wrap_repeat_g(RandomSearch(2, seed=9), cfg)
wrapped_trace = RunTrace()

for _ in range(3000):
    p = base.ask()[0]
    y = box(p)
    base_trace.append(p, y, base.recommend())
    base.tell(np.array([y]))
for _ in range(9000):
    p = wrapped.ask()[0]
    rec = wrapped.recommend()
    y = box(p)
    wrapped_trace.append(p, y, rec)
    wrapped.tell(np.array([y]))

base_asr = asr_stream(problem, base_trace)
base_rsr = rsr_stream(problem, base_trace, cfg)
wrapped_rsr = rsr_stream(problem, wrapped_trace, cfg)

n = len(wrapped_trace)
print("construction 1: repeat each search point 1+g(n) times")
print(f"  base ASR   after {len(base_trace)} evals: {base_asr.values[-1]:.3e}")
print(f"  base RSR   after {len(base_trace)} evals: {base_rsr.values[-1]:.3e}")
print(f"  wrapped RSR after {n} evals:              {wrapped_rsr.values[-1]:.3e}")
print(
  "  -> repetition drags the 'robust' metric down to the lucky-point level\n"
  "     of the base run (the base RSR, honest, is orders of magnitude higher)\n"
)

# --- Construction 2: probing makes ASR honest for gradient methods ---------


def slopes(probe_period):
    spec = ExperimentSpec(
        spec_id=f"sketch_probe_{probe_period}",
        algorithm="shamir",
        dim=2,
        noise_std=0.3,
        budget=10**5,
        replicates=5,
        master_seed=13,
        probe_period=probe_period,
    )
    res = run_spec(spec)
    return res.slope("SR").slope, res.slope("ASR").slope


sr_plain, asr_plain = slopes(None)
sr_probed, asr_probed = slopes(2)
print("construction 2: spend every 2nd evaluation at the recommendation")
print(f"  unprobed sketch: SR slope {sr_plain:6.2f}   ASR slope {asr_plain:6.2f}")
print(f"  probed sketch:   SR slope {sr_probed:6.2f}   ASR slope {asr_probed:6.2f}")
print(
  "  -> the sketch converges (SR ~ -1) while its ASR is flat: its probes sit\n"
  "     at a fixed distance from the iterate forever.  Spending half the\n"
  "     budget restating the recommendation makes ASR agree with SR, at no\n"
  "     real cost to the convergence rate."
)
