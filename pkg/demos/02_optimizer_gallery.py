"""Gallery run: the five optimizers on the sphere, with and without noise.

Noise-free, every serious method races to the optimum (the weighted
central-difference scheme lands on it exactly: its gradient estimate is exact
on a quadratic).  With noise, fortunes change drastically -- that contrast is
what the regret metrics in the other demos quantify.
"""

from regretlab import ExperimentSpec, run_spec
from regretlab.optimizers import ESConfig, FabianConfig, ResamplingSchedule, ShamirConfig

SETUPS = [
    ("random search", "rs", None, None),
    ("(1+1)-ES", "es", ESConfig(), None),
    ("(1+1)-ES, 2^n resampling", "es",
     ESConfig(schedule=ResamplingSchedule(kind="exponential", base=1.0, growth=2.0)), None),
    ("one-point gradient sketch", "shamir", ShamirConfig(), None),
    ("weighted central differences", "fabian", FabianConfig(), None),
]


def final_sr(algorithm, algo_config, noise_std, probe_period=None, budget=10**4):
    spec = ExperimentSpec(
        spec_id=f"demo_{algorithm}_{noise_std}",
        algorithm=algorithm,
        dim=2,
        noise_std=noise_std,
        budget=budget,
        replicates=3,
        master_seed=11,
        algo_config=algo_config,
        probe_period=probe_period,
    )
    result = run_spec(spec)
    vals = [r.series["SR"].values[-1] for r in result.replicates]
    return sum(vals) / len(vals)


print(f"{'setup':32s} {'SR, noise-free':>16s} {'SR, noise 0.3':>16s}")
for label, algorithm, cfg, probe in SETUPS:
    clean = final_sr(algorithm, cfg, 0.0, probe)
    noisy = final_sr(algorithm, cfg, 0.3, probe)
    print(f"{label:32s} {clean:16.3e} {noisy:16.3e}")

print(
    "\n(mean final simple regret over 3 replicates after 1e4 evaluations)"
    "\nNoise-free, the plain ES and the gradient methods converge hard, while"
    "\nexponential resampling just burns budget re-measuring noiseless points."
    "\nUnder noise the gradient methods keep their rates and both ES variants"
    "\nlag at this short budget; resampling's payoff appears over longer runs,"
    "\nwhere the plain ES stays stuck but the resampled one keeps descending"
    "\n(see the slope demo and the full benchmark)."
)
