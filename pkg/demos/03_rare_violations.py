"""Why sampling alone cannot certify safety: the rare-violation trap.

A property can fail on a region so small that a million random samples
miss it entirely — Monte Carlo then reports "no violations found" with
high apparent confidence, while exact counting pins the true rate down to
the last grid point. This script builds an instance whose violating set is
the corner cube [0, 0.01]^3 of the unit box: true rate 10^-6 by
construction.

Run:  python3 demos/03_rare_violations.py
"""

import relucount as rc

net, prop = rc.build_tiny_vr_net(0.01)
print("instance: y = max(x0, x1, x2) - 0.01 over [0,1]^3, property y >= 0")
print("violating set: the corner cube [0, 0.01)^3, volume 1e-6")
print()

# Exact grid count: 100 points per dimension puts exactly one lattice
# point (the origin) inside the corner.
res = rc.exact_count_discrete(net, prop, rc.GridSpec.uniform(100, 3),
                              rc.BabConfig(max_depth=64))
print(f"exact grid count: {res.violating_points} of {res.total_points} "
      f"points violate  ->  rate {res.vr_lb!r}")
print()

# Monte Carlo with a one-sided Hoeffding lower confidence bound. The
# point estimate is the honest hit fraction; the lower bound is what the
# sample size can actually guarantee.
print("Monte Carlo, 10^6 samples per seed, confidence 0.99:")
misses = 0
for seed in range(10):
    est = rc.mc_estimate(net, prop, n_samples=10 ** 6, confidence=0.99,
                         seed=seed)
    hits = round(est.point_estimate * est.samples_used)
    misses += hits == 0
    print(f"  seed {seed}: {hits} hits  ->  estimate {est.point_estimate:.1e}"
          f"  lower bound {est.lower_bound:.3f}")
print()
print(f"{misses}/10 seeds saw zero violations and would happily report a")
print("perfectly safe network. The expected zero-rate at 10^6 samples is")
print("(1 - 1e-6)^1e6 = 37%, so this is the norm, not bad luck. The lower")
print("bound is always 0 here: a million samples cannot certify an event")
print("this rare either way — only the exact counter can.")
