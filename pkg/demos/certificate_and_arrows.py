"""
From a schedule to a certified rate, and back to the trajectory
===============================================================

1. measure delta on a realised schedule whose 2-step windows are connected
2. ask the rate theory for lambda at a step inside the certified interval
3. run PANDA and look at the five arrows on the actual trajectory
"""

import numpy as np

from tvdual import algorithms, diagnostics, graphs, harness, rates
from tvdual.graphs import GraphSchedule

n, K = 10, 400
inst = harness.generate_instance(n=n, seed=11)
mu, L = inst.consts.mu, inst.consts.L
sched = GraphSchedule(n, pi=0.5, seed=3)

B = graphs.smallest_connected_window(sched, K)
mixing = [graphs.metropolis_weights(graphs.sample_edges(sched, k), n) for k in range(K)]
delta = graphs.contraction_delta(mixing, B).delta
print(f"mu={mu:.4f} L={L:.4f} kappa={L / mu:.3f}  B={B} delta={delta:.4f}")

lo, hi = rates.step_size_interval(mu, L, delta)
cbar = rates.crossover_c(mu, L, delta, B)
print(f"certified steps (0, {hi:.3e}), crossover {cbar:.3e}")
for c in np.linspace(hi / 20, hi * 0.95, 5):
    cert = rates.certificate_for_step(c, mu, L, delta, B)
    print(f"  c={c:.3e} lambda={cert.lam:.6f} product={cert.product:.3f} feasible={cert.feasible}")

c = 0.5 * cbar
lam = rates.theoretical_lambda(c, mu, L, delta, B)
trace = algorithms.run("panda", inst.objectives, sched, c, K, matrices=mixing)
seqs = diagnostics.derived_sequences(trace, inst.opt)

print(f"\narrows at c={c:.3e}, lambda={lam:.6f}")
for corr in (False, True):
    print(" startup correction" if corr else " plain offsets")
    for a in diagnostics.arrow_slacks(seqs, lam, mu=mu, L=L, c=c, delta=delta, B=B,
                                      startup_correction=corr):
        print(f"   {a.name}: lhs={a.lhs:.3e} rhs={a.rhs:.3e} slack={a.slack:+.3e}")

# the decay seen on the trajectory against the certified one
rate, r2 = harness.fit_linear_rate(seqs.r, floor=1e-12)
print(f"\nfitted ||y - y*|| rate {rate:.6f} (R^2 {r2:.4f}) vs certified {lam:.6f}")
