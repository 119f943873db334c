"""
Two nodes, one dimension
========================

Node 0 wants x = 0, node 1 wants x = 2, so the network optimum is x = 1 with
dual optimum y* = (1, -1). We follow PANDA by hand for a few steps and then
let it run.
"""

import numpy as np

from tvdual import algorithms, diagnostics, graphs
from tvdual.graphs import GraphSchedule
from tvdual.objectives import ObjectiveSet, OptimalPair, QuadraticLocalObjective

# f_i(x) = (x - a_i)^2 / 2
nodes = ObjectiveSet(QuadraticLocalObjective([[1.0]], [a], r=0.0) for a in (0.0, 2.0))
opt = OptimalPair.of(nodes)
print("x* =", opt.x_star, " y* =", opt.y_star.ravel())

c = 0.1
W = graphs.averaging_matrix(2)
trace = algorithms.run("panda", nodes, GraphSchedule(2, 1.0), c, 40, matrices=[W] * 40)

# the first steps match the iteration done by hand
for k in range(4):
    print(f"k={k}  x={trace.x[k, :, 0]}  z={trace.z[k, :, 0]}  y={trace.y[k, :, 0]}")

# the dual iterates stay balanced and approach y*
seqs = diagnostics.derived_sequences(trace, opt)
print("sum of duals, worst:", np.abs(trace.y.sum(1)).max())
print("||y(k) - y*|| every 10 steps:", np.round(seqs.r[::10], 6))
