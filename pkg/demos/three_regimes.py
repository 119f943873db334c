"""
The three ridge-regression regimes
==================================

Sparse graphs with weak regularisation, dense graphs with very weak
regularisation, and dense graphs with strong regularisation. Each method runs
at the scenario's default step size on the same instances; we report the
median final relative error over a handful of seeds and write one trace per
method for plotting (``k`` against ``rel_error`` on a log axis).
"""

import sys
from pathlib import Path

import numpy as np

from tvdual import harness

OUT = Path(__file__).with_name("out")
SEEDS = range(5)
ITERS = int(sys.argv[1]) if len(sys.argv) > 1 else 3000

for scenario in harness.SCENARIOS:
    print(f"\n{scenario}")
    for algorithm in ("dual_decomp", "panda", "diging"):
        finals, kappas = [], []
        for s in SEEDS:
            cfg = harness.scenario_config(scenario, algorithm, seed=s, graph_seed=s, iters=ITERS)
            res = harness.run_experiment(cfg)
            finals.append(res.rel_error[-1])
            kappas.append(res.instance.consts.kappa)
            if s == 0:
                harness.write_trace_csv(OUT / f"{scenario}_{algorithm}.csv",
                                        harness.trace_table(res.trace, res.instance),
                                        harness.run_metadata(res))
        print(f"  {algorithm:12s} step={cfg.step:<8g} median error={np.median(finals):.2e}"
              f"  (median kappa {np.median(kappas):.3g})")

print(f"\ntraces in {OUT}/")
