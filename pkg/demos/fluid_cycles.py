"""Fluid-model trajectories, one cycle per line.

The first start converges to the fair split.  The second starts with equal
rates and a load factor inside the band, where nothing moves: the load stays
4 % over capacity instead of settling on the max-min rates.
"""

from erica.fluid import FluidState, cycle_rows, matches_oracle, run_until_converged

DELTA = 0.1

for label, rates in (("10 and 90", [10.0, 90.0]), ("four at 26", [26.0] * 4)):
    run = run_until_converged(FluidState.initial(rates, 100.0), DELTA, 20)
    print(f"start {label}: converged={run.converged} cycles={run.cycles} "
          f"matches_max_min={matches_oracle(run.final)}")
    for c, z, lo, hi, fi, inside in cycle_rows(run, DELTA):
        print(f"  cycle {c}: z={z:.4f} min={lo:.3f} max={hi:.3f} fairness={fi:.4f} in_region={inside}")
