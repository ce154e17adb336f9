# Paired comparison of transmission schemes on the same random networks.
# Every method designs on the estimated channels and is scored by goodput:
# a user collects its nominal rate only if the true channels sustain it.

from latticealign.harness import ExperimentSpec, run_experiment, summarize, write_csv

spec = ExperimentSpec(
    methods=("lattice", "distributive_ia", "conventional_ia", "tdma", "two_stage_ml"),
    K_grid=(3,),
    snr_db_grid=(11.5,),
    epsilon_grid=(0.0, 0.1),
    M=2,
    N=2,
    L=1,
    trials=10,
    seed=2024,
)
rows = run_experiment(spec)

print(f"{'method':<16s} {'eps':>4s} {'worst goodput':>14s} {'sum goodput':>12s} {'conv':>5s}")
for cell in summarize(rows):
    print(f"{cell['method']:<16s} {cell['epsilon']:>4.1f} "
          f"{cell['worst_goodput_mean']:>9.4f} +-{cell['worst_goodput_std']:.3f} "
          f"{cell['sum_goodput_mean']:>12.4f} {cell['converged_frac']:>5.2f}")

# With perfect estimates nothing is ever in outage; with a 0.1 error ball the
# non-robust baselines commit to rates the true channels often cannot carry,
# while the lattice design only promises what survives the whole ball.
lattice = {r.trial: r.worst_goodput for r in rows
           if r.method == "lattice" and r.epsilon == 0.1}
for method in ("distributive_ia", "conventional_ia", "tdma", "two_stage_ml"):
    other = {r.trial: r.worst_goodput for r in rows
             if r.method == method and r.epsilon == 0.1}
    wins = sum(lattice[t] > other[t] for t in lattice)
    print(f"lattice beats {method:<16s} on {wins}/{len(lattice)} paired trials")

write_csv(rows, "comparison.csv")
print("\nwrote comparison.csv (re-running this script reproduces it byte for byte)")
