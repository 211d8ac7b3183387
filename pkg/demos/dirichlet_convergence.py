"""Grid-refinement study for the Dirichlet problem on an ellipse.

Solves the manufactured Poisson problem on four grids with the
single-layer direct formulation and prints the error ladder with its
fitted order.  The same study is available from the command line as

    latticebae convergence --geometry ellipse --aspect 2 \
        --bc dirichlet --n-list 64,128,256,512 --out table.csv
"""

from latticebae import ExperimentConfig, run_convergence

cfg = ExperimentConfig(geometry="ellipse", aspect=2.0, bc="dirichlet",
                       formulation="single-direct",
                       n_list=(64, 128, 256, 512))
report = run_convergence(cfg)

print("   n        h      max error    rate")
prev = None
for row in report.rows:
    rate = "" if prev is None else f"{prev / row.max_error:7.2f}"
    print(f"{row.n:5d}  {row.h:.5f}  {row.max_error:.4e}  {rate}")
    prev = row.max_error
print(f"\nfitted order in h: {report.order:.3f}")
