"""
A desk-scale gamma sweep
========================

K = 5 parts of 5 items, gamma from 2 to 25, both generation methods.
Writes results.csv, summary.csv and four SVG charts into ./sweep_out.
"""

# %%
from pathlib import Path

from rrselect.experiment import ExperimentConfig, run_experiment
from rrselect.plots import plot

out = Path("sweep_out")
cfg = ExperimentConfig(family="i1", base={"K": 5, "n_j": 5}, sweep_name="gamma",
                       sweep_values=tuple(range(2, 26)), replications=3,
                       methods=("m1", "m2"), time_limit=60)
records, summary, errors = run_experiment(cfg, out)
print(len(records), "runs,", len(errors), "errors")

# %%
# M1 needs the most rounds at intermediate budgets and exactly two at gamma = n.
for row in summary:
    if row["method"] == "m1":
        print(f"gamma {row['sweep']:>2}: {row['iterations']:5.2f} iterations, "
              f"{row['time_ms']:7.1f} ms")

# %%
for path in plot(out / "results.csv", out, cfg.time_limit, "gamma"):
    print("wrote", path)
