"""Median completion across sizes, and a one-parameter fit."""

from blindcast.harness import ExperimentSpec, fit_scaling, rows_to_csv, run_experiment

graphs = tuple(f"layered:{D}:8" for D in (8, 16, 32))
rows, _ = run_experiment(ExperimentSpec(graphs=graphs, trials=10, collision_detection=True, master_seed=3))
print(rows_to_csv(rows))
for model in ("DlogND", "DlogND_loglog", "DlogND_logloglog"):
    print(fit_scaling(rows, model))

# the clique finishes in a single round whenever the source is alone on air first
rows, _ = run_experiment(ExperimentSpec(graphs=("clique:16", "clique:64"), trials=10))
print([(r.n, r.median) for r in rows])
