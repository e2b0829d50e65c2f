"""
A small replicated comparison
=============================

The study driver repeats the full pipeline on fresh draws of a benchmark
surface and fits each replication twice: once with the expert count free
(the mixture) and once pinned to a single expert.  Per replication it
records divergence, squared error, band coverage and AUC for both fits,
which makes the comparison paired.

Two replications of the step surface keep this quick while still showing
the shape of the output; the acceptance suite runs the full-size version.
"""

import numpy as np

from mixprobit import RunConfig, run_study
from mixprobit.study import ROW_FIELDS, summarize_rows

config = RunConfig(seed=90, function="c", n=1000, replications=2,
                   max_components=3, pilot_burnin=1000, pilot_length=1000,
                   warmup=2000, sampling=2000, level=0.90)
result = run_study(config)

print("columns:", ", ".join(ROW_FIELDS))
print()
for row in result.rows:
    print(f"replication {row['replication']}: "
          f"askld mixture={row['askld_mixture']:.4f} "
          f"single={row['askld_single']:.4f}, "
          f"coverage mixture={row['coverage_mixture']:.3f}, "
          f"Pr(one expert)={row['pr_single_component']:.2f}, "
          f"{row['seconds_mixture'] + row['seconds_single']:.0f}s")

# The paired summary the CLI prints after `mixprobit study`.
summary = summarize_rows(result.rows, config.level)
print()
for key in ("median_askld_mixture", "median_askld_single",
            "median_askld_difference", "median_pct_delta_ase",
            "pct_delta_aecp_mixture", "mean_pr_multi_component"):
    print(f"{key}: {summary[key]:.4f}")

# Positive difference and positive percent-delta mean the single-expert
# fit lost; on the step surface the mixture should win both.
