"""
Scoring probability estimates
=============================

Three views of estimator quality live in the metrics module:

* divergence from the generating truth (average symmetrized KL),
* squared error and its percent change against a baseline,
* classification sweep (ROC curve and its area).

All of them take plain arrays, so they work on any estimate, not just
fits produced here.
"""

import numpy as np

from mixprobit import askld, ase, ecp, pct_delta_ase, roc, true_probability

rng = np.random.default_rng(42)

grid = np.linspace(0.0, 1.0, 201)[:, None]
truth = true_probability("a", grid)

# Two synthetic estimators: a decent one and a washed-out one that filled
# in the surface with something flatter.
decent = np.clip(truth + rng.normal(0.0, 0.03, truth.size), 0.0, 1.0)
flat = 0.5 + 0.4 * (truth - 0.5)

print("          ASKLD      ASE")
for name, est in [("decent", decent), ("flat", flat)]:
    print(f"{name:8s} {askld(truth, est):8.4f} {ase(truth, est):8.4f}")

# Percent change in ASE, signed so positive means the second argument
# (the reference) wins.
print()
print("ASE change of flat vs decent:",
      f"{pct_delta_ase(ase(truth, flat), ase(truth, decent)):+.1f}%")

# Interval hits: ecp returns one indicator per point; its mean is the
# empirical coverage of the band.
half_width = 0.08
hits = ecp(truth, np.clip(decent - half_width, 0, 1),
           np.clip(decent + half_width, 0, 1))
print(f"fixed +/-{half_width} band around the decent estimate covers "
      f"{100 * hits.mean():.1f}% of the truth")

# ROC: score actual binary outcomes by each estimator and sweep the
# threshold.  The area equals the Mann-Whitney two-sample statistic.
labels = (rng.random(truth.size) < truth).astype(int)
print()
for name, est in [("decent", decent), ("flat", flat), ("truth", truth)]:
    curve = roc(labels, est)
    print(f"AUC using {name:6s} scores: {curve.auc:.4f} "
          f"({curve.thresholds.size} thresholds)")

# The curve itself is three aligned arrays; a few waypoints:
curve = roc(labels, decent)
idx = np.linspace(0, curve.fpr.size - 1, 6).astype(int)
print()
print("fpr:", np.array2string(curve.fpr[idx], precision=2))
print("tpr:", np.array2string(curve.tpr[idx], precision=2))
