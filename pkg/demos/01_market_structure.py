"""Who moves with whom: revenue co-movement among the bundled crane makers."""

from pathlib import Path

import numpy as np

from cranemarket import competition, dataset

out = Path("demo_out")
out.mkdir(exist_ok=True)

panel = dataset.load_sample_panel()
print(panel.companies)
print(panel.periods)

# shares of the yearly total, first and last year
summary = dataset.summarize(panel)
for name, row in summary["companies"].items():
    first, last = row["share"]["2017"], row["share"]["2021"]
    print(f"{name:10s} share {first:6.1%} -> {last:6.1%}")

# z-score each company, then add 10 noisy copies so a 5-year panel gives
# the correlation estimate a little more to chew on
z = dataset.normalize(panel)
noisy = dataset.augment(z, dataset.NoiseSpec(delta=0.05, seed=42, replicas=10))
corr = competition.pearson_matrix(noisy)
np.set_printoptions(precision=2, suppress=True)
print(corr.r)

# distance 1 - r, then the partition into 3 groups with the smallest
# within-group distance total (exhaustive for this many companies)
dist = competition.correlation_distance(corr)
for k in (2, 3, 4):
    c = competition.cluster(dist, k)
    print(k, round(c.objective, 3), c.clusters)

(out / "heatmap.svg").write_text(competition.heatmap_svg(corr, "Revenue co-movement 2017-2021"))

# the two sub-periods tell different stories
for a, b in ((2017, 2019), (2019, 2021)):
    sub = competition.pearson_matrix(dataset.slice_period(panel, a, b))
    print(a, b, "mean off-diagonal r:", sub.r[np.triu_indices(len(sub.labels), 1)].mean().round(3))
