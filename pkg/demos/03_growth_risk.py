"""Long-run growth regimes from a three-state Markov chain."""

from pathlib import Path

import numpy as np

from cranemarket import dataset, markov

out = Path("demo_out")
out.mkdir(exist_ok=True)

# a two-state chain worked by hand: 0.1 * pi_0 = 0.5 * pi_1, so pi = [5/6, 1/6]
p = [[0.9, 0.1], [0.5, 0.5]]
for method in ("power_iteration", "eigen_solve"):
    s = markov.stationary(p, method)
    print(method, s.pi, s.residual)

panel = dataset.load_sample_panel()
growth = dataset.growth_rates(panel)

# below -2% is declining, above +2% is growing
spec = markov.DiscretizationSpec(-0.02, 0.02)
for g in growth[:3]:
    print(g.company, np.round(g.rates, 3), [s.name for s in markov.discretize(g.rates, spec)])

# with only four yearly transitions, smoothing keeps unseen moves possible
counts = markov.transition_counts(markov.discretize(growth[0].rates, spec))
print(counts)
print(markov.estimate_transitions(markov.discretize(growth[0].rates, spec), smoothing=1.0).p.round(3))

# internal chain: the company's own growth; external: growth of everybody else
profiles = markov.risk_profiles(panel, spec, smoothing=1.0)
for pr in profiles:
    print(f"{pr.company:10s} P(declining) own {pr.internal.pi[0]:.2f}  market {pr.external.pi[0]:.2f}")

(out / "risk.svg").write_text(markov.stacked_bar_svg(profiles))
