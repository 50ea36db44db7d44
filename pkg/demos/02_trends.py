"""Shared market trend versus each company's own slope."""

from pathlib import Path

from cranemarket import dataset, trend

out = Path("demo_out")
out.mkdir(exist_ok=True)

panel = dataset.load_sample_panel()
t = list(panel.periods)

# lambda shrinks the slope toward zero; on three points y = t the slope is 2 / (2 + lambda)
for lam in (0.0, 1.0, 4.0):
    print(lam, trend.ridge_fit([0, 1, 2], [0, 1, 2], trend.RidgeSpec(lam)).slope)

spec = trend.RidgeSpec(lam=1.0)
total, mean = trend.shared_trend(panel, spec)
print("market total slope per year:", round(total.slope, 1))
print("average company slope:      ", round(mean.slope, 1))

# growing / lagging when a slope is more than 5% away from the average
trends = trend.company_trends(panel, spec, (total, mean))
for ct in sorted(trends, key=lambda c: -c.line.slope):
    print(f"{ct.company:10s} {ct.line.slope:8.1f}  {ct.label}")

# projected revenue one year past the data
nxt = t[-1] + 1
print({ct.company: round(float(ct.line(nxt)), 0) for ct in trends})

(out / "trend.svg").write_text(trend.trend_chart_svg(panel, trends, (total, mean)))
