"""Five benchmark cranes scored on an ordinal 1-5 scale."""

import json
from pathlib import Path

from cranemarket import benchmark

out = Path("demo_out")
out.mkdir(exist_ok=True)

for sc in benchmark.default_scales():
    print(sc.dimension, dict(sc.label_map))

cranes = benchmark.load_sample_products()
for c in cranes:
    print(c.product, c.scores, round(benchmark.radar_area(c), 3))

report = benchmark.compare(cranes)
print(json.dumps(report["dimensions"]["BoomConfigurations"]))
print(report["tradeoffs"][0])

# a harsher boom scale pushes Crane C further down
custom = benchmark.load_scales({"BoomConfigurations": [["Limited", 1], ["Versatile", 3], ["Highly Versatile", 5]]})
harsh = benchmark.load_sample_products(custom)
print([(c.product, c.scores[2]) for c in harsh])

(out / "radar.svg").write_text(benchmark.radar_svg(cranes))
