"""Ordinal scoring of qualitative benchmark-product labels and radar-chart
comparison over five fixed dimensions."""

import json
import math
from dataclasses import dataclass
from importlib import resources

from .errors import InputError
from .svg import Svg, color

DIMENSIONS = (
    "LiftingCapacity",
    "Stability",
    "BoomConfigurations",
    "TransportationEase",
    "AdvancedTechnology",
)
DISPLAY_NAMES = {
    "LiftingCapacity": "Lifting Capacity",
    "Stability": "Stability",
    "BoomConfigurations": "Boom Configurations",
    "TransportationEase": "Transportation Ease",
    "AdvancedTechnology": "Advanced Technology",
}
MAX_SCORE = 5

_DEFAULT_LABELS = {
    "LiftingCapacity": [("Moderate", 3), ("Moderate to High", 4), ("High", 5)],
    "Stability": [("Good", 3), ("Very Good", 4), ("Excellent", 5)],
    "BoomConfigurations": [("Limited", 2), ("Versatile", 4), ("Highly Versatile", 5)],
    "TransportationEase": [("Relatively Easy", 3), ("Easy", 4), ("Very Easy", 5)],
    "AdvancedTechnology": [("Moderate", 3), ("Advanced", 4), ("Highly Advanced", 5)],
}


@dataclass(frozen=True)
class DimensionScale:
    dimension: str
    label_map: tuple  # ((label, score), ...) in increasing order

    def __post_init__(self):
        if self.dimension not in DIMENSIONS:
            raise InputError(f"unknown dimension {self.dimension!r}")
        scores = [s for _, s in self.label_map]
        if any(not 1 <= s <= MAX_SCORE for s in scores):
            raise InputError(f"scores for {self.dimension} must lie in 1..{MAX_SCORE}")
        if any(b <= a for a, b in zip(scores, scores[1:])):
            raise InputError(f"scores for {self.dimension} must increase with label order")

    def score(self, label):
        for lab, s in self.label_map:
            if lab == label:
                return s
        raise InputError(f"unknown label for {self.dimension}: {label!r}")


@dataclass(frozen=True)
class BenchmarkProfile:
    product: str
    scores: tuple

    def __post_init__(self):
        if len(self.scores) != len(DIMENSIONS):
            raise InputError(f"{self.product}: expected {len(DIMENSIONS)} scores, got {len(self.scores)}")


def default_scales():
    return [DimensionScale(d, tuple(_DEFAULT_LABELS[d])) for d in DIMENSIONS]


def load_scales(source):
    """Custom scales from JSON ``{dimension: [[label, score], ...]}``.

    Dimensions missing from the file keep their default scale.
    """
    doc = _read_json(source)
    scales = {s.dimension: s for s in default_scales()}
    for dim, pairs in doc.items():
        scales[dim] = DimensionScale(dim, tuple((str(lab), int(s)) for lab, s in pairs))
    return [scales[d] for d in DIMENSIONS]


def _read_json(source):
    if hasattr(source, "read"):
        return json.load(source)
    if isinstance(source, (dict, list)):
        return source
    with open(source, encoding="utf-8") as fh:
        return json.load(fh)


def score_product(product, labels, scales=None):
    """Score one product. ``labels`` is a sequence in dimension order or a
    mapping from dimension name to label."""
    scales = scales or default_scales()
    if isinstance(labels, dict):
        missing = [d for d in DIMENSIONS if d not in labels]
        if missing:
            raise InputError(f"{product}: missing labels for {', '.join(missing)}")
        labels = [labels[d] for d in DIMENSIONS]
    if len(labels) != len(DIMENSIONS):
        raise InputError(f"{product}: expected {len(DIMENSIONS)} labels, got {len(labels)}")
    return BenchmarkProfile(product, tuple(sc.score(lab) for sc, lab in zip(scales, labels)))


def load_products(source, scales=None):
    """Profiles from JSON ``[{product, labels: {dimension: label}}, ...]``."""
    return [score_product(item["product"], item["labels"], scales) for item in _read_json(source)]


def sample_products_path():
    return resources.files("cranemarket") / "data" / "sample_cranes.json"


def load_sample_products(scales=None):
    """The five benchmark cranes A-E with their descriptive labels."""
    return load_products(json.loads(sample_products_path().read_text(encoding="utf-8")), scales)


def _angles():
    n = len(DIMENSIONS)
    return [2 * math.pi * k / n - math.pi / 2 for k in range(n)]


def radar_vertices(scores, radius=1.0):
    """Polygon vertices with radius proportional to score / MAX_SCORE."""
    return [
        (radius * s / MAX_SCORE * math.cos(a), radius * s / MAX_SCORE * math.sin(a))
        for s, a in zip(scores, _angles())
    ]


def polygon_area(points):
    n = len(points)
    acc = 0.0
    for k in range(n):
        x1, y1 = points[k]
        x2, y2 = points[(k + 1) % n]
        acc += x1 * y2 - x2 * y1
    return abs(acc) / 2


def radar_area(profile):
    return polygon_area(radar_vertices(profile.scores))


def compare(profiles):
    if len(profiles) < 2:
        raise InputError("compare needs at least 2 profiles")
    dims = {}
    for k, dim in enumerate(DIMENSIONS):
        col = [p.scores[k] for p in profiles]
        hi, lo = max(col), min(col)
        dims[dim] = {
            "best": [p.product for p in profiles if p.scores[k] == hi],
            "worst": [p.product for p in profiles if p.scores[k] == lo],
            "tied": hi == lo,
        }
    pairs = []
    for i, a in enumerate(profiles):
        for b in profiles[i + 1:]:
            pairs.append({
                "a": a.product,
                "b": b.product,
                "a_at_least_b": [d for d, x, y in zip(DIMENSIONS, a.scores, b.scores) if x >= y],
                "a_below_b": [d for d, x, y in zip(DIMENSIONS, a.scores, b.scores) if x < y],
            })
    return {
        "dimensions": dims,
        "products": {p.product: {"scores": list(p.scores), "area": radar_area(p)} for p in profiles},
        "tradeoffs": pairs,
    }


def comparison_json(report):
    return json.dumps(report, indent=2) + "\n"


def radar_svg(profiles, scales=None, title="Benchmark product comparison"):
    if not 1 <= len(profiles) <= 8:
        raise InputError(f"radar chart takes 1 to 8 profiles, got {len(profiles)}")
    radius = 170
    cx, cy = 320, 260
    lx = 620
    svg = Svg(780, 500, title)
    svg.text(cx, 28, title, text_anchor="middle", font_size=14)

    def shift(points):
        return [(cx + x, cy + y) for x, y in points]

    for level in range(1, MAX_SCORE + 1):
        svg.polygon(shift(radar_vertices([level] * len(DIMENSIONS), radius)),
                    fill="none", stroke="#cccccc", class_="grid")
    for dim, (x, y) in zip(DIMENSIONS, radar_vertices([MAX_SCORE] * len(DIMENSIONS), radius)):
        svg.line(cx, cy, cx + x, cy + y, stroke="#999999")
        anchor = "middle" if abs(x) < 1 else ("start" if x > 0 else "end")
        svg.text(cx + 1.12 * x, cy + 1.12 * y + 4, DISPLAY_NAMES[dim], text_anchor=anchor)
    for k, sc in enumerate(scales or default_scales()):
        for lab, s in sc.label_map:
            x, y = radar_vertices([s] * len(DIMENSIONS), radius)[k]
            svg.text(cx + x + 3, cy + y - 3, lab, font_size=8, fill="#888888", class_="tick")

    for i, prof in enumerate(profiles):
        c = color(i)
        svg.polygon(shift(radar_vertices(prof.scores, radius)), fill=c, fill_opacity="0.12",
                    stroke=c, stroke_width=2, class_="profile")
    for i, prof in enumerate(profiles):
        y = 60 + 20 * i
        svg.rect(lx, y - 10, 12, 12, fill=color(i))
        svg.text(lx + 18, y, prof.product, class_="legend")
    svg.text(lx, 60 + 20 * len(profiles) + 10, f"rings: score 1..{MAX_SCORE}", font_size=10)
    return svg.render()

