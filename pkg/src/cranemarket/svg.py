"""Tiny deterministic SVG writer used by the chart functions."""

from xml.sax.saxutils import escape, quoteattr


def fmt(x):
    # fixed precision keeps output byte-stable across platforms
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


class Svg:
    def __init__(self, width, height, title=None):
        self.width = width
        self.height = height
        self.parts = []
        if title:
            self.parts.append(f"<title>{escape(title)}</title>")

    def _attrs(self, attrs):
        out = []
        for key, value in attrs.items():
            if value is None:
                continue
            if isinstance(value, float):
                value = fmt(value)
            out.append(f"{key.rstrip('_').replace('_', '-')}={quoteattr(str(value))}")
        return " ".join(out)

    def element(self, tag, text=None, **attrs):
        a = self._attrs(attrs)
        if text is None:
            self.parts.append(f"<{tag} {a}/>")
        else:
            self.parts.append(f"<{tag} {a}>{escape(str(text))}</{tag}>")

    def rect(self, x, y, w, h, **attrs):
        self.element("rect", x=float(x), y=float(y), width=float(w), height=float(h), **attrs)

    def line(self, x1, y1, x2, y2, **attrs):
        self.element("line", x1=float(x1), y1=float(y1), x2=float(x2), y2=float(y2), **attrs)

    def text(self, x, y, content, **attrs):
        self.element("text", content, x=float(x), y=float(y), **attrs)

    def polyline(self, points, **attrs):
        self.element("polyline", points=" ".join(f"{fmt(x)},{fmt(y)}" for x, y in points), **attrs)

    def polygon(self, points, **attrs):
        self.element("polygon", points=" ".join(f"{fmt(x)},{fmt(y)}" for x, y in points), **attrs)

    def render(self):
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="12">\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
]


def color(i):
    return PALETTE[i % len(PALETTE)]
