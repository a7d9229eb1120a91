"""JSON readers and SVG rendering for boxes, configurations and stress graphs."""

from __future__ import annotations

import json
import warnings
from pathlib import Path

import numpy as np

from .geometry import BoxDomain, Configuration


class InputFormatError(ValueError):
    """A file is missing, unreadable or not the expected JSON shape."""


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def load_domain(path) -> BoxDomain:
    data = _read_json(path)
    try:
        return BoxDomain.from_dict(data)
    except (TypeError, ValueError, KeyError) as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def load_configuration(path) -> Configuration:
    data = _read_json(path)
    try:
        return Configuration.from_dict(data)
    except (TypeError, ValueError, KeyError) as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def dumps(obj) -> str:
    """JSON with shortest round-trip float repr (finite doubles re-parse bit-identically)."""
    return json.dumps(obj, allow_nan=False)


def render_svg(domain: BoxDomain, points, radius=None, graph=None, size: float = 400.0) -> str:
    """SVG drawing of the box, the balls and (optionally) a stress graph.

    Only the first two coordinates are drawn; higher dimensions trigger a warning.
    Edge stroke widths are proportional to the certificate weights.
    """
    if domain.d < 2:
        raise ValueError("rendering needs at least two dimensions")
    if domain.d > 2:
        warnings.warn("rendering projects onto the first two coordinates", stacklevel=2)
    pts = np.asarray(points, dtype=float)[:, :2]
    W, H = domain.lengths[0], domain.lengths[1]
    s = size / max(W, H)
    X = lambda x: x * s + 10  # noqa: E731
    Y = lambda y: (H - y) * s + 10  # noqa: E731
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W * s + 20:.1f}" height="{H * s + 20:.1f}">',
        f'<rect x="10" y="10" width="{W * s:.3f}" height="{H * s:.3f}" fill="none" stroke="black"/>',
    ]
    if radius:
        for k, (x, y) in enumerate(pts):
            out.append(f'<circle cx="{X(x):.3f}" cy="{Y(y):.3f}" r="{radius * s:.3f}" '
                       f'fill="#9ecae1" fill-opacity="0.5" stroke="#3182bd"/>')
    if graph is not None:
        wmax = max((e.weight for e in graph.edges), default=1.0)
        feet = np.asarray(graph.feet)[:, :2] if len(graph.feet) else np.zeros((0, 2))
        for e in graph.edges:
            a = pts[e.i]
            b = pts[e.j] if e.is_pair else feet[e.foot]
            width = 1.0 + 5.0 * e.weight / wmax
            out.append(f'<line x1="{X(a[0]):.3f}" y1="{Y(a[1]):.3f}" x2="{X(b[0]):.3f}" y2="{Y(b[1]):.3f}" '
                       f'stroke="#d62728" stroke-width="{width:.3f}"/>')
        for x, y in feet:
            out.append(f'<rect x="{X(x) - 3:.3f}" y="{Y(y) - 3:.3f}" width="6" height="6" fill="#d62728"/>')
    for k, (x, y) in enumerate(pts):
        out.append(f'<circle cx="{X(x):.3f}" cy="{Y(y):.3f}" r="2.5" fill="black"/>')
        out.append(f'<text x="{X(x) + 4:.3f}" y="{Y(y) - 4:.3f}" font-size="12">{k + 1}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
