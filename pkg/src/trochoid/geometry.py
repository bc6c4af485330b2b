"""Planar geometry on sampled closed curves.

Region membership uses the nonzero winding rule so that self-intersecting
loops (which the boundary laws develop past their cusp threshold) still
bound a sensible region.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 262144  # cap on points*edges per broadcast block


def inflate(polygon: np.ndarray, inflation: float) -> np.ndarray:
    """Scale a closed polygon by (1 + inflation) about its vertex centroid."""
    center = polygon[:-1].mean() if polygon[0] == polygon[-1] else polygon.mean()
    return center + (polygon - center) * (1.0 + inflation)


def winding_numbers(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Winding number of a closed polygon around each query point.

    ``polygon`` is complex vertices with the first repeated at the end.
    """
    points = np.asarray(points, dtype=complex).ravel()
    x0, y0 = polygon[:-1].real, polygon[:-1].imag
    x1, y1 = polygon[1:].real, polygon[1:].imag
    wn = np.zeros(points.shape[0], dtype=int)
    block = max(1, _CHUNK // max(1, len(x0)))
    for lo in range(0, len(points), block):
        px = points[lo : lo + block].real[:, None]
        py = points[lo : lo + block].imag[:, None]
        cross = (x1 - x0) * (py - y0) - (px - x0) * (y1 - y0)
        up = (y0 <= py) & (y1 > py) & (cross > 0)
        down = (y0 > py) & (y1 <= py) & (cross < 0)
        wn[lo : lo + block] = up.sum(axis=1) - down.sum(axis=1)
    return wn


def contains(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Boolean mask: nonzero winding number."""
    return winding_numbers(points, polygon) != 0


def distance_to_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Euclidean distance from each point to the nearest polygon segment."""
    points = np.asarray(points, dtype=complex).ravel()
    a = polygon[:-1]
    seg = polygon[1:] - a
    seg_len2 = np.maximum(np.abs(seg) ** 2, 1e-300)
    out = np.empty(points.shape[0])
    block = max(1, _CHUNK // max(1, len(a)))
    for lo in range(0, len(points), block):
        p = points[lo : lo + block][:, None]
        rel = p - a[None, :]
        frac = np.clip((rel * np.conj(seg)).real / seg_len2, 0.0, 1.0)
        d = np.abs(rel - frac * seg[None, :])
        out[lo : lo + block] = d.min(axis=1)
    return out
