"""Standalone SVG rendering of a spectrum scatter plus its boundary curve.

Markup is generated directly with fixed-precision coordinates, so identical
inputs yield byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .io import read_curve_csv, read_spectrum_csv

_SIZE = 640.0
_MARGIN = 40.0
_DOT_RADIUS = 1.6


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def render_svg_data(eigenvalues: np.ndarray, boundary_z: np.ndarray, out_path: str | Path) -> None:
    """Render eigenvalue dots and a closed boundary path with equal-aspect axes."""
    if len(eigenvalues) == 0:
        raise ValueError("empty spectrum: nothing to render")
    allpts = np.concatenate([eigenvalues, boundary_z])
    xlo, xhi = float(allpts.real.min()), float(allpts.real.max())
    ylo, yhi = float(allpts.imag.min()), float(allpts.imag.max())
    span = max(xhi - xlo, yhi - ylo, 1e-9)
    cx, cy = 0.5 * (xlo + xhi), 0.5 * (ylo + yhi)
    scale = (_SIZE - 2 * _MARGIN) / span

    def to_px(z: complex) -> tuple[float, float]:
        return (
            _SIZE / 2 + (z.real - cx) * scale,
            _SIZE / 2 - (z.imag - cy) * scale,
        )

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(_SIZE)}" '
        f'height="{int(_SIZE)}" viewBox="0 0 {int(_SIZE)} {int(_SIZE)}">',
        f'<rect width="{int(_SIZE)}" height="{int(_SIZE)}" fill="white"/>',
    ]
    # light axes through the origin when it is in view
    ox, oy = to_px(0j)
    if 0 <= ox <= _SIZE:
        lines.append(
            f'<line x1="{_fmt(ox)}" y1="0" x2="{_fmt(ox)}" y2="{int(_SIZE)}" '
            'stroke="#cccccc" stroke-width="1"/>'
        )
    if 0 <= oy <= _SIZE:
        lines.append(
            f'<line x1="0" y1="{_fmt(oy)}" x2="{int(_SIZE)}" y2="{_fmt(oy)}" '
            'stroke="#cccccc" stroke-width="1"/>'
        )
    for z in eigenvalues:
        px, py = to_px(z)
        lines.append(
            f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="{_DOT_RADIUS}" '
            'fill="#1f6fce" fill-opacity="0.75"/>'
        )
    if len(boundary_z):
        coords = " L ".join(f"{_fmt(px)} {_fmt(py)}" for px, py in map(to_px, boundary_z))
        lines.append(
            f'<path d="M {coords} Z" fill="none" stroke="black" stroke-width="1.5"/>'
        )
    lines.append("</svg>")
    Path(out_path).write_text("\n".join(lines) + "\n")


def render_svg(spectrum_csv: str | Path, boundary_csv: str | Path, out_path: str | Path) -> None:
    """Render from the CSV artifacts written by the pipeline."""
    eigenvalues = read_spectrum_csv(spectrum_csv)
    curve = read_curve_csv(boundary_csv)
    render_svg_data(eigenvalues, curve.z, out_path)
