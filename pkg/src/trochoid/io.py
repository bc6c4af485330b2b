"""File formats: Matrix Market matrices, CSV curves/spectra/fields, JSON sidecars.

Writers format floats with repr() so identical inputs always produce
identical bytes; nothing here embeds timestamps or environment state.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .boundaries import BoundaryCurve
from .ensembles import DenseMatrix, SparseDigraph
from .interior import DensityField


def write_dense_mtx(m: DenseMatrix, path: str | Path) -> None:
    """Dense matrix in Matrix Market array format (column-major values)."""
    lines = ["%%MatrixMarket matrix array real general", f"{m.n} {m.n}"]
    lines.extend(repr(float(x)) for x in m.entries.flatten(order="F"))
    Path(path).write_text("\n".join(lines) + "\n")


def write_digraph_mtx(g: SparseDigraph, path: str | Path) -> None:
    """Digraph adjacency in Matrix Market coordinate format (1-based indices)."""
    edges = sorted(g.edges)
    lines = [
        "%%MatrixMarket matrix coordinate real general",
        f"{g.n} {g.n} {len(edges)}",
    ]
    lines.extend(f"{u + 1} {v + 1} {repr(float(w))}" for u, v, w in edges)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_market(path: str | Path) -> DenseMatrix:
    """Read either array or coordinate Matrix Market files into a dense matrix."""
    text = Path(path).read_text().splitlines()
    header = text[0].lower().split()
    if header[:2] != ["%%matrixmarket", "matrix"]:
        raise ValueError(f"{path}: not a Matrix Market matrix file")
    kind = header[2]
    body = [ln for ln in text[1:] if ln.strip() and not ln.startswith("%")]
    dims = body[0].split()
    rows, cols = int(dims[0]), int(dims[1])
    if rows != cols:
        raise ValueError(f"{path}: matrix must be square, got {rows}x{cols}")
    if kind == "array":
        values = np.array([float(x) for x in body[1:]])
        if values.size != rows * cols:
            raise ValueError(f"{path}: expected {rows * cols} values, got {values.size}")
        return DenseMatrix(values.reshape((rows, cols), order="F"))
    if kind == "coordinate":
        nnz = int(dims[2])
        m = np.zeros((rows, cols))
        if len(body) - 1 != nnz:
            raise ValueError(f"{path}: expected {nnz} entries, got {len(body) - 1}")
        for ln in body[1:]:
            u, v, w = ln.split()
            m[int(u) - 1, int(v) - 1] += float(w)
        return DenseMatrix(m)
    raise ValueError(f"{path}: unsupported Matrix Market kind {kind!r}")


def write_cycle_sidecar(g: SparseDigraph, path: str | Path) -> None:
    """JSON sidecar recording the generated cycles and their edge weights."""
    payload = {
        "n": g.n,
        "cycles": [list(c) for c in g.cycles],
        "weights": g.cycle_weights,
    }
    Path(path).write_text(json.dumps(payload, separators=(",", ":")) + "\n")


def read_cycle_sidecar(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def write_curve_csv(curve: BoundaryCurve, path: str | Path) -> None:
    lines = ["phi,re,im"]
    lines.extend(
        f"{repr(float(p))},{repr(float(z.real))},{repr(float(z.imag))}"
        for p, z in zip(curve.phis, curve.z)
    )
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve_csv(path: str | Path) -> BoundaryCurve:
    rows = _read_csv(path, "phi,re,im")
    phis = np.array([r[0] for r in rows])
    z = np.array([complex(r[1], r[2]) for r in rows])
    return BoundaryCurve(phis, z)


def write_spectrum_csv(eigenvalues: np.ndarray, path: str | Path) -> None:
    lines = ["re,im"]
    lines.extend(
        f"{repr(float(z.real))},{repr(float(z.imag))}" for z in eigenvalues
    )
    Path(path).write_text("\n".join(lines) + "\n")


def read_spectrum_csv(path: str | Path) -> np.ndarray:
    rows = _read_csv(path, "re,im")
    return np.array([complex(r[0], r[1]) for r in rows])


def write_density_csv(field: DensityField, path: str | Path) -> None:
    lines = ["re,im,mu"]
    grid = field.grid()
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            z = grid[i, j]
            lines.append(
                f"{repr(float(z.real))},{repr(float(z.imag))},{repr(float(field.mu[i, j]))}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def _read_csv(path: str | Path, expected_header: str) -> list[tuple[float, ...]]:
    text = Path(path).read_text().splitlines()
    if not text:
        raise ValueError(f"{path}: empty file")
    if text[0].strip() != expected_header:
        raise ValueError(
            f"{path}:1: expected header {expected_header!r}, got {text[0]!r}"
        )
    rows = []
    for lineno, ln in enumerate(text[1:], start=2):
        if not ln.strip():
            continue
        parts = ln.split(",")
        try:
            rows.append(tuple(float(x) for x in parts))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: malformed row {ln!r}") from exc
    return rows


def write_json(payload: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
