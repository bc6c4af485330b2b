"""End-to-end experiment orchestration: generate, verify, calibrate.

Configs are plain dicts (JSON-compatible).  Seed-level work can run on a
thread pool capped by the TROCHOID_THREADS environment variable; results are
always assembled in seed order, so reports are reproducible byte-for-byte.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np

from .boundaries import (
    BoundaryCurve,
    HypotrochoidParams,
    MixedCycleParams,
    PolytrochoidParams,
    SparseCyclicParams,
    dense_hypotrochoid,
    dense_polytrochoid,
    mixed_cycle_asymptotic,
    mixed_cycle_boundary,
    sparse_hypotrochoid,
)
from .correlations import DenseCyclicSpec, generate_dense_cyclic
from .digraphs import (
    CycleSpecies,
    MixedCyclicSpec,
    PoissonCyclicSpec,
    RegularCyclicSpec,
    generate_mixed_cyclic,
    generate_poisson_cyclic,
    generate_regular_cyclic,
)
from .ensembles import DenseMatrix, SparseDigraph, adjacency_matrix, generate_base_iid
from .errors import CalibrationError, ConfigError, InvalidSpecError, TrochoidError
from .io import (
    write_curve_csv,
    write_cycle_sidecar,
    write_dense_mtx,
    write_digraph_mtx,
    write_json,
    write_spectrum_csv,
)
from .moments import (
    MomentOrder,
    MomentReport,
    empirical_mixed_moment,
    empirical_pure_moment,
    mixed_moment_candidates,
    trace_power_moment,
    tree_walk_prediction,
)
from .spectra import (
    Spectrum,
    compute_eigenvalues,
    containment,
    detect_deterministic_outliers,
    digraph_spectrum,
    rotation_symmetry_residual,
)
from .svg import render_svg_data

_SYMMETRY_MAX_N = 2000


def max_workers() -> int:
    cap = os.environ.get("TROCHOID_THREADS")
    if cap:
        try:
            return max(1, int(cap))
        except ValueError as exc:
            raise ConfigError(f"TROCHOID_THREADS must be an integer, got {cap!r}") from exc
    return min(4, os.cpu_count() or 1)


# --- config parsing -------------------------------------------------------


@dataclass
class EnsembleHandle:
    """Parsed ensemble section: spec object plus its dispatch kind."""

    kind: str
    spec: object

    @property
    def n(self) -> int:
        return self.spec.n


def parse_ensemble(section: dict) -> EnsembleHandle:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("ensemble section must be a mapping with a 'kind'")
    kind = section["kind"]
    try:
        if kind == "dense-iid":
            return EnsembleHandle(kind, _IidSpec(n=int(section["n"])))
        if kind == "dense-cyclic":
            flip_prob = section.get("flip_prob")
            target = section.get("target_rho")
            if flip_prob is None and target is None:
                raise ConfigError("dense-cyclic needs flip_prob or target_rho")
            spec = DenseCyclicSpec(
                n=int(section["n"]),
                k=int(section["k"]),
                flip_prob=float(flip_prob if flip_prob is not None else 0.0),
                sign=int(section.get("sign", 1)),
            )
            return EnsembleHandle(kind, _DenseCyclicConfig(spec, target))
        if kind == "regular-cyclic":
            return EnsembleHandle(
                kind,
                RegularCyclicSpec(
                    n=int(section["n"]),
                    d=int(section["d"]),
                    k=int(section["k"]),
                    weight=float(section.get("weight", 1.0)),
                ),
            )
        if kind == "poisson-cyclic":
            return EnsembleHandle(
                kind,
                PoissonCyclicSpec(
                    n=int(section["n"]),
                    mean_degree=float(section["mean_degree"]),
                    k=int(section["k"]),
                    weight=float(section.get("weight", 1.0)),
                ),
            )
        if kind == "mixed-cyclic":
            species = tuple(
                CycleSpecies(d=int(s["d"]), k=int(s["k"]), weight=float(s.get("weight", 1.0)))
                for s in section["species"]
            )
            return EnsembleHandle(kind, MixedCyclicSpec(n=int(section["n"]), species=species))
    except KeyError as exc:
        raise ConfigError(f"ensemble section missing field {exc}") from exc
    except InvalidSpecError as exc:
        raise ConfigError(str(exc)) from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad ensemble field: {exc}") from exc
    raise ConfigError(f"unknown ensemble kind {kind!r}")


@dataclass(frozen=True)
class _IidSpec:
    n: int


@dataclass
class _DenseCyclicConfig:
    spec: DenseCyclicSpec
    target_rho: float | None

    @property
    def n(self) -> int:
        return self.spec.n


def generate_for_seed(handle: EnsembleHandle, seed: int):
    """One draw of the configured ensemble."""
    if handle.kind == "dense-iid":
        return generate_base_iid(handle.spec.n, seed)
    if handle.kind == "dense-cyclic":
        return generate_dense_cyclic(handle.spec.spec, seed)
    if handle.kind == "regular-cyclic":
        return generate_regular_cyclic(handle.spec, seed)
    if handle.kind == "poisson-cyclic":
        return generate_poisson_cyclic(handle.spec, seed)
    if handle.kind == "mixed-cyclic":
        return generate_mixed_cyclic(handle.spec, seed)
    raise ConfigError(f"unknown ensemble kind {handle.kind!r}")


def resolve_flip_prob(handle: EnsembleHandle, seeds: list[int]) -> float | None:
    """Calibrate flip_prob in place when the config pinned a target strength."""
    if handle.kind != "dense-cyclic":
        return None
    cfg = handle.spec
    if cfg.target_rho is None:
        return cfg.spec.flip_prob
    p = calibrate_flip_prob(cfg.spec.n, cfg.spec.k, cfg.target_rho, seeds[:3] or [1])
    cfg.spec = DenseCyclicSpec(cfg.spec.n, cfg.spec.k, p, cfg.spec.sign)
    cfg.target_rho = None
    return p


# --- boundary selection ---------------------------------------------------


def boundary_for(
    handle: EnsembleHandle,
    section,
    n_samples: int = 1024,
    measured_rho: float | None = None,
) -> BoundaryCurve:
    """Build the requested boundary; "auto" derives the law from the ensemble."""
    if section == "auto" or section is None:
        return _auto_boundary(handle, n_samples, measured_rho)
    if not isinstance(section, dict) or "law" not in section:
        raise ConfigError("boundary section must be 'auto' or a mapping with a 'law'")
    law = section["law"]
    try:
        if law == "dense":
            return dense_hypotrochoid(
                HypotrochoidParams(k=int(section["k"]), rho=float(section["rho"])), n_samples
            )
        if law == "poly":
            terms = {int(k): float(v) for k, v in section["terms"].items()}
            return dense_polytrochoid(PolytrochoidParams(terms), n_samples)
        if law == "sparse":
            return sparse_hypotrochoid(
                SparseCyclicParams(
                    d_hat=float(section["d_hat"]),
                    k=int(section["k"]),
                    weight=float(section.get("weight", 1.0)),
                ),
                n_samples,
            )
        if law in ("mixed", "mixed-asymptotic"):
            params = MixedCycleParams(
                d1=float(section["d1"]),
                k1=int(section["k1"]),
                w1=float(section.get("w1", 1.0)),
                d2=float(section["d2"]),
                k2=int(section["k2"]),
                w2=float(section.get("w2", 1.0)),
            )
            fn = mixed_cycle_boundary if law == "mixed" else mixed_cycle_asymptotic
            return fn(params, n_samples)
    except KeyError as exc:
        raise ConfigError(f"boundary section missing field {exc}") from exc
    raise ConfigError(f"unknown boundary law {law!r}")


def _auto_boundary(
    handle: EnsembleHandle, n_samples: int, measured_rho: float | None
) -> BoundaryCurve:
    if handle.kind == "dense-iid":
        return dense_hypotrochoid(HypotrochoidParams(k=2, rho=0.0), n_samples)
    if handle.kind == "dense-cyclic":
        if measured_rho is None:
            raise ConfigError(
                "auto boundary for a dense ensemble needs the measured correlation strength"
            )
        return dense_hypotrochoid(
            HypotrochoidParams(k=handle.spec.spec.k, rho=measured_rho), n_samples
        )
    if handle.kind == "regular-cyclic":
        s = handle.spec
        if s.d < 2:
            raise ConfigError(
                "auto boundary needs d >= 2: one cycle per node leaves the "
                "biased cycle count at zero and no law to draw"
            )
        return sparse_hypotrochoid(
            SparseCyclicParams(d_hat=s.d - 1, k=s.k, weight=s.weight), n_samples
        )
    if handle.kind == "poisson-cyclic":
        s = handle.spec
        return sparse_hypotrochoid(
            SparseCyclicParams(d_hat=s.mean_degree, k=s.k, weight=s.weight), n_samples
        )
    if handle.kind == "mixed-cyclic":
        s1, s2 = handle.spec.species
        return mixed_cycle_boundary(
            MixedCycleParams(d1=s1.d, k1=s1.k, w1=s1.weight, d2=s2.d, k2=s2.k, w2=s2.weight),
            n_samples,
        )
    raise ConfigError(f"auto boundary unsupported for {handle.kind!r}")


def _symmetry_order(handle: EnsembleHandle) -> int:
    """gcd of cycle lengths; spectra are exactly symmetric under this rotation."""
    if handle.kind == "dense-cyclic":
        return handle.spec.spec.k
    if handle.kind == "regular-cyclic":
        return handle.spec.k
    if handle.kind == "poisson-cyclic":
        return handle.spec.k
    if handle.kind == "mixed-cyclic":
        g = 0
        for s in handle.spec.species:
            if s.d > 0:
                g = gcd(g, s.k)
        return g
    return 0


# --- experiment runners ---------------------------------------------------


def run_generate(config: dict, out_dir: str | Path | None = None) -> dict:
    """Generate every seed's draw and persist it; returns a file manifest."""
    handle = parse_ensemble(config.get("ensemble", {}))
    seeds = _seed_list(config)
    out = Path(out_dir if out_dir is not None else config.get("outputs", {}).get("dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    p = resolve_flip_prob(handle, seeds)
    manifest: dict = {"files": [], "ensemble": config["ensemble"], "seeds": seeds}
    if p is not None:
        manifest["flip_prob"] = p
    for seed in seeds:
        draw = generate_for_seed(handle, seed)
        stem = out / f"{handle.kind}-seed{seed}"
        if isinstance(draw, DenseMatrix):
            write_dense_mtx(draw, stem.with_suffix(".mtx"))
            manifest["files"].append(str(stem.with_suffix(".mtx")))
        else:
            write_digraph_mtx(draw, stem.with_suffix(".mtx"))
            sidecar = Path(str(stem) + ".cycles.json")
            write_cycle_sidecar(draw, sidecar)
            manifest["files"].extend([str(stem.with_suffix(".mtx")), str(sidecar)])
    return manifest


def _seed_list(config: dict) -> list[int]:
    seeds = config.get("seeds")
    if not seeds:
        raise ConfigError("config must list at least one seed")
    return [int(s) for s in seeds]


def _spectrum_for(
    handle: EnsembleHandle, seed: int
) -> tuple[Spectrum, SparseDigraph | None, DenseMatrix]:
    draw = generate_for_seed(handle, seed)
    source = {"kind": handle.kind, "seed": seed}
    if isinstance(draw, DenseMatrix):
        return compute_eigenvalues(draw, source=source), None, draw
    matrix = adjacency_matrix(draw, 1.0)
    return digraph_spectrum(draw, 1.0, source=source), draw, matrix


def _moment_orders(handle: EnsembleHandle) -> tuple[list[int], list[int]]:
    """(pure orders, mixed orders) reported for this ensemble."""
    if handle.kind == "dense-iid":
        return [2], [1, 2]
    if handle.kind == "dense-cyclic":
        return [handle.spec.spec.k], [1]
    if handle.kind in ("regular-cyclic", "poisson-cyclic"):
        return [handle.spec.k], [1, 2]
    if handle.kind == "mixed-cyclic":
        return sorted(s.k for s in handle.spec.species if s.d > 0), [1]
    return [], []


def _seed_moments(handle: EnsembleHandle, spectrum: Spectrum, matrix: DenseMatrix) -> list[dict]:
    pure, mixed = _moment_orders(handle)
    rows = []
    for k in pure:
        rows.append(
            MomentReport(
                order=MomentOrder("pure", k),
                empirical=empirical_pure_moment(spectrum, k),
                predicted=_predicted_moment(handle, "pure", k),
            ).to_dict()
        )
    for l in mixed:
        rows.append(
            MomentReport(
                order=MomentOrder("mixed", l),
                empirical=empirical_mixed_moment(matrix, l),
                predicted=_predicted_moment(handle, "mixed", l),
            ).to_dict()
        )
    return rows


def _aggregate_moments(seed_reports: list[dict]) -> list[dict]:
    """Mean and standard error across seeds for every reported order."""
    pools: dict[tuple, dict] = {}
    for entry in seed_reports:
        for row in entry.get("moments", []):
            key = tuple(sorted(row["order"].items()))
            slot = pools.setdefault(key, {"order": row["order"], "values": [], "predicted": row["predicted"]})
            slot["values"].append(row["empirical"])
    out = []
    for slot in pools.values():
        values = np.asarray(slot["values"])
        stderr = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        out.append(
            {
                "order": slot["order"],
                "empirical": float(values.mean()),
                "predicted": slot["predicted"],
                "stderr": stderr,
            }
        )
    return sorted(out, key=lambda r: (r["order"]["kind"], r["order"].get("k", r["order"].get("l"))))


def run_verify(config: dict, out_dir: str | Path | None = None) -> dict:
    """Full verification: spectra, containment, symmetry, moment table.

    Failures are isolated per seed; the report carries an "error" entry for
    a failed seed instead of aborting the batch.
    """
    handle = parse_ensemble(config.get("ensemble", {}))
    seeds = _seed_list(config)
    inflation = float(config.get("inflation", 0.03))
    n_samples = int(config.get("samples", 1024))
    exclude = bool(config.get("exclude_outliers", True))
    p = resolve_flip_prob(handle, seeds)

    def solve(seed: int):
        return _spectrum_for(handle, seed)

    with ThreadPoolExecutor(max_workers=max_workers()) as pool:
        outcomes = list(pool.map(_isolate(solve), seeds))

    # measured correlation strength for auto dense boundaries
    measured = []
    sym_k = _symmetry_order(handle)
    for outcome in outcomes:
        if isinstance(outcome, Exception):
            continue
        spectrum, _, _ = outcome
        if handle.kind == "dense-cyclic":
            measured.append(empirical_pure_moment(spectrum, handle.spec.spec.k))
    measured_rho = float(np.mean(measured)) if measured else None

    curve = boundary_for(handle, config.get("boundary", "auto"), n_samples, measured_rho)

    seed_reports = []
    pooled_inside = pooled_counted = 0
    pooled_eigenvalues: list[np.ndarray] = []
    for seed, outcome in zip(seeds, outcomes):
        if isinstance(outcome, Exception):
            seed_reports.append({"seed": seed, "error": str(outcome)})
            continue
        spectrum, graph, matrix = outcome
        exclusions = detect_deterministic_outliers(spectrum, graph) if exclude else []
        report = containment(spectrum, curve, inflation, exclusions)
        entry = {
            "seed": seed,
            "containment": report.to_dict(),
            "inside_fraction": report.inside_fraction,
            "moments": _seed_moments(handle, spectrum, matrix),
        }
        if handle.kind == "dense-cyclic":
            entry["measured_rho"] = empirical_pure_moment(spectrum, handle.spec.spec.k)
        if sym_k >= 2 and spectrum.n <= _SYMMETRY_MAX_N:
            entry["symmetry_residual"] = rotation_symmetry_residual(spectrum, sym_k)
        seed_reports.append(entry)
        pooled_inside += report.inside
        pooled_counted += report.total - len(report.excluded_outliers)
        pooled_eigenvalues.append(spectrum.eigenvalues)

    if pooled_counted == 0:
        raise TrochoidError("every seed failed; nothing to report")

    aggregate = {
        "inside_fraction": pooled_inside / pooled_counted,
        "seeds_failed": sum(1 for r in seed_reports if "error" in r),
        "moments": _aggregate_moments(seed_reports),
    }
    if measured_rho is not None:
        aggregate["measured_rho"] = measured_rho
    residuals = [r["symmetry_residual"] for r in seed_reports if "symmetry_residual" in r]
    if residuals:
        aggregate["mean_symmetry_residual"] = float(np.mean(residuals))

    report = {
        "ensemble": config["ensemble"],
        "boundary": _describe_curve(curve),
        "inflation": inflation,
        "seeds": seed_reports,
        "aggregate": aggregate,
    }
    if p is not None:
        report["calibration"] = {"flip_prob": p}

    if out_dir is not None or config.get("outputs"):
        out = Path(out_dir if out_dir is not None else config["outputs"].get("dir", "."))
        out.mkdir(parents=True, exist_ok=True)
        write_json(report, out / "report.json")
        write_curve_csv(curve, out / "boundary.csv")
        if pooled_eigenvalues:
            allev = np.concatenate(pooled_eigenvalues)
            write_spectrum_csv(allev, out / "spectrum.csv")
            if config.get("outputs", {}).get("svg", True):
                render_svg_data(allev, curve.z, out / "figure.svg")
    return report


def _isolate(fn):
    def wrapped(seed):
        try:
            return fn(seed)
        except TrochoidError as exc:
            return exc

    return wrapped


def _describe_curve(curve: BoundaryCurve) -> dict:
    law = curve.law
    name = type(law).__name__ if law is not None else "unknown"
    fields: dict = {}
    if law is not None:
        for key, value in vars(law).items():
            if isinstance(value, dict):
                fields[key] = {str(k): v for k, v in value.items()}
            elif isinstance(value, (int, float, str)):
                fields[key] = value
    out = {"law": name, "params": fields, "samples": len(curve.z)}
    if isinstance(law, MixedCycleParams):
        from .boundaries import mixed_cycle_solve

        t1, t2, phi2 = mixed_cycle_solve(law, 0.0)
        out["continuation"] = {
            "swept_angles": len(curve.z),
            "t1_at_zero": t1,
            "t2_at_zero": t2,
            "phi2_at_zero": phi2,
        }
    return out


def run_moments(config: dict, pure_orders: list[int], mixed_orders: list[int]) -> dict:
    """Empirical-vs-predicted moment table over the configured seeds."""
    handle = parse_ensemble(config.get("ensemble", {}))
    seeds = _seed_list(config)
    resolve_flip_prob(handle, seeds)

    rows = {("pure", k): [] for k in pure_orders}
    rows.update({("mixed", l): [] for l in mixed_orders})
    for seed in seeds:
        draw = generate_for_seed(handle, seed)
        matrix = draw if isinstance(draw, DenseMatrix) else adjacency_matrix(draw, 1.0)
        for k in pure_orders:
            rows[("pure", k)].append(trace_power_moment(matrix, k))
        for l in mixed_orders:
            rows[("mixed", l)].append(empirical_mixed_moment(matrix, l))

    reports = []
    for (kind, order), values in rows.items():
        arr = np.asarray(values)
        stderr = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
        reports.append(
            MomentReport(
                order=MomentOrder(kind, order),
                empirical=float(arr.mean()),
                predicted=_predicted_moment(handle, kind, order),
                stderr=stderr,
            )
        )
    return {
        "ensemble": config["ensemble"],
        "seeds": seeds,
        "moments": [r.to_dict() for r in reports],
    }


def _predicted_moment(handle: EnsembleHandle, kind: str, order: int) -> float:
    """Leading-order prediction for the raw (unrescaled) moment, NaN if unknown."""
    if handle.kind == "dense-iid":
        return mixed_moment_candidates(order)["catalan"] if kind == "mixed" else 0.0
    if handle.kind in ("regular-cyclic", "poisson-cyclic"):
        spec = handle.spec
        d = spec.d if handle.kind == "regular-cyclic" else spec.mean_degree
        w = spec.weight
        if kind == "mixed":
            return tree_walk_prediction(2, order, d, d) * w ** (2 * order)
        if kind == "pure" and spec.k == 3 and order % 3 == 0 and order >= 3:
            return tree_walk_prediction(3, order // 3, d, d) * w**order
        if kind == "pure" and order % spec.k != 0:
            return 0.0
    return float("nan")


# --- calibration ----------------------------------------------------------

_SWEEP_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


def calibrate_flip_prob(
    n: int,
    k: int,
    target_rho: float,
    seeds: list[int],
    tolerance: float = 0.07,
    max_probes: int = 16,
) -> float:
    """Find the flip probability whose mean measured strength hits the target.

    Sweeps the probability grid to confirm the response is monotone and the
    target achievable, then bisects.  The match criterion is the mean over
    ``seeds`` within ``tolerance`` (relative) of the target.
    """
    if not seeds:
        raise ConfigError("calibration needs at least one seed")
    if target_rho == 0.0:
        return 0.0

    def measure(p: float) -> float:
        spec = DenseCyclicSpec(n=n, k=k, flip_prob=p, sign=1 if target_rho >= 0 else -1)
        vals = [trace_power_moment(generate_dense_cyclic(spec, s), k) for s in seeds]
        return float(np.mean(vals))

    sweep = [measure(p) for p in _SWEEP_GRID]
    magnitudes = [abs(v) for v in sweep]
    noise = 3.0 / np.sqrt(len(seeds) * n)
    if any(b < a - noise for a, b in zip(magnitudes, magnitudes[1:])):
        raise CalibrationError(
            f"response is not monotone over the probability sweep: {sweep}",
            achievable=(min(sweep), max(sweep)),
        )
    target = abs(target_rho)
    if target > magnitudes[-1] * (1 + tolerance) + noise:
        raise CalibrationError(
            f"target {target_rho} outside achievable range",
            achievable=(sweep[0], sweep[-1]),
        )
    hi_idx = next(
        (i for i, v in enumerate(magnitudes) if i >= 1 and v + noise >= target),
        len(_SWEEP_GRID) - 1,
    )
    lo = _SWEEP_GRID[hi_idx - 1]
    hi = _SWEEP_GRID[hi_idx]
    best_p, best_gap = hi, abs(magnitudes[hi_idx] - target)
    for _ in range(max_probes):
        if best_gap <= tolerance * target:
            break
        mid = 0.5 * (lo + hi)
        value = abs(measure(mid))
        if abs(value - target) < best_gap:
            best_p, best_gap = mid, abs(value - target)
        if value < target:
            lo = mid
        else:
            hi = mid
    if best_gap > tolerance * target:
        raise CalibrationError(
            f"calibration did not converge: best gap {best_gap:.4f} at p={best_p:.4f}",
            achievable=(sweep[0], sweep[-1]),
        )
    return best_p
