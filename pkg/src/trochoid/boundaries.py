"""Predicted spectral support boundaries.

Dense ensembles with a single correlation order k and strength rho trace the
hypotrochoid z(phi) = exp(-i phi) + rho * exp(i (k-1) phi); several orders at
once give the polytrochoid generalization with one term per order.  Sparse
cyclic digraphs obey the same family after solving a scalar depth equation
for the parameter t; two competing cycle species require a three-unknown
continuation in the sweep angle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuationError, InvalidSpecError

MIN_CURVE_SAMPLES = 512


@dataclass(frozen=True)
class HypotrochoidParams:
    """Single correlation order k with signed strength rho."""

    k: int
    rho: float

    def __post_init__(self):
        if self.k < 2:
            raise InvalidSpecError(f"order must be >= 2, got {self.k}")


@dataclass(frozen=True)
class PolytrochoidParams:
    """Several correlation orders: mapping k -> rho_k."""

    terms: dict[int, float]

    def __post_init__(self):
        if not self.terms:
            raise InvalidSpecError("at least one correlation term is required")
        for k in self.terms:
            if k < 2:
                raise InvalidSpecError(f"order must be >= 2, got {k}")


@dataclass(frozen=True)
class SparseCyclicParams:
    """Cyclic digraph law: biased cycle count d_hat, cycle length k, edge weight.

    ``d_hat`` is d - 1 when every node sits in exactly d cycles, and the mean
    membership for the random-assignment ensemble.  The depth parameter t is
    solved on construction and cached.
    """

    d_hat: float
    k: int
    weight: float = 1.0
    t: float = field(init=False)

    def __post_init__(self):
        if self.d_hat <= 0:
            raise InvalidSpecError(f"d_hat must be positive, got {self.d_hat}")
        if self.k < 2:
            raise InvalidSpecError(f"cycle length must be >= 2, got {self.k}")
        object.__setattr__(self, "t", solve_segment_depth(self.d_hat, self.k))


@dataclass(frozen=True)
class MixedCycleParams:
    """Two competing cycle species (d_r, k_r, w_r)."""

    d1: float
    k1: int
    w1: float
    d2: float
    k2: int
    w2: float

    def __post_init__(self):
        for k in (self.k1, self.k2):
            if k < 2:
                raise InvalidSpecError(f"cycle length must be >= 2, got {k}")
        if self.d1 < 0 or self.d2 < 0:
            raise InvalidSpecError("cycle counts must be nonnegative")
        if self.d1 + self.d2 <= 0:
            raise InvalidSpecError("at least one species must be present")


@dataclass
class BoundaryCurve:
    """Sampled closed curve in the complex plane, closed by wrapping."""

    phis: np.ndarray
    z: np.ndarray
    law: object = None

    def __post_init__(self):
        if len(self.phis) < MIN_CURVE_SAMPLES:
            raise InvalidSpecError(
                f"curves carry at least {MIN_CURVE_SAMPLES} samples, got {len(self.phis)}"
            )
        if len(self.phis) != len(self.z):
            raise InvalidSpecError("phi and z sample counts differ")

    def polygon(self) -> np.ndarray:
        """Vertices with the first point appended to close the loop."""
        return np.append(self.z, self.z[0])

    def centroid(self) -> complex:
        return complex(np.mean(self.z))

    def mean_radius(self) -> float:
        return float(np.mean(np.abs(self.z - self.centroid())))


def _sweep(n_samples: int) -> np.ndarray:
    if n_samples < MIN_CURVE_SAMPLES:
        raise InvalidSpecError(f"need at least {MIN_CURVE_SAMPLES} samples, got {n_samples}")
    return np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)


def dense_hypotrochoid(params: HypotrochoidParams, n_samples: int = 1024) -> BoundaryCurve:
    """Boundary for a dense ensemble with one correlation order."""
    phi = _sweep(n_samples)
    z = np.exp(-1j * phi) + params.rho * np.exp(1j * (params.k - 1) * phi)
    return BoundaryCurve(phi, z, params)


def dense_polytrochoid(params: PolytrochoidParams, n_samples: int = 1024) -> BoundaryCurve:
    """Boundary for a dense ensemble with several correlation orders."""
    phi = _sweep(n_samples)
    z = np.exp(-1j * phi).astype(complex)
    for k, rho in sorted(params.terms.items()):
        z += rho * np.exp(1j * (k - 1) * phi)
    return BoundaryCurve(phi, z, params)


def segment_depth_residual(t: float, d_hat: float, k: int) -> float:
    """Residual of the reduced depth condition d_hat * sum_{j=1}^{k-1} t^(2j) - 1."""
    return d_hat * sum(t ** (2 * j) for j in range(1, k)) - 1.0


def solve_segment_depth(d_hat: float, k: int) -> float:
    """Unique root in (0, 1) of d_hat * sum_{j=1}^{k-1} t^(2j) = 1.

    The left side is strictly increasing from 0 to d_hat*(k-1) >= ... on
    t in (0, inf), so bisection brackets the root; Newton steps polish it to
    |residual| < 1e-12.  Equivalent to the degree-2k polynomial
    d_hat*t^(2k) - (d_hat+1)*t^2 + 1 with its spurious t = 1 root factored
    out analytically.
    """
    if d_hat <= 0:
        raise InvalidSpecError(f"d_hat must be positive, got {d_hat}")
    if k < 2:
        raise InvalidSpecError(f"cycle length must be >= 2, got {k}")
    lo, hi = 0.0, 1.0
    while segment_depth_residual(hi, d_hat, k) < 0:
        hi *= 2.0  # d_hat < 1/(k-1) puts the root above 1
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if segment_depth_residual(mid, d_hat, k) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    t = 0.5 * (lo + hi)
    for _ in range(60):
        f = segment_depth_residual(t, d_hat, k)
        if abs(f) < 1e-15:
            break
        df = d_hat * sum(2 * j * t ** (2 * j - 1) for j in range(1, k))
        t -= f / df
    return t


def sparse_hypotrochoid(params: SparseCyclicParams, n_samples: int = 1024) -> BoundaryCurve:
    """Boundary for a digraph built from cycles of a single length."""
    phi = _sweep(n_samples)
    t = params.t
    z = params.weight * (
        np.exp(-1j * phi) / t
        + params.d_hat * t ** (params.k - 1) * np.exp(1j * (params.k - 1) * phi)
    )
    return BoundaryCurve(phi, z, params)


# --- mixed two-species solver -------------------------------------------------


def _sigma(t: float, k: int) -> float:
    return sum(t ** (2 * l) for l in range(1, k))


def _dsigma(t: float, k: int) -> float:
    return sum(2 * l * t ** (2 * l - 1) for l in range(1, k))


def _mixed_residual(params: MixedCycleParams, phi1: float, x: np.ndarray) -> np.ndarray:
    """(condt, Re extracond, Im extracond) at unknowns x = (t1, t2, phi2)."""
    t1, t2, phi2 = x
    p = params
    s1, s2 = _sigma(t1, p.k1), _sigma(t2, p.k2)
    f1 = (1.0 - p.d1 - p.d2) * s1 * s2 - (p.d1 - 1.0) * s1 - (p.d2 - 1.0) * s2 + 1.0
    a1 = (p.w1 / t1) * np.exp(-1j * phi1)
    a2 = (p.w2 / t2) * np.exp(-1j * phi2)
    fc = a1 - a2 - p.w1**p.k1 * a1 ** (1 - p.k1) + p.w2**p.k2 * a2 ** (1 - p.k2)
    return np.array([f1, fc.real, fc.imag])


def _mixed_jacobian(params: MixedCycleParams, phi1: float, x: np.ndarray) -> np.ndarray:
    t1, t2, phi2 = x
    p = params
    s1, s2 = _sigma(t1, p.k1), _sigma(t2, p.k2)
    ds1, ds2 = _dsigma(t1, p.k1), _dsigma(t2, p.k2)
    j = np.zeros((3, 3))
    j[0, 0] = ((1.0 - p.d1 - p.d2) * s2 - (p.d1 - 1.0)) * ds1
    j[0, 1] = ((1.0 - p.d1 - p.d2) * s1 - (p.d2 - 1.0)) * ds2
    a1 = (p.w1 / t1) * np.exp(-1j * phi1)
    a2 = (p.w2 / t2) * np.exp(-1j * phi2)
    g1 = 1.0 + (p.k1 - 1.0) * p.w1**p.k1 * a1 ** (-p.k1)
    g2 = 1.0 + (p.k2 - 1.0) * p.w2**p.k2 * a2 ** (-p.k2)
    dfc_dt1 = g1 * (-(p.w1 / t1**2) * np.exp(-1j * phi1))
    dfc_dt2 = g2 * (p.w2 / t2**2) * np.exp(-1j * phi2)
    dfc_dphi2 = g2 * 1j * a2
    j[1, 0], j[2, 0] = dfc_dt1.real, dfc_dt1.imag
    j[1, 1], j[2, 1] = dfc_dt2.real, dfc_dt2.imag
    j[1, 2], j[2, 2] = dfc_dphi2.real, dfc_dphi2.imag
    return j


_MIXED_TOL = 1e-11
_MIXED_MAX_ITER = 100


def _newton_mixed(
    params: MixedCycleParams, phi1: float, x0: np.ndarray
) -> tuple[np.ndarray, bool]:
    x = x0.copy()
    for _ in range(_MIXED_MAX_ITER):
        f = _mixed_residual(params, phi1, x)
        if np.linalg.norm(f) < _MIXED_TOL:
            return x, True
        try:
            step = np.linalg.solve(_mixed_jacobian(params, phi1, x), f)
        except np.linalg.LinAlgError:
            return x, False
        scale = 1.0
        while scale > 1e-4:
            trial = x - scale * step
            if trial[0] > 0 and trial[1] > 0:
                break
            scale *= 0.5
        else:
            return x, False
        x = x - scale * step
    return x, np.linalg.norm(_mixed_residual(params, phi1, x)) < _MIXED_TOL


def _symmetric_seed(params: MixedCycleParams) -> np.ndarray:
    """Real solve at phi1 = phi2 = 0, seeded from the large-degree limit."""
    p = params
    dbar = np.sqrt(p.d1 * p.w1**2 + p.d2 * p.w2**2)
    x = np.array([abs(p.w1) / dbar, abs(p.w2) / dbar, 0.0])
    x, ok = _newton_mixed(params, 0.0, x)
    if not ok:
        raise ContinuationError("symmetric seed solve failed", last_good_phi=float("nan"))
    return x


def mixed_cycle_solve(
    params: MixedCycleParams, phi1: float, x0: np.ndarray | None = None
) -> tuple[float, float, float]:
    """Solve (t1, t2, phi2) for a given sweep angle phi1.

    Without a warm start the solution is continued from the symmetric real
    solve at phi1 = 0 in small angle steps.
    """
    if x0 is None:
        x = _symmetric_seed(params)
        steps = max(1, int(np.ceil(abs(phi1) / 0.05)))
        for s in range(1, steps + 1):
            target = phi1 * s / steps
            x, ok = _newton_mixed(params, target, x)
            if not ok:
                raise ContinuationError(
                    f"continuation stalled at phi1 = {target:.6f}",
                    last_good_phi=phi1 * (s - 1) / steps,
                )
    else:
        x, ok = _newton_mixed(params, phi1, np.asarray(x0, dtype=float))
        if not ok:
            raise ContinuationError(
                f"solve failed at phi1 = {phi1:.6f}", last_good_phi=float("nan")
            )
    return float(x[0]), float(x[1]), float(x[2])


def _mixed_point(params: MixedCycleParams, phi1: float, x: np.ndarray) -> complex:
    t1, t2, phi2 = x
    p = params
    return (
        p.w1 / (2 * t1) * np.exp(-1j * phi1)
        + p.w2 / (2 * t2) * np.exp(-1j * phi2)
        + (p.d1 - 0.5) * p.w1 * t1 ** (p.k1 - 1) * np.exp(1j * (p.k1 - 1) * phi1)
        + (p.d2 - 0.5) * p.w2 * t2 ** (p.k2 - 1) * np.exp(1j * (p.k2 - 1) * phi2)
    )


def mixed_cycle_boundary(params: MixedCycleParams, n_samples: int = 1024) -> BoundaryCurve:
    """Boundary for two competing cycle species, swept by continuation.

    The sweep advances phi1 in uniform steps, warm-starting each solve from
    the previous angle and halving the step up to 8 times on failure.
    """
    phi = _sweep(n_samples)
    x = _symmetric_seed(params)
    z = np.empty(n_samples, dtype=complex)
    z[0] = _mixed_point(params, 0.0, x)
    for i in range(1, n_samples):
        prev_phi, target = phi[i - 1], phi[i]
        current = prev_phi
        xi = x
        halvings = 0
        while target - current > 1e-12:
            step = min(target - current, (target - prev_phi) / 2**halvings)
            trial, ok = _newton_mixed(params, current + step, xi)
            if ok:
                xi = trial
                current += step
            else:
                halvings += 1
                if halvings > 8:
                    raise ContinuationError(
                        f"continuation stalled at phi1 = {current + step:.6f}",
                        last_good_phi=float(current),
                    )
        x = xi
        z[i] = _mixed_point(params, target, x)
    return BoundaryCurve(phi, z, params)


def mixed_cycle_asymptotic(params: MixedCycleParams, n_samples: int = 1024) -> BoundaryCurve:
    """Large-degree closed form of the two-species boundary."""
    p = params
    dbar = np.sqrt(p.d1 * p.w1**2 + p.d2 * p.w2**2)
    if dbar == 0:
        raise InvalidSpecError("degenerate species: d1*w1^2 + d2*w2^2 must be positive")
    phi = _sweep(n_samples)
    z = dbar * (
        np.exp(-1j * phi)
        + p.d1 * (p.w1 / dbar) ** p.k1 * np.exp(1j * (p.k1 - 1) * phi)
        + p.d2 * (p.w2 / dbar) ** p.k2 * np.exp(1j * (p.k2 - 1) * phi)
    )
    return BoundaryCurve(phi, z, params)


def curve_turning_number(params: HypotrochoidParams, n_samples: int = 65536) -> int:
    """Net turns of the tangent over one sweep; -1 until loops develop."""
    phi = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    vel = -1j * np.exp(-1j * phi) + 1j * params.rho * (params.k - 1) * np.exp(
        1j * (params.k - 1) * phi
    )
    rot = vel / np.roll(vel, 1)
    return int(round(np.angle(rot).sum() / (2.0 * np.pi)))


def has_cusps(params: HypotrochoidParams) -> bool:
    """Whether the hypotrochoid has entered the cusped/looped regime.

    Happens once |rho| * (k - 1) reaches 1: the tangent momentarily vanishes
    at threshold and the curve develops self-intersecting loops beyond it,
    changing the tangent's net turning.
    """
    return curve_turning_number(params) != -1
