"""Full solution field, boundary values and support measurements.

The field is the free wave plus retarded spherical waves sent out by the
charges,

    phi(t, x) = phi_f(t, x) + sum_j theta(t - d_j(x)) zeta_j(t - d_j(x)) / (4 pi d_j(x)).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial import QhullError

from .bc_algebra import FOUR_PI, BoundaryVector, InteractionConfig
from .charges import (ChargeHistory, activation_times, default_activation_threshold,
                      default_step, solve_charges)
from .free_wave import (DEFAULT_RULE, InitialData, SphereRule, check_admissible,
                        forcing_trace, kirchhoff_field)

log = logging.getLogger(__name__)


class SingularPointError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


def field_values(config: InteractionConfig, data: InitialData, history: Optional[ChargeHistory],
                 t: float, X, rule: SphereRule = DEFAULT_RULE) -> np.ndarray:
    """Solution at many points (no proximity check)."""
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    out = kirchhoff_field(data, t, X, rule)
    for j in range(config.n):
        dj = np.linalg.norm(X - config.points[j], axis=1)
        lag = t - dj
        live = lag >= 0
        if live.any():
            out[live] += history.zeta(lag[live])[:, j] / (FOUR_PI * dj[live])
    return out


def eval_solution(config: InteractionConfig, data: InitialData, history: Optional[ChargeHistory],
                  t: float, x, exclusion_radius: float = 0.1,
                  rule: SphereRule = DEFAULT_RULE) -> complex:
    if t < 0:
        raise ValueError("eval_solution requires t >= 0")
    x = np.asarray(x, dtype=float)
    if config.n:
        d = np.linalg.norm(config.points - x, axis=1)
        j = int(np.argmin(d))
        if d[j] <= exclusion_radius:
            raise SingularPointError(
                f"x is within {exclusion_radius} of interaction point y_{j + 1}")
    return complex(field_values(config, data, history, t, x[None, :], rule)[0])


def boundary_values(config: InteractionConfig, data: InitialData, history: ChargeHistory,
                    t: float, rule: SphereRule = DEFAULT_RULE) -> BoundaryVector:
    n = config.n
    if n == 0:
        return BoundaryVector(np.zeros(0), np.zeros(0))
    zeta = history.zeta(t)
    zeta_dot = history.zeta_dot(t)
    regular = kirchhoff_field(data, t, config.points, rule) - zeta_dot / FOUR_PI
    for j in range(n):
        for k in range(n):
            if k != j:
                regular[j] += config.green_matrix[j, k] * history.zeta(t - config.distance_matrix[j, k])[k]
    return BoundaryVector(regular, zeta)


def regular_value_limit(config: InteractionConfig, data: InitialData, history: ChargeHistory,
                        t: float, j: int, radii: Sequence[float] = (1e-2, 1e-3, 1e-4),
                        direction=(1.0, 0.0, 0.0), rule: SphereRule = DEFAULT_RULE) -> complex:
    """Extrapolate ``(phi - zeta_j(t) G_j)(x)`` to ``x -> y_j`` along ``direction``.

    Fits a polynomial in the distance through the samples and evaluates it at
    zero (Neville's scheme).
    """
    e = np.asarray(direction, dtype=float)
    e = e / np.linalg.norm(e)
    r = np.asarray(radii, dtype=float)
    X = config.points[j] + r[:, None] * e
    zj = history.zeta(t)[j]
    F = field_values(config, data, history, t, X, rule) - zj / (FOUR_PI * r)
    # Neville at 0
    P = F.astype(complex).copy()
    m = len(r)
    for level in range(1, m):
        for i in range(m - level):
            P[i] = (r[i + level] * P[i] - r[i] * P[i + 1]) / (r[i + level] - r[i])
    return complex(P[0])


# --------------------------------------------------------------------------
# sampling grids and snapshots


@dataclass(frozen=True)
class GridSpec:
    spacing: float = 0.25
    margin: Optional[float] = None   # None: the time horizon
    shell_radii: tuple = (0.2, 0.4, 0.6, 0.8, 1.0)
    shell_points: int = 128
    exclusion: float = 0.1


def _fibonacci_sphere(m: int) -> np.ndarray:
    k = np.arange(m) + 0.5
    z = 1.0 - 2.0 * k / m
    phi = np.pi * (1.0 + 5 ** 0.5) * k
    s = np.sqrt(1.0 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


@dataclass(frozen=True)
class SampleGrid:
    points: np.ndarray
    excluded: np.ndarray
    spacing: float


def build_grid(config: InteractionConfig, data: InitialData, spec: GridSpec, T: float) -> SampleGrid:
    margin = T if spec.margin is None else spec.margin
    lo, hi = [], []
    for b in data.bumps:
        c = np.array(b.center)
        lo.append(c - b.radius)
        hi.append(c + b.radius)
    for y in config.points:
        lo.append(y)
        hi.append(y)
    if not lo:
        lo, hi = [np.zeros(3)], [np.zeros(3)]
    lo = np.min(lo, axis=0) - margin
    hi = np.max(hi, axis=0) + margin
    axes = [lo[a] + spec.spacing * np.arange(int(np.floor((hi[a] - lo[a]) / spec.spacing + 1e-9)) + 1)
            for a in range(3)]
    box = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    parts = [box]
    if config.n and spec.shell_radii:
        dirs = _fibonacci_sphere(spec.shell_points)
        for y in config.points:
            for r in spec.shell_radii:
                parts.append(y + r * dirs)
    pts = np.concatenate(parts)
    excluded = np.zeros(pts.shape[0], dtype=bool)
    for y in config.points:
        excluded |= np.linalg.norm(pts - y, axis=1) <= spec.exclusion
    return SampleGrid(pts, excluded, spec.spacing)


@dataclass(frozen=True)
class FieldSnapshot:
    t: float
    points: np.ndarray
    values: np.ndarray
    excluded: np.ndarray
    spacing: float


def snapshot(config: InteractionConfig, data: InitialData, history: Optional[ChargeHistory],
             t: float, grid: SampleGrid, rule: SphereRule = DEFAULT_RULE) -> FieldSnapshot:
    vals = np.zeros(grid.points.shape[0], dtype=complex)
    keep = ~grid.excluded
    vals[keep] = field_values(config, data, history, t, grid.points[keep], rule)
    return FieldSnapshot(t, grid.points, vals, grid.excluded, grid.spacing)


def _max_pairwise(P: np.ndarray, chunk: int = 2048) -> float:
    best = 0.0
    for i in range(0, P.shape[0], chunk):
        block = P[i:i + chunk]
        d2 = np.sum(block ** 2, 1)[:, None] + np.sum(P ** 2, 1)[None, :] - 2.0 * block @ P.T
        best = max(best, float(d2.max()))
    return float(np.sqrt(max(best, 0.0)))


def point_set_diameter(P: np.ndarray) -> float:
    if P.shape[0] < 2:
        return 0.0
    if P.shape[0] > 4000:
        try:
            P = P[ConvexHull(P).vertices]
        except QhullError:
            # flat or collinear sets: joggled hull, original coordinates
            P = P[ConvexHull(P, qhull_options="QJ").vertices]
    return _max_pairwise(P)


def support_diameter(snap: FieldSnapshot, eps: float) -> float:
    if not eps > 0:
        raise ValueError("support threshold must be positive")
    mask = (~snap.excluded) & (np.abs(snap.values) > eps)
    return point_set_diameter(snap.points[mask])


# --------------------------------------------------------------------------
# finite speed of propagation experiment


@dataclass
class PropagationReport:
    name: str
    times: list
    diameters: list
    bounds: list
    activation_times: list
    support_threshold: float
    activation_threshold: float
    slack: float
    initial_diameter: float
    verdict: str
    violation: Optional[dict] = None
    metadata: dict = field(default_factory=dict)

    @property
    def respected(self) -> bool:
        return self.verdict == "bound-respected"

    def to_dict(self) -> dict:
        return {
            "scenario": self.name,
            "verdict": self.verdict,
            "violation": self.violation,
            "initial_support_diameter": self.initial_diameter,
            "support_threshold": self.support_threshold,
            "activation_threshold": self.activation_threshold,
            "slack": self.slack,
            "samples": [{"t": t, "diameter": d, "bound": b}
                        for t, d, b in zip(self.times, self.diameters, self.bounds)],
            "activation_times": [None if not np.isfinite(a) else a for a in self.activation_times],
            "metadata": self.metadata,
        }


def check_separation(config: InteractionConfig, data: InitialData) -> int:
    """Index of the unique interaction point nearest to the support (-1 if ``n == 0``)."""
    if config.n == 0:
        return -1
    d = np.array([data.distance_to_support(y) for y in config.points])
    order = np.argsort(d, kind="stable")
    if not np.isfinite(d[order[0]]):
        raise PreconditionError("initial data are empty; nothing reaches the interaction points")
    if config.n > 1 and not d[order[0]] < d[order[1]]:
        raise PreconditionError(
            "the initial support must be strictly closer to one interaction point than to all others "
            f"(distances {np.round(d, 12).tolist()})")
    return int(order[0])


def default_snapshot_times(tau: np.ndarray, T: float) -> list:
    finite = tau[np.isfinite(tau)]
    if finite.size == 0:
        times = list(np.arange(0.0, T + 1e-9, 1.0))
    else:
        t1 = float(finite.min())
        times = [0.0, t1 + 0.5] + list(t1 + 1.5 + np.arange(0.0, T, 1.0))
    times = sorted({round(float(t), 12) for t in times if t <= T + 1e-9})
    return times


@dataclass
class Simulation:
    config: InteractionConfig
    data: InitialData
    history: ChargeHistory
    forcing: object
    T: float
    h: float


def simulate(config: InteractionConfig, data: InitialData, T: float, h: Optional[float] = None,
             rule: SphereRule = DEFAULT_RULE) -> Simulation:
    check_admissible(data, config)
    h = default_step(config) if h is None else h
    trace = forcing_trace(data, config, T, h, rule)
    history = solve_charges(config, trace, T, h)
    return Simulation(config, data, history, trace, T, h)


def propagation_experiment(config: InteractionConfig, data: InitialData, T: float,
                           h: Optional[float] = None, grid: GridSpec = GridSpec(),
                           snapshot_times: Optional[Sequence[float]] = None,
                           rule: SphereRule = DEFAULT_RULE, name: str = "scenario",
                           sim: Optional[Simulation] = None,
                           support_threshold: Optional[float] = None,
                           activation_threshold: Optional[float] = None) -> PropagationReport:
    check_admissible(data, config)
    nearest = check_separation(config, data)
    if sim is None:
        sim = simulate(config, data, T, h, rule)
    h = sim.h
    delta = activation_threshold or default_activation_threshold(sim.forcing)
    tau = activation_times(sim.history, delta)
    times = list(snapshot_times) if snapshot_times is not None else default_snapshot_times(tau, T)
    if 0.0 not in times:
        times = [0.0] + times
    times = sorted(times)

    samples = build_grid(config, data, grid, T)
    diam0 = data.support_diameter()
    slack = grid.spacing + 2 * h
    eps = support_threshold
    diameters, bounds = [], []
    violation = None
    for t in times:
        snap = snapshot(config, data, sim.history, t, samples, rule)
        if eps is None:
            peak = float(np.abs(snap.values).max()) if snap.values.size else 0.0
            eps = max(1e-6 * peak, 1e-12)
        diam = support_diameter(snap, eps)
        bound = 2 * t + diam0
        diameters.append(diam)
        bounds.append(bound)
        log.info("t=%.4f diameter=%.4f bound=%.4f", t, diam, bound)
        if violation is None and diam > bound + slack:
            violation = {"t": t, "diameter": diam, "bound": bound}
    verdict = "bound-respected" if violation is None else "bound-violated"
    meta = {"n": config.n, "T": T, "h": h, "grid_spacing": grid.spacing,
            "nearest_point": nearest + 1 if nearest >= 0 else None}
    return PropagationReport(name, times, diameters, bounds, tau.tolist(), eps, delta, slack,
                             diam0, verdict, violation, meta)
