"""Retarded charge equations, integrated by the method of steps.

With ``H = A^-1 B`` the charges obey

    zeta'(t) = 4 pi [ f(t) + g(t) - H zeta(t) ],
    f_j(t)   = phi_f(t, y_j),
    g_j(t)   = sum_{k != j} theta(t - d_jk) G_jk zeta_k(t - d_jk),

with ``zeta = 0`` for negative times.  Classical RK4 with a fixed step no
larger than the smallest delay; delayed values come from the cubic Hermite
interpolant of the already completed history.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bc_algebra import FOUR_PI, InteractionConfig, hermitian_part, is_invertible, validate_pair
from .free_wave import ForcingTrace, _step_count


class UnsupportedPencil(ValueError):
    """Raised for singular ``A``: the system is then differential-algebraic."""


class StepSizeError(ValueError):
    pass


def _hermite(values, derivs, h, count, s):
    """Cubic Hermite interpolation on nodes ``0, h, ..., (count-1) h``; zero for ``s < 0``."""
    s = np.asarray(s, dtype=float)
    n = values.shape[1]
    out = np.zeros(s.shape + (n,), dtype=complex)
    live = s >= 0
    if not live.any():
        return out
    sl = s[live]
    x = sl / h
    i = np.clip(np.floor(x).astype(int), 0, max(count - 2, 0))
    if count == 1:
        out[live] = values[0]
        return out
    u = (x - i)[:, None]
    u2, u3 = u * u, u * u * u
    h00 = 2 * u3 - 3 * u2 + 1
    h10 = u3 - 2 * u2 + u
    h01 = -2 * u3 + 3 * u2
    h11 = u3 - u2
    out[live] = (h00 * values[i] + h10 * h * derivs[i]
                 + h01 * values[i + 1] + h11 * h * derivs[i + 1])
    return out


def _hermite_derivative(values, derivs, h, count, s):
    s = np.asarray(s, dtype=float)
    n = values.shape[1]
    out = np.zeros(s.shape + (n,), dtype=complex)
    live = s >= 0
    if not live.any() or count < 2:
        return out
    x = s[live] / h
    i = np.clip(np.floor(x).astype(int), 0, count - 2)
    u = (x - i)[:, None]
    u2 = u * u
    d00 = (6 * u2 - 6 * u) / h
    d10 = 3 * u2 - 4 * u + 1
    d01 = (-6 * u2 + 6 * u) / h
    d11 = 3 * u2 - 2 * u
    out[live] = (d00 * values[i] + d10 * derivs[i]
                 + d01 * values[i + 1] + d11 * derivs[i + 1])
    return out


@dataclass(frozen=True)
class ChargeHistory:
    step: float
    values: np.ndarray   # (N + 1, n)
    derivs: np.ndarray   # (N + 1, n)

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(self.values.shape[0])

    @property
    def horizon(self) -> float:
        return self.step * (self.values.shape[0] - 1)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def _check(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s > self.horizon * (1 + 1e-12) + 1e-12):
            raise ValueError(f"charge history queried beyond its horizon {self.horizon}")
        return s

    def zeta(self, s) -> np.ndarray:
        """Charges at time(s) ``s``, shape ``s.shape + (n,)``; zero for ``s < 0``."""
        s = self._check(s)
        out = _hermite(self.values, self.derivs, self.step, self.values.shape[0], s)
        on_node = (s >= 0) & (np.abs(s / self.step - np.rint(s / self.step)) <= 1e-12)
        if np.any(on_node):
            out[on_node] = self.values[np.rint(s[on_node] / self.step).astype(int)]
        return out

    def zeta_dot(self, s) -> np.ndarray:
        s = self._check(s)
        out = _hermite_derivative(self.values, self.derivs, self.step, self.values.shape[0], s)
        on_node = (s >= 0) & (np.abs(s / self.step - np.rint(s / self.step)) <= 1e-12)
        if np.any(on_node):
            out[on_node] = self.derivs[np.rint(s[on_node] / self.step).astype(int)]
        return out


def default_step(config: InteractionConfig) -> float:
    h = 0.01
    if config.n >= 2:
        d = config.distance_matrix[~np.eye(config.n, dtype=bool)]
        h = min(h, float(d.min()) / 4)
    return h


def min_delay(config: InteractionConfig) -> float:
    if config.n < 2:
        return np.inf
    return float(config.distance_matrix[~np.eye(config.n, dtype=bool)].min())


def solve_charges(config: InteractionConfig, forcing: ForcingTrace, T: float, h: float) -> ChargeHistory:
    report = validate_pair(config)
    if not report.ok:
        c = report.first_failure()
        raise ValueError(f"invalid boundary pair: {c.name} check failed ({c.message})")
    if not is_invertible(config.A):
        raise UnsupportedPencil(
            "A is not invertible: the charge equations are differential-algebraic; "
            "the regular-pencil reduction is not supported")
    if h > min_delay(config):
        raise StepSizeError(f"step {h} exceeds the smallest delay {min_delay(config)}")
    if abs(forcing.step - h) > 1e-15 * max(1.0, h):
        raise StepSizeError(f"forcing trace was tabulated for step {forcing.step}, not {h}")
    N = _step_count(T, h)
    if 2 * N > forcing.values.shape[0] - 1:
        raise ValueError(f"forcing trace ends at {forcing.horizon} < T = {T}")

    n = config.n
    H = hermitian_part(config)
    G = config.green_matrix
    D = config.distance_matrix
    off = ~np.eye(n, dtype=bool)
    rows, cols = np.nonzero(off)
    g_coef = G[rows, cols]
    delays = D[rows, cols]

    values = np.zeros((N + 1, n), dtype=complex)
    derivs = np.zeros((N + 1, n), dtype=complex)

    def rhs(t, z, m, done):
        # m: forcing node on the half-step grid; done: completed history nodes
        g = np.zeros(n, dtype=complex)
        if rows.size:
            lagged = _hermite(values, derivs, h, done, t - delays)
            contrib = g_coef * lagged[np.arange(rows.size), cols]
            np.add.at(g, rows, contrib)
        return FOUR_PI * (forcing.values[m] + g - H @ z)

    derivs[0] = rhs(0.0, values[0], 0, 1)
    for i in range(N):
        t = i * h
        z = values[i]
        k1 = derivs[i]
        k2 = rhs(t + 0.5 * h, z + 0.5 * h * k1, 2 * i + 1, i + 1)
        k3 = rhs(t + 0.5 * h, z + 0.5 * h * k2, 2 * i + 1, i + 1)
        k4 = rhs(t + h, z + h * k3, 2 * i + 2, i + 1)
        values[i + 1] = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        derivs[i + 1] = rhs(t + h, values[i + 1], 2 * i + 2, i + 2)
    values.setflags(write=False)
    derivs.setflags(write=False)
    return ChargeHistory(h, values, derivs)


def activation_times(history: ChargeHistory, delta: float) -> np.ndarray:
    """First node time with ``|zeta_k| > delta``, ``inf`` if never."""
    if not delta > 0:
        raise ValueError("activation threshold must be positive")
    above = np.abs(history.values) > delta
    out = np.full(history.n, np.inf)
    hit = above.any(axis=0)
    out[hit] = history.times[np.argmax(above[:, hit], axis=0)]
    return out


def default_activation_threshold(forcing: ForcingTrace) -> float:
    """``1e-7`` times the peak free-wave amplitude at the points, floored at ``1e-12``."""
    peak = float(np.abs(forcing.values).max()) if forcing.values.size else 0.0
    return max(1e-7 * peak, 1e-12)


def bc_residual(config: InteractionConfig, history: ChargeHistory, forcing: ForcingTrace) -> float:
    """Largest defect of ``A phi_r = B phi_s`` along the dense trajectory.

    Boundary values are rebuilt from the Hermite interpolant at the midpoints
    of the integration steps (at the nodes the defect vanishes by
    construction, since the stored derivative is the right-hand side).
    """
    n = config.n
    if n == 0 or history.values.shape[0] < 2:
        return 0.0
    h = history.step
    t = h * (np.arange(history.values.shape[0] - 1) + 0.5)
    z = history.zeta(t)
    zd = history.zeta_dot(t)
    f = forcing.at(t)
    g = np.zeros_like(z)
    D, G = config.distance_matrix, config.green_matrix
    for j in range(n):
        for k in range(n):
            if j != k:
                g[:, j] += G[j, k] * history.zeta(t - D[j, k])[:, k]
    regular = f + g - zd / FOUR_PI
    defect = regular @ config.A.T - z @ config.B.T
    return float(np.linalg.norm(defect, axis=1).max())
