"""Compactly supported initial data and the free wave in R^3.

Initial data are finite sums of polynomial bumps ``a (1 - |x-c|^2/R^2)^4``.
The free wave is evaluated with Kirchhoff's spherical-means formula,

    phi_f(t, x) = mean_{|y-x|=t} [phi0(y) + grad phi0(y).(y-x) + t phi1(y)],

using a product rule (Gauss-Legendre in cos(theta) times uniform azimuth)
laid out separately for every bump: the polar axis points from ``x`` to the
bump centre and the polar interval is cut to the cap of the sphere that lies
inside the ball.  On that cap the integrand is a polynomial in cos(theta),
so the rule is exact up to rounding once the polar order exceeds the degree.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numba

numba.config.THREADING_LAYER = "omp"
import numpy as np
import scipy.integrate

from .bc_algebra import InteractionConfig

EXPONENT = 4


@dataclass(frozen=True)
class BumpProfile:
    center: tuple
    radius: float
    amplitude: complex = 1.0

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        if len(c) != 3:
            raise ValueError(f"bump center must be a 3-vector, got {self.center!r}")
        if not self.radius > 0:
            raise ValueError(f"bump radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def profile(self, s):
        """Radial profile ``a (1 - s^2/R^2)^4`` for ``s >= 0`` (zero outside)."""
        s = np.asarray(s, dtype=float)
        q = np.clip(1.0 - (s / self.radius) ** 2, 0.0, None)
        return self.amplitude * q ** EXPONENT


@dataclass(frozen=True)
class InitialData:
    position_bumps: tuple = ()
    velocity_bumps: tuple = ()
    charges0: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "position_bumps", tuple(self.position_bumps))
        object.__setattr__(self, "velocity_bumps", tuple(self.velocity_bumps))
        object.__setattr__(self, "charges0", tuple(complex(z) for z in self.charges0))

    @property
    def bumps(self) -> tuple:
        return self.position_bumps + self.velocity_bumps

    def reflected(self) -> "InitialData":
        """Data whose forward evolution equals the backward evolution of ``self``."""
        flipped = tuple(BumpProfile(b.center, b.radius, -b.amplitude) for b in self.velocity_bumps)
        return InitialData(self.position_bumps, flipped, self.charges0)

    def support_diameter(self) -> float:
        balls = self.bumps
        if not balls:
            return 0.0
        c = np.array([b.center for b in balls])
        r = np.array([b.radius for b in balls])
        d = np.linalg.norm(c[:, None] - c[None, :], axis=-1) + r[:, None] + r[None, :]
        return float(d.max())

    def distance_to_support(self, y) -> float:
        """``dist(y, S0)``; ``inf`` for empty data."""
        y = np.asarray(y, dtype=float)
        if not self.bumps:
            return np.inf
        return float(min(max(np.linalg.norm(y - np.array(b.center)) - b.radius, 0.0)
                         for b in self.bumps))

    @cached_property
    def _packed(self):
        bumps = self.bumps
        centers = np.array([b.center for b in bumps], dtype=float).reshape(-1, 3)
        radii = np.array([b.radius for b in bumps], dtype=float)
        amps = np.array([b.amplitude for b in bumps], dtype=complex)
        kinds = np.array([0] * len(self.position_bumps) + [1] * len(self.velocity_bumps), dtype=np.int64)
        return centers, radii, amps, kinds


class InadmissibleData(ValueError):
    pass


def admissibility_problems(data: InitialData, config: InteractionConfig, tol: float = 1e-12) -> list:
    """Reasons the data cannot be simulated with zero initial charges (empty if fine)."""
    problems = []
    if any(z != 0 for z in data.charges0):
        problems.append("nonzero initial charges are not supported")
    for j, y in enumerate(config.points):
        for b in data.bumps:
            if np.linalg.norm(y - np.array(b.center)) < b.radius:
                problems.append(f"point y_{j + 1} lies inside the bump centred at {b.center}")
    if config.n:
        phi0 = initial_value(data, config.points)
        if np.linalg.norm(config.A @ phi0) > tol:
            problems.append("A phi0(Y) != 0")
    return problems


def check_admissible(data: InitialData, config: InteractionConfig) -> None:
    problems = admissibility_problems(data, config)
    if problems:
        raise InadmissibleData("; ".join(problems))


# --------------------------------------------------------------------------
# initial data


def eval_initial(data: InitialData, x):
    """Value and gradient of ``phi0`` at a single point."""
    x = np.asarray(x, dtype=float)
    value = 0j
    grad = np.zeros(3, dtype=complex)
    for b in data.position_bumps:
        d = x - np.array(b.center)
        q = 1.0 - d @ d / b.radius ** 2
        if q > 0:
            value += b.amplitude * q ** 4
            grad += b.amplitude * (-8.0 / b.radius ** 2) * q ** 3 * d
    return value, grad


def initial_value(data: InitialData, X) -> np.ndarray:
    """``phi0`` at many points, shape ``(P,)``."""
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    out = np.zeros(X.shape[0], dtype=complex)
    for b in data.position_bumps:
        q = 1.0 - np.sum((X - np.array(b.center)) ** 2, axis=1) / b.radius ** 2
        np.maximum(q, 0.0, out=q)
        out += b.amplitude * q ** 4
    return out


# --------------------------------------------------------------------------
# Kirchhoff formula


@dataclass(frozen=True)
class SphereRule:
    polar: int = 24
    azimuth: int = 48

    @cached_property
    def nodes(self):
        mu, w = np.polynomial.legendre.leggauss(self.polar)
        phi = 2.0 * np.pi * np.arange(self.azimuth) / self.azimuth
        return mu, w, np.cos(phi), np.sin(phi)


DEFAULT_RULE = SphereRule()


@numba.njit(parallel=True, cache=True)
def _spherical_means(T, X, centers, radii, kinds, mu, w, cphi, sphi):
    # out[p, b]: Kirchhoff contribution of unit-amplitude bump b at (T[p], X[p])
    P = X.shape[0]
    nb = centers.shape[0]
    K = cphi.shape[0]
    out = np.zeros((P, nb))
    for p in numba.prange(P):
        t = T[p]
        for b in range(nb):
            R = radii[b]
            d0 = centers[b, 0] - X[p, 0]
            d1 = centers[b, 1] - X[p, 1]
            d2 = centers[b, 2] - X[p, 2]
            rho = np.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
            if rho == 0.0:
                if t >= R:
                    continue
                mu0 = -1.0
                e0, e1, e2 = 0.0, 0.0, 1.0
            else:
                mu0 = (rho * rho + t * t - R * R) / (2.0 * rho * t)
                if mu0 >= 1.0:
                    continue
                if mu0 < -1.0:
                    mu0 = -1.0
                e0, e1, e2 = d0 / rho, d1 / rho, d2 / rho
            # orthonormal frame (u, v) perpendicular to e
            if abs(e0) < 0.9:
                a0, a1, a2 = 1.0, 0.0, 0.0
            else:
                a0, a1, a2 = 0.0, 1.0, 0.0
            dot = a0 * e0 + a1 * e1 + a2 * e2
            u0, u1, u2 = a0 - dot * e0, a1 - dot * e1, a2 - dot * e2
            un = np.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
            u0, u1, u2 = u0 / un, u1 / un, u2 / un
            v0 = e1 * u2 - e2 * u1
            v1 = e2 * u0 - e0 * u2
            v2 = e0 * u1 - e1 * u0

            half = 0.5 * (1.0 - mu0)
            mid = 0.5 * (1.0 + mu0)
            inv_r2 = 1.0 / (R * R)
            acc = 0.0
            for i in range(mu.shape[0]):
                c = mid + half * mu[i]
                s = np.sqrt(max(0.0, 1.0 - c * c))
                wi = half * w[i]
                for k in range(K):
                    o0 = c * e0 + s * (cphi[k] * u0 + sphi[k] * v0)
                    o1 = c * e1 + s * (cphi[k] * u1 + sphi[k] * v1)
                    o2 = c * e2 + s * (cphi[k] * u2 + sphi[k] * v2)
                    # y - center = t*omega - (center - x)
                    g0 = t * o0 - d0
                    g1 = t * o1 - d1
                    g2 = t * o2 - d2
                    q = 1.0 - (g0 * g0 + g1 * g1 + g2 * g2) * inv_r2
                    if q <= 0.0:
                        continue
                    q3 = q * q * q
                    if kinds[b] == 0:
                        radial = g0 * o0 + g1 * o1 + g2 * o2
                        val = q3 * q - 8.0 * inv_r2 * q3 * t * radial
                    else:
                        val = t * q3 * q
                    acc += wi * val
            out[p, b] = acc / (2.0 * K)
    return out


def kirchhoff_field(data: InitialData, t, X, rule: SphereRule = DEFAULT_RULE) -> np.ndarray:
    """Free wave at points ``X`` (shape ``(P, 3)``) and times ``t`` (scalar or ``(P,)``)."""
    X = np.ascontiguousarray(np.asarray(X, dtype=float).reshape(-1, 3))
    T = np.broadcast_to(np.asarray(t, dtype=float), (X.shape[0],)).copy()
    if np.any(T < 0):
        raise ValueError("Kirchhoff evaluation requires t >= 0; reflect the data for negative times")
    out = np.zeros(X.shape[0], dtype=complex)
    if not data.bumps or X.shape[0] == 0:
        return out
    at_zero = T == 0.0
    if at_zero.any():
        out[at_zero] = initial_value(data, X[at_zero])
    live = ~at_zero
    if live.any():
        centers, radii, amps, kinds = data._packed
        mu, w, cphi, sphi = rule.nodes
        means = _spherical_means(T[live], X[live], centers, radii, kinds, mu, w, cphi, sphi)
        out[live] = means @ amps
    return out


def kirchhoff_eval(data: InitialData, t: float, x, rule: SphereRule = DEFAULT_RULE) -> complex:
    if t < 0:
        raise ValueError("Kirchhoff evaluation requires t >= 0; reflect the data for negative times")
    return complex(kirchhoff_field(data, t, np.asarray(x, dtype=float)[None, :], rule)[0])


def radial_oracle(profile: BumpProfile, t: float, r: float, velocity: bool = False) -> complex:
    """Free wave of a single bump centred at the origin, at distance ``r``.

    Position data use d'Alembert's formula for ``r * phi``; velocity data are
    integrated with adaptive quadrature.  Independent of the spherical rule.
    """
    p = profile.profile
    R = profile.radius
    if t == 0:
        return 0j if velocity else complex(p(r))
    if velocity:
        if r == 0:
            return complex(t * p(t))
        lo, hi = abs(r - t), r + t
        hi_eff = min(hi, R)
        if lo >= hi_eff:
            return 0j
        amp = profile.amplitude
        unit = BumpProfile((0, 0, 0), R, 1.0)
        val, _ = scipy.integrate.quad(lambda s: s * float(unit.profile(s).real), lo, hi_eff,
                                      epsabs=1e-14, epsrel=1e-13, limit=200)
        return complex(amp * val / (2.0 * r))
    if r == 0:
        # d/dt (t p(t)) = p(t) + t p'(t)
        q = 1.0 - (t / R) ** 2
        if q <= 0:
            return 0j
        dp = profile.amplitude * 4 * q ** 3 * (-2.0 * t / R ** 2)
        return complex(p(t) + t * dp)
    return complex(((r + t) * p(r + t) + (r - t) * p(abs(r - t))) / (2.0 * r))


# --------------------------------------------------------------------------
# forcing at the interaction points


@dataclass(frozen=True)
class ForcingTrace:
    """``phi_f(t, y_j)`` tabulated on a half-step grid ``t_m = m h / 2``.

    Every Runge-Kutta stage of a step of size ``h`` falls on a node, so the
    integrator reads exact values; other times use local cubic interpolation
    through the four surrounding nodes.
    """
    step: float
    values: np.ndarray  # shape (2 N + 1, n)

    @property
    def dt(self) -> float:
        return 0.5 * self.step

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.shape[0])

    @property
    def horizon(self) -> float:
        return self.dt * (self.values.shape[0] - 1)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def node(self, m: int) -> np.ndarray:
        return self.values[m]

    def at(self, t) -> np.ndarray:
        """Interpolated forcing; returns shape ``t.shape + (n,)``."""
        t = np.asarray(t, dtype=float)
        x = t / self.dt
        M = self.values.shape[0] - 1
        if np.any(x < -1e-9) or np.any(x > M + 1e-9):
            raise ValueError(f"forcing requested outside [0, {self.horizon}]")
        nearest = np.clip(np.rint(x).astype(int), 0, M)
        if M < 3:
            return self.values[nearest]
        base = np.clip(np.floor(x).astype(int) - 1, 0, M - 3)
        s = x - base
        out = np.zeros(t.shape + (self.n,), dtype=complex)
        for a in range(4):
            L = np.ones_like(s)
            for b in range(4):
                if b != a:
                    L = L * (s - b) / (a - b)
            out += L[..., None] * self.values[base + a]
        on_node = np.abs(x - nearest) <= 1e-12
        out[on_node] = self.values[nearest[on_node]]
        return out

    @classmethod
    def from_function(cls, fn, n: int, T: float, h: float) -> "ForcingTrace":
        """Tabulate an arbitrary callable ``fn(t) -> (n,)``; used for manufactured solutions."""
        M = 2 * _step_count(T, h)
        times = 0.5 * h * np.arange(M + 1)
        vals = np.array([np.asarray(fn(t), dtype=complex).reshape(n) for t in times]).reshape(M + 1, n)
        return cls(h, vals)


def _step_count(T: float, h: float) -> int:
    if not (T > 0 and h > 0):
        raise ValueError(f"need T > 0 and h > 0, got T={T}, h={h}")
    N = int(round(T / h))
    if abs(N * h - T) > 1e-9 * max(1.0, T):
        N = int(np.ceil(T / h))
    return N


def forcing_trace(data: InitialData, config: InteractionConfig, T: float, h: float,
                  rule: SphereRule = DEFAULT_RULE) -> ForcingTrace:
    n = config.n
    M = 2 * _step_count(T, h)
    times = 0.5 * h * np.arange(M + 1)
    if n == 0:
        return ForcingTrace(h, np.zeros((M + 1, 0), dtype=complex))
    tt = np.repeat(times, n)
    XX = np.tile(config.points, (M + 1, 1))
    vals = kirchhoff_field(data, tt, XX, rule).reshape(M + 1, n)
    return ForcingTrace(h, vals)
