"""Scenario files: YAML documents describing one simulation.

Complex numbers are written as ``[re, im]`` pairs.  A matrix is either a
flat row-major list of ``n*n`` pairs or a list of ``n`` rows of pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .bc_algebra import ConfigError, InteractionConfig, build_config
from .charges import default_step, min_delay
from .free_wave import BumpProfile, InitialData, SphereRule
from .wavefield import GridSpec


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str, line: Optional[int] = None):
        where = f"{path}" + (f" (line {line})" if line is not None else "")
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass
class Scenario:
    name: str
    points: np.ndarray
    A: np.ndarray
    B: np.ndarray
    position_bumps: list
    velocity_bumps: list
    charges0: list
    T: float
    h: float
    grid: GridSpec
    quadrature: SphereRule = field(default_factory=SphereRule)
    snapshot_times: Optional[list] = None
    support_threshold: Optional[float] = None
    activation_threshold: Optional[float] = None
    direction: str = "forward"

    @property
    def config(self) -> InteractionConfig:
        return build_config(self.points, self.A, self.B)

    @property
    def initial_data(self) -> InitialData:
        data = InitialData(self.position_bumps, self.velocity_bumps, self.charges0)
        return data.reflected() if self.direction == "backward" else data


# --------------------------------------------------------------------------
# parsing


def _complex(value, path: str) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(float(value[0]), float(value[1]))
    raise ScenarioError(path, f"expected a complex number as [re, im], got {value!r}")


def _matrix(value, n: int, path: str) -> np.ndarray:
    if not isinstance(value, list):
        raise ScenarioError(path, "expected a matrix (list of [re, im] pairs)")
    if n == 0:
        if value:
            raise ScenarioError(path, "matrix must be empty when there are no points")
        return np.zeros((0, 0), dtype=complex)
    nested = bool(value) and isinstance(value[0], list) and value[0] and isinstance(value[0][0], list)
    if nested:
        if len(value) != n:
            raise ScenarioError(path, f"expected {n} rows, got {len(value)}")
        rows = []
        for i, row in enumerate(value):
            if not isinstance(row, list) or len(row) != n:
                raise ScenarioError(f"{path}[{i}]", f"expected a row of {n} entries")
            rows.append([_complex(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
        return np.array(rows, dtype=complex)
    if len(value) != n * n:
        raise ScenarioError(path, f"expected {n * n} row-major entries for a {n}x{n} matrix, got {len(value)}")
    return np.array([_complex(v, f"{path}[{k}]") for k, v in enumerate(value)], dtype=complex).reshape(n, n)


def _float(value, path: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    value = float(value)
    if positive and not value > 0:
        raise ScenarioError(path, f"must be positive, got {value}")
    return value


def _vector(value, path: str) -> tuple:
    if not isinstance(value, list) or len(value) != 3:
        raise ScenarioError(path, f"expected a 3-vector, got {value!r}")
    return tuple(_float(v, f"{path}[{i}]") for i, v in enumerate(value))


def _bumps(items, path: str) -> list:
    if items is None:
        return []
    if not isinstance(items, list):
        raise ScenarioError(path, "expected a list of bumps")
    out = []
    for k, item in enumerate(items):
        p = f"{path}[{k}]"
        if not isinstance(item, dict):
            raise ScenarioError(p, "expected a mapping with center, radius, amplitude")
        unknown = set(item) - {"center", "radius", "amplitude"}
        if unknown:
            raise ScenarioError(p, f"unknown keys {sorted(unknown)}")
        if "center" not in item or "radius" not in item:
            raise ScenarioError(p, "bump needs 'center' and 'radius'")
        amp = _complex(item["amplitude"], f"{p}.amplitude") if "amplitude" in item else 1.0
        out.append(BumpProfile(_vector(item["center"], f"{p}.center"),
                               _float(item["radius"], f"{p}.radius", positive=True), amp))
    return out


_TOP_KEYS = {"name", "points", "A", "B", "H", "initial_data", "T", "h", "grid",
             "quadrature", "snapshot_times", "thresholds", "direction"}


def parse_scenario(text: str) -> Scenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError("<document>", f"syntax error: {getattr(exc, 'problem', exc)}", line) from exc
    if not isinstance(doc, dict):
        raise ScenarioError("<document>", "top level must be a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ScenarioError("<document>", f"unknown keys {sorted(unknown)}")

    if "points" not in doc:
        raise ScenarioError("points", "missing required section")
    pts_raw = doc["points"] or []
    if not isinstance(pts_raw, list):
        raise ScenarioError("points", "expected a list of 3-vectors")
    points = np.array([_vector(p, f"points[{i}]") for i, p in enumerate(pts_raw)], dtype=float).reshape(-1, 3)
    n = points.shape[0]

    if "H" in doc:
        if "A" in doc or "B" in doc:
            raise ScenarioError("H", "give either H or the pair A, B, not both")
        A = np.eye(n, dtype=complex)
        B = _matrix(doc["H"], n, "H")
    elif "A" in doc and "B" in doc:
        A = _matrix(doc["A"], n, "A")
        B = _matrix(doc["B"], n, "B")
    elif n == 0:
        A = B = np.zeros((0, 0), dtype=complex)
    else:
        raise ScenarioError("H", "missing boundary conditions: give H or both A and B")

    try:
        config = build_config(points, A, B)
    except ConfigError as exc:
        raise ScenarioError("points", str(exc)) from exc

    init = doc.get("initial_data") or {}
    if not isinstance(init, dict):
        raise ScenarioError("initial_data", "expected a mapping")
    unknown = set(init) - {"position", "velocity", "charges"}
    if unknown:
        raise ScenarioError("initial_data", f"unknown keys {sorted(unknown)}")
    pos = _bumps(init.get("position"), "initial_data.position")
    vel = _bumps(init.get("velocity"), "initial_data.velocity")
    charges_raw = init.get("charges")
    if charges_raw is None:
        charges = [0j] * n
    else:
        if not isinstance(charges_raw, list) or len(charges_raw) != n:
            raise ScenarioError("initial_data.charges", f"expected {n} complex values")
        charges = [_complex(z, f"initial_data.charges[{k}]") for k, z in enumerate(charges_raw)]

    if "T" not in doc:
        raise ScenarioError("T", "missing required time horizon")
    T = _float(doc["T"], "T", positive=True)
    if doc.get("h") is None:
        h = default_step(config)
    else:
        h = _float(doc["h"], "h", positive=True)
        if h > min_delay(config):
            raise ScenarioError("h", f"step {h} exceeds the smallest delay {min_delay(config)}")

    g = doc.get("grid") or {}
    if not isinstance(g, dict):
        raise ScenarioError("grid", "expected a mapping")
    unknown = set(g) - {"spacing", "margin", "shell_radii", "shell_points", "exclusion"}
    if unknown:
        raise ScenarioError("grid", f"unknown keys {sorted(unknown)}")
    defaults = GridSpec()
    shell_radii = g.get("shell_radii", list(defaults.shell_radii))
    if not isinstance(shell_radii, list):
        raise ScenarioError("grid.shell_radii", "expected a list of radii")
    shell_points = g.get("shell_points", defaults.shell_points)
    if isinstance(shell_points, bool) or not isinstance(shell_points, int) or shell_points < 1:
        raise ScenarioError("grid.shell_points", "expected a positive integer")
    grid = GridSpec(
        spacing=_float(g.get("spacing", defaults.spacing), "grid.spacing", positive=True),
        margin=_float(g["margin"], "grid.margin") if g.get("margin") is not None else T,
        shell_radii=tuple(_float(r, f"grid.shell_radii[{i}]", positive=True) for i, r in enumerate(shell_radii)),
        shell_points=shell_points,
        exclusion=_float(g.get("exclusion", defaults.exclusion), "grid.exclusion", positive=True),
    )

    q = doc.get("quadrature") or {}
    if not isinstance(q, dict) or set(q) - {"polar", "azimuth"}:
        raise ScenarioError("quadrature", "expected a mapping with polar, azimuth")
    for key in q:
        if isinstance(q[key], bool) or not isinstance(q[key], int) or q[key] < 1:
            raise ScenarioError(f"quadrature.{key}", "expected a positive integer")
    rule = SphereRule(**{k: q[k] for k in q})

    times = doc.get("snapshot_times")
    if times is not None:
        if not isinstance(times, list):
            raise ScenarioError("snapshot_times", "expected a list of times")
        times = [_float(t, f"snapshot_times[{i}]") for i, t in enumerate(times)]
        if any(t < 0 or t > T for t in times):
            raise ScenarioError("snapshot_times", f"times must lie in [0, T={T}]")

    th = doc.get("thresholds") or {}
    if not isinstance(th, dict) or set(th) - {"support", "activation"}:
        raise ScenarioError("thresholds", "expected a mapping with support, activation")
    support = _float(th["support"], "thresholds.support", positive=True) if th.get("support") is not None else None
    activation = (_float(th["activation"], "thresholds.activation", positive=True)
                  if th.get("activation") is not None else None)

    direction = doc.get("direction", "forward")
    if direction not in ("forward", "backward"):
        raise ScenarioError("direction", f"expected 'forward' or 'backward', got {direction!r}")

    name = doc.get("name", "scenario")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")

    return Scenario(name, points, A, B, pos, vel, charges, T, h, grid, rule, times,
                    support, activation, direction)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# --------------------------------------------------------------------------
# serialisation


def _pair(z: complex) -> list:
    z = complex(z)
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def _bump_dict(b: BumpProfile) -> dict:
    return {"center": [float(v) for v in b.center], "radius": b.radius, "amplitude": _pair(b.amplitude)}


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "points": [[float(v) for v in p] for p in s.points],
        "A": [_pair(z) for z in s.A.reshape(-1)],
        "B": [_pair(z) for z in s.B.reshape(-1)],
        "initial_data": {
            "position": [_bump_dict(b) for b in s.position_bumps],
            "velocity": [_bump_dict(b) for b in s.velocity_bumps],
            "charges": [_pair(z) for z in s.charges0],
        },
        "T": s.T,
        "h": s.h,
        "direction": s.direction,
        "grid": {
            "spacing": s.grid.spacing,
            "margin": s.grid.margin,
            "shell_radii": list(s.grid.shell_radii),
            "shell_points": s.grid.shell_points,
            "exclusion": s.grid.exclusion,
        },
        "quadrature": {"polar": s.quadrature.polar, "azimuth": s.quadrature.azimuth},
        "snapshot_times": s.snapshot_times,
        "thresholds": {"support": s.support_threshold, "activation": s.activation_threshold},
    }


def serialize_scenario(s: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None)
