"""Point-interaction configurations and their boundary conditions.

A configuration is a finite set of points ``Y`` in R^3 together with a pair
of complex ``n x n`` matrices ``(A, B)`` imposing ``A phi_r = B phi_s`` on the
regular and singular boundary values of a function near the points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

FOUR_PI = 4.0 * np.pi

# condition numbers above this are treated as singular
COND_LIMIT = 1e12
RANK_RTOL = 1e-10
PARALLEL_RTOL = 1e-10


class ConfigError(ValueError):
    """Malformed configuration (duplicate points, mismatched shapes)."""


class SingularMatrixError(np.linalg.LinAlgError):
    pass


def green_function(x) -> float:
    """Green function of ``-Laplace`` in R^3, ``1 / (4 pi |x|)``."""
    r = float(np.linalg.norm(np.asarray(x, dtype=float)))
    if r == 0.0:
        raise ZeroDivisionError("Green function is singular at the origin")
    return 1.0 / (FOUR_PI * r)


def _as_matrix(M, n: int, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if n == 0 and M.size == 0:
        return np.zeros((0, 0), dtype=complex)
    if M.ndim != 2 or M.shape != (n, n):
        raise ConfigError(f"{name} must be {n}x{n}, got shape {M.shape}")
    return M


@dataclass(frozen=True)
class InteractionConfig:
    points: np.ndarray
    A: np.ndarray
    B: np.ndarray
    green_matrix: np.ndarray
    distance_matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.points.shape[0]


def build_config(points, A, B) -> InteractionConfig:
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        pts = np.zeros((0, 3))
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ConfigError(f"points must be a sequence of 3-vectors, got shape {pts.shape}")
    n = pts.shape[0]
    A = _as_matrix(A, n, "A")
    B = _as_matrix(B, n, "B")

    D = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    iu = np.triu_indices(n, k=1)
    if n > 1 and np.min(D[iu]) == 0.0:
        i, j = (int(k[np.argmin(D[iu])]) for k in iu)
        raise ConfigError(f"duplicate points: y_{i + 1} == y_{j + 1}")
    np.fill_diagonal(D, 0.0)
    G = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    G[off] = 1.0 / (FOUR_PI * D[off])

    for arr in (pts, A, B, G, D):
        arr.setflags(write=False)
    return InteractionConfig(pts, A, B, G, D)


# --------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    threshold: float
    message: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    a_invertible: bool
    det_gram: float  # det(AA* + BB*), reported as a diagnostic

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[Check]:
        return next((c for c in self.checks if not c.passed), None)

    def __str__(self) -> str:
        lines = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            lines.append(f"{flag} {c.name}: residual={c.residual:.6g} threshold={c.threshold:.6g}"
                         + (f" ({c.message})" if c.message else ""))
        lines.append(f"INFO det(AA*+BB*)={self.det_gram:.12g}")
        lines.append(f"INFO A invertible: {'yes' if self.a_invertible else 'no'}")
        return "\n".join(lines)


def _spectral_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def is_invertible(M: np.ndarray) -> bool:
    if M.size == 0:
        return True
    return bool(np.linalg.cond(M) < COND_LIMIT)


def validate_pair(config: InteractionConfig) -> ValidationReport:
    A, B = config.A, config.B
    n = config.n

    sym_res = float(np.linalg.norm(A @ B.conj().T - B @ A.conj().T)) if n else 0.0
    sym_tol = 1e-10 * (1.0 + _spectral_norm(A) * _spectral_norm(B))
    symm = Check("symmetry", sym_res <= sym_tol, sym_res, sym_tol,
                 "" if sym_res <= sym_tol else "A B* != B A*")

    if n:
        sv = np.linalg.svd(np.hstack([A, B]), compute_uv=False)
        ratio = float(sv[-1] / sv[0]) if sv[0] > 0 else 0.0
        det_gram = float(np.linalg.det(A @ A.conj().T + B @ B.conj().T).real)
    else:
        ratio, det_gram = 1.0, 1.0
    rank = Check("rank", ratio > RANK_RTOL, ratio, RANK_RTOL,
                 "" if ratio > RANK_RTOL else "rank(A, B) < n")

    return ValidationReport((symm, rank), is_invertible(A), det_gram)


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Invalid:
    reason: str
    message: str


@dataclass(frozen=True)
class Local:
    transform: np.ndarray
    diag_A: np.ndarray
    diag_B: np.ndarray

    def parameters(self) -> np.ndarray:
        """Per-point couplings ``diag_B / diag_A`` (inf where ``diag_A`` vanishes)."""
        out = np.full(self.diag_A.shape, np.inf, dtype=complex)
        nz = self.diag_A != 0
        out[nz] = self.diag_B[nz] / self.diag_A[nz]
        return out


@dataclass(frozen=True)
class NonLocal:
    pass


@dataclass(frozen=True)
class ExtensionClass:
    verdict: object  # Invalid | Local | NonLocal
    a_invertible: bool
    hermitian_H: Optional[np.ndarray] = None

    @property
    def kind(self) -> str:
        return type(self.verdict).__name__


def columns_parallel(a: np.ndarray, b: np.ndarray) -> bool:
    sv = np.linalg.svd(np.column_stack([a, b]), compute_uv=False)
    second = sv[1] if sv.size > 1 else 0.0
    return bool(sv[0] > 0 and second <= PARALLEL_RTOL * sv[0])


def classify_locality(config: InteractionConfig) -> ExtensionClass:
    """Decide whether ``(A, B)`` can be brought to diagonal form by one left factor.

    The boundary conditions decouple across points exactly when every pair of
    k-th columns ``a_k, b_k`` spans a line; stacking one representative per
    line gives ``V`` and ``M = V^-1`` diagonalises both matrices.
    """
    report = validate_pair(config)
    A, B = config.A, config.B
    n = config.n
    H = np.linalg.solve(A, B) if (report.a_invertible and n) else (
        np.zeros((0, 0), dtype=complex) if n == 0 else None)

    failure = report.first_failure()
    if failure is not None:
        return ExtensionClass(Invalid(failure.name, failure.message), report.a_invertible, H)

    reps = []
    for k in range(n):
        a, b = A[:, k], B[:, k]
        if not columns_parallel(a, b):
            return ExtensionClass(NonLocal(), report.a_invertible, H)
        reps.append(a if np.linalg.norm(a) >= np.linalg.norm(b) else b)
    V = np.column_stack(reps) if n else np.zeros((0, 0), dtype=complex)
    if not is_invertible(V):
        return ExtensionClass(NonLocal(), report.a_invertible, H)
    M = np.linalg.inv(V) if n else V
    MA, MB = M @ A, M @ B
    return ExtensionClass(Local(M, np.diag(MA).copy(), np.diag(MB).copy()), report.a_invertible, H)


# --------------------------------------------------------------------------
# boundary values


@dataclass(frozen=True)
class BoundaryVector:
    regular: np.ndarray
    singular: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.regular, dtype=complex))
        s = np.atleast_1d(np.asarray(self.singular, dtype=complex))
        if r.shape != s.shape:
            raise ValueError(f"regular/singular parts differ in length: {r.shape} vs {s.shape}")
        object.__setattr__(self, "regular", r)
        object.__setattr__(self, "singular", s)


def boundary_symplectic_form(u: BoundaryVector, v: BoundaryVector) -> complex:
    """``<(u_r, u_s), J (v_r, v_s)>`` with ``J = [[0, I], [-I, 0]]``.

    The inner product on C^2n is linear in the first slot and conjugate-linear
    in the second, so the value is ``<u_r, v_s> - <u_s, v_r>``.
    """
    if u.regular.shape != v.regular.shape:
        raise ValueError("boundary vectors of different dimension")
    x = np.concatenate([u.regular, u.singular])
    n = u.regular.size
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    Jy = J @ np.concatenate([v.regular, v.singular])
    return complex(np.sum(x * np.conj(Jy)))


def boundary_kernel_basis(config: InteractionConfig) -> list:
    """Orthonormal basis of the plane ``{(phi_r, phi_s): A phi_r = B phi_s}``."""
    report = validate_pair(config)
    if not report.ok:
        c = report.first_failure()
        raise ValueError(f"invalid boundary pair: {c.name} check failed ({c.message})")
    n = config.n
    if n == 0:
        return []
    N = scipy.linalg.null_space(np.hstack([config.A, -config.B]))
    return [BoundaryVector(N[:n, k], N[n:, k]) for k in range(N.shape[1])]


def initial_charges(config: InteractionConfig, phi0_at_Y) -> np.ndarray:
    """Charges ``zeta`` with ``(B - A G) zeta = A phi0(Y)``."""
    n = config.n
    phi0 = np.asarray(phi0_at_Y, dtype=complex).reshape(n)
    if n == 0:
        return np.zeros(0, dtype=complex)
    K = config.B - config.A @ config.green_matrix
    if not is_invertible(K):
        raise SingularMatrixError("B - A G is singular; charges are not determined by phi0(Y)")
    return np.linalg.solve(K, config.A @ phi0)


def hermitian_part(config: InteractionConfig) -> np.ndarray:
    """``H = A^-1 B``; requires invertible ``A``."""
    if not is_invertible(config.A):
        raise SingularMatrixError("A is not invertible")
    if config.n == 0:
        return np.zeros((0, 0), dtype=complex)
    return np.linalg.solve(config.A, config.B)
