"""MIMO LTI models evaluated on the imaginary axis.

Three interchangeable model forms are supported: real state-space
realizations, matrices of rational entries with real coefficients, and
frequency-sampled data (e.g. identified admittance sweeps).  All models are
immutable after construction and `evaluate` is pure, so per-frequency work
can be distributed freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

TOL_STAB = 1e-9
COND_LIMIT = 1e12


class EvaluationError(ValueError):
    """Model evaluation failed at a specific frequency."""


class NearSingularError(EvaluationError):
    """Matrix inversion rejected because the condition number is too high."""


class FrequencyRangeError(EvaluationError):
    """Requested frequency lies outside the sampled range."""


def _as_2d(a, name: str) -> np.ndarray:
    if np.iscomplexobj(np.asarray(a)):
        raise ValueError(f"{name} must be real (complex frequency responses "
                         "belong in a SampledModel)")
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class StateSpaceModel:
    """G(s) = C (sI - A)^-1 B + D with real matrices."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = _as_2d(self.A, "A")
        B = _as_2d(self.B, "B")
        C = _as_2d(self.C, "C")
        D = _as_2d(self.D, "D")
        nx = A.shape[0]
        if A.shape != (nx, nx):
            raise ValueError("A must be square")
        n = D.shape[0]
        if D.shape != (n, n):
            raise ValueError("D must be square (square transfer matrices only)")
        if B.shape != (nx, n) or C.shape != (n, nx):
            raise ValueError("inconsistent state-space dimensions")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def dim(self) -> int:
        return self.D.shape[0]


def _poly(c, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(c, dtype=float))
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty coefficient vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coefficients")
    return arr


def _trim(p: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(p) > 0)
    return p[nz[0]:] if nz.size else p[-1:]


@dataclass(frozen=True)
class RationalModel:
    """n x n matrix of rational entries; coefficients in descending powers of s."""

    num: tuple  # nested tuple [i][j] -> np.ndarray
    den: tuple

    def __post_init__(self):
        num = tuple(tuple(_poly(c, "num") for c in row) for row in self.num)
        den = tuple(tuple(_poly(c, "den") for c in row) for row in self.den)
        n = len(num)
        if n == 0 or any(len(r) != n for r in num) or len(den) != n or any(len(r) != n for r in den):
            raise ValueError("num and den must both be n x n")
        for row in den:
            for d in row:
                if not np.any(np.abs(d) > 0):
                    raise ValueError("denominator polynomial is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def dim(self) -> int:
        return len(self.num)

    @classmethod
    def constant(cls, G) -> "RationalModel":
        G = _as_2d(G, "G")
        n = G.shape[0]
        return cls(
            num=tuple(tuple(np.array([G[i, j]]) for j in range(n)) for i in range(n)),
            den=tuple(tuple(np.array([1.0]) for _ in range(n)) for _ in range(n)),
        )


@dataclass(frozen=True)
class SampledModel:
    """Frequency-response data: strictly increasing omegas and n x n matrices."""

    omegas: np.ndarray
    matrices: np.ndarray
    label: str = ""

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        M = np.asarray(self.matrices, dtype=complex)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("need at least two frequency samples")
        if np.any(np.diff(w) <= 0):
            raise ValueError("sample frequencies must be strictly increasing")
        if np.any(w < 0):
            raise ValueError("sample frequencies must be nonnegative")
        if M.ndim != 3 or M.shape[0] != w.size or M.shape[1] != M.shape[2]:
            raise ValueError("matrices must have shape (n_samples, n, n)")
        if not np.all(np.isfinite(M)):
            raise ValueError("sampled matrices contain non-finite entries")
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "matrices", M)

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]


@dataclass(frozen=True)
class RotatedModel:
    """J(theta) * base(s) * J(-theta); used to express a converter in the global dq frame."""

    base: "TransferMatrixModel"
    theta: float

    def __post_init__(self):
        if model_dim(self.base) != 2:
            raise ValueError("rotation applies to 2x2 dq models only")

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class InverseModel:
    """Pointwise inverse of another model (impedance <-> admittance)."""

    base: "TransferMatrixModel"

    @property
    def dim(self) -> int:
        return model_dim(self.base)


TransferMatrixModel = Union[StateSpaceModel, RationalModel, SampledModel, RotatedModel, InverseModel]


def model_dim(model: TransferMatrixModel) -> int:
    return model.dim


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def evaluate(model: TransferMatrixModel, omega: float) -> np.ndarray:
    """Evaluate G(j*omega). omega in rad/s, omega >= 0."""
    if omega < 0:
        raise EvaluationError(f"omega must be nonnegative, got {omega}")
    s = 1j * omega
    if isinstance(model, StateSpaceModel):
        nx = model.A.shape[0]
        try:
            X = np.linalg.solve(s * np.eye(nx) - model.A, model.B)
        except np.linalg.LinAlgError as exc:
            raise EvaluationError(f"(jwI - A) singular at omega={omega}") from exc
        return model.C @ X + model.D
    if isinstance(model, RationalModel):
        n = model.dim
        G = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                d = np.polyval(model.den[i][j], s)
                if d == 0:
                    raise EvaluationError(f"denominator ({i},{j}) vanishes at omega={omega}")
                G[i, j] = np.polyval(model.num[i][j], s) / d
        return G
    if isinstance(model, SampledModel):
        w = model.omegas
        if omega < w[0] or omega > w[-1]:
            raise FrequencyRangeError(
                f"omega={omega} outside sampled range [{w[0]}, {w[-1]}]"
            )
        k = int(np.searchsorted(w, omega))
        if k < w.size and w[k] == omega:
            return model.matrices[k].copy()
        t = (omega - w[k - 1]) / (w[k] - w[k - 1])
        A, B = model.matrices[k - 1], model.matrices[k]
        return (1 - t) * A.real + t * B.real + 1j * ((1 - t) * A.imag + t * B.imag)
    if isinstance(model, RotatedModel):
        J = rotation_matrix(model.theta)
        return J @ evaluate(model.base, omega) @ rotation_matrix(-model.theta)
    if isinstance(model, InverseModel):
        return invert_at(evaluate(model.base, omega), context=f"omega={omega}")
    raise TypeError(f"unsupported model type {type(model)!r}")


@dataclass(frozen=True)
class RhInfinityResult:
    """Outcome of the stable-proper-rational membership test.

    `stable` is True/False for a definite verdict and None when the model form
    does not expose its poles (frequency-sampled data).
    """

    stable: Optional[bool]
    reason: str

    @property
    def indeterminate(self) -> bool:
        return self.stable is None


def is_rh_infinity(model: TransferMatrixModel, tol_stab: float = TOL_STAB) -> RhInfinityResult:
    """Strict open-left-half-plane pole test.

    No minimal realization is attempted: a non-minimal realization whose
    unstable modes cancel will be reported unstable.  Marginally stable
    models (imaginary-axis poles) are rejected.
    """
    if isinstance(model, StateSpaceModel):
        eig = np.linalg.eigvals(model.A)
        worst = float(np.max(eig.real)) if eig.size else -np.inf
        if worst < -tol_stab:
            return RhInfinityResult(True, f"all state eigenvalues have Re <= {worst:.3e}")
        return RhInfinityResult(False, f"state eigenvalue with Re = {worst:.3e}")
    if isinstance(model, RationalModel):
        worst = -np.inf
        for i, row in enumerate(model.den):
            for j, d in enumerate(row):
                dd = _trim(d)
                nn = _trim(model.num[i][j])
                if nn.size > dd.size and np.any(np.abs(nn[: nn.size - dd.size]) > 0):
                    return RhInfinityResult(False, f"entry ({i},{j}) is improper")
                if dd.size > 1:
                    roots = np.roots(dd)
                    if roots.size:
                        worst = max(worst, float(np.max(roots.real)))
        if worst < -tol_stab:
            return RhInfinityResult(True, "all denominator roots strictly in LHP")
        return RhInfinityResult(False, f"denominator root with Re = {worst:.3e}")
    if isinstance(model, SampledModel):
        return RhInfinityResult(None, "frequency-sampled data: poles not observable")
    if isinstance(model, RotatedModel):
        inner = is_rh_infinity(model.base, tol_stab)
        return RhInfinityResult(inner.stable, f"rotated model: {inner.reason}")
    if isinstance(model, InverseModel):
        return RhInfinityResult(None, "pointwise inverse: poles not observable")
    raise TypeError(f"unsupported model type {type(model)!r}")


def invert_at(G: np.ndarray, context: str = "") -> np.ndarray:
    """Invert a complex matrix with condition and residual guards."""
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("matrix must be square")
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        where = f" ({context})" if context else ""
        raise NearSingularError(f"matrix near-singular, cond={cond:.3e}{where}")
    Ginv = np.linalg.inv(G)
    resid = np.linalg.norm(G @ Ginv - np.eye(G.shape[0]))
    if resid > 1e-8 * max(np.linalg.norm(G), 1e-300):
        where = f" ({context})" if context else ""
        raise NearSingularError(f"inversion residual {resid:.3e} too large{where}")
    return Ginv


@dataclass(frozen=True)
class FrequencyGrid:
    """Sorted nonnegative evaluation frequencies in rad/s."""

    omegas: np.ndarray = field(default_factory=lambda: np.array([]))

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("frequency grid must be a non-empty 1-D array")
        if np.any(w < 0) or np.any(np.diff(w) <= 0):
            raise ValueError("frequencies must be nonnegative and strictly increasing")
        object.__setattr__(self, "omegas", w)

    @property
    def hz(self) -> np.ndarray:
        return self.omegas / (2 * np.pi)

    def __len__(self) -> int:
        return self.omegas.size

    @classmethod
    def from_hz(cls, f_min: float, f_max: float, count: int, spacing: str = "log",
                include: tuple = ()) -> "FrequencyGrid":
        if count < 2 or f_max <= f_min:
            raise ValueError("need count >= 2 and f_max > f_min")
        if spacing == "log":
            if f_min <= 0:
                raise ValueError("log spacing needs f_min > 0")
            f = np.logspace(np.log10(f_min), np.log10(f_max), count)
        elif spacing == "linear":
            f = np.linspace(f_min, f_max, count)
        else:
            raise ValueError(f"unknown spacing {spacing!r}")
        w = np.unique(np.concatenate([f * 2 * np.pi, np.asarray(include, dtype=float)]))
        return cls(w[w >= 0])

    @classmethod
    def default(cls, omega0: float = 2 * np.pi * 50.0) -> "FrequencyGrid":
        # 400 log points over [1e-2, 1e3] Hz with the fundamental inserted exactly
        return cls.from_hz(1e-2, 1e3, 400, "log", include=(omega0,))
