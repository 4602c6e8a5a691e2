"""Grid-side building blocks: dq rotations, SCR, RL grid model, admittance
sums, network cases with Kron reduction, and frequency-sweep ingestion.

All network quantities are per-unit in a global dq frame; every bus couples
the d and q axes through 2x2 blocks.  Scalar RL branch data is promoted to
the standard dq cross-coupling block [[R+sL, -w0*L], [w0*L, R+sL]]^-1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .lti import (
    NearSingularError,
    RationalModel,
    SampledModel,
    TransferMatrixModel,
    evaluate,
    invert_at,
    model_dim,
    rotation_matrix,
)
from .srg import Disk


class NetworkError(ValueError):
    pass


class DataFormatError(ValueError):
    pass


def rotate_admittance(Y: np.ndarray, theta: float) -> np.ndarray:
    """J(theta) Y J(-theta): express a local-frame 2x2 admittance globally."""
    Y = np.asarray(Y, dtype=complex)
    if Y.shape != (2, 2):
        raise ValueError("rotation applies to 2x2 matrices")
    return rotation_matrix(theta) @ Y @ rotation_matrix(-theta)


def scr_value(Y_grid_at_w0: np.ndarray, Y_c_at_w0: np.ndarray) -> float:
    """Short-circuit ratio: spectral-norm ratio of grid to converter admittance."""
    denom = float(np.linalg.norm(np.asarray(Y_c_at_w0, dtype=complex), 2))
    if denom <= 0:
        raise ValueError("converter admittance norm is zero")
    return float(np.linalg.norm(np.asarray(Y_grid_at_w0, dtype=complex), 2)) / denom


@dataclass(frozen=True)
class RlGridParams:
    R: float
    L: float
    omega0: float = 2 * np.pi * 50.0

    def __post_init__(self):
        if self.R < 0 or self.L < 0:
            raise ValueError("R and L must be nonnegative")
        if self.R == 0 and self.L == 0:
            raise ValueError("R and L cannot both be zero")


def rl_grid_model(params: RlGridParams) -> RationalModel:
    """Admittance of the RL grid: the closed-form 2x2 inverse of the dq
    impedance [[R+sL, -w0*L], [w0*L, R+sL]]."""
    R, L, w0 = params.R, params.L, params.omega0
    # det = (R + sL)^2 + (w0 L)^2
    den = np.array([L * L, 2 * R * L, R * R + (w0 * L) ** 2])
    diag = np.array([L, R])
    off = np.array([w0 * L])
    return RationalModel(
        num=((diag, off), (-off, diag)),
        den=((den, den), (den, den)),
    )


@dataclass(frozen=True)
class AdmittanceSum:
    """Pointwise sum of LTI admittances plus disk terms to be added at the
    SRG level (Minkowski path for chord-property operators like the CPL)."""

    models: tuple
    disks: tuple = ()

    def __post_init__(self):
        if not self.models:
            raise ValueError("need at least one model")
        dims = {model_dim(m) for m in self.models}
        if len(dims) != 1:
            raise ValueError(f"dimension mismatch among summands: {sorted(dims)}")
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "disks", tuple(self.disks))

    @property
    def dim(self) -> int:
        return model_dim(self.models[0])

    def evaluate(self, omega: float) -> np.ndarray:
        return sum(evaluate(m, omega) for m in self.models)


def sum_admittances(models: Sequence[TransferMatrixModel],
                    disks: Sequence[Disk] = ()) -> AdmittanceSum:
    return AdmittanceSum(models=tuple(models), disks=tuple(disks))


@dataclass(frozen=True)
class Branch:
    from_bus: int  # 0-based
    to_bus: int
    R: float = 0.0
    L: float = 0.0
    block: Optional[np.ndarray] = None  # constant 2x2 admittance block
    model: Optional[TransferMatrixModel] = None

    def admittance(self, omega: float, omega0: float) -> np.ndarray:
        if self.model is not None:
            return evaluate(self.model, omega)
        if self.block is not None:
            return np.asarray(self.block, dtype=complex)
        s = 1j * omega
        Z = np.array([[self.R + s * self.L, -omega0 * self.L],
                      [omega0 * self.L, self.R + s * self.L]])
        return invert_at(Z, context=f"branch {self.from_bus + 1}-{self.to_bus + 1}, omega={omega}")


@dataclass(frozen=True)
class Shunt:
    bus: int  # 0-based
    R: float = 0.0
    L: float = 0.0
    block: Optional[np.ndarray] = None
    model: Optional[TransferMatrixModel] = None

    def admittance(self, omega: float, omega0: float) -> np.ndarray:
        return Branch(self.bus, self.bus, self.R, self.L, self.block,
                      self.model).admittance(omega, omega0)


@dataclass(frozen=True)
class NetworkCase:
    """Bus/branch description with designated boundary (converter) buses."""

    n_bus: int
    branches: tuple
    shunts: tuple = ()
    boundary: tuple = ()
    omega0: float = 2 * np.pi * 50.0

    def __post_init__(self):
        if self.n_bus < 1:
            raise NetworkError("need at least one bus")
        for br in self.branches:
            if not (0 <= br.from_bus < self.n_bus and 0 <= br.to_bus < self.n_bus):
                raise NetworkError(f"branch {br.from_bus + 1}-{br.to_bus + 1} out of range")
            if br.from_bus == br.to_bus:
                raise NetworkError("branch endpoints must differ")
        for sh in self.shunts:
            if not 0 <= sh.bus < self.n_bus:
                raise NetworkError(f"shunt bus {sh.bus + 1} out of range")
        b = tuple(self.boundary)
        if not b or len(set(b)) != len(b):
            raise NetworkError("boundary must be non-empty and duplicate-free")
        if any(not 0 <= i < self.n_bus for i in b):
            raise NetworkError("boundary bus out of range")
        if not self._connected():
            raise NetworkError("network is not connected")
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "shunts", tuple(self.shunts))
        object.__setattr__(self, "boundary", b)

    def _connected(self) -> bool:
        adj = [set() for _ in range(self.n_bus)]
        for br in self.branches:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
        seen = {0}
        stack = [0]
        while stack:
            for k in adj[stack.pop()]:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return len(seen) == self.n_bus

    def bus_admittance(self, omega: float) -> np.ndarray:
        """Full 2n x 2n dq-block bus admittance matrix at j*omega."""
        Y = np.zeros((2 * self.n_bus, 2 * self.n_bus), dtype=complex)
        for br in self.branches:
            y = br.admittance(omega, self.omega0)
            f, t = 2 * br.from_bus, 2 * br.to_bus
            Y[f:f + 2, f:f + 2] += y
            Y[t:t + 2, t:t + 2] += y
            Y[f:f + 2, t:t + 2] -= y
            Y[t:t + 2, f:f + 2] -= y
        for sh in self.shunts:
            k = 2 * sh.bus
            Y[k:k + 2, k:k + 2] += sh.admittance(omega, self.omega0)
        return Y


def kron_reduced_admittance(case: NetworkCase, omega: float) -> np.ndarray:
    """Admittance seen from the boundary buses at j*omega: the Schur
    complement Ybb - Ybi Yii^-1 Yib of the bus admittance matrix,
    block-ordered by the boundary list."""
    Y = case.bus_admittance(omega)
    bidx = np.concatenate([[2 * b, 2 * b + 1] for b in case.boundary])
    iidx = np.array([k for b in range(case.n_bus) if b not in case.boundary
                     for k in (2 * b, 2 * b + 1)], dtype=int)
    Ybb = Y[np.ix_(bidx, bidx)]
    if iidx.size:
        Yii = Y[np.ix_(iidx, iidx)]
        try:
            X = np.linalg.solve(Yii, Y[np.ix_(iidx, bidx)])
        except np.linalg.LinAlgError as exc:
            raise NetworkError(f"interior block singular at omega={omega}") from exc
        if np.linalg.cond(Yii) > 1e12:
            raise NetworkError(f"interior block near-singular at omega={omega}")
        Yred = Ybb - Y[np.ix_(bidx, iidx)] @ X
    else:
        Yred = Ybb
    return Yred


def kron_reduce(case: NetworkCase, omega: float) -> np.ndarray:
    """Grid impedance seen from the boundary buses at j*omega:
    Z = (Ybb - Ybi Yii^-1 Yib)^-1."""
    Yred = kron_reduced_admittance(case, omega)
    try:
        return invert_at(Yred, context=f"Kron reduction at omega={omega}")
    except NearSingularError as exc:
        raise NetworkError(str(exc)) from exc


@dataclass(frozen=True)
class FrequencyDataSet:
    """Measured/identified 2x2 frequency sweep, strictly increasing in Hz."""

    f_hz: np.ndarray
    matrices: np.ndarray
    label: str = ""

    def __post_init__(self):
        f = np.asarray(self.f_hz, dtype=float)
        M = np.asarray(self.matrices, dtype=complex)
        if f.ndim != 1 or np.any(np.diff(f) <= 0):
            raise DataFormatError("frequencies must be strictly increasing")
        if M.shape != (f.size, 2, 2):
            raise DataFormatError("matrices must have shape (n, 2, 2)")
        if not np.all(np.isfinite(M)) or not np.all(np.isfinite(f)):
            raise DataFormatError("dataset contains non-finite values")
        object.__setattr__(self, "f_hz", f)
        object.__setattr__(self, "matrices", M)

    def to_model(self) -> SampledModel:
        return SampledModel(omegas=2 * np.pi * self.f_hz, matrices=self.matrices,
                            label=self.label)


_CSV_HEADER = ["f_hz", "re11", "im11", "re12", "im12", "re21", "im21", "re22", "im22"]


def load_frequency_data(path, label: str = "") -> FrequencyDataSet:
    """Read a 2x2 frequency sweep CSV (header f_hz,re11,im11,...,im22)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != _CSV_HEADER:
            raise DataFormatError(f"{path}: expected header {','.join(_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 9:
                raise DataFormatError(f"{path}:{lineno}: expected 9 columns, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise DataFormatError(f"{path}:{lineno}: non-numeric value") from exc
            if not all(np.isfinite(v) for v in vals):
                raise DataFormatError(f"{path}:{lineno}: non-finite value")
            rows.append(vals)
    if len(rows) < 2:
        raise DataFormatError(f"{path}: need at least two data rows")
    arr = np.array(rows)
    f = arr[:, 0]
    if np.any(np.diff(f) <= 0):
        k = int(np.flatnonzero(np.diff(f) <= 0)[0])
        raise DataFormatError(f"{path}:{k + 3}: frequencies not strictly increasing")
    M = (arr[:, 1::2] + 1j * arr[:, 2::2]).reshape(-1, 2, 2)
    return FrequencyDataSet(f_hz=f, matrices=M, label=label or str(path))


def save_frequency_data(path, data: FrequencyDataSet) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for f, M in zip(data.f_hz, data.matrices):
            flat = M.reshape(-1)
            writer.writerow([repr(float(f))] + [repr(float(x))
                                               for z in flat for x in (z.real, z.imag)])
