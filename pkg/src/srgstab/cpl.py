"""Constant power load: the nonlinear operator, its SRG disk bound, and the
ripple-based harmonic remainder bound.

The load draws i = M v / ||v||^2 with M = [[p, q], [-q, p]].  Its SRG is
contained in the origin-centered disk of radius sigma_max(M)/v_min^2
(sigma_max(M) = sqrt(p^2 + q^2) since M^T M = (p^2 + q^2) I), and under a
ripple ratio rho the harmonic remainder current is bounded in L2 by
eps(rho) * ||v_delta||.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .srg import Disk


class CplDomainError(ValueError):
    """Voltage left the admissible domain ||v|| >= v_min."""


@dataclass(frozen=True)
class CplParams:
    p_c: float
    q_c: float
    v_min: float

    def __post_init__(self):
        if self.p_c < 0 or self.q_c < 0:
            raise ValueError("p_c and q_c must be nonnegative")
        if self.v_min <= 0:
            raise ValueError("v_min must be positive")

    @property
    def M(self) -> np.ndarray:
        return np.array([[self.p_c, self.q_c], [-self.q_c, self.p_c]])

    @property
    def sigma_max(self) -> float:
        return float(np.hypot(self.p_c, self.q_c))


@dataclass(frozen=True)
class RippleSpec:
    """Base voltage plus sinusoidal ripple tones (amplitude 2-vector, rad/s, phase).

    `rho` is the conservative ripple-ratio bound sum_k ||amp_k|| / V0; the
    convergence region rho < 0.1 of the remainder bound is enforced here.
    """

    v0: np.ndarray
    tones: tuple = field(default_factory=tuple)

    def __post_init__(self):
        v0 = np.asarray(self.v0, dtype=float)
        if v0.shape != (2,):
            raise ValueError("v0 must be a 2-vector")
        tones = tuple(
            (np.asarray(a, dtype=float), float(w), float(ph)) for a, w, ph in self.tones
        )
        for a, w, _ in tones:
            if a.shape != (2,):
                raise ValueError("tone amplitude must be a 2-vector")
            if w <= 0:
                raise ValueError("tone frequency must be positive")
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "tones", tones)
        if self.rho >= 0.1:
            raise ValueError(f"ripple ratio {self.rho:.3f} outside convergence region (< 0.1)")

    @property
    def V0(self) -> float:
        return float(np.linalg.norm(self.v0))

    @property
    def rho(self) -> float:
        amp = sum(float(np.linalg.norm(a)) for a, _, _ in self.tones)
        return amp / self.V0

    def ripple(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros((t.size, 2))
        for a, w, ph in self.tones:
            out += np.cos(w * t + ph)[:, None] * a[None, :]
        return out


def cpl_current(params: CplParams, v: np.ndarray) -> np.ndarray:
    """i = M v / ||v||^2 for an admissible voltage."""
    v = np.asarray(v, dtype=float)
    nrm2 = float(v @ v)
    if np.sqrt(nrm2) < params.v_min:
        raise CplDomainError(
            f"||v|| = {np.sqrt(nrm2):.6g} below v_min = {params.v_min}")
    return params.M @ v / nrm2


def cpl_disk(params: CplParams) -> Disk:
    """Origin-centered disk containing the CPL's SRG."""
    return Disk(0j, params.sigma_max / params.v_min ** 2)


def epsilon_rho(params: CplParams, rho: float) -> float:
    """L2-gain bound from voltage ripple to the harmonic remainder current."""
    if rho < 0 or 2 * rho + rho * rho >= 1:
        raise ValueError(
            f"rho = {rho} outside the bound's validity region (need 2*rho + rho^2 < 1)")
    return params.sigma_max / params.v_min ** 2 * (rho + 1) * (rho + 2) / (1 - (2 * rho + rho * rho))


@dataclass(frozen=True)
class HarmonicSplit:
    t: np.ndarray
    i_lin: np.ndarray
    i_har: np.ndarray
    norm_i_har: float
    norm_v_delta: float
    rho: float


def cpl_harmonic_split(params: CplParams, spec: RippleSpec,
                       horizon: float, dt: float) -> HarmonicSplit:
    """Split the CPL current into its frequency-preserving part and the
    harmonic remainder over a sampled horizon; returns discrete-time L2 norms.

    dt must resolve the highest tone with at least 16 samples per period.
    """
    if horizon <= 0 or dt <= 0:
        raise ValueError("horizon and dt must be positive")
    if spec.tones:
        w_max = max(w for _, w, _ in spec.tones)
        if dt > 2 * np.pi / w_max / 16:
            raise ValueError(
                f"dt = {dt} too coarse for highest tone ({w_max} rad/s); "
                "need >= 16 samples per period")
    t = np.arange(0.0, horizon, dt)
    v_delta = spec.ripple(t)
    v = spec.v0[None, :] + v_delta
    norms = np.linalg.norm(v, axis=1)
    bad = np.flatnonzero(norms < params.v_min)
    if bad.size:
        raise CplDomainError(
            f"||v(t)|| = {norms[bad[0]]:.6g} below v_min at t = {t[bad[0]]:.6g}")
    i = (v @ params.M.T) / (norms ** 2)[:, None]
    i_lin = (v @ params.M.T) / spec.V0 ** 2
    i_har = i - i_lin
    rho = float(np.max(np.linalg.norm(v_delta, axis=1))) / spec.V0 if spec.tones else 0.0

    def l2(sig):
        return float(np.sqrt(np.sum(sig ** 2) * dt))

    return HarmonicSplit(t=t, i_lin=i_lin, i_har=i_har,
                         norm_i_har=l2(i_har), norm_v_delta=l2(v_delta), rho=rho)


def cpl_srg_sample(params: CplParams, n_pairs: int, seed: int = 0) -> np.ndarray:
    """Incremental-gain/phase samples of the CPL over pairs of constant
    voltages with norms in [v_min, 3*v_min]; constants witness the extremes."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    rng = np.random.default_rng(seed)
    r = rng.uniform(params.v_min, 3 * params.v_min, size=(2, n_pairs))
    ang = rng.uniform(-np.pi, np.pi, size=(2, n_pairs))
    v1 = np.stack([r[0] * np.cos(ang[0]), r[0] * np.sin(ang[0])], axis=1)
    v2 = np.stack([r[1] * np.cos(ang[1]), r[1] * np.sin(ang[1])], axis=1)
    i1 = (v1 @ params.M.T) / np.sum(v1 ** 2, axis=1)[:, None]
    i2 = (v2 @ params.M.T) / np.sum(v2 ** 2, axis=1)[:, None]
    du = v2 - v1
    dy = i2 - i1
    nu = np.linalg.norm(du, axis=1)
    ny = np.linalg.norm(dy, axis=1)
    keep = (nu > 0) & (ny > 0)
    du, dy, nu, ny = du[keep], dy[keep], nu[keep], ny[keep]
    if nu.size == 0:
        return np.array([], dtype=complex)
    cosang = np.clip(np.sum(du * dy, axis=1) / (nu * ny), -1.0, 1.0)
    pts = ny / nu * np.exp(1j * np.arccos(cosang))
    return np.concatenate([pts, pts.conj()])
