"""Stability criteria over a frequency grid.

The primary test is the per-frequency separation of the grid-side SRG from
the negated tau-scaled converter SRG; its margin profile rho(omega) is the
minimum planar distance over tau in (0, 1].  The classical comparison
criteria (generalized Nyquist, small gain, small phase, passivity indices)
run on the same grid so their verdicts can be tabulated side by side.

Certification is only claimed at the evaluated grid frequencies; behavior
between grid points is not certified and the report always carries the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cpl import CplParams, cpl_disk, epsilon_rho
from .lti import (
    EvaluationError,
    FrequencyGrid,
    InverseModel,
    NearSingularError,
    RhInfinityResult,
    TransferMatrixModel,
    evaluate,
    invert_at,
    is_rh_infinity,
    model_dim,
)
from .srg import (
    Disk,
    SrgRegion,
    TauSweep,
    default_tau_grid,
    min_distance_over_tau,
    minkowski_sum_disk,
    positive_real_reach,
    srg_of_matrix,
    tau_swept_region,
)

RHO_FLOOR = 1e-9
DET_FLOOR = 1e-9

VERDICT_CERTIFIED = "certified"
VERDICT_NOT_CERTIFIED = "not-certified"
VERDICT_INDETERMINATE = "indeterminate"


class GridTooCoarseError(RuntimeError):
    """Phase steps along the Nyquist contour stayed too wide after refinement."""


@dataclass(frozen=True)
class SrgOptions:
    """Boundary-resolution knobs for the per-frequency SRG computations."""

    n_support: int = 512
    refine_tol: Optional[float] = None
    tau_points: int = 64

    def tau_grid(self) -> np.ndarray:
        return default_tau_grid(self.tau_points)


@dataclass(frozen=True)
class CertificationReport:
    converter_label: str
    grid_label: str
    frequencies: FrequencyGrid
    margin: np.ndarray
    verdict: str
    worst_omega: float
    worst_margin: float
    rh_inf: dict
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.margin, dtype=float)
        if m.shape != (len(self.frequencies),):
            raise ValueError("margin length must equal grid length")
        object.__setattr__(self, "margin", m)


@dataclass(frozen=True)
class CscrResult:
    cscr: float
    critical_frequency_hz: float
    reach: np.ndarray
    no_constraint: bool
    frequencies: FrequencyGrid


def _srg_at(model: TransferMatrixModel, omega: float, opts: SrgOptions) -> SrgRegion:
    try:
        G = evaluate(model, omega)
    except EvaluationError as exc:
        raise EvaluationError(f"{exc} (at omega={omega} rad/s)") from exc
    return srg_of_matrix(G, n_support=opts.n_support, refine_tol=opts.refine_tol)


def _verdict(margins: np.ndarray, prechecks: dict, rho_floor: float) -> str:
    if np.any(margins <= rho_floor):
        return VERDICT_NOT_CERTIFIED
    # Positive margins certify only when both models are verified members of
    # the stable proper rational class; a failed or unobservable pole test
    # leaves the hypothesis unestablished.
    if all(r.stable is True for r in prechecks.values()):
        return VERDICT_CERTIFIED
    return VERDICT_INDETERMINATE


def certify_linear(Yc: TransferMatrixModel, Ygrid: TransferMatrixModel,
                   grid: FrequencyGrid, opts: SrgOptions = SrgOptions(),
                   rho_floor: float = RHO_FLOOR,
                   converter_label: str = "converter",
                   grid_label: str = "grid") -> CertificationReport:
    """Per-frequency SRG separation margin of (Yc, Ygrid) and its verdict.

    rho(omega) is the minimum distance between SRG(Ygrid(jw)) and the family
    -tau * SRG(Yc(jw)), tau in (0, 1]; certified iff rho stays above the
    floor at every grid point and both pole prechecks pass.
    """
    if model_dim(Yc) != model_dim(Ygrid):
        raise ValueError("converter and grid models must have equal dimensions")
    prechecks = {"converter": is_rh_infinity(Yc), "grid": is_rh_infinity(Ygrid)}
    tau = opts.tau_grid()
    margins = np.empty(len(grid))
    for k, w in enumerate(grid.omegas):
        fixed = _srg_at(Ygrid, w, opts)
        sweep = TauSweep(_srg_at(Yc, w, opts), tau)
        margins[k] = min_distance_over_tau(fixed, sweep)
    k = int(np.argmin(margins))
    return CertificationReport(
        converter_label=converter_label, grid_label=grid_label,
        frequencies=grid, margin=margins,
        verdict=_verdict(margins, prechecks, rho_floor),
        worst_omega=float(grid.omegas[k]), worst_margin=float(margins[k]),
        rh_inf=prechecks,
    )


def certify_with_cpl(Yc: TransferMatrixModel, y_l: TransferMatrixModel,
                     cpl: CplParams, grid: FrequencyGrid,
                     opts: SrgOptions = SrgOptions(),
                     ripple_rho: float = 0.05,
                     rho_floor: float = RHO_FLOOR,
                     converter_label: str = "converter",
                     grid_label: str = "grid+cpl") -> CertificationReport:
    """Separation test with the grid side widened by the constant-power-load
    disk: grid region = SRG(y_l(jw)) Minkowski-plus the disk of radius
    sigma_max(M)/v_min^2, tested against the swept converter family.

    The reported eps(ripple_rho) diagnostic bounds the L2 gain from voltage
    ripple to the load's harmonic remainder current; it is informational and
    does not enter the margin.
    """
    if model_dim(Yc) != 2 or model_dim(y_l) != 2:
        raise ValueError("the load-widened test is defined for 2x2 dq models")
    disk = cpl_disk(cpl)
    prechecks = {"converter": is_rh_infinity(Yc), "grid": is_rh_infinity(y_l)}
    tau = opts.tau_grid()
    margins = np.empty(len(grid))
    for k, w in enumerate(grid.omegas):
        fixed = minkowski_sum_disk(_srg_at(y_l, w, opts), disk)
        sweep = TauSweep(_srg_at(Yc, w, opts), tau)
        margins[k] = min_distance_over_tau(fixed, sweep)
    k = int(np.argmin(margins))
    diagnostics = {"cpl_disk_radius": disk.radius}
    try:
        diagnostics["epsilon_rho"] = epsilon_rho(cpl, ripple_rho)
        diagnostics["epsilon_rho_at"] = ripple_rho
    except ValueError as exc:
        diagnostics["epsilon_rho_error"] = str(exc)
    return CertificationReport(
        converter_label=converter_label, grid_label=grid_label,
        frequencies=grid, margin=margins,
        verdict=_verdict(margins, prechecks, rho_floor),
        worst_omega=float(grid.omegas[k]), worst_margin=float(margins[k]),
        rh_inf=prechecks, diagnostics=diagnostics,
    )


def margin_profile(report: CertificationReport) -> str:
    """CSV payload of the raw margin profile: columns f_hz, rho."""
    lines = ["f_hz,rho"]
    for f, rho in zip(report.frequencies.hz, report.margin):
        lines.append(f"{float(f)!r},{float(rho)!r}")
    return "\n".join(lines) + "\n"


def critical_scr(Yc: TransferMatrixModel, grid: FrequencyGrid,
                 opts: SrgOptions = SrgOptions()) -> CscrResult:
    """Smallest grid strength at which the separation test can fail.

    The grid model of a pure short-circuit-ratio screen is the positive real
    point at value SCR; the swept converter family constrains it only where
    it reaches the positive real axis.  cSCR is the maximum over frequency of
    that reach; stability screening holds for SCR > cSCR.
    """
    if model_dim(Yc) != 2:
        raise ValueError("SCR screening is defined for 2x2 dq models")
    tau = opts.tau_grid()
    reach = np.empty(len(grid))
    for k, w in enumerate(grid.omegas):
        swept = tau_swept_region(_srg_at(Yc, w, opts), tau)
        reach[k] = positive_real_reach(swept)
    k = int(np.argmax(reach))
    no_constraint = bool(reach[k] <= 0.0)
    return CscrResult(cscr=float(reach[k]), critical_frequency_hz=float(grid.hz[k]),
                      reach=reach, no_constraint=no_constraint, frequencies=grid)


@dataclass(frozen=True)
class GncResult:
    omegas: np.ndarray
    det_values: np.ndarray
    winding: int
    min_abs_det: float
    stable: bool
    prechecks: dict


def _midpoint(a: float, b: float) -> float:
    if a > 0 and b > 0:
        return float(np.sqrt(a * b))
    return (a + b) / 2


def gnc_check(Yc: TransferMatrixModel, Zgrid: TransferMatrixModel,
              grid: FrequencyGrid, det_floor: float = DET_FLOOR,
              max_points: int = 200_000) -> GncResult:
    """Generalized Nyquist test of the return difference det(I + Yc*Zgrid).

    The determinant locus is extended to negative frequencies by conjugate
    symmetry and the winding number about the origin is accumulated from the
    unwrapped phase.  Adjacent phase steps are bisected adaptively until all
    are below pi/4; stable iff the locus stays off the origin and the winding
    number vanishes.  Open-loop stability of both factors is assumed by the
    criterion, so it is prechecked.
    """
    n = model_dim(Yc)
    if n != model_dim(Zgrid):
        raise ValueError("dimension mismatch")
    prechecks = {"converter": is_rh_infinity(Yc), "grid": is_rh_infinity(Zgrid)}
    eye = np.eye(n)

    def d_at(w: float) -> complex:
        return complex(np.linalg.det(eye + evaluate(Yc, w) @ evaluate(Zgrid, w)))

    omegas = list(map(float, grid.omegas))
    dets = [d_at(w) for w in omegas]
    for _ in range(60):
        steps = np.abs(np.angle(np.array(dets[1:]) / np.array(dets[:-1])))
        need = np.flatnonzero(steps >= np.pi / 4)
        if need.size == 0 or len(omegas) >= max_points:
            break
        for k in need[::-1]:
            k = int(k)
            wm = _midpoint(omegas[k], omegas[k + 1])
            omegas.insert(k + 1, wm)
            dets.insert(k + 1, d_at(wm))
    darr = np.array(dets)
    steps = np.abs(np.angle(darr[1:] / darr[:-1]))
    if steps.size and float(np.max(steps)) > np.pi / 2:
        k = int(np.argmax(steps))
        raise GridTooCoarseError(
            f"phase step {steps[k]:.3f} rad between omega={omegas[k]:.6g} and "
            f"omega={omegas[k + 1]:.6g} exceeds pi/2 after refinement; "
            "supply a denser or wider frequency grid")
    # conjugate-symmetric closure over the full imaginary axis
    full = np.concatenate([darr[::-1].conj(), darr[1:]]) if omegas[0] == 0.0 \
        else np.concatenate([darr[::-1].conj(), darr])
    phase = np.unwrap(np.angle(full))
    winding = int(np.round((phase[-1] - phase[0]) / (2 * np.pi)))
    min_abs = float(np.min(np.abs(darr)))
    stable = bool(min_abs >= det_floor and winding == 0)
    return GncResult(omegas=np.array(omegas), det_values=darr, winding=winding,
                     min_abs_det=min_abs, stable=stable, prechecks=prechecks)


@dataclass(frozen=True)
class SmallGainResult:
    gains: np.ndarray
    per_frequency: np.ndarray
    holds: bool


def small_gain_check(Yc: TransferMatrixModel, Zgrid: TransferMatrixModel,
                     grid: FrequencyGrid) -> SmallGainResult:
    """sigma_max(Yc) * sigma_max(Zgrid) < 1 at every grid frequency."""
    gains = np.empty(len(grid))
    for k, w in enumerate(grid.omegas):
        gains[k] = (np.linalg.norm(evaluate(Yc, w), 2)
                    * np.linalg.norm(evaluate(Zgrid, w), 2))
    ok = gains < 1.0
    return SmallGainResult(gains=gains, per_frequency=ok, holds=bool(np.all(ok)))


@dataclass(frozen=True)
class SmallPhaseResult:
    alpha_converter: np.ndarray  # (n, 2): [alpha_min, alpha_max]
    alpha_grid: np.ndarray
    sectorial: np.ndarray  # (n, 2) booleans: [converter, grid]
    per_frequency: np.ndarray  # "pass" | "fail" | "inapplicable"
    holds: bool
    applicable: bool


def _numerical_range_boundary(G: np.ndarray, n_support: int = 256) -> np.ndarray:
    """Boundary vertices of {u^H G u : ||u|| = 1} via the support-angle sweep."""
    phis = np.linspace(0.0, 2 * np.pi, n_support, endpoint=False)
    rot = np.exp(-1j * phis)[:, None, None] * G
    Hs = (rot + np.swapaxes(rot, 1, 2).conj()) / 2
    _, V = np.linalg.eigh(Hs)
    u = V[..., -1]
    return np.einsum("ki,ij,kj->k", u.conj(), G, u)


def _phase_angles(G: np.ndarray, n_support: int = 256):
    """(semi-sectorial?, alpha_min, alpha_max) of the numerical range of G.

    Semi-sectorial means the numerical range admits supporting lines spanning
    at most pi, i.e. 0 is not interior: some rotated Hermitian part is
    negative semidefinite.  Angles come from the boundary vertex arguments
    with points on the negative real axis resolved to +pi.
    """
    scale = float(np.linalg.norm(G, 2))
    if scale == 0.0:
        return True, 0.0, 0.0
    phis = np.linspace(0.0, 2 * np.pi, n_support, endpoint=False)
    rot = np.exp(-1j * phis)[:, None, None] * G
    Hs = (rot + np.swapaxes(rot, 1, 2).conj()) / 2
    evals = np.linalg.eigvalsh(Hs)
    support = evals[:, -1]
    if float(np.min(support)) > 1e-9 * scale:
        return False, float("nan"), float("nan")
    z = _numerical_range_boundary(G, n_support)
    z = z[np.abs(z) > 1e-12 * scale]
    if z.size == 0:
        return True, 0.0, 0.0
    ang = np.angle(z)
    near_neg_axis = (z.real < 0) & (np.abs(z.imag) <= 1e-12 * scale)
    ang[near_neg_axis] = np.pi
    return True, float(np.min(ang)), float(np.max(ang))


def small_phase_check(Yc: TransferMatrixModel, Zgrid: TransferMatrixModel,
                      grid: FrequencyGrid, n_support: int = 256) -> SmallPhaseResult:
    """Phase criterion: alpha_max(Yc) + alpha_max(Zgrid) < pi and
    alpha_min(Yc) + alpha_min(Zgrid) > -pi at every frequency where both
    numerical ranges are semi-sectorial; non-sectorial frequencies render the
    criterion inapplicable there (distinct from failing)."""
    n = len(grid)
    a_c = np.full((n, 2), np.nan)
    a_g = np.full((n, 2), np.nan)
    sect = np.zeros((n, 2), dtype=bool)
    status = np.empty(n, dtype=object)
    for k, w in enumerate(grid.omegas):
        sc, lo_c, hi_c = _phase_angles(evaluate(Yc, w), n_support)
        sg, lo_g, hi_g = _phase_angles(evaluate(Zgrid, w), n_support)
        sect[k] = (sc, sg)
        a_c[k] = (lo_c, hi_c)
        a_g[k] = (lo_g, hi_g)
        if not (sc and sg):
            status[k] = "inapplicable"
        elif hi_c + hi_g < np.pi and lo_c + lo_g > -np.pi:
            status[k] = "pass"
        else:
            status[k] = "fail"
    applicable = bool(np.all(status != "inapplicable"))
    holds = bool(applicable and np.all(status == "pass"))
    return SmallPhaseResult(alpha_converter=a_c, alpha_grid=a_g, sectorial=sect,
                            per_frequency=status, holds=holds, applicable=applicable)


@dataclass(frozen=True)
class PassivityResult:
    ifp_converter: np.ndarray
    ofp_converter: np.ndarray
    ifp_grid: np.ndarray
    ofp_grid: np.ndarray
    per_frequency: np.ndarray  # "pass" | "fail" | "inapplicable"
    holds: bool
    applicable: bool


def _ifp(G: np.ndarray) -> float:
    return float(np.min(np.linalg.eigvalsh(G + G.conj().T))) / 2


def _ofp(G: np.ndarray) -> Optional[float]:
    try:
        Gi = invert_at(G)
    except NearSingularError:
        return None
    return _ifp(Gi)


def passivity_check(Yc: TransferMatrixModel, Zgrid: TransferMatrixModel,
                    grid: FrequencyGrid) -> PassivityResult:
    """Passivity-index criterion: at every frequency at least one of
    IFP(Yc) + OFP(Zgrid) > 0 or OFP(Yc) + IFP(Zgrid) > 0 must hold.
    IFP is half the minimum eigenvalue of the Hermitian part; OFP the same
    for the inverse.  A singular matrix where an OFP is needed marks the
    frequency inapplicable."""
    n = len(grid)
    ic = np.empty(n)
    ig = np.empty(n)
    oc = np.full(n, np.nan)
    og = np.full(n, np.nan)
    status = np.empty(n, dtype=object)
    for k, w in enumerate(grid.omegas):
        Gc = evaluate(Yc, w)
        Gg = evaluate(Zgrid, w)
        ic[k] = _ifp(Gc)
        ig[k] = _ifp(Gg)
        ofp_c = _ofp(Gc)
        ofp_g = _ofp(Gg)
        if ofp_c is not None:
            oc[k] = ofp_c
        if ofp_g is not None:
            og[k] = ofp_g
        cond1 = None if ofp_g is None else ic[k] + ofp_g > 0
        cond2 = None if ofp_c is None else ofp_c + ig[k] > 0
        if cond1 or cond2:
            status[k] = "pass"
        elif cond1 is None and cond2 is None:
            status[k] = "inapplicable"
        else:
            status[k] = "fail"
    applicable = bool(np.all(status != "inapplicable"))
    holds = bool(np.all(status == "pass"))
    return PassivityResult(ifp_converter=ic, ofp_converter=oc, ifp_grid=ig,
                           ofp_grid=og, per_frequency=status, holds=holds,
                           applicable=applicable)


@dataclass(frozen=True)
class ComparisonRow:
    criterion: str
    verdict: str
    failing_bands_hz: tuple
    inapplicable_bands_hz: tuple
    note: str = ""


@dataclass(frozen=True)
class ComparisonTable:
    frequencies: FrequencyGrid
    rows: tuple
    report: CertificationReport

    def as_text(self) -> str:
        lines = [f"{'criterion':<14} {'verdict':<16} failing / inapplicable bands (Hz)"]
        for r in self.rows:
            bands = _format_bands(r.failing_bands_hz) or "-"
            inap = _format_bands(r.inapplicable_bands_hz)
            tail = f"  inapplicable: {inap}" if inap else ""
            note = f"  [{r.note}]" if r.note else ""
            lines.append(f"{r.criterion:<14} {r.verdict:<16} {bands}{tail}{note}")
        return "\n".join(lines)


def _bands(f_hz: np.ndarray, mask: np.ndarray) -> tuple:
    """Contiguous frequency bands (f_lo, f_hi) where mask is True."""
    out = []
    k = 0
    n = mask.size
    while k < n:
        if mask[k]:
            j = k
            while j + 1 < n and mask[j + 1]:
                j += 1
            out.append((float(f_hz[k]), float(f_hz[j])))
            k = j + 1
        else:
            k += 1
    return tuple(out)


def _format_bands(bands) -> str:
    return ", ".join(f"[{lo:.6g}, {hi:.6g}]" for lo, hi in bands)


def compare_criteria(Yc: TransferMatrixModel, Ygrid: TransferMatrixModel,
                     grid: FrequencyGrid, opts: SrgOptions = SrgOptions(),
                     Zgrid: Optional[TransferMatrixModel] = None) -> ComparisonTable:
    """Run the SRG separation test and the four classical criteria on one
    grid and tabulate verdicts with failing/inapplicable sub-bands.

    The classical criteria see the grid as an impedance; when Zgrid is not
    supplied it is the pointwise inverse of Ygrid.
    """
    if Zgrid is None:
        Zgrid = InverseModel(Ygrid)
    f = grid.hz
    report = certify_linear(Yc, Ygrid, grid, opts)
    rows = [ComparisonRow(
        criterion="srg", verdict=report.verdict,
        failing_bands_hz=_bands(f, report.margin <= RHO_FLOOR),
        inapplicable_bands_hz=(),
        note="" if all(r.stable is True for r in report.rh_inf.values())
        else "pole precheck not conclusive")]

    try:
        g = gnc_check(Yc, Zgrid, grid)
        gnc_verdict = "stable" if g.stable else "unstable"
        gnc_note = f"winding={g.winding}"
        if any(r.stable is not True for r in g.prechecks.values()):
            gnc_note += "; open-loop stability not established"
        rows.append(ComparisonRow("gnc", gnc_verdict, (), (), gnc_note))
    except GridTooCoarseError as exc:
        rows.append(ComparisonRow("gnc", "indeterminate", (), (), str(exc)))

    sg = small_gain_check(Yc, Zgrid, grid)
    rows.append(ComparisonRow(
        "small-gain", "pass" if sg.holds else "fail",
        _bands(f, ~sg.per_frequency), ()))

    sp = small_phase_check(Yc, Zgrid, grid)
    sp_verdict = ("pass" if sp.holds else
                  "inapplicable" if not sp.applicable else "fail")
    rows.append(ComparisonRow(
        "small-phase", sp_verdict,
        _bands(f, sp.per_frequency == "fail"),
        _bands(f, sp.per_frequency == "inapplicable")))

    pv = passivity_check(Yc, Zgrid, grid)
    pv_verdict = ("pass" if pv.holds else
                  "inapplicable" if not pv.applicable else "fail")
    rows.append(ComparisonRow(
        "passivity", pv_verdict,
        _bands(f, pv.per_frequency == "fail"),
        _bands(f, pv.per_frequency == "inapplicable")))

    return ComparisonTable(frequencies=grid, rows=tuple(rows), report=report)
