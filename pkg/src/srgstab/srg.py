"""Per-frequency scaled relative graphs of complex matrices and planar set
operations on them (Minkowski disk sums, tau-swept negations, distances).

The SRG of a matrix A is the image of the joint quadratic-form range
{(u^H H u, u^H K u) : ||u|| = 1}, H = (A + A^H)/2, K = A^H A, under
(a, b) -> a +/- j*sqrt(b - a^2).  The joint range is the numerical range of
H + jK, a convex set whose boundary is traced by top eigenvectors of rotated
Hermitian combinations; the map is injective on b >= a^2, so tracing the
(a, b) boundary traces the SRG boundary.

Regions are backed by shapely geometries (the conjugate-completed set in the
complex plane); `boundary_upper` keeps the upper-half-plane polyline for
export.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely import affinity
from shapely.geometry import LineString, MultiLineString, Point, Polygon
from shapely.geometry.base import BaseGeometry
from shapely.ops import transform as shp_transform
from shapely.ops import unary_union
from shapely.validation import make_valid

_EPS = 1e-12
# inner radial truncation of the tau sweep; stands in for the open limit tau -> 0
_TAU_INNER = 1e-9


class SrgComputationError(RuntimeError):
    pass


class InversionSingularityError(ValueError):
    pass


@dataclass(frozen=True)
class Disk:
    center: complex = 0j
    radius: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("disk radius must be nonnegative")


def default_tau_grid(n: int = 64, tau_min: float = 1e-4) -> np.ndarray:
    """Log-spaced tau values in (0, 1], always including 1."""
    if n < 2 or not (0 < tau_min < 1):
        raise ValueError("need n >= 2 and 0 < tau_min < 1")
    return np.logspace(np.log10(tau_min), 0.0, n)


@dataclass(frozen=True)
class TauSweep:
    """The family -tau * base for tau in the grid (negate=True is the paper use)."""

    base: "SrgRegion"
    tau_grid: np.ndarray = field(default_factory=default_tau_grid)
    negate: bool = True

    def __post_init__(self):
        t = np.asarray(self.tau_grid, dtype=float)
        if np.any(t <= 0) or np.any(t > 1) or not np.any(np.isclose(t, 1.0)):
            raise ValueError("tau grid must lie in (0, 1] and contain 1")
        object.__setattr__(self, "tau_grid", np.sort(t))


def _mirror(geom: BaseGeometry) -> BaseGeometry:
    return affinity.scale(geom, xfact=1.0, yfact=-1.0, origin=(0, 0))


def _valid(geom: BaseGeometry) -> BaseGeometry:
    if geom.is_valid:
        return geom
    return make_valid(geom)


def _loop_geometry(pts: np.ndarray) -> BaseGeometry:
    """Geometry of a closed boundary loop in the upper half-plane, plus its
    conjugate reflection.  Degenerate loops collapse to lines or points."""
    pts = np.asarray(pts, dtype=complex)
    coords = np.column_stack([pts.real, pts.imag])
    if len(pts) == 1:
        upper: BaseGeometry = Point(coords[0])
    elif len(pts) == 2:
        upper = LineString(coords)
    else:
        ring = np.vstack([coords, coords[:1]])
        line = LineString(ring)
        poly = _valid(Polygon(ring))
        upper = unary_union([poly, line])
    return unary_union([upper, _mirror(upper)])


def _iter_parts(geom: BaseGeometry):
    if geom.is_empty:
        return
    if geom.geom_type in ("MultiPolygon", "MultiLineString", "MultiPoint", "GeometryCollection"):
        for g in geom.geoms:
            yield from _iter_parts(g)
    else:
        yield geom


def _boundary_curves(geom: BaseGeometry):
    """Yield Point/LineString pieces forming the boundary of a geometry."""
    for g in _iter_parts(geom):
        if g.geom_type == "Polygon":
            yield LineString(g.exterior.coords)
            for hole in g.interiors:
                yield LineString(hole.coords)
        else:
            yield g


def _boundary_coords(geom: BaseGeometry) -> np.ndarray:
    out = []
    for c in _boundary_curves(geom):
        arr = np.asarray(c.coords)
        out.append(arr[:, 0] + 1j * arr[:, 1])
    if not out:
        return np.array([], dtype=complex)
    return np.concatenate(out)


class SrgRegion:
    """Planar SRG set: conjugate-symmetric boundary plus fill convention.

    `filled` is True when the region is a genuinely two-dimensional set
    (disk sums, tau sweeps); matrix SRGs are stored as the image of the
    filled joint quadratic range, which may degenerate to a curve for
    normal matrices.  Separation tests always act on the backing geometry.
    """

    def __init__(self, geometry: BaseGeometry, filled: bool,
                 conjugate_symmetric: bool = True, loop: np.ndarray | None = None):
        if geometry.is_empty:
            raise ValueError("empty region")
        self.geometry = geometry
        self.filled = filled
        self.conjugate_symmetric = conjugate_symmetric
        self._loop = None if loop is None else np.asarray(loop, dtype=complex)

    @property
    def boundary_upper(self) -> np.ndarray:
        """Boundary vertices with Im >= 0 (ordered per boundary piece)."""
        if self._loop is not None:
            return self._loop.copy()
        pts = _boundary_coords(self.geometry)
        return pts[pts.imag >= -1e-15]

    @classmethod
    def from_upper_loop(cls, pts, filled: bool = False) -> "SrgRegion":
        pts = np.atleast_1d(np.asarray(pts, dtype=complex))
        if pts.size == 0:
            raise ValueError("empty boundary loop")
        if np.any(pts.imag < -1e-9 * (1 + np.max(np.abs(pts)))):
            raise ValueError("upper loop contains points with Im < 0")
        pts = pts.real + 1j * np.maximum(pts.imag, 0.0)
        keep = np.ones(pts.size, dtype=bool)
        keep[1:] = np.abs(np.diff(pts)) > _EPS * (1 + np.max(np.abs(pts)))
        pts = pts[keep]
        if pts.size > 1 and abs(pts[0] - pts[-1]) <= _EPS * (1 + np.max(np.abs(pts))):
            pts = pts[:-1]
        return cls(_loop_geometry(pts), filled=filled, loop=pts)

    @classmethod
    def from_geometry(cls, geometry: BaseGeometry, filled: bool = True,
                      conjugate_symmetric: bool = True) -> "SrgRegion":
        return cls(_valid(geometry), filled=filled, conjugate_symmetric=conjugate_symmetric)

    @classmethod
    def from_disk(cls, disk: Disk, quad_segs: int = 96) -> "SrgRegion":
        center = Point(disk.center.real, disk.center.imag)
        geom = center.buffer(disk.radius, quad_segs=quad_segs) if disk.radius > 0 else center
        return cls(geom, filled=disk.radius > 0,
                   conjugate_symmetric=abs(disk.center.imag) < _EPS)

    @classmethod
    def from_point(cls, z: complex) -> "SrgRegion":
        return cls.from_upper_loop([complex(z.real, abs(z.imag))])

    def scale(self) -> float:
        """Characteristic magnitude, used to scale tolerances."""
        pts = _boundary_coords(self.geometry)
        return float(np.max(np.abs(pts))) if pts.size else 0.0


def _support_points(H: np.ndarray, K: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Boundary points (a, b) of the joint range for support angles phis."""
    G = np.cos(phis)[:, None, None] * H + np.sin(phis)[:, None, None] * K
    try:
        _, V = np.linalg.eigh(G)
    except np.linalg.LinAlgError as exc:
        raise SrgComputationError(f"eigen-solver failed on support sweep ({phis})") from exc
    u = V[..., -1]
    a = np.real(np.einsum("ki,ij,kj->k", u.conj(), H, u))
    b = np.real(np.einsum("ki,ij,kj->k", u.conj(), K, u))
    return np.column_stack([a, b])


def _ab_to_z(ab: np.ndarray) -> np.ndarray:
    a = ab[..., 0]
    b = ab[..., 1]
    return a + 1j * np.sqrt(np.maximum(b - a * a, 0.0))


def srg_of_matrix(A: np.ndarray, n_support: int = 512,
                  refine_tol: float | None = None) -> SrgRegion:
    """Exact SRG of a complex matrix as an upper-boundary loop region.

    The boundary of the joint range is sampled at `n_support` support angles
    and refined adaptively wherever consecutive mapped points are farther
    apart than `refine_tol` (default 5e-4 * sigma_max(A)): the planar map
    stretches strongly near b ~ a^2.  Flat boundary edges (degenerate top
    eigenvalues, e.g. normal matrices) are filled by linear interpolation in
    (a, b), which is exact there.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError("A must be square with n >= 1")
    if n_support < 8:
        raise ValueError("n_support must be >= 8")
    n = A.shape[0]
    if n == 1:
        return SrgRegion.from_point(A[0, 0])
    norm_a = float(np.linalg.norm(A, 2))
    if norm_a == 0:
        return SrgRegion.from_point(0j)
    tol = refine_tol if refine_tol is not None else 5e-4 * norm_a
    H = (A + A.conj().T) / 2
    K = A.conj().T @ A

    phis = list(np.linspace(0.0, 2 * np.pi, n_support, endpoint=False))
    abs_ = list(_support_points(H, K, np.array(phis)))
    max_points = 200_000
    # level-wise bisection of support angles where the mapped gap is too wide
    for _ in range(60):
        z = _ab_to_z(np.array(abs_))
        gaps = np.abs(np.diff(np.append(z, z[0])))
        dphi = np.diff(np.append(phis, phis[0] + 2 * np.pi))
        need = np.flatnonzero((gaps > tol) & (dphi > 1e-9))
        if need.size == 0 or len(phis) > max_points:
            break
        mids = np.array([phis[k] + dphi[k] / 2 for k in need])
        ab_m = _support_points(H, K, mids)
        for idx, k in enumerate(reversed(need)):
            k = int(k)
            pos = len(need) - 1 - idx
            phis.insert(k + 1, float(mids[pos]))
            abs_.insert(k + 1, ab_m[pos])
    ab = np.array(abs_)
    # flat edges: interpolate in (a, b) where the support angle collapsed
    z = _ab_to_z(ab)
    gaps = np.abs(np.diff(np.append(z, z[0])))
    out = []
    m = len(ab)
    for k in range(m):
        out.append(ab[k])
        if gaps[k] > tol:
            nxt = ab[(k + 1) % m]
            seg = nxt - ab[k]
            # subdivide the chord until mapped spacing falls under tol
            ts = _refine_chord(ab[k], seg, tol)
            for t in ts:
                out.append(ab[k] + t * seg)
    loop = _ab_to_z(np.array(out))
    return SrgRegion.from_upper_loop(loop, filled=False)


def _refine_chord(ab0: np.ndarray, seg: np.ndarray, tol: float) -> np.ndarray:
    """Interior parameters t in (0,1) so mapped points along ab0 + t*seg are
    spaced at most tol apart."""
    ts = np.array([0.0, 1.0])
    for _ in range(40):
        z = _ab_to_z(ab0 + ts[:, None] * seg)
        gaps = np.abs(np.diff(z))
        need = np.flatnonzero(gaps > tol)
        if need.size == 0 or ts.size > 5000:
            break
        mids = (ts[need] + ts[need + 1]) / 2
        ts = np.sort(np.concatenate([ts, mids]))
    return ts[1:-1]


def srg_sample_oracle(A: np.ndarray, n_samples: int, seed: int = 0) -> np.ndarray:
    """Direct sampling of the defining set: random unit vectors u mapped to
    ||Au|| * exp(+/- j*angle(u, Au)).  Zero-output directions are skipped."""
    A = np.asarray(A, dtype=complex)
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    n = A.shape[0]
    u = rng.standard_normal((n_samples, n)) + 1j * rng.standard_normal((n_samples, n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    Au = u @ A.T
    r = np.linalg.norm(Au, axis=1)
    keep = r > 0
    u, Au, r = u[keep], Au[keep], r[keep]
    if r.size == 0:
        return np.array([], dtype=complex)
    cosang = np.clip(np.real(np.sum(u.conj() * Au, axis=1)) / r, -1.0, 1.0)
    ang = np.arccos(cosang)
    upper = r * np.exp(1j * ang)
    return np.concatenate([upper, upper.conj()])


def _densify(geom: BaseGeometry, step: float) -> BaseGeometry:
    try:
        return shapely.segmentize(geom, step)
    except (shapely.errors.GEOSException, ValueError):
        return geom


def mobius_invert(region: SrgRegion) -> SrgRegion:
    """Fact-1 inversion z -> conj(1/z) = z/|z|^2 of the whole region."""
    pts = _boundary_coords(region.geometry)
    min_abs = float(np.min(np.abs(pts)))
    if min_abs <= 1e-12:
        raise InversionSingularityError(
            f"boundary point within {min_abs:.3e} of the origin")
    if region.geometry.intersects(Point(0, 0)):
        raise InversionSingularityError("region covers the origin; inverse is unbounded")
    if region._loop is not None:
        loop = region._loop
        inv = loop / np.abs(loop) ** 2
        return SrgRegion.from_upper_loop(inv, filled=region.filled)
    scale = region.scale()
    dens = _densify(region.geometry, max(scale / 2048.0, 1e-9))

    def f(x, y):
        d = x * x + y * y
        return x / d, y / d

    return SrgRegion.from_geometry(_valid(shp_transform(f, dens)), filled=region.filled,
                                   conjugate_symmetric=region.conjugate_symmetric)


def minkowski_sum_disk(region: SrgRegion, d: Disk, quad_segs: int = 96) -> SrgRegion:
    """Minkowski sum of the region with a disk, via translate + buffer."""
    g = region.geometry
    if d.center != 0:
        g = affinity.translate(g, xoff=d.center.real, yoff=d.center.imag)
    if d.radius > 0:
        g = g.buffer(d.radius, quad_segs=quad_segs)
        filled = True
    else:
        filled = region.filled
    sym = region.conjugate_symmetric and abs(d.center.imag) < _EPS
    return SrgRegion.from_geometry(g, filled=filled, conjugate_symmetric=sym)


def region_distance(a: SrgRegion, b: SrgRegion) -> float:
    """Minimum Euclidean distance between regions; 0 when they intersect."""
    return float(a.geometry.distance(b.geometry))


def tau_swept_region(base: SrgRegion, tau_grid=None) -> SrgRegion:
    """Filled union over tau in (0, 1] of -tau * base.

    The union is radial: it equals the tau=1 copy plus the radial shells
    swept by the boundary, which are built exactly as quadrilaterals down to
    a tiny inner truncation (the open limit tau -> 0 excludes the origin).
    """
    if tau_grid is not None:
        TauSweep(base, np.asarray(tau_grid, dtype=float))  # validate
    geom = base.geometry
    parts = [affinity.scale(geom, xfact=-1.0, yfact=-1.0, origin=(0, 0))]
    for curve in _boundary_curves(geom):
        if curve.geom_type == "Point":
            x, y = curve.x, curve.y
            if x * x + y * y > 0:
                parts.append(LineString([(-x, -y), (-_TAU_INNER * x, -_TAU_INNER * y)]))
            continue
        coords = np.asarray(curve.coords)
        for k in range(len(coords) - 1):
            (x1, y1), (x2, y2) = coords[k], coords[k + 1]
            quad = Polygon([
                (-x1, -y1), (-x2, -y2),
                (-_TAU_INNER * x2, -_TAU_INNER * y2),
                (-_TAU_INNER * x1, -_TAU_INNER * y1),
            ])
            if not quad.is_valid:
                quad = make_valid(quad)
            if not quad.is_empty:
                parts.append(quad)
    swept = _valid(unary_union(parts))
    return SrgRegion.from_geometry(swept, filled=True,
                                   conjugate_symmetric=base.conjugate_symmetric)


def min_distance_over_tau(fixed: SrgRegion, sweep: TauSweep) -> float:
    """Stability-margin distance inf over tau of dist(fixed, -tau * base).

    The swept envelope already carries the continuum of tau values; a
    golden-section pass over the scalar tau distance guards the coarse grid
    when the two estimates disagree.
    """
    if not sweep.negate:
        raise ValueError("margin sweep is defined for the negated family")
    swept = tau_swept_region(sweep.base, sweep.tau_grid)
    d_env = region_distance(fixed, swept)
    base_geom = sweep.base.geometry

    def g(tau: float) -> float:
        return float(fixed.geometry.distance(
            affinity.scale(base_geom, xfact=-tau, yfact=-tau, origin=(0, 0))))

    ds = np.array([g(t) for t in sweep.tau_grid])
    k = int(np.argmin(ds))
    d_grid = float(ds[k])
    if d_grid - d_env > 1e-6:
        lo = sweep.tau_grid[max(k - 1, 0)]
        hi = sweep.tau_grid[min(k + 1, len(sweep.tau_grid) - 1)]
        d_grid = min(d_grid, _golden_min(g, lo, hi))
    return min(d_env, d_grid)


def _golden_min(g, lo: float, hi: float, tol: float = 1e-9) -> float:
    inv_phi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc < gd:
            b, d, gd = d, c, gc
            c = b - inv_phi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + inv_phi * (b - a)
            gd = g(d)
    return min(gc, gd)


def positive_real_reach(region: SrgRegion) -> float:
    """sup{x > 0 : x in region}, or 0 when the region misses the positive axis."""
    pts = _boundary_coords(region.geometry)
    if pts.size == 0:
        return 0.0
    reach = float(np.max(np.abs(pts))) * (1 + 1e-9)
    axis = LineString([(_EPS, 0.0), (reach, 0.0)])
    inter = region.geometry.intersection(axis)
    if inter.is_empty:
        return 0.0
    return float(inter.bounds[2])


def boundary_hausdorff(a: SrgRegion, b: SrgRegion) -> float:
    """Symmetric vertex-to-boundary Hausdorff distance between region boundaries."""
    return max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))


def _directed_hausdorff(a: SrgRegion, b: SrgRegion) -> float:
    pts = _boundary_coords(a.geometry)
    curves = unary_union(list(_boundary_curves(b.geometry)))
    shapely.prepare(curves)
    p = shapely.points(np.column_stack([pts.real, pts.imag]))
    return float(np.max(shapely.distance(p, curves)))


def distances_to_region(region: SrgRegion, pts: np.ndarray) -> np.ndarray:
    """Distance of each complex point to the region (0 for interior points).

    Containment is tested first with a prepared geometry; the exact distance
    is only computed for the points left outside.
    """
    pts = np.asarray(pts, dtype=complex)
    geom = region.geometry
    shapely.prepare(geom)
    p = shapely.points(np.column_stack([pts.real, pts.imag]))
    out = np.zeros(pts.shape, dtype=float)
    outside = ~shapely.intersects(geom, p)
    if np.any(outside):
        out[outside] = shapely.distance(p[outside], geom)
    return out


def points_in_region(region: SrgRegion, pts: np.ndarray, tol: float) -> np.ndarray:
    """Boolean mask: which complex points lie inside/on the region within tol."""
    return distances_to_region(region, pts) <= tol
