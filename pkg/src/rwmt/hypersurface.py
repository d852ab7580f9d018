"""Numerical jets of hypersurface charts: Gauss map, shape operator, curvatures.

A chart is a map from a rectangular parameter grid U in R^n into the ambient
coordinates of a space form.  Jets are computed by central differences; the
Gauss map is the unit normal inside the tangent space of the model, oriented
so that (dphi(e_1), ..., dphi(e_n), nu) is positive.  Principal curvatures
come from the generalized symmetric eigenproblem of the shape operator in the
induced metric and are clustered by multiplicity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh

from .spaceforms import GeometryError, SpaceForm, co, si

CLUSTER_REL_TOL = 1e-6
SYMMETRY_TOL = 1e-5
RANK_REL_TOL = 1e-7


class ChartRankError(GeometryError):
    """dphi is rank deficient at a grid point."""


class FocalDistanceError(GeometryError):
    """Equidistant displacement hits a focal distance."""


@dataclass(frozen=True)
class AnalyticOracle:
    """Closed-form Gauss map and principal curvature clusters of a chart."""

    nu: Callable[[np.ndarray], np.ndarray]
    clusters: Callable[[np.ndarray], tuple[tuple[float, int], ...]]


@dataclass
class HypersurfaceChart:
    """Sampled immersion of an n-dimensional patch into Q^{n+1}_c.

    eval must be defined on an open neighborhood of the grid box so that
    finite-difference stencils never fall off the domain.
    """

    spaceform: SpaceForm
    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    axes: tuple[np.ndarray, ...]
    oracle: AnalyticOracle | None = None
    name: str = "chart"
    scale: float = field(default=0.0)

    def __post_init__(self):
        if self.dim != self.spaceform.n:
            raise GeometryError(
                f"chart dimension {self.dim} does not match hypersurfaces "
                f"of Q^{self.spaceform.intrinsic_dim}_{self.spaceform.c}")
        if len(self.axes) != self.dim:
            raise GeometryError("grid must have one axis per parameter")
        self.axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if self.scale == 0.0:
            corners = [self.eval(np.array(u)) for u in
                       np.stack(np.meshgrid(*[a[[0, -1]] for a in self.axes],
                                            indexing="ij"), axis=-1).reshape(-1, self.dim)]
            self.scale = max(1.0, max(float(np.max(np.abs(p))) for p in corners))

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    def grid_points(self):
        """Iterate (index tuple, parameter point) over the grid."""
        mesh = np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)
        for idx in np.ndindex(*self.grid_shape):
            yield idx, mesh[idx]

    def default_step(self) -> float:
        return 1e-4 * self.scale


@dataclass
class PointJet:
    """First and second order data of a chart at one parameter point."""

    u: np.ndarray
    x: np.ndarray
    dphi: np.ndarray           # ambient x n
    dnu: np.ndarray            # ambient x n
    nu: np.ndarray
    g: np.ndarray              # n x n first fundamental form
    shape_eigvals: np.ndarray  # ascending principal curvatures
    principal_dirs: np.ndarray  # n x n, columns in parameter coordinates
    frame: np.ndarray          # ambient x n, g-orthonormal principal frame
    clusters: tuple[tuple[float, int], ...]
    sym_defect: float
    h: float


def _fd_columns(f: Callable, u: np.ndarray, h: float, order: int = 2) -> np.ndarray:
    """Columns of the Jacobian of f at u by central differences."""
    cols = []
    for a in range(len(u)):
        e = np.zeros_like(u)
        e[a] = 1.0
        if order == 2:
            cols.append((f(u + h * e) - f(u - h * e)) / (2 * h))
        else:
            cols.append((-f(u + 2 * h * e) + 8 * f(u + h * e)
                         - 8 * f(u - h * e) + f(u - 2 * h * e)) / (12 * h))
    return np.column_stack(cols)


def _normal_from_tangents(M: SpaceForm, x: np.ndarray, J: np.ndarray) -> np.ndarray:
    """Unit normal of span(J) inside T_x Q, before orientation."""
    B = M.tangent_basis(x)  # ambient x (n+1), metric-orthonormal
    G = np.diag(M.signature)
    C = B.T @ G @ J          # (n+1) x n coordinates of the tangents
    U, S, _ = np.linalg.svd(C)
    if S[-1] < RANK_REL_TOL * S[0]:
        raise ChartRankError(
            f"dphi rank deficient: singular values {S}")
    nu = B @ U[:, -1]
    return nu / math.sqrt(abs(M.inner(nu, nu)))


def _orient(M: SpaceForm, x: np.ndarray, J: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """Flip nu so (dphi(e_1),...,dphi(e_n), nu) is positively oriented.

    For c != 0 the orientation of T_x Q is fixed by appending the position
    vector: det[J | nu | x] > 0 in ambient coordinates.
    """
    if M.c == 0:
        d = np.linalg.det(np.column_stack([J, nu]))
    else:
        d = np.linalg.det(np.column_stack([J, nu, x]))
    return -nu if d < 0 else nu


def cluster_eigenvalues(vals: Sequence[float],
                        rel_tol: float = CLUSTER_REL_TOL
                        ) -> tuple[tuple[float, int], ...]:
    """Merge ascending eigenvalues into (value, multiplicity) clusters."""
    clusters: list[list[float]] = []
    for v in vals:
        if clusters and abs(v - clusters[-1][-1]) <= rel_tol * (1.0 + abs(v)):
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return tuple((float(np.mean(c)), len(c)) for c in clusters)


def jet(chart: HypersurfaceChart, u, h: float | None = None,
        stencil_order: int = 2, _retry: int = 2) -> PointJet:
    """Numerical jet of the chart at parameter point u.

    Retries with a halved step when the shape operator fails its symmetry
    check, which flags a bad chart or step size.
    """
    M = chart.spaceform
    u = np.asarray(u, dtype=float)
    if h is None:
        h = chart.default_step()
    x = chart.eval(u)
    if M.quadric_defect(x) > 1e-9 * chart.scale:
        raise GeometryError(
            f"chart point {x} off the model quadric by {M.quadric_defect(x):.2e}")
    J = _fd_columns(chart.eval, u, h, stencil_order)
    G = np.diag(M.signature)
    g = J.T @ G @ J

    def nu_at(v: np.ndarray) -> np.ndarray:
        Jv = _fd_columns(chart.eval, v, h, stencil_order)
        return _orient(M, chart.eval(v), Jv, _normal_from_tangents(M, chart.eval(v), Jv))

    nu = nu_at(u)
    N = _fd_columns(nu_at, u, h, stencil_order)
    # shape operator: solve g A = -J^T G dnu, then symmetrize g A
    gA = -J.T @ G @ N
    defect = np.linalg.norm(gA - gA.T) / max(1.0, np.linalg.norm(gA))
    if defect > SYMMETRY_TOL:
        if _retry > 0:
            return jet(chart, u, h / 2.0, stencil_order, _retry - 1)
        raise GeometryError(
            f"shape operator asymmetric ({defect:.2e}); chart or step is bad")
    S = 0.5 * (gA + gA.T)
    vals, vecs = eigh(S, g)  # g-orthonormal eigenvectors, ascending values
    frame = J @ vecs
    return PointJet(u=u, x=x, dphi=J, dnu=N, nu=nu, g=g,
                    shape_eigvals=vals, principal_dirs=vecs, frame=frame,
                    clusters=cluster_eigenvalues(vals), sym_defect=float(defect),
                    h=h)


def chart_clusters(chart: HypersurfaceChart, u,
                   h: float | None = None) -> tuple[tuple[float, int], ...]:
    """Principal curvature clusters at u, from the oracle when available."""
    if chart.oracle is not None:
        return chart.oracle.clusters(np.asarray(u, dtype=float))
    return jet(chart, u, h).clusters


def chart_nu(chart: HypersurfaceChart, u, h: float | None = None) -> np.ndarray:
    """Gauss map at u, from the oracle when available."""
    if chart.oracle is not None:
        return chart.oracle.nu(np.asarray(u, dtype=float))
    return jet(chart, u, h).nu


def legendrian_rank_check(chart: HypersurfaceChart, u,
                          h: float | None = None) -> tuple[bool, float]:
    """True iff the stacked differential (dphi, dnu) has full rank n.

    Returns (flag, condition number); a numerical sanity diagnostic.
    """
    try:
        pj = jet(chart, u, h)
    except ChartRankError:
        # stack raw differentials to report a condition number anyway
        uu = np.asarray(u, dtype=float)
        hh = h if h is not None else chart.default_step()
        J = _fd_columns(chart.eval, uu, hh)
        S = np.linalg.svd(J, compute_uv=False)
        return False, float(S[0] / max(S[-1], 1e-300))
    stacked = np.vstack([pj.dphi, pj.dnu])
    S = np.linalg.svd(stacked, compute_uv=False)
    cond = float(S[0] / max(S[-1], 1e-300))
    return bool(S[-1] >= 1e-9 * S[0]), cond


def cluster_pattern(chart: HypersurfaceChart,
                    h: float | None = None) -> tuple[int, ...]:
    """Multiplicity pattern (m_1, ..., m_p), enforced constant across the grid."""
    pattern = None
    for idx, u in chart.grid_points():
        cl = chart_clusters(chart, u, h)
        pat = tuple(m for _, m in cl)
        if pattern is None:
            pattern = pat
        elif pat != pattern:
            raise GeometryError(
                f"principal curvature pattern varies across the grid: "
                f"{pattern} vs {pat} at index {idx}")
    return pattern


def equidistant_curvature(c: int, kappa: float, s: float) -> float:
    """Principal curvature of the displaced hypersurface, in pole-free form."""
    cs, ss = co(c, s), si(c, s)
    den = cs - kappa * ss
    if abs(den) < 1e-12:
        raise FocalDistanceError(f"kappa = {kappa} is focal at s = {s}")
    return (kappa * cs + c * ss) / den


def equidistant(chart: HypersurfaceChart, s: float,
                h: float | None = None) -> HypersurfaceChart:
    """The displaced chart u -> co(s) phi(u) + si(s) nu(u).

    Checks co(s) - kappa si(s) != 0 at all grid points first; the transported
    normal -c si(s) phi + co(s) nu plays the role of the Gauss map and the
    principal curvatures transform by equidistant_curvature.
    """
    M = chart.spaceform
    c = M.c
    cs, ss = co(c, s), si(c, s)
    for idx, u in chart.grid_points():
        for kappa, _ in chart_clusters(chart, u, h):
            if abs(cs - kappa * ss) < 1e-8:
                raise FocalDistanceError(
                    f"displacement s = {s} is focal for kappa = {kappa} "
                    f"at grid index {idx}")

    def new_eval(u: np.ndarray) -> np.ndarray:
        return cs * chart.eval(u) + ss * chart_nu(chart, u, h)

    oracle = None
    if chart.oracle is not None:
        base_nu, base_cl = chart.oracle.nu, chart.oracle.clusters

        def new_nu(u: np.ndarray) -> np.ndarray:
            return -c * ss * chart.eval(u) + cs * base_nu(u)

        def new_clusters(u: np.ndarray) -> tuple[tuple[float, int], ...]:
            moved = [(equidistant_curvature(c, k, s), m) for k, m in base_cl(u)]
            moved.sort()
            return tuple(moved)

        oracle = AnalyticOracle(nu=new_nu, clusters=new_clusters)
    return HypersurfaceChart(spaceform=M, dim=chart.dim, eval=new_eval,
                             axes=chart.axes, oracle=oracle,
                             name=f"equidistant({chart.name}, {s})")


# ---------------------------------------------------------------------------
# CSV chart input: header u1,...,un,x1,...,x{amb}; row-major structured grid;
# sidecar JSON metadata with keys c, n, grid_shape.


def load_chart_csv(path: str, meta_path: str | None = None) -> HypersurfaceChart:
    meta_path = meta_path or path + ".meta.json"
    with open(meta_path) as fh:
        meta = json.load(fh)
    c, n = int(meta["c"]), int(meta["n"])
    shape = tuple(int(k) for k in meta["grid_shape"])
    M = SpaceForm(c=c, intrinsic_dim=n + 1)
    amb = M.ambient_dim
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    expected = tuple(f"u{i+1}" for i in range(n)) + tuple(f"x{i+1}" for i in range(amb))
    if names != expected:
        raise GeometryError(f"CSV header {names} != expected {expected}")
    rows = np.column_stack([data[name] for name in names])
    if rows.shape[0] != int(np.prod(shape)):
        raise GeometryError(
            f"grid shape {shape} does not match {rows.shape[0]} rows")
    params = rows[:, :n].reshape(shape + (n,))
    points = rows[:, n:].reshape(shape + (amb,))
    axes = []
    for a in range(n):
        take = [0] * n
        sl = tuple(slice(None) if i == a else take[i] for i in range(n))
        axes.append(np.ascontiguousarray(params[sl + (a,)]))
    axes = tuple(axes)

    def interp(u: np.ndarray) -> np.ndarray:
        return _tensor_lagrange(axes, points, np.asarray(u, dtype=float))

    return HypersurfaceChart(spaceform=M, dim=n, eval=interp, axes=axes,
                             name=f"csv({path})")


def _lagrange_weights(nodes: np.ndarray, x: float) -> np.ndarray:
    wts = np.ones(len(nodes))
    for i in range(len(nodes)):
        for j in range(len(nodes)):
            if i != j:
                wts[i] *= (x - nodes[j]) / (nodes[i] - nodes[j])
    return wts


def _tensor_lagrange(axes, values: np.ndarray, u: np.ndarray,
                     degree: int = 4) -> np.ndarray:
    """Local tensor-product Lagrange interpolation of grid values at u.

    Degree 4 per axis keeps second derivatives of the interpolant accurate
    enough for jet computations on reasonably fine grids.
    """
    npts = degree + 1
    block = values
    for a, ax in enumerate(axes):
        if len(ax) < npts:
            raise GeometryError(f"axis {a} needs at least {npts} grid nodes")
        i = int(np.searchsorted(ax, u[a]))
        j = int(np.clip(i - (npts + 1) // 2, 0, len(ax) - npts))
        wts = _lagrange_weights(ax[j:j + npts], float(u[a]))
        block = np.tensordot(wts, block[j:j + npts], axes=(0, 0))
    return block
