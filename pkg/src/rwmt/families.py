"""Builtin hypersurface families with closed-form Gauss maps and curvatures.

These are the umbilic and product-sphere classics: round spheres and
hyperplanes in R^{n+1}, product (Clifford) tori and small spheres in S^{n+1},
geodesic spheres, equidistant hypersurfaces and horospheres in H^{n+1}, plus
free-form graphs over a flat coordinate chart.  Each family declares its
normal field; the chart parametrization is reflected if needed so that the
declared normal is the oriented Gauss map.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .hypersurface import (AnalyticOracle, HypersurfaceChart, _fd_columns,
                           _normal_from_tangents, _orient)
from .spaceforms import GeometryError, SpaceForm, spaceform

FAMILIES = ("round_sphere", "hyperplane", "clifford_torus", "product_torus",
            "small_sphere", "geodesic_sphere", "equidistant_hypersurface",
            "horosphere", "graph")


def _sphere_param(u: np.ndarray) -> np.ndarray:
    """Iterated spherical chart R^n -> S^n in R^{n+1}."""
    out = np.array([math.cos(u[0]), math.sin(u[0])])
    for a in range(1, len(u)):
        out = np.append(out * math.cos(u[a]), math.sin(u[a]))
    return out


def _default_axes(n: int, lo: float, hi: float, res: int) -> tuple[np.ndarray, ...]:
    return tuple(np.linspace(lo, hi, res) for _ in range(n))


def _oriented(chart: HypersurfaceChart) -> HypersurfaceChart:
    """Reflect the first parameter if needed so the declared oracle normal
    is the positively oriented Gauss map of the chart."""
    M = chart.spaceform
    center = np.array([0.5 * (a[0] + a[-1]) for a in chart.axes])
    h = chart.default_step()
    J = _fd_columns(chart.eval, center, h, order=4)
    x = chart.eval(center)
    nu_oriented = _orient(M, x, J, _normal_from_tangents(M, x, J))
    if M.inner(nu_oriented, chart.oracle.nu(center)) > 0:
        return chart
    c0 = chart.axes[0][0] + chart.axes[0][-1]
    base_eval, base_nu, base_cl = chart.eval, chart.oracle.nu, chart.oracle.clusters

    def mirror(u):
        v = np.array(u, dtype=float)
        v[0] = c0 - v[0]
        return v

    return HypersurfaceChart(
        spaceform=M, dim=chart.dim,
        eval=lambda u: base_eval(mirror(u)),
        axes=chart.axes,
        oracle=AnalyticOracle(nu=lambda u: base_nu(mirror(u)),
                              clusters=lambda u: base_cl(mirror(u))),
        name=chart.name)


def _constant_clusters(*pairs) -> Callable:
    cl = tuple(sorted((float(k), int(m)) for k, m in pairs))
    return lambda u: cl


def round_sphere(r: float, n: int = 2, resolution: int = 17,
                 normal_sign: int = 1) -> HypersurfaceChart:
    """Sphere of radius r in R^{n+1}; kappa = normal_sign / r.

    normal_sign = 1 is the inward normal, -1 the outward one.
    """
    if r <= 0:
        raise GeometryError("round_sphere needs r > 0")
    M = spaceform(0, n)

    def ev(u):
        return r * _sphere_param(u)

    oracle = AnalyticOracle(nu=lambda u: -normal_sign * _sphere_param(u),
                            clusters=_constant_clusters((normal_sign / r, n)))
    chart = HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                              axes=_default_axes(n, 0.25, 1.05, resolution),
                              oracle=oracle, name=f"round_sphere(r={r})")
    return _oriented(chart)


def hyperplane(n: int = 2, offset: float = 0.0,
               resolution: int = 17) -> HypersurfaceChart:
    """Coordinate hyperplane x_{n+1} = offset in R^{n+1}; kappa = 0."""
    M = spaceform(0, n)

    def ev(u):
        return np.append(np.asarray(u, dtype=float), offset)

    e_last = np.zeros(n + 1)
    e_last[-1] = 1.0
    oracle = AnalyticOracle(nu=lambda u: e_last.copy(),
                            clusters=_constant_clusters((0.0, n)))
    chart = HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                              axes=_default_axes(n, -1.0, 1.0, resolution),
                              oracle=oracle, name="hyperplane")
    return _oriented(chart)


def product_torus(a: float, n: int = 2, k: int = 1,
                  resolution: int = 17) -> HypersurfaceChart:
    """S^k(cos a) x S^{n-k}(sin a) in S^{n+1}.

    Normal chosen so the curvatures are -tan(a) with multiplicity k and
    cot(a) with multiplicity n - k.
    """
    if not 0.0 < a < math.pi / 2:
        raise GeometryError("product torus needs a in (0, pi/2)")
    if not 1 <= k <= n - 1:
        raise GeometryError("product torus needs 1 <= k <= n-1")
    M = spaceform(1, n)
    ca, sa = math.cos(a), math.sin(a)

    def ev(u):
        u = np.asarray(u, dtype=float)
        return np.concatenate([ca * _sphere_param(u[:k]),
                               sa * _sphere_param(u[k:])])

    def nu(u):
        u = np.asarray(u, dtype=float)
        return np.concatenate([sa * _sphere_param(u[:k]),
                               -ca * _sphere_param(u[k:])])

    oracle = AnalyticOracle(
        nu=nu, clusters=_constant_clusters((-math.tan(a), k),
                                           (1.0 / math.tan(a), n - k)))
    chart = HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                              axes=_default_axes(n, 0.2, 1.2, resolution),
                              oracle=oracle,
                              name=f"product_torus(a={a}, k={k})")
    return _oriented(chart)


def clifford_torus(a: float, resolution: int = 17) -> HypersurfaceChart:
    """The flat torus S^1(cos a) x S^1(sin a) in S^3."""
    chart = product_torus(a, n=2, k=1, resolution=resolution)
    chart.name = f"clifford_torus(a={a})"
    return chart


def small_sphere(a: float, n: int = 2, resolution: int = 17) -> HypersurfaceChart:
    """Geodesic sphere of radius a about the pole of S^{n+1}; kappa = cot(a)."""
    if not 0.0 < a < math.pi:
        raise GeometryError("small sphere needs a in (0, pi)")
    M = spaceform(1, n)
    ca, sa = math.cos(a), math.sin(a)
    pole = np.zeros(n + 2)
    pole[-1] = 1.0

    def ev(u):
        return ca * pole + sa * np.append(_sphere_param(u), 0.0)

    def nu(u):
        return sa * pole - ca * np.append(_sphere_param(u), 0.0)

    oracle = AnalyticOracle(nu=nu,
                            clusters=_constant_clusters((1.0 / math.tan(a), n)))
    chart = HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                              axes=_default_axes(n, 0.25, 1.05, resolution),
                              oracle=oracle, name=f"small_sphere(a={a})")
    return _oriented(chart)


def geodesic_sphere(r: float, n: int = 2, resolution: int = 17,
                    normal_sign: int = 1) -> HypersurfaceChart:
    """Geodesic sphere of radius r in H^{n+1}; kappa = normal_sign * coth(r)."""
    if r <= 0:
        raise GeometryError("geodesic sphere needs r > 0")
    M = spaceform(-1, n)
    ch, sh = math.cosh(r), math.sinh(r)
    base = np.zeros(n + 2)
    base[-1] = 1.0

    def ev(u):
        return ch * base + sh * np.append(_sphere_param(u), 0.0)

    def nu(u):
        return -normal_sign * (sh * base + ch * np.append(_sphere_param(u), 0.0))

    oracle = AnalyticOracle(
        nu=nu, clusters=_constant_clusters((normal_sign / math.tanh(r), n)))
    chart = HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                              axes=_default_axes(n, 0.25, 1.05, resolution),
                              oracle=oracle, name=f"geodesic_sphere(r={r})")
    return _oriented(chart)


def equidistant_hypersurface(r: float, n: int = 2, resolution: int = 17,
                             normal_sign: int = 1) -> HypersurfaceChart:
    """Hypersurface at distance r from a totally geodesic H^n in H^{n+1}.

    kappa = normal_sign * tanh(r), multiplicity n; r = 0 gives the totally
    geodesic sheet.
    """
    M = spaceform(-1, n)
    ch, sh = math.cosh(r), math.sinh(r)
    e_mid = np.zeros(n + 2)
    e_mid[-2] = 1.0

    def rho(u):
        u = np.asarray(u, dtype=float)
        return np.concatenate([u, [0.0, math.sqrt(1.0 + float(u @ u))]])

    def ev(u):
        return ch * rho(u) + sh * e_mid

    def nu(u):
        return -normal_sign * (sh * rho(u) + ch * e_mid)

    oracle = AnalyticOracle(
        nu=nu, clusters=_constant_clusters((normal_sign * math.tanh(r), n)))
    chart = HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                              axes=_default_axes(n, -0.8, 0.8, resolution),
                              oracle=oracle,
                              name=f"equidistant_hypersurface(r={r})")
    return _oriented(chart)


def horosphere(n: int = 2, resolution: int = 17,
               normal_sign: int = 1) -> HypersurfaceChart:
    """Horosphere in H^{n+1}; all principal curvatures equal to normal_sign."""
    M = spaceform(-1, n)
    ell = np.zeros(n + 2)
    ell[-2], ell[-1] = 1.0, -1.0

    def ev(u):
        u = np.asarray(u, dtype=float)
        q = 0.5 * float(u @ u)
        return np.concatenate([u, [-q, 1.0 + q]])

    def nu(u):
        return -normal_sign * (ev(u) + ell)

    oracle = AnalyticOracle(nu=nu,
                            clusters=_constant_clusters((float(normal_sign), n)))
    chart = HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                              axes=_default_axes(n, -0.8, 0.8, resolution),
                              oracle=oracle, name="horosphere")
    return _oriented(chart)


def graph(f: Callable[[np.ndarray], float], n: int = 2,
          bounds: tuple[float, float] = (-0.8, 0.8),
          resolution: int = 17, name: str = "graph") -> HypersurfaceChart:
    """Graph x_{n+1} = f(u) over a coordinate chart of R^n (no oracle)."""
    M = spaceform(0, n)

    def ev(u):
        u = np.asarray(u, dtype=float)
        return np.append(u, float(f(u)))

    return HypersurfaceChart(spaceform=M, dim=n, eval=ev,
                             axes=_default_axes(n, bounds[0], bounds[1], resolution),
                             name=name)


def builtin_hypersurface(M: SpaceForm, family: str, resolution: int = 17,
                         **params) -> HypersurfaceChart:
    """Dispatch a builtin family by name; validates the curvature sign."""
    sign = int(params.get("normal_sign", 1))
    makers = {
        "round_sphere": lambda: round_sphere(params["r"], M.n, resolution, sign),
        "hyperplane": lambda: hyperplane(M.n, params.get("offset", 0.0), resolution),
        "clifford_torus": lambda: clifford_torus(params["a"], resolution),
        "product_torus": lambda: product_torus(params["a"], M.n,
                                               params.get("k", 1), resolution),
        "small_sphere": lambda: small_sphere(params["a"], M.n, resolution),
        "geodesic_sphere": lambda: geodesic_sphere(params["r"], M.n, resolution,
                                                   sign),
        "equidistant_hypersurface": lambda: equidistant_hypersurface(
            params["r"], M.n, resolution, sign),
        "horosphere": lambda: horosphere(M.n, resolution, sign),
        "graph": lambda: graph(params["f"], M.n,
                               params.get("bounds", (-0.8, 0.8)), resolution),
    }
    if family not in makers:
        raise GeometryError(f"unknown hypersurface family {family!r}; "
                            f"choose one of {FAMILIES}")
    chart = makers[family]()
    if chart.spaceform.c != M.c:
        raise GeometryError(
            f"family {family!r} lives in curvature {chart.spaceform.c}, "
            f"not {M.c}")
    return chart


def umbilic_family_for(c: int, curvature: float) -> tuple[str, dict]:
    """A builtin umbilic family realizing the given constant curvature.

    Returns (family name, params).  Raises when the requested curvature is
    not finite.
    """
    k = float(curvature)
    if not math.isfinite(k):
        raise GeometryError(f"no umbilic family with curvature {k}")
    sign = -1 if k < 0 else 1
    if c == 0:
        if abs(k) < 1e-12:
            return "hyperplane", {}
        return "round_sphere", {"r": 1.0 / abs(k), "normal_sign": sign}
    if c == 1:
        return "small_sphere", {"a": math.pi / 2 - math.atan(k)}
    if abs(k) > 1.0:
        # coth(r) = |k|, i.e. r = arcoth(|k|)
        return "geodesic_sphere", {"r": 0.5 * math.log((abs(k) + 1) / (abs(k) - 1)),
                                   "normal_sign": sign}
    if abs(k) == 1.0:
        return "horosphere", {"normal_sign": sign}
    return "equidistant_hypersurface", {"r": math.atanh(abs(k)),
                                        "normal_sign": sign}
