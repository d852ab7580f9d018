"""Pointwise solver for the marginally trapped height equation.

For a hypersurface with principal curvature clusters (kappa_i, m_i) in
Q^{n+1}_c and a warp profile w, the height tau of the normal-form
codimension-two immersion is marginally trapped iff

    n w'(tau) - sum_i m_i (kappa_i ct(theta(tau)) + c)/(ct(theta(tau)) - kappa_i) = 0.

Roots are located per consecutive curvature pair: ct maps an interval
[s_lo, s_hi] of conformal times onto [kappa_i, kappa_{i+1}], and the
polynomial-in-(co, si) form of the equation changes sign at the endpoints,
so Brent's method applies.  The working function clears all ct poles:

    Ghat(s) = -n w'(theta^{-1}(s)) prod_k (co(s) - kappa_k si(s))
              + sum_k m_k (kappa_k co(s) + c si(s)) prod_{j != k} (co(s) - kappa_j si(s))

which equals si(s)^p times the rational form, hence shares its roots away
from zeros of si.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .families import builtin_hypersurface, umbilic_family_for
from .hypersurface import HypersurfaceChart, chart_clusters
from .spaceforms import (GeometryError, SpaceForm, co, ct, ct_inverse, si,
                         spaceform)
from .warp import ThetaRangeError, WarpProfile

RESIDUAL_TOL = 1e-9
ZERO_KAPPA_TOL = 1e-9


class SingularEvaluationError(GeometryError):
    """Residual evaluated at a focal coincidence ct(theta) = kappa."""


class BracketError(GeometryError):
    """No usable sign change inside a root bracket."""


class OutsideUniverseError(GeometryError):
    """Solved conformal time falls outside theta(I)."""

    def __init__(self, s, theta_range):
        super().__init__(
            f"height outside universe interval: s = {s} not in theta(I) "
            f"~ {theta_range}")
        self.s = s
        self.theta_range = theta_range


@dataclass(frozen=True)
class MTEquation:
    """Pointwise data of the height equation."""

    warp: WarpProfile
    c: int
    clusters: tuple[tuple[float, int], ...]
    n: int

    def __post_init__(self):
        kappas = [k for k, _ in self.clusters]
        if any(k2 <= k1 for k1, k2 in zip(kappas, kappas[1:])):
            raise GeometryError("clusters must be strictly increasing in kappa")
        if sum(m for _, m in self.clusters) != self.n:
            raise GeometryError("multiplicities must sum to the dimension")

    @property
    def p(self) -> int:
        return len(self.clusters)


def equation_at(chart: HypersurfaceChart, warp: WarpProfile, u) -> MTEquation:
    return MTEquation(warp=warp, c=chart.spaceform.c,
                      clusters=chart_clusters(chart, u), n=chart.dim)


def mt_residual(eq: MTEquation, t: float) -> float:
    """n w'(t) - sum m_i (kappa_i ct + c)/(ct - kappa_i) at theta(t).

    Implemented on the (co, si) form, which extends continuously through
    poles of ct; only a focal coincidence co = kappa_i si is singular.
    """
    th = eq.warp.theta(t)
    cc, ss = co(eq.c, th), si(eq.c, th)
    total = eq.n * eq.warp.w(t, 1)
    for kappa, m in eq.clusters:
        den = cc - kappa * ss
        if abs(den) < 1e-12 * (1.0 + abs(kappa * ss)):
            raise SingularEvaluationError(
                f"ct(theta({t})) collides with kappa = {kappa}")
        total -= m * (kappa * cc + eq.c * ss) / den
    return total


def g_rational(eq: MTEquation, s: float) -> float:
    """The bracketing function G(s) in its rational-in-ct form (has poles)."""
    u = ct(eq.c, s)  # PoleError at si = 0
    t = eq.warp.t0 if eq.warp.is_constant else eq.warp.theta_inverse(s)
    prod_all = math.prod(u - k for k, _ in eq.clusters)
    total = -eq.n * eq.warp.w(t, 1) * prod_all
    for kappa, m in eq.clusters:
        prod_others = math.prod(u - k2 for k2, _ in eq.clusters if k2 != kappa)
        total += m * (u * kappa + eq.c) * prod_others
    return total


def g_polefree(eq: MTEquation, s: float) -> float:
    """Ghat(s) = si(s)^p g_rational(s), polynomial in (co, si): no ct poles."""
    cc, ss = co(eq.c, s), si(eq.c, s)
    t = eq.warp.t0 if eq.warp.is_constant else eq.warp.theta_inverse(s)
    prod_all = math.prod(cc - k * ss for k, _ in eq.clusters)
    total = -eq.n * eq.warp.w(t, 1) * prod_all
    for kappa, m in eq.clusters:
        prod_others = math.prod(cc - k2 * ss for k2, _ in eq.clusters
                                if k2 != kappa)
        total += m * (kappa * cc + eq.c * ss) * prod_others
    return total


def g_endpoint_value(eq: MTEquation, i: int) -> float:
    """Closed-form G at the bracket endpoint with ct(s) = kappa_i.

    All terms of G carry the vanishing factor (ct - kappa_i) except one, so
    the endpoint value is m_i (kappa_i^2 + c) prod_{j != i} (kappa_i - kappa_j),
    independent of the warp.
    """
    kappa_i, m_i = eq.clusters[i]
    prod = math.prod(kappa_i - k for j, (k, _) in enumerate(eq.clusters)
                     if j != i)
    return m_i * (kappa_i * kappa_i + eq.c) * prod


@dataclass
class RootBracket:
    """Candidate conformal-time bracket for one consecutive curvature pair."""

    pair_index: int
    kappa_lo: float
    kappa_hi: float
    s_lo: float = math.nan
    s_hi: float = math.nan
    admissible: bool = False
    reason: str = ""
    contains_si_zero: bool = False
    g_lo: float = math.nan   # G value at the endpoint with ct(s_lo) = kappa_hi
    g_hi: float = math.nan   # G value at the endpoint with ct(s_hi) = kappa_lo
    period_shift: int = 0    # multiples of pi added (c = 1 only)

    def shifted(self, k: int) -> "RootBracket":
        if k == 0:
            return self
        out = RootBracket(**{f: getattr(self, f) for f in self.__dataclass_fields__})
        out.s_lo += k * math.pi
        out.s_hi += k * math.pi
        out.period_shift = k
        return out


def _pair_admissible(c: int, k1: float, k2: float) -> tuple[bool, str]:
    if c == 1:
        return True, ""
    if c == 0:
        if abs(k1) <= ZERO_KAPPA_TOL or abs(k2) <= ZERO_KAPPA_TOL:
            return False, "kappa_i kappa_{i+1} = 0"
        return True, ""
    # c == -1: kappa = +-1 is a boundary root of the endpoint product
    if abs(k1 * k1 - 1.0) <= 1e-12 * (1.0 + k1 * k1) or \
       abs(k2 * k2 - 1.0) <= 1e-12 * (1.0 + k2 * k2):
        return False, "boundary root: kappa^2 + c = 0, construction degenerate"
    if k1 > 1.0 and k2 > 1.0:
        return True, ""
    if k1 < -1.0 and k2 < -1.0:
        return True, ""
    return False, "pair not contained in one of the regions kappa > 1, kappa < -1"


def corollary_count(eq: MTEquation) -> int:
    """The guaranteed-root count q as a function of c and the kappa list."""
    kappas = [k for k, _ in eq.clusters]
    if eq.c == 1:
        return eq.p - 1
    if eq.c == 0:
        return sum(1 for k in kappas if abs(k) > ZERO_KAPPA_TOL) - 1
    return sum(1 for k in kappas if abs(k) > 1.0) - 2


def brackets(eq: MTEquation, period_shifts: int = 0) -> list[RootBracket]:
    """One candidate bracket per consecutive curvature pair.

    Inadmissible pairs are returned with admissible = False and a reason.
    For c = 1, period_shifts > 0 additionally emits the pi-translates
    s + k pi for 0 < |k| <= period_shifts (the endpoint signs are warp
    independent, so every translate brackets a root of its own).
    """
    out = []
    for i in range(eq.p - 1):
        k1, m1 = eq.clusters[i]
        k2, m2 = eq.clusters[i + 1]
        br = RootBracket(pair_index=i, kappa_lo=k1, kappa_hi=k2)
        ok, reason = _pair_admissible(eq.c, k1, k2)
        br.admissible, br.reason = ok, reason
        if not ok:
            out.append(br)
            continue
        # ct is decreasing on each branch: ct(s_lo) = kappa_hi, ct(s_hi) = kappa_lo
        a = ct_inverse(eq.c, k2)
        b = ct_inverse(eq.c, k1)
        br.s_lo, br.s_hi = min(a, b), max(a, b)
        br.contains_si_zero = br.s_lo < 0.0 < br.s_hi if eq.c != 1 else False
        br.g_lo = g_endpoint_value(eq, i + 1 if a < b else i)
        br.g_hi = g_endpoint_value(eq, i if a < b else i + 1)
        out.append(br)
    if eq.c == 1 and period_shifts > 0:
        shifted = []
        for br in out:
            if br.admissible:
                for k in range(-period_shifts, period_shifts + 1):
                    if k != 0:
                        shifted.append(br.shifted(k))
        out.extend(shifted)
    return out


def admissible_brackets(eq: MTEquation, period_shifts: int = 0) -> list[RootBracket]:
    return [b for b in brackets(eq, period_shifts) if b.admissible]


def solve_point(eq: MTEquation, bracket: RootBracket,
                residual_tol: float = RESIDUAL_TOL) -> float:
    """Height t with mt_residual(t) = 0 inside the bracket, via Brent on the
    pole-free form; raises OutsideUniverseError when the root's conformal
    time is not attained by theta on I.
    """
    if not bracket.admissible:
        raise BracketError(f"bracket {bracket.pair_index} inadmissible: "
                           f"{bracket.reason}")
    s_lo, s_hi = bracket.s_lo, bracket.s_hi
    if not eq.warp.is_constant:
        th_lo, th_hi = eq.warp.theta_range()
        pad = 1e-12 * max(1.0, abs(s_lo), abs(s_hi))
        lo_c = max(s_lo, th_lo + pad) if math.isfinite(th_lo) else s_lo
        hi_c = min(s_hi, th_hi - pad) if math.isfinite(th_hi) else s_hi
        if lo_c >= hi_c:
            raise OutsideUniverseError(0.5 * (s_lo + s_hi), (th_lo, th_hi))
        s_lo, s_hi = lo_c, hi_c
    s_star = _brent_on_ghat(eq, s_lo, s_hi)
    if s_star is None:
        raise BracketError(
            f"no sign change of the pole-free form on [{s_lo}, {s_hi}] "
            f"(pair {bracket.pair_index}, shift {bracket.period_shift})")
    try:
        t_star = eq.warp.theta_inverse(s_star)
    except ThetaRangeError as exc:
        raise OutsideUniverseError(s_star, exc.theta_range) from None
    res = mt_residual(eq, t_star)
    if abs(res) > residual_tol:
        raise GeometryError(
            f"root rejected: residual {res:.2e} exceeds {residual_tol:.1e}")
    return t_star


def _brent_on_ghat(eq: MTEquation, s_lo: float, s_hi: float,
                   scan: int = 64) -> float | None:
    """Brent root of Ghat on [s_lo, s_hi]; scans for a sign-change panel
    when the endpoints do not straddle zero."""
    eps = 1e-13 * max(1.0, abs(s_lo), abs(s_hi))
    a, b = s_lo + eps, s_hi - eps
    fa, fb = g_polefree(eq, a), g_polefree(eq, b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb < 0:
        return float(brentq(lambda s: g_polefree(eq, s), a, b,
                            xtol=1e-14, rtol=8.9e-16, maxiter=200))
    grid = np.linspace(a, b, scan + 1)
    vals = [g_polefree(eq, s) for s in grid]
    for j in range(scan):
        if vals[j] == 0.0:
            return float(grid[j])
        if vals[j] * vals[j + 1] < 0:
            return float(brentq(lambda s: g_polefree(eq, s), grid[j], grid[j + 1],
                                xtol=1e-14, rtol=8.9e-16, maxiter=200))
    return None


# ---------------------------------------------------------------------------
# Height fields over a chart grid


@dataclass
class HeightField:
    """Solved heights on the chart grid for one root branch."""

    chart: HypersurfaceChart
    warp: WarpProfile
    branch: int
    tau: np.ndarray
    residual: np.ndarray
    conformal: np.ndarray          # s = theta(tau)
    solved: np.ndarray             # boolean mask
    pair_index: int = 0            # consecutive-pair index of the branch
    period_shift: int = 0
    diagnostics: list = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return not bool(self.solved.all())

    def max_residual(self) -> float:
        if not self.solved.any():
            return math.nan
        return float(np.max(np.abs(self.residual[self.solved])))


def _local_rebracket(eq: MTEquation, bracket: RootBracket, seed_s: float,
                     collision_tol: float = 1e-10) -> float | None:
    """Root near seed_s: expand a window around the seed until the pole-free
    form changes sign, falling back to the whole bracket."""
    width = bracket.s_hi - bracket.s_lo
    delta = max(1e-6 * width, 4 * collision_tol)
    while delta < width:
        lo = max(bracket.s_lo, seed_s - delta)
        hi = min(bracket.s_hi, seed_s + delta)
        f_lo, f_hi = g_polefree(eq, lo), g_polefree(eq, hi)
        if f_lo * f_hi < 0:
            return float(brentq(lambda s: g_polefree(eq, s), lo, hi,
                                xtol=1e-14, rtol=8.9e-16, maxiter=200))
        delta *= 4.0
    return _brent_on_ghat(eq, bracket.s_lo, bracket.s_hi)


def solve_field(chart: HypersurfaceChart, warp: WarpProfile, branch: int = 0,
                period_shift: int = 0,
                residual_tol: float = RESIDUAL_TOL) -> HeightField:
    """Solve the height equation at every grid point of the chart.

    Roots are tracked continuously: a breadth-first sweep from the grid
    center seeds each point's root from an already-solved neighbor and
    re-brackets locally, so the field follows one branch.  Points whose
    cluster pattern deviates from the seed pattern, or where the local root
    merges away, are left unsolved and reported in diagnostics (the field is
    then partial).
    """
    shape = chart.grid_shape
    mesh = np.stack(np.meshgrid(*chart.axes, indexing="ij"), axis=-1)
    tau = np.full(shape, math.nan)
    s_field = np.full(shape, math.nan)
    residual = np.full(shape, math.nan)
    solved = np.zeros(shape, dtype=bool)
    diagnostics: list = []

    seed_idx = tuple(k // 2 for k in shape)
    eq0 = equation_at(chart, warp, mesh[seed_idx])
    pattern = tuple(m for _, m in eq0.clusters)
    cand = brackets(eq0, period_shifts=abs(period_shift))
    cand = [b for b in cand if b.admissible and b.period_shift == period_shift]
    if branch >= len(cand):
        raise BracketError(
            f"branch {branch} out of range: {len(cand)} admissible brackets")
    bracket0 = cand[branch]
    t_seed = solve_point(eq0, bracket0, residual_tol)
    tau[seed_idx] = t_seed
    s_field[seed_idx] = warp.theta(t_seed)
    residual[seed_idx] = mt_residual(eq0, t_seed)
    solved[seed_idx] = True

    queue = deque([seed_idx])
    visited = {seed_idx}
    while queue:
        idx = queue.popleft()
        for axis in range(len(shape)):
            for step in (-1, 1):
                nxt = list(idx)
                nxt[axis] += step
                nxt = tuple(nxt)
                if not all(0 <= nxt[a] < shape[a] for a in range(len(shape))):
                    continue
                if nxt in visited:
                    continue
                visited.add(nxt)
                queue.append(nxt)
                u = mesh[nxt]
                try:
                    eq = equation_at(chart, warp, u)
                except GeometryError as exc:
                    diagnostics.append((nxt, f"jet failed: {exc}"))
                    continue
                if tuple(m for _, m in eq.clusters) != pattern:
                    diagnostics.append(
                        (nxt, "branch collision: cluster pattern changed to "
                              f"{tuple(m for _, m in eq.clusters)}"))
                    continue
                cand = brackets(eq, period_shifts=abs(period_shift))
                cand = [b for b in cand
                        if b.admissible and b.period_shift == period_shift]
                br = next((b for b in cand
                           if b.pair_index == bracket0.pair_index), None)
                if br is None:
                    diagnostics.append((nxt, "bracket became inadmissible"))
                    continue
                s_seed = s_field[idx] if solved[idx] else s_field[seed_idx]
                s_star = _local_rebracket(eq, br, s_seed)
                if s_star is None:
                    diagnostics.append(
                        (nxt, "branch collision: no local sign change"))
                    continue
                try:
                    t_star = warp.theta_inverse(s_star)
                except ThetaRangeError as exc:
                    diagnostics.append((nxt, str(exc)))
                    continue
                res = mt_residual(eq, t_star)
                if abs(res) > residual_tol:
                    diagnostics.append((nxt, f"residual {res:.2e} too large"))
                    continue
                tau[nxt] = t_star
                s_field[nxt] = s_star
                residual[nxt] = res
                solved[nxt] = True
    return HeightField(chart=chart, warp=warp, branch=branch, tau=tau,
                       residual=residual, conformal=s_field, solved=solved,
                       pair_index=bracket0.pair_index,
                       period_shift=bracket0.period_shift,
                       diagnostics=diagnostics)


# ---------------------------------------------------------------------------
# Slice mode


@dataclass
class SliceReport:
    T: float
    wprime: float
    max_defect: float
    is_mt: bool
    mean_curvatures: np.ndarray


def slice_check(chart: HypersurfaceChart, warp: WarpProfile, T: float,
                tol: float = 1e-7) -> SliceReport:
    """Is chart x {T} marginally trapped, i.e. is the chart CMC with mean
    curvature w'(T)?"""
    wp = warp.w(T, 1)
    hs = []
    for _, u in chart.grid_points():
        cl = chart_clusters(chart, u)
        hs.append(sum(k * m for k, m in cl) / chart.dim)
    hs = np.asarray(hs)
    defect = float(np.max(np.abs(hs - wp)))
    return SliceReport(T=float(T), wprime=wp, max_defect=defect,
                       is_mt=bool(defect <= tol), mean_curvatures=hs)


# ---------------------------------------------------------------------------
# Curves with null acceleration (n = 1)


def curve_kappa(warp: WarpProfile, c: int, tau: float) -> float:
    """Required geodesic curvature of the base curve at height tau."""
    return warp.omega_extended(c, tau)


@dataclass
class NullCurve:
    """Base curve in Q^2_c with its Frenet frame and a height profile."""

    c: int
    xs: np.ndarray        # arc-length samples
    gamma: np.ndarray     # (N, amb)
    tangent: np.ndarray
    normal: np.ndarray
    tau: np.ndarray
    kappa: np.ndarray
    warp: WarpProfile
    tau_tree: object      # expression tree of the height profile


def _frenet_rhs(c: int, state: np.ndarray, kappa: float) -> np.ndarray:
    gamma, T, nu = state
    dgamma = T
    dT = -c * gamma + kappa * nu
    dnu = -kappa * T
    return np.stack([dgamma, dT, dnu])


def build_null_curve(warp: WarpProfile, c: int, tau_profile: str,
                     length: float = 2 * math.pi, step: float = 1e-3,
                     den_tol: float = 1e-10) -> NullCurve:
    """Integrate the base curve whose lift has null acceleration.

    tau_profile is an expression in t (here: the arc parameter).  The curve
    curvature kappa(x) = Omega(tau(x)) is integrated through the space-form
    Frenet equations with RK4.
    """
    from . import expr as ex
    tree = ex.parse(tau_profile) if isinstance(tau_profile, str) else tau_profile
    M = spaceform(c, 1)
    amb = M.ambient_dim
    gamma0 = np.zeros(amb)
    T0 = np.zeros(amb)
    nu0 = np.zeros(amb)
    if c == 0:
        T0[0] = 1.0
        nu0[1] = 1.0                       # rotate T by +90 degrees
    elif c == 1:
        gamma0[0] = 1.0
        T0[1] = 1.0
        nu0 = np.cross(gamma0, T0)         # det[T, nu, gamma] > 0
    else:
        gamma0[-1] = 1.0
        T0[0] = 1.0
        nu0[1] = 1.0
    state = np.stack([gamma0, T0, nu0])

    def kappa_at(x: float) -> float:
        tau_x = float(ex.evaluate(tree, x))
        k_den = warp.w(tau_x, 1) * si(c, warp.theta(tau_x)) + co(c, warp.theta(tau_x))
        if abs(k_den) < den_tol:
            raise GeometryError(
                f"curve construction degenerates at arc length {x}: "
                f"curvature denominator ~ 0")
        return curve_kappa(warp, c, tau_x)

    steps = max(1, int(round(length / step)))
    xs = np.linspace(0.0, steps * step, steps + 1)
    states = np.empty((steps + 1,) + state.shape)
    states[0] = state
    for i in range(steps):
        x = xs[i]
        k1 = _frenet_rhs(c, state, kappa_at(x))
        k2 = _frenet_rhs(c, state + 0.5 * step * k1, kappa_at(x + 0.5 * step))
        k3 = _frenet_rhs(c, state + 0.5 * step * k2, kappa_at(x + 0.5 * step))
        k4 = _frenet_rhs(c, state + step * k3, kappa_at(x + step))
        state = state + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i + 1] = state
    taus = np.array([float(ex.evaluate(tree, x)) for x in xs])
    kappas = np.array([kappa_at(x) for x in xs])
    return NullCurve(c=c, xs=xs, gamma=states[:, 0], tangent=states[:, 1],
                     normal=states[:, 2], tau=taus, kappa=kappas, warp=warp,
                     tau_tree=tree)


# ---------------------------------------------------------------------------
# Null second fundamental form recipes


@dataclass(frozen=True)
class UmbilicRecipe:
    """Omega is constant: any height over an umbilic chart of curvature c0."""

    c: int
    c0: float
    family: str
    params: dict


@dataclass(frozen=True)
class SliceRecipe:
    """Omega varies: slice at T with an umbilic chart of curvature w'(T)."""

    c: int
    T: float
    curvature: float
    family: str
    params: dict


def null_2ff_mode(warp: WarpProfile, M: SpaceForm,
                  T: float | None = None) -> UmbilicRecipe | SliceRecipe:
    """Decide which construction yields a null second fundamental form."""
    constant, _dev = warp.is_omega_constant(M.c)
    if constant:
        t_probe = warp.t0 + 0.25
        if not warp.interval.contains(t_probe):
            t_probe = 0.5 * (warp.t0 + warp.interval.hi)
        c0 = warp.omega_extended(M.c, t_probe)
        family, params = umbilic_family_for(M.c, c0)
        return UmbilicRecipe(c=M.c, c0=c0, family=family, params=params)
    T = warp.t0 if T is None else float(T)
    curvature = warp.w(T, 1)
    family, params = umbilic_family_for(M.c, curvature)
    return SliceRecipe(c=M.c, T=T, curvature=curvature, family=family,
                       params=params)


def recipe_chart(recipe: UmbilicRecipe | SliceRecipe,
                 n: int, resolution: int = 17) -> HypersurfaceChart:
    """Materialize the umbilic chart suggested by a recipe."""
    M = spaceform(recipe.c, n)
    return builtin_hypersurface(M, recipe.family, resolution=resolution,
                                **recipe.params)
