"""Assembled codimension-two immersions of Q^{n+1}_c x_w I and their verifier.

The normal form is phibar = (co(s) phi + si(s) nu, tau) with s = theta(tau),
carrying the null normal nubar = (chi, w(tau)), chi = -c si(s) phi + co(s) nu.
Everything here is checked twice: closed-form expressions through the chart
jets on one side, finite differences of the assembled maps pushed through the
warped-product connection on the other.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .hypersurface import HypersurfaceChart, PointJet, jet
from .mtsolve import (HeightField, NullCurve, _local_rebracket, brackets,
                      equation_at)
from .spaceforms import GeometryError, co, si
from .warp import WarpProfile


@dataclass(frozen=True)
class Tolerances:
    """Pass thresholds of the verifier; defaults sized for charts of scale
    O(1), grids capped at 64 per axis and step h = 1e-4."""

    metric_defect: float = 1e-6
    h_null: float = 1e-6
    h_nu: float = 1e-6
    twoff: float = 1e-7
    spacelike_min: float = 1e-10
    slice_defect: float = 1e-7

    @staticmethod
    def from_dict(overrides: dict | None) -> "Tolerances":
        return Tolerances(**(overrides or {}))


@dataclass
class VerificationReport:
    max_metric_defect: float
    max_Hnull: float
    max_Hnu: float
    max_2ff_defect: float
    spacelike_min_eig: float
    passed: dict

    def all_passed(self) -> bool:
        return all(self.passed.values())

    def to_json(self, mode: str | None = None) -> str:
        doc = {"schema": 1}
        if mode is not None:
            doc["mode"] = mode
        doc.update(asdict(self))
        return json.dumps(doc, indent=2, allow_nan=True)


def _w_inner(wval: float, sig: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> float:
    """Warped metric on product vectors (Q part, t part)."""
    return wval * wval * float(np.sum(v1[:-1] * v2[:-1] * sig)) - v1[-1] * v2[-1]


class MTImmersion:
    """Normal-form immersion over a chart with a height function.

    tau_fn maps parameter points to heights; s_fn defaults to theta(tau) and
    may be overridden by a constant for slice immersions (then tau must be
    constant as well, so that no d tau terms arise).
    """

    def __init__(self, chart: HypersurfaceChart, warp: WarpProfile,
                 tau_fn: Callable[[np.ndarray], float],
                 s_fn: Callable[[np.ndarray], float] | None = None,
                 jet_order: int = 4, name: str = "immersion"):
        self.chart = chart
        self.warp = warp
        self.tau_fn = tau_fn
        self.s_fn = s_fn or (lambda u: warp.theta(tau_fn(u)))
        self.jet_order = jet_order
        self.name = name
        self.c = chart.spaceform.c
        self.sig = chart.spaceform.signature
        self._jets: dict[bytes, PointJet] = {}

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def from_height_field(field: HeightField, name: str = "mt") -> "MTImmersion":
        """Immersion whose height solves the trapped equation everywhere.

        Between grid nodes the height is re-solved from the nearest node's
        conformal time, so derivatives of tau are exact up to solver tolerance.
        """
        chart, warp = field.chart, field.warp
        if not field.solved.any():
            raise GeometryError("height field has no solved points")
        pair_index = getattr(field, "pair_index", None)
        period_shift = getattr(field, "period_shift", 0)
        memo: dict[bytes, float] = {}
        axes = chart.axes

        def tau_at(u) -> float:
            u = np.asarray(u, dtype=float)
            key = u.tobytes()
            if key in memo:
                return memo[key]
            idx = tuple(int(np.clip(np.searchsorted(ax, u[a]), 0, len(ax) - 1))
                        for a, ax in enumerate(axes))
            if not field.solved[idx]:
                solved_idx = np.argwhere(field.solved)
                d = np.abs(solved_idx - np.asarray(idx)).sum(axis=1)
                idx = tuple(solved_idx[int(np.argmin(d))])
            seed = field.conformal[idx]
            eq = equation_at(chart, warp, u)
            cands = [b for b in brackets(eq, period_shifts=abs(period_shift))
                     if b.admissible and b.period_shift == period_shift]
            br = next((b for b in cands if b.pair_index == pair_index), None)
            if br is None:
                raise GeometryError(f"bracket {pair_index} unavailable at {u}")
            s_star = _local_rebracket(eq, br, seed)
            if s_star is None:
                raise GeometryError(f"height branch lost at {u}")
            t_star = warp.theta_inverse(s_star)
            memo[key] = t_star
            return t_star

        return MTImmersion(chart, warp, tau_at, name=name)

    @staticmethod
    def from_slice(chart: HypersurfaceChart, warp: WarpProfile, T: float,
                   name: str = "slice") -> "MTImmersion":
        """The immersion u -> (phi(u), T): constant height, zero displacement."""
        return MTImmersion(chart, warp, tau_fn=lambda u: float(T),
                           s_fn=lambda u: 0.0, name=name)

    # -- pointwise maps ---------------------------------------------------------

    def _jet(self, u: np.ndarray) -> PointJet:
        key = np.asarray(u, dtype=float).tobytes()
        pj = self._jets.get(key)
        if pj is None:
            pj = jet(self.chart, u, stencil_order=self.jet_order)
            self._jets[key] = pj
        return pj

    def psi(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        s = self.s_fn(u)
        pj = self._jet(u)
        return co(self.c, s) * pj.x + si(self.c, s) * pj.nu

    def chi(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        s = self.s_fn(u)
        pj = self._jet(u)
        return -self.c * si(self.c, s) * pj.x + co(self.c, s) * pj.nu

    def phibar(self, u) -> np.ndarray:
        return np.append(self.psi(u), self.tau_fn(np.asarray(u, dtype=float)))

    def nubar(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.append(self.chi(u), self.warp.w(self.tau_fn(u)))

    # -- analytic side (chart jets + closed forms) -----------------------------

    def metric_analytic(self, u) -> np.ndarray:
        """Induced metric in the parameter basis: w^2 <co dphi + si dnu, ...>."""
        u = np.asarray(u, dtype=float)
        pj = self._jet(u)
        s = self.s_fn(u)
        wv = self.warp.w(self.tau_fn(u))
        D = co(self.c, s) * pj.dphi + si(self.c, s) * pj.dnu
        return wv * wv * (D.T @ np.diag(self.sig) @ D)

    def metric_principal(self, u) -> np.ndarray:
        """Diagonal w^2 (co - kappa_i si)^2 in the principal frame."""
        u = np.asarray(u, dtype=float)
        pj = self._jet(u)
        s = self.s_fn(u)
        wv = self.warp.w(self.tau_fn(u))
        cs, ss = co(self.c, s), si(self.c, s)
        return np.diag([wv * wv * (cs - k * ss) ** 2 for k in pj.shape_eigvals])

    def twoff_analytic(self, u) -> np.ndarray:
        """<Dbar_{E_i} nubar, E_j> in the principal frame: diagonal entries
        -w^2 (co - k si)(k co + c si) + w^2 w' (co - k si)^2."""
        u = np.asarray(u, dtype=float)
        pj = self._jet(u)
        s = self.s_fn(u)
        tau = self.tau_fn(u)
        wv, wp = self.warp.w(tau), self.warp.w(tau, 1)
        cs, ss = co(self.c, s), si(self.c, s)
        diag = [-wv * wv * (cs - k * ss) * (k * cs + self.c * ss)
                + wv * wv * wp * (cs - k * ss) ** 2
                for k in pj.shape_eigvals]
        return np.diag(diag)

    def dpsi_reconstructed(self, u, h: float | None = None) -> np.ndarray:
        """d psi from the transport identity theta' dtau chi + co dphi + si dnu."""
        u = np.asarray(u, dtype=float)
        pj = self._jet(u)
        s = self.s_fn(u)
        tau = self.tau_fn(u)
        dtau = self._fd_grad(self.tau_fn, u, h)
        tp = self.warp.theta_prime(tau)
        chi = self.chi(u)
        return (tp * np.outer(chi, dtau)
                + co(self.c, s) * pj.dphi + si(self.c, s) * pj.dnu)

    # -- finite-difference side --------------------------------------------------

    def _h(self, h: float | None) -> float:
        return h if h is not None else self.chart.default_step()

    def _h4(self, h: float | None) -> float:
        # wider step for 4th-order stencils: truncation is h^4, roundoff 1/h^2
        return h if h is not None else 1e-3 * self.chart.scale

    def _fd_dir(self, f: Callable, u: np.ndarray, e: np.ndarray, h: float,
                order: int = 2):
        if order == 2:
            return (f(u + h * e) - f(u - h * e)) / (2 * h)
        return (-f(u + 2 * h * e) + 8 * f(u + h * e)
                - 8 * f(u - h * e) + f(u - 2 * h * e)) / (12 * h)

    def _fd_grad(self, f: Callable, u: np.ndarray, h: float | None,
                 order: int = 2) -> np.ndarray:
        h = self._h(h) if order == 2 else self._h4(h)
        out = []
        for a in range(len(u)):
            e = np.zeros_like(u)
            e[a] = 1.0
            out.append(self._fd_dir(f, u, e, h, order))
        return np.asarray(out)

    def _fd_jacobian(self, f: Callable, u: np.ndarray, h: float | None,
                     order: int = 2) -> np.ndarray:
        h = self._h(h) if order == 2 else self._h4(h)
        cols = []
        for a in range(len(u)):
            e = np.zeros_like(u)
            e[a] = 1.0
            cols.append(self._fd_dir(f, u, e, h, order))
        return np.column_stack(cols)

    def dpsi_fd(self, u, h: float | None = None) -> np.ndarray:
        return self._fd_jacobian(self.psi, np.asarray(u, dtype=float), h)

    def metric_fd(self, u, h: float | None = None) -> np.ndarray:
        """Pullback metric w^2 <dpsi, dpsi> - dtau dtau by central differences."""
        u = np.asarray(u, dtype=float)
        wv = self.warp.w(self.tau_fn(u))
        dpsi = self.dpsi_fd(u, h)
        dtau = self._fd_grad(self.tau_fn, u, h)
        return wv * wv * (dpsi.T @ np.diag(self.sig) @ dpsi) - np.outer(dtau, dtau)

    def twoff_fd(self, u, h: float | None = None) -> np.ndarray:
        """<Dbar_{E_i} nubar, E_j> by differentiating the nubar field along the
        principal directions and applying the warped-product connection."""
        u = np.asarray(u, dtype=float)
        h = self._h(h)
        pj = self._jet(u)
        tau = self.tau_fn(u)
        wv, wp = self.warp.w(tau), self.warp.w(tau, 1)
        psi0 = self.psi(u)
        dpsi = self.dpsi_fd(u, h)
        dtau = self._fd_grad(self.tau_fn, u, h)
        chi0 = self.chi(u)
        n = self.chart.dim
        out = np.empty((n, n))
        Ebars = [np.append(dpsi @ pj.principal_dirs[:, j],
                           dtau @ pj.principal_dirs[:, j]) for j in range(n)]
        for i in range(n):
            e = pj.principal_dirs[:, i]
            Xq = dpsi @ e
            Xt = float(dtau @ e)
            dchi = (self.chi(u + h * e) - self.chi(u - h * e)) / (2 * h)
            dwtau = (self.warp.w(self.tau_fn(u + h * e))
                     - self.warp.w(self.tau_fn(u - h * e))) / (2 * h)
            q_part = (dchi + self.c * self._inner_q(Xq, chi0) * psi0
                      + (wp / wv) * (Xt * chi0 + wv * Xq))
            t_part = dwtau + wv * wp * self._inner_q(Xq, chi0)
            Dnu = np.append(q_part, t_part)
            for j in range(n):
                out[i, j] = _w_inner(wv, self.sig, Dnu, Ebars[j])
        return out

    def _inner_q(self, x, y) -> float:
        return float(np.sum(x * y * self.sig))

    # -- mean curvature -----------------------------------------------------------

    def _second_partials(self, f: Callable, u: np.ndarray, h: float,
                         order: int = 2):
        n = len(u)
        f0 = f(u)
        pure = []
        for a in range(n):
            e = np.zeros_like(u)
            e[a] = 1.0
            if order == 2:
                pure.append((f(u + h * e) - 2.0 * f0 + f(u - h * e)) / (h * h))
            else:
                pure.append((-f(u + 2 * h * e) + 16.0 * f(u + h * e) - 30.0 * f0
                             + 16.0 * f(u - h * e) - f(u - 2 * h * e))
                            / (12 * h * h))
        # 4th-order first-derivative weights at offsets (2, 1, -1, -2)
        wts = ((-1.0, 2), (8.0, 1), (-8.0, -1), (1.0, -2))
        mixed = {}
        for a in range(n):
            for b in range(a + 1, n):
                ea = np.zeros_like(u)
                eb = np.zeros_like(u)
                ea[a] = 1.0
                eb[b] = 1.0
                if order == 2:
                    val = (f(u + h * (ea + eb)) - f(u + h * (ea - eb))
                           - f(u + h * (eb - ea)) + f(u - h * (ea + eb))
                           ) / (4 * h * h)
                else:
                    val = 0.0
                    for wa, ka in wts:
                        for wb, kb in wts:
                            val = val + wa * wb * f(u + h * (ka * ea + kb * eb))
                    val = val / (144.0 * h * h)
                mixed[(a, b)] = val

        def at(a, b):
            if a == b:
                return pure[a]
            return mixed[(min(a, b), max(a, b))]

        return at

    def normal_pair(self, u, h: float | None = None
                    ) -> tuple[np.ndarray, np.ndarray]:
        """(nubar, second null normal) with warped pairing -1."""
        u = np.asarray(u, dtype=float)
        tau = self.tau_fn(u)
        wv = self.warp.w(tau)
        nu1 = self.nubar(u)
        m = np.append(self.chi(u), -wv)
        dpsi = self._fd_jacobian(self.psi, u, h, order=4)
        dtau = self._fd_grad(self.tau_fn, u, h, order=4)
        Jbar = np.vstack([dpsi, dtau])
        gbar = self.metric_analytic(u)
        rhs = np.array([_w_inner(wv, self.sig, m, Jbar[:, a])
                        for a in range(Jbar.shape[1])])
        coef = np.linalg.solve(gbar, rhs)
        m_n = m - Jbar @ coef
        pair = _w_inner(wv, self.sig, m_n, nu1)
        lam = -_w_inner(wv, self.sig, m_n, m_n) / (2.0 * pair)
        nu2 = m_n + lam * nu1
        nu2 = nu2 * (-1.0 / pair)
        return nu1, nu2

    def mean_curvature(self, u, h: float | None = None) -> np.ndarray:
        """H = (1/n) g^{ab} (Dbar_{E_a} E_b)^perp via finite differences and
        the warped-product connection; ginv from the analytic metric."""
        u = np.asarray(u, dtype=float)
        h = self._h4(h)
        n = self.chart.dim
        tau = self.tau_fn(u)
        wv, wp = self.warp.w(tau), self.warp.w(tau, 1)
        psi0 = self.psi(u)
        dpsi = self._fd_jacobian(self.psi, u, h, order=4)
        dtau = self._fd_grad(self.tau_fn, u, h, order=4)
        psi_sec = self._second_partials(self.psi, u, h, order=4)
        tau_sec = self._second_partials(self.tau_fn, u, h, order=4)
        gbar = self.metric_analytic(u)
        ginv = np.linalg.inv(gbar)
        nu1, nu2 = self.normal_pair(u, h)

        H = np.zeros(len(psi0) + 1)
        for a in range(n):
            for b in range(n):
                q = (psi_sec(a, b)
                     + self.c * self._inner_q(dpsi[:, a], dpsi[:, b]) * psi0
                     + (wp / wv) * (dtau[a] * dpsi[:, b] + dtau[b] * dpsi[:, a]))
                tpart = tau_sec(a, b) + wv * wp * self._inner_q(dpsi[:, a],
                                                                dpsi[:, b])
                D = np.append(q, tpart)
                alpha = -_w_inner(wv, self.sig, D, nu2)
                beta = -_w_inner(wv, self.sig, D, nu1)
                H += ginv[a, b] * (alpha * nu1 + beta * nu2)
        return H / n

    def h_invariants(self, u, h: float | None = None) -> tuple[float, float, float]:
        """(<H,H>_w, <H,nubar>_w, collinearity residual of H against nubar)."""
        u = np.asarray(u, dtype=float)
        wv = self.warp.w(self.tau_fn(u))
        H = self.mean_curvature(u, h)
        nu1 = self.nubar(u)
        hnull = _w_inner(wv, self.sig, H, H)
        hnu = _w_inner(wv, self.sig, H, nu1)
        lam = float(H @ nu1) / float(nu1 @ nu1)
        coll = float(np.linalg.norm(H - lam * nu1) / np.linalg.norm(nu1))
        return hnull, hnu, coll

    # -- grid sweep ----------------------------------------------------------------

    def interior_points(self):
        for idx, u in self.chart.grid_points():
            yield idx, u

    def verify(self, mode: str = "mt", tol: Tolerances = Tolerances(),
               h: float | None = None) -> VerificationReport:
        """Grid sweep of the mode's residuals.

        mt:      spacelike + metric agreement + <H,H> and <H,nubar> small.
        null2ff: spacelike + metric agreement + full second fundamental form
                 proportional to one of the two null normals.
        slice:   like mt (tau constant; the slice criterion itself is the
                 cluster-mean-curvature check in mtsolve.slice_check).
        """
        if mode not in ("mt", "null2ff", "slice"):
            raise GeometryError(f"unknown verification mode {mode!r}")
        max_metric = 0.0
        max_hnull = 0.0
        max_hnu = 0.0
        max_coll = 0.0
        min_eig = math.inf
        sup_2ff_nu1 = 0.0
        sup_2ff_nu2 = 0.0
        for _, u in self.interior_points():
            ga = self.metric_analytic(u)
            gf = self.metric_fd(u, h)
            scale = max(1.0, float(np.max(np.abs(ga))))
            max_metric = max(max_metric, float(np.max(np.abs(ga - gf))) / scale)
            eigs = np.linalg.eigvalsh(gf)
            min_eig = min(min_eig, float(eigs[0]))
            if eigs[0] <= 0:
                continue  # degenerate point: curvature quantities undefined
            if mode in ("mt", "slice"):
                hnull, hnu, coll = self.h_invariants(u, h)
                max_hnull = max(max_hnull, abs(hnull))
                max_hnu = max(max_hnu, abs(hnu))
                max_coll = max(max_coll, coll)
            else:
                wv = self.warp.w(self.tau_fn(u))
                nu1, nu2 = self.normal_pair(u, h)
                S1, S2 = self._twoff_vs_normals(u, nu1, nu2, h)
                norm = self.metric_principal(u).diagonal()
                scale2 = np.sqrt(np.outer(norm, norm))
                sup_2ff_nu1 = max(sup_2ff_nu1, float(np.max(np.abs(S1) / scale2)))
                sup_2ff_nu2 = max(sup_2ff_nu2, float(np.max(np.abs(S2) / scale2)))
        max_2ff = (min(sup_2ff_nu1, sup_2ff_nu2)
                   if mode == "null2ff" else math.nan)
        passed = {
            "spacelike": bool(min_eig > tol.spacelike_min),
            "metric": bool(max_metric <= tol.metric_defect),
        }
        if mode in ("mt", "slice"):
            passed["h_null"] = bool(max_hnull <= tol.h_null)
            passed["h_nu"] = bool(max_hnu <= (tol.h_nu if mode == "mt"
                                              else tol.slice_defect))
        else:
            passed["twoff"] = bool(max_2ff <= tol.twoff)
        return VerificationReport(
            max_metric_defect=max_metric, max_Hnull=max_hnull, max_Hnu=max_hnu,
            max_2ff_defect=max_2ff, spacelike_min_eig=min_eig, passed=passed)

    def _twoff_vs_normals(self, u, nu1, nu2, h: float | None):
        """Second fundamental form entries <Dbar_{E_i} E_j, nu> for both
        normals, in the principal frame, from second derivatives."""
        u = np.asarray(u, dtype=float)
        h = self._h4(h)
        n = self.chart.dim
        pj = self._jet(u)
        tau = self.tau_fn(u)
        wv, wp = self.warp.w(tau), self.warp.w(tau, 1)
        psi0 = self.psi(u)
        dpsi = self._fd_jacobian(self.psi, u, h, order=4)
        dtau = self._fd_grad(self.tau_fn, u, h, order=4)
        psi_sec = self._second_partials(self.psi, u, h, order=4)
        tau_sec = self._second_partials(self.tau_fn, u, h, order=4)
        E = pj.principal_dirs
        S1 = np.empty((n, n))
        S2 = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                q = np.zeros(len(psi0))
                tp = 0.0
                for a in range(n):
                    for b in range(n):
                        coeff = E[a, i] * E[b, j]
                        if coeff == 0.0:
                            continue
                        q = q + coeff * psi_sec(a, b)
                        tp += coeff * tau_sec(a, b)
                Xq = dpsi @ E[:, i]
                Yq = dpsi @ E[:, j]
                Xt = float(dtau @ E[:, i])
                Yt = float(dtau @ E[:, j])
                q = (q + self.c * self._inner_q(Xq, Yq) * psi0
                     + (wp / wv) * (Xt * Yq + Yt * Xq))
                tp = tp + wv * wp * self._inner_q(Xq, Yq)
                D = np.append(q, tp)
                S1[i, j] = _w_inner(wv, self.sig, D, nu1)
                S2[i, j] = _w_inner(wv, self.sig, D, nu2)
        return S1, S2


# ---------------------------------------------------------------------------
# Curves: null acceleration verification


@dataclass
class CurveReport:
    max_acc_null: float     # sup |<gammabar'', gammabar''>_w|
    max_acc_nu: float       # sup |<gammabar'', nubar>_w|
    max_collinearity: float
    min_speed: float        # min <gammabar', gammabar'>_w (spacelike check)

    def passed(self, tol: Tolerances = Tolerances()) -> bool:
        return self.max_acc_null <= tol.h_null and self.min_speed > 0.0


def verify_null_curve(curve: NullCurve, samples: int = 1000) -> CurveReport:
    """Closed-form acceleration of the lifted curve through the warped
    connection, evaluated on the stored integration nodes."""
    from . import expr as ex
    warp = curve.warp
    c = curve.c
    sig = np.ones(curve.gamma.shape[1])
    if c == -1:
        sig[-1] = -1.0

    def inner_q(x, y):
        return float(np.sum(x * y * sig))

    step = max(1, len(curve.xs) // samples)
    max_null = max_nu = max_coll = 0.0
    min_speed = math.inf
    for i in range(0, len(curve.xs), step):
        x = float(curve.xs[i])
        gamma, T, nu = curve.gamma[i], curve.tangent[i], curve.normal[i]
        tau = float(ex.evaluate(curve.tau_tree, x))
        taup = ex.derivative(curve.tau_tree, x, 1)
        taupp = ex.derivative(curve.tau_tree, x, 2)
        kappa = curve.kappa[i]
        kprime = warp.omega_rate(c, tau) * taup
        th = warp.theta(tau)
        wv, wp = warp.w(tau), warp.w(tau, 1)
        cs, ss = co(c, th), si(c, th)
        a1 = taup / wv
        chi = -c * ss * gamma + cs * nu
        psi = cs * gamma + ss * nu
        dpsi = a1 * chi + (cs - kappa * ss) * T
        a1p = taupp / wv - taup * taup * wp / (wv * wv)
        chip = -c * a1 * psi - (c * ss + kappa * cs) * T
        factor_p = -a1 * (c * ss + kappa * cs) - kprime * ss
        Tp = -c * gamma + kappa * nu
        ddpsi = a1p * chi + a1 * chip + factor_p * T + (cs - kappa * ss) * Tp
        q_acc = ddpsi + c * inner_q(dpsi, dpsi) * psi + 2 * (wp / wv) * taup * dpsi
        t_acc = taupp + wv * wp * inner_q(dpsi, dpsi)
        acc = np.append(q_acc, t_acc)
        nubar = np.append(chi, wv)
        acc_null = wv * wv * inner_q(q_acc, q_acc) - t_acc * t_acc
        acc_nu = wv * wv * inner_q(q_acc, chi) - t_acc * wv
        lam = float(acc @ nubar) / float(nubar @ nubar)
        coll = float(np.linalg.norm(acc - lam * nubar) / np.linalg.norm(nubar))
        speed = wv * wv * inner_q(dpsi, dpsi) - taup * taup
        max_null = max(max_null, abs(acc_null))
        max_nu = max(max_nu, abs(acc_nu))
        max_coll = max(max_coll, coll)
        min_speed = min(min_speed, speed)
    return CurveReport(max_acc_null=max_null, max_acc_nu=max_nu,
                       max_collinearity=max_coll, min_speed=min_speed)


# ---------------------------------------------------------------------------
# Lemma-style product connection on explicit fields (for direct tests)


def warped_connection(warp: WarpProfile, c: int, point: tuple[np.ndarray, float],
                      X: tuple[np.ndarray, float],
                      Y_field: Callable[[np.ndarray, float], tuple[np.ndarray, float]],
                      h: float = 1e-6) -> np.ndarray:
    """Covariant derivative Dbar_X Y at (x, t) on Q x_w I.

    Y_field maps (x, t) to a product vector (Y_Q, Y_t); the derivative along
    X = (X_Q, X_t) is taken along the space-form geodesic through x (so the
    curve stays on the model) and corrected by the warped-product terms.
    Returns the product vector as one array (Q part, t part).
    """
    x, t = point
    Xq, Xt = np.asarray(X[0], dtype=float), float(X[1])
    x = np.asarray(x, dtype=float)
    sig = np.ones(len(x))
    if c == -1:
        sig[-1] = -1.0

    def inner_q(a, b):
        return float(np.sum(a * b * sig))

    def curve(s: float) -> tuple[np.ndarray, float]:
        if c == 0:
            return x + s * Xq, t + s * Xt
        norm = math.sqrt(abs(inner_q(Xq, Xq)))
        if norm < 1e-300:
            return x, t + s * Xt
        return (co(c, s * norm) * x + si(c, s * norm) * (Xq / norm),
                t + s * Xt)

    Yp = Y_field(*curve(h))
    Ym = Y_field(*curve(-h))
    Y0 = Y_field(x, t)
    dYq = (np.asarray(Yp[0]) - np.asarray(Ym[0])) / (2 * h)
    dYt = (float(Yp[1]) - float(Ym[1])) / (2 * h)
    wv, wp = warp.w(t), warp.w(t, 1)
    Yq, Yt = np.asarray(Y0[0], dtype=float), float(Y0[1])
    q_part = dYq + c * inner_q(Xq, Yq) * x + (wp / wv) * (Xt * Yq + Yt * Xq)
    t_part = dYt + wv * wp * inner_q(Xq, Yq)
    return np.append(q_part, t_part)
