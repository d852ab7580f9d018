"""Warp profiles w(t) > 0 on an interval I, and the conformal time theta.

theta(t) = integral from t0 to t of ds/w(s) is strictly increasing; its
inverse recovers heights from conformal times.  Derivatives of w come from
dual numbers (see expr), theta from a closed form when the expression matches
a registry pattern and from adaptive Gauss-Kronrod quadrature otherwise.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from scipy.integrate import quad

from . import expr as ex
from .spaceforms import GeometryError, PoleError, co, ct, si

THETA_ABS_TOL = 1e-11
DIVERGENCE_THRESHOLD = 1e6


class WarpDomainError(GeometryError):
    """t outside the profile interval."""


class WarpPositivityError(GeometryError):
    """w(t) <= 0 encountered."""


class SingularOmegaError(GeometryError):
    """Denominator of Omega vanished."""


class ThetaRangeError(GeometryError):
    """Requested conformal time outside theta(I)."""

    def __init__(self, message, theta_range):
        super().__init__(f"{message}; theta range is about {theta_range}")
        self.theta_range = theta_range


def parse_warp(source: str) -> ex.Node:
    """Parse warp source text; see expr for the grammar."""
    return ex.parse(source)


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self):
        if not self.lo < self.hi:
            raise GeometryError(f"empty interval ({self.lo}, {self.hi})")

    def contains(self, t: float) -> bool:
        return self.lo < t < self.hi

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)


class WarpProfile:
    """w on I with base point t0 (theta(t0) = 0).

    Immutable after construction except for an internal memo of computed
    theta values, which is guarded by a lock; safe for concurrent use.
    """

    def __init__(self, source, interval: Interval | tuple = Interval(),
                 t0: float | None = None):
        if isinstance(source, str):
            self.source = source
            self.tree = parse_warp(source)
        else:
            self.tree = source
            self.source = ex.to_source(source)
        if not isinstance(interval, Interval):
            interval = Interval(*interval)
        self.interval = interval
        if t0 is None:
            # midpoint of a bounded interval, 0 otherwise (clamped inside)
            if interval.bounded:
                t0 = 0.5 * (interval.lo + interval.hi)
            else:
                t0 = 0.0
                if not interval.contains(t0):
                    lo, hi = interval.lo, interval.hi
                    t0 = lo + 1.0 if math.isfinite(lo) else hi - 1.0
        if not interval.contains(t0):
            raise WarpDomainError(f"t0 = {t0} outside interval {interval}")
        self.t0 = float(t0)
        self._theta_memo: dict[float, float] = {}
        self._lock = threading.Lock()
        self.w(self.t0)  # validates positivity at the base point

    def __repr__(self):
        return (f"WarpProfile({self.source!r}, ({self.interval.lo}, "
                f"{self.interval.hi}), t0={self.t0})")

    # -- w and derivatives --------------------------------------------------

    def _check_domain(self, t: float):
        if not self.interval.contains(t):
            raise WarpDomainError(
                f"t = {t} outside interval ({self.interval.lo}, {self.interval.hi})")

    def w(self, t: float, order: int = 0) -> float:
        self._check_domain(t)
        if order == 0:
            val = float(ex.evaluate(self.tree, float(t)))
            if not val > 0.0:
                raise WarpPositivityError(f"w({t}) = {val} is not positive")
            return val
        return ex.derivative(self.tree, float(t), order)

    @property
    def is_constant(self) -> bool:
        return isinstance(self.tree, ex.Const)

    # -- theta ---------------------------------------------------------------

    def _theta_closed_form(self, t: float) -> float | None:
        tree = self.tree
        if isinstance(tree, ex.Const):
            return (t - self.t0) / tree.value
        if isinstance(tree, ex.Call) and tree.fn == "exp" and isinstance(tree.arg, ex.Var):
            return math.exp(-self.t0) - math.exp(-t)
        return None

    def theta(self, t: float) -> float:
        self._check_domain(t)
        t = float(t)
        closed = self._theta_closed_form(t)
        if closed is not None:
            return closed
        with self._lock:
            memo = self._theta_memo.get(t)
        if memo is not None:
            return memo

        def integrand(s):
            val = float(ex.evaluate(self.tree, s))
            if not val > 0.0:
                raise WarpPositivityError(f"w({s}) = {val} is not positive")
            return 1.0 / val

        out = quad(integrand, self.t0, t, epsabs=THETA_ABS_TOL * 0.1,
                   epsrel=1e-12, limit=400, full_output=1)
        val, err = out[0], out[1]
        if err > 10 * THETA_ABS_TOL * max(1.0, abs(val)):
            raise GeometryError(
                f"theta quadrature did not converge at t = {t} (err {err:.2e})")
        with self._lock:
            self._theta_memo[t] = val
        return val

    def theta_prime(self, t: float) -> float:
        return 1.0 / self.w(t)

    def theta_second(self, t: float) -> float:
        w0 = self.w(t)
        return -self.w(t, 1) / (w0 * w0)

    def theta_range(self, probe_steps: int = 60) -> tuple[float, float]:
        """Estimated (inf, sup) of theta over I by probing toward both ends."""
        return (self._theta_toward(self.interval.lo, probe_steps),
                self._theta_toward(self.interval.hi, probe_steps))

    def _theta_toward(self, end: float, steps: int) -> float:
        last = 0.0
        for k in range(steps):
            t = self._expand_toward(end, k)
            try:
                last = self.theta(t)
            except (WarpPositivityError, GeometryError):
                break
            if abs(last) > DIVERGENCE_THRESHOLD:
                break
        return last if abs(last) < DIVERGENCE_THRESHOLD else math.copysign(math.inf, last)

    def theta_inverse(self, s: float, tol: float = 1e-12) -> float:
        """t in I with theta(t) = s, by bracketed Newton on the monotone theta."""
        s = float(s)
        lo, hi = self._bracket_theta(s)
        t = 0.5 * (lo + hi)
        for _ in range(200):
            f = self.theta(t) - s
            if abs(f) <= tol:
                return t
            if f > 0:
                hi = t
            else:
                lo = t
            step = t - f * self.w(t)  # Newton with theta' = 1/w
            t = step if lo < step < hi else 0.5 * (lo + hi)
        raise GeometryError(f"theta_inverse failed to converge for s = {s}")

    def _expand_toward(self, end: float, k: int) -> float:
        if math.isfinite(end):
            return end + (self.t0 - end) * (0.5 ** (k + 1))
        return self.t0 + math.copysign(2.0 ** k, end)

    def _bracket_theta(self, s: float) -> tuple[float, float]:
        lo = hi = self.t0
        flo = fhi = 0.0
        prev_f = None
        for k in range(64):
            if fhi >= s:
                break
            hi = self._expand_toward(self.interval.hi, k)
            fhi = self.theta(hi)
            if prev_f is not None and abs(fhi - prev_f) < 1e-14 * max(1.0, abs(fhi)):
                break  # sup of theta reached numerically
            prev_f = fhi
        if fhi < s:
            raise ThetaRangeError(f"s = {s} above theta(I)", self.theta_range())
        prev_f = None
        for k in range(64):
            if flo <= s:
                break
            lo = self._expand_toward(self.interval.lo, k)
            flo = self.theta(lo)
            if prev_f is not None and abs(flo - prev_f) < 1e-14 * max(1.0, abs(flo)):
                break
            prev_f = flo
        if flo > s:
            raise ThetaRangeError(f"s = {s} below theta(I)", self.theta_range())
        return lo, hi

    # -- Omega ----------------------------------------------------------------

    def omega(self, c: int, t: float, den_tol: float = 1e-12) -> float:
        """(w' ct(theta) - c) / (w' + ct(theta)); constant iff the warped
        product carries totally umbilic codimension-two data for every height.
        """
        th = self.theta(t)
        u = ct(c, th)  # raises PoleError at poles
        wp = self.w(t, 1)
        den = wp + u
        if abs(den) <= den_tol * max(1.0, abs(u), abs(wp)):
            raise SingularOmegaError(f"Omega denominator ~ 0 at t = {t}")
        return (wp * u - c) / den

    def omega_theta_form(self, c: int, t: float, den_tol: float = 1e-12) -> float:
        """Equivalent form (theta'' ct + c theta'^2) / (theta'' - theta'^2 ct)."""
        th = self.theta(t)
        u = ct(c, th)
        tp = self.theta_prime(t)
        ts = self.theta_second(t)
        den = ts - tp * tp * u
        if abs(den) <= den_tol * max(1.0, abs(ts), abs(tp * tp * u)):
            raise SingularOmegaError(f"Omega denominator ~ 0 at t = {t}")
        return (ts * u + c * tp * tp) / den

    def omega_extended(self, c: int, t: float, den_tol: float = 1e-12) -> float:
        """Pole-free form (w' co - c si) / (w' si + co) of Omega.

        Agrees with omega() away from poles of ct and extends continuously
        through them (value w' there).
        """
        th = self.theta(t)
        cc, ss = co(c, th), si(c, th)
        wp = self.w(t, 1)
        den = wp * ss + cc
        if abs(den) <= den_tol * max(1.0, abs(wp), 1.0):
            raise SingularOmegaError(f"Omega denominator ~ 0 at t = {t}")
        return (wp * cc - c * ss) / den

    def omega_rate(self, c: int, t: float) -> float:
        """d/dt of omega_extended, in closed form."""
        th = self.theta(t)
        cc, ss = co(c, th), si(c, th)
        wp = self.w(t, 1)
        wpp = self.w(t, 2)
        tp = self.theta_prime(t)
        p = wp * cc - c * ss
        q = wp * ss + cc
        dp = wpp * cc - c * tp * q
        dq = wpp * ss + tp * p
        return (dp * q - p * dq) / (q * q)

    def is_omega_constant(self, c: int, sample_count: int = 64,
                          span: float = 3.0, rel_tol: float = 1e-8
                          ) -> tuple[bool, float]:
        """(flag, max deviation) of Omega over sample points in I.

        Samples avoiding singular points; needs at least 16 usable samples.
        """
        if sample_count < 16:
            raise GeometryError("need at least 16 sample points")
        lo = self.interval.lo if math.isfinite(self.interval.lo) else self.t0 - span
        hi = self.interval.hi if math.isfinite(self.interval.hi) else self.t0 + span
        pad = (hi - lo) * 1e-3
        values = []
        k = 0
        while len(values) < sample_count and k < 4 * sample_count:
            t = lo + pad + (hi - lo - 2 * pad) * (k + 0.5) / (4 * sample_count)
            k += 1
            try:
                values.append(self.omega(c, t))
            except (PoleError, SingularOmegaError, WarpPositivityError):
                continue
        if len(values) < 16:
            raise GeometryError("all Omega samples were singular")
        mean = sum(values) / len(values)
        dev = max(values) - min(values)
        return dev <= rel_tol * (1.0 + abs(mean)), dev

    # -- null completeness ----------------------------------------------------

    def is_null_complete(self, direction: str = "future") -> bool | None:
        """Heuristic divergence test of the conformal time toward one end of I.

        True: integral diverges (complete); False: converges (incomplete);
        None: undecided within budget.  Advisory only.
        """
        if direction not in ("future", "past"):
            raise GeometryError("direction must be 'future' or 'past'")
        end = self.interval.hi if direction == "future" else self.interval.lo
        vals = []
        for k in range(40):
            t = self._expand_toward(end, k)
            try:
                vals.append(abs(self.theta(t)))
            except (WarpPositivityError, GeometryError):
                return None
            if vals[-1] > DIVERGENCE_THRESHOLD:
                return True
            if len(vals) >= 4 and all(
                    abs(vals[-i] - vals[-i - 1]) < 1e-12 * max(1.0, vals[-1])
                    for i in (1, 2, 3)):
                return False
        return None
