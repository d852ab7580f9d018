"""The three space forms of curvature c in {-1, 0, 1} and their c-trigonometry.

Points and tangent vectors are always stored in coordinates of the flat
ambient space: R^{n+1} for c = 0, R^{n+2} (Euclidean) for the sphere, and
R^{n+2} with signature (+,...,+,-) for the hyperboloid model of hyperbolic
space.  Intrinsic coordinates exist only inside hypersurface charts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

POLE_TOL = 1e-12
QUADRIC_TOL = 1e-9


class GeometryError(ValueError):
    pass


class PoleError(GeometryError):
    """ct evaluated within POLE_TOL of a zero of si."""


# ---------------------------------------------------------------------------
# c-trigonometry


def co(c: int, t):
    if c == 1:
        return np.cos(t)
    if c == 0:
        return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
    if c == -1:
        return np.cosh(t)
    raise GeometryError(f"curvature sign must be -1, 0 or 1, got {c}")


def si(c: int, t):
    if c == 1:
        return np.sin(t)
    if c == 0:
        return np.asarray(t, dtype=float) if np.ndim(t) else float(t)
    if c == -1:
        return np.sinh(t)
    raise GeometryError(f"curvature sign must be -1, 0 or 1, got {c}")


def ct(c: int, t):
    """co/si; raises PoleError within POLE_TOL of a zero of si."""
    s = si(c, t)
    if np.min(np.abs(s)) < POLE_TOL:
        raise PoleError(f"ct({c}, {t!r}) evaluated at a pole")
    return co(c, t) / s


def ct_inverse(c: int, u: float) -> float:
    """The s with ct(s) = u on the principal branch.

    c = 1: s in (0, pi).  c = 0: s = 1/u, u != 0.  c = -1: |u| > 1,
    s = arcoth(u) with the sign of u.
    """
    if c == 1:
        return math.pi / 2.0 - math.atan(u)
    if c == 0:
        if u == 0.0:
            raise GeometryError("ct_inverse(0, 0): 1/s never vanishes")
        return 1.0 / u
    if c == -1:
        if abs(u) <= 1.0:
            raise GeometryError(f"ct_inverse(-1, {u}): coth has |range| > 1")
        return 0.5 * math.log((u + 1.0) / (u - 1.0))
    raise GeometryError(f"curvature sign must be -1, 0 or 1, got {c}")


# ---------------------------------------------------------------------------
# Space forms


@dataclass(frozen=True)
class SpaceForm:
    """The model Q^{n+1}_c in its flat ambient embedding."""

    c: int
    intrinsic_dim: int  # n + 1

    def __post_init__(self):
        if self.c not in (-1, 0, 1):
            raise GeometryError(f"curvature sign must be -1, 0 or 1, got {self.c}")
        if self.intrinsic_dim < 2:
            raise GeometryError("intrinsic dimension must be at least 2")

    @property
    def n(self) -> int:
        """Dimension of a hypersurface of the model."""
        return self.intrinsic_dim - 1

    @property
    def ambient_dim(self) -> int:
        return self.intrinsic_dim if self.c == 0 else self.intrinsic_dim + 1

    @property
    def signature(self) -> np.ndarray:
        sig = np.ones(self.ambient_dim)
        if self.c == -1:
            sig[-1] = -1.0
        return sig

    def inner(self, x, y):
        """Ambient metric (Euclidean, or Lorentzian for c = -1)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.c == -1:
            return np.sum(x * y * self.signature, axis=-1)
        return np.sum(x * y, axis=-1)

    def quadric_defect(self, x) -> float:
        """|<x,x> - target| for the model quadric; 0.0 identically for c = 0."""
        if self.c == 0:
            return 0.0
        target = 1.0 if self.c == 1 else -1.0
        return float(abs(self.inner(x, x) - target))

    def on_model(self, x, tol: float = QUADRIC_TOL) -> bool:
        if self.c == 0:
            return True
        if self.quadric_defect(x) > tol:
            return False
        if self.c == -1 and np.asarray(x)[..., -1] <= 0:
            return False
        return True

    def tangent_basis(self, x) -> np.ndarray:
        """Orthonormal basis of T_x Q as columns, w.r.t. the ambient metric."""
        amb = self.ambient_dim
        if self.c == 0:
            return np.eye(amb)
        x = np.asarray(x, dtype=float)
        sig = self.signature
        xx = self.inner(x, x)  # +1 or -1
        # T_x Q is positive definite for every c, so plain Gram-Schmidt works.
        cols = []
        for k in range(amb):
            v = np.zeros(amb)
            v[k] = 1.0
            v = v - (self.inner(v, x) / xx) * x
            for b in cols:
                v = v - self.inner(v, b) * b
            nrm = self.inner(v, v)
            if nrm > 1e-12:
                cols.append(v / math.sqrt(nrm))
            if len(cols) == self.intrinsic_dim:
                break
        if len(cols) != self.intrinsic_dim:
            raise GeometryError("failed to build a tangent basis")
        return np.column_stack(cols)

    def geodesic(self, p, v, t: float, tol: float = 1e-9) -> np.ndarray:
        """co(t) p + si(t) v (straight line for c = 0).

        Rejects v that is not a unit tangent at p beyond tol.
        """
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        if abs(self.inner(v, v) - 1.0) > tol:
            raise GeometryError("geodesic direction is not a unit vector")
        if self.c == 0:
            return p + t * v
        if not self.on_model(p, tol):
            raise GeometryError("geodesic base point is not on the model quadric")
        if abs(self.inner(p, v)) > tol:
            raise GeometryError("geodesic direction is not tangent to the model")
        return co(self.c, t) * p + si(self.c, t) * v


def spaceform(c: int, n: int) -> SpaceForm:
    """Model Q^{n+1}_c for hypersurfaces of dimension n."""
    return SpaceForm(c=c, intrinsic_dim=n + 1)
