"""Explicit isometry between R^{n+1} x_{e^t} R and a dense chart of de Sitter
space, used as an end-to-end cross-validation oracle for the null second
fundamental form pipeline.

The hyperboloid model is dS^{n+2} = {x in R^{n+3} : x_1^2 + ... + x_{n+2}^2
- x_{n+3}^2 = 1} with signature (+,...,+,-).  The map

    x_i = e^t y_i,   x_{n+2} = cosh t - (e^t/2)|y|^2,
    x_{n+3} = sinh t + (e^t/2)|y|^2

sends (y, t) onto the open chart x_{n+2} + x_{n+3} > 0, pulling the flat
metric back to e^{2t} |dy|^2 - dt^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .families import round_sphere, _sphere_param
from .immersion import MTImmersion, Tolerances, VerificationReport
from .spaceforms import GeometryError
from .warp import WarpProfile

HYPERBOLOID_TOL = 1e-10


def embed(y, t: float) -> np.ndarray:
    """Map (y, t) in R^{n+1} x R to the de Sitter hyperboloid in R^{n+3}."""
    y = np.asarray(y, dtype=float)
    et = math.exp(t)
    q = 0.5 * et * float(y @ y)
    return np.concatenate([et * y, [math.cosh(t) - q, math.sinh(t) + q]])


def hyperboloid_defect(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(abs(np.sum(x[:-1] ** 2) - x[-1] ** 2 - 1.0))


def inverse_embed(x) -> tuple[np.ndarray, float]:
    """Invert embed on the dense chart x_{n+2} + x_{n+3} > 0.

    e^t = x_{n+2} + x_{n+3} (the |y|^2 halves cancel), then y = x e^{-t}.
    The result is validated by re-embedding rather than trusting the algebra.
    """
    x = np.asarray(x, dtype=float)
    et = x[-2] + x[-1]
    if et <= 0.0:
        raise GeometryError(
            f"point outside the dense chart: x_(n+2) + x_(n+3) = {et} <= 0")
    t = math.log(et)
    y = x[:-2] / et
    back = embed(y, t)
    err = float(np.max(np.abs(back - x)))
    if err > 1e-10 * max(1.0, float(np.max(np.abs(x)))):
        raise GeometryError(f"inverse_embed round trip failed by {err:.2e}")
    return y, t


def pullback_defect(samples: np.ndarray, h: float = 1e-5) -> float:
    """Max entrywise defect of the finite-difference pullback of the flat
    (+...+,-) metric against diag(e^{2t} I, -1) over (y, t) samples."""
    worst = 0.0
    for row in samples:
        y, t = row[:-1], float(row[-1])
        m = len(y) + 1
        J = np.empty((len(y) + 2, m))
        for a in range(m):
            e = np.zeros(m)
            e[a] = 1.0
            J[:, a] = (embed(y + h * e[:-1], t + h * e[-1])
                       - embed(y - h * e[:-1], t - h * e[-1])) / (2 * h)
        sig = np.ones(len(y) + 2)
        sig[-1] = -1.0
        G = J.T @ np.diag(sig) @ J
        target = np.diag([math.exp(2 * t)] * len(y) + [-1.0])
        worst = max(worst, float(np.max(np.abs(G - target))))
    return worst


@dataclass
class CrossCheckReport:
    constraint_defect: float
    roundtrip_defect: float
    isometry_defect: float       # sup |inverse_embed(phibar1) - phibar2|
    phi2_defect: float           # sup |psi - theta(tau) chi - C x|
    null2ff: VerificationReport

    def all_passed(self) -> bool:
        return (self.constraint_defect <= HYPERBOLOID_TOL
                and self.roundtrip_defect <= 1e-10
                and self.isometry_defect <= 1e-8
                and self.phi2_defect <= 1e-8
                and self.null2ff.all_passed())


def crosscheck_null2ff(n: int, tau1, resolution: int = 9,
                       t0: float = 0.0,
                       tol: Tolerances = Tolerances()) -> CrossCheckReport:
    """Drive a null-2ff instance through de Sitter space and back.

    tau1 is a positive function of the unit-sphere point in R^{n+1}.  The
    lift x -> ((x, tau1), tau1) lies on the hyperboloid; composing with the
    inverse isometry must give (e^{-tau2} x, tau2) with tau2 = log(2 tau1),
    whose second fundamental form is proportional to the null normal
    (-x, e^{tau2}), and whose reconstructed base map is C x with
    C = e^{-t0}.
    """
    warp = WarpProfile("exp(t)", t0=t0)
    C = math.exp(-t0)
    chart = round_sphere(C, n=n, resolution=resolution)

    def tau2_of_point(x: np.ndarray) -> float:
        v = tau1(x)
        if v <= 0.0:
            raise GeometryError(f"tau1 = {v} <= 0 at {x}; log(2 tau1) undefined")
        return math.log(2.0 * v)

    def tau2_fn(u) -> float:
        return tau2_of_point(_sphere_param(np.asarray(u, dtype=float)))

    constraint = 0.0
    roundtrip = 0.0
    isometry = 0.0
    phi2 = 0.0
    mesh = np.stack(np.meshgrid(*chart.axes, indexing="ij"), axis=-1)
    for idx in np.ndindex(*chart.grid_shape):
        u = mesh[idx]
        x_unit = _sphere_param(u)
        t1 = tau1(x_unit)
        # phibar1 on the hyperboloid: (x, 0, 0) + tau1 (0,...,0, 1, 1)
        phibar1 = np.concatenate([x_unit, [t1, t1]])
        constraint = max(constraint, hyperboloid_defect(phibar1))
        y, t = inverse_embed(phibar1)
        tau2 = tau2_of_point(x_unit)
        phibar2 = np.append(math.exp(-tau2) * x_unit, tau2)
        isometry = max(isometry, float(np.max(np.abs(
            np.append(y, t) - phibar2))))
        y2, t2 = inverse_embed(embed(y, t))
        roundtrip = max(roundtrip, float(np.max(np.abs(y2 - y))),
                        abs(t2 - t))
        # reconstruction of the base map: psi - theta(tau) chi with chi = -x
        psi = math.exp(-tau2) * x_unit
        chi = -x_unit
        phi2_val = psi - warp.theta(tau2) * chi
        phi2 = max(phi2, float(np.max(np.abs(phi2_val - C * x_unit))))
    imm = MTImmersion(chart, warp, tau_fn=tau2_fn, name="desitter-crosscheck")
    report = imm.verify("null2ff", tol)
    return CrossCheckReport(constraint_defect=constraint,
                            roundtrip_defect=roundtrip,
                            isometry_defect=isometry,
                            phi2_defect=phi2,
                            null2ff=report)
