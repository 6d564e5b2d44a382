"""Central connection matrices, Stokes matrices and loop monodromies."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .asympt import AsymptoticSetup, default_zetas, sector_basis, subdominant_solution
from .connection import CoefficientEvaluator, ConnectionSpec
from .errors import FrameSingular, LoopHitsSingularity, MatchingInconsistent
from .frobenius import FrobeniusFrame, frobenius_frame
from .numerics import circle_path, condition_number, get_tolerances, integrate_ode
from .rep import Module


@dataclass
class ConnectionMatrices:
    i: int
    lam: complex
    z_mid: float
    Q: np.ndarray | None = None  # full matrix, rows Frobenius weights, columns asymptotic weights
    q_column: np.ndarray | None = None  # coefficients of the subdominant solution
    T: np.ndarray | None = None
    mu: np.ndarray | None = None
    condition: dict = field(default_factory=dict)
    residual: float = 0.0


def matching_radius(spec: ConnectionSpec) -> float:
    ws = [abs(s.w) for s in spec.singularities]
    return 0.4 * min(ws) if ws else 0.5


class QSolver:
    """Caches the Frobenius frame and asymptotic setup for one module index."""

    def __init__(self, spec: ConnectionSpec, i: int, z_mid: float | None = None,
                 frame: FrobeniusFrame | None = None, setup: AsymptoticSetup | None = None):
        self.spec, self.i = spec, i
        self.setup = setup or AsymptoticSetup(spec, i)
        self.frame = frame or frobenius_frame(spec, self.setup.module, t=self.setup.kappa)
        self.z_mid = z_mid or matching_radius(spec)

    def frob_matrix(self, lam, z=None, logz=None):
        z = self.z_mid if z is None else z
        F = self.frame.matrix(z, lam, logz)
        cond = condition_number(F)
        if not np.isfinite(cond) or cond > 1e12:
            raise FrameSingular("Frobenius frame is singular at the matching point", {"cond": cond})
        return F

    def subdominant(self, lam, r_seed=None, check_seed=False):
        return subdominant_solution(self.spec, self.i, lam, self.z_mid, 0.0, r_seed, self.setup,
                                    check_seed=check_seed)

    def q_column(self, lam, r_seed=None) -> np.ndarray:
        sol = self.subdominant(lam, r_seed)
        return np.linalg.solve(self.frob_matrix(lam), sol.value)

    def q_function(self, lam, weight_index: int | None = None) -> complex:
        col = self.q_column(lam)
        b = self.setup.module.hw_index if weight_index is None else weight_index
        return complex(col[b])


def central_connection(spec: ConnectionSpec, i: int, lam, z_mid: float | None = None,
                       full: bool = True, solver: QSolver | None = None) -> ConnectionMatrices:
    """Q with Frobenius(z_mid) Q = asymptotic frame(z_mid)."""
    solver = solver or QSolver(spec, i, z_mid)
    F = solver.frob_matrix(lam)
    col = np.linalg.solve(F, solver.subdominant(lam).value)
    out = ConnectionMatrices(i, lam, solver.z_mid, q_column=col, mu=solver.setup.mu,
                             condition={"frobenius": condition_number(F)})
    if full:
        zs, z1, _ = default_zetas(solver.setup.mu)
        fr = sector_basis(spec, i, lam, (-zs, -z1), solver.z_mid, 0.0, setup=solver.setup)
        out.Q = np.linalg.solve(F, fr.matrix)
        out.condition["asymptotic"] = condition_number(fr.matrix)
        m = solver.setup.max_index
        out.residual = float(np.linalg.norm(out.Q[:, m] - col) / np.linalg.norm(col))
    return out


def matching_drift(spec: ConnectionSpec, i: int, lam, z1: float, z2: float) -> float:
    """Relative change of the Q column when the matching radius changes."""
    a = central_connection(spec, i, lam, z1, full=False).q_column
    b = central_connection(spec, i, lam, z2, full=False).q_column
    d = float(np.linalg.norm(a - b) / np.linalg.norm(a))
    return d


def forbidden_entries(mu: np.ndarray, lo: float, hi: float) -> list[tuple[int, int]]:
    """(row, column) pairs of T that vanish: row less subdominant than column on [lo, hi]."""
    phi = 0.5 * (lo + hi)
    re = (mu * cmath.exp(1j * phi)).real
    n = len(mu)
    return [(a, b) for a in range(n) for b in range(n) if a != b and re[a] <= re[b]]


def stokes_matrix(spec: ConnectionSpec, i: int, lam, z_mid: float | None = None,
                  setup: AsymptoticSetup | None = None) -> ConnectionMatrices:
    """T with Psi-basis = Xi-basis . T on consecutive good intervals."""
    setup = setup or AsymptoticSetup(spec, i)
    z_mid = z_mid or matching_radius(spec)
    zs, z1, z2 = default_zetas(setup.mu)
    psi = sector_basis(spec, i, lam, (-zs, -z1), z_mid, 0.0, setup=setup)
    xi = sector_basis(spec, i, lam, (-zs - math.pi, -z2 - math.pi), z_mid, 0.0, setup=setup)
    T = np.linalg.solve(xi.matrix, psi.matrix)
    out = ConnectionMatrices(i, lam, z_mid, T=T, mu=setup.mu,
                             condition={"psi": condition_number(psi.matrix), "xi": condition_number(xi.matrix)})
    out.condition["forbidden"] = forbidden_entries(setup.mu, -zs, -z2)
    return out


def stokes_check(cm: ConnectionMatrices) -> tuple[float, float]:
    """(max |T_ww - 1|, max |forbidden entry|)."""
    T = cm.T
    diag = float(np.max(np.abs(np.diag(T) - 1)))
    forb = cm.condition["forbidden"]
    off = max((abs(T[a, b]) for a, b in forb), default=0.0)
    return diag, float(off)


@dataclass
class LoopResult:
    matrix: np.ndarray
    radius: float
    deviation: float
    det_error: float


def monodromy_loop(spec: ConnectionSpec, module: Module, center: complex, lam, radius: float | None = None,
                   t: float = 0.0, segments: int | None = None) -> LoopResult:
    """Transport of the identity once around ``center`` (counter-clockwise)."""
    tol = get_tolerances()
    r = spec.alg.r
    e = cmath.exp(2j * math.pi * t)
    poles = [0j] + [cmath.exp(2j * math.pi * l / r) * s.w / e for s in spec.singularities for l in range(r)]
    others = [p for p in poles if abs(p - center) > 1e-12]
    gap = min(abs(p - center) for p in others)
    radius = radius or 0.5 * gap
    if radius >= gap * (1 - 1e-9):
        raise LoopHitsSingularity("loop encloses another singular point", {"radius": radius, "gap": gap})
    segments = segments or tol.loop_segments
    path = circle_path(center, radius, 1, segments, 0.0, log_start=cmath.log(center + radius))
    ev = CoefficientEvaluator(spec, module)
    rhs = lambda z, logz: -ev(z, lam, t, logz)
    tr = integrate_ode(rhs, path, np.eye(module.dim, dtype=complex), rtol=tol.loop_rtol, atol=tol.ode_atol)
    M = tr.value
    # Liouville: det M = exp(-oint tr A); the residue trace is an integer combination for trivial loops
    trace_integral = _trace_integral(ev, spec, center, radius, lam, t)
    det_err = abs(np.linalg.det(M) - cmath.exp(-trace_integral))
    dev = float(np.linalg.norm(M - np.eye(module.dim), 2))
    return LoopResult(M, radius, dev, float(det_err))


def _trace_integral(ev, spec, center, radius, lam, t, n=256):
    phis = 2 * math.pi * np.arange(n) / n
    z0 = center + radius
    l0 = cmath.log(z0)
    total = 0j
    for p in phis:
        z = center + radius * cmath.exp(1j * p)
        logz = l0 + cmath.log(z / center) - cmath.log(z0 / center) if center != 0 else complex(math.log(radius), p)
        total += np.trace(ev(z, lam, t, logz)) * 1j * radius * cmath.exp(1j * p)
    return total * (2 * math.pi / n)


def frobenius_monodromy_error(spec: ConnectionSpec, module: Module, lam, radius: float = 0.3,
                              t: float = 0.0) -> float:
    """max over columns of |transport around 0 of chi_w - e^{-2 pi i gamma_w} chi_w(., e^{2 pi i k} lam)|."""
    frame = frobenius_frame(spec, module, t=t)
    z0 = radius
    Y0 = frame.matrix(z0, lam)
    path = circle_path(0.0, radius, 1, 8)
    ev = CoefficientEvaluator(spec, module)
    tr = integrate_ode(lambda z, logz: -ev(z, lam, t, logz), path, Y0,
                       rtol=get_tolerances().loop_rtol, atol=get_tolerances().ode_atol)
    # chi(e^{2 pi i} z, lam) through the rotated evaluator
    expect = frame.rotated(z0, cmath.exp(2j * math.pi * spec.k) * lam, 1.0, complex(math.log(z0), 0.0))
    err = np.abs(tr.value - expect).max() / np.abs(Y0).max()
    return float(err)


def check_matching(cm_a: ConnectionMatrices, cm_b: ConnectionMatrices, tol: float = 1e-6):
    d = float(np.linalg.norm(cm_a.q_column - cm_b.q_column) / np.linalg.norm(cm_a.q_column))
    if d > tol:
        raise MatchingInconsistent(f"Q drifts by {d:.2e} between matching radii", {"drift": d})
    return d
