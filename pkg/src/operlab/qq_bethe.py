"""Psi-system, QQ-system and Bethe-equation checks built on computed Q-functions.

Conventions (untwisted algebras):
  Psi_s(z, lam) = Psi(e^{2 pi i s} z, e^{-2 pi i k s} lam),  q = e^{i pi k},
  Q_i   = coefficient of the top-weight Frobenius solution in Psi^(i),
  Q~_i  = coefficient of the solution attached to the weight omega_i - alpha_i.
With Psi^(i) rescaled so that m_i(Psi_{-1/2} ^ Psi_{1/2}) = (x)_j Psi^(j), the QQ relation reads
  e^{i pi l_i} Q_i(q lam) Q~_i(q^-1 lam) - e^{-i pi l_i} Q~_i(q lam) Q_i(q^-1 lam) = prod_j Q_j(lam),
where l_i = alpha_i(ell).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .asympt import subdominant_solution
from .connection import ConnectionSpec
from .errors import (CountMismatch, DenominatorZero, MissingSample, NoConvergence,
                     UnsupportedTwistedType)
from .monodromy_data import QSolver
from .rep import build_fundamental, build_m_map, cyclic_spectrum, ensure_normalized


def _require_untwisted(spec: ConnectionSpec):
    if spec.alg.r != 1:
        raise UnsupportedTwistedType("QQ and Psi-system checks are implemented for r = 1")


def _key(lam) -> tuple:
    lam = complex(lam)
    return (round(lam.real, 13), round(lam.imag, 13))


def psi_system_constant(spec: ConnectionSpec, i: int) -> complex:
    """c_i with m_i(e^{-i pi rho/h} psi_i ^ e^{i pi rho/h} psi_i) = c_i (x)_j psi_j."""
    alg = spec.alg
    ensure_normalized(alg)
    h = alg.h
    mm = build_m_map(alg, i)
    base = mm.source.base
    psi = cyclic_spectrum(alg, base, float(alg.kappa[i - 1])).psi
    rho = np.real(np.diag(base.rep(alg.lie.rho_vee)))
    lhs = mm(mm.source.wedge(np.exp(-1j * math.pi * rho / h) * psi, np.exp(1j * math.pi * rho / h) * psi))
    vecs = []
    for j in mm.target_nodes:
        mod = build_fundamental(alg, j)
        vecs.append(cyclic_spectrum(alg, mod, float(alg.kappa[j - 1])).psi)
    rhs = mm.target.tensor(vecs)
    c = complex(np.vdot(rhs, lhs) / np.vdot(rhs, rhs))
    if np.linalg.norm(lhs - c * rhs) > 1e-8 * np.linalg.norm(lhs):
        raise NoConvergence("wedge of rotated eigenvectors is not proportional to the tensor product")
    return c


def normalisation_factors(spec: ConnectionSpec) -> np.ndarray:
    """n_i with C log n = -log c, so that n_i Psi^(i) satisfy the Psi-system with unit constants."""
    alg = spec.alg
    c = np.array([psi_system_constant(spec, i) for i in range(1, alg.n + 1)])
    C = np.array(alg.cartan_tilde, dtype=float)
    logn = np.linalg.solve(C, -np.log(c))
    return np.exp(logn)


@dataclass
class QFunctionTable:
    """Lazily evaluated and cached Q-functions for every node."""
    spec: ConnectionSpec
    solvers: dict = field(default_factory=dict)
    norms: np.ndarray | None = None
    cache: dict = field(default_factory=dict)
    z_mid: float | None = None

    def __post_init__(self):
        _require_untwisted(self.spec)
        if self.norms is None:
            self.norms = normalisation_factors(self.spec)

    @property
    def q(self) -> complex:
        return cmath.exp(1j * math.pi * self.spec.k)

    def solver(self, i: int) -> QSolver:
        if i not in self.solvers:
            self.solvers[i] = QSolver(self.spec, i, self.z_mid)
        return self.solvers[i]

    def column(self, i: int, lam) -> np.ndarray:
        key = (i, _key(lam))
        if key not in self.cache:
            self.cache[key] = self.norms[i - 1] * self.solver(i).q_column(complex(lam))
        return self.cache[key]

    def lookup(self, i: int, lam) -> np.ndarray:
        key = (i, _key(lam))
        if key not in self.cache:
            raise MissingSample(f"no sample for node {i} at {lam}")
        return self.cache[key]

    def indices(self, i: int) -> tuple[int, int]:
        mod = self.solver(i).setup.module
        top = mod.hw_index
        sub = mod.words.index((i - 1,))
        return top, sub

    def Q(self, i: int, lam) -> complex:
        return complex(self.column(i, lam)[self.indices(i)[0]])

    def Qt(self, i: int, lam) -> complex:
        return complex(self.column(i, lam)[self.indices(i)[1]])


def qq_terms(table: QFunctionTable, s: int, lam) -> tuple[complex, complex]:
    """(LHS, RHS) of the QQ relation at node s."""
    q = table.q
    ell = complex(table.spec.ell[s - 1])
    a, b = q * lam, lam / q
    lhs = (cmath.exp(1j * math.pi * ell) * table.Q(s, a) * table.Qt(s, b)
           - cmath.exp(-1j * math.pi * ell) * table.Qt(s, a) * table.Q(s, b))
    rhs = 1.0 + 0j
    for j in build_m_map(table.spec.alg, s).target_nodes:
        rhs *= table.Q(j, lam)
    return lhs, rhs


def qq_residual(table: QFunctionTable, s: int, lam) -> complex:
    lhs, rhs = qq_terms(table, s, lam)
    return lhs - rhs


def qq_relative_residual(table: QFunctionTable, s: int, lam) -> float:
    lhs, rhs = qq_terms(table, s, lam)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def bethe_residual(table: QFunctionTable, lam_star, s: int, guard: float = 1e-12) -> complex:
    """e^{2 pi i l_s} prod_j Q_j(q^{C_sj} lam*) / Q_j(q^{-C_sj} lam*) + 1."""
    alg = table.spec.alg
    C = alg.cartan_tilde
    q = table.q
    val = cmath.exp(2j * math.pi * complex(table.spec.ell[s - 1]))
    for j in range(1, alg.n + 1):
        c = int(C[s - 1][j - 1])
        if c == 0:
            continue
        num = table.Q(j, q ** c * lam_star)
        den = table.Q(j, q ** (-c) * lam_star)
        if abs(den) < guard * max(abs(num), 1e-300):
            raise DenominatorZero(f"Q_{j} vanishes at a shifted Bethe root", {"node": j})
        val *= num / den
    return val + 1


# ---------------------------------------------------------------- Psi-system

def rotated_psi(spec: ConnectionSpec, i: int, z: float, lam, s: float, setup=None) -> np.ndarray:
    """Psi^(i)(e^{2 pi i s} z, e^{-2 pi i k s} lam) for z on the positive axis, by direct transport."""
    lam2 = cmath.exp(-2j * math.pi * spec.k * s) * lam
    sol = subdominant_solution(spec, i, lam2, float(z), 2 * math.pi * s, setup=setup, check_seed=False)
    return sol.value


def psi_system_residual(spec: ConnectionSpec, i: int, z: float, lam, norms=None, setups=None) -> float:
    """Relative mismatch of m_i(Psi^_{-1/2} ^ Psi^_{1/2}) against (x)_j Psi^(j) at (z, lam)."""
    _require_untwisted(spec)
    alg = spec.alg
    norms = normalisation_factors(spec) if norms is None else norms
    setups = setups or {}
    mm = build_m_map(alg, i)
    n = norms[i - 1]
    a = n * rotated_psi(spec, i, z, lam, -0.5, setups.get(i))
    b = n * rotated_psi(spec, i, z, lam, 0.5, setups.get(i))
    lhs = mm(mm.source.wedge(a, b))
    vecs = [norms[j - 1] * rotated_psi(spec, j, z, lam, 0.0, setups.get(j)) for j in mm.target_nodes]
    rhs = mm.target.tensor(vecs)
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), np.linalg.norm(rhs)))


# ---------------------------------------------------------------- zeros

def _winding(f, pts) -> float:
    vals = [f(p) for p in pts]
    total = 0.0
    for u, v in zip(vals, vals[1:] + vals[:1]):
        d = cmath.phase(v / u)
        if abs(d) > 2.0:
            raise CountMismatch("boundary sampling too coarse for the argument principle", {"step": d})
        total += d
    return total / (2 * math.pi)


def argument_count(f, region, step: float = 0.25) -> int:
    x0, x1, y0, y1 = region
    pts = []
    for (a, b) in [(complex(x0, y0), complex(x1, y0)), (complex(x1, y0), complex(x1, y1)),
                   (complex(x1, y1), complex(x0, y1)), (complex(x0, y1), complex(x0, y0))]:
        m = max(2, int(math.ceil(abs(b - a) / step)))
        pts += [a + (b - a) * t / m for t in range(m)]
    return int(round(_winding(f, pts)))


def _secant(f, z0, z1, tol=1e-13, max_iter=60):
    f0, f1 = f(z0), f(z1)
    for _ in range(max_iter):
        if f1 == f0:
            break
        z2 = z1 - f1 * (z1 - z0) / (f1 - f0)
        z0, f0 = z1, f1
        z1, f1 = z2, f(z2)
        if abs(z1 - z0) < tol * max(1.0, abs(z1)):
            return z1
    raise NoConvergence("secant iteration for a Q-zero did not converge")


def find_zeros(table: QFunctionTable, i: int, region, count: int | None = None, step: float = 0.5,
               verify_count: bool = False) -> list[complex]:
    """Zeros of Q_i inside region = (re_lo, re_hi, im_lo, im_hi)."""
    x0, x1, y0, y1 = region
    if x1 <= x0 or y1 < y0:
        return []
    f = lambda lam: table.Q(i, lam)
    zeros: list[complex] = []
    real_axis = y0 <= 0 <= y1
    if real_axis:
        xs = np.arange(x0, x1 + 1e-12, step)
        vals = [f(x) for x in xs]
        ref = next((v for v in vals if v != 0), 1.0)
        phase = ref / abs(ref)
        # Q is real on the axis up to a constant phase when ell is real
        vmax = max(abs(v) for v in vals)
        is_real = all(abs((v / phase).imag) <= 1e-8 * vmax for v in vals)
        if is_real:
            g = lambda x: (f(x) / phase).real
            for a, b, fa, fb in zip(xs, xs[1:], vals, vals[1:]):
                ra, rb = (fa / phase).real, (fb / phase).real
                if ra == 0:
                    zeros.append(complex(a))
                elif ra * rb < 0:
                    zeros.append(complex(brentq(g, a, b, xtol=1e-14, rtol=1e-15)))
    if not zeros or not real_axis:
        zeros = _zeros_by_subdivision(f, region, step)
    zeros = sorted(zeros, key=lambda z: abs(z))
    for z in zeros:
        scale = max(abs(f(z + 1e-3)), abs(f(z - 1e-3)))
        if abs(f(z)) > 1e-8 * scale * 1e3:
            raise NoConvergence(f"located zero {z} fails the |Q| check")
    if verify_count:
        n = argument_count(f, region, step / 2)
        if n != len(zeros):
            raise CountMismatch(f"argument principle counts {n} zeros, located {len(zeros)}",
                                {"count": n, "found": len(zeros)})
    if count is not None:
        zeros = zeros[:count]
    return zeros


def _zeros_by_subdivision(f, region, step, depth=0):
    x0, x1, y0, y1 = region
    n = argument_count(f, region, step)
    if n == 0:
        return []
    w, h = x1 - x0, y1 - y0
    if n == 1 and max(w, h) < 4 * step or depth > 8:
        c = complex(0.5 * (x0 + x1), 0.5 * (y0 + y1))
        return [_secant(f, c, c + 0.1 * step)]
    if w >= h:
        xm = 0.5 * (x0 + x1)
        parts = [(x0, xm, y0, y1), (xm, x1, y0, y1)]
    else:
        ym = 0.5 * (y0 + y1)
        parts = [(x0, x1, y0, ym), (x0, x1, ym, y1)]
    out = []
    for p in parts:
        out += _zeros_by_subdivision(f, p, step / 2 if depth > 2 else step, depth + 1)
    return out
