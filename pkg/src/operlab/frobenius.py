"""Frobenius solutions at z = 0 of the loop-realization ODE.

A solution attached to a weight omega has the form
    chi(z, lam) = z^{-gamma} sum_{m,n} c_{m,n} z^{m + k n} lam^n,   gamma = omega(ell),
and the coefficients satisfy
    (f + ell - gamma + m + k n) c_{m,n} + v_theta c_{m,n-1} + sum_l A_l c_{m-l,n} = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .connection import ConnectionSpec, laurent_at_zero
from .errors import LinearSolveSingular, NotGeneric, OutsideValidityRadius, TailNotConverged
from .numerics import condition_number, get_tolerances
from .rep import Module

DEFAULT_ORDERS = (60, 40)


@dataclass
class FrobeniusSolution:
    index: int  # basis vector of the module the solution is attached to
    weight: tuple
    gamma: complex
    coeffs: np.ndarray  # (M+1, N+1, dim)
    k: float
    rho: float
    t: float = 0.0
    orders: tuple = DEFAULT_ORDERS
    residual: float = 0.0

    @property
    def seed(self) -> np.ndarray:
        return self.coeffs[0, 0]


@dataclass
class GenericityReport:
    generic: bool
    min_gap: float
    condition: float
    checked: int
    violation: tuple | None = None
    details: dict = field(default_factory=dict)


def _ell_values(spec: ConnectionSpec, module: Module) -> np.ndarray:
    return np.diag(module.rep(spec.alg.lie.ell_element(spec.ell)))


def check_generic(spec: ConnectionSpec, modules, tol: float = 1e-8, raise_on_failure: bool = True) -> GenericityReport:
    """Resonance test omega'(ell) - omega(ell) + m + k n != 0 and diagonalisability of f + ell."""
    k = spec.k
    worst, worst_cond, count = math.inf, 0.0, 0
    violation = None
    for mi, module in enumerate(modules):
        vals = _ell_values(spec, module)
        diffs = vals[None, :] - vals[:, None]
        bound = float(np.max(np.abs(diffs))) + 1
        pairs = [(m, n) for m in range(int(bound) + 2) for n in range(int(bound / k) + 2)
                 if (m, n) != (0, 0) and m + k * n <= bound]
        for a in range(len(vals)):
            for b in range(len(vals)):
                for m, n in pairs:
                    gap = abs(diffs[a, b] + m + k * n)
                    count += 1
                    if gap < worst:
                        worst = gap
                    if gap < tol and violation is None:
                        violation = (mi, module.weights[a], module.weights[b], m, n)
        # distinct weights with equal ell-values break the triangular eigenvector construction
        for a in range(len(vals)):
            for b in range(len(vals)):
                if module.weights[a] != module.weights[b] and abs(vals[a] - vals[b]) < tol and violation is None:
                    violation = (mi, module.weights[a], module.weights[b], 0, 0)
        frame = frobenius_seeds(spec, module, check=False)
        worst_cond = max(worst_cond, condition_number(frame))
    ok = violation is None and worst_cond < 1e12
    report = GenericityReport(ok, float(worst), float(worst_cond), count, violation)
    if not ok and raise_on_failure:
        raise NotGeneric(f"parameters are not generic: {violation}", violation)
    return report


def frobenius_seeds(spec: ConnectionSpec, module: Module, check: bool = True) -> np.ndarray:
    """Eigenvectors chi_omega of f + ell, column b normalised to 1 on basis vector b."""
    F = module.rep(spec.base_element())
    vals = _ell_values(spec, module)
    n = module.dim
    cols = np.zeros((n, n), dtype=complex)
    for b in range(n):
        others = [a for a in range(n) if module.weights[a] != module.weights[b]]
        x = np.zeros(n, dtype=complex)
        x[b] = 1.0
        if others:
            sub = F[np.ix_(others, others)] - vals[b] * np.eye(len(others))
            rhs = -(F[np.ix_(others, [b])]).ravel()
            try:
                y = np.linalg.solve(sub, rhs)
            except np.linalg.LinAlgError as exc:
                raise LinearSolveSingular("f + ell is not diagonalisable at these parameters", {}) from exc
            x[others] = y
        if check:
            res = np.abs(F @ x - vals[b] * x).max()
            if res > 1e-9 * max(1.0, np.abs(x).max()):
                raise LinearSolveSingular("eigenvector construction failed", {"residual": float(res)})
        cols[:, b] = x
    return cols


def build_frobenius(spec: ConnectionSpec, module: Module, b: int, M: int | None = None,
                    N: int | None = None, t: float = 0.0, rho: float | None = None,
                    seed: np.ndarray | None = None) -> FrobeniusSolution:
    """Coefficients c_{m,n} for the solution seeded by basis vector b (rotation t of the connection)."""
    M = DEFAULT_ORDERS[0] if M is None else M
    N = DEFAULT_ORDERS[1] if N is None else N
    k = spec.k
    F = module.rep(spec.base_element())
    V = module.rep(spec.alg.lie.v_theta)
    A = laurent_at_zero(spec, M)
    e = cmath.exp(2j * math.pi * t)
    Am = [None] + [e ** l * module.rep(A[l]) if np.any(A[l]) else None for l in range(1, M + 1)]
    gamma = complex(_ell_values(spec, module)[b])
    c0 = frobenius_seeds(spec, module)[:, b] if seed is None else np.asarray(seed, dtype=complex)
    dim = module.dim
    C = np.zeros((M + 1, N + 1, dim), dtype=complex)
    C[0, 0] = c0
    eye = np.eye(dim)
    worst = 0.0
    for n in range(N + 1):
        for m in range(M + 1):
            if m == 0 and n == 0:
                continue
            rhs = np.zeros(dim, dtype=complex)
            if n > 0:
                rhs += V @ C[m, n - 1]
            for l in range(1, m + 1):
                if Am[l] is not None:
                    rhs += Am[l] @ C[m - l, n]
            op = F - gamma * eye + (m + k * n) * eye
            try:
                C[m, n] = np.linalg.solve(op, -rhs)
            except np.linalg.LinAlgError as exc:
                raise LinearSolveSingular(f"resonant step (m, n) = ({m}, {n})", {"m": m, "n": n}) from exc
            res = np.abs(op @ C[m, n] + rhs).max()
            worst = max(worst, res / max(1.0, np.abs(rhs).max()))
    if rho is None:
        ws = [abs(s.w) for s in spec.singularities]
        rho = 0.8 * min(ws) if ws else 1.0
    return FrobeniusSolution(b, tuple(module.weights[b]), gamma, C, k, rho, t, (M, N), worst)


def recurrence_residual(spec: ConnectionSpec, module: Module, sol: FrobeniusSolution) -> float:
    """Max residual of the recurrence over all stored coefficients (relative to the term sizes)."""
    k = spec.k
    F = module.rep(spec.base_element())
    V = module.rep(spec.alg.lie.v_theta)
    M, N = sol.orders
    A = laurent_at_zero(spec, M)
    e = cmath.exp(2j * math.pi * sol.t)
    Am = [None] + [e ** l * module.rep(A[l]) for l in range(1, M + 1)]
    C = sol.coeffs
    eye = np.eye(module.dim)
    worst = 0.0
    for n in range(N + 1):
        for m in range(M + 1):
            val = (F - sol.gamma * eye + (m + k * n) * eye) @ C[m, n]
            scale = np.abs(val).max()
            if n > 0:
                val = val + V @ C[m, n - 1]
            for l in range(1, m + 1):
                val = val + Am[l] @ C[m - l, n]
            worst = max(worst, np.abs(val).max() / max(scale, 1.0))
    return float(worst)


@dataclass
class FrobeniusValue:
    value: np.ndarray
    error: float


def eval_frobenius(sol: FrobeniusSolution, z: complex, lam: complex, logz: complex | None = None,
                   check_radius: bool = True) -> FrobeniusValue:
    """Truncated series value with a geometric tail estimate."""
    if check_radius and abs(z) >= sol.rho:
        raise OutsideValidityRadius(f"|z| = {abs(z):.3g} outside radius {sol.rho:.3g}")
    if logz is None:
        logz = cmath.log(z)
    M, N = sol.orders
    k = sol.k
    zm = np.exp(np.arange(M + 1) * logz)
    zn = np.exp(np.arange(N + 1) * k * logz) * lam ** np.arange(N + 1)
    weights = zm[:, None] * zn[None, :]
    terms = sol.coeffs * weights[:, :, None]
    total = terms.sum(axis=(0, 1))
    # tail: last two m-blocks and last two n-blocks
    err = 0.0
    for axis_blocks in (np.linalg.norm(terms, axis=(1, 2)), np.linalg.norm(terms, axis=(0, 2))):
        last, prev = axis_blocks[-1], axis_blocks[-2] if len(axis_blocks) > 1 else np.inf
        if last == 0:
            continue
        ratio = last / prev if prev > 0 else np.inf
        if ratio >= 1:
            err = np.inf
        else:
            err += last * ratio / (1 - ratio)
    pref = cmath.exp(-sol.gamma * logz)
    scale = max(np.linalg.norm(total), 1e-300)
    if not np.isfinite(err):
        raise TailNotConverged("Frobenius series tail is not decreasing", {"z": z, "lam": lam})
    return FrobeniusValue(pref * total, float(err / scale))


@dataclass
class FrobeniusFrame:
    spec: ConnectionSpec
    module: Module
    solutions: list
    t: float

    def matrix(self, z: complex, lam: complex, logz: complex | None = None, check_radius: bool = True):
        cols = [eval_frobenius(s, z, lam, logz, check_radius).value for s in self.solutions]
        return np.array(cols).T

    def error(self, z, lam, logz=None) -> float:
        return max(eval_frobenius(s, z, lam, logz).error for s in self.solutions)

    def rotated(self, z: complex, lam: complex, s: float, logz: complex | None = None):
        """Columns chi_omega(e^{2 pi i s} z, e^{-2 pi i k s} lam) for solutions of the base rotation."""
        if logz is None:
            logz = cmath.log(z)
        k = self.spec.k
        shifted = logz + 2j * math.pi * s
        lam2 = cmath.exp(-2j * math.pi * k * s) * lam
        cols = []
        for sol in self.solutions:
            cols.append(eval_frobenius(sol, cmath.exp(shifted), lam2, shifted).value)
        return np.array(cols).T


def frobenius_frame(spec: ConnectionSpec, module: Module, t: float = 0.0, M: int | None = None,
                    N: int | None = None, rho: float | None = None) -> FrobeniusFrame:
    seeds = frobenius_seeds(spec, module)
    sols = [build_frobenius(spec, module, b, M, N, t=t, rho=rho, seed=seeds[:, b]) for b in range(module.dim)]
    return FrobeniusFrame(spec, module, sols, t)


def chi_system_constant(spec: ConnectionSpec, module: Module, b_plus: int, b_minus: int, s: float) -> complex:
    """Leading coefficient phase of chi_{b+} rotated by -s paired with chi_{b-} rotated by +s.

    Rotating z -> e^{2 pi i s} z multiplies z^{-gamma} by e^{-2 pi i s gamma}; the pairing of
    the two leading terms therefore carries e^{2 pi i s (gamma_+ - gamma_-)}.
    """
    vals = _ell_values(spec, module)
    return cmath.exp(2j * math.pi * s * (vals[b_plus] - vals[b_minus]))
