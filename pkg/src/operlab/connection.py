"""Affine oper connections in loop realization and their local Laurent data."""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import EvaluationAtPole, ShapeViolation, ValidationError
from .liealg_core import AlgebraData, build_algebra
from .rep import Module, ensure_normalized


def _cnum(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(x[0], x[1] if len(x) > 1 else 0.0)
    return complex(x)


@dataclass(frozen=True)
class Singularity:
    w: complex
    parts: tuple  # X_m as g~ vectors, m = 0..r-1 (only m = 0 outside extended mode)

    @property
    def eta(self) -> np.ndarray:
        return sum(self.parts)


@dataclass(frozen=True, eq=False)
class ConnectionSpec:
    """Parameters (k, ell, {w_j, X(j)}) of one connection; ell holds <ell, alpha_i>."""

    alg: AlgebraData
    k: float
    ell: tuple
    singularities: tuple = ()
    extended: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 < self.k < 1:
            raise ValidationError(f"k must lie in (0, 1), got {self.k}")
        if len(self.ell) != self.alg.n:
            raise ValidationError(f"ell needs {self.alg.n} entries")
        r = self.alg.r
        ws = [s.w for s in self.singularities]
        for a, wa in enumerate(ws):
            if wa == 0:
                raise ValidationError("singularities must be nonzero")
            for wb in ws[a + 1:]:
                if abs(wa ** r - wb ** r) < 1e-14 * max(abs(wa), 1) ** r:
                    raise ValidationError("singularities must have distinct r-th powers")
        lie = self.alg.lie
        for s in self.singularities:
            if len(s.parts) != r:
                raise ShapeViolation("each singularity needs r components")
            for m, x in enumerate(s.parts):
                if not self.extended and m > 0 and np.abs(x).max() > 0:
                    raise ShapeViolation("X_m with m > 0 requires extended mode")
                if np.abs(x).max() == 0:
                    continue
                if np.abs(lie.sigma_component(x, m) - x).max() > 1e-9 * max(1, np.abs(x).max()):
                    raise ShapeViolation(f"X_{m} is not in the eps^{m} eigenspace of sigma")
                if np.any(np.abs(x[lie.principal_degree <= 0]) > 1e-12):
                    raise ShapeViolation("X must lie in the positive nilpotent part")

    @property
    def J(self) -> int:
        return len(self.singularities)

    @property
    def ws(self) -> np.ndarray:
        return np.array([s.w for s in self.singularities], dtype=complex)

    def with_singularities(self, sings) -> "ConnectionSpec":
        return ConnectionSpec(self.alg, self.k, self.ell, tuple(sings), self.extended)

    # ---- elements of g~
    def base_element(self) -> np.ndarray:
        lie = self.alg.lie
        return lie.f_circ + lie.ell_element(self.ell)

    def residue(self, j: int) -> np.ndarray:
        return -self.alg.lie.theta_vee + self.singularities[j].eta


def make_spec(alg: AlgebraData | str, k: float, ell, singularities=(), extended: bool = False) -> ConnectionSpec:
    """singularities: iterable of (w, X) with X a g° coefficient vector over positive roots,
    a dict {root name: value}, or (extended) a list of r g~ vectors."""
    if isinstance(alg, str):
        alg = build_algebra(alg)
    ensure_normalized(alg)
    lie = alg.lie
    dim = lie.g.dim
    sings = []
    for w, X in singularities:
        parts = [np.zeros(dim, dtype=complex) for _ in range(alg.r)]
        if isinstance(X, dict):
            parts[0] = lie.n_plus_vector(_root_dict_coeffs(alg, X))
        elif X is None:
            pass
        elif isinstance(X, (list, tuple)) and len(X) == alg.r and np.ndim(X[0]) == 1 and len(X[0]) == dim:
            parts = [np.asarray(x, dtype=complex) for x in X]
        else:
            X = np.asarray(X, dtype=complex)
            if X.shape == (dim,):
                parts[0] = X
            else:
                parts[0] = lie.n_plus_vector(X)
        sings.append(Singularity(complex(w), tuple(parts)))
    return ConnectionSpec(alg, float(k), tuple(complex(x) for x in np.atleast_1d(ell)), tuple(sings), extended)


def _root_dict_coeffs(alg, d):
    coeffs = np.zeros(len(alg.positive_roots), dtype=complex)
    for name, val in d.items():
        beta = alg.root_from_name(name)
        coeffs[alg.positive_roots.index(beta)] = _cnum(val)
    return coeffs


def spec_from_json(obj) -> ConnectionSpec:
    if isinstance(obj, str):
        obj = json.loads(obj)
    alg = build_algebra(obj["algebra"])
    ensure_normalized(alg)
    lie = alg.lie
    extended = bool(obj.get("extended", False))
    sings = []
    for s in obj.get("singularities", []):
        X0 = _root_dict_coeffs(alg, s.get("X", {}))
        parts = [lie.n_plus_vector(X0)] + [np.zeros(lie.g.dim, dtype=complex) for _ in range(alg.r - 1)]
        for key, comp in (s.get("X_m") or {}).items():
            m = int(key)
            for name, val in comp.items():
                parts[m] = parts[m] + _cnum(val) * lie.ug_vector(m, alg.root_from_name(name))
        sings.append((_cnum(s["w"]), parts))
    return make_spec(alg, obj["k"], [_cnum(x) for x in obj["ell"]], sings, extended)


def spec_to_json(spec: ConnectionSpec) -> dict:
    alg = spec.alg
    out = {"algebra": str(alg.id), "k": spec.k,
           "ell": [[x.real, x.imag] for x in spec.ell], "singularities": [], "extended": spec.extended}
    for s in spec.singularities:
        X = {}
        coeffs = _coords_positive(alg, s.parts[0])
        for c, b in zip(coeffs, alg.positive_roots):
            if abs(c) > 0:
                X[alg.root_name(b)] = [c.real, c.imag]
        entry = {"w": [s.w.real, s.w.imag], "X": X}
        if spec.extended:
            entry["X_m"] = {str(m): _coords_component(alg, s.parts[m], m) for m in range(1, alg.r)}
        out["singularities"].append(entry)
    return out


def _coords_positive(alg, x):
    lie = alg.lie
    mat = np.array([lie.e_root[b] for b in alg.positive_roots], dtype=complex).T
    c, *_ = np.linalg.lstsq(mat, x, rcond=None)
    return np.where(np.abs(c) < 1e-14, 0, c)


def _coords_component(alg, x, m):
    lie = alg.lie
    roots = [b for b in alg.positive_roots if _has_ug(lie, m, b)]
    if not roots:
        return {}
    mat = np.array([lie.ug_vector(m, b) for b in roots]).T
    c, *_ = np.linalg.lstsq(mat, x, rcond=None)
    return {alg.root_name(b): [v.real, v.imag] for v, b in zip(c, roots) if abs(v) > 1e-14}


def _has_ug(lie, m, b):
    try:
        lie.ug_vector(m, b)
        return True
    except ValidationError:
        return False


# ---------------------------------------------------------------- evaluation

class CoefficientEvaluator:
    """Module matrices of the fixed pieces, so that A(z) is cheap to assemble."""

    def __init__(self, spec: ConnectionSpec, module: Module):
        self.spec = spec
        self.module = module
        lie = spec.alg.lie
        self.F = module.rep(spec.base_element())
        self.V = module.rep(lie.v_theta)
        self.R = []
        for s in spec.singularities:
            self.R.append([module.rep(-lie.theta_vee + s.parts[0])]
                          + [module.rep(x) for x in s.parts[1:]])

    def __call__(self, z: complex, lam: complex, t: float = 0.0, logz: complex | None = None):
        spec = self.spec
        r, k = spec.alg.r, spec.k
        if z == 0:
            raise EvaluationAtPole("z = 0")
        if logz is None:
            logz = cmath.log(z)
        e = cmath.exp(2j * math.pi * t)
        er = e ** r
        zk = cmath.exp(k * logz)
        out = self.F + (e * z + zk * lam) * self.V
        zr = z ** r
        for s, R in zip(spec.singularities, self.R):
            den = er * zr - s.w ** r
            if abs(den) < 1e-14 * max(abs(zr), 1.0):
                raise EvaluationAtPole(f"z hits a singularity {s.w}")
            c = r * er * zr / den
            term = R[0]
            for m in range(1, len(R)):
                term = term + (e * z / s.w) ** m * R[m]
            out = out + c * term
        return out / z


def coefficient_matrix(spec: ConnectionSpec, module: Module, z: complex, lam: complex,
                       t: float = 0.0, logz: complex | None = None) -> np.ndarray:
    """Matrix of the loop-realization coefficient (flat sections solve Psi' = -A Psi)."""
    return CoefficientEvaluator(spec, module)(z, lam, t, logz)


def coefficient_element(spec: ConnectionSpec, z: complex, lam: complex, t: float = 0.0,
                        logz: complex | None = None) -> np.ndarray:
    """Same coefficient as an element of g~ (coordinate vector)."""
    lie = spec.alg.lie
    r, k = spec.alg.r, spec.k
    if logz is None:
        logz = cmath.log(z)
    e = cmath.exp(2j * math.pi * t)
    out = spec.base_element() + (e * z + cmath.exp(k * logz) * lam) * lie.v_theta
    for s in spec.singularities:
        c = r * e ** r * z ** r / (e ** r * z ** r - s.w ** r)
        term = -lie.theta_vee + s.parts[0]
        for m in range(1, r):
            term = term + (e * z / s.w) ** m * s.parts[m]
        out = out + c * term
    return out / z


def sigma_action(spec: ConnectionSpec, x: np.ndarray) -> np.ndarray:
    return spec.alg.lie.sigma @ x


# ---------------------------------------------------------------- Laurent data

def laurent_at_zero(spec: ConnectionSpec, max_order: int) -> list:
    """A_l (l = 0..max_order) with z A(z) = sum_l A_l z^l + lam z^k v_theta.

    A_0 = f + ell; A_1 = v_theta plus singular contributions; the terms from
    r z^r/(z^r - w^r) = -sum_s (z/w)^{rs} carry the extended shifts (z/w)^m.
    """
    lie = spec.alg.lie
    r = spec.alg.r
    dim = lie.g.dim
    A = [np.zeros(dim, dtype=complex) for _ in range(max_order + 1)]
    A[0] = spec.base_element()
    if max_order >= 1:
        A[1] = A[1] + lie.v_theta
    for s in spec.singularities:
        for q in range(1, max_order // r + 1):
            base = -r * s.w ** (-r * q)
            A[r * q] = A[r * q] + base * (-lie.theta_vee + s.parts[0])
            for m in range(1, r):
                if r * q + m <= max_order:
                    A[r * q + m] = A[r * q + m] + base * s.w ** (-m) * s.parts[m]
    return A


@dataclass
class LaurentLocal:
    """A(w_j + x) = R/x + sum_n (const_n + lam lin_n) x^n; const/lin as g~ vectors."""

    site: complex
    j: int
    R: np.ndarray
    eta: np.ndarray
    const: list
    lin: list

    @property
    def a(self):
        return self.const[0], self.lin[0]

    @property
    def b(self):
        return self.const[1], self.lin[1]

    @property
    def c(self):
        return self.const[2], self.lin[2]

    def at(self, n: int, lam: complex):
        return self.const[n] + lam * self.lin[n]


def _inv_taylor(d: complex, n: int) -> complex:
    """x^n coefficient of 1/(d + x)."""
    return (-1) ** n / d ** (n + 1)


def laurent_at_singularity(spec: ConnectionSpec, j: int, order: int = 2, w_override=None) -> LaurentLocal:
    """Exact Laurent coefficients at z = w_j up to x^order.

    Uses r z^{r-1}/(z^r - w^r) = sum_l 1/(z - eps^l w) so every piece is a sum of
    simple poles times polynomials in z.
    """
    lie = spec.alg.lie
    r, k = spec.alg.r, spec.k
    eps = cmath.exp(2j * math.pi / r)
    sings = spec.singularities
    wj = sings[j].w if w_override is None else w_override
    dim = lie.g.dim
    const = [np.zeros(dim, dtype=complex) for _ in range(order + 1)]
    lin = [np.zeros(dim, dtype=complex) for _ in range(order + 1)]
    F = spec.base_element()
    for n in range(order + 1):
        # (f + ell)/z, v_theta (constant), lam z^{k-1} v_theta
        const[n] = const[n] + _inv_taylor(wj, n) * F
        if n == 0:
            const[n] = const[n] + lie.v_theta
        lin[n] = lin[n] + _binom(k - 1, n) * wj ** (k - 1 - n) * lie.v_theta
    for i, s in enumerate(sings):
        wi = wj if i == j else s.w
        for l in range(r):
            pole = eps ** l * wi
            # (z/w_i)^m / (z - pole); z = w_j + x
            for m in range(r):
                x_m = (-lie.theta_vee + s.parts[0]) if m == 0 else s.parts[m]
                if m > 0 and not np.any(x_m):
                    continue
                # polynomial (w_j + x)^m / w_i^m, coefficients p_q
                poly = [comb(m, q) * wj ** (m - q) / wi ** m for q in range(m + 1)]
                if i == j and l == 0:
                    # (z/w)^m/(z - w) = 1/x * ((w+x)/w)^m: residue 1, regular part from q >= 1
                    for n in range(order + 1):
                        if n + 1 <= m:
                            const[n] = const[n] + poly[n + 1] * x_m
                    continue
                d = wj - pole
                for n in range(order + 1):
                    c = sum(poly[q] * _inv_taylor(d, n - q) for q in range(min(m, n) + 1))
                    const[n] = const[n] + c * x_m
    R = -lie.theta_vee + sings[j].eta
    return LaurentLocal(wj, j, R, sings[j].eta, const, lin)


def _binom(a: float, n: int) -> float:
    out = 1.0
    for q in range(n):
        out *= (a - q) / (q + 1)
    return out


def laurent_closed_form(spec: ConnectionSpec, j: int):
    """The a(j) (const, lin) pair from the closed expression in w_j (non-extended)."""
    lie = spec.alg.lie
    r, k = spec.alg.r, spec.k
    wj = spec.singularities[j].w
    a = spec.base_element() + wj * lie.v_theta + (r - 1) / 2 * spec.residue(j)
    for i, s in enumerate(spec.singularities):
        if i != j:
            a = a + r * wj ** r / (wj ** r - s.w ** r) * spec.residue(i)
    return a / wj, wj ** (k - 1) * lie.v_theta


def finite_difference_laurent(spec: ConnectionSpec, j: int, lam: complex, order: int = 2,
                              radius: float | None = None, npts: int = 64):
    """Taylor coefficients of A(z) - R/(z - w_j) at w_j via trapezoidal contour sums."""
    wj = spec.singularities[j].w
    others = [abs(wj - cmath.exp(2j * math.pi * l / spec.alg.r) * s.w)
              for i, s in enumerate(spec.singularities) for l in range(spec.alg.r)
              if not (i == j and l == 0)]
    rad = radius or 0.3 * min(others + [abs(wj)])
    R = spec.residue(j)
    logw = cmath.log(wj)
    coeffs = [np.zeros_like(R) for _ in range(order + 1)]
    for p in range(npts):
        u = cmath.exp(2j * math.pi * p / npts)
        x = rad * u
        z = wj + x
        logz = logw + cmath.log(1 + x / wj)
        val = coefficient_element(spec, z, lam, logz=logz) - R / x
        for n in range(order + 1):
            coeffs[n] = coeffs[n] + val * (x ** (-n)) / npts
    return coeffs
