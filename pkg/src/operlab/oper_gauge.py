"""Unipotent gauge action, canonical forms and normal-form reconstruction of opers.

Only the part of an oper that the unipotent gauge group moves is stored:

    L = d/dz + (f° + b(z^r)) / z + (gauge-invariant v_theta / d / f_0 terms),

with b a rational function of x = z^r valued in h° + n°+.  The gauge transformation
exp(y(z^r)) with y in n°+ acts by

    f° + b  ->  exp(ad y)(f° + b) - r x sum_k (ad y)^k / (k+1)! y'(x),

and flat sections (Psi' = -A Psi) transform as Psi -> exp(y) Psi.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .connection import ConnectionSpec, make_spec
from .errors import AssumptionViolated, NoConvergence, ShapeViolation, ValidationError
from .liealg_core import AlgebraData, build_algebra
from .numerics import newton_solve
from .rep import build_fundamental, ensure_normalized

POLE_TOL = 1e-12
CLEAN_TOL = 1e-14
CHARPOLY_TOL = 1e-9


# ---------------------------------------------------------------- rational functions

def _same_pole(u: complex, v: complex) -> bool:
    return abs(u - v) <= POLE_TOL * max(1.0, abs(u), abs(v))


def _pad_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros((n, a.shape[1]), dtype=complex)
    out[:len(a)] += a
    out[:len(b)] += b
    return out


def _diag_sums(P: np.ndarray, offset_i: int, offset_j: int, lo: int, hi: int) -> np.ndarray:
    """out[p - lo] = sum over i + offset_i + j + offset_j = p of P[i, j], for lo <= p <= hi."""
    ni, nj = P.shape[:2]
    out = np.zeros((hi - lo + 1, P.shape[2]), dtype=complex)
    for i in range(ni):
        p0 = i + offset_i + offset_j
        jl = max(0, lo - p0)
        jh = min(nj - 1, hi - p0)
        if jl > jh:
            continue
        out[p0 + jl - lo:p0 + jh - lo + 1] += P[i, jl:jh + 1]
    return out


class RatFun:
    """Vector-valued rational function  sum_n p_n x^n + sum_u sum_m c_{u,m} (x - u)^{-m}.

    ``poly[n]`` is p_n and ``poles[u][m - 1]`` is c_{u,m}.
    """

    __slots__ = ("dim", "poly", "poles")

    def __init__(self, dim: int, poly=None, poles=None):
        self.dim = dim
        if poly is None:
            self.poly = np.zeros((1, dim), dtype=complex)
        else:
            self.poly = np.array(poly, dtype=complex)
            if self.poly.ndim != 2:
                self.poly = self.poly.reshape(-1, dim)
        self.poles: dict = {}
        for u, c in (poles or {}).items():
            c = np.array(c, dtype=complex)
            self._add_pole(complex(u), c if c.ndim == 2 else c.reshape(-1, dim))

    # -- construction
    @classmethod
    def constant(cls, vec) -> "RatFun":
        vec = np.asarray(vec, dtype=complex)
        return cls(len(vec), vec[None, :])

    @classmethod
    def pole_term(cls, vec, u: complex, m: int = 1) -> "RatFun":
        vec = np.asarray(vec, dtype=complex)
        c = np.zeros((m, len(vec)), dtype=complex)
        c[m - 1] = vec
        return cls(len(vec), None, {complex(u): c})

    def _key(self, u: complex):
        for v in self.poles:
            if _same_pole(u, v):
                return v
        return None

    def _add_pole(self, u: complex, c: np.ndarray):
        key = self._key(u)
        if key is None:
            self.poles[u] = c.copy()
        else:
            self.poles[key] = _pad_add(self.poles[key], c)

    def copy(self) -> "RatFun":
        return RatFun(self.dim, self.poly, self.poles)

    # -- linear structure
    def __add__(self, other: "RatFun") -> "RatFun":
        out = RatFun(self.dim, _pad_add(self.poly, other.poly), self.poles)
        for u, c in other.poles.items():
            out._add_pole(u, c)
        return out

    def __neg__(self) -> "RatFun":
        return self * -1.0

    def __sub__(self, other: "RatFun") -> "RatFun":
        return self + (-other)

    def __mul__(self, s) -> "RatFun":
        s = complex(s)
        return RatFun(self.dim, self.poly * s, {u: c * s for u, c in self.poles.items()})

    __rmul__ = __mul__

    def linear(self, M: np.ndarray) -> "RatFun":
        """Apply the matrix M to the values."""
        M = np.asarray(M)
        return RatFun(M.shape[0], self.poly @ M.T, {u: c @ M.T for u, c in self.poles.items()})

    # -- calculus
    def derivative(self) -> "RatFun":
        n = len(self.poly)
        poly = self.poly[1:] * np.arange(1, n)[:, None] if n > 1 else np.zeros((1, self.dim))
        poles = {}
        for u, c in self.poles.items():
            m = np.arange(1, len(c) + 1)[:, None]
            d = np.zeros((len(c) + 1, self.dim), dtype=complex)
            d[1:] = -m * c
            poles[u] = d
        return RatFun(self.dim, poly, poles)

    def times_x(self) -> "RatFun":
        """Multiply by x, using x (x - u)^-m = (x - u)^(1 - m) + u (x - u)^-m."""
        poly = np.zeros((len(self.poly) + 1, self.dim), dtype=complex)
        poly[1:] = self.poly
        poles = {}
        for u, c in self.poles.items():
            poly[0] += c[0]
            d = u * c
            d[:-1] += c[1:]
            poles[u] = d
        return RatFun(self.dim, poly, poles)

    def __call__(self, x: complex) -> np.ndarray:
        val = np.zeros(self.dim, dtype=complex)
        for p in self.poly[::-1]:
            val = val * x + p
        for u, c in self.poles.items():
            t = 1.0 / (x - u)
            val = val + sum(c[m] * t ** (m + 1) for m in range(len(c)))
        return val

    # -- expansions
    def pole_order(self, u: complex) -> int:
        key = self._key(u)
        if key is None:
            return 0
        c = self.poles[key]
        nz = np.flatnonzero(np.any(c != 0, axis=1))
        return int(nz[-1]) + 1 if len(nz) else 0

    def degree(self) -> int:
        nz = np.flatnonzero(np.any(self.poly != 0, axis=1))
        return int(nz[-1]) if len(nz) else 0

    def laurent(self, u: complex, lo: int, hi: int) -> np.ndarray:
        """Coefficients of t^n (n = lo..hi) in the expansion at x = u + t."""
        out = np.zeros((hi - lo + 1, self.dim), dtype=complex)
        key = self._key(u)
        if key is not None:
            c = self.poles[key]
            for m in range(1, len(c) + 1):
                if lo <= -m <= hi:
                    out[-m - lo] += c[m - 1]
        if hi < 0:
            return out
        for n in range(max(lo, 0), hi + 1):
            row = out[n - lo]
            for j in range(n, len(self.poly)):
                row += comb(j, n) * u ** (j - n) * self.poly[j]
            for v, c in self.poles.items():
                if v is key:
                    continue
                d = u - v
                for m in range(1, len(c) + 1):
                    row += (-1) ** n * comb(m + n - 1, n) * d ** (-m - n) * c[m - 1]
        return out

    def at_infinity(self, lo: int, hi: int) -> np.ndarray:
        """Coefficients of x^n (n = lo..hi) in the expansion at x = infinity."""
        out = np.zeros((hi - lo + 1, self.dim), dtype=complex)
        for n in range(max(lo, 0), min(hi, len(self.poly) - 1) + 1):
            out[n - lo] += self.poly[n]
        for u, c in self.poles.items():
            for m in range(1, len(c) + 1):
                # (x - u)^-m = sum_j C(m + j - 1, j) u^j x^(-m - j)
                for j in range(0, -m - lo + 1):
                    n = -m - j
                    if n <= hi:
                        out[n - lo] += comb(m + j - 1, j) * u ** j * c[m - 1]
        return out

    def bilinear(self, other: "RatFun", outer, dim: int) -> "RatFun":
        """Product under a bilinear map; ``outer(A, B)`` maps (na, d1), (nb, d2) to (na, nb, dim)."""
        out = RatFun(dim)
        poles = list(self.poles)
        for v in other.poles:
            if all(not _same_pole(u, v) for u in poles):
                poles.append(v)
        for u in poles:
            mf, mg = self.pole_order(u), other.pole_order(u)
            if mf + mg == 0:
                continue
            F = self.laurent(u, -mf, mg - 1)
            G = other.laurent(u, -mg, mf - 1)
            P = outer(F, G)
            prin = _diag_sums(P, -mf, -mg, -(mf + mg), -1)
            out.poles[u] = prin[::-1].copy()
        df, dg = self.degree(), other.degree()
        F = self.at_infinity(-dg, df)
        G = other.at_infinity(-df, dg)
        P = outer(F, G)
        out.poly = _diag_sums(P, -dg, -df, 0, df + dg)
        return out

    # -- comparison and tidying
    def scale(self) -> float:
        vals = [np.abs(self.poly).max(initial=0)] + [np.abs(c).max(initial=0) for c in self.poles.values()]
        return float(max(vals))

    def clean(self, tol: float = CLEAN_TOL, absolute: bool = False) -> "RatFun":
        thr = tol if absolute else tol * max(self.scale(), 1e-300)
        poly = np.where(np.abs(self.poly) <= thr, 0, self.poly)
        out = RatFun(self.dim, poly[:max(1, self._trim(poly))])
        for u, c in self.poles.items():
            c = np.where(np.abs(c) <= thr, 0, c)
            n = self._trim(c)
            if n:
                out.poles[u] = c[:n]
        return out

    @staticmethod
    def _trim(arr) -> int:
        nz = np.flatnonzero(np.any(arr != 0, axis=1))
        return int(nz[-1]) + 1 if len(nz) else 0

    def distance(self, other: "RatFun") -> float:
        """Largest coefficient difference (partial-fraction coordinates)."""
        return (self - other).scale()

    def to_json(self) -> dict:
        enc = lambda a: [[[z.real, z.imag] for z in row] for row in a]
        return {"dim": self.dim, "poly": enc(self.poly),
                "poles": [{"at": [u.real, u.imag], "coeffs": enc(c)} for u, c in self.poles.items()]}

    @classmethod
    def from_json(cls, obj: dict) -> "RatFun":
        dec = lambda a: np.array([[complex(*z) for z in row] for row in a], dtype=complex)
        dim = int(obj["dim"])
        poles = {complex(*p["at"]): dec(p["coeffs"]) for p in obj.get("poles", [])}
        return cls(dim, dec(obj["poly"]) if obj.get("poly") else None, poles)


def _bracket_outer(alg: AlgebraData):
    S = alg.lie.g.structure
    return lambda A, B: np.einsum("ia,jb,abc->ijc", A, B, S, optimize=True)


def _matmul_outer(n: int):
    def outer(A, B):
        a = A.reshape(len(A), n, n)
        b = B.reshape(len(B), n, n)
        return np.einsum("ipq,jqs->ijps", a, b).reshape(len(A), len(B), n * n)
    return outer


def bracket(alg: AlgebraData, x: RatFun, y: RatFun) -> RatFun:
    return x.bilinear(y, _bracket_outer(alg), x.dim)


# ---------------------------------------------------------------- opers and gauges

def _check_values(alg: AlgebraData, F: RatFun, min_degree: int, what: str):
    lie = alg.lie
    bad = lie.principal_degree < min_degree
    arrays = [F.poly] + list(F.poles.values())
    scale = max(F.scale(), 1.0)
    for arr in arrays:
        if np.abs(arr[:, bad]).max(initial=0) > 1e-10 * scale:
            raise ShapeViolation(f"{what} has components below principal degree {min_degree}")
        inv = arr @ lie.sigma_projectors[0].T
        if np.abs(inv - arr).max(initial=0) > 1e-9 * scale:
            raise ShapeViolation(f"{what} is not sigma-invariant")


@dataclass
class Oper:
    """d/dz + (f° + b(z^r))/z + (z + lam z^k) v_theta / z, with b valued in h° + n°+."""

    alg: AlgebraData
    b: RatFun
    k: float | None = None

    def __post_init__(self):
        if self.b.dim != self.alg.lie.g.dim:
            raise ShapeViolation("b must be valued in the algebra")
        _check_values(self.alg, self.b, 0, "b")

    def element(self) -> RatFun:
        return self.b + RatFun.constant(self.alg.lie.f_circ)

    def coefficient(self, z: complex, lam: complex = 0.0, logz: complex | None = None) -> np.ndarray:
        """Full loop-realization coefficient A(z) as an element of g~ (flat sections: Psi' = -A Psi)."""
        lie = self.alg.lie
        if logz is None:
            logz = cmath.log(z)
        k = 0.0 if self.k is None else self.k
        out = lie.f_circ + self.b(z ** self.alg.r) + (z + cmath.exp(k * logz) * lam) * lie.v_theta
        return out / z

    def distance(self, other: "Oper") -> float:
        return self.b.distance(other.b)

    def to_json(self) -> dict:
        return {"algebra": str(self.alg.id), "k": self.k, "b": self.b.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Oper":
        alg = build_algebra(obj["algebra"])
        ensure_normalized(alg)
        return cls(alg, RatFun.from_json(obj["b"]), obj.get("k"))


def oper_from_spec(spec: ConnectionSpec) -> Oper:
    """b(x) = ell + sum_j r x/(x - w_j^r) (-theta^vee + X(j))."""
    if spec.extended:
        raise ShapeViolation("extended singularities are not functions of z^r")
    alg = spec.alg
    lie = alg.lie
    r = alg.r
    b = RatFun.constant(lie.ell_element(spec.ell))
    for s in spec.singularities:
        R = -lie.theta_vee + s.parts[0]
        u = s.w ** r
        b = b + RatFun.constant(r * R) + RatFun.pole_term(r * u * R, u)
    return Oper(alg, b, spec.k)


@dataclass
class GaugeElement:
    """exp(y_m(z^r)) ... exp(y_1(z^r)); ``factors`` lists y_1 first (it acts first)."""

    factors: tuple = ()

    @classmethod
    def from_y(cls, y: RatFun) -> "GaugeElement":
        return cls((y,))

    def __mul__(self, other: "GaugeElement") -> "GaugeElement":
        # (g1 * g2) acts as g2 first, then g1
        return GaugeElement(tuple(other.factors) + tuple(self.factors))

    def inverse(self) -> "GaugeElement":
        return GaugeElement(tuple(-y for y in reversed(self.factors)))

    @property
    def is_identity(self) -> bool:
        return all(y.scale() == 0 for y in self.factors)

    def matrix(self, alg: AlgebraData, module=None) -> RatFun:
        """The group element as a matrix-valued rational function in a faithful module."""
        module = module or build_fundamental(alg, 1)
        R = _rep_matrix(alg, module)
        n = module.dim
        outer = _matmul_outer(n)
        out = RatFun.constant(np.eye(n, dtype=complex).ravel())
        for y in self.factors:
            out = _exp_matrix(y.linear(R), n).bilinear(out, outer, n * n)
        return out

    def collapse(self, alg: AlgebraData, module=None) -> "GaugeElement":
        """A single exp(y) equal to the product, via the logarithm of the unipotent matrix."""
        module = module or build_fundamental(alg, 1)
        R = _rep_matrix(alg, module)
        n = module.dim
        U = self.matrix(alg, module)
        N = U - RatFun.constant(np.eye(n, dtype=complex).ravel())
        outer = _matmul_outer(n)
        term, log = N, N
        for p in range(2, n + 1):
            term = term.bilinear(N, outer, n * n)
            if term.scale() == 0:
                break
            log = log + term * ((-1) ** (p + 1) / p)
        pinv = np.linalg.pinv(R)
        y = log.linear(pinv)
        if y.linear(R).distance(log) > 1e-9 * max(1.0, log.scale()):
            raise ValidationError("product does not lie in the image of n+")
        return GaugeElement.from_y(y.clean())

    def value(self, alg: AlgebraData, z: complex, module=None) -> np.ndarray:
        """Matrix of the gauge element at the point z."""
        module = module or build_fundamental(alg, 1)
        n = module.dim
        return self.matrix(alg, module)(z ** alg.r).reshape(n, n)


def _rep_matrix(alg: AlgebraData, module) -> np.ndarray:
    dim = alg.lie.g.dim
    return np.array([module.rep(np.eye(dim)[a]).ravel() for a in range(dim)], dtype=complex).T


def _exp_matrix(N: RatFun, n: int) -> RatFun:
    outer = _matmul_outer(n)
    out = RatFun.constant(np.eye(n, dtype=complex).ravel())
    term = out
    for p in range(1, n + 1):
        term = term.bilinear(N, outer, n * n) * (1.0 / p)
        if term.scale() == 0:
            break
        out = out + term
    return out


def _ad_series(alg: AlgebraData, y: RatFun, x: RatFun, shift: int = 0) -> RatFun:
    """sum_k (ad y)^k x / (k + shift)!, terminating by nilpotency."""
    outer = _bracket_outer(alg)
    out = x * (1.0 / factorial(shift))
    term = x
    for k in range(1, _top_degree(alg) + 2):
        term = y.bilinear(term, outer, x.dim)
        if term.scale() == 0:
            break
        out = out + term * (1.0 / factorial(k + shift))
    return out


def _top_degree(alg: AlgebraData) -> int:
    return max(sum(b) for b in alg.positive_roots)


def exp_ad(alg: AlgebraData, y: RatFun, x: RatFun) -> RatFun:
    return _ad_series(alg, y, x, 0)


def gauge_apply(g: GaugeElement, L: Oper) -> Oper:
    alg = L.alg
    r = alg.r
    lie = alg.lie
    fvec = RatFun.constant(lie.f_circ)
    B = L.element()
    for y in g.factors:
        _check_values(alg, y, 1, "gauge parameter")
        if y.scale() == 0:
            continue
        drift = _ad_series(alg, y, y.derivative(), 1).times_x() * r
        B = exp_ad(alg, y, B) - drift
    return Oper(alg, (B - fvec).clean(), L.k)


# ---------------------------------------------------------------- canonical form

@dataclass
class _DegreeReducer:
    degree: int
    mask: np.ndarray
    u_basis: np.ndarray  # (dim, n_u): e_beta with height degree + 1
    s_basis: np.ndarray  # (dim, n_s): transversal vectors of this degree
    pinv: np.ndarray
    full: np.ndarray


def _reducers(alg: AlgebraData, transversal=None) -> list:
    lie = alg.lie
    g = lie.g
    transversal = alg.transversal_basis if transversal is None else transversal
    out = []
    for d in range(0, _top_degree(alg) + 1):
        mask = lie.principal_degree == d
        u_roots = [b for b in alg.positive_roots if sum(b) == d + 1]
        u_basis = np.array([lie.e_root[b] for b in u_roots], dtype=complex).T.reshape(g.dim, -1)
        img = np.array([g.bracket(lie.f_circ, lie.e_root[b]) for b in u_roots], dtype=complex).T.reshape(g.dim, -1)
        s_vecs = [lie.n_plus_vector(v) for deg, v in transversal if deg == d]
        s_basis = np.array(s_vecs, dtype=complex).T.reshape(g.dim, -1)
        full = np.hstack([img, s_basis])[mask]
        if full.shape[1] and np.linalg.matrix_rank(full) != full.shape[1]:
            raise ShapeViolation(f"transversal subspace is not complementary in degree {d}")
        pinv = np.linalg.pinv(full) if full.shape[1] else np.zeros((0, int(mask.sum())))
        out.append(_DegreeReducer(d, mask, u_basis, s_basis, pinv, full))
    return out


@lru_cache(maxsize=None)
def _default_reducers(aid) -> list:
    return _reducers(build_algebra(aid))


def _split(red: _DegreeReducer, F: RatFun) -> tuple[RatFun, RatFun, float]:
    """Degree-d part of F as [f°, u] + s; returns (u as g~ values, s coefficients, misfit)."""
    part = F.linear(np.eye(F.dim)[red.mask])
    coeffs = part.linear(red.pinv)
    misfit = part.distance(coeffs.linear(red.full))
    nu = red.u_basis.shape[1]
    u = coeffs.linear(np.eye(coeffs.dim)[:nu]).linear(red.u_basis)
    s = coeffs.linear(np.eye(coeffs.dim)[nu:])
    return u, s, misfit


def canonical_form(L: Oper, transversal=None) -> tuple[Oper, GaugeElement]:
    """Drinfeld-Sokolov reduction degree by degree; returns (canonical oper, gauge used)."""
    alg = L.alg
    reds = _default_reducers(alg.id) if transversal is None else _reducers(alg, transversal)
    factors = []
    cur = L
    for red in reds[:-1]:
        u, _, misfit = _split(red, cur.b)
        if misfit > 1e-9 * max(1.0, cur.b.scale()):
            raise ShapeViolation(f"degree {red.degree} part of b does not lie in the folded algebra")
        u = u.clean(CLEAN_TOL * max(1.0, cur.b.scale()), absolute=True)
        if u.scale() == 0:
            continue
        cur = gauge_apply(GaugeElement.from_y(u), cur)
        factors.append(u)
    return cur, GaugeElement(tuple(factors))


def canonical_coefficients(L: Oper, transversal=None) -> list:
    """Per degree, the transversal coefficients of b (L must already be canonical)."""
    alg = L.alg
    reds = _default_reducers(alg.id) if transversal is None else _reducers(alg, transversal)
    return [_split(red, L.b)[1] for red in reds]


def is_canonical(L: Oper, tol: float = 1e-10, transversal=None) -> bool:
    alg = L.alg
    reds = _default_reducers(alg.id) if transversal is None else _reducers(alg, transversal)
    scale = max(1.0, L.b.scale())
    for red in reds:
        u, _, misfit = _split(red, L.b)
        if misfit > tol * scale or u.scale() > tol * scale:
            return False
    return True


# ---------------------------------------------------------------- normal form

@dataclass
class ConjugacyReport:
    w: complex
    gap: float
    charpoly: np.ndarray
    target: np.ndarray


@dataclass
class NormalFormResult:
    spec: ConnectionSpec
    residual: float
    reports: list = field(default_factory=list)


def ell_bar(alg: AlgebraData, ell) -> np.ndarray:
    """The transversal representative s with f° + s conjugate to f° + ell."""
    L = Oper(alg, RatFun.constant(alg.lie.ell_element(ell)))
    return canonical_form(L)[0].b.poly[0]


def local_leading(alg: AlgebraData, b: RatFun, u: complex, w: complex) -> np.ndarray:
    """s-bar at the singular point w (w^r = u): leading coefficients of b(z^r)/z in z - w."""
    lie = alg.lie
    r = alg.r
    scale = r * w ** (r - 1)
    out = np.zeros(b.dim, dtype=complex)
    key = b._key(u)
    if key is None:
        return out
    c = b.poles[key]
    for d in range(_top_degree(alg) + 1):
        m = d + 1
        if m <= len(c):
            mask = lie.principal_degree == d
            out[mask] += c[m - 1][mask] / (w * scale ** m)
    return out


def _charpoly(alg: AlgebraData, x: np.ndarray, module) -> np.ndarray:
    return np.poly(module.rep(x))


def conjugacy_gap(alg: AlgebraData, sbar: np.ndarray, w: complex, module=None) -> ConjugacyReport:
    lie = alg.lie
    module = module or build_fundamental(alg, 1)
    base = lie.f_circ / w - lie.rho_vee
    p = _charpoly(alg, base + sbar, module)
    q = _charpoly(alg, base - lie.theta_vee, module)
    gap = float(np.abs(p - q).max() / max(1.0, np.abs(q).max()))
    return ConjugacyReport(w, gap, p, q)


def check_assumptions(L: Oper, ell, tol: float = CHARPOLY_TOL) -> list:
    """Assumptions 1-3 on a canonical oper; returns the per-singularity conjugacy reports."""
    alg = L.alg
    lie = alg.lie
    r = alg.r
    b = L.b.clean(1e-13)
    scale = max(1.0, b.scale())
    if b.degree() > 0:
        raise AssumptionViolated("b grows at infinity", assumption=2, where="infinity",
                                 gap=float(np.abs(b.poly[1:]).max()))
    if b.pole_order(0) > 0:
        raise AssumptionViolated("b has a pole at z = 0", assumption=1, where=0.0,
                                 gap=float(np.abs(b.poles[b._key(0)]).max()))
    gap0 = float(np.abs(b(0) - ell_bar(alg, ell)).max())
    if gap0 > 1e-9 * scale:
        raise AssumptionViolated("b(0) differs from the canonical representative of ell",
                                 assumption=1, where=0.0, gap=gap0)
    reports = []
    for u in b.poles:
        c = b.poles[u]
        for d in range(_top_degree(alg) + 1):
            mask = lie.principal_degree == d
            if len(c) > d + 1 and np.abs(c[d + 1:][:, mask]).max(initial=0) > 1e-10 * scale:
                raise AssumptionViolated(f"pole of order > {d + 1} in degree {d}", assumption=3,
                                         where=complex(u ** (1 / r)))
        w = complex(u) ** (1.0 / r)
        rep = conjugacy_gap(alg, local_leading(alg, b, u, w), w)
        if rep.gap > tol:
            raise AssumptionViolated(f"local residue at w = {w:.6g} is not conjugate to the required one",
                                     assumption=3, where=w, gap=rep.gap)
        reports.append(rep)
    return reports


def ffh_normal_form(L: Oper, ell, k: float | None = None, seeds: int = 8, rng_seed: int = 0,
                    tol: float = 1e-11) -> NormalFormResult:
    """The connection spec whose canonical form is the canonical oper L."""
    alg = L.alg
    ensure_normalized(alg)
    if not is_canonical(L):
        raise ShapeViolation("input oper is not in canonical form")
    k = L.k if k is None else k
    if k is None:
        raise ValidationError("k is required")
    reports = check_assumptions(L, ell)
    r = alg.r
    target = L.b.clean(1e-13)
    us = [u for u in target.poles]
    ws = [complex(u) ** (1.0 / r) for u in us]
    npos = len(alg.positive_roots)
    J = len(ws)
    if J == 0:
        spec = make_spec(alg, k, ell)
        return NormalFormResult(spec, canonical_form(oper_from_spec(spec))[0].b.distance(target), reports)

    def build(X):
        return make_spec(alg, k, ell, [(w, X[j * npos:(j + 1) * npos]) for j, w in enumerate(ws)])

    def residual(X):
        can = canonical_form(oper_from_spec(build(X)))[0].b
        return _stack_difference(can, target, us)

    rng = np.random.default_rng(rng_seed)
    best = None
    for trial in range(seeds):
        x0 = np.zeros(J * npos, dtype=complex) if trial == 0 else \
            (rng.normal(size=J * npos) + 1j * rng.normal(size=J * npos)) * max(1.0, target.scale()) ** 0.5
        res = newton_solve(residual, x0, tol=tol * max(1.0, target.scale()), max_iter=60)
        if best is None or res.residual < best.residual:
            best = res
        if res.converged:
            break
    if not best.converged:
        raise NoConvergence(f"normal form not found (best residual {best.residual:.3e})",
                            {"best_residual": best.residual})
    spec = build(best.x)
    return NormalFormResult(spec, float(best.residual), reports)


def _stack_difference(a: RatFun, b: RatFun, poles) -> np.ndarray:
    diff = a - b
    parts = [diff.poly.ravel()]
    for u in poles:
        order = max(a.pole_order(u), b.pole_order(u), 1)
        parts.append(diff.laurent(u, -order, -1).ravel())
    for u in diff.poles:
        if all(not _same_pole(u, v) for v in poles):
            parts.append(diff.poles[u].ravel())
    return np.concatenate(parts)


# ---------------------------------------------------------------- sampling helpers

def random_gauge(alg: AlgebraData, rng, poles=(), degree: int = 1, pole_order: int = 1,
                 scale: float = 0.3) -> GaugeElement:
    """A random exp(y) with y in n°+ having the given poles (in x = z^r) and polynomial part."""
    lie = alg.lie
    npos = len(alg.positive_roots)

    def vec():
        c = (rng.normal(size=npos) + 1j * rng.normal(size=npos)) * scale
        return lie.n_plus_vector(c)

    y = RatFun(lie.g.dim, [vec() for _ in range(degree + 1)])
    for u in poles:
        y = y + RatFun(lie.g.dim, None, {u: [vec() for _ in range(pole_order)]})
    return GaugeElement.from_y(y)


def random_spec(alg: AlgebraData | str, J: int, rng, k: float = 0.4) -> ConnectionSpec:
    """Random untwisted-shape spec: generic ell, |w_j| in (0.5, 2), X(j) Gaussian."""
    if isinstance(alg, str):
        alg = build_algebra(alg)
    ensure_normalized(alg)
    ell = rng.uniform(0.1, 0.4, size=alg.n) + 0.05 * np.arange(alg.n)
    sings = []
    for _ in range(J):
        w = rng.uniform(0.5, 2.0) * cmath.exp(1j * rng.uniform(0, 2 * np.pi))
        X = rng.normal(size=len(alg.positive_roots)) + 1j * rng.normal(size=len(alg.positive_roots))
        sings.append((w, 0.5 * X))
    return make_spec(alg, k, ell, sings)
