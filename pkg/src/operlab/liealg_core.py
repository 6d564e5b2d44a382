"""Discrete Lie-theoretic data for twisted and untwisted affine algebras
g = g~^(r), together with a concrete realization of g~ and of the folded
algebra g° sitting inside it as the sigma-fixed subalgebra.

Conventions
-----------
* Cartan matrices satisfy ``C[i, j] = <alpha_i^vee, alpha_j>``.
* Node labels are 1-based in public data and 0-based in arrays.
* Positive roots are ordered by height, then by coefficient tuple in
  descending lexicographic order, so the simple roots keep node order.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .errors import CapExceeded, IndexOutOfRange, InvalidDiagram, UnsupportedAlgebra, ValidationError

MODULE_CAP = 4000


# ---------------------------------------------------------------- identifiers

@dataclass(frozen=True)
class AlgebraId:
    series: str
    rank_tilde: int
    r: int = 1

    def __str__(self):
        base = f"{self.series}{self.rank_tilde}"
        return base if self.r == 1 else f"{base}^{self.r}"


_ID_RE = re.compile(r"^\s*([ADEade])\s*(\d+)\s*(?:\^\s*\(?\s*(\d)\s*\)?)?\s*$")


def parse_algebra_id(text: str | AlgebraId) -> AlgebraId:
    if isinstance(text, AlgebraId):
        return text
    m = _ID_RE.match(str(text))
    if not m:
        raise UnsupportedAlgebra(f"cannot parse algebra selector {text!r}")
    return AlgebraId(m.group(1).upper(), int(m.group(2)), int(m.group(3) or 1))


def _check_supported(aid: AlgebraId):
    s, n, r = aid.series, aid.rank_tilde, aid.r
    ok = False
    if r == 1:
        ok = (s == "A" and 1 <= n <= 8) or (s == "D" and 4 <= n <= 8) or (s == "E" and n in (6, 7, 8))
    elif r == 2:
        ok = ((s == "A" and n % 2 == 1 and 3 <= n <= 7) or (s == "D" and 3 <= n <= 8)
              or (s == "E" and n == 6))
    elif r == 3:
        ok = s == "D" and n == 4
    if not ok:
        raise UnsupportedAlgebra(f"{aid} is not a supported row of the algebra table")


# ---------------------------------------------------------------- diagrams

def _edges(series: str, n: int):
    if series == "A":
        return [(i, i + 1) for i in range(1, n)]
    if series == "D":
        if n < 3:
            raise UnsupportedAlgebra("D_n needs n >= 3")
        e = [(i, i + 1) for i in range(1, n - 2)]
        return e + [(n - 2, n - 1), (n - 2, n)]
    if series == "E":
        chain = {6: [1, 2, 3, 5, 6], 7: [1, 2, 3, 4, 6, 7], 8: [1, 2, 3, 4, 5, 7, 8]}[n]
        branch = {6: (3, 4), 7: (4, 5), 8: (5, 6)}[n]
        return list(zip(chain, chain[1:])) + [branch]
    raise UnsupportedAlgebra(series)


def simply_laced_cartan(series: str, n: int) -> np.ndarray:
    c = 2 * np.eye(n, dtype=int)
    for a, b in _edges(series, n):
        c[a - 1, b - 1] = c[b - 1, a - 1] = -1
    return c


def diagram_automorphism(aid: AlgebraId) -> list[int]:
    """sigma as a 1-based list: sigma[i-1] = sigma(i)."""
    n, r = aid.rank_tilde, aid.r
    perm = list(range(1, n + 1))
    if r == 1:
        return perm
    if aid.series == "A":
        return [n + 1 - i for i in perm]
    if aid.series == "D" and r == 2:
        perm[n - 2], perm[n - 1] = n, n - 1
        return perm
    if aid.series == "D" and r == 3:
        return [3, 2, 4, 1]
    if aid.series == "E":
        return [6, 5, 3, 4, 2, 1]
    raise UnsupportedAlgebra(str(aid))


def sigma_orbits(sigma: Sequence[int]) -> list[list[int]]:
    seen, orbits = set(), []
    for i in range(1, len(sigma) + 1):
        if i in seen:
            continue
        orb, j = [], i
        while j not in orb:
            orb.append(j)
            j = sigma[j - 1]
        seen.update(orb)
        orbits.append(sorted(orb))
    return orbits


def fold_cartan(cartan_tilde: np.ndarray, orbits: list[list[int]]) -> np.ndarray:
    """C_ij = sum over a in orbit(i) of C~_{a, rep(j)}."""
    n = len(orbits)
    c = np.zeros((n, n), dtype=int)
    for i, oi in enumerate(orbits):
        for j, oj in enumerate(orbits):
            c[i, j] = sum(cartan_tilde[a - 1, oj[0] - 1] for a in oi)
    return c


# ---------------------------------------------------------------- root systems

def positive_roots(cartan: np.ndarray) -> list[tuple[int, ...]]:
    """Positive roots (simple-root coordinates) by root strings, height-then-lex ordered."""
    n = cartan.shape[0]
    simple = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    roots = set(simple)
    layer = list(simple)
    while layer:
        nxt = []
        for beta in layer:
            for i in range(n):
                pairing = sum(beta[j] * cartan[i, j] for j in range(n))
                p = 0
                down = list(beta)
                while True:
                    down[i] -= 1
                    if tuple(down) in roots:
                        p += 1
                    else:
                        break
                q = p - pairing
                if q > 0:
                    up = list(beta)
                    up[i] += 1
                    up = tuple(up)
                    if up not in roots:
                        roots.add(up)
                        nxt.append(up)
        layer = nxt
    return sorted(roots, key=lambda b: (sum(b), tuple(-x for x in b)))


def symmetrizer(cartan: np.ndarray) -> list[Fraction]:
    """d with d_i C_ij = d_j C_ji, normalized so min d = 1."""
    n = cartan.shape[0]
    d: list[Fraction | None] = [None] * n
    d[0] = Fraction(1)
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if j != i and cartan[i, j] != 0 and d[j] is None:
                d[j] = d[i] * Fraction(int(cartan[i, j]), int(cartan[j, i]))
                stack.append(j)
    m = min(d)
    return [x / m for x in d]


def root_norm(beta: Sequence[int], cartan: np.ndarray, d: Sequence[Fraction]) -> Fraction:
    n = len(beta)
    return sum(Fraction(beta[i] * beta[j]) * d[i] * int(cartan[i, j]) for i in range(n) for j in range(n))


def exponents_from_heights(roots: Sequence[Sequence[int]]) -> list[int]:
    counts: dict[int, int] = {}
    for b in roots:
        counts[sum(b)] = counts.get(sum(b), 0) + 1
    top = max(counts)
    out = []
    for k in range(1, top + 1):
        out += [k] * (counts.get(k, 0) - counts.get(k + 1, 0))
    return out


def weyl_reflect(mu: Sequence, i: int, cartan: np.ndarray) -> tuple:
    """s_i on a weight given by Dynkin labels (0-based i)."""
    mi = mu[i]
    return tuple(mu[j] - mi * int(cartan[j, i]) for j in range(len(mu)))


# ---------------------------------------------------------------- highest-weight modules

@dataclass
class HWModuleData:
    """Exact matrices of a simple module L(hw) over a simply-laced algebra."""

    weights: list  # weight (Dynkin labels) of each basis vector
    words: list  # lowering word producing each basis vector from the highest one
    e: list  # list of Fraction matrices (lists of lists)
    f: list
    h: list

    @property
    def dim(self):
        return len(self.weights)

    def float_matrices(self):
        conv = lambda ms: [np.array([[float(x) for x in row] for row in m]) for m in ms]
        return conv(self.e), conv(self.f), conv(self.h)


def _rref_insert(rows, pivots, vec):
    """Reduce vec against an echelon basis; return (residual, coefficients)."""
    v = list(vec)
    coeffs = [Fraction(0)] * len(rows)
    for k, (row, p) in enumerate(zip(rows, pivots)):
        if v[p] != 0:
            c = v[p] / row[p]
            coeffs[k] = c
            v = [a - c * b for a, b in zip(v, row)]
    return v, coeffs


def highest_weight_module(cartan: np.ndarray, hw: Sequence[int], cap: int = MODULE_CAP) -> HWModuleData:
    """Build L(hw) by applying lowering operators to the highest-weight vector.

    A vector of weight mu is represented by the tuple of its images under all
    raising operators e_j; this identifies vectors modulo singular ones, so the
    construction yields the irreducible quotient directly.
    """
    n = cartan.shape[0]
    hw = tuple(int(x) for x in hw)
    alpha = [tuple(int(cartan[j, i]) for j in range(n)) for i in range(n)]  # alpha_i in Dynkin labels

    def add(mu, i, sign):
        return tuple(m + sign * a for m, a in zip(mu, alpha[i]))

    # basis[mu]: list of dicts j -> coordinate list in basis[mu + alpha_j]
    basis = {hw: [dict()]}
    words = {hw: [()]}
    fmat = {}  # (i, mu) -> matrix (dim(mu - alpha_i) x dim(mu)) as list of columns
    layer = [hw]
    total = 1
    while layer:
        cand: dict = {}
        for mu in layer:
            for i in range(n):
                nu = add(mu, i, -1)
                cand.setdefault(nu, []).append((i, mu))
        new_layer = []
        for nu, sources in cand.items():
            # representation coordinates: concatenate e_j images over existing weights nu + alpha_j
            targets = [(j, add(nu, j, +1)) for j in range(n) if add(nu, j, +1) in basis]
            offsets, off = {}, 0
            for j, w in targets:
                offsets[j] = off
                off += len(basis[w])
            rows, pivots, chosen = [], [], []
            exprs = []  # (i, mu, col, full vector)
            for i, mu in sources:
                for col, vec in enumerate(basis[mu]):
                    full = [Fraction(0)] * off
                    imgs = {}
                    for j, w in targets:
                        # e_j f_i b = f_i e_j b + delta_ij <alpha_i^vee, mu> b
                        out = [Fraction(0)] * len(basis[w])
                        src = add(mu, j, +1)
                        if j in vec and src in basis:
                            m = fmat.get((i, src))
                            if m is not None:
                                for c_idx, coef in enumerate(vec[j]):
                                    if coef != 0:
                                        for r_idx, x in enumerate(m[c_idx]):
                                            if x != 0:
                                                out[r_idx] += coef * x
                        if j == i:
                            out[col] += mu[i]
                        imgs[j] = out
                        full[offsets[j]:offsets[j] + len(out)] = out
                    exprs.append((i, mu, col, full, imgs))
            for i, mu, col, full, imgs in exprs:
                resid, _ = _rref_insert(rows, pivots, full)
                nz = [k for k, x in enumerate(resid) if x != 0]
                if nz:
                    rows.append(resid)
                    pivots.append(nz[0])
                    chosen.append((i, mu, col, full, imgs))
            if not chosen:
                continue
            basis[nu] = [{j: imgs[j] for j, _ in targets} for (_, _, _, _, imgs) in chosen]
            words[nu] = [(i,) + words[mu][col] for (i, mu, col, _, _) in chosen]
            total += len(chosen)
            if total > cap:
                raise CapExceeded(f"module dimension exceeds cap {cap}")
            # express every candidate in the chosen basis
            chosen_full = [c[3] for c in chosen]
            for i, mu, col, full, imgs in exprs:
                coeffs = _solve_in_span(chosen_full, full)
                m = fmat.setdefault((i, mu), [None] * len(basis[mu]))
                m[col] = coeffs
            new_layer.append(nu)
        # f_i on weights of this layer whose image weight is absent: zero map
        layer = new_layer
    # assemble global matrices
    order = sorted(basis, key=lambda w: _depth(hw, w, cartan))
    index, weights, wlist = {}, [], []
    for w in order:
        for k in range(len(basis[w])):
            index[(w, k)] = len(weights)
            weights.append(w)
            wlist.append(words[w][k])
    dim = len(weights)
    zero = lambda: [[Fraction(0)] * dim for _ in range(dim)]
    E = [zero() for _ in range(n)]
    F = [zero() for _ in range(n)]
    H = [zero() for _ in range(n)]
    for w in order:
        for k, vec in enumerate(basis[w]):
            c = index[(w, k)]
            for i in range(n):
                H[i][c][c] = Fraction(w[i])
            for j, coords in vec.items():
                tw = add(w, j, +1)
                for r_idx, x in enumerate(coords):
                    if x != 0:
                        E[j][index[(tw, r_idx)]][c] = x
            for i in range(n):
                m = fmat.get((i, w))
                if m is None:
                    continue
                tw = add(w, i, -1)
                coeffs = m[k]
                if coeffs is None or tw not in basis:
                    continue
                for r_idx, x in enumerate(coeffs):
                    if x != 0:
                        F[i][index[(tw, r_idx)]][c] = x
    return HWModuleData(weights, wlist, E, F, H)


def _depth(hw, w, cartan):
    # height of hw - w, computed through the inverse Cartan matrix
    diff = np.array(hw, dtype=float) - np.array(w, dtype=float)
    coeffs = np.linalg.solve(cartan.astype(float), diff)
    return int(round(coeffs.sum()))


def _solve_in_span(vectors, target):
    """Coefficients c with sum c_k vectors[k] = target (vectors independent)."""
    m = len(vectors)
    if m == 0:
        return []
    n = len(target)
    # normal equations in exact arithmetic via Gaussian elimination on an augmented system
    rows = [[vectors[k][p] for k in range(m)] + [target[p]] for p in range(n)]
    piv_rows = []
    r = 0
    for c in range(m):
        pr = next((p for p in range(r, n) if rows[p][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for p in range(n):
            if p != r and rows[p][c] != 0:
                f = rows[p][c]
                rows[p] = [a - f * b for a, b in zip(rows[p], rows[r])]
        piv_rows.append((r, c))
        r += 1
    out = [Fraction(0)] * m
    for rr, c in piv_rows:
        out[c] = rows[rr][m]
    return out


def weyl_dimension(cartan: np.ndarray, hw: Sequence[int]) -> int:
    """Weyl dimension formula for simply-laced algebras."""
    roots = positive_roots(cartan)
    num = Fraction(1)
    # <lambda + rho, beta^vee> / <rho, beta^vee>, beta^vee = beta for simply laced
    for b in roots:
        pl = sum(Fraction(b[i]) * (hw[i] + 1) for i in range(len(b)))
        pr = sum(Fraction(b[i]) for i in range(len(b)))
        num *= pl / pr
    return int(num)


# ---------------------------------------------------------------- realization of g~

class LieRealization:
    """Concrete realization of a simple simply-laced Lie algebra.

    Basis order: f_beta (positive roots, height-lex), h_1..h_n, e_beta.
    Elements are complex coefficient vectors; ``bracket`` uses the structure
    tensor, built from a faithful module.
    """

    def __init__(self, cartan: np.ndarray, cap: int = MODULE_CAP):
        self.cartan = np.array(cartan, dtype=int)
        n = self.rank = self.cartan.shape[0]
        self.roots = positive_roots(self.cartan)
        self.root_index = {b: k for k, b in enumerate(self.roots)}
        npos = self.npos = len(self.roots)
        self.dim = 2 * npos + n
        node = self._smallest_fundamental()
        if weyl_dimension(self.cartan, [int(i == node) for i in range(n)]) ** 3 * self.dim ** 2 > 5e10:
            raise CapExceeded("realization of this algebra exceeds the construction budget")
        hw = [int(i == node) for i in range(n)]
        data = highest_weight_module(self.cartan, hw, cap=cap)
        E, F, H = data.float_matrices()
        self.module_dim = data.dim
        self.words = {}
        mats_e, mats_f = {}, {}
        for k, b in enumerate(self.roots):
            if sum(b) == 1:
                i = b.index(1)
                mats_e[b], mats_f[b] = E[i], F[i]
                self.words[b] = (i,)
                continue
            for i in range(n):
                prev = list(b)
                prev[i] -= 1
                prev = tuple(prev)
                if prev in self.root_index:
                    mats_e[b] = E[i] @ mats_e[prev] - mats_e[prev] @ E[i]
                    mats_f[b] = F[i] @ mats_f[prev] - mats_f[prev] @ F[i]
                    self.words[b] = (i,) + self.words[prev]
                    break
        self.basis_matrices = ([mats_f[b] for b in self.roots] + list(H)
                               + [mats_e[b] for b in self.roots])
        self.weights = ([tuple(-x for x in b) for b in self.roots] + [(0,) * n] * n
                        + list(self.roots))
        self.structure = self._structure_constants()
        self.sigma_generators = None

    def _smallest_fundamental(self) -> int:
        dims = [weyl_dimension(self.cartan, [int(i == j) for j in range(self.rank)]) for i in range(self.rank)]
        return int(np.argmin(dims))

    # indices
    def f_index(self, beta) -> int:
        return self.root_index[tuple(beta)]

    def h_index(self, i: int) -> int:
        return self.npos + i

    def e_index(self, beta) -> int:
        return self.npos + self.rank + self.root_index[tuple(beta)]

    def _structure_constants(self) -> np.ndarray:
        d, n, npos = self.dim, self.rank, self.npos
        c = np.zeros((d, d, d))
        mats = self.basis_matrices
        norms = [np.sum(m * m) for m in mats]
        hmat = np.array([np.diag(mats[npos + i]) for i in range(n)]).T  # (N x n)
        weights = self.weights
        for a in range(d):
            for b in range(a + 1, d):
                w = tuple(x + y for x, y in zip(weights[a], weights[b]))
                if all(x == 0 for x in w):
                    br = mats[a] @ mats[b] - mats[b] @ mats[a]
                    coeffs, *_ = np.linalg.lstsq(hmat, np.diag(br), rcond=None)
                    for i in range(n):
                        c[a, b, npos + i] = coeffs[i]
                    continue
                if all(x >= 0 for x in w):
                    key = self.e_index(w) if w in self.root_index else None
                elif all(x <= 0 for x in w):
                    neg = tuple(-x for x in w)
                    key = self.f_index(neg) if neg in self.root_index else None
                else:
                    key = None
                if key is None:
                    continue
                br = mats[a] @ mats[b] - mats[b] @ mats[a]
                c[a, b, key] = np.sum(br * mats[key]) / norms[key]
        c = np.round(c, 10)
        c = c - np.transpose(c, (1, 0, 2))
        return c

    def bracket(self, x, y):
        return np.einsum("a,b,abc->c", x, y, self.structure, optimize=True)

    def ad(self, x) -> np.ndarray:
        """Matrix of ad x acting on coefficient vectors: (ad x) y = [x, y]."""
        return np.einsum("a,abc->cb", x, self.structure, optimize=True)

    def basis_vector(self, k: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[k] = 1
        return v

    def e(self, i: int):
        return self.basis_vector(self.e_index(tuple(int(j == i) for j in range(self.rank))))

    def f(self, i: int):
        return self.basis_vector(self.f_index(tuple(int(j == i) for j in range(self.rank))))

    def h(self, i: int):
        return self.basis_vector(self.h_index(i))

    @cached_property
    def killing(self) -> np.ndarray:
        ads = np.array([self.ad(self.basis_vector(k)) for k in range(self.dim)])
        return np.einsum("aij,bji->ab", ads, ads).real

    @cached_property
    def coxeter(self) -> int:
        return (2 * self.npos) // self.rank

    def form(self, x, y) -> complex:
        """Invariant form normalized so that (h_i | h_i) = 2."""
        return complex(x @ self.killing @ y) / (2 * self.coxeter)

    def root_degree_vector(self, coroot_coeffs: Sequence[float]) -> np.ndarray:
        """Eigenvalues of ad(sum c_i h_i) on the basis."""
        out = np.zeros(self.dim)
        c = np.array(coroot_coeffs, dtype=float)
        for k, w in enumerate(self.weights):
            # weight in root coordinates -> pairing with coroot: sum_i c_i sum_j w_j C_ij
            out[k] = float(c @ (self.cartan @ np.array(w, dtype=float)))
        return out

    def module_words_apply(self, e_mats, f_mats, h_mats):
        """Matrices of every basis element in another module, via the bracket words."""
        n = self.rank
        me, mf = {}, {}
        for b in self.roots:
            w = self.words[b]
            if len(w) == 1:
                me[b], mf[b] = e_mats[w[0]], f_mats[w[0]]
            else:
                i = w[0]
                prev = list(b)
                prev[i] -= 1
                prev = tuple(prev)
                me[b] = e_mats[i] @ me[prev] - me[prev] @ e_mats[i]
                mf[b] = f_mats[i] @ mf[prev] - mf[prev] @ f_mats[i]
        return [mf[b] for b in self.roots] + list(h_mats) + [me[b] for b in self.roots]

    def sigma_matrix(self, sigma: Sequence[int]) -> np.ndarray:
        """Matrix of the diagram automorphism on coefficient vectors (sigma 1-based)."""
        n, d = self.rank, self.dim
        s = np.zeros((d, d))
        perm = [sigma[i] - 1 for i in range(n)]
        images = {}
        for b in self.roots:
            w = self.words[b]
            if len(w) == 1:
                ie = self.e_index(tuple(int(j == perm[w[0]]) for j in range(n)))
                iff = self.f_index(tuple(int(j == perm[w[0]]) for j in range(n)))
                images[b] = (self.basis_vector(ie).real, self.basis_vector(iff).real)
            else:
                i = w[0]
                prev = list(b)
                prev[i] -= 1
                prev = tuple(prev)
                ei = self.e(perm[i]).real
                fi = self.f(perm[i]).real
                pe, pf = images[prev]
                images[b] = (self.bracket(ei, pe).real, self.bracket(fi, pf).real)
        for b in self.roots:
            s[:, self.e_index(b)] = images[b][0]
            s[:, self.f_index(b)] = images[b][1]
        for i in range(n):
            s[self.h_index(perm[i]), self.h_index(i)] = 1
        return s


@lru_cache(maxsize=None)
def realization(series: str, n: int) -> LieRealization:
    return LieRealization(simply_laced_cartan(series, n))


# ---------------------------------------------------------------- algebra data

def _bipartition(cartan_tilde: np.ndarray) -> list[int]:
    n = cartan_tilde.shape[0]
    p = [None] * n
    p[0] = 0
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if j != i and cartan_tilde[i, j] != 0 and p[j] is None:
                p[j] = 1 - p[i]
                stack.append(j)
    return p


def _kappa(aid: AlgebraId, p: list[int]) -> list[Fraction]:
    n, r = aid.rank_tilde, aid.r
    if r == 1 or aid.series == "A" or (aid.series == "D" and r == 3):
        return [Fraction(x, 2) for x in p]
    if aid.series == "D":
        m = n - 1  # D_{m+1}^(2)
        tail = Fraction(1, 2) if m % 2 == 0 else Fraction(-1, 4)
        return [Fraction(p[i], 4) for i in range(m - 1)] + [tail, tail]
    # E6^(2)
    return [Fraction(1, 4) if i == 3 else Fraction(p[i], 2) for i in range(n)]


@dataclass
class AlgebraData:
    id: AlgebraId
    cartan_tilde: np.ndarray
    sigma: list
    orbits: list
    orbit_sizes: list
    D: list
    cartan_folded: np.ndarray
    kac_labels: list
    dual_kac_labels: list
    h: int
    h_dual: int
    exponents: list
    p: list
    kappa: list
    positive_roots: list
    heights: list
    symmetrizer: list
    theta: tuple
    theta_grading_degree: dict
    Delta_u: list
    Delta_u_short: list
    theta_spectrum: list
    extended_cartan: list = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return len(self.orbits)

    @property
    def r(self) -> int:
        return self.id.r

    @property
    def orbit_reps(self) -> list:
        return [o[0] for o in self.orbits]

    @property
    def dim_u(self) -> int:
        return len(self.Delta_u) + (1 if self.r > 1 else 0)

    @property
    def dim_u_extended(self) -> int:
        return len(self.Delta_u) + (self.r - 1) * len(self.Delta_u_short)

    @property
    def is_g2(self) -> bool:
        return self.id.series == "D" and self.r == 3

    def B_matrix(self) -> np.ndarray:
        return 2 * np.eye(self.n, dtype=int) - self.cartan_folded

    def B_tilde(self) -> np.ndarray:
        return 2 * np.eye(len(self.sigma), dtype=int) - self.cartan_tilde

    def root_name(self, beta) -> str:
        return f"alpha_{self.positive_roots.index(tuple(beta)) + 1}"

    def root_from_name(self, name: str) -> tuple:
        m = re.match(r"^alpha_(\d+)$", name)
        if not m:
            raise ValidationError(f"bad root key {name!r}")
        k = int(m.group(1))
        if not 1 <= k <= len(self.positive_roots):
            raise IndexOutOfRange(f"root index {k} out of range")
        return self.positive_roots[k - 1]

    def is_short(self, beta) -> bool:
        nb = root_norm(beta, self.cartan_folded, self.symmetrizer)
        return nb == min(self.symmetrizer) * 2

    def pairing_coroot(self, coroot_coeffs, beta) -> Fraction:
        """<sum c_i alpha_i^vee, beta> for beta in simple-root coordinates."""
        n = self.n
        return sum(Fraction(coroot_coeffs[i]) * beta[j] * int(self.cartan_folded[i, j])
                   for i in range(n) for j in range(n))

    @cached_property
    def lie(self) -> "FoldedLie":
        return FoldedLie(self)

    @cached_property
    def transversal_basis(self) -> list:
        return self.lie.transversal_basis()

    def report(self) -> dict:
        fr = lambda xs: [str(x) for x in xs]
        return {
            "id": str(self.id),
            "series": self.id.series,
            "rank_tilde": self.id.rank_tilde,
            "r": self.r,
            "cartan_tilde": self.cartan_tilde.tolist(),
            "sigma": list(self.sigma),
            "orbit_reps": self.orbit_reps,
            "orbit_sizes": self.orbit_sizes,
            "D": fr(self.D),
            "cartan_folded": self.cartan_folded.tolist(),
            "kac_labels": self.kac_labels,
            "dual_kac_labels": self.dual_kac_labels,
            "h": self.h,
            "h_dual": self.h_dual,
            "exponents": self.exponents,
            "p": self.p,
            "kappa": fr(self.kappa),
            "positive_roots": [list(b) for b in self.positive_roots],
            "heights": self.heights,
            "theta": list(self.theta),
            "theta_grading_degree": {self.root_name(b): d for b, d in self.theta_grading_degree.items()},
            "Delta_u": [self.root_name(b) for b in self.Delta_u],
            "Delta_u_short": [self.root_name(b) for b in self.Delta_u_short],
            "theta_spectrum": self.theta_spectrum,
            "dim_u": self.dim_u,
        }


@lru_cache(maxsize=None)
def build_algebra(aid: AlgebraId | str) -> AlgebraData:
    aid = parse_algebra_id(aid)
    _check_supported(aid)
    ct = simply_laced_cartan(aid.series, aid.rank_tilde)
    sigma = diagram_automorphism(aid)
    n_t = aid.rank_tilde
    for i in range(n_t):
        for j in range(n_t):
            if ct[sigma[i] - 1, sigma[j] - 1] != ct[i, j]:
                raise InvalidDiagram("sigma is not a diagram automorphism")
    orbits = sigma_orbits(sigma)
    if any(len(o) not in (1, aid.r) for o in orbits) or (aid.r > 1 and all(len(o) == 1 for o in orbits)):
        raise InvalidDiagram("orbit sizes inconsistent with the order of sigma")
    sizes = [len(o) for o in orbits]
    D = [Fraction(s, aid.r) for s in sizes]
    c = fold_cartan(ct, orbits)
    roots = positive_roots(c)
    d = symmetrizer(c)
    n = len(orbits)
    norms = [root_norm(b, c, d) for b in roots]
    if aid.r == 1:
        theta = roots[-1]
    else:
        short = min(norms)
        theta = max((b for b, nb in zip(roots, norms) if nb == short), key=sum)
    a = [1] + list(theta)
    ntheta = root_norm(theta, c, d)
    dual = [Fraction(theta[i]) * 2 * d[i] / ntheta for i in range(n)]
    if any(x.denominator != 1 for x in dual):
        raise InvalidDiagram("non-integral dual Kac labels")
    a_dual = [1] + [int(x) for x in dual]
    # degrees <theta^vee, beta>
    deg = {b: int(sum(a_dual[i + 1] * b[j] * int(c[i, j]) for i in range(n) for j in range(n))) for b in roots}
    delta_u = [b for b in roots if deg[b] >= 1]
    short_norm = 2 * min(d)
    delta_u_short = [b for b in delta_u if root_norm(b, c, d) == short_norm] if aid.r > 1 else []
    # spectrum of ad theta^vee on g~
    coroot_tilde = [0] * n_t
    for i, orb in enumerate(orbits):
        for x in orb:
            coroot_tilde[x - 1] = a_dual[i + 1]
    spec = {0}
    for b in positive_roots(ct):
        v = int(sum(coroot_tilde[i] * b[j] * int(ct[i, j]) for i in range(n_t) for j in range(n_t)))
        spec.update({v, -v})
    p = _bipartition(ct)
    kappa = _kappa(aid, p)
    # extended Cartan matrix of the affine algebra (index 0 first)
    ext = [[2] + [-int(deg_simple) for deg_simple in
                  (sum(a_dual[i + 1] * int(c[i, j]) for i in range(n)) for j in range(n))]]
    for j in range(n):
        row = [-int(sum(theta[k] * int(c[j, k]) for k in range(n)))] + [int(x) for x in c[j]]
        ext.append(row)
    return AlgebraData(
        id=aid, cartan_tilde=ct, sigma=sigma, orbits=orbits, orbit_sizes=sizes, D=D,
        cartan_folded=c, kac_labels=a, dual_kac_labels=a_dual, h=sum(a), h_dual=sum(a_dual),
        exponents=exponents_from_heights(roots), p=p, kappa=kappa, positive_roots=roots,
        heights=[sum(b) for b in roots], symmetrizer=d, theta=tuple(theta),
        theta_grading_degree=deg, Delta_u=delta_u, Delta_u_short=delta_u_short,
        theta_spectrum=sorted(spec), extended_cartan=ext,
    )


def supported_algebras(include_e: bool = True) -> list[str]:
    out = [f"A{n}" for n in range(1, 9)] + [f"D{n}" for n in range(4, 9)]
    out += [f"A{2 * n - 1}^2" for n in range(2, 5)] + [f"D{n + 1}^2" for n in range(2, 8)] + ["D4^3"]
    if include_e:
        out += ["E6", "E7", "E8", "E6^2"]
    return out


def weyl_apply(alg: AlgebraData, word: Sequence[int], mu: Sequence, group: str = "tilde") -> tuple:
    """Apply simple reflections (1-based indices, rightmost first) to a weight of g~.

    ``group='tilde'`` uses the reflections of g~; ``group='folded'`` uses the
    folded reflections s_i = product over the sigma-orbit of i, indexed by
    the folded nodes.
    """
    ct = alg.cartan_tilde
    mu = tuple(mu)
    for idx in reversed(list(word)):
        if group == "tilde":
            if not 1 <= idx <= ct.shape[0]:
                raise IndexOutOfRange(f"reflection index {idx}")
            mu = weyl_reflect(mu, idx - 1, ct)
        elif group == "folded":
            if not 1 <= idx <= alg.n:
                raise IndexOutOfRange(f"reflection index {idx}")
            for a in alg.orbits[idx - 1]:
                mu = weyl_reflect(mu, a - 1, ct)
        else:
            raise ValidationError(f"unknown reflection group {group!r}")
    return mu


# ---------------------------------------------------------------- folded algebra inside g~

class FoldedLie:
    """g° = (g~)^sigma inside the realization of g~, with the cyclic data
    (f°, v_theta, theta^vee, rho°^vee) and the sigma/theta^vee gradings."""

    def __init__(self, alg: AlgebraData):
        self.alg = alg
        self.g = realization(alg.id.series, alg.id.rank_tilde)
        g, n, r = self.g, alg.n, alg.r
        self.r = r
        self.eps = cmath.exp(2j * math.pi / r)
        self.sigma = g.sigma_matrix(alg.sigma)
        self.E = [sum(g.e(a - 1) for a in orb) for orb in alg.orbits]
        self.F = [sum(g.f(a - 1) for a in orb) for orb in alg.orbits]
        self.H = [sum(g.h(a - 1) for a in orb) for orb in alg.orbits]
        c = alg.cartan_folded
        # root vectors of g°
        self.e_root, self.f_root = {}, {}
        for b in alg.positive_roots:
            if sum(b) == 1:
                i = b.index(1)
                self.e_root[b], self.f_root[b] = self.E[i], self.F[i]
                continue
            for i in range(n):
                prev = list(b)
                prev[i] -= 1
                prev = tuple(prev)
                if prev in self.e_root:
                    self.e_root[b] = g.bracket(self.E[i], self.e_root[prev])
                    self.f_root[b] = g.bracket(self.F[i], self.f_root[prev])
                    break
        self.f_circ = sum(self.F)
        self.rho_vee = self.coroot_from_values([1] * n)
        self.theta_vee = sum(x * h for x, h in zip(alg.dual_kac_labels[1:], self.H))
        # restricted weights (simple-root coordinates of g°) of g~ basis vectors
        cinv = np.linalg.inv(c.astype(float))
        pair = np.zeros((g.dim, n))
        orbit_coroot = np.zeros((n, g.rank))
        for i, orb in enumerate(alg.orbits):
            for a in orb:
                orbit_coroot[i, a - 1] = 1
        for k, w in enumerate(g.weights):
            pair[k] = orbit_coroot @ (g.cartan @ np.array(w, dtype=float))
        self.restricted = np.rint(pair @ cinv.T).astype(int)
        self.theta_degree = np.rint(pair @ np.array(alg.dual_kac_labels[1:], dtype=float)).astype(int)
        self.principal_degree = self.restricted.sum(axis=1)
        self.v_theta = self._v_theta()
        self.v_minus_theta = self._v_minus_theta()
        self.v_scale = 1.0

    # -- Cartan helpers
    def coroot_from_values(self, values) -> np.ndarray:
        """Element H of h° with alpha_j(H) = values[j]."""
        c = self.alg.cartan_folded.astype(float)
        coeffs = np.linalg.solve(c.T, np.array(values, dtype=complex))
        return sum(x * h for x, h in zip(coeffs, self.H))

    def ell_element(self, ell) -> np.ndarray:
        return self.coroot_from_values(ell)

    # -- sigma grading
    def sigma_projector(self, m: int) -> np.ndarray:
        r = self.r
        out = np.zeros((self.g.dim, self.g.dim), dtype=complex)
        s = np.eye(self.g.dim)
        for l in range(r):
            out += self.eps ** (-m * l) * s
            s = self.sigma @ s
        return out / r

    @cached_property
    def sigma_projectors(self):
        return [self.sigma_projector(m) for m in range(self.r)]

    def sigma_component(self, x, m: int):
        return self.sigma_projectors[m % self.r] @ x

    def _weight_space(self, beta) -> np.ndarray:
        idx = [k for k in range(self.g.dim) if tuple(self.restricted[k]) == tuple(beta)]
        return np.array(idx, dtype=int)

    def _v_theta(self):
        if self.r == 1:
            return self.e_root[self.alg.theta].astype(complex)
        idx = self._weight_space(self.alg.theta)
        p = self.sigma_projector(1)[:, idx]
        k = int(np.argmax(np.linalg.norm(p, axis=0)))
        v = p[:, k]
        return v / v[np.argmax(np.abs(v))]

    def _v_minus_theta(self):
        if self.r == 1:
            v = self.f_root[self.alg.theta].astype(complex)
        else:
            idx = self._weight_space(tuple(-x for x in self.alg.theta))
            p = self.sigma_projector(self.r - 1)[:, idx]
            k = int(np.argmax(np.linalg.norm(p, axis=0)))
            v = p[:, k]
        return v / self.g.form(self.v_theta, v)

    def rescale_v_theta(self, s: complex):
        self.v_theta = self.v_theta * s
        self.v_minus_theta = self.v_minus_theta / s
        self.v_scale *= s

    # -- theta^vee grading
    def theta_projection(self, x, j: int):
        return np.where(self.theta_degree == j, x, 0)

    def theta_degree_of(self, x, tol=1e-12):
        nz = np.abs(x) > tol
        ds = set(self.theta_degree[nz].tolist())
        return ds

    # -- adapted basis
    @cached_property
    def adapted_basis(self):
        """Columns: f_alpha, h_i, e_alpha of g°, then weight vectors of g~_m (m >= 1)."""
        alg = self.alg
        cols, labels = [], []
        for b in alg.positive_roots:
            cols.append(self.f_root[b])
            labels.append(("f", 0, b))
        for i, h in enumerate(self.H):
            cols.append(h)
            labels.append(("h", 0, i))
        for b in alg.positive_roots:
            cols.append(self.e_root[b])
            labels.append(("e", 0, b))
        if self.r > 1:
            weights = sorted({tuple(w) for w in self.restricted}, key=lambda w: (sum(w), w))
            for m in range(1, self.r):
                pm = self.sigma_projectors[m]
                for w in weights:
                    idx = self._weight_space(w)
                    sub = pm[:, idx]
                    u, s, vh = np.linalg.svd(sub)
                    rank = int(np.sum(s > 1e-9))
                    for q in range(rank):
                        v = u[:, q]
                        v = v / v[np.argmax(np.abs(v))]
                        cols.append(v)
                        labels.append(("v", m, w, q))
        basis = np.array(cols, dtype=complex).T
        if basis.shape[1] != self.g.dim or np.linalg.matrix_rank(basis) != self.g.dim:
            raise InvalidDiagram("adapted basis is not a basis of g~")
        return basis, labels

    def to_adapted(self, x):
        basis, _ = self.adapted_basis
        return np.linalg.solve(basis, x)

    def ug_vector(self, m: int, beta) -> np.ndarray:
        """Weight-beta vector of g~_m (the first one when the space is larger)."""
        if m == 0:
            return self.e_root[tuple(beta)]
        basis, labels = self.adapted_basis
        for k, lab in enumerate(labels):
            if lab[0] == "v" and lab[1] == m and tuple(lab[2]) == tuple(beta) and lab[3] == 0:
                return basis[:, k]
        raise ValidationError(f"no weight {beta} vector in component {m}")

    # -- transversal subspace
    def transversal_basis(self):
        """Per exponent, a basis of the complement of [f°, n°+] inside g°_d (principal degree d)."""
        alg = self.alg
        out = []
        by_height: dict = {}
        for b in alg.positive_roots:
            by_height.setdefault(sum(b), []).append(b)
        top = max(by_height)
        for d in sorted(set(alg.exponents)):
            space = by_height.get(d, [])
            above = by_height.get(d + 1, [])
            # image of ad f° from degree d+1 to d, in e_alpha coordinates of degree d
            img = []
            for b in above:
                v = self.g.bracket(self.f_circ, self.e_root[b])
                img.append(self._coords_in_roots(v, space))
            img = np.array(img, dtype=complex).T if img else np.zeros((len(space), 0), dtype=complex)
            comp = _orth_complement(img, len(space))
            for q in range(comp.shape[1]):
                vec = comp[:, q]
                vec = vec / vec[np.argmax(np.abs(vec))]
                full = np.zeros(len(alg.positive_roots), dtype=complex)
                for coef, b in zip(vec, space):
                    full[alg.positive_roots.index(b)] = coef
                out.append((d, full))
        return out

    def _coords_in_roots(self, v, space):
        mat = np.array([self.e_root[b] for b in space], dtype=complex).T
        coeffs, *_ = np.linalg.lstsq(mat, v, rcond=None)
        return coeffs

    def n_plus_vector(self, coeffs) -> np.ndarray:
        """sum_alpha coeffs[alpha] e_alpha (coeffs ordered like positive_roots)."""
        out = np.zeros(self.g.dim, dtype=complex)
        for c, b in zip(coeffs, self.alg.positive_roots):
            if c != 0:
                out = out + c * self.e_root[b]
        return out


def _orth_complement(img: np.ndarray, n: int) -> np.ndarray:
    if img.shape[1] == 0:
        return np.eye(n, dtype=complex)
    u, s, vh = np.linalg.svd(img)
    rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
    return u[:, rank:]


def theta_projection(alg: AlgebraData, x, j: int):
    return alg.lie.theta_projection(x, j)
