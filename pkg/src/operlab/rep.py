"""Finite-dimensional g~-modules: fundamental modules, wedge squares, tensor
products, the intertwiners m_i, sigma-twists and cyclic-element spectra."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import CapExceeded, NoMaximalEigenvalue, ValidationError
from .liealg_core import MODULE_CAP, AlgebraData, build_algebra, highest_weight_module
from .numerics import get_tolerances


class Module:
    """Common interface: ``rep(x)`` gives the matrix of a g~ element."""

    dim: int
    weights: list
    hw_index: int = 0

    def rep(self, x) -> np.ndarray:
        raise NotImplementedError

    def gram(self) -> np.ndarray:
        raise NotImplementedError

    def hw_vector(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.hw_index] = 1
        return v


@dataclass(eq=False)
class WeightModule(Module):
    alg: AlgebraData
    node: int  # 1-based node of g~ (fundamental module L(omega~_node)), 0 for adjoint
    weights: list
    words: list
    basis_mats: np.ndarray  # (dim g~, N, N)
    e: list
    f: list
    h: list
    hw_index: int = 0

    @property
    def dim(self) -> int:
        return len(self.weights)

    @property
    def tags(self):
        seen: dict = {}
        out = []
        for w in self.weights:
            k = seen.get(w, 0)
            out.append((w, k))
            seen[w] = k + 1
        return out

    def rep(self, x) -> np.ndarray:
        return np.tensordot(np.asarray(x, dtype=complex), self.basis_mats, axes=1)

    def gram(self) -> np.ndarray:
        """Contravariant form: <f_i u, y> = <u, e_i y>, <v, v> = 1."""
        return _contravariant_gram(self.words, self.e, self.dim)

    def weight_values(self, h_element) -> np.ndarray:
        return np.real_if_close(np.diag(self.rep(h_element)))

    def relation_residual(self) -> float:
        """max of ||[e_i, f_j] - delta_ij h_i|| and ||[h_i, e_j] - C_ij e_j||."""
        c = self.alg.cartan_tilde
        n = len(self.e)
        worst = 0.0
        for i in range(n):
            for j in range(n):
                br = self.e[i] @ self.f[j] - self.f[j] @ self.e[i]
                worst = max(worst, np.abs(br - (self.h[i] if i == j else 0)).max())
                br = self.h[i] @ self.e[j] - self.e[j] @ self.h[i]
                worst = max(worst, np.abs(br - c[i, j] * self.e[j]).max())
        return float(worst)


def _contravariant_gram(words, e_mats, dim):
    # <f_i1 ... f_ik v, y> = <v, e_ik ... e_i1 y>
    g = np.zeros((dim, dim))
    hw_row = np.zeros(dim)
    hw_row[0] = 1.0
    for k in range(dim):
        func = hw_row
        for i in reversed(words[k]):
            func = func @ e_mats[i]
        g[k] = func
    return g


@lru_cache(maxsize=None)
def _fundamental_cached(aid, node):
    alg = build_algebra(aid)
    lie = alg.lie
    n_t = alg.cartan_tilde.shape[0]
    if not 1 <= node <= n_t:
        raise ValidationError(f"node {node} out of range")
    hw = [int(j == node - 1) for j in range(n_t)]
    data = highest_weight_module(alg.cartan_tilde, hw, cap=MODULE_CAP)
    E, F, H = data.float_matrices()
    mats = np.array(lie.g.module_words_apply(E, F, H))
    return WeightModule(alg, node, data.weights, data.words, mats, E, F, H)


def build_fundamental(alg: AlgebraData, i: int) -> WeightModule:
    """L(omega~_i) for the 1-based node i of g~."""
    return _fundamental_cached(alg.id, int(i))


def fundamental_for_folded(alg: AlgebraData, i: int) -> WeightModule:
    """Fundamental module attached to folded node i (its smallest orbit representative)."""
    return build_fundamental(alg, alg.orbit_reps[i - 1])


@lru_cache(maxsize=None)
def _adjoint_cached(aid):
    alg = build_algebra(aid)
    g = alg.lie.g
    mats = np.array([g.ad(g.basis_vector(k)) for k in range(g.dim)])
    n_t = g.rank
    E = [g.ad(g.e(i)).real for i in range(n_t)]
    F = [g.ad(g.f(i)).real for i in range(n_t)]
    H = [g.ad(g.h(i)).real for i in range(n_t)]
    weights = [tuple(int(x) for x in g.cartan @ np.array(w)) for w in g.weights]
    hw = g.e_index(g.roots[-1])
    mod = WeightModule(alg, 0, weights, [()] * g.dim, mats, E, F, H, hw_index=hw)
    return mod


def adjoint_module(alg: AlgebraData) -> WeightModule:
    return _adjoint_cached(alg.id)


# ---------------------------------------------------------------- derived modules

class WedgeSquare(Module):
    def __init__(self, base: Module):
        self.base = base
        n = base.dim
        self.pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        self.dim = len(self.pairs)
        if self.dim > MODULE_CAP:
            raise CapExceeded("wedge square exceeds the module cap")
        self.index = {p: k for k, p in enumerate(self.pairs)}
        self.weights = [tuple(x + y for x, y in zip(base.weights[a], base.weights[b])) for a, b in self.pairs]
        a = np.array([p[0] for p in self.pairs])
        b = np.array([p[1] for p in self.pairs])
        self._ab = a * n + b
        self.hw_index = 0

    def rep(self, x) -> np.ndarray:
        return self.lift(self.base.rep(x))

    def lift(self, m: np.ndarray) -> np.ndarray:
        a = np.array([p[0] for p in self.pairs])
        b = np.array([p[1] for p in self.pairs])
        c, d = a[:, None], b[:, None]
        eq = lambda x, y: (x == y)
        return (m[c, a] * eq(d, b) + eq(c, a) * m[d, b]
                - m[c, b] * eq(d, a) - eq(c, b) * m[d, a])

    def wedge(self, u, v) -> np.ndarray:
        t = np.outer(u, v) - np.outer(v, u)
        return t.reshape(-1)[self._ab]

    def gram(self) -> np.ndarray:
        g = self.base.gram()
        a = np.array([p[0] for p in self.pairs])
        b = np.array([p[1] for p in self.pairs])
        return g[np.ix_(a, a)] * g[np.ix_(b, b)] - g[np.ix_(a, b)] * g[np.ix_(b, a)]


class TensorProduct(Module):
    def __init__(self, factors: Sequence[Module]):
        self.factors = list(factors)
        dims = [f.dim for f in self.factors]
        self.dim = int(np.prod(dims)) if dims else 1
        if self.dim > MODULE_CAP:
            raise CapExceeded("tensor product exceeds the module cap")
        weights = [()]
        for f in self.factors:
            weights = [tuple(x + y for x, y in zip(w, v)) if w else tuple(v) for w in weights for v in f.weights]
        self.weights = weights if self.factors else [()]
        idx = 0
        for f in self.factors:
            idx = idx * f.dim + f.hw_index
        self.hw_index = idx

    def rep(self, x) -> np.ndarray:
        return self.lift([f.rep(x) for f in self.factors])

    def lift(self, mats) -> np.ndarray:
        if not self.factors:
            return np.zeros((1, 1), dtype=complex)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        dims = [f.dim for f in self.factors]
        for k, m in enumerate(mats):
            left = int(np.prod(dims[:k]))
            right = int(np.prod(dims[k + 1:]))
            out += np.kron(np.kron(np.eye(left), m), np.eye(right))
        return out

    def tensor(self, vectors) -> np.ndarray:
        out = np.ones(1, dtype=complex)
        for v in vectors:
            out = np.kron(out, v)
        return out

    def gram(self) -> np.ndarray:
        out = np.ones((1, 1))
        for f in self.factors:
            out = np.kron(out, f.gram())
        return out


# ---------------------------------------------------------------- intertwiners

@dataclass
class MMap:
    node: int
    source: WedgeSquare
    target: TensorProduct
    matrix: np.ndarray
    target_nodes: list
    kernel_rank: int
    metadata: dict = field(default_factory=dict)

    def __call__(self, w):
        return self.matrix @ w


def psi_target_nodes(alg: AlgebraData, i: int) -> list[int]:
    """Nodes j of g~ (with multiplicity B~_ij) in the target of m~_i."""
    bt = alg.B_tilde()
    out = []
    for j in range(bt.shape[0]):
        out += [j + 1] * int(bt[i - 1, j])
    return out


def build_m_map(alg: AlgebraData, i: int) -> MMap:
    """m~_i : wedge^2 L(omega~_i) -> tensor_j L(omega~_j)^{B~_ij} (i a node of g~)."""
    base = build_fundamental(alg, i)
    src = WedgeSquare(base)
    nodes = psi_target_nodes(alg, i)
    tgt = TensorProduct([build_fundamental(alg, j) for j in nodes])
    g = alg.lie.g
    n_t = g.rank
    fmats_src = [src.rep(g.f(j)) for j in range(n_t)]
    fmats_tgt = [tgt.rep(g.f(j)) for j in range(n_t)]
    v = base.hw_vector()
    u0 = src.wedge(v, base.f[i - 1] @ v)
    t0 = tgt.hw_vector()
    # lowering-word basis of the submodule generated by u0, mirrored in the target
    W, T = [u0], [t0]
    frontier = [(u0, t0)]
    basis = np.array([u0]).T
    while frontier:
        nxt = []
        for u, t in frontier:
            for j in range(n_t):
                fu = fmats_src[j] @ u
                if np.linalg.norm(fu) < 1e-12:
                    continue
                cand = np.column_stack([basis, fu])
                if np.linalg.matrix_rank(cand, tol=1e-9) > basis.shape[1]:
                    basis = cand
                    ft = fmats_tgt[j] @ t
                    W.append(fu)
                    T.append(ft)
                    nxt.append((fu, ft))
        frontier = nxt
    Wm = np.array(W).T
    Tm = np.array(T).T
    G = src.gram()
    A = Wm.conj().T @ G @ Wm
    M = Tm @ np.linalg.solve(A, Wm.conj().T @ G)
    kernel_rank = src.dim - np.linalg.matrix_rank(M, tol=1e-9)
    meta = {"submodule_dim": Wm.shape[1], "complement": "contravariant-orthogonal"}
    return MMap(i, src, tgt, M, nodes, int(kernel_rank), meta)


def sigma_twist(alg: AlgebraData, i: int) -> np.ndarray:
    """Matrix of sigma : L(omega~_i) -> L(omega~_sigma(i)) fixed by sigma(x v_i) = (sigma x) v_sigma(i)."""
    src = build_fundamental(alg, i)
    j = alg.sigma[i - 1]
    tgt = build_fundamental(alg, j)
    perm = [alg.sigma[a] - 1 for a in range(len(alg.sigma))]
    cols = []
    for word in src.words:
        v = tgt.hw_vector()
        for a in reversed(word):
            v = tgt.f[perm[a]] @ v
        cols.append(v)
    return np.array(cols).T


def r_map(alg: AlgebraData, i: int) -> np.ndarray:
    if alg.sigma[i - 1] != i:
        return np.eye(build_fundamental(alg, i).dim)
    return sigma_twist(alg, i)


# ---------------------------------------------------------------- cyclic spectra

def cyclic_element(alg: AlgebraData, t: float):
    lie = alg.lie
    return lie.f_circ + cmath.exp(2j * math.pi * t) * lie.v_theta


@dataclass
class CyclicSpectrum:
    t: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    maximal_index: int | None
    zeta: float | None

    @property
    def maximal(self):
        return None if self.maximal_index is None else self.eigenvalues[self.maximal_index]

    @property
    def psi(self):
        return None if self.maximal_index is None else self.eigenvectors[:, self.maximal_index]


def maximal_eigen_index(vals: np.ndarray, gap: float | None = None) -> int | None:
    gap = gap if gap is not None else get_tolerances().eigen_gap
    rad = max(np.abs(vals).max(), 1e-300)
    k = int(np.argmax(vals.real))
    mu = vals[k]
    if abs(mu.imag) > gap * rad:
        return None
    others = np.delete(vals, k)
    if len(others) and np.min(np.abs(others - mu)) <= gap * rad:
        return None
    if len(others) and np.max(others.real) >= mu.real - gap * rad:
        return None
    return k


def zeta_of(vals: np.ndarray, k: int) -> float:
    """sup of theta with Re(e^{i phi} mu_max) > Re(e^{i phi} mu) for all |phi| < theta."""
    mu = vals[k]
    best = math.pi / 2
    for j, nu in enumerate(vals):
        if j == k:
            continue
        best = min(best, math.pi / 2 - abs(cmath.phase(mu - nu)))
    return best


def phase_fix(v: np.ndarray, hw_index: int = 0) -> np.ndarray:
    c = v[hw_index]
    if abs(c) < 1e-12 * max(np.abs(v).max(), 1e-300):
        c = v[np.nonzero(np.abs(v) > 1e-12 * np.abs(v).max())[0][0]]
    return v * (abs(c) / c) / np.linalg.norm(v)


def cyclic_spectrum(alg: AlgebraData, module: Module, t: float) -> CyclicSpectrum:
    ensure_normalized(alg)
    m = module.rep(cyclic_element(alg, t))
    vals, vecs = np.linalg.eig(m)
    k = maximal_eigen_index(vals)
    vecs = np.array([phase_fix(vecs[:, j], module.hw_index) for j in range(len(vals))]).T
    zeta = zeta_of(vals, k) if k is not None else None
    return CyclicSpectrum(t, vals, vecs, k, zeta)


def normalize_v_theta(alg: AlgebraData) -> complex:
    """Rescale v_theta so Lambda(kappa_1) has maximal eigenvalue 1 on L(omega~_1).

    Uses homogeneity: spec(f + s v) = s^{1/h} spec(f + v) for the principal grading,
    so each candidate eigenvalue nu of the unscaled element gives s = nu^{-h}.
    """
    lie = alg.lie
    mod = build_fundamental(alg, 1)
    kappa = float(alg.kappa[0])
    base = mod.rep(lie.f_circ + cmath.exp(2j * math.pi * kappa) * lie.v_theta)
    vals = np.linalg.eigvals(base)
    h = alg.h
    for nu in sorted(vals, key=lambda x: (-abs(x), cmath.phase(x))):
        if abs(nu) < 1e-9:
            continue
        s = nu ** (-h)
        m = mod.rep(lie.f_circ + s * cmath.exp(2j * math.pi * kappa) * lie.v_theta)
        w = np.linalg.eigvals(m)
        k = maximal_eigen_index(w)
        if k is not None and abs(w[k] - 1) < 1e-10:
            if abs(s.imag) < 1e-12 * abs(s):
                s = float(s.real)
            if abs(s - 1) < 1e-13:
                s = 1.0
            lie.rescale_v_theta(s)
            lie.normalized = True
            return s
    raise NoMaximalEigenvalue(f"no scaling of v_theta gives a maximal eigenvalue 1 for {alg.id}")


def ensure_normalized(alg: AlgebraData):
    lie = alg.lie
    if not getattr(lie, "normalized", False):
        normalize_v_theta(alg)


def wedge_maximal_check(alg: AlgebraData, i: int) -> tuple[complex, complex]:
    """(maximal eigenvalue on wedge^2 L at kappa_i - D_i/2, predicted 2cos(pi D_i/h) mu^(i))."""
    ensure_normalized(alg)
    node = alg.orbit_reps[i - 1]
    mod = build_fundamental(alg, node)
    kappa = float(alg.kappa[node - 1])
    D = float(alg.D[i - 1])
    mu = cyclic_spectrum(alg, mod, kappa).maximal
    wedge = WedgeSquare(mod)
    vals = np.linalg.eigvals(wedge.rep(cyclic_element(alg, kappa - D / 2)))
    k = maximal_eigen_index(vals)
    if k is None:
        raise NoMaximalEigenvalue("wedge square has no maximal eigenvalue")
    return vals[k], 2 * math.cos(math.pi * D / alg.h) * mu
