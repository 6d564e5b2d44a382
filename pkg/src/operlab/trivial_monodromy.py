"""Trivial-monodromy conditions at the extra singular points and their polynomial systems.

Local data at a point is ``d/dx + R/x + a + b x + c x^2 + ...`` with ``R = -theta^vee + eta``.
The coefficients a, b, c are affine in the loop variable; here they are handled as
polynomials in lambda stored as arrays of shape (degree + 1, dim g~).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .connection import ConnectionSpec, laurent_at_singularity, make_spec
from .errors import NoConvergence, UnsupportedTwistedType, ValidationError, VariantMismatch
from .liealg_core import AlgebraData, build_algebra
from .numerics import forward_difference_jacobian, holomorphic_jacobian, newton_solve
from .rep import ensure_normalized

RANK_TOL = 1e-9


# ---------------------------------------------------------------- lambda-polynomials in g~

def as_poly(x) -> np.ndarray:
    """(const, lin) pair, plain vector or polynomial array -> polynomial array."""
    if isinstance(x, tuple):
        return np.array(x, dtype=complex)
    x = np.asarray(x, dtype=complex)
    return x[None, :] if x.ndim == 1 else x


def _pbracket(g, p, q) -> np.ndarray:
    out = np.zeros((p.shape[0] + q.shape[0] - 1, p.shape[1]), dtype=complex)
    for i in range(p.shape[0]):
        if not np.any(p[i]):
            continue
        for j in range(q.shape[0]):
            if np.any(q[j]):
                out[i + j] += g.bracket(p[i], q[j])
    return out


def _padd(*ps) -> np.ndarray:
    n = max(p.shape[0] for p in ps)
    out = np.zeros((n, ps[0].shape[1]), dtype=complex)
    for p in ps:
        out[: p.shape[0]] += p
    return out


def _pscale(c, p) -> np.ndarray:
    return c * p


def exp_ad(g, x, y, sign: int = 1) -> np.ndarray:
    """exp(sign ad x) y for nilpotent x (finite sum), y a vector or a polynomial array."""
    ad = sign * g.ad(x)
    y = np.asarray(y, dtype=complex)
    out = y.copy()
    term = y
    for n in range(1, 4 * g.dim):
        term = term @ ad.T / n if y.ndim == 2 else ad @ term / n
        if not np.any(np.abs(term) > 1e-300):
            return out
        out = out + term
    raise ValidationError("exp(ad x) did not terminate: x is not nilpotent")


def eta_bar(alg: AlgebraData, eta) -> np.ndarray:
    lie = alg.lie
    p = lambda i: lie.theta_projection(eta, i)
    out = p(1) + 0.5 * p(2)
    if alg.is_g2:
        out = out + p(3) / 3 - lie.g.bracket(p(1), p(2)) / 12
    return out


class _ThetaProj:
    def __init__(self, lie):
        self.lie = lie

    def __call__(self, p, i):
        return np.where(self.lie.theta_degree[None, :] == i, p, 0)


class _RProj:
    """Projections onto eigenspaces of ad(R - eta_0) (eigenvalue i)."""

    def __init__(self, lie, R):
        g = lie.g
        eta0 = lie.theta_projection(R + lie.theta_vee, 0)
        ad = g.ad(R - eta0)
        vals, vecs = np.linalg.eig(ad)
        self.vals = np.rint(vals.real).astype(int)
        if np.abs(vals - self.vals).max() > 1e-8:
            raise ValidationError("R - eta_0 does not have integral spectrum")
        self.vecs = vecs
        self.inv = np.linalg.inv(vecs)

    def __call__(self, p, i):
        mask = (self.vals == i).astype(complex)
        return ((self.vecs * mask) @ (self.inv @ p.T)).T


def local_condition_residual(alg: AlgebraData, R, a, b, c=None, variant: str = "theta",
                             g2: bool | None = None) -> list[np.ndarray]:
    """Residuals of the local trivial-monodromy conditions; each entry is a lambda-polynomial array.

    variant="theta" uses the theta^vee grading after conjugation by exp(-ad eta_bar);
    variant="R" uses the eigenspaces of ad(R - eta_0) directly.
    """
    if g2 is None:
        g2 = alg.is_g2
    if g2 and not alg.is_g2:
        raise VariantMismatch("G2 conditions requested for an algebra whose folded type is not G2")
    lie = alg.lie
    g = lie.g
    R = np.asarray(R, dtype=complex)
    eta = R + lie.theta_vee
    a, b = as_poly(a), as_poly(b)
    c = as_poly(c) if c is not None else None
    if g2 and c is None:
        raise ValidationError("the G2 conditions need the x^2 coefficient c")
    if variant == "theta":
        P = _ThetaProj(lie)
        eb = eta_bar(alg, eta)
        a, b = exp_ad(g, eb, a, -1), exp_ad(g, eb, b, -1)
        if c is not None:
            c = exp_ad(g, eb, c, -1)
        s = 1
    elif variant == "R":
        P = _RProj(lie, R)
        s = -1
    else:
        raise ValidationError(f"unknown variant {variant!r}")
    pa = lambda i: P(a, s * i)
    pb = lambda i: P(b, s * i)
    br = lambda x, y: _pbracket(g, x, y)
    out = [lie.theta_projection(eta, 0)[None, :], pa(1)]
    if not g2:
        out.append(_padd(pb(2), -br(pa(2), pa(0))))
        return out
    out.append(_padd(pb(2), -br(pa(2), pa(0)), -1.25 * br(pa(3), pa(-1))))
    pc3 = P(c, s * 3)
    rhs = _padd(0.5 * br(pa(3), pb(0)), br(pa(2), pb(1)), -br(pa(0), pb(3)),
                1.5 * br(pa(2), br(pa(-1), pa(2))), 1.5 * br(pa(0), br(pa(3), pa(0))))
    out.append(_padd(pc3, -rhs))
    return out


# ---------------------------------------------------------------- systems

@dataclass
class UnknownSlot:
    j: int
    kind: str  # "w", "x", "y", "ybar"
    root: tuple | None = None


@dataclass
class EquationBlock:
    condition: int
    power: int
    basis: np.ndarray  # orthonormal columns spanning the values this component can take


@dataclass
class TMSystem:
    alg: AlgebraData
    k: float
    ell: tuple
    J: int
    extended: bool
    layout: list
    blocks: list = field(default_factory=list)
    vectors: dict = field(default_factory=dict)  # (kind, root) -> g~ vector
    scaled: bool = False  # multiply condition n by w_j^n (polynomial-like, but degenerate at w = 0)

    @property
    def n_unknowns(self) -> int:
        return len(self.layout)

    @property
    def n_equations(self) -> int:
        return self.J * sum(b.basis.shape[1] for b in self.blocks)

    # -- unknowns <-> spec
    def spec(self, U) -> ConnectionSpec:
        U = np.asarray(U, dtype=complex)
        lie = self.alg.lie
        dim, r = lie.g.dim, self.alg.r
        ws = [0j] * self.J
        parts = [[np.zeros(dim, dtype=complex) for _ in range(r)] for _ in range(self.J)]
        for u, slot in zip(U, self.layout):
            if slot.kind == "w":
                ws[slot.j] = u
            else:
                m = {"x": 0, "y": 1, "ybar": 2}[slot.kind]
                parts[slot.j][m] = parts[slot.j][m] + u * self.vectors[(slot.kind, slot.root)]
        sings = [(w, p) for w, p in zip(ws, parts)]
        return make_spec(self.alg, self.k, self.ell, sings, extended=self.extended)

    def pack(self, spec: ConnectionSpec) -> np.ndarray:
        """Unknown vector of a spec with the same template."""
        lie = self.alg.lie
        out = []
        for slot in self.layout:
            s = spec.singularities[slot.j]
            if slot.kind == "w":
                out.append(s.w)
                continue
            m = {"x": 0, "y": 1, "ybar": 2}[slot.kind]
            v = self.vectors[(slot.kind, slot.root)]
            k = int(np.argmax(np.abs(v)))
            out.append(s.parts[m][k] / v[k])
        return np.array(out, dtype=complex)

    # -- residuals
    def conditions(self, U) -> list[list[np.ndarray]]:
        """Per singular point: the condition polynomials (times w_j^n for condition n when scaled)."""
        spec = self.spec(U)
        out = []
        order = 2 if self.alg.is_g2 else 1
        for j in range(self.J):
            loc = laurent_at_singularity(spec, j, order=order)
            c = (loc.const[2], loc.lin[2]) if self.alg.is_g2 else None
            res = local_condition_residual(self.alg, loc.R, loc.a, loc.b, c)
            w = spec.singularities[j].w
            out.append([w ** n * p for n, p in enumerate(res)] if self.scaled else res)
        return out

    def residual(self, U) -> np.ndarray:
        try:
            conds = self.conditions(U)
        except ValidationError:
            return np.full(self.n_equations, np.nan, dtype=complex)
        vals = []
        for per_j in conds:
            for blk in self.blocks:
                p = per_j[blk.condition]
                comp = p[blk.power] if blk.power < p.shape[0] else np.zeros(p.shape[1])
                vals.append(blk.basis.conj().T @ comp)
        return np.concatenate(vals) if vals else np.zeros(0, dtype=complex)

    def __call__(self, U) -> np.ndarray:
        return self.residual(U)

    def jacobian(self, U, method: str = "holomorphic") -> np.ndarray:
        if method == "holomorphic":
            return holomorphic_jacobian(self.residual, U)
        if method == "forward":
            return forward_difference_jacobian(self.residual, U)
        raise ValidationError(f"unknown Jacobian method {method!r}")

    def random_point(self, rng: np.random.Generator, scale: float | None = None) -> np.ndarray:
        """w_j on log-spaced moduli with random phases, other unknowns Gaussian."""
        scale = scale if scale is not None else max(1.0, float(np.linalg.norm(np.abs(self.ell))))
        r = self.alg.r
        U = np.empty(self.n_unknowns, dtype=complex)
        while True:
            for q, slot in enumerate(self.layout):
                if slot.kind == "w":
                    U[q] = 10 ** rng.uniform(-0.5, 0.5) * cmath.exp(2j * math.pi * rng.uniform())
                else:
                    U[q] = scale * complex(rng.normal(), rng.normal()) / math.sqrt(2)
            ws = [U[q] for q, s in enumerate(self.layout) if s.kind == "w"]
            if all(abs(a ** r - b ** r) > 0.1 for i, a in enumerate(ws) for b in ws[i + 1:]):
                return U


def _layout(alg: AlgebraData, J: int, extended: bool):
    lie = alg.lie
    vectors = {}
    layout = []
    for root in alg.Delta_u:
        vectors[("x", root)] = lie.e_root[root]
    short = alg.Delta_u_short if extended else []
    kinds = [("y", 1), ("ybar", 2)][: alg.r - 1] if extended else []
    for kind, m in kinds:
        for root in short:
            vectors[(kind, root)] = lie.ug_vector(m, root)
    for j in range(J):
        layout.append(UnknownSlot(j, "w"))
        layout += [UnknownSlot(j, "x", b) for b in alg.Delta_u]
        for kind, m in kinds:
            layout += [UnknownSlot(j, kind, b) for b in short]
    return layout, vectors


def build_system(alg: AlgebraData | str, k: float, ell, J_size: int, extended: bool = False,
                 samples: int | None = None, rng_seed: int = 12345) -> TMSystem:
    """Assemble the system; each condition is split exactly into lambda-coefficients.

    The component space of every (condition, lambda-power) pair is the span of its
    values; it is read off from random evaluations and fixes the equation count.
    """
    if isinstance(alg, str):
        alg = build_algebra(alg)
    ensure_normalized(alg)
    if J_size < 1:
        raise ValidationError("the system needs at least one singular point")
    if extended and alg.r == 1:
        extended = False
    ell = tuple(complex(x) for x in np.atleast_1d(ell))
    layout, vectors = _layout(alg, 1, extended)
    probe = TMSystem(alg, float(k), ell, 1, extended, layout, [], vectors, scaled=True)
    rng = np.random.default_rng(rng_seed)
    n = samples or len(layout) + 8
    stacks: dict = {}
    for _ in range(n):
        conds = probe.conditions(probe.random_point(rng))[0]
        for ci, p in enumerate(conds):
            if p.shape[0] > 2 and np.abs(p[2:]).max() > 1e-9 * max(1.0, np.abs(p).max()):
                raise ValidationError("condition is not affine in lambda")
            for power in range(min(p.shape[0], 2)):
                stacks.setdefault((ci, power), []).append(p[power])
    scale = max(np.abs(np.array(cols)).max() for cols in stacks.values())
    blocks = []
    for (ci, power), cols in sorted(stacks.items()):
        M = np.array(cols).T
        u, s, _ = np.linalg.svd(M, full_matrices=False)
        rank = int(np.sum(s > RANK_TOL * scale))
        if rank:
            blocks.append(EquationBlock(ci, power, u[:, :rank]))
    layout_full, _ = _layout(alg, J_size, extended)
    return TMSystem(alg, float(k), ell, J_size, extended, layout_full, blocks, vectors)


# ---------------------------------------------------------------- solving

@dataclass
class TMSolution:
    U: np.ndarray
    residual: float
    spec: ConnectionSpec
    seed_index: int

    @property
    def ws(self) -> np.ndarray:
        return self.spec.ws


def _canonical(system: TMSystem, U) -> np.ndarray:
    """Unknowns with the singular points sorted, to identify relabelled solutions."""
    per = system.n_unknowns // system.J
    blocks = [U[j * per:(j + 1) * per] for j in range(system.J)]
    blocks.sort(key=lambda b: (round(b[0].real, 6), round(b[0].imag, 6)))
    return np.concatenate(blocks)


W_WINDOW = (0.05, 20.0)
# accepted solutions must have |w_j| in this range: the residual decays like
# |w|^(k - 2) as w -> infinity, so far-out iterates pass any absolute tolerance
SOLVE_WINDOW = (1e-4, 1e4)


def _admissible(system: TMSystem, U, tol: float = 1e-8, window=None) -> bool:
    r = system.alg.r
    ws = [U[q] for q, s in enumerate(system.layout) if s.kind == "w"]
    lo, hi = window or (tol, math.inf)
    if any(not lo <= abs(w) <= hi for w in ws):
        return False
    return all(abs(a ** r - b ** r) > tol * max(1.0, abs(a) ** r) for i, a in enumerate(ws) for b in ws[i + 1:])


def newton_survey(system: TMSystem, seeds: int = 50, rng_seed: int = 0, max_iter: int = 40,
                  tol: float = 1e-12, window=W_WINDOW):
    """Damped Newton from random seeds.

    Returns (results, best): best is the smallest ||F|| over all iterates whose
    singular points stay in the annulus ``window``; runs that escape to w = 0 or
    w = infinity (where the residual can decay without a solution) do not count.
    """
    rng = np.random.default_rng(rng_seed)
    out = []
    best = [math.inf]

    def watch(x, norm):
        if norm < best[0] and _admissible(system, x, window=window):
            best[0] = norm

    for _ in range(seeds):
        U0 = system.random_point(rng)
        out.append(newton_solve(system.residual, U0, jac=lambda y: system.jacobian(y, "forward"),
                                tol=tol, max_iter=max_iter, callback=watch))
    return out, best[0]


def solve_system(system: TMSystem, seeds: int = 200, rng_seed: int = 0, tol: float = 1e-10,
                 max_solutions: int | None = None, max_iter: int = 80,
                 window=SOLVE_WINDOW) -> list[TMSolution]:
    """Multistart damped Newton; distinct admissible solutions with ||F|| < tol."""
    if system.alg.r > 1 and not system.extended:
        raise UnsupportedTwistedType("the standard twisted system has no solutions; see no_go_certificate")
    # the w-scaled residual stays regular as w -> infinity, where the plain one decays
    work = replace(system, scaled=True)
    rng = np.random.default_rng(rng_seed)
    sols: list[TMSolution] = []
    keys = []
    best = math.inf
    for s in range(seeds):
        U0 = system.random_point(rng)
        res = newton_solve(work.residual, U0, tol=tol * 1e-2, max_iter=max_iter)
        if not _admissible(system, res.x, window=window):
            continue
        best = min(best, res.residual)
        if res.residual >= tol:
            continue
        key = _canonical(system, res.x)
        if any(np.linalg.norm(key - k0) <= 1e-6 * max(1.0, np.linalg.norm(k0)) for k0 in keys):
            continue
        keys.append(key)
        sols.append(TMSolution(res.x, res.residual, system.spec(res.x), s))
        if max_solutions and len(sols) >= max_solutions:
            break
    if not sols:
        raise NoConvergence(f"no solution from {seeds} seeds (best residual {best:.3e})",
                            {"best_residual": best, "seeds": seeds})
    return sols


def permute_solution(system: TMSystem, U, perm) -> np.ndarray:
    per = system.n_unknowns // system.J
    U = np.asarray(U)
    return np.concatenate([U[p * per:(p + 1) * per] for p in perm])


# ---------------------------------------------------------------- twisted no-go

def theta_value(alg: AlgebraData, ell) -> complex:
    """<ell, theta> with ell given by its values on the simple roots."""
    return complex(sum(c * complex(e) for c, e in zip(alg.theta, ell)))


def c_formula(alg: AlgebraData, ell, ws, j: int, eta=None) -> complex:
    """C(j) for r = 2: 1 - <ell, theta> + sum_i 4 w_j^2/(w_j^2 - w_i^2) + gamma(eta).

    gamma(eta) = <v_-theta, [v_theta, pi_0(exp(-ad eta_bar) f - f)]> is the only
    contribution of the residue's nilpotent part; it vanishes when eta has no
    component pairing f back into degree 0.
    """
    wj = ws[j]
    out = 1 - theta_value(alg, ell) + sum(4 * wj ** 2 / (wj ** 2 - wi ** 2) for i, wi in enumerate(ws) if i != j)
    if eta is not None:
        out += gamma_term(alg, eta)
    return out


def gamma_term(alg: AlgebraData, eta) -> complex:
    lie = alg.lie
    g = lie.g
    moved = exp_ad(g, eta_bar(alg, eta), lie.f_circ, -1) - lie.f_circ
    return g.form(g.bracket(lie.v_theta, lie.theta_projection(moved, 0)), lie.v_minus_theta)


@dataclass
class NoGoCertificate:
    algebra: str
    extended: bool
    J: int
    n_unknowns: int
    n_equations: int
    steps: list
    samples: list
    coefficient_error: float
    best_newton_residual: float | None
    conclusion: str
    partial: bool = False

    def as_dict(self) -> dict:
        return {
            "algebra": self.algebra, "extended": self.extended, "J": self.J,
            "n_unknowns": self.n_unknowns, "n_equations": self.n_equations,
            "steps": self.steps, "samples": self.samples,
            "coefficient_error": self.coefficient_error,
            "best_newton_residual": self.best_newton_residual,
            "conclusion": self.conclusion, "partial": self.partial,
        }


def _skew_projection(lie, x) -> complex:
    """Coefficient of v_theta in the sigma-eigenvalue-eps part of x."""
    return lie.g.form(lie.sigma_component(x, 1), lie.v_minus_theta)


def _standard_sample(system: TMSystem, U, j: int = 0):
    alg = system.alg
    lie = alg.lie
    g = lie.g
    spec = system.spec(U)
    loc = laurent_at_singularity(spec, j, order=1)
    res = local_condition_residual(alg, loc.R, loc.a, loc.b)[2]
    w = spec.singularities[j].w
    k = spec.k
    const, lin = res[0], res[1] if res.shape[0] > 1 else np.zeros_like(res[0])
    p0, p1 = _skew_projection(lie, const), _skew_projection(lie, lin)
    # rank one: nothing of the skew parts lies outside C v_theta
    rest = max(np.abs(lie.sigma_component(const, 1) - p0 * lie.v_theta).max(),
               np.abs(lie.sigma_component(lin, 1) - p1 * lie.v_theta).max())
    eb = eta_bar(alg, loc.eta)
    a0 = lie.theta_projection(exp_ad(g, eb, np.array(loc.a), -1)[0], 0)
    C_num = w * g.form(g.bracket(lie.v_theta, a0), lie.v_minus_theta)
    C_closed = c_formula(alg, spec.ell, list(spec.ws), j, loc.eta)
    # predicted coefficients of (k-1) w^{k-2} lam = (1 + w^{k-1} lam) C / w
    pred0 = -C_closed / w
    pred1 = (k - 1) * w ** (k - 2) - w ** (k - 2) * C_closed
    return {
        "w": [w.real, w.imag],
        "C_generated": [C_num.real, C_num.imag],
        "C_closed_form": [C_closed.real, C_closed.imag],
        "const_projection": [p0.real, p0.imag],
        "lin_projection": [p1.real, p1.imag],
        "off_line_part": float(rest),
        "error": float(max(abs(C_num - C_closed), abs(p0 - pred0), abs(p1 - pred1), rest)),
    }


def _extended_sample(system: TMSystem, U, j: int = 0):
    """Coefficient of e_{theta~} (highest root of g°) in the lambda-linear part of the last condition."""
    alg = system.alg
    lie = alg.lie
    spec = system.spec(U)
    loc = laurent_at_singularity(spec, j, order=1)
    res = local_condition_residual(alg, loc.R, loc.a, loc.b)[2]
    lin = res[1] if res.shape[0] > 1 else np.zeros_like(res[0])
    top = alg.positive_roots[-1]
    e_top = lie.e_root[top]
    coeff = lie.g.form(lin, lie.f_root[top]) / lie.g.form(e_top, lie.f_root[top])
    slot = next(q for q, s in enumerate(system.layout) if s.kind == "y" and s.root == alg.theta and s.j == j)
    w = spec.singularities[j].w
    y = U[slot]
    return coeff, w ** (spec.k - 2) * y, y, w


def no_go_certificate(alg: AlgebraData | str, k: float, ell, J_size: int = 1, extended: bool = False,
                      samples: int = 3, seeds: int = 50, rng_seed: int = 0) -> NoGoCertificate:
    """Algebraic obstruction to trivial monodromy for twisted algebras, checked at random points."""
    if isinstance(alg, str):
        alg = build_algebra(alg)
    ensure_normalized(alg)
    if alg.r == 1:
        raise ValidationError("the no-go certificate concerns twisted algebras (r > 1)")
    if alg.r != 2:
        raise UnsupportedTwistedType(f"no certificate implemented for {alg.id}")
    system = build_system(alg, k, ell, J_size, extended)
    rng = np.random.default_rng(rng_seed)
    series = alg.id.series
    if not extended:
        pts = [_standard_sample(system, system.random_point(rng)) for _ in range(samples)]
        err = max(p["error"] for p in pts)
        steps = [
            "sigma-skew part of the degree-2 condition lies in C v_theta",
            "its coefficient is (k-1) w^(k-2) lam - (1 + w^(k-1) lam) C(j)/w",
            "C(j) = 1 - ell(theta) + sum_{i != j} 4 w_j^2/(w_j^2 - w_i^2) + gamma(eta(j))",
            "lambda^0 part: C(j)/w_j = 0, hence C(j) = 0",
            "lambda^1 part: (k-1) w_j^(k-2) = 0, hence k = 1, contradicting 0 < k < 1",
        ]
        _, best = newton_survey(system, seeds, rng_seed)
        return NoGoCertificate(str(alg.id), False, J_size, system.n_unknowns, system.n_equations, steps,
                               pts, err, best, "no solutions for J nonempty")
    if series != "D":
        _, best = newton_survey(system, seeds, rng_seed)
        return NoGoCertificate(str(alg.id), True, J_size, system.n_unknowns, system.n_equations,
                               ["equations exceed unknowns"], [], math.nan, best,
                               "over-determined; contradiction not derived symbolically", partial=True)
    # extended D_{n+1}^(2): the lambda-linear e_{theta~} component is a nonzero multiple of w^{k-2} y^theta
    ratios, pts = [], []
    for _ in range(samples):
        coeff, mono, y, w = _extended_sample(system, system.random_point(rng))
        ratios.append(coeff / mono)
        pts.append({"w": [w.real, w.imag], "y_theta": [y.real, y.imag],
                    "coefficient": [coeff.real, coeff.imag]})
    kappa = ratios[0]
    err = float(max(abs(q - kappa) for q in ratios) / max(abs(kappa), 1e-300))
    # with y^theta = 0 the v_theta coefficient of the lambda-linear part is w-independent up to w^(k-2)
    wcheck = _extended_after_y(system, rng, samples)
    for p, extra in zip(pts, wcheck["samples"]):
        p.update(extra)
    err = max(err, wcheck["error"])
    steps = [
        f"lambda-linear e_theta~ component = {kappa.real:.12g}{kappa.imag:+.12g}i * w^(k-2) y^theta",
        "hence y^theta(j) = 0",
        "with y^theta = 0 the remaining v_theta components force " + wcheck["statement"],
        "since k != 1 this needs w_j = 0, contradicting w_j != 0",
    ]
    _, best = newton_survey(system, seeds, rng_seed)
    return NoGoCertificate(str(alg.id), True, J_size, system.n_unknowns, system.n_equations, steps, pts,
                           err, best, "no solutions for J nonempty", partial=abs(kappa) < 1e-12 or wcheck["error"] > 1e-8)


def _extended_after_y(system: TMSystem, rng, samples: int) -> dict:
    """With y^theta = 0: the v_theta-coefficients of the sigma-skew condition, and what they force."""
    alg = system.alg
    lie = alg.lie
    k = system.k
    slot = next(q for q, s in enumerate(system.layout) if s.kind == "y" and s.root == alg.theta and s.j == 0)
    out, worst = [], 0.0
    for _ in range(samples):
        U = system.random_point(rng)
        U[slot] = 0
        spec = system.spec(U)
        loc = laurent_at_singularity(spec, 0, order=1)
        res = local_condition_residual(alg, loc.R, loc.a, loc.b)[2]
        w = spec.singularities[0].w
        p0 = _skew_projection(lie, res[0])
        p1 = _skew_projection(lie, res[1]) if res.shape[0] > 1 else 0j
        C = c_formula(alg, spec.ell, list(spec.ws), 0, loc.eta)
        pred0 = -C / w
        pred1 = (k - 1) * w ** (k - 2) - w ** (k - 2) * C
        worst = max(worst, abs(p0 - pred0), abs(p1 - pred1))
        out.append({"lin_vtheta": [p1.real, p1.imag], "const_vtheta": [p0.real, p0.imag]})
    return {"samples": out, "error": worst,
            "statement": "C(j) = 0 (lambda^0) and then (k-1) w_j^(k-2) = 0 (lambda^1)"}
