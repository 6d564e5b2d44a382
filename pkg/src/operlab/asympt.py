"""Asymptotic data at z = infinity and seeded inward integration.

For the connection rotated by kappa_i, the gauge q^{rho} exp(n~/q) brings the
coefficient to (q/z) Lambda(kappa_i) + O(z^{-1-delta}).  Solutions with
prescribed leading behaviour z^{rho/h} (psi + o(1)) e^{-mu S} are seeded far
out on a ray, corrected by a first-order WKB normalisation integral, and
integrated inward with the exponential factor stripped off.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm

from .connection import CoefficientEvaluator, ConnectionSpec, _binom
from .errors import (NotGoodInterval, PathThroughSingularity, SeedInconsistent,
                     ValidationError)
from .liealg_core import AlgebraData
from .numerics import PathSpec, Segment, integrate_ode
from .rep import Module, build_fundamental, cyclic_element, cyclic_spectrum, ensure_normalized

RESONANCE_TOL = 1e-12
X_MAX = 300.0  # log|z| cut-off of the normalisation integral


def _node(alg: AlgebraData, i: int) -> int:
    if not 1 <= i <= alg.n:
        raise ValidationError(f"module index {i} out of range 1..{alg.n}")
    return alg.orbit_reps[i - 1]


def kappa_of(alg: AlgebraData, i: int) -> float:
    return float(alg.kappa[_node(alg, i) - 1])


def resonance(h: int, k: float) -> int | None:
    """m with 1/(h(1-k)) = m, or None."""
    x = 1.0 / (h * (1.0 - k))
    m = round(x)
    return m if m >= 1 and abs(x - m) < RESONANCE_TOL else None


def correction_count(h: int, k: float) -> int:
    m = resonance(h, k)
    return m if m is not None else math.floor(1.0 / ((1.0 - k) * h))


def delta0(h: int, k: float) -> float:
    x = 1.0 / ((1.0 - k) * h)
    return (1.0 - k) * (math.floor(x + RESONANCE_TOL) + 1 - x)


def delta_exponent(h: int, k: float) -> float:
    return min(1.0 / h, delta0(h, k))


def q_function(h: int, k: float, kappa: float, z: complex, lam: complex, logz: complex | None = None,
               exact: bool = False) -> tuple[complex, complex]:
    """(q, z dq/dz).  The truncated q keeps the terms of (1 + a z^{k-1})^{1/h} that do not decay
    faster than z^{-1/h}; ``exact`` uses the closed form."""
    if logz is None:
        logz = cmath.log(z)
    a = cmath.exp(-2j * math.pi * kappa) * lam
    b = a * cmath.exp((k - 1) * logz)
    zh = cmath.exp(logz / h)
    if exact:
        q = cmath.exp((logz + cmath.log(1 + b)) / h)
        return q, q * (1 + (k - 1) * b / (1 + b)) / h
    q, zq = 1.0 + 0j, 1.0 / h + 0j
    for l in range(1, correction_count(h, k) + 1):
        c = _binom(1.0 / h, l) * b ** l
        q += c
        zq += c * (1.0 / h + l * (k - 1))
    return zh * q, zh * zq


def action_S(alg: AlgebraData, i: int, z: complex, lam: complex, k: float,
             logz: complex | None = None, kappa: float | None = None) -> complex:
    """Primitive of q_i / z without constant term (log branch at resonance)."""
    if logz is None:
        logz = cmath.log(z)
    h = alg.h
    kappa = kappa_of(alg, i) if kappa is None else kappa
    a = cmath.exp(-2j * math.pi * kappa) * lam
    m = resonance(h, k)
    L = correction_count(h, k)
    total = 1.0 + 0j
    tail = 0j
    for l in range(1, L + 1):
        c = _binom(1.0 / h, l) * a ** l
        if m is not None and l == m:
            tail = c * logz
            continue
        total += c * cmath.exp(l * (k - 1) * logz) / (1 - h * l * (1 - k))
    return h * cmath.exp(logz / h) * total + tail


def action_S_full(h: int, k: float, kappa: float, z: complex, lam: complex,
                  logz: complex | None = None, tol: float = 1e-17) -> complex:
    """Primitive of the exact q / z (convergent series for |a z^{k-1}| < 1)."""
    if logz is None:
        logz = cmath.log(z)
    a = cmath.exp(-2j * math.pi * kappa) * lam
    b = a * cmath.exp((k - 1) * logz)
    if abs(b) >= 0.9:
        raise ValidationError("series for the full action needs |a z^{k-1}| < 0.9")
    m = resonance(h, k)
    total, tail = 1.0 + 0j, 0j
    l, bl = 1, 1.0 + 0j
    while True:
        bl *= b
        c = _binom(1.0 / h, l)
        if m is not None and l == m:
            tail = c * a ** l * logz
        else:
            term = c * bl / (1 - h * l * (1 - k))
            total += term
            if abs(term) < tol and l > (m or 0):
                break
        l += 1
        if l > 2000:
            break
    return h * cmath.exp(logz / h) * total + tail


class AsymptoticSetup:
    """Fixed matrices for the gauge chain on L(omega~_node) at t = kappa_i."""

    def __init__(self, spec: ConnectionSpec, i: int, module: Module | None = None):
        alg = spec.alg
        ensure_normalized(alg)
        self.spec, self.i = spec, i
        self.node = _node(alg, i)
        self.module = module if module is not None else build_fundamental(alg, self.node)
        self.kappa = kappa_of(alg, i)
        self.h, self.k, self.r = alg.h, spec.k, alg.r
        lie = alg.lie
        mod = self.module
        self.evaluator = CoefficientEvaluator(spec, mod)
        cs = cyclic_spectrum(alg, mod, self.kappa)
        self.mu = cs.eigenvalues
        self.P = cs.eigenvectors
        self.Pinv = np.linalg.inv(self.P)
        self.max_index = cs.maximal_index
        self.Lam = mod.rep(cyclic_element(alg, self.kappa))
        self.rho = np.real(np.diag(mod.rep(lie.rho_vee)))
        self.Rho = np.diag(self.rho).astype(complex)
        self.Theta = mod.rep(lie.theta_vee)
        self.Ell = mod.rep(lie.ell_element(spec.ell))
        h_inf = lie.ell_element(spec.ell) + lie.rho_vee / self.h - self.r * spec.J * lie.theta_vee
        self.ntilde = self._solve_ntilde(h_inf)
        self.Hinf = mod.rep(h_inf)
        self.N = mod.rep(self.ntilde)
        self.X = [[mod.rep(p) for p in s.parts] for s in spec.singularities]
        self.e = cmath.exp(2j * math.pi * self.kappa)
        self.poles = [self.e.conjugate() * cmath.exp(2j * math.pi * l / self.r) * s.w
                      for s in spec.singularities for l in range(self.r)]

    def _solve_ntilde(self, target):
        lie = self.spec.alg.lie
        basis = np.array(lie.H).T
        coeffs, *_ = np.linalg.lstsq(basis, target, rcond=None)
        if np.abs(basis @ coeffs - target).max() > 1e-10:
            raise ValidationError("gauge element n~ not solvable")
        return sum(c * e for c, e in zip(coeffs, lie.E))

    def ntilde_check(self) -> float:
        lie = self.spec.alg.lie
        g = lie.g
        lhs = g.bracket(self.ntilde, lie.f_circ)
        h_inf = lie.ell_element(self.spec.ell) + lie.rho_vee / self.h - self.r * self.spec.J * lie.theta_vee
        return float(np.abs(lhs - h_inf).max())

    # -- gauge chain
    def q(self, z, lam, logz=None, exact=False):
        return q_function(self.h, self.k, self.kappa, z, lam, logz, exact)

    def gauge_chain(self, z, lam, logz=None, exact=False):
        """Module matrices (G1, G2) with Psi = G1 G2 Y."""
        q, _ = self.q(z, lam, logz, exact)
        lq = cmath.log(q) if logz is None else (logz / self.h + cmath.log(q / cmath.exp(logz / self.h)))
        G1 = np.diag(np.exp(self.rho * lq))
        G2 = expm(self.N / q)
        return G1, G2

    def gauged_coefficient(self, z, lam, logz=None, exact=False):
        """B with Y' = -B Y for Y = (G1 G2)^{-1} Psi, by direct conjugation."""
        if logz is None:
            logz = cmath.log(z)
        q, zq = self.q(z, lam, logz, exact)
        G1, G2 = self.gauge_chain(z, lam, logz, exact)
        A = self.evaluator(z, lam, self.kappa, logz)
        g1 = np.diag(G1)
        B1 = (A * g1[None, :]) / g1[:, None] + (zq / q / z) * self.Rho
        K = G2
        Kinv = expm(-self.N / q)
        return Kinv @ B1 @ K - (zq / (q * q * z)) * self.N

    def gauge_residual(self, z, lam, logz=None, exact=False) -> float:
        if logz is None:
            logz = cmath.log(z)
        q, _ = self.q(z, lam, logz, exact)
        B = self.gauged_coefficient(z, lam, logz, exact)
        return float(np.linalg.norm(B - (q / z) * self.Lam, 2))

    def remainder(self, z, lam, logz=None) -> np.ndarray:
        """Exact-q remainder B - (q/z) Lambda assembled without cancellation."""
        if logz is None:
            logz = cmath.log(z)
        q, zq = self.q(z, lam, logz, exact=True)
        a = self.e.conjugate() * lam
        b = a * cmath.exp((self.k - 1) * logz)
        r = self.r
        dH = self.Rho * ((self.k - 1) * b / (1 + b) / self.h)
        Nz = np.zeros_like(self.Lam)
        lq = logz / self.h + cmath.log(1 + b) / self.h
        g = np.exp(self.rho * lq)
        zr = cmath.exp(r * logz)
        er = self.e ** r
        for s, X in zip(self.spec.singularities, self.X):
            wr = s.w ** r
            phi = r * er * zr / (er * zr - wr)
            dH = dH + (r * wr / (er * zr - wr)) * (-self.Theta)
            tot = X[0]
            ez = self.e * cmath.exp(logz) / s.w
            for m in range(1, len(X)):
                tot = tot + ez ** m * X[m]
            Nz = Nz + phi * (tot * g[None, :]) / g[:, None]
        H = self.Hinf + dH
        out = dH + Nz
        ad = lambda Y: self.N @ Y - Y @ self.N
        # e^{-ad n/q} applied to H + N and to Lambda (the m = 1 Lambda term cancels H_inf)
        Y, fact = H + Nz, 1.0
        for m in range(1, self.h + 2):
            Y = ad(Y)
            fact *= m
            if not np.any(Y):
                break
            out = out + ((-1) ** m / (fact * q ** m)) * Y
        Y, fact = ad(self.Lam), 1.0
        for m in range(2, self.h + 3):
            Y = ad(Y)
            fact *= m
            if not np.any(Y):
                break
            out = out + ((-1) ** m * q ** (1 - m) / fact) * Y
        z_ = cmath.exp(logz)
        return out / z_ - (zq / (q * q * z_)) * self.N

    # -- seeds
    def wkb_normalisation(self, m: int, lam, phi_z: float, x0: float) -> tuple[complex, np.ndarray]:
        """(log v_m(z0), off-diagonal correction w at z0) on the ray arg z = phi_z, |z0| = e^{x0}."""
        mu = self.mu

        def pieces(x):
            logz = complex(x, phi_z)
            z = cmath.exp(logz)
            q, _ = self.q(z, lam, logz, exact=True)
            Et = self.Pinv @ self.remainder(z, lam, logz) @ self.P
            den = (q / z) * (mu - mu[m])
            den[m] = 1.0
            w = -Et[:, m] / den
            w[m] = 0.0
            return z, Et, w

        def integrand(x):
            z, Et, w = pieces(x)
            return z * (Et[m, m] + Et[m, :] @ w)

        total = 0j
        edges = np.arange(x0, X_MAX + 10, 10.0)
        for lo, hi in zip(edges, edges[1:]):
            re, _ = quad(lambda x: integrand(x).real, lo, hi, limit=200, epsabs=1e-15, epsrel=1e-12)
            im, _ = quad(lambda x: integrand(x).imag, lo, hi, limit=200, epsabs=1e-15, epsrel=1e-12)
            total += complex(re, im)
        _, _, w0 = pieces(x0)
        return total, w0

    def seed_value(self, m: int, lam, phi_z: float, radius: float) -> np.ndarray:
        """Psi_m(z0) e^{mu_m S_i(z0)} on the ray arg z = phi_z at |z0| = radius."""
        x0 = math.log(radius)
        logz = complex(x0, phi_z)
        z = cmath.exp(logz)
        logv, w = self.wkb_normalisation(m, lam, phi_z, x0)
        S_full = action_S_full(self.h, self.k, self.kappa, z, lam, logz)
        S_i = action_S(self.spec.alg, self.i, z, lam, self.k, logz, self.kappa)
        coeff = np.zeros(len(self.mu), dtype=complex)
        coeff[m] = 1.0
        Y = self.P @ (coeff + w) * cmath.exp(logv - self.mu[m] * (S_full - S_i))
        G1, G2 = self.gauge_chain(z, lam, logz, exact=True)
        return G1 @ (G2 @ Y)

    def stripped_rhs(self, m: int, lam):
        """rhs of u' = (-A + mu q_i/z) u for u = Psi e^{mu S_i}."""
        mu = self.mu[m]
        eye = np.eye(len(self.mu))

        def rhs(z, logz):
            q, _ = self.q(z, lam, logz)
            return -self.evaluator(z, lam, self.kappa, logz) + (mu * q / z) * eye

        return rhs

    def plain_rhs(self, lam):
        return lambda z, logz: -self.evaluator(z, lam, self.kappa, logz)


def default_seed_radius(setup: AsymptoticSetup, lam) -> float:
    """Radius where the q-corrections are small and the WKB normalisation is accurate."""
    r = max(1000.0, 300.0 * setup.h)
    a = abs(lam)
    if a > 0:
        r = max(r, (50.0 * a) ** (1.0 / (1.0 - setup.k)))
    for s in setup.spec.singularities:
        r = max(r, 500.0 * abs(s.w))
    return r


@dataclass
class SeededSolution:
    """Value of an asymptotic solution at the end of an inward path."""
    index: int
    mu: complex
    value: np.ndarray
    z: complex
    logz: complex
    seed_radius: float
    seed_spread: float = 0.0
    info: dict = field(default_factory=dict)


def _check_path(path: PathSpec, poles, margin=1e-3):
    for seg in path.segments:
        if poles and seg.min_distance(poles) < margin:
            raise PathThroughSingularity("integration path passes too close to a singularity",
                                         {"segment": seg.kind})


def inward_path(phi_z: float, r_seed: float, target_radius: float, target_arg: float) -> PathSpec:
    segs = [Segment.ray(phi_z, r_seed, target_radius)]
    if abs(target_arg - phi_z) > 1e-15:
        segs.append(Segment.arc(0.0, target_radius, phi_z, target_arg))
    return PathSpec(segs, log_start=complex(math.log(r_seed), phi_z))


def integrate_seed(setup: AsymptoticSetup, m: int, lam, phi_z: float, target_radius: float,
                   target_arg: float, r_seed: float, rtol: float = 1e-11) -> tuple[np.ndarray, complex]:
    """Psi_m at target_radius e^{i target_arg} (arg on the cover), seeded on arg z = phi_z."""
    u0 = setup.seed_value(m, lam, phi_z, r_seed)
    ray = inward_path(phi_z, r_seed, target_radius, phi_z)
    _check_path(ray, setup.poles)
    tr = integrate_ode(setup.stripped_rhs(m, lam), ray, u0, rtol=rtol, atol=1e-14 * np.linalg.norm(u0))
    logz = tr.log_end
    S = action_S(setup.spec.alg, setup.i, cmath.exp(logz), lam, setup.k, logz, setup.kappa)
    psi = tr.value * cmath.exp(-setup.mu[m] * S)
    if abs(target_arg - phi_z) > 1e-15:
        arc = PathSpec([Segment.arc(0.0, target_radius, phi_z, target_arg)], log_start=logz)
        _check_path(arc, setup.poles)
        tr2 = integrate_ode(setup.plain_rhs(lam), arc, psi, rtol=rtol, atol=1e-14 * np.linalg.norm(psi))
        psi, logz = tr2.value, tr2.log_end
    return psi, logz


def integrate_flag(setup: AsymptoticSetup, lam, phi_z: float, target_radius: float, target_arg: float,
                   r_seed: float, rtol: float = 1e-11) -> tuple[np.ndarray, np.ndarray, list]:
    """Seeds on arg z = phi_z ordered from most to least subdominant, integrated inward with
    re-orthonormalisation.  Returns (Qv, R, order): column j of Qv R is the order[j] seed at the target."""
    mu = setup.mu
    re = (mu * cmath.exp(1j * phi_z / setup.h)).real
    order = [int(j) for j in np.argsort(-re)]
    ref = mu[order[0]]
    alg = setup.spec.alg
    x0 = math.log(r_seed)
    S0 = action_S(alg, setup.i, cmath.exp(complex(x0, phi_z)), lam, setup.k, complex(x0, phi_z), setup.kappa)
    U = np.array([setup.seed_value(m, lam, phi_z, r_seed) * cmath.exp((ref - mu[m]) * S0) for m in order]).T
    Qv, R = np.linalg.qr(U)
    spread = float(np.max(np.abs(mu[:, None] - mu[None, :])))
    pieces = int(abs(S0) * spread / 10.0) + 2
    radii = np.exp(np.linspace(x0, math.log(target_radius), pieces + 1))
    rhs = setup.stripped_rhs(order[0], lam)
    logz = complex(x0, phi_z)
    for r0, r1 in zip(radii, radii[1:]):
        path = PathSpec([Segment.ray(phi_z, r0, r1)], log_start=logz)
        _check_path(path, setup.poles)
        tr = integrate_ode(rhs, path, Qv, rtol=rtol, atol=1e-14)
        Qv, Rn = np.linalg.qr(tr.value)
        R = Rn @ R
        logz = tr.log_end
    S = action_S(alg, setup.i, cmath.exp(logz), lam, setup.k, logz, setup.kappa)
    Qv = Qv * cmath.exp(-ref * S)
    if abs(target_arg - phi_z) > 1e-15:
        arc = PathSpec([Segment.arc(0.0, target_radius, phi_z, target_arg)], log_start=logz)
        _check_path(arc, setup.poles)
        Qv = integrate_ode(setup.plain_rhs(lam), arc, Qv, rtol=rtol, atol=1e-14 * np.abs(Qv).max()).value
    return Qv, R, order


def subdominant_solution(spec: ConnectionSpec, i: int, lam, target_radius: float = 0.5,
                         target_arg: float = 0.0, r_seed: float | None = None,
                         setup: AsymptoticSetup | None = None, check_seed: bool = True,
                         seed_tol: float = 1e-6) -> SeededSolution:
    """Subdominant solution of the kappa_i-rotated equation, seeded on the positive real axis."""
    setup = setup or AsymptoticSetup(spec, i)
    m = setup.max_index
    if m is None:
        raise ValidationError("Lambda(kappa_i) has no maximal eigenvalue")
    r_seed = r_seed or default_seed_radius(setup, lam)
    val, logz = integrate_seed(setup, m, lam, 0.0, target_radius, target_arg, r_seed)
    spread = 0.0
    if check_seed:
        val2, _ = integrate_seed(setup, m, lam, 0.0, target_radius, target_arg, 2 * r_seed)
        spread = float(np.linalg.norm(val2 - val) / np.linalg.norm(val))
        if spread > seed_tol:
            raise SeedInconsistent(f"seed radius {r_seed:.3g} too small (spread {spread:.2e})",
                                   {"spread": spread, "r_seed": r_seed})
    return SeededSolution(m, setup.mu[m], val, cmath.exp(logz), logz, r_seed, spread)


# ---------------------------------------------------------------- sectors

def stokes_angles(mu: np.ndarray) -> list[float]:
    """Angles phi in [-pi, pi) where Re(e^{i phi}(mu - mu')) = 0 for some pair."""
    out = set()
    for a in range(len(mu)):
        for b in range(len(mu)):
            if a != b:
                base = math.pi / 2 - cmath.phase(mu[a] - mu[b])
                for n in range(-3, 4):
                    x = base + n * math.pi
                    if -math.pi <= x < math.pi:
                        out.add(round(x, 13))
    return sorted(out)


def is_good_interval(mu: np.ndarray, a: float, b: float, grid: int = 401) -> bool:
    diffs = [mu[p] - mu[q] for p in range(len(mu)) for q in range(len(mu)) if p != q]
    for phi in np.linspace(a, b, grid):
        e = cmath.exp(1j * phi)
        if min(abs((d * e).real) for d in diffs) < 1e-12:
            return False
    # exact check on the closed interval
    for x in stokes_angles(mu):
        for n in range(-4, 5):
            y = x + n * math.pi
            if a - 1e-14 <= y <= b + 1e-14:
                return False
    return True


def default_zetas(mu: np.ndarray) -> tuple[float, float, float]:
    """(zeta_*, zeta, zeta~) with no Stokes direction in (-zeta_*, 0)."""
    below = []
    for x in stokes_angles(mu):
        for n in range(-4, 5):
            y = -(x + n * math.pi)
            if y > 1e-12:
                below.append(y)
    d = min(below) if below else math.pi / 2
    zs = d / 2
    return zs, zs / 2, zs / 4


@dataclass
class AsymptoticFrame:
    i: int
    interval: tuple
    mu: np.ndarray
    psi: np.ndarray
    matrix: np.ndarray  # columns: solutions at z_mid
    z_mid: complex
    logz_mid: complex
    subdominant: list
    info: dict = field(default_factory=dict)


def _flags(mu, phi):
    """For each omega, the indices at least as subdominant as omega on the direction phi."""
    re = (mu * cmath.exp(1j * phi)).real
    return [[j for j in range(len(mu)) if re[j] >= re[w] - 1e-13] for w in range(len(mu))]


def best_direction(mu: np.ndarray, w: int, lo: float, hi: float, grid: int = 721) -> tuple[float, float]:
    """Direction in [lo, hi] where omega is most subdominant, with its margin over the others."""
    others = np.delete(mu, w)
    phis = np.linspace(lo, hi, grid)
    margins = [min(((mu[w] - o) * cmath.exp(1j * p)).real for o in others) for p in phis]
    k = int(np.argmax(margins))
    return float(phis[k]), float(margins[k])


def sector_basis(spec: ConnectionSpec, i: int, lam, interval: tuple[float, float],
                 mid_radius: float = 0.5, mid_arg: float = 0.0, r_seed: float | None = None,
                 setup: AsymptoticSetup | None = None) -> AsymptoticFrame:
    """Basis with leading behaviour e^{-mu_omega S} on h a <= arg z <= h (pi + b).

    An entry that is the most subdominant on some direction of the sector is that
    direction's subdominant solution, which integrates inward stably.  Other entries
    come from intersecting the subdominance flags of the two boundary directions,
    each integrated as an orthonormalised frame.
    """
    setup = setup or AsymptoticSetup(spec, i)
    a, b = interval
    mu = setup.mu
    if not is_good_interval(mu, a, b):
        raise NotGoodInterval(f"[{a}, {b}] is not a good interval")
    r_seed = r_seed or default_seed_radius(setup, lam)
    h = setup.h
    n = len(mu)
    scale = max(np.abs(mu).max(), 1e-300)
    out = np.zeros((n, n), dtype=complex)
    directions, pending = {}, []
    for w in range(n):
        phi, margin = best_direction(mu, w, a, b + math.pi)
        if margin > 0.05 * scale:
            out[:, w], _ = integrate_seed(setup, w, lam, h * phi, mid_radius, mid_arg, r_seed)
            directions[w] = phi
        else:
            pending.append(w)
    if pending:
        Qa, Ra, oa = integrate_flag(setup, lam, h * a, mid_radius, mid_arg, r_seed)
        Qb, _, ob = integrate_flag(setup, lam, h * (b + math.pi), mid_radius, mid_arg, r_seed)
        for w in pending:
            pa, pb = oa.index(w), ob.index(w)
            _, _, vh = np.linalg.svd(np.hstack([Qa[:, :pa + 1], -Qb[:, :pb + 1]]))
            y = vh[-1].conj()[:pa + 1]
            if abs(y[pa]) < 1e-12 * np.abs(y).max():
                raise NotGoodInterval("intersection has no component along the seed")
            out[:, w] = Qa[:, :pa + 1] @ y * (Ra[pa, pa] / y[pa])
    sub = [w for w in range(n) if len(_flags(mu, a)[w]) == 1]
    logz = complex(math.log(mid_radius), mid_arg)
    return AsymptoticFrame(i, (a, b), mu, setup.P, out, cmath.exp(logz), logz, sub,
                           {"directions": directions, "flag_entries": pending})


def seed_consistency(spec: ConnectionSpec, i: int, lam, radius: float, target_radius: float = 0.5,
                     setup: AsymptoticSetup | None = None) -> float:
    """Relative change of the subdominant solution when the seed radius doubles."""
    setup = setup or AsymptoticSetup(spec, i)
    m = setup.max_index
    v1, _ = integrate_seed(setup, m, lam, 0.0, target_radius, 0.0, radius)
    v2, _ = integrate_seed(setup, m, lam, 0.0, target_radius, 0.0, 2 * radius)
    return float(np.linalg.norm(v1 - v2) / np.linalg.norm(v1))


def residual_slope(spec: ConnectionSpec, i: int, lam, z1: float, z2: float, exact: bool = False,
                   setup: AsymptoticSetup | None = None) -> float:
    """log-log slope of the gauge residual between two points of the positive axis."""
    setup = setup or AsymptoticSetup(spec, i)
    r1 = setup.gauge_residual(z1, lam, exact=exact)
    r2 = setup.gauge_residual(z2, lam, exact=exact)
    return math.log(r2 / r1) / math.log(z2 / z1)
