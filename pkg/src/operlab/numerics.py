"""Shared numerical kernels: tolerance policy, complex-path ODE transport,
Newton-type solvers and finite-difference Jacobians."""

from __future__ import annotations

import cmath
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoConvergence, NonFiniteValue, NumericFailure, StepUnderflow, ValidationError


@dataclass(frozen=True)
class Tolerances:
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-14
    eigen_gap: float = 1e-9
    newton_tol: float = 1e-10
    pivot: float = 1e-12
    dedup: float = 1e-6
    loop_segments: int = 64
    loop_rtol: float = 1e-11

    def as_dict(self):
        return asdict(self)


PROFILES = {
    "default": Tolerances(),
    "strict": Tolerances(ode_rtol=1e-12, ode_atol=1e-16, newton_tol=1e-12, loop_rtol=1e-12),
}

_current = PROFILES["default"]


def get_tolerances() -> Tolerances:
    return _current


def set_profile(name: str) -> Tolerances:
    global _current
    if name not in PROFILES:
        raise ValidationError(f"unknown tolerance profile {name!r}")
    _current = PROFILES[name]
    return _current


def override_tolerances(**kw) -> Tolerances:
    global _current
    _current = replace(_current, **kw)
    return _current


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("OPERLAB_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def parallel_map(fn, items, threads: int | None = None):
    """Order-preserving map; runs in a thread pool when more than one thread is allowed."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- paths

def _principal_log(x: complex) -> complex:
    return cmath.log(x)


@dataclass(frozen=True)
class Segment:
    """One piece of an integration path, parametrised by s in [0, 1].

    kinds:
      ``line``  straight segment z0 -> z1 (must avoid the origin)
      ``ray``   radial segment at fixed argument ``phi`` (a real number on the
                universal cover) from radius r0 to r1, parametrised by log r
      ``arc``   circle arc c + rho e^{i phi}, phi from phi0 to phi1
    """

    kind: str
    data: tuple

    @staticmethod
    def line(z0: complex, z1: complex) -> "Segment":
        return Segment("line", (complex(z0), complex(z1)))

    @staticmethod
    def ray(phi: float, r0: float, r1: float) -> "Segment":
        if r0 <= 0 or r1 <= 0:
            raise ValidationError("ray radii must be positive")
        return Segment("ray", (float(phi), float(r0), float(r1)))

    @staticmethod
    def arc(center: complex, radius: float, phi0: float, phi1: float) -> "Segment":
        return Segment("arc", (complex(center), float(radius), float(phi0), float(phi1)))

    def start(self) -> complex:
        return self.point(0.0)

    def end(self) -> complex:
        return self.point(1.0)

    def point(self, s: float) -> complex:
        k = self.kind
        if k == "line":
            z0, z1 = self.data
            return z0 + s * (z1 - z0)
        if k == "ray":
            phi, r0, r1 = self.data
            return cmath.exp(complex(math.log(r0) + s * (math.log(r1) - math.log(r0)), phi))
        c, rho, p0, p1 = self.data
        return c + rho * cmath.exp(1j * (p0 + s * (p1 - p0)))

    def derivative(self, s: float) -> complex:
        k = self.kind
        if k == "line":
            z0, z1 = self.data
            return z1 - z0
        if k == "ray":
            phi, r0, r1 = self.data
            return self.point(s) * (math.log(r1) - math.log(r0))
        c, rho, p0, p1 = self.data
        return 1j * (p1 - p0) * rho * cmath.exp(1j * (p0 + s * (p1 - p0)))

    def log_point(self, s: float, log_start: complex) -> complex:
        """Continuous logarithm of z(s) given the logarithm at s = 0."""
        k = self.kind
        z = self.point(s)
        if k == "ray":
            phi, r0, r1 = self.data
            shift = round((log_start.imag - phi) / (2 * math.pi)) * 2 * math.pi
            return complex(math.log(r0) + s * (math.log(r1) - math.log(r0)), phi + shift)
        if k == "line":
            z0 = self.point(0.0)
            return log_start + _principal_log(z / z0)
        c, rho, p0, p1 = self.data
        if c == 0:
            z0 = self.point(0.0)
            return log_start + complex(math.log(rho / abs(z0)), (s * (p1 - p0)))
        if rho >= abs(c):
            raise ValidationError("arc around a nonzero centre must not enclose the origin")
        z0 = self.point(0.0)
        return log_start + _principal_log(z / c) - _principal_log(z0 / c)

    def min_distance(self, points: Sequence[complex], samples: int = 257) -> float:
        if not len(points):
            return math.inf
        ss = np.linspace(0.0, 1.0, samples)
        zs = np.array([self.point(s) for s in ss])
        pts = np.asarray(points, dtype=complex)
        return float(np.min(np.abs(zs[:, None] - pts[None, :])))


@dataclass
class PathSpec:
    segments: list
    log_start: complex | None = None
    rtol: float | None = None

    def __post_init__(self):
        if not self.segments:
            raise ValidationError("empty path")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.end() - b.start()) > 1e-12 * max(1.0, abs(a.end())):
                raise ValidationError("path segments are not connected")
        if self.log_start is None:
            self.log_start = cmath.log(self.segments[0].start())

    def start(self) -> complex:
        return self.segments[0].start()

    def end(self) -> complex:
        return self.segments[-1].end()

    def log_end(self) -> complex:
        log = self.log_start
        for seg in self.segments:
            log = seg.log_point(1.0, log)
        return log

    def winding(self) -> float:
        """Total change of arg z along the path, in units of 2 pi."""
        return (self.log_end() - self.log_start).imag / (2 * math.pi)

    def reversed(self) -> "PathSpec":
        segs = []
        for seg in reversed(self.segments):
            if seg.kind == "line":
                segs.append(Segment.line(seg.data[1], seg.data[0]))
            elif seg.kind == "ray":
                phi, r0, r1 = seg.data
                segs.append(Segment.ray(phi, r1, r0))
            else:
                c, rho, p0, p1 = seg.data
                segs.append(Segment.arc(c, rho, p1, p0))
        return PathSpec(segs, log_start=self.log_end(), rtol=self.rtol)


def ray_path(phi: float, r0: float, r1: float) -> PathSpec:
    return PathSpec([Segment.ray(phi, r0, r1)], log_start=complex(math.log(r0), phi))


def circle_path(center: complex, radius: float, turns: int = 1, pieces: int = 1,
                phi0: float = 0.0, log_start: complex | None = None) -> PathSpec:
    total = 2 * math.pi * turns
    step = total / pieces
    segs = [Segment.arc(center, radius, phi0 + m * step, phi0 + (m + 1) * step) for m in range(pieces)]
    if log_start is None and center == 0:
        log_start = complex(math.log(radius), phi0)
    return PathSpec(segs, log_start=log_start)


# ---------------------------------------------------------------- ODE transport

@dataclass
class Transport:
    value: np.ndarray
    log_end: complex
    nfev: int
    samples: list = field(default_factory=list)


def integrate_ode(rhs: Callable[[complex, complex], np.ndarray], path: PathSpec, y0,
                  rtol: float | None = None, atol: float | None = None,
                  sample_s: Sequence[float] | None = None, method: str = "DOP853") -> Transport:
    """Transport ``y0`` along ``path`` for dy/dz = rhs(z, log z) y.

    ``y0`` may be a vector or a matrix whose columns are transported together.
    ``rhs`` receives the path-continued logarithm so branches of z^k stay
    consistent on the universal cover.  ``sample_s`` collects (z, log z, y)
    at the given parameter values of every segment.
    """
    tol = get_tolerances()
    rtol = rtol if rtol is not None else (path.rtol or tol.ode_rtol)
    atol = atol if atol is not None else tol.ode_atol
    y = np.array(y0, dtype=complex)
    shape = y.shape
    log = path.log_start
    nfev = 0
    samples = []
    for seg in path.segments:
        log0 = log

        def f(s, yflat, seg=seg, log0=log0):
            z = seg.point(s)
            lz = seg.log_point(s, log0)
            m = rhs(z, lz) * seg.derivative(s)
            return (m @ yflat.reshape(shape)).reshape(-1)

        wanted = None if sample_s is None else {float(s) for s in sample_s}
        t_eval = None if wanted is None else sorted(wanted | {1.0})
        sol = solve_ivp(f, (0.0, 1.0), y.reshape(-1), method=method, rtol=rtol, atol=atol,
                        t_eval=t_eval)
        nfev += sol.nfev
        if sol.status != 0:
            raise StepUnderflow(f"integration failed on {seg.kind} segment: {sol.message}",
                                {"segment": seg.kind, "data": repr(seg.data)})
        yend = sol.y[:, -1]
        if not np.all(np.isfinite(yend)):
            raise NonFiniteValue("non-finite value during integration", {"segment": seg.kind})
        if wanted is not None:
            for s, col in zip(sol.t, sol.y.T):
                if float(s) in wanted:
                    samples.append((seg.point(s), seg.log_point(s, log0), col.reshape(shape)))
        y = yend.reshape(shape)
        log = seg.log_point(1.0, log0)
    return Transport(y, log, nfev, samples)


# ---------------------------------------------------------------- linear algebra

def eig_checked(a: np.ndarray, rel: float = 1e-10):
    """Eigen-decomposition with a per-pair residual check."""
    a = np.asarray(a, dtype=complex)
    w, v = np.linalg.eig(a)
    scale = max(np.linalg.norm(a, 2), 1e-300)
    for j in range(len(w)):
        res = np.linalg.norm(a @ v[:, j] - w[j] * v[:, j])
        if res > rel * scale * max(1.0, np.linalg.norm(v[:, j])) * 10:
            raise NumericFailure("eigenpair residual too large", {"index": j, "residual": float(res)})
    return w, v


def nullspace(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a))
    if a.size == 0:
        return np.eye(a.shape[1], dtype=a.dtype)
    u, s, vh = np.linalg.svd(a)
    cut = rtol * (s[0] if len(s) else 1.0)
    rank = int(np.sum(s > cut))
    return vh[rank:].conj().T


def condition_number(a: np.ndarray) -> float:
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else math.inf


# ---------------------------------------------------------------- Jacobians and Newton

def forward_difference_jacobian(F, x, h: float | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    f0 = np.asarray(F(x))
    jac = np.empty((f0.size, x.size), dtype=complex)
    for i in range(x.size):
        step = h if h is not None else 1e-7 * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += step
        jac[:, i] = (np.asarray(F(xp)) - f0) / step
    return jac


def complex_step_jacobian(F, x, h: float = 1e-20) -> np.ndarray:
    """Classical complex-step derivative of a real-analytic map of real vectors."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        xp = x.astype(complex)
        xp[i] += 1j * h
        cols.append(np.imag(np.asarray(F(xp))) / h)
    return np.array(cols).T


def holomorphic_jacobian(F, x, h: float | None = None) -> np.ndarray:
    """Four-point complex-step rule for holomorphic maps; truncation error O(h^4)."""
    x = np.asarray(x, dtype=complex)
    cols = []
    for i in range(x.size):
        step = h if h is not None else 1e-3 * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = step
        d = (np.asarray(F(x + e)) - np.asarray(F(x - e))
             - 1j * (np.asarray(F(x + 1j * e)) - np.asarray(F(x - 1j * e))))
        cols.append(d / (4 * step))
    return np.array(cols).T


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    converged: bool
    iterations: int
    trace: list


def newton_solve(F, x0, jac=None, tol: float | None = None, max_iter: int = 100,
                 min_step: float = 1e-12, raise_on_failure: bool = False, callback=None) -> NewtonResult:
    """Damped Newton (Gauss-Newton for rectangular systems) with Armijo backtracking.

    Works over the complex numbers when ``x0`` is complex.  ``jac`` defaults to
    the four-point holomorphic rule for complex input and forward differences
    for real input.
    """
    tol = tol if tol is not None else get_tolerances().newton_tol
    x = np.array(x0, dtype=complex if np.iscomplexobj(x0) else float)
    if jac is None:
        jac = holomorphic_jacobian if np.iscomplexobj(x) else forward_difference_jacobian
        jac_fn = lambda y: jac(F, y)
    else:
        jac_fn = jac
    fx = np.asarray(F(x))
    norm = float(np.linalg.norm(fx))
    trace = [norm]
    if callback is not None:
        callback(x, norm)
    it = 0
    while norm >= tol and it < max_iter:
        it += 1
        J = np.asarray(jac_fn(x))
        if not np.all(np.isfinite(J)):
            break
        step, *_ = np.linalg.lstsq(J, -fx, rcond=None)
        t = 1.0
        accepted = False
        while t >= min_step:
            xn = x + t * step
            try:
                fn = np.asarray(F(xn))
            except (ZeroDivisionError, FloatingPointError, ValueError, ArithmeticError):
                fn = None
            if fn is not None and np.all(np.isfinite(fn)):
                nn = float(np.linalg.norm(fn))
                if nn <= (1 - 1e-4 * t) * norm or nn < tol:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        x, fx, norm = xn, fn, nn
        trace.append(norm)
        if callback is not None:
            callback(x, norm)
    result = NewtonResult(x, norm, norm < tol, it, trace)
    if raise_on_failure and not result.converged:
        raise NoConvergence(f"Newton did not converge (best residual {norm:.3e})",
                            {"best_residual": norm, "iterations": it})
    return result
