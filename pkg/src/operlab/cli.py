"""Command-line front end.

Every subcommand prints (or writes under ``--out``) a JSON document with a
``manifest`` block and a ``result`` block.  Exit codes: 0 success, 2 invalid
input, 3 numerical failure or a failed check.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericFailure, OperlabError, ValidationError
from .liealg_core import build_algebra
from .numerics import get_tolerances, resolve_threads, set_profile

SCHEMA_VERSION = 1


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        x = complex(x)
        return x.real if x.imag == 0 else [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def _load_json(path: str) -> tuple[dict, str]:
    raw = Path(path).read_bytes()
    try:
        obj = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return obj, hashlib.sha256(raw).hexdigest()


def _load_spec(args):
    from .connection import spec_from_json
    if not args.config:
        raise ValidationError("--config is required")
    obj, digest = _load_json(args.config)
    try:
        spec = spec_from_json(obj)
    except KeyError as exc:
        raise ValidationError(f"config is missing field {exc}") from exc
    return spec, digest


class Runner:
    def __init__(self, args):
        self.args = args
        self.start = time.perf_counter()
        self.config_hash = None
        self.algebra = None
        self.outputs: list[str] = []

    def manifest(self) -> dict:
        a = self.args
        return {
            "schema": SCHEMA_VERSION,
            "version": __version__,
            "subcommand": a.command,
            "config_hash": self.config_hash,
            "algebra": self.algebra,
            "seed": a.seed,
            "threads": resolve_threads(a.threads),
            "tolerances": {"profile": a.tol_profile, **get_tolerances().as_dict()},
            "timings": {"total_s": round(time.perf_counter() - self.start, 4)},
            "outputs": self.outputs,
        }

    def write_csv(self, name: str, header: list, rows: list):
        if not self.args.out:
            return
        out = Path(self.args.out)
        out.mkdir(parents=True, exist_ok=True)
        path = out / name
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(f"# schema={SCHEMA_VERSION} subcommand={self.args.command} config_hash={self.config_hash}\n")
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        self.outputs.append(str(path))

    def emit(self, result: dict):
        if self.args.out:
            out = Path(self.args.out)
            out.mkdir(parents=True, exist_ok=True)
            self.outputs.append(str(out / f"{self.args.command}.json"))
        doc = {"manifest": self.manifest(), "result": _jsonable(result)}
        text = json.dumps(doc, indent=2)
        if self.args.out:
            Path(self.outputs[-1]).write_text(text + "\n", encoding="utf-8")
        else:
            print(text)


# ---------------------------------------------------------------- subcommands

def cmd_algebra(run: Runner):
    alg = build_algebra(run.args.id)
    run.algebra = str(alg.id)
    rep = alg.report()
    keys = ["id", "r", "cartan_folded", "kac_labels", "dual_kac_labels", "h", "h_dual", "exponents",
            "theta_spectrum", "dim_u"] if not run.args.full else list(rep)
    run.emit({k: rep[k] for k in keys})
    return 0


def cmd_spectrum(run: Runner):
    from .rep import build_fundamental, cyclic_spectrum, ensure_normalized
    alg = build_algebra(run.args.id)
    run.algebra = str(alg.id)
    ensure_normalized(alg)
    nodes = [run.args.node] if run.args.node else list(range(1, alg.n + 1))
    out = {}
    for i in nodes:
        node = alg.orbit_reps[i - 1] if alg.r > 1 else i
        mod = build_fundamental(alg, node)
        t = float(alg.kappa[node - 1]) if run.args.t is None else run.args.t
        cs = cyclic_spectrum(alg, mod, t)
        mu = None if cs.maximal_index is None else cs.eigenvalues[cs.maximal_index]
        out[str(i)] = {"t": t, "maximal": mu, "eigenvalues": sorted(cs.eigenvalues, key=lambda z: -abs(z))}
    run.emit({"nodes": out})
    return 0


def cmd_frobenius(run: Runner):
    from .frobenius import build_frobenius, frobenius_seeds, recurrence_residual
    from .monodromy_data import frobenius_monodromy_error
    from .rep import build_fundamental
    spec, run.config_hash = _load_spec(run.args)
    run.algebra = str(spec.alg.id)
    mod = build_fundamental(spec.alg, run.args.module)
    seeds = frobenius_seeds(spec, mod)
    rows = []
    worst = 0.0
    for b in range(mod.dim):
        sol = build_frobenius(spec, mod, b, run.args.orders[0], run.args.orders[1], seed=seeds[:, b])
        res = recurrence_residual(spec, mod, sol)
        worst = max(worst, res)
        rows.append({"weight": list(sol.weight), "gamma": sol.gamma, "residual": res})
    result = {"module": run.args.module, "solutions": rows, "max_residual": worst}
    if run.args.lam is not None:
        result["loop_monodromy_error"] = frobenius_monodromy_error(spec, mod, _parse_complex(run.args.lam))
    run.emit(result)
    return 0


def cmd_asympt(run: Runner):
    from .asympt import (AsymptoticSetup, default_seed_radius, delta_exponent, residual_slope,
                         seed_consistency)
    spec, run.config_hash = _load_spec(run.args)
    run.algebra = str(spec.alg.id)
    lam = _parse_complex(run.args.lam)
    setup = AsymptoticSetup(spec, run.args.node)
    # the gauge residual decays like |z|^-(1 + delta)
    slope = residual_slope(spec, run.args.node, lam, run.args.z1, run.args.z2, setup=setup)
    radius = run.args.radius or default_seed_radius(setup, lam)
    spread = seed_consistency(spec, run.args.node, lam, radius, setup=setup)
    delta = delta_exponent(spec.alg.h, spec.k)
    run.write_csv("asympt_ray.csv", ["z", "gauge_residual"],
                  [[z, setup.gauge_residual(z, lam)] for z in np.geomspace(run.args.z1, run.args.z2, 12)])
    run.emit({"node": run.args.node, "lam": lam, "decay_exponent": -slope - 1, "delta": delta,
              "seed_radius": radius, "seed_spread": spread})
    return 0


def _lam_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise ValidationError(f"grid must look like start:stop:count, got {text!r}") from exc


def cmd_qfun(run: Runner):
    from .qq_bethe import QFunctionTable
    spec, run.config_hash = _load_spec(run.args)
    run.algebra = str(spec.alg.id)
    table = QFunctionTable(spec)
    i = run.args.node
    rows = []
    for lam in _lam_grid(run.args.grid):
        q, qt = table.Q(i, lam), table.Qt(i, lam)
        rows.append([lam, q.real, q.imag, qt.real, qt.imag])
    run.write_csv(f"qfun_node{i}.csv", ["lam", "Q_re", "Q_im", "Qt_re", "Qt_im"], rows)
    run.emit({"node": i, "samples": [{"lam": r[0], "Q": complex(r[1], r[2]), "Qt": complex(r[3], r[4])}
                                     for r in rows]})
    return 0


def cmd_qq_check(run: Runner):
    from .qq_bethe import QFunctionTable, qq_relative_residual
    spec, run.config_hash = _load_spec(run.args)
    run.algebra = str(spec.alg.id)
    table = QFunctionTable(spec)
    lams = _lam_grid(run.args.grid)
    report = {}
    worst = 0.0
    for s in range(1, spec.alg.n + 1):
        vals = [qq_relative_residual(table, s, lam) for lam in lams]
        report[str(s)] = vals
        worst = max(worst, max(vals))
    ok = worst < run.args.threshold
    run.emit({"residuals": report, "lam": lams, "max_residual": worst, "threshold": run.args.threshold,
              "passed": ok})
    return 0 if ok else 3


def cmd_bethe(run: Runner):
    from .qq_bethe import QFunctionTable, bethe_residual, find_zeros
    spec, run.config_hash = _load_spec(run.args)
    run.algebra = str(spec.alg.id)
    table = QFunctionTable(spec)
    region = tuple(float(x) for x in run.args.region.split(","))
    if len(region) != 4:
        raise ValidationError("--region needs re_lo,re_hi,im_lo,im_hi")
    zeros = find_zeros(table, run.args.node, region, count=run.args.count, step=run.args.step)
    rows = [{"zero": z, "bethe_residual": abs(bethe_residual(table, z, run.args.node))} for z in zeros]
    run.emit({"node": run.args.node, "zeros": rows})
    return 0


def cmd_monodromy(run: Runner):
    from .monodromy_data import monodromy_loop
    from .rep import adjoint_module, build_fundamental
    spec, run.config_hash = _load_spec(run.args)
    run.algebra = str(spec.alg.id)
    if not spec.singularities:
        raise ValidationError("the configuration has no additional singularities")
    mod = adjoint_module(spec.alg) if run.args.module == 0 else build_fundamental(spec.alg, run.args.module)
    lams = [_parse_complex(x) for x in run.args.lam]
    rows = []
    for j, s in enumerate(spec.singularities):
        for lam in lams:
            res = monodromy_loop(spec, mod, s.w, lam)
            rows.append({"singularity": j, "w": s.w, "lam": lam, "deviation": res.deviation,
                         "det_error": res.det_error})
    run.emit({"module": run.args.module, "loops": rows,
              "max_deviation": max(r["deviation"] for r in rows)})
    return 0


def cmd_tm_solve(run: Runner):
    from .connection import spec_to_json
    from .trivial_monodromy import build_system, solve_system
    obj, run.config_hash = _load_json(run.args.config) if run.args.config else ({}, None)
    algebra = run.args.algebra or obj.get("algebra")
    if not algebra:
        raise ValidationError("an algebra is required (--algebra or config)")
    alg = build_algebra(algebra)
    run.algebra = str(alg.id)
    k = run.args.k if run.args.k is not None else obj.get("k", 0.4)
    ell = run.args.ell or obj.get("ell")
    if ell is None:
        raise ValidationError("ell is required (--ell or config)")
    ell = [complex(x) if not isinstance(x, list) else complex(*x) for x in ell]
    system = build_system(alg, k, ell, run.args.J, extended=run.args.extended)
    sols = solve_system(system, seeds=run.args.seeds, rng_seed=run.args.seed)
    run.emit({"n_unknowns": system.n_unknowns, "n_equations": system.n_equations,
              "solutions": [{"residual": s.residual, "w": s.ws, "spec": spec_to_json(s.spec)} for s in sols]})
    return 0


def cmd_tm_nogo(run: Runner):
    from .trivial_monodromy import no_go_certificate
    alg = build_algebra(run.args.algebra)
    run.algebra = str(alg.id)
    ell = run.args.ell or [0.13 + 0.07 * i for i in range(alg.n)]
    cert = no_go_certificate(alg, run.args.k, [complex(x) for x in ell], J_size=run.args.J,
                             extended=run.args.extended, seeds=run.args.seeds, rng_seed=run.args.seed)
    run.emit(cert.as_dict())
    return 0


def cmd_canon(run: Runner):
    from .connection import spec_from_json, spec_to_json
    from .oper_gauge import Oper, canonical_form, ffh_normal_form, oper_from_spec
    obj, run.config_hash = _load_json(run.args.input)
    if run.args.transversal != "default":
        raise ValidationError("only the default transversal subspace is available from the command line")
    if "b" in obj:
        L = Oper.from_json(obj)
        ell = obj.get("ell")
    else:
        spec = spec_from_json(obj)
        L = oper_from_spec(spec)
        ell = list(spec.ell)
    run.algebra = str(L.alg.id)
    can, gauge = canonical_form(L)
    result = {"canonical": can.to_json(), "gauge_factors": len(gauge.factors)}
    if run.args.normal_form:
        if ell is None:
            raise ValidationError("ell is needed for the normal form")
        ell = [complex(x) if not isinstance(x, list) else complex(*x) for x in ell]
        nf = ffh_normal_form(can, ell, k=L.k)
        result["normal_form"] = spec_to_json(nf.spec)
        result["normal_form_residual"] = nf.residual
        result["conjugacy_gaps"] = [r.gap for r in nf.reports]
    run.emit(result)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="connection or template JSON")
    common.add_argument("--tol-profile", choices=["default", "strict"], default="default")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="directory for JSON/CSV output (default: JSON on stdout)")

    p = argparse.ArgumentParser(prog="operlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("algebra", parents=[common], help="discrete Lie-algebra data")
    s.add_argument("--id", required=True)
    s.add_argument("--full", action="store_true")
    s.set_defaults(fn=cmd_algebra)

    s = sub.add_parser("spectrum", parents=[common], help="spectra of the cyclic element")
    s.add_argument("--id", required=True)
    s.add_argument("--node", type=int)
    s.add_argument("--t", type=float)
    s.set_defaults(fn=cmd_spectrum)

    s = sub.add_parser("frobenius", parents=[common], help="Frobenius solutions at z = 0")
    s.add_argument("--module", type=int, default=1)
    s.add_argument("--orders", type=int, nargs=2, default=[40, 30])
    s.add_argument("--lam")
    s.set_defaults(fn=cmd_frobenius)

    s = sub.add_parser("asympt", parents=[common], help="asymptotic solution diagnostics")
    s.add_argument("--node", type=int, default=1)
    s.add_argument("--lam", default="0.5")
    s.add_argument("--z1", type=float, default=1e4)
    s.add_argument("--z2", type=float, default=4e4)
    s.add_argument("--radius", type=float, help="seed radius (default: automatic)")
    s.set_defaults(fn=cmd_asympt)

    s = sub.add_parser("qfun", parents=[common], help="Q-function samples on a real grid")
    s.add_argument("--node", type=int, default=1)
    s.add_argument("--grid", default="0:2:11")
    s.set_defaults(fn=cmd_qfun)

    s = sub.add_parser("qq-check", parents=[common], help="QQ-system residuals")
    s.add_argument("--grid", default="0:2:5")
    s.add_argument("--threshold", type=float, default=1e-6)
    s.set_defaults(fn=cmd_qq_check)

    s = sub.add_parser("bethe", parents=[common], help="Q-function zeros and Bethe residuals")
    s.add_argument("--node", type=int, default=1)
    s.add_argument("--region", default="-3,0,-0.2,0.2")
    s.add_argument("--count", type=int, default=3)
    s.add_argument("--step", type=float, default=0.25)
    s.set_defaults(fn=cmd_bethe)

    s = sub.add_parser("monodromy", parents=[common], help="loop monodromy around each singularity")
    s.add_argument("--module", type=int, default=1, help="fundamental node, 0 for the adjoint")
    s.add_argument("--lam", nargs="+", default=["0.3", "1.1"])
    s.set_defaults(fn=cmd_monodromy)

    s = sub.add_parser("tm-solve", parents=[common], help="solve the trivial-monodromy system")
    s.add_argument("--algebra")
    s.add_argument("--k", type=float)
    s.add_argument("--ell", type=float, nargs="+")
    s.add_argument("--J", type=int, default=1)
    s.add_argument("--seeds", type=int, default=200)
    s.add_argument("--extended", action="store_true")
    s.set_defaults(fn=cmd_tm_solve)

    s = sub.add_parser("tm-nogo", parents=[common], help="twisted obstruction certificate")
    s.add_argument("--algebra", required=True)
    s.add_argument("--k", type=float, default=0.4)
    s.add_argument("--ell", type=float, nargs="+")
    s.add_argument("--J", type=int, default=1)
    s.add_argument("--seeds", type=int, default=50)
    s.add_argument("--extended", action="store_true")
    s.set_defaults(fn=cmd_tm_nogo)

    s = sub.add_parser("canon", parents=[common], help="canonical form (and normal form) of an oper")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--transversal", default="default")
    s.add_argument("--normal-form", action="store_true")
    s.set_defaults(fn=cmd_canon)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    set_profile(args.tol_profile)
    run = Runner(args)
    try:
        return args.fn(run)
    except ValidationError as exc:
        print(f"operlab {args.command}: invalid input: {exc}", file=sys.stderr)
        return 2
    except (NumericFailure, OperlabError) as exc:
        print(f"operlab {args.command}: numerical failure: {exc}", file=sys.stderr)
        report = getattr(exc, "report", None)
        if report:
            print(json.dumps(_jsonable(report)), file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"operlab {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
