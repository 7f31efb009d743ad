"""Command-line front end: bound tables, Monte Carlo runs, spectral scans,
and the verification suite.

Numeric options accept either a single value or a grid: ``start:stop:count``
(inclusive, linear) or ``log:start:stop:count`` (log-spaced); exactly one
gridded option per invocation becomes the table axis.  Grids with a
negative start need the ``--K=-2:2:5`` form (argparse reads a bare
``-2:2:5`` as a flag).  A JSON config file supplies defaults (flat
key/value, keys matching the long option names); explicit command-line
options win, unknown keys are rejected.

Exit codes: 0 pass, 1 bound violation / failed suite, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import bounds, simulate, spectral, verify
from . import geometry as geo


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# grids and config
# ---------------------------------------------------------------------------

def parse_grid(text) -> np.ndarray:
    """'2.5' -> [2.5]; 'a:b:n' -> n linear points; 'log:a:b:n' -> log-spaced."""
    if isinstance(text, (int, float)):
        return np.array([float(text)])
    s = str(text).strip()
    logspace = s.startswith("log:")
    if logspace:
        s = s[4:]
    parts = s.split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise UsageError(f"bad grid {text!r}: expected start:stop:count")
    a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise UsageError("grid count must be >= 1")
    if logspace:
        if a <= 0 or b <= 0:
            raise UsageError("log grid needs positive endpoints")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def merge_config(args: argparse.Namespace, known: List[str]) -> Dict:
    """Fold a JSON config under the explicit CLI values; reject unknowns."""
    merged = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        for key, val in raw.items():
            opt = key.replace("-", "_")
            if opt not in known:
                raise UsageError(f"unknown config key {key!r}")
            merged[opt] = val
    for key in known:
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            merged[key] = cli_val
    return merged


def _write_outputs(out_dir: Optional[str], stem: str, formats: List[str],
                   header: List[str], rows: List[List], meta: Dict,
                   plot_xy=None) -> None:
    if not out_dir:
        return
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in formats:
        with open(out / f"{stem}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            w.writerows(rows)
    if "json" in formats:
        payload = dict(meta)
        payload["rows"] = [dict(zip(header, r)) for r in rows]
        (out / f"{stem}.json").write_text(json.dumps(payload, indent=2))
    if "svg" in formats and plot_xy is not None:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
        xlab, ylab, xs, ys = plot_xy
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(xs, ys, marker="o", ms=2.5)
        ax.set_xlabel(xlab)
        ax.set_ylabel(ylab)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(out / f"{stem}.svg")
        plt.close(fig)


# ---------------------------------------------------------------------------
# bounds subcommand
# ---------------------------------------------------------------------------

def _pack_from(params: Dict) -> geo.CurvatureBounds:
    return geo.CurvatureBounds(
        K_Z=params.get("K", 0.0), K_0=params.get("K0", params.get("K", 0.0)),
        theta_H=params.get("theta_H", 0.0), sigma=params.get("sigma", 0.0),
        theta_II=params.get("theta_II", 0.0), k=params.get("k", 0.0),
        r0=params.get("r0", 1.0), Z_sup=params.get("z_sup", 0.0),
        Z_collar=params.get("z_collar", params.get("z_sup", 0.0)))


#: name -> (grid axis, required params, row function)
BOUND_REGISTRY = {
    "thm1": ("t", ["K"], lambda p, t: {
        "value": bounds.grad_bound_closed(p["K"], t).value}),
    "thm2": ("t", ["K", "alpha0"], lambda p, t: (lambda r: {
        "value": r.value, "minimizer_s": r.minimizer_t})(
        bounds.dirichlet_grad_bound(p["K"], p["alpha0"], t))),
    "thm3": ("t", ["K_phi", "phi_sup"], lambda p, t: {
        "value": bounds.neumann_grad_bound(p["K_phi"], p["phi_sup"], t).value}),
    "cor-est": ("t", ["K", "sigma", "theta_II", "k", "r0", "z_collar", "d"],
                lambda p, t: (lambda r: {
                    "value_s": r.value_s, "value_t": r.value_t,
                    "phi_sup": r.phi_sup, "k_phi": r.k_phi, "r1": r.r1})(
                    bounds.neumann_explicit_bound(_pack_from(p), int(p["d"]),
                                                  t, t))),
    "thm-c2": ("t", ["K", "u_sup", "Lu_sup"], lambda p, t: {
        "value": bounds.c2_bound(p["K"], t, p["u_sup"], p["Lu_sup"]).value}),
    "cor-min": ("K", ["u_sup", "Lu_sup"], lambda p, K: (lambda r: {
        "value": r.value, "minimizer_t": r.minimizer_t})(
        bounds.c2_bound_minimized(K, p["u_sup"], p["Lu_sup"]))),
    "cor-1": ("delta", ["K", "u_sup", "Lu_sup"], lambda p, d: {
        "value": bounds.c2_bound_simple(bounds.neg(p["K"]), d, p["u_sup"],
                                        p["Lu_sup"]).value}),
    "c1-d": ("delta", ["K", "alpha0", "u_sup", "Lu_sup"], lambda p, d: {
        "value": bounds.c2_dirichlet_bound(bounds.neg(p["K"]), p["alpha0"], d,
                                           p["u_sup"], p["Lu_sup"]).value}),
    "c1-n": ("delta", ["K_phi", "phi_sup", "u_sup", "Lu_sup"], lambda p, d: {
        "value": bounds.c2_neumann_bound(bounds.neg(p["K_phi"]), p["phi_sup"],
                                         d, p["u_sup"], p["Lu_sup"]).value}),
    "cor-c1-d": ("delta", ["K", "sigma", "theta_II", "k", "r0", "z_collar",
                           "d", "u_sup", "Lu_sup"], lambda p, dl: {
        "value": bounds.c2_neumann_explicit(_pack_from(p), int(p["d"]), dl,
                                            p["u_sup"], p["Lu_sup"]).value}),
    "iso-d": ("lam1", ["K", "alpha0"], lambda p, l1: {
        "value": bounds.iso_explicit_dirichlet(p["K"], p["alpha0"], l1)}),
    "iso-n": ("lam1", ["K_phi", "phi_sup"], lambda p, l1: {
        "value": bounds.iso_explicit_neumann(p["K_phi"], p["phi_sup"], l1)}),
    "eigen": ("lam", ["K_minus"], lambda p, lam: (lambda r: {
        "value": r.value, "minimizer_t": r.minimizer_t,
        "printed_form": bounds.eigen_grad_bound_printed(lam, p["K_minus"])})(
        bounds.eigen_grad_bound(lam, p["K_minus"]))),
    "eigen-d": ("lam", ["K_minus", "alpha0"], lambda p, lam: (lambda r: {
        "value": r.value, "minimizer_t": r.minimizer_t})(
        bounds.dirichlet_eigen_bound(lam, p["K_minus"], p["alpha0"]))),
}

_BOUND_PARAM_DEFAULTS = {
    "K": 0.0, "K0": None, "K_phi": 0.0, "K_minus": 0.0, "alpha0": 0.0,
    "phi_sup": 1.0, "sigma": 0.0, "theta_II": 0.0, "theta_H": 0.0, "k": 0.0,
    "r0": 1.0, "z_sup": 0.0, "z_collar": 0.0, "d": 2, "u_sup": 1.0,
    "Lu_sup": 1.0,
}


def cmd_bounds(args) -> int:
    known = ["name", "t", "delta", "lam", "lam1", "out", "formats"] + \
        list(_BOUND_PARAM_DEFAULTS)
    cfg = merge_config(args, known)
    name = cfg.get("name")
    if name not in BOUND_REGISTRY:
        raise UsageError(f"unknown bound name {name!r}; choose from "
                         f"{sorted(BOUND_REGISTRY)}")
    axis, required, fn = BOUND_REGISTRY[name]
    params = {}
    for key, default in _BOUND_PARAM_DEFAULTS.items():
        val = cfg.get(key, default)
        if val is not None and key in required:
            params[key] = float(parse_grid(val)[0]) if key != "d" else float(val)
        elif val is not None:
            params[key] = float(val) if not isinstance(val, str) \
                else float(parse_grid(val)[0])
    missing = [k for k in required if k not in params]
    if missing:
        raise UsageError(f"{name} needs parameters {missing}")
    if cfg.get(axis) is None:
        raise UsageError(f"{name} needs the grid parameter --{axis}")
    grid = parse_grid(cfg[axis])
    rows = []
    header = None
    for x in grid:
        row = fn(params, float(x))
        if header is None:
            header = [axis] + list(row)
        rows.append([float(x)] + [row[k] for k in list(row)])
    colw = max(12, max(len(h) for h in header) + 2)
    print("".join(h.rjust(colw) for h in header))
    for r in rows:
        print("".join(f"{v:>{colw}.6g}" if isinstance(v, float) else
                      str(v).rjust(colw) for v in r))
    formats = (cfg.get("formats") or "csv").split(",")
    ys = [r[1] for r in rows]
    _write_outputs(cfg.get("out"), f"bounds-{name}", formats, header, rows,
                   {"command": "bounds", "name": name, "params": params},
                   plot_xy=(axis, header[1], [r[0] for r in rows], ys))
    return 0


# ---------------------------------------------------------------------------
# mc subcommand
# ---------------------------------------------------------------------------

_PAYOFFS = {
    "one": (lambda X: np.ones(len(X)), 1.0),
    "indicator": (lambda X: (X[:, 0] > 0).astype(float), 1.0),
    "sin": (lambda X: np.sin(X[:, 0]), 1.0),
    "cos": (lambda X: np.cos(X[:, 0]), 1.0),
    "coord": (lambda X: X[:, 0], math.inf),
    "z": (lambda X: X[:, -1], 1.0),
}


def cmd_mc(args) -> int:
    known = ["model", "estimator", "bc", "u", "t", "x", "paths", "seed",
             "dt", "eps", "out", "formats"]
    cfg = merge_config(args, known)
    catalogue = geo.model_catalogue()
    name = cfg.get("model")
    if name not in catalogue:
        raise UsageError(f"unknown model {name!r}; choose from {sorted(catalogue)}")
    model = catalogue[name]
    estimator = cfg.get("estimator", "semigroup")
    bc = cfg.get("bc", "neumann" if geo.has_boundary(model) else "free")
    u_name = cfg.get("u", "indicator")
    if u_name not in _PAYOFFS:
        raise UsageError(f"unknown payoff {u_name!r}; choose from {sorted(_PAYOFFS)}")
    payoff, u_sup = _PAYOFFS[u_name]
    t = float(cfg.get("t", 1.0))
    paths = int(cfg.get("paths", 100_000))
    if paths < 1:
        raise UsageError("--paths must be >= 1")
    seed = int(cfg.get("seed", 0))
    dt = float(cfg.get("dt", 1e-3))
    x_raw = cfg.get("x", None)
    if x_raw is None:
        raise UsageError("--x starting point required")
    x0 = np.atleast_1d(np.array(json.loads(x_raw) if isinstance(x_raw, str)
                                else x_raw, dtype=float))
    sim_cfg = simulate.SimConfig(dt=dt, horizon=t, n_paths=paths, seed=seed)

    t_start = time.perf_counter()
    bound_val = None
    if estimator == "semigroup":
        if bc == "free":
            est = simulate.run_free(model, sim_cfg, payoff, x0)
            value, se = est.u[0].value, est.u[0].se
        elif bc == "dirichlet":
            est = simulate.run_killed(model, sim_cfg, payoff, x0)
            value, se = est.u[0].value, est.u[0].se
            print(f"survival psi = {est.survival[0].value:.6f} "
                  f"+- {est.survival[0].se:.2g}")
        elif bc == "neumann":
            est = simulate.run_reflected(model, sim_cfg, payoff, x0)
            value, se = est.u[0].value, est.u[0].se
            print(f"mean local time = {est.local_time[0].value:.6f} "
                  f"+- {est.local_time[0].se:.2g}")
        else:
            raise UsageError(f"unknown bc {bc!r}")
        if math.isfinite(u_sup):
            bound_val = u_sup
        label = f"P_t u ({bc})"
    elif estimator == "bismut":
        try:
            grad = simulate.bismut_gradient(model, payoff, t, x0, sim_cfg)
        except geo.UnsupportedModelError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        value, se = grad.norm, grad.norm_se
        label = "|grad P_t u|"
        bound_val = _gradient_bound(model, bc, t) * u_sup \
            if math.isfinite(u_sup) else None
    elif estimator == "fd":
        mode = {"dirichlet": "killed", "neumann": "reflected",
                "free": "free"}.get(bc)
        if mode is None:
            raise UsageError(f"unknown bc {bc!r}")
        eps = float(cfg.get("eps", 0.05))
        grad = simulate.fd_gradient(model, payoff, t, x0, sim_cfg, eps=eps,
                                    mode=mode)[0]
        value, se = grad.norm, grad.norm_se
        label = "|grad P_t u| (fd)"
        bound_val = _gradient_bound(model, bc, t) * u_sup \
            if math.isfinite(u_sup) else None
    else:
        raise UsageError(f"unknown estimator {estimator!r}")
    runtime_ms = (time.perf_counter() - t_start) * 1e3

    print(f"{label} = {value:.6f} +- {se:.2g}   "
          f"(n={paths}, dt={dt:g}, t={t:g}, {runtime_ms:.0f} ms)")
    violated = False
    if bound_val is not None and math.isfinite(bound_val):
        violated = value - 3.0 * se > bound_val
        rel = "VIOLATED" if violated else "satisfied"
        print(f"bound = {bound_val:.6f}   ({rel}, margin "
              f"{bound_val - value:+.6f}, 3*SE = {3 * se:.2g})")
    if cfg.get("out"):
        payload = {"command": "mc", "config": {k: cfg.get(k) for k in known},
                   "seed": seed, "value": value, "se": se,
                   "bound": bound_val, "runtime_ms": runtime_ms}
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / f"mc-{name}-{estimator}.json").write_text(
            json.dumps(payload, indent=2))
    return 1 if violated else 0


def _gradient_bound(model, bc: str, t: float) -> float:
    pack = geo.curvature_bounds(model)
    if bc == "free" or not geo.has_boundary(model):
        return bounds.grad_bound_closed(pack.K_Z, t).value
    d = geo.dim(model)
    if bc == "dirichlet":
        a0 = bounds.alpha0(pack.theta_H, pack.K_0, d, pack.Z_sup)
        return bounds.dirichlet_grad_bound(pack.K_Z, a0, t).value
    if bc == "neumann":
        return bounds.neumann_explicit_bound(pack, d, t, t).value_s
    raise UsageError(f"unknown bc {bc!r}")


# ---------------------------------------------------------------------------
# spectral subcommand
# ---------------------------------------------------------------------------

def cmd_spectral(args) -> int:
    known = ["domain", "bc", "lmax", "length", "out", "formats"]
    cfg = merge_config(args, known)
    domain = cfg.get("domain", "interval")
    bc = cfg.get("bc", "dirichlet")
    lmax = int(cfg.get("lmax", 32))
    length = float(cfg.get("length", math.pi))
    if lmax < 2:
        raise UsageError("--lmax must be >= 2")
    if domain == "interval":
        basis = spectral.IntervalBasis(length, bc)
    elif domain == "circle":
        basis = spectral.CircleBasis(length)
    elif domain == "rectangle":
        basis = spectral.RectangleBasis(length, length, bc)
    else:
        raise UsageError(f"unknown domain {domain!r}")
    lam_list = [float(j) for j in range(1, lmax + 1)]
    f = spectral.flat_spectrum(basis, lmax + 1.0)
    table = spectral.scaling_scan(basis, f, lam_list)
    slopes = table.slopes()
    header = ["lam", "n_modes", "n_modes_eig", "sup_u", "sup_grad", "sup_lap"]
    rows = [[r.lam, r.n_modes, r.n_modes_eig, r.sup_u, r.sup_grad, r.sup_lap]
            for r in table.rows]
    print(f"{'lam':>6} {'modes':>6} {'eig':>5} {'sup_u':>12} "
          f"{'sup_grad':>12} {'sup_lap':>12}")
    for r in rows:
        print(f"{r[0]:>6g} {r[1]:>6d} {r[2]:>5d} {r[3]:>12.6g} "
              f"{r[4]:>12.6g} {r[5]:>12.6g}")
    print(f"slopes: sup_u {slopes['sup_u']:+.3f}  "
          f"sup_grad {slopes['sup_grad']:+.3f}  "
          f"sup_lap {slopes['sup_lap']:+.3f}   (||f||_2 = {table.f_l2:.6g})")
    chain = spectral.chain_inequality_holds(
        table, "closed" if domain == "circle" else bc)
    print(f"proof-chain inequality: {'holds' if all(chain) else 'VIOLATED'} "
          f"on {sum(chain)}/{len(chain)} bands")
    formats = (cfg.get("formats") or "csv").split(",")
    _write_outputs(cfg.get("out"), f"spectral-{domain}-{bc}", formats, header,
                   rows, {"command": "spectral", "domain": domain, "bc": bc,
                          "slopes": slopes, "f_l2": table.f_l2},
                   plot_xy=("lam", "sup_grad", [r[0] for r in rows],
                            [r[4] for r in rows]))
    return 0 if all(chain) else 1


# ---------------------------------------------------------------------------
# verify subcommand
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    known = ["suite", "seed", "paths", "dt", "out", "formats"]
    cfg = merge_config(args, known)
    suite = cfg.get("suite", "all")
    seed = int(cfg.get("seed", 0))
    ids = "all" if suite == "all" else [s.strip() for s in suite.split(",")]
    if ids != "all":
        unknown = [i for i in ids if i not in verify.REGISTRY]
        if unknown:
            raise UsageError(f"unknown suite/experiment ids {unknown}; "
                             f"known: {sorted(verify.REGISTRY)}")
    paths = cfg.get("paths")
    dt = cfg.get("dt")
    report = verify.run(ids, seed=seed,
                        paths=int(paths) if paths is not None else None,
                        dt=float(dt) if dt is not None else None,
                        suite_name=suite, verbose=True)
    print(f"suite {report.suite!r} seed {report.seed}: "
          f"{'PASS' if report.passed else 'FAIL'}")
    if cfg.get("out"):
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        payload = json.loads(report.to_json())
        # a run is reproducible from (config, seed): embed the effective one
        payload["config"] = {k: cfg.get(k) for k in known}
        (out / "report.json").write_text(json.dumps(payload, indent=2))
        (out / "report.csv").write_text(report.to_csv())
        print(f"wrote {out / 'report.json'} and {out / 'report.csv'}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heatbounds",
        description="gradient/isoperimetric/spectral bounds on model "
                    "manifolds, with Monte Carlo verification")
    sub = ap.add_subparsers(dest="command", required=True)

    pb = sub.add_parser("bounds", help="evaluate a named bound over a grid")
    pb.add_argument("--name", required=False)
    pb.add_argument("--config")
    for key in ("t", "delta", "lam", "lam1"):
        pb.add_argument(f"--{key}")
    for key in _BOUND_PARAM_DEFAULTS:
        pb.add_argument(f"--{key.replace('_', '-')}", dest=key)
    pb.add_argument("--out")
    pb.add_argument("--formats", help="comma list of csv,json,svg")
    pb.set_defaults(fn=cmd_bounds)

    pm = sub.add_parser("mc", help="Monte Carlo estimate with bound check")
    pm.add_argument("--config")
    pm.add_argument("--model")
    pm.add_argument("--estimator", choices=["semigroup", "bismut", "fd"])
    pm.add_argument("--bc", choices=["free", "dirichlet", "neumann"])
    pm.add_argument("--u")
    pm.add_argument("--t")
    pm.add_argument("--x")
    pm.add_argument("--paths")
    pm.add_argument("--seed")
    pm.add_argument("--dt")
    pm.add_argument("--eps")
    pm.add_argument("--out")
    pm.add_argument("--formats")
    pm.set_defaults(fn=cmd_mc)

    ps = sub.add_parser("spectral", help="band-projection scaling scan")
    ps.add_argument("--config")
    ps.add_argument("--domain", choices=["interval", "circle", "rectangle"])
    ps.add_argument("--bc", choices=["dirichlet", "neumann"])
    ps.add_argument("--lmax")
    ps.add_argument("--length")
    ps.add_argument("--out")
    ps.add_argument("--formats")
    ps.set_defaults(fn=cmd_spectral)

    pv = sub.add_parser("verify", help="run the verification experiments")
    pv.add_argument("--config")
    pv.add_argument("--suite")
    pv.add_argument("--seed")
    pv.add_argument("--paths")
    pv.add_argument("--dt")
    pv.add_argument("--out")
    pv.add_argument("--formats")
    pv.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
