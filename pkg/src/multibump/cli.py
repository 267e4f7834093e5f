"""Command-line front end.

Subcommands map one-to-one onto the library modules:

    verify-g    series inequality margins over a dimension range
    gammas      interaction constants, quadrature vs closed form
    balance     balancing solve (single k or a sweep)
    spectrum    reduced-matrix spectra and frequency determinants
    reduce      fixed-point iteration for the reduced system
    nondegen    non-degeneracy block spectra and determinants
    error-norm  sampled weighted sup norm of the ansatz error

Every run writes CSV + JSON into the output directory together with a
manifest (config echo, library versions, wall time) and a quick-look PNG.
Numbers in the delimited outputs carry 17 significant digits so reruns
with the same config and seed are byte-identical (the manifest is exempt:
it records versions and timing).  Config files are flat `key = value`
lines with `#` comments; command-line flags win over file values.
"""

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import errfield, nondegen, plots, reduced, specfun
from .balance import solve_balance, solve_finite, substitution_identity
from .bubbles import gamma_constants, gamma_oracle, j_integral_quad
from .circulant import build_T, det_Dnu, lambda_eigs
from .model import (Configuration, ParameterError, ProblemParams, xi_norm)

CONFIG_KEYS = {
    "n": int, "m": float, "k": int, "theta_K": float, "c0": float,
    "r0": float, "delta": float, "seed": int, "grid": int, "tol": float,
    "out": str, "sweep": str, "max_iter": int, "samples": int,
}

DEFAULTS = {"seed": 0, "grid": 2000, "tol": None, "out": "out",
            "sweep": None, "max_iter": 40, "samples": 100000}


@dataclass
class RunConfig:
    command: str
    params: ProblemParams
    sweep: list | None
    output_dir: Path
    seed: int
    grid: int
    tol: float | None
    max_iter: int
    samples: int


def fmt(x) -> str:
    """17 significant digits: enough to round-trip a double exactly."""
    return format(float(x), ".17g")


def parse_config(path: str) -> dict:
    """Flat key = value file; '#' starts a comment; unknown keys rejected."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise ValueError(f"{path}:{lineno}: bad value for {key!r}: {value!r}")
    return out


def _parse_sweep(text: str) -> list:
    return [int(tok) for tok in text.replace(",", " ").split()]


def build_run_config(args) -> RunConfig:
    settings = dict(DEFAULTS)
    settings.update({"n": 5, "m": 2.5, "k": 16, "theta_K": 3.0, "c0": 1.0,
                     "r0": 1.0, "delta": 0.25})
    if args.config:
        settings.update(parse_config(args.config))
    for key in ("n", "m", "k", "out", "seed", "grid", "tol"):
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    for key in ("sweep", "max_iter", "samples"):
        val = getattr(args, key, None)
        if val is not None:
            settings[key] = val
    params = ProblemParams(n=settings["n"], m=settings["m"], k=settings["k"],
                           theta_K=settings["theta_K"], c0=settings["c0"],
                           r0=settings["r0"], delta=settings["delta"])
    sweep = settings["sweep"]
    if isinstance(sweep, str):
        sweep = _parse_sweep(sweep)
    return RunConfig(command=args.command, params=params, sweep=sweep,
                     output_dir=Path(settings["out"]), seed=settings["seed"],
                     grid=settings["grid"], tol=settings["tol"],
                     max_iter=settings["max_iter"], samples=settings["samples"])


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in row])


def write_json(path: Path, obj):
    def _plain(o):
        if isinstance(o, (np.bool_, np.integer, np.floating)):
            return o.item()
        raise TypeError(f"not JSON serializable: {type(o).__name__}")

    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_plain)
        fh.write("\n")


def write_manifest(cfg: RunConfig, outputs, t0: float):
    import matplotlib
    import scipy

    manifest = {
        "command": cfg.command,
        "config": {
            "n": cfg.params.n, "m": cfg.params.m, "k": cfg.params.k,
            "theta_K": cfg.params.theta_K, "c0": cfg.params.c0,
            "r0": cfg.params.r0, "delta": cfg.params.delta,
            "seed": cfg.seed, "grid": cfg.grid, "tol": cfg.tol,
            "sweep": cfg.sweep, "max_iter": cfg.max_iter,
            "samples": cfg.samples, "out": str(cfg.output_dir),
        },
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__,
        },
        "wall_time_s": time.time() - t0,
        "outputs": sorted(outputs),
    }
    write_json(cfg.output_dir / "manifest.json", manifest)


# ---------------------------------------------------------------------------
# subcommand drivers (each returns (ok, outputs list))
# ---------------------------------------------------------------------------

def cmd_verify_g(cfg: RunConfig):
    tol = cfg.tol if cfg.tol is not None else 1e-12
    reports = specfun.verify_condition(5, 48, cfg.grid, tol)
    rows = [(r.n, float(r.min_margin), float(r.endpoint_margins[0]),
             float(r.endpoint_margins[1]), float(r.tail_bound), int(r.holds))
            for r in reports]
    write_csv(cfg.output_dir / "condition.csv",
              ["n", "min_margin", "margin_limit_zero", "margin_limit_pi",
               "tail_bound", "holds"], rows)
    all_hold = all(r.holds for r in reports)
    write_json(cfg.output_dir / "summary.json", {
        "all_hold": all_hold, "n_min": 5, "n_max": 48,
        "grid_size": cfg.grid,
        "min_margin_overall": min(float(r.min_margin) for r in reports),
    })
    plots.condition_figure([r.n for r in reports],
                           [r.min_margin for r in reports],
                           cfg.output_dir / "condition.png")
    return all_hold, ["condition.csv", "summary.json", "condition.png"]


def cmd_gammas(cfg: RunConfig):
    tol = cfg.tol if cfg.tol is not None else 1e-8
    n, m = cfg.params.n, cfg.params.m
    quad = gamma_constants(n, m)
    oracle = gamma_oracle(n, m)
    rows, rels = [], []
    for name in ("gamma1", "gamma2", "gamma3", "gamma4"):
        qv, ov = getattr(quad, name), getattr(oracle, name)
        rel = abs(qv - ov) / abs(ov)
        rels.append(rel)
        rows.append((name, float(qv), float(ov), float(rel)))
    from scipy.special import gamma as gamma_fn

    base = j_integral_quad(0.0, 3.5, 5)
    base_exact = np.pi**2.5 / gamma_fn(3.5)
    rows.append(("base_integral", float(base), float(base_exact),
                 float(abs(base - base_exact) / base_exact)))
    write_csv(cfg.output_dir / "gammas.csv",
              ["name", "quadrature", "closed_form", "rel_error"], rows)
    ok = max(rels) <= tol and abs(base - base_exact) / base_exact <= 1e-10
    write_json(cfg.output_dir / "summary.json",
               {"n": n, "m": m, "max_rel_error": float(max(rels)),
                "tolerance": tol, "ok": ok})
    return ok, ["gammas.csv", "summary.json"]


def cmd_balance(cfg: RunConfig):
    tol = cfg.tol if cfg.tol is not None else 1e-12
    ks = cfg.sweep or [cfg.params.k]
    gam = gamma_oracle(cfg.params.n, cfg.params.m)

    def solve_one(k):
        params = ProblemParams(n=cfg.params.n, m=cfg.params.m, k=k,
                               theta_K=cfg.params.theta_K, c0=cfg.params.c0,
                               r0=cfg.params.r0, delta=cfg.params.delta)
        bal, scales = solve_balance(params, gam)
        fin, _ = solve_finite(params, gam)
        ident = substitution_identity(bal, params, gam, scales.mu)
        return params, bal, scales, fin, ident

    with ThreadPoolExecutor() as ex:
        results = list(ex.map(solve_one, ks))

    rows, ok = [], True
    for params, bal, scales, fin, ident in results:
        ok &= max(abs(bal.residual_1), abs(bal.residual_2)) <= tol
        ok &= abs(ident) <= 1e-10
        rows.append((params.k, float(bal.Lambda), float(bal.R0),
                     float(scales.mu), float(scales.mu * bal.R0),
                     float(bal.residual_1), float(bal.residual_2),
                     float(ident), float(fin.Lambda0), float(fin.offset)))
    write_csv(cfg.output_dir / "balance.csv",
              ["k", "Lambda", "R0", "mu", "mu_R0", "residual_1", "residual_2",
               "identity_residual", "Lambda_finite", "offset_finite"], rows)
    mu_R0 = [abs(r[4]) for r in rows]
    write_json(cfg.output_dir / "summary.json", {
        "k_sweep": ks, "ok": ok,
        "mu_R0_spread": float(max(mu_R0) / min(mu_R0)) if mu_R0 else None,
    })
    plots.balance_figure(ks, mu_R0, cfg.output_dir / "balance.png")
    return ok, ["balance.csv", "summary.json", "balance.png"]


def cmd_spectrum(cfg: RunConfig):
    ks = cfg.sweep or [16, 32, 64]
    gam = gamma_oracle(cfg.params.n, cfg.params.m)
    n = cfg.params.n

    def one(k):
        params = ProblemParams(n=n, m=cfg.params.m, k=k,
                               theta_K=cfg.params.theta_K, c0=cfg.params.c0,
                               r0=cfg.params.r0, delta=cfg.params.delta)
        bal, scales = solve_balance(params, gam)
        T = build_T(params, scales, bal.Lambda, gam)
        l1, l2, l3 = lambda_eigs(T)
        D = det_Dnu(T)
        nu = np.arange(k)
        nu_eff = np.minimum(nu, k - nu)
        scaled = np.full(k, np.nan)
        scaled[1:] = D[1:] / (nu_eff[1:] ** 2.0 * k ** (2.0 * n - 4.0))
        return k, l1, l2, l3, D, scaled

    with ThreadPoolExecutor() as ex:
        results = list(ex.map(one, ks))

    outputs, ok, curves, brackets = [], True, [], []
    for k, l1, l2, l3, D, scaled in results:
        name = f"spectrum_k{k}.csv"
        rows = [(int(nu), float(l1[nu].real), float(l2[nu].imag),
                 float(l3[nu].real), float(D[nu]),
                 "" if nu == 0 else float(scaled[nu]))
                for nu in range(k)]
        write_csv(cfg.output_dir / name,
                  ["nu", "lambda1", "lambda2_imag", "lambda3", "D_nu",
                   "D_scaled"], rows)
        outputs.append(name)
        ok &= bool(np.all(D[1:] > 0.0))
        brackets.extend(scaled[1:].tolist())
        curves.append((k, np.arange(1, k) / k, scaled[1:]))
    ratio = float(max(brackets) / min(brackets))
    ok &= ratio <= 10.0
    write_json(cfg.output_dir / "summary.json", {
        "k_sweep": ks, "scaled_min": float(min(brackets)),
        "scaled_max": float(max(brackets)), "bracket_ratio": ratio, "ok": ok,
    })
    plots.spectrum_figure(curves, cfg.output_dir / "spectrum.png")
    return ok, outputs + ["summary.json", "spectrum.png"]


def cmd_reduce(cfg: RunConfig):
    tol = cfg.tol if cfg.tol is not None else 1e-6
    params = cfg.params
    gam = gamma_oracle(params.n, params.m)
    bal, scales = solve_balance(params, gam)
    T = build_T(params, scales, bal.Lambda, gam)
    rng = np.random.default_rng(cfg.seed)
    amp = 0.3 / scales.mu
    q0 = Configuration(amp * rng.standard_normal(params.k),
                       amp * rng.standard_normal(params.k),
                       amp * rng.standard_normal(params.k), 0.0)
    qstar, trace = reduced.fixed_point(params, scales, bal, gam, T, q0=q0,
                                       max_iter=cfg.max_iter, tol=tol)
    rows = [(t["iter"], float(t["xi_norm"]), float(t["step"]),
             float(t["ratio"]), float(t["gamma"]), float(t["residual"]))
            for t in trace]
    write_csv(cfg.output_dir / "reduce_trace.csv",
              ["iter", "xi_norm", "step", "ratio", "gamma", "residual"], rows)
    final_xi = xi_norm(qstar, scales, params.n)
    ball = scales.d ** (-scales.tau2)
    converged = bool(trace and trace[-1]["step"] <= tol)
    ok = converged and final_xi <= ball
    write_json(cfg.output_dir / "summary.json", {
        "k": params.k, "iterations": len(trace), "converged": converged,
        "final_xi_norm": float(final_xi), "ball_radius": float(ball),
        "contraction_ratio": float(trace[1]["ratio"]) if len(trace) > 1 else None,
        "ok": ok,
    })
    plots.trace_figure(trace, cfg.output_dir / "reduce.png")
    return ok, ["reduce_trace.csv", "summary.json", "reduce.png"]


def cmd_nondegen(cfg: RunConfig):
    ks = cfg.sweep or [cfg.params.k]
    gam = gamma_oracle(cfg.params.n, cfg.params.m)

    def one(k):
        params = ProblemParams(n=cfg.params.n, m=cfg.params.m, k=k,
                               theta_K=cfg.params.theta_K, c0=cfg.params.c0,
                               r0=cfg.params.r0, delta=cfg.params.delta)
        fin, scales = solve_finite(params, gam)
        bl = nondegen.build_blocks(params, scales, fin.r, fin.Lambda0,
                                   offset=fin.offset, gammas=gam)
        return params, scales, bl

    with ThreadPoolExecutor() as ex:
        results = list(ex.map(one, ks))

    outputs, ok, curves, brackets = [], True, [], []
    summary = {"k_sweep": ks}
    for params, scales, bl in results:
        k = params.k
        trips = nondegen.eigen_blocks(bl)
        scaled = nondegen.det_hat_scaled(bl)
        name = f"nondegen_k{k}.csv"
        rows = []
        for t in trips:
            rows.append((t.nu, float(t.a), float(t.b), float(abs(t.c_imag)),
                         float(t.f), float(abs(t.e_imag)), float(t.g_eig),
                         float(t.det_hat),
                         "" if t.nu == 0 else float(scaled[t.nu - 1])))
        write_csv(cfg.output_dir / name,
                  ["nu", "a", "b", "abs_c", "f", "abs_e", "g", "det_hat",
                   "neg_det_scaled"], rows)
        outputs.append(name)
        ok &= bool(np.all(scaled > 0.0))
        brackets.extend(scaled.tolist())
        curves.append((k, np.arange(1, k) / k, scaled))
        if k <= 32:
            freq, dense = nondegen.logdet_comparison(bl)
            summary[f"logdet_freq_k{k}"] = freq
            summary[f"logdet_dense_k{k}"] = dense
            ok &= abs(freq - dense) <= 1e-8 * abs(dense)
    ratio = float(max(brackets) / min(brackets))
    ok &= ratio <= 10.0
    summary.update({"bracket_ratio": ratio, "ok": ok})
    write_json(cfg.output_dir / "summary.json", summary)
    plots.nondegen_figure(curves, cfg.output_dir / "nondegen.png")
    return ok, outputs + ["summary.json", "nondegen.png"]


def cmd_error_norm(cfg: RunConfig):
    params = cfg.params
    bal, scales = solve_balance(params)
    est = errfield.error_norm_estimate(params, scales, bal.Lambda,
                                       N=cfg.samples, seed=cfg.seed)
    # a small point cloud for plotting: weighted values vs center distance
    pts = errfield.sample_points(params, scales, 2000, cfg.seed + 1)
    from .model import unperturbed_centers

    Q = unperturbed_centers(params.k, params.n, scales.R)
    L = np.full(params.k, bal.Lambda)
    vals = (np.abs(errfield.eval_E(pts, Q, L, params, scales))
            / errfield.weight_W(pts, Q, params, scales))
    j, zone = errfield.classify(pts, params, scales)
    dist = np.linalg.norm(pts - Q[j], axis=1)
    zones = np.array(["inner", "middle", "outer"])
    write_csv(cfg.output_dir / "error_samples.csv",
              ["dist_to_center", "weighted_error", "zone"],
              [(float(d), float(v), zones[z])
               for d, v, z in zip(dist, vals, zone)])
    jz, az = errfield.classify(est.argmax_point[None, :], params, scales)
    write_json(cfg.output_dir / "summary.json", {
        "k": params.k, "estimate": float(est.value), "samples": est.samples,
        "argmax_zone": str(zones[az[0]]),
        "argmax_center_distance": float(
            np.linalg.norm(est.argmax_point - Q[jz[0]])),
        "seed": cfg.seed, "ok": True,
    })
    plots.error_cloud_figure(dist, vals, scales.d / 2.0,
                             cfg.output_dir / "error_norm.png")
    return True, ["error_samples.csv", "summary.json", "error_norm.png"]


COMMANDS = {
    "verify-g": cmd_verify_g,
    "gammas": cmd_gammas,
    "balance": cmd_balance,
    "spectrum": cmd_spectrum,
    "reduce": cmd_reduce,
    "nondegen": cmd_nondegen,
    "error-norm": cmd_error_norm,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multibump",
        description="numerics for the balanced multi-bump construction")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--k", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=float)
        p.add_argument("--out")
        p.add_argument("--seed", type=int)
        p.add_argument("--grid", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--sweep", type=_parse_sweep,
                       help="comma-separated k values")
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--samples", type=int)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    t0 = time.time()
    try:
        cfg = build_run_config(args)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        ok, outputs = COMMANDS[args.command](cfg)
    except (ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_manifest(cfg, outputs + ["manifest.json"], t0)
    if not ok:
        print(f"{args.command}: checks failed (see summary.json)",
              file=sys.stderr)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
