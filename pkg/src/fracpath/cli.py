"""Config-driven command-line front end.

Subcommands: ``fbm`` (paths and law validation), ``solve`` (one run from a
JSON config), ``verify`` (inequality suites), ``ensemble`` (seed sweeps),
``convergence`` (refinement studies with deterministic drivers only).

Exit codes: 0 success, 1 verification/ensemble failure, 2 usage or config
error, 3 Picard non-convergence.  All outputs are deterministic under
fixed flags and seeds; files carry the column names and a hash of the
generating configuration.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import fbm, norms, solver, stieltjes
from .coefficients import coefficient_from_kind
from .grids import GridError, GridFunction, SpaceTimeField
from .sampling import random_trig_grid

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3

OUTDIR_ENV = "FRACPATH_OUTDIR"


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def _outdir(args) -> str:
    out = args.out or os.environ.get(OUTDIR_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def write_csv(path: str, columns, rows, chash: str):
    lines = [f"# config_hash={chash}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(path: str, payload: dict, chash: str):
    payload = dict(payload)
    payload["config_hash"] = chash
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    import jsonschema
    schema = json.loads(resources.files("fracpath.schemas")
                        .joinpath("solve_config.schema.json").read_text())
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config violates schema: {exc.message}") from exc
    hurst, alpha = cfg["hurst"], cfg["alpha"]
    if not (1.0 - hurst) < alpha < 0.5:
        raise ConfigError(
            f"alpha={alpha} outside the solver window (1-H, 1/2) for H={hurst}")
    driver = cfg["driver"]
    if driver["model"] in ("frozen", "sheet") and "seed" not in driver:
        raise ConfigError("stochastic drivers need a seed")
    if driver["model"] == "stub" and "kind" not in driver:
        raise ConfigError("stub drivers need a kind")
    return cfg


def _load_xy_csv(path: str) -> np.ndarray:
    """Two-column CSV with optional '#' comments and one header row."""
    try:
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split(",")
                try:
                    rows.append((float(parts[0]), float(parts[1])))
                except ValueError:
                    continue  # header row
        data = np.array(rows)
    except OSError as exc:
        raise ConfigError(f"cannot read sampled phi from {path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] < 2:
        raise ConfigError(f"{path} does not hold a two-column sample table")
    order = np.argsort(data[:, 0])
    return data[order]


def _phi_from_config(spec: dict, n: int) -> GridFunction:
    kind = spec["kind"]
    params = spec.get("params", {})
    x = np.linspace(0.0, 1.0, n + 1)
    if kind == "zero":
        v = np.zeros(n + 1)
    elif kind == "ramp":
        v = x.copy()
    elif kind == "sine":
        v = params.get("amplitude", 1.0) * np.sin(params.get("k", 1) * math.pi * x)
    elif kind == "file":
        path = params.get("path")
        if not path:
            raise ConfigError("phi kind 'file' needs params.path")
        data = _load_xy_csv(path)
        v = np.interp(x, data[:, 0], data[:, 1])
    else:  # pragma: no cover - schema guards this
        raise ConfigError(f"unknown phi kind {kind!r}")
    return GridFunction(0.0, 1.0, v)


def _seed_entropy(seed) -> tuple:
    if isinstance(seed, list):
        return tuple(int(s) for s in seed)
    return (int(seed),)


def _driver_from_config(cfg: dict):
    g = cfg["grid"]
    d = cfg["driver"]
    alpha = cfg["alpha"]
    if d["model"] == "stub":
        return fbm.stub_driving_field(d["kind"], g["n"], g["m"], g["T"], alpha,
                                      **d.get("params", {}))
    entropy = _seed_entropy(d["seed"])
    fc = fbm.FbmConfig(hurst=cfg["hurst"], n=g["n"], m=g["m"], T=g["T"],
                       seed=entropy[0], time_model=d["model"],
                       hurst_t=d.get("hurst_t", 0.95), stream=entropy[1:])
    return fbm.driving_field(fc, alpha)


def _solver_config(cfg: dict):
    g = cfg["grid"]
    picard = cfg.get("picard", {})
    return solver.SolverConfig(
        alpha=cfg["alpha"], hurst=cfg["hurst"], m=g["m"], n=g["n"], T=g["T"],
        phi=_phi_from_config(cfg["phi"], g["n"]),
        coeff=coefficient_from_kind(cfg["A"]["kind"], **cfg["A"].get("params", {})),
        picard_tol=picard.get("tol", 1e-9),
        max_iterations=picard.get("max_iter", 60),
        window_policy=cfg.get("window_policy", "paper-constants"))


def _run_config(cfg: dict, verify: bool = True):
    scfg = _solver_config(cfg)
    driver = _driver_from_config(cfg)
    report = solver.solve(scfg, driver, verify=verify)
    return scfg, driver, report


def _solution_rows(field):
    t = field.t_nodes
    xi = field.xi_nodes
    for j in range(field.m + 1):
        for i in range(field.n + 1):
            yield (t[j], xi[i], field.values[j, i])


def cmd_fbm(args) -> int:
    out = _outdir(args)
    cfg = {"hurst": args.hurst, "n": args.n, "seed": args.seed,
           "samples": args.samples, "validate": bool(args.validate),
           "field_m": args.field_m, "field_T": args.field_T}
    chash = config_hash(cfg)
    path = fbm.fbm_path(args.hurst, args.n, args.seed)
    write_csv(os.path.join(out, "fbm_path.csv"), ("xi", "value"),
              zip(path.nodes, path.values), chash)
    if args.field_m:
        field = SpaceTimeField.constant_in_time(path.values, args.field_m,
                                                args.field_T)
        write_csv(os.path.join(out, "fbm_field.csv"), ("t", "xi", "g"),
                  _solution_rows(field), chash)
    if args.validate:
        rep = fbm.covariance_validator(args.hurst, args.samples, args.seed,
                                       n=min(args.n, 64))
        write_json(os.path.join(out, "fbm_validation.json"), rep.to_dict(), chash)
        if args.strict and not rep.passed:
            return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_solve(args) -> int:
    out = _outdir(args)
    cfg = load_config(args.config)
    chash = config_hash(cfg)
    scfg, driver, report = _run_config(cfg)
    write_csv(os.path.join(out, "solution.csv"), ("t", "xi", "Y"),
              _solution_rows(report.solution), chash)
    write_json(os.path.join(out, "report.json"), report.to_dict(), chash)
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _suite_stieltjes(seed: int) -> list:
    checks = []
    n = 2048
    x = np.linspace(0.0, 1.0, n + 1)
    pairs = [
        ("sin_x--x^2", np.sin, lambda t: t ** 2),
        ("cos+2--cubic", lambda t: np.cos(math.pi * t) + 2.0, lambda t: t ** 3 / 3 + t),
        ("exp--sin3", lambda t: np.exp(-t), lambda t: np.sin(3.0 * t)),
        ("poly--cos", lambda t: t ** 2 + 1.0, lambda t: np.cos(t)),
        ("rational--mixed", lambda t: 1.0 / (1.0 + t ** 2),
         lambda t: t + 0.3 * np.sin(math.pi * t)),
    ]
    xs = np.linspace(0.0, 1.0, 10 ** 5 + 1)
    mid = 0.5 * (xs[:-1] + xs[1:])
    for name, ffn, gfn in pairs:
        ref = float(np.sum(ffn(mid) * (gfn(xs[1:]) - gfn(xs[:-1]))))
        val = stieltjes.stieltjes_integral(GridFunction(0, 1, ffn(x)),
                                           GridFunction(0, 1, gfn(x)), 0.3)
        rel = abs(val - ref) / abs(ref)
        checks.append({"suite": "stieltjes", "name": f"classical:{name}",
                       "passed": rel <= 1e-3, "worst_margin": 1e-3 - rel,
                       "details": {"value": val, "reference": ref, "rel_err": rel}})
    f = GridFunction(0, 1, np.sin(x) + 1.0)
    g = GridFunction(0, 1, np.sin(2 * x) + x ** 2)
    rep = stieltjes.stieltjes_indicator_consistency(f, g, 0.25, 0.25, 0.75)
    checks.append({"suite": "stieltjes", "name": "indicator(0.25,0.75)",
                   "passed": rep.gap <= 1e-2, "worst_margin": 1e-2 - rep.gap,
                   "details": rep.to_dict()})
    return checks


def _suite_bounds(seed: int) -> list:
    checks = []
    n = 256
    rng = np.random.default_rng(seed)
    worst = math.inf
    ok = True
    for s in range(100):
        fv = random_trig_grid(n, rng)
        gp = fbm.fbm_path(0.75, n, seed, (s,))
        r = stieltjes.bound_357_check(fv, gp, 0.3)
        worst = min(worst, r.margin / r.rhs)
        ok = ok and r.holds
    checks.append({"suite": "bounds", "name": "bound_357:100-seed-sweep",
                   "passed": ok, "worst_margin": worst,
                   "details": {"hurst": 0.75, "alpha": 0.3, "n": n}})
    drv = fbm.driving_field(fbm.FbmConfig(hurst=0.75, n=n, m=1, T=1.0,
                                          seed=seed), 0.3)
    r = stieltjes.pathwise_integral_bound_check(
        GridFunction(0, 1, np.ones(n + 1)), drv)
    checks.append({"suite": "bounds", "name": "pathwise:u=1",
                   "passed": r.holds, "worst_margin": r.margin,
                   "details": r.to_dict()})
    return checks


def _probe_config(n: int, seed: int):
    x = np.linspace(0.0, 1.0, n + 1)
    phi = GridFunction(0, 1, x)
    cfg = solver.SolverConfig(alpha=0.3, hurst=0.75, m=4, n=n, T=0.2, phi=phi,
                              coeff=coefficient_from_kind("tanh", scale=0.5))
    drv = fbm.stub_driving_field("quadratic", n, 4, 0.2, 0.3)
    return cfg, drv


def _suite_contraction(seed: int) -> list:
    from .sampling import random_smooth_field
    from .grids import SpaceTimeField
    cfg, drv = _probe_config(96, seed)
    cons = solver.compute_constants(cfg.alpha, cfg.coeff, drv.lambda_value,
                                    cfg.phi_norm(), horizon=cfg.T)
    t2 = min(cons.t2, cfg.T)
    rng = np.random.default_rng(seed)
    max_ratio = 0.0
    ok = True
    for _ in range(60):
        Y1 = random_smooth_field(4, cfg.n, t2, rng)
        Y2 = random_smooth_field(4, cfg.n, t2, rng)
        s1 = 0.8 * cons.r1 / max(norms.norm_alpha_infty(Y1, cfg.alpha), 1e-12)
        s2 = 0.8 * cons.r1 / max(norms.norm_alpha_infty(Y2, cfg.alpha), 1e-12)
        p = solver.contraction_probe(SpaceTimeField(t2, Y1.values * s1),
                                     SpaceTimeField(t2, Y2.values * s2), cfg, drv)
        max_ratio = max(max_ratio, p["ratio"])
        ok = ok and p["passed"]
    ball = solver.ball_invariance_check(cfg, drv, trials=60, seed=seed)
    return [
        {"suite": "contraction", "name": "ratio<=b5*T2*1.1", "passed": ok,
         "worst_margin": cons.b5 * t2 * 1.1 - max_ratio,
         "details": {"max_ratio": max_ratio, "ceiling": cons.b5 * t2}},
        {"suite": "contraction", "name": "ball_invariance", "passed": ball["passed"],
         "worst_margin": -ball["worst_excess"], "details": ball},
    ]


def _suite_gronwall(seed: int) -> list:
    checks = []
    n, m = 64, 120
    x = np.linspace(0.0, 1.0, n + 1)
    phi = GridFunction(0, 1, x)
    cfg = solver.SolverConfig(alpha=0.25, hurst=0.8, m=m, n=n, T=0.6, phi=phi,
                              coeff=coefficient_from_kind("tanh", scale=0.3))
    drv = fbm.stub_driving_field("linear", n, m, 0.6, 0.25)
    rep = solver.solve(cfg, drv, verify=False)
    g = rep.verdicts["gronwall"]
    checks.append({"suite": "gronwall", "name": "stub-driver", "passed":
                   rep.converged and g["passed"], "worst_margin": g["min_margin"],
                   "details": g})
    for s in range(5):
        cfgf = fbm.FbmConfig(hurst=0.75, n=n, m=80, T=0.08, seed=seed, stream=(s,))
        drvf = fbm.driving_field(cfgf, 0.3)
        cfg2 = solver.SolverConfig(alpha=0.3, hurst=0.75, m=80, n=n, T=0.08,
                                   phi=phi, coeff=coefficient_from_kind("tanh", scale=0.5))
        rep2 = solver.solve(cfg2, drvf, verify=False)
        g2 = rep2.verdicts["gronwall"]
        checks.append({"suite": "gronwall", "name": f"fbm-seed-{s}",
                       "passed": rep2.converged and g2["passed"],
                       "worst_margin": g2["min_margin"], "details": g2})
    return checks


def _suite_prop2(seed: int) -> list:
    checks = []
    cases = [("tanh", coefficient_from_kind("tanh"), 2.0),
             ("gaussian-bump", coefficient_from_kind("gaussian-bump", width=0.7), 2.0)]
    for name, coeff, radius in cases:
        r = solver.quadruple_inequality_check(coeff, radius, 10 ** 4, seed)
        checks.append({"suite": "prop2", "name": f"quadruple:{name}",
                       "passed": r["passed"], "worst_margin": r["worst_slack"],
                       "details": r})
    return checks


_SUITES = {
    "bounds": _suite_bounds,
    "contraction": _suite_contraction,
    "gronwall": _suite_gronwall,
    "prop2": _suite_prop2,
    "stieltjes": _suite_stieltjes,
}


def cmd_verify(args) -> int:
    out = _outdir(args)
    names = sorted(_SUITES) if args.suite == "all" else [args.suite]
    cfg = {"suite": args.suite, "seed": args.seed}
    checks = []
    for name in names:
        checks.extend(_SUITES[name](args.seed))
    passed = all(c["passed"] for c in checks)
    write_json(os.path.join(out, f"verify_{args.suite}.json"),
               {"suite": args.suite, "seed": args.seed, "passed": passed,
                "checks": checks}, config_hash(cfg))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _ensemble_run(cfg: dict, base_seed: int, k: int):
    run_cfg = json.loads(json.dumps(cfg))
    run_cfg["driver"]["seed"] = [base_seed, k]
    try:
        scfg, driver, report = _run_config(run_cfg, verify=False)
    except (GridError, ConfigError) as exc:
        return {"seed": k, "ok": False, "error": str(exc)}
    g = report.verdicts["gronwall"]
    sup = float(np.abs(report.solution.values).max())
    return {
        "seed": k,
        "ok": bool(report.converged),
        "lambda_alpha": report.lambda_alpha,
        "sup_norm": sup,
        "iterations": int(sum(w.iterations for w in report.windows)),
        "gronwall_margin": g["min_margin"],
        "gronwall_passed": g["passed"],
    }


def cmd_ensemble(args) -> int:
    out = _outdir(args)
    cfg = load_config(args.config)
    if cfg["driver"]["model"] == "stub":
        raise ConfigError("ensembles need a stochastic driver")
    chash = config_hash({"config": cfg, "count": args.count, "seed": args.seed})
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(1, args.threads)) as ex:
        rows = list(ex.map(lambda k: _ensemble_run(cfg, args.seed, k),
                           range(args.count)))
    rows.sort(key=lambda r: r["seed"])
    csv_rows = []
    for r in rows:
        if r["ok"]:
            csv_rows.append((r["seed"], r["lambda_alpha"], r["sup_norm"],
                             r["iterations"], r["gronwall_margin"], 1))
        else:
            csv_rows.append((r["seed"], math.nan, math.nan, 0, math.nan, 0))
    write_csv(os.path.join(out, "ensemble_summary.csv"),
              ("seed", "lambda_alpha", "sup_norm", "iterations",
               "gronwall_margin", "converged"), csv_rows, chash)
    ok_rows = [r for r in rows if r["ok"]]
    stats = {
        "count": args.count,
        "converged": len(ok_rows),
        "failed_seeds": [r["seed"] for r in rows if not r["ok"]],
        "lambda_alpha": _agg([r["lambda_alpha"] for r in ok_rows]),
        "sup_norm": _agg([r["sup_norm"] for r in ok_rows]),
        "gronwall_margin": _agg([r["gronwall_margin"] for r in ok_rows]),
        "all_gronwall_passed": all(r["gronwall_passed"] for r in ok_rows),
    }
    write_json(os.path.join(out, "ensemble_stats.json"), stats, chash)
    return EXIT_OK if len(ok_rows) == args.count else EXIT_CHECK_FAILED


def _agg(values) -> dict:
    if not values:
        return {"min": None, "mean": None, "max": None}
    return {"min": float(min(values)), "mean": float(sum(values) / len(values)),
            "max": float(max(values))}


def cmd_convergence(args) -> int:
    out = _outdir(args)
    cfg = load_config(args.config)
    if cfg["driver"]["model"] != "stub":
        raise ConfigError(
            "convergence studies need a deterministic stub driver: an FBM "
            "path regenerated at a finer grid is a different sample")
    try:
        res = sorted(int(r) for r in args.resolutions.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad resolution list {args.resolutions!r}") from exc
    if len(res) < 2:
        raise ConfigError("need at least two resolutions")
    n_ref = res[-1]
    for n in res:
        if n_ref % n:
            raise ConfigError(f"resolution {n} must divide the reference {n_ref}")
    chash = config_hash({"config": cfg, "resolutions": res})
    solutions = {}
    for n in res:
        run_cfg = json.loads(json.dumps(cfg))
        run_cfg["grid"]["n"] = n
        _, _, report = _run_config(run_cfg, verify=False)
        if not report.converged:
            return EXIT_NO_CONVERGENCE
        solutions[n] = report.solution.values
    ref = solutions[n_ref]
    errors = []
    for n in res[:-1]:
        stride = n_ref // n
        errors.append(float(np.abs(solutions[n] - ref[:, ::stride]).max()))
    rows = [(n, e) for n, e in zip(res[:-1], errors)]
    # errors at machine-epsilon scale count as converged
    sig = [e for e in errors if e > 1e-12]
    monotone = all(b <= a * 1.1 for a, b in zip(sig, sig[1:]))
    write_csv(os.path.join(out, "convergence.csv"), ("n", "sup_error"), rows, chash)
    return EXIT_OK if monotone else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracpath", description=__doc__)
    p.add_argument("--out", default=None, help=f"output directory (default ${OUTDIR_ENV} or .)")
    p.add_argument("--threads", type=int, default=1, help="worker slots for ensembles")
    sub = p.add_subparsers(dest="command", required=True)

    pf = sub.add_parser("fbm", help="generate an FBM path, optionally validate the law")
    pf.add_argument("--hurst", type=float, required=True)
    pf.add_argument("--n", type=int, required=True)
    pf.add_argument("--seed", type=int, required=True)
    pf.add_argument("--samples", type=int, default=10 ** 4)
    pf.add_argument("--validate", action="store_true")
    pf.add_argument("--field-m", type=int, default=0,
                    help="also write the frozen field CSV with this many time cells")
    pf.add_argument("--field-T", type=float, default=1.0)
    pf.add_argument("--strict", action="store_true")
    pf.set_defaults(fn=cmd_fbm)

    ps = sub.add_parser("solve", help="run one solve from a JSON config")
    ps.add_argument("config")
    ps.set_defaults(fn=cmd_solve)

    pv = sub.add_parser("verify", help="run an inequality verification suite")
    pv.add_argument("suite", choices=sorted(_SUITES) + ["all"])
    pv.add_argument("--seed", type=int, default=0)
    pv.set_defaults(fn=cmd_verify)

    pe = sub.add_parser("ensemble", help="run a seed ensemble of solves")
    pe.add_argument("config")
    pe.add_argument("--count", type=int, required=True)
    pe.add_argument("--seed", type=int, required=True)
    pe.set_defaults(fn=cmd_ensemble)

    pc = sub.add_parser("convergence", help="refinement study with a stub driver")
    pc.add_argument("config")
    pc.add_argument("--resolutions", required=True,
                    help="comma-separated n values; the largest is the reference")
    pc.set_defaults(fn=cmd_convergence)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, GridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except solver.NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    raise SystemExit(main())
