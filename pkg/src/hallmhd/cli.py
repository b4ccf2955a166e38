"""Command-line interface.

Every verification subcommand prints one JSON record per check to
stdout, each with ``"pass"`` set, and exits 0 only if all checks pass,
so the tool slots directly into scripted pipelines.  The ``run``
subcommand streams JSON-lines diagnostics.

Set ``HMHD_THREADS`` to cap the number of compiled-kernel worker
threads and ``HMHD_NUMBA=0`` to force the pure-numpy kernel path.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np


def _configure_threads() -> None:
    raw = os.environ.get("HMHD_THREADS")
    if not raw:
        return
    try:
        count = max(1, int(raw))
    except ValueError:
        print(json.dumps({"check": "threads", "pass": False,
                          "error": f"HMHD_THREADS={raw!r} is not an integer"}),
              file=sys.stderr)
        raise SystemExit(2)
    try:
        import numba
        numba.set_num_threads(count)
    except ImportError:
        pass


def _emit(record: dict) -> bool:
    print(json.dumps(record))
    return bool(record.get("pass", True))


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def cmd_run(args: argparse.Namespace) -> int:
    from . import dynamics as dyn, lp, spectral as sp
    from .config import RunConfig
    from .experiments import gen_initial_data

    cfg = RunConfig.from_file(args.config)
    u0, B0 = gen_initial_data(cfg.grid, cfg.data)
    part = lp.build_partition(cfg.grid)
    besov = lp.BesovSpec(s=-cfg.regularity.gamma, p=2.0, r=np.inf)
    out_path = args.output or cfg.output
    sink = open(out_path, "w") if out_path else sys.stdout

    def record(state: dyn.SolverState) -> None:
        bu = lp.besov_norm(state.u, besov, part)
        bb = lp.besov_norm(state.B, besov, part)
        rec = {
            "t": state.t,
            "E": dyn.total_energy(state),
            "diss_u": cfg.params.mu * sp.norms(state.u, "Hdot", s=1.0) ** 2,
            "diss_B": cfg.params.nu * sp.norms(state.B, "Hdot", s=1.0) ** 2,
            "Hs_norms": {
                "u_s0": sp.norms(state.u, "L2"),
                "B_s0": sp.norms(state.B, "L2"),
                "u_s1": sp.norms(state.u, "Hdot", s=1.0),
                "B_s1": sp.norms(state.B, "Hdot", s=1.0),
            },
            "besov_neg": float(np.hypot(bu, bb)),
            "blowup_proxy": dyn.blowup_indicator(state),
        }
        print(json.dumps(rec), file=sink)

    state = dyn.make_state(u0, B0)
    record(state)
    try:
        dyn.integrate(state, cfg.params, cfg.integrator,
                      sample_every=cfg.sample_every, observer=record)
    finally:
        if sink is not sys.stdout:
            sink.close()
    return 0


def cmd_verify_lp(args: argparse.Namespace) -> int:
    from . import lp, spectral as sp

    grid = sp.Grid(args.n, args.M)
    part = lp.build_partition(grid)
    rng = np.random.default_rng(args.seed)
    f = sp.random_field(grid, rng, components=3,
                        band=(0.5 * grid.k_min, 0.8 * grid.k_max_axis))
    start = time.perf_counter()

    kmag = grid.k_magnitude()
    total = np.zeros_like(kmag)
    for j in part.bands:
        total += lp.phi_profile(kmag / 2.0**j)
    active = (kmag > 0) & grid.dealias_mask()
    pou = float(np.max(np.abs(total[active] - 1.0)))

    recon = np.zeros_like(f.coef)
    for j in part.bands:
        recon += lp.dyadic_block(f, j, part).coef
    rel = float(np.max(np.abs(recon - f.coef)) / np.max(np.abs(f.coef)))

    g = sp.random_field(grid, rng, components=1,
                        band=(0.5 * grid.k_min, 0.8 * grid.k_max_axis))
    h = sp.random_field(grid, rng, components=1,
                        band=(0.5 * grid.k_min, 0.8 * grid.k_max_axis))
    prod = lp._product(g, h)
    bony = np.zeros_like(prod.coef)
    for which in ("T_fg", "T_gf", "R"):
        bony += lp.paraproduct(g, h, part, which).coef
    bony_rel = float(np.max(np.abs(bony - prod.coef))
                     / np.max(np.abs(prod.coef)))

    # blocks separated by >= 2 dyadic levels share no spectral support
    jmid = (part.j_min + part.j_max) // 2
    b1 = lp.dyadic_block(f, jmid, part)
    b2 = lp.dyadic_block(f, jmid + 2, part)
    ortho = abs(sp.inner_l2(b1, b2))

    elapsed = time.perf_counter() - start
    ok = True
    ok &= _emit({"check": "partition_of_unity", "value": pou,
                 "tol": 1e-10, "pass": pou < 1e-10})
    ok &= _emit({"check": "reconstruction", "value": rel,
                 "tol": 1e-10, "pass": rel < 1e-10})
    ok &= _emit({"check": "bony_reconstruction", "value": bony_rel,
                 "tol": 1e-10, "pass": bony_rel < 1e-10})
    ok &= _emit({"check": "almost_orthogonality", "value": ortho,
                 "tol": 0.0, "pass": ortho == 0.0})
    ok &= _emit({"check": "runtime_seconds", "value": elapsed,
                 "tol": 10.0, "pass": elapsed < 10.0})
    return 0 if ok else 1


def cmd_verify_inequalities(args: argparse.Namespace) -> int:
    from . import lp, spectral as sp

    ok = True
    ineq_params = {k: float(v) for k, v in (args.param or [])}
    for n in args.n:
        grid = sp.Grid(n, args.M)
        report = lp.verify_inequality(
            args.id, ineq_params, grid,
            n_samples=args.samples, seed=args.seed)
        rec = json.loads(report.to_json())
        rec.update({"check": f"inequality:{args.id}", "pass":
                    bool(np.isfinite(report.max_ratio))})
        ok &= _emit(rec)
    return 0 if ok else 1


def cmd_verify_energy(args: argparse.Namespace) -> int:
    from . import dynamics as dyn, spectral as sp
    from .experiments import DataSpec, gen_initial_data

    grid = sp.Grid(args.n, args.M)
    params = dyn.PhysicalParams(args.mu, args.mu, args.kappa)
    data = DataSpec(band=(0.0, min(2.0, 0.9 * grid.dealias_cutoff() / grid.M)),
                    amplitude=args.amplitude, seed=args.seed)
    u0, B0 = gen_initial_data(grid, data)
    cfg = dyn.IntegratorConfig(dt=args.dt, t_end=args.t_end, scheme="IF-RK3")
    traj = dyn.integrate(dyn.make_state(u0, B0), params, cfg, sample_every=1)
    res = dyn.energy_audit(traj, params, fd_order=4)
    worst = float(np.max(np.abs(res.values)))

    rng = np.random.default_rng(args.seed + 1)
    neutral = 0.0
    for _ in range(args.fields):
        B = sp.random_field(grid, rng, components=3,
                            band=(0.5 * grid.k_min, 0.8 * grid.k_max_axis),
                            divergence_free=True)
        h = dyn.hall_term(B)
        neutral = max(neutral, abs(sp.inner_l2(h, B))
                      / max(sp.norms(h, "L2") * sp.norms(B, "L2"), 1e-300))
    ok = True
    ok &= _emit({"check": "energy_residual", "value": worst,
                 "tol": 1e-5, "pass": worst < 1e-5})
    ok &= _emit({"check": "hall_neutrality", "value": neutral,
                 "tol": 1e-12, "pass": neutral < 1e-12})
    return 0 if ok else 1


def cmd_verify_formulations(args: argparse.Namespace) -> int:
    from . import dynamics as dyn, spectral as sp
    from .experiments import DataSpec, gen_initial_data

    grid = sp.Grid(args.n, args.M)
    params = dyn.PhysicalParams(args.mu, args.mu, args.kappa)
    data = DataSpec(band=(0.0, min(2.0, 0.9 * grid.dealias_cutoff() / grid.M)),
                    amplitude=args.amplitude, seed=args.seed)
    u0, B0 = gen_initial_data(grid, data)
    cfg = dyn.IntegratorConfig(dt=args.dt, t_end=args.t_end, scheme="IF-RK3")
    report = dyn.cross_check_formulations(u0, B0, params, cfg)
    trunc_scale = cfg.dt ** cfg.order
    ok = True
    ok &= _emit({"check": "v_consistency", "value": report.max_v_consistency,
                 "tol": 10.0 * trunc_scale,
                 "pass": report.max_v_consistency < 10.0 * trunc_scale})
    ext = dyn.make_extended(u0, B0, params.kappa)
    b_rec = dyn.b_from_uv(ext.base.u, ext.v, params.kappa)
    b_err = (np.max(np.abs(b_rec.coef - B0.coef))
             / max(np.max(np.abs(B0.coef)), 1e-300))
    ok &= _emit({"check": "b_identity_t0", "value": float(b_err),
                 "tol": 1e-12, "pass": bool(b_err < 1e-12)})
    return 0 if ok else 1


def cmd_oracle_decay(args: argparse.Namespace) -> int:
    from .experiments import fit_decay, heat_oracle_radial
    from .timeseries import TimeSeries

    times = np.logspace(np.log10(args.t_lo), np.log10(args.t_hi), args.points)
    vals = heat_oracle_radial(args.s, args.gamma, times)
    series = TimeSeries("oracle", [(float(t), float(v))
                                   for t, v in zip(times, vals)])
    fit = fit_decay(series)
    target = -(args.s + args.gamma) / 2.0
    err = abs(fit.slope - target)
    ok = _emit({"check": "oracle_decay_slope", "s": args.s,
                "gamma": args.gamma, "slope": fit.slope, "target": target,
                "value": err, "tol": args.tol, "pass": err < args.tol})
    return 0 if ok else 1


def cmd_fit_decay(args: argparse.Namespace) -> int:
    from pathlib import Path

    from .experiments import fit_decay
    from .timeseries import TimeSeries

    series = TimeSeries.from_jsonl(Path(args.series).read_text(),
                                   name=args.name)
    window = tuple(args.window) if args.window else None
    fit = fit_decay(series, window)
    _emit({"check": "fit_decay", "series": series.name, "slope": fit.slope,
           "intercept": fit.intercept, "residual": fit.residual,
           "window": list(fit.window), "n_points": fit.n_points,
           "pass": True})
    return 0


def cmd_scan_smallness(args: argparse.Namespace) -> int:
    from . import dynamics as dyn, spectral as sp
    from .experiments import smallness_scan

    grid = sp.Grid(args.n, args.M)
    params = dyn.PhysicalParams(args.mu, args.mu, args.kappa)
    cfg = dyn.IntegratorConfig(dt=args.dt, t_end=args.t_end, scheme="IF-RK3")
    report = smallness_scan(grid, params, (0.0, args.band_hi), cfg,
                            seed=args.seed, n_iter=args.iterations)
    _emit({"check": "smallness_threshold", "threshold": report.threshold,
           "history": report.history, "n": report.grid_n, "pass": True})
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_grid_args(p: argparse.ArgumentParser, n_default: int = 32,
                   multi_n: bool = False) -> None:
    if multi_n:
        p.add_argument("--n", type=int, nargs="+", default=[32, 64],
                       help="grid resolutions")
    else:
        p.add_argument("--n", type=int, default=n_default,
                       help="grid resolution per axis")
    p.add_argument("--M", type=float, default=16.0,
                   help="box half-period in units of 2*pi")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hallmhd",
        description="Pseudo-spectral Hall-MHD simulator and dyadic-analysis "
                    "verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a simulation from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--output", default=None,
                       help="JSON-lines diagnostics path (default stdout)")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="verification checks")
    vsub = p_verify.add_subparsers(dest="verify_what", required=True)

    p_lp = vsub.add_parser("lp", help="dyadic partition identities")
    _add_grid_args(p_lp, n_default=64)
    p_lp.set_defaults(func=cmd_verify_lp)

    p_ineq = vsub.add_parser("inequalities", help="inequality constants")
    p_ineq.add_argument("--id", required=True,
                        choices=["bernstein", "sobolev_embed", "interpolation",
                                 "product_law", "commutator_est",
                                 "kato_ponce"])
    p_ineq.add_argument("--samples", type=int, default=200)
    p_ineq.add_argument("--param", action="append", nargs=2,
                        metavar=("KEY", "VALUE"),
                        type=str, help="inequality parameter, repeatable")
    _add_grid_args(p_ineq, multi_n=True)
    p_ineq.set_defaults(func=cmd_verify_inequalities)

    p_en = vsub.add_parser("energy", help="energy identity audit")
    _add_grid_args(p_en, n_default=64)
    p_en.add_argument("--mu", type=float, default=0.5)
    p_en.add_argument("--kappa", type=float, default=0.5)
    p_en.add_argument("--amplitude", type=float, default=0.1)
    p_en.add_argument("--dt", type=float, default=0.01)
    p_en.add_argument("--t-end", type=float, default=0.5)
    p_en.add_argument("--fields", type=int, default=100)
    p_en.set_defaults(func=cmd_verify_energy)

    p_form = vsub.add_parser("formulations",
                             help="original vs extended system")
    _add_grid_args(p_form, n_default=32)
    p_form.add_argument("--mu", type=float, default=0.5)
    p_form.add_argument("--kappa", type=float, default=0.5)
    p_form.add_argument("--amplitude", type=float, default=0.1)
    p_form.add_argument("--dt", type=float, default=0.01)
    p_form.add_argument("--t-end", type=float, default=0.2)
    p_form.set_defaults(func=cmd_verify_formulations)

    p_oracle = sub.add_parser("oracle", help="continuum reference curves")
    osub = p_oracle.add_subparsers(dest="oracle_what", required=True)
    p_od = osub.add_parser("decay", help="radial heat-decay slope")
    p_od.add_argument("--s", type=float, required=True)
    p_od.add_argument("--gamma", type=float, required=True)
    p_od.add_argument("--t-lo", type=float, default=1e2)
    p_od.add_argument("--t-hi", type=float, default=1e4)
    p_od.add_argument("--points", type=int, default=60)
    p_od.add_argument("--tol", type=float, default=0.02)
    p_od.set_defaults(func=cmd_oracle_decay)

    p_fit = sub.add_parser("fit-decay", help="fit a power law to a series")
    p_fit.add_argument("--series", required=True, help="JSON-lines file")
    p_fit.add_argument("--name", default=None)
    p_fit.add_argument("--window", type=float, nargs=2, default=None)
    p_fit.set_defaults(func=cmd_fit_decay)

    p_scan = sub.add_parser("scan", help="parameter scans")
    ssub = p_scan.add_subparsers(dest="scan_what", required=True)
    p_sm = ssub.add_parser("smallness", help="energy-doubling threshold")
    _add_grid_args(p_sm, n_default=32)
    p_sm.add_argument("--mu", type=float, default=0.5)
    p_sm.add_argument("--kappa", type=float, default=0.5)
    p_sm.add_argument("--band-hi", type=float, default=1.0)
    p_sm.add_argument("--dt", type=float, default=0.05)
    p_sm.add_argument("--t-end", type=float, default=5.0)
    p_sm.add_argument("--iterations", type=int, default=6)
    p_sm.set_defaults(func=cmd_scan_smallness)

    return parser


def main(argv: list[str] | None = None) -> int:
    _configure_threads()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface failures as machine-readable records
        print(json.dumps({"check": args.command, "pass": False,
                          "error": str(exc)}))
        return 2


if __name__ == "__main__":
    sys.exit(main())
