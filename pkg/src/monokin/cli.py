"""Command-line entry point: run scenarios, sweep parameters, merge reports.

Exit codes: 0 success, 2 validation error, 3 runtime guard (CFL,
blow-up, boundary leak), 4 sweep member failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .core import ConfigError, RunConfig, load_config, parse_kv_file, validate_config
from .io import (read_csv_columns, write_csv, write_diagnostics,
                 write_eas_snapshot, write_metadata, write_profile_snapshot,
                 write_swarm, write_sweep_report, write_trajectories)
from .transport import BlowUpError, BoundaryLeakError, CFLViolationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_SWEEP_MEMBER = 4


def _threads(args) -> int:
    if args.threads:
        return args.threads
    env = os.environ.get("MONOKIN_THREADS")
    return int(env) if env else (os.cpu_count() or 1)


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.out_dir:
        cfg = replace(cfg, out_dir=args.out_dir)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.snapshot_times:
        times = tuple(float(s) for s in args.snapshot_times.split(",") if s.strip())
        cfg = replace(cfg, snapshot_times=times)
    return validate_config(cfg)


# ---------------------------------------------------------------------------
# scenario runners
# ---------------------------------------------------------------------------

def _run_eas(cfg: RunConfig, out: Path):
    from .euler_alignment import run_eas
    from .metrics import e_quantity, macroscopic_energy
    from .core import quadrature_x

    run = run_eas(cfg)
    grid = run.grid
    records = []
    for t in cfg.resolved_snapshot_times():
        k = run.nearest_index(t)
        state = run.state_at_index(k)
        e = e_quantity(state.as_macro(), run.kernel_values, grid)
        write_eas_snapshot(out, run.times[k], grid.cell_centers, state.rho,
                           state.u, e)
        records.append({
            "t": float(run.times[k]),
            "mass": quadrature_x(state.rho, grid),
            "momentum": quadrature_x(state.rho * state.u, grid),
            "energy": macroscopic_energy(state.rho, state.u, grid),
            "e_min": float(np.min(e)),
            "e_total": quadrature_x(e, grid),
        })
    write_diagnostics(out, records)
    return f"eas: {len(records)} snapshots, final t={records[-1]['t']:.4f}"


def _run_profile(cfg: RunConfig, out: Path):
    from .core import quadrature_phase, quadrature_x, xi_first_moment
    from .metrics import boltzmann_entropy, xi_marginal_l1
    from .core import xi_second_moment
    from .profile_transport import run_profile

    run = run_profile(cfg)
    pgrid = run.grid
    records = []
    for t, ps, eas in zip(run.snapshot_times, run.snapshots,
                          run.macro_snapshots):
        write_profile_snapshot(out, t, ps.g, pgrid, prefix="g")
        records.append({
            "t": t,
            "mass": quadrature_phase(ps.g, pgrid),
            "momentum": quadrature_x(xi_first_moment(ps.g, pgrid), pgrid.x),
            "boltzmann": boltzmann_entropy(ps.g, pgrid),
            "xi_m2": xi_second_moment(ps.g, pgrid),
            "w1_rho": xi_marginal_l1(ps.g, eas.rho, pgrid),
        })
        write_eas_snapshot(out, t, pgrid.x.cell_centers, eas.rho, eas.u,
                           np.gradient(eas.u, pgrid.x.dx) + eas.rho_phi)
    write_diagnostics(out, records)
    return f"profile: {len(records)} snapshots, leak={run.snapshots[-1].leaked_mass:.2e}"


def _run_vlasov(cfg: RunConfig, out: Path):
    from .core import quadrature_phase, quadrature_x, xi_second_moment
    from .metrics import boltzmann_entropy, modulated_energy
    from .vlasov import run_vlasov

    run = run_vlasov(cfg)
    pgrid = run.grid
    records = []
    for t, s in zip(run.snapshot_times, run.states):
        write_profile_snapshot(out, t, s.g, pgrid, prefix="gveps")
        records.append({
            "t": t,
            "mass": quadrature_phase(s.g, pgrid),
            "momentum": quadrature_x(s.rho(pgrid) * s.u(pgrid), pgrid.x),
            "mod_energy": modulated_energy(s.g, s.omega, s.m, s.u(pgrid),
                                           pgrid),
            "boltzmann": boltzmann_entropy(s.g, pgrid),
            "xi_m2": xi_second_moment(s.g, pgrid),
        })
    write_diagnostics(out, records)
    return f"vlasov: eps={cfg.epsilon}, {len(records)} snapshots"


def _run_fp(cfg: RunConfig, out: Path):
    from .core import quadrature_phase, quadrature_x, xi_second_moment
    from .fokker_planck import run_fp
    from .metrics import (fisher_information, modulated_energy,
                          relative_entropy_maxwellian)

    run = run_fp(cfg)
    pgrid = run.grid
    records = []
    for t, s in zip(run.snapshot_times, run.states):
        write_profile_snapshot(out, t, s.g, pgrid, prefix="gfp")
        rho = s.rho(pgrid)
        records.append({
            "t": t,
            "mass": quadrature_phase(s.g, pgrid),
            "momentum": quadrature_x(rho * s.u(pgrid), pgrid.x),
            "mod_energy": modulated_energy(s.g, np.sqrt(s.sigma), s.m,
                                           s.u(pgrid), pgrid),
            "rel_entropy": relative_entropy_maxwellian(s.g, rho, pgrid),
            "fisher": fisher_information(s.g, pgrid),
            "xi_m2": xi_second_moment(s.g, pgrid),
        })
    write_diagnostics(out, records)
    return f"fp: eps={cfg.epsilon}, sigma={cfg.sigma}, {len(records)} snapshots"


def _run_characteristics(cfg: RunConfig, out: Path):
    from .characteristics import (CoefficientTrajectory,
                                  integrate_characteristics)
    from .euler_alignment import run_eas

    run = run_eas(cfg)
    coeffs = CoefficientTrajectory.from_run(run)
    x0 = run.grid.cell_centers[:: max(1, cfg.nx // 8)]
    xi0 = np.ones_like(x0)
    traj = integrate_characteristics(coeffs, x0, xi0, cfg.t_final,
                                     dt=cfg.dt or 1e-3, variational=True)
    write_trajectories(out, traj.times, traj.x, traj.sigma, traj.jacobian_det)
    write_diagnostics(out, [{"t": float(traj.times[-1])}])
    return f"characteristics: {len(x0)} trajectories to t={cfg.t_final}"


def _run_particles(cfg: RunConfig, out: Path):
    from .core import initial_macro_state
    from .kernels import KernelSpec
    from .metrics import macroscopic_energy
    from .particles import Swarm, empirical_vs_grid, sample_from_grid, step_cs

    grid = cfg.torus_grid()
    macro = initial_macro_state(cfg)
    swarm = sample_from_grid(macro.rho, macro.u, grid, cfg.n_particles,
                             cfg.seed)
    phi = KernelSpec(kind=cfg.kernel, beta=cfg.kernel_beta)
    dt = cfg.dt or 1e-3
    n = max(1, int(round(cfg.t_final / dt)))
    for _ in range(n):
        swarm = step_cs(swarm, phi, cfg.t_final / n)
    write_swarm(out, swarm, cfg.seed)
    records = [{"t": cfg.t_final,
                "mass": float(np.sum(swarm.masses)),
                "momentum": swarm.momentum(),
                "energy": 0.5 * float(np.sum(swarm.masses * swarm.v**2))}]
    write_diagnostics(out, records)
    return f"particles: N={swarm.n} advanced to t={cfg.t_final}"


_RUNNERS = {
    "eas": _run_eas,
    "profile": _run_profile,
    "vlasov": _run_vlasov,
    "fp": _run_fp,
    "characteristics": _run_characteristics,
    "particles": _run_particles,
}


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if cfg.scenario == "sweep":
        print("error: field 'scenario': use the sweep subcommand",
              file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        summary = _RUNNERS[cfg.scenario](cfg, out)
    except (CFLViolationError, BlowUpError, BoundaryLeakError) as exc:
        print(f"runtime guard: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    write_metadata(out, cfg)
    print(summary)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

_SWEEP_KEYS = {"sweep_param", "sweep_values", "couple_delta", "couple_sigma"}


def _load_plan(path):
    entries = parse_kv_file(path)
    plan = {k: entries.pop(k) for k in list(entries) if k in _SWEEP_KEYS}
    if "sweep_param" not in plan or "sweep_values" not in plan:
        raise ConfigError("plan needs sweep_param and sweep_values")
    values = sorted((float(v) for v in plan["sweep_values"].split(",")),
                    reverse=True)
    base = {k: v for k, v in entries.items()}
    import tempfile
    with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as fh:
        for k, v in base.items():
            fh.write(f"{k} = {v}\n")
        tmp = fh.name
    try:
        cfg = load_config(tmp)
    finally:
        os.unlink(tmp)
    return cfg, plan["sweep_param"], values, plan


def _sweep_point(payload):
    cfg, param, value, couplings = payload
    from .rates import sigma_from_eps

    over = {param: value}
    if param == "epsilon":
        if couplings.get("couple_delta") == "eps2":
            over["delta"] = value**2
        if couplings.get("couple_sigma") == "eps-log":
            over["sigma"] = sigma_from_eps(value)
    cfg_pt = validate_config(replace(cfg, **over))
    t_eval = cfg.t_final
    if cfg.scenario == "vlasov":
        from .vlasov import run_vlasov
        run = run_vlasov(replace(cfg_pt, snapshot_times=(t_eval,)))
        s = run.states[-1]
        pg = run.grid
        return {"eps": cfg_pt.epsilon, "sigma": cfg_pt.sigma,
                "delta": cfg_pt.delta, "t": t_eval,
                "g": s.g, "rho": s.rho(pg), "u": s.u(pg), "m": s.m,
                "omega": s.omega}
    if cfg.scenario == "fp":
        from .fokker_planck import run_fp
        run = run_fp(replace(cfg_pt, snapshot_times=(t_eval,)))
        s = run.states[-1]
        pg = run.grid
        return {"eps": cfg_pt.epsilon, "sigma": cfg_pt.sigma,
                "delta": cfg_pt.delta, "t": t_eval,
                "g": s.g, "rho": s.rho(pg), "u": s.u(pg), "m": s.m,
                "omega": np.sqrt(cfg_pt.sigma)}
    raise ConfigError(f"sweep supports vlasov|fp, not {cfg.scenario!r}")


def cmd_sweep(args) -> int:
    try:
        cfg, param, values, plan = _load_plan(args.plan)
        if args.out_dir:
            cfg = replace(cfg, out_dir=args.out_dir)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    # reference limit run at matched resolution
    from .metrics import (modulated_energy, relative_entropy_maxwellian,
                          w1_periodic, w1_phase, w2_periodic)
    from .rates import loglog_slope_floor, slope_confidence

    t_eval = cfg.t_final
    if cfg.scenario == "vlasov":
        from .profile_transport import run_profile
        ref = run_profile(replace(cfg, snapshot_times=(t_eval,)))
        k = ref.snapshot_times.index(t_eval)
        ref_fields = {"g": ref.snapshots[k].g, "rho": ref.macro_snapshots[k].rho,
                      "u": ref.macro_snapshots[k].u}
        pgrid = ref.grid
    else:
        from .euler_alignment import run_eas
        er = run_eas(replace(cfg, snapshot_times=(t_eval,)))
        kk = er.nearest_index(t_eval)
        ref_fields = {"rho": er.rho[kk], "u": er.u[kk]}
        pgrid = cfg.phase_grid()

    payloads = [(cfg, param, v, plan) for v in values]
    results = []
    n_workers = min(_threads(args), len(values))
    try:
        if n_workers > 1:
            with ProcessPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(_sweep_point, payloads))
        else:
            results = [_sweep_point(p) for p in payloads]
    except Exception as exc:
        print(f"sweep member failed ({param} sweep): {exc}", file=sys.stderr)
        return EXIT_SWEEP_MEMBER

    mom_ref = ref_fields["rho"] * ref_fields["u"]
    rows = []
    if cfg.scenario == "vlasov":
        header = ["eps", "t", "w1_rho", "w1_mom_u", "w1_mom_m", "w1_g"]
        for r in results:
            rows.append({
                "eps": r["eps"], "t": r["t"],
                "w1_rho": w1_periodic(r["rho"], ref_fields["rho"], pgrid.x),
                "w1_mom_u": w1_periodic(r["rho"] * r["u"], mom_ref, pgrid.x),
                "w1_mom_m": w1_periodic(r["rho"] * r["m"], mom_ref, pgrid.x),
                "w1_g": w1_phase(r["g"], ref_fields["g"], pgrid),
            })
        metric_cols = header[2:]
    else:
        header = ["eps", "sigma", "delta", "t", "mod_energy", "w2sq_rho",
                  "w1sq_mom", "rel_entropy", "fisher"]
        from .metrics import fisher_information
        for r in results:
            rows.append({
                "eps": r["eps"], "sigma": r["sigma"], "delta": r["delta"],
                "t": r["t"],
                "mod_energy": modulated_energy(r["g"], r["omega"], r["m"],
                                               ref_fields["u"], pgrid),
                "w2sq_rho": w2_periodic(r["rho"], ref_fields["rho"],
                                        pgrid.x) ** 2,
                "w1sq_mom": w1_periodic(r["rho"] * r["u"], mom_ref,
                                        pgrid.x) ** 2,
                "rel_entropy": relative_entropy_maxwellian(r["g"], r["rho"],
                                                           pgrid),
                "fisher": fisher_information(r["g"], pgrid),
            })
        metric_cols = header[4:]

    slopes = {}
    if len(rows) >= 2:
        eps_arr = np.array([row["eps"] for row in rows])
        for col in metric_cols:
            vals = np.array([row[col] for row in rows])
            fit = loglog_slope_floor(eps_arr, vals)
            _, half = slope_confidence(eps_arr, vals)
            fit["ci95"] = half
            slopes[col] = fit
    write_sweep_report(out / "sweep.csv", header, rows, slopes)
    print(f"sweep: {len(rows)} points -> {out / 'sweep.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------

def cmd_report(args) -> int:
    root = Path(args.out_dir_pos)
    run_files = sorted(root.rglob("run.json"))
    if not run_files:
        print(f"error: no completed runs under {root}", file=sys.stderr)
        return EXIT_VALIDATION
    missing = [str(rf.parent / "diagnostics.csv") for rf in run_files
               if not (rf.parent / "diagnostics.csv").exists()]
    if missing:
        print("error: missing diagnostics: " + ", ".join(missing),
              file=sys.stderr)
        return EXIT_VALIDATION

    from .io import DIAG_COLUMNS
    rows = []
    for rf in run_files:
        meta = json.loads(rf.read_text())
        cols = read_csv_columns(rf.parent / "diagnostics.csv")
        n = len(next(iter(cols.values()))) if cols else 0
        for i in range(n):
            key = (meta["scenario"], meta.get("epsilon"), meta.get("sigma"),
                   meta.get("delta"), float(cols["t"][i]))
            rows.append((key, [cols.get(c, np.full(n, np.nan))[i]
                               for c in DIAG_COLUMNS]))
    rows.sort(key=lambda kv: (kv[0][0], kv[0][1] or 0, kv[0][2] or 0,
                              kv[0][3] or 0, kv[0][4]))
    header = ["scenario", "eps", "sigma", "delta"] + list(DIAG_COLUMNS)
    out_rows = []
    for key, diag in rows:
        vals = [key[0]] + [("" if v is None else v) for v in key[1:4]]
        out_rows.append(vals + [None if (isinstance(v, float) and np.isnan(v))
                                else v for v in diag])
    write_csv(root / "summary.csv", header, out_rows)
    print(f"report: {len(out_rows)} rows -> {root / 'summary.csv'}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="monokin",
        description="Kinetic alignment laboratory: solvers, sweeps, reports.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario from a config file")
    p_run.add_argument("config")
    p_sweep = sub.add_parser("sweep", help="run a parameter sweep plan")
    p_sweep.add_argument("plan")
    p_report = sub.add_parser("report", help="merge diagnostics into summary.csv")
    p_report.add_argument("out_dir_pos", metavar="dir")

    for p in (p_run, p_sweep, p_report):
        p.add_argument("--out-dir", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--snapshot-times", default=None)

    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "sweep":
        return cmd_sweep(args)
    return cmd_report(args)


def entry():  # console-script shim
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
