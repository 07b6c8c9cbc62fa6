"""CSV/JSON persistence for runs, snapshots, and diagnostics.

All writes are atomic (temp file + rename) and numeric formatting is
fixed at 12 significant digits, so regenerating output from the same
run is byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import PhaseGrid, TorusGrid

FMT = "%.12g"

DIAG_COLUMNS = ("t", "mass", "momentum", "energy", "mod_energy", "boltzmann",
                "rel_entropy", "fisher", "e_min", "e_total", "w1_rho",
                "w1_mom", "w1_g", "xi_m2")


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    return FMT % v


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header: list[str], rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v
                              for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_eas_snapshot(out_dir, t: float, x, rho, u, e):
    path = Path(out_dir) / f"eas_t{t:.4f}.csv"
    write_csv(path, ["x", "rho", "u", "e"], zip(x, rho, u, e))
    return path


def write_profile_snapshot(out_dir, t: float, g: np.ndarray, grid: PhaseGrid,
                           prefix: str = "g"):
    """Matrix CSV (row = x-cell) plus a JSON sidecar with grid metadata."""
    out_dir = Path(out_dir)
    base = f"{prefix}_t{t:.4f}"
    lines = [",".join(FMT % v for v in row) for row in g]
    atomic_write_text(out_dir / f"{base}.csv", "\n".join(lines) + "\n")
    meta = {
        "t": t, "nx": grid.x.n_cells, "nxi": grid.xi.n_cells,
        "xi_max": grid.xi.xi_max, "length": grid.x.length,
        "layout": "rows are x-cells, columns are xi-cells",
    }
    atomic_write_text(out_dir / f"{base}.json",
                      json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out_dir / f"{base}.csv"


def write_diagnostics(out_dir, records: list[dict]):
    """Diagnostics table with the fixed schema; absent values are blank."""
    rows = [[rec.get(c) for c in DIAG_COLUMNS] for rec in records]
    path = Path(out_dir) / "diagnostics.csv"
    write_csv(path, list(DIAG_COLUMNS), rows)
    return path


def write_trajectories(out_dir, times, X, sigma, det=None):
    """Characteristic trajectory table: t, X, Sigma components, det_J.

    Batched trajectories are written one block per trajectory with an
    index column.
    """
    nt, B, d = sigma.shape
    header = ["traj", "t", "X"] + [f"Sigma_{k + 1}" for k in range(d)] + ["det_J"]
    rows = []
    for b in range(B):
        for k in range(nt):
            row = [FMT % b, _fmt(times[k]), _fmt(X[k, b])]
            row += [_fmt(sigma[k, b, j]) for j in range(d)]
            row.append(_fmt(det[k, b]) if det is not None else "")
            rows.append(row)
    path = Path(out_dir) / "trajectories.csv"
    write_csv(path, header, rows)
    return path


def write_swarm(out_dir, swarm, seed: int, label: str = "swarm"):
    path = Path(out_dir) / f"{label}.csv"
    write_csv(path, ["i", "m", "x", "v"],
              ((i, m, x, v) for i, (m, x, v)
               in enumerate(zip(swarm.masses, swarm.x, swarm.v))))
    meta = {"n": int(swarm.n), "seed": int(seed)}
    atomic_write_text(Path(out_dir) / f"{label}_meta.json",
                      json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def write_metadata(out_dir, cfg, extra: dict | None = None):
    from dataclasses import asdict
    meta = asdict(cfg)
    if meta.get("snapshot_times") is not None:
        meta["snapshot_times"] = list(meta["snapshot_times"])
    if extra:
        meta.update(extra)
    path = Path(out_dir) / "run.json"
    atomic_write_text(path, json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def write_sweep_report(path, header: list[str], rows: list[dict],
                       slopes: dict):
    """Sweep table with a footer block of fitted slopes.

    Footer lines start with '#' so column readers can skip them; each
    carries slope, floor, and r2 for one metric column.
    """
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(c)) for c in header))
    for key in sorted(slopes):
        s = slopes[key]
        lines.append(f"# slope,{key},{FMT % s['slope']},floor,"
                     f"{_fmt(s['floor'])},r2,{_fmt(s['r2'])}")
    atomic_write_text(path, "\n".join(lines) + "\n")
    return Path(path)


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a headed CSV (skipping '#' footer lines) into named arrays."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = text[0].split(",")
    data = [[] for _ in header]
    for line in text[1:]:
        if not line or line.startswith("#"):
            continue
        for col, val in zip(data, line.split(",")):
            col.append(float(val) if val else np.nan)
    return {name: np.asarray(col) for name, col in zip(header, data)}
