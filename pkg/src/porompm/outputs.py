"""Run-directory writers: CSV time series/profiles, legacy-VTK particle
snapshots and the per-step solve report. Schemas in docs/outputs.md.

All numeric output uses repr-exact formatting ('%.17g'), so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import os

import numpy as np

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % float(x)


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join("" if v is None else _fmt(v) for v in row) + "\n")


def write_solve_report_csv(path, records):
    """Columns: step, iter, rel_residual, krylov_iters."""
    rows = []
    for rec in records:
        ratios = rec.report.ratios
        kry = rec.report.krylov_iters
        for i, r in enumerate(ratios):
            rows.append((rec.step, i, r, kry[i] if i < len(kry) else 0))
    write_csv(path, ["step", "iter", "rel_residual", "krylov_iters"], rows)


def write_profile_csv(path, Z, P_num, P_exact):
    write_csv(path, ["Z", "P_numerical", "P_exact"],
              zip(Z, P_num, P_exact))


def write_history_csv(path, series):
    """series: iterable of (t, p_excess); missing samples stay blank."""
    write_csv(path, ["t", "p_excess"], series)


def write_snapshot(path, particles, step, t, p_excess=None):
    """Legacy-ASCII VTK polydata point cloud with the particle fields.

    Arrays: displacement, velocity, pressure, excess_pressure, porosity,
    jacobian. p_excess defaults to the pressure itself (gravity-free
    scenes); pass the steady-field-subtracted values otherwise.
    """
    from .tensors import det2

    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    n = len(particles)
    disp = particles.x - particles.X
    J = det2(particles.F) if n else np.zeros(0)
    if p_excess is None:
        p_excess = particles.p
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"particle snapshot step {step} t {_fmt(t)}\n")
        f.write("ASCII\nDATASET POLYDATA\n")
        f.write(f"POINTS {n} double\n")
        for i in range(n):
            f.write(f"{_fmt(particles.x[i, 0])} {_fmt(particles.x[i, 1])} 0\n")
        f.write(f"POINT_DATA {n}\n")

        def vec(name, arr):
            f.write(f"VECTORS {name} double\n")
            for i in range(n):
                f.write(f"{_fmt(arr[i, 0])} {_fmt(arr[i, 1])} 0\n")

        def sca(name, arr):
            f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            for i in range(n):
                f.write(f"{_fmt(arr[i])}\n")

        vec("displacement", disp)
        vec("velocity", particles.v)
        sca("pressure", particles.p)
        sca("excess_pressure", p_excess)
        sca("porosity", particles.phi)
        sca("jacobian", J)


def read_snapshot(path):
    """Minimal legacy-VTK reader for the files write_snapshot produces."""
    points = []
    scalars = {}
    vectors = {}
    with open(path) as f:
        lines = [ln.strip() for ln in f]
    i = 0
    n = 0
    while i < len(lines):
        ln = lines[i]
        if ln.startswith("POINTS"):
            n = int(ln.split()[1])
            for j in range(n):
                points.append([float(v) for v in lines[i + 1 + j].split()])
            i += n
        elif ln.startswith("VECTORS"):
            name = ln.split()[1]
            arr = [[float(v) for v in lines[i + 1 + j].split()] for j in range(n)]
            vectors[name] = np.asarray(arr)[:, :2] if n else np.zeros((0, 2))
            i += n
        elif ln.startswith("SCALARS"):
            name = ln.split()[1]
            arr = [float(lines[i + 2 + j]) for j in range(n)]
            scalars[name] = np.asarray(arr)
            i += n + 1
        i += 1
    return np.asarray(points)[:, :2] if n else np.zeros((0, 2)), vectors, scalars


class RunWriter:
    """Owns one run directory: config copy, run log, solve report, outputs."""

    def __init__(self, out_dir, config_text=None):
        self.dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self._log = open(os.path.join(out_dir, "run.log"), "w")
        if config_text is not None:
            with open(os.path.join(out_dir, "config.yaml"), "w") as f:
                f.write(config_text)

    def log(self, msg):
        self._log.write(msg + "\n")
        self._log.flush()

    def path(self, name):
        return os.path.join(self.dir, name)

    def snapshot(self, particles, step, t, p_excess=None):
        write_snapshot(self.path(f"snap_{step:06d}.vtk"), particles, step, t,
                       p_excess=p_excess)

    def finalize(self, records):
        write_solve_report_csv(self.path("solve_report.csv"), records)
        self._log.close()
