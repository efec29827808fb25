"""Scenario execution and data emission (CSV time series, snapshots, manifest)."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .checks import CheckResult, Diagnostics
from .config import ScenarioConfig
from .constants import CONSTANT_SET
from .engine import CoolingModel, Sample, run_process
from .entropy import araki_lieb_check, cm_distribution
from .momentum import Distribution

log = logging.getLogger(__name__)

ENTROPY_HEADER = ["time", "phase", "cycle", "step", "substep", "S_I", "S_cm", "S_tot", "S_R",
                  "I_C", "al_lower_margin", "al_upper_margin", "al_violation", "trace", "overdraft"]
FIG4_HEADER = ["phase", "time", "cycle", "step", "substep", "S_cm_multi", "S_cm_single",
               "S_I_multi", "S_I_single", "S_tot_multi", "S_tot_single"]
BOUNDARY_HEADER = ["cycle", "time", "S_I", "S_cm", "S_tot", "S_R", "I_C"]
AL_TOL = 1e-9


def fmt(x) -> str:
    """Fixed 12-significant-digit text form used in every emitted file."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


class _Csv:
    def __init__(self, path: Path, header):
        self.path = path
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(header)

    def row(self, values):
        self._w.writerow([fmt(v) for v in values])

    def close(self):
        self._fh.close()


def entropy_row(s: Sample) -> list:
    r = s.record
    al = araki_lieb_check(r, AL_TOL)
    return [r.time, s.phase, s.cycle, s.step, s.substep, r.S_I, r.S_cm, r.S_tot, r.S_R, r.I_C,
            al.lower_margin, al.upper_margin, not al.passed, s.trace, s.overdraft]


def write_distribution(path: Path, dist: Distribution):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["P", "f"])
        for p, v in zip(dist.grid.points, dist.values):
            w.writerow([fmt(p), fmt(v)])


def write_populations(path: Path, s: Sample):
    f = s.field
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["P", *f.labels])
        for i, p in enumerate(f.grid.points):
            w.writerow([fmt(p), *(fmt(v) for v in f.populations[:, i])])


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunResult:
    output_dir: Path
    manifest: dict
    checks: list[CheckResult]
    initial: Distribution
    final: Distribution
    n_samples: int


def _fig4(cfg: ScenarioConfig, out: Path) -> Path:
    cc = cfg.cooling
    multi_n = cc.acc_states if cc.acc_states > 1 else 10
    multi = dataclasses.replace(cc, acc_states=multi_n, max_cycles=cfg.fig4_cycles,
                                fractions=cc.fractions if cc.acc_states > 1 else None)
    single = dataclasses.replace(cc, acc_states=1, max_cycles=cfg.fig4_cycles, fractions=None)
    path = out / "fig4_entropy.csv"
    w = _Csv(path, FIG4_HEADER)
    try:
        for a, b in zip(run_process(multi), run_process(single)):
            ra, rb = a.record, b.record
            w.row([a.phase, ra.time, a.cycle, a.step, a.substep, ra.S_cm, rb.S_cm,
                   ra.S_I, rb.S_I, ra.S_tot, rb.S_tot])
    finally:
        w.close()
    return path


PLOT_SCRIPT = """\
# gnuplot script emitted by molcool; run with: gnuplot plots.gp
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,600
set output 'fig4_entropy.png'
set xlabel 'cycle phase (each step = 1/3 cycle)'
set ylabel 'entropy (k_B)'
plot 'fig4_entropy.csv' using 1:6 with lines, '' using 1:7 with linespoints pt 7 ps 0.3, \\
     '' using 1:8 with lines, '' using 1:9 with linespoints pt 7 ps 0.3, \\
     '' using 1:10 with lines, '' using 1:11 with linespoints pt 7 ps 0.3
set output 'fig5_entropy.png'
set xlabel 'cycle phase'
plot 'entropy.csv' using 2:6 with lines, '' using 2:7 with lines, '' using 2:8 with lines, \\
     '' using 2:($7+$6) with lines title 'S_cm+S_I', '' using 2:(abs($7-$6)) with lines title '|S_cm-S_I|'
set output 'fig6_fP.png'
set xlabel 'P (hbar k)'
set ylabel 'f(P)'
plot 'fP_initial.csv' using 1:2 with lines title 'initial', 'fP_final.csv' using 1:2 with lines title 'final'
"""


def run(cfg: ScenarioConfig, output_dir: str | Path | None = None) -> RunResult:
    """Execute a scenario and write its data files plus ``manifest.json``."""
    t0 = time.perf_counter()
    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cc = cfg.cooling
    model = CoolingModel(cc)
    diag = Diagnostics(trace_tol=cc.trace_tol, overdraft_budget=cc.overdraft_budget, al_tol=AL_TOL)
    files: list[Path] = []

    ent_csv = _Csv(out / "entropy.csv", ENTROPY_HEADER)
    files.append(ent_csv.path)
    bnd_csv = None
    if cfg.fig5:
        bnd_csv = _Csv(out / "fig5_cycle_boundaries.csv", BOUNDARY_HEADER)
        files.append(bnd_csv.path)
    initial = final = None
    try:
        for s in run_process(cc, model=model):
            diag.update(s)
            ent_csv.row(entropy_row(s))
            if s.step == 0:
                initial = cm_distribution(s.field)
            if s.step_end and s.step in (0, 3) and bnd_csv is not None:
                r = s.record
                bnd_csv.row([s.cycle, r.time, r.S_I, r.S_cm, r.S_tot, r.S_R, r.I_C])
            if s.step_end and s.step > 0 and cfg.fig3:
                p = out / f"populations_cycle{s.cycle}_step{s.step}.csv"
                write_populations(p, s)
                files.append(p)
            last = s
        final = cm_distribution(last.field)
    finally:
        ent_csv.close()
        if bnd_csv is not None:
            bnd_csv.close()

    if cfg.fig6:
        for name, dist in (("fP_initial.csv", initial), ("fP_final.csv", final)):
            write_distribution(out / name, dist)
            files.append(out / name)
    if cfg.fig4:
        files.append(_fig4(cfg, out))
    if cfg.plot_script:
        (out / "plots.gp").write_text(PLOT_SCRIPT, encoding="utf-8")
        files.append(out / "plots.gp")

    manifest = {
        "version": __version__,
        "config_hash": hashlib.sha256(cfg.canonical().encode()).hexdigest(),
        "constant_set": CONSTANT_SET,
        "files": {p.name: sha256(p) for p in sorted(files)},
        "checks": {c.name: c.passed for c in diag.results()},
        "wall_clock_s": round(time.perf_counter() - t0, 3),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    log.info("wrote %d files to %s", len(files) + 1, out)
    return RunResult(out, manifest, diag.results(), initial, final, diag.n)
