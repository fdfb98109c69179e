"""Scan orchestration and CSV persistence.

A run evaluates one task at every point of the (optional) block and scan axes.
Points are independent; with ``jobs > 1`` they are farmed out to worker
processes and collected in axis order, so the output does not depend on the
number of workers.
"""
import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bath, equilibrium, markov, qle
from .config import RunConfig
from .errors import ConfigError, NumericalError
from .gaussian import log_negativity, log_negativity_batch, symplectic_eigenvalues_batch

log = logging.getLogger(__name__)

PAPER_N_GRID = 10_000
PAPER_S_MAX_FACTOR = 10.0  # s_max = factor * omega_c (+ gap)
MARKOV_DT = 0.05

T_LABEL = "t[1/Omega0]"
EN_LABEL = "E_N[bits-base2]"
LAMBDA_LABEL = "lambda_min[1]"
RMAX_LABEL = "r_max[c/Omega0]"
NONMONO_LABEL = "non_monotone[bool]"
_NAMES = ("Q1", "Q2", "P1", "P2")
_UNITS = {0: "1/Omega0", 1: "1", 2: "Omega0"}  # by number of momenta in the pair
COV_INDEX = [(i, j) for i in range(4) for j in range(i, 4)]
COV_LABELS = tuple(
    f"cov_{_NAMES[i]}{_NAMES[j]}[{_UNITS[(i >= 2) + (j >= 2)]}]" for i, j in COV_INDEX
)


@dataclass(frozen=True)
class ScanRecord:
    """One CSV row: column labels (with units) and their values."""

    columns: tuple
    values: tuple
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if len(self.columns) != len(self.values):
            raise ValueError("columns and values differ in length")
        object.__setattr__(self, "values", tuple(float(v) + 0.0 for v in self.values))  # no -0
        bad = [c for c, v in zip(self.columns, self.values) if not math.isfinite(v)]
        if bad:
            raise NumericalError(f"non-finite value in column(s) {', '.join(bad)}")

    def __getitem__(self, label):
        return self.values[self.columns.index(label)]


# ---------------------------------------------------------------------------
# solver plumbing


def time_grid(cfg: RunConfig):
    """Auxiliary frequency grid of the time-domain solver."""
    spec = cfg.bath
    gap = spec.omega0 if spec.geometry == bath.WAVEGUIDE else 0.0
    mode = cfg.grid
    if mode == "auto":
        mode = qle.QUADRATIC if spec.geometry == bath.WAVEGUIDE else qle.UNIFORM
    s_max = cfg.s_max
    n_grid = cfg.n_grid
    if cfg.paper_scale:
        n_grid = n_grid or PAPER_N_GRID
        s_max = s_max or gap + PAPER_S_MAX_FACTOR * spec.omega_c
    if n_grid is None:
        grid = qle.default_grid(spec, cfg.t_max, s_max=s_max)
        if grid.mode != mode:
            raise ConfigError(f"grid {mode} does not fit geometry {spec.geometry}")
        return grid
    if s_max is None:
        s_max = gap + (10.0 if mode == qle.QUADRATIC else 20.0) * spec.omega_c
    return qle.AuxGrid(mode, n_grid, s_max, gap if mode == qle.QUADRATIC else 0.0)


def _sample_indices(times, output_dt):
    dt = times[1] - times[0] if times.size > 1 else 1.0
    step = max(1, int(round(output_dt / dt)))
    idx = np.arange(0, times.size, step)
    if idx[-1] != times.size - 1:
        idx = np.append(idx, times.size - 1)
    return idx


def _time_domain(cfg):
    res = qle.simulate(cfg.system, cfg.bath, cfg.t_max, grid=time_grid(cfg), dt=cfg.dt)
    return res.times, res.covariances, res.log_negativity


def _markov_params(cfg):
    return markov.build_markov_params(cfg.system, cfg.bath, g=cfg.g, omega0=cfg.effective_vh_frequency)


def _markov(cfg):
    params = _markov_params(cfg)
    dt = cfg.dt or min(MARKOV_DT, cfg.output_dt)
    solve = markov.approximate_coefficients if cfg.solver == "MarkovApprox" else markov.integrate_coefficients
    coeffs = solve(params, cfg.system, cfg.t_max, dt)
    cov = markov.covariance_from_coefficients(coeffs, params)
    return coeffs.times, cov, log_negativity_batch(cov)


def trajectory(cfg):
    """``(times, covariances, E_N)`` from the time-domain or effective-model solver."""
    if cfg.solver == "TimeDomain":
        return _time_domain(cfg)
    if cfg.solver in ("Markov", "MarkovApprox"):
        return _markov(cfg)
    raise ConfigError(f"solver {cfg.solver} has no time evolution; use TimeDomain, Markov or MarkovApprox")


def _cov_values(cov):
    return tuple(cov[i, j] for i, j in COV_INDEX)


# ---------------------------------------------------------------------------
# tasks; each returns (columns, list of value tuples) for one parameter point


def _task_evolve(cfg):
    times, covs, en = trajectory(cfg)
    idx = _sample_indices(times, cfg.output_dt)
    lam = symplectic_eigenvalues_batch(covs[idx])[:, 0]
    cols = (T_LABEL, EN_LABEL, LAMBDA_LABEL) + COV_LABELS
    rows = [(times[i], en[i], lam[k]) + _cov_values(covs[i]) for k, i in enumerate(idx)]
    return cols, rows


def _task_markov(cfg):
    if cfg.solver not in ("Markov", "MarkovApprox"):
        raise ConfigError("the markov task needs solver = Markov or MarkovApprox")
    return _task_evolve(cfg)


def _task_asymptotic(cfg):
    if cfg.solver == "Equilibrium":
        cov = equilibrium.equilibrium_covariance(cfg.system, cfg.bath)
        return (EN_LABEL,) + COV_LABELS, [(log_negativity(cov),) + _cov_values(cov)]
    if cfg.solver in ("Markov", "MarkovApprox"):
        params = _markov_params(cfg)
        return (EN_LABEL,), [(markov.asymptotic_negativity(params),)]
    raise ConfigError("the asymptotic task needs solver = Equilibrium, Markov or MarkovApprox")


def _task_rmax(cfg):
    if cfg.solver != "Equilibrium":
        raise ConfigError("the rmax task needs solver = Equilibrium")
    if (cfg.scan and cfg.scan.name == "r") or (cfg.block and cfg.block.name == "r"):
        raise ConfigError("r cannot be an axis of an rmax run")
    mode = equilibrium.ASYMPTOTIC if cfg.rmax_mode == "Asymptotic" else equilibrium.TRANSIENT
    res = equilibrium.find_rmax(cfg.system, cfg.bath, mode=mode, t_max=cfg.t_max, r_lo=cfg.r_lo,
                                r_hi=cfg.r_hi, tol=cfg.rmax_tol)
    return (RMAX_LABEL, NONMONO_LABEL), [(res.r_max, float(res.non_monotone))]


def _task_scan(cfg):
    if cfg.scan is None:
        raise ConfigError("the scan task needs a scan axis")
    if cfg.solver == "Equilibrium":
        cols, rows = _task_asymptotic(cfg)
        return cols[:1], [rows[0][:1]]
    _, _, en = trajectory(cfg)
    value = en[-1] if cfg.metric == "final" else float(np.max(en))
    label = f"E_N@t={cfg.t_max:g}[bits-base2]" if cfg.metric == "final" else "max_t E_N[bits-base2]"
    return (label,), [(value,)]


TASKS = {
    "evolve": _task_evolve,
    "markov": _task_markov,
    "asymptotic": _task_asymptotic,
    "rmax": _task_rmax,
    "scan": _task_scan,
}


# ---------------------------------------------------------------------------
# orchestration


def _points(cfg):
    """Block-major list of ``((axis, value), ...)`` tuples."""
    axes = [a for a in (cfg.block, cfg.scan) if a is not None]
    points = [()]
    for axis in axes:
        points = [p + ((axis, v),) for p in points for v in axis.values]
    return points


def _run_point(args):
    cfg, task, point = args
    lead_cols = tuple(axis.label for axis, _ in point)
    lead_vals = tuple(v for _, v in point)
    for axis, value in point:
        cfg = cfg.at(axis.name, value)
    start = time.perf_counter()
    cols, rows = TASKS[task](cfg)
    elapsed = time.perf_counter() - start
    share = elapsed / max(1, len(rows))
    return [ScanRecord(lead_cols + tuple(cols), lead_vals + tuple(r), share) for r in rows]


def resolve_task(cfg, task=None):
    if task is not None and cfg.task is not None and task != cfg.task:
        raise ConfigError(f"subcommand {task!r} conflicts with task = {cfg.task} in the configuration")
    task = task or cfg.task
    if task is None:
        raise ConfigError("no task: give a subcommand or set 'task' in the configuration")
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}")
    return task


def run(config: RunConfig, task=None, jobs=1):
    """Evaluate ``task`` over every block/scan point; records come back in axis order."""
    task = resolve_task(config, task)
    points = _points(config)
    work = [(config, task, p) for p in points]
    log.info("%s: %d point(s), solver %s", task, len(points), config.solver)
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_point, work))
    else:
        chunks = []
        for i, w in enumerate(work):
            chunks.append(_run_point(w))
            log.info("point %d/%d done", i + 1, len(work))
    return [rec for chunk in chunks for rec in chunk]


# ---------------------------------------------------------------------------
# CSV


def format_value(v):
    return format(float(v), ".17g")


def write_csv(records, path_or_file):
    """Header with unit-labelled columns, then one row per record at 17 significant digits.

    ``wall_time`` is not written so that identical runs give identical files.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    columns = records[0].columns
    if any(r.columns != columns for r in records):
        raise ValueError("records have inconsistent columns")

    def dump(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for r in records:
            writer.writerow([format_value(v) for v in r.values])

    if hasattr(path_or_file, "write"):
        dump(path_or_file)
    else:
        with open(path_or_file, "w", encoding="utf-8", newline="") as fh:
            dump(fh)


def read_csv(path_or_file):
    """Inverse of :func:`write_csv`."""
    def load(fh):
        reader = csv.reader(fh)
        header = tuple(next(reader))
        return [ScanRecord(header, tuple(float(x) for x in row)) for row in reader if row]

    if hasattr(path_or_file, "read"):
        return load(path_or_file)
    with open(path_or_file, encoding="utf-8", newline="") as fh:
        return load(fh)
