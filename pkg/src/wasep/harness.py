"""Experiment orchestration: config parsing, replica scheduling, and
artifact emission.

Configs are plain text key=value files; command-line flags override file
values.  Every run writes a self-describing directory: config.resolved,
plot-ready CSVs, report.json with the resolved config and code version,
and meta.json holding the wall-clock timestamp (kept separate so that
the other artifacts are byte-identical for identical config and seed).

Replicas execute on a thread pool (the event loops release the GIL);
results are buffered and reduced in replica-index order so statistics do
not depend on completion order.  The default thread count comes from the
WASEP_THREADS environment variable.
"""

from __future__ import annotations

import concurrent.futures
import json
import os
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, burgers, dynamics, equilibrium, fluctuations, heatkernel
from .model import flat_initial, make_params, maximal_initial

DEFAULT_SEED = 20260826
THREADS_ENV_VAR = "WASEP_THREADS"

KINDS = ("equilibrium", "hydro", "kpz", "burgers", "kernel-audit", "coupled")

_INITIAL_CHOICES = ("flat", "step")
_BOUNDARY_CHOICES = ("zero-flux", "dirichlet")


class ConfigError(Exception):
    """Carries the full list of violations found while parsing."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


def _parse_float_list(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


def _parse_int_list(s):
    return tuple(int(v) for v in s.split(",") if v.strip())


@dataclass
class ExperimentConfig:
    """Validated description of one run; unknown keys are rejected."""

    kind: str
    N: int = 128
    alpha: float = 0.5
    replicas: int = 8
    seed: int = DEFAULT_SEED
    seed_was_defaulted: bool = False
    out: str | None = None
    threads: int = 1
    times: tuple = (0.25,)
    t: float = 0.1
    n_cells: int = 400
    initial: str = "flat"
    boundary: str = "zero-flux"
    epsilon: float = 0.05
    reservoir_density: float = 0.5
    sizes: tuple = ()
    grid: tuple = (-1.0, -0.5, 0.0, 0.5, 1.0)
    mshe_cells: int = 160
    mshe_support: float = 6.0
    mshe_dt: float = 1e-3
    mshe_replicas: int = 4000


# key -> (converter, validator or None, human-readable constraint)
_SCHEMA = {
    "kind": (str, lambda v: v in KINDS, f"kind must be one of {KINDS}"),
    "N": (int, lambda v: v >= 1, "N must be >= 1"),
    "alpha": (float, lambda v: 0.0 < v < 1.0, "alpha must lie in (0, 1)"),
    "replicas": (int, lambda v: v >= 1, "replicas must be >= 1"),
    "seed": (int, lambda v: 0 <= v < 2 ** 64, "seed must fit in 64 bits"),
    "out": (str, None, ""),
    "threads": (int, lambda v: v >= 1, "threads must be >= 1"),
    "times": (_parse_float_list, lambda v: all(t >= 0 for t in v),
              "times must be nonnegative"),
    "t": (float, lambda v: v > 0, "t must be positive"),
    "n_cells": (int, lambda v: v >= 2, "n_cells must be >= 2"),
    "initial": (str, lambda v: v in _INITIAL_CHOICES,
                f"initial must be one of {_INITIAL_CHOICES}"),
    "boundary": (str, lambda v: v in _BOUNDARY_CHOICES,
                 f"boundary must be one of {_BOUNDARY_CHOICES}"),
    "epsilon": (float, lambda v: 0 < v < 1, "epsilon must lie in (0, 1)"),
    "reservoir_density": (float, lambda v: 0.0 <= v <= 1.0,
                          "reservoir_density must lie in [0, 1]"),
    "sizes": (_parse_int_list, lambda v: all(n >= 1 for n in v),
              "sizes must be positive integers"),
    "grid": (_parse_float_list, None, ""),
    "mshe_cells": (int, lambda v: v >= 4 and v % 2 == 0,
                   "mshe_cells must be even and >= 4"),
    "mshe_support": (float, lambda v: v > 0, "mshe_support must be positive"),
    "mshe_dt": (float, lambda v: v > 0, "mshe_dt must be positive"),
    "mshe_replicas": (int, lambda v: v >= 2, "mshe_replicas must be >= 2"),
}


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse key=value lines; raise ConfigError listing every violation.

    ``overrides`` (typically CLI flags) take precedence over file values.
    A missing seed defaults to DEFAULT_SEED and is flagged in the config
    so reports can record that the default was used.
    """
    raw: dict[str, str] = {}
    violations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            violations.append(f"line {lineno}: expected key=value, got {stripped!r}")
            continue
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    if overrides:
        for k, v in overrides.items():
            if v is not None:
                raw[k] = str(v)

    values = {}
    for key, sval in raw.items():
        if key not in _SCHEMA:
            violations.append(f"unknown key {key!r}")
            continue
        conv, check, msg = _SCHEMA[key]
        try:
            v = conv(sval)
        except (TypeError, ValueError):
            violations.append(f"{key}={sval!r}: cannot convert")
            continue
        if check is not None and not check(v):
            violations.append(f"{key}={sval!r}: {msg}")
            continue
        values[key] = v

    if "kind" not in values:
        violations.append("missing required key 'kind'")
    if violations:
        raise ConfigError(violations)

    values["seed_was_defaulted"] = "seed" not in values
    if "threads" not in values:
        values["threads"] = default_threads()
    return ExperimentConfig(**values)


def _replica_map(fn, n_replicas: int, threads: int):
    """Run fn(replica_index) on a pool; return results in index order."""
    if threads <= 1:
        return [fn(r) for r in range(n_replicas)]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {pool.submit(fn, r): r for r in range(n_replicas)}
        buf = [None] * n_replicas
        for fut in concurrent.futures.as_completed(futures):
            buf[futures[fut]] = fut.result()
    return buf


def _resolved_config_text(config: ExperimentConfig) -> str:
    d = asdict(config)
    return "\n".join(f"{k}={d[k]}" for k in sorted(d)) + "\n"


def _base_report(config: ExperimentConfig) -> dict:
    return {"config": asdict(config), "version": __version__}


def write_run_artifacts(config: ExperimentConfig, report: dict,
                        csvs: dict[str, str]) -> None:
    """Emit config.resolved, report.json, per-table CSVs, and meta.json.

    Only meta.json carries the timestamp; everything else is a pure
    function of (config, seed)."""
    out = config.out
    if out is None:
        return
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "config.resolved"), "w") as f:
        f.write(_resolved_config_text(config))
    with open(os.path.join(out, "report.json"), "w") as f:
        json.dump(report, f, indent=2, sort_keys=True, default=_jsonify)
        f.write("\n")
    for name, text in csvs.items():
        with open(os.path.join(out, name), "w") as f:
            f.write(text)
    with open(os.path.join(out, "meta.json"), "w") as f:
        json.dump({"timestamp": time.time(),
                   "timestamp_iso": time.strftime("%Y-%m-%dT%H:%M:%S%z")},
                  f, indent=2)
        f.write("\n")


def _jsonify(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _csv_table(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    return "\n".join(lines) + "\n"


def _initial_bridge(config, params):
    if config.initial == "flat":
        return flat_initial(params.N)
    return maximal_initial(params.N)


def _initial_density(config, n_cells):
    """Cell-averaged initial density matching the configured bridge."""
    centers = (np.arange(n_cells) + 0.5) / n_cells
    if config.initial == "flat":
        return np.full(n_cells, 0.5)
    return np.where(centers < 0.5, 1.0, 0.0)


# --- runners --------------------------------------------------------------

def run_hydro_comparison(config: ExperimentConfig) -> dict:
    """Binned particle density vs the finite-volume entropy solution.

    For every size in config.sizes (falling back to config.N) and every
    macroscopic time, reports the L1 error of the replica-averaged
    density profile with its standard error across replicas.
    """
    sizes = config.sizes or (2 * config.N,)  # system sizes 2N
    times = config.times
    mode = (burgers.BoundaryMode.ZERO_FLUX if config.boundary == "zero-flux"
            else burgers.BoundaryMode.DIRICHLET_BLN)
    rows = []
    profiles = []
    for n2 in sizes:
        N = n2 // 2
        params = make_params(N, config.alpha)
        initial = _initial_bridge(config, params)
        sched = dynamics.Schedule.from_macro(times, "hydro", params)
        rho0 = burgers.CellField(_initial_density(config, config.n_cells))
        pde = [burgers.solve(rho0, t, mode).values for t in times]

        def one(rep, params=params, initial=initial, sched=sched):
            traj = dynamics.simulate(params, initial, sched, config.seed, rep)
            return np.stack([
                dynamics.density_profile(traj.heights[i], params, config.n_cells)
                for i in range(len(times))])

        per_rep = np.stack(_replica_map(one, config.replicas, config.threads))
        dx = 1.0 / config.n_cells
        for i, t in enumerate(times):
            # cell masses integrate to 1/2; PDE values are densities
            sim_density = per_rep[:, i, :] / dx
            mean_profile = sim_density.mean(axis=0)
            err = np.abs(mean_profile - pde[i]).sum() * dx
            per_replica_err = np.abs(sim_density - pde[i]).sum(axis=1) * dx
            se = per_replica_err.std(ddof=1) / np.sqrt(config.replicas)
            rows.append({"N2": 2 * N, "t": t, "l1_error": float(err),
                         "l1_error_se": float(se)})
            profiles.append((2 * N, t, mean_profile, pde[i]))
    report = _base_report(config)
    report["errors"] = rows
    csv_rows = []
    for n2, t, sim, pde_vals in profiles:
        for j in range(config.n_cells):
            csv_rows.append((n2, t, (j + 0.5) / config.n_cells,
                             float(sim[j]), float(pde_vals[j])))
    csvs = {"profiles.csv": _csv_table(
        ["N2", "t", "x", "simulated_density", "pde_density"], csv_rows)}
    write_run_artifacts(config, report, csvs)
    return report


def run_equilibrium_study(config: ExperimentConfig) -> dict:
    """Empirical covariance of the zoomed field against its closed form."""
    report = _base_report(config)
    grid = np.asarray(config.grid, dtype=np.float64)
    if grid.size == 0:
        report["covariance"] = []
        write_run_artifacts(config, report, {})
        return report
    params = make_params(config.N, config.alpha)
    table = equilibrium.build_partition_table(params)
    samples = equilibrium.sample_mu(table, config.replicas, config.seed)
    u = np.stack([equilibrium.rescale_u(s, params, grid) for s in samples])
    cov, se = equilibrium.empirical_covariance(u)
    rows = []
    for i, x in enumerate(grid):
        for j, y in enumerate(grid):
            rows.append({"x": float(x), "y": float(y),
                         "empirical": float(cov[i, j]),
                         "se": float(se[i, j]),
                         "limit": equilibrium.balpha_covariance(x, y)})
    report["covariance"] = rows
    csvs = {"covariance.csv": _csv_table(
        ["x", "y", "empirical", "se", "limit"],
        [(r["x"], r["y"], r["empirical"], r["se"], r["limit"]) for r in rows])}
    write_run_artifacts(config, report, csvs)
    return report


def run_kpz_study(config: ExperimentConfig) -> dict:
    """Midpoint-height comparison across sizes and against the reference."""
    sizes = config.sizes or (64, 128, 256, 512)
    params_list = [make_params(n2 // 2, config.alpha) for n2 in sizes]
    result = fluctuations.kpz_compare(
        params_list, config.t, config.replicas, config.seed,
        support=config.mshe_support, n_cells=config.mshe_cells,
        dt=config.mshe_dt)
    report = _base_report(config)
    report["ks_between_sizes"] = result["ks_between"]
    report["ks_to_reference"] = result["ks_to_reference"]
    report["ks_to_reference_unhalved"] = result["ks_to_reference_unhalved"]
    windows = {}
    for p in params_list:
        try:
            lo, hi = heatkernel.bulk_window(p, config.t, config.epsilon)
            windows[p.N] = {"lo": lo, "hi": hi, "empty": False,
                            "near_horizon": hi - lo < p.N}
        except ValueError:
            windows[p.N] = {"empty": True, "near_horizon": True}
    report["bulk_windows"] = windows
    report["variances"] = {str(n): float(np.var(s, ddof=1))
                           for n, s in result["samples"].items()}
    ref = result["reference"]
    report["reference_variance_h"] = float(np.var(ref["h"], ddof=1))
    report["reference_variance_h_unhalved"] = float(np.var(ref["h_unhalved"], ddof=1))
    csv_rows = []
    for n, s in sorted(result["samples"].items()):
        for r, v in enumerate(s):
            csv_rows.append((2 * n, r, float(v)))
    csvs = {"heights.csv": _csv_table(["N2", "replica", "h"], csv_rows)}
    write_run_artifacts(config, report, csvs)
    return report


def run_burgers(config: ExperimentConfig) -> dict:
    """Pure PDE run: solve, report mass and flat-IC exact error if apt."""
    mode = (burgers.BoundaryMode.ZERO_FLUX if config.boundary == "zero-flux"
            else burgers.BoundaryMode.DIRICHLET_BLN)
    rho0 = burgers.CellField(_initial_density(config, config.n_cells))
    states = [burgers.solve(rho0, t, mode) for t in config.times]
    report = _base_report(config)
    report["mass"] = [s.mass() for s in states]
    if config.initial == "flat":
        errs = []
        for s in states:
            m = burgers.integrated_height(s)
            x = np.arange(config.n_cells + 1) / config.n_cells
            exact = np.minimum(np.minimum(x, 1.0 - x), s.time)
            errs.append(float(np.max(np.abs(m - exact))))
        report["flat_height_sup_error"] = errs
    csv_rows = []
    for s in states:
        for j, v in enumerate(s.values):
            csv_rows.append((s.time, (j + 0.5) / config.n_cells, float(v)))
    csvs = {"density.csv": _csv_table(["t", "x", "density"], csv_rows)}
    write_run_artifacts(config, report, csvs)
    return report


def run_kernel_audit(config: ExperimentConfig) -> dict:
    """Kernel ratio report plus an eigen-vs-images agreement row."""
    params = make_params(config.N, config.alpha)
    times = [dynamics.macro_time_to_micro(t, "kpz", params) for t in config.times]
    rows = heatkernel.kernel_bound_audit(params, np.asarray(times),
                                         eps=config.epsilon)
    spec = heatkernel.KernelSpec(params=params, domain=heatkernel.Domain.SEGMENT)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xa0d17]))
    max_dev = 0.0
    for _ in range(200):
        t = float(rng.uniform(0.1, 2.0) * times[-1]) if times[-1] > 0 else 1.0
        k = int(rng.integers(1, 2 * params.N))
        ell = int(rng.integers(0, 2 * params.N + 1))
        a = heatkernel.dirichlet_kernel_eigen(spec, t, k, ell)
        b = heatkernel.dirichlet_kernel_images(spec, t, k, ell)
        max_dev = max(max_dev, abs(float(a) - float(b)))
    rows.append({"ratio": "eigen_images_max_abs_dev", "t": float(times[-1]),
                 "value": max_dev})
    report = _base_report(config)
    report["rows"] = rows
    csvs = {"audit.csv": _csv_table(
        ["ratio", "t", "value"],
        [(r["ratio"], r["t"], r["value"]) for r in rows])}
    write_run_artifacts(config, report, csvs)
    return report


def run_coupled_study(config: ExperimentConfig) -> dict:
    """Sign-change invariant scan and reservoir stationarity summary."""
    params = make_params(config.N, config.alpha)
    c = config.reservoir_density
    sched = dynamics.Schedule.from_macro(
        config.times if len(config.times) > 1 else
        np.linspace(0.0, config.times[-1], 21), "hydro", params)
    eta0 = ((np.diff(_initial_bridge(config, params)) + 1) // 2).astype(np.uint8)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xc0]))
    zeta_starts = (rng.random((config.replicas, 2 * params.N)) < c).astype(np.uint8)

    def one(rep):
        traj = dynamics.simulate_coupled(params, c, eta0, zeta_starts[rep],
                                         sched, config.seed, rep)
        violated = traj.max_sign_changes > traj.initial_sign_changes + 3
        zeta_mean = traj.zeta.mean(axis=0)  # time-averaged per-site density
        return violated, traj.max_sign_changes, traj.initial_sign_changes, zeta_mean

    results = _replica_map(one, config.replicas, config.threads)
    violations = sum(1 for v, *_ in results if v)
    site_density = np.mean([r[3] for r in results], axis=0)
    site_se = (np.std([r[3] for r in results], axis=0, ddof=1)
               / np.sqrt(config.replicas))
    report = _base_report(config)
    report["sign_change_violations"] = int(violations)
    report["max_sign_changes"] = int(max(r[1] for r in results))
    report["initial_sign_changes"] = int(results[0][2])
    report["site_density_max_dev"] = float(np.max(np.abs(site_density - c)))
    report["site_density_max_dev_in_se"] = float(
        np.max(np.abs(site_density - c) / np.maximum(site_se, 1e-300)))
    csvs = {"site_density.csv": _csv_table(
        ["site", "mean_density", "se"],
        [(k + 1, float(site_density[k]), float(site_se[k]))
         for k in range(2 * params.N)])}
    write_run_artifacts(config, report, csvs)
    return report


RUNNERS = {
    "equilibrium": run_equilibrium_study,
    "hydro": run_hydro_comparison,
    "kpz": run_kpz_study,
    "burgers": run_burgers,
    "kernel-audit": run_kernel_audit,
    "coupled": run_coupled_study,
}
