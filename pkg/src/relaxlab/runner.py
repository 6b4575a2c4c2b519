"""Experiment orchestration: builds the configured data family, runs the
limit/corrector solves once, runs the stiff system per ladder rung, and
assembles the error table with rate fits."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .errors import InsufficientPoints
from .euler import RelaxParams, default_dt, solve_euler
from .families import corrector_init, em_initial, euler_initial, limit_density
from .harness import (
    ErrorRow,
    ErrorTable,
    InitialLayer,
    error_report_em,
    error_report_thm11,
    error_report_thm12,
    fit_rate,
)
from .limit import LimitBundle, solve_corrector, solve_porous_medium
from .maxwell import (
    EMLimitBundle,
    EMParams,
    solve_drift_diffusion,
    solve_em,
    solve_em_corrector,
)
from .pressure import PressureLaw
from .spectral import Grid

# fitted-slope acceptance bands per (system, preparedness)
RATE_BANDS = {
    ("euler", "ill"): {
        "sup_rho_err_Hm1": (0.85, 1.15),
        "l2t_grad_rho_err_Hm1": (0.85, np.inf),
        "l2t_q_layer_err_Hm1": (0.85, 1.15),
        "l2t_rho_err_L2": (0.85, 1.15),
    },
    ("euler", "well"): {
        "sup_exp_rho_err_Hm2": (1.7, 2.3),
        "l2t_exp_q_err_Hm2": (1.7, 2.3),
        "l2t_q_star_err_Hm2": (0.85, 1.15),
    },
    ("em", "ill"): {
        "sup_rho_err_Hm1": (0.8, np.inf),
        "sup_E_err_Hm1": (0.8, np.inf),
    },
}


@dataclass
class RunReport:
    config: ExperimentConfig
    table: ErrorTable
    fits: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)


def _sample_grids(T: float, nsamples: int, refine: int):
    report = np.linspace(0.0, T, nsamples + 1)
    dense = np.linspace(0.0, T, nsamples * refine + 1)
    return report, dense


def layer_times(eps: float, T: float, spacing_frac: float = 0.125,
                horizon: float = 15.0) -> np.ndarray:
    """Sample times resolving the exp(-t/eps^2) transient near t = 0."""
    h = spacing_frac * eps**2
    n = int(np.floor(min(horizon * eps**2, T) / h))
    return h * np.arange(1, n + 1)


def rung_sample_times(report_times, eps: float, spacing_frac: float = 0.125,
                      horizon: float = 15.0) -> np.ndarray:
    """Report grid augmented with layer-resolving points, deduplicated."""
    T = float(report_times[-1])
    merged = np.union1d(np.asarray(report_times, dtype=float),
                        layer_times(eps, T, spacing_frac, horizon))
    keep = [merged[0]]
    for t in merged[1:]:
        if t - keep[-1] > 1e-12:
            keep.append(t)
    return np.asarray(keep)


def _interp_pair(src_times, fields, t):
    ts = np.asarray(src_times)
    if t <= ts[0]:
        return fields[0]
    if t >= ts[-1]:
        return fields[-1]
    j = int(np.searchsorted(ts, t, side="right")) - 1
    if abs(ts[j] - t) < 1e-12:
        return fields[j]
    w = (t - ts[j]) / (ts[j + 1] - ts[j])
    a, b = fields[j], fields[j + 1]
    if hasattr(a, "values"):
        from .spectral import ScalarField
        return ScalarField(a.grid, (1.0 - w) * a.values + w * b.values)
    from .spectral import VectorField
    return VectorField(a.grid, (1.0 - w) * a.components + w * b.components)


def _interp_fields(src_times, fields, new_times):
    return [_interp_pair(src_times, fields, t) for t in new_times]


def _limit_at(bundle, times):
    """Limit bundle interpolated (linearly in time) onto a new sample grid."""
    times = np.asarray(times, dtype=float)
    if isinstance(bundle, LimitBundle):
        return LimitBundle(bundle.grid, times,
                           _interp_fields(bundle.times, bundle.rho, times),
                           _interp_fields(bundle.times, bundle.q, times),
                           bundle.diagnostics)
    return EMLimitBundle(bundle.grid, times,
                         _interp_fields(bundle.times, bundle.rho, times),
                         _interp_fields(bundle.times, bundle.phi, times),
                         _interp_fields(bundle.times, bundle.E, times),
                         _interp_fields(bundle.times, bundle.q, times),
                         bundle.diagnostics)


def _corrector_at(corr, times):
    times = np.asarray(times, dtype=float)
    out = type(corr).__new__(type(corr))
    out.__dict__.update(corr.__dict__)
    out.times = times
    for name in ("rho1", "q1", "E1", "B1"):
        if hasattr(corr, name):
            setattr(out, name, _interp_fields(corr.times, getattr(corr, name), times))
    return out


def euler_time_step(cfg: ExperimentConfig, law: PressureLaw, grid: Grid) -> float:
    if cfg.dt > 0:
        return cfg.dt
    rho_max = 1.0 + 3.0 * cfg.delta
    u_max = max(cfg.u_amp, 1.0)
    dt = default_dt(grid, law, u_max=u_max, rho_max=rho_max, safety=0.25)
    if cfg.scheme_order == 2:
        dt *= 0.5  # smaller explicit-diffusion stability region for SBDF2
    return dt


def _euler_shared(cfg: ExperimentConfig):
    grid = Grid(cfg.d, cfg.N, cfg.L)
    law = PressureLaw(cfg.a, cfg.gamma)
    rho0_star = limit_density(grid, cfg.family, cfg.delta, cfg.mode, cfg.seed)
    dt = euler_time_step(cfg, law, grid)
    dt_slow = 10.0 * dt
    refine = max(1, int(np.ceil(cfg.T / cfg.nsamples / (5.0 * dt_slow))))
    report_times, dense_times = _sample_grids(cfg.T, cfg.nsamples, refine)
    limit_dense = solve_porous_medium(rho0_star, cfg.T, dt_slow, law,
                                      sample_times=dense_times,
                                      order=cfg.scheme_order)
    corrector_dense = None
    if cfg.preparedness == "well":
        rho1_0 = corrector_init(grid, cfg.rho1_scenario, cfg.delta)
        corrector_dense = solve_corrector(limit_dense, rho1_0, dt_slow, law,
                                          sample_times=dense_times)
    return grid, law, rho0_star, dt, report_times, limit_dense, corrector_dense


def _euler_rung(cfg, shared, eps: float) -> tuple[ErrorRow, dict]:
    grid, law, rho0_star, dt, report_times, limit_dense, corr_dense = shared
    rho1_0 = corr_dense.rho1_init if corr_dense is not None else None
    init = euler_initial(rho0_star, law, cfg.preparedness, eps,
                         u_amp=cfg.u_amp, mode=cfg.mode, rho1_init=rho1_0)
    params = RelaxParams(eps=eps, dt=dt, T=cfg.T)
    times = rung_sample_times(report_times, eps)
    limit_rung = _limit_at(limit_dense, times)
    t0 = time.perf_counter()
    traj = solve_euler(init, params, law, times, m=cfg.m,
                       order=cfg.scheme_order)
    wall = time.perf_counter() - t0
    if cfg.preparedness == "well":
        corr_rung = _corrector_at(corr_dense, times)
        row = error_report_thm12(traj, limit_rung, corr_rung, eps, cfg.m)
    else:
        layer = InitialLayer(init.q, eps)
        row = error_report_thm11(traj, limit_rung, layer, cfg.m)
    mass = traj.diagnostics["mass"]
    diag = {
        "mass_drift": float(np.max(np.abs(mass - mass[0]))),
        "guard": "ok",
        "wall_seconds": wall,
        "dt": dt,
    }
    return row, diag


def em_time_step(cfg: ExperimentConfig, law: PressureLaw, grid: Grid,
                 eps: float) -> float:
    if cfg.dt > 0:
        return min(cfg.dt, 0.2 * eps**2)
    rho_max = 1.0 + 3.0 * cfg.delta
    dt_fluid = 0.25 * grid.dx**2 / law.dp(rho_max)
    return min(dt_fluid, 0.2 * eps**2)


def _em_shared(cfg: ExperimentConfig):
    grid = Grid(3, cfg.N, cfg.L)
    law = PressureLaw(cfg.a, cfg.gamma)
    rho0_star = limit_density(grid, cfg.family, cfg.delta, cfg.mode, cfg.seed)
    dt_limit = min(1e-3, cfg.T / (cfg.nsamples * 4))
    # keep the 3D bundles lean: sample just finely enough for the corrector
    refine = max(1, int(np.ceil(cfg.T / cfg.nsamples / (10.0 * dt_limit))))
    report_times, dense_times = _sample_grids(cfg.T, cfg.nsamples, refine)
    limit_dense = solve_drift_diffusion(rho0_star, cfg.T, dt_limit, law,
                                        sample_times=dense_times,
                                        order=cfg.scheme_order)
    corr_dense = solve_em_corrector(limit_dense, cfg.Be, dt_limit, law,
                                    sample_times=dense_times)
    return grid, law, rho0_star, report_times, limit_dense, corr_dense


def _em_rung(cfg, shared, eps: float) -> tuple[ErrorRow, dict]:
    grid, law, rho0_star, report_times, limit_dense, corr_dense = shared
    init = em_initial(rho0_star, law, cfg.Be, eps, u_amp=cfg.u_amp, mode=cfg.mode)
    dt = em_time_step(cfg, law, grid, eps)
    params = EMParams(eps=eps, Be=tuple(cfg.Be), dt=dt, T=cfg.T)
    times = rung_sample_times(report_times, eps, spacing_frac=0.25, horizon=12.0)
    limit_rung = _limit_at(limit_dense, times)
    corr_rung = _corrector_at(corr_dense, times)
    t0 = time.perf_counter()
    traj = solve_em(init, params, law, times, m=cfg.m)
    wall = time.perf_counter() - t0
    layer = InitialLayer(init.q, eps)
    row = error_report_em(traj, limit_rung, corr_rung, layer, cfg.m)
    mass = traj.diagnostics["mass"]
    diag = {
        "mass_drift": float(np.max(np.abs(mass - mass[0]))),
        "gauss_residual_max": float(np.max(traj.diagnostics["gauss_residual"])),
        "div_b_max": float(np.max(traj.diagnostics["div_b"])),
        "guard": "ok",
        "wall_seconds": wall,
        "dt": dt,
    }
    return row, diag


def _worker(args):
    cfg, eps = args
    if cfg.system == "em":
        shared = _em_shared(cfg)
        return _em_rung(cfg, shared, eps)
    shared = _euler_shared(cfg)
    return _euler_rung(cfg, shared, eps)


def eps_sweep(cfg: ExperimentConfig, eps_values=None, threads: int = 1) -> RunReport:
    """Run the ladder and assemble the error table plus rate fits."""
    cfg.validate()
    ladder = tuple(eps_values) if eps_values is not None else tuple(cfg.eps_ladder)
    if len(ladder) == 0:
        raise InsufficientPoints("empty eps ladder")

    table = ErrorTable()
    diagnostics = {}
    timings = {}
    t_start = time.perf_counter()
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_worker, [(cfg, e) for e in ladder]))
    else:
        if cfg.system == "em":
            shared = _em_shared(cfg)
            results = [_em_rung(cfg, shared, e) for e in ladder]
        else:
            shared = _euler_shared(cfg)
            results = [_euler_rung(cfg, shared, e) for e in ladder]
    for eps, (row, diag) in zip(ladder, results):
        table.add(row)
        diagnostics[f"eps={eps:g}"] = diag
        timings[f"eps={eps:g}"] = diag["wall_seconds"]
    timings["total_seconds"] = time.perf_counter() - t_start

    fits = {}
    for name in table.metric_names():
        try:
            fits[name] = fit_rate(table, name)
        except InsufficientPoints:
            pass
    return RunReport(cfg, table, fits, diagnostics, timings)


def run_experiment(cfg: ExperimentConfig, eps: float | None = None,
                   threads: int = 1) -> RunReport:
    """Single-rung run (largest eps by default); same report structure."""
    cfg.validate()
    rung = eps if eps is not None else cfg.eps_ladder[0]
    return eps_sweep(cfg, eps_values=[rung], threads=threads)


@dataclass(frozen=True)
class RateCheck:
    metric: str
    slope: float
    band: tuple
    passed: bool


def assert_rates(report: RunReport) -> list:
    """Compare fitted slopes against the per-experiment acceptance bands."""
    cfg = report.config
    bands = dict(RATE_BANDS.get((cfg.system, cfg.preparedness), {}))
    if cfg.system == "euler" and cfg.preparedness == "well" \
            and cfg.rho1_scenario == "zero":
        # with rho1 = 0 the q* gap coincides with the expansion gap and decays
        # at the second-order rate, so the first-order band does not apply
        bands.pop("l2t_q_star_err_Hm2", None)
    checks = []
    for metric, (lo, hi) in bands.items():
        fit = report.fits.get(metric)
        if fit is None:
            checks.append(RateCheck(metric, float("nan"), (lo, hi), False))
            continue
        ok = lo <= fit.slope <= hi
        checks.append(RateCheck(metric, fit.slope, (lo, hi), ok))
    return checks
