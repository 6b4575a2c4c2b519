"""Error measurement: initial time layers, stream-function diagnostics,
theorem-style error tables, and log-log convergence-rate fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentError,
    InsufficientPoints,
    MeanNotZero,
    NegativeTime,
    NotWellPrepared,
)
from .spectral import (
    ScalarField,
    VectorField,
    divergence,
    gradient,
    inv_lap_gradient,
    l2_norm,
    sobolev_norm,
)


@dataclass(frozen=True)
class InitialLayer:
    """Exact exponential transient q_I(t) = exp(-t/eps^2) q0."""

    q0: VectorField
    eps: float


def initial_layer_eval(layer: InitialLayer, t: float) -> VectorField:
    if t < 0:
        raise NegativeTime(f"t = {t} < 0")
    return np.exp(-t / layer.eps**2) * layer.q0


@dataclass
class StreamFunctionSeries:
    """Accumulated N(t) = -int_0^t (q^eps - q*) dt' + N0, with its div residuals."""

    times: np.ndarray
    N: list
    residuals: np.ndarray  # ||div N - (rho^eps - rho*)||_L2 per sample


def _check_aligned(t1, t2):
    t1 = np.asarray(t1, dtype=float)
    t2 = np.asarray(t2, dtype=float)
    if len(t1) != len(t2) or not np.allclose(t1, t2, rtol=0.0, atol=1e-12):
        raise AlignmentError("trajectories do not share a sample-time grid")
    return t1


def stream_function(euler_traj, limit_traj, rho0_eps: ScalarField,
                    rho0_star: ScalarField) -> StreamFunctionSeries:
    """Trapezoid-rule accumulation of the stream function of the density error."""
    times = _check_aligned(euler_traj.times, limit_traj.times)
    diff0 = rho0_eps - rho0_star
    scale = l2_norm(diff0)
    if scale > 0 and abs(diff0.mean()) > 1e-12 * scale:
        raise MeanNotZero("rho0^eps - rho0* must be mean-zero for N0")
    if scale > 0:
        N = inv_lap_gradient(diff0) * (-1.0)
    else:
        N = VectorField.zeros(rho0_eps.grid)

    def qdiff(j):
        return euler_traj.states[j].q - limit_traj.q[j]

    Ns = [N]
    res = [l2_norm(divergence(N) - (euler_traj.states[0].rho - limit_traj.rho[0]))]
    prev = qdiff(0)
    for j in range(1, len(times)):
        cur = qdiff(j)
        dt = times[j] - times[j - 1]
        N = N - (0.5 * dt) * (prev + cur)
        prev = cur
        Ns.append(N)
        res.append(l2_norm(divergence(N) - (euler_traj.states[j].rho - limit_traj.rho[j])))
    return StreamFunctionSeries(times, Ns, np.asarray(res))


@dataclass
class ErrorRow:
    eps: float
    m: int
    T: float
    metrics: dict = field(default_factory=dict)
    tails: dict = field(default_factory=dict)


@dataclass
class ErrorTable:
    rows: list = field(default_factory=list)

    def add(self, row: ErrorRow):
        self.rows.append(row)
        self.rows.sort(key=lambda r: -r.eps)

    def column(self, metric: str):
        eps, vals = [], []
        for r in self.rows:
            if metric in r.metrics:
                eps.append(r.eps)
                vals.append(r.metrics[metric])
        return np.asarray(eps), np.asarray(vals)

    def metric_names(self):
        names = []
        for r in self.rows:
            for k in r.metrics:
                if k not in names:
                    names.append(k)
        return names


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    residual: float


def fit_rate(table: ErrorTable, metric: str) -> RateFit:
    """Least-squares slope of log(error) against log(eps)."""
    eps, vals = table.column(metric)
    usable = (vals > 0) & np.isfinite(vals)
    if np.count_nonzero(usable) < 3:
        raise InsufficientPoints(
            f"need >= 3 positive rows for {metric!r}, have {np.count_nonzero(usable)}")
    x = np.log(eps[usable])
    y = np.log(vals[usable])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return RateFit(float(slope), float(intercept), resid)


def _time_integral_sq(times, series_sq):
    """Trapezoid integral of a squared-norm series plus an exponential tail guess."""
    integral = float(np.trapezoid(series_sq, times))
    f_end = series_sq[-1]
    tail = 0.0
    if f_end > 0 and len(series_sq) >= 3:
        f_prev = series_sq[-2]
        dt = times[-1] - times[-2]
        if 0 < f_end < f_prev:
            lam = np.log(f_prev / f_end) / dt
            tail = f_end / lam
        else:
            tail = f_end * (times[-1] - times[0])
    return integral, tail


def _sqrt_metric(times, series_sq):
    integral, tail = _time_integral_sq(times, np.asarray(series_sq))
    value = float(np.sqrt(integral))
    tail_in_units = float(np.sqrt(integral + tail) - value)
    return value, tail_in_units


def error_report_thm11(euler_traj, limit, layer: InitialLayer, m: int) -> ErrorRow:
    """Ill-prepared convergence metrics of the Euler-to-filtration limit."""
    times = _check_aligned(euler_traj.times, limit.times)
    row = ErrorRow(eps=layer.eps, m=m, T=float(times[-1]))

    sup_rho = 0.0
    grad_sq, q_sq, l2_sq = [], [], []
    for j, t in enumerate(times):
        d_rho = euler_traj.states[j].rho - limit.rho[j]
        sup_rho = max(sup_rho, sobolev_norm(d_rho, m - 1))
        grad_sq.append(sobolev_norm(gradient(d_rho), m - 1) ** 2)
        qI = initial_layer_eval(layer, t)
        q_sq.append(sobolev_norm(euler_traj.states[j].q - limit.q[j] - qI, m - 1) ** 2)
        l2_sq.append(l2_norm(d_rho) ** 2)

    row.metrics["sup_rho_err_Hm1"] = sup_rho
    row.tails["sup_rho_err_Hm1"] = 0.0
    for name, series in (
        ("l2t_grad_rho_err_Hm1", grad_sq),
        ("l2t_q_layer_err_Hm1", q_sq),
    ):
        row.metrics[name], row.tails[name] = _sqrt_metric(times, series)

    diff0 = euler_traj.states[0].rho - limit.rho[0]
    scale = l2_norm(diff0)
    if scale == 0 or abs(diff0.mean()) <= 1e-12 * scale:
        row.metrics["l2t_rho_err_L2"], row.tails["l2t_rho_err_L2"] = _sqrt_metric(
            times, l2_sq)
    return row


def error_report_thm12(euler_traj, limit, corrector, eps: float, m: int) -> ErrorRow:
    """Well-prepared expansion metrics at index m-2."""
    times = _check_aligned(euler_traj.times, limit.times)
    _check_aligned(times, corrector.times)

    rho0_gap = euler_traj.states[0].rho - limit.rho[0] - eps * corrector.rho1[0]
    if sobolev_norm(rho0_gap, m - 2) > eps**2 + 1e-10:
        raise NotWellPrepared(
            f"||rho0 gap||_Hm2 = {sobolev_norm(rho0_gap, m - 2):.3e} > eps^2")
    q0_gap = euler_traj.states[0].q - limit.q[0]
    if sobolev_norm(q0_gap, m - 1) > eps + 1e-10:
        raise NotWellPrepared(
            f"||q0 gap||_Hm1 = {sobolev_norm(q0_gap, m - 1):.3e} > eps")

    row = ErrorRow(eps=eps, m=m, T=float(times[-1]))
    sup_rho = 0.0
    sup_q = 0.0
    grad_sq, qstar_sq, qexp_sq = [], [], []
    for j in range(len(times)):
        d_rho = euler_traj.states[j].rho - limit.rho[j] - eps * corrector.rho1[j]
        d_q = euler_traj.states[j].q - limit.q[j] - eps * corrector.q1[j]
        sup_rho = max(sup_rho, sobolev_norm(d_rho, m - 2))
        sup_q = max(sup_q, sobolev_norm(d_q, m - 2))
        grad_sq.append(sobolev_norm(gradient(d_rho), m - 2) ** 2)
        qstar_sq.append(sobolev_norm(euler_traj.states[j].q - limit.q[j], m - 2) ** 2)
        qexp_sq.append(sobolev_norm(d_q, m - 2) ** 2)

    row.metrics["sup_exp_rho_err_Hm2"] = sup_rho
    row.tails["sup_exp_rho_err_Hm2"] = 0.0
    row.metrics["sup_exp_q_err_Hm2"] = sup_q
    row.tails["sup_exp_q_err_Hm2"] = 0.0
    for name, series in (
        ("l2t_grad_exp_rho_err_Hm2", grad_sq),
        ("l2t_q_star_err_Hm2", qstar_sq),
        ("l2t_exp_q_err_Hm2", qexp_sq),
    ):
        row.metrics[name], row.tails[name] = _sqrt_metric(times, series)
    return row


def error_report_em(em_traj, em_limit, em_corrector, layer: InitialLayer,
                    m: int) -> ErrorRow:
    """Euler-Maxwell to drift-diffusion metrics, plus expansion diagnostics."""
    times = _check_aligned(em_traj.times, em_limit.times)
    eps = layer.eps
    row = ErrorRow(eps=eps, m=m, T=float(times[-1]))

    Be = np.array([c.mean() for c in
                   (em_traj.states[0].B.component(i) for i in range(3))])

    sup_rho = sup_E = sup_B = 0.0
    rho_sq, E_sq, gradB_sq, q_sq = [], [], [], []
    sup_exp_rho = 0.0
    for j, t in enumerate(times):
        st = em_traj.states[j]
        d_rho = st.rho - em_limit.rho[j]
        d_E = st.E - em_limit.E[j]
        d_B = VectorField(st.grid, st.B.components - Be.reshape(3, 1, 1, 1))
        sup_rho = max(sup_rho, sobolev_norm(d_rho, m - 1))
        sup_E = max(sup_E, sobolev_norm(d_E, m - 1))
        sup_B = max(sup_B, sobolev_norm(d_B, m - 1))
        rho_sq.append(sobolev_norm(d_rho, m) ** 2)
        E_sq.append(sobolev_norm(d_E, m - 1) ** 2)
        gradB = sum(sobolev_norm(VectorField.from_hat(
            st.grid, 1j * st.grid.k[a] * d_B.hat), m - 2) ** 2 for a in range(3))
        gradB_sq.append(gradB)
        qI = initial_layer_eval(layer, t)
        q_sq.append(sobolev_norm(st.q - em_limit.q[j] - qI, m - 2) ** 2)
        if em_corrector is not None:
            d_exp = d_rho - eps * em_corrector.rho1[j]
            sup_exp_rho = max(sup_exp_rho, sobolev_norm(d_exp, m - 2))

    row.metrics["sup_rho_err_Hm1"] = sup_rho
    row.tails["sup_rho_err_Hm1"] = 0.0
    row.metrics["sup_E_err_Hm1"] = sup_E
    row.tails["sup_E_err_Hm1"] = 0.0
    row.metrics["sup_B_err_Hm1"] = sup_B
    row.tails["sup_B_err_Hm1"] = 0.0
    for name, series in (
        ("l2t_rho_err_Hm", rho_sq),
        ("l2t_E_err_Hm1", E_sq),
        ("l2t_gradB_err_Hm2", gradB_sq),
        ("l2t_q_layer_err_Hm2", q_sq),
    ):
        row.metrics[name], row.tails[name] = _sqrt_metric(times, series)
    if em_corrector is not None:
        row.metrics["sup_exp_rho_err_Hm2"] = sup_exp_rho
        row.tails["sup_exp_rho_err_Hm2"] = 0.0
    return row
