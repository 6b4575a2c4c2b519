"""Acceptance gate: one test and one printed PASS/FAIL line per criterion.

Criteria:
  1. spectral operator exactness
  2. ill-prepared Euler convergence-rate sweep
  3. well-prepared expansion-rate sweep (both corrector scenarios)
  4. Euler-Maxwell convergence-rate sweep with constraint preservation
  5. asymptotic-preserving property of the stiff step
  6. stream-function identity of the density error
  7. conservation suite
  8. analytic oracle suite
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from relaxlab import (
    EMParams,
    EulerState,
    EulerTrajectory,
    Grid,
    LimitBundle,
    PressureLaw,
    RelaxParams,
    ScalarField,
    VectorField,
    assert_rates,
    curl,
    darcy_flux,
    default_config,
    default_dt,
    divergence,
    eps_sweep,
    fractional_op,
    gradient,
    imex_step,
    l2_norm,
    laplacian,
    solve_corrector,
    solve_drift_diffusion,
    solve_euler,
    solve_porous_medium,
    stream_function,
)
from relaxlab.families import euler_initial
from relaxlab.maxwell import _EMStepper

LAW = PressureLaw()  # a=1, gamma=2


def report(num, label, ok, detail):
    print(f"criterion {num} {'PASS' if ok else 'FAIL'}: {label} ({detail})")
    assert ok, f"criterion {num}: {label} ({detail})"


def cos1(g, delta=0.05, k=1):
    x = g.nodes()[0]
    return ScalarField(g, 1.0 + delta * np.cos(k * x) + np.zeros(g.shape))


# -------------------------------------------------------------- criterion 1

def test_criterion_1_operator_exactness():
    t0 = time.time()
    worst_ex = 0.0
    worst_id = 0.0

    g1 = Grid(1, 64)
    x = g1.nodes()[0]
    f = ScalarField(g1, np.cos(x) + np.zeros(g1.shape))
    worst_ex = max(worst_ex, np.max(np.abs(
        gradient(f).components[0] + np.sin(x))))

    g3 = Grid(3, 64)
    x3, y3, z3 = (np.broadcast_to(c, g3.shape) for c in g3.nodes())
    v = VectorField(g3, np.stack([np.sin(y3), np.sin(z3), np.sin(x3)]))
    want_curl = np.stack([-np.cos(z3), -np.cos(x3), -np.cos(y3)])
    worst_ex = max(worst_ex, np.max(np.abs(curl(v).components - want_curl)))

    # Lambda^{-2} cos(kx) = cos(kx)/k^2
    f2 = ScalarField(g1, np.cos(2 * x) + np.zeros(g1.shape))
    worst_ex = max(worst_ex, np.max(np.abs(
        fractional_op(f2, -2).values - np.cos(2 * x) / 4.0)))

    rng = np.random.default_rng(0)
    r = ScalarField(g1, rng.standard_normal(g1.shape))
    r = ScalarField(g1, r.values - r.mean())
    worst_id = max(worst_id, l2_norm(divergence(gradient(r)) - laplacian(r)))
    worst_id = max(worst_id, np.max(np.abs(
        curl(gradient(ScalarField(
            g3, np.cos(x3) * np.sin(y3) + np.zeros(g3.shape)))).components)))
    worst_id = max(worst_id, l2_norm(fractional_op(fractional_op(r, 2), -2) - r))

    ok = worst_ex < 1e-10 and worst_id < 1e-12 and time.time() - t0 < 5.0
    report(1, "operator exactness",
           ok, f"examples {worst_ex:.2e}, identities {worst_id:.2e}, "
               f"{time.time() - t0:.1f}s")


# -------------------------------------------------------------- criterion 2

def test_criterion_2_thm11_rates():
    t0 = time.time()
    cfg = default_config("euler")
    rep = eps_sweep(cfg, cfg.eps_ladder)
    checks = assert_rates(rep)
    wall = time.time() - t0
    detail = ", ".join(f"{c.metric}={c.slope:+.3f}" for c in checks)
    ok = all(c.passed for c in checks) and wall < 300.0
    report(2, "ill-prepared Euler rates", ok, f"{detail}, {wall:.0f}s")


# -------------------------------------------------------------- criterion 3

def test_criterion_3_thm12_rates():
    t0 = time.time()
    details = []
    ok = True
    for scen in ("zero", "mode2"):
        cfg = replace(default_config("euler"), preparedness="well",
                      rho1_scenario=scen)
        rep = eps_sweep(cfg, cfg.eps_ladder)
        checks = assert_rates(rep)
        ok = ok and all(c.passed for c in checks)
        details.append(scen + ": " +
                       ", ".join(f"{c.metric}={c.slope:+.3f}" for c in checks))
    wall = time.time() - t0
    ok = ok and wall < 600.0
    report(3, "well-prepared expansion rates", ok,
           "; ".join(details) + f", {wall:.0f}s")


# -------------------------------------------------------------- criterion 4

def test_criterion_4_em_rates():
    t0 = time.time()
    cfg = default_config("em")
    rep = eps_sweep(cfg, cfg.eps_ladder)
    checks = assert_rates(rep)
    gauss = max(d["gauss_residual_max"] for d in rep.diagnostics.values())
    divb = max(d["div_b_max"] for d in rep.diagnostics.values())
    wall = time.time() - t0
    ok = (all(c.passed for c in checks) and gauss < 1e-8 and divb < 1e-12
          and wall < 1800.0)
    detail = ", ".join(f"{c.metric}={c.slope:+.3f}" for c in checks)
    report(4, "Euler-Maxwell rates and constraints", ok,
           f"{detail}, gauss {gauss:.1e}, divB {divb:.1e}, {wall:.0f}s")


# -------------------------------------------------------------- criterion 5

def test_criterion_5_asymptotic_preserving():
    # one stiff step collapses an off-manifold momentum onto Darcy
    g = Grid(1, 128)
    x = g.nodes()[0]
    rho0 = cos1(g)
    u = np.zeros((1,) + g.shape)
    u[0] = np.cos(x)
    st = EulerState(rho0, VectorField(g, rho0.values * u))
    out = imex_step(st, 1e-3, 1e-6, LAW)
    before = l2_norm(st.q + gradient(ScalarField(g, LAW.p(st.rho.values))))
    after = l2_norm(out.q + gradient(ScalarField(g, LAW.p(out.rho.values))))
    factor = before / after

    # an eps = 1e-4 run tracks the porous-medium run to within 10 eps
    eps = 1e-4
    g2 = Grid(1, 64)
    rho0 = cos1(g2)
    dt = 0.5 * default_dt(g2, LAW, u_max=1.0, rho_max=1.15)
    times = np.linspace(0.0, 1.0, 101)
    traj = solve_euler(EulerState(rho0, darcy_flux(rho0, LAW)),
                       RelaxParams(eps=eps, dt=dt, T=1.0), LAW, times)
    limit = solve_porous_medium(rho0, 1.0, dt, LAW, sample_times=times)
    diff = max(l2_norm(s.rho - r) for s, r in zip(traj.states, limit.rho))

    ok = factor >= 1e3 and diff <= 10 * eps
    report(5, "asymptotic-preserving property", ok,
           f"collapse factor {factor:.1e}, sup L2 gap {diff:.1e} "
           f"vs {10 * eps:.0e}")


# -------------------------------------------------------------- criterion 6

def test_criterion_6_stream_function_identity():
    eps, T, dt = 0.1, 0.25, 5e-5
    g = Grid(1, 64)
    rho_star0 = cos1(g)
    init = euler_initial(rho_star0, LAW, "ill", eps, u_amp=1.0)
    times = np.linspace(0.0, T, int(round(T / dt)) + 1)
    traj = solve_euler(init, RelaxParams(eps=eps, dt=dt, T=T), LAW, times)
    limit = solve_porous_medium(rho_star0, T, dt / 4, LAW, sample_times=times)

    def resid(stride):
        sub = slice(None, None, stride)
        t2 = EulerTrajectory(g, times[sub], traj.states[sub])
        l2 = LimitBundle(g, times[sub], limit.rho[sub], limit.q[sub],
                         limit.diagnostics)
        return np.max(stream_function(t2, l2, init.rho, rho_star0).residuals)

    r_fine = resid(1)      # accumulation at the solver step cadence
    r_coarse = resid(2)    # doubled accumulation step
    ok = r_fine < 1e-6 and r_coarse / r_fine >= 1.8
    report(6, "stream-function identity", ok,
           f"residual {r_fine:.1e}, halving gain {r_coarse / r_fine:.1f}x")


# -------------------------------------------------------------- criterion 7

def test_criterion_7_conservation_suite():
    worst_mass = 0.0

    g = Grid(1, 64)
    rho0 = cos1(g, 0.05)
    times = np.linspace(0.0, 0.5, 11)
    traj = solve_euler(euler_initial(rho0, LAW, "ill", 0.1, u_amp=1.0),
                       RelaxParams(eps=0.1, dt=1e-3, T=0.5), LAW, times)
    mass = traj.diagnostics["mass"]
    worst_mass = max(worst_mass, np.max(np.abs(mass - mass[0])))

    limit = solve_porous_medium(rho0, 0.5, 1e-3, LAW, sample_times=times)
    mass = limit.diagnostics["mass"]
    worst_mass = max(worst_mass, np.max(np.abs(mass - mass[0])))

    g3 = Grid(3, 16)
    x3 = g3.nodes()[0]
    rho3 = ScalarField(g3, 1.0 + 0.05 * np.cos(x3) + np.zeros(g3.shape))
    dd = solve_drift_diffusion(rho3, 0.3, 1e-3, LAW,
                               sample_times=np.linspace(0, 0.3, 4))
    mass = dd.diagnostics["mass"]
    worst_mass = max(worst_mass, np.max(np.abs(mass - mass[0])))

    rng = np.random.default_rng(1)
    stp = _EMStepper(g3, LAW, EMParams(eps=0.2, dt=1e-3, T=1.0))
    stp.E_hat = rng.normal(size=(3,) + g3.shape) + 1j * rng.normal(size=(3,) + g3.shape)
    stp.B_hat = rng.normal(size=(3,) + g3.shape) + 1j * rng.normal(size=(3,) + g3.shape)
    before = np.sum(np.abs(stp.E_hat) ** 2 + np.abs(stp.B_hat) ** 2)
    stp._rotate(0.41)
    after = np.sum(np.abs(stp.E_hat) ** 2 + np.abs(stp.B_hat) ** 2)
    isometry = abs(after - before) / before

    x = g.nodes()[0]
    r1 = ScalarField(g, np.cos(x) + np.zeros(g.shape))
    lim = solve_porous_medium(cos1(g, 0.1), 0.3, 1e-3, LAW,
                              sample_times=np.linspace(0, 0.3, 31))
    c1 = solve_corrector(lim, r1, 1e-3, LAW, sample_times=[0.0, 0.3])
    c2 = solve_corrector(lim, 2.0 * r1, 1e-3, LAW, sample_times=[0.0, 0.3])
    linearity = l2_norm(c2.rho1[-1] - 2.0 * c1.rho1[-1]) \
        / max(l2_norm(c1.rho1[-1]), 1e-30)
    c0 = solve_corrector(lim, ScalarField.zeros(g), 1e-3, LAW,
                         sample_times=[0.0, 0.3])
    zero = max(l2_norm(c0.rho1[-1]), l2_norm(c0.q1[-1]))

    ok = (worst_mass < 1e-12 and isometry < 1e-12 and linearity < 1e-12
          and zero < 1e-12)
    report(7, "conservation suite", ok,
           f"mass {worst_mass:.1e}, isometry {isometry:.1e}, "
           f"linearity {linearity:.1e}, zero {zero:.1e}")


# -------------------------------------------------------------- criterion 8

def test_criterion_8_oracle_suite():
    # porous medium: linearized decay rate p'(1) = 2, tolerance 1e-2
    g = Grid(1, 64)
    x = g.nodes()[0]
    delta, t_end = 1e-3, 0.5
    pm = solve_porous_medium(cos1(g, delta), t_end, 1e-3, LAW,
                             sample_times=[0.0, t_end])
    err_pm = np.max(np.abs(pm.rho[-1].values - 1.0
                           - delta * np.exp(-2 * t_end) * np.cos(x))) \
        / (delta * np.exp(-2 * t_end))

    # drift-diffusion: decay rate p'(1)|k|^2 + 1 = 3, tolerance 1e-2
    g3 = Grid(3, 16)
    x3 = g3.nodes()[0]
    dd = solve_drift_diffusion(
        ScalarField(g3, 1.0 + delta * np.cos(x3) + np.zeros(g3.shape)),
        0.3, 1e-3, LAW, sample_times=[0.0, 0.3])
    err_dd = np.max(np.abs(dd.rho[-1].values - 1.0
                           - delta * np.exp(-3 * 0.3) * np.cos(x3))) \
        / (delta * np.exp(-3 * 0.3))

    # constant-coefficient corrector: heat semigroup at rate 2, tolerance 1e-3
    flat = solve_porous_medium(ScalarField.constant(g, 1.0), 0.5, 1e-3, LAW,
                               sample_times=np.linspace(0, 0.5, 51))
    corr = solve_corrector(flat, ScalarField(g, np.cos(x) + np.zeros(g.shape)),
                           1e-3, LAW, sample_times=[0.0, 0.5])
    err_corr = np.max(np.abs(corr.rho1[-1].values
                             - np.exp(-1.0) * np.cos(x))) / np.exp(-1.0)

    # trivial examples: Darcy flux and equilibrium fixed point, exact scale
    rho = cos1(g, 0.1)
    err_triv = np.max(np.abs(darcy_flux(rho, LAW).components[0]
                             - 2.0 * rho.values * 0.1 * np.sin(x)))
    eq = imex_step(EulerState.equilibrium(g), 1e-3, 0.1, LAW)
    err_triv = max(err_triv, l2_norm(eq.rho - 1.0), l2_norm(eq.q))

    ok = err_pm < 1e-2 and err_dd < 1e-2 and err_corr < 1e-3 and err_triv < 1e-10
    report(8, "oracle suite", ok,
           f"porous {err_pm:.1e}, drift-diffusion {err_dd:.1e}, "
           f"corrector {err_corr:.1e}, trivial {err_triv:.1e}")
