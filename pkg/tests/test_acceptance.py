"""Acceptance suite: ten end-to-end criteria at their stated tolerances and time limits.

Each test records one pass/fail line; the table is printed in the pytest
terminal summary under "acceptance criteria".
"""

import time

import numpy as np
import pytest

from drspace import cli
from drspace.geometry import NPoint, SpaceParams, exp_a_function, poisson_kernel, shell_average
from drspace.ineqlab import FamilySpec, make_family, run_check
from drspace.meanop import decay_profile
from drspace.specfun import JacobiParams, jacobi_phi_grid, phi_dr_grid
from drspace.transforms import calibrate_inversion, clear_calibration, roundtrip_error
from oracles import poisson_mass

SPACES = [SpaceParams(2, 1), SpaceParams(2, 0), SpaceParams(4, 0)]


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_criterion_01_closed_forms(acceptance_log):
    """jacobi_phi equals cos(mu s) and sin(mu s)/(mu sinh s) to 1e-8 relative."""
    mu = np.linspace(0.1, 20, 120)
    s = np.linspace(0.05, 8, 160)
    M, S = np.meshgrid(mu, s, indexing="ij")
    with Clock() as clk:
        cosv = jacobi_phi_grid(JacobiParams(-0.5, -0.5), mu, s)
        sinv = jacobi_phi_grid(JacobiParams(0.5, -0.5), mu, s)
    # relative to the amplitude of each closed form, which is well defined at its zeros
    e1 = np.max(np.abs(cosv - np.cos(M * S)))
    amp = np.minimum(S, 1 / M) / np.sinh(S)
    e2 = np.max(np.abs(sinv - np.sin(M * S) / (M * np.sinh(S))) / amp)
    ok = max(e1, e2) <= 1e-8 and clk.seconds < 10
    acceptance_log(1, ok, f"closed forms: rel err {e1:.1e} / {e2:.1e}, {clk.seconds:.1f}s")
    assert ok


def _d2_d1(fun, s, h=1e-4):
    """Fourth-order central differences with step h."""
    f = [fun(s + k * h) for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return f[2], d1, d2


def test_criterion_02_ode_residual(acceptance_log):
    """Jacobi operator residual <= 1e-6 (1 + |phi|) on the invariant grid."""
    s = np.linspace(0.05, 8, 80)
    worst = 0.0
    with Clock() as clk:
        for ab in [(0.5, -0.5), (1.5, 0.5), (2.0, 0.5)]:
            J = JacobiParams(*ab)
            for frac in (-1.0, -0.5, 0.0, 0.5, 1.0):
                mus = np.linspace(0, 20, 21) + 1j * frac * J.rho_j
                f, d1, d2 = _d2_d1(lambda u: jacobi_phi_grid(J, mus, u), s)
                res = d2 + ((2 * J.alpha + 1) / np.tanh(s) + (2 * J.beta + 1) * np.tanh(s)) * d1 \
                    + (mus[:, None] ** 2 + J.rho_j**2) * f
                worst = max(worst, float(np.max(np.abs(res) / (1 + np.abs(f)))))
    ok = worst <= 1e-6 and clk.seconds < 60
    acceptance_log(2, ok, f"ODE residual: max {worst:.1e}, {clk.seconds:.1f}s")
    assert ok


def test_criterion_03_normalizations(acceptance_log):
    """phi_lam(0) = 1, phi_{-i rho} = 1, int_N P_{a_t} = 1 and P_1 <= 1."""
    rng = np.random.default_rng(0)
    errs = []
    pmax = 0.0
    with Clock() as clk:
        for sp in SPACES:
            lams = np.array([0.0, 1.5, 7 + 0.4j * sp.rho, 20 - 1j * sp.rho, -1j * sp.rho])
            errs.append(np.max(np.abs(phi_dr_grid(sp, lams, [0.0])[:, 0] - 1)))
            t = np.linspace(0, 20, 81)
            errs.append(np.max(np.abs(phi_dr_grid(sp, [-1j * sp.rho], t) - 1)))
            errs.append(max(abs(poisson_mass(sp, tt) - 1) for tt in (-1.0, 0.0, 2.0)))
            X = rng.standard_normal((20_000, sp.m)) * rng.choice([0.01, 1, 10], (20_000, 1))
            Y = rng.standard_normal((20_000, sp.k)) * 3
            pmax = max(pmax, float(np.max(poisson_kernel(sp, 0.0, NPoint.make(X, Y)))))
    err = float(max(errs))
    ok = err <= 1e-6 and pmax <= 1 and clk.seconds < 30
    acceptance_log(3, ok, f"normalizations: max err {err:.1e}, max P_1 {pmax:.4f}, {clk.seconds:.1f}s")
    assert ok


def test_criterion_04_shell_oracle(acceptance_log):
    """Shell averages of e^{(i lam - rho) A} reproduce phi_lam(t) on (2, 1)."""
    sp = SpaceParams(2, 1)
    lams = [0.0, 2.0, 2 + 0.3j]
    delta = 1e-3
    fs = [exp_a_function(sp, lam) for lam in lams]
    worst_se, worst_rel = 0.0, 0.0
    with Clock() as clk:
        for t in (1.0, 2.0, 4.0):
            est = shell_average(sp, lambda x: np.stack([f(x) for f in fs], -1), t, delta,
                                budget=1_000_000, strata=1000, seed=0)
            # the shell has width delta; compare with the average over it
            want = 0.5 * (phi_dr_grid(sp, lams, [t])[:, 0] + phi_dr_grid(sp, lams, [t + delta])[:, 0])
            err = np.abs(est.value - want)
            worst_se = max(worst_se, float(np.max(err / est.stderr)))
            worst_rel = max(worst_rel, float(np.max(err / np.abs(want))))
    ok = worst_se <= 3 and worst_rel <= 0.02 and clk.seconds < 300
    acceptance_log(4, ok, f"shell oracle: {worst_se:.2f} SE, rel {worst_rel:.1e}, {clk.seconds:.1f}s")
    assert ok


def test_criterion_05_roundtrip(acceptance_log):
    """Held-out gaussian and bump profiles survive forward and inverse to 1e-3."""
    worst = 0.0
    with Clock() as clk:
        clear_calibration()
        for sp in SPACES[:2]:
            calibrate_inversion(sp)  # one reference gaussian, e^{-r^2}
            held_out = make_family(FamilySpec("gauss", a=2.0, count=2), sp) \
                + make_family(FamilySpec("bump", a=2.0, count=2), sp)
            worst = max(worst, max(roundtrip_error(sp, f) for f in held_out))
    ok = worst <= 1e-3 and clk.seconds < 60
    acceptance_log(5, ok, f"roundtrip: max rel L2 error {worst:.1e}, {clk.seconds:.1f}s")
    assert ok


def test_criterion_06_constant_free_suite(acceptance_log, calibrated):
    sp = SpaceParams(2, 1)
    out = {}
    with Clock() as clk:
        for cid in ("R1", "M1", "M3", "P1", "L1"):
            out[cid] = run_check(cid, sp)
    bad = [c for c, r in out.items() if not r.passed]
    ok = not bad and clk.seconds < 300
    ratios = " ".join(f"{c}={r.ratio:.3g}" for c, r in out.items())
    acceptance_log(6, ok, f"constant-free: {ratios}, {clk.seconds:.0f}s" + (f" failed {bad}" if bad else ""))
    assert ok


def test_criterion_07_decay_law(acceptance_log):
    sp = SpaceParams(2, 1)
    t = np.linspace(2, 10, 161)
    with Clock() as clk:
        spreads = {p: decay_profile(sp, p, t).spread for p in (1.0, 4 / 3)}
        comp = decay_profile(sp, 2.0, t).compensated
    slope = float(np.polyfit(np.log(t), np.log(comp), 1)[0])
    # growing slower than t^2: comp / t^2 strictly decreases on the window
    slower = bool(np.all(np.diff(comp / t**2) < 0)) and slope < 2
    ok = max(spreads.values()) <= 10 and slower and clk.seconds < 10
    acceptance_log(7, ok, f"decay: spread p=1 {spreads[1.0]:.3f}, p=4/3 {spreads[4 / 3]:.3f}, "
                          f"p=2 log-slope {slope:.2f}, {clk.seconds:.1f}s")
    assert ok


CONSTANT_BEARING = ("R2", "R3", "R4", "HY1", "HY2", "G1", "G2", "G3", "GH1", "GH2", "B1", "J1", "T1")


@pytest.mark.slow
def test_criterion_08_constant_bearing_suite(acceptance_log, calibrated):
    sp = SpaceParams(2, 1)
    out = {}
    with Clock() as clk:
        for cid in CONSTANT_BEARING:
            out[cid] = run_check(cid, sp)
    finite = all(np.isfinite(r.constant_estimate) for r in out.values())
    drift = max(r.refinement_drift for r in out.values())
    d = out["B1"].details
    b1 = all(0 < d[f"C1(alpha={a})"] <= d[f"C2(alpha={a})"] for a in ("0.5", "1", "1.5"))
    ok = finite and drift <= 0.05 and b1 and clk.seconds < 900
    acceptance_log(8, ok, f"constant-bearing: max drift {drift:.1e}, B1 ordered {b1}, "
                          f"{clk.seconds:.0f}s")
    assert ok


def test_criterion_09_riemann_lebesgue(acceptance_log, calibrated):
    sp = SpaceParams(2, 1)
    with Clock() as clk:
        rep = run_check("RL1", sp, FamilySpec("gauss"))
    ok = rep.passed and rep.ratio <= 1e-3 and clk.seconds < 30
    acceptance_log(9, ok, f"Riemann-Lebesgue: tail/origin {rep.ratio:.1e}, {clk.seconds:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_10_determinism(acceptance_log, tmp_path, capsys):
    """`verify all` twice with one seed writes byte-identical reports."""
    blobs, codes = [], []
    with Clock() as clk:
        for i in range(2):
            prefix = str(tmp_path / f"run{i}")
            codes.append(cli.main(["verify", "all", "--seed", "0", "--out", prefix]))
            blobs.append((open(prefix + ".csv", "rb").read(), open(prefix + ".json", "rb").read()))
    capsys.readouterr()
    ok = blobs[0] == blobs[1]
    acceptance_log(10, ok, f"determinism: identical={ok}, exit codes {codes}, {clk.seconds:.0f}s")
    assert ok
