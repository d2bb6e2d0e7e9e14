"""Spherical means as spectral multipliers, their operator bound and moduli of continuity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drspace.errors import DomainError
from drspace.geometry import a_point, distance, group_mul, shell_average
from drspace.ineqlab import FamilySpec, make_family
from drspace.meanop import (
    MeanConfig,
    decay_profile,
    mean_differences,
    mean_operator_bound,
    modulus_of_continuity,
    modulus_table,
    spherical_mean,
    spherical_means,
    write_table_csv,
)
from drspace.norms import WeightedGrid, conjugate_exponent, lorentz_norm, lp_norm
from drspace.specfun import phi_dr, phi_dr_grid
from drspace.transforms import RadialProfile, spectral_grid, spherical_transform


@pytest.fixture(scope="module")
def profiles(heis, calibrated):
    return make_family(FamilySpec("gauss", count=2), heis) + make_family(FamilySpec("bump", count=1), heis)


def test_mean_at_zero_is_identity(heis, profiles):
    """M_0 f = f."""
    for f in profiles:
        g = spherical_mean(heis, f, 0.0)
        assert np.max(np.abs(g.values[: f.grid.size] - f.values)) <= 1e-6


def test_mean_preserves_mass(heis, profiles):
    """int M_t f A dr = int f A dr, since phi_{-i rho} = 1."""
    for f in profiles:
        for t in (0.5, 2.0):
            g = spherical_mean(heis, f, t)
            assert g.mass() == pytest.approx(f.mass(), rel=1e-6)


def test_mean_matches_shell_average(heis, profiles):
    """M_t f(a_s) is the shell average of y -> f(d(a_s y, e))."""
    f = profiles[0]
    for s, t in [(1.0, 1.0), (0.5, 2.0)]:
        delta = 1e-3
        g = spherical_mean(heis, f, t + delta / 2)

        def F(y, s=s):
            x = a_point(heis, np.full(np.shape(y.t), s))
            return f(distance(heis, group_mul(heis, x, y)))

        est = shell_average(heis, F, t, delta, budget=400_000, strata=1000, seed=11)
        want = g(np.array([s]))[0]
        assert abs(est.value - want) <= 3 * est.stderr + 1e-4 * abs(want)


def test_multiplier_identity(heis, profiles):
    """(M_t f)^(lam) = f_hat(lam) phi_lam(t) on the real line to 1e-5."""
    xi = np.linspace(0, 20, 41)
    for f in profiles:
        F = spherical_transform(heis, f, xi)
        for t in (0.25, 1.0, 3.0):
            g = spherical_mean(heis, f, t)
            want = F * phi_dr_grid(heis, xi, [t])[:, 0]
            got = spherical_transform(heis, g, xi)
            assert np.max(np.abs(got - want)) <= 1e-5 * np.max(np.abs(F))


def test_means_commute(heis, profiles):
    """M_t M_s f = M_s M_t f, both being the product multiplier."""
    f = profiles[0]
    ts = spherical_mean(heis, spherical_mean(heis, f, 0.5), 1.5)
    st_ = spherical_mean(heis, spherical_mean(heis, f, 1.5), 0.5)
    assert np.array_equal(ts.grid, st_.grid)
    assert np.max(np.abs(ts.values - st_.values)) <= 1e-5 * np.max(np.abs(f.values))


@pytest.mark.parametrize("p", [1.0, 4 / 3, 2.0, 3.0, 8.0])
def test_contraction(heis, profiles, p):
    """||M_t f||_p <= phi_{i gamma_p rho}(t) ||f||_p (1 + 1e-4)."""
    for f in profiles:
        base, vals = spherical_means(heis, f, [0.25, 1.0, 3.0])
        W = WeightedGrid(base.grid, base.weights)
        for t, v in zip([0.25, 1.0, 3.0], vals):
            assert lp_norm(v, W, p) <= mean_operator_bound(heis, p, t) * f.lp_norm(p) * (1 + 1e-4)


def test_convergence_to_f(heis, profiles):
    """||M_t f - f||_p decreases along t = 0.4, 0.2, 0.1, 0.05 and ends below a tenth."""
    ts = [0.4, 0.2, 0.1, 0.05]
    for f in profiles:
        base, diffs = mean_differences(heis, f, ts)
        W = WeightedGrid(base.grid, base.weights)
        for p in (1.0, 2.0):
            n = [lp_norm(d, W, p) for d in diffs]
            assert all(b < a for a, b in zip(n, n[1:]))
            assert n[-1] < 0.1 * n[0]


def test_mean_differences_agree_with_means(heis, profiles):
    """Direct inversion of f_hat (phi - 1) equals M_t f - f computed from the means."""
    f = profiles[0]
    base, vals = spherical_means(heis, f, [0.7])
    base2, diffs = mean_differences(heis, f, [0.7])
    assert np.array_equal(base.grid, base2.grid)
    assert np.max(np.abs(vals[0] - base.values - diffs[0])) <= 1e-6


def test_exponential_profiles_rejected(heis):
    f = make_family(FamilySpec("powertail", p_class=1.0), heis)[0]
    with pytest.raises(DomainError):
        spherical_mean(heis, f, 1.0)


# ---------------------------------------------------------------- operator bound


def test_bound_examples(heis):
    """p = 1 gives 1, p = 2 gives phi_0 < 1, and bound(p) = bound(p')."""
    t = np.linspace(0.1, 8, 30)
    assert all(mean_operator_bound(heis, 1.0, x) == 1.0 for x in t)
    b2 = np.array([mean_operator_bound(heis, 2.0, x) for x in t])
    assert np.all(b2 < 1)
    assert np.allclose(b2, phi_dr(heis, 0.0, t).real, rtol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.01, 20), st.floats(0.01, 10))
def test_bound_conjugate_symmetry(p, t):
    from drspace.geometry import SpaceParams
    sp = SpaceParams(2, 1)
    assert mean_operator_bound(sp, p, t) == pytest.approx(
        mean_operator_bound(sp, conjugate_exponent(p), t), rel=1e-12)


# ---------------------------------------------------------------- moduli


def test_modulus_properties(heis, profiles):
    """Nondecreasing in r, Omega_{p,p} is the L^p modulus, and Omega -> 0 as r -> 0."""
    f = profiles[2]
    rs = [0.05, 0.2, 1.0]
    om = [modulus_of_continuity(heis, f, 1.5, 1.5, r) for r in rs]
    assert om[0] <= om[1] <= om[2]
    assert om[0] < 0.05 * om[2]
    ts, norms = modulus_table(heis, f, 1.5, 1.5, 1.0)
    base, diffs = mean_differences(heis, f, ts)
    W = WeightedGrid(base.grid, base.weights)
    lp = np.array([lp_norm(d, W, 1.5) for d in diffs])
    # refinement radii are evaluated on their own output grid
    np.testing.assert_allclose(norms, lp, rtol=1e-3)
    assert np.max(norms) == pytest.approx(om[2], rel=1e-12)


def test_modulus_grid_refined_near_argmax(heis, profiles):
    """The sup over a geometric grid is refined by nine radii around its argmax."""
    ts, norms = modulus_table(heis, profiles[0], 2.0, np.inf, 2.0)
    assert ts[-1] == pytest.approx(2.0) and np.all(np.diff(ts) > 0)
    assert ts.size >= 21 + 7
    base, diffs = mean_differences(heis, profiles[0], ts[-1:])
    W = WeightedGrid(base.grid, base.weights)
    assert norms[-1] == pytest.approx(lorentz_norm(diffs[0], W, 2.0, np.inf), rel=1e-12)


# ---------------------------------------------------------------- decay


def test_decay_profile(heis):
    """Rate 2 rho/p', p = 1 trivial, strict decrease, bounded spread for p < 2."""
    t = np.linspace(0.25, 10, 40)
    d1 = decay_profile(heis, 1.0, t)
    assert d1.rate == 0 and np.all(d1.bound == 1)
    for p in (4 / 3, 2.0):
        d = decay_profile(heis, p, t)
        assert d.rate == pytest.approx(2 * heis.rho / conjugate_exponent(p))
        assert np.all(np.diff(d.bound) < 0)
    assert decay_profile(heis, 4 / 3, t).spread <= 10
    with pytest.raises(DomainError):
        decay_profile(heis, 3.0, t)


def test_decay_p2_grows_slower_than_t_squared(heis):
    """log(phi_0 e^{rho t}) against log t has slope below 2 (it tends to 1)."""
    t = np.linspace(2, 10, 33)
    d = decay_profile(heis, 2.0, t)
    slope = np.polyfit(np.log(t), np.log(d.compensated), 1)[0]
    assert 0.5 < slope < 1.5


def test_mean_config_validation():
    MeanConfig((0.1, 0.5, 1.0))
    for bad in [(), (0.0, 1.0), (1.0, 0.5)]:
        with pytest.raises(DomainError):
            MeanConfig(bad)


def test_table_csv(tmp_path):
    path = str(tmp_path / "decay.csv")
    write_table_csv(path, [1.0, 2.0], [0.5, 0.25], [0.4, 0.2], [0.8, 0.8])
    lines = open(path).read().splitlines()
    assert lines[0] == "t,bound,norm,ratio" and lines[1].startswith("1,0.5,")


def test_spectral_grid_refinement_keeps_means_stable(heis, profiles):
    """Halving spectral panels changes M_t f by far less than the roundtrip tolerance."""
    f = profiles[0]
    g1 = spherical_mean(heis, f, 1.0, spectral_grid(heis))
    g2 = spherical_mean(heis, f, 1.0, spectral_grid(heis, panel_width=0.5))
    assert np.max(np.abs(g1.values - g2.values)) <= 1e-8
    assert isinstance(g1, RadialProfile)
