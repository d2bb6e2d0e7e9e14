"""Lebesgue and Lorentz norms on weighted grids, against brute-force rearrangements."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from drspace.errors import DomainError
from drspace.norms import (
    LorentzIndex,
    WeightedGrid,
    conjugate_exponent,
    decreasing_rearrangement,
    distribution_function,
    gamma_p,
    lorentz_norm,
    lp_norm,
)

values = st.lists(st.floats(-100, 100), min_size=1, max_size=30)
exps = st.floats(1, 8)


def _grid(n, seed=0):
    rng = np.random.default_rng(seed)
    return WeightedGrid(np.arange(n), rng.uniform(0.05, 2.0, n))


def _brute_lorentz(f, grid, p, q):
    """Quadrature of (t^{1/p} f*(t))^q dt/t with f* from a sorted step function."""
    v = np.abs(np.asarray(f, dtype=float))
    order = np.argsort(-v)
    T = np.concatenate([[0], np.cumsum(grid.weights[order])])
    vs = v[order]
    if np.isinf(q):
        return max(vs[i] * T[i + 1] ** (1 / p) for i in range(v.size))
    total = 0.0
    for i in range(v.size):
        if vs[i] == 0:
            continue
        total += vs[i] ** q * integrate.quad(lambda t: t ** (q / p - 1), T[i], T[i + 1],
                                             epsabs=0, epsrel=1e-13)[0]
    return total ** (1 / q)


def test_index_invariants():
    """gamma_p = 2/p - 1, gamma_infty = -1, gamma_p = -gamma_p'."""
    for p in [1.0, 4 / 3, 2.0, 3.0, np.inf]:
        idx = LorentzIndex(p, 2.0 if np.isfinite(p) else np.inf)
        assert idx.gamma_p == (-1.0 if np.isinf(p) else 2 / p - 1)
        assert gamma_p(p) == pytest.approx(-gamma_p(conjugate_exponent(p)), abs=1e-15)
    with pytest.raises(DomainError):
        LorentzIndex(np.inf, 2.0)
    with pytest.raises(DomainError):
        LorentzIndex(0.5, 1.0)


def test_weights_must_be_positive():
    with pytest.raises(DomainError):
        WeightedGrid(np.arange(3), np.array([1.0, 0.0, 1.0]))


def test_lp_examples():
    """Constant on a mass-one grid and the sup norm."""
    g = WeightedGrid(np.arange(4), np.full(4, 0.25))
    assert lp_norm(np.full(4, -3.0), g, 2.5) == pytest.approx(3.0, rel=1e-15)
    assert lp_norm(np.array([1.0, -7.0, 2.0, 0.0]), g, np.inf) == 7.0


@settings(max_examples=100, deadline=None)
@given(values, values, exps)
def test_lp_triangle_inequality(a, b, p):
    n = min(len(a), len(b))
    g = _grid(n)
    f, h = np.array(a[:n]), np.array(b[:n])
    assert lp_norm(f + h, g, p) <= lp_norm(f, g, p) + lp_norm(h, g, p) + 1e-9


def test_distribution_examples():
    """Total mass at s = 0, zero above the max, and indicator sets."""
    g = _grid(6)
    f = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    assert distribution_function(f, g, 0.0) == pytest.approx(g.total_mass)
    assert distribution_function(f, g, 6.0) == 0.0
    ind = np.array([1.0, 0, 1, 0, 0, 1])
    mass = g.weights[[0, 2, 5]].sum()
    assert distribution_function(ind, g, 0.5) == pytest.approx(mass)
    assert distribution_function(ind, g, 1.0) == 0.0


@settings(max_examples=60, deadline=None)
@given(values, st.floats(0, 50), st.floats(0, 50))
def test_distribution_nonincreasing(v, s1, s2):
    g = _grid(len(v))
    lo, hi = min(s1, s2), max(s1, s2)
    assert distribution_function(np.array(v), g, hi) <= distribution_function(np.array(v), g, lo)


@settings(max_examples=100, deadline=None)
@given(values, exps)
def test_lorentz_pp_is_lp(v, p):
    """(p, p) Lorentz norm equals the L^p norm."""
    g = _grid(len(v), 1)
    f = np.array(v)
    assert lorentz_norm(f, g, p, p) == pytest.approx(lp_norm(f, g, p), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("p,q", [(1.5, 1.0), (2.0, 4.0), (3.0, 1.5), (1.0, 3.0)])
def test_lorentz_indicator_closed_form(p, q):
    """Indicator of a mass-a set: a^{1/p} (p/q)^{1/q}; q = infinity gives a^{1/p}."""
    g = _grid(8, 2)
    ind = np.array([1, 0, 1, 1, 0, 0, 1, 0], dtype=float)
    a = g.weights[ind > 0].sum()
    assert lorentz_norm(ind, g, p, q) == pytest.approx(a ** (1 / p) * (p / q) ** (1 / q), rel=1e-13)
    assert lorentz_norm(ind, g, p, np.inf) == pytest.approx(a ** (1 / p), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(values, st.floats(1, 5), st.floats(1, 6))
def test_lorentz_exact_against_brute_force(v, p, q):
    """Closed-form step integral matches brute-force sorting plus quadrature."""
    g = _grid(len(v), 3)
    f = np.array(v)
    want = _brute_lorentz(f, g, p, q)
    assert lorentz_norm(f, g, p, q) == pytest.approx(want, rel=1e-9, abs=1e-300)
    assert lorentz_norm(f, g, p, np.inf) == pytest.approx(_brute_lorentz(f, g, p, np.inf), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(values, st.floats(1, 5), st.floats(1, 6), st.randoms(use_true_random=False))
def test_lorentz_rearrangement_invariance(v, p, q, rnd):
    """Permuting cells together with their masses leaves the norm unchanged."""
    g = _grid(len(v), 4)
    perm = list(range(len(v)))
    rnd.shuffle(perm)
    f = np.array(v)
    h = WeightedGrid(g.points[perm], g.weights[perm])
    assert lorentz_norm(f[perm], h, p, q) == pytest.approx(lorentz_norm(f, g, p, q), rel=1e-12)


@settings(max_examples=80, deadline=None)
@given(values, st.floats(1, 5), st.floats(1, 20), st.floats(-1e3, 1e3))
def test_lorentz_weak_nesting_and_scaling(v, p, q, c):
    """||f||_{p,inf} <= (q/p)^{1/q} ||f||_{p,q} and ||c f|| = |c| ||f||."""
    g = _grid(len(v), 5)
    f = np.array(v)
    weak = lorentz_norm(f, g, p, np.inf)
    strong = lorentz_norm(f, g, p, q)
    assert weak <= (q / p) ** (1 / q) * strong * (1 + 1e-12)
    assert lorentz_norm(c * f, g, p, q) == pytest.approx(abs(c) * strong, rel=1e-12, abs=1e-300)


def test_unit_constant_nesting_fails_for_q_above_p():
    """A mass-one indicator has weak norm (q/p)^{1/q} > 1 times its (p, q) norm when q > p."""
    g = WeightedGrid(np.arange(1), np.ones(1))
    f = np.ones(1)
    p, q = 1.5, 3.0
    ratio = lorentz_norm(f, g, p, np.inf) / lorentz_norm(f, g, p, q)
    assert ratio == pytest.approx((q / p) ** (1 / q), rel=1e-14)
    assert ratio > 1.25
    # for q <= p the unit-constant form holds
    assert lorentz_norm(f, g, 3.0, np.inf) <= lorentz_norm(f, g, 3.0, 1.5)


def test_rearrangement_shape():
    g = WeightedGrid(np.arange(4), np.array([1.0, 2.0, 3.0, 4.0]))
    v, T = decreasing_rearrangement(np.array([0.0, 5.0, -7.0, 1.0]), g)
    assert list(v) == [7.0, 5.0, 1.0]
    assert list(T) == [3.0, 5.0, 9.0]


def test_infinite_p_requires_infinite_q():
    g = _grid(3)
    with pytest.raises(DomainError):
        lorentz_norm(np.ones(3), g, np.inf, 2.0)
    assert lorentz_norm(np.array([1.0, -4.0, 2.0]), g, np.inf, np.inf) == 4.0
