"""Spherical mean operator on radial profiles.

M_t acts on the spectral side as multiplication by phi_lambda(t); profiles
are transformed, multiplied and inverted on the calibrated spectral grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._io import atomic_write
from .errors import DomainError
from .geometry import SpaceParams
from .norms import WeightedGrid, conjugate_exponent, gamma_p, lorentz_norm
from .specfun import phi_dr, phi_dr_grid
from .transforms import (
    RadialProfile,
    SpectralGrid,
    inverse_transform,
    spectral_grid,
    spherical_transform,
)

__all__ = [
    "MeanConfig",
    "extend_profile",
    "spherical_mean",
    "spherical_means",
    "mean_differences",
    "mean_operator_bound",
    "modulus_of_continuity",
    "modulus_table",
    "moduli_table",
    "moduli_of_continuity",
    "decay_profile",
    "DecayTable",
    "write_table_csv",
]


@dataclass(frozen=True)
class MeanConfig:
    """Mean radii and the refinement factor used for sup-approximation."""

    t_grid: tuple
    refine: float = 1.25

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        if t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise DomainError("t_grid must be positive and increasing")


def extend_profile(f: RadialProfile, r_max: float) -> RadialProfile:
    """Resample f (through its generator) on [0, r_max] with the same panels."""
    if r_max <= f.r_max + 1e-12:
        return f
    if f.func is None:
        raise DomainError("extending a profile needs its generating function")
    gen = f.func
    old = f.r_max
    if f.decay_class == "compact":
        def g(r):
            r = np.asarray(r, dtype=float)
            return np.where(r <= old, gen(np.minimum(r, old)), 0.0)
    else:
        g = gen
    return RadialProfile.from_function(f.space, g, f.decay_class, min(r_max, 40.0),
                                       f.panel_width, f.nodes, f.decay_rate, f.decay_power,
                                       f.tail_fraction)


def _means(space, f, ts, grid, shift):
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts < 0):
        raise DomainError("mean radius must be nonnegative")
    if f.decay_class == "exponential":
        raise DomainError(
            "spherical means need gaussian or compact profiles; exponential tails "
            "leave a spectrum too slowly decaying for spectral inversion")
    grid = grid or spectral_grid(space)
    base = extend_profile(f, min(f.r_max + float(np.max(ts)), 40.0))
    F = spherical_transform(space, f, grid.xi)
    mult = phi_dr_grid(space, grid.xi, ts).T - shift  # (len(ts), len(xi))
    vals = inverse_transform(space, F[None, :] * mult, grid, base.grid)
    return base, ts, vals


def spherical_means(space: SpaceParams, f: RadialProfile, ts, grid: SpectralGrid | None = None):
    """M_t f for every t in ``ts`` on a common grid covering supp f + t.

    Returns (base, values) where ``base`` is f resampled on the output grid
    and ``values`` has shape (len(ts), len(base.grid)).
    """
    base, ts, vals = _means(space, f, ts, grid, 0.0)
    # phi_lambda(0) = 1 makes M_0 the identity; keep it exact.
    vals[ts == 0] = base.values
    return base, vals


def mean_differences(space: SpaceParams, f: RadialProfile, ts, grid: SpectralGrid | None = None):
    """M_t f - f, inverted from f_hat (phi_lambda(t) - 1).

    Inverting the difference directly keeps small-t values free of the
    roundtrip error of f itself.
    """
    base, ts, vals = _means(space, f, ts, grid, 1.0)
    vals[ts == 0] = 0.0
    return base, vals


def spherical_mean(space: SpaceParams, f: RadialProfile, t: float,
                   grid: SpectralGrid | None = None) -> RadialProfile:
    """M_t f as a radial profile (support grown by t for compact f).

    The result interpolates its own samples (zero beyond r_max), so it can
    be extended and averaged again.
    """
    base, vals = spherical_means(space, f, [t], grid)
    g = base.with_values(vals[0])
    return g.with_values(g.values, func=g.__call__)


def mean_operator_bound(space: SpaceParams, p: float, t: float) -> float:
    """Operator bound phi_{i gamma_p rho}(t) of M_t on L^p (1 for p = 1 or infinity)."""
    if not p >= 1:
        raise DomainError("need p >= 1")
    g = gamma_p(p)
    if abs(g) == 1:
        return 1.0
    # evenness: phi_{i gamma_p rho} = phi_{i gamma_p' rho}
    return float(phi_dr(space, 1j * abs(g) * space.rho, t).real)


def _lorentz_on_profile(values, base: RadialProfile, p, q):
    return lorentz_norm(values, WeightedGrid(base.grid, base.weights), p, q)


def _geometric_radii(r, ratio, t_min_frac):
    n = int(np.ceil(np.log(1 / t_min_frac) / np.log(ratio)))
    return r * ratio ** -np.arange(n + 1)[::-1]


def moduli_table(space: SpaceParams, f: RadialProfile, indices, r: float,
                 ratio: float = 1.25, t_min_frac: float = 1e-2,
                 grid: SpectralGrid | None = None):
    """(t, N) with N[j, i] = ||M_{t_i} f - f||*_{p_j,q_j} for (p_j, q_j) in ``indices``.

    The radii form a geometric grid in (0, r]; each index adds nine radii
    around its argmax.
    """
    if not r > 0:
        raise DomainError("need r > 0")
    indices = [tuple(map(float, pq)) for pq in indices]

    def norms_at(ts):
        base, vals = mean_differences(space, f, ts, grid)
        return np.array([[_lorentz_on_profile(v, base, p, q) for v in vals] for p, q in indices])

    ts = _geometric_radii(r, ratio, t_min_frac)
    norms = norms_at(ts)
    extra = []
    for row in norms:
        i = int(np.argmax(row))
        lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
        extra.append(np.linspace(lo, hi, 9))
    extra = np.setdiff1d(np.concatenate(extra), ts)
    if extra.size:
        ts = np.concatenate([ts, extra])
        norms = np.concatenate([norms, norms_at(extra)], axis=1)
        order = np.argsort(ts)
        ts, norms = ts[order], norms[:, order]
    return ts, norms


def modulus_table(space: SpaceParams, f: RadialProfile, p: float, q: float, r: float,
                  ratio: float = 1.25, t_min_frac: float = 1e-2,
                  grid: SpectralGrid | None = None):
    """(t, ||M_t f - f||*_{p,q}) on a geometric grid in (0, r], refined at the argmax."""
    ts, norms = moduli_table(space, f, [(p, q)], r, ratio, t_min_frac, grid)
    return ts, norms[0]


def modulus_of_continuity(space: SpaceParams, f: RadialProfile, p: float, q: float, r: float,
                          grid: SpectralGrid | None = None) -> float:
    """Omega_{p,q}[f](r) = sup_{0 < t <= r} ||M_t f - f||*_{p,q}."""
    _, norms = modulus_table(space, f, p, q, r, grid=grid)
    return float(np.max(norms))


def moduli_of_continuity(space: SpaceParams, f: RadialProfile, indices, r: float,
                         grid: SpectralGrid | None = None) -> np.ndarray:
    """Omega_{p,q}[f](r) for several Lorentz indices sharing one set of means."""
    _, norms = moduli_table(space, f, indices, r, grid=grid)
    return norms.max(axis=1)


@dataclass(frozen=True)
class DecayTable:
    t: np.ndarray
    bound: np.ndarray
    compensated: np.ndarray
    rate: float
    spread: float  # max/min of the compensated column over t in [2, 10]


def decay_profile(space: SpaceParams, p: float, t_grid) -> DecayTable:
    """phi_{i gamma_p rho}(t) and its compensation by e^{(2 rho/p') t}."""
    if not 1 <= p <= 2:
        raise DomainError("decay profile needs p in [1, 2]")
    t = np.asarray(t_grid, dtype=float)
    pc = conjugate_exponent(p)
    rate = 0.0 if np.isinf(pc) else 2 * space.rho / pc
    if gamma_p(p) == 1:
        bound = np.ones_like(t)
    else:
        bound = phi_dr_grid(space, [1j * gamma_p(p) * space.rho], t)[0].real
    comp = bound * np.exp(rate * t)
    win = (t >= 2) & (t <= 10)
    spread = float(np.max(comp[win]) / np.min(comp[win])) if win.any() else np.nan
    return DecayTable(t, bound, comp, rate, spread)


def write_table_csv(path: str, t, bound, norm, ratio):
    """CSV with columns t,bound,norm,ratio, written atomically."""
    lines = ["t,bound,norm,ratio"]
    for row in zip(t, bound, norm, ratio):
        lines.append(",".join(f"{float(x):.17g}" for x in row))
    atomic_write(path, "\n".join(lines) + "\n")
