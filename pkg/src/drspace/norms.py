"""Lebesgue and Lorentz norms over discretized measures.

A function is a vector of cell values on a WeightedGrid; it is treated as
the step function taking that value on a cell of the given mass, so the
decreasing rearrangement and every Lorentz integral are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "WeightedGrid",
    "LorentzIndex",
    "conjugate_exponent",
    "gamma_p",
    "lp_norm",
    "distribution_function",
    "decreasing_rearrangement",
    "lorentz_norm",
]


@dataclass(frozen=True, eq=False)
class WeightedGrid:
    """Cells at ``points`` with masses ``weights``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise DomainError("weights must be finite and positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", np.asarray(self.points))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))


def conjugate_exponent(p: float) -> float:
    """p' with 1/p + 1/p' = 1."""
    if p == 1:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1)


def gamma_p(p: float) -> float:
    """gamma_p = 2/p - 1, with gamma_infty = -1."""
    return -1.0 if np.isinf(p) else 2.0 / p - 1.0


@dataclass(frozen=True)
class LorentzIndex:
    """Lorentz exponents (p, q) with the strip parameter gamma_p."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p >= 1 and self.q >= 1):
            raise DomainError("Lorentz indices need p, q >= 1")
        if np.isinf(self.p) and not np.isinf(self.q):
            raise DomainError("p = infinity requires q = infinity")

    @property
    def gamma_p(self) -> float:
        return gamma_p(self.p)

    @property
    def p_conj(self) -> float:
        return conjugate_exponent(self.p)


def _values(f, grid: WeightedGrid) -> np.ndarray:
    v = np.abs(np.asarray(f)).astype(float)
    if v.shape != grid.weights.shape:
        raise DomainError("values do not match the grid")
    return v


def lp_norm(f, grid: WeightedGrid, p: float) -> float:
    """(sum |f|^p w)^{1/p}; the max of |f| for p = infinity."""
    if not p >= 1:
        raise DomainError("need p >= 1")
    v = _values(f, grid)
    if np.isinf(p):
        return float(np.max(v)) if v.size else 0.0
    vmax = np.max(v) if v.size else 0.0
    if vmax == 0:
        return 0.0
    return float(vmax * np.sum((v / vmax) ** p * grid.weights) ** (1.0 / p))


def distribution_function(f, grid: WeightedGrid, s: float) -> float:
    """Mass of {|f| > s}."""
    if s < 0:
        raise DomainError("level must be nonnegative")
    v = _values(f, grid)
    return float(np.sum(grid.weights[v > s]))


def decreasing_rearrangement(f, grid: WeightedGrid):
    """Step form of f*: values v_1 >= v_2 >= ... held on (T_{i-1}, T_i].

    Returns (v, T) with T the cumulative masses; zero cells are dropped.
    """
    v = _values(f, grid)
    order = np.argsort(-v, kind="stable")
    vs = v[order]
    ws = grid.weights[order]
    keep = vs > 0
    return vs[keep], np.cumsum(ws[keep])


def lorentz_norm(f, grid: WeightedGrid, p: float, q: float) -> float:
    """(int_0^infty (t^{1/p} f*(t))^q dt/t)^{1/q}, exact on step data.

    q = infinity gives sup_t t^{1/p} f*(t). Only (infinity, infinity) is
    accepted when p is infinite.
    """
    if isinstance(p, LorentzIndex):
        p, q = p.p, p.q
    if not p > 0 or not q >= 1:
        raise DomainError("need p > 0 and q >= 1")
    if np.isinf(p):
        if not np.isinf(q):
            raise DomainError("p = infinity requires q = infinity")
        return lp_norm(f, grid, np.inf)
    v, T = decreasing_rearrangement(f, grid)
    if v.size == 0:
        return 0.0
    if np.isinf(q):
        return float(np.max(v * T ** (1.0 / p)))
    a = q / p
    Tprev = np.concatenate([[0.0], T[:-1]])
    # T_i^a - T_{i-1}^a computed without cancellation
    with np.errstate(divide="ignore"):
        ratio = np.where(Tprev > 0, Tprev / T, 0.0)
        diff = T**a * np.where(ratio > 0, -np.expm1(a * np.log(np.where(ratio > 0, ratio, 1.0))), 1.0)
    vmax = v[0]
    total = np.sum((v / vmax) ** q * diff) / a
    return float(vmax * total ** (1.0 / q))
