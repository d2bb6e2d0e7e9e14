"""Damek-Ricci spaces S = N A for the abelian (k = 0) and Heisenberg (2, 1) cases.

Coordinates: x = n a_s with n = (X, Y) in R^m x R^k and a_s = e^s. The
group law uses the expanding conjugation a_s n a_{-s} = (e^{s/2} X, e^{s} Y),
for which left Haar measure is e^{-2 rho s} dX dY ds, the modular function
is e^{-2 rho A(y)}, and the Poisson kernel satisfies
P_{a_t}(n) = P_1(a_{-t} n a_t) e^{-2 rho t} exactly.

All point types carry arrays with arbitrary leading batch dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy import integrate

from .errors import BudgetExhaustedError, DomainError, UnsupportedSpaceError
from .specfun import as_complex

__all__ = [
    "SpaceParams",
    "NPoint",
    "GroupElement",
    "identity",
    "a_point",
    "group_mul",
    "group_inv",
    "conjugate_by_a",
    "n_mul",
    "poisson_normalization",
    "poisson_kernel",
    "poisson_kernel_point",
    "p_lambda",
    "distance",
    "radial_density",
    "log_radial_density",
    "polar_constant",
    "sphere_area",
    "modular_delta",
    "SupportBox",
    "haar_integral",
    "ShellEstimate",
    "shell_average",
    "exp_a_function",
]


@dataclass(frozen=True)
class SpaceParams:
    """Structural constants of a Damek-Ricci space with dim v = m, dim z = k."""

    m: int
    k: int
    Q: float = field(init=False)
    rho: float = field(init=False)
    alpha: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        m, k = self.m, self.k
        if int(m) != m or int(k) != k:
            raise UnsupportedSpaceError("m and k must be integers")
        if m <= 0 or m % 2 != 0 or k < 0:
            raise UnsupportedSpaceError(f"need m positive even and k >= 0, got ({m}, {k})")
        if not (k == 0 or (m, k) == (2, 1)):
            raise UnsupportedSpaceError(
                f"supported instances are k = 0 and (m, k) = (2, 1), got ({m}, {k})"
            )
        object.__setattr__(self, "Q", m / 2 + k)
        object.__setattr__(self, "rho", (m / 2 + k) / 2)
        object.__setattr__(self, "alpha", (m + k - 1) / 2)
        object.__setattr__(self, "beta", (k - 1) / 2)

    @property
    def dim(self) -> int:
        """Manifold dimension m + k + 1."""
        return self.m + self.k + 1

    def summary(self) -> str:
        return f"m={self.m},k={self.k}"


@dataclass(frozen=True)
class NPoint:
    """Point n = (X, Y) of the nilpotent group N; arrays of shape (..., m), (..., k)."""

    X: np.ndarray
    Y: np.ndarray

    @classmethod
    def make(cls, X, Y=()) -> "NPoint":
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if Y.size == 0:
            Y = np.zeros(X.shape[:-1] + (0,))
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DomainError("N-point entries must be finite")
        return cls(X, Y)

    @property
    def x2(self) -> np.ndarray:
        """|X|^2."""
        return np.sum(self.X**2, axis=-1)

    @property
    def y2(self) -> np.ndarray:
        """|Y|^2."""
        return np.sum(self.Y**2, axis=-1)


@dataclass(frozen=True)
class GroupElement:
    """x = n a_t; ``t`` is the A-coordinate A(x)."""

    n: NPoint
    t: np.ndarray

    @classmethod
    def make(cls, X, Y=(), t=0.0) -> "GroupElement":
        n = NPoint.make(X, Y)
        t = np.asarray(t, dtype=float)
        if not np.all(np.isfinite(t)):
            raise DomainError("A-coordinate must be finite")
        return cls(n, np.broadcast_to(t, n.X.shape[:-1]).copy())

    @property
    def X(self):
        return self.n.X

    @property
    def Y(self):
        return self.n.Y


def _check_point(space: SpaceParams, n: NPoint):
    if n.X.shape[-1] != space.m or n.Y.shape[-1] != space.k:
        raise DomainError(
            f"point has dims ({n.X.shape[-1]}, {n.Y.shape[-1]}), space needs ({space.m}, {space.k})"
        )


def identity(space: SpaceParams) -> GroupElement:
    return GroupElement.make(np.zeros(space.m), np.zeros(space.k), 0.0)


def a_point(space: SpaceParams, t) -> GroupElement:
    """The element a_t (X = Y = 0); batched over ``t``."""
    t = np.asarray(t, dtype=float)
    return GroupElement.make(np.zeros(t.shape + (space.m,)), np.zeros(t.shape + (space.k,)), t)


def _bracket(space: SpaceParams, X1, X2):
    if space.k == 0:
        return np.zeros(np.broadcast_shapes(X1.shape, X2.shape)[:-1] + (0,))
    # (2, 1) Heisenberg: [X, X'] = x1 x2' - x2 x1'
    return (X1[..., 0] * X2[..., 1] - X1[..., 1] * X2[..., 0])[..., None]


def n_mul(space: SpaceParams, n1: NPoint, n2: NPoint) -> NPoint:
    """(X, Y)(X', Y') = (X + X', Y + Y' + [X, X']/2)."""
    return NPoint(n1.X + n2.X, n1.Y + n2.Y + 0.5 * _bracket(space, n1.X, n2.X))


def n_inv(n: NPoint) -> NPoint:
    return NPoint(-n.X, -n.Y)


def conjugate_by_a(space: SpaceParams, t, n: NPoint) -> NPoint:
    """a_t n a_{-t} = (e^{t/2} X, e^{t} Y)."""
    t = np.asarray(t, dtype=float)
    return NPoint(np.exp(t / 2)[..., None] * n.X, np.exp(t)[..., None] * n.Y)


def group_mul(space: SpaceParams, g1: GroupElement, g2: GroupElement) -> GroupElement:
    """(n1 a_t1)(n2 a_t2) = (n1 . a_t1 n2 a_{-t1}) a_{t1 + t2}."""
    _check_point(space, g1.n)
    _check_point(space, g2.n)
    n = n_mul(space, g1.n, conjugate_by_a(space, g1.t, g2.n))
    return GroupElement(n, g1.t + g2.t)


def group_inv(space: SpaceParams, g: GroupElement) -> GroupElement:
    """(n a_t)^{-1} = a_{-t} n^{-1} = (a_{-t} n^{-1} a_t) a_{-t}."""
    _check_point(space, g.n)
    return GroupElement(conjugate_by_a(space, -g.t, n_inv(g.n)), -g.t)


# ---------------------------------------------------------------------------
# Poisson kernel


def sphere_area(d: int) -> float:
    """Area of the unit sphere S^{d-1} in R^d."""
    return 2 * pi ** (d / 2) / gamma(d / 2)


@lru_cache(maxsize=None)
def poisson_normalization(space: SpaceParams) -> float:
    """C with int_N P_1 = 1, by polar quadrature in (|X|, |Y|)."""
    Q, m, k = space.Q, space.m, space.k
    om_m = sphere_area(m)
    # |X| = 2 tan(phi) and |Y| = sqrt(b) tan(theta) map both radii to [0, pi/2)

    def inner(b):
        if k == 0:
            return b ** (-Q)
        om_k = sphere_area(k)

        def fy(th):
            c = np.cos(th)
            return om_k * np.sin(th) ** (k - 1) * c ** (2 * Q - k - 1)

        return b ** (k / 2 - Q) * integrate.quad(fy, 0, pi / 2, epsabs=0, epsrel=1e-13, limit=200)[0]

    def fx(ph):
        r = 2 * np.tan(ph)
        b = (1 + r * r / 4) ** 2
        return om_m * r ** (m - 1) * inner(b) * 2 / np.cos(ph) ** 2

    val, err = integrate.quad(fx, 0, pi / 2, epsabs=0, epsrel=1e-13, limit=200)
    if not np.isfinite(val) or err > 1e-9 * val:
        raise ArithmeticError("Poisson normalization quadrature did not converge")
    return 1.0 / val


def _log_poisson(space: SpaceParams, t, x2, y2):
    C = poisson_normalization(space)
    t = np.asarray(t, dtype=float)
    base = (np.exp(t) + x2 / 4) ** 2 + y2
    return np.log(C) + space.Q * t - space.Q * np.log(base)


def poisson_kernel(space: SpaceParams, t, n: NPoint):
    """P_{a_t}(n) = C e^{Qt} ((e^t + |X|^2/4)^2 + |Y|^2)^{-Q}."""
    _check_point(space, n)
    return np.exp(_log_poisson(space, t, n.x2, n.y2))


def poisson_kernel_point(space: SpaceParams, x: GroupElement, n: NPoint):
    """P(x, n) = P_{a_t}(n^{-1} n_x) for x = n_x a_t."""
    rel = n_mul(space, n_inv(n), x.n)
    return poisson_kernel(space, x.t, rel)


def p_lambda(space: SpaceParams, x: GroupElement, n1: NPoint, lam):
    """Complex power P(x, n)^{1/2 - i lam / Q} of the Poisson kernel."""
    lam = as_complex(lam)
    rel = n_mul(space, n_inv(n1), x.n)
    logp = _log_poisson(space, x.t, rel.x2, rel.y2)
    return np.exp((0.5 - 1j * lam / space.Q) * logp)


# ---------------------------------------------------------------------------
# Distance and radial measure


def distance(space: SpaceParams, x: GroupElement, model: str = "exact", c0: float = 1.0):
    """Geodesic distance d(x, e).

    ``model="exact"`` uses the formula matched to this group law,
        cosh^2(d/2) = ((1 + e^s + |X|^2/4)^2 + |Y|^2) / (4 e^s).
    ``model="literal"`` evaluates
        cosh^2 d = (cosh s + c0 e^s |X|^2)^2 + e^{2s} |Y|^2,
    kept for comparison; it does not reproduce the spherical functions in
    these coordinates for c0 in {1, 1/4}.
    Both are computed through sinh to stay accurate near the identity.
    """
    _check_point(space, x.n)
    s = np.asarray(x.t, dtype=float)
    u, y2 = x.n.x2, x.n.y2
    if model == "exact":
        es = np.exp(s)
        u4 = u / 4
        # cosh^2(d/2) - 1 with every term nonnegative
        num = (1 - es) ** 2 + 2 * (1 + es) * u4 + u4**2 + y2
        return 2 * np.arcsinh(np.sqrt(num / (4 * es)))
    if model == "literal":
        es = np.exp(s)
        sh2 = np.sinh(s) ** 2 + 2 * np.cosh(s) * c0 * es * u + (c0 * es * u) ** 2 + es**2 * y2
        return np.arcsinh(np.sqrt(sh2))
    raise ValueError(f"unknown distance model {model!r}")


def log_radial_density(space: SpaceParams, r):
    """log A(r)."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        return (space.m + space.k) * np.log(2 * np.sinh(r / 2)) + space.k * np.log(2 * np.cosh(r / 2))


def radial_density(space: SpaceParams, r):
    """A(r) = (2 sinh(r/2))^{m+k} (2 cosh(r/2))^k."""
    r = np.asarray(r, dtype=float)
    return (2 * np.sinh(r / 2)) ** (space.m + space.k) * (2 * np.cosh(r / 2)) ** space.k


def polar_constant(space: SpaceParams) -> float:
    """kappa with dx = kappa A(r) dr dsigma (dsigma a probability measure)."""
    return sphere_area(space.m + space.k + 1) / 2**space.k


def modular_delta(space: SpaceParams, y: GroupElement):
    """Delta(y) = e^{-2 rho A(y)}."""
    return np.exp(-2 * space.rho * np.asarray(y.t, dtype=float))


def exp_a_function(space: SpaceParams, lam):
    """x -> e^{(i lam - rho) A(x^{-1})} = e^{(rho - i lam) A(x)}.

    With the left Haar measure of these coordinates its radialization is
    phi_lam; the same identity in terms of A(x) holds for right Haar measure.
    """
    lam = as_complex(lam)

    def f(x: GroupElement):
        return np.exp((1j * lam - space.rho) * (-np.asarray(x.t)))

    return f


# ---------------------------------------------------------------------------
# Monte-Carlo integration


@dataclass(frozen=True)
class SupportBox:
    """Box |X_i| <= x_max, |Y_j| <= y_max, s in [s_min, s_max] containing supp f."""

    x_max: float
    y_max: float
    s_min: float
    s_max: float

    def volume(self, space: SpaceParams) -> float:
        return (2 * self.x_max) ** space.m * (2 * self.y_max) ** space.k * (self.s_max - self.s_min)


def _stratified_ratio(strata, wt, fvals, nstrata):
    """Stratified estimates of sum(w f)/sum(w) plus the weighted total.

    Returns (ratio, ratio_se, total, total_se) with ratio arrays over the
    columns of ``fvals``.
    """
    nj = np.bincount(strata, minlength=nstrata).astype(float)
    good = nj > 1
    if not np.all(good):
        raise ValueError("each stratum needs at least two samples")

    def smean(v):
        return np.bincount(strata, v, nstrata) / nj

    def svar(v):
        mean = smean(v)
        return np.bincount(strata, v * v, nstrata) / nj - mean**2

    D = smean(wt).sum()
    D_se = np.sqrt(np.sum(np.maximum(svar(wt), 0) / (nj - 1)))
    ratios, ses = [], []
    for q in range(fvals.shape[1]):
        f = fvals[:, q]
        N = smean(wt * f.real).sum() + 1j * smean(wt * f.imag).sum()
        R = N / D if D > 0 else 0.0
        z = wt * (f - R)
        vz = np.maximum(svar(z.real), 0) + np.maximum(svar(z.imag), 0)
        ratios.append(R)
        ses.append(np.sqrt(np.sum(vz / (nj - 1))) / D if D > 0 else np.inf)
    return np.array(ratios), np.array(ses), D, D_se


def haar_integral(space: SpaceParams, f, box: SupportBox, budget: int = 200_000,
                  seed: int = 0, strata: int = 64):
    """Monte-Carlo estimate of int_S f(x) dx over ``box`` with left Haar measure.

    Samples are uniform in the box within strata of s, weighted by
    e^{-2 rho s}. Returns (value, standard error); ``f`` may return several
    columns, in which case arrays are returned.
    """
    rng = np.random.default_rng(seed)
    per = max(budget // strata, 2)
    j = np.repeat(np.arange(strata), per)
    edges = np.linspace(box.s_min, box.s_max, strata + 1)
    width = edges[1] - edges[0]
    s = edges[j] + width * rng.random(j.size)
    X = box.x_max * (2 * rng.random((j.size, space.m)) - 1)
    Y = box.y_max * (2 * rng.random((j.size, space.k)) - 1)
    x = GroupElement(NPoint(X, Y), s)
    vals = np.asarray(f(x))
    single = vals.ndim == 1
    vals = vals.reshape(j.size, -1).astype(complex)
    base = (2 * box.x_max) ** space.m * (2 * box.y_max) ** space.k * width
    wt = base * np.exp(-2 * space.rho * s)
    nj = float(per)
    est, se = [], []
    for q in range(vals.shape[1]):
        g = wt * vals[:, q]
        sm = (np.bincount(j, g.real, strata) + 1j * np.bincount(j, g.imag, strata)) / nj
        v = (np.bincount(j, g.real**2, strata) + np.bincount(j, g.imag**2, strata)) / nj - np.abs(sm) ** 2
        est.append(sm.sum())
        se.append(np.sqrt(np.sum(np.maximum(v, 0) / (nj - 1))))
    est, se = np.array(est), np.array(se)
    if single:
        return complex(est[0]), float(se[0])
    return est, se


@dataclass(frozen=True)
class ShellEstimate:
    """Shell average with standard errors and the Haar volume of the shell."""

    value: np.ndarray
    stderr: np.ndarray
    volume: float
    volume_stderr: float
    samples: int


def _slice_model(space, model, c0):
    """Return (w0, cX, cY, level) describing the fibre of a shell at height s.

    In the variables w = w0(s) + cX(s)|X|^2 and v = cY(s)|Y| the squared
    level function of the distance is w^2 + v^2 = level(d, s).
    """
    if model == "exact":
        return (lambda s: 1 + np.exp(s), lambda s: 0.25 * np.ones_like(s),
                lambda s: np.ones_like(s), lambda d, s: 4 * np.exp(s) * np.cosh(d / 2) ** 2)
    if model == "literal":
        return (np.cosh, lambda s: c0 * np.exp(s), np.exp, lambda d, s: np.cosh(d) ** 2 + 0 * s)
    raise ValueError(f"unknown distance model {model!r}")


def _disc_segment(R, w0):
    """Area of {w >= w0, v >= 0, w^2 + v^2 <= R^2}."""
    R = np.maximum(R, w0)
    return 0.5 * R**2 * np.arccos(np.clip(w0 / R, -1, 1)) - 0.5 * w0 * np.sqrt(R**2 - w0**2)


def shell_average(space: SpaceParams, F, t: float, delta: float, budget: int = 1_000_000,
                  seed: int = 0, strata: int = 2000, model: str = "exact", c0: float = 1.0,
                  rel_se_target: float | None = None) -> ShellEstimate:
    """Monte-Carlo average of F over the shell {t <= d(x, e) <= t + delta}.

    The average is with respect to left Haar measure e^{-2 rho s} dn ds.
    The height s is stratified; within each stratum the fibre of the shell
    is sampled exactly (its area is known in closed form), so every sample
    lands in the shell. ``F`` maps a batched GroupElement to an array of
    shape (n,) or (n, q).
    """
    if not (t > delta > 0):
        raise DomainError("shell needs t > delta > 0")
    if budget < 2 * strata:
        raise DomainError("budget must allow two samples per stratum")
    w0f, cXf, cYf, level = _slice_model(space, model, c0)
    rng = np.random.default_rng(seed)
    t2 = t + delta
    smax = t2 + 1e-12
    edges = np.linspace(-smax, smax, strata + 1)
    width = edges[1] - edges[0]
    per = budget // strata
    j = np.repeat(np.arange(strata), per)
    s = edges[j] + width * rng.random(j.size)
    w0, cX, cY = w0f(s), cXf(s), cYf(s)
    L1, L2 = level(t, s), level(t2, s)
    m = space.m
    if space.k == 1:
        R1, R2 = np.sqrt(L1), np.sqrt(L2)
        area = np.maximum(_disc_segment(R2, w0) - _disc_segment(R1, w0), 0.0)
        jac = (sphere_area(m) / 2) / cX * sphere_area(1) / cY
        fibre = area * jac
        # polar rejection inside the tight box R in [max(R1, w0), R2], theta <= arccos(w0/R2)
        Rr = np.zeros(s.size)
        th = np.zeros(s.size)
        todo = np.flatnonzero(area > 0)
        for _ in range(200):
            if todo.size == 0:
                break
            lo = np.maximum(R1[todo], w0[todo])
            hi = R2[todo]
            rr = np.sqrt(lo**2 + (hi**2 - lo**2) * rng.random(todo.size))
            tt = np.arccos(np.clip(w0[todo] / hi, -1, 1)) * rng.random(todo.size)
            ok = rr * np.cos(tt) >= w0[todo]
            Rr[todo[ok]] = rr[ok]
            th[todo[ok]] = tt[ok]
            todo = todo[~ok]
        if todo.size:
            raise BudgetExhaustedError("fibre sampler failed to place all samples")
        wv = np.maximum(Rr * np.cos(th), w0)
        v = Rr * np.sin(th)
        u = (wv - w0) / cX
        ysign = np.where(rng.random(s.size) < 0.5, -1.0, 1.0)
        Y = (ysign * v / cY)[:, None]
    else:
        R1, R2 = np.sqrt(L1), np.sqrt(L2)
        half = m / 2
        ulo = np.maximum(R1 - w0, 0.0) / cX
        uhi = np.maximum(R2 - w0, 0.0) / cX
        fibre = (sphere_area(m) / 2) / half * (uhi**half - ulo**half)
        u = (ulo**half + (uhi**half - ulo**half) * rng.random(s.size)) ** (1 / half)
        Y = np.zeros((s.size, 0))
    direction = rng.standard_normal((s.size, m))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    X = np.sqrt(u)[:, None] * direction
    wt = np.exp(-2 * space.rho * s) * fibre * width
    x = GroupElement(NPoint(X, Y), s)
    vals = np.asarray(F(x))
    single = vals.ndim == 1
    vals = vals.reshape(s.size, -1).astype(complex)
    R, se, vol, vol_se = _stratified_ratio(j, wt, vals, strata)
    if rel_se_target is not None:
        rel = se / np.maximum(np.abs(R), 1e-300)
        if np.any(rel > rel_se_target):
            raise BudgetExhaustedError(
                f"relative standard error {np.max(rel):.2e} above target {rel_se_target:.2e}"
            )
    if single:
        return ShellEstimate(R[0], se[0], vol, vol_se, s.size)
    return ShellEstimate(R, se, vol, vol_se, s.size)
