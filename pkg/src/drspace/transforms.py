"""Spherical transform, its inverse, and Helgason-type Fourier transform values.

Radial functions live on composite Gauss-Legendre grids in the geodesic
radius r with weights for int_0^infty . A(r) dr. The spectral side uses the
Damek-Ricci Plancherel density |c(2 xi)|^{-2}, where c is the Jacobi
c-function of indices (alpha, beta).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from ._io import atomic_write
from .errors import DomainError, UncalibratedError
from .geometry import (
    GroupElement,
    NPoint,
    SpaceParams,
    SupportBox,
    distance,
    haar_integral,
    identity,
    log_radial_density,
    p_lambda,
    poisson_normalization,
    polar_constant,
    radial_density,
    sphere_area,
)
from .quadrature import gl_panels, panel_interpolate
from .specfun import JacobiParams, as_complex, log_plancherel_density, phi_dr_grid

__all__ = [
    "RadialProfile",
    "SpectralGrid",
    "spectral_grid",
    "dr_density",
    "phi_matrix",
    "spherical_transform",
    "inverse_transform",
    "calibrate_inversion",
    "calibration_constant",
    "clear_calibration",
    "roundtrip_error",
    "helgason_ft_radial",
    "helgason_ft_general",
    "n_norm_of_kernel",
    "convergence_margin",
    "write_spectral_csv",
]

DECAY_CLASSES = ("compact", "gaussian", "exponential")
_TAIL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial function sampled on a Gauss-Legendre grid in r.

    ``weights`` integrate against A(r) dr. ``decay_class`` is one of
    compact, gaussian, exponential; exponential profiles decay like
    (1 + r)^{-decay_power} e^{-decay_rate r}. ``tail_fraction`` is the
    A-weighted L1 mass beyond ``r_max`` relative to the total (zero for
    compact support).
    """

    m: int
    k: int
    grid: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    decay_class: str
    r_max: float
    panel_width: float
    nodes: int
    decay_rate: float = 0.0
    decay_power: float = 0.0
    tail_fraction: float = 0.0
    func: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.decay_class not in DECAY_CLASSES:
            raise DomainError(f"unknown decay class {self.decay_class!r}")
        if self.r_max > 40:
            raise DomainError("r_max must not exceed 40")
        g = self.grid
        if g.ndim != 1 or g.size == 0 or g[0] < 0 or np.any(np.diff(g) <= 0):
            raise DomainError("grid must be strictly increasing and nonnegative")
        if np.any(self.weights <= 0):
            raise DomainError("quadrature weights must be positive")
        for a in (self.grid, self.values, self.weights):
            a.setflags(write=False)

    @property
    def space(self) -> SpaceParams:
        return SpaceParams(self.m, self.k)

    @property
    def edges(self) -> np.ndarray:
        npan = self.grid.size // self.nodes
        return np.linspace(0.0, self.r_max, npan + 1)

    @classmethod
    def from_function(cls, space: SpaceParams, f: Callable, decay_class: str,
                      r_max: float, panel_width: float = 0.25, nodes: int = 16,
                      decay_rate: float = 0.0, decay_power: float = 0.0,
                      tail_fraction: float | None = None) -> "RadialProfile":
        """Sample ``f`` (vectorized in r) on panels of [0, r_max]."""
        if not 0 < r_max <= 40:
            raise DomainError("r_max must lie in (0, 40]")
        r, w = gl_panels(0.0, r_max, panel_width, nodes)
        vals = np.asarray(f(r), dtype=complex)
        weights = w * radial_density(space, r)
        if tail_fraction is None:
            tail_fraction = _tail_fraction(space, f, r_max, np.sum(np.abs(vals) * weights))
        if decay_class == "gaussian" and tail_fraction >= _TAIL_TOL:
            raise DomainError(
                f"gaussian profile tail beyond r_max={r_max} is {tail_fraction:.1e}; enlarge r_max"
            )
        return cls(space.m, space.k, r, vals, weights, decay_class, float(r_max),
                   float(panel_width), int(nodes), float(decay_rate), float(decay_power),
                   float(tail_fraction), f)

    def with_values(self, values, func: Callable | None = None) -> "RadialProfile":
        values = np.asarray(values, dtype=complex)
        if values.shape != self.grid.shape:
            raise DomainError("values must match the grid")
        return RadialProfile(self.m, self.k, self.grid, values.copy(), self.weights,
                             self.decay_class, self.r_max, self.panel_width, self.nodes,
                             self.decay_rate, self.decay_power, self.tail_fraction, func)

    def refined(self, factor: int = 2) -> "RadialProfile":
        """Same function on panels ``factor`` times narrower (needs ``func``)."""
        if self.func is None:
            raise DomainError("refinement needs the generating function")
        return RadialProfile.from_function(
            self.space, self.func, self.decay_class, self.r_max, self.panel_width / factor,
            self.nodes, self.decay_rate, self.decay_power, self.tail_fraction)

    def __call__(self, r):
        """Evaluate at arbitrary radii (generator if known, else panel interpolation)."""
        if self.func is not None:
            r = np.asarray(r, dtype=float)
            out = np.asarray(self.func(np.minimum(r, self.r_max)), dtype=complex)
            return np.where(r <= self.r_max, out, 0.0)
        return panel_interpolate(self.grid, self.values, self.nodes, r, self.edges)

    def point_function(self) -> Callable:
        """x -> f(d(x, e)) on the group."""
        space = self.space

        def f(x: GroupElement):
            return self(distance(space, x))

        return f

    def lp_norm(self, p: float) -> float:
        if np.isinf(p):
            return float(np.max(np.abs(self.values)))
        return float(np.sum(np.abs(self.values) ** p * self.weights) ** (1 / p))

    def mass(self) -> complex:
        """int f A dr."""
        return complex(np.sum(self.values * self.weights))

    def to_csv(self, path: str):
        """CSV ``r,re,im`` plus a JSON side-car ``<path>.json`` with metadata."""
        lines = ["r,re,im"]
        for r, v in zip(self.grid, self.values):
            lines.append(f"{r:.17g},{v.real:.17g},{v.imag:.17g}")
        atomic_write(path, "\n".join(lines) + "\n")
        meta = {
            "schema": 1, "m": self.m, "k": self.k, "decay_class": self.decay_class,
            "r_max": self.r_max, "panel_width": self.panel_width, "nodes": self.nodes,
            "decay_rate": self.decay_rate, "decay_power": self.decay_power,
            "tail_fraction": self.tail_fraction,
        }
        atomic_write(path + ".json", json.dumps(meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path: str) -> "RadialProfile":
        with open(path + ".json") as fh:
            meta = json.load(fh)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        space = SpaceParams(int(meta["m"]), int(meta["k"]))
        r, w = gl_panels(0.0, meta["r_max"], meta["panel_width"], meta["nodes"])
        if r.size != data.shape[0] or np.max(np.abs(r - data[:, 0])) > 1e-12 * max(1, meta["r_max"]):
            raise DomainError("CSV grid does not match the declared quadrature")
        vals = data[:, 1] + 1j * data[:, 2]
        return cls(space.m, space.k, r, vals, w * radial_density(space, r), meta["decay_class"],
                   float(meta["r_max"]), float(meta["panel_width"]), int(meta["nodes"]),
                   float(meta["decay_rate"]), float(meta["decay_power"]),
                   float(meta["tail_fraction"]), None)


def _tail_fraction(space, f, r_max, mass):
    if mass == 0:
        return 0.0

    def g(r):
        v = float(np.abs(f(np.array([r]))[0]))
        if v == 0.0:
            return 0.0
        return float(np.exp(np.log(v) + log_radial_density(space, r)))

    with np.errstate(over="ignore", divide="ignore"):
        tail = integrate.quad(g, r_max, np.inf, limit=400)[0]
    return tail / (mass + tail)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Half-line spectral quadrature on [0, xi_max] along Im lambda = eta.

    ``density_weights`` are quadrature weights times |c(2 xi)|^{-2}.
    Evenness of spherical transforms in lambda makes the half line enough.
    """

    xi: np.ndarray
    weights: np.ndarray
    eta: float
    density: np.ndarray
    xi_max: float
    panel_width: float
    nodes: int

    def __post_init__(self):
        for a in (self.xi, self.weights, self.density):
            a.setflags(write=False)

    @property
    def density_weights(self) -> np.ndarray:
        return self.weights * self.density

    @property
    def lam(self) -> np.ndarray:
        return self.xi + 1j * self.eta

    def refined(self, factor: int = 2, space: SpaceParams | None = None) -> "SpectralGrid":
        sp = space
        if sp is None:
            raise DomainError("refinement needs the space")
        return spectral_grid(sp, self.xi_max, self.panel_width / factor, self.nodes, self.eta)


def dr_density(space: SpaceParams, xi):
    """Plancherel density |c(2 xi)|^{-2} in the Damek-Ricci spectral variable."""
    J = JacobiParams(space.alpha, space.beta)
    return np.exp(log_plancherel_density(J, 2.0 * np.asarray(xi, dtype=float)))


def spectral_grid(space: SpaceParams, xi_max: float = 60.0, panel_width: float = 1.0,
                  nodes: int = 16, eta: float = 0.0) -> SpectralGrid:
    xi, w = gl_panels(0.0, xi_max, panel_width, nodes)
    return SpectralGrid(xi, w, float(eta), dr_density(space, xi), float(xi_max),
                        float(panel_width), int(nodes))


# ---------------------------------------------------------------------------
# Spherical function matrices (cached)

_PHI_CACHE: dict = {}
_PHI_LOCK = threading.Lock()
_PHI_CACHE_MAX = 48


def phi_matrix(space: SpaceParams, lam, r) -> np.ndarray:
    """Read-only matrix phi_lam(r) of shape (len(lam), len(r)), memoized."""
    lam = np.ascontiguousarray(np.atleast_1d(np.asarray(lam, dtype=complex)).ravel())
    r = np.ascontiguousarray(np.atleast_1d(np.asarray(r, dtype=float)).ravel())
    key = (space.m, space.k, lam.tobytes(), r.tobytes())
    with _PHI_LOCK:
        hit = _PHI_CACHE.get(key)
    if hit is not None:
        return hit
    mat = phi_dr_grid(space, lam, r)
    mat.setflags(write=False)
    with _PHI_LOCK:
        if len(_PHI_CACHE) >= _PHI_CACHE_MAX:
            _PHI_CACHE.pop(next(iter(_PHI_CACHE)))
        _PHI_CACHE[key] = mat
    return mat


# ---------------------------------------------------------------------------
# Forward transform


def convergence_margin(space: SpaceParams, f: RadialProfile, eta: float) -> float:
    """How far |Im lambda| = |eta| sits inside the convergence region of f_hat.

    Positive means absolutely convergent. For exponential decay e^{-a r}
    (1+r)^{-b} the integrand behaves like e^{(|eta| + rho - a) r}(1+r)^{-b}.
    """
    if f.decay_class in ("compact", "gaussian"):
        return np.inf
    gap = f.decay_rate - space.rho - abs(eta)
    if abs(gap) <= 1e-12:
        return 0.0 if f.decay_power > 1 else -1.0
    return gap


def spherical_transform(space: SpaceParams, f: RadialProfile, lam):
    """f_hat(lam) = int_0^infty f(r) phi_lam(r) A(r) dr for scalar or array lam."""
    _check_profile(space, f)
    lam_c = as_complex(lam)
    lam_arr = np.atleast_1d(lam_c)
    eta_max = float(np.max(np.abs(lam_arr.imag)))
    if convergence_margin(space, f, eta_max) < 0:
        raise DomainError(
            f"spherical transform diverges at |Im lambda|={eta_max:.6g} for "
            f"{f.decay_class} decay (rate {f.decay_rate:.6g}, rho {space.rho:.6g})"
        )
    Phi = phi_matrix(space, lam_arr, f.grid)
    out = Phi @ (f.values * f.weights)
    return complex(out[0]) if np.ndim(lam_c) == 0 else out


def _check_profile(space: SpaceParams, f: RadialProfile):
    if (f.m, f.k) != (space.m, space.k):
        raise DomainError("profile was built for a different space")


# ---------------------------------------------------------------------------
# Inverse transform and its calibrated constant

_CALIBRATION: dict = {}
_CAL_LOCK = threading.Lock()


def _inverse_raw(space: SpaceParams, F, grid: SpectralGrid, r) -> np.ndarray:
    if grid.eta != 0:
        raise DomainError("inversion uses the real line (eta = 0)")
    F = np.asarray(F, dtype=complex)
    if F.shape[-1] != grid.xi.size:
        raise DomainError("spectral samples do not match the grid")
    Phi = phi_matrix(space, grid.xi, r)
    return (F * grid.density_weights) @ Phi


def _reference_profile(space: SpaceParams) -> RadialProfile:
    return RadialProfile.from_function(space, lambda r: np.exp(-(r**2)), "gaussian", 8.0)


def calibrate_inversion(space: SpaceParams, grid: SpectralGrid | None = None,
                        reference: RadialProfile | None = None) -> float:
    """Fit the single inversion constant by a forward-inverse roundtrip.

    c_S minimizes || f - c_S J[f_hat] ||_{L^2(A dr)} on the reference
    profile (a gaussian by default) and is registered for ``space``.
    """
    grid = grid or spectral_grid(space)
    ref = reference or _reference_profile(space)
    F = spherical_transform(space, ref, grid.xi)
    g = _inverse_raw(space, F, grid, ref.grid)
    w = ref.weights
    num = np.sum(np.conj(g) * ref.values * w)
    den = np.sum(np.abs(g) ** 2 * w)
    c = float(num.real / den)
    with _CAL_LOCK:
        _CALIBRATION[(space.m, space.k)] = c
    return c


def calibration_constant(space: SpaceParams) -> float:
    with _CAL_LOCK:
        c = _CALIBRATION.get((space.m, space.k))
    if c is None:
        raise UncalibratedError(f"inversion constant for {space.summary()} not calibrated")
    return c


def clear_calibration():
    with _CAL_LOCK:
        _CALIBRATION.clear()


def inverse_transform(space: SpaceParams, F, grid: SpectralGrid, r, constant: float | None = None):
    """c_S int_0^{xi_max} F(xi) phi_xi(r) |c(2 xi)|^{-2} d xi.

    ``F`` holds samples on ``grid``; with a leading batch axis several
    spectra are inverted at once.
    """
    c = calibration_constant(space) if constant is None else constant
    out = c * _inverse_raw(space, F, grid, np.ravel(r))
    if np.ndim(r) == 0:
        return complex(out[..., 0]) if out.ndim == 1 else out[..., 0]
    return out


def roundtrip_error(space: SpaceParams, f: RadialProfile, grid: SpectralGrid | None = None) -> float:
    """Relative L^2(A dr) error of inverse(forward(f)) on f's grid."""
    grid = grid or spectral_grid(space)
    F = spherical_transform(space, f, grid.xi)
    g = inverse_transform(space, F, grid, f.grid)
    w = f.weights
    return float(np.sqrt(np.sum(np.abs(g - f.values) ** 2 * w) / np.sum(np.abs(f.values) ** 2 * w)))


def write_spectral_csv(path: str, xi, eta, values, density):
    lines = ["xi,eta,re,im,density"]
    for x, v, d in zip(np.ravel(xi), np.ravel(values), np.ravel(density)):
        lines.append(f"{x:.17g},{eta:.17g},{v.real:.17g},{v.imag:.17g},{d:.17g}")
    atomic_write(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Helgason-type Fourier transform


def helgason_ft_radial(space: SpaceParams, f: RadialProfile, lam, n: NPoint) -> complex:
    """f_tilde(lam, n) = f_hat(lam) P_lam(e, n) for radial f."""
    lam = as_complex(lam)
    return complex(spherical_transform(space, f, lam) * p_lambda(space, identity(space), n, lam))


def helgason_ft_general(space: SpaceParams, f: Callable, box: SupportBox, lam, n: NPoint,
                        budget: int = 400_000, seed: int = 0):
    """Monte-Carlo value of int_S f(x) P_lam(x, n) dx with standard error.

    The Haar integral is divided by the polar constant kappa, so the
    measure is the one under which radial integrals read int . A(r) dr.
    """
    lam = as_complex(lam)
    kappa = polar_constant(space)

    def g(x):
        return np.asarray(f(x)) * p_lambda(space, x, n, lam)

    val, se = haar_integral(space, g, box, budget=budget, seed=seed)
    return val / kappa, se / kappa


# ---------------------------------------------------------------------------
# N-norms of the Poisson kernel powers


def _p1_power_integral(space: SpaceParams, gamma_: float) -> float:
    """int_N P_1(n)^gamma dn by polar quadrature in (|X|, |Y|)."""
    Q, m, k = space.Q, space.m, space.k
    C = poisson_normalization(space)
    om_m = sphere_area(m)
    ex = Q * gamma_

    def inner(b):
        if k == 0:
            return b ** (-ex)
        om_k = sphere_area(k)

        def fy(th):
            return om_k * np.sin(th) ** (k - 1) * np.cos(th) ** (2 * ex - k - 1)

        return b ** (k / 2 - ex) * integrate.quad(fy, 0, np.pi / 2, epsabs=0, epsrel=1e-12, limit=200)[0]

    def fx(ph):
        r = 2 * np.tan(ph)
        b = (1 + r * r / 4) ** 2
        return om_m * r ** (m - 1) * inner(b) * 2 / np.cos(ph) ** 2

    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        val, _ = integrate.quad(fx, 0, np.pi / 2, epsabs=0, epsrel=1e-11, limit=400)
    return C**gamma_ * val


def n_norm_of_kernel(space: SpaceParams, lam, q: float, weighted: bool = False) -> float:
    """(int_N |P_lam(e, n)|^q w(n) dn)^{1/q} with w = P_1 if weighted else 1.

    Uses |P_lam(e, n)| = P_1(n)^{1/2 + eta/Q}. The integral converges iff
    q(1/2 + eta/Q) > 1/2 unweighted, or > -1/2 weighted.
    """
    eta = as_complex(lam).imag
    e = 0.5 + eta / space.Q
    if np.isinf(q):
        if e < 0:
            raise DomainError(f"sup of P_1^{e:.6g} is infinite (exponent 1/2 + eta/Q < 0)")
        return float(poisson_normalization(space) ** e)
    if q < 1:
        raise DomainError("q must be at least 1")
    gam = q * e + (1.0 if weighted else 0.0)
    if gam <= 0.5:
        need = "q(1/2+eta/Q) + 1" if weighted else "q(1/2+eta/Q)"
        raise DomainError(f"N-integral diverges: {need} = {gam:.6g} must exceed 1/2")
    return float(_p1_power_integral(space, gam) ** (1 / q))
