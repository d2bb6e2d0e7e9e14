"""Special functions for Jacobi analysis.

Complex Gamma (Lanczos), Gauss hypergeometric 2F1 with a certified domain,
the normalized Bessel function j_alpha, Jacobi functions at complex spectral
parameter, the Harish-Chandra c-function and its Plancherel density.

Jacobi functions are evaluated by the hypergeometric power series in
z = -sinh(s)^2 near the origin and by high-order Taylor marching of the
Jacobi ODE beyond the series radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, pi

import numpy as np

from .errors import DomainError, OutsideCertifiedDomainError, PrecisionLossError

__all__ = [
    "JacobiParams",
    "SpectralPoint",
    "as_complex",
    "gamma_complex",
    "loggamma_complex",
    "rgamma_complex",
    "gauss_2f1",
    "bessel_j_normalized",
    "jacobi_phi",
    "jacobi_phi_grid",
    "jacobi_phi_hypergeometric",
    "phi_dr",
    "phi_dr_grid",
    "c_function",
    "log_plancherel_density",
    "plancherel_density",
]


@dataclass(frozen=True)
class JacobiParams:
    """Jacobi indices (alpha, beta) with rho_j = alpha + beta + 1."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise DomainError("Jacobi indices must be finite")
        if self.beta < -0.5 or self.alpha < self.beta:
            raise DomainError(
                f"need alpha >= beta >= -1/2, got ({self.alpha}, {self.beta})"
            )

    @property
    def rho_j(self) -> float:
        return self.alpha + self.beta + 1.0


@dataclass(frozen=True)
class SpectralPoint:
    """Complex spectral parameter lambda = xi + i*eta."""

    xi: float
    eta: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.xi) and np.isfinite(self.eta)):
            raise DomainError("spectral point must be finite")

    @classmethod
    def from_complex(cls, z: complex) -> "SpectralPoint":
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.xi, self.eta)

    def in_strip(self, width: float) -> bool:
        """True when |Im lambda| <= width."""
        return abs(self.eta) <= width


def as_complex(lam) -> complex | np.ndarray:
    """Coerce a SpectralPoint, number or array to complex."""
    if isinstance(lam, SpectralPoint):
        return complex(lam)
    if np.ndim(lam) == 0:
        return complex(lam)
    return np.asarray(lam, dtype=complex)


# ---------------------------------------------------------------------------
# Gamma

# Godfrey's coefficients for g = 607/128, n = 15.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array([
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
])
_HALF_LOG_2PI = 0.5 * np.log(2.0 * pi)


def _is_pole(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))


def _log_sin_pi(z: np.ndarray) -> np.ndarray:
    """log(sin(pi z)) without overflow for large |Im z| (some branch)."""
    out = np.empty_like(z)
    big = np.abs(z.imag) > 30
    zs = z[~big]
    # sin(pi z) = (-1)^n sin(pi (z - n)); z - n is exact, which keeps
    # relative accuracy next to the zeros of sin
    n = np.round(zs.real)
    out[~big] = np.log(np.sin(pi * (zs - n))) + 1j * pi * n
    zb = z[big]
    # sin(pi z) = (e^{i pi z} - e^{-i pi z}) / (2i); keep the dominant exponential.
    sgn = np.sign(zb.imag)
    dom = -1j * sgn * pi * zb  # exponent of the dominant term
    out[big] = dom + np.log((1.0 - np.exp(-2.0 * dom)) / (2j) * np.where(sgn > 0, -1.0, 1.0))
    return out


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    x = z - 1.0
    acc = np.full_like(x, _LANCZOS_C[0])
    for k in range(1, _LANCZOS_C.size):
        acc = acc + _LANCZOS_C[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * np.log(t) - t + np.log(acc)


def loggamma_complex(z):
    """A logarithm of Gamma(z); the real part is log|Gamma(z)| exactly.

    The imaginary part is some branch of arg Gamma(z), which is all callers
    need since they either exponentiate or take the real part.
    """
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(_is_pole(zz)):
        raise DomainError("Gamma has a pole at a nonpositive integer")
    out = np.empty_like(zz)
    right = zz.real >= 0.5
    out[right] = _loggamma_right(zz[right])
    left = ~right
    if left.any():
        zl = zz[left]
        out[left] = np.log(pi) - _log_sin_pi(zl) - _loggamma_right(1.0 - zl)
    return out[0] if np.ndim(z) == 0 else out.reshape(np.shape(z))


def gamma_complex(z):
    """Gamma(z) for complex z, relative error about 1e-14 for |z| <= 50."""
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(_is_pole(zz)):
        raise DomainError("Gamma has a pole at a nonpositive integer")
    out = np.exp(loggamma_complex(zz))
    # Real arguments deserve real output with exact sign.
    real = zz.imag == 0
    out[real] = out[real].real + 0j
    return out[0] if np.ndim(z) == 0 else out.reshape(np.shape(z))


def rgamma_complex(z):
    """1/Gamma(z), equal to zero at the poles."""
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros_like(zz)
    ok = ~_is_pole(zz)
    out[ok] = np.exp(-loggamma_complex(zz[ok]))
    return out[0] if np.ndim(z) == 0 else out.reshape(np.shape(z))


# ---------------------------------------------------------------------------
# Gauss hypergeometric function

_HYP_TOL = 1e-10
_HYP_MAXTERMS = 20000


def _hyp_series(a, b, c, z, maxterms=_HYP_MAXTERMS):
    """Direct Maclaurin sum with a cancellation-aware error estimate."""
    term = 1.0 + 0j
    total = 1.0 + 0j
    absum = 1.0
    for n in range(maxterms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        absum += abs(term)
        if term == 0 or (abs(term) <= 1e-17 * abs(total) and n > 2 and abs(z) < 1):
            # tail bounded geometrically once the ratio has settled below 1
            ratio = abs((a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2)) * z)
            if ratio < 0.999:
                break
    else:
        raise OutsideCertifiedDomainError(f"2F1 series did not converge at z={z}")
    err = 64 * np.finfo(float).eps * absum
    if abs(total) == 0 or err > _HYP_TOL * abs(total):
        raise OutsideCertifiedDomainError(
            f"2F1 series loses accuracy by cancellation at z={z} "
            f"(estimated relative error {err / max(abs(total), 1e-300):.1e})"
        )
    return total


def _hyp_near_one(a, b, c, z):
    """Connection formula in 1 - z for 0.75 < z < 1."""
    d = c - a - b
    if abs(d - np.round(d.real)) < 1e-3:
        # Near-integer c - a - b is the logarithmic case; fall back to the
        # slowly converging direct series when it is still affordable.
        if z <= 0.999:
            return _hyp_series(a, b, c, z)
        raise OutsideCertifiedDomainError(
            "2F1 near z=1 with integer c-a-b (logarithmic case) is not certified"
        )
    w = 1.0 - z
    g1 = gamma_complex(c) * gamma_complex(d) * rgamma_complex(c - a) * rgamma_complex(c - b)
    g2 = gamma_complex(c) * gamma_complex(-d) * rgamma_complex(a) * rgamma_complex(b)
    t1 = g1 * _hyp_series(a, b, 1.0 - d, w) if g1 != 0 else 0.0
    t2 = g2 * w**d * _hyp_series(c - a, c - b, 1.0 + d, w) if g2 != 0 else 0.0
    total = t1 + t2
    scale = abs(t1) + abs(t2)
    if scale > 0 and abs(total) < 1e-6 * scale:
        raise OutsideCertifiedDomainError("2F1 connection formula cancels at this point")
    return total


def gauss_2f1(a, b, c, z) -> complex:
    """Gauss hypergeometric function 2F1(a, b; c; z).

    Certified for real z < 1 with complex parameters; other regions raise
    OutsideCertifiedDomainError instead of returning an inaccurate value.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if _is_pole(c):
        raise DomainError("2F1 undefined for c a nonpositive integer")
    zc = complex(z)
    if zc.imag != 0 or not np.isfinite(zc.real):
        raise OutsideCertifiedDomainError("2F1 is certified only for real z")
    x = zc.real
    if x >= 1.0:
        raise OutsideCertifiedDomainError("2F1 is certified only for z < 1")
    if x == 0.0:
        return 1.0 + 0j
    if 0 < x <= 0.75:
        return _hyp_series(a, b, c, x)
    if x > 0.75:
        return _hyp_near_one(a, b, c, x)
    if x >= -0.5:
        try:
            return _hyp_series(a, b, c, x)
        except OutsideCertifiedDomainError:
            pass
    # Pfaff transformation maps z < 0 into (0, 1).
    w = x / (x - 1.0)
    inner = _hyp_series(a, c - b, c, w) if w <= 0.75 else _hyp_near_one(a, c - b, c, w)
    return (1.0 - x) ** (-a) * inner


# ---------------------------------------------------------------------------
# Bessel

_BESSEL_SWITCH = 15.0


def _bessel_series(alpha, x):
    y = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(200):
        term = term * y / ((alpha + 1 + n) * (n + 1))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _bessel_asymptotic(alpha, x):
    """Hankel expansion of J_alpha(x) for large x, returned as j_alpha."""
    mu = 4.0 * alpha * alpha
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    done = np.zeros(x.shape, bool)
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        # stop each point once the terms begin to grow (optimal truncation)
        grow = np.abs(term) >= prev
        done |= grow
        use = ~done
        if k % 2 == 1:
            q = np.where(use, q + (-1) ** ((k - 1) // 2) * term, q)
        else:
            p = np.where(use, p + (-1) ** (k // 2) * term, p)
        prev = np.abs(term)
        if np.all(done | (np.abs(term) < 1e-17)):
            break
    omega = x - (0.5 * alpha + 0.25) * pi
    jv = np.sqrt(2.0 / (pi * x)) * (p * np.cos(omega) - q * np.sin(omega))
    # j_alpha(x) = Gamma(alpha+1) (2/x)^alpha J_alpha(x)
    lg = loggamma_complex(alpha + 1.0).real
    return np.exp(lg + alpha * np.log(2.0 / x)) * jv


def bessel_j_normalized(alpha: float, x):
    """Normalized Bessel function j_alpha(x) = Gamma(alpha+1)(2/x)^alpha J_alpha(x).

    Even in x with j_alpha(0) = 1. Power series for |x| <= 15 and the Hankel
    asymptotic expansion beyond; absolute error below 1e-10 for |x| <= 100
    and moderate alpha.
    """
    if not alpha > -1:
        raise DomainError("normalized Bessel function needs alpha > -1")
    xa = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    out = np.empty_like(xa)
    small = xa <= _BESSEL_SWITCH
    if small.any():
        out[small] = _bessel_series(alpha, xa[small])
    if (~small).any():
        out[~small] = _bessel_asymptotic(alpha, xa[~small])
    return out[0] if np.ndim(x) == 0 else out.reshape(np.shape(x))


# ---------------------------------------------------------------------------
# Jacobi functions

_ORDER = 24
_MAX_STEP = 0.5
_PREC_TOL = 1e-9

_n = np.arange(_ORDER - 1)[:, None]
_i = np.arange(_ORDER + 1)[None, :]
_fact = np.array([2.0**j / factorial(j) for j in range(2 * _ORDER + 3)])
_even = np.arange(2 * _ORDER + 3) % 2 == 0
_m1a = (_i >= 2) & (_i <= _n + 1)
_m1b = (_i >= 1) & (_i <= _n + 1)
_m2 = _i <= _n
_k1 = np.clip(_n + 2 - _i, 0, None)
_k2 = np.clip(_n + 1 - _i, 0, None)
_k3 = np.clip(_n - _i, 0, None)
_D = ((_n + 2) * (_n + 1)).astype(float)
_pw = np.arange(_ORDER + 1)


def _zseries(alpha, beta, mu, s):
    """phi and dphi/ds from the series in z = -sinh(s)^2, shape (nmu, ns)."""
    rho = alpha + beta + 1
    a = (rho + 1j * mu) / 2
    b = (rho - 1j * mu) / 2
    c = alpha + 1
    z = -np.sinh(s) ** 2
    coef = np.ones((mu.size, 1), complex)
    zpow = np.ones((1, s.size))
    tot = np.ones((mu.size, s.size), complex)
    dtot = np.zeros_like(tot)
    for n in range(600):
        coef = coef * ((a + n) * (b + n) / ((c + n) * (n + 1)))[:, None]
        dterm = (n + 1) * coef * zpow
        zpow = zpow * z[None, :]
        term = coef * zpow
        tot += term
        dtot += dterm
        small = np.abs(term) <= 1e-18 * np.abs(tot)
        dsmall = np.abs(dterm * z[None, :]) <= 1e-18 * np.abs(tot)
        if np.all(small & dsmall):
            break
    else:
        raise PrecisionLossError("Jacobi series failed to converge", estimate=np.inf)
    return tot, dtot * (-np.sinh(2 * s))[None, :]


def _march(alpha, beta, mu, s_eval):
    """Series start then Taylor marching of the Jacobi ODE.

    The ODE is used in the form
        sinh(2s)/2 phi'' + (rho cosh 2s + alpha - beta) phi' + lam2 sinh(2s)/2 phi = 0
    whose coefficients are entire, so the Taylor radius at an anchor s_k is
    limited only by the regular singular points on the imaginary axis.
    """
    rho = alpha + beta + 1
    lam2 = mu**2 + rho**2
    w = np.max(np.abs(mu)) + rho
    s0 = min(0.25, np.arcsinh(1.0 / w)) if w > 0 else 0.25
    out = np.empty((mu.size, s_eval.size), complex)
    order_idx = np.argsort(s_eval, kind="stable")
    ss = s_eval[order_idx]
    m0 = ss <= s0
    if m0.any():
        v, _ = _zseries(alpha, beta, mu, ss[m0])
        out[:, order_idx[m0]] = v
    if m0.all():
        return out, 0.0
    v, d = _zseries(alpha, beta, mu, np.array([s0]))
    A = np.zeros((_ORDER + 1, mu.size), complex)
    A[0], A[1] = v[:, 0], d[:, 0]
    sk = s0
    pos = np.searchsorted(ss, s0, side="right")
    H = min(1.0 / w if w > 0 else np.inf, _MAX_STEP)
    err = 0.0
    while pos < ss.size:
        h = min(0.5 * sk, H)
        C = np.cosh(2 * sk)
        T = np.tanh(2 * sk)
        # Taylor coefficients of sinh(2s)/(2 cosh 2sk) and (rho cosh 2s + a - b)/cosh 2sk
        p = 0.5 * _fact * np.where(_even, T, 1.0)
        r = rho * _fact * np.where(_even, 1.0, T)
        r[0] += (alpha - beta) / C
        D = p[0] * _D
        M1 = -(np.where(_m1a, p[_k1] * _i * (_i - 1), 0.0) + np.where(_m1b, r[_k2] * _i, 0.0)) / D
        M2 = -np.where(_m2, p[_k3], 0.0) / D
        for n in range(_ORDER - 1):
            A[n + 2] = M1[n, : n + 2] @ A[: n + 2] + lam2 * (M2[n, : n + 1] @ A[: n + 1])
        scale = np.abs(A[0]) + h * np.abs(A[1]) + np.exp(-rho * sk)
        tail = (np.abs(A[_ORDER]) * h**_ORDER + np.abs(A[_ORDER - 1]) * h ** (_ORDER - 1)) / scale
        # truncation plus a per-step roundoff allowance
        err += float(np.max(tail)) + 16 * np.finfo(float).eps
        snext = sk + h
        hi = np.searchsorted(ss, snext, side="left")
        u = np.concatenate([ss[pos:hi] - sk, [h]])
        U = u[None, :] ** _pw[:, None]
        dU = np.zeros((_ORDER + 1, 1))
        dU[1:, 0] = _pw[1:] * h ** (_pw[1:] - 1)
        vals = A.T @ np.concatenate([U, dU], axis=1)
        if hi > pos:
            out[:, order_idx[pos:hi]] = vals[:, :-2]
            pos = hi
        A = np.zeros_like(A)
        A[0], A[1] = vals[:, -2], vals[:, -1]
        sk = snext
    return out, err


def jacobi_phi_grid(params: JacobiParams, mu, s, *, check: bool = True) -> np.ndarray:
    """Jacobi functions phi_mu^{(alpha,beta)}(s) on a (len(mu), len(s)) grid.

    Normalized by phi_mu(0) = 1. Raises PrecisionLossError when the marching
    truncation estimate exceeds 1e-9 (relative to the natural envelope).
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=complex)).ravel()
    s = np.atleast_1d(np.asarray(s, dtype=float)).ravel()
    if np.any(s < 0) or not np.all(np.isfinite(s)):
        raise DomainError("Jacobi functions need s >= 0")
    if not np.all(np.isfinite(mu)):
        raise DomainError("spectral parameter must be finite")
    if mu.size == 0 or s.size == 0:
        return np.zeros((mu.size, s.size), complex)
    out, err = _march(params.alpha, params.beta, mu, s)
    if check and err > _PREC_TOL:
        raise PrecisionLossError(
            f"Jacobi marching truncation estimate {err:.1e} exceeds {_PREC_TOL:.0e}",
            estimate=err,
        )
    return out


def jacobi_phi(params: JacobiParams, mu, s):
    """Jacobi function phi_mu^{(alpha,beta)}(s) for one spectral parameter.

    ``mu`` is a complex number or SpectralPoint; ``s`` a scalar or array.
    The result has the shape of ``s``.
    """
    mu = as_complex(mu)
    vals = jacobi_phi_grid(params, [mu], np.ravel(s))[0]
    return complex(vals[0]) if np.ndim(s) == 0 else vals.reshape(np.shape(s))


def jacobi_phi_hypergeometric(params: JacobiParams, mu, s: float) -> complex:
    """Second route: Pfaff-transformed hypergeometric representation.

    phi_mu(s) = cosh(s)^{-(rho+i mu)} 2F1((rho+i mu)/2, (alpha-beta+1+i mu)/2; alpha+1; tanh^2 s)

    Inherits the certified domain of gauss_2f1.
    """
    mu = as_complex(mu)
    rho = params.rho_j
    a = (rho + 1j * mu) / 2
    b = (params.alpha - params.beta + 1 + 1j * mu) / 2
    c = params.alpha + 1
    x = np.tanh(s) ** 2
    return np.cosh(s) ** (-(rho + 1j * mu)) * gauss_2f1(a, b, c, x)


def _space_jacobi(space) -> JacobiParams:
    return JacobiParams(space.alpha, space.beta)


def phi_dr_grid(space, lam, t) -> np.ndarray:
    """Damek-Ricci spherical functions phi_lambda(a_t) on a (len(lam), len(t)) grid."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    return jacobi_phi_grid(_space_jacobi(space), 2.0 * lam, 0.5 * t)


def phi_dr(space, lam, t):
    """Damek-Ricci spherical function phi_lambda(a_t) = phi^{(alpha,beta)}_{2 lambda}(t/2).

    Eigenfunction of the radial Laplacian with eigenvalue -(lambda^2 + rho^2),
    rho = Q/2, with phi_lambda(0) = 1 and phi_{-i rho} = 1.
    """
    lam = as_complex(lam)
    vals = phi_dr_grid(space, [lam], np.ravel(t))[0]
    return complex(vals[0]) if np.ndim(t) == 0 else vals.reshape(np.shape(t))


# ---------------------------------------------------------------------------
# c-function and Plancherel density


def c_function(params: JacobiParams, mu) -> complex:
    """Harish-Chandra c-function of the Jacobi transform.

    c(mu) = 2^{rho-i mu} Gamma(alpha+1) Gamma(i mu)
            / [Gamma((rho+i mu)/2) Gamma((alpha-beta+1+i mu)/2)]
    """
    mu = as_complex(mu)
    rho = params.rho_j
    al, be = params.alpha, params.beta
    iz = 1j * mu
    if _is_pole(iz):
        raise DomainError(f"c-function has a pole at mu={mu}")
    num = loggamma_complex(al + 1.0) + loggamma_complex(iz)
    d1 = (rho + iz) / 2
    d2 = (al - be + 1 + iz) / 2
    inv = rgamma_complex(d1) * rgamma_complex(d2)
    if inv == 0:
        return 0.0 + 0j
    return complex(2.0 ** (rho - iz) * np.exp(num) * inv)


def _log_abs_gamma_imag_inv2(xi: np.ndarray) -> np.ndarray:
    """log(1/|Gamma(i xi)|^2) = log(xi sinh(pi xi) / pi) for xi > 0."""
    x = pi * xi
    return np.log(xi) + x + np.log1p(-np.exp(-2 * x)) - np.log(2.0) - np.log(pi)


def log_plancherel_density(params: JacobiParams, xi) -> np.ndarray:
    """log |c(xi)|^{-2} for real xi; -inf where the density vanishes."""
    xa = np.abs(np.atleast_1d(np.asarray(xi, dtype=float)))
    rho = params.rho_j
    al, be = params.alpha, params.beta
    out = np.empty_like(xa)
    const = -2 * rho * np.log(2.0) - 2 * loggamma_complex(al + 1.0).real
    g2 = 2 * loggamma_complex((al - be + 1 + 1j * xa) / 2).real
    if rho == 0:
        # |Gamma(i xi/2)|^2 / |Gamma(i xi)|^2 = 4 cosh(pi xi / 2), finite at 0
        out = const + g2 + np.log(4.0) + pi * xa / 2 + np.log1p(np.exp(-pi * xa)) - np.log(2.0)
    else:
        pos = xa > 0
        g1 = 2 * loggamma_complex((rho + 1j * xa) / 2).real
        out[~pos] = -np.inf
        out[pos] = const + g1[pos] + g2[pos] + _log_abs_gamma_imag_inv2(xa[pos])
    return out[0] if np.ndim(xi) == 0 else out.reshape(np.shape(xi))


def plancherel_density(params: JacobiParams, xi):
    """Plancherel density |c(xi)|^{-2}; even, nonnegative, continuous at 0."""
    return np.exp(log_plancherel_density(params, xi))
