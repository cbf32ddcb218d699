"""Closed forms for the standardized bivariate Gaussian source, in nats.

The constraint plane splits into G1 (coupled regime), G2 (independent
auxiliary suffices), and G3/G4 (one constraint slack).  Regime tests are
done on e^{-alpha}, e^{-beta} and c = sqrt(1 - e^{-2a}) directly, never
through trigonometric round trips.  The upper envelope of the region is
unbounded for this source, so upper queries return +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, _scalar_like

_TIE = 1e-12

G1, G2, G3, G4 = 1, 2, 3, 4
GAUSSIAN_REGION_LABELS = ("", "G1", "G2", "G3", "G4")


@dataclass(frozen=True)
class GaussianSource:
    """Unit-variance jointly Gaussian pair with correlation rho in (0, 1)."""

    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie strictly inside (0, 1), got {self.rho}")

    def mi_xy(self):
        return -0.5 * math.log1p(-self.rho**2)


def _check_nonneg(alpha, beta):
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if np.any(a < -_TIE) or np.any(b < -_TIE):
        raise DomainError(f"(alpha, beta) must be nonnegative, got {alpha}, {beta}")
    return np.maximum(a, 0.0), np.maximum(b, 0.0)


def _cos(a):
    # sqrt(1 - e^{-2a}); expm1 keeps precision near a = 0
    return np.sqrt(-np.expm1(-2.0 * a))


def rho_hat(src, alpha, beta):
    """Residual correlation (rho - c_a c_b) / e^{-(alpha+beta)}.

    Lands in [0, 1) exactly on G1; callers gate other regions through the
    classifier.
    """
    a, b = _check_nonneg(alpha, beta)
    out = (src.rho - _cos(a) * _cos(b)) * np.exp(a + b)
    return _scalar_like(out, alpha, beta)


def _codes(rho, a, b):
    ca = _cos(a)
    cb = _cos(b)
    is3 = rho * ca - cb > _TIE
    is4 = ~is3 & (rho * cb - ca > _TIE)
    is2 = ~is3 & ~is4 & (ca * cb - rho > _TIE)
    return np.where(is3, G3, np.where(is4, G4, np.where(is2, G2, G1)))


def classify_point_g(src, alpha, beta):
    """Region label among G1..G4; boundary ties resolve to G1, then G2."""
    a, b = _check_nonneg(alpha, beta)
    codes = _codes(src.rho, a, b)
    if np.ndim(alpha) == 0 and np.ndim(beta) == 0:
        return GAUSSIAN_REGION_LABELS[int(codes)]
    return np.take(np.array(GAUSSIAN_REGION_LABELS), codes)


def upsilon_g_star(src, alpha, beta):
    """Lower (and lower increasing) envelope of the Gaussian
    mutual-information region, in nats."""
    a, b = _check_nonneg(alpha, beta)
    rho = src.rho
    codes = _codes(rho, a, b)
    rh = (rho - _cos(a) * _cos(b)) * np.exp(a + b)
    # 1 - rh^2 can only graze 0 at the G1 extreme; floor it to keep the
    # log finite (continuity across that sliver is tested).
    one_minus = np.maximum(1.0 - np.clip(rh, -1.0, 1.0) ** 2, 1e-14)
    v1 = a + b - 0.5 * np.log(one_minus / (1.0 - rho**2))
    v2 = a + b + 0.5 * math.log1p(-rho**2)
    out = np.where(codes == G1, v1, np.where(codes == G2, v2, np.where(codes == G3, a, b)))
    return _scalar_like(np.maximum(out, 0.0), alpha, beta)


def lossy_gw_rate_gaussian(src, r1, r2, d1, d2):
    """Least common rate of the lossy system under quadratic distortion."""
    r1a = np.asarray(r1, dtype=float)
    r2a = np.asarray(r2, dtype=float)
    if np.any(r1a < -_TIE) or np.any(r2a < -_TIE):
        raise DomainError(f"rates must be nonnegative, got {r1}, {r2}")
    d1a = np.asarray(d1, dtype=float)
    d2a = np.asarray(d2, dtype=float)
    if np.any(d1a <= 0.0) or np.any(d2a <= 0.0):
        raise DomainError(f"distortions must be positive, got {d1}, {d2}")
    alpha = np.maximum(0.5 * np.log(1.0 / d1a) - r1a, 0.0)
    beta = np.maximum(0.5 * np.log(1.0 / d2a) - r2a, 0.0)
    out = upsilon_g_star(src, alpha, beta)
    return _scalar_like(np.asarray(out), r1, r2, d1, d2)


def psi_lower_gaussian(src, alpha, beta):
    """Lower increasing envelope of the Gaussian divergence region:
    (alpha + beta - 2 rho sqrt(alpha beta)) / (1 - rho^2) in the coupled
    band rho^2 alpha <= beta <= alpha / rho^2, the slack coordinate
    otherwise.  Convex."""
    a, b = _check_nonneg(alpha, beta)
    r2 = src.rho**2
    coupled = (a + b - 2.0 * src.rho * np.sqrt(a * b)) / (1.0 - r2)
    out = np.where(b < r2 * a, a, np.where(a < r2 * b, b, coupled))
    return _scalar_like(np.maximum(out, 0.0), alpha, beta)


def phi_upper_gaussian(src, alpha, beta):
    """Upper envelope of the Gaussian divergence region
    (alpha + beta + 2 rho sqrt(alpha beta)) / (1 - rho^2).  Concave."""
    a, b = _check_nonneg(alpha, beta)
    out = (a + b + 2.0 * src.rho * np.sqrt(a * b)) / (1.0 - src.rho**2)
    return _scalar_like(out, alpha, beta)


def phi_q_gaussian(src, q, alpha):
    """Linear slice (1-q) alpha / (1 - q - rho^2) of the divergence
    region; defined for q < 0 only."""
    if not q < 0.0:
        raise DomainError(f"q must be negative, got {q}")
    a = np.asarray(alpha, dtype=float)
    if np.any(a < -_TIE):
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    out = (1.0 - q) * np.maximum(a, 0.0) / (1.0 - q - src.rho**2)
    return _scalar_like(out, alpha)


# ----------------------------------------------------------------------
# the same envelopes through the hypercontractivity boundary
# ----------------------------------------------------------------------
# For this source the admissible norm exponents are exactly
# {(p, q): (p-1)(q-1) >= rho^2}; optimizing alpha/p + beta/q over the
# boundary reproduces the closed forms above.  These optimizations are an
# independent computation path used for verification.

_GOLDEN_ITERS = 400
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, lo, hi, iters=_GOLDEN_ITERS):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < 1e-15 * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b), min(fc, fd)


def hyper_sup_psi(src, alpha, beta):
    """sup of alpha/p + beta/q over the boundary (p-1)(q-1) = rho^2 with
    p, q >= 1; parameterized as p = 1 + rho e^s to keep the search
    bracket symmetric."""
    a, b = _check_nonneg(alpha, beta)
    if np.ndim(a) or np.ndim(b):
        raise DomainError("hyper_sup_psi is scalar-only")
    rho = src.rho

    def negobj(s):
        p = 1.0 + rho * math.exp(s)
        q = 1.0 + rho * math.exp(-s)
        return -(float(a) / p + float(b) / q)

    _, fmin = _golden_min(negobj, -40.0, 40.0)
    # a monotone objective pushes the optimum to a bracket edge; take the
    # better of the interior search and both limits
    return max(-fmin, float(a), float(b))


def hyper_inf_phibar(src, alpha, beta):
    """inf of alpha/p + beta/q over the boundary (1-p)(1-q) = rho^2 with
    0 < p, q <= 1."""
    a, b = _check_nonneg(alpha, beta)
    if np.ndim(a) or np.ndim(b):
        raise DomainError("hyper_inf_phibar is scalar-only")
    rho = src.rho
    smax = math.log(1.0 / rho)

    def obj(s):
        p = 1.0 - rho * math.exp(s)
        q = 1.0 - rho * math.exp(-s)
        va = float(a) / p if a > 0.0 else 0.0
        vb = float(b) / q if b > 0.0 else 0.0
        return va + vb

    eps = 1e-12
    _, fmin = _golden_min(obj, -smax + eps, smax - eps)
    return fmin


def hyper_inf_phiq(src, q, alpha):
    """inf of alpha/p over p in (0, 1] with (p-1)(q-1) >= rho^2, q < 0."""
    if not q < 0.0:
        raise DomainError(f"q must be negative, got {q}")
    a = np.asarray(alpha, dtype=float)
    if np.ndim(a):
        raise DomainError("hyper_inf_phiq is scalar-only")
    if a < -_TIE:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    a = max(float(a), 0.0)
    pmax = 1.0 - src.rho**2 / (1.0 - q)

    def obj(p):
        return a / p if a > 0.0 else 0.0

    _, fmin = _golden_min(obj, 1e-12, pmax)
    return min(fmin, obj(pmax))
