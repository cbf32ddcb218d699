"""Closed-form rate and envelope formulas for the doubly symmetric binary
source (uniform X, Y = X through a BSC), all in bits.

The plane of constraint pairs (alpha, beta) splits into regions where a
different formula is active:

  D1  both constraints bind jointly (coupled-channel regime)
  D2  the pair constraint binds (near-lossless corner)
  D3  the beta constraint is slack (alpha side dominates)
  D4  mirror of D3

For the exact lower/upper envelopes D3 and D4 refine further (D3p, D3pp,
D4p, D4pp) and a part of the square is unreachable (OUTSIDE).  Ties on
region boundaries within 1e-12 resolve toward D1; all formulas are
continuous across boundaries, which makes the choice immaterial (and is
checked by the test suite).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DomainError,
    Joint2x2,
    OutsideRegionError,
    _scalar_like,
    binary_convolve,
    binary_entropy,
    binary_entropy_inv,
)

_TIE = 1e-12

OUTSIDE, D1, D2, D3, D4, D3P, D3PP, D4P, D4PP = range(9)
REGION_LABELS = ("OUTSIDE", "D1", "D2", "D3", "D4", "D3p", "D3pp", "D4p", "D4pp")


@dataclass(frozen=True)
class DsbsSource:
    """Doubly symmetric binary source with disagree probability p in (0, 1/2)."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 0.5:
            raise DomainError(f"p must lie strictly inside (0, 1/2), got {self.p}")

    def joint(self):
        p = self.p
        return Joint2x2(np.array([[(1 - p) / 2, p / 2], [p / 2, (1 - p) / 2]]))

    def entropy_xy(self):
        return 1.0 + binary_entropy(self.p)

    def mi_xy(self):
        return 1.0 - binary_entropy(self.p)


def _check_unit_box(alpha, beta):
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if (
        np.any(a < -_TIE)
        or np.any(a > 1 + _TIE)
        or np.any(b < -_TIE)
        or np.any(b > 1 + _TIE)
    ):
        raise DomainError(f"(alpha, beta) must lie in [0, 1]^2, got {alpha}, {beta}")
    return np.clip(a, 0.0, 1.0), np.clip(b, 0.0, 1.0)


def _coarse_codes(p, a, b):
    ab = binary_convolve(a, b)
    ap = binary_convolve(a, p)
    bp = binary_convolve(b, p)
    is2 = p - ab > _TIE
    is3 = ~is2 & (b - ap > _TIE)
    is4 = ~is2 & ~is3 & (a - bp > _TIE)
    return np.where(is2, D2, np.where(is3, D3, np.where(is4, D4, D1)))


def _refine_codes(p, alpha, beta, codes):
    """Split D3/D4 into the prime / double-prime / OUTSIDE sub-regions.

    The boundary tests are done on m = h^{-1}(1 - beta/alpha): the
    sub-region conditions are m <= p (D3p), alpha*m <= p (D3pp), else
    outside the projection region.  This is the exact inverse form of the
    published boundary curves and stays well defined for every alpha > 0.
    """
    out = np.array(codes, copy=True)
    for lo_code, pr, dpr, (u, v) in ((D3, D3P, D3PP, (alpha, beta)), (D4, D4P, D4PP, (beta, alpha))):
        mask = codes == lo_code
        if not np.any(mask):
            continue
        uu = np.where(mask, u, 1.0)
        ratio = np.clip(np.where(mask, v, 0.0) / np.maximum(uu, 1e-300), 0.0, 1.0)
        m = binary_entropy_inv(1.0 - ratio)
        prime = m <= p + _TIE
        dprime = ~prime & (uu * m <= p + _TIE)
        sub = np.where(prime, pr, np.where(dprime, dpr, OUTSIDE))
        out = np.where(mask, sub, out)
    return out


def classify_point(src, alpha, beta, fine=False):
    """Region label of (alpha, beta); with fine=True, D3/D4 refine to
    D3p/D3pp/D4p/D4pp or OUTSIDE (not in the projection region)."""
    alpha_a, beta_a = _check_unit_box(alpha, beta)
    a = binary_entropy_inv(1.0 - alpha_a)
    b = binary_entropy_inv(1.0 - beta_a)
    codes = _coarse_codes(src.p, a, b)
    if fine:
        codes = _refine_codes(src.p, alpha_a, beta_a, codes)
    if np.ndim(alpha) == 0 and np.ndim(beta) == 0:
        return REGION_LABELS[int(codes)]
    return np.take(np.array(REGION_LABELS), codes)


def projection_boundary(src, alpha):
    """Least beta admissible at the given alpha (0 for alpha <= 2p, then
    the curve alpha * (1 - h(p/alpha)))."""
    p = src.p
    a = np.asarray(alpha, dtype=float)
    safe = np.maximum(a, 2.0 * p)
    curve = a * (1.0 - binary_entropy(p / safe))
    return _scalar_like(np.where(a > 2.0 * p, curve, 0.0), alpha)


def in_projection_region(src, alpha, beta, slack=_TIE):
    """Membership in the reachable set of constraint pairs, with additive
    slack on the boundary curves."""
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    ok = (b >= projection_boundary(src, a) - slack) & (
        a >= projection_boundary(src, b) - slack
    )
    return _scalar_like(ok, alpha, beta) if np.ndim(ok) else bool(ok)


def _h_clipped(t):
    return binary_entropy(np.clip(t, 0.0, 1.0))


def _clause_values(p, a, b):
    hp = binary_entropy(p)
    v1 = (
        1.0
        - (1.0 - p) * _h_clipped((a + b - p) / (2.0 * (1.0 - p)))
        - p * _h_clipped((a - b + p) / (2.0 * p))
    )
    v2 = 1.0 + hp - binary_entropy(a) - binary_entropy(b)
    v3 = 1.0 - binary_entropy(a)
    v4 = 1.0 - binary_entropy(b)
    return v1, v2, v3, v4


def rate_distortion_dsbs(src, d1, d2):
    """Rate-distortion function of the pair under Hamming distortion.

    Three cases on (a, b) = (min, max) of the distortions: the coupled
    formula when a*p >= b and a*b >= p, the sum-rate formula when
    a*b <= p, and 1 - h(a) when a*p <= b.
    """
    p = src.p
    x = np.asarray(d1, dtype=float)
    y = np.asarray(d2, dtype=float)
    if np.any(x < -_TIE) or np.any(y < -_TIE) or np.any(x > 0.5 + _TIE) or np.any(y > 0.5 + _TIE):
        raise DomainError(f"distortions must lie in [0, 1/2], got {d1}, {d2}")
    x = np.clip(x, 0.0, 0.5)
    y = np.clip(y, 0.0, 0.5)
    a = np.minimum(x, y)
    b = np.maximum(x, y)
    v1, v2, v3, _ = _clause_values(p, a, b)
    c1 = (binary_convolve(a, p) >= b - _TIE) & (binary_convolve(a, b) >= p - _TIE)
    c2 = ~c1 & (binary_convolve(a, b) < p)
    out = np.maximum(np.where(c1, v1, np.where(c2, v2, v3)), 0.0)
    return _scalar_like(out, d1, d2)


def upsilon_star(src, alpha, beta):
    """Lower increasing envelope of the mutual-information region.

    Equals rate_distortion_dsbs at (h^{-1}(1-alpha), h^{-1}(1-beta));
    the identity is exercised by the acceptance suite.
    """
    alpha_a, beta_a = _check_unit_box(alpha, beta)
    a = binary_entropy_inv(1.0 - alpha_a)
    b = binary_entropy_inv(1.0 - beta_a)
    codes = _coarse_codes(src.p, a, b)
    v1, v2, v3, v4 = _clause_values(src.p, a, b)
    out = np.maximum(
        np.where(codes == D2, v2, np.where(codes == D3, v3, np.where(codes == D4, v4, v1))),
        0.0,
    )
    return _scalar_like(out, alpha, beta)


def _lower_env_arrays(src, alpha_a, beta_a):
    """Exact lower envelope values and fine region codes; NaN where the
    point is outside the projection region."""
    p = src.p
    hp = binary_entropy(p)
    a = binary_entropy_inv(1.0 - alpha_a)
    b = binary_entropy_inv(1.0 - beta_a)
    codes = _refine_codes(p, alpha_a, beta_a, _coarse_codes(p, a, b))
    v1, v2, _, _ = _clause_values(p, a, b)

    def dprime_value(u, v):
        # h(p) + v - (1-u) h((p - u m) / (1-u)) with m = h^{-1}(1 - v/u)
        uu = np.clip(u, 1e-12, 1.0)
        m = binary_entropy_inv(1.0 - np.clip(v / uu, 0.0, 1.0))
        den = np.maximum(1.0 - u, 1e-12)
        return hp + v - (1.0 - u) * _h_clipped((p - u * m) / den)

    vals = np.where(
        codes == D2,
        v2,
        np.where(
            codes == D3P,
            alpha_a,
            np.where(
                codes == D4P,
                beta_a,
                np.where(
                    codes == D3PP,
                    dprime_value(alpha_a, beta_a),
                    np.where(codes == D4PP, dprime_value(beta_a, alpha_a), v1),
                ),
            ),
        ),
    )
    vals = np.where(codes == OUTSIDE, np.nan, np.maximum(vals, 0.0))
    return vals, codes


def lower_envelope_dsbs(src, alpha, beta):
    """Exact lower envelope of the mutual-information region at a
    reachable (alpha, beta); raises OutsideRegionError otherwise."""
    alpha_a, beta_a = _check_unit_box(alpha, beta)
    vals, codes = _lower_env_arrays(src, alpha_a, beta_a)
    if np.any(codes == OUTSIDE):
        raise OutsideRegionError(
            f"(alpha, beta) = ({alpha}, {beta}) is outside the projection region"
        )
    return _scalar_like(vals, alpha, beta)


def upper_envelope_dsbs(src, alpha, beta):
    """Exact upper envelope h(p) + min(alpha, beta) on the projection
    region; raises OutsideRegionError outside it."""
    alpha_a, beta_a = _check_unit_box(alpha, beta)
    if not np.all(in_projection_region(src, alpha_a, beta_a)):
        raise OutsideRegionError(
            f"(alpha, beta) = ({alpha}, {beta}) is outside the projection region"
        )
    out = binary_entropy(src.p) + np.minimum(alpha_a, beta_a)
    return _scalar_like(out, alpha, beta)


def lossy_gw_rate_dsbs(src, r1, r2, d1, d2):
    """Least common rate of the lossy two-receiver system at private
    rates (r1, r2) and Hamming distortions (d1, d2)."""
    r1a = np.asarray(r1, dtype=float)
    r2a = np.asarray(r2, dtype=float)
    if np.any(r1a < -_TIE) or np.any(r2a < -_TIE):
        raise DomainError(f"rates must be nonnegative, got {r1}, {r2}")
    d1a = np.asarray(d1, dtype=float)
    d2a = np.asarray(d2, dtype=float)
    if np.any(d1a < -_TIE) or np.any(d2a < -_TIE) or np.any(d1a > 0.5 + _TIE) or np.any(d2a > 0.5 + _TIE):
        raise DomainError(f"distortions must lie in [0, 1/2], got {d1}, {d2}")
    alpha = np.clip(1.0 - binary_entropy(np.clip(d1a, 0, 0.5)) - r1a, 0.0, 1.0)
    beta = np.clip(1.0 - binary_entropy(np.clip(d2a, 0, 0.5)) - r2a, 0.0, 1.0)
    out = upsilon_star(src, alpha, beta)
    return _scalar_like(np.asarray(out), r1, r2, d1, d2)
