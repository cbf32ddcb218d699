"""Information-theoretic primitives shared by every other module.

Everything here works on plain floats or numpy arrays and is pure: no
global state, safe for concurrent use.  Binary-source quantities are in
bits, Gaussian quantities in nats; functions that can do both take a
``base`` argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BITS = "bits"
NATS = "nats"

_LN2 = math.log(2.0)
#: probabilities below this are treated as exact zeros inside log terms
_PROB_TINY = 1e-15
#: slack accepted on domain checks before raising
_DOMAIN_SLACK = 1e-12
#: pmf sums may drift from 1 by this much and get renormalized
_SUM_SLACK = 1e-9


class DomainError(ValueError):
    """An argument violates a documented precondition."""


class OutsideRegionError(DomainError):
    """The query point lies outside the projection region of the source."""


class InfeasibleError(ValueError):
    """A requested construction or coupling does not exist."""


def _base_factor(base):
    if base == BITS:
        return 1.0
    if base == NATS:
        return _LN2
    raise DomainError(f"unknown log base {base!r}; expected 'bits' or 'nats'")


def _clip_unit(t, name):
    t = np.asarray(t, dtype=float)
    if np.any(t < -_DOMAIN_SLACK) or np.any(t > 1.0 + _DOMAIN_SLACK):
        raise DomainError(f"{name} must lie in [0, 1], got {t}")
    return np.clip(t, 0.0, 1.0)


def _scalar_like(x, *args):
    # collapse 0-d results back to python floats when all inputs were scalars
    if all(np.ndim(a) == 0 for a in args):
        return float(x)
    return x


def binary_entropy(t):
    """h(t) = -t log2 t - (1-t) log2(1-t), with 0 log 0 = 0.

    Accepts scalars or arrays; arguments are clamped to [0, 1] after a
    1e-12 slack check.
    """
    tc = _clip_unit(t, "binary_entropy argument")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(tc > _PROB_TINY, -tc * np.log2(np.maximum(tc, _PROB_TINY)), 0.0)
        u = 1.0 - tc
        out = out + np.where(u > _PROB_TINY, -u * np.log2(np.maximum(u, _PROB_TINY)), 0.0)
    return _scalar_like(out, t)


def binary_entropy_inv(y):
    """Inverse of h restricted to [0, 1/2], by bisection.

    Monotonicity of h on [0, 1/2] makes the root unique; the interval is
    narrowed below 1e-13 (at most 200 halvings).
    """
    ya = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    lo = np.zeros_like(ya)
    hi = np.full_like(ya, 0.5)
    for _ in range(200):
        if np.max(hi - lo) < 1e-13:
            break
        mid = 0.5 * (lo + hi)
        below = binary_entropy(mid) < ya
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out = np.where(ya <= 0.0, 0.0, np.where(ya >= 1.0, 0.5, 0.5 * (lo + hi)))
    return _scalar_like(out, y)


def binary_convolve(a, b):
    """Binary convolution a*b = a(1-b) + b(1-a), the crossover of cascaded BSCs."""
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    return _scalar_like(aa * (1.0 - bb) + bb * (1.0 - aa), a, b)


@dataclass(frozen=True)
class Pmf:
    """A finite probability vector.

    Entries must be nonnegative and sum to 1; sums within 1e-9 of 1 are
    renormalized, larger deviations are rejected.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size < 1:
            raise DomainError("pmf needs at least one entry")
        if np.any(p < -_DOMAIN_SLACK):
            raise DomainError(f"pmf entries must be nonnegative, got {p}")
        p = np.maximum(p, 0.0)
        s = p.sum()
        if abs(s - 1.0) > _SUM_SLACK:
            raise DomainError(f"pmf sums to {s}, not 1")
        p = p / s
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


def bernoulli(a):
    """Pmf (P(0), P(1)) = (1-a, a)."""
    return Pmf(np.array([1.0 - a, a]))


@dataclass(frozen=True)
class Joint2x2:
    """A joint distribution on {0,1} x {0,1}, rows indexed by x, columns by y."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (2, 2):
            raise DomainError(f"joint must be 2x2, got shape {m.shape}")
        if np.any(m < -_DOMAIN_SLACK):
            raise DomainError(f"joint entries must be nonnegative, got {m}")
        m = np.maximum(m, 0.0)
        s = m.sum()
        if abs(s - 1.0) > _SUM_SLACK:
            raise DomainError(f"joint sums to {s}, not 1")
        m = m / s
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def marginal_x(self):
        return Pmf(self.m.sum(axis=1))

    def marginal_y(self):
        return Pmf(self.m.sum(axis=0))


@dataclass(frozen=True)
class AuxChannel:
    """Conditional distribution of an auxiliary variable W given (X, Y).

    ``cols`` has shape (4, w_card); row r holds the pmf of W given
    (x, y) = (r >> 1, r & 1).  Cardinalities up to 6 cover the whole
    mutual-information region of a binary pair.
    """

    cols: np.ndarray
    w_card: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.cols, dtype=float)
        if c.ndim != 2 or c.shape[0] != 4:
            raise DomainError(f"channel array must have shape (4, w), got {c.shape}")
        w = c.shape[1]
        if not 1 <= w <= 6:
            raise DomainError(f"w_card must be in [1, 6], got {w}")
        if np.any(c < -_DOMAIN_SLACK):
            raise DomainError("channel probabilities must be nonnegative")
        c = np.maximum(c, 0.0)
        sums = c.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > _SUM_SLACK):
            raise DomainError(f"channel rows must each sum to 1, got sums {sums}")
        c = c / sums[:, None]
        c.setflags(write=False)
        object.__setattr__(self, "cols", c)
        object.__setattr__(self, "w_card", w)


def _flat(d):
    if isinstance(d, Pmf):
        return d.probs
    if isinstance(d, Joint2x2):
        return d.m.reshape(-1)
    return np.asarray(d, dtype=float).reshape(-1)


def kl_divergence(q, p, base=BITS):
    """D(q || p) = sum q_i log(q_i / p_i), with 0 log(0/.) = 0.

    Returns +inf when q is not absolutely continuous w.r.t. p.
    """
    factor = _base_factor(base)
    qv = _flat(q)
    pv = _flat(p)
    if qv.shape != pv.shape:
        raise DomainError(f"shape mismatch: {qv.shape} vs {pv.shape}")
    live = qv > _PROB_TINY
    if np.any(live & (pv <= _PROB_TINY)):
        return math.inf
    val = float(np.sum(qv[live] * np.log2(qv[live] / pv[live])))
    return max(val, 0.0) * factor


def _entropy_bits(v):
    v = v[v > _PROB_TINY]
    return float(-np.sum(v * np.log2(v)))


def mutual_informations(p_xy, ch, base=BITS):
    """The triple (I(X;W), I(Y;W), I(X,Y;W)) induced by a channel P_{W|XY}.

    Builds the joint of (W, X, Y) from ``p_xy`` and ``ch`` and evaluates
    the three mutual informations directly.  gamma >= max(alpha, beta)
    always holds.
    """
    factor = _base_factor(base)
    pxy = p_xy.m.reshape(-1)  # order (0,0),(0,1),(1,0),(1,1)
    q = ch.cols * pxy[:, None]  # (4, w): joint of ((x,y), w)
    qw = q.sum(axis=0)
    qwx = q.reshape(2, 2, -1).sum(axis=1)  # (2, w)
    qwy = q.reshape(2, 2, -1).sum(axis=0)
    px = pxy.reshape(2, 2).sum(axis=1)
    py = pxy.reshape(2, 2).sum(axis=0)
    hw = _entropy_bits(qw)
    alpha = _entropy_bits(px) + hw - _entropy_bits(qwx.reshape(-1))
    beta = _entropy_bits(py) + hw - _entropy_bits(qwy.reshape(-1))
    gamma = _entropy_bits(pxy) + hw - _entropy_bits(q.reshape(-1))
    alpha, beta, gamma = (max(v, 0.0) * factor for v in (alpha, beta, gamma))
    return alpha, beta, gamma
