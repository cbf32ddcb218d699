"""Optimal-transport divergence machinery for binary pairs.

Couplings of two binary marginals have a single free parameter, the
(1,1) cell q, so every minimum-relative-entropy problem here reduces to
a 1-D convex minimization with a known closed-form solution.  The scan
paths (golden-section over q, and direct root bracketing) are kept as
independent verification oracles for those closed forms.

(a, b) always denote the probabilities of symbol 1 of the two marginals;
pmfs are stored (P(0), P(1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BITS,
    DomainError,
    InfeasibleError,
    Joint2x2,
    binary_convolve,
    binary_entropy,
    binary_entropy_inv,
    kl_divergence,
)
from .dsbs import DsbsSource
from .kernels import coupling_kl_bits, q_opt

_TIE = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _coupling_matrix(a, b, q):
    return Joint2x2(np.array([[1.0 + q - a - b, b - q], [a - q, q]]))


def q_opt_closed_form(a, b, p):
    """(1,1) cell of the optimal coupling of Bern(a), Bern(b) against
    DSBS(p), via the cancellation-free conjugate form of the root."""
    if not 0.0 < p < 0.5:
        raise DomainError(f"p must lie strictly inside (0, 1/2), got {p}")
    if not (-_TIE <= a <= 1 + _TIE and -_TIE <= b <= 1 + _TIE):
        raise DomainError(f"marginals must lie in [0, 1], got a={a}, b={b}")
    return q_opt(float(np.clip(a, 0, 1)), float(np.clip(b, 0, 1)), p)


def ot_divergence_2x2(qx, qy, p_xy):
    """Minimum relative entropy to ``p_xy`` over couplings of the binary
    marginals (qx, qy), by golden-section over the free cell q.

    Returns (value in bits, optimal coupling).  ``p_xy`` must be strictly
    positive.
    """
    if np.min(p_xy.m) <= 0.0:
        raise DomainError("reference joint must be strictly positive")
    a = float(qx.probs[1])
    b = float(qy.probs[1])
    lo = max(0.0, a + b - 1.0)
    hi = min(a, b)

    def objective(q):
        m = np.array([[1.0 + q - a - b, b - q], [a - q, q]])
        return kl_divergence(np.maximum(m, 0.0).reshape(-1), p_xy.m.reshape(-1), BITS)

    if hi - lo < 1e-14:
        qstar = lo
    else:
        x1, x2 = lo, hi
        c = x2 - _INVPHI * (x2 - x1)
        d = x1 + _INVPHI * (x2 - x1)
        fc, fd = objective(c), objective(d)
        for _ in range(300):
            if x2 - x1 < 1e-15 * (1.0 + hi - lo):
                break
            if fc < fd:
                x2, d, fd = d, c, fc
                c = x2 - _INVPHI * (x2 - x1)
                fc = objective(c)
            else:
                x1, c, fc = c, d, fd
                d = x1 + _INVPHI * (x2 - x1)
                fd = objective(d)
        qstar = 0.5 * (x1 + x2)
    coupling = _coupling_matrix(a, b, qstar)
    return kl_divergence(coupling, p_xy, BITS), coupling


def _ref_p(ref):
    return ref.p if isinstance(ref, DsbsSource) else float(ref)


def _phi_lower_parts(p, alpha, beta):
    a = binary_entropy_inv(1.0 - alpha)
    b = binary_entropy_inv(1.0 - beta)
    q = q_opt(a, b, p)
    return a, b, q, coupling_kl_bits(a, b, q, p)


def _check_unit(alpha, beta):
    if not (-_TIE <= alpha <= 1 + _TIE and -_TIE <= beta <= 1 + _TIE):
        raise DomainError(f"(alpha, beta) must lie in [0, 1]^2, got {alpha}, {beta}")
    return float(np.clip(alpha, 0, 1)), float(np.clip(beta, 0, 1))


def phi_lower(ref, alpha, beta):
    """Lower envelope of the divergence region of a symmetric binary
    reference: D of the closed-form optimal coupling at marginal
    divergences (alpha, beta)."""
    alpha, beta = _check_unit(alpha, beta)
    return _phi_lower_parts(_ref_p(ref), alpha, beta)[3]


def phi_lower_coupling(ref, alpha, beta):
    """The coupling attaining :func:`phi_lower`."""
    alpha, beta = _check_unit(alpha, beta)
    a, b, q, _ = _phi_lower_parts(_ref_p(ref), alpha, beta)
    return _coupling_matrix(a, b, q)


def _phi_upper_replace(ref, alpha, beta, side):
    p = _ref_p(ref)
    a = binary_entropy_inv(1.0 - alpha)
    b = binary_entropy_inv(1.0 - beta)
    if side == "b":
        b = 1.0 - b
    else:
        a = 1.0 - a
    return coupling_kl_bits(a, b, q_opt(a, b, p), p)


def phi_upper(ref, alpha, beta):
    """Upper envelope of the divergence region: the same coupling formula
    with the beta-marginal reflected to 1 - h^{-1}(1 - beta).  (The
    alpha-side reflection gives the same value; the suite checks that.)"""
    alpha, beta = _check_unit(alpha, beta)
    return _phi_upper_replace(ref, alpha, beta, "b")


def psi_lower_dsbs(ref, alpha, beta):
    """Lower increasing envelope: phi_lower where both marginal
    constraints bind, the slack coordinate otherwise.  Convex."""
    alpha, beta = _check_unit(alpha, beta)
    p = _ref_p(ref)
    a = binary_entropy_inv(1.0 - alpha)
    b = binary_entropy_inv(1.0 - beta)
    if binary_convolve(a, p) < b - _TIE:
        return alpha
    if binary_convolve(b, p) < a - _TIE:
        return beta
    return _phi_lower_parts(p, alpha, beta)[3]


def a_prime_root(ref, ratio):
    """Solve (1 - h(a'*p)) / (1 - h(a')) = ratio for a' in [0, 1/2].

    The left side increases from 1 - h(p) at a' = 0 to (1 - 2p)^2 as
    a' -> 1/2, so the root exists exactly for ratios in that window.
    """
    p = _ref_p(ref)
    lo_val = 1.0 - binary_entropy(p)
    hi_val = (1.0 - 2.0 * p) ** 2

    def r(ap):
        den = 1.0 - binary_entropy(ap)
        return (1.0 - binary_entropy(binary_convolve(ap, p))) / den

    if ratio < lo_val - 1e-11 or ratio >= hi_val - 1e-13:
        raise DomainError(
            f"ratio {ratio} outside the attainable window [{lo_val}, {hi_val})"
        )
    lo, hi = 0.0, 0.5 - 1e-12
    for _ in range(200):
        if hi - lo < 1e-14:
            break
        mid = 0.5 * (lo + hi)
        if r(mid) < ratio:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    if abs(r(root) - ratio) > 1e-11:
        raise DomainError(f"root residual too large for ratio {ratio}")
    return root


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    div_x: float
    div_y: float
    joint: Joint2x2

    def to_dict(self):
        return {
            "weight": self.weight,
            "div_x": self.div_x,
            "div_y": self.div_y,
            "joint": [list(map(float, row)) for row in self.joint.m],
        }


@dataclass(frozen=True)
class TimeSharingMixture:
    """Convex combination of divergence-region points realizing an
    envelope value; at most three components are ever needed."""

    components: tuple

    def to_dict(self):
        return {"components": [c.to_dict() for c in self.components]}

    def value(self, ref):
        p = _ref_p(ref)
        return sum(
            c.weight * kl_divergence(c.joint, DsbsSource(p).joint(), BITS)
            for c in self.components
        )


def _bern_bsc_joint(a, p, flip=False):
    # Bern(a) source through BSC(p); flip=True drives the Y marginal instead
    m = np.array([[(1 - a) * (1 - p), (1 - a) * p], [a * p, a * (1 - p)]])
    if flip:
        m = m.T
    return Joint2x2(m)


def conv_phi_lower(ref, alpha, beta):
    """Lower convex envelope of phi_lower, with the attaining mixture.

    Five cases: where both constraints bind it coincides with phi_lower;
    on the single-sided strips it flattens to the slack coordinate via a
    two-point mixture through the origin; below the chord
    beta < (1 - h(p)) alpha (and its mirror) the optimal mixture pins one
    component at a deterministic marginal.
    """
    alpha, beta = _check_unit(alpha, beta)
    p = _ref_p(ref)
    hp = binary_entropy(p)
    src_joint = DsbsSource(p).joint()
    a = binary_entropy_inv(1.0 - alpha)
    b = binary_entropy_inv(1.0 - beta)

    if binary_convolve(a, p) >= b - _TIE and binary_convolve(b, p) >= a - _TIE:
        q = q_opt(a, b, p)
        val = coupling_kl_bits(a, b, q, p)
        mix = TimeSharingMixture(
            (MixtureComponent(1.0, alpha, beta, _coupling_matrix(a, b, q)),)
        )
        return val, mix

    def one_sided(u, v, yside):
        # slack side: value u on the strip v >= (1 - h(p)) u, pinned-marginal
        # clause below it
        if v >= (1.0 - hp) * u - _TIE:
            ratio = min(v / u, (1.0 - 2.0 * p) ** 2 - 1e-12) if u > 0 else 0.0
            ratio = max(ratio, 1.0 - hp)
            ap = a_prime_root(p, ratio)
            theta = u / (1.0 - binary_entropy(ap))
            comp = _bern_bsc_joint(ap, p, flip=yside)
            su = 1.0 - binary_entropy(ap)
            sv = 1.0 - binary_entropy(binary_convolve(ap, p))
            comps = (
                MixtureComponent(1.0 - theta, 0.0, 0.0, src_joint),
                MixtureComponent(theta, su, sv, comp)
                if not yside
                else MixtureComponent(theta, sv, su, comp),
            )
            return u, TimeSharingMixture(comps)
        m = binary_entropy_inv(1.0 - v / u)
        db = kl_divergence(np.array([1.0 - m, m]), np.array([1.0 - p, p]), BITS)
        val = u + u * db
        point = np.array([[1.0 - m, m], [0.0, 0.0]])
        if yside:
            point = point.T
        comps = (
            MixtureComponent(1.0 - u, 0.0, 0.0, src_joint),
            MixtureComponent(u, 1.0, v / u, Joint2x2(point))
            if not yside
            else MixtureComponent(u, v / u, 1.0, Joint2x2(point)),
        )
        return val, TimeSharingMixture(comps)

    if binary_convolve(a, p) < b - _TIE:
        return one_sided(alpha, beta, yside=False)
    return one_sided(beta, alpha, yside=True)


def psi_lower_region(ref, alpha, beta):
    """Which clause of the lower increasing envelope is active."""
    alpha, beta = _check_unit(alpha, beta)
    p = _ref_p(ref)
    a = binary_entropy_inv(1.0 - alpha)
    b = binary_entropy_inv(1.0 - beta)
    if binary_convolve(a, p) < b - _TIE:
        return "alpha"
    if binary_convolve(b, p) < a - _TIE:
        return "beta"
    return "coupled"


def conv_phi_region(ref, alpha, beta):
    """Which of the five convex-envelope clauses is active."""
    alpha, beta = _check_unit(alpha, beta)
    p = _ref_p(ref)
    hp = binary_entropy(p)
    a = binary_entropy_inv(1.0 - alpha)
    b = binary_entropy_inv(1.0 - beta)
    if binary_convolve(a, p) >= b - _TIE and binary_convolve(b, p) >= a - _TIE:
        return "coupled"
    if binary_convolve(a, p) < b - _TIE:
        return "alpha-flat" if beta >= (1.0 - hp) * alpha - _TIE else "alpha-pinned"
    return "beta-flat" if alpha >= (1.0 - hp) * beta - _TIE else "beta-pinned"


def phi_q_dsbs(ref, q, alpha):
    """min over beta of phi_lower(alpha, beta) - beta/q for q < 0, by
    golden-section on [0, 1].  Increasing and strictly concave in alpha."""
    if not q < 0.0:
        raise DomainError(f"q must be negative, got {q}")
    alpha, _ = _check_unit(alpha, 0.0)
    p = _ref_p(ref)

    def objective(beta):
        return _phi_lower_parts(p, alpha, beta)[3] - beta / q

    x1, x2 = 0.0, 1.0
    c = x2 - _INVPHI * (x2 - x1)
    d = x1 + _INVPHI * (x2 - x1)
    fc, fd = objective(c), objective(d)
    for _ in range(300):
        if x2 - x1 < 1e-15:
            break
        if fc < fd:
            x2, d, fd = d, c, fc
            c = x2 - _INVPHI * (x2 - x1)
            fc = objective(c)
        else:
            x1, c, fc = c, d, fd
            d = x1 + _INVPHI * (x2 - x1)
            fd = objective(d)
    return max(min(fc, fd, objective(0.0)), 0.0)


def shadow_measure(p, a, b):
    """Reference flip probability p-hat making the relaxed divergence
    bound tight: the root of q_opt(a, b, .) = (a + b - p) / 2.

    Defined for a <= b with a*p > b and a*b > p (the interior of the
    coupled region); the root is bracketed by ((b-a)/(1-2a), 1/2) and
    found by Illinois false position.
    """
    if not 0.0 < p < 0.5:
        raise DomainError(f"p must lie strictly inside (0, 1/2), got {p}")
    if not (0.0 <= a <= b <= 0.5):
        raise DomainError(f"need 0 <= a <= b <= 1/2, got a={a}, b={b}")
    if binary_convolve(a, p) <= b + _TIE or binary_convolve(a, b) <= p + _TIE:
        raise InfeasibleError(
            f"(a, b) = ({a}, {b}) is not interior to the coupled region at p = {p}"
        )
    target = 0.5 * (a + b - p)
    lo = (b - a) / (1.0 - 2.0 * a) + 1e-9
    hi = 0.5 - 1e-9

    def f(ph):
        return q_opt(a, b, ph) - target

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        raise InfeasibleError(
            f"bracket endpoints do not straddle the target at (a, b) = ({a}, {b})"
        )
    # Illinois variant: halve the retained endpoint's value to force
    # alternation, then a few plain bisection polish steps
    for _ in range(200):
        dm = fhi - flo
        mid = hi - fhi * (hi - lo) / dm if dm != 0.0 else 0.5 * (lo + hi)
        if not lo < mid < hi:
            mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= 1e-13 or hi - lo < 1e-15:
            return mid
        if flo * fm < 0.0:
            hi, fhi = mid, fm
            flo *= 0.5
        else:
            lo, flo = mid, fm
            fhi *= 0.5
    if abs(f(0.5 * (lo + hi))) > 1e-11:
        raise InfeasibleError("false-position did not reach the residual target")
    return 0.5 * (lo + hi)
