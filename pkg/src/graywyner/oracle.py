"""Independent verification oracles.

Two kinds of evidence against the closed forms:

* exact auxiliary-channel constructions whose mutual-information triples
  are known in closed form (cascade, side channel, coupled BSC pair,
  side channel joined with the noise bit, and the jointly Gaussian
  family), and

* multistart penalized Nelder-Mead searches over all channels P_{W|XY}
  (and over 3-point time-sharing mixtures for the divergence envelopes),
  run in an unconstrained softmax reparameterization.

Half of the search restarts are random, half start from the exact
constructions (plus perturbations), so attainment is guaranteed while
the optimizer still gets exercised; searches are deterministic for a
fixed config.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    BITS,
    AuxChannel,
    DomainError,
    InfeasibleError,
    Joint2x2,
    OutsideRegionError,
    binary_convolve,
    binary_entropy_inv,
    mutual_informations,
)
from .dsbs import DsbsSource, in_projection_region
from .kernels import (
    MODE_EQUALITY,
    MODE_INCREASING,
    MODE_MAXIMIZE,
    oracle_restart,
    timeshare_restart,
)
from .otdiv import conv_phi_lower

_MODES = {
    "increasing": MODE_INCREASING,
    "equality": MODE_EQUALITY,
    "maximize": MODE_MAXIMIZE,
}


class ConvergenceError(RuntimeError):
    """No restart produced a candidate within the violation budget."""


@dataclass(frozen=True)
class OracleConfig:
    restarts: int = 64
    w_card: int = 6
    penalty_schedule: tuple = (10.0, 100.0, 1000.0, 10000.0)
    max_iters: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise DomainError("restarts must be >= 1")
        if not 1 <= self.w_card <= 6:
            raise DomainError("w_card must lie in [1, 6]")
        if any(m <= 0 for m in self.penalty_schedule) or list(
            self.penalty_schedule
        ) != sorted(self.penalty_schedule):
            raise DomainError("penalty_schedule must be increasing and positive")


@dataclass(frozen=True)
class OracleResult:
    best_channel: AuxChannel
    achieved: tuple  # (alpha, beta, gamma) recomputed from best_channel
    constraint_violation: float
    converged: bool


# ----------------------------------------------------------------------
# exact constructions
# ----------------------------------------------------------------------


def _bsc(a):
    return np.array([[1.0 - a, a], [a, 1.0 - a]])


def _check_half(x, name):
    if not -1e-12 <= x <= 0.5 + 1e-12:
        raise DomainError(f"{name} must lie in [0, 1/2], got {x}")
    return float(np.clip(x, 0.0, 0.5))


def construct_w_cascade(p, a, b):
    """W = (U, V) from the chain X -> BSC(a) -> U -> BSC(c) -> V -> BSC(b) -> Y
    with c chosen so the end-to-end crossover is p.  Needs a*b <= p.

    Achieves (1-h(a), 1-h(b), 1+h(p)-h(a)-h(b)).
    """
    a = _check_half(a, "a")
    b = _check_half(b, "b")
    ab = binary_convolve(a, b)
    if ab > p + 1e-12:
        raise InfeasibleError(f"cascade needs a*b <= p, got a*b = {ab} > p = {p}")
    c = (p - ab) / (1.0 - 2.0 * ab)
    ta, tc, tb = _bsc(a), _bsc(c), _bsc(b)
    pxy = DsbsSource(p).joint().m
    cols = np.empty((4, 4))
    for x in range(2):
        for y in range(2):
            for u in range(2):
                for v in range(2):
                    cols[2 * x + y, 2 * u + v] = (
                        0.5 * ta[x, u] * tc[u, v] * tb[v, y] / pxy[x, y]
                    )
    return AuxChannel(cols)


def construct_w_side(p, a, attach="x"):
    """Uniform W observed through BSC(a) as X (or Y when attach='y');
    achieves (1-h(a), 1-h(a*p), 1-h(a)) on the X side."""
    a = _check_half(a, "a")
    cols = np.empty((4, 2))
    for x in range(2):
        for y in range(2):
            z = x if attach == "x" else y
            cols[2 * x + y, z] = 1.0 - a
            cols[2 * x + y, 1 - z] = a
    return AuxChannel(cols)


def coupled_conditionals(p, a, b):
    """The two conditionals P_{XY|W=w} of the coupled-BSC construction."""
    m0 = np.array(
        [
            [1.0 - (a + b + p) / 2.0, (-a + b + p) / 2.0],
            [(a - b + p) / 2.0, (a + b - p) / 2.0],
        ]
    )
    m1 = m0[::-1, ::-1].copy()
    return m0, m1


def construct_w_coupled(p, a, b):
    """Equiprobable W with P_{XY|W=w} an explicit coupling of BSC(a) and
    BSC(b); exists exactly when all four conditional entries are
    probabilities, and achieves the jointly-coupled envelope value."""
    a = _check_half(a, "a")
    b = _check_half(b, "b")
    m0, m1 = coupled_conditionals(p, a, b)
    if np.min(m0) < -1e-12:
        raise InfeasibleError(
            f"coupled conditionals would need negative mass at (a, b) = ({a}, {b})"
        )
    m0 = np.clip(m0, 0.0, 1.0)
    m1 = np.clip(m1, 0.0, 1.0)
    pxy = DsbsSource(p).joint().m
    mix = 0.5 * m0 + 0.5 * m1
    if np.max(np.abs(mix - pxy)) > 1e-12:
        raise InfeasibleError("coupled conditionals do not average to the source")
    cols = np.empty((4, 2))
    for x in range(2):
        for y in range(2):
            cols[2 * x + y, 0] = 0.5 * m0[x, y] / pxy[x, y]
            cols[2 * x + y, 1] = 0.5 * m1[x, y] / pxy[x, y]
    return AuxChannel(cols)


def construct_w_upper(p, a):
    """W = (W', Z) with X = W' xor Bern(a) and Z the X->Y noise bit;
    achieves (1-h(a), 1-h(a), 1-h(a)+h(p)), witnessing the upper
    envelope on the diagonal."""
    a = _check_half(a, "a")
    cols = np.zeros((4, 4))
    for x in range(2):
        for y in range(2):
            z = x ^ y
            for wp in range(2):
                cols[2 * x + y, 2 * wp + z] = 1.0 - a if wp == x else a
    return AuxChannel(cols)


def construct_w_gaussian(rho, n1, n2):
    """Jointly Gaussian W mixing an independent standard pair into (X, Y)
    with residual variances (n1, n2); returns the achieved triple in
    nats.  Infeasible when the implied residual correlation leaves [0, 1).
    """
    if not (0.0 < n1 <= 1.0 and 0.0 < n2 <= 1.0):
        raise DomainError(f"residual variances must lie in (0, 1], got {n1}, {n2}")
    rh = (rho - np.sqrt((1.0 - n1) * (1.0 - n2))) / np.sqrt(n1 * n2)
    if not -1e-12 <= rh < 1.0:
        raise InfeasibleError(f"residual correlation {rh} outside [0, 1)")
    rh = max(rh, 0.0)
    alpha = 0.5 * np.log(1.0 / n1)
    beta = 0.5 * np.log(1.0 / n2)
    gamma = 0.5 * np.log((1.0 - rho**2) / (n1 * n2 * (1.0 - rh**2)))
    return float(alpha), float(beta), float(gamma)


def random_gaussian_triples(rho, n, rng):
    """Triples of random jointly Gaussian W = aX + bY + cZ, in nats.

    Rows too close to a degenerate correlation are dropped (measure-zero
    event under the sampling law), so fewer than n rows may come back.
    """
    a, b, c = rng.standard_normal((3, n))
    s2 = a * a + b * b + 2.0 * rho * a * b + c * c
    keep = s2 > 1e-12
    s = np.sqrt(s2[keep])
    rwx = (a[keep] + rho * b[keep]) / s
    rwy = (rho * a[keep] + b[keep]) / s
    det = 1.0 + 2.0 * rho * rwx * rwy - rho**2 - rwx**2 - rwy**2
    keep2 = (np.abs(rwx) < 1.0 - 1e-9) & (np.abs(rwy) < 1.0 - 1e-9) & (det > 1e-300)
    rwx, rwy, det = rwx[keep2], rwy[keep2], det[keep2]
    out = np.empty((rwx.size, 3))
    out[:, 0] = -0.5 * np.log1p(-rwx**2)
    out[:, 1] = -0.5 * np.log1p(-rwy**2)
    out[:, 2] = 0.5 * np.log((1.0 - rho**2) / det)
    return out


# ----------------------------------------------------------------------
# multistart brute force over auxiliary channels
# ----------------------------------------------------------------------


def _softmax_rows(x, w):
    m = w - 1
    z = np.concatenate([x.reshape(4, m), np.zeros((4, 1))], axis=1)
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _logits_from_probs(cols, w):
    probs = np.full((4, w), 1e-18)
    probs[:, : cols.shape[1]] = np.maximum(cols, 1e-18)
    z = np.log(probs)
    return (z[:, : w - 1] - z[:, w - 1:]).reshape(-1)


def _seed_channels(src, alpha, beta, w, mode):
    p = src.p
    a = binary_entropy_inv(1.0 - alpha)
    b = binary_entropy_inv(1.0 - beta)
    seeds = [np.full((4, w), 1.0 / w)]
    builders = [
        lambda: construct_w_coupled(p, a, b),
        lambda: construct_w_side(p, a, attach="x"),
        lambda: construct_w_side(p, b, attach="y"),
    ]
    if w >= 4:
        builders.append(lambda: construct_w_cascade(p, a, b))
        if mode == "maximize":
            builders.insert(0, lambda: construct_w_upper(p, a))
            builders.insert(1, lambda: construct_w_upper(p, b))
    for build in builders:
        try:
            seeds.append(build().cols)
        except (InfeasibleError, DomainError):
            pass
    return seeds


def brute_force_lower(src, alpha, beta, cfg=None, mode="increasing"):
    """Multistart penalized search for the extremal I(X,Y;W) subject to
    I(X;W), I(Y;W) constraints (at-least, equal, or equal-and-maximize).

    Returns the best candidate whose constraint violation is at most
    1e-6; raises ConvergenceError when no restart even reaches 1e-4.
    Deterministic for a fixed config.
    """
    if cfg is None:
        cfg = OracleConfig()
    if mode not in _MODES:
        raise DomainError(f"unknown mode {mode!r}")
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise DomainError(f"(alpha, beta) must lie in [0, 1]^2, got {alpha}, {beta}")
    if mode != "increasing" and not in_projection_region(src, alpha, beta, slack=1e-9):
        raise OutsideRegionError(
            f"equality-constrained search needs (alpha, beta) in the projection "
            f"region, got ({alpha}, {beta})"
        )
    mode_int = _MODES[mode]
    w = cfg.w_card
    dim = 4 * (w - 1)
    pxy = np.ascontiguousarray(src.joint().m.reshape(-1))
    mus = np.asarray(cfg.penalty_schedule, dtype=float)
    rng = np.random.default_rng(cfg.seed)

    seeds = _seed_channels(src, alpha, beta, w, mode)
    n_random = cfg.restarts // 2
    n_seeded = cfg.restarts - n_random
    starts = []
    for i in range(n_seeded):
        base = _logits_from_probs(seeds[i % len(seeds)], w)
        noise = rng.standard_normal(dim)
        scale = 0.0 if i < len(seeds) else 0.05
        starts.append((base + scale * noise, 0.05))
    for _ in range(n_random):
        starts.append((1.5 * rng.standard_normal(dim), 0.4))

    sign = -1.0 if mode_int == MODE_MAXIMIZE else 1.0
    best = None  # (sign*gamma, restart index, x)
    fallback = None  # least-violating candidate overall
    for idx, (x0, step) in enumerate(starts):
        found, g, x, mv, mvg, mvx = oracle_restart(
            pxy, w, float(alpha), float(beta), mode_int,
            mus, np.ascontiguousarray(x0), cfg.max_iters, step, 1e-6,
        )
        if found and (best is None or sign * g < best[0]):
            best = (sign * g, idx, x.copy())
        if fallback is None or mv < fallback[0]:
            fallback = (mv, idx, mvx.copy())

    converged = best is not None
    if not converged:
        if fallback[0] > 1e-4:
            raise ConvergenceError(
                f"no restart reached violation <= 1e-4 at ({alpha}, {beta}); "
                f"best violation {fallback[0]:.3g}"
            )
        chosen = fallback[2]
    else:
        chosen = best[2]

    channel = AuxChannel(_softmax_rows(chosen, w))
    ah, bh, gh = mutual_informations(src.joint(), channel, BITS)
    if mode_int == MODE_INCREASING:
        violation = max(0.0, alpha - ah) + max(0.0, beta - bh)
    else:
        violation = abs(alpha - ah) + abs(beta - bh)
    return OracleResult(channel, (ah, bh, gh), violation, converged)


# ----------------------------------------------------------------------
# 3-point time-sharing oracle for the divergence envelopes
# ----------------------------------------------------------------------


def _logit(t):
    t = min(max(t, 1e-17), 1.0 - 1e-16)
    return float(np.log(t / (1.0 - t)))


def _timeshare_seed(points, weights):
    # pad to 3 components; third weight logit is pinned to 0
    pts = list(points) + [points[-1]] * (3 - len(points))
    wts = list(weights) + [0.0] * (3 - len(weights))
    z = np.log(np.maximum(np.asarray(wts), 1e-18))
    x = np.empty(8)
    x[0] = z[0] - z[2]
    x[1] = z[1] - z[2]
    for i in range(3):
        x[2 + i] = _logit(pts[i][0])
        x[5 + i] = _logit(pts[i][1])
    return x


def timesharing_conv_envelope(ref, alpha, beta, cfg=None, constraint="exact"):
    """Best 3-component time-sharing of divergence-region points.

    constraint='exact' pins the mixed marginal divergences to (alpha,
    beta) and computes the lower convex envelope of the region's lower
    boundary; constraint='at_least' relaxes them to inequalities, which
    collapses to the (already convex) lower increasing envelope.
    """
    if cfg is None:
        cfg = OracleConfig()
    if constraint not in ("exact", "at_least"):
        raise DomainError(f"unknown constraint mode {constraint!r}")
    if not (0.0 <= alpha <= 1.0 and 0.0 <= beta <= 1.0):
        raise DomainError(f"(alpha, beta) must lie in [0, 1]^2, got {alpha}, {beta}")
    p = ref.p if isinstance(ref, DsbsSource) else float(ref)
    exact = constraint == "exact"
    mus = np.asarray(cfg.penalty_schedule, dtype=float)
    rng = np.random.default_rng(cfg.seed)

    seeds = [_timeshare_seed([(alpha, beta)], [1.0])]
    _, mix = conv_phi_lower(p, alpha, beta)
    pts = [(c.div_x, c.div_y) for c in mix.components]
    wts = [c.weight for c in mix.components]
    seeds.append(_timeshare_seed(pts, wts))

    n_random = cfg.restarts // 2
    n_seeded = cfg.restarts - n_random
    starts = []
    for i in range(n_seeded):
        base = seeds[i % len(seeds)]
        noise = rng.standard_normal(8)
        scale = 0.0 if i < len(seeds) else 0.05
        starts.append((base + scale * noise, 0.05))
    for _ in range(n_random):
        starts.append((2.0 * rng.standard_normal(8), 0.5))

    best = None
    fallback = None
    for x0, step in starts:
        found, val, x, mv, mvv = timeshare_restart(
            p, float(alpha), float(beta), exact,
            mus, np.ascontiguousarray(x0), cfg.max_iters, step, 1e-6,
        )
        if found and (best is None or val < best):
            best = val
        if fallback is None or mv < fallback[0]:
            fallback = (mv, mvv)
    if best is None:
        if fallback[0] > 1e-4:
            raise ConvergenceError(
                f"time-sharing search found no feasible mixture at ({alpha}, {beta})"
            )
        best = fallback[1]
    return float(best)
