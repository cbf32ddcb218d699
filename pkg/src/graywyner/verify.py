"""Self-verification suite: every closed form against its independent
oracle, every region invariant as a sampling test.

Each check returns a :class:`Check` carrying the worst observed
deviation, normalized by its tolerance when a check aggregates several
quantities with different tolerances (the note then lists each raw
deviation).  Reports contain no timestamps, so a fixed seed reproduces
the same bytes.  ``quick=True`` shrinks grids and sample counts to a
sub-minute run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cli_io, dsbs, gaussian, oracle, otdiv
from .core import (
    BITS,
    bernoulli,
    binary_convolve,
    binary_entropy,
    binary_entropy_inv,
    kl_divergence,
    mutual_informations,
)
from .kernels import mi_triples_batch


@dataclass
class Check:
    name: str
    dev: float
    tol: float
    note: str = ""

    @property
    def passed(self):
        return bool(self.dev <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        note = f"  [{self.note}]" if self.note else ""
        return f"[{status}] {self.name:<22s} max dev {self.dev:.3e}  (tol {self.tol:.1e}){note}"


def _random_channels(rng, n, w=6):
    chs = rng.gamma(1.0, size=(n, 4, w))
    chs /= chs.sum(axis=2, keepdims=True)
    return chs


# ---------------------------------------------------------------- criterion 1


def check_identity(quick=False, seed=0):
    """Lower increasing envelope equals the rate-distortion function under
    the h-inverse change of variables, on a grid, for several p."""
    ps = (0.05, 0.1) if quick else (0.05, 0.1, 0.25, 0.4)
    steps = 20 if quick else 50
    grid = np.linspace(0.0, 1.0, steps)
    aa, bb = np.meshgrid(grid, grid, indexing="ij")
    dev = 0.0
    for p in ps:
        src = dsbs.DsbsSource(p)
        ups = dsbs.upsilon_star(src, aa, bb)
        rd = dsbs.rate_distortion_dsbs(
            src, binary_entropy_inv(1.0 - aa), binary_entropy_inv(1.0 - bb)
        )
        dev = max(dev, float(np.max(np.abs(ups - rd))))
    return Check("1-identity", dev, 1e-12)


# ---------------------------------------------------------------- criterion 2


def check_achievability(quick=False, seed=0):
    """The explicit constructions reproduce their envelope clauses through
    mutual_informations, on random parameter points."""
    rng = np.random.default_rng(seed)
    n_per = 20 if quick else 50
    dev = 0.0
    for p in (0.05, 0.25):
        src = dsbs.DsbsSource(p)
        joint = src.joint()
        hp = binary_entropy(p)
        count = 0
        while count < n_per:  # cascade needs a*b <= p
            a = rng.uniform(0.0, p)
            b = rng.uniform(0.0, 0.5)
            if binary_convolve(a, b) > p:
                continue
            count += 1
            tr = mutual_informations(joint, oracle.construct_w_cascade(p, a, b), BITS)
            want = (
                1 - binary_entropy(a),
                1 - binary_entropy(b),
                1 + hp - binary_entropy(a) - binary_entropy(b),
            )
            dev = max(dev, max(abs(x - y) for x, y in zip(tr, want)))
        for a in rng.uniform(0.0, 0.5, n_per):
            tr = mutual_informations(joint, oracle.construct_w_side(p, a), BITS)
            want = (
                1 - binary_entropy(a),
                1 - binary_entropy(binary_convolve(a, p)),
                1 - binary_entropy(a),
            )
            dev = max(dev, max(abs(x - y) for x, y in zip(tr, want)))
        count = 0
        while count < n_per:  # coupled pair needs |a-b| <= p <= a+b
            a = rng.uniform(0.0, 0.5)
            b = rng.uniform(max(0.0, a - p), min(0.5, a + p))
            if a + b < p:
                continue
            count += 1
            tr = mutual_informations(joint, oracle.construct_w_coupled(p, a, b), BITS)
            want = (
                1 - binary_entropy(a),
                1 - binary_entropy(b),
                1
                - (1 - p) * binary_entropy((a + b - p) / (2 * (1 - p)))
                - p * binary_entropy(np.clip((a - b + p) / (2 * p), 0, 1)),
            )
            dev = max(dev, max(abs(x - y) for x, y in zip(tr, want)))
        for a in rng.uniform(0.0, 0.5, n_per):
            tr = mutual_informations(joint, oracle.construct_w_upper(p, a), BITS)
            al = 1 - binary_entropy(a)
            dev = max(dev, max(abs(tr[0] - al), abs(tr[1] - al), abs(tr[2] - al - hp)))
    return Check("2-achievability", dev, 1e-9)


# ---------------------------------------------------------------- criterion 3


def check_soundness_sampling(quick=False, seed=0):
    """Random channels never beat the lower envelope, never exceed the
    upper one, and never leave the projection region."""
    rng = np.random.default_rng(seed)
    n = 10_000 if quick else 100_000
    dev = 0.0
    for p in (0.05, 0.25):
        src = dsbs.DsbsSource(p)
        pxy = np.ascontiguousarray(src.joint().m.reshape(-1))
        triples = mi_triples_batch(_random_channels(rng, n), pxy)
        ah, bh, gh = triples[:, 0], triples[:, 1], triples[:, 2]
        lower_gap = dsbs.upsilon_star(src, ah, bh) - gh
        upper_gap = gh - (binary_entropy(p) + np.minimum(ah, bh))
        proj_gap = np.maximum(
            dsbs.projection_boundary(src, ah) - bh,
            dsbs.projection_boundary(src, bh) - ah,
        )
        dev = max(
            dev,
            float(np.max(lower_gap)),
            float(np.max(upper_gap)),
            float(np.max(proj_gap)),
        )
    return Check("3-soundness-sampling", dev, 1e-9)


# ---------------------------------------------------------------- criterion 4


def check_oracle_attainment(quick=False, seed=0):
    """The multistart search reaches the closed-form envelope on a grid
    (within 5e-3) and never dips below it at its own achieved point
    (within 1e-9)."""
    src = dsbs.DsbsSource(0.05)
    if quick:
        grid = np.linspace(0.0, 1.0, 3)
        cfg = oracle.OracleConfig(restarts=16, max_iters=800, seed=seed)
    else:
        grid = np.linspace(0.0, 1.0, 9)
        cfg = oracle.OracleConfig(seed=seed)
    attain = 0.0
    sound = 0.0
    for alpha in grid:
        for beta in grid:
            res = oracle.brute_force_lower(src, alpha, beta, cfg)
            ah, bh, gh = res.achieved
            attain = max(attain, gh - dsbs.upsilon_star(src, alpha, beta))
            sound = max(sound, dsbs.upsilon_star(src, ah, bh) - gh)
    dev = max(attain / 5e-3, sound / 1e-9, 0.0)
    return Check(
        "4-oracle-attainment",
        dev,
        1.0,
        note=f"attain {attain:.2e}/5e-3 sound {sound:.2e}/1e-9",
    )


# ---------------------------------------------------------------- criterion 5


def check_ot_machinery(quick=False, seed=0):
    """Closed-form coupling cell vs the 1-D scan; reference-measure root
    residual; and the divergence-difference identity."""
    rng = np.random.default_rng(seed)
    steps = 8 if quick else 20
    scan_dev = 0.0
    for p in (0.05, 0.25) if quick else (0.05, 0.1, 0.25):
        src = dsbs.DsbsSource(p)
        for a in np.linspace(0.0, 0.5, steps):
            for b in np.linspace(0.0, 0.5, steps):
                _, coupling = otdiv.ot_divergence_2x2(bernoulli(a), bernoulli(b), src.joint())
                scan_dev = max(
                    scan_dev,
                    abs(float(coupling.m[1, 1]) - otdiv.q_opt_closed_form(a, b, p)),
                )
    p = 0.05
    src = dsbs.DsbsSource(p)
    n_pts = 10 if quick else 50
    resid_dev = 0.0
    ident_dev = 0.0
    count = 0
    while count < n_pts:
        a = rng.uniform(0.08, 0.5)
        b = rng.uniform(a, min(0.5, binary_convolve(a, p)))
        if binary_convolve(a, p) <= b + 1e-6 or binary_convolve(a, b) <= p + 1e-6:
            continue
        count += 1
        phat = otdiv.shadow_measure(p, a, b)
        target = 0.5 * (a + b - p)
        resid_dev = max(resid_dev, abs(otdiv.q_opt_closed_form(a, b, phat) - target))
        q_joint = np.array([[1 + target - a - b, b - target], [a - target, target]])
        ref = dsbs.DsbsSource(phat).joint()
        lhs = kl_divergence(q_joint.reshape(-1), ref.m.reshape(-1), BITS) - kl_divergence(
            src.joint(), ref, BITS
        )
        ups = dsbs.upsilon_star(src, 1 - binary_entropy(a), 1 - binary_entropy(b))
        ident_dev = max(ident_dev, abs(lhs - ups))
    dev = max(scan_dev / 1e-7, resid_dev / 1e-10, ident_dev / 1e-8)
    return Check(
        "5-ot-machinery",
        dev,
        1.0,
        note=f"scan {scan_dev:.2e}/1e-7 resid {resid_dev:.2e}/1e-10 ident {ident_dev:.2e}/1e-8",
    )


# ---------------------------------------------------------------- criterion 6


def check_convex_envelope(quick=False, seed=0):
    """Five-case convex envelope vs the 3-point time-sharing oracle."""
    src = dsbs.DsbsSource(0.05)
    steps = 5 if quick else 15
    cfg = (
        oracle.OracleConfig(restarts=16, max_iters=600, seed=seed)
        if quick
        else oracle.OracleConfig(seed=seed)
    )
    dev = 0.0
    for alpha in np.linspace(0.0, 1.0, steps):
        for beta in np.linspace(0.0, 1.0, steps):
            closed, _ = otdiv.conv_phi_lower(src, alpha, beta)
            ts = oracle.timesharing_conv_envelope(src, alpha, beta, cfg)
            dev = max(dev, abs(closed - ts))
    return Check("6-convex-envelope", dev, 5e-4)


# ---------------------------------------------------------------- criterion 7


def check_gaussian(quick=False, seed=0):
    """Gaussian continuity and monotonicity, the hypercontractivity route
    vs the closed forms, and the jointly Gaussian sampling sandwich."""
    rng = np.random.default_rng(seed)
    cont_dev = 0.0
    delta = 1e-10
    for rho in (0.3, 0.6, 0.9):
        src = gaussian.GaussianSource(rho)
        for alpha in np.linspace(0.05, 2.5, 12):
            ca2 = -np.expm1(-2 * alpha)
            beta = -0.5 * np.log1p(-(rho**2) * ca2)  # border where beta stops binding
            cont_dev = max(
                cont_dev,
                abs(
                    gaussian.upsilon_g_star(src, alpha, beta + delta)
                    - gaussian.upsilon_g_star(src, alpha, beta - delta)
                ),
            )
            if ca2 > rho**2:  # border against the independent-auxiliary regime
                beta = -0.5 * np.log1p(-(rho**2) / ca2)
                cont_dev = max(
                    cont_dev,
                    abs(
                        gaussian.upsilon_g_star(src, alpha, beta + delta)
                        - gaussian.upsilon_g_star(src, alpha, beta - delta)
                    ),
                    abs(
                        gaussian.upsilon_g_star(src, beta + delta, alpha)
                        - gaussian.upsilon_g_star(src, beta - delta, alpha)
                    ),
                )
    steps = 20 if quick else 50
    grid = np.linspace(0.0, 2.5, steps)
    mono_dev = 0.0
    for rho in (0.3, 0.9):
        src = gaussian.GaussianSource(rho)
        aa, bb = np.meshgrid(grid, grid, indexing="ij")
        vals = gaussian.upsilon_g_star(src, aa, bb)
        mono_dev = max(
            mono_dev,
            float(np.max(-np.diff(vals, axis=0))),
            float(np.max(-np.diff(vals, axis=1))),
        )
    hsteps = 10 if quick else 20
    hyper_dev = 0.0
    hgrid = np.linspace(0.0, 2.0, hsteps)
    for rho in (0.3, 0.6, 0.9):
        src = gaussian.GaussianSource(rho)
        for alpha in hgrid:
            for beta in hgrid:
                hyper_dev = max(
                    hyper_dev,
                    abs(
                        gaussian.hyper_sup_psi(src, alpha, beta)
                        - gaussian.psi_lower_gaussian(src, alpha, beta)
                    ),
                    abs(
                        gaussian.hyper_inf_phibar(src, alpha, beta)
                        - gaussian.phi_upper_gaussian(src, alpha, beta)
                    ),
                )
            for q in (-0.5, -1.0, -2.0):
                hyper_dev = max(
                    hyper_dev,
                    abs(
                        gaussian.hyper_inf_phiq(src, q, alpha)
                        - gaussian.phi_q_gaussian(src, q, alpha)
                    ),
                )
    n = 10_000 if quick else 100_000
    sandwich_dev = 0.0
    for rho in (0.3, 0.9):
        src = gaussian.GaussianSource(rho)
        triples = oracle.random_gaussian_triples(rho, n, rng)
        gap = gaussian.upsilon_g_star(src, triples[:, 0], triples[:, 1]) - triples[:, 2]
        sandwich_dev = max(sandwich_dev, float(np.max(gap)))
    dev = max(cont_dev / 1e-8, mono_dev / 1e-12, hyper_dev / 1e-8, sandwich_dev / 1e-9)
    return Check(
        "7-gaussian",
        dev,
        1.0,
        note=(
            f"cont {cont_dev:.2e}/1e-8 mono {mono_dev:.2e}/1e-12 "
            f"hyper {hyper_dev:.2e}/1e-8 sandwich {sandwich_dev:.2e}/1e-9"
        ),
    )


# ---------------------------------------------------------------- criterion 8


def check_figures(quick=False, seed=0):
    """Spot values of the emitted surfaces; the upper and the exact lower
    envelope coincide on the single-sided boundary curves."""
    src = dsbs.DsbsSource(0.05)
    spot_dev = 0.0
    rows = list(cli_io.surface_rows("dsbs", 0.05, "increasing", steps=21))
    corner = [r for r in rows if r[0] == 1.0 and r[1] == 1.0]
    spot_dev = max(spot_dev, abs(corner[0][2] - 1.2863969571159561))
    labels = {r[3] for r in rows}
    if not {"D1", "D2", "D3", "D4"} <= labels:
        spot_dev = max(spot_dev, 1.0)
    grows = list(cli_io.surface_rows("gaussian", 0.9, "increasing", steps=21, maxval=1.0))
    spot = [r for r in grows if abs(r[0] - 0.5) < 1e-12 and r[1] == 0.0]
    spot_dev = max(spot_dev, abs(spot[0][2] - 0.5))
    urows = list(cli_io.surface_rows("gaussian", 0.9, "upper", steps=5, maxval=1.0))
    if not all(r[2] == np.inf for r in urows):
        spot_dev = max(spot_dev, 1.0)
    p = src.p
    curve_dev = 0.0
    for alpha in np.linspace(2 * p + 0.02, 1.0, 40):
        beta = dsbs.projection_boundary(src, alpha)
        curve_dev = max(
            curve_dev,
            abs(
                dsbs.upper_envelope_dsbs(src, alpha, beta)
                - dsbs.lower_envelope_dsbs(src, alpha, beta)
            ),
            abs(
                dsbs.upper_envelope_dsbs(src, beta, alpha)
                - dsbs.lower_envelope_dsbs(src, beta, alpha)
            ),
        )
    dev = max(spot_dev / 1e-6, curve_dev / 1e-9)
    return Check(
        "8-figures",
        dev,
        1.0,
        note=f"spots {spot_dev:.2e}/1e-6 curve gap {curve_dev:.2e}/1e-9",
    )


# ---------------------------------------------------------------- criterion 9


def check_determinism(quick=False, seed=0):
    """Identical seeds give bitwise identical sampling and oracle output."""
    rng1 = np.random.default_rng(seed)
    rng2 = np.random.default_rng(seed)
    src = dsbs.DsbsSource(0.05)
    pxy = np.ascontiguousarray(src.joint().m.reshape(-1))
    t1 = mi_triples_batch(_random_channels(rng1, 2000), pxy)
    t2 = mi_triples_batch(_random_channels(rng2, 2000), pxy)
    dev = 0.0 if np.array_equal(t1, t2) else 1.0
    cfg = oracle.OracleConfig(restarts=4, w_card=4, max_iters=300, seed=seed)
    r1 = oracle.brute_force_lower(src, 0.5, 0.4, cfg)
    r2 = oracle.brute_force_lower(src, 0.5, 0.4, cfg)
    if r1.achieved != r2.achieved or not np.array_equal(
        r1.best_channel.cols, r2.best_channel.cols
    ):
        dev = 1.0
    return Check("9-determinism", dev, 0.0)


ALL_CHECKS = (
    check_identity,
    check_achievability,
    check_soundness_sampling,
    check_oracle_attainment,
    check_ot_machinery,
    check_convex_envelope,
    check_gaussian,
    check_figures,
    check_determinism,
)


def run_checks(quick=False, seed=0, names=None):
    checks = []
    for fn in ALL_CHECKS:
        if names is not None and not any(n in fn.__name__ for n in names):
            continue
        checks.append(fn(quick=quick, seed=seed))
    return checks


def format_report(checks):
    lines = [c.line() for c in checks]
    n_fail = sum(not c.passed for c in checks)
    if n_fail == 0:
        lines.append(f"{len(checks)}/{len(checks)} checks passed")
    else:
        lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed, {n_fail} FAILED")
    return "\n".join(lines)
