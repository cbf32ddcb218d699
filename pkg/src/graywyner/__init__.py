"""Gray-Wyner / mutual-information region envelopes for the doubly
symmetric binary source and the bivariate Gaussian source, with the
optimal-transport divergence machinery behind them and brute-force
oracles that verify every closed form numerically."""

from .core import (
    BITS,
    NATS,
    AuxChannel,
    DomainError,
    InfeasibleError,
    Joint2x2,
    OutsideRegionError,
    Pmf,
    bernoulli,
    binary_convolve,
    binary_entropy,
    binary_entropy_inv,
    kl_divergence,
    mutual_informations,
)
from .dsbs import (
    DsbsSource,
    classify_point,
    in_projection_region,
    lossy_gw_rate_dsbs,
    lower_envelope_dsbs,
    projection_boundary,
    rate_distortion_dsbs,
    upper_envelope_dsbs,
    upsilon_star,
)
from .gaussian import (
    GaussianSource,
    classify_point_g,
    hyper_inf_phibar,
    hyper_inf_phiq,
    hyper_sup_psi,
    lossy_gw_rate_gaussian,
    phi_q_gaussian,
    phi_upper_gaussian,
    psi_lower_gaussian,
    rho_hat,
    upsilon_g_star,
)
from .oracle import (
    ConvergenceError,
    OracleConfig,
    OracleResult,
    brute_force_lower,
    construct_w_cascade,
    construct_w_coupled,
    construct_w_gaussian,
    construct_w_side,
    construct_w_upper,
    random_gaussian_triples,
    timesharing_conv_envelope,
)
from .otdiv import (
    TimeSharingMixture,
    a_prime_root,
    conv_phi_lower,
    ot_divergence_2x2,
    phi_lower,
    phi_q_dsbs,
    phi_upper,
    psi_lower_dsbs,
    q_opt_closed_form,
    shadow_measure,
)

__version__ = "0.1.0"
