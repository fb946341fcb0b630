"""Lower-bound exponent curves and zero-error capacity bounds for discrete
classical and classical-quantum channels.

All rates and exponents are in nats; logarithms are natural throughout.
"""

from . import cli, core, divergence, exponents, hypotest, optim, theta
from .core import (
    CQChannel,
    ClassicalChannel,
    ClassicalPair,
    DensityOperator,
    ProbabilityVector,
    classical_embed,
    fractional_power,
    load_channel,
    ns_mapping,
    pure_state_lift,
    save_channel,
    support_projector,
    validate_density,
)
from .divergence import (
    MuProfile,
    bhattacharyya_distance,
    chernoff_distance,
    fidelity_distance,
    mu,
    mu_derivatives,
    mu_profile,
    renyi_divergence,
)
from .exponents import (
    BoundCurve,
    ExponentReport,
    cutoff_rate,
    e0,
    e0_max,
    eex,
    er,
    esp,
    esp_at_rinfty_check,
    r_infinity,
    r_infinity_classical,
    r_rho,
    radius_certificate,
    zero_rate,
)
from .hypotest import (
    JointComposition,
    SgbThresholds,
    codeword_chernoff,
    hoeffding_exponent,
    np_oracle,
    pairwise_bound,
    sgb_thresholds,
)
from .optim import SdpProgram, SimplexResult, minimize_lambda_max, simplex_minimize, solve_sdp
from .theta import (
    ConfusabilityGraph,
    Representation,
    confusability_graph,
    lovasz_theta,
    quadratic_min_and_handle,
    representation_value,
    sp_umbrella_curve,
    theta_rho,
    theta_sp_probe,
    umbrella_curve,
)

__version__ = "0.1.0"
