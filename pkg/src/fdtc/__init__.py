"""Full-duplex MIMO ad-hoc network: Monte-Carlo simulation and analytic
outage/transmission-capacity bounds."""

from .beamforming import (
    BeamformerSet,
    CapabilityError,
    Strategy,
    build_baseline,
    build_beamformers,
    build_hd,
    build_proposed_fd,
    cancellable_pairs,
    interferer_transmit_vectors,
)
from .bounds import (
    BoundResult,
    MomentTable,
    OmegaResult,
    compute_omega,
    compute_omega_hd,
    dominating_radius,
    effective_gain_mean_bound,
    moment_psi_power_oracle,
    op_lb_exact,
    sample_effective_gain,
    tc_upper_bound_fd,
    tc_upper_bound_hd,
)
from .channel import (
    AntennaConfig,
    ChannelSet,
    DegenerateMatrixError,
    PartnerChannels,
    complex_normal,
    dominant_singular_triple,
    draw_rayleigh,
    draw_si_channel,
    null_space,
)
from .geometry import (
    DeploymentParams,
    NetworkRealization,
    nearest_pairs,
    nth_nearest_distance_cdf,
    realization_to_json,
    sample_network,
)
from .numerics import (
    ConvergenceError,
    DensitySolve,
    SolverConfig,
    gamma_fn,
    initial_density_guess,
    lower_incomplete_gamma,
    newton_raphson_density,
    op_lb_approx,
    upper_incomplete_gamma,
)
from .simulator import (
    SimulatedTcResult,
    SystemParams,
    TrialOutcome,
    estimate_outage,
    run_trial,
    simulated_tc,
    trial_sinr,
)

__version__ = "0.1.0"
