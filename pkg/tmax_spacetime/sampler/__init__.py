from .chain import gibbs_sweep, held_parameters, initialize_state, make_tuner, run_chain, run_chains
from .context import GibbsContext
from .joint import log_joint_density, log_likelihood, log_prior
from .tuner import MhTuner, initial_proposal_sd
from .updates import (
    update_gamma,
    update_global_means,
    update_phi_discrete,
    update_psi,
    update_rho_psi,
    update_site_gaussian_fields,
    update_site_latents_mh,
    update_variances,
)
from .workspace import ResidualWorkspace
from ..spatial.gaussian import combine_normals

__all__ = [
    "GibbsContext",
    "MhTuner",
    "ResidualWorkspace",
    "combine_normals",
    "gibbs_sweep",
    "held_parameters",
    "initial_proposal_sd",
    "initialize_state",
    "log_joint_density",
    "log_likelihood",
    "log_prior",
    "make_tuner",
    "run_chain",
    "run_chains",
    "update_gamma",
    "update_global_means",
    "update_phi_discrete",
    "update_psi",
    "update_rho_psi",
    "update_site_gaussian_fields",
    "update_site_latents_mh",
    "update_variances",
]
