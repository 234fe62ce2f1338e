//! Mixing matrices: construction, validation, the design problem for `u`,
//! and the proximal weights that go with a plan.

mod plan;
mod sdp;
mod weights;

pub use plan::{construct_w, validate_w, MixingPlan, WCheck, VALIDATE_TOL};
pub use sdp::{design_matrix, sdp_objective, solve_mixing_sdp, Pin, SdpSolution, D_MAX_MARGIN};
pub use weights::{build_p, certify_p_condition, BlockWeight, Certificate, ProxWeights, CERTIFY_MAX_DIM};
