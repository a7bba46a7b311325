mod direct;
mod penalty;
mod spectral;

pub use direct::{q_direct, DirectOptions, KERNEL};
pub use penalty::{g_p, penalty_beta, q_p, PenaltyField};
pub use spectral::{build_collision_plan, q_spectral, CollisionPlan, Workspace};
