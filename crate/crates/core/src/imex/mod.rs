mod shu_osher;
mod stepper;
mod tableau;

pub use shu_osher::{shu_osher_coeffs, AStage, CkStage, ShuOsherCoeffs};
pub use stepper::{PenaltyRefresh, Solver, StageMoments, StepOptions, StepOutput};
pub use tableau::{Builtin, ButcherPair, TableauClass, SINGULAR_TOL};
