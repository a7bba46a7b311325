//! Asymptotic-preserving semi-Lagrangian discontinuous Galerkin solver for the
//! 1D2V Boltzmann equation with Maxwell molecules.
//!
//! Transport is handled by an exact-in-time SLDG shift, collisions by a fast
//! Fourier-spectral method, and the stiff relaxation by BGK penalization inside
//! an IMEX Runge-Kutta scheme whose implicit stages are solved in closed form
//! from predicted moments.

pub mod analysis;
pub mod collision;
pub mod error;
pub mod imex;
pub mod limiter;
pub mod mesh;
pub mod transport;
pub mod velocity;

pub use error::{Result, SldgError};
