//! Numerical verification of local smoothing and Morawetz-type identities
//! for the free Schrödinger equation `u_t = iΔu` on packet data.

pub mod error;
pub mod functionals;
pub mod harness;
pub mod limits;
pub mod model;
pub mod propagator;
pub mod quad;
pub mod spectral;
pub mod weights;

pub use error::{LabError, Result};
pub use model::{GridField, LimitEstimate, QuadraturePlan, VerificationReport, WavePacket, WavePacketSum};
pub use propagator::{dispersive_approx, evolve_analytic, Evaluator};
pub use weights::{make_psi_eps, make_psi_k, RadialWeight};
