//! Exact simulation of the independent-random-walk growth model and of
//! Hammersley's process, together with the closed-form limit laws for the
//! particle current across characteristics and the statistics needed to
//! compare the two.

pub mod error;
pub mod experiment;
pub mod hammersley;
pub mod kernel;
pub mod limits;
pub mod numeric;
pub mod profiles;
pub mod rng;
pub mod stats;
pub mod walks;

pub use error::{Error, Result};
pub use kernel::JumpKernel;
pub use limits::CovKernel;
pub use profiles::{InitialCondition, OccupationLaw, Profile, SiteRange};
pub use rng::RngStream;
