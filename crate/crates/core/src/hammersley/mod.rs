//! Hammersley's process through its graphical construction over planar
//! Poisson points, the Hopf-Lax solution of its hydrodynamic equation, and
//! the second-order fluctuation experiment.

mod evolve;
mod field;
mod hopf_lax;
mod lis;
mod tightness;

pub use evolve::{evolve, HammersleyState, LabelWindow};
pub use field::{Point, PoissonField, DEFAULT_CELL};
pub use hopf_lax::{
    check_quadratic_minimum, hopf_lax, phi, write_hopf_lax_csv, QuadraticMinimum, Bdj, FnInitial,
    HjInitial, HopfLaxSolution,
};
pub use lis::{gamma, lis_count, Patience};
pub use tightness::{
    second_order_replicate, second_order_summary, write_second_order_csv, HammersleyInitial,
    SecondOrderRow, SecondOrderSummary, TightnessSetup,
};
