//! Finite field Fourier analysis on the paraboloid
//! P = {xi in F_q^d : xi_d = xi_1^2 + ... + xi_{d-1}^2}.
//!
//! Physical space (F_q^d, dm) carries the counting measure, frequency space
//! (F_q^d, d xi) the normalized counting measure, and P the normalized surface
//! measure d sigma. Every function type carries the measure it lives on.

pub mod energy;
pub mod error;
pub mod exponent;
pub mod field;
pub mod machinery;
pub mod norms;
pub mod paraboloid;
pub mod report;
pub mod transform;

pub use energy::{additive_energy, energy_bound_report, EnergyMethod, EnergyReport, PointSubset};
pub use error::{Error, Result};
pub use exponent::Exponent;
pub use field::FieldContext;
pub use norms::{ExponentProfile, NormEstimate, SearchParams};
pub use paraboloid::{IsotropicSubspace, ParaboloidGeometry, SurfaceFunction};
pub use report::CheckReport;
pub use transform::{GridFunction, Measure};
