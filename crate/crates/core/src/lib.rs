//! Energy-change statistics of open quantum systems under three measurement
//! protocols: end-point measurement (EPM), two-point measurement (TPM) and the
//! measure-last-log scheme (MLL).
//!
//! Typical flow: build a [`LindbladModel`](dynamics::LindbladModel), propagate
//! it to a [`Superoperator`](dynamics::Superoperator), pick a
//! [`DensityMatrix`](operator::DensityMatrix), then evaluate a
//! [`JointDistribution`](protocols::JointDistribution) and its statistics.

pub mod dynamics;
pub mod error;
pub mod models;
pub mod operator;
pub mod protocols;
pub mod sampling;
pub mod statistics;

pub use error::{Error, Result};
pub use operator::{ComplexMatrix, DensityMatrix, EnergyBasis, C64};
pub use protocols::Protocol;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
