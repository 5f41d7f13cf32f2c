//! Compressed sensing with generative priors and sparse deviations.
//!
//! Signals are modeled as `G(z) + nu`: a point in the range of a generator
//! network plus a deviation that is sparse in some orthonormal basis. The
//! crate provides the pieces needed to sense and recover such signals:
//!
//! - [`sensing`]: random measurement ensembles and noisy acquisition.
//! - [`basis`]: identity, DCT and Haar change-of-basis matrices.
//! - [`genmodel`]: feed-forward generators with exact vector-Jacobian products.
//! - [`vae`]: a variational autoencoder whose decoder serves as the generator.
//! - [`recover`]: LASSO, generator-only and sparse-deviation recovery, plus an
//!   exhaustive decoder for tiny problems.
//! - [`verify`]: empirical RIP / REC / S-REC checks and recovery-bound checks.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, which is what the CLI and experiments use.

mod bytes;

pub mod basis;
pub mod error;
pub mod genmodel;
pub mod linalg;
pub mod optim;
pub mod recover;
pub mod rng;
pub mod scalar;
pub mod sensing;
pub mod vae;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{clip_to_box, norm, soft_threshold, Norm};
pub use rng::SeededRng;
pub use scalar::Real;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Ensemble = sensing::SensingEnsemble<f64>;
pub type Basis = basis::OrthonormalBasis<f64>;
pub type Generator = genmodel::GeneratorNetwork<f64>;
pub type Vae = vae::VaeModel<f64>;
pub type Recovery = recover::RecoveryResult<f64>;
pub type SolverSettings = recover::SolverConfig<f64>;
