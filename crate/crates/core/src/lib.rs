//! Geodesic Lagrangian Monte Carlo on symmetric and Hermitian positive-definite
//! matrices, with the pieces needed for Bayesian covariance and multivariate
//! spectral-density estimation.

pub mod error;
pub mod exec;
pub mod field;
pub mod linalg;
pub mod manifold;
pub mod model;
pub mod oracle;
pub mod random;
pub mod sampler;
pub mod spectral;
pub mod stats;
pub mod trace;

pub use error::{Error, Result};
pub use exec::{stream_rng, Execution};
pub use field::{Field, Scalar};
pub use manifold::{PdMatrix, TangentVelocity};
pub use model::{GaussianSuffStat, LogDensity, PosteriorModel, PriorSpec};
pub use sampler::{run_chain, run_chains, ChainTrace, Init, SamplerConfig};
pub use spectral::{FrequencyBand, SpectralSample, TimeSeriesFrame};
