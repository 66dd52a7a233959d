//! Seed-driven data scaling with a Gaussian copula and star-schema splitting.

pub mod cholesky;
pub mod copula;
pub mod normalize;
pub mod seed;

pub use cholesky::{cholesky, cholesky_regularized, Matrix};
pub use copula::{default_sample_size, fit, normal_cdf, normal_quantile, CopulaModel, Marginal};
pub use normalize::{denormalize, normalize, DimensionSpec, StarSchemaSpec, StarTables};
