//! Finite-n kernels of the Cauchy chain matrix model, the limiting Meijer-G
//! multi-level kernels, and the associated spectral curves.

pub mod error;
pub mod field_kernels;
pub mod finite_chain;
pub mod gammakit;
pub mod linalg;
pub mod meijer;
pub mod parametrix;
pub mod quad;
pub mod spectral;

pub use error::{NumError, Result};
pub use gammakit::{Cx, PrecisionContext};
