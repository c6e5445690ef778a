pub mod error;
pub mod spectral;
pub mod torus;
pub mod weights;
pub mod analytic;
pub mod czd;
pub mod report;
pub mod random;
pub mod oracle;
pub mod ksplit;
pub mod lemma;

pub use error::{Error, Result};
pub use num_complex::Complex64;
