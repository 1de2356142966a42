//! Smoothed plug-in density estimators.

pub mod kde;
pub mod kernel;
pub mod wavelet;

pub use kde::{DensityMode, SmoothedDensity};
pub use kernel::{bandwidth, hermite_kernel, KernelSpec};
pub use wavelet::{haar_wavelet_fit, WaveletDensity};
