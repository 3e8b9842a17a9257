//! Detection and filtering of signal components in white noise from the zeros
//! of the Cauchy wavelet transform.
//!
//! The continuous wavelet transform with the Cauchy wavelet of order `alpha`
//! turns white noise into (a multiple of) a hyperbolic Gaussian analytic
//! function on the upper half-plane. Its zeros form a point process whose
//! first intensity and pair correlation are known in closed form. Comparing
//! local estimates of both against those references yields masks that keep
//! the time-scale regions where the zero pattern does not look like noise.
//!
//! Pipeline:
//!
//! 1. [`cwt::forward_cwt`] on a geometric [`grid::TimeScaleGrid`],
//! 2. [`zeros::extract_zeros`] (strict local minima of the modulus),
//! 3. [`stats`] closed forms and local estimators over a [`index::ZeroIndex`],
//! 4. [`filtering`] statistics, calibration and masks,
//! 5. [`cwt::inverse_cwt`] of the masked scalogram.

pub mod convergence;
pub mod cwt;
pub mod error;
pub mod filtering;
pub mod geometry;
pub mod grid;
pub mod index;
pub mod pipeline;
pub mod quadrature;
pub mod signal;
pub mod stats;
pub mod tables;
pub mod wavelet;
pub mod zeros;

pub use cwt::{forward_cwt, inverse_cwt, CwtOptions, Scalogram};
pub use error::{Error, Result};
pub use geometry::{ph_distance, PHDisk, Rect, RegionOfInterest, UHPPoint};
pub use grid::TimeScaleGrid;
pub use index::ZeroIndex;
pub use signal::{generate_white_noise, refine_noise, NoiseKind, SignalBuffer};
pub use wavelet::WaveletParams;
pub use zeros::{extract_zeros, Neighborhood, ZeroSet};
