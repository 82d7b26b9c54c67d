//! Generalized (dilation) homogeneity for control systems under state
//! quantization.
//!
//! * [`lindil`]: linear monotone dilations `e^{sG}` and their norm bounds.
//! * [`homgeo`]: canonical homogeneous norm, `Φ`, homogeneous vector-space
//!   operations and the discrete fundamental domain.
//! * [`quantizer`]: logarithmic radial, spherical and composite homogeneous
//!   quantizers.
//! * [`homcheck`]: sampled checks of homogeneity and sector bounds.
//! * [`sim`]: RK4 closed-loop simulation with exact or quantized feedback.

// `!(x >= 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expm;
pub mod homcheck;
pub mod homgeo;
pub mod lindil;
#[cfg(test)]
mod proptests;
pub mod quantizer;
pub mod sim;

pub use homcheck::{SampleSpec, SectorReport, SectorSpec};
pub use homgeo::{FundamentalDomain, GeoError, HomNormConfig, HomSpace};
pub use lindil::{Dilation, DilationError, DiscreteDilation};
pub use quantizer::{
    hom_quantize, log_quantize, HomQuantizer, QuantizerError, QuantizerParams, RadialLevel,
    SphericalCoords,
};
pub use sim::{HomFeedback, HomPlant, SimError, Trajectory};

pub use nalgebra::{DMatrix, DVector};
