//! Colour-accuracy and image-quality measures for evaluating underwater
//! image enhancement, with the colour-checker patch protocol and a batch
//! comparison-report driver.
//!
//! The numeric kernels are generic over the scalar type through
//! [`Real`](real::Real); the aliases below pin the crate's default precision
//! to `f64`.

pub mod checker;
pub mod color;
pub mod config;
pub mod diff;
pub mod error;
mod gradient;
pub mod image;
pub mod iqa;
pub mod nr;
pub mod real;
pub mod report;

pub use error::{Error, Result};
pub use real::Real;

/// Default working precision.
pub type Scalar = f64;

/// CIELab colour at the default precision.
pub type LabColor = color::Lab<Scalar>;
/// Cylindrical CIELab at the default precision.
pub type LchColor = color::Lch<Scalar>;
/// Angular colour-reproduction error at the default precision.
pub type AngularError = diff::AngularError<Scalar>;
pub type Ciede2000Params = diff::Ciede2000Params<Scalar>;
pub type Ciede2000Breakdown = diff::Ciede2000Breakdown<Scalar>;
pub type UciqeBreakdown = nr::UciqeBreakdown<Scalar>;
pub type UiqmBreakdown = nr::UiqmBreakdown<Scalar>;
pub type CcfBreakdown = nr::CcfBreakdown<Scalar>;
pub type TrimmedStats = nr::TrimmedStats<Scalar>;
pub type QuBreakdown = iqa::QuBreakdown<Scalar>;
pub type Psnr = iqa::Psnr<Scalar>;
