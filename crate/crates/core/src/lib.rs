//! Weighted V-line (conical Radon) transform with vertices on the unit
//! circle and axes through the origin, plus its series-expansion inversion.
//!
//! The pipeline: render a phantom on [-1, 1]^2, project it along V-lines
//! (two rays per vertex, weighted by distance-to-vertex to an integer
//! power), decompose the data into angular Fourier orders, solve one
//! generalized Abel equation per order by product integration (triangular,
//! Tikhonov or truncated-SVD solves), and synthesize the image from the
//! recovered radial profiles. The kernel module exposes the analytic
//! machinery behind the solver - kernel evaluation, diagonal zeros and the
//! uniqueness condition at those zeros - for independent verification.
//!
//! All numerics are generic over the floating-point scalar via [`Scalar`]
//! (f32 or f64); the `*64` aliases below fix the f64 instantiations used by
//! the CLI and the file formats.

pub mod error;
pub mod forward;
pub mod gegenbauer;
pub mod grid;
pub mod harmonics;
pub mod io;
pub mod kernels;
pub mod phantom;
pub mod pipeline;
pub mod quad;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// f64 image grid (the file format stores f64).
pub type ImageGrid64 = grid::ImageGrid<f64>;
/// f64 sinogram.
pub type Sinogram64 = forward::Sinogram<f64>;
/// f64 harmonic table.
pub type HarmonicTable64 = harmonics::HarmonicTable<f64>;
/// f64 radial profile set.
pub type RadialProfileSet64 = harmonics::RadialProfileSet<f64>;
/// f64 phantom specification.
pub type PhantomSpec64 = phantom::PhantomSpec<f64>;
/// f64 solver configuration.
pub type SolveConfig64 = solver::SolveConfig<f64>;
/// f64 reconstruction configuration.
pub type ReconConfig64 = pipeline::ReconConfig<f64>;
