//! Discrete weighted V-line transform, 1D quadrature oracles for the radial
//! identities, noise injection and norm reports.
//!
//! A vertex sits at z_k = (cos phi_k, sin phi_k) with phi_k = 2 pi k / M; the
//! V-line with half opening angle psi consists of the two rays leaving z_k in
//! directions -(cos(phi_k - sigma psi), sin(phi_k - sigma psi)), sigma = +/-1.
//! Entry (k, i) integrates f r^m along both rays of the angle psi_i =
//! arcsin(i/N) by the composite trapezoidal rule, truncated at r = 2 (no
//! chord of the unit disk seen from the circle is longer).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::kernels::{clamped_gegenbauer, kernel_k_unchecked, KernelSpec};
use crate::quad;
use crate::scalar::{real, real_of_usize, Scalar};

/// Samples of the weighted V-line transform on the vertex x opening-angle grid.
///
/// Storage is vertex-major: `values[k * (angles + 1) + i]` holds the datum at
/// vertex angle 2 pi k / M and opening parameter s_i = i / N, i = 0..N.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<S> {
    vertices: usize,
    angles: usize,
    weight: i32,
    values: Vec<S>,
}

impl<S: Scalar> Sinogram<S> {
    pub fn from_values(
        vertices: usize,
        angles: usize,
        weight: i32,
        values: Vec<S>,
    ) -> Result<Self> {
        if values.len() != vertices * (angles + 1) {
            return Err(Error::FormatMismatch(format!(
                "expected {} values for M = {vertices}, N = {angles}, got {}",
                vertices * (angles + 1),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("sinogram contains non-finite values".into()));
        }
        Ok(Self {
            vertices,
            angles,
            weight,
            values,
        })
    }

    /// Number of vertices M.
    pub fn vertices(&self) -> usize {
        self.vertices
    }

    /// Number of opening-angle intervals N (there are N + 1 samples).
    pub fn angles(&self) -> usize {
        self.angles
    }

    /// Radial weight exponent m used by the forward transform.
    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// Vertex angle phi_k = 2 pi k / M.
    pub fn vertex_angle(&self, k: usize) -> S {
        real::<S>(2.0) * S::PI() * real_of_usize::<S>(k) / real_of_usize::<S>(self.vertices)
    }

    /// Opening parameter s_i = i / N.
    pub fn opening_parameter(&self, i: usize) -> S {
        real_of_usize::<S>(i) / real_of_usize::<S>(self.angles)
    }

    /// Half opening angle psi_i = arcsin(i / N).
    pub fn opening_angle(&self, i: usize) -> S {
        self.opening_parameter(i).asin()
    }

    pub fn get(&self, k: usize, i: usize) -> S {
        self.values[k * (self.angles + 1) + i]
    }

    /// All opening-angle samples of vertex k.
    pub fn vertex_row(&self, k: usize) -> &[S] {
        &self.values[k * (self.angles + 1)..(k + 1) * (self.angles + 1)]
    }

    /// Euclidean norm of the raw sample vector.
    pub fn frobenius_norm(&self) -> S {
        self.values.iter().map(|&v| v * v).sum::<S>().sqrt()
    }
}

/// Default ray quadrature step for a given image grid: 1/(2 width).
pub fn default_ray_step<S: Scalar>(grid: &ImageGrid<S>) -> S {
    (real_of_usize::<S>(2 * grid.width())).recip()
}

/// Computes the weighted V-line transform of an image grid.
///
/// `vertices` must be a power of two (the decomposition uses an FFT over the
/// vertex index), `angles >= 8`, and `step` (if given) positive; rows are
/// processed in parallel but each ray accumulates left to right, so the
/// result does not depend on the number of threads.
pub fn vline_forward<S: Scalar>(
    grid: &ImageGrid<S>,
    vertices: usize,
    angles: usize,
    weight: i32,
    step: Option<S>,
) -> Result<Sinogram<S>> {
    if vertices == 0 || !vertices.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "vertex count {vertices} must be a power of two"
        )));
    }
    if angles < 8 {
        return Err(Error::InvalidArgument(format!(
            "angle count {angles} below the minimum of 8"
        )));
    }
    let step = step.unwrap_or_else(|| default_ray_step(grid));
    if !(step > S::zero()) {
        return Err(Error::InvalidArgument(format!(
            "ray step {step} must be positive"
        )));
    }
    grid.check_support()?;

    // Uniform nodes spanning [0, 2] exactly.
    let segments = (real::<S>(2.0) / step)
        .ceil()
        .to_f64()
        .unwrap_or(f64::NAN) as usize;
    let segments = segments.max(1);
    let h = real::<S>(2.0) / real_of_usize::<S>(segments);

    let n1 = angles + 1;
    let mut values = vec![S::zero(); vertices * n1];
    values
        .par_chunks_mut(n1)
        .enumerate()
        .for_each(|(k, row)| {
            let phi = real::<S>(2.0) * S::PI() * real_of_usize::<S>(k)
                / real_of_usize::<S>(vertices);
            let vx = phi.cos();
            let vy = phi.sin();
            for (i, slot) in row.iter_mut().enumerate() {
                let psi = (real_of_usize::<S>(i) / real_of_usize::<S>(angles)).asin();
                let mut total = S::zero();
                for sigma in [S::one(), -S::one()] {
                    let dir = phi - sigma * psi;
                    let (dx, dy) = (dir.cos(), dir.sin());
                    let mut acc = S::zero();
                    for t in 0..=segments {
                        let r = h * real_of_usize::<S>(t);
                        let f = grid.sample_bilinear(vx - r * dx, vy - r * dy);
                        if f == S::zero() {
                            continue;
                        }
                        let w = if t == 0 || t == segments {
                            real::<S>(0.5)
                        } else {
                            S::one()
                        };
                        acc += w * f * r.powi(weight);
                    }
                    total += acc * h;
                }
                *slot = total;
            }
        });
    Sinogram::from_values(vertices, angles, weight, values)
}

/// Angular-form radial oracle: for a single harmonic order, integrates
///
///   |S^{n-2}| int_0^{pi - psi} f(sin(psi)/sin(alpha + psi))
///       * sin(psi)^{n-1} sin(alpha)^{m+n-2} / sin(alpha + psi)^{m+n}
///       * C(cos alpha) d alpha
///
/// by adaptive quadrature to absolute tolerance 1e-10. The radial profile
/// must vanish near 1 so the endpoint blow-up never contributes.
pub fn glk_alpha_integral<S: Scalar>(
    f_radial: impl Fn(S) -> S,
    spec: &KernelSpec,
    psi: S,
) -> Result<S> {
    check_opening_angle(psi)?;
    let n = spec.dim as i32;
    let m = spec.weight;
    let mu = spec.index::<S>();
    let order = spec.order;
    let sin_psi = psi.sin();
    let integrand = move |alpha: S| -> S {
        let sa = (alpha + psi).sin();
        if sa <= S::zero() {
            return S::zero();
        }
        let fv = f_radial(sin_psi / sa);
        if fv == S::zero() {
            return S::zero();
        }
        let c = clamped_gegenbauer(order, mu, alpha.cos());
        fv * sin_psi.powi(n - 1) * alpha.sin().powi(m + n - 2) / sa.powi(m + n) * c
    };
    let value = quad::integrate(integrand, S::zero(), S::PI() - psi, real::<S>(1e-10))?;
    Ok(spec.surface_measure::<S>() * value)
}

/// Radius-form radial oracle: integrates
///
///   |S^{n-2}| sin(psi)^{-m} int_{sin psi}^1 f(rho) rho K(psi, rho)
///       / sqrt(rho^2 - sin(psi)^2) d rho
///
/// with the substitution rho = sqrt(sin(psi)^2 + u^2) removing the endpoint
/// singularity; equal to [`glk_alpha_integral`] on the same inputs.
pub fn glk2_rho_integral<S: Scalar>(
    f_radial: impl Fn(S) -> S,
    spec: &KernelSpec,
    psi: S,
) -> Result<S> {
    check_opening_angle(psi)?;
    let sin_psi = psi.sin();
    let s2 = sin_psi * sin_psi;
    let spec = *spec;
    let integrand = move |u: S| -> S {
        let rho = (s2 + u * u).sqrt().max(sin_psi);
        let fv = f_radial(rho);
        if fv == S::zero() {
            return S::zero();
        }
        fv * kernel_k_unchecked(&spec, psi, rho)
    };
    let value = quad::integrate(integrand, S::zero(), psi.cos(), real::<S>(1e-10))?;
    Ok(spec.surface_measure::<S>() * sin_psi.powi(-spec.weight) * value)
}

fn check_opening_angle<S: Scalar>(psi: S) -> Result<()> {
    if psi <= S::zero() || psi >= S::FRAC_PI_2() {
        return Err(Error::InvalidArgument(format!(
            "opening angle {psi} outside (0, pi/2)"
        )));
    }
    Ok(())
}

/// Adds Gaussian noise rescaled so that ||z|| / ||g|| equals `rel_level`.
///
/// Deterministic for a fixed seed; `rel_level = 0` returns the input as is.
pub fn add_noise<S: Scalar>(sino: &Sinogram<S>, rel_level: S, seed: u64) -> Result<Sinogram<S>> {
    if rel_level < S::zero() {
        return Err(Error::InvalidArgument(format!(
            "noise level {rel_level} must be nonnegative"
        )));
    }
    if rel_level == S::zero() {
        return Ok(sino.clone());
    }
    let norm_g = sino.frobenius_norm();
    if norm_g == S::zero() {
        return Err(Error::ZeroNorm(
            "cannot scale noise relative to an all-zero sinogram".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let z: Vec<S> = (0..sino.values.len())
        .map(|_| real::<S>(normal.sample(&mut rng)))
        .collect();
    let norm_z = z.iter().map(|&v| v * v).sum::<S>().sqrt();
    if norm_z == S::zero() {
        return Err(Error::ZeroNorm("noise draw has zero norm".into()));
    }
    let scale = rel_level * norm_g / norm_z;
    let values = sino
        .values
        .iter()
        .zip(z.iter())
        .map(|(&g, &n)| g + scale * n)
        .collect();
    Sinogram::from_values(sino.vertices, sino.angles, sino.weight, values)
}

/// Discrete norms of an image and a sinogram plus the L1 transform ratio.
///
/// Image norms use Riemann sums with the pixel area (2/width)(2/height).
/// Sinogram norms use the trapezoidal weights of the nonuniform arcsin grid
/// in psi and the *average* over the vertex circle, the vertex measure under
/// which the L1 bound ||R_m f||_1 <= 2^m ||f||_1 (m >= 1) holds.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport<S> {
    pub l1_image: S,
    pub l2_image: S,
    pub l1_sinogram: S,
    pub l2_sinogram: S,
    /// l1_sinogram / l1_image.
    pub l1_ratio: S,
    /// Radial weight of the sinogram, for which the 2^m bound applies when >= 1.
    pub weight: i32,
}

/// Computes discrete image/sinogram norms; the sinogram must come from the grid.
pub fn norm_report<S: Scalar>(grid: &ImageGrid<S>, sino: &Sinogram<S>) -> NormReport<S> {
    let pixel_area = real::<S>(4.0)
        / (real_of_usize::<S>(grid.width()) * real_of_usize::<S>(grid.height()));
    let mut l1_image = S::zero();
    let mut l2_image = S::zero();
    for &v in grid.values() {
        l1_image += v.abs();
        l2_image += v * v;
    }
    l1_image *= pixel_area;
    l2_image = (l2_image * pixel_area).sqrt();

    // Trapezoidal weights for psi_i = arcsin(i/N).
    let n = sino.angles;
    let mut psi_weights = vec![S::zero(); n + 1];
    for i in 0..n {
        let half = (sino.opening_angle(i + 1) - sino.opening_angle(i)) * real::<S>(0.5);
        psi_weights[i] += half;
        psi_weights[i + 1] += half;
    }
    let vertex_weight = real_of_usize::<S>(sino.vertices).recip();
    let mut l1_sino = S::zero();
    let mut l2_sino = S::zero();
    for k in 0..sino.vertices {
        for (i, &w) in psi_weights.iter().enumerate() {
            let v = sino.get(k, i);
            l1_sino += v.abs() * w;
            l2_sino += v * v * w;
        }
    }
    l1_sino *= vertex_weight;
    l2_sino = (l2_sino * vertex_weight).sqrt();

    let l1_ratio = if l1_image > S::zero() {
        l1_sino / l1_image
    } else {
        S::zero()
    };
    NormReport {
        l1_image,
        l2_image,
        l1_sinogram: l1_sino,
        l2_sinogram: l2_sino,
        l1_ratio,
        weight: sino.weight,
    }
}
