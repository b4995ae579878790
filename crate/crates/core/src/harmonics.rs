//! Angular Fourier analysis of sinograms and synthesis of images from
//! recovered radial profiles.
//!
//! For each opening angle the M vertex samples are transformed by a length-M
//! FFT scaled by 2 pi / M, so the coefficient of order l approximates
//! g_l(s) = int_0^{2 pi} g(alpha, arcsin s) e^{-i l alpha} d alpha. Orders
//! run over l = -M/2 .. M/2 - 1. Synthesis evaluates
//! (1/(2 pi)) Re sum_l f_l(r) e^{i l alpha} per pixel, with the radial
//! profiles linearly interpolated between their midpoint samples.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{FftNum, FftPlanner};

use crate::error::{Error, Result};
use crate::forward::Sinogram;
use crate::grid::{pixel_center, ImageGrid};
use crate::scalar::{real, real_of_usize, Scalar};

/// Complex angular Fourier coefficients g_l(s_i) per order l.
///
/// Rows are order-major: row r holds order l = r - M/2 over i = 0..N.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicTable<S> {
    vertices: usize,
    angles: usize,
    coefficients: Vec<Complex<S>>,
}

impl<S: Scalar> HarmonicTable<S> {
    pub fn from_values(
        vertices: usize,
        angles: usize,
        coefficients: Vec<Complex<S>>,
    ) -> Result<Self> {
        if coefficients.len() != vertices * (angles + 1) {
            return Err(Error::FormatMismatch(format!(
                "expected {} coefficients for M = {vertices}, N = {angles}, got {}",
                vertices * (angles + 1),
                coefficients.len()
            )));
        }
        Ok(Self {
            vertices,
            angles,
            coefficients,
        })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn angles(&self) -> usize {
        self.angles
    }

    pub fn coefficients(&self) -> &[Complex<S>] {
        &self.coefficients
    }

    /// Smallest and largest represented order: [-M/2, M/2 - 1].
    pub fn order_range(&self) -> (i32, i32) {
        let half = (self.vertices / 2) as i32;
        (-half, half - 1)
    }

    fn row_index(&self, order: i32) -> usize {
        let (lo, hi) = self.order_range();
        assert!(
            order >= lo && order <= hi,
            "order {order} outside [{lo}, {hi}]"
        );
        (order + (self.vertices / 2) as i32) as usize
    }

    /// Coefficient g_l(s_i).
    pub fn coefficient(&self, order: i32, i: usize) -> Complex<S> {
        self.coefficients[self.row_index(order) * (self.angles + 1) + i]
    }

    /// All opening-angle samples of one order.
    pub fn order_row(&self, order: i32) -> &[Complex<S>] {
        let r = self.row_index(order);
        &self.coefficients[r * (self.angles + 1)..(r + 1) * (self.angles + 1)]
    }

    /// Largest Hermitian-symmetry defect max |g_{-l} - conj(g_l)|.
    ///
    /// Zero (up to rounding) whenever the source sinogram was real.
    pub fn hermitian_defect(&self) -> S {
        let (lo, _) = self.order_range();
        let mut worst = S::zero();
        for l in 1..(-lo) {
            for i in 0..=self.angles {
                let a = self.coefficient(-l, i);
                let b = self.coefficient(l, i).conj();
                let d = ((a.re - b.re) * (a.re - b.re) + (a.im - b.im) * (a.im - b.im)).sqrt();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Angular Fourier analysis of a sinogram (vertex index -> order index).
pub fn decompose<S: Scalar + FftNum>(sino: &Sinogram<S>) -> HarmonicTable<S> {
    let m = sino.vertices();
    let n1 = sino.angles() + 1;
    let scale = real::<S>(2.0) * S::PI() / real_of_usize::<S>(m);
    let fft = FftPlanner::<S>::new().plan_fft_forward(m);
    let half = m / 2;
    let mut coefficients = vec![Complex::new(S::zero(), S::zero()); m * n1];
    let mut buffer = vec![Complex::new(S::zero(), S::zero()); m];
    for i in 0..n1 {
        for k in 0..m {
            buffer[k] = Complex::new(sino.get(k, i), S::zero());
        }
        fft.process(&mut buffer);
        for (row, slot) in coefficients.iter_mut().skip(i).step_by(n1).enumerate() {
            // Row r corresponds to order l = r - M/2, stored in FFT bin l mod M.
            let bin = (row + half) % m;
            *slot = buffer[bin] * scale;
        }
    }
    HarmonicTable {
        vertices: m,
        angles: sino.angles(),
        coefficients,
    }
}

/// Inverse of [`decompose`]: rebuilds the sinogram with the factor M/(2 pi).
///
/// The radial weight is not part of the table, so the caller restates it.
pub fn recompose<S: Scalar + FftNum>(table: &HarmonicTable<S>, weight: i32) -> Result<Sinogram<S>> {
    let m = table.vertices;
    let n1 = table.angles + 1;
    // Unnormalized inverse FFT of (M / 2 pi) g, divided by M.
    let scale = (real::<S>(2.0) * S::PI()).recip();
    let fft = FftPlanner::<S>::new().plan_fft_inverse(m);
    let half = m / 2;
    let mut values = vec![S::zero(); m * n1];
    let mut buffer = vec![Complex::new(S::zero(), S::zero()); m];
    for i in 0..n1 {
        for (bin, slot) in buffer.iter_mut().enumerate() {
            let row = (bin + half) % m;
            *slot = table.coefficients[row * n1 + i];
        }
        fft.process(&mut buffer);
        for k in 0..m {
            values[k * n1 + i] = buffer[k].re * scale;
        }
    }
    Sinogram::from_values(m, table.angles, weight, values)
}

/// Recovered radial coefficients f_l at midpoints rho_j = (j + 1/2)/N.
///
/// Rows are order-major like [`HarmonicTable`], with N samples per order.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfileSet<S> {
    vertices: usize,
    radial_count: usize,
    values: Vec<Complex<S>>,
}

impl<S: Scalar> RadialProfileSet<S> {
    pub fn zeros(vertices: usize, radial_count: usize) -> Self {
        Self {
            vertices,
            radial_count,
            values: vec![Complex::new(S::zero(), S::zero()); vertices * radial_count],
        }
    }

    pub fn from_values(
        vertices: usize,
        radial_count: usize,
        values: Vec<Complex<S>>,
    ) -> Result<Self> {
        if values.len() != vertices * radial_count {
            return Err(Error::FormatMismatch(format!(
                "expected {} profile values for M = {vertices}, N = {radial_count}, got {}",
                vertices * radial_count,
                values.len()
            )));
        }
        Ok(Self {
            vertices,
            radial_count,
            values,
        })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    /// Number of radial midpoint samples per order.
    pub fn radial_count(&self) -> usize {
        self.radial_count
    }

    pub fn values(&self) -> &[Complex<S>] {
        &self.values
    }

    /// Radial midpoint rho_j = (j + 1/2)/N.
    pub fn midpoint(&self, j: usize) -> S {
        (real_of_usize::<S>(j) + real::<S>(0.5)) / real_of_usize::<S>(self.radial_count)
    }

    pub fn order_range(&self) -> (i32, i32) {
        let half = (self.vertices / 2) as i32;
        (-half, half - 1)
    }

    fn row_index(&self, order: i32) -> usize {
        let (lo, hi) = self.order_range();
        assert!(
            order >= lo && order <= hi,
            "order {order} outside [{lo}, {hi}]"
        );
        (order + (self.vertices / 2) as i32) as usize
    }

    pub fn order_row(&self, order: i32) -> &[Complex<S>] {
        let r = self.row_index(order);
        &self.values[r * self.radial_count..(r + 1) * self.radial_count]
    }

    pub fn set_order_row(&mut self, order: i32, row: &[Complex<S>]) {
        assert_eq!(row.len(), self.radial_count);
        let r = self.row_index(order);
        self.values[r * self.radial_count..(r + 1) * self.radial_count].copy_from_slice(row);
    }

    /// Linear interpolation of one order's midpoint samples at radius r.
    ///
    /// Constant below the first midpoint, linear in between, tapering to zero
    /// at r = 1, and zero beyond.
    fn interpolate(&self, order: i32, r: S) -> Complex<S> {
        let row = self.order_row(order);
        let n = real_of_usize::<S>(self.radial_count);
        let u = r * n - real::<S>(0.5);
        if u <= S::zero() {
            return row[0];
        }
        let last = self.radial_count - 1;
        let ulast = real_of_usize::<S>(last);
        if u >= ulast {
            // Between the last midpoint and 1 the profile decays linearly to 0.
            let t = (r * n - ulast - real::<S>(0.5)) * real::<S>(2.0);
            if t >= S::one() {
                return Complex::new(S::zero(), S::zero());
            }
            return row[last] * (S::one() - t);
        }
        let j = u.floor().to_f64().unwrap() as usize;
        let frac = u - real_of_usize::<S>(j);
        row[j] * (S::one() - frac) + row[j + 1] * frac
    }
}

/// Evaluates the truncated Fourier series on a size x size grid.
///
/// Pixels with radius >= 1 are zero; the output grid therefore carries
/// margin 0. The imaginary residue is discarded after taking the real part.
pub fn synthesize<S: Scalar>(profiles: &RadialProfileSet<S>, size: usize) -> Result<ImageGrid<S>> {
    if size < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid size {size} below the minimum of 16"
        )));
    }
    let (lo, hi) = profiles.order_range();
    let inv_two_pi = (real::<S>(2.0) * S::PI()).recip();
    let mut values = vec![S::zero(); size * size];
    values
        .par_chunks_mut(size)
        .enumerate()
        .for_each(|(row, out)| {
            let y = pixel_center::<S>(row, size);
            for (col, slot) in out.iter_mut().enumerate() {
                let x = pixel_center::<S>(col, size);
                let r = (x * x + y * y).sqrt();
                if r >= S::one() {
                    continue;
                }
                // Orders advance outward from 0 by repeated multiplication
                // with e^{+/- i alpha}; anchoring at 0 keeps purely radial
                // profiles exactly rotation invariant.
                let alpha = y.atan2(x);
                let step = Complex::from_polar(S::one(), alpha);
                let mut acc = profiles.interpolate(0, r);
                let mut phase = Complex::new(S::one(), S::zero());
                for l in 1..=hi {
                    phase *= step;
                    let f = profiles.interpolate(l, r);
                    if f.re != S::zero() || f.im != S::zero() {
                        acc += f * phase;
                    }
                }
                let back = step.conj();
                phase = Complex::new(S::one(), S::zero());
                for l in 1..=(-lo) {
                    phase *= back;
                    let f = profiles.interpolate(-l, r);
                    if f.re != S::zero() || f.im != S::zero() {
                        acc += f * phase;
                    }
                }
                *slot = acc.re * inv_two_pi;
            }
        });
    ImageGrid::from_values(size, size, S::zero(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{vline_forward, Sinogram};
    use crate::phantom::{render_phantom, PhantomSpec};

    fn constant_sinogram(m: usize, n: usize, c: f64) -> Sinogram<f64> {
        Sinogram::from_values(m, n, 0, vec![c; m * (n + 1)]).unwrap()
    }

    #[test]
    fn constant_rows_concentrate_at_order_zero() {
        let sino = constant_sinogram(16, 10, 3.0);
        let table = decompose(&sino);
        for i in 0..=10 {
            let g0 = table.coefficient(0, i);
            assert!((g0.re - 3.0 * std::f64::consts::TAU).abs() < 1e-12);
            assert!(g0.im.abs() < 1e-12);
            for l in table.order_range().0..=table.order_range().1 {
                if l != 0 {
                    assert!(table.coefficient(l, i).norm() < 1e-12, "l={l}");
                }
            }
        }
    }

    #[test]
    fn pure_cosine_row_splits_into_two_orders() {
        let m = 16usize;
        let n = 4usize;
        let mut values = vec![0.0f64; m * (n + 1)];
        for k in 0..m {
            let phi = std::f64::consts::TAU * k as f64 / m as f64;
            for i in 0..=n {
                values[k * (n + 1) + i] = (3.0 * phi).cos();
            }
        }
        let sino = Sinogram::from_values(m, n, 0, values).unwrap();
        let table = decompose(&sino);
        for &l in &[3i32, -3] {
            let g = table.coefficient(l, 2);
            assert!((g.re - std::f64::consts::PI).abs() < 1e-12, "l={l} g={g}");
            assert!(g.im.abs() < 1e-12);
        }
        assert!(table.coefficient(2, 2).norm() < 1e-12);
    }

    #[test]
    fn parseval_identity_holds() {
        let grid = render_phantom(&PhantomSpec::<f64>::smiley(), 101).unwrap();
        let sino = vline_forward(&grid, 32, 20, 0, None).unwrap();
        let table = decompose(&sino);
        for i in 0..=20 {
            let lhs: f64 = (0..32)
                .map(|k| sino.get(k, i).powi(2))
                .sum::<f64>()
                * std::f64::consts::TAU
                / 32.0;
            let rhs: f64 = (table.order_range().0..=table.order_range().1)
                .map(|l| table.coefficient(l, i).norm_sqr())
                .sum::<f64>()
                / std::f64::consts::TAU;
            assert!((lhs - rhs).abs() < 1e-10 * lhs.max(1.0), "i={i}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn hermitian_symmetry_for_real_sinograms() {
        let grid = render_phantom(&PhantomSpec::<f64>::smiley(), 101).unwrap();
        let sino = vline_forward(&grid, 32, 20, 0, None).unwrap();
        let table = decompose(&sino);
        assert!(table.hermitian_defect() < 1e-12);
    }

    #[test]
    fn decompose_roundtrip_through_recompose() {
        let grid = render_phantom(&PhantomSpec::<f64>::smiley(), 101).unwrap();
        let sino = vline_forward(&grid, 32, 20, 0, None).unwrap();
        let table = decompose(&sino);
        let back = recompose(&table, 0).unwrap();
        for (a, b) in sino.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_profiles_synthesize_to_zero_image() {
        let profiles = RadialProfileSet::<f64>::zeros(16, 20);
        let img = synthesize(&profiles, 32).unwrap();
        assert!(img.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn order_zero_synthesis_is_rotation_invariant() {
        let mut profiles = RadialProfileSet::<f64>::zeros(16, 25);
        let row: Vec<Complex<f64>> = (0..25)
            .map(|j| {
                let rho = (j as f64 + 0.5) / 25.0;
                Complex::new((-rho * rho * 8.0).exp(), 0.0)
            })
            .collect();
        profiles.set_order_row(0, &row);
        let img = synthesize(&profiles, 33).unwrap();
        let size = 33;
        for row in 0..size {
            for col in 0..size {
                assert_eq!(img.get(row, col), img.get(col, size - 1 - row));
            }
        }
    }

    #[test]
    fn synthesis_of_real_data_has_tiny_imaginary_residue() {
        // Mirror the decomposed rows Hermitianly (orders 0..M/2-1, the
        // unpaired -M/2 row stays zero) and check that dropping Im() loses
        // nothing: synthesizing the 90-degree phase rotation of all
        // coefficients isolates the imaginary part of the Fourier sum.
        let grid = render_phantom(&PhantomSpec::<f64>::smiley(), 101).unwrap();
        let sino = vline_forward(&grid, 32, 24, 0, None).unwrap();
        let table = decompose(&sino);
        let mut profiles = RadialProfileSet::<f64>::zeros(32, 24);
        for l in 0i32..16 {
            let row: Vec<Complex<f64>> = (0..24).map(|j| table.coefficient(l, j)).collect();
            profiles.set_order_row(l, &row);
            if l > 0 {
                let mirrored: Vec<Complex<f64>> = row.iter().map(|c| c.conj()).collect();
                profiles.set_order_row(-l, &mirrored);
            }
        }
        let re_img = synthesize(&profiles, 33).unwrap();
        let rot = Complex::new(0.0, 1.0);
        let rotated: Vec<Complex<f64>> = profiles.values().iter().map(|&c| c * rot).collect();
        let rotated = RadialProfileSet::from_values(32, 24, rotated).unwrap();
        let im_img = synthesize(&rotated, 33).unwrap();
        let re_norm: f64 = re_img.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        let im_norm: f64 = im_img.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(
            im_norm < 1e-10 * re_norm.max(1.0),
            "residue {im_norm} vs {re_norm}"
        );
    }
}
