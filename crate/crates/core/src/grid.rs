//! Cartesian image grids on the fixed square [-1, 1] x [-1, 1].
//!
//! Pixel centers carry the values: the p-th center along either axis sits at
//! -1 + (2p + 1)/size. Every grid stores a support margin; values at pixel
//! centers with radius >= 1 - margin must be exactly zero, which the
//! constructors enforce. Row index follows y, column index follows x.

use crate::error::{Error, Result};
use crate::scalar::{real, real_of_usize, Scalar};

/// Default support margin: functions must vanish at radius >= 0.95.
pub const DEFAULT_MARGIN: f64 = 0.05;

pub(crate) fn pixel_center<S: Scalar>(index: usize, count: usize) -> S {
    let numerator = 2 * index as i64 + 1 - count as i64;
    S::from_i64(numerator).expect("index must be representable") / real_of_usize::<S>(count)
}

/// A discretized real-valued function on [-1, 1]^2, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid<S> {
    width: usize,
    height: usize,
    margin: S,
    values: Vec<S>,
}

impl<S: Scalar> ImageGrid<S> {
    /// All-zero grid with the given support margin.
    pub fn zeros(width: usize, height: usize, margin: S) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(
                "grid dimensions must be positive".into(),
            ));
        }
        if margin < S::zero() || margin >= S::one() {
            return Err(Error::InvalidArgument(format!(
                "support margin {margin} outside [0, 1)"
            )));
        }
        Ok(Self {
            width,
            height,
            margin,
            values: vec![S::zero(); width * height],
        })
    }

    /// Wraps raw row-major values, checking the support invariant.
    pub fn from_values(width: usize, height: usize, margin: S, values: Vec<S>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::FormatMismatch(format!(
                "expected {} values for a {width}x{height} grid, got {}",
                width * height,
                values.len()
            )));
        }
        let grid = Self {
            width,
            height,
            margin,
            values,
        };
        grid.check_support()?;
        Ok(grid)
    }

    /// Verifies that values at radius >= 1 - margin are exactly zero.
    pub fn check_support(&self) -> Result<()> {
        let limit = S::one() - self.margin;
        for row in 0..self.height {
            let y = self.pixel_center_y(row);
            for col in 0..self.width {
                let x = self.pixel_center_x(col);
                let r = (x * x + y * y).sqrt();
                let v = self.values[row * self.width + col];
                if r >= limit && v != S::zero() {
                    return Err(Error::SupportViolation {
                        row,
                        col,
                        value: v.to_f64().unwrap_or(f64::NAN),
                        radius: r.to_f64().unwrap_or(f64::NAN),
                        limit: limit.to_f64().unwrap_or(f64::NAN),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn margin(&self) -> S {
        self.margin
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// x coordinate of the pixel center in column `col`: -1 + (2 col + 1)/width.
    ///
    /// Evaluated as (2 col + 1 - width)/width with an integer numerator so that
    /// mirrored pixels get exactly negated coordinates.
    pub fn pixel_center_x(&self, col: usize) -> S {
        pixel_center(col, self.width)
    }

    /// y coordinate of the pixel center in row `row`; same convention as x.
    pub fn pixel_center_y(&self, row: usize) -> S {
        pixel_center(row, self.height)
    }

    pub fn get(&self, row: usize, col: usize) -> S {
        self.values[row * self.width + col]
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: S) {
        self.values[row * self.width + col] = value;
    }

    /// Value of the pixel whose center is nearest to (x, y); test convenience.
    pub fn value_at(&self, x: S, y: S) -> S {
        let col = self.nearest_index(x, self.width);
        let row = self.nearest_index(y, self.height);
        self.get(row, col)
    }

    fn nearest_index(&self, c: S, count: usize) -> usize {
        let u = (c + S::one()) * real_of_usize::<S>(count) * real::<S>(0.5) - real::<S>(0.5);
        let i = u.round().to_f64().unwrap_or(0.0) as isize;
        i.clamp(0, count as isize - 1) as usize
    }

    /// Bilinear interpolation of the four surrounding pixel centers.
    ///
    /// Total function: points outside the pixel-center hull return 0.
    pub fn sample_bilinear(&self, x: S, y: S) -> S {
        let half = real::<S>(0.5);
        let u = (x + S::one()) * real_of_usize::<S>(self.width) * half - half;
        let v = (y + S::one()) * real_of_usize::<S>(self.height) * half - half;
        let wmax = real_of_usize::<S>(self.width - 1);
        let hmax = real_of_usize::<S>(self.height - 1);
        if u < S::zero() || u > wmax || v < S::zero() || v > hmax {
            return S::zero();
        }
        let uf = u.floor();
        let vf = v.floor();
        let mut c0 = uf.to_f64().unwrap() as usize;
        let mut r0 = vf.to_f64().unwrap() as usize;
        // Keep the 2x2 stencil inside the grid when sampling on the last line.
        if c0 + 1 >= self.width {
            c0 = self.width - 2;
        }
        if r0 + 1 >= self.height {
            r0 = self.height - 2;
        }
        let fu = u - real_of_usize::<S>(c0);
        let fv = v - real_of_usize::<S>(r0);
        let one = S::one();
        let v00 = self.get(r0, c0);
        let v01 = self.get(r0, c0 + 1);
        let v10 = self.get(r0 + 1, c0);
        let v11 = self.get(r0 + 1, c0 + 1);
        (one - fv) * ((one - fu) * v00 + fu * v01) + fv * ((one - fu) * v10 + fu * v11)
    }

    /// Pointwise linear combination a*self + b*other (dimensions must match).
    pub fn linear_combination(&self, a: S, other: &Self, b: S) -> Result<Self> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::InvalidArgument(
                "grid dimensions must match for linear combination".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&p, &q)| a * p + b * q)
            .collect();
        Ok(Self {
            width: self.width,
            height: self.height,
            margin: self.margin.min(other.margin),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_cell_grid() -> ImageGrid<f64> {
        // 4x4 grid, affine values f(x, y) = 2x + 3y + 1 (margin 0: no support check
        // interference because we only keep a 2x2 interior patch nonzero).
        let mut g = ImageGrid::zeros(4, 4, 0.0).unwrap();
        for row in 1..3 {
            for col in 1..3 {
                let x = g.pixel_center_x(col);
                let y = g.pixel_center_y(row);
                g.set(row, col, 2.0 * x + 3.0 * y + 1.0);
            }
        }
        g
    }

    #[test]
    fn sample_at_pixel_center_returns_value() {
        let g = single_cell_grid();
        let x = g.pixel_center_x(2);
        let y = g.pixel_center_y(1);
        assert_eq!(g.sample_bilinear(x, y), g.get(1, 2));
    }

    #[test]
    fn sample_outside_extent_is_zero() {
        let g = single_cell_grid();
        assert_eq!(g.sample_bilinear(2.0, 0.0), 0.0);
        assert_eq!(g.sample_bilinear(0.0, -5.0), 0.0);
    }

    #[test]
    fn sample_midpoint_is_mean_of_neighbors() {
        let g = single_cell_grid();
        let x = 0.5 * (g.pixel_center_x(1) + g.pixel_center_x(2));
        let y = g.pixel_center_y(1);
        let mean = 0.5 * (g.get(1, 1) + g.get(1, 2));
        assert!((g.sample_bilinear(x, y) - mean).abs() < 1e-15);
    }

    #[test]
    fn bilinear_is_exact_on_affine_functions_within_a_cell() {
        let g = single_cell_grid();
        // Points strictly inside the cell spanned by centers (1,1)..(2,2).
        for i in 0..10 {
            for j in 0..10 {
                let t = (i as f64 + 0.5) / 10.0;
                let s = (j as f64 + 0.5) / 10.0;
                let x = g.pixel_center_x(1) * (1.0 - t) + g.pixel_center_x(2) * t;
                let y = g.pixel_center_y(1) * (1.0 - s) + g.pixel_center_y(2) * s;
                let expected = 2.0 * x + 3.0 * y + 1.0;
                assert!((g.sample_bilinear(x, y) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn support_invariant_rejected_when_violated() {
        let mut values = vec![0.0f64; 16];
        values[0] = 1.0; // corner pixel, radius ~ 1.06
        let err = ImageGrid::from_values(4, 4, 0.05, values);
        assert!(matches!(err, Err(Error::SupportViolation { .. })));
    }

    #[test]
    fn pixel_centers_match_definition() {
        let g = ImageGrid::<f64>::zeros(301, 301, 0.05).unwrap();
        assert!((g.pixel_center_x(0) - (-1.0 + 1.0 / 301.0)).abs() < 1e-15);
        assert!((g.pixel_center_x(150) - 0.0).abs() < 1e-15);
        assert!((g.pixel_center_y(300) - (1.0 - 1.0 / 301.0)).abs() < 1e-15);
    }
}
