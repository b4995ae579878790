//! Product-integration discretization of the per-order Abel equations and
//! its direct or regularized solution.
//!
//! On the uniform grid s_i = i/N (rows) with radial midpoints
//! rho_j = (j + 1/2)/N (columns), the singular factor rho/sqrt(rho^2 - s^2)
//! is integrated exactly over each cell while the smooth kernel is frozen at
//! the midpoint:
//!
//!   A[i][j] = |S^{n-2}| w_{i,j} K(arcsin s_i, rho_j),  j >= i,
//!   w_{i,j} = (sqrt((j+1)^2 - i^2) - sqrt(j^2 - i^2)) / N,
//!
//! so that (A f)_i approximates the order-l datum s_i^m g_l(s_i). The matrix
//! is upper triangular; with diagonal kernel zeros it becomes ill-conditioned
//! and the Tikhonov or truncated-SVD paths take over.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonics::HarmonicTable;
use crate::kernels::{kernel_k_unchecked, KernelSpec};
use crate::scalar::{real, real_of_usize, Scalar};

/// Solution method for the triangular product-integration system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Direct back substitution on the triangular matrix.
    Triangular,
    /// Regularized normal equations (A^T A + lambda I) f = A^T b.
    Tikhonov,
    /// Least squares with singular values below a relative cutoff discarded.
    Tsvd,
}

/// Solver configuration: method plus its regularization parameter.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveConfig<S> {
    pub method: Method,
    /// Tikhonov parameter, >= 0.
    pub lambda: S,
    /// Relative singular-value cutoff in [0, 1).
    pub svd_threshold: S,
}

impl<S: Scalar> SolveConfig<S> {
    pub fn triangular() -> Self {
        Self {
            method: Method::Triangular,
            lambda: S::zero(),
            svd_threshold: S::zero(),
        }
    }

    pub fn tikhonov(lambda: S) -> Self {
        Self {
            method: Method::Tikhonov,
            lambda,
            svd_threshold: S::zero(),
        }
    }

    pub fn tsvd(threshold: S) -> Self {
        Self {
            method: Method::Tsvd,
            lambda: S::zero(),
            svd_threshold: threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < S::zero() {
            return Err(Error::InvalidArgument(format!(
                "tikhonov parameter {} must be nonnegative",
                self.lambda
            )));
        }
        if self.svd_threshold < S::zero() || self.svd_threshold >= S::one() {
            return Err(Error::InvalidArgument(format!(
                "svd threshold {} outside [0, 1)",
                self.svd_threshold
            )));
        }
        Ok(())
    }
}

/// Assembled per-order system.
#[derive(Debug, Clone)]
pub struct AbelSystem<S> {
    spec: KernelSpec,
    size: usize,
    matrix: DMatrix<S>,
}

/// Product-integration weight w_{i,j} for system size n.
pub fn midpoint_weight<S: Scalar>(i: usize, j: usize, n: usize) -> S {
    let i2 = (i * i) as f64;
    let a = real::<S>((((j + 1) * (j + 1)) as f64 - i2).sqrt());
    let b = real::<S>(((j * j) as f64 - i2).sqrt());
    (a - b) / real_of_usize::<S>(n)
}

/// Assembles the order-l system of the given size (rows i = 0..N-1).
///
/// The datum at s_N = 1 has no row: functions supported inside the unit disk
/// contribute nothing there.
pub fn assemble<S: Scalar>(spec: &KernelSpec, size: usize) -> Result<AbelSystem<S>> {
    if size < 4 {
        return Err(Error::InvalidArgument(format!(
            "system size {size} below the minimum of 4"
        )));
    }
    let surface = spec.surface_measure::<S>();
    let nf = real_of_usize::<S>(size);
    let mut matrix = DMatrix::<S>::zeros(size, size);
    for i in 0..size {
        let psi = (real_of_usize::<S>(i) / nf).asin();
        for j in i..size {
            let rho = (real_of_usize::<S>(j) + real::<S>(0.5)) / nf;
            let w = midpoint_weight::<S>(i, j, size);
            matrix[(i, j)] = surface * w * kernel_k_unchecked(spec, psi, rho);
        }
    }
    Ok(AbelSystem {
        spec: *spec,
        size,
        matrix,
    })
}

impl<S: Scalar> AbelSystem<S> {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.matrix
    }

    /// Node s_i = i/N of row i.
    pub fn node(&self, i: usize) -> S {
        real_of_usize::<S>(i) / real_of_usize::<S>(self.size)
    }

    /// Midpoint rho_j = (j + 1/2)/N of column j.
    pub fn midpoint(&self, j: usize) -> S {
        (real_of_usize::<S>(j) + real::<S>(0.5)) / real_of_usize::<S>(self.size)
    }

    fn max_abs_entry(&self) -> S {
        self.matrix
            .iter()
            .fold(S::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// Index and value of the diagonal entry closest to zero relative to the
    /// largest matrix entry; `Err` when triangular substitution would divide
    /// by (nearly) nothing.
    pub fn check_diagonal(&self) -> Result<()> {
        let threshold = real::<S>(1e-12) * self.max_abs_entry();
        for i in 0..self.size {
            let d = self.matrix[(i, i)];
            if d.abs() < threshold {
                return Err(Error::IllConditionedDiagonal {
                    index: i,
                    value: d.to_f64().unwrap_or(f64::NAN),
                    threshold: threshold.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(())
    }

    /// Applies the matrix to a real vector (test and residual helper).
    pub fn apply(&self, f: &[S]) -> Vec<S> {
        assert_eq!(f.len(), self.size);
        let x = DVector::from_column_slice(f);
        let y = &self.matrix * x;
        y.iter().copied().collect()
    }
}

/// Right-hand side b_i = s_i^m g_l(s_i) for rows i = 0..N-1.
///
/// The sin(psi)^{-m} prefactor of the continuous equation is moved onto the
/// data side; the i = N datum is dropped.
pub fn rhs_from_harmonics<S: Scalar>(
    table: &HarmonicTable<S>,
    order: i32,
    weight: i32,
) -> Vec<Complex<S>> {
    let n = table.angles();
    let row = table.order_row(order);
    (0..n)
        .map(|i| {
            let s = real_of_usize::<S>(i) / real_of_usize::<S>(n);
            let w = s.powi(weight);
            // 0^0 = 1 keeps the unweighted case intact at i = 0.
            row[i] * w
        })
        .collect()
}

/// Solves the assembled system for a complex right-hand side.
///
/// The matrix is real, so real and imaginary parts are solved independently.
pub fn solve<S: Scalar + RealField>(
    system: &AbelSystem<S>,
    b: &[Complex<S>],
    cfg: &SolveConfig<S>,
) -> Result<Vec<Complex<S>>> {
    cfg.validate()?;
    if b.len() != system.size {
        return Err(Error::InvalidArgument(format!(
            "right-hand side length {} does not match system size {}",
            b.len(),
            system.size
        )));
    }
    if b
        .iter()
        .any(|c| !num_traits::Float::is_finite(c.re) || !num_traits::Float::is_finite(c.im))
    {
        return Err(Error::Numerical("right-hand side contains non-finite values".into()));
    }
    let re: Vec<S> = b.iter().map(|c| c.re).collect();
    let im: Vec<S> = b.iter().map(|c| c.im).collect();
    let (xr, xi) = match cfg.method {
        Method::Triangular => {
            system.check_diagonal()?;
            (solve_triangular(system, &re), solve_triangular(system, &im))
        }
        Method::Tikhonov => solve_tikhonov(system, &re, &im, cfg.lambda)?,
        Method::Tsvd => solve_tsvd(system, &re, &im, cfg.svd_threshold)?,
    };
    Ok(xr
        .into_iter()
        .zip(xi)
        .map(|(r, i)| Complex::new(r, i))
        .collect())
}

fn solve_triangular<S: Scalar>(system: &AbelSystem<S>, b: &[S]) -> Vec<S> {
    let n = system.size;
    let a = &system.matrix;
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc -= a[(i, j)] * x[j];
        }
        x[i] = acc / a[(i, i)];
    }
    x
}

fn solve_tikhonov<S: Scalar + RealField>(
    system: &AbelSystem<S>,
    re: &[S],
    im: &[S],
    lambda: S,
) -> Result<(Vec<S>, Vec<S>)> {
    let a = &system.matrix;
    let mut normal = a.transpose() * a;
    for i in 0..system.size {
        normal[(i, i)] += lambda;
    }
    let chol = nalgebra::Cholesky::new(normal).ok_or_else(|| {
        Error::Numerical(
            "regularized normal matrix is not positive definite (lambda too small?)".into(),
        )
    })?;
    let at = a.transpose();
    let solve_one = |rhs: &[S]| -> Vec<S> {
        let b = &at * DVector::from_column_slice(rhs);
        chol.solve(&b).iter().copied().collect()
    };
    Ok((solve_one(re), solve_one(im)))
}

fn solve_tsvd<S: Scalar + RealField>(
    system: &AbelSystem<S>,
    re: &[S],
    im: &[S],
    threshold: S,
) -> Result<(Vec<S>, Vec<S>)> {
    let svd = system
        .matrix
        .clone()
        .try_svd(true, true, <S as num_traits::Float>::epsilon(), 0)
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))?;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let sigma_max = svd
        .singular_values
        .iter()
        .fold(S::zero(), |a, &s| if s > a { s } else { a });
    let cutoff = threshold * sigma_max;
    let solve_one = |rhs: &[S]| -> Vec<S> {
        let b = DVector::from_column_slice(rhs);
        let mut coeffs = u.transpose() * b;
        for (k, c) in coeffs.iter_mut().enumerate() {
            let s = svd.singular_values[k];
            *c = if s > cutoff && s > S::zero() {
                *c / s
            } else {
                S::zero()
            };
        }
        (vt.transpose() * coeffs).iter().copied().collect()
    };
    Ok((solve_one(re), solve_one(im)))
}

/// Spectral summary of one assembled system.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport<S> {
    pub order: u32,
    pub size: usize,
    pub min_abs_diagonal: S,
    pub max_abs_diagonal: S,
    pub sigma_min: S,
    pub sigma_max: S,
    /// sigma_max / sigma_min; infinite for a singular matrix.
    pub condition_number: S,
}

/// Singular values and diagonal extrema of the assembled matrix.
pub fn condition_report<S: Scalar + RealField>(system: &AbelSystem<S>) -> Result<ConditionReport<S>> {
    let svd = system
        .matrix
        .clone()
        .try_svd(false, false, <S as num_traits::Float>::epsilon(), 0)
        .ok_or_else(|| Error::Numerical("singular value decomposition did not converge".into()))?;
    let mut sigma_min = <S as num_traits::Float>::infinity();
    let mut sigma_max = S::zero();
    for &s in svd.singular_values.iter() {
        if s < sigma_min {
            sigma_min = s;
        }
        if s > sigma_max {
            sigma_max = s;
        }
    }
    let mut dmin = <S as num_traits::Float>::infinity();
    let mut dmax = S::zero();
    for i in 0..system.size {
        let d = num_traits::Float::abs(system.matrix[(i, i)]);
        if d < dmin {
            dmin = d;
        }
        if d > dmax {
            dmax = d;
        }
    }
    Ok(ConditionReport {
        order: system.spec.order,
        size: system.size,
        min_abs_diagonal: dmin,
        max_abs_diagonal: dmax,
        sigma_min,
        sigma_max,
        condition_number: if sigma_min > S::zero() {
            sigma_max / sigma_min
        } else {
            <S as num_traits::Float>::infinity()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dim: u32, weight: i32, order: u32) -> KernelSpec {
        KernelSpec::new(dim, weight, order).unwrap()
    }

    fn complexify(v: &[f64]) -> Vec<Complex<f64>> {
        v.iter().map(|&x| Complex::new(x, 0.0)).collect()
    }

    #[test]
    fn first_weight_matches_closed_form() {
        // w_{0,0} = 1/N.
        let w: f64 = midpoint_weight(0, 0, 300);
        assert!((w - 1.0 / 300.0).abs() < 1e-15);
        // w_{i,i} = sqrt(2 i + 1)/N.
        for &i in &[1usize, 7, 123] {
            let w: f64 = midpoint_weight(i, i, 300);
            assert!((w - ((2 * i + 1) as f64).sqrt() / 300.0).abs() < 1e-15);
        }
    }

    #[test]
    fn matrix_is_upper_triangular_and_scaled() {
        let sys = assemble::<f64>(&spec(2, 0, 0), 40).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let a = sys.matrix()[(i, j)];
                if j < i {
                    assert_eq!(a, 0.0);
                } else {
                    // K_0 = 2 and |S^0| = 2: entries are 4 w_{i,j}.
                    let expected = 4.0 * midpoint_weight::<f64>(i, j, 40);
                    assert!((a - expected).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn order_zero_apply_matches_abel_closed_form() {
        // f = 1 on rho < 1/2: (A f)_i ~ 4 sqrt(1/4 - s_i^2), O(1/N) away from
        // the jump.
        let n = 300;
        let sys = assemble::<f64>(&spec(2, 0, 0), n).unwrap();
        let f: Vec<f64> = (0..n)
            .map(|j| if sys.midpoint(j) < 0.5 { 1.0 } else { 0.0 })
            .collect();
        let g = sys.apply(&f);
        for i in 0..n {
            let s = sys.node(i);
            if s < 0.45 {
                let expected = 4.0 * (0.25 - s * s).sqrt();
                assert!(
                    (g[i] - expected).abs() < 10.0 / n as f64,
                    "i={i} got={} expected={expected}",
                    g[i]
                );
            }
        }
    }

    #[test]
    fn triangular_solve_inverts_apply() {
        let n = 120;
        let sys = assemble::<f64>(&spec(2, 0, 0), n).unwrap();
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let rho = sys.midpoint(j);
                (1.0 - rho * rho).powi(3)
            })
            .collect();
        let b = complexify(&sys.apply(&f));
        let x = solve(&sys, &b, &SolveConfig::triangular()).unwrap();
        for (xi, fi) in x.iter().zip(&f) {
            assert!((xi.re - fi).abs() < 1e-10);
            assert!(xi.im.abs() < 1e-12);
        }
    }

    #[test]
    fn triangular_reports_near_zero_diagonal_with_index() {
        // Positive radial weight zeroes the psi = 0 row of the kernel, so the
        // first diagonal entry is exactly 0 and substitution must refuse.
        let sys = assemble::<f64>(&spec(2, 1, 0), 60).unwrap();
        let b = vec![Complex::new(1.0, 0.0); 60];
        let err = solve(&sys, &b, &SolveConfig::triangular());
        match err {
            Err(Error::IllConditionedDiagonal { index, value, .. }) => {
                assert_eq!(index, 0);
                assert_eq!(value, 0.0);
            }
            other => panic!("expected ill-conditioned diagonal, got {other:?}"),
        }
    }

    #[test]
    fn triangular_tolerates_small_but_nonzero_diagonals() {
        // At N = 300 the order-2 node grid only gets within ~1e-3 of the
        // kernel zero at s = 1/sqrt(2); that clears the 1e-12 refusal
        // threshold, so substitution proceeds (with amplification, which is
        // what the regularized methods are for).
        let sys = assemble::<f64>(&spec(2, 0, 2), 300).unwrap();
        let b = vec![Complex::new(1.0, 0.0); 300];
        assert!(solve(&sys, &b, &SolveConfig::triangular()).is_ok());
    }

    #[test]
    fn tikhonov_matches_identity_scaling() {
        // On a diagonal system the regularized solution is b/(d^2 + lambda) * d.
        // Exercised through the public API with the order-zero system whose
        // action is known: consistency against the closed form of the normal
        // equations is covered by the optimality test below; here we check the
        // 1x-scaled identity analogue f = b/(1 + lambda) on a unit diagonal.
        let n = 30;
        let mut sys = assemble::<f64>(&spec(2, 0, 0), n).unwrap();
        // Overwrite with the identity to isolate the filter factor.
        sys.matrix = DMatrix::identity(n, n);
        let mut b = vec![Complex::new(0.0, 0.0); n];
        b[0] = Complex::new(1.0, 0.0);
        let x = solve(&sys, &b, &SolveConfig::tikhonov(0.5)).unwrap();
        assert!((x[0].re - 1.0 / 1.5).abs() < 1e-12);
        for xi in &x[1..] {
            assert!(xi.re.abs() < 1e-14);
        }
    }

    #[test]
    fn tikhonov_satisfies_first_order_optimality() {
        // A^T (A f - b) + lambda f = 0 characterizes the minimizer of
        // ||A f - b||^2 + lambda ||f||^2.
        let n = 100;
        let sys = assemble::<f64>(&spec(2, 0, 3), n).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 / n as f64).sin() + 0.3).collect();
        let lambda = 1e-3;
        let x = solve(&sys, &complexify(&b), &SolveConfig::tikhonov(lambda)).unwrap();
        let xr: Vec<f64> = x.iter().map(|c| c.re).collect();
        let ax = sys.apply(&xr);
        let resid: Vec<f64> = ax.iter().zip(&b).map(|(a, bb)| a - bb).collect();
        let at_resid = sys.matrix().transpose() * DVector::from_column_slice(&resid);
        let at_b = sys.matrix().transpose() * DVector::from_column_slice(&b);
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max((at_resid[i] + lambda * xr[i]).abs());
        }
        assert!(worst < 1e-8 * at_b.norm(), "optimality residual {worst}");
    }

    #[test]
    fn tikhonov_with_tiny_lambda_matches_triangular() {
        let n = 100;
        let sys = assemble::<f64>(&spec(2, 0, 0), n).unwrap();
        let f: Vec<f64> = (0..n)
            .map(|j| {
                let rho = sys.midpoint(j);
                (1.0 - rho * rho).powi(2)
            })
            .collect();
        let b = complexify(&sys.apply(&f));
        let direct = solve(&sys, &b, &SolveConfig::triangular()).unwrap();
        let regularized = solve(&sys, &b, &SolveConfig::tikhonov(1e-12)).unwrap();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (d, r) in direct.iter().zip(&regularized) {
            num += (d - r).norm_sqr();
            den += d.norm_sqr();
        }
        assert!((num / den).sqrt() < 1e-6, "relative gap {}", (num / den).sqrt());
    }

    #[test]
    fn tsvd_and_tikhonov_agree_at_matched_cutoffs() {
        // The Tikhonov filter sigma^2/(sigma^2 + lambda) passes half height at
        // sigma = sqrt(lambda); matching the TSVD cutoff there keeps the two
        // solutions within 1% on the benign order-zero disk problem.
        let n = 200;
        let sys = assemble::<f64>(&spec(2, 0, 0), n).unwrap();
        let b: Vec<Complex<f64>> = (0..n)
            .map(|i| {
                let s = sys.node(i);
                Complex::new(
                    if s < 0.5 {
                        8.0 * std::f64::consts::PI * (0.25 - s * s).sqrt()
                    } else {
                        0.0
                    },
                    0.0,
                )
            })
            .collect();
        let report = condition_report(&sys).unwrap();
        let lambda = (1e-4 * report.sigma_max).powi(2);
        let tik = solve(&sys, &b, &SolveConfig::tikhonov(lambda)).unwrap();
        let tsvd = solve(&sys, &b, &SolveConfig::tsvd(1e-4)).unwrap();
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (a, c) in tik.iter().zip(&tsvd) {
            num += (a - c).norm_sqr();
            den += a.norm_sqr();
        }
        assert!((num / den).sqrt() < 0.01, "gap {}", (num / den).sqrt());
    }

    #[test]
    fn condition_number_grows_with_order() {
        let n = 120;
        let mut conds = Vec::new();
        for &l in &[0u32, 2, 4] {
            let sys = assemble::<f64>(&spec(2, 0, l), n).unwrap();
            conds.push(condition_report(&sys).unwrap().condition_number);
        }
        assert!(conds[0] < conds[1] && conds[1] < conds[2], "{conds:?}");
    }

    #[test]
    fn order_two_diagonal_dips_near_kernel_zero() {
        let sys = assemble::<f64>(&spec(2, 0, 2), 300).unwrap();
        let report = condition_report(&sys).unwrap();
        assert!(
            report.min_abs_diagonal < 2e-3 * report.max_abs_diagonal,
            "min {} max {}",
            report.min_abs_diagonal,
            report.max_abs_diagonal
        );
    }

    #[test]
    fn order_zero_diagonal_stays_positive() {
        let n = 60;
        let sys = assemble::<f64>(&spec(2, 0, 0), n).unwrap();
        let report = condition_report(&sys).unwrap();
        let expected = 4.0 * midpoint_weight::<f64>(n - 1, n - 1, n);
        assert!(report.min_abs_diagonal > 0.0);
        assert!((report.max_abs_diagonal - expected).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_config_and_dimensions() {
        let sys = assemble::<f64>(&spec(2, 0, 0), 10).unwrap();
        let b = vec![Complex::new(1.0, 0.0); 10];
        let mut cfg = SolveConfig::tikhonov(-1.0);
        assert!(solve(&sys, &b, &cfg).is_err());
        cfg = SolveConfig::tsvd(1.5);
        assert!(solve(&sys, &b, &cfg).is_err());
        let short = vec![Complex::new(1.0, 0.0); 5];
        assert!(solve(&sys, &short, &SolveConfig::triangular()).is_err());
        assert!(assemble::<f64>(&spec(2, 0, 0), 3).is_err());
    }

    #[test]
    fn midpoint_convergence_order_on_smooth_data() {
        // Smooth profile (1 - (rho/R)^2)^3 on [0, R]: data in closed form,
        // error vs N must contract with order >= 1.
        let r = 0.8f64;
        let exact_g = |s: f64| -> f64 {
            if s >= r {
                0.0
            } else {
                // 4 * (1/2) * (32/35) * (R^2 - s^2)^{7/2} / R^6
                64.0 / 35.0 * (r * r - s * s).powf(3.5) / r.powi(6)
            }
        };
        let profile = |rho: f64| -> f64 {
            if rho >= r {
                0.0
            } else {
                (1.0 - (rho / r).powi(2)).powi(3)
            }
        };
        let mut errors = Vec::new();
        for &n in &[100usize, 200, 400] {
            let sys = assemble::<f64>(&spec(2, 0, 0), n).unwrap();
            let b: Vec<Complex<f64>> = (0..n)
                .map(|i| Complex::new(exact_g(sys.node(i)), 0.0))
                .collect();
            let x = solve(&sys, &b, &SolveConfig::triangular()).unwrap();
            let mut worst = 0.0f64;
            for j in 0..n {
                worst = worst.max((x[j].re - profile(sys.midpoint(j))).abs());
            }
            errors.push(worst);
        }
        let order = (errors[0] / errors[2]).log2() / 2.0;
        assert!(order >= 1.0, "errors {errors:?} give order {order}");
    }
}
