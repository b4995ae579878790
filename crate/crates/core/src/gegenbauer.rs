//! Gegenbauer polynomials normalized so that the value at x = 1 is 1.
//!
//! The index mu relates to the ambient dimension n via mu = (n - 2)/2, so
//! mu = 0 gives the Chebyshev polynomials of the first kind (cos(l*arccos x))
//! and mu = 1/2 gives the Legendre polynomials. With this normalization the
//! three-term recurrence reads
//!
//!   (k + 2*mu - 1) P_k(x) = 2 (k + mu - 1) x P_{k-1}(x) - (k - 1) P_{k-2}(x)
//!
//! with P_0 = 1, P_1 = x, and stays well defined in the Chebyshev limit.

use crate::error::{Error, Result};
use crate::scalar::{real, real_of_usize, Scalar};

fn check_x<S: Scalar>(x: S) -> Result<()> {
    if x < -S::one() || x > S::one() {
        return Err(Error::InvalidArgument(format!(
            "gegenbauer evaluation point {x} outside [-1, 1]"
        )));
    }
    Ok(())
}

fn check_mu<S: Scalar>(mu: S) -> Result<()> {
    if mu < S::zero() || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "gegenbauer index mu = {mu} must be nonnegative"
        )));
    }
    Ok(())
}

/// Value of the normalized Gegenbauer polynomial of the given degree.
///
/// Evaluation is restricted to x in [-1, 1]. For mu = 0 the Chebyshev
/// convention cos(degree * arccos x) applies.
pub fn gegenbauer<S: Scalar>(degree: u32, mu: S, x: S) -> Result<S> {
    check_x(x)?;
    check_mu(mu)?;
    match degree {
        0 => return Ok(S::one()),
        1 => return Ok(x),
        _ => {}
    }
    if mu == S::zero() {
        let l = real_of_usize::<S>(degree as usize);
        return Ok((l * x.acos()).cos());
    }
    Ok(recurrence(degree, mu, x)[0])
}

/// First or second derivative of the normalized Gegenbauer polynomial.
///
/// Derivatives come from the differentiated recurrence (mu > 0) or from the
/// differentiated trigonometric form (mu = 0); the latter is singular at
/// |x| = 1 for the second derivative, which is rejected.
pub fn gegenbauer_deriv<S: Scalar>(degree: u32, mu: S, x: S, order: u32) -> Result<S> {
    check_x(x)?;
    check_mu(mu)?;
    match order {
        1 | 2 => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "derivative order {order} not in {{1, 2}}"
            )))
        }
    }
    if mu == S::zero() {
        return chebyshev_deriv(degree, x, order);
    }
    let vals = recurrence(degree, mu, x);
    Ok(if order == 1 { vals[1] } else { vals[2] })
}

/// Runs the normalized recurrence, returning (value, first, second derivative).
fn recurrence<S: Scalar>(degree: u32, mu: S, x: S) -> [S; 3] {
    let one = S::one();
    let two = real::<S>(2.0);
    match degree {
        0 => return [one, S::zero(), S::zero()],
        1 => return [x, one, S::zero()],
        _ => {}
    }
    // (p, dp, ddp) for degrees k-2 and k-1.
    let mut prev = [one, S::zero(), S::zero()];
    let mut cur = [x, one, S::zero()];
    for k in 2..=degree {
        let kf = real_of_usize::<S>(k as usize);
        let lead = kf + two * mu - one;
        let a = two * (kf + mu - one);
        let b = kf - one;
        let p = (a * x * cur[0] - b * prev[0]) / lead;
        let dp = (a * (cur[0] + x * cur[1]) - b * prev[1]) / lead;
        let ddp = (a * (two * cur[1] + x * cur[2]) - b * prev[2]) / lead;
        prev = cur;
        cur = [p, dp, ddp];
    }
    cur
}

fn chebyshev_deriv<S: Scalar>(degree: u32, x: S, order: u32) -> Result<S> {
    let one = S::one();
    let l = real_of_usize::<S>(degree as usize);
    let at_edge = x == one || x == -one;
    if order == 1 {
        if at_edge {
            // lim_{x->1} l sin(l acos x)/sin(acos x) = l^2, with parity at -1.
            let sign = if x > S::zero() || degree % 2 == 1 {
                one
            } else {
                -one
            };
            return Ok(sign * l * l);
        }
        let theta = x.acos();
        return Ok(l * (l * theta).sin() / theta.sin());
    }
    if at_edge {
        return Err(Error::InvalidArgument(
            "second Chebyshev derivative is singular at |x| = 1".into(),
        ));
    }
    let theta = x.acos();
    let s2 = one - x * x;
    Ok(l * x * (l * theta).sin() / (s2 * s2.sqrt()) - l * l * (l * theta).cos() / s2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_is_one() {
        for &mu in &[0.0f64, 0.5, 1.0, 2.5] {
            for &x in &[-1.0, -0.3, 0.0, 0.7, 1.0] {
                assert_eq!(gegenbauer(0, mu, x).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn degree_one_is_identity() {
        for &mu in &[0.0f64, 0.5, 1.0] {
            for &x in &[-0.9, 0.1, 0.5] {
                assert_eq!(gegenbauer(1, mu, x).unwrap(), x);
            }
        }
    }

    #[test]
    fn legendre_value_matches_frozen_reference() {
        // Independent recurrence oracle: P2(x) = (3x^2 - 1)/2, P2(0.5) = -0.125.
        let v = gegenbauer(2, 0.5f64, 0.5).unwrap();
        assert!((v - (-0.125)).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn endpoint_normalization_is_exact() {
        for l in 0..=16u32 {
            for &mu in &[0.0f64, 0.5, 1.0, 1.5] {
                let v = gegenbauer(l, mu, 1.0).unwrap();
                assert_eq!(v, 1.0, "C_{l}^{mu}(1)");
            }
        }
    }

    #[test]
    fn parity_symmetry() {
        // C(-x) = (-1)^l C(x), checked over a grid of degrees, indices and points.
        for l in 0..=16u32 {
            for &mu in &[0.0f64, 0.5, 1.0] {
                for k in 0..64 {
                    let x = -1.0 + 2.0 * (k as f64 + 0.5) / 64.0;
                    let a = gegenbauer(l, mu, x).unwrap();
                    let b = gegenbauer(l, mu, -x).unwrap();
                    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((b - sign * a).abs() < 1e-12, "l={l} mu={mu} x={x}");
                }
            }
        }
    }

    #[test]
    fn chebyshev_consistency_for_mu_zero() {
        for l in 0..=16u32 {
            for k in 0..64 {
                let x = -1.0 + 2.0 * (k as f64 + 0.5) / 64.0;
                let v = gegenbauer(l, 0.0f64, x).unwrap();
                let c = (l as f64 * x.acos()).cos();
                assert!((v - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn first_derivative_of_degree_one() {
        for &mu in &[0.0f64, 0.5, 2.0] {
            assert!((gegenbauer_deriv(1, mu, 0.3, 1).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_parity() {
        // C'(-x) = (-1)^{l+1} C'(x).
        let d1 = gegenbauer_deriv(3, 0.5f64, 0.3, 1).unwrap();
        let d2 = gegenbauer_deriv(3, 0.5f64, -0.3, 1).unwrap();
        assert!((d2 - d1).abs() < 1e-12, "odd degree: even derivative");
        let d1 = gegenbauer_deriv(4, 0.5f64, 0.3, 1).unwrap();
        let d2 = gegenbauer_deriv(4, 0.5f64, -0.3, 1).unwrap();
        assert!((d2 + d1).abs() < 1e-12, "even degree: odd derivative");
    }

    #[test]
    fn ode_residual_vanishes() {
        // (1 - x^2) C'' - (n - 1) x C' + l (l + n - 2) C = 0 with n = 2 mu + 2.
        let (l, mu) = (5u32, 0.5f64);
        let n = 2.0 * mu + 2.0;
        let mut state = 88172645463325252u64;
        for _ in 0..20 {
            // xorshift64 keeps the sample points reproducible.
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let x = (state as f64 / u64::MAX as f64) * 1.9 - 0.95;
            let c = gegenbauer(l, mu, x).unwrap();
            let dc = gegenbauer_deriv(l, mu, x, 1).unwrap();
            let ddc = gegenbauer_deriv(l, mu, x, 2).unwrap();
            let lf = l as f64;
            let res = (1.0 - x * x) * ddc - (n - 1.0) * x * dc + lf * (lf + n - 2.0) * c;
            assert!(res.abs() < 1e-9, "x={x} res={res}");
        }
    }

    #[test]
    fn chebyshev_second_derivative_matches_polynomial() {
        // T2 = 2x^2 - 1 and T3 = 4x^3 - 3x have simple closed-form derivatives.
        for &x in &[-0.8f64, -0.2, 0.4, 0.9] {
            assert!((gegenbauer_deriv(2, 0.0, x, 2).unwrap() - 4.0).abs() < 1e-10);
            assert!((gegenbauer_deriv(3, 0.0, x, 2).unwrap() - 24.0 * x).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_out_of_range_points_and_orders() {
        assert!(gegenbauer(3, 0.5f64, 1.5).is_err());
        assert!(gegenbauer(3, -0.5f64, 0.5).is_err());
        assert!(gegenbauer_deriv(3, 0.0f64, 1.0, 2).is_err());
        assert!(gegenbauer_deriv(3, 0.5f64, 0.5, 3).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let v = gegenbauer(2, 0.5f32, 0.5).unwrap();
        assert!((v - (-0.125)).abs() < 1e-6);
    }
}
