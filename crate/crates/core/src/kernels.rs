//! Kernels of the per-order generalized Abel equations, their diagonal zeros,
//! and the numeric verification of the uniqueness condition.
//!
//! Two equivalent kernel forms are provided. With q = m + n - 2 and
//! C = the normalized Gegenbauer polynomial of index (n - 2)/2:
//!
//! * `kernel_k(psi, rho)` on the opening-angle/radius domain,
//!     K(psi, rho) = rho^q * sum_{sigma = +/-1} sigma^l
//!                   sin(asin(sin(psi)/rho) - sigma*psi)^q
//!                   * C(cos(asin(sin(psi)/rho) - sigma*psi));
//! * `kernel_f(t, s)` on the triangle 0 <= s <= t <= 1 reached by the
//!   substitution t = 1 - sin(psi)^2, s = 1 - rho^2,
//!     F(t, s) = sum_sigma sigma^l (sqrt(t) - sigma*sqrt(t-s))^q
//!               * C((sqrt(t)*sqrt(t-s) + sigma*(1-t)) / sqrt(1-s)),
//!   related by K(psi, rho) = sin(psi)^q * F(1 - sin(psi)^2, 1 - rho^2).
//!
//! The diagonal restriction F(s, s) = 2 s^{q/2} C(sqrt(1-s)) inherits the
//! zeros of the Gegenbauer polynomial; at each such zero the gradient
//! (beta1, beta2) of F must satisfy 1 + beta1/(2(beta1 + beta2)) > 0 for the
//! equation to stay uniquely solvable, and that value is checked here by
//! finite differences against its closed form m + (n + 1)/2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::{gegenbauer, gegenbauer_deriv};
use crate::quad;
use crate::scalar::{real, real_of_i32, real_of_usize, Scalar};

/// Parameters of one per-order kernel: dimension n, radial weight m, order l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KernelSpec {
    /// Ambient dimension n >= 2.
    pub dim: u32,
    /// Radial weight exponent m.
    pub weight: i32,
    /// Harmonic order l >= 0.
    pub order: u32,
}

impl KernelSpec {
    pub fn new(dim: u32, weight: i32, order: u32) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "dimension {dim} must be at least 2"
            )));
        }
        Ok(Self { dim, weight, order })
    }

    /// Combined exponent q = m + n - 2.
    pub fn exponent(&self) -> i32 {
        self.weight + self.dim as i32 - 2
    }

    /// Gegenbauer index (n - 2)/2.
    pub fn index<S: Scalar>(&self) -> S {
        real_of_i32::<S>(self.dim as i32 - 2) / real::<S>(2.0)
    }

    /// Whether m > -(n + 1)/2, the regime in which uniqueness is guaranteed.
    pub fn in_uniqueness_regime(&self) -> bool {
        2 * self.weight > -(self.dim as i32 + 1)
    }

    /// Surface measure |S^{n-2}| of the unit sphere in n - 1 dimensions.
    pub fn surface_measure<S: Scalar>(&self) -> S {
        sphere_surface::<S>(self.dim as i32 - 2)
    }
}

/// |S^d| for d >= 0 via |S^0| = 2, |S^1| = 2 pi, |S^d| = 2 pi |S^{d-2}|/(d - 1).
pub fn sphere_surface<S: Scalar>(d: i32) -> S {
    assert!(d >= 0, "sphere dimension must be nonnegative");
    let tau = real::<S>(2.0) * S::PI();
    let mut dim = if d % 2 == 0 { 0 } else { 1 };
    let mut area = if d % 2 == 0 { real::<S>(2.0) } else { tau };
    while dim < d {
        dim += 2;
        area = area * tau / real_of_i32::<S>(dim - 1);
    }
    area
}

pub(crate) fn clamped_gegenbauer<S: Scalar>(order: u32, mu: S, x: S) -> S {
    // Arguments provably lie in [-1, 1]; clamp away rounding spill.
    let x = x.min(S::one()).max(-S::one());
    gegenbauer(order, mu, x).expect("clamped argument is in range")
}

fn sigma_sign<S: Scalar>(order: u32, sigma: i32) -> S {
    if sigma < 0 && order % 2 == 1 {
        -S::one()
    } else {
        S::one()
    }
}

pub(crate) fn kernel_k_unchecked<S: Scalar>(spec: &KernelSpec, psi: S, rho: S) -> S {
    let q = spec.exponent();
    let mu = spec.index::<S>();
    let ratio = (psi.sin() / rho).min(S::one());
    let theta = ratio.asin();
    let mut sum = S::zero();
    for sigma in [1i32, -1] {
        let angle = theta - real_of_i32::<S>(sigma) * psi;
        let term = angle.sin().powi(q) * clamped_gegenbauer(spec.order, mu, angle.cos());
        sum += sigma_sign::<S>(spec.order, sigma) * term;
    }
    rho.powi(q) * sum
}

/// Kernel on the opening-angle/radius domain; requires rho >= sin(psi).
pub fn kernel_k<S: Scalar>(spec: &KernelSpec, psi: S, rho: S) -> Result<S> {
    if psi < S::zero() || psi > S::FRAC_PI_2() {
        return Err(Error::InvalidArgument(format!(
            "opening angle {psi} outside [0, pi/2]"
        )));
    }
    if rho <= S::zero() || rho < psi.sin() {
        return Err(Error::InvalidArgument(format!(
            "radius {rho} below sin(psi) = {}",
            psi.sin()
        )));
    }
    Ok(kernel_k_unchecked(spec, psi, rho))
}

pub(crate) fn kernel_f_unchecked<S: Scalar>(spec: &KernelSpec, t: S, s: S) -> S {
    let q = spec.exponent();
    let mu = spec.index::<S>();
    let rt = t.sqrt();
    let d = (t - s).max(S::zero()).sqrt();
    let denom = (S::one() - s).sqrt();
    let mut sum = S::zero();
    for sigma in [1i32, -1] {
        let sg = real_of_i32::<S>(sigma);
        let base = rt - sg * d;
        let arg = (rt * d + sg * (S::one() - t)) / denom;
        let term = base.powi(q) * clamped_gegenbauer(spec.order, mu, arg);
        sum += sigma_sign::<S>(spec.order, sigma) * term;
    }
    sum
}

/// Kernel on the triangle domain 0 <= s <= t <= 1, s < 1.
pub fn kernel_f<S: Scalar>(spec: &KernelSpec, t: S, s: S) -> Result<S> {
    if s > t {
        return Err(Error::InvalidArgument(format!(
            "kernel arguments need s <= t, got s = {s}, t = {t}"
        )));
    }
    if s < S::zero() || s >= S::one() || t > S::one() {
        return Err(Error::InvalidArgument(format!(
            "kernel arguments (t, s) = ({t}, {s}) outside 0 <= s <= t <= 1, s < 1"
        )));
    }
    Ok(kernel_f_unchecked(spec, t, s))
}

/// Diagonal restriction F(s, s) = 2 s^{q/2} C(sqrt(1 - s)), evaluated directly.
pub fn kernel_f_diagonal<S: Scalar>(spec: &KernelSpec, s: S) -> Result<S> {
    kernel_f(spec, s, s)
}

/// All zeros of s -> F(s, s) in [a, 1), sorted ascending.
///
/// Sign-scans C(sqrt(1 - s)) on a fine grid, bisects each bracket to 1e-12
/// and keeps only roots at which the centered difference of the diagonal is
/// nonzero (simplicity check).
pub fn diagonal_zeros<S: Scalar>(spec: &KernelSpec, lower: S) -> Result<Vec<S>> {
    if lower <= S::zero() || lower >= S::one() {
        return Err(Error::InvalidArgument(format!(
            "zero-search lower bound {lower} outside (0, 1)"
        )));
    }
    let mu = spec.index::<S>();
    let h = |s: S| -> S {
        clamped_gegenbauer(spec.order, mu, (S::one() - s).max(S::zero()).sqrt())
    };
    const SCAN: usize = 8192;
    let one = S::one();
    let span = one - lower;
    let mut zeros = Vec::new();
    let mut prev_s = lower;
    let mut prev_v = h(prev_s);
    for k in 1..SCAN {
        let s = lower + span * real_of_usize::<S>(k) / real_of_usize::<S>(SCAN);
        let v = h(s);
        if prev_v == S::zero() {
            zeros.push(prev_s);
        } else if (prev_v > S::zero()) != (v > S::zero()) && v != S::zero() {
            zeros.push(bisect(&h, prev_s, s, prev_v));
        }
        prev_s = s;
        prev_v = v;
    }
    if prev_v == S::zero() {
        zeros.push(prev_s);
    }
    // Simplicity: centered difference of the diagonal away from zero.
    let delta = real::<S>(1e-6);
    zeros.retain(|&s0| {
        let fwd = kernel_f_unchecked(spec, s0 + delta, s0 + delta);
        let bwd = kernel_f_unchecked(spec, s0 - delta, s0 - delta);
        ((fwd - bwd) / (real::<S>(2.0) * delta)).abs() > real::<S>(1e-10)
    });
    Ok(zeros)
}

fn bisect<S: Scalar, F: Fn(S) -> S>(f: &F, mut a: S, mut b: S, fa: S) -> S {
    let tol = real::<S>(1e-12);
    let mut positive_left = fa > S::zero();
    // 80 halvings are ample for 1e-12 on a unit interval.
    for _ in 0..80 {
        if b - a <= tol {
            break;
        }
        let mid = (a + b) * real::<S>(0.5);
        let v = f(mid);
        if v == S::zero() {
            return mid;
        }
        if (v > S::zero()) == positive_left {
            a = mid;
            positive_left = v > S::zero();
        } else {
            b = mid;
        }
    }
    (a + b) * real::<S>(0.5)
}

/// One-sided quadratic finite difference with a single Richardson step.
fn one_sided_derivative<S: Scalar, F: Fn(S) -> S>(f: &F, at: S, step: S) -> S {
    let d = |h: S| -> S {
        let f0 = f(at);
        let f1 = f(at + h);
        let f2 = f(at + h + h);
        (-real::<S>(3.0) * f0 + real::<S>(4.0) * f1 - f2) / (real::<S>(2.0) * h)
    };
    let coarse = d(step);
    let fine = d(step * real::<S>(0.5));
    (real::<S>(4.0) * fine - coarse) / real::<S>(3.0)
}

/// Centered finite difference with a single Richardson step.
fn centered_derivative<S: Scalar, F: Fn(S) -> S>(f: &F, at: S, step: S) -> S {
    let d = |h: S| -> S { (f(at + h) - f(at - h)) / (real::<S>(2.0) * h) };
    let coarse = d(step);
    let fine = d(step * real::<S>(0.5));
    (real::<S>(4.0) * fine - coarse) / real::<S>(3.0)
}

/// Outcome of the uniqueness-condition check at one diagonal zero.
#[derive(Debug, Clone, Serialize)]
pub struct DiagonalZeroCheck<S> {
    /// Location of the diagonal zero.
    pub s0: S,
    /// Finite-difference gradient of F at (s0, s0).
    pub beta1: S,
    pub beta2: S,
    /// beta1 + beta2 from finite differences along the diagonal.
    pub gradient_sum: S,
    /// Closed-form diagonal derivative -s0^{q/2} C'(sqrt(1-s0))/sqrt(1-s0).
    pub gradient_sum_analytic: S,
    /// Relative deviation between the two gradient sums.
    pub gradient_sum_rel_err: S,
    /// 1 + beta1/(2(beta1 + beta2)) from finite differences.
    pub condition_value: S,
    /// Same condition computed through the Volterra-reduced kernel,
    /// 1 + alpha1/(alpha1 + alpha2) with alpha1 = d1 V(s0, s0).
    pub volterra_condition_value: S,
    /// First partial of the Volterra kernel at the zero (equals pi/2 * beta1).
    pub volterra_alpha1: S,
    /// Expected value m + (n + 1)/2.
    pub expected: S,
    /// |condition_value - expected| <= 1e-4 and gradient sums within 1e-6.
    pub pass: bool,
}

/// Verifies the uniqueness condition at every diagonal zero in [a, 1).
///
/// The gradient of F is estimated by finite differences with step 1e-5,
/// one-sided toward the admissible region across the diagonal, and the sum
/// beta1 + beta2 is cross-checked against the closed-form diagonal slope.
pub fn check_uniqueness_condition<S: Scalar>(
    spec: &KernelSpec,
    lower: S,
) -> Result<Vec<DiagonalZeroCheck<S>>> {
    let zeros = diagonal_zeros(spec, lower)?;
    let step = real::<S>(1e-5);
    let two = real::<S>(2.0);
    let expected = real_of_i32::<S>(spec.weight)
        + real_of_i32::<S>(spec.dim as i32 + 1) / two;
    let mut checks = Vec::with_capacity(zeros.len());
    for &s0 in &zeros {
        // d/dt F(t, s0) going up in t keeps t >= s.
        let beta1 = one_sided_derivative(&|t| kernel_f_unchecked(spec, t, s0), s0, step);
        // d/ds F(s0, s) going down in s keeps s <= t (note the sign flip).
        let beta2 =
            -one_sided_derivative(&|h| kernel_f_unchecked(spec, s0, s0 + s0 - h), s0, step);
        let gradient_sum =
            centered_derivative(&|s| kernel_f_unchecked(spec, s, s), s0, step);
        let x0 = (S::one() - s0).sqrt();
        let q_half = real_of_i32::<S>(spec.exponent()) / two;
        let gradient_sum_analytic = -s0.powf(q_half) / x0
            * gegenbauer_deriv(spec.order, spec.index::<S>(), x0, 1)?;
        let gradient_sum_rel_err = if gradient_sum_analytic != S::zero() {
            ((gradient_sum - gradient_sum_analytic) / gradient_sum_analytic).abs()
        } else {
            gradient_sum.abs()
        };
        let denom = beta1 + beta2;
        let condition_value = if denom != S::zero() {
            S::one() + beta1 / (two * denom)
        } else {
            S::nan()
        };
        // Volterra-reduced form: alpha1 = d1 V(s0, s0), alpha1 + alpha2 = dV(s,s)/ds.
        let vtol = real::<S>(1e-11);
        let vstep = real::<S>(1e-4);
        let alpha1 = one_sided_derivative(
            &|u| volterra_kernel_value(spec, u, s0, vtol),
            s0,
            vstep,
        );
        let alpha_sum = centered_derivative(
            &|s| volterra_kernel_value(spec, s, s, vtol),
            s0,
            vstep,
        );
        let volterra_condition_value = if alpha_sum != S::zero() {
            S::one() + alpha1 / alpha_sum
        } else {
            S::nan()
        };
        let pass = denom != S::zero()
            && (condition_value - expected).abs() <= real::<S>(1e-4)
            && gradient_sum_rel_err <= real::<S>(1e-6);
        checks.push(DiagonalZeroCheck {
            s0,
            beta1,
            beta2,
            gradient_sum,
            gradient_sum_analytic,
            gradient_sum_rel_err,
            condition_value,
            volterra_condition_value,
            volterra_alpha1: alpha1,
            expected,
            pass,
        });
    }
    Ok(checks)
}

fn volterra_kernel_value<S: Scalar>(spec: &KernelSpec, u: S, s: S, tol: S) -> S {
    // V(u, s) = int_0^1 F(s + (u-s) r, s) / sqrt(r (1-r)) dr; r = sin^2(theta)
    // removes both endpoint singularities and leaves a smooth integrand.
    let two = real::<S>(2.0);
    let span = u - s;
    quad::integrate(
        |theta: S| {
            let sin = theta.sin();
            let t = s + span * sin * sin;
            two * kernel_f_unchecked(spec, t, s)
        },
        S::zero(),
        S::FRAC_PI_2(),
        tol,
    )
    .expect("smooth integrand after substitution")
}

/// Volterra-reduced kernel V(u, s) = int_0^1 F(s + (u-s)r, s)/sqrt(r(1-r)) dr.
pub fn volterra_kernel<S: Scalar>(spec: &KernelSpec, u: S, s: S) -> Result<S> {
    if s > u {
        return Err(Error::InvalidArgument(format!(
            "volterra kernel needs s <= u, got s = {s}, u = {u}"
        )));
    }
    if s < S::zero() || s >= S::one() || u > S::one() {
        return Err(Error::InvalidArgument(format!(
            "volterra kernel arguments (u, s) = ({u}, {s}) out of range"
        )));
    }
    Ok(volterra_kernel_value(spec, u, s, real::<S>(1e-9)))
}

/// Per-spec section of the verification report.
#[derive(Debug, Clone, Serialize)]
pub struct KernelVerification<S> {
    pub dim: u32,
    pub weight: i32,
    pub order: u32,
    pub uniqueness_regime: bool,
    pub zeros: Vec<S>,
    pub checks: Vec<DiagonalZeroCheck<S>>,
    pub pass: bool,
}

/// Report of the uniqueness verification over a set of kernel parameters.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport<S> {
    pub lower_bound: S,
    pub cases: Vec<KernelVerification<S>>,
    pub all_pass: bool,
}

/// Runs [`check_uniqueness_condition`] for each (dim, weight) x order combination.
pub fn verification_report<S: Scalar>(
    dims_weights: &[(u32, i32)],
    max_order: u32,
    lower: S,
) -> Result<VerificationReport<S>> {
    let mut cases = Vec::new();
    for &(dim, weight) in dims_weights {
        for order in 0..=max_order {
            let spec = KernelSpec::new(dim, weight, order)?;
            let zeros = diagonal_zeros(&spec, lower)?;
            let checks = check_uniqueness_condition(&spec, lower)?;
            let pass = checks.iter().all(|c| c.pass);
            cases.push(KernelVerification {
                dim,
                weight,
                order,
                uniqueness_regime: spec.in_uniqueness_regime(),
                zeros,
                checks,
                pass,
            });
        }
    }
    let all_pass = cases.iter().all(|c| c.pass);
    Ok(VerificationReport {
        lower_bound: lower,
        cases,
        all_pass,
    })
}
