//! Test phantoms: composable primitives with support strictly inside the
//! unit disk, rendered by evaluating each primitive at the pixel centers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, DEFAULT_MARGIN};
use crate::scalar::{real, real_of_i32, real_of_usize, Scalar};

/// Built-in radial profiles used by harmonic primitives and the 1D oracles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialProfile<S> {
    /// 1 on [0, radius], 0 beyond.
    Constant { radius: S },
    /// C-infinity bump exp(1 - 1/(1 - (r/radius)^2)) on [0, radius).
    SmoothBump { radius: S },
}

impl<S: Scalar> RadialProfile<S> {
    pub fn eval(&self, r: S) -> S {
        match *self {
            RadialProfile::Constant { radius } => {
                if r <= radius {
                    S::one()
                } else {
                    S::zero()
                }
            }
            RadialProfile::SmoothBump { radius } => {
                if r >= radius || r < S::zero() {
                    S::zero()
                } else {
                    let t = r / radius;
                    (S::one() - (S::one() - t * t).recip()).exp()
                }
            }
        }
    }

    pub fn support_radius(&self) -> S {
        match *self {
            RadialProfile::Constant { radius } | RadialProfile::SmoothBump { radius } => radius,
        }
    }
}

fn no_arc<S>() -> Option<(S, S)> {
    None
}

/// One additive phantom component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive<S> {
    Disk {
        center: (S, S),
        radius: S,
        amplitude: S,
    },
    /// Ring between the two radii; `arc` restricts it to the angular range
    /// [start, end] (radians, measured at the annulus center), which is how
    /// the smiley mouth segment is built. `None` keeps the full ring.
    Annulus {
        center: (S, S),
        inner_radius: S,
        outer_radius: S,
        amplitude: S,
        #[serde(default = "no_arc")]
        arc: Option<(S, S)>,
    },
    /// Real part of profile(r) * exp(i * order * angle) around the origin.
    Harmonic {
        order: i32,
        profile: RadialProfile<S>,
        amplitude: S,
    },
}

impl<S: Scalar> Primitive<S> {
    /// Largest distance from the origin at which the primitive can be nonzero.
    fn outer_extent(&self) -> S {
        match *self {
            Primitive::Disk {
                center, radius, ..
            } => (center.0 * center.0 + center.1 * center.1).sqrt() + radius,
            Primitive::Annulus {
                center,
                outer_radius,
                ..
            } => (center.0 * center.0 + center.1 * center.1).sqrt() + outer_radius,
            Primitive::Harmonic { profile, .. } => profile.support_radius(),
        }
    }

    fn eval(&self, x: S, y: S) -> S {
        match *self {
            Primitive::Disk {
                center,
                radius,
                amplitude,
            } => {
                let dx = x - center.0;
                let dy = y - center.1;
                if dx * dx + dy * dy <= radius * radius {
                    amplitude
                } else {
                    S::zero()
                }
            }
            Primitive::Annulus {
                center,
                inner_radius,
                outer_radius,
                amplitude,
                arc,
            } => {
                let dx = x - center.0;
                let dy = y - center.1;
                let r2 = dx * dx + dy * dy;
                if r2 < inner_radius * inner_radius || r2 > outer_radius * outer_radius {
                    return S::zero();
                }
                if let Some((start, end)) = arc {
                    let tau = S::PI() * real::<S>(2.0);
                    let mut theta = dy.atan2(dx);
                    if theta < S::zero() {
                        theta += tau;
                    }
                    let wrap = |a: S| -> S {
                        let mut a = a % tau;
                        if a < S::zero() {
                            a += tau;
                        }
                        a
                    };
                    let (s, e) = (wrap(start), wrap(end));
                    let inside = if s <= e {
                        theta >= s && theta <= e
                    } else {
                        theta >= s || theta <= e
                    };
                    if !inside {
                        return S::zero();
                    }
                }
                amplitude
            }
            Primitive::Harmonic {
                order,
                profile,
                amplitude,
            } => {
                let r = (x * x + y * y).sqrt();
                let p = profile.eval(r);
                if p == S::zero() {
                    return S::zero();
                }
                let alpha = y.atan2(x);
                amplitude * p * (real_of_i32::<S>(order) * alpha).cos()
            }
        }
    }
}

/// A list of additive primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec<S> {
    pub primitives: Vec<Primitive<S>>,
}

impl<S: Scalar> PhantomSpec<S> {
    /// Single centered disk.
    pub fn centered_disk(radius: S, amplitude: S) -> Self {
        Self {
            primitives: vec![Primitive::Disk {
                center: (S::zero(), S::zero()),
                radius,
                amplitude,
            }],
        }
    }

    /// The built-in smiley: face disk, two eye disks and a mouth arc.
    ///
    /// All amplitudes are positive so the rendered phantom is nonnegative.
    /// The geometry is fixed here (face radius 0.8; eyes radius 0.1 at
    /// (+/-0.3, 0.3); mouth ring 0.45..0.6 around (0, 0.2) over the lower
    /// arc 205deg..335deg), everything inside radius 0.95.
    pub fn smiley() -> Self {
        let deg = |d: f64| real::<S>(d.to_radians());
        Self {
            primitives: vec![
                Primitive::Disk {
                    center: (S::zero(), S::zero()),
                    radius: real(0.8),
                    amplitude: S::one(),
                },
                Primitive::Disk {
                    center: (real(-0.3), real(0.3)),
                    radius: real(0.1),
                    amplitude: S::one(),
                },
                Primitive::Disk {
                    center: (real(0.3), real(0.3)),
                    radius: real(0.1),
                    amplitude: S::one(),
                },
                Primitive::Annulus {
                    center: (S::zero(), real(0.2)),
                    inner_radius: real(0.45),
                    outer_radius: real(0.6),
                    amplitude: S::one(),
                    arc: Some((deg(205.0), deg(335.0))),
                },
            ],
        }
    }

    /// Sum of all primitive values at a point.
    pub fn eval(&self, x: S, y: S) -> S {
        self.primitives.iter().map(|p| p.eval(x, y)).sum()
    }

    /// Checks that every primitive fits inside radius 1 - margin.
    pub fn validate(&self, margin: S) -> Result<()> {
        let limit = S::one() - margin;
        for (i, p) in self.primitives.iter().enumerate() {
            let extent = p.outer_extent();
            if !(extent < limit) {
                return Err(Error::PrimitiveOutsideSupport(format!(
                    "primitive {i} reaches radius {extent} but must stay below {limit}"
                )));
            }
        }
        Ok(())
    }
}

fn check_size(size: usize) -> Result<()> {
    if size < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid size {size} below the minimum of 16"
        )));
    }
    Ok(())
}

/// Renders a phantom on a size x size grid with the default support margin.
pub fn render_phantom<S: Scalar>(spec: &PhantomSpec<S>, size: usize) -> Result<ImageGrid<S>> {
    render_phantom_with_margin(spec, size, real(DEFAULT_MARGIN))
}

/// Renders a phantom with an explicit support margin.
pub fn render_phantom_with_margin<S: Scalar>(
    spec: &PhantomSpec<S>,
    size: usize,
    margin: S,
) -> Result<ImageGrid<S>> {
    check_size(size)?;
    spec.validate(margin)?;
    let mut grid = ImageGrid::zeros(size, size, margin)?;
    for row in 0..size {
        let y = grid.pixel_center_y(row);
        for col in 0..size {
            let x = grid.pixel_center_x(col);
            grid.set(row, col, spec.eval(x, y));
        }
    }
    debug_assert!(grid.check_support().is_ok());
    Ok(grid)
}

/// Renders a phantom by area-averaging `sub x sub` samples per pixel.
///
/// Point sampling at pixel centers shifts sharp edges by up to half a pixel,
/// which dominates the error of quadrature oracles evaluated on rasterized
/// indicators. Averaging over the pixel footprint represents the analytic
/// phantom to second order and keeps ray integrals faithful.
pub fn render_phantom_supersampled<S: Scalar>(
    spec: &PhantomSpec<S>,
    size: usize,
    sub: usize,
) -> Result<ImageGrid<S>> {
    check_size(size)?;
    let margin = real::<S>(DEFAULT_MARGIN);
    spec.validate(margin)?;
    if sub == 0 {
        return Err(Error::InvalidArgument("subsample count must be positive".into()));
    }
    let mut grid = ImageGrid::zeros(size, size, margin)?;
    let pixel = real::<S>(2.0) / real_of_usize::<S>(size);
    let subf = real_of_usize::<S>(sub);
    let norm = (subf * subf).recip();
    for row in 0..size {
        let y0 = grid.pixel_center_y(row) - pixel * real::<S>(0.5);
        for col in 0..size {
            let x0 = grid.pixel_center_x(col) - pixel * real::<S>(0.5);
            let mut acc = S::zero();
            for sy in 0..sub {
                let y = y0 + pixel * (real_of_usize::<S>(sy) + real::<S>(0.5)) / subf;
                for sx in 0..sub {
                    let x = x0 + pixel * (real_of_usize::<S>(sx) + real::<S>(0.5)) / subf;
                    acc += spec.eval(x, y);
                }
            }
            grid.set(row, col, acc * norm);
        }
    }
    // Area averaging can bleed a sliver of edge coverage into pixels whose
    // center sits just outside the support radius; clear those explicitly.
    let limit = S::one() - margin;
    for row in 0..size {
        let y = grid.pixel_center_y(row);
        for col in 0..size {
            let x = grid.pixel_center_x(col);
            if (x * x + y * y).sqrt() >= limit {
                grid.set(row, col, S::zero());
            }
        }
    }
    Ok(grid)
}

/// Renders profile(r) * exp(i * order * angle) as (real, imaginary) grids.
///
/// Ground truth for the single-order solver tests; the profile must be
/// supported inside radius 1 - margin.
pub fn render_harmonic_phantom<S: Scalar>(
    order: i32,
    profile: RadialProfile<S>,
    size: usize,
) -> Result<(ImageGrid<S>, ImageGrid<S>)> {
    check_size(size)?;
    let margin = real::<S>(DEFAULT_MARGIN);
    if !(profile.support_radius() < S::one() - margin) {
        return Err(Error::PrimitiveOutsideSupport(format!(
            "radial profile reaches {} but must stay below {}",
            profile.support_radius(),
            S::one() - margin
        )));
    }
    let mut re = ImageGrid::zeros(size, size, margin)?;
    let mut im = ImageGrid::zeros(size, size, margin)?;
    let lf = real_of_i32::<S>(order);
    for row in 0..size {
        let y = re.pixel_center_y(row);
        for col in 0..size {
            let x = re.pixel_center_x(col);
            let r = (x * x + y * y).sqrt();
            let p = profile.eval(r);
            if p == S::zero() {
                continue;
            }
            let alpha = y.atan2(x);
            re.set(row, col, p * (lf * alpha).cos());
            im.set(row, col, p * (lf * alpha).sin());
        }
    }
    Ok((re, im))
}
