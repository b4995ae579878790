//! File formats: raw little-endian f64 arrays with JSON sidecars, ASCII PGM
//! quicklooks and CSV sinogram export.
//!
//! The sidecar lives next to the data file with its extension replaced by
//! `.json`. Complex arrays (harmonics, profiles) interleave (re, im) pairs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::Sinogram;
use crate::grid::ImageGrid;
use crate::harmonics::{HarmonicTable, RadialProfileSet};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Sidecar {
    Image {
        width: usize,
        height: usize,
        margin: f64,
    },
    Sinogram {
        #[serde(rename = "M")]
        vertices: usize,
        #[serde(rename = "N")]
        angles: usize,
        #[serde(rename = "m")]
        weight: i32,
    },
    Harmonics {
        #[serde(rename = "M")]
        vertices: usize,
        #[serde(rename = "N")]
        angles: usize,
    },
    Profiles {
        #[serde(rename = "M")]
        vertices: usize,
        #[serde(rename = "N")]
        radial_count: usize,
    },
}

/// Path of the JSON sidecar belonging to a data file.
pub fn sidecar_path(data: &Path) -> PathBuf {
    let mut p = data.to_path_buf();
    p.set_extension("json");
    p
}

fn write_payload(path: &Path, sidecar: &Sidecar, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(sidecar)?)?;
    Ok(())
}

fn read_payload(path: &Path) -> Result<(Sidecar, Vec<f64>)> {
    let sidecar: Sidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let bytes = fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::FormatMismatch(format!(
            "raw file {} has {} bytes, not a multiple of 8",
            path.display(),
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((sidecar, values))
}

fn interleave(values: &[Complex<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len() * 2);
    for c in values {
        out.push(c.re);
        out.push(c.im);
    }
    out
}

fn deinterleave(values: &[f64]) -> Result<Vec<Complex<f64>>> {
    if values.len() % 2 != 0 {
        return Err(Error::FormatMismatch(
            "interleaved complex payload has odd length".into(),
        ));
    }
    Ok(values
        .chunks_exact(2)
        .map(|p| Complex::new(p[0], p[1]))
        .collect())
}

pub fn write_image(path: &Path, grid: &ImageGrid<f64>) -> Result<()> {
    let sidecar = Sidecar::Image {
        width: grid.width(),
        height: grid.height(),
        margin: grid.margin(),
    };
    write_payload(path, &sidecar, grid.values())
}

pub fn read_image(path: &Path) -> Result<ImageGrid<f64>> {
    match read_payload(path)? {
        (
            Sidecar::Image {
                width,
                height,
                margin,
            },
            values,
        ) => ImageGrid::from_values(width, height, margin, values),
        _ => Err(Error::FormatMismatch(format!(
            "{} is not an image file",
            path.display()
        ))),
    }
}

pub fn write_sinogram(path: &Path, sino: &Sinogram<f64>) -> Result<()> {
    let sidecar = Sidecar::Sinogram {
        vertices: sino.vertices(),
        angles: sino.angles(),
        weight: sino.weight(),
    };
    write_payload(path, &sidecar, sino.values())
}

pub fn read_sinogram(path: &Path) -> Result<Sinogram<f64>> {
    match read_payload(path)? {
        (
            Sidecar::Sinogram {
                vertices,
                angles,
                weight,
            },
            values,
        ) => Sinogram::from_values(vertices, angles, weight, values),
        _ => Err(Error::FormatMismatch(format!(
            "{} is not a sinogram file",
            path.display()
        ))),
    }
}

pub fn write_harmonics(path: &Path, table: &HarmonicTable<f64>) -> Result<()> {
    let sidecar = Sidecar::Harmonics {
        vertices: table.vertices(),
        angles: table.angles(),
    };
    write_payload(path, &sidecar, &interleave(table.coefficients()))
}

pub fn read_harmonics(path: &Path) -> Result<HarmonicTable<f64>> {
    match read_payload(path)? {
        (Sidecar::Harmonics { vertices, angles }, values) => {
            HarmonicTable::from_values(vertices, angles, deinterleave(&values)?)
        }
        _ => Err(Error::FormatMismatch(format!(
            "{} is not a harmonics file",
            path.display()
        ))),
    }
}

pub fn write_profiles(path: &Path, profiles: &RadialProfileSet<f64>) -> Result<()> {
    let sidecar = Sidecar::Profiles {
        vertices: profiles.vertices(),
        radial_count: profiles.radial_count(),
    };
    write_payload(path, &sidecar, &interleave(profiles.values()))
}

pub fn read_profiles(path: &Path) -> Result<RadialProfileSet<f64>> {
    match read_payload(path)? {
        (
            Sidecar::Profiles {
                vertices,
                radial_count,
            },
            values,
        ) => RadialProfileSet::from_values(vertices, radial_count, deinterleave(&values)?),
        _ => Err(Error::FormatMismatch(format!(
            "{} is not a profiles file",
            path.display()
        ))),
    }
}

/// 8-bit ASCII PGM (P2) quicklook, min-max normalized, top row = y max.
pub fn write_pgm(path: &Path, grid: &ImageGrid<f64>) -> Result<()> {
    let (lo, hi) = grid
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut out = String::new();
    out.push_str("P2\n");
    out.push_str(&format!("{} {}\n255\n", grid.width(), grid.height()));
    for row in (0..grid.height()).rev() {
        let mut line = String::new();
        for col in 0..grid.width() {
            let v = ((grid.get(row, col) - lo) / span * 255.0).round() as i64;
            line.push_str(&format!("{} ", v.clamp(0, 255)));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

/// CSV export with header `k,i,phi,s,value`.
pub fn write_sinogram_csv(path: &Path, sino: &Sinogram<f64>) -> Result<()> {
    let mut out = String::from("k,i,phi,s,value\n");
    for k in 0..sino.vertices() {
        for i in 0..=sino.angles() {
            out.push_str(&format!(
                "{k},{i},{},{},{}\n",
                sino.vertex_angle(k),
                sino.opening_parameter(i),
                sino.get(k, i)
            ));
        }
    }
    fs::write(path, out)?;
    Ok(())
}
