//! Command-line driver for the V-line transform toolkit.
//!
//! Exit codes: 0 on success, 1 for usage/configuration problems, 2 for
//! numerical failures (non-convergent quadrature, refused solves, ...).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use vradon::forward::{add_noise, glk2_rho_integral, glk_alpha_integral, vline_forward};
use vradon::harmonics::{decompose, synthesize};
use vradon::io;
use vradon::kernels::{verification_report, KernelSpec};
use vradon::phantom::{render_phantom, RadialProfile};
use vradon::pipeline::{reconstruct, ReconSource};
use vradon::solver::{assemble, condition_report, rhs_from_harmonics, solve};
use vradon::{PhantomSpec64, ReconConfig64, SolveConfig64};

#[derive(Parser)]
#[command(
    name = "vradon",
    version,
    about = "Weighted V-line (conical Radon) transform: simulation, series-expansion inversion and kernel verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a phantom to an image file.
    Phantom(PhantomArgs),
    /// Apply the weighted V-line transform to an image.
    Forward(ForwardArgs),
    /// Add seeded Gaussian noise at a relative level.
    Noise(NoiseArgs),
    /// Angular Fourier decomposition of a sinogram.
    Decompose(DecomposeArgs),
    /// Solve the per-order Abel systems for radial profiles.
    Solve(SolveArgs),
    /// Evaluate the Fourier series of radial profiles on a grid.
    Synthesize(SynthesizeArgs),
    /// End-to-end reconstruction (simulate from a phantom or read a sinogram).
    Reconstruct(ReconstructArgs),
    /// Verify kernel diagonal zeros and the uniqueness condition (JSON report).
    Verify(VerifyArgs),
    /// Tabulate the two radial-oracle forms against each other (CSV).
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Triangular,
    Tikhonov,
    Tsvd,
}

#[derive(Args)]
struct PhantomArgs {
    /// Built-in name (smiley, disk) or path to a JSON primitive list.
    #[arg(long, default_value = "smiley")]
    spec: String,
    #[arg(long, default_value_t = 301)]
    size: usize,
    /// Output image (raw f64 + JSON sidecar).
    #[arg(long)]
    out: PathBuf,
    /// Optional ASCII PGM quicklook.
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct ForwardArgs {
    #[arg(long)]
    image: PathBuf,
    /// Number of vertices M (power of two).
    #[arg(long, default_value_t = 256)]
    vertices: usize,
    /// Number of opening-angle intervals N.
    #[arg(long, default_value_t = 300)]
    angles: usize,
    /// Radial weight exponent m.
    #[arg(long, default_value_t = 0)]
    weight: i32,
    /// Ray quadrature step (default 1/(2 width)).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Optional CSV export (k,i,phi,s,value).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long)]
    sinogram: PathBuf,
    /// Relative noise level ||z||/||g||.
    #[arg(long)]
    level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    sinogram: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    harmonics: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Tikhonov)]
    method: MethodArg,
    #[arg(long, default_value_t = 0.015)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-3)]
    svd_threshold: f64,
    /// Radial weight exponent m of the data.
    #[arg(long, default_value_t = 0)]
    weight: i32,
    /// Ambient dimension of the kernel family.
    #[arg(long, default_value_t = 2)]
    dim: u32,
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON condition report per order.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[arg(long)]
    profiles: PathBuf,
    #[arg(long, default_value_t = 301)]
    size: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructArgs {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in phantom name or JSON spec path (simulate-then-invert).
    #[arg(long)]
    phantom: Option<String>,
    /// Stored sinogram to invert instead of simulating.
    #[arg(long)]
    sinogram: Option<PathBuf>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    vertices: Option<usize>,
    #[arg(long)]
    angles: Option<usize>,
    #[arg(long)]
    weight: Option<i32>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    svd_threshold: Option<f64>,
    /// Relative noise level applied to simulated data.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output image path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// Metrics JSON (relative error, correlation, residuals, timings).
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Optionally store the (noisy) simulated sinogram.
    #[arg(long)]
    save_sinogram: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Kernel families as dim:weight pairs.
    #[arg(long, default_value = "2:0,3:0,3:1")]
    cases: String,
    #[arg(long, default_value_t = 8)]
    max_order: u32,
    /// Lower bound of the diagonal zero search.
    #[arg(long, default_value_t = 0.05)]
    lower: f64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value = "2,3")]
    dims: String,
    #[arg(long, default_value = "0,1")]
    weights: String,
    #[arg(long, default_value_t = 6)]
    max_order: u32,
    /// Number of opening angles sampled per case.
    #[arg(long, default_value_t = 20)]
    angles: usize,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Reconstruction settings file; every field optional, flags win.
#[derive(Debug, Default, Deserialize)]
struct FileConfig {
    grid: Option<usize>,
    vertices: Option<usize>,
    angles: Option<usize>,
    weight: Option<i32>,
    method: Option<MethodArg>,
    lambda: Option<f64>,
    svd_threshold: Option<f64>,
    noise: Option<f64>,
    seed: Option<u64>,
    phantom: Option<String>,
    sinogram: Option<PathBuf>,
    out: Option<PathBuf>,
    pgm: Option<PathBuf>,
    metrics: Option<PathBuf>,
    save_sinogram: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let usage_ok = matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            );
            let _ = e.print();
            return if usage_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(lib) = cause.downcast_ref::<vradon::Error>() {
            return if lib.is_numerical() { 2 } else { 1 };
        }
    }
    1
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Phantom(a) => cmd_phantom(a),
        Command::Forward(a) => cmd_forward(a),
        Command::Noise(a) => cmd_noise(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn resolve_phantom(name: &str) -> Result<PhantomSpec64> {
    match name {
        "smiley" => Ok(PhantomSpec64::smiley()),
        "disk" => Ok(PhantomSpec64::centered_disk(0.5, 1.0)),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                bail!("unknown phantom '{name}' (expected smiley, disk, or a JSON file path)");
            }
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading phantom spec {}", p.display()))?;
            Ok(serde_json::from_str(&text)
                .with_context(|| format!("parsing phantom spec {}", p.display()))?)
        }
    }
}

fn cmd_phantom(a: PhantomArgs) -> Result<()> {
    let spec = resolve_phantom(&a.spec)?;
    let grid = render_phantom(&spec, a.size)?;
    io::write_image(&a.out, &grid)?;
    if let Some(pgm) = &a.pgm {
        io::write_pgm(pgm, &grid)?;
    }
    println!("phantom '{}' -> {} ({}x{})", a.spec, a.out.display(), a.size, a.size);
    Ok(())
}

fn cmd_forward(a: ForwardArgs) -> Result<()> {
    let grid = io::read_image(&a.image)?;
    let sino = vline_forward(&grid, a.vertices, a.angles, a.weight, a.step)?;
    io::write_sinogram(&a.out, &sino)?;
    if let Some(csv) = &a.csv {
        io::write_sinogram_csv(csv, &sino)?;
    }
    println!(
        "forward m={} -> {} ({} vertices x {} angles)",
        a.weight,
        a.out.display(),
        a.vertices,
        a.angles + 1
    );
    Ok(())
}

fn cmd_noise(a: NoiseArgs) -> Result<()> {
    let sino = io::read_sinogram(&a.sinogram)?;
    let noisy = add_noise(&sino, a.level, a.seed)?;
    io::write_sinogram(&a.out, &noisy)?;
    println!("noise level {} seed {} -> {}", a.level, a.seed, a.out.display());
    Ok(())
}

fn cmd_decompose(a: DecomposeArgs) -> Result<()> {
    let sino = io::read_sinogram(&a.sinogram)?;
    let table = decompose(&sino);
    io::write_harmonics(&a.out, &table)?;
    println!(
        "decompose -> {} (orders {}..{})",
        a.out.display(),
        table.order_range().0,
        table.order_range().1
    );
    Ok(())
}

fn solve_config(method: MethodArg, lambda: f64, svd_threshold: f64) -> SolveConfig64 {
    match method {
        MethodArg::Triangular => SolveConfig64::triangular(),
        MethodArg::Tikhonov => SolveConfig64::tikhonov(lambda),
        MethodArg::Tsvd => SolveConfig64::tsvd(svd_threshold),
    }
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let table = io::read_harmonics(&a.harmonics)?;
    let cfg = solve_config(a.method, a.lambda, a.svd_threshold);
    let m = table.vertices();
    let n = table.angles();
    let half = m / 2;
    let mut profiles = vradon::RadialProfileSet64::zeros(m, n);
    let mut reports = Vec::new();
    for l in 0..half {
        let spec = KernelSpec::new(a.dim, a.weight, l as u32)?;
        let system = assemble::<f64>(&spec, n)?;
        if a.report.is_some() {
            reports.push(condition_report(&system)?);
        }
        let b = rhs_from_harmonics(&table, l as i32, a.weight);
        let x = solve(&system, &b, &cfg)?;
        profiles.set_order_row(l as i32, &x);
        if l > 0 {
            let mirrored: Vec<_> = x.iter().map(|c| c.conj()).collect();
            profiles.set_order_row(-(l as i32), &mirrored);
        }
    }
    io::write_profiles(&a.out, &profiles)?;
    if let Some(report) = &a.report {
        std::fs::write(report, serde_json::to_vec_pretty(&reports)?)?;
    }
    println!("solve ({:?}) -> {}", a.method, a.out.display());
    Ok(())
}

fn cmd_synthesize(a: SynthesizeArgs) -> Result<()> {
    let profiles = io::read_profiles(&a.profiles)?;
    let image = synthesize(&profiles, a.size)?;
    io::write_image(&a.out, &image)?;
    if let Some(pgm) = &a.pgm {
        io::write_pgm(pgm, &image)?;
    }
    println!("synthesize {0}x{0} -> {1}", a.size, a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct Metrics<'a> {
    relative_error: Option<f64>,
    correlation: Option<f64>,
    residuals: &'a [f64],
    timings: &'a vradon::pipeline::StageTimings,
}

fn cmd_reconstruct(a: ReconstructArgs) -> Result<()> {
    let file: FileConfig = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    let method = a.method.or(file.method).unwrap_or(MethodArg::Tikhonov);
    let lambda = a.lambda.or(file.lambda).unwrap_or(0.015);
    let svd_threshold = a.svd_threshold.or(file.svd_threshold).unwrap_or(1e-3);
    let cfg = ReconConfig64 {
        grid_size: a.grid.or(file.grid).unwrap_or(301),
        vertices: a.vertices.or(file.vertices).unwrap_or(256),
        angles: a.angles.or(file.angles).unwrap_or(300),
        weight: a.weight.or(file.weight).unwrap_or(0),
        solve: solve_config(method, lambda, svd_threshold),
        noise_level: a.noise.or(file.noise).unwrap_or(0.0),
        seed: a.seed.or(file.seed).unwrap_or(0),
        step: None,
    };

    let sinogram_path = a.sinogram.or(file.sinogram);
    let phantom_name = a.phantom.or(file.phantom);
    let source = match (&sinogram_path, &phantom_name) {
        (Some(path), None) => ReconSource::Sinogram(io::read_sinogram(path)?),
        (None, name) => {
            let name = name.clone().unwrap_or_else(|| "smiley".to_string());
            ReconSource::Phantom(resolve_phantom(&name)?)
        }
        (Some(_), Some(_)) => bail!("--phantom and --sinogram are mutually exclusive"),
    };

    let out = a
        .out
        .or(file.out)
        .ok_or_else(|| anyhow!("an output image path is required (--out)"))?;
    let pgm = a.pgm.or(file.pgm);
    let metrics_path = a.metrics.or(file.metrics);
    let save_sinogram = a.save_sinogram.or(file.save_sinogram);
    for other in [&pgm, &metrics_path, &save_sinogram].into_iter().flatten() {
        if *other == out {
            bail!("output paths must be distinct: {}", out.display());
        }
    }

    let result = reconstruct(&source, &cfg)?;
    io::write_image(&out, &result.image)?;
    if let Some(pgm) = &pgm {
        io::write_pgm(pgm, &result.image)?;
    }
    if let Some(path) = &save_sinogram {
        io::write_sinogram(path, &result.sinogram)?;
    }
    if let Some(path) = &metrics_path {
        let metrics = Metrics {
            relative_error: result.relative_error,
            correlation: result.correlation,
            residuals: &result.residuals,
            timings: &result.timings,
        };
        std::fs::write(path, serde_json::to_vec_pretty(&metrics)?)?;
    }
    match (result.relative_error, result.correlation) {
        (Some(err), Some(corr)) => println!(
            "reconstruct -> {} (relative l2 error {:.4}, correlation {:.4})",
            out.display(),
            err,
            corr
        ),
        _ => println!("reconstruct -> {}", out.display()),
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let mut cases = Vec::new();
    for part in a.cases.split(',') {
        let (d, w) = part
            .split_once(':')
            .ok_or_else(|| anyhow!("case '{part}' is not of the form dim:weight"))?;
        cases.push((
            d.trim().parse::<u32>().context("parsing case dimension")?,
            w.trim().parse::<i32>().context("parsing case weight")?,
        ));
    }
    let report = verification_report::<f64>(&cases, a.max_order, a.lower)?;
    let json = serde_json::to_string_pretty(&report)?;
    match &a.out {
        Some(path) => std::fs::write(path, &json)?,
        None => println!("{json}"),
    }
    if !report.all_pass {
        bail!(vradon::Error::Numerical(
            "uniqueness verification failed for at least one case".into()
        ));
    }
    if let Some(path) = &a.out {
        println!("verify: all {} cases pass -> {}", report.cases.len(), path.display());
    }
    Ok(())
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let dims: Vec<u32> = a
        .dims
        .split(',')
        .map(|s| s.trim().parse().context("parsing dimensions"))
        .collect::<Result<_>>()?;
    let weights: Vec<i32> = a
        .weights
        .split(',')
        .map(|s| s.trim().parse().context("parsing weights"))
        .collect::<Result<_>>()?;
    let bump = RadialProfile::SmoothBump { radius: 0.8f64 };
    let f = move |r: f64| bump.eval(r);
    let mut csv = String::from("n,m,l,psi,alpha_form,rho_form,abs_diff\n");
    let mut worst = 0.0f64;
    for &n in &dims {
        for &m in &weights {
            for l in 0..=a.max_order {
                let spec = KernelSpec::new(n, m, l)?;
                for t in 0..a.angles {
                    let psi =
                        (t as f64 + 0.5) / a.angles as f64 * std::f64::consts::FRAC_PI_2;
                    let alpha = glk_alpha_integral(f, &spec, psi)?;
                    let rho = glk2_rho_integral(f, &spec, psi)?;
                    let diff = (alpha - rho).abs();
                    worst = worst.max(diff);
                    csv.push_str(&format!("{n},{m},{l},{psi},{alpha},{rho},{diff}\n"));
                }
            }
        }
    }
    match &a.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            println!("oracle table -> {} (worst |diff| = {worst:.3e})", path.display());
        }
        None => print!("{csv}"),
    }
    if worst > 1e-8 {
        bail!(vradon::Error::Numerical(format!(
            "oracle forms disagree: worst |diff| = {worst:.3e} > 1e-8"
        )));
    }
    Ok(())
}
