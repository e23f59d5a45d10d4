//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage errors, 3 for data errors
//! (unreadable or inconsistent inputs).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::error::Error;
use crate::imagecore::{load_pattern, load_pgm, save_pattern, save_pgm, HiResImage, Maxval, SensorImage};
use crate::jsde::{reconstruct_with_report, Algorithm, JsdeParams};
use crate::metrics::{mtf_sweep, psnr, ssim, DEFAULT_MTF_FREQUENCIES};
use crate::pipeline::{reconstruct_with, Method};
use crate::sensorsim::{acquire, apply_noise, generate_pattern, LayoutKind, NoiseParams};

#[derive(Debug, Parser)]
#[command(name = "nrsense", version, about = "Three-quarter sampling sensor simulation and reconstruction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a quadrant pattern for a sensor of the given size.
    Pattern {
        #[arg(long, default_value = "3q-nonreg", value_parser = parse_layout)]
        layout: LayoutKind,
        /// Sensor size, WIDTHxHEIGHT.
        #[arg(long, value_parser = parse_size)]
        size: (usize, usize),
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Acquire a sensor image from a fine-grid PGM.
    Simulate {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, default_value = "3q-nonreg", value_parser = parse_layout)]
        layout: LayoutKind,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Seed for the noise generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 65535, value_parser = parse_maxval)]
        maxval: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Upsample a sensor image to the fine grid.
    Reconstruct {
        #[arg(short, long)]
        input: PathBuf,
        /// Quadrant pattern; required for jsde and mp.
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long, default_value = "jsde", value_parser = parse_method)]
        algo: Method,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 65535, value_parser = parse_maxval)]
        maxval: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compare two fine-grid images; prints `metric,value` CSV.
    Evaluate {
        reference: PathBuf,
        test: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "psnr,ssim", value_parser = ["psnr", "ssim"])]
        metrics: Vec<String>,
    },
    /// Contrast against line frequency; prints `rel_freq,contrast,imax,imin` CSV.
    Mtf {
        #[arg(long, default_value = "3q-nonreg", value_parser = parse_layout)]
        layout: LayoutKind,
        #[arg(long, default_value = "jsde", value_parser = parse_method)]
        algo: Method,
        /// Frequencies in percent of the sensor sampling rate.
        #[arg(long, value_delimiter = ',', value_parser = parse_frequency)]
        freqs: Option<Vec<f64>>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Fine-grid size, WIDTHxHEIGHT.
        #[arg(long, default_value = "512x512", value_parser = parse_size)]
        size: (usize, usize),
        #[command(flatten)]
        params: ParamArgs,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Add shot and readout noise.
    #[arg(long)]
    pub noise: bool,
    #[arg(long, default_value_t = 10000.0)]
    pub full_well: f64,
    #[arg(long, default_value_t = 25.0)]
    pub readout_sigma: f64,
}

impl From<&NoiseArgs> for NoiseParams {
    fn from(a: &NoiseArgs) -> Self {
        NoiseParams {
            full_well: a.full_well,
            readout_sigma: a.readout_sigma,
            enabled: a.noise,
        }
    }
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long = "block", default_value_t = 4)]
    pub block_size: usize,
    #[arg(long = "border", default_value_t = 14)]
    pub border_width: usize,
    #[arg(long = "iters", default_value_t = 100)]
    pub iterations: usize,
    /// Weight decay per pixel of distance from the area centre.
    #[arg(long = "rho", default_value_t = 0.7)]
    pub decay: f64,
    #[arg(long = "gamma", default_value_t = 0.5)]
    pub odc_gamma: f64,
}

impl From<&ParamArgs> for JsdeParams {
    fn from(a: &ParamArgs) -> Self {
        JsdeParams {
            block_size: a.block_size,
            border_width: a.border_width,
            iterations: a.iterations,
            decay: a.decay,
            odc_gamma: a.odc_gamma,
        }
    }
}

fn parse_layout(s: &str) -> Result<LayoutKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height `{h}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("size must be non-zero, got {w}x{h}"));
    }
    Ok((w, h))
}

fn parse_maxval(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(v @ (255 | 65535)) => Ok(v),
        _ => Err(format!("maxval must be 255 or 65535, got `{s}`")),
    }
}

fn parse_frequency(s: &str) -> Result<f64, String> {
    let f: f64 = s.trim().parse().map_err(|_| format!("bad frequency `{s}`"))?;
    if f > 0.0 && f <= 100.0 {
        Ok(f)
    } else {
        Err(format!("frequency must be in (0, 100], got {f}"))
    }
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

fn usage_on_invalid(e: Error) -> CliError {
    match e {
        Error::InvalidArgument(msg) => CliError::Usage(msg),
        other => CliError::Data(other),
    }
}

fn maxval(v: u32) -> Maxval {
    Maxval::from_value(v).expect("validated by the argument parser")
}

/// Provenance written next to every simulated sensor image.
#[derive(Debug, Serialize)]
struct Sidecar<'a> {
    input: &'a Path,
    pattern: &'a Path,
    layout: LayoutKind,
    seed: u64,
    noise: NoiseParams,
    sensor_width: usize,
    sensor_height: usize,
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Pattern {
            layout,
            size: (w, h),
            seed,
            output,
        } => {
            let pattern = generate_pattern(layout, w, h, seed).map_err(usage_on_invalid)?;
            save_pattern(&pattern, &output)?;
            info!("wrote {w}x{h} {layout} pattern to {}", output.display());
        }
        Command::Simulate {
            input,
            pattern,
            layout,
            noise,
            seed,
            maxval: mv,
            output,
        } => {
            let noise = NoiseParams::from(&noise);
            noise.validate().map_err(usage_on_invalid)?;
            let fine = load_pgm(&input)?;
            let pat = load_pattern(&pattern)?;
            if (fine.width(), fine.height()) != (2 * pat.width(), 2 * pat.height()) {
                return Err(Error::DimensionMismatch(format!(
                    "input {}x{} is not twice the {}x{} pattern",
                    fine.width(),
                    fine.height(),
                    pat.width(),
                    pat.height()
                ))
                .into());
            }
            let hires = HiResImage::new(fine)?;
            let sensor = acquire(&hires, &pat, layout)?;
            let sensor = apply_noise(&sensor, layout, &noise, seed)?;
            save_pgm(&sensor, &output, maxval(mv))?;
            let meta = Sidecar {
                input: &input,
                pattern: &pattern,
                layout,
                seed,
                noise,
                sensor_width: sensor.width(),
                sensor_height: sensor.height(),
            };
            let json = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
            fs::write(sidecar_path(&output), json + "\n").map_err(Error::from)?;
        }
        Command::Reconstruct {
            input,
            pattern,
            algo,
            params,
            maxval: mv,
            output,
        } => {
            let params = JsdeParams::from(&params);
            params.validate().map_err(usage_on_invalid)?;
            if algo.needs_pattern() && pattern.is_none() {
                return Err(CliError::Usage(format!("--pattern is required for {algo}")));
            }
            let sensor = SensorImage::new(load_pgm(&input)?);
            let image = match (algo, pattern) {
                (Method::Jsde | Method::Mp, Some(path)) => {
                    let pat = load_pattern(&path)?;
                    let sparse = if algo == Method::Jsde { Algorithm::Jsde } else { Algorithm::Mp };
                    let report = reconstruct_with_report(&sensor, &pat, &params, sparse)?;
                    info!(
                        "{algo}: max imaginary part {:.3e}, {} fallback blocks",
                        report.max_imaginary, report.fallback_blocks
                    );
                    report.image
                }
                _ => reconstruct_with(&sensor, None, algo, &params)?,
            };
            save_pgm(&image, &output, maxval(mv))?;
        }
        Command::Evaluate {
            reference,
            test,
            metrics,
        } => {
            let a = load_pgm(&reference)?;
            let b = load_pgm(&test)?;
            writeln!(out, "metric,value").map_err(Error::from)?;
            for m in metrics {
                let v = match m.as_str() {
                    "psnr" => psnr(&a, &b)?,
                    _ => ssim(&a, &b)?,
                };
                writeln!(out, "{m},{v:?}").map_err(Error::from)?;
            }
        }
        Command::Mtf {
            layout,
            algo,
            freqs,
            seed,
            size,
            params,
            output,
        } => {
            let params = JsdeParams::from(&params);
            params.validate().map_err(usage_on_invalid)?;
            let freqs = freqs.unwrap_or_else(|| DEFAULT_MTF_FREQUENCIES.to_vec());
            let points = mtf_sweep(layout, algo, &freqs, seed, size, &params).map_err(usage_on_invalid)?;
            let mut csv = String::from("rel_freq,contrast,imax,imin\n");
            for p in &points {
                csv.push_str(&format!("{:?},{:?},{:?},{:?}\n", p.rel_freq, p.contrast, p.imax, p.imin));
            }
            match output {
                Some(path) => fs::write(path, csv).map_err(Error::from)?,
                None => out.write_all(csv.as_bytes()).map_err(Error::from)?,
            }
        }
    }
    Ok(())
}

/// Parse arguments, run, and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    let stdout = io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(parse_size("128x64").unwrap(), (128, 64));
        assert!(parse_size("0x0").is_err());
        assert!(parse_size("12").is_err());
        assert!(parse_size("ax3").is_err());
    }

    #[test]
    fn frequencies() {
        assert_eq!(parse_frequency("74").unwrap(), 74.0);
        assert!(parse_frequency("0").is_err());
        assert!(parse_frequency("101").is_err());
    }

    #[test]
    fn defaults_match_model_parameters() {
        let cli = Cli::try_parse_from(["nrsense", "reconstruct", "-i", "a.pgm", "-o", "b.pgm"]).unwrap();
        let Command::Reconstruct { params, algo, .. } = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(algo, Method::Jsde);
        assert_eq!(JsdeParams::from(&params), JsdeParams::default());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/s.pgm")), PathBuf::from("out/s.pgm.json"));
    }
}
