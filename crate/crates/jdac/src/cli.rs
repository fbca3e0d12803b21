//! Command-line front end. Five subcommands cover the full loop: make a
//! phantom, corrupt it, estimate its noise, restore it, score the result.
//!
//! Exit codes: 0 success, 2 usage error (bad flags, unparseable specs,
//! unknown operator names), 1 runtime error (I/O, contract violations).

use crate::corruption::{corrupt, ArtifactSpec, NoiseSpec};
use crate::engine::{jdac_run, JdacConfig};
use crate::error::Result;
use crate::estimation::{estimate_noise, DEFAULT_STOP_THRESHOLD};
use crate::io::manifest::load_volume;
use crate::io::rvol::write_rvol;
use crate::metrics::{gradient_metrics, image_metrics, MetricsReport};
use crate::operators::{corrector_from_name, denoiser_from_name};
use crate::phantom::{make_phantom, PhantomKind};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "jdac", version, about = "Volumetric restoration: joint denoising and artifact correction")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic test volume.
    Phantom {
        /// Grid size as L,W,H (each >= 32).
        #[arg(long, value_parser = parse_dims)]
        dims: Dims,
        /// ellipsoids | checker-smooth | shepp-logan-like
        #[arg(long, default_value = "ellipsoids")]
        kind: PhantomKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output volume (rvol).
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a simulated artifact and noise to a volume.
    Corrupt {
        /// Input volume (rvol, .nii, .nii.gz).
        #[arg(long = "in")]
        input: PathBuf,
        /// Artifact spec, e.g. none, gibbs:0.6, motion, ghosting, spike:1,0.5
        #[arg(long, value_parser = parse_artifact)]
        artifact: String,
        /// Noise spec, e.g. gaussian:0.10, rician:0.05, speckle:0.2, saltpepper:0.02
        #[arg(long, value_parser = parse_noise)]
        noise: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the noise level of a volume.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Print the raw gradient std instead of the calibrated estimate.
        #[arg(long)]
        raw: bool,
    },
    /// Run the restoration engine.
    Restore {
        #[arg(long = "in")]
        input: PathBuf,
        /// identity | gauss[:width_scale] | external:<command>
        #[arg(long, value_parser = parse_denoiser)]
        denoiser: String,
        /// identity | spike-notch[:z] | external:<command>
        #[arg(long, value_parser = parse_corrector)]
        corrector: String,
        /// Early-stop threshold on the raw gradient std.
        #[arg(long, default_value_t = DEFAULT_STOP_THRESHOLD)]
        delta: f64,
        /// Learning rate in (0, 1].
        #[arg(long, default_value_t = 0.5)]
        lr: f64,
        #[arg(long, default_value_t = 4)]
        max_iters: usize,
        /// Iterate even when the input already reads below the threshold.
        #[arg(long)]
        no_pre_check: bool,
        #[arg(long)]
        out: PathBuf,
        /// Also write the JSON restoration report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score a restored volume against a reference.
    Metrics {
        #[arg(long)]
        test: PathBuf,
        /// Reference volume.
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Compare gradient-magnitude maps instead of intensities.
        #[arg(long)]
        gradient: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy)]
struct Dims([usize; 3]);

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected L,W,H, got `{s}`"));
    }
    let mut dims = [0usize; 3];
    for (d, p) in dims.iter_mut().zip(&parts) {
        *d = p
            .trim()
            .parse()
            .map_err(|_| format!("`{p}` is not a dimension"))?;
    }
    Ok(Dims(dims))
}

// Spec and operator-name problems are usage errors (exit 2), so they are
// validated at argument-parse time and re-parsed when the command runs.
fn parse_artifact(s: &str) -> std::result::Result<String, String> {
    ArtifactSpec::parse(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

fn parse_noise(s: &str) -> std::result::Result<String, String> {
    NoiseSpec::parse(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

fn parse_denoiser(s: &str) -> std::result::Result<String, String> {
    denoiser_from_name(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

fn parse_corrector(s: &str) -> std::result::Result<String, String> {
    corrector_from_name(s)
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

fn print_metrics(report: &MetricsReport, json: bool) -> Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(report)?);
        return Ok(());
    }
    let db = if report.psnr_db.is_finite() {
        format!("{:.6}", report.psnr_db)
    } else {
        "inf".to_string()
    };
    println!("psnr_db {db}");
    println!("rmse {:.6}", report.rmse);
    println!("ssim {:.6}", report.ssim);
    println!("ms_ssim {:.6}", report.ms_ssim);
    println!(
        "domain {}",
        match report.domain {
            crate::metrics::MetricDomain::Image => "image",
            crate::metrics::MetricDomain::Gradient => "gradient",
        }
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Phantom {
            dims,
            kind,
            seed,
            out,
        } => {
            let v = make_phantom(dims.0, kind, seed)?;
            write_rvol(&v, &out)
        }
        Command::Corrupt {
            input,
            artifact,
            noise,
            seed,
            out,
        } => {
            let v = load_volume(&input)?;
            let artifact = ArtifactSpec::parse(&artifact)?.with_seed(seed);
            let noise = NoiseSpec::parse(&noise)?.with_seed(seed);
            write_rvol(&corrupt(&v, &artifact, &noise)?, &out)
        }
        Command::Estimate { input, raw } => {
            let est = estimate_noise(&load_volume(&input)?)?;
            let value = if raw { est.raw_std } else { est.sigma_e };
            println!("{value:.6}");
            Ok(())
        }
        Command::Restore {
            input,
            denoiser,
            corrector,
            delta,
            lr,
            max_iters,
            no_pre_check,
            out,
            report,
        } => {
            let v = load_volume(&input)?;
            let d = denoiser_from_name(&denoiser)?;
            let a = corrector_from_name(&corrector)?;
            let cfg = JdacConfig {
                lr,
                max_iters,
                stop_threshold: delta,
                pre_check: !no_pre_check,
            };
            let result = jdac_run(&v, d.as_ref(), a.as_ref(), &cfg)?;
            write_rvol(&result.output, &out)?;
            if let Some(path) = report {
                let json = result.to_json(out.to_str());
                std::fs::write(path, serde_json::to_string_pretty(&json)?)?;
            }
            Ok(())
        }
        Command::Metrics {
            test,
            reference,
            gradient,
            json,
        } => {
            let t = load_volume(&test)?;
            let r = load_volume(&reference)?;
            let report = if gradient {
                gradient_metrics(&t, &r)?
            } else {
                image_metrics(&t, &r)?
            };
            print_metrics(&report, json)
        }
    }
}

/// Parses argv and runs. Never returns; the process exits with 0, 1, or 2.
pub fn main_entry() -> ! {
    // Cli::parse() exits with code 2 itself on usage errors, naming the flag.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::exit(0),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
