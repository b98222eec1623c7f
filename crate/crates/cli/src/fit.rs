use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::ValueEnum;
use lmfrail::{em_fit, fit, BaselineHazard, BaselineMode, EmConfig, FitConfig};
use serde::Serialize;

use crate::manifest::{prepare_dir, Manifest};
use crate::table::{num, read_dataset};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    Constant,
    Nonparametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Lmm,
    Em,
    Both,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// CSV with columns time, status, x1..xp (and optionally id).
    pub csv: PathBuf,
    /// Baseline hazard of the local-mixture fit.
    #[arg(long, value_enum, default_value_t = Baseline::Nonparametric)]
    pub baseline: Baseline,
    #[arg(long, value_enum, default_value_t = FitMethod::Lmm)]
    pub method: FitMethod,
    /// Coefficient tolerance (outer search and EM).
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Iteration cap (outer search and EM); each method's default when absent.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Output directory for fit.csv, baseline.csv and manifest.json.
    #[arg(long, default_value_os_t = crate::default_out_dir())]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Echo<'a> {
    csv: &'a PathBuf,
    baseline: Baseline,
    method: FitMethod,
    tol: f64,
    max_iters: Option<usize>,
}

struct Rows {
    fit: csv::Writer<std::fs::File>,
    baseline: csv::Writer<std::fs::File>,
}

impl Rows {
    fn param(&mut self, method: &str, name: &str, value: String) -> Result<()> {
        Ok(self.fit.write_record([method, name, &value])?)
    }

    fn baseline(&mut self, method: &str, h: &BaselineHazard) -> Result<()> {
        match h {
            BaselineHazard::ConstantRate(rate) => self.baseline.write_record([method, "rate", "", &num(*rate)])?,
            BaselineHazard::Nonparametric(jumps) => {
                for j in jumps {
                    self.baseline.write_record([method, "jump", &num(j.time), &num(j.increment)])?;
                }
            }
        }
        Ok(())
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

pub fn run(args: Args) -> Result<Status> {
    if !(args.tol > 0.0) || args.max_iters == Some(0) {
        anyhow::bail!("--tol and --max-iters must be positive");
    }
    let data = read_dataset(&args.csv)?;
    data.require_events()?;
    prepare_dir(&args.out)?;
    let mut manifest = Manifest::new(
        "fit",
        Echo { csv: &args.csv, baseline: args.baseline, method: args.method, tol: args.tol, max_iters: args.max_iters },
        None,
    )?;
    let fit_path = args.out.join("fit.csv");
    let baseline_path = args.out.join("baseline.csv");
    let mut rows = Rows { fit: csv::Writer::from_path(&fit_path)?, baseline: csv::Writer::from_path(&baseline_path)? };
    rows.fit.write_record(["method", "parameter", "estimate"])?;
    rows.baseline.write_record(["method", "kind", "time", "value"])?;

    println!("{} records, {} events, {} covariates", data.len(), data.n_events(), data.p());
    let mut all_converged = true;
    if matches!(args.method, FitMethod::Lmm | FitMethod::Both) {
        let cfg = FitConfig {
            baseline_mode: match args.baseline {
                Baseline::Constant => BaselineMode::ConstantRate,
                Baseline::Nonparametric => BaselineMode::Nonparametric,
            },
            beta_tol: args.tol,
            ..FitConfig::default()
        };
        let cfg = FitConfig { max_outer_iters: args.max_iters.unwrap_or(cfg.max_outer_iters), ..cfg };
        let start = Instant::now();
        let f = fit(&data, &cfg)?;
        manifest.time("lmm", start.elapsed().as_secs_f64());
        all_converged &= f.converged;

        for (j, b) in f.beta_hat.iter().enumerate() {
            rows.param("lmm", &format!("beta_x{}", j + 1), num(*b))?;
        }
        let l = f.lambda_hat;
        rows.param("lmm", "lambda2", num(l.lambda2))?;
        rows.param("lmm", "lambda3", num(l.lambda3))?;
        rows.param("lmm", "lambda4", num(l.lambda4))?;
        rows.param("lmm", "on_boundary", flag(f.on_boundary))?;
        rows.param("lmm", "loglik", num(f.profile_loglik))?;
        rows.param("lmm", "converged", flag(f.converged))?;
        rows.param("lmm", "outer_iterations", f.outer_iterations.to_string())?;
        rows.baseline("lmm", &f.baseline_hat)?;

        println!("\nlocal mixture ({:?} baseline)", args.baseline);
        for (j, b) in f.beta_hat.iter().enumerate() {
            println!("  x{:<8} {b:>10.4}", j + 1);
        }
        println!("  lambda    ({:.4}, {:.4}, {:.4})", l.lambda2, l.lambda3, l.lambda4);
        println!("  boundary  {}", if f.on_boundary { "yes" } else { "no" });
        println!("  loglik    {:.4}", f.profile_loglik);
        println!("  converged {} ({} outer iterations)", if f.converged { "yes" } else { "no" }, f.outer_iterations);
    }
    if matches!(args.method, FitMethod::Em | FitMethod::Both) {
        let defaults = EmConfig::default();
        let cfg = EmConfig { tol: args.tol, max_em_iters: args.max_iters.unwrap_or(defaults.max_em_iters), ..defaults };
        let start = Instant::now();
        let f = em_fit(&data, &cfg)?;
        manifest.time("em", start.elapsed().as_secs_f64());
        all_converged &= f.converged;

        for (j, b) in f.beta_hat.iter().enumerate() {
            rows.param("em", &format!("beta_x{}", j + 1), num(*b))?;
        }
        rows.param("em", "eta", num(f.eta_hat))?;
        rows.param("em", "loglik", num(f.loglik))?;
        rows.param("em", "converged", flag(f.converged))?;
        rows.param("em", "iterations", f.iterations.to_string())?;
        rows.baseline("em", &f.baseline_hat)?;

        println!("\ngamma-frailty EM");
        for (j, b) in f.beta_hat.iter().enumerate() {
            println!("  x{:<8} {b:>10.4}", j + 1);
        }
        println!("  eta       {:.4}", f.eta_hat);
        println!("  loglik    {:.4}", f.loglik);
        println!("  converged {} ({} iterations)", if f.converged { "yes" } else { "no" }, f.iterations);
    }
    rows.fit.flush()?;
    rows.baseline.flush()?;
    manifest.output(&fit_path);
    manifest.output(&baseline_path);
    manifest.write(&args.out)?;
    Ok(if all_converged { Status::Converged } else { Status::NotConverged })
}
