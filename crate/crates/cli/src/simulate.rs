use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, Result};
use clap::ValueEnum;
use lmfrail::sim::{generate_dataset, run_comparison, FrailtySpec, Method, SimConfig};
use lmfrail::{EmConfig, FitConfig};
use serde::Serialize;

use crate::manifest::{prepare_dir, Manifest};
use crate::table::{num, opt_num, write_dataset};
use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Table {
    /// Gamma frailty, n = 200, η ∈ {0.1, 0.2, 0.4}.
    #[value(name = "1")]
    One,
    /// n = 500 with Beta(5,1) and 0.4 Beta(3,3) + 0.6 Beta(3,1) frailty.
    #[value(name = "2")]
    Two,
    /// A single scenario built from the flags.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frailty {
    None,
    Gamma,
    Beta,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodArg {
    Lmm,
    Em,
}

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    #[arg(long, value_enum, default_value_t = Table::Custom)]
    pub table: Table,
    /// Sample size per replicate (custom table).
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// True regression coefficient; defaults to log 3.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, value_enum, default_value_t = Frailty::Gamma)]
    pub frailty: Frailty,
    /// Gamma frailty variance.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Beta frailty shape parameters `a,b`.
    #[arg(long, value_parser = pair, default_value = "5,1")]
    pub beta_shape: (f64, f64),
    /// Weight of the first mixture component.
    #[arg(long, default_value_t = 0.4)]
    pub mix_weight: f64,
    #[arg(long, value_parser = pair, default_value = "3,3")]
    pub mix_first: (f64, f64),
    #[arg(long, value_parser = pair, default_value = "3,1")]
    pub mix_second: (f64, f64),
    /// Event-time scale constant.
    #[arg(long, default_value_t = 0.01)]
    pub c_const: f64,
    /// Event-time shape.
    #[arg(long, default_value_t = 4.6)]
    pub tau: f64,
    #[arg(long, default_value_t = 100.0)]
    pub censor_mean: f64,
    #[arg(long, default_value_t = 15.0)]
    pub censor_sd: f64,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "lmm,em")]
    pub methods: Vec<MethodArg>,
    /// Output directory for comparison.csv, replicates.csv and manifest.json.
    #[arg(long, default_value_os_t = crate::default_out_dir())]
    pub out: PathBuf,
    /// Also write replicate 0 of the first scenario as an input-format CSV.
    #[arg(long)]
    pub dataset_out: Option<PathBuf>,
}

fn pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected 'a,b', got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number"));
    Ok((parse(a)?, parse(b)?))
}

fn label(f: &FrailtySpec) -> String {
    match *f {
        FrailtySpec::None => "none".into(),
        FrailtySpec::Gamma { eta } => format!("gamma(eta={eta})"),
        FrailtySpec::Beta { a, b } => format!("beta({a},{b})"),
        FrailtySpec::BetaMixture { weight, first, second } => {
            format!("{weight} beta({},{}) + {} beta({},{})", first.0, first.1, 1.0 - weight, second.0, second.1)
        }
    }
}

fn scenarios(args: &Args) -> Vec<SimConfig> {
    let base = SimConfig {
        n: args.n,
        beta_true: args.beta.unwrap_or(3f64.ln()),
        c_const: args.c_const,
        tau: args.tau,
        censor_mean: args.censor_mean,
        censor_sd: args.censor_sd,
        replicates: args.replicates,
        master_seed: args.seed,
        ..SimConfig::default()
    };
    match args.table {
        Table::One => [0.1, 0.2, 0.4]
            .into_iter()
            .map(|eta| SimConfig { n: 200, frailty: FrailtySpec::Gamma { eta }, ..base.clone() })
            .collect(),
        Table::Two => [
            FrailtySpec::Beta { a: 5.0, b: 1.0 },
            FrailtySpec::BetaMixture { weight: 0.4, first: (3.0, 3.0), second: (3.0, 1.0) },
        ]
        .into_iter()
        .map(|frailty| SimConfig { n: 500, frailty, ..base.clone() })
        .collect(),
        Table::Custom => {
            let frailty = match args.frailty {
                Frailty::None => FrailtySpec::None,
                Frailty::Gamma => FrailtySpec::Gamma { eta: args.eta },
                Frailty::Beta => FrailtySpec::Beta { a: args.beta_shape.0, b: args.beta_shape.1 },
                Frailty::Mixture => {
                    FrailtySpec::BetaMixture { weight: args.mix_weight, first: args.mix_first, second: args.mix_second }
                }
            };
            vec![SimConfig { frailty, ..base }]
        }
    }
}

pub fn run(args: Args) -> Result<Status> {
    let configs = scenarios(&args);
    for c in &configs {
        c.validate()?;
    }
    let methods: Vec<Method> = args
        .methods
        .iter()
        .map(|m| match m {
            MethodArg::Lmm => Method::Lmm,
            MethodArg::Em => Method::Em,
        })
        .collect();
    if methods.is_empty() {
        return Err(anyhow!("--methods must name at least one method"));
    }
    prepare_dir(&args.out)?;
    let mut manifest = Manifest::new("simulate", (&args, &configs), Some(args.seed))?;

    if let Some(path) = &args.dataset_out {
        write_dataset(path, &generate_dataset(&configs[0], 0)?)?;
        manifest.output(path);
    }

    let cmp_path = args.out.join("comparison.csv");
    let rep_path = args.out.join("replicates.csv");
    let mut cmp = csv::Writer::from_path(&cmp_path)?;
    let mut rep = csv::Writer::from_path(&rep_path)?;
    cmp.write_record([
        "scenario", "n", "frailty", "method", "bias", "std", "successes", "failures", "mean_seconds",
        "censored_fraction",
    ])?;
    rep.write_record(["scenario", "replicate", "censored_fraction", "method", "beta_hat", "seconds", "error"])?;

    let mut status = Status::Converged;
    println!("{:<3} {:>5}  {:<40} {:<4} {:>8} {:>8} {:>6}", "#", "n", "frailty", "", "bias", "std", "fails");
    for (k, sim) in configs.iter().enumerate() {
        let scenario = (k + 1).to_string();
        let start = Instant::now();
        let report = match run_comparison(sim, &FitConfig::default(), &EmConfig::default(), &methods) {
            Ok(r) => r,
            Err(lmfrail::Error::Bench(msg)) => {
                eprintln!("scenario {scenario}: {msg}");
                status = Status::NotConverged;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        manifest.time(format!("scenario {scenario}"), start.elapsed().as_secs_f64());
        for row in &report.rows {
            cmp.write_record([
                scenario.clone(),
                sim.n.to_string(),
                label(&sim.frailty),
                row.method.label().to_string(),
                opt_num(row.bias),
                opt_num(row.std),
                row.successes.to_string(),
                row.failures.to_string(),
                num(row.mean_seconds),
                num(report.mean_censored_fraction),
            ])?;
            let fmt4 = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.4}"));
            println!(
                "{:<3} {:>5}  {:<40} {:<4} {:>8} {:>8} {:>6}",
                scenario,
                sim.n,
                label(&sim.frailty),
                row.method.label(),
                fmt4(row.bias),
                fmt4(row.std),
                row.failures
            );
        }
        for r in &report.replicates {
            for e in &r.estimates {
                rep.write_record([
                    scenario.clone(),
                    r.replicate.to_string(),
                    num(r.censored_fraction),
                    e.method.label().to_string(),
                    opt_num(e.beta_hat),
                    num(e.seconds),
                    e.error.clone().unwrap_or_default(),
                ])?;
            }
        }
    }
    cmp.flush()?;
    rep.flush()?;
    manifest.output(&cmp_path);
    manifest.output(&rep_path);
    manifest.write(&args.out)?;
    Ok(status)
}
