use std::path::PathBuf;

use anyhow::{anyhow, Result};
use lmfrail::sim::binning_diagnostic;
use serde::Serialize;

use crate::manifest::{prepare_dir, Manifest};
use crate::table::{num, opt_num, read_dataset};
use crate::Status;

#[derive(Debug, clap::Args, Serialize)]
pub struct Args {
    /// CSV with columns time, status, x1..xp (and optionally id).
    pub csv: PathBuf,
    /// Bin lengths: an integer range `a..b` (inclusive) or a list `g1,g2,...`.
    #[arg(long, value_parser = bins, default_value = "1..10")]
    pub bins: Bins,
    /// Output directory for diagnose.csv and manifest.json.
    #[arg(long, default_value_os_t = crate::default_out_dir())]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bins(pub Vec<f64>);

fn bins(s: &str) -> Result<Bins, String> {
    let lengths: Vec<f64> = if let Some((a, b)) = s.split_once("..") {
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|_| format!("'{v}' is not a positive integer"));
        let (a, b) = (parse(a)?, parse(b)?);
        (a..=b).map(f64::from).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number")))
            .collect::<Result<_, _>>()?
    };
    if lengths.is_empty() || lengths.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(format!("bin lengths must be positive, got '{s}'"));
    }
    Ok(Bins(lengths))
}

pub fn run(args: Args) -> Result<Status> {
    let data = read_dataset(&args.csv)?;
    let rows = binning_diagnostic(&data, &args.bins.0).map_err(|e| anyhow!(e))?;
    prepare_dir(&args.out)?;
    let mut manifest = Manifest::new("diagnose", &args, None)?;
    let path = args.out.join("diagnose.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["gamma", "bins", "ratio", "skewness"])?;
    println!("{:>8} {:>6} {:>10} {:>10}", "gamma", "bins", "var/mean", "skewness");
    for r in &rows {
        w.write_record([num(r.bin_length), r.bins.to_string(), opt_num(r.ratio), opt_num(r.skewness)])?;
        let fmt4 = |v: Option<f64>| v.map_or("-".into(), |x| format!("{x:.4}"));
        println!("{:>8} {:>6} {:>10} {:>10}", r.bin_length, r.bins, fmt4(r.ratio), fmt4(r.skewness));
    }
    w.flush()?;
    manifest.output(&path);
    manifest.write(&args.out)?;
    Ok(Status::Converged)
}
