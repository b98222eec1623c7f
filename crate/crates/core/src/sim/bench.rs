use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::{generate_dataset, SimConfig};
use crate::em::{em_fit, EmConfig};
use crate::error::{Error, Result};
use crate::profile::{fit, FitConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Local-mixture profile fit.
    Lmm,
    /// Gamma-frailty EM.
    Em,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Lmm => "LMM",
            Method::Em => "EM",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub method: Method,
    /// Mean estimate minus the true coefficient over successful replicates.
    pub bias: Option<f64>,
    /// Sample standard deviation; `None` with fewer than two successes.
    pub std: Option<f64>,
    pub successes: usize,
    pub failures: usize,
    pub mean_seconds: f64,
}

/// Outcome of one method on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub method: Method,
    /// `None` when the fit failed or did not converge.
    pub beta_hat: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub replicate: u64,
    pub censored_fraction: f64,
    pub estimates: Vec<Estimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub replicates: Vec<ReplicateOutcome>,
    pub mean_censored_fraction: f64,
}

/// Largest tolerated share of failed fits per method.
const MAX_FAILURE_SHARE: f64 = 0.2;

fn run_one(method: Method, data: &crate::data::SurvivalDataset, fit_cfg: &FitConfig, em_cfg: &EmConfig) -> Estimate {
    let start = Instant::now();
    let outcome = match method {
        Method::Lmm => fit(data, fit_cfg).map(|f| (f.beta_hat[0], f.converged)),
        Method::Em => em_fit(data, em_cfg).map(|f| (f.beta_hat[0], f.converged)),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (beta_hat, error) = match outcome {
        Ok((b, true)) => (Some(b), None),
        Ok((_, false)) => (None, Some("not converged".to_string())),
        Err(e) => (None, Some(e.to_string())),
    };
    Estimate { method, beta_hat, seconds, error }
}

/// Generates every replicate, fits it with each method and summarizes bias
/// and spread of the coefficient estimates. Replicates run in parallel; the
/// result does not depend on scheduling.
pub fn run_comparison(
    sim: &SimConfig,
    fit_cfg: &FitConfig,
    em_cfg: &EmConfig,
    methods: &[Method],
) -> Result<ComparisonReport> {
    sim.validate()?;
    let replicates: Vec<ReplicateOutcome> = (0..sim.replicates as u64)
        .into_par_iter()
        .map(|r| -> Result<ReplicateOutcome> {
            let data = generate_dataset(sim, r)?;
            let censored_fraction = 1.0 - data.n_events() as f64 / data.len() as f64;
            let estimates = methods.iter().map(|&m| run_one(m, &data, fit_cfg, em_cfg)).collect();
            Ok(ReplicateOutcome { replicate: r, censored_fraction, estimates })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (k, &method) in methods.iter().enumerate() {
        let est: Vec<&Estimate> = replicates.iter().map(|r| &r.estimates[k]).collect();
        let values: Vec<f64> = est.iter().filter_map(|e| e.beta_hat).collect();
        let failures = est.len() - values.len();
        if failures as f64 > MAX_FAILURE_SHARE * est.len() as f64 {
            let first = est.iter().find_map(|e| e.error.clone()).unwrap_or_default();
            return Err(Error::Bench(format!(
                "{} failed on {failures} of {} replicates (first: {first})",
                method.label(),
                est.len()
            )));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let bias = (!values.is_empty()).then(|| mean - sim.beta_true);
        let std = (values.len() > 1)
            .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
        let mean_seconds = est.iter().map(|e| e.seconds).sum::<f64>() / est.len() as f64;
        rows.push(ComparisonRow { method, bias, std, successes: values.len(), failures, mean_seconds });
    }
    let mean_censored_fraction =
        replicates.iter().map(|r| r.censored_fraction).sum::<f64>() / replicates.len() as f64;
    Ok(ComparisonReport { rows, replicates, mean_censored_fraction })
}
