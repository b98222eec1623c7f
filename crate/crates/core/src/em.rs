//! Gamma-frailty EM: `θ ~ Gamma(1/η, η)` (mean 1, variance `η`), Breslow
//! baseline, `η` profiled on a grid.
//!
//! Given `(β, Λ0, η)` the posterior frailty mean of subject `i` is
//! `w_i = (δ_i + 1/η) / (1/η + Λ0(T_i) e^{X_iβ})`. The M-step maximizes the
//! weighted partial likelihood in `β` and sets the Breslow increments
//! `d_t / Σ_{risk} w_ℓ e^{X_ℓβ}`. The observed-data log-likelihood is
//!
//! ```text
//! Σ δ_i [log λ0(T_i) + X_iβ] - Σ (1/η + δ_i) log(1 + η Λ0(T_i) e^{X_iβ})
//! ```
//!
//! whose `η → 0` limit replaces the last sum by `Σ Λ0(T_i) e^{X_iβ}`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{BaselineHazard, SurvivalDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmConfig {
    /// Candidate variances; `0` is the model without frailty.
    pub eta_grid: Vec<f64>,
    /// Re-scan between the neighbours of the best grid point once.
    pub refine: bool,
    /// Stop when `β` and the relative baseline increments change by less.
    pub tol: f64,
    pub max_em_iters: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            eta_grid: vec![0.0, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0, 1.5, 2.0],
            refine: true,
            tol: 1e-7,
            max_em_iters: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmFit {
    pub beta_hat: Vec<f64>,
    pub eta_hat: f64,
    pub baseline_hat: BaselineHazard,
    pub loglik: f64,
    pub converged: bool,
    /// EM iterations at `eta_hat`.
    pub iterations: usize,
    /// `(η, maximized log-likelihood)` for every evaluated `η`.
    pub eta_profile: Vec<(f64, f64)>,
}

/// EM result at one fixed `η`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedEtaFit {
    pub eta: f64,
    pub beta: Vec<f64>,
    pub baseline: BaselineHazard,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Observed-data log-likelihood after every EM iteration.
    pub loglik_trace: Vec<f64>,
}

/// Records in time order, grouped by distinct time.
struct Layout {
    order: Vec<usize>,
    /// `(time, start, end, events)` into `order`.
    groups: Vec<(f64, usize, usize, usize)>,
}

impl Layout {
    fn new(data: &SurvivalDataset) -> Self {
        let records = data.records();
        let order = data.time_order();
        let mut groups = Vec::new();
        let mut start = 0;
        while start < order.len() {
            let t = records[order[start]].time;
            let end = start + order[start..].iter().take_while(|&&i| records[i].time == t).count();
            let events = order[start..end].iter().filter(|&&i| records[i].status).count();
            groups.push((t, start, end, events));
            start = end;
        }
        Self { order, groups }
    }

    /// `Λ0(T_i)` per record and `λ0(T_i)` (jump over tied events) per event record.
    fn hazards(&self, data: &SurvivalDataset, increments: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = data.len();
        let mut cumulative = vec![0.0; n];
        let mut point = vec![0.0; n];
        let mut acc = 0.0;
        for (g, &(_, start, end, events)) in self.groups.iter().enumerate() {
            acc += increments[g];
            for &i in &self.order[start..end] {
                cumulative[i] = acc;
                if events > 0 {
                    point[i] = increments[g] / events as f64;
                }
            }
        }
        (cumulative, point)
    }

    fn baseline(&self, increments: &[f64]) -> Result<BaselineHazard> {
        BaselineHazard::step(
            self.groups
                .iter()
                .zip(increments)
                .filter(|((.., events), _)| *events > 0)
                .map(|(&(t, ..), &inc)| (t, inc))
                .collect(),
        )
    }
}

fn scores(data: &SurvivalDataset, beta: &[f64]) -> Vec<f64> {
    data.records().iter().map(|r| r.linear_score(beta)).collect()
}

/// Observed-data log-likelihood for per-group baseline increments.
fn marginal_from_parts(data: &SurvivalDataset, layout: &Layout, beta: &[f64], increments: &[f64], eta: f64) -> f64 {
    let (cumulative, point) = layout.hazards(data, increments);
    data.records()
        .iter()
        .zip(scores(data, beta))
        .enumerate()
        .map(|(i, (r, s))| {
            let y = cumulative[i] * s.exp();
            let event = if r.status { point[i].ln() + s } else { 0.0 };
            let tail = if eta > 0.0 {
                (1.0 / eta + r.delta()) * (eta * y).ln_1p()
            } else {
                y
            };
            event - tail
        })
        .sum()
}

/// Observed-data (marginal) log-likelihood of the gamma-frailty model.
pub fn marginal_loglik(data: &SurvivalDataset, beta: &[f64], baseline: &BaselineHazard, eta: f64) -> Result<f64> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("frailty variance must be nonnegative, got {eta}")));
    }
    let layout = Layout::new(data);
    let increments: Vec<f64> = layout.groups.iter().map(|&(t, ..)| baseline.jump_at(t)).collect();
    for (&(t, _, _, events), inc) in layout.groups.iter().zip(&increments) {
        if events > 0 && !(*inc > 0.0) {
            return Err(Error::InvalidParameter(format!("baseline has no mass at event time {t}")));
        }
    }
    Ok(marginal_from_parts(data, &layout, beta, &increments, eta))
}

/// Posterior frailty means `(δ_i + 1/η) / (1/η + Λ0(T_i) e^{X_iβ})`; all ones at `η = 0`.
pub fn frailty_weights(data: &SurvivalDataset, beta: &[f64], baseline: &BaselineHazard, eta: f64) -> Vec<f64> {
    let layout = Layout::new(data);
    let increments: Vec<f64> = layout.groups.iter().map(|&(t, ..)| baseline.jump_at(t)).collect();
    weights_from_parts(data, &layout, beta, &increments, eta)
}

fn weights_from_parts(data: &SurvivalDataset, layout: &Layout, beta: &[f64], increments: &[f64], eta: f64) -> Vec<f64> {
    if eta == 0.0 {
        return vec![1.0; data.len()];
    }
    let (cumulative, _) = layout.hazards(data, increments);
    data.records()
        .iter()
        .zip(scores(data, beta))
        .enumerate()
        .map(|(i, (r, s))| (r.delta() + 1.0 / eta) / (1.0 / eta + cumulative[i] * s.exp()))
        .collect()
}

/// Weighted Breslow partial log-likelihood with gradient and Hessian.
fn weighted_partial(
    data: &SurvivalDataset,
    layout: &Layout,
    beta: &[f64],
    weights: &[f64],
) -> (f64, DVector<f64>, DMatrix<f64>) {
    let p = beta.len();
    let records = data.records();
    let s = scores(data, beta);
    let mut s0 = 0.0;
    let mut s1 = DVector::zeros(p);
    let mut s2 = DMatrix::zeros(p, p);
    let mut value = 0.0;
    let mut grad = DVector::zeros(p);
    let mut hess = DMatrix::zeros(p, p);
    // Risk sets grow as time runs backwards.
    for &(_, start, end, events) in layout.groups.iter().rev() {
        for &i in &layout.order[start..end] {
            let x = DVector::from_column_slice(&records[i].covariates);
            let e = weights[i] * s[i].exp();
            s0 += e;
            s1 += &x * e;
            s2 += &x * x.transpose() * e;
        }
        if events == 0 {
            continue;
        }
        let d = events as f64;
        let mean = &s1 / s0;
        for &i in layout.order[start..end].iter().filter(|&&i| records[i].status) {
            value += s[i];
            grad += DVector::from_column_slice(&records[i].covariates);
        }
        value -= d * s0.ln();
        grad -= &mean * d;
        hess -= (&s2 / s0 - &mean * mean.transpose()) * d;
    }
    (value, grad, hess)
}

/// Maximizes the weighted partial likelihood by Newton steps with halving.
fn weighted_cox(data: &SurvivalDataset, layout: &Layout, start: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    let mut beta = start.to_vec();
    if beta.is_empty() {
        return Ok(beta);
    }
    let (mut value, mut grad, mut hess) = weighted_partial(data, layout, &beta, weights);
    for _ in 0..100 {
        let neg = -&hess;
        let step = match neg.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => {
                let shift = neg.diagonal().abs().max().max(1.0) * 1e-8;
                (neg + DMatrix::identity(beta.len(), beta.len()) * shift)
                    .cholesky()
                    .ok_or_else(|| Error::Optimizer("partial-likelihood Hessian is singular".into()))?
                    .solve(&grad)
            }
        };
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..=30 {
            let cand: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, d)| b + t * d).collect();
            let (v, g, h) = weighted_partial(data, layout, &cand, weights);
            if v.is_finite() && v >= value - 1e-12 * value.abs().max(1.0) {
                beta = cand;
                value = v;
                grad = g;
                hess = h;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved || step.amax() * t < 1e-12 {
            break;
        }
    }
    Ok(beta)
}

fn breslow_increments(data: &SurvivalDataset, layout: &Layout, beta: &[f64], weights: &[f64]) -> Vec<f64> {
    let s = scores(data, beta);
    let mut at_risk = 0.0;
    let mut out = vec![0.0; layout.groups.len()];
    for (g, &(_, start, end, events)) in layout.groups.iter().enumerate().rev() {
        at_risk += layout.order[start..end].iter().map(|&i| weights[i] * s[i].exp()).sum::<f64>();
        out[g] = events as f64 / at_risk;
    }
    out
}

/// EM at fixed `η`, starting from `(beta, no-frailty Breslow)` when no start is given.
pub fn em_fixed_eta(data: &SurvivalDataset, eta: f64, cfg: &EmConfig, start: Option<&[f64]>) -> Result<FixedEtaFit> {
    data.require_events()?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("frailty variance must be nonnegative, got {eta}")));
    }
    let p = data.p();
    let layout = Layout::new(data);
    let mut beta = start.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; p]);
    if beta.len() != p {
        return Err(Error::InvalidParameter(format!("start has length {}, expected {p}", beta.len())));
    }
    let ones = vec![1.0; data.len()];
    let mut increments = breslow_increments(data, &layout, &beta, &ones);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_em_iters {
        iterations += 1;
        let w = weights_from_parts(data, &layout, &beta, &increments, eta);
        let next_beta = weighted_cox(data, &layout, &beta, &w)?;
        let next_inc = breslow_increments(data, &layout, &next_beta, &w);
        let db = next_beta.iter().zip(&beta).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let dl = next_inc
            .iter()
            .zip(&increments)
            .filter(|(a, _)| **a > 0.0)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs() / a));
        beta = next_beta;
        increments = next_inc;
        trace.push(marginal_from_parts(data, &layout, &beta, &increments, eta));
        if db < cfg.tol && dl < cfg.tol {
            converged = true;
            break;
        }
    }
    let loglik = marginal_from_parts(data, &layout, &beta, &increments, eta);
    Ok(FixedEtaFit {
        eta,
        beta,
        baseline: layout.baseline(&increments)?,
        loglik,
        converged,
        iterations,
        loglik_trace: trace,
    })
}

/// Profiles `η` over the grid (and once more between the neighbours of the
/// best grid point), running EM at each value.
pub fn em_fit(data: &SurvivalDataset, cfg: &EmConfig) -> Result<EmFit> {
    data.require_events()?;
    if cfg.eta_grid.is_empty() || cfg.eta_grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(Error::InvalidParameter("eta grid must be nonempty and nonnegative".into()));
    }
    if !(cfg.tol > 0.0) || cfg.max_em_iters == 0 {
        return Err(Error::InvalidParameter("EM tolerance and iteration cap must be positive".into()));
    }
    let cox = em_fixed_eta(data, 0.0, cfg, None)?;
    let run = |etas: &[f64]| -> Result<Vec<FixedEtaFit>> {
        etas.par_iter().map(|&eta| em_fixed_eta(data, eta, cfg, Some(&cox.beta))).collect()
    };
    let mut grid = cfg.eta_grid.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mut fits = run(&grid)?;
    if cfg.refine && grid.len() > 1 {
        let k = argmax(&fits);
        let lo = grid[k.saturating_sub(1)];
        let hi = grid[(k + 1).min(grid.len() - 1)];
        let fine: Vec<f64> = (1..10)
            .map(|j| lo + (hi - lo) * j as f64 / 10.0)
            .filter(|e| !grid.contains(e))
            .collect();
        fits.extend(run(&fine)?);
    }
    let k = argmax(&fits);
    let mut eta_profile: Vec<(f64, f64)> = fits.iter().map(|f| (f.eta, f.loglik)).collect();
    eta_profile.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best = fits.swap_remove(k);
    Ok(EmFit {
        beta_hat: best.beta,
        eta_hat: best.eta,
        baseline_hat: best.baseline,
        loglik: best.loglik,
        converged: best.converged,
        iterations: best.iterations,
        eta_profile,
    })
}

fn argmax(fits: &[FixedEtaFit]) -> usize {
    fits.iter()
        .enumerate()
        .max_by(|a, b| a.1.loglik.total_cmp(&b.1.loglik))
        .map(|(k, _)| k)
        .expect("nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SurvivalRecord;
    use crate::sim::{generate_dataset, FrailtySpec, SimConfig};

    #[test]
    fn censored_weights_are_below_one() {
        let d = SurvivalDataset::new(vec![
            SurvivalRecord::new(1.0, true, vec![0.0]),
            SurvivalRecord::new(2.0, false, vec![1.0]),
        ])
        .unwrap();
        let h = BaselineHazard::step(vec![(1.0, 0.5)]).unwrap();
        let w = frailty_weights(&d, &[0.3], &h, 0.5);
        assert!(w[1] < 1.0 && w[1] > 0.0);
        // Event weight (1 + 1/η)/(1/η + y) exceeds one when y < 1.
        assert!((w[0] - 3.0 / 2.5).abs() < 1e-12);
        assert_eq!(frailty_weights(&d, &[0.3], &h, 0.0), vec![1.0, 1.0]);
    }

    #[test]
    fn em_ascends_the_marginal_likelihood() {
        let cfg = SimConfig { n: 200, frailty: FrailtySpec::Gamma { eta: 0.5 }, ..SimConfig::default() };
        let d = generate_dataset(&cfg, 0).unwrap();
        let fit = em_fixed_eta(&d, 0.5, &EmConfig::default(), None).unwrap();
        assert!(fit.converged);
        for w in fit.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-10, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn mean_weight_is_near_one_at_convergence() {
        let cfg = SimConfig { n: 400, frailty: FrailtySpec::Gamma { eta: 0.3 }, ..SimConfig::default() };
        let d = generate_dataset(&cfg, 1).unwrap();
        let fit = em_fit(&d, &EmConfig::default()).unwrap();
        assert!(fit.converged);
        let w = frailty_weights(&d, &fit.beta_hat, &fit.baseline_hat, fit.eta_hat);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
        assert!(w.iter().all(|&x| x > 0.0));
    }
}
