//! Profile-likelihood estimation of the regression coefficients.
//!
//! `l_p(β)` is obtained by imputing the baseline hazard and maximizing over
//! `λ` at fixed `β`; the outer search maximizes `l_p` by quasi-Newton steps
//! on central-difference gradients.
//!
//! The nonparametric baseline is built event by event. With `Λ` the
//! cumulative hazard before the current event, `r = exp(Xβ)` of the failing
//! subject and `S` the risk-set sum of `exp(X_ℓβ)`, the increment `Δ`
//! solves the stationarity condition
//!
//! ```text
//! 1/Δ - S + Q'(Δ)/Q(Δ) = 0,   Q(Δ) = q(r (Λ + Δ))
//! ```
//!
//! where `q` is the event-record mixture factor. Clearing denominators gives
//! a quintic; among its positive roots with `Q > 0` the one maximizing
//! `log Δ - SΔ + log Q(Δ)` is kept. At `λ = 0` this is the Breslow
//! increment `1/S`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{BaselineHazard, LmmParams, RegressionParams, SurvivalDataset};
use crate::error::{Error, Result};
use crate::likelihood::log_likelihood;
use crate::optimizer::{maximize_lambda, LambdaFit, OptimizerConfig};
use crate::poly;
use crate::region::{membership, p_coeffs, q_coeffs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    ConstantRate,
    Nonparametric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    pub baseline_mode: BaselineMode,
    /// Starting coefficients; zeros when absent.
    pub beta_init: Option<Vec<f64>>,
    /// Outer convergence: max-norm of the accepted `β` step.
    pub beta_tol: f64,
    pub max_outer_iters: usize,
    pub optimizer: OptimizerConfig,
    /// Hold `λ` at this value instead of maximizing over it; `λ = 0` is the
    /// model without frailty.
    pub fixed_lambda: Option<LmmParams>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            baseline_mode: BaselineMode::Nonparametric,
            beta_init: None,
            beta_tol: 1e-6,
            max_outer_iters: 100,
            optimizer: OptimizerConfig::default(),
            fixed_lambda: None,
        }
    }
}

/// One accepted outer iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterStep {
    pub beta: Vec<f64>,
    pub profile_loglik: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub beta_hat: Vec<f64>,
    pub lambda_hat: LmmParams,
    pub on_boundary: bool,
    pub baseline_hat: BaselineHazard,
    pub profile_loglik: f64,
    /// Outer search converged and the final inner `λ` fit converged.
    pub converged: bool,
    pub inner_converged: bool,
    pub outer_iterations: usize,
    pub trace: Vec<OuterStep>,
}

/// Everything produced by one evaluation of the profile objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePoint {
    pub loglik: f64,
    pub lambda: LmmParams,
    pub baseline: BaselineHazard,
    /// `None` when `λ` was held fixed.
    pub lambda_fit: Option<LambdaFit>,
}

impl ProfilePoint {
    fn inner_converged(&self) -> bool {
        self.lambda_fit.as_ref().is_none_or(|f| f.converged)
    }
}

fn check_beta(data: &SurvivalDataset, beta: &[f64]) -> Result<()> {
    if beta.len() != data.p() {
        return Err(Error::InvalidParameter(format!(
            "beta has length {}, dataset has {} covariates",
            beta.len(),
            data.p()
        )));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite beta {beta:?}")));
    }
    Ok(())
}

/// Maximizer in `λ0` of the constant-rate likelihood at fixed `(β, λ)`.
///
/// The score in `s = log λ0` is scanned on a grid of ±10 around the
/// no-frailty solution `D / Σ T_i exp(X_iβ)`; every sign change is refined
/// by bisection and the root with the largest likelihood wins.
pub fn impute_constant_rate(data: &SurvivalDataset, beta: &[f64], lmm: &LmmParams) -> Result<f64> {
    data.require_events()?;
    check_beta(data, beta)?;
    let d = data.n_events() as f64;
    let exposure: Vec<f64> = data
        .records()
        .iter()
        .map(|r| r.time * r.linear_score(beta).exp())
        .collect();
    let w: f64 = exposure.iter().sum();
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidParameter("total exposure is not positive and finite".into()));
    }
    if *lmm == LmmParams::ORIGIN {
        return Ok(d / w);
    }
    let (qc, pc) = (q_coeffs(lmm), p_coeffs(lmm));
    // (log-likelihood, score) at s = log λ0; None outside the factor's domain.
    let objective = |s: f64| -> Option<(f64, f64)> {
        let rate = s.exp();
        let mut l = d * s - rate * w;
        let mut score = d - rate * w;
        for (r, e) in data.records().iter().zip(&exposure) {
            let y = rate * e;
            let c = if r.status { &qc } else { &pc };
            let f = c.eval(y);
            if !(f > 0.0) {
                return None;
            }
            l += f.ln();
            score += y * c.eval_derivative(y) / f;
        }
        Some((l, score))
    };

    let s0 = (d / w).ln();
    const GRID: usize = 400;
    let grid: Vec<(f64, Option<(f64, f64)>)> = (0..=GRID)
        .map(|k| {
            let s = s0 - 10.0 + 20.0 * k as f64 / GRID as f64;
            (s, objective(s))
        })
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for pair in grid.windows(2) {
        let ((mut lo, Some((_, slo))), (mut hi, Some((_, shi)))) = (pair[0], pair[1]) else {
            continue;
        };
        if slo.signum() == shi.signum() && slo != 0.0 {
            continue;
        }
        let positive_lo = slo > 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match objective(mid) {
                Some((_, sc)) if (sc > 0.0) == positive_lo => lo = mid,
                Some(_) => hi = mid,
                None => break,
            }
        }
        let s = 0.5 * (lo + hi);
        if let Some((l, _)) = objective(s) {
            if best.is_none_or(|(bl, _)| l > bl) {
                best = Some((l, s));
            }
        }
    }
    best.map(|(_, s)| s.exp()).ok_or_else(|| {
        Error::Optimizer("constant-rate score could not be bracketed".into())
    })
}

/// Nonparametric baseline from the event-by-event stationarity conditions.
///
/// Risk sets follow the Breslow conventions: subjects censored at an event
/// time stay at risk, and tied events share the risk set. Tied events are
/// solved one after another, each seeing the increments of the earlier
/// ones, and merged into a single jump. Their order is canonical (by risk
/// score, then covariates) so the result does not depend on record order.
pub fn breslow_lmm_update(data: &SurvivalDataset, beta: &[f64], lmm: &LmmParams) -> Result<BaselineHazard> {
    data.require_events()?;
    check_beta(data, beta)?;
    let q = q_coeffs(lmm).ascending();
    let records = data.records();
    let order = data.time_order();
    let risk: Vec<f64> = records.iter().map(|r| r.linear_score(beta).exp()).collect();
    let mut remaining: f64 = risk.iter().sum();
    let mut cumulative = 0.0;
    let mut jumps = Vec::new();
    let mut event_index = 0;
    let mut start = 0;
    while start < order.len() {
        let t = records[order[start]].time;
        let group = &order[start..start + order[start..].iter().take_while(|&&i| records[i].time == t).count()];
        let at_risk = remaining;
        let mut tied: Vec<usize> = group.iter().copied().filter(|&i| records[i].status).collect();
        tied.sort_by(|&a, &b| {
            risk[a].total_cmp(&risk[b]).then_with(|| {
                let (xa, xb) = (&records[a].covariates, &records[b].covariates);
                xa.iter().zip(xb).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let mut jump = 0.0;
        for &i in &tied {
            let inc = event_increment(&q, risk[i], cumulative + jump, at_risk)
                .ok_or(Error::NoAdmissibleRoot { event: event_index, time: t })?;
            jump += inc;
            event_index += 1;
        }
        if jump > 0.0 {
            jumps.push((t, jump));
            cumulative += jump;
        }
        remaining -= group.iter().map(|&i| risk[i]).sum::<f64>();
        start += group.len();
    }
    BaselineHazard::step(jumps)
}

/// Best admissible root of `Q - SΔQ + ΔQ' = 0` for one event.
fn event_increment(q: &[f64; 5], r: f64, before: f64, at_risk: f64) -> Option<f64> {
    let big_q = poly::compose_affine(q, r * before, r);
    let dq = poly::derivative(&big_q);
    let shifted = |c: &[f64]| poly::mul(&[0.0, 1.0], c);
    let mut score = poly::add(&big_q, &shifted(&big_q).iter().map(|c| -at_risk * c).collect::<Vec<_>>());
    score = poly::add(&score, &shifted(&dq));
    poly::real_roots_in(&score, 0.0, f64::INFINITY)
        .into_iter()
        .filter(|&x| x > 0.0)
        .filter_map(|x| {
            let qx = poly::eval(&big_q, x);
            (qx > 0.0).then(|| (x.ln() - at_risk * x + qx.ln(), x))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, x)| x)
}

fn impute(data: &SurvivalDataset, beta: &[f64], lmm: &LmmParams, mode: BaselineMode) -> Result<BaselineHazard> {
    match mode {
        BaselineMode::ConstantRate => BaselineHazard::constant(impute_constant_rate(data, beta, lmm)?),
        BaselineMode::Nonparametric => breslow_lmm_update(data, beta, lmm),
    }
}

/// One evaluation of the profile objective: baseline and `λ` are
/// alternated twice (baseline → λ → baseline → λ) starting from `λ = 0`.
pub fn profile_point(data: &SurvivalDataset, beta: &[f64], cfg: &FitConfig) -> Result<ProfilePoint> {
    let attach = |source: Error| Error::Profile {
        beta: beta.to_vec(),
        source: Box::new(source),
    };
    let inner = || -> Result<ProfilePoint> {
        if let Some(lmm) = cfg.fixed_lambda {
            if !membership(&lmm) {
                return Err(Error::InvalidParameter(format!("fixed λ {lmm:?} is not admissible")));
            }
            let baseline = impute(data, beta, &lmm, cfg.baseline_mode)?;
            let params = RegressionParams::new(beta.to_vec(), baseline)?;
            let loglik = log_likelihood(data, &params, &lmm)?;
            return Ok(ProfilePoint {
                loglik,
                lambda: lmm,
                baseline: params.baseline,
                lambda_fit: None,
            });
        }
        let mut lmm = LmmParams::ORIGIN;
        let mut last = None;
        for _ in 0..2 {
            let baseline = impute(data, beta, &lmm, cfg.baseline_mode)?;
            let params = RegressionParams::new(beta.to_vec(), baseline)?;
            let fit = maximize_lambda(data, &params, &cfg.optimizer)?;
            lmm = fit.lambda_hat;
            last = Some((params.baseline, fit));
        }
        let (baseline, fit) = last.expect("two rounds ran");
        Ok(ProfilePoint {
            loglik: fit.loglik,
            lambda: lmm,
            baseline,
            lambda_fit: Some(fit),
        })
    };
    inner().map_err(attach)
}

/// `l_p(β)`.
pub fn profile_loglik(data: &SurvivalDataset, beta: &[f64], cfg: &FitConfig) -> Result<f64> {
    Ok(profile_point(data, beta, cfg)?.loglik)
}

fn fd_step(b: f64) -> f64 {
    1e-5 * (1.0 + b.abs())
}

/// Central-difference gradient and diagonal second differences of `l_p`.
fn probe(data: &SurvivalDataset, beta: &[f64], f0: f64, cfg: &FitConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut grad = vec![0.0; beta.len()];
    let mut curv = vec![0.0; beta.len()];
    for j in 0..beta.len() {
        let h = fd_step(beta[j]);
        let mut b = beta.to_vec();
        b[j] = beta[j] + h;
        let up = profile_loglik(data, &b, cfg)?;
        b[j] = beta[j] - h;
        let down = profile_loglik(data, &b, cfg)?;
        grad[j] = (up - down) / (2.0 * h);
        curv[j] = (up + down - 2.0 * f0) / (h * h);
    }
    Ok((grad, curv))
}

fn initial_inverse_hessian(curv: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(curv.len(), curv.len(), |i, j| {
        if i != j {
            0.0
        } else if curv[i] < 0.0 {
            -1.0 / curv[i]
        } else {
            1.0
        }
    })
}

/// Largest coordinate change of a single outer step.
const MAX_BETA_STEP: f64 = 1.0;

/// Full estimation: maximizes `l_p` over `β` and reports the fit at `β̂`.
pub fn fit(data: &SurvivalDataset, cfg: &FitConfig) -> Result<FitResult> {
    data.require_events()?;
    if !(cfg.beta_tol > 0.0) || cfg.max_outer_iters == 0 {
        return Err(Error::InvalidParameter("beta_tol and max_outer_iters must be positive".into()));
    }
    let p = data.p();
    let mut beta = cfg.beta_init.clone().unwrap_or_else(|| vec![0.0; p]);
    check_beta(data, &beta)?;

    let mut point = profile_point(data, &beta, cfg)?;
    let mut trace = Vec::new();
    let finish = |beta: Vec<f64>, point: ProfilePoint, outer_converged: bool, iters: usize, trace| {
        let inner_converged = point.inner_converged();
        FitResult {
            beta_hat: beta,
            lambda_hat: point.lambda,
            on_boundary: point.lambda_fit.as_ref().is_some_and(|f| f.on_boundary),
            baseline_hat: point.baseline,
            profile_loglik: point.loglik,
            converged: outer_converged && inner_converged,
            inner_converged,
            outer_iterations: iters,
            trace,
        }
    };
    if p == 0 {
        return Ok(finish(beta, point, true, 0, trace));
    }

    let (mut grad, curv) = probe(data, &beta, point.loglik, cfg)?;
    let mut hinv = initial_inverse_hessian(&curv);
    let gnorm = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
    trace.push(OuterStep { beta: beta.clone(), profile_loglik: point.loglik, grad_norm: gnorm(&grad) });

    let mut converged = false;
    let mut iters = 0;
    while iters < cfg.max_outer_iters {
        iters += 1;
        let g = nalgebra::DVector::from_column_slice(&grad);
        let mut dir = &hinv * &g;
        if g.dot(&dir) <= 0.0 {
            hinv = initial_inverse_hessian(&vec![-1.0; p]);
            dir = g.clone();
        }
        let longest = dir.amax();
        if longest > MAX_BETA_STEP {
            dir *= MAX_BETA_STEP / longest;
        }
        let slope = g.dot(&dir);

        let mut accepted = None;
        let mut t = 1.0;
        for _ in 0..=30 {
            let cand: Vec<f64> = beta.iter().zip(dir.iter()).map(|(b, d)| b + t * d).collect();
            if let Ok(pt) = profile_point(data, &cand, cfg) {
                if pt.loglik >= point.loglik + 1e-4 * t * slope {
                    accepted = Some((cand, pt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next_beta, next_point)) = accepted else {
            // No ascent along the quasi-Newton direction: stationary up to
            // the resolution of the numeric gradient.
            converged = dir.amax() < cfg.beta_tol;
            break;
        };
        let step: Vec<f64> = next_beta.iter().zip(&beta).map(|(a, b)| a - b).collect();
        let step_max = step.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
        let (next_grad, _) = probe(data, &next_beta, next_point.loglik, cfg)?;

        // BFGS on -l_p.
        let s = nalgebra::DVector::from_vec(step);
        let yv = -(nalgebra::DVector::from_column_slice(&next_grad) - &g);
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(p, p);
            let left = &eye - &s * yv.transpose() * rho;
            let right = &eye - &yv * s.transpose() * rho;
            hinv = &left * &hinv * &right + &s * s.transpose() * rho;
        }

        beta = next_beta;
        point = next_point;
        grad = next_grad;
        trace.push(OuterStep { beta: beta.clone(), profile_loglik: point.loglik, grad_norm: gnorm(&grad) });
        if step_max < cfg.beta_tol {
            converged = true;
            break;
        }
    }
    Ok(finish(beta, point, converged, iters, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SurvivalRecord;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(rows: &[(f64, bool, f64)]) -> SurvivalDataset {
        SurvivalDataset::new(rows.iter().map(|&(t, s, x)| SurvivalRecord::new(t, s, vec![x])).collect()).unwrap()
    }

    fn jumps(h: &BaselineHazard) -> Vec<(f64, f64)> {
        match h {
            BaselineHazard::Nonparametric(j) => j.iter().map(|j| (j.time, j.increment)).collect(),
            BaselineHazard::ConstantRate(_) => panic!("expected a step hazard"),
        }
    }

    #[test]
    fn nelson_aalen_at_origin() {
        let d = dataset(&[(3.0, true, 0.0), (1.0, true, 0.0), (4.0, true, 0.0), (2.0, true, 0.0)]);
        let h = breslow_lmm_update(&d, &[0.0], &LmmParams::ORIGIN).unwrap();
        let expect = [1.0 / 4.0, 1.0 / 3.0, 1.0 / 2.0, 1.0];
        let mut acc = 0.0;
        for (k, (t, inc)) in jumps(&h).into_iter().enumerate() {
            acc += expect[k];
            assert_eq!(t, (k + 1) as f64);
            assert_relative_eq!(inc, expect[k], max_relative = 1e-15);
            assert_relative_eq!(h.cumulative(t), acc, max_relative = 1e-15);
        }
    }

    fn random_dataset(rng: &mut ChaCha8Rng, n: usize) -> SurvivalDataset {
        let rows: Vec<(f64, bool, f64)> = (0..n)
            .map(|_| {
                // Coarse times so that ties occur.
                let t = (rng.random_range(0.1..5.0f64) * 4.0).ceil() / 4.0;
                (t, rng.random_bool(0.7), rng.random_range(-1.5..1.5))
            })
            .collect();
        let mut rows = rows;
        rows[0].1 = true;
        dataset(&rows)
    }

    #[test]
    fn origin_gives_breslow_increments() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.random_range(2..=50);
            let d = random_dataset(&mut rng, n);
            let beta = [rng.random_range(-1.0..1.0)];
            let h = breslow_lmm_update(&d, &beta, &LmmParams::ORIGIN).unwrap();
            for (t, inc) in jumps(&h) {
                let s: f64 = d.records().iter().filter(|r| r.time >= t).map(|r| (r.covariates[0] * beta[0]).exp()).sum();
                let dt = d.events_at(t) as f64;
                assert_relative_eq!(inc, dt / s, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn selected_root_matches_grid_maximum() {
        let d = dataset(&[(1.0, false, 0.3), (2.0, true, -0.2), (3.0, false, 0.5)]);
        let lmm = LmmParams::new(0.05, 0.0, 0.002);
        let beta = 0.4;
        let h = breslow_lmm_update(&d, &[beta], &lmm).unwrap();
        let inc = jumps(&h)[0].1;
        let r = (-0.2 * beta as f64).exp();
        let s = r + (0.5 * beta as f64).exp();
        let qc = q_coeffs(&lmm);
        let contribution = |x: f64| x.ln() - s * x + qc.eval(r * x).ln();
        let (mut lo, mut hi) = (1e-6, 20.0);
        let mut best = lo;
        for _ in 0..6 {
            let k = 20_000;
            best = (0..=k)
                .map(|i| lo + (hi - lo) * i as f64 / k as f64)
                .max_by(|a, b| contribution(*a).total_cmp(&contribution(*b)))
                .unwrap();
            let w = (hi - lo) / k as f64 * 4.0;
            lo = (best - w).max(1e-9);
            hi = best + w;
        }
        assert!((inc - best).abs() < 1e-6, "{inc} vs {best}");
    }

    #[test]
    fn stationarity_residual_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let lmm = LmmParams::new(0.05, 0.01, 0.01);
        assert!(membership(&lmm));
        for _ in 0..20 {
            let d = random_dataset(&mut rng, 40);
            let beta = [0.3];
            let h = breslow_lmm_update(&d, &beta, &lmm).unwrap();
            let qc = q_coeffs(&lmm);
            let records = d.records();
            let mut before = 0.0;
            for (t, jump) in jumps(&h) {
                let s: f64 = records.iter().filter(|r| r.time >= t).map(|r| (r.covariates[0] * beta[0]).exp()).sum();
                let mut partial = 0.0;
                // Ties are solved in increasing risk score (β > 0: increasing x).
                let mut tied: Vec<_> = records.iter().filter(|r| r.status && r.time == t).collect();
                tied.sort_by(|a, b| a.covariates[0].total_cmp(&b.covariates[0]));
                for r in tied {
                    let rr = (r.covariates[0] * beta[0]).exp();
                    let inc = {
                        // Recover this event's own increment from the sequential solve.
                        event_increment(&qc.ascending(), rr, before + partial, s).unwrap()
                    };
                    let u = rr * (before + partial + inc);
                    let residual = 1.0 / inc - s + rr * qc.eval_derivative(u) / qc.eval(u);
                    assert!(residual.abs() < 1e-7, "{residual}");
                    partial += inc;
                }
                assert_relative_eq!(partial, jump, max_relative = 1e-12);
                before += jump;
            }
        }
    }

    #[test]
    fn constant_rate_examples() {
        let d = dataset(&[(2.0, true, 0.0), (3.0, false, 0.0), (5.0, true, 0.0)]);
        assert_eq!(impute_constant_rate(&d, &[0.0], &LmmParams::ORIGIN).unwrap(), 2.0 / 10.0);
        let one = dataset(&[(1.0, true, 0.0)]);
        assert_eq!(impute_constant_rate(&one, &[0.0], &LmmParams::ORIGIN).unwrap(), 1.0);

        let lmm = LmmParams::new(0.05, 0.01, 0.01);
        let rate = impute_constant_rate(&d, &[0.0], &lmm).unwrap();
        // Score in log λ0 at the returned rate.
        let (qc, pc) = (q_coeffs(&lmm), p_coeffs(&lmm));
        let mut score = 2.0 - rate * 10.0;
        for r in d.records() {
            let y = rate * r.time;
            let c = if r.status { &qc } else { &pc };
            score += y * c.eval_derivative(y) / c.eval(y);
        }
        assert!(score.abs() < 1e-8, "{score}");
    }

    #[test]
    fn no_covariates_constant_rate_fit_is_exponential_mle() {
        let d = SurvivalDataset::new(
            [(2.0, true), (3.0, false), (5.0, true), (0.5, true)]
                .iter()
                .map(|&(t, s)| SurvivalRecord::new(t, s, vec![]))
                .collect(),
        )
        .unwrap();
        let cfg = FitConfig {
            baseline_mode: BaselineMode::ConstantRate,
            fixed_lambda: Some(LmmParams::ORIGIN),
            ..FitConfig::default()
        };
        let f = fit(&d, &cfg).unwrap();
        assert!(f.converged);
        assert_eq!(f.baseline_hat, BaselineHazard::ConstantRate(3.0 / 10.5));
        assert_relative_eq!(f.profile_loglik, 3.0 * (3.0f64 / 10.5).ln() - 3.0, max_relative = 1e-14);
    }

    #[test]
    fn profile_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_dataset(&mut rng, 30);
        let mut rev = d.records().to_vec();
        rev.reverse();
        let rev = SurvivalDataset::new(rev).unwrap();
        let cfg = FitConfig::default();
        let a = profile_loglik(&d, &[0.2], &cfg).unwrap();
        let b = profile_loglik(&rev, &[0.2], &cfg).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn all_censored_is_refused() {
        let d = dataset(&[(1.0, false, 0.0), (2.0, false, 1.0)]);
        assert!(matches!(fit(&d, &FitConfig::default()), Err(Error::InvalidData(m)) if m.contains("no events")));
    }
}
