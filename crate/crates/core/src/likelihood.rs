//! Local-mixture log-likelihood and its derivatives in `λ`.
//!
//! For a record with `y = Λ0(T) exp(Xβ)` the frailty-conditional density
//! kernel is `f(θ) = θ^δ exp(-θ y)`. The order-four expansion around `θ = 1`
//! multiplies `f(1)` by `1 + λ2 A2 + λ3 A3 + λ4 A4` with `A_j = f^(j)(1) / f(1)`:
//!
//! ```text
//! δ = 0:  A_j = (-y)^j
//! δ = 1:  A_j = (-y)^(j-1) (j - y)
//! ```
//!
//! so the factor equals `p(y)` for censored and `q(y)` for event records.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::data::{BaselineHazard, LmmParams, RegressionParams, SurvivalDataset, SurvivalRecord};
use crate::error::{Error, Result};
use crate::optimizer::{ConcaveObjective, Evaluation};

/// `(A2, A3, A4)` for one record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureTerms {
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl MixtureTerms {
    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.a2, self.a3, self.a4)
    }

    /// `1 + λ·A`.
    pub fn factor(&self, lmm: &LmmParams) -> f64 {
        1.0 + lmm.lambda2 * self.a2 + lmm.lambda3 * self.a3 + lmm.lambda4 * self.a4
    }
}

pub fn mixture_weight_terms(status: bool, y: f64) -> MixtureTerms {
    let y2 = y * y;
    if status {
        MixtureTerms {
            a2: -y * (2.0 - y),
            a3: y2 * (3.0 - y),
            a4: -y2 * y * (4.0 - y),
        }
    } else {
        MixtureTerms {
            a2: y2,
            a3: -y2 * y,
            a4: y2 * y2,
        }
    }
}

/// `y_i`: the cumulative baseline hazard at `T_i` scaled by `exp(X_i β)`.
pub fn linear_predictor(record: &SurvivalRecord, params: &RegressionParams) -> Result<f64> {
    let y = params.baseline.cumulative(record.time) * record.linear_score(&params.beta).exp();
    if !y.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite linear predictor at time {}",
            record.time
        )));
    }
    Ok(y)
}

/// Everything the likelihood needs for fixed `(β, Λ0)`: the `λ`-free part
/// and the per-record mixture terms.
#[derive(Debug, Clone)]
pub struct MixtureDesign {
    /// `Σ δ_i [log λ0(T_i) + X_i β] - Σ y_i`.
    pub base: f64,
    pub terms: Vec<Vector3<f64>>,
    pub y: Vec<f64>,
}

impl MixtureDesign {
    pub fn new(data: &SurvivalDataset, params: &RegressionParams) -> Result<Self> {
        if params.beta.len() != data.p() {
            return Err(Error::InvalidParameter(format!(
                "beta has length {}, dataset has {} covariates",
                params.beta.len(),
                data.p()
            )));
        }
        let (cumulative, tied_events) = sweep(data, &params.baseline);
        let mut base = 0.0;
        let mut terms = Vec::with_capacity(data.len());
        let mut ys = Vec::with_capacity(data.len());
        for (i, r) in data.records().iter().enumerate() {
            let score = r.linear_score(&params.beta);
            let y = cumulative[i] * score.exp();
            if !y.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite linear predictor at time {}",
                    r.time
                )));
            }
            if r.status {
                base += log_event_hazard(&params.baseline, r.time, tied_events[i])? + score;
            }
            base -= y;
            terms.push(mixture_weight_terms(r.status, y).to_vector());
            ys.push(y);
        }
        Ok(Self { base, terms, y: ys })
    }

    /// `λ`-part of the log-likelihood, `Σ log(1 + λ·A_i)`.
    pub fn mixture_loglik(&self, lmm: &LmmParams) -> Result<f64> {
        let l = lmm.to_vector();
        self.terms.iter().enumerate().try_fold(0.0, |acc, (i, a)| {
            let m = 1.0 + l.dot(a);
            if m > 0.0 {
                Ok(acc + m.ln())
            } else {
                Err(Error::BoundaryViolation { index: i, value: m })
            }
        })
    }

    pub fn loglik(&self, lmm: &LmmParams) -> Result<f64> {
        Ok(self.base + self.mixture_loglik(lmm)?)
    }

    /// Gradient and Hessian of the mixture term in `λ`.
    pub fn gradient_hessian(&self, lmm: &LmmParams) -> Result<(f64, Vector3<f64>, Matrix3<f64>)> {
        let l = lmm.to_vector();
        let mut value = self.base;
        let mut g = Vector3::zeros();
        let mut h = Matrix3::zeros();
        for (i, a) in self.terms.iter().enumerate() {
            let m = 1.0 + l.dot(a);
            if !(m > 0.0) {
                return Err(Error::BoundaryViolation { index: i, value: m });
            }
            value += m.ln();
            let w = a / m;
            g += w;
            h -= w * w.transpose();
        }
        Ok((value, g, h))
    }
}

impl ConcaveObjective for MixtureDesign {
    fn evaluate(&self, lmm: &LmmParams) -> Result<Evaluation> {
        let (value, gradient, hessian) = self.gradient_hessian(lmm)?;
        Ok(Evaluation {
            value,
            gradient,
            hessian,
        })
    }

    fn value(&self, lmm: &LmmParams) -> Result<f64> {
        self.loglik(lmm)
    }
}

/// `Λ0(T_i)` and the number of events tied at `T_i`, for every record, in
/// one pass over the time order.
fn sweep(data: &SurvivalDataset, baseline: &BaselineHazard) -> (Vec<f64>, Vec<usize>) {
    let records = data.records();
    let order = data.time_order();
    let mut cumulative = vec![0.0; records.len()];
    let mut tied = vec![0; records.len()];
    let mut k = 0;
    let mut acc = 0.0;
    let mut start = 0;
    while start < order.len() {
        let t = records[order[start]].time;
        let end = start + order[start..].iter().take_while(|&&i| records[i].time == t).count();
        let value = match baseline {
            BaselineHazard::ConstantRate(rate) => rate * t,
            BaselineHazard::Nonparametric(jumps) => {
                while k < jumps.len() && jumps[k].time <= t {
                    acc += jumps[k].increment;
                    k += 1;
                }
                acc
            }
        };
        let events = order[start..end].iter().filter(|&&i| records[i].status).count();
        for &i in &order[start..end] {
            cumulative[i] = value;
            tied[i] = events;
        }
        start = end;
    }
    (cumulative, tied)
}

/// `log λ0(T)` for an event at `T`. For a step hazard the jump at `T` is
/// shared equally by the events tied at `T`.
fn log_event_hazard(baseline: &BaselineHazard, t: f64, tied_events: usize) -> Result<f64> {
    let h = match baseline {
        BaselineHazard::ConstantRate(rate) => *rate,
        BaselineHazard::Nonparametric(_) => baseline.jump_at(t) / tied_events.max(1) as f64,
    };
    if h > 0.0 && h.is_finite() {
        Ok(h.ln())
    } else {
        Err(Error::InvalidParameter(format!(
            "baseline hazard has no mass at event time {t}"
        )))
    }
}

/// Local-mixture log-likelihood for either baseline variant.
pub fn log_likelihood(data: &SurvivalDataset, params: &RegressionParams, lmm: &LmmParams) -> Result<f64> {
    MixtureDesign::new(data, params)?.loglik(lmm)
}

/// Gradient and Hessian of the log-likelihood in `λ`.
pub fn lmm_gradient_hessian(
    data: &SurvivalDataset,
    params: &RegressionParams,
    lmm: &LmmParams,
) -> Result<(Vector3<f64>, Matrix3<f64>)> {
    let (_, g, h) = MixtureDesign::new(data, params)?.gradient_hessian(lmm)?;
    Ok((g, h))
}
