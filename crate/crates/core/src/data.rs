//! Survival records, datasets and the parameter types shared by the solvers.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One subject: observed follow-up `min(event, censoring)`, event flag and covariate row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub time: f64,
    pub status: bool,
    pub covariates: Vec<f64>,
}

impl SurvivalRecord {
    pub fn new(time: f64, status: bool, covariates: Vec<f64>) -> Self {
        Self {
            time,
            status,
            covariates,
        }
    }

    pub fn delta(&self) -> f64 {
        if self.status {
            1.0
        } else {
            0.0
        }
    }

    /// `X_i β`.
    pub fn linear_score(&self, beta: &[f64]) -> f64 {
        self.covariates.iter().zip(beta).map(|(x, b)| x * b).sum()
    }
}

/// Immutable collection of records sharing a covariate dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalDataset {
    records: Vec<SurvivalRecord>,
    p: usize,
}

impl SurvivalDataset {
    /// Validates and wraps `records`. Requires at least one record, positive
    /// finite times and a common covariate length.
    pub fn new(records: Vec<SurvivalRecord>) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidData("no records".into()))?;
        let p = first.covariates.len();
        for (i, r) in records.iter().enumerate() {
            if !(r.time.is_finite() && r.time > 0.0) {
                return Err(Error::InvalidData(format!(
                    "record {i}: time must be positive and finite, got {}",
                    r.time
                )));
            }
            if r.covariates.len() != p {
                return Err(Error::InvalidData(format!(
                    "record {i}: expected {p} covariates, got {}",
                    r.covariates.len()
                )));
            }
            if let Some(x) = r.covariates.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "record {i}: non-finite covariate {x}"
                )));
            }
        }
        Ok(Self { records, p })
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Covariate dimension.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.status).count()
    }

    /// Estimation needs at least one event to identify the hazard scale.
    pub fn require_events(&self) -> Result<()> {
        if self.records.iter().any(|r| r.status) {
            Ok(())
        } else {
            Err(Error::InvalidData("no events".into()))
        }
    }

    /// Record indices sorted by time; ties keep input order.
    pub fn time_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.records.len()).collect();
        idx.sort_by(|&a, &b| self.records[a].time.total_cmp(&self.records[b].time));
        idx
    }

    /// Number of events recorded at exactly time `t`.
    pub fn events_at(&self, t: f64) -> usize {
        self.records.iter().filter(|r| r.status && r.time == t).count()
    }
}

/// A single jump of the nonparametric cumulative baseline hazard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HazardJump {
    pub time: f64,
    pub increment: f64,
}

/// Baseline hazard: a constant rate `λ0` or a step cumulative hazard `Λ0(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaselineHazard {
    ConstantRate(f64),
    Nonparametric(Vec<HazardJump>),
}

impl BaselineHazard {
    pub fn constant(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "baseline rate must be positive, got {rate}"
            )));
        }
        Ok(Self::ConstantRate(rate))
    }

    /// Builds a step hazard; jump times must be strictly increasing and
    /// increments strictly positive.
    pub fn step(jumps: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev = 0.0;
        let mut out = Vec::with_capacity(jumps.len());
        for (k, (time, increment)) in jumps.into_iter().enumerate() {
            if !(time.is_finite() && time > prev) {
                return Err(Error::InvalidParameter(format!(
                    "jump {k}: times must be positive and strictly increasing"
                )));
            }
            if !(increment.is_finite() && increment > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "jump {k}: increment must be positive, got {increment}"
                )));
            }
            prev = time;
            out.push(HazardJump { time, increment });
        }
        Ok(Self::Nonparametric(out))
    }

    /// `Λ0(t)`.
    pub fn cumulative(&self, t: f64) -> f64 {
        match self {
            Self::ConstantRate(rate) => rate * t,
            Self::Nonparametric(jumps) => jumps
                .iter()
                .take_while(|j| j.time <= t)
                .map(|j| j.increment)
                .sum(),
        }
    }

    /// Jump of `Λ0` located exactly at `t` (zero for the constant rate).
    pub fn jump_at(&self, t: f64) -> f64 {
        match self {
            Self::ConstantRate(_) => 0.0,
            Self::Nonparametric(jumps) => jumps
                .binary_search_by(|j| j.time.total_cmp(&t))
                .map(|k| jumps[k].increment)
                .unwrap_or(0.0),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::ConstantRate(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionParams {
    pub beta: Vec<f64>,
    pub baseline: BaselineHazard,
}

impl RegressionParams {
    pub fn new(beta: Vec<f64>, baseline: BaselineHazard) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite regression coefficient in {beta:?}"
            )));
        }
        Ok(Self { beta, baseline })
    }
}

/// Local-mixture parameters `(λ2, λ3, λ4)`; the expansion is fixed at order
/// four around a frailty mean of one.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LmmParams {
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

impl LmmParams {
    pub const ORIGIN: Self = Self {
        lambda2: 0.0,
        lambda3: 0.0,
        lambda4: 0.0,
    };

    pub const fn new(lambda2: f64, lambda3: f64, lambda4: f64) -> Self {
        Self {
            lambda2,
            lambda3,
            lambda4,
        }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.lambda2, self.lambda3, self.lambda4)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.lambda2.is_finite() && self.lambda3.is_finite() && self.lambda4.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }
}

impl From<[f64; 3]> for LmmParams {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: f64, s: bool) -> SurvivalRecord {
        SurvivalRecord::new(t, s, vec![])
    }

    #[test]
    fn dataset_rejects_bad_input() {
        assert!(matches!(
            SurvivalDataset::new(vec![]),
            Err(Error::InvalidData(m)) if m.contains("no records")
        ));
        let censored = SurvivalDataset::new(vec![rec(1.0, false)]).unwrap();
        assert!(matches!(
            censored.require_events(),
            Err(Error::InvalidData(m)) if m.contains("no events")
        ));
        assert!(SurvivalDataset::new(vec![rec(0.0, true)]).is_err());
        let ragged = vec![
            SurvivalRecord::new(1.0, true, vec![1.0]),
            SurvivalRecord::new(2.0, true, vec![]),
        ];
        assert!(SurvivalDataset::new(ragged).is_err());
    }

    #[test]
    fn time_order_is_stable() {
        let d = SurvivalDataset::new(vec![rec(2.0, true), rec(1.0, false), rec(2.0, false)]).unwrap();
        assert_eq!(d.time_order(), vec![1, 0, 2]);
        assert_eq!(d.events_at(2.0), 1);
    }

    #[test]
    fn step_hazard_cumulative() {
        let h = BaselineHazard::step(vec![(1.0, 0.2), (2.0, 0.3)]).unwrap();
        assert_eq!(h.cumulative(0.5), 0.0);
        assert_eq!(h.cumulative(1.0), 0.2);
        assert_eq!(h.cumulative(3.0), 0.5);
        assert_eq!(h.jump_at(2.0), 0.3);
        assert_eq!(h.jump_at(1.5), 0.0);
    }

    #[test]
    fn step_hazard_invariants() {
        assert!(BaselineHazard::step(vec![(1.0, 0.2), (1.0, 0.3)]).is_err());
        assert!(BaselineHazard::step(vec![(1.0, 0.0)]).is_err());
        assert!(BaselineHazard::step(vec![(0.0, 0.1)]).is_err());
        assert!(BaselineHazard::constant(0.0).is_err());
    }
}
