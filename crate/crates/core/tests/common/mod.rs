//! Oracles shared by the integration suites. Nothing here calls into the
//! estimation code it is used to check.
#![allow(dead_code)]

use lmfrail::optimizer::{ConcaveObjective, Evaluation};
use lmfrail::region::QuarticCoeffs;
use lmfrail::{LmmParams, SurvivalDataset, SurvivalRecord};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Small random dataset with `p` covariates. Times are drawn from a coarse
/// lattice when `ties` is set so that tied event times occur.
pub fn random_dataset(seed: u64, n: usize, p: usize, ties: bool) -> SurvivalDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let records: Vec<SurvivalRecord> = (0..n)
            .map(|_| {
                let t: f64 = if ties {
                    rng.random_range(1..=(n / 3).max(2) as u32) as f64
                } else {
                    rng.random_range(0.05..10.0)
                };
                let x: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                SurvivalRecord::new(t, rng.random_bool(0.7), x)
            })
            .collect();
        let data = SurvivalDataset::new(records).expect("valid records");
        if data.n_events() > 0 {
            return data;
        }
    }
}

/// Cox partial likelihood with Breslow's tie handling, its gradient and
/// Hessian, summed over events by brute force over risk sets.
pub fn breslow_partial(data: &SurvivalDataset, beta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let p = beta.len();
    let rec = data.records();
    let score = |r: &SurvivalRecord| r.covariates.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>();
    let mut value = 0.0;
    let mut grad = DVector::zeros(p);
    let mut hess = DMatrix::zeros(p, p);
    for i in rec.iter().filter(|r| r.status) {
        let mut s0 = 0.0;
        let mut s1 = DVector::zeros(p);
        let mut s2 = DMatrix::zeros(p, p);
        for j in rec.iter().filter(|j| j.time >= i.time) {
            let w = score(j).exp();
            let x = DVector::from_column_slice(&j.covariates);
            s0 += w;
            s1 += &x * w;
            s2 += &x * x.transpose() * w;
        }
        let xi = DVector::from_column_slice(&i.covariates);
        let mean = &s1 / s0;
        value += score(i) - s0.ln();
        grad += xi - &mean;
        hess -= s2 / s0 - &mean * mean.transpose();
    }
    (value, grad, hess)
}

/// Newton–Raphson on the Breslow partial likelihood.
pub fn cox_oracle(data: &SurvivalDataset) -> Vec<f64> {
    let mut beta = DVector::zeros(data.p());
    for _ in 0..100 {
        let (_, g, h) = breslow_partial(data, beta.as_slice());
        let step = (-h).lu().solve(&g).expect("nonsingular information");
        beta += &step;
        if step.amax() < 1e-13 {
            break;
        }
    }
    beta.as_slice().to_vec()
}

/// Breslow increments `d_k / Σ_{risk} exp(Xβ)` at each distinct event time.
pub fn breslow_increments(data: &SurvivalDataset, beta: &[f64]) -> Vec<(f64, f64)> {
    let rec = data.records();
    let mut times: Vec<f64> = rec.iter().filter(|r| r.status).map(|r| r.time).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
        .into_iter()
        .map(|t| {
            let d = rec.iter().filter(|r| r.status && r.time == t).count() as f64;
            let at_risk: f64 = rec
                .iter()
                .filter(|r| r.time >= t)
                .map(|r| r.covariates.iter().zip(beta).map(|(x, b)| x * b).sum::<f64>().exp())
                .sum();
            (t, d / at_risk)
        })
        .collect()
}

/// Random quartic with `a, e ∈ (0, 3]` and `b, c, d ∈ [-5, 5]`.
pub fn random_quartic(rng: &mut impl Rng) -> QuarticCoeffs {
    let a = 3.0 * (1.0 - rng.random::<f64>());
    let e = 3.0 * (1.0 - rng.random::<f64>());
    QuarticCoeffs::new(
        a,
        rng.random_range(-5.0..=5.0),
        rng.random_range(-5.0..=5.0),
        rng.random_range(-5.0..=5.0),
        e,
    )
}

/// Smallest value of a quartic with positive leading coefficient on
/// `x ≥ 0`: dense geometric grid out to the Cauchy bound (beyond it the
/// quartic is positive), each discrete local minimum polished by
/// golden-section search on its bracket.
pub fn grid_min_positive_axis(q: &QuarticCoeffs) -> f64 {
    assert!(q.a > 0.0);
    let bound = 1.0 + [q.b, q.c, q.d, q.e].iter().map(|c| (c / q.a).abs()).fold(0.0, f64::max);
    let k = 4000;
    let mut xs = vec![0.0];
    let lo: f64 = 1e-6;
    let ratio = (bound / lo).powf(1.0 / k as f64);
    xs.extend((0..=k).map(|i| lo * ratio.powi(i)));
    let vals: Vec<f64> = xs.iter().map(|&x| q.eval(x)).collect();
    let mut best = vals.iter().copied().fold(f64::INFINITY, f64::min);
    for i in 1..xs.len() - 1 {
        if vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1] {
            let (mut a, mut b) = (xs[i - 1], xs[i + 1]);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..100 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if q.eval(c) < q.eval(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            best = best.min(q.eval(0.5 * (a + b)));
        }
    }
    best
}

/// `f(λ) = -½ (λ - c)ᵀ A (λ - c)` with `A` positive definite.
pub struct Quadratic {
    pub center: Vector3<f64>,
    pub a: Matrix3<f64>,
}

impl ConcaveObjective for Quadratic {
    fn evaluate(&self, lmm: &LmmParams) -> lmfrail::Result<Evaluation> {
        let r = lmm.to_vector() - self.center;
        Ok(Evaluation {
            value: -0.5 * r.dot(&(self.a * r)),
            gradient: -(self.a * r),
            hessian: -self.a,
        })
    }
}

/// A fixed, moderately conditioned positive definite matrix.
pub fn spd() -> Matrix3<f64> {
    let m = Matrix3::new(1.0, 0.2, 0.0, 0.3, 1.5, 0.1, 0.0, -0.2, 0.8);
    m.transpose() * m + Matrix3::identity() * 0.5
}

/// Richardson-extrapolated central difference, `O(h^4)` accurate.
fn richardson(d: impl Fn(f64) -> f64, h: f64) -> f64 {
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Central-difference gradient of a scalar function of `λ`.
pub fn fd_gradient(f: impl Fn(&Vector3<f64>) -> f64, x: &Vector3<f64>, h: f64) -> Vector3<f64> {
    Vector3::from_fn(|i, _| {
        richardson(|s| (f(&(x + Vector3::ith(i, s))) - f(&(x - Vector3::ith(i, s)))) / (2.0 * s), h)
    })
}

/// Central-difference Jacobian of a gradient field of `λ`.
pub fn fd_jacobian(g: impl Fn(&Vector3<f64>) -> Vector3<f64>, x: &Vector3<f64>, h: f64) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for j in 0..3 {
        for i in 0..3 {
            m[(i, j)] = richardson(|s| (g(&(x + Vector3::ith(j, s)))[i] - g(&(x - Vector3::ith(j, s)))[i]) / (2.0 * s), h);
        }
    }
    m
}
