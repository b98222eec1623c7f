use serde::Serialize;

use crate::data::SurvivalDataset;
use crate::error::{Error, Result};

/// Dispersion summary of a vector of counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountStatistics {
    pub mean: f64,
    /// Sample variance (divisor `n - 1`) over the mean; `None` when the mean
    /// is zero or there is a single count.
    pub ratio: Option<f64>,
    /// Third standardized moment with population moments (no bias
    /// correction); zero for constant counts.
    pub skewness: Option<f64>,
}

pub fn count_statistics(counts: &[f64]) -> CountStatistics {
    let n = counts.len() as f64;
    if counts.is_empty() {
        return CountStatistics { mean: f64::NAN, ratio: None, skewness: None };
    }
    let mean = counts.iter().sum::<f64>() / n;
    let m2 = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    let m3 = counts.iter().map(|c| (c - mean).powi(3)).sum::<f64>() / n;
    let ratio = (mean > 0.0 && counts.len() > 1).then(|| m2 * n / (n - 1.0) / mean);
    let skewness = Some(if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 });
    CountStatistics { mean, ratio, skewness }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinningRow {
    pub bin_length: f64,
    pub bins: usize,
    pub ratio: Option<f64>,
    pub skewness: Option<f64>,
}

/// Event counts in consecutive bins of each length covering `[0, max T]`.
/// The last bin is closed on the right.
pub fn binning_diagnostic(data: &SurvivalDataset, bin_lengths: &[f64]) -> Result<Vec<BinningRow>> {
    data.require_events()?;
    let t_max = data.records().iter().map(|r| r.time).fold(0.0, f64::max);
    bin_lengths
        .iter()
        .map(|&len| {
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::InvalidParameter(format!("bin length must be positive, got {len}")));
            }
            let bins = ((t_max / len).ceil() as usize).max(1);
            let mut counts = vec![0.0; bins];
            for r in data.records().iter().filter(|r| r.status) {
                let k = ((r.time / len) as usize).min(bins - 1);
                counts[k] += 1.0;
            }
            let s = count_statistics(&counts);
            Ok(BinningRow { bin_length: len, bins, ratio: s.ratio, skewness: s.skewness })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SurvivalRecord;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    #[test]
    fn constant_counts_have_zero_dispersion() {
        let s = count_statistics(&[4.0; 10]);
        assert_eq!(s.ratio, Some(0.0));
        assert_eq!(s.skewness, Some(0.0));
        assert_eq!(count_statistics(&[0.0, 0.0]).ratio, None);
    }

    #[test]
    fn hand_computed_statistics() {
        // mean 2, sample variance 2, population m2 = 4/3, m3 = 0
        let s = count_statistics(&[1.0, 1.0, 4.0]);
        assert!((s.ratio.unwrap() - 1.5).abs() < 1e-12);
        // m3 = ((-1)^3 * 2 + 2^3) / 3 = 2
        assert!((s.skewness.unwrap() - 2.0 / (2.0f64).powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn poisson_counts_have_unit_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pois = Poisson::new(5.0).unwrap();
        let counts: Vec<f64> = (0..10_000).map(|_| pois.sample(&mut rng)).collect();
        let r = count_statistics(&counts).ratio.unwrap();
        assert!((0.9..=1.1).contains(&r), "{r}");
    }

    #[test]
    fn evenly_spread_events_give_zero_ratio() {
        // One event in the middle of each unit interval on [0, 10].
        let recs = (0..10).map(|k| SurvivalRecord::new(k as f64 + 0.5, true, vec![])).collect();
        let mut recs: Vec<_> = recs;
        recs.push(SurvivalRecord::new(10.0, false, vec![]));
        let d = SurvivalDataset::new(recs).unwrap();
        let rows = binning_diagnostic(&d, &[1.0, 2.0]).unwrap();
        assert_eq!(rows[0].bins, 10);
        assert_eq!(rows[0].ratio, Some(0.0));
        assert_eq!(rows[1].ratio, Some(0.0));
        assert!(binning_diagnostic(&d, &[0.0]).is_err());
    }
}
