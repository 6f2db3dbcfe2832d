use rand::Rng;
use serde::{Deserialize, Serialize};

use super::jump::{trial_rng, ClickRecord};
use crate::error::{Error, Result};

/// Highest photocount bin; larger counts are folded into it.
pub const M_MAX: usize = 16;

/// Empirical `P_m(T)` for `m = 0..=M_MAX`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotocountDistribution {
    pub probabilities: Vec<f64>,
    pub n_trials: usize,
    /// Number of trials whose count exceeded `M_MAX`.
    pub overflow: usize,
}

impl PhotocountDistribution {
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::UndefinedEstimate("no trials".into()));
        }
        let mut tally = vec![0usize; M_MAX + 1];
        let mut overflow = 0;
        for &m in counts {
            if m > M_MAX {
                overflow += 1;
            }
            tally[m.min(M_MAX)] += 1;
        }
        let n = counts.len();
        Ok(Self { probabilities: tally.iter().map(|&c| c as f64 / n as f64).collect(), n_trials: n, overflow })
    }

    pub fn p(&self, m: usize) -> f64 {
        self.probabilities.get(m).copied().unwrap_or(0.0)
    }

    /// `E[m^a (m−1)^b]`-style moment of a function of the count.
    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.probabilities.iter().enumerate().map(|(m, p)| p * f(m as f64)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(|m| m)
    }

    pub fn second_factorial(&self) -> f64 {
        self.moment(|m| m * (m - 1.0))
    }

    /// Standard error of the mean count.
    pub fn mean_std_error(&self) -> f64 {
        let mu = self.mean();
        ((self.moment(|m| m * m) - mu * mu).max(0.0) / self.n_trials as f64).sqrt()
    }
}

/// Keeps each click independently with probability `eta` and tabulates the
/// surviving counts per trial.
pub fn photocount_distribution(records: &[ClickRecord], eta: f64, seed: u64) -> Result<PhotocountDistribution> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidDetection(format!("efficiency {eta} outside [0, 1]")));
    }
    let counts: Vec<usize> = records
        .iter()
        .map(|r| {
            if eta == 1.0 {
                return r.count();
            }
            let mut rng = trial_rng(seed, r.trial);
            r.clicks.iter().filter(|_| rng.random::<f64>() < eta).count()
        })
        .collect();
    PhotocountDistribution::from_counts(&counts)
}

/// `g²[0] = E[m(m−1)] / E[m]²`.
pub fn g2_from_photocounts(p: &PhotocountDistribution) -> Result<f64> {
    Ok(g2_with_error(p)?.0)
}

/// `g²[0]` with its delta-method standard error over the trials.
pub fn g2_with_error(p: &PhotocountDistribution) -> Result<(f64, f64)> {
    let mu = p.mean();
    if !(mu > 0.0) {
        return Err(Error::UndefinedEstimate("mean photocount is zero".into()));
    }
    let a = p.second_factorial();
    let est = a / (mu * mu);
    let x2 = p.moment(|m| (m * (m - 1.0)).powi(2));
    let y2 = p.moment(|m| m * m);
    let xy = p.moment(|m| m * m * (m - 1.0));
    let (var_x, var_y, cov) = (x2 - a * a, y2 - mu * mu, xy - a * mu);
    let var = var_x / mu.powi(4) + 4.0 * a * a * var_y / mu.powi(6) - 4.0 * a * cov / mu.powi(5);
    Ok((est, (var.max(0.0) / p.n_trials as f64).sqrt()))
}
