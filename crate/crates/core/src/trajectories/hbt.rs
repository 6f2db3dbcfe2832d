use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::jump::{trial_rng, ClickRecord, Detector};
use crate::error::{Error, Result};

/// Detection chain of a pulsed HBT experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub efficiency: f64,
    /// Probability that a click is routed to detector `c`.
    pub splitter: f64,
    pub rep_period: f64,
    pub n_periods: usize,
}

impl DetectionModel {
    pub fn new(efficiency: f64, rep_period: f64, n_periods: usize) -> Self {
        Self { efficiency, splitter: 0.5, rep_period, n_periods }
    }

    /// Checks the parameters against the length of one pulse window.
    pub fn validate(&self, window: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::InvalidDetection(format!("efficiency {} outside [0, 1]", self.efficiency)));
        }
        if !(0.0..=1.0).contains(&self.splitter) {
            return Err(Error::InvalidDetection(format!("splitter fraction {} outside [0, 1]", self.splitter)));
        }
        if !(self.rep_period > window) {
            return Err(Error::InvalidDetection(format!(
                "repetition period {} must exceed the pulse window {window}",
                self.rep_period
            )));
        }
        if self.n_periods == 0 {
            return Err(Error::InvalidDetection("need at least one period".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramMode {
    Full,
    StartStop,
}

/// Coincidence counts by period separation `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub mode: HistogramMode,
    pub bins: BTreeMap<i64, u64>,
}

impl Histogram {
    pub fn get(&self, k: i64) -> u64 {
        self.bins.get(&k).copied().unwrap_or(0)
    }
}

/// Thins each click with the detection efficiency and routes survivors to
/// detector `c` or `d`. Records are treated as consecutive periods.
pub fn route_clicks(records: &[ClickRecord], model: &DetectionModel, seed: u64) -> Vec<ClickRecord> {
    records
        .iter()
        .map(|r| {
            let mut rng = trial_rng(seed ^ 0x9e37_79b9_7f4a_7c15, r.trial);
            let clicks = r
                .clicks
                .iter()
                .filter_map(|c| {
                    let keep = rng.random::<f64>() < model.efficiency;
                    let to_c = rng.random::<f64>() < model.splitter;
                    keep.then(|| super::Click {
                        time: c.time,
                        detector: Some(if to_c { Detector::C } else { Detector::D }),
                    })
                })
                .collect();
            ClickRecord { trial: r.trial, clicks }
        })
        .collect()
}

/// Binary per-period detector outcomes `(m_c[n], m_d[n])`.
pub fn period_outcomes(routed: &[ClickRecord], n_periods: usize) -> Result<(Vec<bool>, Vec<bool>)> {
    let n = n_periods.min(routed.len());
    let mut mc = Vec::with_capacity(n);
    let mut md = Vec::with_capacity(n);
    for r in &routed[..n] {
        if r.clicks.iter().any(|c| c.detector.is_none()) {
            return Err(Error::InvalidDetection(format!("trial {} has unrouted clicks", r.trial)));
        }
        mc.push(r.count_on(Detector::C) > 0);
        md.push(r.count_on(Detector::D) > 0);
    }
    Ok((mc, md))
}

/// `h[k] = Σ_n m_c[n]·m_d[n+k]` for `|k| ≤ max_lag` (full mode), or the
/// start–stop histogram `ĥ[k] = Σ_n m_c[n]·Π_{l<k}(1 − m_d[n+l])·m_d[n+k]`
/// for `0 ≤ k ≤ max_lag`.
pub fn hbt_histogram(
    routed: &[ClickRecord],
    model: &DetectionModel,
    mode: HistogramMode,
    max_lag: usize,
) -> Result<Histogram> {
    let (mc, md) = period_outcomes(routed, model.n_periods)?;
    let n = mc.len() as i64;
    let lag = max_lag as i64;
    let mut bins = BTreeMap::new();
    match mode {
        HistogramMode::Full => {
            for k in -lag..=lag {
                let count =
                    (0..n).filter(|&p| mc[p as usize] && (0..n).contains(&(p + k)) && md[(p + k) as usize]).count();
                bins.insert(k, count as u64);
            }
        }
        HistogramMode::StartStop => {
            for k in 0..=lag {
                bins.insert(k, 0);
            }
            for p in 0..n {
                if !mc[p as usize] {
                    continue;
                }
                // The first stop on detector d after the start closes the window.
                if let Some(k) = (0..=lag).take_while(|&k| p + k < n).find(|&k| md[(p + k) as usize]) {
                    *bins.get_mut(&k).unwrap() += 1;
                }
            }
        }
    }
    Ok(Histogram { mode, bins })
}

/// `ĝ²[0] = h0/h_ref` with error `ĝ²·√(1/h0 + 1/h_ref)`; an empty zero bin
/// gets the bound `1/h_ref`.
pub fn ratio_estimate_g2(h0: u64, href: u64) -> Result<(f64, f64)> {
    if href == 0 {
        return Err(Error::UndefinedEstimate("reference bin is empty".into()));
    }
    if h0 == 0 {
        return Ok((0.0, 1.0 / href as f64));
    }
    let ratio = h0 as f64 / href as f64;
    Ok((ratio, ratio * (1.0 / h0 as f64 + 1.0 / href as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectories::Click;

    fn routed(pattern: &[(bool, bool)]) -> Vec<ClickRecord> {
        pattern
            .iter()
            .enumerate()
            .map(|(trial, &(c, d))| {
                let mut clicks = Vec::new();
                if c {
                    clicks.push(Click { time: 0.1, detector: Some(Detector::C) });
                }
                if d {
                    clicks.push(Click { time: 0.2, detector: Some(Detector::D) });
                }
                ClickRecord { trial, clicks }
            })
            .collect()
    }

    #[test]
    fn ratio_examples() {
        let (g, s) = ratio_estimate_g2(0, 500).unwrap();
        assert_eq!(g, 0.0);
        assert!(s <= 0.002);
        let (g, s) = ratio_estimate_g2(100, 100).unwrap();
        assert_eq!(g, 1.0);
        assert!((s - 2f64.sqrt() / 10.0).abs() < 1e-12);
        let (g, s) = ratio_estimate_g2(64, 221).unwrap();
        assert!((g - 0.2896).abs() < 5e-4 && (s - 0.0411).abs() < 5e-4, "{g} {s}");
        assert!(ratio_estimate_g2(3, 0).is_err());
    }

    #[test]
    fn hand_built_histograms() {
        // periods: c d | - d | c - | - d
        let r = routed(&[(true, true), (false, true), (true, false), (false, true)]);
        let m = DetectionModel::new(1.0, 100.0, 4);
        let full = hbt_histogram(&r, &m, HistogramMode::Full, 2).unwrap();
        assert_eq!(full.get(0), 1);
        assert_eq!(full.get(1), 2);
        assert_eq!(full.get(2), 0);
        assert_eq!(full.get(-1), 1);
        assert_eq!(full.get(-2), 1);
        let ss = hbt_histogram(&r, &m, HistogramMode::StartStop, 2).unwrap();
        assert_eq!(ss.get(0), 1);
        assert_eq!(ss.get(1), 1);
        assert_eq!(ss.get(2), 0);
        for k in 0..=2 {
            assert!(ss.get(k) <= full.get(k));
        }
    }

    #[test]
    fn unrouted_clicks_rejected() {
        let r = vec![ClickRecord { trial: 0, clicks: vec![Click { time: 0.0, detector: None }] }];
        let m = DetectionModel::new(1.0, 100.0, 1);
        assert!(hbt_histogram(&r, &m, HistogramMode::Full, 1).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(DetectionModel::new(1.0, 30.0, 10).validate(20.0).is_ok());
        assert!(DetectionModel::new(1.0, 10.0, 10).validate(20.0).is_err());
        assert!(DetectionModel::new(1.2, 30.0, 10).validate(20.0).is_err());
        assert!(DetectionModel::new(1.0, 30.0, 0).validate(20.0).is_err());
    }

    #[test]
    fn routing_respects_efficiency() {
        let recs: Vec<ClickRecord> =
            (0..4000).map(|trial| ClickRecord { trial, clicks: vec![Click { time: 1.0, detector: None }] }).collect();
        let m = DetectionModel { efficiency: 0.5, splitter: 0.5, rep_period: 10.0, n_periods: 4000 };
        let r = route_clicks(&recs, &m, 3);
        let kept: usize = r.iter().map(|x| x.count()).sum();
        let on_c: usize = r.iter().map(|x| x.count_on(Detector::C)).sum();
        assert!((kept as f64 - 2000.0).abs() < 3.0 * 1000f64.sqrt());
        assert!((on_c as f64 - kept as f64 / 2.0).abs() < 3.0 * (kept as f64 / 4.0).sqrt());
    }
}
