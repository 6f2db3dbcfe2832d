use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intensity transmittivities and reflectivities of the two MZ beamsplitters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitterSpec {
    pub t1: f64,
    pub r1: f64,
    pub t2: f64,
    pub r2: f64,
}

impl SplitterSpec {
    pub fn new(t1: f64, r1: f64, t2: f64, r2: f64) -> Result<Self> {
        let s = Self { t1, r1, t2, r2 };
        s.validate()?;
        Ok(s)
    }

    /// Lossless splitters given by their reflectivities.
    pub fn from_reflectivities(r1: f64, r2: f64) -> Result<Self> {
        Self::new(1.0 - r1, r1, 1.0 - r2, r2)
    }

    pub fn balanced() -> Self {
        Self { t1: 0.5, r1: 0.5, t2: 0.5, r2: 0.5 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("T1", self.t1), ("R1", self.r1), ("T2", self.t2), ("R2", self.r2)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidSplitter(format!("{name} = {x} outside [0, 1]")));
            }
        }
        for (k, sum) in [(1, self.t1 + self.r1), (2, self.t2 + self.r2)] {
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSplitter(format!("T{k} + R{k} = {sum}, expected 1")));
            }
        }
        Ok(())
    }

    pub fn is_balanced(&self) -> bool {
        *self == Self::balanced()
    }
}

/// MZ coincidence peaks at delays `n·t_d`, `n = −2..=2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FivePeakPattern {
    pub values: [f64; 5],
}

impl FivePeakPattern {
    pub const HEADER: [&'static str; 5] = ["n_-2", "n_-1", "n_0", "n_1", "n_2"];

    pub fn at(&self, n: i32) -> f64 {
        self.values[(n + 2) as usize]
    }

    pub fn center(&self) -> f64 {
        self.values[2]
    }

    pub fn csv_header() -> String {
        Self::HEADER.join(",")
    }

    pub fn csv_row(&self) -> String {
        self.values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    }
}

/// Five-peak MZ pattern for a source with the given pulse-wise coherences.
/// The `n = +1` branch uses `R1² + T1²`, mirroring `n = −1`.
pub fn mz_five_peaks(g2_zero: f64, g1sq_zero: f64, s: &SplitterSpec) -> FivePeakPattern {
    let SplitterSpec { t1, r1, t2, r2 } = *s;
    let first = r1 * r1 + t1 * t1;
    let values = [
        8.0 / 3.0 * r1 * t1 * r2 * r2,
        8.0 / 3.0 * r2 * t2 * first + 16.0 / 3.0 * g2_zero * r1 * t1 * r2 * r2,
        16.0 / 3.0 * g2_zero * r2 * t2 * first + 8.0 / 3.0 * r1 * t1 * (r2 * r2 + t2 * t2 - 2.0 * g1sq_zero * r2 * t2),
        8.0 / 3.0 * r2 * t2 * first + 16.0 / 3.0 * g2_zero * r1 * t1 * t2 * t2,
        8.0 / 3.0 * r1 * t1 * t2 * t2,
    ];
    FivePeakPattern { values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::mz_identical;
    use proptest::prelude::*;

    #[test]
    fn ideal_balanced_pattern() {
        let p = mz_five_peaks(0.0, 1.0, &SplitterSpec::balanced());
        let want = [1.0 / 6.0, 1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 6.0];
        for (a, b) in p.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_balanced_center() {
        let p = mz_five_peaks(1.0, 1.0, &SplitterSpec::balanced());
        assert!((p.center() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn outer_peaks_vanish_without_first_splitter_mixing() {
        let p = mz_five_peaks(0.3, 0.7, &SplitterSpec::from_reflectivities(0.0, 0.4).unwrap());
        assert_eq!(p.at(-2), 0.0);
        assert_eq!(p.at(2), 0.0);
    }

    #[test]
    fn unbalanced_outer_ratio() {
        let s = SplitterSpec::from_reflectivities(0.6, 0.3).unwrap();
        let p = mz_five_peaks(0.0, 1.0, &s);
        assert!((p.at(-2) / p.at(2) - (0.3f64 * 0.3) / (0.7 * 0.7)).abs() < 1e-12);
    }

    #[test]
    fn invalid_splitters() {
        assert!(SplitterSpec::new(0.5, 0.6, 0.5, 0.5).is_err());
        assert!(SplitterSpec::new(-0.1, 1.1, 0.5, 0.5).is_err());
        assert!(SplitterSpec::from_reflectivities(1.2, 0.5).is_err());
    }

    #[test]
    fn csv_row_format() {
        let p = FivePeakPattern { values: [1.0, 2.0, 0.0, 0.5, 0.25] };
        assert_eq!(FivePeakPattern::csv_header(), "n_-2,n_-1,n_0,n_1,n_2");
        assert_eq!(p.csv_row().split(',').count(), 5);
    }

    proptest! {
        #[test]
        fn balanced_center_is_mz_identical(g2 in 0.0f64..2.0, g1 in 0.0f64..1.0) {
            let p = mz_five_peaks(g2, g1, &SplitterSpec::balanced());
            prop_assert!((p.center() - mz_identical(g2, g1)).abs() < 1e-12);
            prop_assert_eq!(p.at(-2), p.at(2));
            prop_assert_eq!(p.at(-1), p.at(1));
        }

        #[test]
        fn peaks_non_negative(g2 in 0.0f64..2.0, g1 in 0.0f64..1.0, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0) {
            let p = mz_five_peaks(g2, g1, &SplitterSpec::from_reflectivities(r1, r2).unwrap());
            prop_assert!(p.values.iter().all(|v| *v >= -1e-15));
        }
    }
}
