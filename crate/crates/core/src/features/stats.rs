use serde::{Deserialize, Serialize};

/// Names of the eleven per-series statistics, in vector order.
pub const STAT_NAMES: [&str; 11] = [
    "mean", "median", "rms", "max", "min", "q1", "q3", "iqr", "std", "skewness", "kurtosis",
];

/// Summary statistics of one time series.
///
/// `std` is the population standard deviation, `skewness` the biased third
/// standardized moment and `kurtosis` the excess fourth standardized
/// moment. A constant series has `std`, `iqr`, `skewness` and `kurtosis`
/// all equal to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: f64,
    pub median: f64,
    pub rms: f64,
    pub max: f64,
    pub min: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub std: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl SeriesStats {
    pub fn to_array(&self) -> [f64; 11] {
        [
            self.mean,
            self.median,
            self.rms,
            self.max,
            self.min,
            self.q1,
            self.q3,
            self.iqr,
            self.std,
            self.skewness,
            self.kurtosis,
        ]
    }
}

/// Quantile by linear interpolation between closest ranks of a sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Statistics of a non-empty series. Panics on an empty slice.
pub fn series_stats(series: &[f64]) -> SeriesStats {
    assert!(!series.is_empty(), "series_stats needs at least one value");
    let n = series.len() as f64;
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    let mean = series.iter().sum::<f64>() / n;
    let rms = (series.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
    let median = quantile_sorted(&sorted, 0.5);

    if min == max {
        return SeriesStats {
            mean: min,
            median: min,
            rms,
            max,
            min,
            q1: min,
            q3: min,
            iqr: 0.0,
            std: 0.0,
            skewness: 0.0,
            kurtosis: 0.0,
        };
    }

    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in series {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    SeriesStats {
        mean,
        median,
        rms,
        max,
        min,
        q1,
        q3,
        iqr: q3 - q1,
        std: m2.sqrt(),
        skewness,
        kurtosis,
    }
}
