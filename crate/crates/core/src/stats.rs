//! Estimate records and the small amount of statistics the estimators share.

use crate::seed::SeedStream;

/// A Monte Carlo (or exact) estimate with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub config_digest: Option<String>,
    pub seed: SeedStream,
}

impl EstimateRecord {
    pub fn new(value: f64, stderr: f64, samples: u64, seed: SeedStream) -> Self {
        debug_assert!(stderr >= 0.0 && samples >= 1);
        Self { value, stderr, samples, config_digest: None, seed }
    }

    pub fn with_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = Some(digest.into());
        self
    }

    /// |value − target| in units of stderr (infinite if stderr is zero and they differ).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.value - target).abs();
        if diff == 0.0 {
            0.0
        } else if self.stderr == 0.0 {
            f64::INFINITY
        } else {
            diff / self.stderr
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}

/// Standard error of a proportion.
pub fn binomial_se(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Wilson score interval for `hits` successes out of `n`, at normal quantile `z`.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Half the L1 distance between two probability vectors (shorter one zero-padded).
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n).map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs()).sum::<f64>() / 2.0
}

/// Empirical pmf on `0..=max` from integer observations.
pub fn empirical_pmf(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}

/// Running mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        for x in iter {
            m.push(x);
        }
        m
    }
}

/// Joint counts of ±1 pairs (x, y); enough to compute a plug-in covariance
/// and its leave-one-out jackknife error exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PairCounts {
    /// Indexed by `2·[x = +1] + [y = +1]`.
    pub counts: [u64; 4],
}

impl PairCounts {
    #[inline]
    pub fn push(&mut self, x: i8, y: i8) {
        let idx = 2 * usize::from(x == 1) + usize::from(y == 1);
        self.counts[idx] += 1;
    }

    pub fn merge(&mut self, other: &PairCounts) {
        for i in 0..4 {
            self.counts[i] += other.counts[i];
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn sums(&self) -> (f64, f64, f64, f64) {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxy = 0.0;
        for (idx, &c) in self.counts.iter().enumerate() {
            let x = if idx >= 2 { 1.0 } else { -1.0 };
            let y = if idx % 2 == 1 { 1.0 } else { -1.0 };
            sx += x * c as f64;
            sy += y * c as f64;
            sxy += x * y * c as f64;
        }
        (self.total() as f64, sx, sy, sxy)
    }

    /// Plug-in covariance mean(xy) − mean(x)·mean(y).
    pub fn covariance(&self) -> f64 {
        let (n, sx, sy, sxy) = self.sums();
        sxy / n - (sx / n) * (sy / n)
    }

    /// Covariance with the n/(n−1) small-sample correction.
    pub fn unbiased_covariance(&self) -> f64 {
        let n = self.total() as f64;
        self.covariance() * n / (n - 1.0)
    }

    pub fn mean_x(&self) -> f64 {
        let (n, sx, _, _) = self.sums();
        sx / n
    }

    pub fn mean_y(&self) -> f64 {
        let (n, _, sy, _) = self.sums();
        sy / n
    }

    /// Fraction of pairs with x ≠ y.
    pub fn disagreement(&self) -> f64 {
        (self.counts[1] + self.counts[2]) as f64 / self.total() as f64
    }

    /// Leave-one-out jackknife standard error of the plug-in covariance.
    pub fn jackknife_se(&self) -> f64 {
        let (n, sx, sy, sxy) = self.sums();
        if n < 2.0 {
            return 0.0;
        }
        let m = n - 1.0;
        let mut loo = Vec::with_capacity(4);
        for (idx, &c) in self.counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let x = if idx >= 2 { 1.0 } else { -1.0 };
            let y = if idx % 2 == 1 { 1.0 } else { -1.0 };
            let cov = (sxy - x * y) / m - ((sx - x) / m) * ((sy - y) / m);
            loo.push((cov, c as f64));
        }
        let mean: f64 = loo.iter().map(|(v, c)| v * c).sum::<f64>() / n;
        let ss: f64 = loo.iter().map(|(v, c)| c * (v - mean).powi(2)).sum();
        ((n - 1.0) / n * ss).sqrt()
    }
}
