//! Streaming moments for Monte Carlo replicas.
//!
//! Welford's update plus Chan's pairwise merge, so partial results from
//! worker shards can be combined in a fixed order without changing the
//! outcome beyond float rounding of the merge tree itself.

use crate::math;

/// Count, mean, sum of squared deviations, min, and max of a sample.
#[derive(Clone, Copy, Debug, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicaStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl ReplicaStats {
    pub fn new() -> Self {
        ReplicaStats { count: 0, mean: 0.0, m2: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = if x < self.min { x } else { self.min };
        self.max = if x > self.max { x } else { self.max };
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut s = Self::new();
        for &x in values {
            s.push(x);
        }
        s
    }

    /// Combine two disjoint samples.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2
            + delta * delta * self.count as f64 * other.count as f64 / count as f64;
        ReplicaStats {
            count,
            mean,
            m2,
            min: if other.min < self.min { other.min } else { self.min },
            max: if other.max > self.max { other.max } else { self.max },
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Raw sum of squared deviations.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Unbiased sample variance `m2 / (count - 1)`.
    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        math::sqrt(self.variance())
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        if self.count > 0 {
            self.std_dev() / math::sqrt(self.count as f64)
        } else {
            0.0
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}
