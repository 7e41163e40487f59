//! Mergeable streaming moment accumulators.
//!
//! Updates and merges follow the pairwise formulas of Chan et al. and Pébay
//! for central moments up to order four, so partial accumulators built on
//! disjoint chunks combine into the accumulator of the concatenated sample.

use serde::Serialize;

/// Count, mean and central moment sums `M2`, `M3`, `M4` of a scalar sample.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Self::new();
        for &x in xs {
            m.push(x);
        }
        m
    }

    pub fn push(&mut self, x: f64) {
        self.merge(&Moments {
            count: 1,
            mean: x,
            m2: 0.0,
            m3: 0.0,
            m4: 0.0,
        });
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d_n = delta / n;
        let d_n2 = d_n * d_n;
        let cross = delta * d_n * na * nb;

        let m4 = self.m4
            + other.m4
            + cross * d_n2 * (na * na - na * nb + nb * nb)
            + 6.0 * d_n2 * (na * na * other.m2 + nb * nb * self.m2)
            + 4.0 * d_n * (na * other.m3 - nb * self.m3);
        let m3 = self.m3
            + other.m3
            + cross * d_n * (na - nb)
            + 3.0 * d_n * (na * other.m2 - nb * self.m2);
        let m2 = self.m2 + other.m2 + cross;

        self.count += other.count;
        self.mean += d_n * nb;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
    }

    /// Unbiased sample variance `M2/(n−1)`.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.m2 / (self.count - 1) as f64
    }

    /// Standard error of the mean, `√(M2/(n(n−1)))`.
    pub fn stderr_mean(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2 / (n * (n - 1.0))).sqrt()
    }

    /// Large-sample standard error of the sample variance,
    /// `√((m4 − m2²)/n)` with `m_k = M_k/n`.
    pub fn stderr_variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let m2 = self.m2 / n;
        let m4 = self.m4 / n;
        ((m4 - m2 * m2).max(0.0) / n).sqrt()
    }
}

/// Paired sample `(x, y)`: means, co-moment `C = Σ(x − x̄)(y − ȳ)` and the
/// moments of the product `xy`, which supply the covariance standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CoMoments {
    pub count: u64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub c_xy: f64,
    pub product: Moments,
}

impl CoMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64, y: f64) {
        let mut single = CoMoments {
            count: 1,
            mean_x: x,
            mean_y: y,
            c_xy: 0.0,
            product: Moments::new(),
        };
        single.product.push(x * y);
        self.merge(&single);
    }

    pub fn merge(&mut self, other: &CoMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        self.c_xy += other.c_xy + dx * dy * na * nb / n;
        self.mean_x += dx * nb / n;
        self.mean_y += dy * nb / n;
        self.count += other.count;
        self.product.merge(&other.product);
    }

    /// Unbiased sample covariance.
    pub fn covariance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.c_xy / (self.count - 1) as f64
    }

    /// Standard error of the covariance estimate, taken as the standard
    /// error of the mean of `xy`. Exact to leading order when both means
    /// are small against the spread.
    pub fn stderr_covariance(&self) -> f64 {
        self.product.stderr_mean()
    }
}
