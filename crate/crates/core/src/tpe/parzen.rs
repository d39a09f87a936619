use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// One-dimensional mixture of truncated Gaussians over `[lower, upper]`:
/// one component per observation plus a wide prior at the range midpoint,
/// all equally weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct ParzenModel {
    lower: f64,
    upper: f64,
    /// `(center, bandwidth)`; the prior is last.
    components: Vec<(f64, f64)>,
    /// Truncated mass of each component.
    mass: Vec<f64>,
}

/// Fits a Parzen estimator to `values`.
///
/// Bandwidth of each sorted observation is the larger gap to its neighbors
/// (the range when it has none), clipped to `[range / min(100, n + 1), range]`.
pub fn fit_parzen(values: &[f64], lower: f64, upper: f64) -> ParzenModel {
    let range = upper - lower;
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let min_bw = range / ((n + 1).min(100) as f64);
    let mut components: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let left = (k > 0).then(|| sorted[k] - sorted[k - 1]);
            let right = (k + 1 < n).then(|| sorted[k + 1] - sorted[k]);
            let bw = match (left, right) {
                (None, None) => range,
                (Some(a), None) | (None, Some(a)) => a,
                (Some(a), Some(b)) => a.max(b),
            };
            (sorted[k], bw.clamp(min_bw, range))
        })
        .collect();
    components.push((lower + 0.5 * range, range));
    let mass = components
        .iter()
        .map(|&(mu, sigma)| {
            if sigma > 0.0 {
                normal_cdf((upper - mu) / sigma) - normal_cdf((lower - mu) / sigma)
            } else {
                1.0
            }
        })
        .collect();
    ParzenModel {
        lower,
        upper,
        components,
        mass,
    }
}

impl ParzenModel {
    /// `(center, bandwidth)` pairs, prior last.
    pub fn components(&self) -> &[(f64, f64)] {
        &self.components
    }

    /// Support bounds.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// Density at `x`; zero outside the bounds.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.upper <= self.lower {
            return 1.0;
        }
        if x < self.lower || x > self.upper {
            return 0.0;
        }
        let w = 1.0 / self.components.len() as f64;
        self.components
            .iter()
            .zip(&self.mass)
            .map(|(&(mu, sigma), &mass)| {
                let z = (x - mu) / sigma;
                libm::exp(-0.5 * z * z - LN_SQRT_2PI) / (sigma * mass)
            })
            .sum::<f64>()
            * w
    }

    /// Natural log of [`ParzenModel::pdf`].
    pub fn log_pdf(&self, x: f64) -> f64 {
        libm::log(self.pdf(x))
    }

    /// Draws a value: a uniformly chosen component, sampled by rejection
    /// inside the bounds.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.upper <= self.lower {
            return self.lower;
        }
        let (mu, sigma) = self.components[rng.random_range(0..self.components.len())];
        for _ in 0..1000 {
            let z: f64 = rng.sample(StandardNormal);
            let x = mu + sigma * z;
            if x >= self.lower && x <= self.upper {
                return x;
            }
        }
        mu.clamp(self.lower, self.upper)
    }
}
