//! Uniform collocation sampling and Monte Carlo estimates with
//! Chebyshev confidence halfwidths.

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::quad::{QuadError, QuadratureRule};

/// Stream ids for [`rng`], so that different consumers of one seed never
/// share random numbers.
pub mod stream {
    pub const SAMPLE: u64 = 0;
    pub const NET_INIT: u64 = 1;
    /// Resampled collocation points use `RESAMPLE_BASE + epoch`.
    pub const RESAMPLE_BASE: u64 = 1 << 32;
}

/// Deterministic generator for `(seed, stream)`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("integrand is negative ({value}) at x = {x}")]
    Negative { x: f64, value: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("empty sample")]
    Empty,
    #[error("evaluation failed at x = {x}: {message}")]
    Eval { x: f64, message: String },
}

/// `n` i.i.d. uniform points on the open interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    seed: u64,
    interval: (f64, f64),
    points: Vec<f64>,
}

impl SampleSet {
    pub fn draw(seed: u64, n: usize, interval: (f64, f64)) -> Self {
        Self::draw_stream(seed, stream::SAMPLE, n, interval)
    }

    pub fn draw_stream(seed: u64, stream: u64, n: usize, interval: (f64, f64)) -> Self {
        let (a, b) = interval;
        let mut r = rng(seed, stream);
        let mut points = Vec::with_capacity(n);
        while points.len() < n {
            let u: f64 = Open01.sample(&mut r);
            let x = a + (b - a) * u;
            // rounding can land on an endpoint for wide intervals
            if x > a && x < b {
                points.push(x);
            }
        }
        Self { seed, interval, points }
    }

    pub fn from_points(seed: u64, interval: (f64, f64), points: Vec<f64>) -> Self {
        Self { seed, interval, points }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Multipliers reported by [`McEstimate::halfwidths`].
pub const CHEBYSHEV_K: [f64; 3] = [2.0, 5.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation with `1/n` normalization.
    pub beta_hat: f64,
}

impl McEstimate {
    /// `k β̂ / √n`: with probability at least `1 - 1/k²` the mean lies within
    /// this distance of the true average (with β̂ replaced by β).
    pub fn halfwidth(&self, k: f64) -> f64 {
        k * self.beta_hat / (self.n as f64).sqrt()
    }

    pub fn halfwidths(&self) -> [(f64, f64); 3] {
        CHEBYSHEV_K.map(|k| (k, self.halfwidth(k)))
    }
}

/// Mean and spread of precomputed nonnegative values.
pub fn mc_from_values(xs: &[f64], values: &[f64]) -> Result<McEstimate, SampleError> {
    if values.is_empty() {
        return Err(SampleError::Empty);
    }
    for (&x, &v) in xs.iter().zip(values) {
        if !v.is_finite() {
            return Err(SampleError::NonFinite { x });
        }
        if v < 0.0 {
            return Err(SampleError::Negative { x, value: v });
        }
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(McEstimate { n, mean, beta_hat: var.sqrt() })
}

/// `(1/n) Σ psi(X_i)` for a nonnegative integrand.
pub fn mc_mean<F, E>(mut psi: F, s: &SampleSet) -> Result<McEstimate, SampleError>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: std::fmt::Display,
{
    let values = s
        .points()
        .iter()
        .map(|&x| psi(x).map_err(|e| SampleError::Eval { x, message: e.to_string() }))
        .collect::<Result<Vec<_>, _>>()?;
    mc_from_values(s.points(), &values)
}

/// Population mean `α` and standard deviation `β` of `psi(X)` for `X`
/// uniform on the rule's interval, by quadrature.
pub fn chebyshev_alpha_beta<F>(mut psi: F, rule: &QuadratureRule) -> Result<(f64, f64), QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let (a, b) = rule.interval();
    let [m1, m2] = rule
        .integrate_refined(|x| {
            let v = psi(x)?;
            Ok([v, v * v])
        })?
        .value;
    let alpha = m1 / (b - a);
    let var = (m2 / (b - a) - alpha * alpha).max(0.0);
    Ok((alpha, var.sqrt()))
}
