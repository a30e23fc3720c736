//! Composite Gauss–Legendre quadrature, grid extrema and the `rho` weight
//! `exp(∫_{x1}^x -b/eps)` that turns the operator into divergence form.

use thiserror::Error;

use crate::expr::{Expr, ExprError};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("invalid rule: {0}")]
    InvalidRule(String),
}

/// Panels used by the default rule.
pub const DEFAULT_PANELS: usize = 64;
/// Gauss points per panel in the default rule.
pub const DEFAULT_POINTS: usize = 8;
/// Relative agreement required between two successive panel doublings.
pub const REFINE_RTOL: f64 = 1e-9;
/// Absolute agreement that counts as converged (integrands of squared roundoff).
pub const REFINE_ATOL: f64 = 1e-24;
/// Doubling stops here even without agreement.
pub const MAX_PANELS: usize = 1 << 16;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(z) and P_{n-1}(z)
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `(a, b)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    a: f64,
    b: f64,
    panels: usize,
    points: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Result of a refinement loop.
#[derive(Debug, Clone, Copy)]
pub struct Refined<const N: usize> {
    pub value: [f64; N],
    pub panels: usize,
    pub converged: bool,
}

impl QuadratureRule {
    pub fn new(a: f64, b: f64, panels: usize, points: usize) -> Result<Self, QuadError> {
        if !(a < b) || panels == 0 || points == 0 {
            return Err(QuadError::InvalidRule(format!(
                "interval ({a}, {b}), {panels} panels x {points} points"
            )));
        }
        let (ref_nodes, ref_weights) = gauss_legendre(points);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * points);
        let mut weights = Vec::with_capacity(panels * points);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            for (z, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + 0.5 * h * z);
                weights.push(0.5 * h * w);
            }
        }
        Ok(Self { a, b, panels, points, nodes, weights })
    }

    /// The 64 x 8 rule used for certificate integrals.
    pub fn standard(a: f64, b: f64) -> Result<Self, QuadError> {
        Self::new(a, b, DEFAULT_PANELS, DEFAULT_POINTS)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn points_per_panel(&self) -> usize {
        self.points
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn doubled(&self) -> Self {
        Self::new(self.a, self.b, self.panels * 2, self.points).expect("valid rule stays valid")
    }

    pub fn integrate<F>(&self, mut g: F) -> Result<f64, QuadError>
    where
        F: FnMut(f64) -> Result<f64, QuadError>,
    {
        let [v] = self.integrate_many(|x| Ok([g(x)?]))?;
        Ok(v)
    }

    /// Integrate several integrands sharing one evaluation per node.
    pub fn integrate_many<const N: usize, F>(&self, mut g: F) -> Result<[f64; N], QuadError>
    where
        F: FnMut(f64) -> Result<[f64; N], QuadError>,
    {
        let mut acc = [0.0; N];
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let vals = g(x)?;
            for (a, v) in acc.iter_mut().zip(vals) {
                if !v.is_finite() {
                    return Err(QuadError::NonFinite { x });
                }
                *a += w * v;
            }
        }
        Ok(acc)
    }

    /// Double the panel count, starting from this rule, until two successive
    /// values agree to [`REFINE_RTOL`] in every component, or to [`REFINE_ATOL`]
    /// when the integral is at roundoff level.
    pub fn integrate_refined<const N: usize, F>(&self, mut g: F) -> Result<Refined<N>, QuadError>
    where
        F: FnMut(f64) -> Result<[f64; N], QuadError>,
    {
        let mut rule = self.clone();
        let mut prev = rule.integrate_many(&mut g)?;
        while rule.panels < MAX_PANELS {
            rule = rule.doubled();
            let next = rule.integrate_many(&mut g)?;
            let agree = prev
                .iter()
                .zip(&next)
                .all(|(p, n)| (n - p).abs() <= REFINE_RTOL * n.abs().max(p.abs()) + REFINE_ATOL);
            prev = next;
            if agree {
                return Ok(Refined { value: prev, panels: rule.panels, converged: true });
            }
        }
        log::warn!("quadrature did not reach relative {REFINE_RTOL} at {} panels", rule.panels);
        Ok(Refined { value: prev, panels: rule.panels, converged: false })
    }

    pub fn integrate_converged<F>(&self, mut g: F) -> Result<f64, QuadError>
    where
        F: FnMut(f64) -> Result<f64, QuadError>,
    {
        Ok(self.integrate_refined(|x| Ok([g(x)?]))?.value[0])
    }
}

/// `‖g‖_{L²}` over the rule's interval, refined to convergence.
pub fn l2_norm<F>(mut g: F, rule: &QuadratureRule) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    Ok(rule
        .integrate_converged(|x| {
            let v = g(x)?;
            Ok(v * v)
        })?
        .sqrt())
}

/// `‖g‖_{L²(ρ dx)}`.
pub fn weighted_l2_norm<F>(mut g: F, rho: &RhoProfile, rule: &QuadratureRule) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    Ok(rule
        .integrate_converged(|x| {
            let v = g(x)?;
            Ok(v * v * rho.rho_at(x)?)
        })?
        .sqrt())
}

/// Maximum of `|g|` over the given points.
pub fn sup_norm<F>(mut g: F, grid: &[f64]) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let mut best = 0.0f64;
    for &x in grid {
        let v = g(x)?;
        if !v.is_finite() {
            return Err(QuadError::NonFinite { x });
        }
        best = best.max(v.abs());
    }
    Ok(best)
}

/// `n` equispaced points covering `[a, b]` including both ends.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + i as f64 * h })
        .collect()
}

/// Minimum of `g` on a uniform grid of `n` points, followed by `rounds`
/// bisection steps around the grid argmin. Returns `(argmin, min)`.
pub fn grid_minimum<F>(mut g: F, a: f64, b: f64, n: usize, rounds: usize) -> Result<(f64, f64), QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let grid = uniform_grid(a, b, n);
    let mut best = (grid[0], f64::INFINITY);
    let mut idx = 0;
    for (i, &x) in grid.iter().enumerate() {
        let v = g(x)?;
        if !v.is_finite() {
            return Err(QuadError::NonFinite { x });
        }
        if v < best.1 {
            best = (x, v);
            idx = i;
        }
    }
    let mut lo = grid[idx.saturating_sub(1)];
    let mut hi = grid[(idx + 1).min(n - 1)];
    for _ in 0..rounds {
        let (xb, _) = best;
        for x in [0.5 * (lo + xb), 0.5 * (xb + hi)] {
            let v = g(x)?;
            if !v.is_finite() {
                return Err(QuadError::NonFinite { x });
            }
            if v < best.1 {
                best = (x, v);
            }
        }
        let half = 0.25 * (hi - lo);
        lo = (best.0 - half).max(a);
        hi = (best.0 + half).min(b);
    }
    Ok(best)
}

/// Cumulative `log ρ` on a dense grid, with extrema and `∫|b|`.
#[derive(Debug, Clone)]
pub struct RhoProfile {
    eps: f64,
    b: Expr,
    grid: Vec<f64>,
    log_rho: Vec<f64>,
    log_min: f64,
    log_max: f64,
    abs_b_integral: f64,
}

const CELL_POINTS: usize = 8;

impl RhoProfile {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `log ρ` at the grid points.
    pub fn log_values(&self) -> &[f64] {
        &self.log_rho
    }

    pub fn log_min(&self) -> f64 {
        self.log_min
    }

    pub fn log_max(&self) -> f64 {
        self.log_max
    }

    pub fn min(&self) -> f64 {
        self.log_min.exp()
    }

    pub fn max(&self) -> f64 {
        self.log_max.exp()
    }

    /// `max ρ / min ρ`, computed in log space.
    pub fn ratio(&self) -> f64 {
        (self.log_max - self.log_min).exp()
    }

    /// `∫_I |b| dx`.
    pub fn abs_b_integral(&self) -> f64 {
        self.abs_b_integral
    }

    fn cell_integral(&self, lo: f64, hi: f64) -> Result<f64, QuadError> {
        if hi == lo {
            return Ok(0.0);
        }
        let (z, w) = gauss_legendre(CELL_POINTS);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (zi, wi) in z.iter().zip(&w) {
            acc += wi * half * -self.b.eval_at(mid + half * zi)? / self.eps;
        }
        Ok(acc)
    }

    pub fn log_rho_at(&self, x: f64) -> Result<f64, QuadError> {
        let x1 = self.grid[0];
        let h = self.grid[1] - x1;
        let i = (((x - x1) / h).floor().max(0.0) as usize).min(self.grid.len() - 1);
        Ok(self.log_rho[i] + self.cell_integral(self.grid[i], x)?)
    }

    pub fn rho_at(&self, x: f64) -> Result<f64, QuadError> {
        Ok(self.log_rho_at(x)?.exp())
    }
}

/// Build the ρ profile of `prob` on `grid_size` points (at least 101).
pub fn rho_profile(prob: &Problem, grid_size: usize) -> Result<RhoProfile, QuadError> {
    let grid_size = grid_size.max(101);
    let (x1, x2) = prob.interval();
    let grid = uniform_grid(x1, x2, grid_size);
    let mut profile = RhoProfile {
        eps: prob.eps(),
        b: prob.b_expr().clone(),
        log_rho: Vec::with_capacity(grid_size),
        grid,
        log_min: 0.0,
        log_max: 0.0,
        abs_b_integral: 0.0,
    };
    let mut acc = 0.0;
    profile.log_rho.push(0.0);
    for i in 1..grid_size {
        acc += profile.cell_integral(profile.grid[i - 1], profile.grid[i])?;
        if !acc.is_finite() {
            return Err(QuadError::NonFinite { x: profile.grid[i] });
        }
        profile.log_rho.push(acc);
    }
    let argmin = argext(&profile.log_rho, |a, b| a < b);
    let argmax = argext(&profile.log_rho, |a, b| a > b);
    profile.log_min = profile.refine_extremum(argmin, |a, b| a < b)?;
    profile.log_max = profile.refine_extremum(argmax, |a, b| a > b)?;
    let rule = QuadratureRule::standard(x1, x2)?;
    profile.abs_b_integral = rule.integrate_converged(|x| Ok(prob.b(x)?.abs()))?;
    Ok(profile)
}

fn argext(v: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if better(x, v[best]) {
            best = i;
        }
    }
    best
}

impl RhoProfile {
    fn refine_extremum(&self, idx: usize, better: impl Fn(f64, f64) -> bool) -> Result<f64, QuadError> {
        let n = self.grid.len();
        let lo = self.grid[idx.saturating_sub(1)];
        let hi = self.grid[(idx + 1).min(n - 1)];
        let mut best = self.log_rho[idx];
        for j in 0..=16 {
            let x = lo + (hi - lo) * j as f64 / 16.0;
            let v = self.log_rho_at(x)?;
            if better(v, best) {
                best = v;
            }
        }
        Ok(best)
    }
}
