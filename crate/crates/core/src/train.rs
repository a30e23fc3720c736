//! Collocation losses and their minimization with Adam.

use serde::Serialize;
use thiserror::Error;

use crate::expr::ExprError;
use crate::net::{Network, Workspace};
use crate::problem::Problem;
use crate::sample::{stream, SampleSet};
use crate::trial::{apply_operator, operator_weights, Smooth, TrialFunction, TrialKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("loss spec is for {spec:?} but the trial function is {trial:?}")]
    KindMismatch { spec: TrialKind, trial: TrialKind },
    #[error("sample has {got} points, loss spec expects {expected}")]
    SampleSize { expected: usize, got: usize },
    #[error("non-finite loss {loss} at epoch {epoch}; lower the step size")]
    Diverged { epoch: usize, loss: f64 },
    #[error("{0} is not finite at x = {1}")]
    NonFinite(&'static str, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossSpec {
    pub kind: TrialKind,
    pub n: usize,
    /// Draw fresh collocation points every epoch.
    pub resample: bool,
    /// Weight of the boundary mismatch term (PINN1 only).
    pub boundary_weight: f64,
}

impl LossSpec {
    pub fn new(kind: TrialKind, n: usize) -> Self {
        Self { kind, n, resample: false, boundary_weight: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            steps_per_epoch: 1,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossValue {
    /// `(1/n) Σ (f - L[t])²`.
    pub residual: f64,
    /// `|p - t(x1)|² + |q - t(x2)|²`, unweighted.
    pub boundary: f64,
    /// `residual + boundary_weight · boundary` for PINN1, `residual` for PINN2.
    pub total: f64,
}

/// Mean squared residual of any smooth candidate over `points`.
pub fn residual_loss(prob: &Problem, t: &(impl Smooth + ?Sized), points: &[f64]) -> Result<f64, ExprError> {
    let mut sum = 0.0;
    for &x in points {
        let r = prob.f(x)? - apply_operator(prob, t, x)?;
        sum += r * r;
    }
    Ok(sum / points.len() as f64)
}

pub fn loss(prob: &Problem, t: &TrialFunction, s: &SampleSet, spec: &LossSpec) -> Result<LossValue, TrainError> {
    check(t, s, spec)?;
    let residual = residual_loss(prob, t, s.points())?;
    Ok(combine(residual, t, spec))
}

fn combine(residual: f64, t: &TrialFunction, spec: &LossSpec) -> LossValue {
    match spec.kind {
        TrialKind::Pinn1 => {
            let (a, b) = t.boundary_mismatch();
            let boundary = a + b;
            LossValue { residual, boundary, total: residual + spec.boundary_weight * boundary }
        }
        TrialKind::Pinn2 => LossValue { residual, boundary: 0.0, total: residual },
    }
}

fn check(t: &TrialFunction, s: &SampleSet, spec: &LossSpec) -> Result<(), TrainError> {
    if t.kind() != spec.kind {
        return Err(TrainError::KindMismatch { spec: spec.kind, trial: t.kind() });
    }
    if s.len() != spec.n {
        return Err(TrainError::SampleSize { expected: spec.n, got: s.len() });
    }
    Ok(())
}

/// Collocation data with coefficients evaluated once: the residual at
/// `x_i` is `f_i - (w_i · jet N(x_i) + offset_i)`.
#[derive(Debug, Clone)]
pub struct Collocation {
    points: Vec<f64>,
    f: Vec<f64>,
    weights: Vec<[f64; 3]>,
    offset: Vec<f64>,
}

impl Collocation {
    pub fn new(prob: &Problem, t: &TrialFunction, points: &[f64]) -> Result<Self, TrainError> {
        let mut out = Collocation {
            points: points.to_vec(),
            f: Vec::with_capacity(points.len()),
            weights: Vec::with_capacity(points.len()),
            offset: Vec::with_capacity(points.len()),
        };
        for &x in points {
            let (b, c, f) = (prob.b(x)?, prob.c(x)?, prob.f(x)?);
            if !(b.is_finite() && c.is_finite() && f.is_finite()) {
                return Err(TrainError::NonFinite("coefficient", x));
            }
            let (w, off) = operator_weights(t.kind(), prob.eps(), b, c, t.chi(x), t.ell(x));
            out.f.push(f);
            out.weights.push(w);
            out.offset.push(off);
        }
        Ok(out)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Loss and its θ-gradient (written into `grad`).
pub fn loss_and_grad(
    t: &TrialFunction,
    colloc: &Collocation,
    spec: &LossSpec,
    ws: &mut Workspace,
    grad: &mut [f64],
) -> LossValue {
    grad.fill(0.0);
    let net = t.net();
    let n = colloc.points.len() as f64;
    let mut residual = 0.0;
    for i in 0..colloc.points.len() {
        let jet = net.forward_jet_ws(colloc.points[i], ws);
        let w = colloc.weights[i];
        let r = colloc.f[i] - (w[0] * jet.value + w[1] * jet.first + w[2] * jet.second + colloc.offset[i]);
        residual += r * r;
        // d(r²)/dθ = -2 r ∇(w · jet)
        let scale = -2.0 * r / n;
        net.backward(w.map(|wk| wk * scale), ws, grad);
    }
    residual /= n;
    if spec.kind == TrialKind::Pinn2 {
        return LossValue { residual, boundary: 0.0, total: residual };
    }
    let ((x1, x2), (p, q)) = (t.interval(), t.boundary_values());
    let mut boundary = 0.0;
    for (x, target) in [(x1, p), (x2, q)] {
        let d = target - net.forward_jet_ws(x, ws).value;
        boundary += d * d;
        net.backward([-2.0 * spec.boundary_weight * d, 0.0, 0.0], ws, grad);
    }
    LossValue { residual, boundary, total: residual + spec.boundary_weight * boundary }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(dim: usize, cfg: &TrainConfig) -> Self {
        Self {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            step: 0,
            lr: cfg.lr,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.adam_eps,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    /// Sampled Error against the exact solution, when one is attached.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainedResult {
    pub trial: TrialFunction,
    pub initial_loss: f64,
    pub final_loss: LossValue,
    /// One entry per epoch, measured after that epoch's updates.
    pub history: Vec<EpochRecord>,
    /// Whether the window-10 moving average of the loss never increases.
    pub smoothed_nonincreasing: bool,
}

fn sampled_error(prob: &Problem, t: &TrialFunction, points: &[f64]) -> Result<Option<f64>, ExprError> {
    let Some(exact) = prob.exact() else { return Ok(None) };
    let mut sum = 0.0;
    for &x in points {
        let d = exact.eval(x)? - t.eval(x);
        sum += d * d;
    }
    Ok(Some(sum / points.len() as f64))
}

/// Moving average with the given window; shorter at the start.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

/// Minimize the loss over the network parameters. With `spec.resample`
/// the collocation points of epoch `e ≥ 1` are redrawn from
/// `(cfg.seed, RESAMPLE_BASE + e)`; the first epoch uses `s`.
pub fn train(
    prob: &Problem,
    mut t: TrialFunction,
    s: &SampleSet,
    spec: &LossSpec,
    cfg: &TrainConfig,
) -> Result<TrainedResult, TrainError> {
    check(&t, s, spec)?;
    let mut colloc = Collocation::new(prob, &t, s.points())?;
    let mut ws = Workspace::new(t.net());
    let mut grad = vec![0.0; t.net().param_count()];
    let mut adam = Adam::new(grad.len(), cfg);
    let initial = loss_and_grad(&t, &colloc, spec, &mut ws, &mut grad);
    if !initial.total.is_finite() {
        return Err(TrainError::Diverged { epoch: 0, loss: initial.total });
    }
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        if spec.resample && epoch > 1 {
            let fresh = SampleSet::draw_stream(cfg.seed, stream::RESAMPLE_BASE + epoch as u64, spec.n, prob.interval());
            colloc = Collocation::new(prob, &t, fresh.points())?;
        }
        for step in 0..cfg.steps_per_epoch {
            // the first step of the run reuses the gradient computed above
            if epoch > 1 || step > 0 || spec.resample {
                let l = loss_and_grad(&t, &colloc, spec, &mut ws, &mut grad);
                if !l.total.is_finite() {
                    return Err(TrainError::Diverged { epoch, loss: l.total });
                }
            }
            adam.step(t.net_mut().params_mut(), &grad);
        }
        let l = loss_on(&t, &colloc, spec);
        if !l.total.is_finite() {
            return Err(TrainError::Diverged { epoch, loss: l.total });
        }
        let error = sampled_error(prob, &t, colloc.points())?;
        history.push(EpochRecord { epoch, loss: l.total, error });
    }
    let final_loss = loss_on(&t, &Collocation::new(prob, &t, s.points())?, spec);
    let losses: Vec<f64> = history.iter().map(|h| h.loss).collect();
    let smooth = moving_average(&losses, 10);
    let smoothed_nonincreasing = smooth.windows(2).all(|w| w[1] <= w[0]);
    Ok(TrainedResult { trial: t, initial_loss: initial.total, final_loss, history, smoothed_nonincreasing })
}

fn loss_on(t: &TrialFunction, colloc: &Collocation, spec: &LossSpec) -> LossValue {
    let net: &Network = t.net();
    let n = colloc.points.len() as f64;
    let mut residual = 0.0;
    for i in 0..colloc.points.len() {
        let jet = net.forward_jet(colloc.points[i]);
        let w = colloc.weights[i];
        let r = colloc.f[i] - (w[0] * jet.value + w[1] * jet.first + w[2] * jet.second + colloc.offset[i]);
        residual += r * r;
    }
    combine(residual / n, t, spec)
}
