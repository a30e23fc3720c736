//! Error certificates: a-posteriori bounds on `||y - t||` in terms of the
//! residual `f - L[t]`, checked by quadrature and by sampling.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::ExprError;
use crate::net::{Network, NetError};
use crate::oracle::{OracleError, Reference, MAX_MESH};
use crate::problem::{Problem, ProblemError, ProblemSpec, ValidationReport};
use crate::quad::{rho_profile, QuadError, QuadratureRule, RhoProfile};
use crate::sample::{mc_from_values, McEstimate, SampleError, SampleSet};
use crate::train::{train, LossSpec, TrainConfig, TrainError};
use crate::trial::{apply_operator, Smooth, TrialFunction, TrialKind};

/// Grid used for the ρ profile behind the constants.
pub const RHO_GRID: usize = 2001;
/// Relative slack on the integral inequalities (quadrature budget).
pub const INTEGRAL_RTOL: f64 = 1e-6;
/// A numerical reference must perturb the Error by at most this fraction.
pub const REFERENCE_BUDGET: f64 = 0.01;
/// Starting mesh for finite-difference references.
pub const DEFAULT_FD_MESH: usize = 1024;

/// Certificate families, ordered from weakest to strongest hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Energy,
    Weighted,
    Plain,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Energy, Family::Weighted, Family::Plain];

    pub fn name(self) -> &'static str {
        match self {
            Family::Energy => "energy",
            Family::Weighted => "weighted",
            Family::Plain => "plain",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s.to_ascii_lowercase())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("{family:?} certificate does not apply: {reason}")]
    Inadmissible { family: Family, reason: String },
    #[error("no certificate family applies (min c = {c_min} is negative)")]
    NoFamily { c_min: f64 },
    #[error("{family:?} certificate needs a trial that matches the boundary data exactly; use pinn2 or the energy family")]
    RequiresExactBoundary { family: Family },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Family-specific constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Constants {
    Energy {
        /// `max ρ / (eps min ρ)`.
        m: f64,
        k1: f64,
        k2: f64,
        /// Sampled PINN1 constant as printed alongside the PINN1 loss:
        /// `M²|I|⁴ + (M(‖b‖₁ + |I|‖c‖₁) + 1)²`.
        pinn1_printed: f64,
        /// Twice the printed constant; what `(a + b)² ≤ 2a² + 2b²` gives.
        pinn1: f64,
    },
    Weighted {
        lambda: f64,
        k3: f64,
        k3_tilde: f64,
        /// `(max ρ / min ρ) / λ²`.
        tight: f64,
        /// `exp(∫|b|/eps) / λ²`.
        loose: f64,
    },
    Plain {
        gamma: f64,
        k4_tilde: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub family: Family,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Bound on Error/Loss for boundary-exact trials.
    pub ratio_bound: f64,
    /// `A` in `‖y - t‖ ≤ A ‖f - L[t]‖ + B max(|p - t(x1)|, |q - t(x2)|)`.
    pub residual_constant: f64,
    /// `B` in the same inequality.
    pub boundary_constant: f64,
    pub constants: Constants,
}

/// Problem-level quantities shared by all certificates.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub validation: ValidationReport,
    pub rho: RhoProfile,
    pub length: f64,
    pub eps: f64,
    pub b_l1: f64,
    pub c_l1: f64,
    pub b_l2: f64,
    pub c_l2: f64,
    pub b_l2_mu: f64,
    pub c_l2_mu: f64,
}

/// `‖g‖_{L²(ρ dx)}` evaluated as `√max ρ · ‖g √(ρ/max ρ)‖` so that large
/// weights do not overflow before the final product.
fn scaled_weighted_norm<F>(mut g: F, rho: &RhoProfile, rule: &QuadratureRule) -> Result<f64, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let top = rho.log_max();
    let s = rule.integrate_converged(|x| {
        let v = g(x)?;
        Ok(v * v * (rho.log_rho_at(x)? - top).exp())
    })?;
    Ok(s.sqrt() * (0.5 * top).exp())
}

impl Analysis {
    pub fn new(prob: &Problem) -> Result<Self, CertifyError> {
        let validation = prob.validate()?;
        let rho = rho_profile(prob, RHO_GRID)?;
        let (x1, x2) = prob.interval();
        let rule = QuadratureRule::standard(x1, x2)?;
        let [c_l1, b_sq, c_sq] = rule
            .integrate_refined(|x| {
                let (b, c) = (prob.b(x)?, prob.c(x)?);
                Ok([c.abs(), b * b, c * c])
            })?
            .value;
        let b_l2_mu = scaled_weighted_norm(|x| Ok(prob.b(x)?), &rho, &rule)?;
        let c_l2_mu = scaled_weighted_norm(|x| Ok(prob.c(x)?), &rho, &rule)?;
        Ok(Self {
            validation,
            b_l1: rho.abs_b_integral(),
            rho,
            length: x2 - x1,
            eps: prob.eps(),
            c_l1,
            b_l2: b_sq.sqrt(),
            c_l2: c_sq.sqrt(),
            b_l2_mu,
            c_l2_mu,
        })
    }

    pub fn admissible(&self) -> Vec<Family> {
        self.validation.admissible()
    }

    pub fn certificate(&self, family: Family) -> Result<Certificate, CertifyError> {
        let v = &self.validation;
        let len = self.length;
        let (rho_min, rho_max) = (self.rho.min(), self.rho.max());
        let ratio = self.rho.ratio();
        if !v.c_nonnegative {
            return Err(CertifyError::Inadmissible {
                family,
                reason: format!("c must be nonnegative, min c = {}", v.c_min),
            });
        }
        let cert = match family {
            Family::Energy => {
                let m = ratio / self.eps;
                let k1 = m * len * len;
                let k2 = m * (len.sqrt() * self.b_l1 + len.powf(1.5) * self.c_l1) + len.sqrt();
                let printed = m * m * len.powi(4) + (m * (self.b_l1 + len * self.c_l1) + 1.0).powi(2);
                Certificate {
                    family,
                    rho_min,
                    rho_max,
                    ratio_bound: k1 * k1,
                    residual_constant: k1,
                    boundary_constant: k2,
                    constants: Constants::Energy { m, k1, k2, pinn1_printed: printed, pinn1: 2.0 * printed },
                }
            }
            Family::Weighted => {
                let lambda = v.lambda;
                if !(lambda > 0.0) {
                    return Err(CertifyError::Inadmissible {
                        family,
                        reason: format!("needs c ≥ λ > 0, min c = {lambda}"),
                    });
                }
                let k3 = self.b_l2_mu / (lambda * len) + self.c_l2_mu / lambda + len.sqrt() * rho_max.sqrt();
                let k3_tilde = self.b_l2 / (lambda * len) + self.c_l2 / lambda + len.sqrt();
                let tight = ratio / (lambda * lambda);
                let loose = (self.b_l1 / self.eps).exp() / (lambda * lambda);
                Certificate {
                    family,
                    rho_min,
                    rho_max,
                    ratio_bound: tight,
                    residual_constant: ratio.sqrt() / lambda,
                    boundary_constant: ratio.sqrt() * k3_tilde,
                    constants: Constants::Weighted { lambda, k3, k3_tilde, tight, loose },
                }
            }
            Family::Plain => {
                let gamma = v.gamma;
                if !(gamma > 0.0) {
                    return Err(CertifyError::Inadmissible {
                        family,
                        reason: format!("needs -b'/2 + c ≥ γ > 0, min = {gamma}"),
                    });
                }
                let k4_tilde = self.b_l2 / (gamma * len) + self.c_l2 / gamma + len.sqrt();
                Certificate {
                    family,
                    rho_min,
                    rho_max,
                    ratio_bound: 1.0 / (gamma * gamma),
                    residual_constant: 1.0 / gamma,
                    boundary_constant: k4_tilde,
                    constants: Constants::Plain { gamma, k4_tilde },
                }
            }
        };
        Ok(cert)
    }
}

/// Certificate of one family for `prob`.
pub fn constants(prob: &Problem, family: Family) -> Result<Certificate, CertifyError> {
    Analysis::new(prob)?.certificate(family)
}

/// Outcome of one family's inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCheck {
    pub certificate: Certificate,
    /// Bound on sampled Error / Loss used for the sampled comparison.
    pub bound: f64,
    /// `‖y - t‖_{L²}`.
    pub lhs: f64,
    /// Right-hand side of the integral inequality.
    pub rhs: f64,
    /// Integral inequality (asserted).
    pub holds: bool,
    /// `Error ≤ bound · Loss` on the sample (reported only).
    pub sampled_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Halfwidths {
    pub k: f64,
    pub error: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub trial: &'static str,
    pub n: usize,
    pub seed: u64,
    /// `(1/n) Σ |y(X_i) - t(X_i)|²`.
    pub error: f64,
    /// `(1/n) Σ (f(X_i) - L[t](X_i))²`.
    pub residual_loss: f64,
    /// `|p - t(x1)|² + |q - t(x2)|²`.
    pub boundary_loss: f64,
    /// Residual loss plus boundary loss.
    pub loss: f64,
    /// `error / loss`, zero when both vanish.
    pub ratio: f64,
    /// `(1/|I|) ∫ |y - t|²` by quadrature.
    pub integral_error: f64,
    /// `(1/|I|) ∫ (f - L[t])²` by quadrature.
    pub integral_loss: f64,
    pub integral_ratio: f64,
    pub beta_hat_error: f64,
    pub beta_hat_loss: f64,
    /// Population spreads from quadrature.
    pub beta_error: f64,
    pub beta_loss: f64,
    pub halfwidths: Vec<Halfwidths>,
    /// Sampled and integral Error/Loss agree within the sum of their
    /// k = 5 halfwidths.
    pub sampled_agrees: bool,
    pub reference: String,
    pub reference_error_estimate: f64,
    pub validation: ValidationReport,
    pub families: Vec<FamilyCheck>,
    pub pass: bool,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Compare `t` with the reference on the sample and by quadrature, and
/// check the requested certificate families (all applicable ones if
/// `families` is `None`).
pub fn report(
    prob: &Problem,
    t: &(impl Smooth + ?Sized),
    label: &'static str,
    s: &SampleSet,
    reference: &Reference,
    families: Option<&[Family]>,
) -> Result<Report, CertifyError> {
    let analysis = Analysis::new(prob)?;
    report_with(prob, &analysis, t, label, s, reference, families)
}

/// [`report`] with precomputed problem constants.
pub fn report_with(
    prob: &Problem,
    analysis: &Analysis,
    t: &(impl Smooth + ?Sized),
    label: &'static str,
    s: &SampleSet,
    reference: &Reference,
    families: Option<&[Family]>,
) -> Result<Report, CertifyError> {
    let exact_boundary = t.boundary_exact();
    let families: Vec<Family> = match families {
        Some(list) => {
            for &f in list {
                if !exact_boundary && f != Family::Energy {
                    return Err(CertifyError::RequiresExactBoundary { family: f });
                }
            }
            list.to_vec()
        }
        None => analysis
            .admissible()
            .into_iter()
            .filter(|&f| exact_boundary || f == Family::Energy)
            .collect(),
    };
    if families.is_empty() {
        return Err(CertifyError::NoFamily { c_min: analysis.validation.c_min });
    }
    let certs = families
        .iter()
        .map(|&f| analysis.certificate(f))
        .collect::<Result<Vec<_>, _>>()?;

    // sampled quantities
    let mut err_vals = Vec::with_capacity(s.len());
    let mut res_vals = Vec::with_capacity(s.len());
    for &x in s.points() {
        let jet = t.jet(x)?;
        let d = reference.eval(x)? - jet.value;
        let r = prob.f(x)? - prob.operator(x, jet)?;
        err_vals.push(d * d);
        res_vals.push(r * r);
    }
    let error: McEstimate = mc_from_values(s.points(), &err_vals)?;
    let residual: McEstimate = mc_from_values(s.points(), &res_vals)?;
    let (x1, x2) = prob.interval();
    let (p, q) = prob.boundary_values();
    let (d1, d2) = (p - t.value(x1)?, q - t.value(x2)?);
    let boundary_loss = if exact_boundary { 0.0 } else { d1 * d1 + d2 * d2 };
    let loss = residual.mean + boundary_loss;

    // quadrature
    let rule = QuadratureRule::standard(x1, x2)?;
    let [e1, e2, r1, r2] = rule
        .integrate_refined(|x| {
            let jet = t.jet(x)?;
            let d = reference.eval(x).map_err(|e| match e {
                OracleError::Expr(e) => QuadError::Expr(e),
                _ => QuadError::NonFinite { x },
            })? - jet.value;
            let r = prob.f(x)? - prob.operator(x, jet)?;
            Ok([d * d, d.powi(4), r * r, r.powi(4)])
        })?
        .value;
    let len = x2 - x1;
    let (integral_error, integral_loss) = (e1 / len, r1 / len);
    let beta_error = (e2 / len - integral_error * integral_error).max(0.0).sqrt();
    let beta_loss = (r2 / len - integral_loss * integral_loss).max(0.0).sqrt();
    let sqrt_n = (s.len() as f64).sqrt();
    let agrees = |sampled: f64, beta_hat: f64, truth: f64, beta: f64| {
        (sampled - truth).abs() <= 5.0 * (beta_hat + beta) / sqrt_n
    };
    let sampled_agrees = agrees(error.mean, error.beta_hat, integral_error, beta_error)
        && agrees(residual.mean, residual.beta_hat, integral_loss, beta_loss);

    let delta = reference.error_estimate() * len.sqrt();
    let error_norm = e1.sqrt();
    let residual_norm = r1.sqrt();
    let boundary_gap = d1.abs().max(d2.abs());
    let mut checks = Vec::with_capacity(certs.len());
    for cert in certs {
        let rhs = if exact_boundary {
            cert.residual_constant * residual_norm
        } else {
            cert.residual_constant * residual_norm + cert.boundary_constant * boundary_gap
        };
        let bound = match (exact_boundary, cert.constants) {
            (false, Constants::Energy { pinn1, .. }) => pinn1,
            _ => cert.ratio_bound,
        };
        checks.push(FamilyCheck {
            certificate: cert,
            bound,
            lhs: error_norm,
            rhs,
            holds: error_norm <= rhs * (1.0 + INTEGRAL_RTOL) + delta,
            sampled_holds: error.mean <= bound * loss,
        });
    }
    let pass = checks.iter().all(|c| c.holds);
    Ok(Report {
        trial: label,
        n: s.len(),
        seed: s.seed(),
        error: error.mean,
        residual_loss: residual.mean,
        boundary_loss,
        loss,
        ratio: ratio(error.mean, loss),
        integral_error,
        integral_loss,
        integral_ratio: ratio(integral_error, integral_loss),
        beta_hat_error: error.beta_hat,
        beta_hat_loss: residual.beta_hat,
        beta_error,
        beta_loss,
        halfwidths: error
            .halfwidths()
            .iter()
            .zip(residual.halfwidths())
            .map(|(&(k, e), (_, l))| Halfwidths { k, error: e, loss: l })
            .collect(),
        sampled_agrees,
        reference: reference.label(),
        reference_error_estimate: reference.error_estimate(),
        validation: analysis.validation,
        families: checks,
        pass,
    })
}

/// Reference for `prob`: the closed form if attached, otherwise a
/// finite-difference solution refined until its estimated error moves the
/// sampled Error of `t` by at most [`REFERENCE_BUDGET`].
pub fn reference_for(
    prob: &Problem,
    t: &(impl Smooth + ?Sized),
    s: &SampleSet,
    mesh: usize,
) -> Result<Reference, CertifyError> {
    let mut m = mesh;
    loop {
        let reference = Reference::for_problem(prob, m)?;
        let delta = reference.error_estimate();
        if delta == 0.0 {
            return Ok(reference);
        }
        let mut sum = 0.0;
        for &x in s.points() {
            let d = reference.eval(x)? - t.value(x)?;
            sum += d * d;
        }
        let err = sum / s.len() as f64;
        let perturbation = 2.0 * delta * err.sqrt() + delta * delta;
        let Reference::Fd { solution, .. } = &reference else { unreachable!() };
        if perturbation <= REFERENCE_BUDGET * err || solution.cells() >= MAX_MESH {
            if perturbation > REFERENCE_BUDGET * err {
                log::warn!("reference error estimate {delta:.3e} exceeds the budget at the finest mesh");
            }
            return Ok(reference);
        }
        m = solution.cells() * 2;
    }
}

/// Settings of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub depth: usize,
    pub width: usize,
    pub loss: LossSpec,
    pub train: TrainConfig,
    /// Worker threads; 0 uses the rayon default.
    pub jobs: usize,
    pub fd_mesh: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            depth: crate::net::DEFAULT_DEPTH,
            width: crate::net::DEFAULT_WIDTH,
            loss: LossSpec::new(TrialKind::Pinn2, 256),
            train: TrainConfig::default(),
            jobs: 0,
            fd_mesh: DEFAULT_FD_MESH,
        }
    }
}

/// One sweep point. Numeric fields are `None` when the point failed or
/// the bound is not admissible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub param_name: String,
    pub param_value: f64,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda_min_c: Option<f64>,
    pub loss: Option<f64>,
    pub error: Option<f64>,
    pub ratio: Option<f64>,
    pub bound_plain: Option<f64>,
    pub bound_weighted_tight: Option<f64>,
    pub bound_weighted_loose: Option<f64>,
    pub bound_energy: Option<f64>,
    pub boundary_loss: Option<f64>,
    pub n: usize,
    pub seed: u64,
    pub epochs: usize,
    pub wall_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip)]
    pub report: Option<Box<Report>>,
}

pub const CSV_HEADER: &str = "param_name,param_value,epsilon,gamma,lambda_min_c,loss,error,ratio,bound_plain,bound_weighted_tight,bound_weighted_loose,bound_energy,boundary_loss,n,seed,epochs,wall_ms";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRecord {
    pub fn csv_row(&self) -> String {
        let mut row = String::new();
        write!(
            row,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.param_name,
            self.param_value,
            opt(self.epsilon),
            opt(self.gamma),
            opt(self.lambda_min_c),
            opt(self.loss),
            opt(self.error),
            opt(self.ratio),
            opt(self.bound_plain),
            opt(self.bound_weighted_tight),
            opt(self.bound_weighted_loose),
            opt(self.bound_energy),
            opt(self.boundary_loss),
            self.n,
            self.seed,
            self.epochs,
            self.wall_ms
        )
        .unwrap();
        row
    }

    fn failed(name: &str, value: f64, cfg: &SweepConfig, wall_ms: u128, message: String) -> Self {
        SweepRecord {
            param_name: name.to_string(),
            param_value: value,
            epsilon: None,
            gamma: None,
            lambda_min_c: None,
            loss: None,
            error: None,
            ratio: None,
            bound_plain: None,
            bound_weighted_tight: None,
            bound_weighted_loose: None,
            bound_energy: None,
            boundary_loss: None,
            n: cfg.loss.n,
            seed: cfg.train.seed,
            epochs: cfg.train.epochs,
            wall_ms,
            failure: Some(message),
            report: None,
        }
    }
}

/// Sweep output as CSV text.
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Train a fresh network and certify it for one problem.
pub fn train_and_report(prob: &Problem, cfg: &SweepConfig) -> Result<Report, CertifyError> {
    let analysis = Analysis::new(prob)?;
    let kind = cfg.loss.kind;
    let net = Network::init(cfg.train.seed, cfg.depth, cfg.width)?;
    let s = SampleSet::draw(cfg.train.seed, cfg.loss.n, prob.interval());
    let t = TrialFunction::new(kind, net, prob);
    let trained = train(prob, t, &s, &cfg.loss, &cfg.train)?;
    let reference = reference_for(prob, &trained.trial, &s, cfg.fd_mesh)?;
    report_with(prob, &analysis, &trained.trial, kind.name(), &s, &reference, None)
}

fn sweep_point(base: &ProblemSpec, name: &str, value: f64, cfg: &SweepConfig) -> SweepRecord {
    let start = Instant::now();
    let run = || -> Result<(Problem, Report), CertifyError> {
        let prob = base.with_param(name, value)?.build()?;
        let report = train_and_report(&prob, cfg)?;
        Ok((prob, report))
    };
    let outcome = run();
    let wall_ms = start.elapsed().as_millis();
    match outcome {
        Ok((prob, report)) => {
            let find = |f: Family| report.families.iter().find(|c| c.certificate.family == f);
            let (tight, loose) = match find(Family::Weighted).map(|c| c.certificate.constants) {
                Some(Constants::Weighted { tight, loose, .. }) => (Some(tight), Some(loose)),
                _ => (None, None),
            };
            SweepRecord {
                param_name: name.to_string(),
                param_value: value,
                epsilon: Some(prob.eps()),
                gamma: Some(report.validation.gamma),
                lambda_min_c: Some(report.validation.lambda),
                loss: Some(report.loss),
                error: Some(report.error),
                ratio: Some(report.ratio),
                bound_plain: find(Family::Plain).map(|c| c.bound),
                bound_weighted_tight: tight,
                bound_weighted_loose: loose,
                bound_energy: find(Family::Energy).map(|c| c.bound),
                boundary_loss: Some(report.boundary_loss),
                n: cfg.loss.n,
                seed: cfg.train.seed,
                epochs: cfg.train.epochs,
                wall_ms,
                failure: None,
                report: Some(Box::new(report)),
            }
        }
        Err(e) => SweepRecord::failed(name, value, cfg, wall_ms, e.to_string()),
    }
}

/// Train and certify one fresh network per parameter value. Points run
/// concurrently; the output follows the order of `values`.
pub fn sweep(base: &ProblemSpec, param: &str, values: &[f64], cfg: &SweepConfig) -> Vec<SweepRecord> {
    let work = || {
        values
            .par_iter()
            .map(|&v| sweep_point(base, param, v, cfg))
            .collect::<Vec<_>>()
    };
    if cfg.jobs == 0 {
        return work();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build() {
        Ok(pool) => pool.install(work),
        Err(e) => {
            log::warn!("could not build a {}-thread pool ({e}); using the global pool", cfg.jobs);
            work()
        }
    }
}

/// `L[t]` on a grid, handy for diagnostics.
pub fn residual_on(prob: &Problem, t: &(impl Smooth + ?Sized), xs: &[f64]) -> Result<Vec<f64>, ExprError> {
    xs.iter().map(|&x| Ok(prob.f(x)? - apply_operator(prob, t, x)?)).collect()
}
