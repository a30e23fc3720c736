//! Boundary value problems `-eps y'' + b y' + c y = f` on `(x1, x2)` with
//! Dirichlet data `y(x1) = p`, `y(x2) = q`, and the registry of model
//! problems with closed-form solutions.

use serde::Serialize;
use thiserror::Error;

use crate::certify::Family;
use crate::expr::{Bindings, Expr, ExprError};
use crate::jet::Jet2;
use crate::quad::{grid_minimum, sup_norm, uniform_grid, QuadError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("interval must satisfy x1 < x2, got ({0}, {1})")]
    Interval(f64, f64),
    #[error("eps must be positive and finite, got {0}")]
    Epsilon(f64),
    #[error("boundary values must be finite")]
    Boundary,
    #[error("in `{field}`: {source}")]
    Expr {
        field: &'static str,
        #[source]
        source: ExprError,
    },
    #[error("unknown example `{0}` (known: example36, example41, example51, example52)")]
    UnknownExample(String),
    #[error("example `{example}` has no parameter `{name}`")]
    UnknownParameter { example: String, name: String },
    #[error("{what} is not finite at x = {x}")]
    NonFinite { what: &'static str, x: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Number of grid points used by [`Problem::validate`].
pub const VALIDATION_GRID: usize = 1001;
/// Bisection rounds around the grid argmin.
pub const VALIDATION_ROUNDS: usize = 3;

/// A closed-form solution attached to a problem.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    tag: String,
    formula: Expr,
    params: Bindings,
    value: Expr,
    first: Expr,
    second: Expr,
}

impl ExactSolution {
    /// `formula` may reference any parameter in `params`.
    pub fn new(tag: impl Into<String>, formula: Expr, params: Bindings) -> Self {
        let value = formula.bind(&params);
        let first = value.diff();
        let second = first.diff();
        Self { tag: tag.into(), formula, params, value, first, second }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn formula(&self) -> &Expr {
        &self.formula
    }

    pub fn params(&self) -> &Bindings {
        &self.params
    }

    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        self.value.eval_at(x)
    }

    pub fn jet(&self, x: f64) -> Result<Jet2, ExprError> {
        Ok(Jet2::new(
            self.value.eval_at(x)?,
            self.first.eval_at(x)?,
            self.second.eval_at(x)?,
        ))
    }
}

/// A fully specified boundary value problem. Coefficients are stored with
/// all parameters (including `eps`) substituted.
#[derive(Debug, Clone)]
pub struct Problem {
    name: Option<String>,
    x1: f64,
    x2: f64,
    eps: f64,
    p: f64,
    q: f64,
    params: Bindings,
    b: Expr,
    c: Expr,
    f: Expr,
    db: Expr,
    exact: Option<ExactSolution>,
}

fn bind_checked(e: &Expr, params: &Bindings, field: &'static str) -> Result<Expr, ProblemError> {
    let bound = e.bind(params);
    if let Some(name) = bound.params().into_iter().next() {
        return Err(ProblemError::Expr { field, source: ExprError::UnboundParameter(name) });
    }
    Ok(bound)
}

impl Problem {
    /// `params` supplies values for the parameters referenced by `b`, `c`
    /// and `f`; `eps` is always available under the name `eps`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        interval: (f64, f64),
        eps: f64,
        b: &Expr,
        c: &Expr,
        f: &Expr,
        p: f64,
        q: f64,
        mut params: Bindings,
    ) -> Result<Self, ProblemError> {
        let (x1, x2) = interval;
        if !(x1 < x2) || !x1.is_finite() || !x2.is_finite() {
            return Err(ProblemError::Interval(x1, x2));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(ProblemError::Epsilon(eps));
        }
        if !p.is_finite() || !q.is_finite() {
            return Err(ProblemError::Boundary);
        }
        params.insert("eps".into(), eps);
        let b = bind_checked(b, &params, "b")?;
        let c = bind_checked(c, &params, "c")?;
        let f = bind_checked(f, &params, "f")?;
        let db = b.diff();
        Ok(Self { name: None, x1, x2, eps, p, q, params, b, c, f, db, exact: None })
    }

    /// Parse the three expressions and build the problem. Parameter names
    /// are the keys of `params` plus `eps`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_text(
        interval: (f64, f64),
        eps: f64,
        b: &str,
        c: &str,
        f: &str,
        p: f64,
        q: f64,
        params: &[(&str, f64)],
    ) -> Result<Self, ProblemError> {
        let bindings: Bindings = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        let names = param_names(&bindings);
        let parse = |src: &str, field| {
            Expr::parse(src, &names).map_err(|source| ProblemError::Expr { field, source })
        };
        Self::new(interval, eps, &parse(b, "b")?, &parse(c, "c")?, &parse(f, "f")?, p, q, bindings)
    }

    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.x1, self.x2)
    }

    pub fn length(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn boundary_values(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    pub fn params(&self) -> &Bindings {
        &self.params
    }

    pub fn exact(&self) -> Option<&ExactSolution> {
        self.exact.as_ref()
    }

    pub fn b_expr(&self) -> &Expr {
        &self.b
    }

    pub fn c_expr(&self) -> &Expr {
        &self.c
    }

    pub fn f_expr(&self) -> &Expr {
        &self.f
    }

    /// Symbolic derivative of `b`.
    pub fn db_expr(&self) -> &Expr {
        &self.db
    }

    pub fn b(&self, x: f64) -> Result<f64, ExprError> {
        self.b.eval_at(x)
    }

    pub fn c(&self, x: f64) -> Result<f64, ExprError> {
        self.c.eval_at(x)
    }

    pub fn f(&self, x: f64) -> Result<f64, ExprError> {
        self.f.eval_at(x)
    }

    pub fn db(&self, x: f64) -> Result<f64, ExprError> {
        self.db.eval_at(x)
    }

    /// Same coefficients with homogeneous boundary data.
    pub fn homogeneous(&self) -> Problem {
        Problem { p: 0.0, q: 0.0, exact: None, ..self.clone() }
    }

    /// Same coefficients with a different source term (already bound).
    pub fn with_source(&self, f: Expr) -> Problem {
        Problem { f, exact: None, ..self.clone() }
    }

    /// `-eps w'' + b w' + c w` at `x`, given the jet of `w`.
    pub fn operator(&self, x: f64, w: Jet2) -> Result<f64, ExprError> {
        Ok(-self.eps * w.second + self.b(x)? * w.first + self.c(x)? * w.value)
    }

    /// Grid check of the hypotheses behind each certificate family.
    pub fn validate(&self) -> Result<ValidationReport, ProblemError> {
        let grid = uniform_grid(self.x1, self.x2, VALIDATION_GRID);
        for &x in &grid {
            for (what, v) in [("b", self.b(x)), ("c", self.c(x)), ("f", self.f(x)), ("b'", self.db(x))] {
                let v = v.map_err(|source| ProblemError::Expr { field: "coefficients", source })?;
                if !v.is_finite() {
                    return Err(ProblemError::NonFinite { what, x });
                }
            }
        }
        let (_, c_min) = grid_minimum(|x| Ok(self.c(x)?), self.x1, self.x2, VALIDATION_GRID, VALIDATION_ROUNDS)?;
        let (_, gamma) = grid_minimum(
            |x| Ok(-0.5 * self.db(x)? + self.c(x)?),
            self.x1,
            self.x2,
            VALIDATION_GRID,
            VALIDATION_ROUNDS,
        )?;
        let c_nonnegative = c_min >= 0.0;
        Ok(ValidationReport {
            c_min,
            lambda: c_min,
            gamma,
            c_nonnegative,
            energy: c_nonnegative,
            weighted: c_min > 0.0,
            plain: c_nonnegative && gamma > 0.0,
        })
    }

    /// `max |L[ỹ] - f|` over a uniform grid, for the attached exact solution.
    pub fn exact_residual_sup(&self, points: usize) -> Result<Option<(f64, f64)>, ProblemError> {
        let Some(exact) = &self.exact else { return Ok(None) };
        let grid = uniform_grid(self.x1, self.x2, points);
        let residual = sup_norm(|x| Ok(self.operator(x, exact.jet(x)?)? - self.f(x)?), &grid)?;
        let f_sup = sup_norm(|x| Ok(self.f(x)?), &grid)?;
        Ok(Some((residual, f_sup)))
    }
}

/// Outcome of [`Problem::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    pub c_min: f64,
    /// Lower bound for `c`, the weighted-family constant.
    pub lambda: f64,
    /// Lower bound for `-b'/2 + c`, the plain-family constant.
    pub gamma: f64,
    pub c_nonnegative: bool,
    pub energy: bool,
    pub weighted: bool,
    pub plain: bool,
}

impl ValidationReport {
    pub fn admits(&self, family: Family) -> bool {
        match family {
            Family::Energy => self.energy,
            Family::Weighted => self.weighted,
            Family::Plain => self.plain,
        }
    }

    pub fn admissible(&self) -> Vec<Family> {
        Family::ALL.into_iter().filter(|f| self.admits(*f)).collect()
    }
}

fn param_names(b: &Bindings) -> Vec<String> {
    let mut names: Vec<String> = b.keys().cloned().collect();
    if !names.iter().any(|n| n == "eps") {
        names.push("eps".into());
    }
    names
}

/// Names accepted by [`registry_get`].
pub const EXAMPLES: [&str; 4] = ["example36", "example41", "example51", "example52"];

struct Entry {
    name: &'static str,
    summary: &'static str,
    defaults: &'static [(&'static str, f64)],
    b: &'static str,
    c: &'static str,
    f: &'static str,
    p: f64,
    q: f64,
    exact: &'static str,
}

const ENTRIES: [Entry; 4] = [
    Entry {
        name: "example36",
        summary: "b = x, c = lambda, y = x(1-x)e^x, p = q = 0",
        defaults: &[("eps", 1.0), ("lambda", 10.0)],
        b: "x",
        c: "lambda",
        f: "((3*eps+1+lambda)*x + (eps-1-lambda)*x^2 - x^3)*exp(x)",
        p: 0.0,
        q: 0.0,
        exact: "x*(1-x)*exp(x)",
    },
    Entry {
        name: "example41",
        summary: "b = 2, c = lambda, f = 0, p = 0, q = 1 (boundary layer at x = 1)",
        defaults: &[("eps", 1.0), ("lambda", 1.0)],
        b: "2",
        c: "lambda",
        f: "0",
        p: 0.0,
        q: 1.0,
        // (e^{r1 x} - e^{r2 x}) / (e^{r1} - e^{r2}) rescaled by e^{-r1} so it
        // stays finite for small eps
        exact: "(exp(r1*(x-1)) - exp(r2*x - r1))/(1 - exp(r2 - r1))",
    },
    Entry {
        name: "example51",
        summary: "b = -k x, c = lambda, y = x(1-x)e^x + x^2, p = 0, q = 1",
        defaults: &[("eps", 1.0), ("k", 7.0), ("lambda", 7.0)],
        b: "-k*x",
        c: "lambda",
        f: "(k*x^3+(k-lambda+eps)*x^2+(3*eps-k+lambda)*x)*exp(x)+lambda*x^2-2*k*x^2-2*eps",
        p: 0.0,
        q: 1.0,
        exact: "x*(1-x)*exp(x) + x^2",
    },
    Entry {
        name: "example52",
        summary: "b = -k x, c = lambda, y = sin(pi x) + cos(pi x), p = 1, q = -1",
        defaults: &[("eps", 1.0), ("k", 7.0), ("lambda", 7.0)],
        b: "-k*x",
        c: "lambda",
        f: "(eps*pi^2 + pi*k*x + lambda)*sin(pi*x) + (eps*pi^2 - pi*k*x + lambda)*cos(pi*x)",
        p: 1.0,
        q: -1.0,
        exact: "sin(pi*x) + cos(pi*x)",
    },
];

fn entry(name: &str) -> Result<&'static Entry, ProblemError> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| ProblemError::UnknownExample(name.to_string()))
}

/// One-line description of a registry entry.
pub fn registry_summary(name: &str) -> Result<&'static str, ProblemError> {
    Ok(entry(name)?.summary)
}

/// Default parameter values of a registry entry.
pub fn registry_defaults(name: &str) -> Result<Bindings, ProblemError> {
    Ok(entry(name)?
        .defaults
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect())
}

/// Build a registry problem on `(0, 1)`, overriding defaults with `overrides`.
pub fn registry_get(name: &str, overrides: &Bindings) -> Result<Problem, ProblemError> {
    let e = entry(name)?;
    let mut params = registry_defaults(name)?;
    for (k, v) in overrides {
        if !params.contains_key(k) {
            return Err(ProblemError::UnknownParameter { example: name.into(), name: k.clone() });
        }
        params.insert(k.clone(), *v);
    }
    let eps = params["eps"];
    let names = param_names(&params);
    let parse = |src: &str, field| {
        Expr::parse(src, &names).map_err(|source| ProblemError::Expr { field, source })
    };
    let prob = Problem::new(
        (0.0, 1.0),
        eps,
        &parse(e.b, "b")?,
        &parse(e.c, "c")?,
        &parse(e.f, "f")?,
        e.p,
        e.q,
        params.clone(),
    )?;

    let mut exact_params = prob.params().clone();
    if name == "example41" {
        let lambda = params["lambda"];
        let s = (1.0 / (eps * eps) + lambda / eps).sqrt();
        exact_params.insert("r1".into(), 1.0 / eps + s);
        exact_params.insert("r2".into(), 1.0 / eps - s);
    }
    let exact_names: Vec<String> = exact_params.keys().cloned().collect();
    let formula = Expr::parse(e.exact, &exact_names)
        .map_err(|source| ProblemError::Expr { field: "exact", source })?;
    Ok(prob
        .with_exact(ExactSolution::new(name, formula, exact_params))
        .with_name(name))
}

/// Serializable description of a problem, used by configuration files and
/// parameter sweeps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProblemSpec {
    Registry {
        name: String,
        params: Bindings,
    },
    Custom {
        x1: f64,
        x2: f64,
        eps: f64,
        b: String,
        c: String,
        f: String,
        p: f64,
        q: f64,
        params: Bindings,
        exact: Option<String>,
    },
}

impl ProblemSpec {
    pub fn registry(name: &str, params: Bindings) -> Self {
        ProblemSpec::Registry { name: name.to_string(), params }
    }

    pub fn build(&self) -> Result<Problem, ProblemError> {
        match self {
            ProblemSpec::Registry { name, params } => registry_get(name, params),
            ProblemSpec::Custom { x1, x2, eps, b, c, f, p, q, params, exact } => {
                let names = param_names(params);
                let parse = |src: &str, field| {
                    Expr::parse(src, &names).map_err(|source| ProblemError::Expr { field, source })
                };
                let prob = Problem::new(
                    (*x1, *x2),
                    *eps,
                    &parse(b, "b")?,
                    &parse(c, "c")?,
                    &parse(f, "f")?,
                    *p,
                    *q,
                    params.clone(),
                )?;
                match exact {
                    Some(src) => {
                        let formula = parse(src, "exact")?;
                        let bound = prob.params().clone();
                        Ok(prob.with_exact(ExactSolution::new("custom", formula, bound)))
                    }
                    None => Ok(prob),
                }
            }
        }
    }

    /// Copy with one parameter replaced. `eps` addresses the diffusion
    /// coefficient in both variants.
    pub fn with_param(&self, name: &str, value: f64) -> Result<ProblemSpec, ProblemError> {
        let mut out = self.clone();
        match &mut out {
            ProblemSpec::Registry { name: example, params } => {
                if !registry_defaults(example)?.contains_key(name) {
                    return Err(ProblemError::UnknownParameter {
                        example: example.clone(),
                        name: name.to_string(),
                    });
                }
                params.insert(name.to_string(), value);
            }
            ProblemSpec::Custom { eps, params, .. } => {
                if name == "eps" {
                    *eps = value;
                } else if params.contains_key(name) {
                    params.insert(name.to_string(), value);
                } else {
                    return Err(ProblemError::UnknownParameter {
                        example: "custom".into(),
                        name: name.to_string(),
                    });
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(pairs: &[(&str, f64)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn gamma_for_linear_drift() {
        let prob = registry_get("example51", &b(&[("k", 7.0), ("lambda", 7.0)])).unwrap();
        let v = prob.validate().unwrap();
        assert_eq!(v.gamma, 10.5);
        assert_eq!(v.lambda, 7.0);
        assert!(v.energy && v.weighted && v.plain);
    }

    #[test]
    fn constant_drift_without_reaction() {
        let prob = Problem::from_text((0.0, 1.0), 1.0, "2", "0", "1", 0.0, 0.0, &[]).unwrap();
        let v = prob.validate().unwrap();
        assert_eq!(v.lambda, 0.0);
        assert_eq!(v.gamma, 0.0);
        assert!(v.energy && !v.weighted && !v.plain);
    }

    #[test]
    fn linear_drift_without_reaction() {
        let prob = Problem::from_text((0.0, 1.0), 1.0, "-k*x", "0", "1", 0.0, 0.0, &[("k", 2.0)]).unwrap();
        let v = prob.validate().unwrap();
        // -b'/2 + c = k/2 everywhere
        assert_eq!(v.gamma, 1.0);
        assert!(v.plain && !v.weighted);
    }

    #[test]
    fn negative_reaction_is_flagged() {
        let prob = Problem::from_text((0.0, 1.0), 1.0, "0", "x - 0.5", "1", 0.0, 0.0, &[]).unwrap();
        let v = prob.validate().unwrap();
        assert!(!v.c_nonnegative);
        assert!(v.admissible().is_empty());
        assert!((v.c_min + 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_finite_coefficient_is_an_error() {
        let prob = Problem::from_text((0.0, 1.0), 1.0, "exp(1000*x)", "0", "1", 0.0, 0.0, &[]).unwrap();
        assert!(matches!(prob.validate(), Err(ProblemError::NonFinite { .. })));
        let prob = Problem::from_text((0.0, 1.0), 1.0, "1/x", "0", "1", 0.0, 0.0, &[]).unwrap();
        assert!(matches!(prob.validate(), Err(ProblemError::Expr { .. })));
    }

    #[test]
    fn invalid_construction() {
        assert_eq!(
            Problem::from_text((1.0, 0.0), 1.0, "0", "0", "0", 0.0, 0.0, &[]).unwrap_err(),
            ProblemError::Interval(1.0, 0.0)
        );
        assert_eq!(
            Problem::from_text((0.0, 1.0), 0.0, "0", "0", "0", 0.0, 0.0, &[]).unwrap_err(),
            ProblemError::Epsilon(0.0)
        );
        assert!(matches!(
            registry_get("example51", &b(&[("eps", -1.0)])),
            Err(ProblemError::Epsilon(_))
        ));
        assert!(matches!(registry_get("nope", &Bindings::new()), Err(ProblemError::UnknownExample(_))));
        assert!(matches!(
            registry_get("example41", &b(&[("k", 1.0)])),
            Err(ProblemError::UnknownParameter { .. })
        ));
    }

    #[test]
    fn boundary_layer_example_closed_form() {
        let prob = registry_get("example41", &b(&[("eps", 1.0), ("lambda", 0.0)])).unwrap();
        let y = prob.exact().unwrap();
        let e = std::f64::consts::E;
        // at lambda = 0 the solution is (e^{2x} - 1)/(e^2 - 1)
        assert!((y.eval(0.5).unwrap() - 1.0 / (e + 1.0)).abs() < 1e-15);
        assert!((y.eval(0.5).unwrap() - 0.2689414).abs() < 1e-7);
        for x in [0.1_f64, 0.3, 0.9] {
            let oracle = ((2.0_f64 * x).exp() - 1.0) / (e * e - 1.0);
            assert!((y.eval(x).unwrap() - oracle).abs() < 1e-15);
        }
    }

    #[test]
    fn registry_boundary_values() {
        let p51 = registry_get("example51", &b(&[("k", 3.0), ("lambda", 11.0)])).unwrap();
        assert_eq!(p51.exact().unwrap().eval(1.0).unwrap(), 1.0);
        assert_eq!(p51.boundary_values(), (0.0, 1.0));
        let p52 = registry_get("example52", &Bindings::new()).unwrap();
        assert_eq!(p52.exact().unwrap().eval(0.0).unwrap(), 1.0);
        assert!((p52.exact().unwrap().eval(1.0).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(p52.boundary_values(), (1.0, -1.0));
    }

    #[test]
    fn every_registry_entry_is_valid_and_solves_its_equation() {
        for name in EXAMPLES {
            for eps in [1.0, 0.5, 0.1, 0.01] {
                let prob = registry_get(name, &b(&[("eps", eps)])).unwrap();
                let v = prob.validate().unwrap();
                assert!(v.energy, "{name}");
                let (res, f_sup) = prob.exact_residual_sup(1001).unwrap().unwrap();
                assert!(res <= 1e-8 * (1.0 + f_sup), "{name} eps={eps}: residual {res}");
                let y = prob.exact().unwrap();
                let (p, q) = prob.boundary_values();
                assert!((y.eval(0.0).unwrap() - p).abs() < 1e-12, "{name}");
                assert!((y.eval(1.0).unwrap() - q).abs() < 1e-12, "{name}");
            }
        }
    }

    #[test]
    fn symbolic_drift_derivative_matches_finite_differences() {
        for name in EXAMPLES {
            let prob = registry_get(name, &Bindings::new()).unwrap();
            for x in uniform_grid(0.0, 1.0, 1000) {
                let h = 1e-5;
                let fd = (prob.b(x + h).unwrap() - prob.b(x - h).unwrap()) / (2.0 * h);
                let sym = prob.db(x).unwrap();
                assert!((sym - fd).abs() <= 1e-6 * sym.abs().max(1.0), "{name} at {x}");
            }
        }
    }

    #[test]
    fn gamma_is_half_k_plus_lambda_across_parameters() {
        for (k, lambda) in [(0.0, 1.0), (7.0, 1.0), (10.0, 15.0), (3.3, 0.7)] {
            let prob = registry_get("example51", &b(&[("k", k), ("lambda", lambda)])).unwrap();
            let g = prob.validate().unwrap().gamma;
            assert!((g - (0.5 * k + lambda)).abs() <= 1e-12, "{k} {lambda}: {g}");
        }
    }

    #[test]
    fn spec_with_param_updates_values() {
        let spec = ProblemSpec::registry("example51", Bindings::new());
        let prob = spec.with_param("lambda", 30.0).unwrap().build().unwrap();
        assert_eq!(prob.params()["lambda"], 30.0);
        let prob = spec.with_param("eps", 0.1).unwrap().build().unwrap();
        assert_eq!(prob.eps(), 0.1);
        assert!(spec.with_param("mu", 1.0).is_err());

        let custom = ProblemSpec::Custom {
            x1: 0.0,
            x2: 2.0,
            eps: 1.0,
            b: "a".into(),
            c: "1".into(),
            f: "eps*x".into(),
            p: 0.0,
            q: 0.0,
            params: b(&[("a", 1.0)]),
            exact: None,
        };
        let prob = custom.with_param("eps", 0.5).unwrap().build().unwrap();
        assert_eq!(prob.f(2.0).unwrap(), 1.0);
        assert_eq!(custom.with_param("a", 4.0).unwrap().build().unwrap().b(0.0).unwrap(), 4.0);
        assert!(custom.with_param("k", 4.0).is_err());
    }
}
