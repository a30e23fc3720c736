//! Trial functions built from a network: `Φ = N` (PINN1) and the
//! boundary-exact `Ψ = χ N + ℓ` (PINN2).

use serde::Serialize;

use crate::expr::ExprError;
use crate::jet::Jet2;
use crate::net::Network;
use crate::problem::{ExactSolution, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TrialKind {
    #[serde(rename = "pinn1")]
    Pinn1,
    #[serde(rename = "pinn2")]
    Pinn2,
}

impl TrialKind {
    pub fn name(self) -> &'static str {
        match self {
            TrialKind::Pinn1 => "pinn1",
            TrialKind::Pinn2 => "pinn2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pinn1" | "1" => Some(TrialKind::Pinn1),
            "pinn2" | "2" => Some(TrialKind::Pinn2),
            _ => None,
        }
    }
}

/// Anything that can stand in for the solution: evaluable with two
/// x-derivatives.
pub trait Smooth {
    fn jet(&self, x: f64) -> Result<Jet2, ExprError>;

    /// Whether the Dirichlet data hold by construction.
    fn boundary_exact(&self) -> bool;

    fn value(&self, x: f64) -> Result<f64, ExprError> {
        Ok(self.jet(x)?.value)
    }
}

impl Smooth for ExactSolution {
    fn jet(&self, x: f64) -> Result<Jet2, ExprError> {
        ExactSolution::jet(self, x)
    }

    fn boundary_exact(&self) -> bool {
        true
    }

    fn value(&self, x: f64) -> Result<f64, ExprError> {
        self.eval(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFunction {
    kind: TrialKind,
    net: Network,
    x1: f64,
    x2: f64,
    p: f64,
    q: f64,
}

impl TrialFunction {
    pub fn new(kind: TrialKind, net: Network, prob: &Problem) -> Self {
        let (x1, x2) = prob.interval();
        let (p, q) = prob.boundary_values();
        Self { kind, net, x1, x2, p, q }
    }

    pub fn kind(&self) -> TrialKind {
        self.kind
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.x1, self.x2)
    }

    pub fn boundary_values(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Network {
        &mut self.net
    }

    pub fn into_net(self) -> Network {
        self.net
    }

    /// `χ(x) = -(x - x1)(x - x2)` as a jet.
    pub fn chi(&self, x: f64) -> Jet2 {
        let (a, b) = (x - self.x1, x - self.x2);
        Jet2::new(-(a * b), -(a + b), -2.0)
    }

    /// Affine interpolant of the boundary data, written so that
    /// `ℓ(x1) = p` and `ℓ(x2) = q` hold without rounding.
    pub fn ell(&self, x: f64) -> Jet2 {
        let len = self.x2 - self.x1;
        Jet2::new(
            self.p * ((self.x2 - x) / len) + self.q * ((x - self.x1) / len),
            (self.q - self.p) / len,
            0.0,
        )
    }

    /// Combine a network jet into the trial jet.
    pub fn compose(&self, x: f64, n: Jet2) -> Jet2 {
        match self.kind {
            TrialKind::Pinn1 => n,
            TrialKind::Pinn2 => self.chi(x) * n + self.ell(x),
        }
    }

    pub fn eval_jet(&self, x: f64) -> Jet2 {
        self.compose(x, self.net.forward_jet(x))
    }

    /// Value only; at the endpoints PINN2 returns the boundary data.
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            TrialKind::Pinn1 => self.net.forward(x),
            TrialKind::Pinn2 => {
                let (a, b) = (x - self.x1, x - self.x2);
                -(a * b) * self.net.forward(x) + self.ell(x).value
            }
        }
    }

    /// `(|p - t(x1)|², |q - t(x2)|²)`; identically zero for PINN2.
    pub fn boundary_mismatch(&self) -> (f64, f64) {
        let d1 = self.p - self.eval(self.x1);
        let d2 = self.q - self.eval(self.x2);
        (d1 * d1, d2 * d2)
    }
}

impl Smooth for TrialFunction {
    fn jet(&self, x: f64) -> Result<Jet2, ExprError> {
        Ok(self.eval_jet(x))
    }

    fn boundary_exact(&self) -> bool {
        self.kind == TrialKind::Pinn2
    }

    fn value(&self, x: f64) -> Result<f64, ExprError> {
        Ok(self.eval(x))
    }
}

/// `L[t](x) = -eps t'' + b t' + c t`.
pub fn apply_operator(prob: &Problem, t: &(impl Smooth + ?Sized), x: f64) -> Result<f64, ExprError> {
    prob.operator(x, t.jet(x)?)
}

/// Coefficients `(w, offset)` with `L[t](x) = w0 N + w1 N' + w2 N'' + offset`
/// for a trial of the given kind; the operator is affine in the network jet.
pub fn operator_weights(
    kind: TrialKind,
    eps: f64,
    b: f64,
    c: f64,
    chi: Jet2,
    ell: Jet2,
) -> ([f64; 3], f64) {
    match kind {
        TrialKind::Pinn1 => ([c, b, -eps], 0.0),
        TrialKind::Pinn2 => (
            [
                -eps * chi.second + b * chi.first + c * chi.value,
                -2.0 * eps * chi.first + b * chi.value,
                -eps * chi.value,
            ],
            b * ell.first + c * ell.value,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use crate::problem::registry_get;
    use crate::quad::uniform_grid;

    fn constant_net(v: f64) -> Network {
        let mut net = Network::zeros(1, 2).unwrap();
        let n = net.param_count();
        net.params_mut()[n - 1] = v;
        net
    }

    struct FixedJet(Jet2);

    impl Smooth for FixedJet {
        fn jet(&self, _: f64) -> Result<Jet2, ExprError> {
            Ok(self.0)
        }
        fn boundary_exact(&self) -> bool {
            false
        }
    }

    #[test]
    fn pinn2_bubble_jet() {
        let prob = Problem::from_text((0.0, 1.0), 1.0, "0", "0", "0", 0.0, 0.0, &[]).unwrap();
        let t = TrialFunction::new(TrialKind::Pinn2, constant_net(1.0), &prob);
        assert_eq!(t.eval_jet(0.5), Jet2::new(0.25, 0.0, -2.0));
    }

    #[test]
    fn pinn2_hits_boundary_values_for_any_network() {
        for name in ["example41", "example51", "example52"] {
            let prob = registry_get(name, &Bindings::new()).unwrap();
            let (p, q) = prob.boundary_values();
            for seed in 0..20 {
                let t = TrialFunction::new(TrialKind::Pinn2, Network::init(seed, 2, 8).unwrap(), &prob);
                assert_eq!(t.eval(0.0), p);
                assert_eq!(t.eval(1.0), q);
                assert_eq!(t.eval_jet(0.0).value, p);
                assert_eq!(t.eval_jet(1.0).value, q);
                assert_eq!(t.boundary_mismatch(), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn pinn2_boundary_exact_on_shifted_interval() {
        let prob = Problem::from_text((-1.3, 2.7), 0.3, "x", "1", "0", -0.7, 3.1, &[]).unwrap();
        let t = TrialFunction::new(TrialKind::Pinn2, Network::init(1, 2, 8).unwrap(), &prob);
        assert_eq!(t.eval(-1.3), -0.7);
        assert_eq!(t.eval(2.7), 3.1);
    }

    #[test]
    fn pinn1_is_the_network() {
        let prob = registry_get("example51", &Bindings::new()).unwrap();
        let net = Network::init(2, 2, 8).unwrap();
        let t = TrialFunction::new(TrialKind::Pinn1, net.clone(), &prob);
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(t.eval_jet(x), net.forward_jet(x));
        }
        let (a, b) = t.boundary_mismatch();
        assert_eq!(a, net.forward(0.0).powi(2));
        assert_eq!(b, (1.0 - net.forward(1.0)).powi(2));
    }

    #[test]
    fn operator_of_pure_diffusion() {
        let prob = Problem::from_text((0.0, 1.0), 1.0, "0", "0", "0", 0.0, 0.0, &[]).unwrap();
        assert_eq!(apply_operator(&prob, &FixedJet(Jet2::new(5.0, 3.0, 2.0)), 0.4).unwrap(), -2.0);
    }

    #[test]
    fn exact_solutions_have_zero_residual() {
        let prob = registry_get("example51", &Bindings::new()).unwrap();
        let exact = prob.exact().unwrap();
        for x in uniform_grid(0.0, 1.0, 101) {
            let r = apply_operator(&prob, exact, x).unwrap() - prob.f(x).unwrap();
            assert!(r.abs() < 1e-9, "{x}: {r}");
        }
    }

    #[test]
    fn example52_operator_at_origin() {
        for (eps, k, lambda) in [(1.0, 7.0, 7.0), (0.1, 10.0, 15.0)] {
            let params: Bindings = [("eps", eps), ("k", k), ("lambda", lambda)]
                .into_iter()
                .map(|(a, b)| (a.to_string(), b))
                .collect();
            let prob = registry_get("example52", &params).unwrap();
            let got = apply_operator(&prob, prob.exact().unwrap(), 0.0).unwrap();
            let want = eps * std::f64::consts::PI.powi(2) + lambda;
            assert!((got - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn operator_weights_reproduce_apply_operator() {
        let prob = registry_get("example52", &Bindings::new()).unwrap();
        for kind in [TrialKind::Pinn1, TrialKind::Pinn2] {
            let t = TrialFunction::new(kind, Network::init(8, 2, 8).unwrap(), &prob);
            for x in uniform_grid(0.0, 1.0, 17) {
                let (w, off) = operator_weights(
                    kind,
                    prob.eps(),
                    prob.b(x).unwrap(),
                    prob.c(x).unwrap(),
                    t.chi(x),
                    t.ell(x),
                );
                let n = t.net().forward_jet(x);
                let via_weights = w[0] * n.value + w[1] * n.first + w[2] * n.second + off;
                let direct = apply_operator(&prob, &t, x).unwrap();
                assert!((via_weights - direct).abs() <= 1e-12 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn residual_is_finite_on_dense_grid() {
        let prob = registry_get("example41", &Bindings::new()).unwrap();
        for kind in [TrialKind::Pinn1, TrialKind::Pinn2] {
            let t = TrialFunction::new(kind, Network::init(3, 2, 32).unwrap(), &prob);
            for x in uniform_grid(0.0, 1.0, 2001) {
                assert!((prob.f(x).unwrap() - apply_operator(&prob, &t, x).unwrap()).is_finite());
            }
        }
    }
}
