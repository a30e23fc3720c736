//! Reference solutions: closed forms where available, otherwise a
//! finite-difference solve on a uniform mesh.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::expr::ExprError;
use crate::problem::{ExactSolution, Problem};

/// Largest mesh the automatic refinement will use.
pub const MAX_MESH: usize = 1 << 20;
/// Smallest accepted mesh.
pub const MIN_MESH: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("mesh must have at least {MIN_MESH} cells, got {0}")]
    Mesh(usize),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{what} is not finite at x = {x}")]
    NonFinite { what: &'static str, x: f64 },
    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),
    #[error("x = {x} lies outside [{x1}, {x2}]")]
    OutOfInterval { x: f64, x1: f64, x2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Central,
    Upwind,
}

#[derive(Debug, Clone, Serialize)]
pub struct FdSolution {
    x1: f64,
    x2: f64,
    h: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    scheme: Scheme,
    peclet: f64,
    residual: f64,
}

struct System {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    rhs: Vec<f64>,
}

fn mesh(x1: f64, x2: f64, m: usize) -> Vec<f64> {
    let h = (x2 - x1) / m as f64;
    let mut nodes: Vec<f64> = (0..=m).map(|i| x1 + i as f64 * h).collect();
    nodes[m] = x2;
    nodes
}

fn max_abs_b(prob: &Problem, nodes: &[f64]) -> Result<f64, OracleError> {
    let mut max = 0.0f64;
    for &x in nodes {
        let b = prob.b(x)?;
        if !b.is_finite() {
            return Err(OracleError::NonFinite { what: "b", x });
        }
        max = max.max(b.abs());
    }
    Ok(max)
}

/// Mesh Péclet number `max |b| h / (2 eps)` on `m` cells.
pub fn peclet(prob: &Problem, m: usize) -> Result<f64, OracleError> {
    let (x1, x2) = prob.interval();
    let h = (x2 - x1) / m as f64;
    Ok(max_abs_b(prob, &mesh(x1, x2, m))? * h / (2.0 * prob.eps()))
}

fn assemble(prob: &Problem, nodes: &[f64], h: f64, scheme: Scheme) -> Result<System, OracleError> {
    let m = nodes.len() - 1;
    let eps = prob.eps();
    let (p, q) = prob.boundary_values();
    let n = m - 1;
    let mut sys = System {
        lower: vec![0.0; n],
        diag: vec![0.0; n],
        upper: vec![0.0; n],
        rhs: vec![0.0; n],
    };
    let d = eps / (h * h);
    for k in 0..n {
        let x = nodes[k + 1];
        let (b, c, f) = (prob.b(x)?, prob.c(x)?, prob.f(x)?);
        for (what, v) in [("b", b), ("c", c), ("f", f)] {
            if !v.is_finite() {
                return Err(OracleError::NonFinite { what, x });
            }
        }
        let (lo, di, up) = match scheme {
            Scheme::Central => (-d - b / (2.0 * h), 2.0 * d + c, -d + b / (2.0 * h)),
            Scheme::Upwind if b >= 0.0 => (-d - b / h, 2.0 * d + b / h + c, -d),
            Scheme::Upwind => (-d, 2.0 * d - b / h + c, -d + b / h),
        };
        sys.lower[k] = lo;
        sys.diag[k] = di;
        sys.upper[k] = up;
        sys.rhs[k] = f;
    }
    sys.rhs[0] -= sys.lower[0] * p;
    sys.rhs[n - 1] -= sys.upper[n - 1] * q;
    Ok(sys)
}

/// Thomas algorithm.
fn solve_tridiagonal(sys: &System) -> Result<Vec<f64>, OracleError> {
    let n = sys.diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = sys.diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return Err(OracleError::Singular(0));
    }
    c[0] = sys.upper[0] / denom;
    d[0] = sys.rhs[0] / denom;
    for i in 1..n {
        denom = sys.diag[i] - sys.lower[i] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return Err(OracleError::Singular(i));
        }
        c[i] = sys.upper[i] / denom;
        d[i] = (sys.rhs[i] - sys.lower[i] * d[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Solve on exactly `m` cells with the given scheme.
pub fn fd_solve_with(prob: &Problem, m: usize, scheme: Scheme) -> Result<FdSolution, OracleError> {
    if m < MIN_MESH {
        return Err(OracleError::Mesh(m));
    }
    let (x1, x2) = prob.interval();
    let (p, q) = prob.boundary_values();
    let h = (x2 - x1) / m as f64;
    let nodes = mesh(x1, x2, m);
    let peclet = max_abs_b(prob, &nodes)? * h / (2.0 * prob.eps());
    let sys = assemble(prob, &nodes, h, scheme)?;
    let interior = solve_tridiagonal(&sys)?;
    let mut values = Vec::with_capacity(m + 1);
    values.push(p);
    values.extend_from_slice(&interior);
    values.push(q);

    // scaled residual max_k |A y - rhs|_k / (|row|·|y| + |rhs|)_k
    let mut residual = 0.0f64;
    let n = interior.len();
    for k in 0..n {
        let left = if k > 0 { sys.lower[k] * interior[k - 1] } else { 0.0 };
        let right = if k + 1 < n { sys.upper[k] * interior[k + 1] } else { 0.0 };
        let r = left + sys.diag[k] * interior[k] + right - sys.rhs[k];
        let scale = left.abs() + (sys.diag[k] * interior[k]).abs() + right.abs() + sys.rhs[k].abs();
        if scale > 0.0 {
            residual = residual.max(r.abs() / scale);
        }
    }
    Ok(FdSolution { x1, x2, h, nodes, values, scheme, peclet, residual })
}

/// Solve starting from `m` cells, doubling until the central scheme is
/// stable (Péclet < 1). Falls back to upwinding at [`MAX_MESH`].
pub fn fd_solve(prob: &Problem, m: usize) -> Result<FdSolution, OracleError> {
    if m < MIN_MESH {
        return Err(OracleError::Mesh(m));
    }
    let mut m = m;
    while peclet(prob, m)? >= 1.0 && m < MAX_MESH {
        m = (2 * m).min(MAX_MESH);
    }
    if peclet(prob, m)? >= 1.0 {
        log::warn!("mesh Péclet number stays above 1 at {m} cells; using first-order upwinding");
        return fd_solve_with(prob, m, Scheme::Upwind);
    }
    fd_solve_with(prob, m, Scheme::Central)
}

impl FdSolution {
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn peclet(&self) -> f64 {
        self.peclet
    }

    /// Largest scaled residual of the linear solve.
    pub fn discrete_residual(&self) -> f64 {
        self.residual
    }

    /// Nodal value at nodes, 4-point Lagrange interpolation between them.
    pub fn eval(&self, x: f64) -> Result<f64, OracleError> {
        if !(x >= self.x1 && x <= self.x2) {
            return Err(OracleError::OutOfInterval { x, x1: self.x1, x2: self.x2 });
        }
        let m = self.cells();
        let s = (x - self.x1) / self.h;
        let i = (s.floor() as usize).min(m);
        if self.nodes[i] == x {
            return Ok(self.values[i]);
        }
        if i < m && self.nodes[i + 1] == x {
            return Ok(self.values[i + 1]);
        }
        let start = i.saturating_sub(1).min(m - 3);
        let xs = &self.nodes[start..start + 4];
        let ys = &self.values[start..start + 4];
        let mut sum = 0.0;
        for j in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != j {
                    w *= (x - xs[k]) / (xs[j] - xs[k]);
                }
            }
            sum += w * ys[j];
        }
        Ok(sum)
    }

    /// `x,y` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in self.nodes.iter().zip(&self.values) {
            writeln!(out, "{x},{y}").unwrap();
        }
        out
    }

    /// Largest difference to a solution on a mesh refined by an integer
    /// factor, at the shared nodes.
    pub fn max_gap_to_refined(&self, fine: &FdSolution) -> f64 {
        let ratio = fine.cells() / self.cells();
        self.values
            .iter()
            .enumerate()
            .map(|(i, y)| (y - fine.values[i * ratio]).abs())
            .fold(0.0, f64::max)
    }
}

/// Either the closed form or a finite-difference solution with an
/// estimate of its maximum error.
#[derive(Debug, Clone)]
pub enum Reference {
    Exact(ExactSolution),
    Fd { solution: FdSolution, error_estimate: f64 },
}

impl Reference {
    pub fn eval(&self, x: f64) -> Result<f64, OracleError> {
        match self {
            Reference::Exact(e) => Ok(e.eval(x)?),
            Reference::Fd { solution, .. } => solution.eval(x),
        }
    }

    /// Upper estimate of `max |reference - y|`; zero for closed forms.
    pub fn error_estimate(&self) -> f64 {
        match self {
            Reference::Exact(_) => 0.0,
            Reference::Fd { error_estimate, .. } => *error_estimate,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Reference::Exact(e) => format!("exact:{}", e.tag()),
            Reference::Fd { solution, .. } => {
                format!("fd:{}:{}", solution.cells(), match solution.scheme() {
                    Scheme::Central => "central",
                    Scheme::Upwind => "upwind",
                })
            }
        }
    }

    /// Finite-difference reference on `m` cells (after stability
    /// doubling), with a Richardson error estimate from the `m/2` solve.
    pub fn fd(prob: &Problem, m: usize) -> Result<Self, OracleError> {
        let fine = fd_solve(prob, m.max(2 * MIN_MESH))?;
        let coarse = fd_solve_with(prob, fine.cells() / 2, fine.scheme())?;
        let gap = coarse.max_gap_to_refined(&fine);
        // order 2 leaves a third of the gap on the fine mesh; order 1 all of it
        let error_estimate = match fine.scheme() {
            Scheme::Central => gap / 3.0,
            Scheme::Upwind => gap,
        };
        Ok(Reference::Fd { solution: fine, error_estimate })
    }

    /// The closed form when the problem has one, else [`Reference::fd`].
    pub fn for_problem(prob: &Problem, m: usize) -> Result<Self, OracleError> {
        match prob.exact() {
            Some(e) => Ok(Reference::Exact(e.clone())),
            None => Self::fd(prob, m),
        }
    }
}
