//! Finite-difference Dirichlet solver for F(D²u) = ψ with admissibility
//! tracking.
//!
//! Domains are disks or boxes embedded in a uniform lattice. Interior nodes
//! are the unknowns; where a stencil arm leaves the domain, the boundary
//! value is imposed at the crossing point along that arm and the second
//! difference uses the shortened arm (first-order boundary treatment,
//! second-order interior, exact on quadratics). The nonlinear system is
//! solved by damped Newton: every accepted iterate keeps the discrete
//! Hessian spectrum inside the operator's admissibility cone at every node.

mod experiments;
mod grid;
mod io;
mod newton;

pub use experiments::{
    manufactured_residual, richardson_slope, rigidity_experiment, ExactSolution,
    ManufacturedReport, Perturbation, RigidityReport, RigidityRow,
};
pub use grid::{discrete_hessian_field, Grid};
pub use io::{read_solution_binary, write_solution_binary, write_solution_csv, LatticeDump};
pub use newton::{newton_solve, pogorelov_functional, solve_fields};

use serde::{Deserialize, Serialize};

use crate::cone::Condition;
use crate::linalg::LinalgError;
use crate::operator::{OperatorError, OperatorSpec};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("stencil leaves the domain at node {0}")]
    StencilOutOfDomain(usize),
    #[error("no admissible starting paraboloid reaches the forcing maximum {0}")]
    NoAdmissibleStart(f64),
    #[error("line search stalled after {halvings} halvings (residual {residual:.3e})")]
    StalledLineSearch { halvings: usize, residual: f64 },
    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("exact solution is inadmissible at node {0}")]
    InadmissibleExact(usize),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Eigen(#[from] LinalgError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Computational domain in dimension 2 or 3.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    Disk { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Disk { center, .. } => center.len(),
            Domain::Box { lo, .. } => lo.len(),
        }
    }

    /// Signed distance to the boundary along the most constraining
    /// direction: positive inside.
    pub fn interior_margin(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Disk { center, radius } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                radius - r2.sqrt()
            }
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(a, (l, u))| (a - l).min(u - a))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Smallest t > 0 with x + t·v on the boundary, for x strictly inside.
    pub fn crossing(&self, x: &[f64], v: &[f64]) -> Option<f64> {
        match self {
            Domain::Disk { center, radius } => {
                let a: f64 = v.iter().map(|c| c * c).sum();
                let b: f64 =
                    2.0 * x.iter().zip(v).zip(center).map(|((xi, vi), ci)| (xi - ci) * vi).sum::<f64>();
                let c: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(xi, ci)| (xi - ci) * (xi - ci))
                    .sum::<f64>()
                    - radius * radius;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 || a == 0.0 {
                    return None;
                }
                let t = (-b + disc.sqrt()) / (2.0 * a);
                if t > 0.0 {
                    Some(t)
                } else {
                    None
                }
            }
            Domain::Box { lo, hi } => {
                let mut best = f64::INFINITY;
                for a in 0..x.len() {
                    if v[a] > 0.0 {
                        best = best.min((hi[a] - x[a]) / v[a]);
                    } else if v[a] < 0.0 {
                        best = best.min((lo[a] - x[a]) / v[a]);
                    }
                }
                if best.is_finite() && best > 0.0 {
                    Some(best)
                } else {
                    None
                }
            }
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        let dim = self.dim();
        if !(2..=3).contains(&dim) {
            return Err(SolverError::InvalidProblem(format!(
                "dimension {dim} not supported (must be 2 or 3)"
            )));
        }
        match self {
            Domain::Disk { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(SolverError::InvalidProblem(format!(
                        "disk radius {radius} must be positive"
                    )));
                }
            }
            Domain::Box { lo, hi } => {
                if lo.len() != hi.len() {
                    return Err(SolverError::InvalidProblem(
                        "box corners have different dimensions".to_string(),
                    ));
                }
                for (l, u) in lo.iter().zip(hi) {
                    if !(u > l) {
                        return Err(SolverError::InvalidProblem(format!(
                            "box side [{l}, {u}] is empty"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Scalar data (forcing or boundary values) with a closed form at arbitrary
/// points, so crossings can be evaluated exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarField {
    Zero,
    Constant { value: f64 },
    /// Σ coef · Π_a x_a^{powers[a]}.
    Table { monomials: Vec<Monomial> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

impl ScalarField {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ScalarField::Zero => 0.0,
            ScalarField::Constant { value } => *value,
            ScalarField::Table { monomials } => monomials
                .iter()
                .map(|m| {
                    m.coef
                        * m.powers
                            .iter()
                            .zip(x)
                            .map(|(&p, &xi)| xi.powi(p as i32))
                            .product::<f64>()
                })
                .sum(),
        }
    }
}

fn condition_from_int(v: u8) -> Result<Condition, SolverError> {
    match v {
        1 => Ok(Condition::One),
        2 => Ok(Condition::Two),
        other => Err(SolverError::InvalidProblem(format!(
            "condition must be 1 or 2, got {other}"
        ))),
    }
}

fn condition_to_int(c: Condition) -> u8 {
    match c {
        Condition::One => 1,
        Condition::Two => 2,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DirichletProblemWire {
    operator: OperatorSpec,
    domain: Domain,
    h: f64,
    psi: ScalarField,
    boundary: ScalarField,
    condition: u8,
}

/// The Dirichlet problem F(D²u) = ψ in Ω, u = g on ∂Ω, with the
/// admissibility condition Newton iterates must maintain.
#[derive(Debug, Clone, Serialize)]
pub struct DirichletProblem {
    pub operator: OperatorSpec,
    pub domain: Domain,
    pub h: f64,
    pub psi: ScalarField,
    pub boundary: ScalarField,
    #[serde(serialize_with = "ser_condition")]
    pub condition: Condition,
}

fn ser_condition<S: serde::Serializer>(c: &Condition, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(condition_to_int(*c))
}

impl<'de> Deserialize<'de> for DirichletProblem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = DirichletProblemWire::deserialize(d)?;
        let condition = condition_from_int(w.condition).map_err(serde::de::Error::custom)?;
        Ok(DirichletProblem {
            operator: w.operator,
            domain: w.domain,
            h: w.h,
            psi: w.psi,
            boundary: w.boundary,
            condition,
        })
    }
}

impl DirichletProblem {
    pub fn validate(&self) -> Result<(), SolverError> {
        self.domain.validate()?;
        if !(self.h > 0.0) {
            return Err(SolverError::InvalidProblem(format!(
                "grid spacing {} must be positive",
                self.h
            )));
        }
        if self.operator.n() != self.domain.dim() {
            return Err(SolverError::InvalidProblem(format!(
                "operator dimension {} does not match domain dimension {}",
                self.operator.n(),
                self.domain.dim()
            )));
        }
        match self.condition {
            Condition::One => {
                if self.operator.roots().iter().any(|&y| y < 0.0) {
                    return Err(SolverError::InvalidProblem(
                        "condition 1 requires nonnegative appended roots".to_string(),
                    ));
                }
            }
            Condition::Two => {
                if self.operator.coefficients().iter().any(|&a| a < 0.0) {
                    return Err(SolverError::InvalidProblem(
                        "condition 2 requires nonnegative coefficients".to_string(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Knobs for the damped Newton iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub tol_res: f64,
    pub max_halvings: usize,
    /// Exponents for the reported (−u)^α Δ_h u map.
    pub alphas: Vec<f64>,
    /// Per-degree normalized cone margin every iterate must keep.
    pub eps_cone: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 30,
            tol_res: 1e-10,
            max_halvings: 30,
            alphas: vec![0.5, 1.0, 2.0, 4.0],
            eps_cone: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PogorelovEntry {
    pub alpha: f64,
    pub max_value: f64,
    /// Flat lattice index of the maximizing node.
    pub node: usize,
    pub location: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub residual_inf: f64,
    pub newton_iters: usize,
    pub admissible_everywhere: bool,
    /// Worst per-degree normalized σ_j margin over nodes at the final
    /// iterate.
    pub min_cone_margin: f64,
    pub pogorelov: Vec<PogorelovEntry>,
}

/// A converged (or final) discrete solution together with its grid and the
/// per-node spectral data of the final iterate.
#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: Grid,
    /// One value per interior unknown, in lattice order.
    pub u: Vec<f64>,
    /// Discrete Hessian eigenvalues (descending) per unknown.
    pub lambda: Vec<Vec<f64>>,
    /// Normalized cone margin per unknown.
    pub cone_margin: Vec<f64>,
    /// Discrete Laplacian Δ_h u per unknown.
    pub laplacian: Vec<f64>,
    pub operator: OperatorSpec,
    pub condition: Condition,
    pub report: SolveReport,
}
