//! Manufactured-solution residuals, Richardson convergence rates, and the
//! entire-solution rigidity experiment (growing disks with a perturbed
//! quadratic boundary).

use serde::{Deserialize, Serialize};

use super::grid::{build_stencils, hessian_at, Grid};
use super::newton::{paraboloid_coefficient, solve_fields};
use super::{Condition, Domain, OperatorSpec, SolveOptions, SolverError};
use crate::cone::in_lifted_cone;
use crate::linalg::{solve_dense, symmetric_eigen, Matrix};

/// Closed-form fields with exact Hessians, used to manufacture forcings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExactSolution {
    /// ½ Σ_a diag[a] x_a².
    Quadratic { diag: Vec<f64> },
    /// q(|x|²−1)/2 + s(|x|⁴−1)/4, radially symmetric with Hessian
    /// (q + s|x|²)I + 2s·xxᵀ.
    Radial { quadratic: f64, quartic: f64 },
}

impl ExactSolution {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match self {
            ExactSolution::Quadratic { diag } => {
                0.5 * diag.iter().zip(x).map(|(c, v)| c * v * v).sum::<f64>()
            }
            ExactSolution::Radial { quadratic, quartic } => {
                0.5 * quadratic * (r2 - 1.0) + 0.25 * quartic * (r2 * r2 - 1.0)
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let dim = x.len();
        match self {
            ExactSolution::Quadratic { diag } => Matrix::from_diagonal(diag),
            ExactSolution::Radial { quadratic, quartic } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let mut m = Matrix::zeros(dim, dim);
                for a in 0..dim {
                    for b in 0..dim {
                        let mut v = 2.0 * quartic * x[a] * x[b];
                        if a == b {
                            v += quadratic + quartic * r2;
                        }
                        m.set(a, b, v);
                    }
                }
                m
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManufacturedReport {
    pub h: f64,
    pub nodes: usize,
    /// Interior nodes whose every stencil arm is a full lattice step.
    pub core_nodes: usize,
    /// Max over all interior nodes of |F(D²_h u_exact) − F(D²u_exact)|.
    /// Shortened boundary arms are first-order, so this decays like h near
    /// curved boundaries.
    pub residual_inf: f64,
    /// Max over full-arm nodes only: clean second-order truncation.
    pub residual_core_inf: f64,
    pub psi_min: f64,
    pub psi_max: f64,
}

/// Truncation error of the discrete operator on a known field: imposes the
/// exact trace as boundary data, evaluates the discrete Hessian of the exact
/// nodal values, and compares F of its spectrum against the exact forcing.
/// No solve happens. Errors if the exact Hessian leaves the admissibility
/// cone anywhere.
pub fn manufactured_residual(
    op: &OperatorSpec,
    exact: &ExactSolution,
    domain: Domain,
    h: f64,
) -> Result<ManufacturedReport, SolverError> {
    domain.validate()?;
    if op.n() != domain.dim() {
        return Err(SolverError::InvalidProblem(format!(
            "operator dimension {} does not match domain dimension {}",
            op.n(),
            domain.dim()
        )));
    }
    let grid = Grid::build(domain, h)?;
    let g = |x: &[f64]| exact.eval(x);
    let stencils = build_stencils(&grid, &g)?;
    let u: Vec<f64> = grid.node_of_unknown.iter().map(|&f| exact.eval(&grid.coords(f))).collect();

    let mut residual_inf = 0.0_f64;
    let mut residual_core_inf = 0.0_f64;
    let mut core_nodes = 0usize;
    let mut psi_min = f64::INFINITY;
    let mut psi_max = f64::NEG_INFINITY;
    for (i, st) in stencils.nodes.iter().enumerate() {
        let x = grid.coords(grid.node_of_unknown[i]);
        let exact_eig = symmetric_eigen(&exact.hessian(&x))?;
        if !in_lifted_cone(&exact_eig.values, op.roots(), op.k()).member {
            return Err(SolverError::InadmissibleExact(grid.node_of_unknown[i]));
        }
        let psi = op.value(&exact_eig.values);
        psi_min = psi_min.min(psi);
        psi_max = psi_max.max(psi);
        let hd = hessian_at(st, u[i], &u, grid.h, grid.dim);
        let eig = symmetric_eigen(&hd)?;
        let r = (op.value(&eig.values) - psi).abs();
        residual_inf = residual_inf.max(r);
        let full = |d: &super::grid::DirStencil| {
            (d.plus.t - 1.0).abs() < 1e-12 && (d.minus.t - 1.0).abs() < 1e-12
        };
        let core = st.axes.iter().all(full)
            && st.diags.iter().all(|dg| full(&dg.sum) && full(&dg.diff));
        if core {
            core_nodes += 1;
            residual_core_inf = residual_core_inf.max(r);
        }
    }
    Ok(ManufacturedReport {
        h,
        nodes: u.len(),
        core_nodes,
        residual_inf,
        residual_core_inf,
        psi_min,
        psi_max,
    })
}

/// Least-squares slope of log(residual) against log(h). Slope ≈ 2 means
/// second-order convergence.
pub fn richardson_slope(hs: &[f64], residuals: &[f64]) -> f64 {
    assert_eq!(hs.len(), residuals.len());
    assert!(hs.len() >= 2, "need at least two resolutions");
    let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Boundary perturbation for the rigidity experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Perturbation {
    None,
    /// amplitude · sin(harmonic · θ) added to the quadratic boundary data.
    Sin { amplitude: f64, harmonic: u32 },
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityRow {
    pub radius: f64,
    pub h: f64,
    pub unknowns: usize,
    pub newton_iters: usize,
    pub residual_inf: f64,
    /// Interior nodes inside the unit disk used for the quadratic fit.
    pub fit_nodes: usize,
    /// Max |u − best quadratic| over the fit nodes.
    pub deviation_max: f64,
    pub deviation_rms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    /// Root of F(c·I) = 1: the curvature of the global quadratic the
    /// boundary data mimics.
    pub c_star: f64,
    pub rows: Vec<RigidityRow>,
}

/// Solves F(D²u) = 1 on disks of growing radius R with boundary data
/// c*|x|²/2 plus an optional angular perturbation, then measures how far the
/// solution is from an exact quadratic on the fixed unit disk. If solutions
/// on large domains are forced toward quadratics, the deviation must decay
/// as R grows.
pub fn rigidity_experiment(
    op: &OperatorSpec,
    condition: Condition,
    radii: &[f64],
    perturbation: &Perturbation,
    nodes_per_radius: usize,
    opts: &SolveOptions,
) -> Result<RigidityReport, SolverError> {
    if op.n() != 2 {
        return Err(SolverError::InvalidProblem(
            "rigidity experiment is formulated on planar disks".to_string(),
        ));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r >= 1.0)) {
        return Err(SolverError::InvalidProblem(
            "radii must be at least 1 so the unit-disk fit window exists".to_string(),
        ));
    }
    if nodes_per_radius < 8 {
        return Err(SolverError::InvalidProblem(
            "need at least 8 nodes per radius".to_string(),
        ));
    }
    let c_star = paraboloid_coefficient(op, 1.0)?;
    let (amp, harmonic) = match perturbation {
        Perturbation::None => (0.0, 0),
        Perturbation::Sin { amplitude, harmonic } => (*amplitude, *harmonic),
    };
    let mut rows = Vec::new();
    for &radius in radii {
        let h = radius / nodes_per_radius as f64;
        let domain = Domain::Disk { center: vec![0.0, 0.0], radius };
        // On |x| = R the harmonic polynomial Im((x₀+ix₁)^m)/R^m equals
        // sin(mθ), so this closed form is both the boundary data and its
        // smooth interior extension (sin(mθ) alone is singular at the
        // origin and would wreck the initial iterate's Hessian there).
        let g = move |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            0.5 * c_star * r2 + amp * harmonic_sine(x, harmonic) / radius.powi(harmonic as i32)
        };
        let sol = solve_fields(op, condition, domain, h, &|_| 1.0, &g, Some(&g), opts)?;
        let (fit_nodes, deviation_max, deviation_rms) = quadratic_fit_deviation(&sol)?;
        rows.push(RigidityRow {
            radius,
            h,
            unknowns: sol.u.len(),
            newton_iters: sol.report.newton_iters,
            residual_inf: sol.report.residual_inf,
            fit_nodes,
            deviation_max,
            deviation_rms,
        });
    }
    Ok(RigidityReport { c_star, rows })
}

/// Im((x₀ + i·x₁)^m) = r^m sin(mθ), the degree-m harmonic polynomial.
fn harmonic_sine(x: &[f64], m: u32) -> f64 {
    let (mut re, mut im) = (1.0_f64, 0.0_f64);
    for _ in 0..m {
        let nre = re * x[0] - im * x[1];
        im = re * x[1] + im * x[0];
        re = nre;
    }
    im
}

/// Best-quadratic deviation of a planar solution over nodes with |x| ≤ 1.
fn quadratic_fit_deviation(
    sol: &super::Solution,
) -> Result<(usize, f64, f64), SolverError> {
    let basis = |x: &[f64]| [1.0, x[0], x[1], x[0] * x[0], x[0] * x[1], x[1] * x[1]];
    let mut pts: Vec<([f64; 6], f64)> = Vec::new();
    for (i, &flat) in sol.grid.node_of_unknown.iter().enumerate() {
        let x = sol.grid.coords(flat);
        if x[0] * x[0] + x[1] * x[1] <= 1.0 + 1e-12 {
            pts.push((basis(&x), sol.u[i]));
        }
    }
    if pts.len() < 12 {
        return Err(SolverError::InvalidProblem(format!(
            "only {} nodes inside the unit-disk fit window; refine the grid",
            pts.len()
        )));
    }
    let mut gram = Matrix::zeros(6, 6);
    let mut rhs = vec![0.0_f64; 6];
    for (b, v) in &pts {
        for p in 0..6 {
            rhs[p] += b[p] * v;
            for q in 0..6 {
                gram.add_to(p, q, b[p] * b[q]);
            }
        }
    }
    let beta = solve_dense(&gram, &rhs).map_err(|e| SolverError::LinearSolveFailure(e.to_string()))?;
    let mut dev_max = 0.0_f64;
    let mut dev_sq = 0.0_f64;
    for (b, v) in &pts {
        let fit: f64 = b.iter().zip(&beta).map(|(bi, ci)| bi * ci).sum();
        let d = (v - fit).abs();
        dev_max = dev_max.max(d);
        dev_sq += d * d;
    }
    Ok((pts.len(), dev_max, (dev_sq / pts.len() as f64).sqrt()))
}
