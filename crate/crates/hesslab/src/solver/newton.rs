//! Damped Newton iteration on the nodal system F(D²_h u) − ψ = 0.

use super::grid::{build_stencils, hessian_at, ArmRef, Grid, Stencils};
use super::{
    Condition, DirichletProblem, Domain, OperatorSpec, PogorelovEntry, Solution, SolveOptions,
    SolveReport, SolverError,
};
use crate::cone::{in_gamma_k, in_lifted_cone};
use crate::linalg::{symmetric_eigen, BandMatrix, Matrix};

/// Per-node linearization data at one iterate.
struct NodeEval {
    lam: Vec<f64>,
    vecs: Matrix,
    margin: f64,
    trace: f64,
}

struct IterateEval {
    nodes: Vec<NodeEval>,
    residual: Vec<f64>,
    rinf: f64,
    min_margin: f64,
    admissible: bool,
}

fn node_margin(op: &OperatorSpec, condition: Condition, lam: &[f64]) -> (bool, f64) {
    match condition {
        Condition::One => {
            let verdict = in_lifted_cone(lam, op.roots(), op.k());
            let max_abs = lam
                .iter()
                .chain(op.roots())
                .fold(0.0_f64, |m, v| m.max(v.abs()));
            (verdict.member, verdict.min_normalized_margin(max_abs))
        }
        Condition::Two => {
            let verdict = in_gamma_k(lam, op.k() - 1);
            let max_abs = lam.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            (verdict.member, verdict.min_normalized_margin(max_abs))
        }
    }
}

fn evaluate(
    op: &OperatorSpec,
    condition: Condition,
    grid: &Grid,
    stencils: &Stencils,
    u: &[f64],
    psi: &[f64],
    eps_cone: f64,
) -> Result<IterateEval, SolverError> {
    let dim = grid.dim;
    let mut nodes = Vec::with_capacity(u.len());
    let mut residual = Vec::with_capacity(u.len());
    let mut rinf = 0.0_f64;
    let mut min_margin = f64::INFINITY;
    let mut admissible = true;
    for (i, st) in stencils.nodes.iter().enumerate() {
        let hess = hessian_at(st, u[i], u, grid.h, dim);
        let eig = symmetric_eigen(&hess)?;
        let (member, margin) = node_margin(op, condition, &eig.values);
        let ok = member && margin >= eps_cone;
        admissible &= ok;
        min_margin = min_margin.min(margin);
        let r = op.value(&eig.values) - psi[i];
        rinf = rinf.max(r.abs());
        let trace = (0..dim).map(|a| hess.get(a, a)).sum();
        residual.push(r);
        nodes.push(NodeEval { lam: eig.values, vecs: eig.vectors, margin, trace });
    }
    Ok(IterateEval { nodes, residual, rinf, min_margin, admissible })
}

/// Adds one direction's second-difference derivative terms (scaled by
/// `coeff`) to row i of the band matrix.
fn add_direction(
    band: &mut BandMatrix,
    i: usize,
    ds: &super::grid::DirStencil,
    coeff: f64,
) {
    let (wp, wm, wc) = ds.weights();
    if let ArmRef::Unknown(j) = ds.plus.r {
        band.add_to(i, j, coeff * wp);
    }
    if let ArmRef::Unknown(j) = ds.minus.r {
        band.add_to(i, j, coeff * wm);
    }
    band.add_to(i, i, coeff * wc);
}

fn assemble_jacobian(
    op: &OperatorSpec,
    grid: &Grid,
    stencils: &Stencils,
    eval: &IterateEval,
) -> BandMatrix {
    let n_unknowns = stencils.nodes.len();
    let bw = stencils.bandwidth;
    let dim = grid.dim;
    let h2 = grid.h * grid.h;
    let mut band = BandMatrix::zeros(n_unknowns, bw, bw);
    for (i, st) in stencils.nodes.iter().enumerate() {
        let ne = &eval.nodes[i];
        let g = op.grad(&ne.lam);
        // Matrix gradient in lattice coordinates: G = V diag(g) Vᵀ.
        let mut gm = Matrix::zeros(dim, dim);
        for a in 0..dim {
            for b in 0..dim {
                let mut acc = 0.0;
                for r in 0..dim {
                    acc += ne.vecs.get(a, r) * g[r] * ne.vecs.get(b, r);
                }
                gm.set(a, b, acc);
            }
        }
        for (a, ds) in st.axes.iter().enumerate() {
            add_direction(&mut band, i, ds, gm.get(a, a) / h2);
        }
        for dg in &st.diags {
            let coeff = gm.get(dg.a, dg.b) / (2.0 * h2);
            add_direction(&mut band, i, &dg.sum, coeff);
            add_direction(&mut band, i, &dg.diff, -coeff);
        }
    }
    band
}

/// Solves F(t·I) = target for t > 0 by expanding bracket + bisection; the
/// map is increasing there because every operator coefficient involved is
/// nonnegative under either admissibility condition.
pub(crate) fn paraboloid_coefficient(op: &OperatorSpec, target: f64) -> Result<f64, SolverError> {
    let f = |t: f64| op.value(&vec![t; op.n()]);
    let mut hi = 1.0;
    let mut guard = 0;
    while f(hi) < target {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(SolverError::NoAdmissibleStart(target));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

pub(crate) fn enclosing_ball(domain: &Domain) -> (Vec<f64>, f64) {
    match domain {
        Domain::Disk { center, radius } => (center.clone(), *radius),
        Domain::Box { lo, hi } => {
            let center: Vec<f64> = lo.iter().zip(hi).map(|(l, u)| 0.5 * (l + u)).collect();
            let r2: f64 = lo.iter().zip(hi).map(|(l, u)| 0.25 * (u - l) * (u - l)).sum();
            (center, r2.sqrt())
        }
    }
}

/// Core loop shared by the problem-file and closure entry points.
#[allow(clippy::too_many_arguments)]
fn solve_core(
    op: &OperatorSpec,
    condition: Condition,
    grid: Grid,
    stencils: Stencils,
    psi: Vec<f64>,
    start: Option<&dyn Fn(&[f64]) -> f64>,
    opts: &SolveOptions,
) -> Result<Solution, SolverError> {
    let n_unknowns = grid.interior_count();
    let band_doubles = (3 * stencils.bandwidth + 1) * n_unknowns;
    if band_doubles > 1 << 28 {
        return Err(SolverError::InvalidProblem(format!(
            "banded factorization would need {band_doubles} doubles; beyond desk scale"
        )));
    }
    let psi_max = psi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Initial iterate: the extension of the boundary data, which keeps the
    // iterate's trace equal to the imposed boundary values so the stencil
    // arms see no jump. If the extension itself is not admissible, add
    // A(|x−x_c|²−R²)/2 over the circumscribing ball, with A grown from the
    // scalar root F(A·I) = 1.05·max ψ until the discrete spectrum clears
    // the cone at every node. The bowl's trace vanishes on ball-shaped
    // boundaries; elsewhere the jump it introduces scales with A, so when
    // doubling stops helping there is no admissible start of this form.
    let (center, radius) = enclosing_ball(&grid.domain);
    let base: Vec<f64> = grid
        .node_of_unknown
        .iter()
        .map(|&flat| start.map_or(0.0, |f| f(&grid.coords(flat))))
        .collect();
    let bowl: Vec<f64> = grid
        .node_of_unknown
        .iter()
        .map(|&flat| {
            let x = grid.coords(flat);
            let r2: f64 = x.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum();
            0.5 * (r2 - radius * radius)
        })
        .collect();
    let assemble =
        |a: f64| -> Vec<f64> { base.iter().zip(&bowl).map(|(b, w)| b + a * w).collect() };
    let mut u = base.clone();
    let mut eval = evaluate(op, condition, &grid, &stencils, &u, &psi, opts.eps_cone)?;
    if !eval.admissible {
        let mut coeff = paraboloid_coefficient(op, 1.05 * psi_max)?;
        u = assemble(coeff);
        eval = evaluate(op, condition, &grid, &stencils, &u, &psi, opts.eps_cone)?;
        let mut doublings = 0;
        while !eval.admissible {
            doublings += 1;
            if doublings > 60 {
                return Err(SolverError::NoAdmissibleStart(psi_max));
            }
            coeff *= 2.0;
            u = assemble(coeff);
            eval = evaluate(op, condition, &grid, &stencils, &u, &psi, opts.eps_cone)?;
        }
    }
    let mut iters = 0usize;
    while eval.rinf > opts.tol_res && iters < opts.max_iters {
        let band = assemble_jacobian(op, &grid, &stencils, &eval);
        let lu = band
            .factor()
            .map_err(|e| SolverError::LinearSolveFailure(e.to_string()))?;
        let rhs: Vec<f64> = eval.residual.iter().map(|r| -r).collect();
        let delta = lu
            .solve(&rhs)
            .map_err(|e| SolverError::LinearSolveFailure(e.to_string()))?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let cand_eval =
                evaluate(op, condition, &grid, &stencils, &cand, &psi, opts.eps_cone)?;
            if cand_eval.admissible && cand_eval.rinf < eval.rinf {
                u = cand;
                eval = cand_eval;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(SolverError::StalledLineSearch {
                halvings: opts.max_halvings,
                residual: eval.rinf,
            });
        }
        iters += 1;
    }

    let lambda: Vec<Vec<f64>> = eval.nodes.iter().map(|ne| ne.lam.clone()).collect();
    let cone_margin: Vec<f64> = eval.nodes.iter().map(|ne| ne.margin).collect();
    let laplacian: Vec<f64> = eval.nodes.iter().map(|ne| ne.trace).collect();
    let mut solution = Solution {
        grid,
        u,
        lambda,
        cone_margin,
        laplacian,
        operator: op.clone(),
        condition,
        report: SolveReport {
            residual_inf: eval.rinf,
            newton_iters: iters,
            admissible_everywhere: eval.admissible,
            min_cone_margin: eval.min_margin,
            pogorelov: Vec::new(),
        },
    };
    solution.report.pogorelov = opts
        .alphas
        .iter()
        .map(|&alpha| pogorelov_functional(&solution, alpha))
        .collect();
    Ok(solution)
}

/// Solves the Dirichlet problem given as closures for ψ and the boundary
/// data (the entry point experiments use). `start`, when supplied, is a
/// smooth interior extension of g whose trace on the boundary equals g; it
/// anchors the initial iterate so boundary data does not jump across
/// shortened stencil arms. Pass None when g vanishes on the boundary.
pub fn solve_fields(
    op: &OperatorSpec,
    condition: Condition,
    domain: Domain,
    h: f64,
    psi: &dyn Fn(&[f64]) -> f64,
    g: &dyn Fn(&[f64]) -> f64,
    start: Option<&dyn Fn(&[f64]) -> f64>,
    opts: &SolveOptions,
) -> Result<Solution, SolverError> {
    let grid = Grid::build(domain, h)?;
    let stencils = build_stencils(&grid, g)?;
    let psi_vals: Vec<f64> =
        grid.node_of_unknown.iter().map(|&flat| psi(&grid.coords(flat))).collect();
    let psi_min = psi_vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(psi_min > 0.0) {
        return Err(SolverError::InvalidProblem(format!(
            "forcing must be strictly positive; interior minimum is {psi_min}"
        )));
    }
    solve_core(op, condition, grid, stencils, psi_vals, start, opts)
}

/// Solves a problem file: F(D²u) = ψ in Ω, u = g on ∂Ω. The boundary field
/// is a closed form valid everywhere, so it doubles as its own interior
/// extension for the initial iterate.
pub fn newton_solve(
    problem: &DirichletProblem,
    opts: &SolveOptions,
) -> Result<Solution, SolverError> {
    problem.validate()?;
    let psi = problem.psi.clone();
    let g = problem.boundary.clone();
    let g2 = problem.boundary.clone();
    solve_fields(
        &problem.operator,
        problem.condition,
        problem.domain.clone(),
        problem.h,
        &move |x: &[f64]| psi.eval(x),
        &move |x: &[f64]| g.eval(x),
        Some(&move |x: &[f64]| g2.eval(x)),
        opts,
    )
}

/// Max over interior nodes of (−u)^α Δ_h u (nodes with u ≥ 0 contribute 0)
/// and its location.
pub fn pogorelov_functional(sol: &Solution, alpha: f64) -> PogorelovEntry {
    let mut max_value = 0.0_f64;
    let mut arg = 0usize;
    for (i, (&ui, &lap)) in sol.u.iter().zip(&sol.laplacian).enumerate() {
        let v = if ui < 0.0 { (-ui).powf(alpha) * lap } else { 0.0 };
        if v > max_value {
            max_value = v;
            arg = i;
        }
    }
    let node = sol.grid.node_of_unknown[arg];
    PogorelovEntry { alpha, max_value, node, location: sol.grid.coords(node) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::ScalarField;

    fn disk_problem(psi: f64, h: f64) -> DirichletProblem {
        DirichletProblem {
            operator: OperatorSpec::from_roots(2, 2, vec![1.0]).unwrap(),
            domain: Domain::Disk { center: vec![0.0, 0.0], radius: 1.0 },
            h,
            psi: ScalarField::Constant { value: psi },
            boundary: ScalarField::Zero,
            condition: Condition::One,
        }
    }

    #[test]
    fn paraboloid_coefficient_solves_the_scalar_equation() {
        // σ₂(c,c) + σ₁(c,c) = c² + 2c = 3 ⇒ c = 1.
        let op = OperatorSpec::from_roots(2, 2, vec![1.0]).unwrap();
        let c = paraboloid_coefficient(&op, 3.0).unwrap();
        assert!((c - 1.0).abs() < 1e-12, "c = {c}");
        // c² + 2c = 1 ⇒ c = √2 − 1.
        let c = paraboloid_coefficient(&op, 1.0).unwrap();
        assert!((c - (2.0_f64.sqrt() - 1.0)).abs() < 1e-12, "c = {c}");
    }

    #[test]
    fn disk_quadratic_solution_is_recovered() {
        // det + trace = 3 with u = (|x|²−1)/2: D²u = I, so 1 + 2 = 3. The
        // scheme is exact on quadratics, so the discrete solution must match
        // the quadratic to solver tolerance.
        let problem = disk_problem(3.0, 1.0 / 32.0);
        let sol = newton_solve(&problem, &SolveOptions::default()).unwrap();
        assert!(sol.report.residual_inf <= 1e-9, "residual {}", sol.report.residual_inf);
        assert!(sol.report.admissible_everywhere);
        assert!(sol.report.newton_iters <= 8, "{} iterations", sol.report.newton_iters);
        let mut worst = 0.0_f64;
        for (i, &flat) in sol.grid.node_of_unknown.iter().enumerate() {
            let x = sol.grid.coords(flat);
            let exact = 0.5 * (x[0] * x[0] + x[1] * x[1] - 1.0);
            worst = worst.max((sol.u[i] - exact).abs());
        }
        assert!(worst <= 1e-7, "max error {worst}");
    }

    #[test]
    fn aligned_box_quadratic_is_exact() {
        let problem = DirichletProblem {
            operator: OperatorSpec::from_roots(2, 2, vec![]).unwrap(),
            domain: Domain::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] },
            h: 1.0 / 16.0,
            psi: ScalarField::Constant { value: 1.0 },
            // u = ½(x² + y²) − boundary trace of the Monge–Ampère solution
            // with det D²u = 1.
            boundary: ScalarField::Table {
                monomials: vec![
                    super::super::Monomial { coef: 0.5, powers: vec![2, 0] },
                    super::super::Monomial { coef: 0.5, powers: vec![0, 2] },
                ],
            },
            condition: Condition::Two,
        };
        let sol = newton_solve(&problem, &SolveOptions::default()).unwrap();
        let mut worst = 0.0_f64;
        for (i, &flat) in sol.grid.node_of_unknown.iter().enumerate() {
            let x = sol.grid.coords(flat);
            let exact = 0.5 * (x[0] * x[0] + x[1] * x[1]);
            worst = worst.max((sol.u[i] - exact).abs());
        }
        assert!(worst <= 1e-8, "max error {worst}");
        assert!(sol.report.residual_inf <= 1e-10);
    }

    #[test]
    fn admissible_boundary_extension_is_used_without_the_bowl() {
        // On a box the convexifying bowl has a nonzero boundary trace, so
        // near-face stencils would see an O(A/h²) jump that grows with the
        // bowl coefficient; at fine h the only working start is the pure
        // extension. The quadratic boundary data is its own solution, so
        // the solve must accept the extension immediately.
        let problem = DirichletProblem {
            operator: OperatorSpec::from_coeffs(2, 2, vec![1.0]).unwrap(),
            domain: Domain::Box { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] },
            h: 1.0 / 32.0,
            psi: ScalarField::Constant { value: 3.0 },
            boundary: ScalarField::Table {
                monomials: vec![
                    super::super::Monomial { coef: 0.5, powers: vec![2, 0] },
                    super::super::Monomial { coef: 0.5, powers: vec![0, 2] },
                ],
            },
            condition: Condition::One,
        };
        let sol = newton_solve(&problem, &SolveOptions::default()).unwrap();
        assert!(sol.report.newton_iters <= 2, "{} iterations", sol.report.newton_iters);
        assert!(sol.report.residual_inf <= 1e-10);
    }

    #[test]
    fn small_3d_box_solve_converges() {
        let problem = DirichletProblem {
            operator: OperatorSpec::from_roots(3, 2, vec![1.0]).unwrap(),
            domain: Domain::Box { lo: vec![0.0; 3], hi: vec![1.0; 3] },
            h: 1.0 / 10.0,
            psi: ScalarField::Constant { value: 4.0 },
            boundary: ScalarField::Zero,
            condition: Condition::One,
        };
        let sol = newton_solve(&problem, &SolveOptions::default()).unwrap();
        assert!(sol.report.residual_inf <= 1e-9, "residual {}", sol.report.residual_inf);
        assert!(sol.report.admissible_everywhere);
        assert!(sol.u.iter().all(|&v| v < 0.0), "interior must be negative");
    }

    #[test]
    fn pogorelov_functional_on_the_exact_quadratic() {
        // u = c(|x|²−1)/2 with c² + 2c = 1: at α = 1 the functional is
        // c²·(1−|x|²), maximized at the center with value c² = 3 − 2√2.
        let problem = disk_problem(1.0, 1.0 / 32.0);
        let opts = SolveOptions { alphas: vec![0.0, 1.0], ..SolveOptions::default() };
        let sol = newton_solve(&problem, &opts).unwrap();
        let c = 2.0_f64.sqrt() - 1.0;
        let entry = &sol.report.pogorelov[1];
        assert_eq!(entry.alpha, 1.0);
        let expect = 3.0 - 2.0 * 2.0_f64.sqrt();
        assert!(
            (entry.max_value - expect).abs() <= 5e-3 * expect,
            "functional {} vs {}",
            entry.max_value,
            expect
        );
        let r2: f64 = entry.location.iter().map(|v| v * v).sum();
        assert!(r2.sqrt() <= 2.0 * sol.grid.h, "max not at the center: {:?}", entry.location);
        // α = 0 is the raw Laplacian bound: 2c everywhere for the quadratic.
        let lap = &sol.report.pogorelov[0];
        assert!((lap.max_value - 2.0 * c).abs() <= 1e-6);
    }

    #[test]
    fn forcing_must_be_positive() {
        let mut problem = disk_problem(3.0, 1.0 / 16.0);
        problem.psi = ScalarField::Constant { value: 0.0 };
        assert!(matches!(
            newton_solve(&problem, &SolveOptions::default()),
            Err(SolverError::InvalidProblem(_))
        ));
    }
}
