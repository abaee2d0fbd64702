//! Uniform lattice over a domain, interior-node bookkeeping, and the
//! second-difference stencils (axis and diagonal) with boundary crossings.

use serde::Serialize;

use super::{Domain, SolverError};
use crate::linalg::Matrix;

/// Nodes closer to the boundary than this fraction of h are not unknowns;
/// their stencil arms would be degenerately short.
const SKIN_FRACTION: f64 = 1e-6;

/// A uniform lattice covering the domain, with interior nodes enumerated as
/// unknowns in row-major lattice order (first axis slowest).
#[derive(Debug, Clone, Serialize)]
pub struct Grid {
    pub domain: Domain,
    pub h: f64,
    pub dim: usize,
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    /// Flat lattice index → unknown index, for interior nodes.
    #[serde(skip)]
    pub unknown_of_node: Vec<Option<usize>>,
    /// Unknown index → flat lattice index.
    #[serde(skip)]
    pub node_of_unknown: Vec<usize>,
}

impl Grid {
    pub fn build(domain: Domain, h: f64) -> Result<Self, SolverError> {
        let dim = domain.dim();
        let mut origin = Vec::with_capacity(dim);
        let mut shape = Vec::with_capacity(dim);
        match &domain {
            Domain::Disk { center, radius } => {
                for c in center {
                    origin.push(c - radius - 1.5 * h);
                    shape.push(((2.0 * radius + 3.0 * h) / h).ceil() as usize + 1);
                }
            }
            Domain::Box { lo, hi } => {
                for (l, u) in lo.iter().zip(hi) {
                    origin.push(*l);
                    shape.push(((u - l) / h + 1e-9).floor() as usize + 1);
                }
            }
        }
        let total: usize = shape.iter().product();
        if total > 1 << 24 {
            return Err(SolverError::InvalidProblem(format!(
                "lattice of {total} nodes is beyond desk scale"
            )));
        }
        let mut unknown_of_node = vec![None; total];
        let mut node_of_unknown = Vec::new();
        let mut axis_seen: Vec<Vec<bool>> = shape.iter().map(|&s| vec![false; s]).collect();
        let grid_stub = Grid {
            domain: domain.clone(),
            h,
            dim,
            shape: shape.clone(),
            origin: origin.clone(),
            unknown_of_node: Vec::new(),
            node_of_unknown: Vec::new(),
        };
        for flat in 0..total {
            let x = grid_stub.coords(flat);
            if domain.interior_margin(&x) > SKIN_FRACTION * h {
                unknown_of_node[flat] = Some(node_of_unknown.len());
                node_of_unknown.push(flat);
                for (a, i) in grid_stub.multi(flat).iter().enumerate() {
                    axis_seen[a][*i] = true;
                }
            }
        }
        for (a, seen) in axis_seen.iter().enumerate() {
            let count = seen.iter().filter(|&&s| s).count();
            if count < 8 {
                return Err(SolverError::InvalidProblem(format!(
                    "only {count} interior nodes along axis {a}; h does not resolve the domain"
                )));
            }
        }
        Ok(Grid { domain, h, dim, shape, origin, unknown_of_node, node_of_unknown })
    }

    pub fn interior_count(&self) -> usize {
        self.node_of_unknown.len()
    }

    pub fn multi(&self, flat: usize) -> Vec<usize> {
        let mut rest = flat;
        let mut idx = vec![0usize; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = rest % self.shape[a];
            rest /= self.shape[a];
        }
        idx
    }

    pub fn flat(&self, multi: &[usize]) -> usize {
        let mut f = 0usize;
        for a in 0..self.dim {
            f = f * self.shape[a] + multi[a];
        }
        f
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi(flat)
            .iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + i as f64 * self.h)
            .collect()
    }

    /// Flat index of the lattice neighbor at multi + step, if inside the
    /// lattice bounds.
    fn neighbor(&self, multi: &[usize], step: &[i64]) -> Option<usize> {
        let mut m = Vec::with_capacity(self.dim);
        for a in 0..self.dim {
            let v = multi[a] as i64 + step[a];
            if v < 0 || v as usize >= self.shape[a] {
                return None;
            }
            m.push(v as usize);
        }
        Some(self.flat(&m))
    }
}

/// Where a stencil arm ends: another unknown, or a Dirichlet value at the
/// boundary crossing.
#[derive(Debug, Clone)]
pub(crate) enum ArmRef {
    Unknown(usize),
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub(crate) struct Arm {
    /// Arm length in units of the step vector (1 = full lattice step).
    pub t: f64,
    pub r: ArmRef,
}

/// Plus/minus arms of a second difference along one direction.
#[derive(Debug, Clone)]
pub(crate) struct DirStencil {
    pub plus: Arm,
    pub minus: Arm,
}

impl DirStencil {
    /// Weights (w_plus, w_minus, w_center) of the unequal-arm second
    /// difference 2[t⁻f⁺ + t⁺f⁻ − (t⁺+t⁻)f₀]/(t⁺t⁻(t⁺+t⁻)); multiplying the
    /// sampled values by these approximates (step·∇)²u and is exact for
    /// quadratics.
    pub fn weights(&self) -> (f64, f64, f64) {
        let (tp, tm) = (self.plus.t, self.minus.t);
        let denom = tp * tm * (tp + tm);
        (2.0 * tm / denom, 2.0 * tp / denom, -2.0 * (tp + tm) / denom)
    }

    pub fn second_difference(&self, u0: f64, u: &[f64]) -> f64 {
        let val = |arm: &Arm| match arm.r {
            ArmRef::Unknown(j) => u[j],
            ArmRef::Fixed(v) => v,
        };
        let (wp, wm, wc) = self.weights();
        wp * val(&self.plus) + wm * val(&self.minus) + wc * u0
    }
}

/// Mixed-entry stencil for the (a, b) Hessian entry via the two diagonal
/// second differences: u_ab = (D²_{e_a+e_b} − D²_{e_a−e_b}) / (4h²).
#[derive(Debug, Clone)]
pub(crate) struct DiagStencil {
    pub a: usize,
    pub b: usize,
    pub sum: DirStencil,
    pub diff: DirStencil,
}

#[derive(Debug, Clone)]
pub(crate) struct NodeStencil {
    pub axes: Vec<DirStencil>,
    pub diags: Vec<DiagStencil>,
}

#[derive(Debug, Clone)]
pub(crate) struct Stencils {
    pub nodes: Vec<NodeStencil>,
    /// Largest |i − j| over unknown pairs coupled by any stencil.
    pub bandwidth: usize,
}

/// Precomputes every interior node's stencil, with boundary values taken
/// from g at the crossing points.
pub(crate) fn build_stencils(
    grid: &Grid,
    g: &dyn Fn(&[f64]) -> f64,
) -> Result<Stencils, SolverError> {
    let dim = grid.dim;
    let mut nodes = Vec::with_capacity(grid.interior_count());
    let mut bandwidth = 0usize;

    let mut directions: Vec<Vec<i64>> = Vec::new();
    for a in 0..dim {
        let mut d = vec![0i64; dim];
        d[a] = 1;
        directions.push(d);
    }
    let mut pairs = Vec::new();
    for a in 0..dim {
        for b in (a + 1)..dim {
            let mut sum = vec![0i64; dim];
            sum[a] = 1;
            sum[b] = 1;
            let mut diff = vec![0i64; dim];
            diff[a] = 1;
            diff[b] = -1;
            pairs.push((a, b, sum, diff));
        }
    }

    for (unknown, &flat) in grid.node_of_unknown.iter().enumerate() {
        let multi = grid.multi(flat);
        let x = grid.coords(flat);
        let mut arm = |step: &[i64], sign: f64| -> Result<Arm, SolverError> {
            let signed: Vec<i64> = step.iter().map(|&s| (s as f64 * sign) as i64).collect();
            if let Some(nflat) = grid.neighbor(&multi, &signed) {
                if let Some(j) = grid.unknown_of_node[nflat] {
                    if j.abs_diff(unknown) > bandwidth {
                        bandwidth = j.abs_diff(unknown);
                    }
                    return Ok(Arm { t: 1.0, r: ArmRef::Unknown(j) });
                }
            }
            let v: Vec<f64> = signed.iter().map(|&s| s as f64 * grid.h).collect();
            let t = grid
                .domain
                .crossing(&x, &v)
                .filter(|&t| t > 0.0 && t <= 1.5)
                .ok_or(SolverError::StencilOutOfDomain(flat))?;
            let point: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi + t * vi).collect();
            Ok(Arm { t, r: ArmRef::Fixed(g(&point)) })
        };

        let mut axes = Vec::with_capacity(dim);
        for d in &directions {
            axes.push(DirStencil { plus: arm(d, 1.0)?, minus: arm(d, -1.0)? });
        }
        let mut diags = Vec::with_capacity(pairs.len());
        for (a, b, sum, diff) in &pairs {
            diags.push(DiagStencil {
                a: *a,
                b: *b,
                sum: DirStencil { plus: arm(sum, 1.0)?, minus: arm(sum, -1.0)? },
                diff: DirStencil { plus: arm(diff, 1.0)?, minus: arm(diff, -1.0)? },
            });
        }
        nodes.push(NodeStencil { axes, diags });
    }
    Ok(Stencils { nodes, bandwidth })
}

/// Discrete Hessian at one interior node from its stencil and the current
/// unknown values.
pub(crate) fn hessian_at(st: &NodeStencil, u0: f64, u: &[f64], h: f64, dim: usize) -> Matrix {
    let h2 = h * h;
    let mut hess = Matrix::zeros(dim, dim);
    for (a, ds) in st.axes.iter().enumerate() {
        hess.set(a, a, ds.second_difference(u0, u) / h2);
    }
    for dg in &st.diags {
        let v = (dg.sum.second_difference(u0, u) - dg.diff.second_difference(u0, u)) / (4.0 * h2);
        hess.set(dg.a, dg.b, v);
        hess.set(dg.b, dg.a, v);
    }
    hess
}

/// Discrete Hessian of a closed-form field at a free point (no domain
/// masking): 3-point axis stencils and 4-point crosses, full arms.
pub fn discrete_hessian_field(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Matrix {
    let dim = x.len();
    let at = |dx: &[f64]| {
        let p: Vec<f64> = x.iter().zip(dx).map(|(a, b)| a + b).collect();
        f(&p)
    };
    let f0 = f(x);
    let mut hess = Matrix::zeros(dim, dim);
    for a in 0..dim {
        let mut dp = vec![0.0; dim];
        dp[a] = h;
        let mut dm = vec![0.0; dim];
        dm[a] = -h;
        hess.set(a, a, (at(&dp) - 2.0 * f0 + at(&dm)) / (h * h));
    }
    for a in 0..dim {
        for b in (a + 1)..dim {
            let mut d = vec![0.0; dim];
            d[a] = h;
            d[b] = h;
            let pp = at(&d);
            d[b] = -h;
            let pm = at(&d);
            d[a] = -h;
            let mm = at(&d);
            d[b] = h;
            let mp = at(&d);
            let v = (pp + mm - pm - mp) / (4.0 * h * h);
            hess.set(a, b, v);
            hess.set(b, a, v);
        }
    }
    hess
}
