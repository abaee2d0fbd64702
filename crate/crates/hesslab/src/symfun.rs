//! Elementary symmetric functions and their deletion calculus.
//!
//! All higher-level machinery (admissibility cones, the lifted operator, the
//! concavity forms, the solver's linearizations) reduces to evaluations of
//! σ_k on a vector, on vectors with one or two entries removed, and to a few
//! exact algebraic identities among those. This module owns those primitives.
//!
//! Degrees are signed throughout: σ_k is total in k with σ_0 = 1 and
//! σ_k = 0 for k < 0 or k > n, which lets the caller assemble shifted-degree
//! formulas without special cases.

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

/// Default relative tolerance for exact-identity comparisons.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Discrepancy between two supposedly equal quantities, relative to their
/// size with an absolute floor of 1 (so tiny quantities are compared
/// absolutely and large ones relatively).
pub fn rel_discrepancy(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0)
}

#[derive(Debug, thiserror::Error)]
pub enum SymfunError {
    #[error("drop set must contain 1 or 2 distinct in-range indices, got {0:?}")]
    InvalidDrop(Vec<usize>),
    #[error("division by zero: σ_{degree} vanishes")]
    DivisionByZero { degree: i64 },
    #[error("vector is not in the degree-{k} positivity cone (σ_{failing} ≤ 0)")]
    NotInCone { k: usize, failing: usize },
    #[error("degree must be at least 1, got {0}")]
    DegreeTooSmall(i64),
}

/// A vector of (Hessian) eigenvalues together with a record of whether it is
/// sorted in decreasing order. Sorting is stable so ties keep their input
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
    sorted_desc: bool,
}

impl Spectrum {
    /// Wraps values as-is, detecting whether they are already decreasing.
    pub fn new(values: Vec<f64>) -> Self {
        let sorted_desc = values.windows(2).all(|w| w[0] >= w[1]);
        Spectrum { values, sorted_desc }
    }

    /// Sorts the values decreasingly (stable) and records the fact.
    pub fn sorted(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).expect("non-finite eigenvalue"));
        Spectrum { values, sorted_desc: true }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_sorted_desc(&self) -> bool {
        self.sorted_desc
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// A decreasing copy of self (self if already sorted).
    pub fn to_sorted(&self) -> Spectrum {
        if self.sorted_desc {
            self.clone()
        } else {
            Spectrum::sorted(self.values.clone())
        }
    }
}

/// All σ_j(x) for j = 0..=kmax via the incremental product recurrence:
/// entries are folded in one at a time, updating degrees high-to-low, so the
/// cost is O(n·kmax) with no subset enumeration.
fn sigma_prefix(x: &[f64], kmax: usize) -> Vec<f64> {
    let mut e = vec![0.0; kmax + 1];
    e[0] = 1.0;
    for (count, &v) in x.iter().enumerate() {
        let top = kmax.min(count + 1);
        for j in (1..=top).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

/// Table of every σ_j(x), j = 0..=n, computed in one recurrence pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaTable {
    values: Vec<f64>,
}

impl SigmaTable {
    pub fn build(x: &[f64]) -> Self {
        SigmaTable { values: sigma_prefix(x, x.len()) }
    }

    /// σ_k with the total-degree convention (0 outside 0..=n).
    pub fn get(&self, k: i64) -> f64 {
        if k < 0 || k as usize >= self.values.len() {
            0.0
        } else {
            self.values[k as usize]
        }
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// σ_k(x); total in k (1 at k = 0, 0 for k < 0 or k > n).
pub fn sigma(k: i64, x: &[f64]) -> f64 {
    if k < 0 || k as usize > x.len() {
        return 0.0;
    }
    if k == 0 {
        return 1.0;
    }
    sigma_prefix(x, k as usize)[k as usize]
}

/// σ_k of x with the entries at `drop` (0-based, 1 or 2 distinct indices)
/// removed. Recomputes the recurrence on the shortened vector; no polynomial
/// division is performed, so near-zero entries cost nothing in accuracy.
pub fn sigma_deleted(k: i64, x: &[f64], drop: &[usize]) -> Result<f64, SymfunError> {
    let valid = match drop {
        [i] => *i < x.len(),
        [i, j] => i != j && *i < x.len() && *j < x.len(),
        _ => false,
    };
    if !valid {
        return Err(SymfunError::InvalidDrop(drop.to_vec()));
    }
    Ok(sigma_deleted_unchecked(k, x, drop))
}

pub(crate) fn sigma_deleted_unchecked(k: i64, x: &[f64], drop: &[usize]) -> f64 {
    let shortened: Vec<f64> =
        x.iter().enumerate().filter(|(i, _)| !drop.contains(i)).map(|(_, &v)| v).collect();
    sigma(k, &shortened)
}

/// Gradient of σ_k: component i is σ_{k−1} of x with entry i removed.
pub fn sigma_grad(k: i64, x: &[f64]) -> Vec<f64> {
    (0..x.len()).map(|i| sigma_deleted_unchecked(k - 1, x, &[i])).collect()
}

/// Hessian of σ_k: entry (p,q), p ≠ q, is σ_{k−2} of x with entries p and q
/// removed; the diagonal vanishes because σ_k is multilinear.
pub fn sigma_hess(k: i64, x: &[f64]) -> Matrix {
    let n = x.len();
    let mut h = Matrix::zeros(n, n);
    for p in 0..n {
        for q in (p + 1)..n {
            let v = sigma_deleted_unchecked(k - 2, x, &[p, q]);
            h.set(p, q, v);
            h.set(q, p, v);
        }
    }
    h
}

/// The quotient σ_k/σ_{k−1}; errors when the denominator vanishes exactly.
pub fn quotient_q(k: i64, x: &[f64]) -> Result<f64, SymfunError> {
    if k < 1 {
        return Err(SymfunError::DegreeTooSmall(k));
    }
    let table = SigmaTable::build(x);
    let denom = table.get(k - 1);
    if denom == 0.0 {
        return Err(SymfunError::DivisionByZero { degree: k - 1 });
    }
    Ok(table.get(k) / denom)
}

/// One verified identity instance: both sides as evaluated plus their
/// discrepancy relative to max(1, |lhs|, |rhs|).
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

/// Outcome of the frozen identity battery at one (x, k).
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub k: i64,
    pub checks: Vec<IdentityCheck>,
    /// Instances skipped because a denominator was below the floor.
    pub skipped: Vec<String>,
    pub max_rel_err: f64,
}

impl IdentityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_rel_err <= tol
    }
}

/// Denominator floor below which quotient identities are skipped rather than
/// amplified into spurious failures.
pub const IDENTITY_DENOMINATOR_FLOOR: f64 = 1e-8;

/// Evaluates the frozen battery of exact σ identities at (x, k):
///
/// * deletion split: σ_k = σ_{k;i} + x_i σ_{k−1;i} for every i;
/// * deleted-degree sum: Σ_i σ_{k;i} = (n−k) σ_k;
/// * weighted Euler sum: Σ_i x_i σ_{k−1;i} = k σ_k;
/// * square-weighted sum: Σ_i x_i² σ_{k−1;i} = σ_1 σ_k − (k+1) σ_{k+1};
/// * quotient curvature: for every (p,q), the second derivative of
///   log-of-quotient assembled two ways (direct quotient rule vs. the
///   five-term split), skipped when σ_k or σ_{k−1} is below the floor.
pub fn identity_suite(x: &[f64], k: i64) -> IdentityReport {
    let n = x.len();
    let table = SigmaTable::build(x);
    let grad_k = sigma_grad(k, x);
    let mut checks = Vec::new();
    let mut skipped = Vec::new();

    for i in 0..n {
        let lhs = table.get(k);
        let rhs = sigma_deleted_unchecked(k, x, &[i]) + x[i] * grad_k[i];
        push_check(&mut checks, format!("deletion-split i={}", i + 1), lhs, rhs);
    }

    {
        let lhs: f64 = (0..n).map(|i| sigma_deleted_unchecked(k, x, &[i])).sum();
        let rhs = (n as f64 - k as f64) * table.get(k);
        push_check(&mut checks, "deleted-degree-sum".to_string(), lhs, rhs);
    }

    {
        let lhs: f64 = (0..n).map(|i| x[i] * grad_k[i]).sum();
        let rhs = k as f64 * table.get(k);
        push_check(&mut checks, "euler-degree-k".to_string(), lhs, rhs);
    }

    {
        let lhs: f64 = (0..n).map(|i| x[i] * x[i] * grad_k[i]).sum();
        let rhs = table.get(1) * table.get(k) - (k as f64 + 1.0) * table.get(k + 1);
        push_check(&mut checks, "square-weighted-sum".to_string(), lhs, rhs);
    }

    let sk = table.get(k);
    let skm1 = table.get(k - 1);
    let scale = x.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let floor = IDENTITY_DENOMINATOR_FLOOR * scale.powi(k.max(1) as i32);
    if sk.abs() > floor && skm1.abs() > floor {
        let grad_km1 = sigma_grad(k - 1, x);
        let hess_k = sigma_hess(k, x);
        let hess_km1 = sigma_hess(k - 1, x);
        for p in 0..n {
            for q in 0..n {
                // Quotient rule for ∂²(σ_k/σ_{k−1}) grouped as a single
                // expression, then normalized by the quotient itself...
                let d2q = hess_k.get(p, q) / skm1
                    - grad_k[p] * grad_km1[q] / (skm1 * skm1)
                    - grad_k[q] * grad_km1[p] / (skm1 * skm1)
                    - sk * hess_km1.get(p, q) / (skm1 * skm1)
                    + 2.0 * sk * grad_km1[p] * grad_km1[q] / (skm1 * skm1 * skm1);
                let lhs = d2q * skm1 / sk;
                // ...versus the five-term split into per-degree ratios.
                let rhs = hess_k.get(p, q) / sk
                    - grad_k[p] / sk * grad_km1[q] / skm1
                    - grad_k[q] / sk * grad_km1[p] / skm1
                    - hess_km1.get(p, q) / skm1
                    + 2.0 * grad_km1[p] / skm1 * grad_km1[q] / skm1;
                push_check(
                    &mut checks,
                    format!("quotient-curvature p={} q={}", p + 1, q + 1),
                    lhs,
                    rhs,
                );
            }
        }
    } else {
        skipped.push("quotient-curvature".to_string());
    }

    let max_rel_err = checks.iter().fold(0.0_f64, |m, c| m.max(c.rel_err));
    IdentityReport { n, k, checks, skipped, max_rel_err }
}

fn push_check(checks: &mut Vec<IdentityCheck>, name: String, lhs: f64, rhs: f64) {
    checks.push(IdentityCheck { name, lhs, rhs, rel_err: rel_discrepancy(lhs, rhs) });
}

/// Report for the k-th-entry bound x_k ≤ C(σ_k^{1/k} + |x_n|):
/// both sides evaluated and their ratio (the empirical C at this point).
#[derive(Debug, Clone, Serialize)]
pub struct XkBoundReport {
    pub xk: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Evaluates the k-th-entry bound at a spectrum in the degree-k positivity
/// cone (σ_j > 0 for j = 1..=k). Sorts a copy if needed; errors when the
/// cone condition fails.
pub fn xk_bound_check(x: &Spectrum, k: usize) -> Result<XkBoundReport, SymfunError> {
    if k == 0 {
        return Err(SymfunError::DegreeTooSmall(0));
    }
    let sorted = x.to_sorted();
    let vals = sorted.values();
    let table = SigmaTable::build(vals);
    for j in 1..=k.min(vals.len()) {
        if table.get(j as i64) <= 0.0 {
            return Err(SymfunError::NotInCone { k, failing: j });
        }
    }
    if k > vals.len() {
        return Err(SymfunError::NotInCone { k, failing: vals.len() + 1 });
    }
    let xk = vals[k - 1];
    let bound = table.get(k as i64).powf(1.0 / k as f64) + vals[vals.len() - 1].abs();
    Ok(XkBoundReport { xk, bound, ratio: xk / bound })
}

/// Subset-enumeration oracle: definitionally Σ over k-subsets of the
/// product of entries. Exponential cost — the independent reference the
/// recurrence is checked against, not a production path.
pub fn sigma_enumerated(k: i64, x: &[f64]) -> f64 {
    if k < 0 || k as usize > x.len() {
        return 0.0;
    }
    let k = k as usize;
    let n = x.len();
    let mut total = 0.0;
    let mut idx: Vec<usize> = (0..k).collect();
    if k == 0 {
        return 1.0;
    }
    loop {
        total += idx.iter().map(|&i| x[i]).product::<f64>();
        // next k-combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return total;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return total;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
