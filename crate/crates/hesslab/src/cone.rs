//! Admissibility cones.
//!
//! The degree-k positivity cone Γ_k in ℝⁿ is the set where σ_1, …, σ_k are
//! all strictly positive. The lifted admissible set for an operator with
//! appended roots y is the preimage of Γ_k in the concatenated variables
//! (λ, y). Membership verdicts carry all the per-degree margins so callers
//! can report *how* membership fails, not just that it does.

use serde::{Deserialize, Serialize};

use crate::symfun::SigmaTable;

#[derive(Debug, thiserror::Error)]
pub enum ConeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("vector is not in the required cone (first failing degree {0})")]
    NotInCone(usize),
}

/// Membership verdict with the σ_j values for j = 1..=k as margins.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub member: bool,
    /// Smallest degree whose margin fails the strict threshold, if any.
    pub first_failing_degree: Option<usize>,
    /// σ_j of the tested vector, j = 1..=k.
    pub margins: Vec<f64>,
}

impl ConeVerdict {
    /// Minimum margin normalized per degree by max(1, |x|_∞^j); useful for
    /// comparing distances-to-boundary across scales.
    pub fn min_normalized_margin(&self, max_abs: f64) -> f64 {
        self.margins
            .iter()
            .enumerate()
            .map(|(idx, &m)| m / max_abs.powi(idx as i32 + 1).max(1.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Strict membership x ∈ Γ_k: σ_j(x) > 0 for every j = 1..=k.
pub fn in_gamma_k(x: &[f64], k: usize) -> ConeVerdict {
    in_gamma_k_margin(x, k, 0.0)
}

/// Membership with a safety margin: requires σ_j(x) > ε·max(1, |x|_∞^j) for
/// every j = 1..=k. ε = 0 recovers the strict cone.
pub fn in_gamma_k_margin(x: &[f64], k: usize, eps: f64) -> ConeVerdict {
    let table = SigmaTable::build(x);
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut margins = Vec::with_capacity(k);
    let mut first_failing_degree = None;
    for j in 1..=k {
        let m = table.get(j as i64);
        margins.push(m);
        let threshold = eps * scale.powi(j as i32).max(1.0);
        if first_failing_degree.is_none() && m <= threshold {
            first_failing_degree = Some(j);
        }
    }
    if k > x.len() && first_failing_degree.is_none() {
        // σ_j ≡ 0 beyond the dimension, so membership is impossible.
        first_failing_degree = Some(x.len() + 1);
    }
    ConeVerdict { member: first_failing_degree.is_none(), first_failing_degree, margins }
}

/// Membership of λ in the lifted admissible set: (λ, y) ∈ Γ_k in dimension
/// n + m. Margins are σ_j of the concatenated vector.
pub fn in_lifted_cone(lambda: &[f64], y: &[f64], k: usize) -> ConeVerdict {
    let mut concat = Vec::with_capacity(lambda.len() + y.len());
    concat.extend_from_slice(lambda);
    concat.extend_from_slice(y);
    in_gamma_k(&concat, k)
}

/// The two structural hypotheses under which the operator theory runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// λ in the lifted cone and every appended root nonnegative.
    One,
    /// λ ∈ Γ_{k−1} in dimension n and every coefficient nonnegative.
    Two,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub which: Condition,
    pub holds: bool,
    pub cone: ConeVerdict,
    /// min of the sign-constrained data (roots for One, coefficients for Two);
    /// +∞ when that list is empty (m = 0).
    pub min_sign_constrained: f64,
}

/// Checks Condition One ((λ,y) ∈ Γ_k lifted, y ≥ 0) or Condition Two
/// (λ ∈ Γ_{k−1} in dimension n, a ≥ 0) for the operator data (y, a, k).
pub fn check_condition(
    lambda: &[f64],
    y: &[f64],
    a: &[f64],
    k: usize,
    which: Condition,
) -> ConditionReport {
    match which {
        Condition::One => {
            let cone = in_lifted_cone(lambda, y, k);
            let min_y = y.iter().cloned().fold(f64::INFINITY, f64::min);
            ConditionReport {
                which,
                holds: cone.member && min_y >= 0.0,
                cone,
                min_sign_constrained: min_y,
            }
        }
        Condition::Two => {
            let cone = in_gamma_k(lambda, k - 1);
            let min_a = a.iter().cloned().fold(f64::INFINITY, f64::min);
            ConditionReport {
                which,
                holds: cone.member && min_a >= 0.0,
                cone,
                min_sign_constrained: min_a,
            }
        }
    }
}

/// max(0, −λ_min/σ_1): zero on nonnegative vectors, positive when the most
/// negative entry is compared against the trace. Errors when σ_1 ≤ 0.
pub fn semiconvexity_ratio(lambda: &[f64]) -> Result<f64, ConeError> {
    let s1: f64 = lambda.iter().sum();
    if s1 <= 0.0 {
        return Err(ConeError::InvalidInput(format!("σ_1 = {s1} must be positive")));
    }
    let min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((-min / s1).max(0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct PinchReport {
    /// Smallest entry of λ.
    pub lambda_min: f64,
    /// The lower-pinch reference level −λ_1/(n−1).
    pub pinch_level: f64,
    /// Slack λ_min − pinch level; per the pinch estimate this stays bounded
    /// below (by −C) on admissible spectra with k = n−1.
    pub slack: f64,
}

/// Evaluates the bottom-eigenvalue pinch data at a spectrum admissible for
/// the degree n−1 lifted cone. Errors when (λ, y) fails that membership.
pub fn pinch_check(lambda: &[f64], y: &[f64]) -> Result<PinchReport, ConeError> {
    let n = lambda.len();
    if n < 2 {
        return Err(ConeError::InvalidInput("need at least two entries".to_string()));
    }
    let verdict = in_lifted_cone(lambda, y, n - 1);
    if !verdict.member {
        return Err(ConeError::NotInCone(verdict.first_failing_degree.unwrap_or(0)));
    }
    let lambda_max = lambda.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lambda_min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let pinch_level = -lambda_max / (n as f64 - 1.0);
    Ok(PinchReport { lambda_min, pinch_level, slack: lambda_min - pinch_level })
}

/// A concrete point showing the lifted admissible set is strictly larger
/// than Γ_{k−1} in dimension n: (λ,y) lifted-admissible with y ≥ 0 while λ
/// itself fails Γ_{k−1}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftedWitness {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub lambda: Vec<f64>,
    pub y: Vec<f64>,
    /// Degree at which λ alone leaves Γ_{k−1}.
    pub failing_degree: usize,
    pub lifted_margins: Vec<f64>,
}

/// Random search for a lifted-membership witness. Returns the first hit, or
/// None when `attempts` draws produce none (for m = 1 none exists: deleting
/// the single root from a lifted-admissible vector lands λ in Γ_{k−1}).
pub fn find_lifted_witness(
    n: usize,
    k: usize,
    m: usize,
    seed: u64,
    attempts: usize,
) -> Option<LiftedWitness> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..attempts {
        let mut lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(-4.0..8.0)).collect();
        lambda.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..8.0)).collect();
        let alone = in_gamma_k(&lambda, k.saturating_sub(1));
        if alone.member {
            continue;
        }
        let lifted = in_lifted_cone(&lambda, &y, k);
        if lifted.member {
            return Some(LiftedWitness {
                n,
                k,
                m,
                lambda,
                y,
                failing_degree: alone.first_failing_degree.unwrap_or(0),
                lifted_margins: lifted.margins,
            });
        }
    }
    None
}
