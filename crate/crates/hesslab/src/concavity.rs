//! Concavity quadratic forms and inequality verification.
//!
//! Three families of inequalities are checked, all of the shape
//!
//!   −Σ_{p≠q} H_pq ξ_p ξ_q / Φ + c·(Σ_i g_i ξ_i)² / Φ²
//!     + Σ_{i>1} 2 g_i ξ_i² / (d_i Φ)  ≥  (1+γ)·w·ξ_1² / (λ_1 Φ),
//!
//! where Φ is the operator value, g its spectral gradient, H its spectral
//! Hessian, and the weights c, d_i, w depend on the variant. Each variant is
//! assembled as a symmetric matrix M with ξᵀMξ = LHS − RHS, so positive
//! semidefiniteness of M is the inequality. Region sweeps sample the regime
//! each variant is asserted in and report margins and failing witnesses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{check_condition, in_gamma_k, in_lifted_cone, Condition};
use crate::linalg::{symmetric_eigen, LinalgError, Matrix};
use crate::operator::{OperatorError, OperatorSpec};
use crate::symfun::{sigma_deleted_unchecked, SigmaTable, Spectrum};

#[derive(Debug, thiserror::Error)]
pub enum ConcavityError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spectrum is not in the required cone (first failing degree {0})")]
    NotInCone(usize),
    #[error("operator value {0} is not positive")]
    NonpositiveOperatorValue(f64),
    #[error("eigenvalues too close together (minimum gap {0:.3e})")]
    DegenerateSpectrum(f64),
    #[error("condition {0:?} does not hold at the supplied spectrum")]
    ConditionViolated(Condition),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Eigen(#[from] LinalgError),
}

/// Default relative tolerance below which a negative minimum eigenvalue is
/// still considered a pass (the inequalities assert ≥ 0, and eigenvalues of
/// near-singular forms jitter at roundoff scale).
pub const DEFAULT_TOL_PSD: f64 = 1e-8;

/// Minimum pairwise eigenvalue separation required where explicit divided
/// differences appear.
pub const EIGEN_GAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadFormVariant {
    /// Pure σ_k form: squared-gradient coefficient 2, uniform diagonal
    /// weights (1+2δ)λ_1.
    SigmaK,
    /// Same shape for the full sum operator F (reduces to SigmaK at m = 0).
    SumF,
    /// The k = n−1 form: squared-gradient coefficient 1 and diagonal weights
    /// (λ_1 − λ_i + s)·λ_1, verified in raw (unnormalized) coordinates.
    NMinusOne,
}

impl QuadFormVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            QuadFormVariant::SigmaK => "sigma-k",
            QuadFormVariant::SumF => "sum-f",
            QuadFormVariant::NMinusOne => "n-minus-one",
        }
    }
}

/// Which gradient entry weights the ξ_1² penalty term in the NMinusOne
/// variant. The displayed inequality there is ambiguous; the first-entry
/// reading is the one consistent with the surrounding derivation and is the
/// default, the max-entry reading is kept testable behind this flag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhsWeight {
    #[default]
    TopEntry,
    MaxEntry,
}

/// Default γ for a variant: 1/(1+16k) for the SigmaK/SumF forms, 1/(2n) for
/// the NMinusOne form.
pub fn default_gamma(variant: QuadFormVariant, n: usize, k: usize) -> f64 {
    match variant {
        QuadFormVariant::SigmaK | QuadFormVariant::SumF => 1.0 / (1.0 + 16.0 * k as f64),
        QuadFormVariant::NMinusOne => 1.0 / (2.0 * n as f64),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadFormSpecWire {
    variant: QuadFormVariant,
    operator: OperatorSpec,
    #[serde(default)]
    delta: f64,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default = "default_slack")]
    lambda1_slack: f64,
    #[serde(default)]
    rhs_weight: RhsWeight,
}

fn default_slack() -> f64 {
    1.0
}

/// A fully parameterized concavity form: variant, operator, the δ entering
/// the SigmaK/SumF diagonal weights, the γ of the ξ_1² penalty, and the
/// additive slack in the NMinusOne denominators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "QuadFormSpecWire")]
pub struct QuadFormSpec {
    pub variant: QuadFormVariant,
    pub operator: OperatorSpec,
    pub delta: f64,
    pub gamma: f64,
    pub lambda1_slack: f64,
    pub rhs_weight: RhsWeight,
}

impl TryFrom<QuadFormSpecWire> for QuadFormSpec {
    type Error = ConcavityError;
    fn try_from(w: QuadFormSpecWire) -> Result<Self, ConcavityError> {
        let mut spec = QuadFormSpec::new(w.variant, w.operator, w.delta)?;
        if let Some(g) = w.gamma {
            spec = spec.with_gamma(g)?;
        }
        spec.lambda1_slack = w.lambda1_slack;
        spec.rhs_weight = w.rhs_weight;
        spec.validate()?;
        Ok(spec)
    }
}

impl QuadFormSpec {
    /// Builds a spec with the variant's default γ and unit denominator slack.
    pub fn new(
        variant: QuadFormVariant,
        operator: OperatorSpec,
        delta: f64,
    ) -> Result<Self, ConcavityError> {
        let gamma = default_gamma(variant, operator.n(), operator.k());
        let spec = QuadFormSpec {
            variant,
            operator,
            delta,
            gamma,
            lambda1_slack: 1.0,
            rhs_weight: RhsWeight::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Convenience constructor for the pure σ_k form (no lower-order terms).
    pub fn sigma_k(n: usize, k: usize, delta: f64) -> Result<Self, ConcavityError> {
        let op = OperatorSpec::from_roots(n, k, Vec::new())?;
        Self::new(QuadFormVariant::SigmaK, op, delta)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self, ConcavityError> {
        if !(gamma >= 0.0) {
            return Err(ConcavityError::InvalidInput(format!("γ = {gamma} must be ≥ 0")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_rhs_weight(mut self, w: RhsWeight) -> Self {
        self.rhs_weight = w;
        self
    }

    fn validate(&self) -> Result<(), ConcavityError> {
        if !(self.delta >= 0.0 && self.delta < 1.0) {
            return Err(ConcavityError::InvalidInput(format!(
                "δ = {} must lie in [0, 1)",
                self.delta
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(ConcavityError::InvalidInput("γ must be ≥ 0".to_string()));
        }
        match self.variant {
            QuadFormVariant::SigmaK => {
                if self.operator.m() != 0 {
                    return Err(ConcavityError::InvalidInput(
                        "the SigmaK variant requires an operator with no lower-order terms"
                            .to_string(),
                    ));
                }
            }
            QuadFormVariant::NMinusOne => {
                if self.operator.k() != self.operator.n() - 1 {
                    return Err(ConcavityError::InvalidInput(format!(
                        "the NMinusOne variant requires k = n−1, got k = {}, n = {}",
                        self.operator.k(),
                        self.operator.n()
                    )));
                }
                if !(self.lambda1_slack > 0.0) {
                    return Err(ConcavityError::InvalidInput(
                        "denominator slack must be positive".to_string(),
                    ));
                }
            }
            QuadFormVariant::SumF => {}
        }
        Ok(())
    }

    fn squared_gradient_coefficient(&self) -> f64 {
        match self.variant {
            QuadFormVariant::SigmaK | QuadFormVariant::SumF => 2.0,
            QuadFormVariant::NMinusOne => 1.0,
        }
    }

    fn diagonal_weight(&self, lambda: &[f64], i: usize) -> f64 {
        let l1 = lambda[0];
        match self.variant {
            QuadFormVariant::SigmaK | QuadFormVariant::SumF => (1.0 + 2.0 * self.delta) * l1,
            QuadFormVariant::NMinusOne => (l1 - lambda[i] + self.lambda1_slack) * l1,
        }
    }

    fn penalty_weight(&self, g: &[f64]) -> f64 {
        match (self.variant, self.rhs_weight) {
            (QuadFormVariant::NMinusOne, RhsWeight::MaxEntry) => {
                g.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            }
            _ => g[0],
        }
    }
}

/// Verdict of a pointwise PSD verification, including the assembled matrix
/// so a report is fully replayable.
#[derive(Debug, Clone, Serialize)]
pub struct QuadFormReport {
    pub variant: QuadFormVariant,
    pub matrix: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
    pub worst_direction: Vec<f64>,
    /// Minimum eigenvalue normalized by max(1, ‖M‖_F).
    pub margin: f64,
    pub passed: bool,
}

/// Assembles the variant's inequality as a symmetric matrix M with
/// ξᵀMξ = LHS(ξ) − RHS(ξ). Requires λ sorted descending, membership in the
/// lifted degree-k cone, and a positive operator value.
pub fn assemble_form(spec: &QuadFormSpec, lambda: &Spectrum) -> Result<Matrix, ConcavityError> {
    if !lambda.is_sorted_desc() {
        return Err(ConcavityError::InvalidInput(
            "spectrum must be sorted in descending order".to_string(),
        ));
    }
    let lam = lambda.values();
    let op = &spec.operator;
    if lam.len() != op.n() {
        return Err(ConcavityError::InvalidInput(format!(
            "spectrum has {} entries, operator dimension is {}",
            lam.len(),
            op.n()
        )));
    }
    let verdict = in_lifted_cone(lam, op.roots(), op.k());
    if !verdict.member {
        return Err(ConcavityError::NotInCone(verdict.first_failing_degree.unwrap_or(0)));
    }
    let phi = op.value(lam);
    if phi <= 0.0 {
        return Err(ConcavityError::NonpositiveOperatorValue(phi));
    }
    let g = op.grad(lam);
    let h = op.hess_spectral(lam);
    let n = op.n();
    let l1 = lam[0];
    let c = spec.squared_gradient_coefficient();
    let w = spec.penalty_weight(&g);

    let mut m = Matrix::zeros(n, n);
    for p in 0..n {
        for q in 0..n {
            if p != q {
                m.set(p, q, -h.get(p, q) / phi + c * g[p] * g[q] / (phi * phi));
            }
        }
    }
    for i in 0..n {
        let mut v = c * g[i] * g[i] / (phi * phi);
        if i > 0 {
            v += 2.0 * g[i] / (spec.diagonal_weight(lam, i) * phi);
        } else {
            v -= (1.0 + spec.gamma) * w / (l1 * phi);
        }
        m.set(i, i, v);
    }
    Ok(m)
}

/// Assembles the form, eigendecomposes it, and reports the verdict:
/// margin = min eigenvalue / max(1, ‖M‖_F), passed ⇔ margin ≥ −tol_psd.
pub fn verify_pointwise(
    spec: &QuadFormSpec,
    lambda: &Spectrum,
    tol_psd: f64,
) -> Result<QuadFormReport, ConcavityError> {
    let m = assemble_form(spec, lambda)?;
    let eigen = symmetric_eigen(&m)?;
    let n = m.rows();
    let min_eigenvalue = eigen.values[n - 1];
    let worst_direction: Vec<f64> = (0..n).map(|r| eigen.vectors.get(r, n - 1)).collect();
    let margin = min_eigenvalue / m.frobenius_norm().max(1.0);
    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        rows.push((0..n).map(|cidx| m.get(r, cidx)).collect());
    }
    Ok(QuadFormReport {
        variant: spec.variant,
        matrix: rows,
        min_eigenvalue,
        worst_direction,
        margin,
        passed: margin >= -tol_psd,
    })
}

/// Largest γ (up to the cap 8) for which the form at λ stays positive
/// semidefinite within tol_psd, found by bisection; the γ-dependence is a
/// rank-one perturbation of the (1,1) entry, so the threshold is sharp.
pub fn max_gamma(
    spec: &QuadFormSpec,
    lambda: &Spectrum,
    tol_psd: f64,
) -> Result<f64, ConcavityError> {
    const GAMMA_CAP: f64 = 8.0;
    let base = spec.clone().with_gamma(0.0)?;
    let m0 = assemble_form(&base, lambda)?;
    let lam = lambda.values();
    let phi = spec.operator.value(lam);
    let w = spec.penalty_weight(&spec.operator.grad(lam));
    let coeff = w / (lam[0] * phi);
    let passes = |gamma: f64| -> Result<bool, ConcavityError> {
        let mut m = m0.clone();
        m.add_to(0, 0, -gamma * coeff);
        let eigen = symmetric_eigen(&m)?;
        let margin = eigen.values[m.rows() - 1] / m.frobenius_norm().max(1.0);
        Ok(margin >= -tol_psd)
    };
    if !passes(0.0)? {
        return Ok(0.0);
    }
    if passes(GAMMA_CAP)? {
        return Ok(GAMMA_CAP);
    }
    let (mut lo, mut hi) = (0.0, GAMMA_CAP);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

// ---------------------------------------------------------------------------
// Region sweeps
// ---------------------------------------------------------------------------

/// Sampler and cell layout for a sweep. SigmaK/SumF cells are the product
/// deltas × levels in λ_1-normalized coordinates; NMinusOne cells are the
/// raw λ_1 values with the operator value targeted into `raw_value_range`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub deltas: Vec<f64>,
    /// Ceilings for σ_k(λ̃) with λ̃_1 = 1 (SigmaK/SumF cells).
    pub levels: Vec<f64>,
    /// Raw λ_1 values (NMinusOne cells).
    pub lambda1_values: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tol_psd: f64,
    /// None = variant default.
    pub gamma: Option<f64>,
    /// Range the appended roots are drawn from.
    pub root_range: (f64, f64),
    /// Range of the middle entries λ_2..λ_{n−1} for NMinusOne sampling.
    pub mid_range: (f64, f64),
    /// Window the raw operator value σ_k(λ̂) is steered into for NMinusOne.
    pub raw_value_range: (f64, f64),
    /// Also bisect for the per-cell supremum of admissible γ (slower).
    pub track_gamma_sup: bool,
}

impl SweepConfig {
    pub fn new(n: usize, k: usize, m: usize) -> Self {
        SweepConfig {
            n,
            k,
            m,
            deltas: vec![0.005],
            levels: vec![1e-4],
            lambda1_values: vec![1e2, 1e3],
            samples: 1000,
            seed: 7,
            tol_psd: DEFAULT_TOL_PSD,
            gamma: None,
            root_range: (0.0, 2.0),
            mid_range: (0.5, 2.5),
            raw_value_range: (0.01, 1.0),
            track_gamma_sup: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepWitness {
    /// Index of the sample within its cell (replayable from seed + index).
    pub index: usize,
    pub lambda: Vec<f64>,
    pub y: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub variant: QuadFormVariant,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub delta: f64,
    /// σ_k-level ceiling of the cell (for NMinusOne: value ceiling / λ_1^k).
    pub level: f64,
    pub lambda1: f64,
    /// Admitted (actually verified) samples.
    pub samples: usize,
    pub requested: usize,
    pub pass_fraction: f64,
    pub min_margin: f64,
    /// Per-cell infimum over samples of the bisected γ supremum, when tracked.
    pub gamma_sup: Option<f64>,
    /// The most negative failing sample, if any sample failed.
    pub witness: Option<SweepWitness>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepFrontier {
    pub variant: QuadFormVariant,
    pub seed: u64,
    pub cells: Vec<SweepCell>,
}

impl SweepFrontier {
    pub fn all_passed(&self) -> bool {
        self.cells.iter().all(|c| c.samples > 0 && c.pass_fraction == 1.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "variant,n,k,m,delta,level,samples,pass_fraction,min_margin,lambda1,requested,gamma_sup,witness_margin,witness_lambda,witness_y\n",
        );
        for c in &self.cells {
            let (wm, wl, wy) = match &c.witness {
                Some(w) => (
                    w.margin.to_string(),
                    join_semicolon(&w.lambda),
                    join_semicolon(&w.y),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            let gs = c.gamma_sup.map(|g| g.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                c.variant.as_str(),
                c.n,
                c.k,
                c.m,
                c.delta,
                c.level,
                c.samples,
                c.pass_fraction,
                c.min_margin,
                c.lambda1,
                c.requested,
                gs,
                wm,
                wl,
                wy
            ));
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            out.push_str(&format!(
                "{} n={} k={} m={} delta={} level={:.3e} lambda1={}: {}/{} admitted, pass fraction {:.4}, min margin {:.3e}{}\n",
                c.variant.as_str(),
                c.n,
                c.k,
                c.m,
                c.delta,
                c.level,
                c.lambda1,
                c.samples,
                c.requested,
                c.pass_fraction,
                c.min_margin,
                match c.gamma_sup {
                    Some(g) => format!(", gamma sup {g:.4}"),
                    None => String::new(),
                }
            ));
        }
        out
    }
}

fn join_semicolon(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

const SAMPLE_MAX_TRIES: usize = 400;

/// Scales the tail of `shape` (entries after the leading 1) by a factor
/// ρ ∈ (0, 1] so that σ_k hits `target`, using the closed form
/// σ_k(1, ρμ) = A ρ^{k−1} + B ρ^k with A = σ_{k−1}(μ), B = σ_k(μ).
fn rescale_tail_to_level(shape: &[f64], k: usize, target: f64) -> Option<Vec<f64>> {
    let tail = &shape[1..];
    let table = SigmaTable::build(tail);
    let a = table.get(k as i64 - 1);
    let b = table.get(k as i64);
    let f = |rho: f64| a * rho.powi(k as i32 - 1) + b * rho.powi(k as i32);
    let mut hi = 1.0;
    if f(hi) < target {
        // The value at ρ = 1 is too small (or negative); the interior
        // maximum of f may still clear the target when B < 0.
        if b < 0.0 {
            let peak = -(k as f64 - 1.0) * a / (k as f64 * b);
            if peak > 0.0 && peak < 1.0 && f(peak) >= target {
                hi = peak;
            } else {
                return None;
            }
        } else {
            return None;
        }
    }
    let mut lo = 1e-6_f64.min(hi / 2.0);
    let mut guard = 0;
    while f(lo) >= target {
        lo *= 0.1;
        guard += 1;
        if guard > 250 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    let mut out = shape.to_vec();
    for v in out.iter_mut().skip(1) {
        *v *= rho;
    }
    Some(out)
}

/// One admissible sample for a sweep cell, or None if `SAMPLE_MAX_TRIES`
/// rejections exhaust the attempt budget. Returns (λ, y) in raw coordinates
/// (already at the verification scale).
#[allow(clippy::too_many_arguments)]
pub(crate) fn draw_sample(
    variant: QuadFormVariant,
    config: &SweepConfig,
    delta: f64,
    level: f64,
    lambda1_raw: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Option<(Vec<f64>, Vec<f64>)> {
    use rand::Rng;
    let (n, k, m) = (config.n, config.k, config.m);
    'tries: for _ in 0..SAMPLE_MAX_TRIES {
        match variant {
            QuadFormVariant::SigmaK | QuadFormVariant::SumF => {
                // λ̃_1 = 1, middles uniform in [−δ, 1] sorted, last entry
                // uniform below the smallest middle; steer σ_k(λ̃) into
                // (0, level] by rescaling the tail if needed.
                let mut mids: Vec<f64> = (0..n.saturating_sub(2))
                    .map(|_| rng.gen_range(-delta..1.0))
                    .collect();
                mids.sort_by(|x, z| z.partial_cmp(x).unwrap());
                let floor = mids.last().copied().unwrap_or(1.0);
                let last = rng.gen_range(-delta..floor);
                let mut shape = Vec::with_capacity(n);
                shape.push(1.0);
                shape.extend_from_slice(&mids);
                shape.push(last);
                let s0 = SigmaTable::build(&shape).get(k as i64);
                let target = rng.gen_range(level / 10.0..level);
                let tilde = if s0 > 0.0 && s0 <= level {
                    shape
                } else {
                    match rescale_tail_to_level(&shape, k, target) {
                        Some(t) => t,
                        None => continue 'tries,
                    }
                };
                let achieved = SigmaTable::build(&tilde).get(k as i64);
                if !(achieved > 0.0 && achieved <= level * (1.0 + 1e-9)) {
                    continue 'tries;
                }
                if variant == QuadFormVariant::SigmaK {
                    if !in_gamma_k(&tilde, k).member {
                        continue 'tries;
                    }
                    return Some((tilde, Vec::new()));
                }
                // SumF: verify in raw coordinates with σ_k(λ) = 1 so that
                // λ_1 = level^{−1/k} plays the "large λ_1" role, keeping the
                // drawn roots fixed.
                let y: Vec<f64> =
                    (0..m).map(|_| rng.gen_range(config.root_range.0..config.root_range.1)).collect();
                let scale = achieved.powf(-1.0 / k as f64);
                let lam: Vec<f64> = tilde.iter().map(|v| v * scale).collect();
                if !in_lifted_cone(&lam, &y, k).member {
                    continue 'tries;
                }
                return Some((lam, y));
            }
            QuadFormVariant::NMinusOne => {
                // Raw coordinates: λ_1 given, middles O(1), the last entry
                // solved from the affine relation σ_k(λ̂) = v so the operator
                // value lands in the configured window. This places λ on the
                // pinched side where the last entry is negative at
                // unit scale and σ_k of the spectrum without λ_1 is ≤ 0.
                let mut mids: Vec<f64> = (0..n.saturating_sub(2))
                    .map(|_| rng.gen_range(config.mid_range.0..config.mid_range.1))
                    .collect();
                mids.sort_by(|x, z| z.partial_cmp(x).unwrap());
                let y: Vec<f64> =
                    (0..m).map(|_| rng.gen_range(config.root_range.0..config.root_range.1)).collect();
                let v = rng.gen_range(config.raw_value_range.0..config.raw_value_range.1);
                let mut head = Vec::with_capacity(n - 1 + m);
                head.push(lambda1_raw);
                head.extend_from_slice(&mids);
                head.extend_from_slice(&y);
                let table = SigmaTable::build(&head);
                let sk = table.get(k as i64);
                let sk1 = table.get(k as i64 - 1);
                if sk1 <= 0.0 {
                    continue 'tries;
                }
                let last = (v - sk) / sk1;
                let floor = mids.last().copied().unwrap_or(lambda1_raw);
                if last >= floor {
                    continue 'tries;
                }
                let mut lam = Vec::with_capacity(n);
                lam.push(lambda1_raw);
                lam.extend_from_slice(&mids);
                lam.push(last);
                if !in_lifted_cone(&lam, &y, k).member {
                    continue 'tries;
                }
                // Keep the pinched branch: σ_k of the lifted spectrum with
                // λ_1 deleted must be nonpositive.
                let mut hat = lam.clone();
                hat.extend_from_slice(&y);
                if sigma_deleted_unchecked(k as i64, &hat, &[0]) > 0.0 {
                    continue 'tries;
                }
                return Some((lam, y));
            }
        }
    }
    None
}

struct CellSpec {
    delta: f64,
    level: f64,
    lambda1: f64,
}

/// Runs a sweep: samples each cell's regime, verifies the form pointwise,
/// and aggregates pass fractions, worst margins, and failing witnesses.
/// Sample i of cell c uses an RNG stream derived from (seed, c, i), so the
/// result is identical regardless of thread count.
pub fn sweep(
    variant: QuadFormVariant,
    config: &SweepConfig,
) -> Result<SweepFrontier, ConcavityError> {
    use rand::SeedableRng;
    if variant == QuadFormVariant::SigmaK && config.m != 0 {
        return Err(ConcavityError::InvalidInput(
            "the SigmaK variant has no lower-order terms; set m = 0".to_string(),
        ));
    }
    if variant == QuadFormVariant::NMinusOne && config.k != config.n - 1 {
        return Err(ConcavityError::InvalidInput(
            "the NMinusOne variant requires k = n−1".to_string(),
        ));
    }
    let cells: Vec<CellSpec> = match variant {
        QuadFormVariant::SigmaK | QuadFormVariant::SumF => {
            let mut v = Vec::new();
            for &delta in &config.deltas {
                for &level in &config.levels {
                    v.push(CellSpec { delta, level, lambda1: 1.0 });
                }
            }
            v
        }
        QuadFormVariant::NMinusOne => config
            .lambda1_values
            .iter()
            .map(|&l1| CellSpec {
                delta: 0.0,
                level: config.raw_value_range.1 / l1.powi(config.k as i32),
                lambda1: l1,
            })
            .collect(),
    };

    let mut out_cells = Vec::with_capacity(cells.len());
    for (cell_idx, cell) in cells.iter().enumerate() {
        let results: Vec<Option<(f64, Option<f64>, Vec<f64>, Vec<f64>)>> = (0..config.samples)
            .into_par_iter()
            .map(|i| -> Option<(f64, Option<f64>, Vec<f64>, Vec<f64>)> {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(((cell_idx as u64) << 32) | i as u64);
                let (lam, y) =
                    draw_sample(variant, config, cell.delta, cell.level, cell.lambda1, &mut rng)?;
                let op = OperatorSpec::from_roots(config.n, config.k, y.clone()).ok()?;
                let mut spec = QuadFormSpec::new(variant, op, cell.delta).ok()?;
                if let Some(g) = config.gamma {
                    spec = spec.with_gamma(g).ok()?;
                }
                let spectrum = Spectrum::new(lam.clone());
                let report = verify_pointwise(&spec, &spectrum, config.tol_psd).ok()?;
                let gs = if config.track_gamma_sup {
                    max_gamma(&spec, &spectrum, config.tol_psd).ok()
                } else {
                    None
                };
                Some((report.margin, gs, lam, y))
            })
            .collect();

        let mut admitted = 0usize;
        let mut passed = 0usize;
        let mut min_margin = f64::INFINITY;
        let mut gamma_sup: Option<f64> = None;
        let mut witness: Option<SweepWitness> = None;
        for (i, r) in results.into_iter().enumerate() {
            let Some((margin, gs, lam, y)) = r else { continue };
            admitted += 1;
            if margin >= -config.tol_psd {
                passed += 1;
            } else if witness.as_ref().is_none_or(|w| margin < w.margin) {
                witness = Some(SweepWitness { index: i, lambda: lam, y, margin });
            }
            if margin < min_margin {
                min_margin = margin;
            }
            if let Some(g) = gs {
                gamma_sup = Some(match gamma_sup {
                    Some(cur) => cur.min(g),
                    None => g,
                });
            }
        }
        out_cells.push(SweepCell {
            variant,
            n: config.n,
            k: config.k,
            m: config.m,
            delta: cell.delta,
            level: cell.level,
            lambda1: cell.lambda1,
            samples: admitted,
            requested: config.samples,
            pass_fraction: if admitted > 0 { passed as f64 / admitted as f64 } else { 0.0 },
            min_margin: if admitted > 0 { min_margin } else { f64::NAN },
            gamma_sup,
            witness,
        });
    }
    Ok(SweepFrontier { variant, seed: config.seed, cells: out_cells })
}

// ---------------------------------------------------------------------------
// Andrews-type matrix inequality
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AndrewsReport {
    /// −D²F(S)[T, T].
    pub lhs: f64,
    /// −Σ_{p≠q} H_pq T̃_pp T̃_qq + 2 Σ_{p>1} (F_p − F_1)/(λ_1 − λ_p) · T̃_1p².
    pub rhs: f64,
    pub gap: f64,
    /// max(1, |lhs|, |rhs|) — the scale a gap tolerance should be relative to.
    pub scale: f64,
    /// Whether the argument's spectrum lies in the lifted degree-k cone
    /// (the inequality gap ≥ 0 is asserted only there).
    pub admissible: bool,
}

/// Evaluates both sides of the matrix-inequality comparison at S in
/// direction T. The right-hand side uses literal divided differences, which
/// is why pairwise distinct eigenvalues are required.
pub fn andrews_gap(
    op: &OperatorSpec,
    s: &Matrix,
    t: &Matrix,
) -> Result<AndrewsReport, ConcavityError> {
    let md = op.matrix_derivatives(s)?;
    let lam = &md.eigenvalues;
    let scale_l = lam.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut min_gap = f64::INFINITY;
    for p in 0..lam.len() {
        for q in (p + 1)..lam.len() {
            min_gap = min_gap.min((lam[p] - lam[q]).abs());
        }
    }
    if min_gap < EIGEN_GAP_FLOOR * scale_l {
        return Err(ConcavityError::DegenerateSpectrum(min_gap));
    }

    let tt = t.conjugate(&md.eigenvectors);
    let n = op.n();
    let lhs = -op.second_derivative_action(&md, t);
    let mut rhs = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                rhs -= md.spectral_hessian.get(p, q) * tt.get(p, p) * tt.get(q, q);
            }
        }
    }
    let f = &md.spectral_gradient;
    for p in 1..n {
        rhs += 2.0 * (f[p] - f[0]) / (lam[0] - lam[p]) * tt.get(0, p) * tt.get(0, p);
    }
    let gap = lhs - rhs;
    let scale = 1.0_f64.max(lhs.abs()).max(rhs.abs());
    let admissible = in_lifted_cone(lam, op.roots(), op.k()).member;
    Ok(AndrewsReport { lhs, rhs, gap, scale, admissible })
}

// ---------------------------------------------------------------------------
// Trace identities and lower bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct TraceBoundsReport {
    /// Σ F_i λ_i.
    pub sum_f_lambda: f64,
    /// k F(λ).
    pub k_times_f: f64,
    /// k F − Σ F_i λ_i (nonnegative under either condition).
    pub slack: f64,
    /// The same slack computed independently as Σ_j y_j σ_{k−1; y_j}(λ̂).
    pub slack_identity: f64,
    /// Σ F_i (trace of the linearization).
    pub sum_f: f64,
    /// Σ F_i recomputed from the per-degree trace formula
    /// (n−k+1)σ_{k−1}(λ) + Σ_r a_r (n−k+r+1) σ_{k−r−1}(λ).
    pub sum_f_identity: f64,
    /// Σ F_i / λ_1^{1/(k−1)} — the quantity bounded below by a positive
    /// constant in the trace lower bound.
    pub lambda1_ratio: f64,
    /// σ_{k−1}(λ̂) / C(N, k−1) with N = n+m.
    pub maclaurin_lhs: f64,
    /// (σ_1(λ̂)/N)^{1/(k−1)} (σ_k(λ̂)/C(N,k))^{(k−2)/(k−1)} — the mean-power
    /// lower bound the previous field must dominate.
    pub maclaurin_rhs: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Computes the trace identities and lower-bound ratios at λ. Requires the
/// chosen admissibility condition and a positive operator value.
pub fn trace_bounds(
    op: &OperatorSpec,
    lambda: &Spectrum,
    which: Condition,
) -> Result<TraceBoundsReport, ConcavityError> {
    let lam = lambda.values();
    if lam.len() != op.n() {
        return Err(ConcavityError::InvalidInput(format!(
            "spectrum has {} entries, operator dimension is {}",
            lam.len(),
            op.n()
        )));
    }
    let cr = check_condition(lam, op.roots(), op.coefficients(), op.k(), which);
    if !cr.holds {
        return Err(ConcavityError::ConditionViolated(which));
    }
    let f = op.value(lam);
    if f <= 0.0 {
        return Err(ConcavityError::NonpositiveOperatorValue(f));
    }
    let (n, k, m) = (op.n(), op.k(), op.m());
    let grad_full = op.grad_lifted(lam);
    let sum_f_lambda: f64 = (0..n).map(|i| grad_full[i] * lam[i]).sum();
    let sum_f: f64 = grad_full[..n].iter().sum();
    let k_times_f = k as f64 * f;
    let slack = k_times_f - sum_f_lambda;
    let slack_identity: f64 =
        (0..m).map(|j| op.roots()[j] * grad_full[n + j]).sum();

    let table = SigmaTable::build(lam);
    let mut sum_f_identity = (n - k + 1) as f64 * table.get(k as i64 - 1);
    for (idx, &ar) in op.coefficients().iter().enumerate() {
        let r = idx + 1;
        sum_f_identity += ar * (n - k + r + 1) as f64 * table.get(k as i64 - r as i64 - 1);
    }

    let hat = op.lifted_spectrum(lam);
    let hat_table = SigmaTable::build(&hat);
    let big_n = n + m;
    let maclaurin_lhs = hat_table.get(k as i64 - 1) / binomial(big_n, k - 1);
    let p1 = hat_table.get(1) / big_n as f64;
    let pk = hat_table.get(k as i64) / binomial(big_n, k);
    let maclaurin_rhs = if k == 2 {
        p1
    } else {
        p1.powf(1.0 / (k as f64 - 1.0)) * pk.powf((k as f64 - 2.0) / (k as f64 - 1.0))
    };

    Ok(TraceBoundsReport {
        sum_f_lambda,
        k_times_f,
        slack,
        slack_identity,
        sum_f,
        sum_f_identity,
        lambda1_ratio: sum_f / lam[0].powf(1.0 / (k as f64 - 1.0)),
        maclaurin_lhs,
        maclaurin_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{rel_discrepancy, sigma_deleted, sigma_grad, sigma_hess};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Second directional derivative of t ↦ σ_k/σ_{k−1} (x + t·dir) at
    /// t = 0, from the quotient rule with the exact σ gradient and Hessian.
    fn quotient_second_directional(k: i64, x: &[f64], dir: &[f64]) -> f64 {
        let second = |deg: i64| -> f64 {
            let h = sigma_hess(deg, x);
            let mut acc = 0.0;
            for p in 0..x.len() {
                for q in 0..x.len() {
                    acc += h.get(p, q) * dir[p] * dir[q];
                }
            }
            acc
        };
        let first = |deg: i64| -> f64 {
            sigma_grad(deg, x).iter().zip(dir).map(|(g, d)| g * d).sum()
        };
        let table = SigmaTable::build(x);
        let (a, b) = (table.get(k), table.get(k - 1));
        let (ap, bp) = (first(k), first(k - 1));
        let (app, bpp) = (second(k), second(k - 1));
        (app * b * b - a * bpp * b - 2.0 * ap * bp * b + 2.0 * a * bp * bp) / (b * b * b)
    }

    fn sample_gamma_k(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        loop {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..4.0)).collect();
            x.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if in_gamma_k(&x, k).member {
                return x;
            }
        }
    }

    fn spec_for(
        variant: QuadFormVariant,
        n: usize,
        k: usize,
        y: Vec<f64>,
        delta: f64,
    ) -> QuadFormSpec {
        let op = OperatorSpec::from_roots(n, k, y).unwrap();
        QuadFormSpec::new(variant, op, delta).unwrap()
    }

    /// Direct scalar evaluation of LHS(ξ) − RHS(ξ) straight from the σ
    /// deletions, bypassing the matrix assembly.
    fn direct_quadratic(spec: &QuadFormSpec, lam: &[f64], xi: &[f64]) -> f64 {
        let op = &spec.operator;
        let k = op.k() as i64;
        let mut hat = lam.to_vec();
        hat.extend_from_slice(op.roots());
        let phi = SigmaTable::build(&hat).get(k);
        let n = lam.len();
        let g: Vec<f64> =
            (0..n).map(|i| sigma_deleted(k - 1, &hat, &[i]).unwrap()).collect();
        let c = spec.squared_gradient_coefficient();
        let mut total = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    total -= sigma_deleted(k - 2, &hat, &[p, q]).unwrap() * xi[p] * xi[q] / phi;
                }
            }
        }
        let dot: f64 = g.iter().zip(xi).map(|(a, b)| a * b).sum();
        total += c * dot * dot / (phi * phi);
        for i in 1..n {
            total += 2.0 * g[i] * xi[i] * xi[i] / (spec.diagonal_weight(lam, i) * phi);
        }
        total -= (1.0 + spec.gamma) * spec.penalty_weight(&g) * xi[0] * xi[0] / (lam[0] * phi);
        total
    }

    #[test]
    fn assembled_matrix_matches_scalar_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let cases = [
            (QuadFormVariant::SigmaK, 4usize, 2usize, 0usize, 1.0),
            (QuadFormVariant::SigmaK, 5, 3, 0, 1.0),
            (QuadFormVariant::SumF, 4, 2, 1, 1.0),
            (QuadFormVariant::SumF, 5, 3, 2, 1.0),
            (QuadFormVariant::NMinusOne, 4, 3, 1, 100.0),
            (QuadFormVariant::NMinusOne, 5, 4, 0, 100.0),
        ];
        let mut total = 0;
        for &(variant, n, k, m, l1) in &cases {
            let mut cfg = SweepConfig::new(n, k, m);
            cfg.root_range = (0.0, 2.0);
            for _ in 0..180 {
                let Some((lam, y)) =
                    draw_sample(variant, &cfg, 0.01, 1e-3, l1, &mut rng)
                else {
                    continue;
                };
                let spec = spec_for(variant, n, k, y, 0.01);
                let m_assembled = assemble_form(&spec, &Spectrum::new(lam.clone())).unwrap();
                for _ in 0..20 {
                    let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let via_matrix = m_assembled.quadratic(&xi);
                    let direct = direct_quadratic(&spec, &lam, &xi);
                    assert!(
                        rel_discrepancy(via_matrix, direct) < 1e-9,
                        "{variant:?}: matrix {via_matrix} vs direct {direct}"
                    );
                }
                total += 1;
            }
        }
        assert!(total >= 1000, "only {total} admissible probe points drawn");
    }

    #[test]
    fn scaling_law_degree_minus_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..50 {
            let n = rng.gen_range(3..=6usize);
            let k = rng.gen_range(2..=n);
            let lam = sample_gamma_k(n, k, &mut rng);
            let spec = QuadFormSpec::sigma_k(n, k, 0.01).unwrap();
            let m1 = assemble_form(&spec, &Spectrum::new(lam.clone())).unwrap();
            let scaled: Vec<f64> = lam.iter().map(|v| 10.0 * v).collect();
            let m10 = assemble_form(&spec, &Spectrum::new(scaled)).unwrap();
            for p in 0..n {
                for q in 0..n {
                    let expect = m1.get(p, q) / 100.0;
                    assert!(
                        (m10.get(p, q) - expect).abs() <= 1e-12 * expect.abs().max(1e-300),
                        "entry ({p},{q}): {} vs {}",
                        m10.get(p, q),
                        expect
                    );
                }
            }
        }
    }

    #[test]
    fn sum_f_with_no_roots_reduces_to_sigma_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for _ in 0..50 {
            let n = rng.gen_range(3..=6usize);
            let k = rng.gen_range(2..=n);
            let lam = Spectrum::new(sample_gamma_k(n, k, &mut rng));
            let a = assemble_form(&QuadFormSpec::sigma_k(n, k, 0.02).unwrap(), &lam).unwrap();
            let op = OperatorSpec::from_roots(n, k, vec![]).unwrap();
            let b = assemble_form(
                &QuadFormSpec::new(QuadFormVariant::SumF, op, 0.02).unwrap(),
                &lam,
            )
            .unwrap();
            for p in 0..n {
                for q in 0..n {
                    assert!((a.get(p, q) - b.get(p, q)).abs() <= 1e-12 * a.get(p, q).abs());
                }
            }
        }
    }

    #[test]
    fn frozen_pointwise_example_passes() {
        let spec = QuadFormSpec::sigma_k(3, 2, 0.01).unwrap();
        assert!((spec.gamma - 1.0 / 33.0).abs() < 1e-15);
        let report =
            verify_pointwise(&spec, &Spectrum::new(vec![100.0, 5.0, 1.0]), 1e-9).unwrap();
        assert!(report.passed, "margin {}", report.margin);
        assert!(report.margin >= -1e-9);
        let sym_err: f64 = {
            let m = &report.matrix;
            let mut worst = 0.0_f64;
            for p in 0..3 {
                for q in 0..3 {
                    worst = worst.max((m[p][q] - m[q][p]).abs());
                }
            }
            worst
        };
        assert!(sym_err <= 1e-12);
    }

    #[test]
    fn default_gamma_values() {
        assert!((default_gamma(QuadFormVariant::SigmaK, 4, 2) - 1.0 / 33.0).abs() < 1e-15);
        assert!((default_gamma(QuadFormVariant::SumF, 5, 3) - 1.0 / 49.0).abs() < 1e-15);
        assert!((default_gamma(QuadFormVariant::NMinusOne, 4, 3) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn input_validation_errors() {
        let spec = QuadFormSpec::sigma_k(3, 2, 0.01).unwrap();
        assert!(matches!(
            assemble_form(&spec, &Spectrum::new(vec![1.0, 2.0, 3.0])),
            Err(ConcavityError::InvalidInput(_))
        ));
        assert!(matches!(
            assemble_form(&spec, &Spectrum::new(vec![1.0, -2.0, -3.0])),
            Err(ConcavityError::NotInCone(_))
        ));
        assert!(QuadFormSpec::sigma_k(3, 2, 1.5).is_err());
        let op = OperatorSpec::from_roots(4, 3, vec![1.0]).unwrap();
        assert!(QuadFormSpec::new(QuadFormVariant::SigmaK, op.clone(), 0.0).is_err());
        assert!(QuadFormSpec::new(QuadFormVariant::NMinusOne, op, 0.0).is_ok());
        let bad = OperatorSpec::from_roots(4, 2, vec![1.0]).unwrap();
        assert!(QuadFormSpec::new(QuadFormVariant::NMinusOne, bad, 0.0).is_err());
    }

    #[test]
    fn spec_deserializes_with_defaults() {
        let spec: QuadFormSpec = serde_json::from_str(
            r#"{"variant":"sigma-k","operator":{"n":4,"k":2},"delta":0.005}"#,
        )
        .unwrap();
        assert!((spec.gamma - 1.0 / 33.0).abs() < 1e-15);
        assert_eq!(spec.rhs_weight, RhsWeight::TopEntry);
        assert!(serde_json::from_str::<QuadFormSpec>(
            r#"{"variant":"sigma-k","operator":{"n":4,"k":2},"delta":0.005,"bogus":1}"#
        )
        .is_err());
    }

    #[test]
    fn sweep_sigma_k_regime_smoke() {
        let mut config = SweepConfig::new(4, 2, 0);
        config.samples = 300;
        let frontier = sweep(QuadFormVariant::SigmaK, &config).unwrap();
        assert_eq!(frontier.cells.len(), 1);
        let cell = &frontier.cells[0];
        assert!(cell.samples >= 250, "only {} admitted", cell.samples);
        assert_eq!(cell.pass_fraction, 1.0, "witness: {:?}", cell.witness);
        assert!(cell.min_margin >= -1e-8);
    }

    #[test]
    fn sweep_sum_f_regime_smoke() {
        let mut config = SweepConfig::new(4, 2, 1);
        config.samples = 200;
        let frontier = sweep(QuadFormVariant::SumF, &config).unwrap();
        let cell = &frontier.cells[0];
        assert!(cell.samples >= 150, "only {} admitted", cell.samples);
        assert_eq!(cell.pass_fraction, 1.0, "witness: {:?}", cell.witness);
        assert!(cell.min_margin >= -1e-8);
    }

    #[test]
    fn sweep_n_minus_one_regime_smoke() {
        let mut config = SweepConfig::new(4, 3, 1);
        config.samples = 200;
        config.lambda1_values = vec![100.0];
        let frontier = sweep(QuadFormVariant::NMinusOne, &config).unwrap();
        let cell = &frontier.cells[0];
        assert!(cell.samples >= 150, "only {} admitted", cell.samples);
        assert_eq!(cell.pass_fraction, 1.0, "witness: {:?}", cell.witness);
        assert!(cell.min_margin >= -1e-8);
    }

    #[test]
    fn sweep_is_deterministic_across_thread_counts() {
        let mut config = SweepConfig::new(4, 2, 1);
        config.samples = 120;
        let baseline = sweep(QuadFormVariant::SumF, &config).unwrap().to_csv();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sweep(QuadFormVariant::SumF, &config).unwrap().to_csv());
        assert_eq!(baseline, single);
        let again = sweep(QuadFormVariant::SumF, &config).unwrap().to_csv();
        assert_eq!(baseline, again);
    }

    #[test]
    fn failing_sweep_records_replayable_witness() {
        // γ = 3 is far beyond anything the inequality supports, forcing
        // failures whose witnesses must replay to the recorded margin. The
        // level is O(1) so the violation is not drowned by the form's norm.
        let mut config = SweepConfig::new(4, 2, 0);
        config.samples = 150;
        config.levels = vec![1.0];
        config.gamma = Some(3.0);
        let frontier = sweep(QuadFormVariant::SigmaK, &config).unwrap();
        let cell = &frontier.cells[0];
        assert!(cell.pass_fraction < 1.0);
        let w = cell.witness.as_ref().expect("failing cell must carry a witness");
        assert_eq!(w.margin, cell.min_margin);
        let op = OperatorSpec::from_roots(4, 2, w.y.clone()).unwrap();
        let spec = QuadFormSpec::new(QuadFormVariant::SigmaK, op, cell.delta)
            .unwrap()
            .with_gamma(3.0)
            .unwrap();
        let replay =
            verify_pointwise(&spec, &Spectrum::new(w.lambda.clone()), config.tol_psd).unwrap();
        assert!((replay.margin - w.margin).abs() <= 1e-12 * w.margin.abs());
        assert!(!replay.passed);
    }

    #[test]
    fn single_sample_sweep_matches_verify_pointwise() {
        let mut config = SweepConfig::new(4, 2, 0);
        config.samples = 1;
        let frontier = sweep(QuadFormVariant::SigmaK, &config).unwrap();
        let cell = &frontier.cells[0];
        assert_eq!(cell.samples, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(0);
        let (lam, _) =
            draw_sample(QuadFormVariant::SigmaK, &config, 0.005, 1e-4, 1.0, &mut rng).unwrap();
        let spec = QuadFormSpec::sigma_k(4, 2, 0.005).unwrap();
        let report = verify_pointwise(&spec, &Spectrum::new(lam), config.tol_psd).unwrap();
        assert_eq!(report.margin, cell.min_margin);
    }

    #[test]
    fn gamma_supremum_exceeds_default_in_regime() {
        let mut config = SweepConfig::new(4, 2, 0);
        config.samples = 60;
        config.track_gamma_sup = true;
        let frontier = sweep(QuadFormVariant::SigmaK, &config).unwrap();
        let cell = &frontier.cells[0];
        let sup = cell.gamma_sup.expect("tracking enabled");
        assert!(sup >= 1.0 / 33.0, "γ sup {sup} below the default");
    }

    #[test]
    fn unpinched_branch_counterexample_for_n_minus_one() {
        // On the branch where λ_n is not pinched toward −λ_1 the literal
        // NMinusOne inequality fails: along e_1 it would need
        // λ_1 F_1 ≥ (1+γ) F, but this family drives λ_1 F_1 / F to 1 from
        // below, so the (1,1) entry stays ≈ −γ/λ_1² < 0 for all λ_1.
        for lambda1 in [1e2, 1e3] {
            let lam = vec![lambda1, 0.1, 0.1, 0.0];
            let op = OperatorSpec::from_roots(4, 3, vec![2.0]).unwrap();
            // Not pinched: the spectrum without λ_1 still has positive σ_k.
            let mut hat = lam.clone();
            hat.extend_from_slice(op.roots());
            assert!(sigma_deleted(3, &hat, &[0]).unwrap() > 0.0);
            let spec = QuadFormSpec::new(QuadFormVariant::NMinusOne, op, 0.0).unwrap();
            let m = assemble_form(&spec, &Spectrum::new(lam.clone())).unwrap();
            let top = m.get(0, 0) * lambda1 * lambda1;
            assert!(top < -0.05, "λ1={lambda1}: scaled (1,1) entry {top}");
            let report =
                verify_pointwise(&spec, &Spectrum::new(lam), DEFAULT_TOL_PSD).unwrap();
            assert!(report.min_eigenvalue < 0.0);
            // At moderate λ_1 the violation also exceeds the margin
            // tolerance (at larger λ_1 it shrinks like λ_1⁻² against the
            // form's norm while staying strictly negative).
            if lambda1 <= 1e2 {
                assert!(!report.passed, "λ1={lambda1}: margin {}", report.margin);
                assert!(report.margin < -1e-7);
            }
        }
    }

    #[test]
    fn andrews_gap_vanishes_for_diagonal_directions() {
        let op = OperatorSpec::from_roots(3, 2, vec![1.0]).unwrap();
        let s = Matrix::from_diagonal(&[3.0, 2.0, 1.0]);
        let t = Matrix::from_diagonal(&[0.7, -0.4, 1.3]);
        let r = andrews_gap(&op, &s, &t).unwrap();
        assert!(r.gap.abs() <= 1e-12 * r.scale, "gap {}", r.gap);
        assert!(r.admissible);
    }

    #[test]
    fn andrews_gap_sign_flip_invariance_and_degeneracy() {
        let op = OperatorSpec::from_roots(3, 2, vec![]).unwrap();
        let s = Matrix::from_diagonal(&[3.0, 2.0, 1.0]);
        let mut t = Matrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                t.set(i, j, ((i * 3 + j) as f64 * 0.37).sin());
            }
        }
        let mut ts = t.clone();
        for i in 0..3 {
            for j in i..3 {
                let v = 0.5 * (t.get(i, j) + t.get(j, i));
                ts.set(i, j, v);
                ts.set(j, i, v);
            }
        }
        let r1 = andrews_gap(&op, &s, &ts).unwrap();
        let r2 = andrews_gap(&op, &s, &ts.scale(-1.0)).unwrap();
        assert_eq!(r1.gap, r2.gap);
        assert!(matches!(
            andrews_gap(&op, &Matrix::identity(3), &ts),
            Err(ConcavityError::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn andrews_gap_nonnegative_with_fd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let mut checked = 0;
        while checked < 200 {
            let n = rng.gen_range(2..=5usize);
            let k = rng.gen_range(2..=n);
            let m = rng.gen_range(0..k);
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0)).collect();
            let op = OperatorSpec::from_roots(n, k, y).unwrap();
            let lam = sample_gamma_k(n, k, &mut rng);
            // Distinct eigenvalues with an admissible spectrum.
            let s = Matrix::from_diagonal(&lam);
            let mut t = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-1.0..1.0);
                    t.set(i, j, v);
                    t.set(j, i, v);
                }
            }
            let r = match andrews_gap(&op, &s, &t) {
                Ok(r) => r,
                Err(ConcavityError::DegenerateSpectrum(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            assert!(r.admissible);
            assert!(r.gap >= -1e-8 * r.scale, "gap {} at scale {}", r.gap, r.scale);

            // Independent finite-difference evaluation of the left side.
            let h = 1e-3 * (1.0 + s.max_abs());
            let eval = |eps: f64| {
                let mut arg = s.clone();
                for i in 0..n {
                    for j in 0..n {
                        arg.add_to(i, j, eps * t.get(i, j));
                    }
                }
                op.matrix_derivatives(&arg).unwrap().value
            };
            let second = (-eval(2.0 * h) + 16.0 * eval(h) - 30.0 * eval(0.0) + 16.0 * eval(-h)
                - eval(-2.0 * h))
                / (12.0 * h * h);
            assert!(
                (-second - r.lhs).abs() <= 1e-6 * r.scale,
                "fd lhs {} vs analytic {}",
                -second,
                r.lhs
            );
            checked += 1;
        }
    }

    #[test]
    fn andrews_gap_equals_cross_term_identity() {
        // lhs − rhs must equal 2 Σ_{1<p<q} H_pq T̃_pq² exactly.
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let mut checked = 0;
        while checked < 100 {
            let n = rng.gen_range(3..=5usize);
            let k = rng.gen_range(2..=n);
            let op = OperatorSpec::from_roots(n, k, vec![]).unwrap();
            let lam = sample_gamma_k(n, k, &mut rng);
            let s = Matrix::from_diagonal(&lam);
            let mut t = Matrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rng.gen_range(-1.0..1.0);
                    t.set(i, j, v);
                    t.set(j, i, v);
                }
            }
            let r = match andrews_gap(&op, &s, &t) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let md = op.matrix_derivatives(&s).unwrap();
            let tt = t.conjugate(&md.eigenvectors);
            let mut expected = 0.0;
            for p in 1..n {
                for q in (p + 1)..n {
                    expected +=
                        2.0 * md.spectral_hessian.get(p, q) * tt.get(p, q) * tt.get(p, q);
                }
            }
            assert!(
                (r.gap - expected).abs() <= 1e-10 * r.scale,
                "gap {} vs cross-term sum {}",
                r.gap,
                expected
            );
            checked += 1;
        }
    }

    #[test]
    fn trace_bounds_frozen_example() {
        let op = OperatorSpec::from_roots(2, 2, vec![1.0]).unwrap();
        let r = trace_bounds(&op, &Spectrum::new(vec![3.0, 2.0]), Condition::One).unwrap();
        assert_eq!(r.sum_f_lambda, 17.0);
        assert_eq!(r.k_times_f, 22.0);
        assert_eq!(r.slack, 5.0);
        assert_eq!(r.slack_identity, 5.0);
    }

    #[test]
    fn trace_equality_without_roots() {
        let op = OperatorSpec::from_roots(4, 3, vec![]).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let lam = Spectrum::new(vec![t; 4]);
            let r = trace_bounds(&op, &lam, Condition::Two).unwrap();
            assert!(rel_discrepancy(r.sum_f_lambda, r.k_times_f) < 1e-14);
            assert_eq!(r.slack_identity, 0.0);
        }
    }

    #[test]
    fn trace_identities_and_slack_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let mut checked = 0;
        while checked < 1500 {
            let n = rng.gen_range(2..=6usize);
            let k = rng.gen_range(2..=n);
            let m = rng.gen_range(0..k);
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0)).collect();
            let op = OperatorSpec::from_roots(n, k, y.clone()).unwrap();
            let mut lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..4.0)).collect();
            lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
            if !in_lifted_cone(&lam, &y, k).member {
                continue;
            }
            let r = match trace_bounds(&op, &Spectrum::new(lam), Condition::One) {
                Ok(r) => r,
                Err(_) => continue,
            };
            let scale = r.k_times_f.abs().max(1.0);
            assert!(r.slack >= -1e-12 * scale, "slack {}", r.slack);
            assert!(
                rel_discrepancy(r.slack + r.sum_f_lambda, r.slack_identity + r.sum_f_lambda)
                    < 1e-10
            );
            assert!(rel_discrepancy(r.sum_f, r.sum_f_identity) < 1e-10);
            assert!(
                r.maclaurin_lhs >= r.maclaurin_rhs * (1.0 - 1e-12),
                "mean-power bound violated: {} < {}",
                r.maclaurin_lhs,
                r.maclaurin_rhs
            );
            checked += 1;
        }
    }

    #[test]
    fn trace_condition_violation_is_reported() {
        let op = OperatorSpec::from_roots(3, 2, vec![1.0]).unwrap();
        assert!(matches!(
            trace_bounds(&op, &Spectrum::new(vec![1.0, -5.0, -6.0]), Condition::One),
            Err(ConcavityError::ConditionViolated(Condition::One))
        ));
    }

    #[test]
    fn trace_ratio_bounded_below_at_unit_operator_value() {
        // Pure σ_k normalized to σ_k(λ) = 1 with λ_1 spread over [10, 10⁴]:
        // Σ F_i / λ_1^{1/(k−1)} stays above a positive constant.
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        for &(n, k) in &[(4usize, 2usize), (5, 3), (6, 4)] {
            let op = OperatorSpec::from_roots(n, k, vec![]).unwrap();
            let config = SweepConfig::new(n, k, 0);
            let mut min_ratio = f64::INFINITY;
            let mut seen = 0;
            while seen < 300 {
                let l1_target = 10.0_f64.powf(rng.gen_range(1.0..4.0));
                let level = l1_target.powi(-(k as i32));
                let Some((tilde, _)) = draw_sample(
                    QuadFormVariant::SigmaK,
                    &config,
                    0.005,
                    level,
                    1.0,
                    &mut rng,
                ) else {
                    continue;
                };
                let achieved = SigmaTable::build(&tilde).get(k as i64);
                let s = achieved.powf(-1.0 / k as f64);
                let lam: Vec<f64> = tilde.iter().map(|v| v * s).collect();
                let r = match trace_bounds(&op, &Spectrum::new(lam), Condition::Two) {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                min_ratio = min_ratio.min(r.lambda1_ratio);
                seen += 1;
            }
            assert!(
                min_ratio > 0.1,
                "(n,k)=({n},{k}): empirical trace-ratio constant {min_ratio} too small"
            );
        }
    }

    #[test]
    fn quotient_curvature_spot_check_with_projections() {
        // −∂²_ξ (σ_2/σ_1)(λ|I) ≥ |[ξ]_I^⊥|²/σ_1(λ|I) on Γ_k with |I| = k−2,
        // with constant exactly 1.
        let mut rng = ChaCha8Rng::seed_from_u64(57);
        let mut min_ratio = f64::INFINITY;
        let mut checked = 0;
        while checked < 800 {
            let n = rng.gen_range(3..=6usize);
            let k = rng.gen_range(2..=n.min(5));
            if n - (k - 2) < 2 {
                continue;
            }
            let lam = sample_gamma_k(n, k, &mut rng);
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..(k - 2) {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            let dropped = &idx[..(k - 2)];
            let short: Vec<f64> = (0..n)
                .filter(|i| !dropped.contains(i))
                .map(|i| lam[i])
                .collect();
            let xi_short: Vec<f64> =
                (0..short.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = -quotient_second_directional(2, &short, &xi_short);
            let dot: f64 = xi_short.iter().zip(&short).map(|(a, b)| a * b).sum();
            let norm2: f64 = short.iter().map(|v| v * v).sum();
            let perp2: f64 = xi_short
                .iter()
                .zip(&short)
                .map(|(x, l)| {
                    let p = x - dot / norm2 * l;
                    p * p
                })
                .sum();
            let s1: f64 = short.iter().sum();
            let rhs = perp2 / s1;
            assert!(lhs >= -1e-12, "concavity violated: {lhs}");
            if rhs > 1e-12 {
                min_ratio = min_ratio.min(lhs / rhs);
            }
            checked += 1;
        }
        assert!(
            min_ratio >= 1.0 - 1e-9,
            "empirical constant {min_ratio} fell below the stated 1"
        );
    }

    #[test]
    fn quotient_curvature_recursive_spot_check() {
        // −∂²_ξ q_{k−1;i1} ≥ −Σ_{i≠i1} λ_i² ∂²_ξ q_{k−2;i1,i} /
        //   ((k−1)(q_{k−1;i1,i} + λ_i)²) on Γ_k.
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let mut min_ratio = f64::INFINITY;
        let mut checked = 0;
        while checked < 500 {
            let n = rng.gen_range(4..=6usize);
            let k = rng.gen_range(3..=n);
            let lam = sample_gamma_k(n, k, &mut rng);
            let i1 = rng.gen_range(0..n);
            let short: Vec<f64> =
                (0..n).filter(|&i| i != i1).map(|i| lam[i]).collect();
            let xi: Vec<f64> = (0..short.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = -quotient_second_directional(k as i64 - 1, &short, &xi);
            let mut rhs = 0.0;
            let mut skip = false;
            for (pos, &li) in short.iter().enumerate() {
                let shorter: Vec<f64> = short
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| *p != pos)
                    .map(|(_, &v)| v)
                    .collect();
                let xi_shorter: Vec<f64> = xi
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| *p != pos)
                    .map(|(_, &v)| v)
                    .collect();
                let t = SigmaTable::build(&shorter);
                let (num, den) = (t.get(k as i64 - 1), t.get(k as i64 - 2));
                if den.abs() < 1e-10 {
                    skip = true;
                    break;
                }
                let q = num / den;
                if (q + li).abs() < 1e-6 {
                    skip = true;
                    break;
                }
                let dd = quotient_second_directional(k as i64 - 2, &shorter, &xi_shorter);
                rhs -= li * li * dd / ((k as f64 - 1.0) * (q + li) * (q + li));
            }
            if skip {
                continue;
            }
            assert!(lhs >= -1e-12, "concavity violated: {lhs}");
            if rhs.abs() > 1e-10 {
                min_ratio = min_ratio.min(lhs / rhs);
            }
            checked += 1;
        }
        assert!(min_ratio > 0.0, "empirical constant {min_ratio} not positive");
    }

    #[test]
    fn quotient_decomposition_spot_check() {
        // With γ_1 = 0 and the tail of γ orthogonal to the tail of λ:
        // −σ_{k−1} ∂²_γ q_k ≥ C [ Σ_{j<k} (Π_{i<k} λ_i) λ_k² γ_j²/λ_j³
        //                        + (Π_{i≤k−2} λ_i) Σ_{p≥k} γ_p² ] for some C > 0.
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let mut min_ratio = f64::INFINITY;
        let mut checked = 0;
        while checked < 500 {
            let n = rng.gen_range(3..=6usize);
            let k = rng.gen_range(2..=n);
            let lam = sample_gamma_k(n, k, &mut rng);
            let mut gamma: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            gamma[0] = 0.0;
            let tail_dot: f64 =
                (k - 1..n).map(|i| gamma[i] * lam[i]).sum();
            let tail_norm2: f64 = (k - 1..n).map(|i| lam[i] * lam[i]).sum();
            if tail_norm2 < 1e-12 {
                continue;
            }
            for i in (k - 1)..n {
                gamma[i] -= tail_dot / tail_norm2 * lam[i];
            }
            let table = SigmaTable::build(&lam);
            let lhs = -table.get(k as i64 - 1) * quotient_second_directional(k as i64, &lam, &gamma);
            let head_prod: f64 = lam[..k - 1].iter().product();
            let shorter_prod: f64 = lam[..k.saturating_sub(2)].iter().product();
            let mut rhs = 0.0;
            for j in 1..(k - 1) {
                rhs += head_prod * lam[k - 1] * lam[k - 1] * gamma[j] * gamma[j]
                    / (lam[j] * lam[j] * lam[j]);
            }
            rhs += shorter_prod * (k - 1..n).map(|p| gamma[p] * gamma[p]).sum::<f64>();
            if rhs < 1e-10 {
                continue;
            }
            assert!(lhs >= -1e-10 * rhs, "sign violated: lhs {lhs}");
            min_ratio = min_ratio.min(lhs / rhs);
            checked += 1;
        }
        assert!(min_ratio > 0.0, "empirical constant {min_ratio} not positive");
    }
}
