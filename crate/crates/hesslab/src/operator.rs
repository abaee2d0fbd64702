//! The sum-type operator F(λ) = σ_k(λ) + Σ_{r=1}^m a_r σ_{k−r}(λ).
//!
//! The coefficients are constrained by requiring the auxiliary polynomial
//! P(t) = t^m − a_1 t^{m−1} + a_2 t^{m−2} − … + (−1)^m a_m to have only real
//! roots y_1, …, y_m, i.e. a_r = e_r(y). Under that hypothesis the operator
//! is a single elementary symmetric function in disguise:
//!
//!   F(λ) = σ_k(λ_1, …, λ_n, y_1, …, y_m)   (degree k in dimension n + m),
//!
//! and all derivative formulas reduce to deletions of the lifted spectrum
//! λ̂ = (λ, y). The module keeps both evaluation routes — the literal sum of
//! σ's and the lifted σ_k — so tests can pit them against each other.

use serde::{Deserialize, Serialize};

use crate::linalg::{symmetric_eigen, LinalgError, Matrix};
use crate::symfun::{sigma_deleted_unchecked, SigmaTable};

#[derive(Debug, thiserror::Error)]
pub enum OperatorError {
    #[error("invalid operator shape: {0}")]
    InvalidShape(String),
    #[error("coefficient polynomial is not real-rooted: {0}")]
    NoRealRoots(String),
    #[error("coefficients and roots disagree at degree {degree}: e_r(y) = {from_roots}, a_r = {given}")]
    Inconsistent { degree: usize, from_roots: f64, given: f64 },
    #[error(transparent)]
    Eigen(#[from] LinalgError),
}

/// Relative tolerance used when deciding that a bisection bracket value or a
/// reconstructed coefficient is numerically zero.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-11;

/// p(t) for monic p with ascending low-order coefficients `c` (degree = c.len()).
fn poly_eval(c: &[f64], t: f64) -> f64 {
    let mut p = 1.0;
    for &ci in c.iter().rev() {
        p = p * t + ci;
    }
    p
}

/// Upper bound on the magnitude accumulated while evaluating p at t; the
/// natural scale against which a residual counts as zero.
fn poly_eval_scale(c: &[f64], t: f64) -> f64 {
    let at = t.abs();
    let mut s = 1.0;
    for &ci in c.iter().rev() {
        s = s * at + ci.abs();
    }
    s.max(1.0)
}

fn poly_derivative_monic(c: &[f64]) -> Vec<f64> {
    let d = c.len() as f64;
    c.iter().enumerate().skip(1).map(|(i, &ci)| i as f64 * ci / d).collect()
}

/// All real roots (ascending, with multiplicity) of the monic polynomial
/// t^d + c_{d−1} t^{d−1} + … + c_0, or an error if any root is non-real.
///
/// Works by recursion on the derivative: the extrema bracket the roots, so
/// each of the d bracket intervals must contain exactly one root — found by
/// bisection plus a few guarded Newton steps. An interval without a sign
/// change (and without a near-zero endpoint) certifies a complex pair.
fn real_roots_monic(c: &[f64]) -> Result<Vec<f64>, OperatorError> {
    let d = c.len();
    match d {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-c[0]]),
        2 => {
            let (c0, c1) = (c[0], c[1]);
            let disc = c1 * c1 - 4.0 * c0;
            let tol = ROOT_RESIDUAL_TOL * (c1 * c1 + 4.0 * c0.abs()).max(1.0);
            if disc < -tol {
                return Err(OperatorError::NoRealRoots(format!(
                    "quadratic discriminant {disc:.3e} is negative"
                )));
            }
            let sq = disc.max(0.0).sqrt();
            let q = if c1 >= 0.0 { (-c1 - sq) / 2.0 } else { (-c1 + sq) / 2.0 };
            let mut roots = if q != 0.0 { vec![q, c0 / q] } else { vec![0.0, -c1] };
            roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Ok(roots);
        }
        _ => {}
    }

    let extrema = real_roots_monic(&poly_derivative_monic(c))?;
    let bound = 1.0 + c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut brackets = Vec::with_capacity(d + 1);
    brackets.push(-bound - 1.0);
    brackets.extend_from_slice(&extrema);
    brackets.push(bound + 1.0);

    let deriv = poly_derivative_monic(c);
    let mut roots = Vec::with_capacity(d);
    for i in 0..d {
        let (l, r) = (brackets[i], brackets[i + 1]);
        let (vl, vr) = (poly_eval(c, l), poly_eval(c, r));
        if vl.abs() <= ROOT_RESIDUAL_TOL * poly_eval_scale(c, l) {
            roots.push(l);
        } else if vr.abs() <= ROOT_RESIDUAL_TOL * poly_eval_scale(c, r) {
            roots.push(r);
        } else if vl * vr < 0.0 {
            roots.push(bisect_then_polish(c, &deriv, l, r, vl));
        } else {
            return Err(OperatorError::NoRealRoots(format!(
                "no sign change on bracket [{l:.6e}, {r:.6e}] (values {vl:.3e}, {vr:.3e})"
            )));
        }
    }
    Ok(roots)
}

fn bisect_then_polish(c: &[f64], deriv_monic: &[f64], mut l: f64, mut r: f64, vl: f64) -> f64 {
    let mut sl = vl.signum();
    for _ in 0..120 {
        let mid = 0.5 * (l + r);
        if mid <= l || mid >= r {
            break;
        }
        let vm = poly_eval(c, mid);
        if vm == 0.0 {
            return mid;
        }
        if vm.signum() == sl {
            l = mid;
            sl = vm.signum();
        } else {
            r = mid;
        }
    }
    let mut x = 0.5 * (l + r);
    let d = c.len() as f64;
    for _ in 0..3 {
        let fx = poly_eval(c, x);
        let dfx = d * poly_eval(deriv_monic, x);
        if dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if next.is_finite() && next > l && next < r {
            x = next;
        } else {
            break;
        }
    }
    x
}

/// Real roots (descending) of P(t) = t^m + Σ_{r=1}^m (−1)^r a_r t^{m−r},
/// the monic polynomial whose elementary symmetric values are the a_r.
/// Errors with NoRealRoots when the polynomial has a complex pair, i.e. the
/// coefficient list is outside the admissible set.
pub fn coefficient_roots(a: &[f64]) -> Result<Vec<f64>, OperatorError> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(OperatorError::InvalidShape("non-finite coefficient".to_string()));
    }
    let m = a.len();
    // Ascending coefficient i = m − r.
    let mut c = vec![0.0; m];
    for (r, &ar) in a.iter().enumerate() {
        let r = r + 1;
        c[m - r] = if r % 2 == 1 { -ar } else { ar };
    }
    let mut y = real_roots_monic(&c)?;
    y.reverse(); // descending
    let table = SigmaTable::build(&y);
    let a_scale = a.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    for (idx, &ar) in a.iter().enumerate() {
        let rebuilt = table.get(idx as i64 + 1);
        // Multiple roots limit attainable accuracy to ~√ε, hence the loose
        // reconstruction tolerance.
        if (rebuilt - ar).abs() > 1e-6 * a_scale {
            return Err(OperatorError::Inconsistent {
                degree: idx + 1,
                from_roots: rebuilt,
                given: ar,
            });
        }
    }
    Ok(y)
}

#[derive(Deserialize)]
struct OperatorSpecWire {
    n: usize,
    k: usize,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    a: Option<Vec<f64>>,
    #[serde(default)]
    y: Option<Vec<f64>>,
}

/// The operator F(λ) = σ_k(λ) + Σ a_r σ_{k−r}(λ) in dimension n, stored with
/// both its coefficient list a and the real roots y of its auxiliary
/// polynomial (a_r = e_r(y), an invariant of construction).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "OperatorSpecWire")]
pub struct OperatorSpec {
    n: usize,
    k: usize,
    m: usize,
    a: Vec<f64>,
    y: Vec<f64>,
}

impl TryFrom<OperatorSpecWire> for OperatorSpec {
    type Error = OperatorError;
    fn try_from(w: OperatorSpecWire) -> Result<Self, OperatorError> {
        let spec = match (w.a, w.y) {
            (Some(a), None) => OperatorSpec::from_coeffs(w.n, w.k, a)?,
            (None, Some(y)) => OperatorSpec::from_roots(w.n, w.k, y)?,
            (Some(a), Some(y)) => {
                let spec = OperatorSpec::from_roots(w.n, w.k, y)?;
                if a.len() != spec.m {
                    return Err(OperatorError::InvalidShape(format!(
                        "{} coefficients vs {} roots",
                        a.len(),
                        spec.m
                    )));
                }
                let a_scale = a.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
                for (r, (&given, &derived)) in a.iter().zip(&spec.a).enumerate() {
                    if (given - derived).abs() > 1e-9 * a_scale {
                        return Err(OperatorError::Inconsistent {
                            degree: r + 1,
                            from_roots: derived,
                            given,
                        });
                    }
                }
                spec
            }
            (None, None) => OperatorSpec::from_roots(w.n, w.k, Vec::new())?,
        };
        if let Some(m) = w.m {
            if m != spec.m {
                return Err(OperatorError::InvalidShape(format!(
                    "declared m = {m} but data has m = {}",
                    spec.m
                )));
            }
        }
        Ok(spec)
    }
}

impl OperatorSpec {
    /// Builds the operator from the roots of its auxiliary polynomial; the
    /// coefficients a_r = e_r(y) are derived. Roots may be any real numbers.
    pub fn from_roots(n: usize, k: usize, mut y: Vec<f64>) -> Result<Self, OperatorError> {
        let m = y.len();
        Self::validate_shape(n, k, m)?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(OperatorError::InvalidShape("non-finite root".to_string()));
        }
        y.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let table = SigmaTable::build(&y);
        let a = (1..=m).map(|r| table.get(r as i64)).collect();
        Ok(OperatorSpec { n, k, m, a, y })
    }

    /// Builds the operator from coefficients, solving the auxiliary
    /// polynomial for its roots. Fails when any root is non-real (outside
    /// the admissible coefficient set) or the recovered roots do not
    /// reproduce the coefficients.
    pub fn from_coeffs(n: usize, k: usize, a: Vec<f64>) -> Result<Self, OperatorError> {
        let m = a.len();
        Self::validate_shape(n, k, m)?;
        let y = coefficient_roots(&a)?;
        Ok(OperatorSpec { n, k, m, a, y })
    }

    fn validate_shape(n: usize, k: usize, m: usize) -> Result<(), OperatorError> {
        if n < 2 || k < 2 || k > n || m >= k {
            return Err(OperatorError::InvalidShape(format!(
                "need n ≥ 2, 2 ≤ k ≤ n and m < k; got n = {n}, k = {k}, m = {m}"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn m(&self) -> usize {
        self.m
    }
    /// Coefficients a_1, …, a_m.
    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }
    /// Roots y_1 ≥ … ≥ y_m of the auxiliary polynomial.
    pub fn roots(&self) -> &[f64] {
        &self.y
    }

    /// The concatenated spectrum λ̂ = (λ_1, …, λ_n, y_1, …, y_m).
    pub fn lifted_spectrum(&self, lambda: &[f64]) -> Vec<f64> {
        assert_eq!(lambda.len(), self.n, "spectrum has wrong dimension");
        let mut hat = Vec::with_capacity(self.n + self.m);
        hat.extend_from_slice(lambda);
        hat.extend_from_slice(&self.y);
        hat
    }

    /// F(λ) evaluated as σ_k of the lifted spectrum (the route every
    /// derivative formula below is consistent with).
    pub fn value(&self, lambda: &[f64]) -> f64 {
        let hat = self.lifted_spectrum(lambda);
        SigmaTable::build(&hat).get(self.k as i64)
    }

    /// F(λ) evaluated literally as σ_k(λ) + Σ a_r σ_{k−r}(λ); an independent
    /// route used to cross-check [`Self::value`].
    pub fn value_sum_route(&self, lambda: &[f64]) -> f64 {
        assert_eq!(lambda.len(), self.n, "spectrum has wrong dimension");
        let table = SigmaTable::build(lambda);
        let mut v = table.get(self.k as i64);
        for (r, &ar) in self.a.iter().enumerate() {
            v += ar * table.get(self.k as i64 - r as i64 - 1);
        }
        v
    }

    /// First spectral derivatives F_i = ∂F/∂λ_i = σ_{k−1; i}(λ̂), i = 1..n.
    pub fn grad(&self, lambda: &[f64]) -> Vec<f64> {
        let hat = self.lifted_spectrum(lambda);
        (0..self.n)
            .map(|i| sigma_deleted_unchecked(self.k as i64 - 1, &hat, &[i]))
            .collect()
    }

    /// Derivatives of F with respect to every lifted entry, the real λ's
    /// first and then the (frozen) roots; the tail entries enter trace
    /// identities for the lifted spectrum.
    pub fn grad_lifted(&self, lambda: &[f64]) -> Vec<f64> {
        let hat = self.lifted_spectrum(lambda);
        (0..hat.len())
            .map(|i| sigma_deleted_unchecked(self.k as i64 - 1, &hat, &[i]))
            .collect()
    }

    /// Second spectral derivatives ∂²F/∂λ_p∂λ_q = σ_{k−2; pq}(λ̂) for p ≠ q;
    /// the diagonal vanishes because F is affine in each λ_i separately.
    pub fn hess_spectral(&self, lambda: &[f64]) -> Matrix {
        let hat = self.lifted_spectrum(lambda);
        let mut h = Matrix::zeros(self.n, self.n);
        for p in 0..self.n {
            for q in (p + 1)..self.n {
                let v = sigma_deleted_unchecked(self.k as i64 - 2, &hat, &[p, q]);
                h.set(p, q, v);
                h.set(q, p, v);
            }
        }
        h
    }

    /// All first- and second-order data of F at a symmetric matrix argument.
    pub fn matrix_derivatives(&self, s: &Matrix) -> Result<MatrixDerivatives, OperatorError> {
        if s.rows() != self.n || s.cols() != self.n {
            return Err(OperatorError::InvalidShape(format!(
                "matrix is {}×{}, operator dimension is {}",
                s.rows(),
                s.cols(),
                self.n
            )));
        }
        let eigen = symmetric_eigen(s)?;
        let lambda = eigen.values.clone();
        let f_i = self.grad(&lambda);
        let hess = self.hess_spectral(&lambda);
        let value = self.value(&lambda);

        // dF/dS = V diag(F_i) Vᵀ.
        let v = &eigen.vectors;
        let mut gradient = Matrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                let mut acc = 0.0;
                for i in 0..self.n {
                    acc += v.get(r, i) * f_i[i] * v.get(c, i);
                }
                gradient.set(r, c, acc);
            }
        }

        // Pair coefficients (F_p − F_q)/(λ_p − λ_q): splitting the deletion
        // σ_{k−1;p}(λ̂) by whether the term contains λ_q (and vice versa)
        // shows the quotient equals −σ_{k−2;pq}(λ̂) identically, so no
        // divided-difference branch is needed even for equal eigenvalues.
        let mut pair = Matrix::zeros(self.n, self.n);
        for p in 0..self.n {
            for q in 0..self.n {
                if p != q {
                    pair.set(p, q, -hess.get(p, q));
                }
            }
        }

        Ok(MatrixDerivatives {
            value,
            gradient,
            spectral_gradient: f_i,
            spectral_hessian: hess,
            pair_coefficients: pair,
            eigenvalues: lambda,
            eigenvectors: eigen.vectors,
        })
    }

    /// The full second derivative D²F(S)[T, T] in matrix variables:
    /// Σ_{p,q} H_pq T̃_pp T̃_qq + Σ_{p≠q} κ_pq T̃_pq² with T̃ = Vᵀ T V,
    /// H the spectral Hessian and κ the pair coefficients.
    pub fn second_derivative_action(&self, md: &MatrixDerivatives, t: &Matrix) -> f64 {
        let tt = t.conjugate(&md.eigenvectors);
        let n = self.n;
        let mut total = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    total += md.spectral_hessian.get(p, q) * tt.get(p, p) * tt.get(q, q);
                    total += md.pair_coefficients.get(p, q) * tt.get(p, q) * tt.get(p, q);
                }
            }
        }
        total
    }
}

/// Derivative bundle of F at a matrix point, in the eigenbasis V of the
/// argument (eigenvalues descending, vectors column-matched).
#[derive(Debug, Clone)]
pub struct MatrixDerivatives {
    pub value: f64,
    /// dF/dS as a symmetric matrix.
    pub gradient: Matrix,
    /// F_i = σ_{k−1;i}(λ̂) in the eigenbasis ordering.
    pub spectral_gradient: Vec<f64>,
    /// σ_{k−2;pq}(λ̂), zero diagonal.
    pub spectral_hessian: Matrix,
    /// (F_p − F_q)/(λ_p − λ_q) = −σ_{k−2;pq}(λ̂), zero diagonal.
    pub pair_coefficients: Matrix,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::rel_discrepancy;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        // Eigenvectors of a random symmetric matrix form an orthogonal basis.
        let mut s = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        symmetric_eigen(&s).unwrap().vectors
    }

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut s = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-2.0..2.0);
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        s
    }

    #[test]
    fn coefficient_root_conversions() {
        let op = OperatorSpec::from_coeffs(4, 3, vec![2.0]).unwrap();
        assert_eq!(op.roots(), &[2.0]);

        // t² − 2t + 1 = (t−1)²: double root.
        let op = OperatorSpec::from_coeffs(4, 3, vec![2.0, 1.0]).unwrap();
        assert!((op.roots()[0] - 1.0).abs() < 1e-7);
        assert!((op.roots()[1] - 1.0).abs() < 1e-7);

        // t² + 1: complex pair.
        assert!(matches!(
            OperatorSpec::from_coeffs(4, 3, vec![0.0, 1.0]),
            Err(OperatorError::NoRealRoots(_))
        ));

        let op = OperatorSpec::from_roots(5, 4, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(op.coefficients(), &[6.0, 11.0, 6.0]);
        assert_eq!(op.roots(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn root_solving_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..400 {
            let m = rng.gen_range(1..=5usize);
            let mut y: Vec<f64> = (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect();
            y.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let src = OperatorSpec::from_roots(m + 2, m + 1, y.clone()).unwrap();
            let back = OperatorSpec::from_coeffs(m + 2, m + 1, src.coefficients().to_vec())
                .unwrap_or_else(|e| panic!("roots {y:?}: {e}"));
            for (orig, rec) in y.iter().zip(back.roots()) {
                assert!(
                    (orig - rec).abs() < 2e-5 * (1.0 + orig.abs()),
                    "roots {y:?} recovered as {:?}",
                    back.roots()
                );
            }
        }
    }

    #[test]
    fn shape_validation() {
        assert!(OperatorSpec::from_roots(3, 1, vec![]).is_err());
        assert!(OperatorSpec::from_roots(3, 4, vec![]).is_err());
        assert!(OperatorSpec::from_roots(3, 2, vec![1.0, 1.0]).is_err()); // m ≥ k
        assert!(OperatorSpec::from_coeffs(1, 2, vec![]).is_err());
    }

    #[test]
    fn serde_accepts_either_form() {
        let by_a: OperatorSpec = serde_json::from_str(r#"{"n":4,"k":3,"a":[2.0]}"#).unwrap();
        assert_eq!(by_a.roots(), &[2.0]);
        let by_y: OperatorSpec = serde_json::from_str(r#"{"n":4,"k":3,"y":[2.0]}"#).unwrap();
        assert_eq!(by_y.coefficients(), &[2.0]);
        let both: OperatorSpec =
            serde_json::from_str(r#"{"n":5,"k":4,"a":[6.0,11.0,6.0],"y":[3.0,2.0,1.0]}"#).unwrap();
        assert_eq!(both.m(), 3);
        assert!(serde_json::from_str::<OperatorSpec>(r#"{"n":5,"k":4,"a":[1.0],"y":[2.0]}"#)
            .is_err());
        // Round-trip through the serialized form.
        let text = serde_json::to_string(&both).unwrap();
        let again: OperatorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(again.coefficients(), both.coefficients());
    }

    #[test]
    fn frozen_values_and_derivatives() {
        // n = 2, k = 2, y = (1): F = σ₂ + σ₁.
        let op = OperatorSpec::from_roots(2, 2, vec![1.0]).unwrap();
        let lam = [2.0, 3.0];
        assert_eq!(op.value(&lam), 11.0);
        assert_eq!(op.value_sum_route(&lam), 11.0);
        assert_eq!(op.grad(&lam), vec![4.0, 3.0]);
        assert_eq!(op.hess_spectral(&lam).get(0, 1), 1.0);
        assert_eq!(op.hess_spectral(&lam).get(0, 0), 0.0);
    }

    #[test]
    fn two_evaluation_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..2000 {
            let n = rng.gen_range(2..=7usize);
            let k = rng.gen_range(2..=n);
            let m = rng.gen_range(0..k);
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..4.0)).collect();
            let op = OperatorSpec::from_roots(n, k, y).unwrap();
            let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..5.0)).collect();
            let lifted = op.value(&lam);
            let summed = op.value_sum_route(&lam);
            assert!(
                rel_discrepancy(lifted, summed) < 1e-12,
                "lifted {lifted} vs sum {summed}"
            );
        }
    }

    #[test]
    fn spectral_derivatives_match_finite_differences() {
        // F is affine in each λ_i separately, so central first differences
        // and mixed cross differences are exact up to rounding — a large
        // step keeps the rounding term tiny and the tolerance can be tight.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let h = 1e-2;
        for _ in 0..200 {
            let n = rng.gen_range(2..=6usize);
            let k = rng.gen_range(2..=n);
            let m = rng.gen_range(0..k);
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..3.0)).collect();
            let op = OperatorSpec::from_roots(n, k, y).unwrap();
            let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..4.0)).collect();
            let value_scale = 1.0_f64.max(op.value(&lam).abs());
            let grad = op.grad(&lam);
            let hess = op.hess_spectral(&lam);
            for i in 0..n {
                let mut lp = lam.clone();
                let mut lm = lam.clone();
                lp[i] += h;
                lm[i] -= h;
                let fd = (op.value(&lp) - op.value(&lm)) / (2.0 * h);
                let scale = value_scale.max(grad[i].abs());
                assert!((fd - grad[i]).abs() < 1e-9 * scale);
            }
            for p in 0..n {
                for q in 0..n {
                    if p == q {
                        continue;
                    }
                    let mut l = lam.clone();
                    l[p] += h;
                    l[q] += h;
                    let fpp = op.value(&l);
                    l[q] -= 2.0 * h;
                    let fpm = op.value(&l);
                    l[p] -= 2.0 * h;
                    let fmm = op.value(&l);
                    l[q] += 2.0 * h;
                    let fmp = op.value(&l);
                    let fd = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                    let scale = value_scale.max(hess.get(p, q).abs()) / (h * h);
                    assert!((fd - hess.get(p, q)).abs() < 1e-13 * scale);
                }
            }
        }
    }

    #[test]
    fn matrix_gradient_at_diagonal_argument() {
        let op = OperatorSpec::from_roots(2, 2, vec![1.0]).unwrap();
        let s = Matrix::from_diagonal(&[2.0, 3.0]);
        let md = op.matrix_derivatives(&s).unwrap();
        // ∂F/∂S_00 = σ₁ of the other lifted entries (3, 1) = 4, and ∂F/∂S_11 = 3.
        assert!((md.gradient.get(0, 0) - 4.0).abs() < 1e-12);
        assert!((md.gradient.get(1, 1) - 3.0).abs() < 1e-12);
        assert!(md.gradient.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn pair_coefficients_at_identity_are_minus_one() {
        // k = 2 ⇒ σ_{0;pq} = 1, so the pair coefficient is −1 at S = I even
        // though the eigenvalues coincide (no divided difference involved).
        let op = OperatorSpec::from_roots(3, 2, vec![1.0]).unwrap();
        let md = op.matrix_derivatives(&Matrix::identity(3)).unwrap();
        for p in 0..3 {
            for q in 0..3 {
                let expect = if p == q { 0.0 } else { -1.0 };
                assert!((md.pair_coefficients.get(p, q) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pair_coefficients_match_gradient_quotients() {
        // Where eigenvalues are distinct the identity
        // (F_p − F_q)/(λ_p − λ_q) = −σ_{k−2;pq}(λ̂) must hold literally.
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..500 {
            let n = rng.gen_range(2..=6usize);
            let k = rng.gen_range(2..=n);
            let m = rng.gen_range(0..k);
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..3.0)).collect();
            let op = OperatorSpec::from_roots(n, k, y).unwrap();
            let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..4.0)).collect();
            let grad = op.grad(&lam);
            let hess = op.hess_spectral(&lam);
            for p in 0..n {
                for q in (p + 1)..n {
                    if (lam[p] - lam[q]).abs() < 1e-3 {
                        continue;
                    }
                    let quotient = (grad[p] - grad[q]) / (lam[p] - lam[q]);
                    assert!(
                        rel_discrepancy(quotient, -hess.get(p, q)) < 1e-9,
                        "quotient {quotient} vs −H {}",
                        -hess.get(p, q)
                    );
                }
            }
        }
    }

    #[test]
    fn value_is_basis_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..100 {
            let n = rng.gen_range(2..=5usize);
            let op = OperatorSpec::from_roots(n, 2, vec![rng.gen_range(0.0..2.0)]).unwrap();
            let s = random_symmetric(n, &mut rng);
            let q = random_orthogonal(n, &mut rng);
            let rotated = s.conjugate(&q);
            let v1 = op.matrix_derivatives(&s).unwrap().value;
            let v2 = op.matrix_derivatives(&rotated).unwrap().value;
            assert!(rel_discrepancy(v1, v2) < 1e-10);
        }
    }

    #[test]
    fn matrix_gradient_transforms_covariantly() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..50 {
            let n = rng.gen_range(2..=5usize);
            let k = rng.gen_range(2..=n);
            let op = OperatorSpec::from_roots(n, k, vec![rng.gen_range(0.0..2.0)]).unwrap();
            let s = random_symmetric(n, &mut rng);
            let q = random_orthogonal(n, &mut rng);
            let g_rotated = op.matrix_derivatives(&s.conjugate(&q)).unwrap().gradient;
            let g_then_rotate = op.matrix_derivatives(&s).unwrap().gradient.conjugate(&q);
            let diff = g_rotated.sub(&g_then_rotate).max_abs();
            assert!(diff < 1e-9 * (1.0 + g_then_rotate.max_abs()), "diff {diff}");
        }
    }

    #[test]
    fn matrix_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..100 {
            let n = rng.gen_range(2..=5usize);
            let k = rng.gen_range(2..=n);
            let m = rng.gen_range(0..k);
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..3.0)).collect();
            let op = OperatorSpec::from_roots(n, k, y).unwrap();
            let s = random_symmetric(n, &mut rng);
            let md = op.matrix_derivatives(&s).unwrap();
            let h = 1e-6 * (1.0 + s.max_abs());
            let t = random_symmetric(n, &mut rng);
            let mut sp = s.clone();
            let mut sm = s.clone();
            for i in 0..n {
                for j in 0..n {
                    sp.add_to(i, j, h * t.get(i, j));
                    sm.add_to(i, j, -h * t.get(i, j));
                }
            }
            let fd = (op.matrix_derivatives(&sp).unwrap().value
                - op.matrix_derivatives(&sm).unwrap().value)
                / (2.0 * h);
            let mut pairing = 0.0;
            for i in 0..n {
                for j in 0..n {
                    pairing += md.gradient.get(i, j) * t.get(i, j);
                }
            }
            assert!(
                (fd - pairing).abs() < 1e-6 * (1.0 + pairing.abs()),
                "fd {fd} vs ⟨dF,T⟩ {pairing}"
            );
        }
    }

    #[test]
    fn second_derivative_action_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let mut checked = 0;
        while checked < 100 {
            let n = rng.gen_range(2..=5usize);
            let k = rng.gen_range(2..=n);
            let m = rng.gen_range(0..k);
            let y: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..3.0)).collect();
            let op = OperatorSpec::from_roots(n, k, y).unwrap();
            let s = random_symmetric(n, &mut rng);
            let t = random_symmetric(n, &mut rng);
            let md = op.matrix_derivatives(&s).unwrap();
            let action = op.second_derivative_action(&md, &t);

            // Fourth-order five-point second difference along the ray S + εT.
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
            let fd = (-eval(2.0 * h) + 16.0 * eval(h) - 30.0 * eval(0.0) + 16.0 * eval(-h)
                - eval(-2.0 * h))
                / (12.0 * h * h);
            let scale = 1.0_f64.max(md.value.abs()).max(action.abs());
            assert!(
                (fd - action).abs() < 1e-6 * scale,
                "fd {fd} vs action {action} (n = {n}, k = {k})"
            );
            checked += 1;
        }
    }
}
