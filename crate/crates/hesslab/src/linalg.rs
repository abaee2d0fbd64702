//! Dense and banded linear algebra kept deliberately small and deterministic.
//!
//! Everything downstream needs only three things: a row-major matrix type for
//! spectra-sized problems (n ≤ 8 or so), a symmetric eigensolver whose output
//! is reproducible bit-for-bit across runs, and a banded LU factorization for
//! the grid Newton systems. All three are written out here rather than pulled
//! from a linear-algebra crate so the numerics have no hidden nondeterminism.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("jacobi eigensolver did not reach the off-diagonal threshold in {0} sweeps")]
    JacobiNoConvergence(usize),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric within tolerance (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("singular pivot encountered at column {0}")]
    SingularPivot(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Row-major dense matrix. Small: spectra, eigenvector frames, quadratic forms.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    /// Symmetric matrix from its diagonal.
    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.add_to(i, j, a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self.get(i, j) * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// xᵀ A x for square A.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        x.iter().zip(ax.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// A ← Qᵀ A Q restricted to columns p,q of the Jacobi rotation; used only
    /// internally but exposed for the solver's basis changes.
    pub fn conjugate(&self, q: &Matrix) -> Matrix {
        q.transpose().matmul(self).matmul(q)
    }
}

/// Eigendecomposition of a symmetric matrix: `values[i]` belongs to column i
/// of `vectors`, values sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

/// Relative off-diagonal threshold at which the Jacobi iteration stops.
pub const JACOBI_OFF_DIAGONAL_TOL: f64 = 1e-12;
/// Hard cap on Jacobi sweeps; reaching it is reported as an error.
pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Cyclic Jacobi eigensolver for symmetric matrices. Rotations are applied in
/// a fixed (p,q) order every sweep, so the result is a pure function of the
/// input bits. Eigenvalues come back sorted in decreasing order with a stable
/// sort, eigenvectors as matching columns.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let scale = a.frobenius_norm();
    let asym = a.max_asymmetry();
    if asym > 1e-9 * scale.max(1.0) {
        return Err(LinalgError::NotSymmetric(asym));
    }
    let mut w = a.clone();
    // Symmetrize exactly so rounding asymmetry cannot drift the iteration.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (w.get(i, j) + w.get(j, i));
            w.set(i, j, v);
            w.set(j, i, v);
        }
    }
    let mut v = Matrix::identity(n);
    if n > 1 && scale > 0.0 {
        let threshold = JACOBI_OFF_DIAGONAL_TOL * scale;
        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += 2.0 * w.get(i, j) * w.get(i, j);
                }
            }
            if off.sqrt() <= threshold {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = w.get(p, q);
                    if apq == 0.0 {
                        continue;
                    }
                    let app = w.get(p, p);
                    let aqq = w.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    // Update the symmetric matrix in place (Golub–Van Loan 8.5).
                    w.set(p, p, app - t * apq);
                    w.set(q, q, aqq + t * apq);
                    w.set(p, q, 0.0);
                    w.set(q, p, 0.0);
                    for i in 0..n {
                        if i != p && i != q {
                            let aip = w.get(i, p);
                            let aiq = w.get(i, q);
                            let new_ip = aip - s * (aiq + tau * aip);
                            let new_iq = aiq + s * (aip - tau * aiq);
                            w.set(i, p, new_ip);
                            w.set(p, i, new_ip);
                            w.set(i, q, new_iq);
                            w.set(q, i, new_iq);
                        }
                    }
                    for i in 0..n {
                        let vip = v.get(i, p);
                        let viq = v.get(i, q);
                        v.set(i, p, vip - s * (viq + tau * vip));
                        v.set(i, q, viq + s * (vip - tau * viq));
                    }
                }
            }
        }
        if !converged {
            // One final check: the last sweep may have pushed us under.
            let mut off = 0.0_f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += 2.0 * w.get(i, j) * w.get(i, j);
                }
            }
            if off.sqrt() > threshold {
                return Err(LinalgError::JacobiNoConvergence(JACOBI_MAX_SWEEPS));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort on the eigenvalue keys, decreasing.
    order.sort_by(|&i, &j| w.get(j, j).partial_cmp(&w.get(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| w.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_col, v.get(i, old_col));
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Dense Gaussian elimination with partial pivoting; solves A x = b in place.
/// Used for tiny systems (quadratic least-squares fits, test oracles).
pub fn solve_dense(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch(format!("rhs has len {}, need {}", b.len(), n)));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let mut piv = col;
        let mut best = m.get(col, col).abs();
        for r in (col + 1)..n {
            let v = m.get(r, col).abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(LinalgError::SingularPivot(col));
        }
        if piv != col {
            for j in 0..n {
                let tmp = m.get(col, j);
                m.set(col, j, m.get(piv, j));
                m.set(piv, j, tmp);
            }
            x.swap(col, piv);
        }
        let d = m.get(col, col);
        for r in (col + 1)..n {
            let f = m.get(r, col) / d;
            if f == 0.0 {
                continue;
            }
            m.set(r, col, 0.0);
            for j in (col + 1)..n {
                m.set(r, j, m.get(r, j) - f * m.get(col, j));
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for j in (col + 1)..n {
            acc -= m.get(col, j) * x[j];
        }
        x[col] = acc / m.get(col, col);
    }
    Ok(x)
}

/// Banded square matrix in LAPACK-style storage with room for pivoting
/// fill-in: entry (i, j) with j-ku ≤ i ≤ j+kl lives at ab[kl + ku + i - j][j],
/// and the top kl rows hold fill generated by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    /// Column-major: ab[row + ldab * col].
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, ldab, ab: vec![0.0; ldab * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku >= j && j + self.kl >= i, "entry outside band");
        self.kl + self.ku + i - j + self.ldab * j
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] += v;
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.ab[s] = v;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i {
            0.0
        } else {
            self.ab[self.slot(i, j)]
        }
    }

    /// In-band check for assembly-time validation.
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku >= j && j + self.kl >= i
    }

    /// LU factorization with partial pivoting (unblocked dgbtf2 layout).
    /// Consumes self; multipliers live below the diagonal, U in the widened
    /// band of kl+ku superdiagonals.
    pub fn factor(mut self) -> Result<BandLu, LinalgError> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let kv = kl + ku; // superdiagonals of U after fill-in
        let ldab = self.ldab;
        let mut ipiv = vec![0usize; n];
        // ju tracks the last column affected by the current elimination step.
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j); // subdiagonal entries in column j
            // Find pivot among rows j..=j+km (stored at offsets kv..=kv+km).
            let mut jp = 0usize;
            let mut best = self.ab[kv + ldab * j].abs();
            for l in 1..=km {
                let v = self.ab[kv + l + ldab * j].abs();
                if v > best {
                    best = v;
                    jp = l;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return Err(LinalgError::SingularPivot(j));
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                // Swap rows j and j+jp across columns j..=ju.
                for c in j..=ju {
                    let r1 = kv + j - c + ldab * c; // row j in column c
                    let r2 = kv + j + jp - c + ldab * c; // row j+jp in column c
                    self.ab.swap(r1, r2);
                }
            }
            if km > 0 {
                let piv = self.ab[kv + ldab * j];
                for l in 1..=km {
                    self.ab[kv + l + ldab * j] /= piv;
                }
                for c in (j + 1)..=ju {
                    let ujc = self.ab[kv + j - c + ldab * c];
                    if ujc == 0.0 {
                        continue;
                    }
                    for l in 1..=km {
                        let m = self.ab[kv + l + ldab * j];
                        self.ab[kv + (j + l) - c + ldab * c] -= m * ujc;
                    }
                }
            }
        }
        Ok(BandLu { n, kl, ku, ldab, ab: self.ab, ipiv })
    }
}

/// Factored banded system ready for repeated solves.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.n {
            return Err(LinalgError::DimensionMismatch(format!(
                "rhs has len {}, need {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ldab = self.ldab;
        let mut x = b.to_vec();
        // Forward: apply P and L.
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let xj = x[j];
            if xj != 0.0 {
                for l in 1..=km {
                    x[j + l] -= self.ab[kv + l + ldab * j] * xj;
                }
            }
        }
        // Backward: U x = y with bandwidth kv.
        for j in (0..n).rev() {
            let mut acc = x[j];
            let hi = (j + kv).min(n - 1);
            for c in (j + 1)..=hi {
                acc -= self.ab[kv + j - c + ldab * c] * x[c];
            }
            x[j] = acc / self.ab[kv + ldab * j];
        }
        Ok(x)
    }
}
