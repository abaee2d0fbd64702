//! Solution export: a flat binary lattice dump and a per-node CSV with the
//! discrete Hessian spectrum and cone margin.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Solution, SolverError};

const MAGIC: &[u8; 5] = b"SHLB1";

/// Lattice values read back from a binary dump. Non-interior nodes hold NaN.
#[derive(Debug, Clone)]
pub struct LatticeDump {
    pub shape: Vec<usize>,
    pub h: f64,
    pub values: Vec<f64>,
}

/// Little-endian layout: magic "SHLB1", u32 dimension, u32 extent per axis,
/// f64 spacing, then the full row-major lattice as f64 (NaN outside the
/// interior).
pub fn write_solution_binary(sol: &Solution, path: &Path) -> Result<(), SolverError> {
    let grid = &sol.grid;
    let total: usize = grid.shape.iter().product();
    let mut lattice = vec![f64::NAN; total];
    for (i, &flat) in grid.node_of_unknown.iter().enumerate() {
        lattice[flat] = sol.u[i];
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim as u32).to_le_bytes())?;
    for &s in &grid.shape {
        w.write_all(&(s as u32).to_le_bytes())?;
    }
    w.write_all(&grid.h.to_le_bytes())?;
    for v in &lattice {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_solution_binary(path: &Path) -> Result<LatticeDump, SolverError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SolverError::InvalidProblem(format!(
            "not a solution dump (magic {magic:?})"
        )));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    if !(2..=3).contains(&dim) {
        return Err(SolverError::InvalidProblem(format!("bad dimension {dim}")));
    }
    let mut shape = Vec::with_capacity(dim);
    for _ in 0..dim {
        r.read_exact(&mut b4)?;
        shape.push(u32::from_le_bytes(b4) as usize);
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let h = f64::from_le_bytes(b8);
    let total: usize = shape.iter().product();
    if total == 0 || total > 1 << 24 {
        return Err(SolverError::InvalidProblem(format!("bad lattice size {total}")));
    }
    let mut values = Vec::with_capacity(total);
    for _ in 0..total {
        r.read_exact(&mut b8)?;
        values.push(f64::from_le_bytes(b8));
    }
    Ok(LatticeDump { shape, h, values })
}

/// One row per interior node in lattice order: coordinates, u, the discrete
/// Hessian eigenvalues (descending), and the normalized cone margin.
pub fn write_solution_csv<W: Write>(sol: &Solution, mut out: W) -> Result<(), SolverError> {
    let dim = sol.grid.dim;
    let n = sol.operator.n();
    let mut header = String::new();
    for a in 0..dim {
        header.push_str(&format!("x{a},"));
    }
    header.push('u');
    for j in 1..=n {
        header.push_str(&format!(",lambda_{j}"));
    }
    header.push_str(",cone_margin");
    writeln!(out, "{header}")?;
    for (i, &flat) in sol.grid.node_of_unknown.iter().enumerate() {
        let x = sol.grid.coords(flat);
        let mut row = String::new();
        for c in &x {
            row.push_str(&format!("{c},"));
        }
        row.push_str(&format!("{}", sol.u[i]));
        for l in &sol.lambda[i] {
            row.push_str(&format!(",{l}"));
        }
        row.push_str(&format!(",{}", sol.cone_margin[i]));
        writeln!(out, "{row}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::Condition;
    use crate::operator::OperatorSpec;
    use crate::solver::{newton_solve, DirichletProblem, Domain, Monomial, ScalarField, SolveOptions};

    fn small_solution() -> Solution {
        let problem = DirichletProblem {
            operator: OperatorSpec::from_roots(2, 2, vec![]).unwrap(),
            domain: Domain::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] },
            h: 1.0 / 12.0,
            psi: ScalarField::Constant { value: 1.0 },
            boundary: ScalarField::Table {
                monomials: vec![
                    Monomial { coef: 0.5, powers: vec![2, 0] },
                    Monomial { coef: 0.5, powers: vec![0, 2] },
                ],
            },
            condition: Condition::Two,
        };
        newton_solve(&problem, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn binary_dump_round_trips() {
        let sol = small_solution();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bin");
        write_solution_binary(&sol, &path).unwrap();
        let dump = read_solution_binary(&path).unwrap();
        assert_eq!(dump.shape, sol.grid.shape);
        assert_eq!(dump.h, sol.grid.h);
        let total: usize = sol.grid.shape.iter().product();
        assert_eq!(dump.values.len(), total);
        let mut interior = 0usize;
        for (flat, v) in dump.values.iter().enumerate() {
            match sol.grid.unknown_of_node[flat] {
                Some(i) => {
                    assert_eq!(*v, sol.u[i]);
                    interior += 1;
                }
                None => assert!(v.is_nan()),
            }
        }
        assert_eq!(interior, sol.u.len());
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"not a dump at all").unwrap();
        assert!(read_solution_binary(&path).is_err());
    }

    #[test]
    fn csv_has_spectrum_columns_per_interior_node() {
        let sol = small_solution();
        let mut buf = Vec::new();
        write_solution_csv(&sol, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x0,x1,u,lambda_1,lambda_2,cone_margin");
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), sol.u.len());
        // The exact solution has Hessian I, so eigenvalues near 1 and a
        // comfortably positive margin everywhere.
        for row in rows {
            let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols.len(), 6);
            assert!((cols[3] - 1.0).abs() < 1e-6 && (cols[4] - 1.0).abs() < 1e-6);
            assert!(cols[5] > 0.0);
        }
    }
}
