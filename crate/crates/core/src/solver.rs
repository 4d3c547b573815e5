//! Compressed sparse row storage and Jacobi-preconditioned conjugate gradients.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Triplets are stably sorted by `(row, col)`, so
    /// duplicates are accumulated in input order and the result is
    /// reproducible bit for bit.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().expect("non-empty") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |K_ij - K_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m = m.max((v - self.get(c, r)).abs());
            }
        }
        m
    }

    /// Largest entrywise difference against another matrix of equal shape.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut m: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                m = m.max((v - other.get(r, c)).abs());
            }
            for (c, v) in other.row(r) {
                m = m.max((v - self.get(r, c)).abs());
            }
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target `||b - A x|| / ||b||`.
    pub tol: f64,
    /// `None` means `10 * n`.
    pub max_iter: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub wall_time: Duration,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients with a diagonal preconditioner, starting from zero.
pub fn pcg(a: &CsrMatrix, b: &[f64], opts: SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    let start = Instant::now();
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::InvalidInput(format!(
            "system is {}x{} with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveReport {
                iterations: 0,
                relative_residual: 0.0,
                wall_time: start.elapsed(),
            },
        ));
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut history = Vec::new();
    let mut rel = 1.0;
    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotConverged {
                iterations: it,
                residual: rel,
                history: format!("breakdown: p^T A p = {pap:e}, matrix not positive definite"),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / b_norm;
        if it.is_power_of_two() {
            history.push((it, rel));
        }
        if rel <= opts.tol {
            return Ok((
                x,
                SolveReport {
                    iterations: it,
                    relative_residual: rel,
                    wall_time: start.elapsed(),
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let summary = history
        .iter()
        .map(|(i, r)| format!("{i}:{r:.2e}"))
        .collect::<Vec<_>>()
        .join(" ");
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: rel,
        history: format!("residual history {summary}"),
    })
}
