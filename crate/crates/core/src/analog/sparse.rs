//! Sparse assembly (COO with duplicate summation), CSR mat-vec, Matrix Market
//! output, and the SPD factorization used by the network engine.

use std::io::Write;
use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Coordinate-format builder; duplicate entries are summed on compression.
#[derive(Debug, Clone, Default)]
pub struct CooBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CooBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    /// Symmetric two-terminal conductance stamp between unknowns `a` and `b`.
    pub fn stamp_branch(&mut self, a: usize, b: usize, g: f64) {
        self.push(a, a, g);
        self.push(b, b, g);
        self.push(a, b, -g);
        self.push(b, a, -g);
    }

    pub fn to_csr(&self) -> Csr {
        let mut entries = self.entries.clone();
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { nrows: self.nrows, ncols: self.ncols, row_ptr, cols, vals }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.nrows)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|p| self.vals[p] * x[self.cols[p]])
                    .sum()
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.cols[p], self.vals[p]))
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, j, v) in self.iter() {
            out[i][j] += v;
        }
        out
    }

    /// Writes the matrix (and optionally a right-hand side as a trailing
    /// comment block) in Matrix Market coordinate format, 1-based.
    pub fn write_matrix_market<W: Write>(&self, mut w: W, comment: &str) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        for line in comment.lines() {
            writeln!(w, "% {line}")?;
        }
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.iter() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}

static SEQUENTIAL: Once = Once::new();

/// Sparse Cholesky factor of a symmetric positive definite matrix.
pub struct SpdFactor {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl std::fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdFactor").field("n", &self.n).finish()
    }
}

impl SpdFactor {
    pub fn new(a: &Csr) -> Result<SpdFactor> {
        // Trials are parallelized one level up; keep each factorization
        // single-threaded so results are bit-reproducible.
        SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
        let triplets: Vec<Triplet<usize, usize, f64>> = a
            .iter()
            .filter(|&(i, j, _)| i >= j)
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(a.nrows, a.ncols, &triplets)
            .map_err(|e| Error::Equilibrium(format!("sparse assembly failed: {e:?}")))?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Equilibrium(format!("network matrix is not positive definite: {e:?}")))?;
        Ok(SpdFactor { n: a.nrows, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves for several right-hand sides stored column-major in `rhs`
    /// (`ncols` columns of length `dim`), in place.
    pub fn solve_many(&self, rhs: &mut [f64], ncols: usize) {
        debug_assert_eq!(rhs.len(), self.n * ncols);
        let mut m = Mat::<f64>::from_fn(self.n, ncols, |i, j| rhs[j * self.n + i]);
        self.llt.solve_in_place(m.as_mut());
        for j in 0..ncols {
            for i in 0..self.n {
                rhs[j * self.n + i] = m[(i, j)];
            }
        }
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        self.solve_many(rhs, 1);
    }
}
