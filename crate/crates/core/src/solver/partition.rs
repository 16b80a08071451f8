use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix, Vector};

/// `A = [[a1, a2], [a3, a4]]`, `b = [f; g]`, with `a1` of size `k x k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub k: usize,
    pub a1: Matrix,
    pub a2: Matrix,
    pub a3: Matrix,
    pub a4: Matrix,
    pub f: Vector,
    pub g: Vector,
}

impl BlockPartition {
    pub fn n(&self) -> usize {
        self.k + self.a4.rows()
    }

    pub fn reassemble(&self) -> Result<(Matrix, Vector)> {
        Ok((
            Matrix::from_blocks(&self.a1, &self.a2, &self.a3, &self.a4)?,
            self.f.concat(&self.g),
        ))
    }
}

/// Default split: `⌈n/2⌉`, so odd sizes put the larger half in `a1`.
pub fn default_split(n: usize) -> usize {
    n.div_ceil(2)
}

/// Splits `A` and `b` at `k` (default `⌈n/2⌉`). Pure copy.
pub fn partition(a: &Matrix, b: &[f64], k: Option<usize>) -> Result<BlockPartition> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} system is not square", a.rows(), a.cols())));
    }
    let n = a.rows();
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs has {} entries for n = {n}", b.len())));
    }
    let k = k.unwrap_or_else(|| default_split(n));
    if k == 0 || k >= n {
        return Err(Error::Config(format!("split index {k} outside 1..={}", n.saturating_sub(1))));
    }
    let m = n - k;
    Ok(BlockPartition {
        k,
        a1: a.block(0, 0, k, k),
        a2: a.block(0, k, k, m),
        a3: a.block(k, 0, m, k),
        a4: a.block(k, k, m, m),
        f: b[..k].to_vec().into(),
        g: b[k..].to_vec().into(),
    })
}

/// `A₄ₛ = A₄ − A₃·A₁⁻¹·A₂`, computed digitally ahead of programming. When
/// either coupling block is zero the result is `A₄` itself.
pub fn schur_complement(p: &BlockPartition) -> Result<Matrix> {
    let lu = Lu::factor(&p.a1).map_err(|e| match e {
        Error::Singular(msg) => Error::Singular(format!("pivot block A1: {msg}")),
        other => other,
    })?;
    if p.a2.is_zero() || p.a3.is_zero() {
        return Ok(p.a4.clone());
    }
    let a1_inv_a2 = lu.solve_matrix(&p.a2)?;
    p.a4.sub(&p.a3.matmul(&a1_inv_a2)?)
}
