//! Seeded test-matrix and right-hand-side generators.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Wishart,
    Toeplitz,
    Uniform,
}

impl MatrixKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MatrixKind::Wishart => "wishart",
            MatrixKind::Toeplitz => "toeplitz",
            MatrixKind::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wishart" => Ok(MatrixKind::Wishart),
            "toeplitz" => Ok(MatrixKind::Toeplitz),
            "uniform" => Ok(MatrixKind::Uniform),
            other => Err(Error::Config(format!("unknown matrix kind `{other}`"))),
        }
    }
}

/// What to generate. `wishart_m` defaults to `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: MatrixKind,
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub wishart_m: Option<usize>,
    #[serde(default = "default_boost")]
    pub toeplitz_diag_boost: f64,
}

fn default_boost() -> f64 {
    1.0
}

impl GenSpec {
    pub fn new(kind: MatrixKind, n: usize, seed: u64) -> Self {
        GenSpec {
            kind,
            n,
            seed,
            wishart_m: None,
            toeplitz_diag_boost: default_boost(),
        }
    }

    pub fn wishart_rows(&self) -> usize {
        self.wishart_m.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("matrix size {} < 2", self.n)));
        }
        if self.kind == MatrixKind::Wishart && self.wishart_rows() < self.n {
            return Err(Error::Config(format!(
                "wishart_m = {} < n = {}: XᵀX would be singular",
                self.wishart_rows(),
                self.n
            )));
        }
        if !(self.toeplitz_diag_boost >= 0.0 && self.toeplitz_diag_boost.is_finite()) {
            return Err(Error::Config("toeplitz_diag_boost must be a nonnegative number".into()));
        }
        Ok(())
    }
}

/// Generates the matrix described by `spec`.
pub fn generate(spec: &GenSpec) -> Result<Matrix> {
    match spec.kind {
        MatrixKind::Wishart => gen_wishart(spec),
        MatrixKind::Toeplitz => gen_toeplitz(spec),
        MatrixKind::Uniform => gen_uniform(spec),
    }
}

/// `A = XᵀX` with `X` an `m x n` standard-normal matrix.
pub fn gen_wishart(spec: &GenSpec) -> Result<Matrix> {
    expect_kind(spec, MatrixKind::Wishart)?;
    spec.validate()?;
    let (m, n) = (spec.wishart_rows(), spec.n);
    let mut rng = stream(derive_seed(spec.seed, "wishart/X"));
    let data: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    wishart_from_factor(&Matrix::new(m, n, data)?)
}

/// Computes `XᵀX`, filling the upper triangle and mirroring it so the result
/// is bit-exactly symmetric.
pub fn wishart_from_factor(x: &Matrix) -> Result<Matrix> {
    let n = x.cols();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..x.rows()).map(|r| x[(r, i)] * x[(r, j)]).sum();
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    Ok(a)
}

/// Toeplitz matrix with off-diagonal coefficients uniform on `[-1, 1]` and
/// `c[0] = boost + |u|`.
pub fn gen_toeplitz(spec: &GenSpec) -> Result<Matrix> {
    expect_kind(spec, MatrixKind::Toeplitz)?;
    spec.validate()?;
    let n = spec.n;
    let mut rng = stream(derive_seed(spec.seed, "toeplitz/c"));
    let unit = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let mut coeffs: Vec<f64> = (0..2 * n - 1).map(|_| unit.sample(&mut rng)).collect();
    coeffs[n - 1] = spec.toeplitz_diag_boost + coeffs[n - 1].abs();
    toeplitz_from_coeffs(n, &coeffs)
}

/// Builds `A[i][j] = c[i - j]` where `coeffs` lists `c[-(n-1)], ..., c[n-1]`.
pub fn toeplitz_from_coeffs(n: usize, coeffs: &[f64]) -> Result<Matrix> {
    if coeffs.len() != 2 * n - 1 {
        return Err(Error::Dimension(format!(
            "{} Toeplitz coefficients for n = {n} (need {})",
            coeffs.len(),
            2 * n - 1
        )));
    }
    // c[d] lives at offset d + n - 1.
    Ok(Matrix::from_fn(n, n, |i, j| coeffs[i + n - 1 - j]))
}

/// Dense matrix with i.i.d. uniform `[-1, 1]` entries.
pub fn gen_uniform(spec: &GenSpec) -> Result<Matrix> {
    expect_kind(spec, MatrixKind::Uniform)?;
    spec.validate()?;
    let mut rng = stream(derive_seed(spec.seed, "uniform/A"));
    let n = spec.n;
    let data = (0..n * n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    Matrix::new(n, n, data)
}

/// Right-hand side with i.i.d. uniform `[-1, 1]` entries.
pub fn gen_rhs(n: usize, seed: u64) -> Result<Vector> {
    if n == 0 {
        return Err(Error::Config("rhs length must be positive".into()));
    }
    let mut rng = stream(derive_seed(seed, "rhs"));
    Vector::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect())
}

fn expect_kind(spec: &GenSpec, kind: MatrixKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::Config(format!(
            "expected a {} spec, got {}",
            kind.as_str(),
            spec.kind.as_str()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wishart_of_identity_factor_is_identity() {
        let a = wishart_from_factor(&Matrix::identity(2)).unwrap();
        assert_eq!(a, Matrix::identity(2));
    }

    #[test]
    fn wishart_hand_multiplied() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let a = wishart_from_factor(&x).unwrap();
        assert_eq!(a, Matrix::from_rows(&[[10.0, 14.0], [14.0, 20.0]]).unwrap());
    }

    #[test]
    fn wishart_rejects_short_factor() {
        let mut spec = GenSpec::new(MatrixKind::Wishart, 4, 1);
        spec.wishart_m = Some(3);
        assert!(matches!(gen_wishart(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn toeplitz_identity_and_hand_example() {
        let eye = toeplitz_from_coeffs(3, &[0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(eye, Matrix::identity(3));
        let a = toeplitz_from_coeffs(3, &[5.0, 4.0, 1.0, 2.0, 3.0]).unwrap();
        let expected = Matrix::from_rows(&[[1.0, 4.0, 5.0], [2.0, 1.0, 4.0], [3.0, 2.0, 1.0]]).unwrap();
        assert_eq!(a, expected);
    }

    #[test]
    fn toeplitz_boost_sits_on_diagonal() {
        let mut spec = GenSpec::new(MatrixKind::Toeplitz, 6, 3);
        spec.toeplitz_diag_boost = 2.5;
        let a = gen_toeplitz(&spec).unwrap();
        assert!(a[(0, 0)] >= 2.5 && a[(0, 0)] <= 3.5);
    }

    #[test]
    fn rhs_is_deterministic_and_seed_sensitive() {
        assert_eq!(gen_rhs(4, 11).unwrap(), gen_rhs(4, 11).unwrap());
        assert_ne!(gen_rhs(4, 11).unwrap(), gen_rhs(4, 12).unwrap());
        assert!(gen_rhs(0, 1).is_err());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let spec = GenSpec::new(MatrixKind::Uniform, 4, 1);
        assert!(gen_toeplitz(&spec).is_err());
        assert!(generate(&GenSpec::new(MatrixKind::Uniform, 1, 1)).is_err());
    }
}
