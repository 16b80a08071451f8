//! Matrix-to-conductance mapping: normalization, signed split, programming
//! noise and converter quantization.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rng::{derive_seed, stream};

/// Unit conductance used throughout the accuracy experiments, in siemens.
pub const DEFAULT_G0: f64 = 100e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapConfig {
    /// Unit conductance G₀ (S).
    pub g0: f64,
    /// Programming noise std relative to G₀.
    pub sigma_rel: f64,
    /// Lowest conductance a cell can be programmed to (S).
    pub clip_floor: f64,
    pub dac_bits: Option<u32>,
    pub adc_bits: Option<u32>,
    /// One scale factor for every array of a solve instead of one per array.
    pub global_normalization: bool,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            g0: DEFAULT_G0,
            sigma_rel: 0.05,
            clip_floor: 0.0,
            dac_bits: None,
            adc_bits: None,
            global_normalization: false,
        }
    }
}

impl MapConfig {
    /// Noise-free mapping with converters disabled.
    pub fn ideal() -> Self {
        MapConfig {
            sigma_rel: 0.0,
            ..MapConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g0 > 0.0 && self.g0.is_finite()) {
            return Err(Error::Config(format!("g0 must be positive, got {}", self.g0)));
        }
        if !(self.sigma_rel >= 0.0 && self.sigma_rel.is_finite()) {
            return Err(Error::Config(format!("sigma_rel must be >= 0, got {}", self.sigma_rel)));
        }
        if !(self.clip_floor >= 0.0 && self.clip_floor.is_finite()) {
            return Err(Error::Config(format!("clip_floor must be >= 0, got {}", self.clip_floor)));
        }
        for bits in [self.dac_bits, self.adc_bits].into_iter().flatten() {
            if bits == 0 || bits > 52 {
                return Err(Error::Config(format!("converter width {bits} not in 1..=52")));
            }
        }
        Ok(())
    }
}

/// A signed pair of programmed conductance arrays. Immutable once built: the
/// noise drawn at programming time is what every later read sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgrammedArray {
    pub g_plus: Matrix,
    pub g_minus: Matrix,
    /// Factor that maps the normalized matrix back to the source matrix.
    pub scale: f64,
    pub g0: f64,
    pub seed: u64,
}

impl ProgrammedArray {
    pub fn rows(&self) -> usize {
        self.g_plus.rows()
    }

    pub fn cols(&self) -> usize {
        self.g_plus.cols()
    }

    /// `(G₊ − G₋) / G₀`, the dimensionless matrix the circuit actually sees.
    pub fn effective(&self) -> Matrix {
        let g0 = self.g0;
        Matrix::from_fn(self.rows(), self.cols(), |i, j| {
            (self.g_plus[(i, j)] - self.g_minus[(i, j)]) / g0
        })
    }

    /// The source matrix as read back from the devices: `scale · effective`.
    pub fn readback(&self) -> Matrix {
        self.effective().scaled(self.scale)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Divides by the largest absolute entry.
pub fn normalize(a: &Matrix) -> Result<(Matrix, f64)> {
    let s = a.max_abs();
    if s == 0.0 {
        return Err(Error::Config("cannot normalize an all-zero matrix".into()));
    }
    Ok((a.scaled(1.0 / s), s))
}

/// `A = A₊ − A₋` with both parts nonnegative and disjointly supported.
pub fn split_signed(a: &Matrix) -> (Matrix, Matrix) {
    (a.map(|v| v.max(0.0)), a.map(|v| (-v).max(0.0)))
}

/// Programs an already normalized matrix (`max |entry| <= 1`).
pub fn program(a: &Matrix, cfg: &MapConfig, seed: u64) -> Result<ProgrammedArray> {
    program_scaled(a, 1.0, cfg, seed)
}

/// Programs a normalized matrix and records the scale that undoes the
/// normalization.
pub fn program_scaled(a: &Matrix, scale: f64, cfg: &MapConfig, seed: u64) -> Result<ProgrammedArray> {
    cfg.validate()?;
    for i in 0..a.rows() {
        for (j, &v) in a.row(i).iter().enumerate() {
            if v.abs() > 1.0 {
                return Err(Error::Range { row: i, col: j, value: v.abs() });
            }
        }
    }
    let (plus, minus) = split_signed(a);
    Ok(ProgrammedArray {
        g_plus: to_conductance(&plus, cfg, derive_seed(seed, "plus"))?,
        g_minus: to_conductance(&minus, cfg, derive_seed(seed, "minus"))?,
        scale,
        g0: cfg.g0,
        seed,
    })
}

/// Normalizes `a` and programs it in one go.
pub fn map_matrix(a: &Matrix, cfg: &MapConfig, seed: u64) -> Result<ProgrammedArray> {
    let (normalized, s) = normalize(a)?;
    program_scaled(&normalized, s, cfg, seed)
}

fn to_conductance(part: &Matrix, cfg: &MapConfig, seed: u64) -> Result<Matrix> {
    let std = cfg.sigma_rel * cfg.g0;
    if std == 0.0 {
        return Ok(part.map(|v| (v * cfg.g0).max(cfg.clip_floor)));
    }
    let noise = Normal::new(0.0, std).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = stream(seed);
    let data = part
        .data()
        .iter()
        .map(|&v| (v * cfg.g0 + noise.sample(&mut rng)).max(cfg.clip_floor))
        .collect();
    Matrix::new(part.rows(), part.cols(), data)
}

/// Uniform mid-rise quantizer on `[-full_scale, full_scale]` with `2^bits`
/// levels at odd multiples of half a step. Out-of-range inputs saturate.
pub fn quantize(v: &[f64], bits: u32, full_scale: f64) -> Vector {
    if full_scale <= 0.0 {
        return Vector::zeros(v.len());
    }
    let levels = 2f64.powi(bits as i32);
    let step = 2.0 * full_scale / levels;
    let half = levels / 2.0;
    v.iter()
        .map(|&x| {
            let k = (x / step).floor().clamp(-half, half - 1.0);
            (k + 0.5) * step
        })
        .collect::<Vec<_>>()
        .into()
}

/// Applies `quantize` when a width is configured, otherwise passes through.
pub fn quantize_opt(v: &[f64], bits: Option<u32>, full_scale: f64) -> Vector {
    match bits {
        Some(b) => quantize(v, b, full_scale),
        None => Vector::from(v.to_vec()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let a = Matrix::from_rows(&[[2.0, 0.0], [0.0, -4.0]]).unwrap();
        let (n, s) = normalize(&a).unwrap();
        assert_eq!(s, 4.0);
        assert_eq!(n, Matrix::from_rows(&[[0.5, 0.0], [0.0, -1.0]]).unwrap());
        let (n, s) = normalize(&Matrix::identity(3)).unwrap();
        assert_eq!((n, s), (Matrix::identity(3), 1.0));
        assert!(normalize(&Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn split_examples() {
        let a = Matrix::from_rows(&[[1.0, -2.0]]).unwrap();
        let (p, m) = split_signed(&a);
        assert_eq!(p, Matrix::from_rows(&[[1.0, 0.0]]).unwrap());
        assert_eq!(m, Matrix::from_rows(&[[0.0, 2.0]]).unwrap());
        let pos = Matrix::from_rows(&[[1.0, 3.0], [0.0, 2.0]]).unwrap();
        let (p, m) = split_signed(&pos);
        assert_eq!(p, pos);
        assert!(m.is_zero());
    }

    #[test]
    fn noise_free_identity_programs_g0() {
        let arr = program(&Matrix::identity(3), &MapConfig::ideal(), 0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 100e-6 } else { 0.0 };
                assert_eq!(arr.g_plus[(i, j)], expected);
                assert_eq!(arr.g_minus[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn out_of_range_entry_rejected() {
        let a = Matrix::from_rows(&[[0.5, -1.5]]).unwrap();
        assert!(matches!(
            program(&a, &MapConfig::ideal(), 0),
            Err(Error::Range { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn noisy_programming_is_deterministic_and_clipped() {
        let cfg = MapConfig { sigma_rel: 0.05, ..MapConfig::default() };
        let a = Matrix::from_fn(8, 8, |i, j| ((i * 8 + j) as f64 / 63.0) * 2.0 - 1.0);
        let x = program(&a, &cfg, 42).unwrap();
        let y = program(&a, &cfg, 42).unwrap();
        assert_eq!(x, y);
        assert_ne!(x, program(&a, &cfg, 43).unwrap());
        assert!(x.g_plus.data().iter().chain(x.g_minus.data()).all(|&g| g >= 0.0));
    }

    #[test]
    fn quantizer_examples() {
        assert_eq!(quantize(&[0.7], 1, 1.0).as_slice(), &[0.5]);
        assert_eq!(quantize(&[-0.2], 1, 1.0).as_slice(), &[-0.5]);
        // saturation
        assert_eq!(quantize(&[3.0, -3.0], 2, 1.0).as_slice(), &[0.75, -0.75]);
        assert_eq!(quantize_opt(&[0.123], None, 1.0).as_slice(), &[0.123]);
    }

    #[test]
    fn config_validation() {
        assert!(MapConfig { g0: 0.0, ..MapConfig::default() }.validate().is_err());
        assert!(MapConfig { sigma_rel: -0.1, ..MapConfig::default() }.validate().is_err());
        assert!(MapConfig { clip_floor: -1.0, ..MapConfig::default() }.validate().is_err());
        assert!(MapConfig { adc_bits: Some(0), ..MapConfig::default() }.validate().is_err());
    }

    #[test]
    fn json_roundtrip() {
        let arr = map_matrix(&Matrix::from_rows(&[[1.0, -3.0]]).unwrap(), &MapConfig::ideal(), 5).unwrap();
        assert_eq!(ProgrammedArray::from_json(&arr.to_json().unwrap()).unwrap(), arr);
    }
}
