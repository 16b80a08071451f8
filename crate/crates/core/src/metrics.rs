use crate::error::{Error, Result};

/// Relative error `Σ|xᵢ − x̂ᵢ| / Σ|xᵢ|`.
pub fn relative_error(x_ref: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x_ref.len() != x_hat.len() {
        return Err(Error::Dimension(format!(
            "reference has {} entries, estimate has {}",
            x_ref.len(),
            x_hat.len()
        )));
    }
    let denom: f64 = x_ref.iter().map(|x| x.abs()).sum();
    if denom == 0.0 {
        return Err(Error::Config("relative error against an all-zero reference".into()));
    }
    let num: f64 = x_ref.iter().zip(x_hat).map(|(x, y)| (x - y).abs()).sum();
    Ok(num / denom)
}
