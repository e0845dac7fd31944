//! Log-log scaling exponent fits.
//!
//! Theoretical statements of the form `value ≈ R^α` (modulo `R^ε` losses)
//! are operationalized as least-squares slopes of `log(value)` against
//! `log(R)` across a scan, with a residual-based slope standard error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fitted power law `value ≈ e^intercept · R^slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    /// The raw `(R, value)` pairs that went into the fit.
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
}

/// Least-squares fit of `log(value)` against `log(R)`.
pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit> {
    if pairs.len() < 3 {
        return Err(Error::validation(format!(
            "exponent fit needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    for &(r, v) in pairs {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::validation(format!("non-positive scan point R={r}")));
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::validation(format!("non-positive value {v} at R={r}; fit aborted")));
        }
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|&(r, _)| r.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, v)| v.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::validation("scan points must have distinct R"));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let slope_std_error = if pairs.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ExponentFit {
        pairs: pairs.to_vec(),
        slope,
        intercept,
        slope_std_error,
    })
}

/// Run `recipe` at every scale in `r_list` (strictly increasing, length at
/// least 3) and fit the exponent of the resulting values.
pub fn scan_exponent<F>(recipe: F, r_list: &[f64]) -> Result<ExponentFit>
where
    F: Fn(f64) -> Result<f64>,
{
    if r_list.len() < 3 {
        return Err(Error::validation("scan needs at least 3 values of R"));
    }
    if r_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::validation("R list must be strictly increasing"));
    }
    let mut pairs = Vec::with_capacity(r_list.len());
    for &r in r_list {
        pairs.push((r, recipe(r)?));
    }
    fit_exponent(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_values_fit_zero_slope() {
        let fit = fit_exponent(&[(2.0, 5.0), (4.0, 5.0), (8.0, 5.0)]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(fit.slope_std_error < 1e-12);
    }

    #[test]
    fn quadratic_values_fit_slope_two() {
        let pairs: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&r: &f64| (r, r * r)).collect();
        let fit = fit_exponent(&pairs).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scan_validates_inputs() {
        assert!(scan_exponent(Ok, &[1.0, 2.0]).is_err());
        assert!(scan_exponent(Ok, &[2.0, 1.0, 3.0]).is_err());
        assert!(scan_exponent(|_| Ok(-1.0), &[1.0, 2.0, 4.0]).is_err());
    }
}
