//! Least-squares polynomial fits with R² and Akaike scores.

use nalgebra::{DMatrix, DVector};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// c₀, c₁, … in increasing powers.
    pub coeffs: Vec<f64>,
    pub rss: f64,
    pub r2: f64,
    /// n ln(RSS/n) + 2p with p the number of coefficients.
    pub aic: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

pub fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<PolyFit> {
    let n = x.len();
    let p = degree + 1;
    if n != y.len() || n <= p {
        return Err(CliError::Config(format!("degree-{degree} fit needs more than {p} points, got {n}")));
    }
    let a = DMatrix::from_fn(n, p, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let c = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| CliError::Config(format!("least squares failed: {e}")))?;
    let resid = &a * &c - &b;
    let rss = resid.norm_squared();
    let mean = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    let aic = n as f64 * (rss / n as f64).max(f64::MIN_POSITIVE).ln() + 2.0 * p as f64;
    Ok(PolyFit { coeffs: c.iter().copied().collect(), rss, r2, aic })
}

/// Slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    if lx.len() == 2 {
        return Ok((ly[1] - ly[0]) / (lx[1] - lx[0]));
    }
    Ok(polyfit(&lx, &ly, 1)?.coeffs[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = polyfit(&x, &y, 1).unwrap();
        assert!((f.coeffs[0] - 2.0).abs() < 1e-12 && (f.coeffs[1] + 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_wins_on_curved_data() {
        let x = [0.0f64, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| v * v + 0.01 * (v * 7.0).sin()).collect();
        let lin = polyfit(&x, &y, 1).unwrap();
        let quad = polyfit(&x, &y, 2).unwrap();
        assert!(quad.aic < lin.aic);
        assert!((quad.eval(2.0) - 4.0).abs() < 0.05);
    }

    #[test]
    fn too_few_points() {
        assert!(polyfit(&[1.0, 2.0], &[1.0, 2.0], 1).is_err());
        assert!((loglog_slope(&[1.0, 2.0], &[3.0, 12.0]).unwrap() - 2.0).abs() < 1e-12);
    }
}
