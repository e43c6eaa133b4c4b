//! Least-squares fits used by the rate studies.

#[allow(unused_imports)] // float methods come from std when it is linked
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Values below this are rounding noise; power laws are not fitted to them.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    let n = x.len() as f64;
    if x.len() < 2 {
        return Err(Error::FitUnderdetermined);
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::FitUnderdetermined);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit { slope, intercept: my - slope * mx })
}

fn logs(v: &[f64], what: &'static str) -> Result<Vec<f64>> {
    v.iter()
        .map(|&a| if a > 0.0 && a.is_finite() { Ok(a.ln()) } else { Err(Error::InvalidParameter(what)) })
        .collect()
}

fn max_relative_residual(y: &[f64], model: impl Fn(usize) -> f64) -> f64 {
    y.iter()
        .enumerate()
        .map(|(i, &v)| ((v - model(i)) / v).abs())
        .fold(0.0, f64::max)
}

/// `y ≈ prefactor · x^exponent`, fitted on logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub max_relative_residual: f64,
}

pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    let lx = logs(x, "power-law fit needs positive abscissae")?;
    let ly = logs(y, "power-law fit needs positive values")?;
    let f = linear_fit(&lx, &ly)?;
    let prefactor = f.intercept.exp();
    let res = max_relative_residual(y, |i| prefactor * x[i].powf(f.slope));
    Ok(PowerLawFit { exponent: f.slope, prefactor, max_relative_residual: res })
}

/// `y ≈ prefactor · e^{rate·t}`, fitted on logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    pub rate: f64,
    pub prefactor: f64,
    pub max_relative_residual: f64,
}

pub fn exponential_fit(t: &[f64], y: &[f64]) -> Result<ExponentialFit> {
    let ly = logs(y, "exponential fit needs positive values")?;
    let f = linear_fit(t, &ly)?;
    let prefactor = f.intercept.exp();
    let res = max_relative_residual(y, |i| prefactor * (f.slope * t[i]).exp());
    Ok(ExponentialFit { rate: f.slope, prefactor, max_relative_residual: res })
}
