//! Small statistics toolkit: log-log regression, chi-square tests and
//! sample summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Least-squares line through `(log x, log y)`; the slope is the exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// `log y - (intercept + slope * log x)` per point.
    pub residuals: Vec<f64>,
    /// The abscissae that entered the fit.
    pub radii: Vec<u64>,
    pub r_squared: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("x and y lengths differ"));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit("need at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateFit("non-finite input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok((slope, intercept, r2))
}

/// Fit `log y = intercept + slope * log x`.
pub fn fit_power_law(xs: &[u64], ys: &[f64]) -> Result<ExponentFit> {
    if ys.iter().any(|&y| y <= 0.0) {
        return Err(Error::DegenerateFit("power law needs positive ordinates".into()));
    }
    if xs.contains(&0) {
        return Err(Error::DegenerateFit("power law needs positive abscissae".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|&x| (x as f64).ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (slope, intercept, r_squared) = linear_fit(&lx, &ly)?;
    let residuals = lx.iter().zip(&ly).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(ExponentFit { slope, intercept, residuals, radii: xs.to_vec(), r_squared })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

impl ChiSquareResult {
    pub fn passes(&self, significance: f64) -> bool {
        self.p_value > significance
    }
}

fn chi2_sf(statistic: f64, dof: u64) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(statistic)
}

/// Goodness of fit of observed counts against the uniform distribution on
/// `counts.len()` cells.
pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquareResult> {
    let k = counts.len();
    if k < 2 {
        return Err(Error::invalid("need at least two cells"));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::invalid("no observations"));
    }
    let expected = total as f64 / k as f64;
    let statistic = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = (k - 1) as u64;
    Ok(ChiSquareResult { statistic, dof, p_value: chi2_sf(statistic, dof) })
}

/// Two-sample chi-square homogeneity test on a 2 x k contingency table.
/// Cells empty in both samples are dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareResult> {
    if a.len() != b.len() {
        return Err(Error::invalid("samples have different numbers of cells"));
    }
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    if na == 0 || nb == 0 {
        return Err(Error::invalid("empty sample"));
    }
    let n = (na + nb) as f64;
    let mut statistic = 0.0;
    let mut cells = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        let ea = col * na as f64 / n;
        let eb = col * nb as f64 / n;
        statistic += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    if cells < 2 {
        return Err(Error::invalid("need at least two non-empty cells"));
    }
    let dof = cells - 1;
    Ok(ChiSquareResult { statistic, dof, p_value: chi2_sf(statistic, dof) })
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// Linear-interpolation quantile (type 7) of an unsorted sample.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}
