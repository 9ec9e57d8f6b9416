//! Volume and heat-kernel scaling across independent tree samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticePoint;
use crate::rng::RngConfig;
use crate::stats::{fit_power_law, mean_stderr, median, quantile, sample_variance, ExponentFit};
use crate::treewalk::return_probability_bounds;
use crate::ust::{BallRow, SpanningTree};
use crate::wilson::{BallExplorer, UstWindowConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub r: u64,
    pub median: f64,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    /// Samples whose ball was unclipped and entered the statistics.
    pub used: usize,
    pub clipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeScaling {
    pub rows: Vec<VolumeRow>,
    /// Fit of log median volume against log r.
    pub fit: ExponentFit,
    /// `3 / beta`.
    pub target: f64,
    /// Radii dropped because every sample was clipped there.
    pub dropped: Vec<u64>,
}

/// `|B_U(x, r)|` for each requested radius (`radii` increasing).
pub fn volume_profile(t: &SpanningTree, x: &LatticePoint, radii: &[u64]) -> Result<Vec<BallRow>> {
    let max_r = radii.iter().copied().max().unwrap_or(0);
    let prof = t.ball_profile(x, max_r)?;
    Ok(radii.iter().map(|&r| prof[r as usize]).collect())
}

/// Summary table and fit from per-sample profiles (each indexed like `radii`).
pub fn volume_table(profiles: &[Vec<BallRow>], radii: &[u64], beta: f64) -> Result<VolumeScaling> {
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let vols: Vec<f64> = profiles.iter().filter(|p| !p[i].clipped).map(|p| p[i].volume as f64).collect();
        let clipped = profiles.len() - vols.len();
        if vols.is_empty() {
            dropped.push(r);
            continue;
        }
        rows.push(VolumeRow {
            r,
            median: median(&vols),
            mean: mean_stderr(&vols).0,
            q25: quantile(&vols, 0.25),
            q75: quantile(&vols, 0.75),
            used: vols.len(),
            clipped,
        });
    }
    let xs: Vec<u64> = rows.iter().map(|r| r.r).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median).collect();
    let fit = fit_power_law(&xs, &ys)?;
    Ok(VolumeScaling { rows, fit, target: 3.0 / beta, dropped })
}

/// Samples `samples` trees (sample `i` from `rng.child(i)`), each explored
/// just far enough to know `B_U(0, max r)`, and fits the median volume.
pub fn volume_scaling_experiment(
    window: &UstWindowConfig,
    radii: &[u64],
    samples: u64,
    beta: f64,
    rng: &RngConfig,
) -> Result<VolumeScaling> {
    check_increasing(radii)?;
    let max_r = *radii.last().expect("nonempty radii");
    let profiles: Vec<Vec<BallRow>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut ex = BallExplorer::new(window, &rng.child(i))?;
            ex.explore_to(max_r)?;
            let t = ex.into_tree()?;
            volume_profile(&t, &LatticePoint::ORIGIN, radii)
        })
        .collect::<Result<_>>()?;
    volume_table(&profiles, radii, beta)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelRow {
    pub n: u64,
    /// Median over samples of `p_{2n}(0, 0)`.
    pub median: f64,
    pub mean: f64,
    pub q25: f64,
    pub q75: f64,
    /// Mean and variance across samples of `n^{3/(3+beta)} p_{2n}(0, 0)`.
    pub normalized_mean: f64,
    pub normalized_variance: f64,
    /// Largest `(upper - lower) / lower` of the per-sample brackets.
    pub max_relative_gap: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelScaling {
    pub rows: Vec<HeatKernelRow>,
    /// Fit of log median `p_{2n}(0,0)` against log n.
    pub fit: ExponentFit,
    /// `-3 / (3 + beta)`.
    pub target: f64,
}

/// Summary table from per-sample brackets `(lower, upper)` for `p_{2n}`,
/// each indexed like `ns`. Statistics use the lower end.
pub fn heat_kernel_table(brackets: &[Vec<(f64, f64)>], ns: &[u64], beta: f64) -> Result<HeatKernelScaling> {
    let expo = 3.0 / (3.0 + beta);
    let rows: Vec<HeatKernelRow> = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let vals: Vec<f64> = brackets.iter().map(|b| b[i].0).collect();
            let norm: Vec<f64> = vals.iter().map(|v| v * (n as f64).powf(expo)).collect();
            let gap = brackets
                .iter()
                .map(|b| if b[i].0 > 0.0 { (b[i].1 - b[i].0) / b[i].0 } else { f64::INFINITY })
                .fold(0.0, f64::max);
            HeatKernelRow {
                n,
                median: median(&vals),
                mean: mean_stderr(&vals).0,
                q25: quantile(&vals, 0.25),
                q75: quantile(&vals, 0.75),
                normalized_mean: mean_stderr(&norm).0,
                normalized_variance: sample_variance(&norm),
                max_relative_gap: gap,
                samples: vals.len(),
            }
        })
        .collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median).collect();
    let fit = fit_power_law(ns, &ys)?;
    Ok(HeatKernelScaling { rows, fit, target: -expo })
}

/// `p_{2n}(0, 0)` on independent trees, each explored to intrinsic radius
/// `explore_radius`; the walk is killed on leaving that ball, which yields
/// a certified bracket per sample (see [`return_probability_bounds`]).
pub fn heat_kernel_scaling_experiment(
    window: &UstWindowConfig,
    ns: &[u64],
    samples: u64,
    explore_radius: u64,
    beta: f64,
    rng: &RngConfig,
) -> Result<HeatKernelScaling> {
    check_increasing(ns)?;
    let brackets: Vec<Vec<(f64, f64)>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut ex = BallExplorer::new(window, &rng.child(i))?;
            ex.explore_to(explore_radius + 1)?;
            let t = ex.into_tree()?;
            let b = return_probability_bounds(&t, &LatticePoint::ORIGIN, ns, explore_radius)?;
            Ok(b.into_iter().map(|(_, lo, hi)| (lo, hi)).collect())
        })
        .collect::<Result<_>>()?;
    heat_kernel_table(&brackets, ns, beta)
}

fn check_increasing(xs: &[u64]) -> Result<()> {
    if xs.len() < 2 || xs.windows(2).any(|w| w[0] >= w[1]) || xs[0] == 0 {
        return Err(Error::invalid("need at least two positive, strictly increasing values"));
    }
    Ok(())
}
