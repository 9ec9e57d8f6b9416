//! Chronological loop erasure, the LERW length `M_n`, growth exponent
//! estimation and tail profiles.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LatticeBox, LatticePath, LatticePoint};
use crate::rng::{DirectionSampler, RngConfig};
use crate::srw::walk_until;
pub use crate::stats::ExponentFit;
use crate::stats::{fit_power_law, linear_fit, mean_stderr};

/// A nearest-neighbor path with pairwise distinct vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimplePath {
    vertices: Vec<LatticePoint>,
}

impl SimplePath {
    pub fn new(vertices: Vec<LatticePoint>) -> Result<Self> {
        let path = LatticePath::new(vertices)?;
        let mut seen = rustc_hash::FxHashSet::default();
        for (i, p) in path.vertices().iter().enumerate() {
            if !seen.insert(*p) {
                return Err(Error::invalid(format!("vertex {p} repeats at index {i}")));
            }
        }
        Ok(SimplePath { vertices: path.into_vertices() })
    }

    pub(crate) fn from_vec_unchecked(vertices: Vec<LatticePoint>) -> Self {
        SimplePath { vertices }
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() <= 1
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<LatticePoint> {
        self.vertices
    }

    pub fn first(&self) -> LatticePoint {
        self.vertices[0]
    }

    pub fn last(&self) -> LatticePoint {
        *self.vertices.last().unwrap()
    }

    pub fn to_path(&self) -> LatticePath {
        LatticePath::from_vec_unchecked(self.vertices.clone())
    }
}

impl From<SimplePath> for LatticePath {
    fn from(p: SimplePath) -> Self {
        LatticePath::from_vec_unchecked(p.vertices)
    }
}

/// Reusable forward loop eraser. Keeps the map from vertex to its index in
/// the partial path so repeated erasures do not reallocate.
#[derive(Default)]
pub struct LoopEraser {
    index: FxHashMap<LatticePoint, usize>,
    out: Vec<LatticePoint>,
}

impl LoopEraser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Erases loops from `path` and returns the result, which borrows the
    /// eraser's buffer.
    pub fn erase(&mut self, path: &[LatticePoint]) -> &[LatticePoint] {
        // remove entries one by one: clearing a map that once held a long
        // branch costs its full capacity on every call
        for q in self.out.drain(..) {
            self.index.remove(&q);
        }
        for &p in path {
            if let Some(&i) = self.index.get(&p) {
                for q in self.out.drain(i + 1..) {
                    self.index.remove(&q);
                }
            } else {
                self.index.insert(p, self.out.len());
                self.out.push(p);
            }
        }
        &self.out
    }
}

pub(crate) fn loop_erase_slice(path: &[LatticePoint]) -> Vec<LatticePoint> {
    LoopEraser::new().erase(path).to_vec()
}

/// Chronological loop erasure.
pub fn loop_erase(path: &LatticePath) -> SimplePath {
    SimplePath::from_vec_unchecked(loop_erase_slice(path.vertices()))
}

/// `M_n`: length of the loop erasure of a walk from the origin stopped on
/// leaving the Euclidean ball of radius `n`.
pub fn sample_m_n(n: u64, rng: &RngConfig) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("radius must be at least 1"));
    }
    Ok(sample_m_n_with(n, rng, &mut LoopEraser::new(), &mut Vec::new()))
}

fn sample_m_n_with(n: u64, rng: &RngConfig, eraser: &mut LoopEraser, buf: &mut Vec<LatticePoint>) -> usize {
    let ball = LatticeBox::euclidean(LatticePoint::ORIGIN, n);
    let mut dirs = DirectionSampler::new(rng.rng());
    walk_until(LatticePoint::ORIGIN, &mut dirs, u64::MAX, buf, |p| ball.reached_radius(p));
    eraser.erase(buf).len() - 1
}

/// `trials` independent samples of `M_n`. Trial `i` uses `rng.child(i)`, so
/// the result does not depend on the thread count.
pub fn sample_m_n_many(n: u64, trials: u64, rng: &RngConfig) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::invalid("radius must be at least 1"));
    }
    Ok((0..trials)
        .into_par_iter()
        .map_init(
            || (LoopEraser::new(), Vec::new()),
            |(eraser, buf), i| sample_m_n_with(n, &rng.child(i), eraser, buf),
        )
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub rows: Vec<BetaRow>,
    pub fit: ExponentFit,
}

impl BetaEstimate {
    pub fn beta(&self) -> f64 {
        self.fit.slope
    }
}

/// Least-squares slope of `log mean(M_n)` against `log n`. Radius `n` uses
/// the stream `rng.child(n)`.
pub fn estimate_beta(radii: &[u64], trials: u64, rng: &RngConfig) -> Result<BetaEstimate> {
    if radii.len() < 2 {
        return Err(Error::DegenerateFit("need at least two radii".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateFit("radii must be strictly increasing".into()));
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let mut rows = Vec::with_capacity(radii.len());
    for &n in radii {
        let samples: Vec<f64> = sample_m_n_many(n, trials, &rng.child(n))?.into_iter().map(|v| v as f64).collect();
        let (mean, stderr) = mean_stderr(&samples);
        rows.push(BetaRow { n, mean, stderr, trials });
    }
    let means: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let fit = fit_power_law(radii, &means)?;
    Ok(BetaEstimate { rows, fit })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub kappa: f64,
    pub upper_freq: f64,
    pub lower_freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProfile {
    pub n: u64,
    pub trials: u64,
    pub mean: f64,
    pub rows: Vec<TailRow>,
}

impl TailProfile {
    /// Slope, intercept and R^2 of `log upper_freq` against `kappa`, over the
    /// rows with positive frequency.
    pub fn upper_tail_fit(&self) -> Result<(f64, f64, f64)> {
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            self.rows.iter().filter(|r| r.upper_freq > 0.0).map(|r| (r.kappa, r.upper_freq.ln())).unzip();
        linear_fit(&xs, &ys)
    }
}

/// Empirical upper and lower tails of `M_n` relative to the sample mean:
/// `P(M_n >= kappa * mean)` and `P(M_n <= mean / kappa)`.
pub fn tail_profile(n: u64, trials: u64, kappas: &[f64], rng: &RngConfig) -> Result<TailProfile> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if kappas.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::invalid("kappa values must be positive"));
    }
    let samples = sample_m_n_many(n, trials, rng)?;
    Ok(tail_profile_of(n, &samples, kappas))
}

/// Tail table for precomputed samples.
pub fn tail_profile_of(n: u64, samples: &[usize], kappas: &[f64]) -> TailProfile {
    let t = samples.len() as f64;
    let mean = samples.iter().map(|&v| v as f64).sum::<f64>() / t;
    let rows = kappas
        .iter()
        .map(|&kappa| {
            let up = samples.iter().filter(|&&v| v as f64 >= kappa * mean).count();
            let lo = samples.iter().filter(|&&v| v as f64 <= mean / kappa).count();
            TailRow { kappa, upper_freq: up as f64 / t, lower_freq: lo as f64 / t }
        })
        .collect();
    TailProfile { n, trials: samples.len() as u64, mean, rows }
}
