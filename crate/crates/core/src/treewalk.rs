//! Simple random walk on a spanning tree and its quenched heat kernel
//! `p_n(x, y) = P_x(X_n = y) / mu(y)`.
//!
//! Exact values come from iterating the distribution vector on the
//! intrinsic ball around the start. For even `n = 2m` the return kernel is
//! evaluated as `sum_y P_x(X_m = y)^2 / mu(y)` (reversibility), which halves
//! the number of iterations and only needs the tree within distance `m`.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticePoint;
use crate::rng::{DirectionSampler, RngConfig};
use crate::ust::SpanningTree;

/// Allowed normalization drift of the distribution vector.
pub const DRIFT_TOLERANCE: f64 = 1e-10;

const MC_CHUNK: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelEstimate {
    pub value: f64,
    /// Zero for exact values.
    pub stderr: f64,
    pub n: u64,
    /// Zero for exact values.
    pub trials: u64,
}

impl HeatKernelEstimate {
    fn exact(value: f64, n: u64) -> Self {
        HeatKernelEstimate { value, stderr: 0.0, n, trials: 0 }
    }
}

/// Walk distribution restricted to `B_U(x, D)`. Mass that steps out of the
/// ball, or onto a vertex whose tree edges are not all known, is removed
/// and counted as leaked, so every stored probability is a lower bound for
/// the unrestricted one.
pub struct Evolution<'t> {
    tree: &'t SpanningTree,
    nodes: Vec<u32>,
    local: FxHashMap<u32, u32>,
    /// `prefix[k]` = number of nodes at distance `<= k`.
    prefix: Vec<usize>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    inv_deg: Vec<f64>,
    /// Neighbors outside the ball.
    outside: Vec<u32>,
    sink: Vec<bool>,
    p: Vec<f64>,
    q: Vec<f64>,
    steps: u64,
    leaked: f64,
}

impl<'t> Evolution<'t> {
    pub fn new(tree: &'t SpanningTree, x: &LatticePoint, radius: u64) -> Result<Self> {
        let c = tree.require(x)?;
        let layers = tree.layers(c, radius);
        let nodes = layers.order;
        let local: FxHashMap<u32, u32> = nodes.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let mut prefix = vec![0usize; radius as usize + 1];
        for &d in &layers.dist {
            prefix[d as usize] += 1;
        }
        for k in 1..prefix.len() {
            prefix[k] += prefix[k - 1];
        }
        let mut adj_start = Vec::with_capacity(nodes.len() + 1);
        let mut adj = Vec::new();
        let mut outside = Vec::with_capacity(nodes.len());
        let mut sink = Vec::with_capacity(nodes.len());
        let mut inv_deg = Vec::with_capacity(nodes.len());
        for &v in &nodes {
            adj_start.push(adj.len() as u32);
            let is_sink = tree.is_boundary(v) || !tree.is_complete(v);
            sink.push(is_sink);
            inv_deg.push(1.0 / tree.degree(v).max(1) as f64);
            let mut out = 0;
            if !is_sink {
                for w in tree.neighbors(v) {
                    match local.get(w) {
                        Some(&l) => adj.push(l),
                        None => out += 1,
                    }
                }
            }
            outside.push(out);
        }
        adj_start.push(adj.len() as u32);
        let mut p = vec![0.0; nodes.len()];
        p[0] = 1.0;
        let q = vec![0.0; nodes.len()];
        Ok(Evolution { tree, nodes, local, prefix, adj_start, adj, inv_deg, outside, sink, p, q, steps: 0, leaked: 0.0 })
    }

    fn support(&self, steps: u64) -> usize {
        self.prefix[(steps as usize).min(self.prefix.len() - 1)]
    }

    pub fn step(&mut self) {
        let lim = self.support(self.steps);
        let next_lim = self.support(self.steps + 1);
        self.q[..next_lim].fill(0.0);
        for v in 0..lim {
            let pv = self.p[v];
            if pv == 0.0 {
                continue;
            }
            if self.sink[v] {
                self.leaked += pv;
                continue;
            }
            let share = pv * self.inv_deg[v];
            for &w in &self.adj[self.adj_start[v] as usize..self.adj_start[v + 1] as usize] {
                self.q[w as usize] += share;
            }
            self.leaked += share * self.outside[v] as f64;
        }
        std::mem::swap(&mut self.p, &mut self.q);
        self.steps += 1;
    }

    pub fn run(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Mass removed so far.
    pub fn leaked(&self) -> f64 {
        self.leaked
    }

    /// `|sum p + leaked - 1|`.
    pub fn drift(&self) -> f64 {
        let total: f64 = self.p[..self.support(self.steps)].iter().sum();
        (total + self.leaked - 1.0).abs()
    }

    pub fn check_drift(&self) -> Result<()> {
        let drift = self.drift();
        if drift < DRIFT_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NormalizationDrift { drift, steps: self.steps })
        }
    }

    /// Mass sitting on sinks plus mass already removed.
    pub fn lost_mass(&self) -> f64 {
        let on_sinks: f64 = (0..self.support(self.steps)).filter(|&v| self.sink[v]).map(|v| self.p[v]).sum();
        self.leaked + on_sinks
    }

    pub fn probability(&self, y: &LatticePoint) -> f64 {
        self.tree.id(y).and_then(|id| self.local.get(&id)).map_or(0.0, |&l| self.p[l as usize])
    }

    /// `(point, probability)` over the vertices carrying mass.
    pub fn iter(&self) -> impl Iterator<Item = (LatticePoint, f64)> + '_ {
        (0..self.support(self.steps)).filter(|&v| self.p[v] > 0.0).map(|v| (self.tree.point(self.nodes[v]), self.p[v]))
    }

    /// Bracket for `p_{2 steps}(x, x)`:
    /// `lower = sum_y p(y)^2 / mu(y)` over known vertices and
    /// `upper = lower + eps (2 max p/mu + eps)`, where `eps` is the lost mass.
    pub fn return_bounds(&self) -> (f64, f64) {
        let mut lower = 0.0;
        let mut peak: f64 = 0.0;
        for v in 0..self.support(self.steps) {
            if self.sink[v] {
                continue;
            }
            let w = self.p[v] * self.inv_deg[v];
            lower += self.p[v] * w;
            peak = peak.max(w);
        }
        let eps = self.lost_mass();
        (lower, lower + eps * (2.0 * peak + eps))
    }
}

fn require_unclipped(t: &SpanningTree, x: &LatticePoint, r: u64) -> Result<()> {
    if t.intrinsic_ball(x, r)?.clipped {
        return Err(Error::ClippedBall { center: *x, radius: r });
    }
    Ok(())
}

/// Distribution of `X_n` for the walk from `x`. Requires `B_U(x, n + 1)` to
/// be unclipped.
pub fn evolve<'t>(t: &'t SpanningTree, x: &LatticePoint, n: u64) -> Result<Evolution<'t>> {
    require_unclipped(t, x, n + 1)?;
    let mut ev = Evolution::new(t, x, n)?;
    ev.run(n);
    ev.check_drift()?;
    Ok(ev)
}

/// `P_x(X_n = y)`.
pub fn transition_probability(t: &SpanningTree, x: &LatticePoint, y: &LatticePoint, n: u64) -> Result<f64> {
    t.require(y)?;
    Ok(evolve(t, x, n)?.probability(y))
}

/// `p_n(x, y) = P_x(X_n = y) / mu(y)`.
pub fn heat_kernel_between(t: &SpanningTree, x: &LatticePoint, y: &LatticePoint, n: u64) -> Result<f64> {
    let mu = t.degree_measure(y)? as f64;
    Ok(transition_probability(t, x, y, n)? / mu)
}

/// Exact `p_n(x, x)`. Odd `n` gives 0 (trees are bipartite); even `n`
/// requires `B_U(x, n/2 + 1)` to be unclipped.
pub fn heat_kernel_exact(t: &SpanningTree, x: &LatticePoint, n: u64) -> Result<HeatKernelEstimate> {
    t.require(x)?;
    if n % 2 == 1 {
        return Ok(HeatKernelEstimate::exact(0.0, n));
    }
    let m = n / 2;
    require_unclipped(t, x, m + 1)?;
    let mut ev = Evolution::new(t, x, m)?;
    ev.run(m);
    ev.check_drift()?;
    debug_assert_eq!(ev.lost_mass(), 0.0);
    Ok(HeatKernelEstimate::exact(ev.return_bounds().0, n))
}

/// Monte Carlo `p_n(x, x)` from `trials` independent walks. Trials run in
/// chunks of 1024; chunk `c` draws from `rng.child(c)`.
pub fn heat_kernel_mc(t: &SpanningTree, x: &LatticePoint, n: u64, trials: u64, rng: &RngConfig) -> Result<HeatKernelEstimate> {
    let c = t.require(x)?;
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if n % 2 == 1 {
        return Ok(HeatKernelEstimate { value: 0.0, stderr: 0.0, n, trials });
    }
    let half = n / 2;
    require_unclipped(t, x, half + 1)?;
    // distances to x on the part of the tree a returning walk can visit
    let layers = t.layers(c, half);
    let dist: FxHashMap<u32, u32> = layers.order.iter().copied().zip(layers.dist.iter().copied()).collect();
    let chunks = trials.div_ceil(MC_CHUNK);
    let returns: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut dirs = DirectionSampler::new(rng.child(chunk).rng());
            let mut hits = 0u64;
            for _ in chunk * MC_CHUNK..((chunk + 1) * MC_CHUNK).min(trials) {
                let mut v = c;
                let mut ok = true;
                for s in 0..n {
                    let nb = t.neighbors(v);
                    v = nb[dirs.below(nb.len())];
                    match dist.get(&v) {
                        Some(&d) if (d as u64) < n - s => {}
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
                hits += (ok && v == c) as u64;
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let mu = t.degree(c) as f64;
    let f = returns as f64 / trials as f64;
    Ok(HeatKernelEstimate { value: f / mu, stderr: (f * (1.0 - f) / trials as f64).sqrt() / mu, n, trials })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bk06Check {
    pub r: u64,
    pub volume: usize,
    /// `2 r |B_U(x, r)|`.
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `p_{2r|B|}(x, x) <= 2/|B|` with `B = B_U(x, r)`.
pub fn bk06_bound_check(t: &SpanningTree, x: &LatticePoint, r: u64) -> Result<Bk06Check> {
    let ball = t.intrinsic_ball(x, r)?;
    if ball.clipped {
        return Err(Error::ClippedBall { center: *x, radius: r });
    }
    let n = 2 * r * ball.volume as u64;
    let lhs = heat_kernel_exact(t, x, n)?.value;
    let rhs = 2.0 / ball.volume as f64;
    Ok(Bk06Check { r, volume: ball.volume, n, lhs, rhs, holds: lhs <= rhs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bk06Scan {
    pub requested: u64,
    /// Largest radius that could be checked.
    pub reached: u64,
    pub checks: Vec<Bk06Check>,
}

impl Bk06Scan {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Runs [`bk06_bound_check`] for `r = 1..=r_max`, stopping at the first
/// radius whose kernel needs more of the tree than is known.
pub fn bk06_scan(t: &SpanningTree, x: &LatticePoint, r_max: u64) -> Result<Bk06Scan> {
    let mut checks = Vec::new();
    for r in 1..=r_max {
        match bk06_bound_check(t, x, r) {
            Ok(c) => checks.push(c),
            Err(Error::ClippedBall { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(Bk06Scan { requested: r_max, reached: checks.len() as u64, checks })
}

/// Certified bracket for `p_{2n}(x, x)`, `n` in `ns` (increasing), from one
/// walk killed on leaving `B_U(x, radius)`.
pub fn return_probability_bounds(t: &SpanningTree, x: &LatticePoint, ns: &[u64], radius: u64) -> Result<Vec<(u64, f64, f64)>> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("step counts must be strictly increasing"));
    }
    let mut ev = Evolution::new(t, x, radius)?;
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        ev.run(n - ev.steps());
        let (lo, hi) = ev.return_bounds();
        out.push((n, lo, hi));
    }
    ev.check_drift()?;
    Ok(out)
}
