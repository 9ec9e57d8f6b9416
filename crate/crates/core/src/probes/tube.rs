//! Comb tube geometry and per-box event detectors for a walk that travels
//! along a coordinate axis through boxes of side `m`.
//!
//! Box `j` is the cube of side `m` centered at `x_j = j m e_axis`, i.e. the
//! slab `Q[a_j, a_{j+1}]` with `a_j = (j - 1/2) m`. All hitting times are
//! integer times: `t(a)` is the first index at which the walk sits on the
//! face `Q(a)`, whose axial coordinate is `ceil(a)`.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticePoint;
use crate::geometry::LatticePath;
use crate::lerw::loop_erase_slice;
use crate::rng::{DirectionSampler, RngConfig};
use crate::srw::{nice_cut_points, walk_until};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeGeometry {
    /// Box side length.
    pub m: u64,
    /// Scale parameter `N`; the tube consists of boxes `1..=N`.
    pub scale: u64,
    /// Backtrack scale.
    pub q: f64,
    /// Coordinate index of the tube axis.
    pub axis: usize,
}

impl TubeGeometry {
    /// Geometry with `q = m / N^2`.
    pub fn new(m: u64, scale: u64, axis: usize) -> Result<Self> {
        if scale == 0 {
            return Err(Error::invalid("N must be at least 1"));
        }
        Self::with_q(m, scale, m as f64 / (scale * scale) as f64, axis)
    }

    pub fn with_q(m: u64, scale: u64, q: f64, axis: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("box side must be positive"));
        }
        if axis > 2 {
            return Err(Error::invalid("axis must be 0, 1 or 2"));
        }
        if !(q >= 1.0) {
            return Err(Error::invalid(format!("backtrack scale q = {q} must be at least 1")));
        }
        Ok(TubeGeometry { m, scale, q, axis })
    }

    /// `(axial, transverse_1, transverse_2)` coordinates.
    #[inline]
    pub fn frame(&self, p: &LatticePoint) -> (i64, i64, i64) {
        match self.axis {
            0 => (p.x, p.y, p.z),
            1 => (p.y, p.z, p.x),
            _ => (p.z, p.x, p.y),
        }
    }

    /// Point with the given frame coordinates.
    pub fn point(&self, axial: i64, t1: i64, t2: i64) -> LatticePoint {
        match self.axis {
            0 => LatticePoint::new(axial, t1, t2),
            1 => LatticePoint::new(t2, axial, t1),
            _ => LatticePoint::new(t1, t2, axial),
        }
    }

    /// `a_j = (j - 1/2) m`.
    pub fn a(&self, j: i64) -> f64 {
        (j as f64 - 0.5) * self.m as f64
    }

    /// Axial coordinate of the face `Q(a)`.
    pub fn slab(a: f64) -> i64 {
        a.ceil() as i64
    }

    pub fn box_center(&self, j: i64) -> LatticePoint {
        self.point(j * self.m as i64, 0, 0)
    }

    fn within(&self, t: i64, half_width: f64) -> bool {
        (t.unsigned_abs() as f64) <= half_width
    }

    /// `Q[a, b]`: `a <= axial <= b` and both transverse coordinates in `[-m, m]`.
    #[inline]
    pub fn in_tube(&self, p: &LatticePoint, a: f64, b: f64) -> bool {
        let (x, t1, t2) = self.frame(p);
        let m = self.m as f64;
        a <= x as f64 && x as f64 <= b && self.within(t1, m) && self.within(t2, m)
    }

    /// `Q(a)`.
    #[inline]
    pub fn on_face(&self, p: &LatticePoint, a: f64) -> bool {
        let (x, t1, t2) = self.frame(p);
        let m = self.m as f64;
        x == Self::slab(a) && self.within(t1, m) && self.within(t2, m)
    }

    /// `Q~(a)`: the part of the face with transverse coordinates in `[-m/2, m/2]`.
    pub fn on_inner_face(&self, p: &LatticePoint, a: f64) -> bool {
        let (x, t1, t2) = self.frame(p);
        let h = self.m as f64 / 2.0;
        x == Self::slab(a) && self.within(t1, h) && self.within(t2, h)
    }

    /// `R_j`: the plane through `x_j` minus the annulus
    /// `m/10 <= |transverse| <= m/8`.
    #[inline]
    pub fn in_forbidden(&self, p: &LatticePoint, j: i64) -> bool {
        let (x, t1, t2) = self.frame(p);
        if x != j * self.m as i64 {
            return false;
        }
        let r2 = (t1 as i128).pow(2) + (t2 as i128).pow(2);
        let m2 = (self.m as i128).pow(2);
        100 * r2 < m2 || 64 * r2 > m2
    }

    /// Membership in the box `B_inf(x_j, m/2)`.
    pub fn in_box(&self, p: &LatticePoint, j: i64) -> bool {
        let (x, t1, t2) = self.frame(p);
        let h = self.m as f64 / 2.0;
        self.within(x - j * self.m as i64, h) && self.within(t1, h) && self.within(t2, h)
    }

    /// First index at which the path lies on `Q(a)`.
    pub fn hitting_time(&self, path: &[LatticePoint], a: f64) -> Option<usize> {
        path.iter().position(|p| self.on_face(p, a))
    }
}

/// Three-valued detector output: `Undefined` when the recorded path is too
/// short to decide, or when a prerequisite event failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    True,
    False,
    Undefined,
}

impl Flag {
    pub fn from_bool(b: bool) -> Self {
        if b { Flag::True } else { Flag::False }
    }

    pub fn is_true(self) -> bool {
        self == Flag::True
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Flag::True => "true",
            Flag::False => "false",
            Flag::Undefined => "undefined",
        }
    }
}

/// `A_j` for `j >= 1`, or `A_0` for `j == 0`.
pub fn event_a(path: &[LatticePoint], geom: &TubeGeometry, j: i64) -> Flag {
    if j == 0 {
        return event_a0(path, geom);
    }
    let (aj, aj1) = (geom.a(j), geom.a(j + 1));
    let Some(start) = geom.hitting_time(path, aj) else {
        return Flag::Undefined;
    };
    if let Some(t) = geom.hitting_time(path, aj1) {
        if t <= start {
            return Flag::False;
        }
    }
    let mut end = None;
    for (i, p) in path.iter().enumerate().skip(start) {
        if !geom.in_tube(p, aj - geom.q, aj1) || geom.in_forbidden(p, j) {
            return Flag::False;
        }
        if geom.on_face(p, aj1) {
            end = Some(i);
            break;
        }
    }
    let Some(end) = end else {
        return Flag::Undefined;
    };
    if !geom.on_inner_face(&path[end], aj1) {
        return Flag::False;
    }
    // no big backtracking at the end of the box
    let Some(back) = geom.hitting_time(&path[..=end], aj1 - geom.q) else {
        return Flag::False;
    };
    let ok = path[back..=end].iter().all(|p| geom.in_tube(p, aj1 - 2.0 * geom.q, aj1));
    Flag::from_bool(ok)
}

fn event_a0(path: &[LatticePoint], geom: &TubeGeometry) -> Flag {
    let a1 = geom.a(1);
    let mut end = None;
    for (i, p) in path.iter().enumerate() {
        if !geom.in_box(p, 0) {
            return Flag::False;
        }
        if geom.on_face(p, a1) {
            end = Some(i);
            break;
        }
    }
    let Some(end) = end else {
        return Flag::Undefined;
    };
    if !geom.on_inner_face(&path[end], a1) {
        return Flag::False;
    }
    let Some(back) = geom.hitting_time(&path[..=end], a1 - geom.q) else {
        return Flag::False;
    };
    let ok = path[back..=end].iter().all(|p| !geom.on_face(p, a1 - 2.0 * geom.q));
    Flag::from_bool(ok)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeEventParams {
    /// Length constant `C` in `len(lambda_j) <= C m^beta`.
    pub length_constant: f64,
    /// Hittability threshold `eta`.
    pub eta: f64,
    /// Walks per hittability estimate.
    pub hit_trials: u64,
    pub beta: f64,
}

impl Default for TubeEventParams {
    fn default() -> Self {
        TubeEventParams { length_constant: 1.0, eta: 0.1, hit_trials: 1000, beta: crate::DEFAULT_BETA }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxEvents {
    pub j: i64,
    pub a: Flag,
    /// A nice cut point exists (defined only when `a` holds; never for j = 0).
    pub b: Flag,
    pub e: Flag,
    pub f: Flag,
    /// Length of the loop-erased excursion through the box.
    pub lambda_len: Option<usize>,
    pub hit_probability: Option<f64>,
    pub hit_stderr: Option<f64>,
}

pub type EventFlags = Vec<BoxEvents>;

/// Evaluates `A_j, B_j, E_j, F_j` for boxes `0..=N` along the path.
///
/// The excursion through box `j >= 1` is `S[t(a_j), t(a_{j+1})]`; for `j = 0`
/// it is `S[0, t(a_1)]`. `F_j` estimates by Monte Carlo the probability that
/// an independent walk from `x_j`, run until it is at Euclidean distance
/// `2m/5` from `x_j`, meets the loop-erased excursion.
pub fn tube_event_check(path: &LatticePath, geom: &TubeGeometry, params: &TubeEventParams, rng: &RngConfig) -> EventFlags {
    let v = path.vertices();
    (0..=geom.scale as i64)
        .map(|j| {
            let a = event_a(v, geom, j);
            let b = if j == 0 || !a.is_true() {
                Flag::Undefined
            } else {
                Flag::from_bool(!nice_cut_points(path, geom, j).is_empty())
            };
            let span = if j == 0 {
                geom.hitting_time(v, geom.a(1)).map(|e| (0, e))
            } else {
                match (geom.hitting_time(v, geom.a(j)), geom.hitting_time(v, geom.a(j + 1))) {
                    (Some(s), Some(e)) if s < e => Some((s, e)),
                    _ => None,
                }
            };
            let Some((s, e)) = span else {
                return BoxEvents {
                    j,
                    a,
                    b,
                    e: Flag::Undefined,
                    f: Flag::Undefined,
                    lambda_len: None,
                    hit_probability: None,
                    hit_stderr: None,
                };
            };
            let lambda = loop_erase_slice(&v[s..=e]);
            let len = lambda.len() - 1;
            let bound = params.length_constant * (geom.m as f64).powf(params.beta);
            let (prob, se) = hit_probability(&lambda, geom.box_center(j), geom.m, params.hit_trials, &rng.child(j as u64));
            BoxEvents {
                j,
                a,
                b,
                e: Flag::from_bool(len as f64 <= bound),
                f: Flag::from_bool(prob >= params.eta),
                lambda_len: Some(len),
                hit_probability: Some(prob),
                hit_stderr: Some(se),
            }
        })
        .collect()
}

/// Monte Carlo estimate (and binomial standard error) of the probability
/// that a walk from `center`, stopped at Euclidean distance `2m/5`, visits
/// `curve`.
pub fn hit_probability(curve: &[LatticePoint], center: LatticePoint, m: u64, trials: u64, rng: &RngConfig) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let set: FxHashSet<LatticePoint> = curve.iter().copied().collect();
    let m2 = (m as i128).pow(2);
    let mut buf = Vec::new();
    let mut hits = 0u64;
    for t in 0..trials {
        let mut dirs = DirectionSampler::new(rng.child(t).rng());
        let mut hit = false;
        // stop at 25 |R - x|^2 >= 4 m^2, or as soon as the curve is met
        walk_until(center, &mut dirs, u64::MAX, &mut buf, |p| {
            if set.contains(p) {
                hit = true;
                return true;
            }
            let d2 = (p.x as i128 - center.x as i128).pow(2)
                + (p.y as i128 - center.y as i128).pow(2)
                + (p.z as i128 - center.z as i128).pow(2);
            25 * d2 >= 4 * m2
        });
        hits += hit as u64;
    }
    let f = hits as f64 / trials as f64;
    (f, (f * (1.0 - f) / trials as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFrequency {
    pub scale: u64,
    pub m: u64,
    pub q: f64,
    pub trials: u64,
    pub hits: u64,
}

impl EventFrequency {
    pub fn frequency(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    pub fn stderr(&self) -> f64 {
        let f = self.frequency();
        (f * (1.0 - f) / self.trials as f64).sqrt()
    }
}

/// Empirical frequency of `A_1` for walks started at the center of
/// `Q~(a_1)`. Each walk runs until it leaves `Q[a_1 - q, a_2]`, enters `R_1`
/// or reaches `Q(a_2)`, after which `A_1` is decided by [`event_a`].
pub fn a1_frequency(geom: &TubeGeometry, trials: u64, rng: &RngConfig) -> EventFrequency {
    use rayon::prelude::*;
    const CHUNK: u64 = 1024;
    let start = geom.point(TubeGeometry::slab(geom.a(1)), 0, 0);
    let (a1, a2) = (geom.a(1), geom.a(2));
    let chunks = trials.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut buf = Vec::new();
            let mut hits = 0;
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut dirs = DirectionSampler::new(rng.child(t).rng());
                walk_until(start, &mut dirs, u64::MAX, &mut buf, |p| {
                    !geom.in_tube(p, a1 - geom.q, a2) || geom.in_forbidden(p, 1) || geom.on_face(p, a2)
                });
                hits += event_a(&buf, geom, 1).is_true() as u64;
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    EventFrequency { scale: geom.scale, m: geom.m, q: geom.q, trials, hits }
}
