//! Simple random walk on Z^3 with stopping rules, cut times and nice cut
//! points.

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::geometry::{LatticeBox, LatticePath, LatticePoint};
use crate::probes::tube::TubeGeometry;
use crate::rng::{DirectionSampler, RngConfig};

/// Default step cap for `HitSet` rules. SRW on Z^3 is transient, so a
/// finite target may never be hit.
pub const DEFAULT_HIT_CAP: u64 = 100_000_000;

#[derive(Clone, Debug)]
pub enum StopRule {
    /// Stop at the first vertex at distance `>= radius` from the center.
    ExitBall(LatticeBox),
    /// Stop at the first vertex in `target`, giving up after `cap` steps.
    HitSet { target: FxHashSet<LatticePoint>, cap: u64 },
    /// Stop after exactly this many steps.
    StepCap(u64),
}

impl StopRule {
    pub fn hit_set(target: impl IntoIterator<Item = LatticePoint>) -> Self {
        StopRule::HitSet { target: target.into_iter().collect(), cap: DEFAULT_HIT_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WalkOutcome {
    Stopped(LatticePath),
    /// The cap ran out first; carries the partial path.
    CapReached(LatticePath),
}

impl WalkOutcome {
    pub fn path(&self) -> &LatticePath {
        match self {
            WalkOutcome::Stopped(p) | WalkOutcome::CapReached(p) => p,
        }
    }

    pub fn into_path(self) -> LatticePath {
        match self {
            WalkOutcome::Stopped(p) | WalkOutcome::CapReached(p) => p,
        }
    }

    pub fn stopped(&self) -> bool {
        matches!(self, WalkOutcome::Stopped(_))
    }
}

/// Runs the walk from `start`, appending vertices to `out` (which is cleared
/// first), until `stop` holds or `cap` steps have been taken. Returns whether
/// `stop` fired.
pub(crate) fn walk_until<R: rand::RngCore>(
    start: LatticePoint,
    dirs: &mut DirectionSampler<R>,
    cap: u64,
    out: &mut Vec<LatticePoint>,
    mut stop: impl FnMut(&LatticePoint) -> bool,
) -> bool {
    out.clear();
    out.push(start);
    if stop(&start) {
        return true;
    }
    let mut cur = start;
    for _ in 0..cap {
        cur = cur.step(dirs.next_dir());
        out.push(cur);
        if stop(&cur) {
            return true;
        }
    }
    false
}

pub fn run_walk(start: LatticePoint, stop: &StopRule, rng: &RngConfig) -> Result<WalkOutcome> {
    let mut dirs = DirectionSampler::new(rng.rng());
    let mut path = Vec::new();
    let stopped = match stop {
        StopRule::ExitBall(ball) => walk_until(start, &mut dirs, u64::MAX, &mut path, |p| ball.reached_radius(p)),
        StopRule::HitSet { target, cap } => {
            if target.is_empty() {
                return Err(Error::invalid("hit_set target is empty"));
            }
            walk_until(start, &mut dirs, *cap, &mut path, |p| target.contains(p))
        }
        StopRule::StepCap(n) => {
            walk_until(start, &mut dirs, *n, &mut path, |_| false);
            true
        }
    };
    let path = LatticePath::from_vec_unchecked(path);
    Ok(if stopped { WalkOutcome::Stopped(path) } else { WalkOutcome::CapReached(path) })
}

/// All `k < len(path)` such that `path[0..=k]` and `path[k+1..]` share no
/// vertex.
pub fn cut_times(path: &LatticePath) -> Vec<usize> {
    cut_times_of(path.vertices())
}

pub(crate) fn cut_times_of(v: &[LatticePoint]) -> Vec<usize> {
    let mut last: FxHashMap<LatticePoint, usize> = FxHashMap::default();
    for (i, p) in v.iter().enumerate() {
        last.insert(*p, i);
    }
    let mut reach = 0;
    let mut out = Vec::new();
    for k in 0..v.len().saturating_sub(1) {
        reach = reach.max(last[&v[k]]);
        if reach == k {
            out.push(k);
        }
    }
    out
}

/// Nice cut times of `path` in box `j >= 1` of the tube: indices `k` with
///
/// 1. `t(a_j + q/2) <= k <= t(a_j + q)`,
/// 2. `S[t(a_j), k]` and `S[k+1, t(a_{j+1})]` disjoint,
/// 3. `S[k, t(a_{j+1})]` avoids the face `Q(a_j)`,
/// 4. `S(k)` in `Q[a_j + q/2, a_j + q]`.
///
/// Hitting times are integer times (see [`TubeGeometry::hitting_time`]).
/// Returns an empty list when the path never reaches a required face. The
/// caller is responsible for having established the event `A_j`.
pub fn nice_cut_points(path: &LatticePath, geom: &TubeGeometry, j: i64) -> Vec<usize> {
    let v = path.vertices();
    let aj = geom.a(j);
    let (Some(start), Some(end)) = (geom.hitting_time(v, aj), geom.hitting_time(v, geom.a(j + 1))) else {
        return Vec::new();
    };
    if end <= start {
        return Vec::new();
    }
    let (Some(lo), Some(hi)) = (geom.hitting_time(v, aj + geom.q / 2.0), geom.hitting_time(v, aj + geom.q)) else {
        return Vec::new();
    };
    let lo = lo.max(start);
    let hi = hi.min(end);
    if lo > hi {
        return Vec::new();
    }
    // condition (iii): k must come after the last visit to Q(a_j) before `end`
    let last_face = (start..=end).rev().find(|&i| geom.on_face(&v[i], aj));
    let cuts: FxHashSet<usize> = cut_times_of(&v[start..=end]).into_iter().map(|k| k + start).collect();
    (lo..=hi)
        .filter(|&k| cuts.contains(&k))
        .filter(|&k| last_face.map_or(true, |f| k > f))
        .filter(|&k| geom.in_tube(&v[k], aj + geom.q / 2.0, aj + geom.q))
        .collect()
}
