//! Lattice primitives on Z^3: points, distances, boxes, boundaries and
//! nearest-neighbor paths.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of Z^3.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

/// Unit steps in the order +x, -x, +y, -y, +z, -z.
pub const UNIT_STEPS: [(i64, i64, i64); 6] = [
    (1, 0, 0),
    (-1, 0, 0),
    (0, 1, 0),
    (0, -1, 0),
    (0, 0, 1),
    (0, 0, -1),
];

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0, z: 0 };

    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        LatticePoint { x, y, z }
    }

    pub fn coord(&self, axis: usize) -> i64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis {axis} out of range"),
        }
    }

    pub fn checked_add(&self, dx: i64, dy: i64, dz: i64) -> Result<LatticePoint> {
        Ok(LatticePoint {
            x: self.x.checked_add(dx).ok_or(Error::CoordinateOverflow)?,
            y: self.y.checked_add(dy).ok_or(Error::CoordinateOverflow)?,
            z: self.z.checked_add(dz).ok_or(Error::CoordinateOverflow)?,
        })
    }

    /// The neighbor in direction `dir` (an index into [`UNIT_STEPS`]).
    ///
    /// Panics on coordinate overflow; no experiment comes anywhere near
    /// `i64::MAX` and wrapping around would silently corrupt a walk.
    #[inline]
    pub fn step(&self, dir: usize) -> LatticePoint {
        let (dx, dy, dz) = UNIT_STEPS[dir];
        self.checked_add(dx, dy, dz)
            .expect("lattice coordinate overflow")
    }

    pub fn neighbors(&self) -> [LatticePoint; 6] {
        std::array::from_fn(|d| self.step(d))
    }

    pub fn is_neighbor(&self, other: &LatticePoint) -> bool {
        l1_distance(self, other) == 1
    }

    /// Squared Euclidean norm, exact.
    pub fn norm2(&self) -> i128 {
        let (x, y, z) = (self.x as i128, self.y as i128, self.z as i128);
        x * x + y * y + z * z
    }

    pub fn linf_norm(&self) -> u64 {
        self.x
            .unsigned_abs()
            .max(self.y.unsigned_abs())
            .max(self.z.unsigned_abs())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl From<(i64, i64, i64)> for LatticePoint {
    fn from((x, y, z): (i64, i64, i64)) -> Self {
        LatticePoint { x, y, z }
    }
}

impl FromStr for LatticePoint {
    type Err = Error;

    /// Accepts `x y z` or `x,y,z`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("expected three coordinates, got {s:?}")));
        }
        let c = |t: &str| {
            t.parse::<i64>()
                .map_err(|e| Error::invalid(format!("bad coordinate {t:?}: {e}")))
        };
        Ok(LatticePoint::new(c(parts[0])?, c(parts[1])?, c(parts[2])?))
    }
}

fn diff2(p: &LatticePoint, q: &LatticePoint) -> i128 {
    let d = |a: i64, b: i64| a as i128 - b as i128;
    let (dx, dy, dz) = (d(p.x, q.x), d(p.y, q.y), d(p.z, q.z));
    dx * dx + dy * dy + dz * dz
}

/// Squared Euclidean distance, exact.
pub fn euclidean_distance2(p: &LatticePoint, q: &LatticePoint) -> i128 {
    diff2(p, q)
}

pub fn euclidean_distance(p: &LatticePoint, q: &LatticePoint) -> f64 {
    (diff2(p, q) as f64).sqrt()
}

pub fn linf_distance(p: &LatticePoint, q: &LatticePoint) -> u64 {
    p.x.abs_diff(q.x).max(p.y.abs_diff(q.y)).max(p.z.abs_diff(q.z))
}

pub fn l1_distance(p: &LatticePoint, q: &LatticePoint) -> u64 {
    p.x.abs_diff(q.x) + p.y.abs_diff(q.y) + p.z.abs_diff(q.z)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Linf,
}

/// Closed ball `{y : d(center, y) <= radius}` in the Euclidean or the
/// l-infinity metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub center: LatticePoint,
    pub radius: u64,
    pub metric: Metric,
}

impl LatticeBox {
    pub fn euclidean(center: LatticePoint, radius: u64) -> Self {
        LatticeBox { center, radius, metric: Metric::Euclidean }
    }

    pub fn linf(center: LatticePoint, radius: u64) -> Self {
        LatticeBox { center, radius, metric: Metric::Linf }
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        match self.metric {
            Metric::Euclidean => diff2(p, &self.center) <= (self.radius as i128).pow(2),
            Metric::Linf => linf_distance(p, &self.center) <= self.radius,
        }
    }

    /// True once `p` is at distance at least `radius` from the center: the
    /// exit convention used by walk stopping rules.
    pub fn reached_radius(&self, p: &LatticePoint) -> bool {
        match self.metric {
            Metric::Euclidean => diff2(p, &self.center) >= (self.radius as i128).pow(2),
            Metric::Linf => linf_distance(p, &self.center) >= self.radius,
        }
    }

    /// All lattice points of the ball, in lexicographic order.
    pub fn points(&self) -> Vec<LatticePoint> {
        let r = self.radius as i64;
        let c = self.center;
        let mut out = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                for z in -r..=r {
                    let p = LatticePoint::new(c.x + x, c.y + y, c.z + z);
                    if self.contains(&p) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}

/// `{x in A : x has a lattice neighbor outside A}`.
pub fn inner_boundary(set: &BTreeSet<LatticePoint>) -> BTreeSet<LatticePoint> {
    set.iter()
        .filter(|p| p.neighbors().iter().any(|q| !set.contains(q)))
        .copied()
        .collect()
}

/// `{y not in A : y has a lattice neighbor in A}`.
pub fn outer_boundary(set: &BTreeSet<LatticePoint>) -> BTreeSet<LatticePoint> {
    set.iter()
        .flat_map(|p| p.neighbors())
        .filter(|q| !set.contains(q))
        .collect()
}

/// A finite nearest-neighbor path `(v_0, ..., v_k)` with `k >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePath {
    vertices: Vec<LatticePoint>,
}

impl LatticePath {
    pub fn new(vertices: Vec<LatticePoint>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("a path needs at least one vertex"));
        }
        if let Some(i) = vertices.windows(2).position(|w| !w[0].is_neighbor(&w[1])) {
            return Err(Error::NotAPath { index: i, next: i + 1 });
        }
        Ok(LatticePath { vertices })
    }

    pub fn single(p: LatticePoint) -> Self {
        LatticePath { vertices: vec![p] }
    }

    /// Caller guarantees the nearest-neighbor invariant.
    pub(crate) fn from_vec_unchecked(vertices: Vec<LatticePoint>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0].is_neighbor(&w[1])));
        LatticePath { vertices }
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
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

    /// The sub-path between vertex indices `from..=to`.
    pub fn segment(&self, from: usize, to: usize) -> LatticePath {
        LatticePath { vertices: self.vertices[from..=to].to_vec() }
    }

    /// `self ⊕ other`: the shared endpoint appears once.
    pub fn concat(&self, other: &LatticePath) -> Result<LatticePath> {
        if self.last() != other.first() {
            return Err(Error::EndpointMismatch { left: self.last(), right: other.first() });
        }
        let mut vertices = Vec::with_capacity(self.vertices.len() + other.vertices.len() - 1);
        vertices.extend_from_slice(&self.vertices);
        vertices.extend_from_slice(&other.vertices[1..]);
        Ok(LatticePath { vertices })
    }

    /// One vertex per line, `x y z`.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for p in &self.vertices {
            writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<LatticePath> {
        let mut vertices = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_ascii_whitespace();
            let mut coord = || -> Result<i64> {
                it.next()
                    .ok_or_else(|| Error::parse(i + 1, "expected `x y z`"))?
                    .parse::<i64>()
                    .map_err(|e| Error::parse(i + 1, e.to_string()))
            };
            let p = LatticePoint::new(coord()?, coord()?, coord()?);
            if it.next().is_some() {
                return Err(Error::parse(i + 1, "trailing fields"));
            }
            vertices.push(p);
        }
        LatticePath::new(vertices)
    }
}

/// Concatenate two paths; see [`LatticePath::concat`].
pub fn concat(a: &LatticePath, b: &LatticePath) -> Result<LatticePath> {
    a.concat(b)
}
