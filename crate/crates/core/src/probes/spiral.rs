//! Outward spiral ordering of the `2N (2N-1)^2` boxes of side `m` that tile
//! the prism `[-(N-1), N-1]^2 x [-(N-1), N]` (in units of `m`).
//!
//! Scale 1 is the origin box followed by `(0,0,m)`. Scale `N -> N + 1` adds
//! a shell: entering a new end layer from the previous end box, the walk
//! spirals outward over that face to a corner, winds around the side of the
//! old prism layer by layer, and spirals inward over the opposite face to
//! its center. Odd `N` grows upward, even `N` downward.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{linf_distance, LatticePoint};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSequence {
    pub centers: Vec<LatticePoint>,
    pub m: u64,
    pub scale: u64,
}

impl BoxSequence {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Checks the length, adjacency and distinctness invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.scale;
        let expected = 2 * n * (2 * n - 1) * (2 * n - 1);
        if self.centers.len() as u64 != expected {
            return Err(Error::invalid(format!("expected {expected} boxes, found {}", self.centers.len())));
        }
        for (i, w) in self.centers.windows(2).enumerate() {
            let d = (w[0].x - w[1].x).unsigned_abs() + (w[0].y - w[1].y).unsigned_abs() + (w[0].z - w[1].z).unsigned_abs();
            if d != self.m {
                return Err(Error::invalid(format!("boxes {i} and {} are not adjacent", i + 1)));
            }
        }
        let mut seen: Vec<_> = self.centers.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("a box repeats"));
        }
        Ok(())
    }

    /// Sup-distance (in units of `m`) of each center from the origin.
    pub fn shell_index(&self) -> Vec<u64> {
        self.centers.iter().map(|c| linf_distance(c, &LatticePoint::ORIGIN) / self.m).collect()
    }
}

/// Square spiral over `[-h, h]^2` from the center, each ring entered next
/// to the previous ring's last cell and finished at its corner `(s, -s)`.
fn outward_square(h: i64) -> Vec<(i64, i64)> {
    let mut out = vec![(0, 0)];
    for s in 1..=h {
        for j in -s + 1..=s {
            out.push((s, j));
        }
        for i in (-s..s).rev() {
            out.push((i, s));
        }
        for j in (-s..s).rev() {
            out.push((-s, j));
        }
        for i in -s + 1..=s {
            out.push((i, -s));
        }
    }
    out
}

/// The ring `max(|i|, |j|) = h` as a cycle starting at `(h, -h)` and going
/// counterclockwise.
fn ring(h: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(8 * h as usize);
    for j in -h..h {
        out.push((h, j));
    }
    for i in (-h + 1..=h).rev() {
        out.push((i, h));
    }
    for j in (-h + 1..=h).rev() {
        out.push((-h, j));
    }
    for i in -h..h {
        out.push((i, -h));
    }
    out
}

pub fn spiral_box_sequence(scale: u64, m: u64) -> Result<BoxSequence> {
    if scale == 0 || m == 0 {
        return Err(Error::invalid("spiral needs N >= 1 and m >= 1"));
    }
    let mi = m as i64;
    let at = |(i, j): (i64, i64), k: i64| LatticePoint::new(i * mi, j * mi, k * mi);
    let mut centers = vec![at((0, 0), 0), at((0, 0), 1)];
    for n in 1..scale as i64 {
        // growing from scale n to n + 1
        let h = n;
        let upward = n % 2 == 1;
        let (first, last) = if upward { (n + 1, -n) } else { (-n, n + 1) };
        let face = outward_square(h);
        centers.extend(face.iter().map(|&c| at(c, first)));
        let cycle = ring(h);
        let layers: Vec<i64> = if upward { (-n + 1..=n).rev().collect() } else { (-n + 1..=n).collect() };
        for (idx, &k) in layers.iter().enumerate() {
            if idx % 2 == 0 {
                centers.extend(cycle.iter().map(|&c| at(c, k)));
            } else {
                // reverse direction, starting at the cell where the last layer ended
                centers.push(at(cycle[cycle.len() - 1], k));
                centers.extend(cycle[..cycle.len() - 1].iter().rev().map(|&c| at(c, k)));
            }
        }
        centers.extend(face.iter().rev().map(|&c| at(c, last)));
    }
    Ok(BoxSequence { centers, m, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_scales() {
        let s = spiral_box_sequence(1, 5).unwrap();
        assert_eq!(s.centers, vec![LatticePoint::new(0, 0, 0), LatticePoint::new(0, 0, 5)]);
        let s = spiral_box_sequence(2, 3).unwrap();
        assert_eq!(s.len(), 36);
        assert_eq!(s.centers[2], LatticePoint::new(0, 0, 6));
        assert_eq!(*s.centers.last().unwrap(), LatticePoint::new(0, 0, -3));
        let s3 = spiral_box_sequence(3, 1).unwrap();
        assert_eq!(s3.centers[36], LatticePoint::new(0, 0, -2));
    }

    #[test]
    fn invariants_up_to_ten() {
        for n in 1..=10 {
            spiral_box_sequence(n, 7).unwrap().validate().unwrap();
        }
    }
}
