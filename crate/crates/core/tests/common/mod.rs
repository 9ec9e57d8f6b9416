//! Independent reference implementations used by the integration tests.
//! Everything here is written for clarity, not speed.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use proptest::prelude::*;
use ust3d::geometry::UNIT_STEPS;
use ust3d::probes::TubeGeometry;
use ust3d::wilson::FiniteGraph;
use ust3d::{LatticePath, LatticePoint, SpanningTree};

pub fn p(x: i64, y: i64, z: i64) -> LatticePoint {
    LatticePoint::new(x, y, z)
}

/// Loop erasure by the literal recursion: `T(0)` is the last visit to
/// `g[0]`, `T(i)` the last visit to `g[T(i-1) + 1]`.
pub fn literal_loop_erase(g: &[LatticePoint]) -> Vec<LatticePoint> {
    let last_visit = |v: LatticePoint| (0..g.len()).rev().find(|&j| g[j] == v).unwrap();
    let n = g.len() - 1;
    let mut t = last_visit(g[0]);
    let mut out = vec![g[t]];
    while t < n {
        t = last_visit(g[t + 1]);
        out.push(g[t]);
    }
    out
}

/// Forward construction: walk the path and cut back to a vertex whenever it
/// is revisited.
pub fn replay_truncate(g: &[LatticePoint]) -> Vec<LatticePoint> {
    let mut out: Vec<LatticePoint> = Vec::new();
    for &v in g {
        if let Some(i) = out.iter().position(|&w| w == v) {
            out.truncate(i + 1);
        } else {
            out.push(v);
        }
    }
    out
}

/// Cut times by checking every pair of vertices.
pub fn brute_cut_times(v: &[LatticePoint]) -> Vec<usize> {
    (0..v.len().saturating_sub(1))
        .filter(|&k| v[..=k].iter().all(|a| v[k + 1..].iter().all(|b| a != b)))
        .collect()
}

/// Nice cut times straight from the four conditions, with integer hitting
/// times of the faces.
pub fn brute_nice_cut_points(v: &[LatticePoint], g: &TubeGeometry, j: i64) -> Vec<usize> {
    let aj = g.a(j);
    let hit = |a: f64| v.iter().position(|p| g.on_face(p, a));
    let (Some(s), Some(e), Some(lo), Some(hi)) = (hit(aj), hit(g.a(j + 1)), hit(aj + g.q / 2.0), hit(aj + g.q)) else {
        return Vec::new();
    };
    (0..v.len())
        .filter(|&k| lo <= k && k <= hi && s <= k && k <= e)
        .filter(|&k| {
            let before: HashSet<_> = v[s..=k].iter().collect();
            v[k + 1..=e].iter().all(|p| !before.contains(p))
        })
        .filter(|&k| v[k..=e].iter().all(|p| !g.on_face(p, aj)))
        .filter(|&k| g.in_tube(&v[k], aj + g.q / 2.0, aj + g.q))
        .collect()
}

/// Shortest path between two tree vertices by breadth-first search over
/// the edge list.
pub fn bfs_path(t: &SpanningTree, x: &LatticePoint, y: &LatticePoint) -> Vec<LatticePoint> {
    bfs_path_ids(t, x, y).into_iter().map(|id| t.point(id)).collect()
}

/// Node ids along the breadth-first path, boundary node included.
pub fn bfs_path_ids(t: &SpanningTree, x: &LatticePoint, y: &LatticePoint) -> Vec<u32> {
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for (a, b) in t.edges() {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let (s, e) = (t.id(x).unwrap(), t.id(y).unwrap());
    let mut prev: HashMap<u32, u32> = HashMap::from([(s, s)]);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        if u == e {
            break;
        }
        for &w in adj.get(&u).map(|v| v.as_slice()).unwrap_or(&[]) {
            if !prev.contains_key(&w) {
                prev.insert(w, u);
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![e];
    while *path.last().unwrap() != s {
        path.push(prev[path.last().unwrap()]);
    }
    path.reverse();
    path
}

/// `P_x(X_n = y)` for every `y`, by repeated multiplication with the dense
/// transition matrix of the whole (finite, closed) tree.
pub fn dense_transition_power(t: &SpanningTree, x: &LatticePoint, n: u64) -> HashMap<LatticePoint, f64> {
    let k = t.node_count();
    let mut p = vec![vec![0.0; k]; k];
    for u in 0..k as u32 {
        let d = t.degree(u) as f64;
        for &w in t.neighbors(u) {
            p[u as usize][w as usize] = 1.0 / d;
        }
    }
    let mut dist = vec![0.0; k];
    dist[t.id(x).unwrap() as usize] = 1.0;
    for _ in 0..n {
        let mut next = vec![0.0; k];
        for u in 0..k {
            if dist[u] != 0.0 {
                for w in 0..k {
                    next[w] += dist[u] * p[u][w];
                }
            }
        }
        dist = next;
    }
    (0..k as u32).map(|u| (t.point(u), dist[u as usize])).collect()
}

/// Number of spanning trees by checking every edge subset of size
/// `n - 1` for connectivity.
pub fn enumerate_spanning_trees(g: &FiniteGraph) -> u64 {
    let n = g.vertex_count();
    let edges = g.edges();
    assert!(edges.len() <= 20);
    let mut count = 0;
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                a = p[a];
            }
            a
        }
        let mut acyclic = true;
        for (i, &(a, b)) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    acyclic = false;
                    break;
                }
                parent[ra] = rb;
            }
        }
        count += acyclic as u64;
    }
    count
}

/// Dense Laplacian potential solve by Gaussian elimination: `R_eff(a, b)`.
pub fn dense_resistance(g: &FiniteGraph, a: usize, b: usize) -> f64 {
    let n = g.vertex_count();
    // ground b, unit current into a
    let idx: Vec<usize> = (0..n).filter(|&v| v != b).collect();
    let pos: HashMap<usize, usize> = idx.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let m = idx.len();
    let mut mat = vec![vec![0.0; m + 1]; m];
    for (i, &v) in idx.iter().enumerate() {
        mat[i][i] = g.degree(v) as f64;
        for &w in g.neighbors(v) {
            if let Some(&j) = pos.get(&w) {
                mat[i][j] -= 1.0;
            }
        }
        if v == a {
            mat[i][m] = 1.0;
        }
    }
    for c in 0..m {
        let piv = (c..m).max_by(|&r, &s| mat[r][c].abs().total_cmp(&mat[s][c].abs())).unwrap();
        mat.swap(c, piv);
        for r in 0..m {
            if r != c {
                let f = mat[r][c] / mat[c][c];
                for k in c..=m {
                    mat[r][k] -= f * mat[c][k];
                }
            }
        }
    }
    let i = pos[&a];
    mat[i][m] / mat[i][i]
}

/// A nearest-neighbor walk from the origin given by a list of directions.
pub fn walk_from_dirs(dirs: &[usize]) -> Vec<LatticePoint> {
    let mut v = vec![LatticePoint::ORIGIN];
    for &d in dirs {
        let (dx, dy, dz) = UNIT_STEPS[d];
        let q = *v.last().unwrap();
        v.push(p(q.x + dx, q.y + dy, q.z + dz));
    }
    v
}

pub fn path_strategy(max_len: usize) -> impl Strategy<Value = LatticePath> {
    prop::collection::vec(0usize..6, 0..=max_len).prop_map(|d| LatticePath::new(walk_from_dirs(&d)).unwrap())
}

pub fn point_strategy(r: i64) -> impl Strategy<Value = LatticePoint> {
    (-r..=r, -r..=r, -r..=r).prop_map(|(x, y, z)| p(x, y, z))
}

pub fn point_set_strategy(r: i64, max: usize) -> impl Strategy<Value = BTreeSet<LatticePoint>> {
    prop::collection::btree_set(point_strategy(r), 0..=max)
}

/// Random connected simple graph: a random spanning tree plus extra edges.
pub fn graph_strategy(max_n: usize) -> impl Strategy<Value = FiniteGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|v| (0..v).boxed()).collect();
            let extra = prop::collection::vec((0..n, 0..n), 0..2 * n);
            (Just(n), parents, extra)
        })
        .prop_map(|(n, parents, extra)| {
            let mut set: BTreeSet<(usize, usize)> = BTreeSet::new();
            for (i, &p) in parents.iter().enumerate() {
                set.insert((p, i + 1));
            }
            for (a, b) in extra {
                if a != b {
                    set.insert((a.min(b), a.max(b)));
                }
            }
            let edges: Vec<_> = set.into_iter().collect();
            FiniteGraph::new(n, &edges).unwrap()
        })
}

/// `P_x(X_n = y)` for every node `y` in exact rational arithmetic.
pub fn rational_distribution(t: &SpanningTree, x: &LatticePoint, n: u64) -> Vec<num_rational::BigRational> {
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    let k = t.node_count();
    let mut dist = vec![BigRational::zero(); k];
    dist[t.id(x).unwrap() as usize] = BigRational::one();
    for _ in 0..n {
        let mut next = vec![BigRational::zero(); k];
        for u in 0..k as u32 {
            if dist[u as usize].is_zero() {
                continue;
            }
            let share = &dist[u as usize] / BigRational::from_integer((t.degree(u) as i64).into());
            for &w in t.neighbors(u) {
                next[w as usize] += &share;
            }
        }
        dist = next;
    }
    dist
}
