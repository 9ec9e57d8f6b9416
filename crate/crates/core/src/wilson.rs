//! Wilson's algorithm on finite graphs and on Z^3, and the matrix-tree
//! count used to check uniformity.

use std::collections::{BTreeMap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LatticeBox, LatticePoint};
use crate::lerw::LoopEraser;
use crate::rng::{DirectionSampler, RngConfig};
use crate::srw::walk_until;
use crate::stats::{chi_square_uniform, ChiSquareResult};
use crate::ust::{SpanningTree, TreeMeta, NO_PARENT};

/// Step cap for a single branch walk on Z^3.
pub const BRANCH_STEP_CAP: u64 = 1_000_000_000;

/// Simple connected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj_start: Vec<usize>,
    adj: Vec<usize>,
}

impl FiniteGraph {
    /// Validates the edge list (no self-loops, no parallel edges, connected)
    /// and stores it sorted with `u < v`.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut sorted = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::invalid(format!("edge ({a}, {b}) has an endpoint out of range")));
            }
            if a == b {
                return Err(Error::invalid(format!("self-loop at {a}")));
            }
            sorted.push((a.min(b), a.max(b)));
        }
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("parallel edges between {} and {}", w[0].0, w[0].1)));
        }
        let mut deg = vec![0usize; n + 1];
        for &(a, b) in &sorted {
            deg[a + 1] += 1;
            deg[b + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut adj = vec![0; 2 * sorted.len()];
        for &(a, b) in &sorted {
            adj[fill[a]] = b;
            fill[a] += 1;
            adj[fill[b]] = a;
            fill[b] += 1;
        }
        let g = FiniteGraph { n, edges: sorted, adj_start: deg, adj };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::new(n, &edges).expect("complete graph")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        let edges: Vec<_> = (0..n).map(|a| (a, (a + 1) % n)).collect();
        Self::new(n, &edges).expect("cycle")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|a| (a - 1, a)).collect();
        Self::new(n, &edges).expect("path")
    }

    /// `w x h` grid; vertex `(i, j)` has id `j * w + i`.
    pub fn grid(w: usize, h: usize) -> Self {
        let mut edges = Vec::new();
        for j in 0..h {
            for i in 0..w {
                let v = j * w + i;
                if i + 1 < w {
                    edges.push((v, v + 1));
                }
                if j + 1 < h {
                    edges.push((v, v + w));
                }
            }
        }
        Self::new(w * h, &edges).expect("grid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sorted edges with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[self.adj_start[v]..self.adj_start[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj_start[v + 1] - self.adj_start[v]
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }
}

/// Spanning tree of a [`FiniteGraph`] as a parent array.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
}

impl FiniteTree {
    /// Edge set as sorted pairs `(u, v)` with `u < v`; two spanning trees are
    /// equal exactly when these agree.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.map(|p| (v.min(p), v.max(p))))
            .collect();
        e.sort_unstable();
        e
    }
}

/// Uniform spanning tree of `g` by Wilson's algorithm, visiting vertices in
/// index order.
pub fn wilson_finite(g: &FiniteGraph, root: usize, rng: &RngConfig) -> Result<FiniteTree> {
    let order: Vec<usize> = (0..g.vertex_count()).collect();
    wilson_finite_ordered(g, root, &order, rng)
}

/// Wilson's algorithm with branches started from `order` in turn. The
/// output law does not depend on the order.
pub fn wilson_finite_ordered(g: &FiniteGraph, root: usize, order: &[usize], rng: &RngConfig) -> Result<FiniteTree> {
    let n = g.vertex_count();
    if root >= n {
        return Err(Error::invalid(format!("root {root} out of range")));
    }
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    in_tree[root] = true;
    let mut dirs = DirectionSampler::new(rng.rng());
    for &start in order {
        if start >= n {
            return Err(Error::invalid(format!("vertex {start} out of range")));
        }
        let mut u = start;
        while !in_tree[u] {
            let nb = g.neighbors(u);
            next[u] = nb[dirs.below(nb.len())];
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    if let Some(v) = in_tree.iter().position(|&b| !b) {
        return Err(Error::invalid(format!("order does not cover vertex {v}")));
    }
    let parent = (0..n).map(|v| (v != root).then(|| next[v])).collect();
    Ok(FiniteTree { root, parent })
}

/// Number of spanning trees: the determinant of the reduced Laplacian by
/// fraction-free (Bareiss) elimination in exact integers.
pub fn matrix_tree_count(g: &FiniteGraph) -> BigUint {
    let n = g.vertex_count() - 1;
    if n == 0 {
        return BigUint::from(1u32);
    }
    let mut a: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    for v in 0..n {
        a[v][v] = BigInt::from(g.degree(v));
        for &w in g.neighbors(v) {
            if w < n {
                a[v][w] = BigInt::from(-1);
            }
        }
    }
    let mut prev = BigInt::from(1);
    let mut sign = false;
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigUint::zero();
            };
            a.swap(k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = if sign { -&a[n - 1][n - 1] } else { a[n - 1][n - 1].clone() };
    debug_assert!(!det.is_negative());
    det.magnitude().clone()
}

/// Outcome of a uniformity run of [`wilson_finite`] on a small graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub samples: u64,
    /// Number of spanning trees by the matrix-tree theorem.
    pub tree_count: u64,
    /// Distinct trees seen.
    pub distinct: usize,
    /// Counts per tree, in lexicographic order of the sorted edge lists;
    /// trees never sampled contribute zero cells at the end.
    pub counts: Vec<u64>,
    pub chi_square: ChiSquareResult,
}

/// Samples `samples` trees (sample `i` from `rng.child(i)`) and tests their
/// frequencies against the uniform law on all spanning trees.
pub fn wilson_uniformity(g: &FiniteGraph, samples: u64, rng: &RngConfig) -> Result<UniformityReport> {
    let total = matrix_tree_count(g);
    let tree_count: u64 = total
        .try_into()
        .ok()
        .filter(|&c: &u64| c <= 1_000_000)
        .ok_or_else(|| Error::invalid("graph has too many spanning trees for a frequency test"))?;
    if tree_count < 2 {
        return Err(Error::invalid("graph has a single spanning tree"));
    }
    let trees: Vec<Vec<(usize, usize)>> = (0..samples)
        .into_par_iter()
        .map(|i| wilson_finite(g, 0, &rng.child(i)).map(|t| t.edges()))
        .collect::<Result<_>>()?;
    let mut freq: BTreeMap<Vec<(usize, usize)>, u64> = BTreeMap::new();
    for t in trees {
        *freq.entry(t).or_default() += 1;
    }
    let distinct = freq.len();
    if distinct as u64 > tree_count {
        return Err(Error::invalid(format!("saw {distinct} distinct trees but only {tree_count} exist")));
    }
    let mut counts: Vec<u64> = freq.into_values().collect();
    counts.resize(tree_count as usize, 0);
    let chi_square = chi_square_uniform(&counts)?;
    Ok(UniformityReport { samples, tree_count, distinct, counts, chi_square })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexOrder {
    /// Lexicographic in `(x, y, z)`.
    Lexicographic,
    /// By sup-distance from the origin, then lexicographic.
    Spiral,
    Supplied(Vec<LatticePoint>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UstWindowConfig {
    /// Sup-norm radius `R` of the window.
    pub radius: u64,
    /// Truncation factor `K`: the wired boundary sits at `K * max(R, 1)`.
    pub truncation: u64,
    pub order: VertexOrder,
}

impl UstWindowConfig {
    pub fn new(radius: u64, truncation: u64) -> Self {
        UstWindowConfig { radius, truncation, order: VertexOrder::Lexicographic }
    }

    pub fn boundary_radius(&self) -> u64 {
        self.truncation * self.radius.max(1)
    }

    fn validate(&self) -> Result<()> {
        if self.truncation < 2 {
            return Err(Error::invalid("truncation factor K must be at least 2"));
        }
        if self.boundary_radius() > 1 << 19 {
            return Err(Error::invalid("window too large for per-point random streams"));
        }
        Ok(())
    }

    /// The window vertices in the configured order.
    pub fn vertices(&self) -> Vec<LatticePoint> {
        match &self.order {
            VertexOrder::Lexicographic => LatticeBox::linf(LatticePoint::ORIGIN, self.radius).points(),
            VertexOrder::Spiral => {
                let mut v = LatticeBox::linf(LatticePoint::ORIGIN, self.radius).points();
                v.sort_by_key(|p| (p.linf_norm(), *p));
                v
            }
            VertexOrder::Supplied(v) => v.clone(),
        }
    }
}

/// Incremental Wilson's algorithm on Z^3 with the wired boundary
/// `{|x|_inf >= L}` as root. Every branch walk started at `z` uses the
/// stream `rng.for_point(z)`, so the walks form an independent family
/// indexed by starting point.
pub struct TreeGrower {
    l: u64,
    rng: RngConfig,
    points: Vec<LatticePoint>,
    parent: Vec<u32>,
    index: FxHashMap<LatticePoint, u32>,
    exits: FxHashMap<u32, LatticePoint>,
    eraser: LoopEraser,
    buf: Vec<LatticePoint>,
    cap: u64,
}

impl TreeGrower {
    pub fn new(boundary_radius: u64, rng: &RngConfig) -> Self {
        TreeGrower {
            l: boundary_radius,
            rng: *rng,
            points: vec![LatticePoint::ORIGIN],
            parent: vec![NO_PARENT],
            index: FxHashMap::default(),
            exits: FxHashMap::default(),
            eraser: LoopEraser::new(),
            buf: Vec::new(),
            cap: BRANCH_STEP_CAP,
        }
    }

    /// Room for about `n` nodes.
    pub fn reserve(&mut self, n: usize) {
        self.points.reserve(n);
        self.parent.reserve(n);
        self.index.reserve(n);
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index.contains_key(p)
    }

    pub fn id(&self, p: &LatticePoint) -> Option<u32> {
        self.index.get(p).copied()
    }

    pub fn parent(&self, id: u32) -> u32 {
        self.parent[id as usize]
    }

    pub fn point(&self, id: u32) -> LatticePoint {
        self.points[id as usize]
    }

    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    /// Whether `p` belongs to the boundary node.
    pub fn beyond(&self, p: &LatticePoint) -> bool {
        p.linf_norm() >= self.l
    }

    /// Runs a walk from `start` until it meets the tree or the boundary and
    /// attaches its loop erasure. Returns `false` if `start` was already
    /// covered.
    pub fn add_branch(&mut self, start: LatticePoint) -> Result<bool> {
        if self.beyond(&start) || self.contains(&start) {
            return Ok(false);
        }
        let mut dirs = DirectionSampler::new(self.rng.for_point(&start)?.rng());
        let (index, l) = (&self.index, self.l);
        if !walk_until(start, &mut dirs, self.cap, &mut self.buf, |p| index.contains_key(p) || p.linf_norm() >= l) {
            return Err(Error::StepCapReached { cap: self.cap });
        }
        let branch = self.eraser.erase(&self.buf);
        let k = branch.len() - 1;
        let hit = branch[k];
        let mut par = if hit.linf_norm() >= l { 0 } else { self.index[&hit] };
        for i in (0..k).rev() {
            let id = self.points.len() as u32;
            self.points.push(branch[i]);
            self.parent.push(par);
            self.index.insert(branch[i], id);
            if par == 0 {
                self.exits.insert(id, branch[i + 1]);
            }
            par = id;
        }
        Ok(true)
    }

    /// Tree neighbors of `id` that are currently known.
    pub fn tree_neighbors(&self, id: u32, out: &mut Vec<u32>) {
        out.clear();
        let par = self.parent[id as usize];
        if par != NO_PARENT {
            out.push(par);
        }
        if id == 0 {
            return;
        }
        for w in self.points[id as usize].neighbors() {
            if let Some(&wid) = self.index.get(&w) {
                if self.parent[wid as usize] == id {
                    out.push(wid);
                }
            }
        }
    }

    /// Grows branches from all lattice neighbors of `id` so that its tree
    /// edges are final.
    pub fn complete(&mut self, id: u32) -> Result<()> {
        for w in self.points[id as usize].neighbors() {
            self.add_branch(w)?;
        }
        Ok(())
    }

    pub fn finish(self, meta: TreeMeta) -> Result<SpanningTree> {
        SpanningTree::from_parts_indexed(meta, self.points, self.parent, self.exits, self.index)
    }
}

/// Window sample: the root branch from the origin to the boundary
/// `{|x|_inf >= K max(R, 1)}`, then one branch from each window vertex in the
/// configured order.
pub fn sample_window_ust(cfg: &UstWindowConfig, rng: &RngConfig) -> Result<SpanningTree> {
    cfg.validate()?;
    let mut g = TreeGrower::new(cfg.boundary_radius(), rng);
    let vertices = cfg.vertices();
    g.reserve(vertices.len() + vertices.len() / 4);
    g.add_branch(LatticePoint::ORIGIN)?;
    for p in vertices {
        g.add_branch(p)?;
    }
    g.finish(TreeMeta { seed: rng.seed, radius: cfg.radius, truncation: cfg.truncation })
}

/// Incremental exploration of the intrinsic ball around the origin.
/// Vertices are completed in breadth-first order of tree distance, so after
/// [`BallExplorer::explore_to`]`(r)` every vertex at distance `< r` is
/// complete and `B_U(0, r)` is known exactly. Wilson's algorithm permits
/// this adaptive order, so the tree has the same law as a window sample with
/// boundary `K max(R, 1)`. A ball whose radius is below that boundary cannot
/// reach it.
pub struct BallExplorer {
    grower: TreeGrower,
    meta: TreeMeta,
    queue: VecDeque<(u32, u64)>,
    seen: FxHashMap<u32, ()>,
    /// Vertices found at each distance.
    shells: Vec<usize>,
    nbrs: Vec<u32>,
}

impl BallExplorer {
    pub fn new(cfg: &UstWindowConfig, rng: &RngConfig) -> Result<Self> {
        cfg.validate()?;
        let mut grower = TreeGrower::new(cfg.boundary_radius(), rng);
        grower.add_branch(LatticePoint::ORIGIN)?;
        let origin = grower.id(&LatticePoint::ORIGIN).expect("origin is in the tree");
        let mut seen = FxHashMap::default();
        seen.insert(origin, ());
        Ok(BallExplorer {
            grower,
            meta: TreeMeta { seed: rng.seed, radius: cfg.radius, truncation: cfg.truncation },
            queue: VecDeque::from([(origin, 0)]),
            seen,
            shells: vec![1],
            nbrs: Vec::new(),
        })
    }

    pub fn explore_to(&mut self, r: u64) -> Result<()> {
        while let Some(&(v, d)) = self.queue.front() {
            if d >= r {
                break;
            }
            self.queue.pop_front();
            if v == 0 {
                continue;
            }
            self.grower.complete(v)?;
            self.grower.tree_neighbors(v, &mut self.nbrs);
            for &w in &self.nbrs {
                if self.seen.insert(w, ()).is_none() {
                    self.queue.push_back((w, d + 1));
                    if self.shells.len() <= d as usize + 1 {
                        self.shells.push(0);
                    }
                    if w != 0 {
                        self.shells[d as usize + 1] += 1;
                    }
                }
            }
        }
        Ok(())
    }

    /// `|B_U(0, r)|` for an explored radius `r`.
    pub fn volume(&self, r: u64) -> usize {
        self.shells.iter().take(r as usize + 1).sum()
    }

    pub fn node_count(&self) -> usize {
        self.grower.node_count()
    }

    pub fn into_tree(self) -> Result<SpanningTree> {
        self.grower.finish(self.meta)
    }
}

/// Tree sample in which `B_U(0, r)` is known exactly; see [`BallExplorer`].
pub fn sample_ball_ust(r: u64, cfg: &UstWindowConfig, rng: &RngConfig) -> Result<SpanningTree> {
    let mut ex = BallExplorer::new(cfg, rng)?;
    ex.explore_to(r)?;
    ex.into_tree()
}
