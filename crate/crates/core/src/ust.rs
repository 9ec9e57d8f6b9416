//! Spanning trees of (parts of) Z^3: unique paths, the intrinsic metric,
//! intrinsic balls and the degree measure.
//!
//! Trees come in two kinds. A *closed* tree is a finite tree whose vertex
//! set is all there is. A *wired* tree is a finite piece of a sample of the
//! UST, grown by Wilson's algorithm inside `B_inf(0, L)` with every point at
//! sup-distance `>= L` glued into one boundary node. The boundary node is
//! the root and always has id 0; a vertex is *complete* when all of its tree
//! edges are known, and balls that reach an incomplete vertex or the boundary
//! are reported as clipped.

use std::collections::VecDeque;
use std::io::{BufRead, Write};
use std::path::Path;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LatticePath, LatticePoint};
use crate::lerw::SimplePath;
use crate::rng::{DirectionSampler, RngConfig};
use crate::wilson::FiniteGraph;

pub const NO_PARENT: u32 = u32::MAX;

const HEADER: &str = "ust3d-tree v1";

/// Provenance of a tree. `truncation > 0` marks a wired tree whose boundary
/// sits at sup-distance `truncation * max(radius, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeMeta {
    pub seed: u64,
    pub radius: u64,
    pub truncation: u64,
}

impl TreeMeta {
    pub fn closed(seed: u64) -> Self {
        TreeMeta { seed, radius: 0, truncation: 0 }
    }

    pub fn is_wired(&self) -> bool {
        self.truncation > 0
    }

    pub fn boundary_radius(&self) -> Option<u64> {
        self.is_wired().then(|| self.truncation * self.radius.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicBall {
    pub center: LatticePoint,
    pub radius: u64,
    /// Lattice vertices of the ball in breadth-first order (the boundary node
    /// is never listed).
    pub vertices: Vec<LatticePoint>,
    pub volume: usize,
    /// The ball reaches part of the tree that is not fully known.
    pub clipped: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallRow {
    pub radius: u64,
    pub volume: usize,
    pub clipped: bool,
}

/// Breadth-first layers around a node. `order` lists node ids by
/// nondecreasing distance.
pub(crate) struct Layers {
    pub order: Vec<u32>,
    pub dist: Vec<u32>,
    /// Smallest radius whose ball is clipped (`u64::MAX` if none within reach).
    pub clip_radius: u64,
}

#[derive(Clone, Debug)]
pub struct SpanningTree {
    meta: TreeMeta,
    points: Vec<LatticePoint>,
    parent: Vec<u32>,
    depth: Vec<u32>,
    index: FxHashMap<LatticePoint, u32>,
    /// For children of the boundary node: the lattice point beyond the
    /// boundary their branch stepped to.
    exits: FxHashMap<u32, LatticePoint>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    complete: Vec<bool>,
}

impl SpanningTree {
    /// Assembles and validates a tree. Node 0 is the root; for wired trees
    /// node 0 is the boundary and `points[0]` is ignored.
    pub(crate) fn from_parts(
        meta: TreeMeta,
        points: Vec<LatticePoint>,
        parent: Vec<u32>,
        exits: FxHashMap<u32, LatticePoint>,
    ) -> Result<Self> {
        Self::from_parts_indexed(meta, points, parent, exits, FxHashMap::default())
    }

    /// As [`SpanningTree::from_parts`], reusing a point index built by the
    /// caller when it is nonempty.
    pub(crate) fn from_parts_indexed(
        meta: TreeMeta,
        mut points: Vec<LatticePoint>,
        parent: Vec<u32>,
        exits: FxHashMap<u32, LatticePoint>,
        mut index: FxHashMap<LatticePoint, u32>,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 || parent.len() != n {
            return Err(Error::invalid("tree needs a root and one parent entry per node"));
        }
        if parent[0] != NO_PARENT {
            return Err(Error::invalid("node 0 must be the root"));
        }
        let wired = meta.boundary_radius();
        let first_real = wired.is_some() as usize;
        if index.is_empty() {
            index.reserve(n);
            for (id, p) in points.iter().enumerate().skip(first_real) {
                if index.insert(*p, id as u32).is_some() {
                    return Err(Error::invalid(format!("vertex {p} appears twice")));
                }
            }
        } else if index.len() != n - first_real
            || points.iter().enumerate().skip(first_real).any(|(id, p)| index.get(p) != Some(&(id as u32)))
        {
            return Err(Error::invalid("point index does not match the tree"));
        }
        for id in 1..n {
            let par = parent[id];
            if par as usize >= n || par as usize == id {
                return Err(Error::invalid(format!("vertex {} has no valid parent", points[id])));
            }
            let p = points[id];
            match wired {
                Some(l) if par == 0 => {
                    let e = exits.get(&(id as u32)).ok_or_else(|| Error::invalid(format!("{p} lacks a boundary exit")))?;
                    if !p.is_neighbor(e) || e.linf_norm() < l {
                        return Err(Error::invalid(format!("{p} -> {e} is not a boundary edge")));
                    }
                }
                _ => {
                    if !p.is_neighbor(&points[par as usize]) {
                        return Err(Error::invalid(format!("parent of {p} is not a lattice neighbor")));
                    }
                }
            }
            if let Some(l) = wired {
                if p.linf_norm() >= l {
                    return Err(Error::invalid(format!("{p} lies beyond the wired boundary")));
                }
            }
        }
        if wired.is_some() {
            if let Some(rep) = (1..n).find(|&i| parent[i] == 0).and_then(|i| exits.get(&(i as u32))) {
                points[0] = *rep;
            }
        }

        // children in CSR form, then breadth-first depths
        let mut count = vec![0u32; n + 1];
        for &p in &parent[1..] {
            count[p as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut children = vec![0u32; n - 1];
        for (id, &p) in parent.iter().enumerate().skip(1) {
            children[fill[p as usize] as usize] = id as u32;
            fill[p as usize] += 1;
        }
        let mut depth = vec![u32::MAX; n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0u32]);
        let mut seen = 1;
        while let Some(v) = queue.pop_front() {
            for &c in &children[count[v as usize] as usize..count[v as usize + 1] as usize] {
                depth[c as usize] = depth[v as usize] + 1;
                seen += 1;
                queue.push_back(c);
            }
        }
        if seen != n {
            return Err(Error::invalid("parent map contains a cycle"));
        }

        let mut adj_start = Vec::with_capacity(n + 1);
        let mut adj = Vec::with_capacity(2 * (n - 1));
        for v in 0..n {
            adj_start.push(adj.len() as u32);
            if parent[v] != NO_PARENT {
                adj.push(parent[v]);
            }
            adj.extend_from_slice(&children[count[v] as usize..count[v + 1] as usize]);
        }
        adj_start.push(adj.len() as u32);

        let complete = match wired {
            None => vec![true; n],
            Some(l) => (0..n)
                .map(|id| id > 0 && points[id].neighbors().iter().all(|w| index.contains_key(w) || w.linf_norm() >= l))
                .collect(),
        };

        Ok(SpanningTree { meta, points, parent, depth, index, exits, adj_start, adj, complete })
    }

    /// Closed tree from an edge list; the edges must form a tree on their
    /// endpoints together with `root`.
    pub fn from_edges(root: LatticePoint, edges: &[(LatticePoint, LatticePoint)], meta: TreeMeta) -> Result<Self> {
        if meta.is_wired() {
            return Err(Error::invalid("edge-list trees are closed"));
        }
        let mut nbrs: FxHashMap<LatticePoint, Vec<LatticePoint>> = FxHashMap::default();
        nbrs.entry(root).or_default();
        for &(a, b) in edges {
            if !a.is_neighbor(&b) {
                return Err(Error::invalid(format!("edge {a} - {b} is not a lattice edge")));
            }
            nbrs.entry(a).or_default().push(b);
            nbrs.entry(b).or_default().push(a);
        }
        if edges.len() + 1 != nbrs.len() {
            return Err(Error::invalid("edge set is not a tree"));
        }
        let mut points = vec![root];
        let mut parent = vec![NO_PARENT];
        let mut ids: FxHashMap<LatticePoint, u32> = FxHashMap::default();
        ids.insert(root, 0);
        let mut head = 0;
        while head < points.len() {
            let v = points[head];
            for &w in &nbrs[&v] {
                if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(w) {
                    e.insert(points.len() as u32);
                    points.push(w);
                    parent.push(head as u32);
                }
            }
            head += 1;
        }
        if points.len() != nbrs.len() {
            return Err(Error::Disconnected);
        }
        Self::from_parts(meta, points, parent, FxHashMap::default())
    }

    /// The path `(-h,0,0) .. (h,0,0)` rooted at the origin.
    pub fn straight_line(half_length: u64) -> Self {
        let h = half_length as i64;
        let edges: Vec<_> = (-h..h).map(|x| (LatticePoint::new(x, 0, 0), LatticePoint::new(x + 1, 0, 0))).collect();
        Self::from_edges(LatticePoint::ORIGIN, &edges, TreeMeta::default()).expect("a segment is a tree")
    }

    /// Closed random lattice tree with `n` vertices, grown from the origin by
    /// repeatedly attaching a free neighbor of a uniformly chosen vertex.
    pub fn random_growth(n: usize, rng: &RngConfig) -> Self {
        assert!(n >= 1);
        let mut dirs = DirectionSampler::new(rng.rng());
        let mut points = vec![LatticePoint::ORIGIN];
        let mut parent = vec![NO_PARENT];
        let mut ids: FxHashMap<LatticePoint, u32> = FxHashMap::default();
        ids.insert(LatticePoint::ORIGIN, 0);
        while points.len() < n {
            let v = dirs.below(points.len());
            let w = points[v].step(dirs.next_dir());
            if let std::collections::hash_map::Entry::Vacant(e) = ids.entry(w) {
                e.insert(points.len() as u32);
                points.push(w);
                parent.push(v as u32);
            }
        }
        Self::from_parts(TreeMeta::closed(rng.seed), points, parent, FxHashMap::default()).expect("grown tree is valid")
    }

    pub fn meta(&self) -> &TreeMeta {
        &self.meta
    }

    pub fn is_wired(&self) -> bool {
        self.meta.is_wired()
    }

    /// Number of nodes, including the boundary node of a wired tree.
    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    /// Number of lattice vertices.
    pub fn vertex_count(&self) -> usize {
        self.points.len() - self.is_wired() as usize
    }

    pub fn root(&self) -> u32 {
        0
    }

    pub fn id(&self, p: &LatticePoint) -> Option<u32> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.index.contains_key(p)
    }

    pub fn require(&self, p: &LatticePoint) -> Result<u32> {
        self.id(p).ok_or(Error::VertexAbsent(*p))
    }

    /// Lattice point of a node. For the boundary node this is a
    /// representative point beyond the boundary.
    pub fn point(&self, id: u32) -> LatticePoint {
        self.points[id as usize]
    }

    pub fn parent(&self, id: u32) -> Option<u32> {
        let p = self.parent[id as usize];
        (p != NO_PARENT).then_some(p)
    }

    pub fn depth(&self, id: u32) -> u32 {
        self.depth[id as usize]
    }

    #[inline]
    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.adj[self.adj_start[id as usize] as usize..self.adj_start[id as usize + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, id: u32) -> usize {
        (self.adj_start[id as usize + 1] - self.adj_start[id as usize]) as usize
    }

    pub fn is_boundary(&self, id: u32) -> bool {
        id == 0 && self.is_wired()
    }

    pub fn is_complete(&self, id: u32) -> bool {
        self.complete[id as usize]
    }

    /// `mu(x)`: the number of tree edges at `x`.
    pub fn degree_measure(&self, x: &LatticePoint) -> Result<usize> {
        Ok(self.degree(self.require(x)?))
    }

    /// The lattice point a child of the boundary node steps to.
    pub fn boundary_exit(&self, id: u32) -> Option<LatticePoint> {
        self.exits.get(&id).copied()
    }

    /// Tree distance between two nodes.
    pub fn distance_ids(&self, mut a: u32, mut b: u32) -> u64 {
        let mut d = 0;
        while self.depth[a as usize] > self.depth[b as usize] {
            a = self.parent[a as usize];
            d += 1;
        }
        while self.depth[b as usize] > self.depth[a as usize] {
            b = self.parent[b as usize];
            d += 1;
        }
        while a != b {
            a = self.parent[a as usize];
            b = self.parent[b as usize];
            d += 2;
        }
        d
    }

    /// `d_U(x, y)`.
    pub fn distance(&self, x: &LatticePoint, y: &LatticePoint) -> Result<u64> {
        Ok(self.distance_ids(self.require(x)?, self.require(y)?))
    }

    /// Node ids along the tree path from `a` to `b`.
    pub fn path_ids(&self, mut a: u32, mut b: u32) -> Vec<u32> {
        let mut left = Vec::new();
        let mut right = Vec::new();
        while self.depth[a as usize] > self.depth[b as usize] {
            left.push(a);
            a = self.parent[a as usize];
        }
        while self.depth[b as usize] > self.depth[a as usize] {
            right.push(b);
            b = self.parent[b as usize];
        }
        while a != b {
            left.push(a);
            right.push(b);
            a = self.parent[a as usize];
            b = self.parent[b as usize];
        }
        left.push(a);
        left.extend(right.into_iter().rev());
        left
    }

    /// `gamma(x, y)`, the unique self-avoiding tree path.
    pub fn path_in_tree(&self, x: &LatticePoint, y: &LatticePoint) -> Result<SimplePath> {
        let ids = self.path_ids(self.require(x)?, self.require(y)?);
        if ids.iter().any(|&i| self.is_boundary(i)) {
            return Err(Error::ThroughBoundary(*x, *y));
        }
        Ok(SimplePath::from_vec_unchecked(ids.into_iter().map(|i| self.point(i)).collect()))
    }

    /// Finite stand-in for the ray `gamma(x, infinity)`: the path from `x`
    /// toward the root. In a wired tree it ends at the lattice point beyond
    /// the boundary that the branch stepped to; in a closed tree it ends at
    /// the root.
    pub fn path_toward_root(&self, x: &LatticePoint) -> Result<LatticePath> {
        let mut v = self.require(x)?;
        let mut out = vec![self.point(v)];
        while let Some(p) = self.parent(v) {
            if self.is_boundary(p) {
                out.push(self.exits[&v]);
                break;
            }
            out.push(self.point(p));
            v = p;
        }
        Ok(LatticePath::from_vec_unchecked(out))
    }

    /// Breadth-first search from `center` up to distance `max_r`. The
    /// boundary node is visited but not expanded.
    pub(crate) fn layers(&self, center: u32, max_r: u64) -> Layers {
        let mut order = vec![center];
        let mut dist = vec![0u32];
        let mut seen: FxHashMap<u32, ()> = FxHashMap::default();
        seen.insert(center, ());
        let mut clip_radius = u64::MAX;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            let d = dist[head] as u64;
            head += 1;
            if self.is_boundary(v) {
                clip_radius = clip_radius.min(d);
                continue;
            }
            if !self.complete[v as usize] {
                clip_radius = clip_radius.min(d + 1);
            }
            if d >= max_r {
                continue;
            }
            for &w in self.neighbors(v) {
                if seen.insert(w, ()).is_none() {
                    order.push(w);
                    dist.push(d as u32 + 1);
                }
            }
        }
        Layers { order, dist, clip_radius }
    }

    /// `B_U(x, r)` and its volume.
    pub fn intrinsic_ball(&self, x: &LatticePoint, r: u64) -> Result<IntrinsicBall> {
        let c = self.require(x)?;
        let layers = self.layers(c, r);
        let vertices: Vec<LatticePoint> =
            layers.order.iter().filter(|&&v| !self.is_boundary(v)).map(|&v| self.point(v)).collect();
        Ok(IntrinsicBall { center: *x, radius: r, volume: vertices.len(), vertices, clipped: r >= layers.clip_radius })
    }

    /// `|B_U(x, r)|` for `r = 0..=max_r` from a single search.
    pub fn ball_profile(&self, x: &LatticePoint, max_r: u64) -> Result<Vec<BallRow>> {
        let c = self.require(x)?;
        let layers = self.layers(c, max_r);
        let mut counts = vec![0usize; max_r as usize + 1];
        for (&v, &d) in layers.order.iter().zip(&layers.dist) {
            if !self.is_boundary(v) {
                counts[d as usize] += 1;
            }
        }
        let mut total = 0;
        Ok(counts
            .into_iter()
            .enumerate()
            .map(|(r, c)| {
                total += c;
                BallRow { radius: r as u64, volume: total, clipped: r as u64 >= layers.clip_radius }
            })
            .collect())
    }

    /// Tree edges as `(child, parent)` node ids.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (1..self.points.len() as u32).map(|v| (v, self.parent[v as usize]))
    }

    /// The tree as an abstract graph on node ids.
    pub fn to_graph(&self) -> FiniteGraph {
        let edges: Vec<(usize, usize)> = self.edges().map(|(a, b)| (a as usize, b as usize)).collect();
        FiniteGraph::new(self.points.len(), &edges).expect("a tree is a connected simple graph")
    }

    fn parent_point(&self, id: u32) -> LatticePoint {
        let p = self.parent[id as usize];
        if self.is_boundary(p) {
            self.exits[&id]
        } else {
            self.points[p as usize]
        }
    }

    /// Plain-text serialization: a header line
    /// `ust3d-tree v1 <vertex-count> <seed> <R> <K>`, then one line
    /// `x y z px py pz` per non-root vertex. A closed single-vertex tree is
    /// written as one `x y z` line.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let m = &self.meta;
        writeln!(w, "{HEADER} {} {} {} {}", self.vertex_count(), m.seed, m.radius, m.truncation)?;
        if !self.is_wired() && self.points.len() == 1 {
            let p = self.points[0];
            writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
        }
        for id in 1..self.points.len() as u32 {
            let p = self.points[id as usize];
            let q = self.parent_point(id);
            writeln!(w, "{} {} {} {} {} {}", p.x, p.y, p.z, q.x, q.y, q.z)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty tree file"))?;
        let header = header?;
        let rest = header.strip_prefix(HEADER).ok_or_else(|| Error::parse(1, format!("expected `{HEADER}` header")))?;
        let fields: Vec<u64> = rest
            .split_whitespace()
            .map(|t| t.parse::<u64>().map_err(|e| Error::parse(1, format!("bad header field {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let [count, seed, radius, truncation] = fields[..] else {
            return Err(Error::parse(1, "header needs vertex count, seed, R and K"));
        };
        let meta = TreeMeta { seed, radius, truncation };

        let mut pairs: Vec<(LatticePoint, LatticePoint)> = Vec::new();
        let mut lone_root = None;
        for (i, line) in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let nums: Vec<i64> = t
                .split_whitespace()
                .map(|s| s.parse::<i64>().map_err(|e| Error::parse(i + 1, format!("bad coordinate {s:?}: {e}"))))
                .collect::<Result<_>>()?;
            match nums[..] {
                [x, y, z, px, py, pz] => pairs.push((LatticePoint::new(x, y, z), LatticePoint::new(px, py, pz))),
                [x, y, z] if lone_root.is_none() && pairs.is_empty() => lone_root = Some(LatticePoint::new(x, y, z)),
                _ => return Err(Error::parse(i + 1, "expected `x y z px py pz`")),
            }
        }
        if lone_root.is_some() && !pairs.is_empty() {
            return Err(Error::parse(2, "root line is only allowed for single-vertex trees"));
        }

        let mut points = Vec::with_capacity(pairs.len() + 1);
        let mut ids: FxHashMap<LatticePoint, u32> = FxHashMap::default();
        match (meta.boundary_radius(), lone_root) {
            (Some(_), Some(_)) => return Err(Error::parse(2, "wired trees have no root line")),
            (Some(_), None) => points.push(LatticePoint::ORIGIN),
            (None, Some(r)) => points.push(r),
            (None, None) => {
                let children: FxHashMap<LatticePoint, ()> = pairs.iter().map(|(c, _)| (*c, ())).collect();
                let mut roots: Vec<LatticePoint> = pairs.iter().map(|(_, p)| *p).filter(|p| !children.contains_key(p)).collect();
                roots.sort();
                roots.dedup();
                match roots[..] {
                    [r] => points.push(r),
                    _ => return Err(Error::parse(1, format!("expected exactly one root, found {}", roots.len()))),
                }
                ids.insert(points[0], 0);
            }
        }
        for (i, (c, _)) in pairs.iter().enumerate() {
            if ids.insert(*c, points.len() as u32).is_some() {
                return Err(Error::parse(i + 2, format!("vertex {c} listed twice")));
            }
            points.push(*c);
        }
        let mut parent = vec![NO_PARENT; points.len()];
        let mut exits = FxHashMap::default();
        for (i, (c, p)) in pairs.iter().enumerate() {
            let cid = ids[c];
            parent[cid as usize] = match (ids.get(p), meta.boundary_radius()) {
                (Some(&pid), _) => pid,
                (None, Some(l)) if p.linf_norm() >= l => {
                    exits.insert(cid, *p);
                    0
                }
                _ => return Err(Error::parse(i + 2, format!("parent {p} of {c} is not in the tree"))),
            };
        }
        let tree = Self::from_parts(meta, points, parent, exits)?;
        if tree.vertex_count() as u64 != count {
            return Err(Error::parse(1, format!("header says {count} vertices, file has {}", tree.vertex_count())));
        }
        Ok(tree)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_text(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_text(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
