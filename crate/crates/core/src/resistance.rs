//! Effective resistance on unit-resistance networks: a Dirichlet solve on
//! finite graphs (exact rational elimination, sparse f64 factorization or
//! conjugate gradients) and exact series/parallel reduction on trees.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::LatticePoint;
use crate::ust::SpanningTree;
use crate::wilson::FiniteGraph;

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ResistanceValue {
    pub ohms: f64,
}

impl ResistanceValue {
    pub const ZERO: ResistanceValue = ResistanceValue { ohms: 0.0 };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    /// Exact rational elimination.
    Exact,
    /// Sparse LDL^T factorization in f64.
    Direct,
    /// Jacobi-preconditioned conjugate gradients, relative tolerance 1e-12.
    ConjugateGradient,
    /// `Exact` up to [`EXACT_LIMIT`] vertices, `Direct` on trees,
    /// conjugate gradients otherwise.
    #[default]
    Auto,
}

pub const EXACT_LIMIT: usize = 500;
pub const CG_TOLERANCE: f64 = 1e-12;

/// Field operations needed by the elimination.
pub trait Scalar: Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {}

impl<T> Scalar for T where T: Clone + PartialEq + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Div<Output = T> {}

/// Sparse symmetric `LDL^T` factorization with a greedy minimum-degree
/// pivot order. Trees factor without fill.
pub struct SparseLdl<T> {
    order: Vec<usize>,
    /// Position of each index in `order`.
    position: Vec<usize>,
    diag: Vec<T>,
    /// For each pivot, the multipliers `l_jp` of the rows it eliminates into.
    cols: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> SparseLdl<T> {
    /// Factors the symmetric matrix with diagonal `diag` and strictly
    /// off-diagonal entries `off` (each unordered pair listed once), in a
    /// greedy minimum-degree order.
    pub fn factor(diag: Vec<T>, off: &[(usize, usize, T)]) -> Result<Self> {
        Self::factor_by(diag, off, None)
    }

    /// As [`SparseLdl::factor`], eliminating in the given order (a
    /// permutation of the indices).
    pub fn factor_in_order(diag: Vec<T>, off: &[(usize, usize, T)], order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; diag.len()];
        if order.len() != diag.len() || order.iter().any(|&p| p >= seen.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("elimination order is not a permutation"));
        }
        Self::factor_by(diag, off, Some(order))
    }

    fn factor_by(mut diag: Vec<T>, off: &[(usize, usize, T)], fixed: Option<&[usize]>) -> Result<Self> {
        let n = diag.len();
        let mut rows: Vec<Row<T>> = vec![Row(Vec::new()); n];
        for (i, j, v) in off {
            rows[*i].insert(*j, v.clone());
            rows[*j].insert(*i, v.clone());
        }
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = match fixed {
            Some(_) => BinaryHeap::new(),
            None => (0..n).map(|i| Reverse((rows[i].len(), i))).collect(),
        };
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut cols = vec![Vec::new(); n];
        let mut next_fixed = fixed.map(|o| o.iter());
        loop {
            let p = match next_fixed.as_mut() {
                Some(it) => match it.next() {
                    Some(&p) => p,
                    None => break,
                },
                None => match heap.pop() {
                    Some(Reverse((deg, p))) if done[p] || deg != rows[p].len() => continue,
                    Some(Reverse((_, p))) => p,
                    None => break,
                },
            };
            done[p] = true;
            order.push(p);
            let d = diag[p].clone();
            if d.is_zero() {
                return Err(Error::invalid("singular system"));
            }
            let mut nbrs: Vec<(usize, T)> = std::mem::take(&mut rows[p].0);
            nbrs.sort_unstable_by_key(|e| e.0);
            for (j, _) in &nbrs {
                rows[*j].remove(p);
            }
            for (a, (j, ajp)) in nbrs.iter().enumerate() {
                let scaled = ajp.clone() / d.clone();
                diag[*j] = diag[*j].clone() - scaled.clone() * ajp.clone();
                for (k, akp) in &nbrs[a + 1..] {
                    let delta = scaled.clone() * akp.clone();
                    let cur = rows[*j].get(*k).cloned().unwrap_or_else(T::zero);
                    let v = cur - delta;
                    rows[*j].insert(*k, v.clone());
                    rows[*k].insert(*j, v);
                }
            }
            if fixed.is_none() {
                for (j, _) in &nbrs {
                    heap.push(Reverse((rows[*j].len(), *j)));
                }
            }
            cols[p] = nbrs.into_iter().map(|(j, a)| (j, a / d.clone())).collect();
        }
        let mut position = vec![0; n];
        for (i, &p) in order.iter().enumerate() {
            position[p] = i;
        }
        Ok(SparseLdl { order, position, diag, cols })
    }

    /// `b^T A^{-1} b`, from the forward substitution alone:
    /// `b^T A^{-1} b = sum_p y_p^2 / d_p` with `y = L^{-1} b`.
    pub fn inverse_quadratic_form(&self, mut b: Vec<T>) -> T {
        let mut total = T::zero();
        for &p in &self.order {
            let bp = b[p].clone();
            if bp.is_zero() {
                continue;
            }
            for (j, l) in &self.cols[p] {
                b[*j] = b[*j].clone() - l.clone() * bp.clone();
            }
            total = total + bp.clone() * bp / self.diag[p].clone();
        }
        total
    }

    /// [`SparseLdl::inverse_quadratic_form`] for a sparse right-hand side
    /// given as `(index, value)` pairs; only pivots reached from the
    /// nonzeros are visited.
    pub fn inverse_quadratic_form_sparse(&self, b: &[(usize, T)]) -> T {
        let mut vals: FxHashMap<usize, T> = FxHashMap::default();
        let mut queue = BinaryHeap::new();
        for (i, v) in b {
            match vals.get_mut(i) {
                Some(cur) => *cur = cur.clone() + v.clone(),
                None => {
                    vals.insert(*i, v.clone());
                    queue.push(Reverse(self.position[*i]));
                }
            }
        }
        let mut total = T::zero();
        while let Some(Reverse(pos)) = queue.pop() {
            let p = self.order[pos];
            let bp = vals.remove(&p).expect("queued pivot has a value");
            if bp.is_zero() {
                continue;
            }
            for (j, l) in &self.cols[p] {
                let delta = l.clone() * bp.clone();
                match vals.get_mut(j) {
                    Some(cur) => *cur = cur.clone() - delta,
                    None => {
                        vals.insert(*j, T::zero() - delta);
                        queue.push(Reverse(self.position[*j]));
                    }
                }
            }
            total = total + bp.clone() * bp / self.diag[p].clone();
        }
        total
    }

    pub fn solve(&self, mut b: Vec<T>) -> Vec<T> {
        for &p in &self.order {
            let bp = b[p].clone();
            if bp.is_zero() {
                continue;
            }
            for (j, l) in &self.cols[p] {
                b[*j] = b[*j].clone() - l.clone() * bp.clone();
            }
        }
        for &p in &self.order {
            b[p] = b[p].clone() / self.diag[p].clone();
        }
        for &p in self.order.iter().rev() {
            let mut v = b[p].clone();
            for (j, l) in &self.cols[p] {
                v = v - l.clone() * b[*j].clone();
            }
            b[p] = v;
        }
        b
    }
}

struct Dirichlet {
    /// Local index of each interior vertex, or `usize::MAX`.
    local: Vec<usize>,
    interior: Vec<usize>,
    in_a: Vec<bool>,
    in_b: Vec<bool>,
}

impl Dirichlet {
    fn new(g: &FiniteGraph, a: &[usize], b: &[usize]) -> Result<Self> {
        let n = g.vertex_count();
        if a.is_empty() || b.is_empty() {
            return Err(Error::invalid("terminal sets must be nonempty"));
        }
        let mut in_a = vec![false; n];
        let mut in_b = vec![false; n];
        for &v in a {
            *in_a.get_mut(v).ok_or_else(|| Error::invalid(format!("vertex {v} out of range")))? = true;
        }
        for &v in b {
            let slot = in_b.get_mut(v).ok_or_else(|| Error::invalid(format!("vertex {v} out of range")))?;
            if in_a[v] {
                return Err(Error::TerminalsOverlap);
            }
            *slot = true;
        }
        let mut local = vec![usize::MAX; n];
        let mut interior = Vec::new();
        for v in 0..n {
            if !in_a[v] && !in_b[v] {
                local[v] = interior.len();
                interior.push(v);
            }
        }
        Ok(Dirichlet { local, interior, in_a, in_b })
    }

    fn system<T: Scalar + From<i64>>(&self, g: &FiniteGraph) -> (Vec<T>, Vec<(usize, usize, T)>, Vec<T>) {
        let diag = self.interior.iter().map(|&v| T::from(g.degree(v) as i64)).collect();
        let mut off = Vec::new();
        let mut rhs = vec![T::zero(); self.interior.len()];
        for (i, &v) in self.interior.iter().enumerate() {
            for &w in g.neighbors(v) {
                if self.in_a[w] {
                    rhs[i] = rhs[i].clone() + T::one();
                } else if self.local[w] != usize::MAX && w > v {
                    off.push((i, self.local[w], T::from(-1)));
                }
            }
        }
        (diag, off, rhs)
    }

    /// Current out of A given the potential on interior vertices.
    fn current<T: Scalar>(&self, g: &FiniteGraph, f: &[T]) -> T {
        let mut total = T::zero();
        for v in 0..g.vertex_count() {
            if !self.in_a[v] {
                continue;
            }
            for &w in g.neighbors(v) {
                if self.in_a[w] {
                    continue;
                }
                let fw = if self.in_b[w] { T::zero() } else { f[self.local[w]].clone() };
                total = total + (T::one() - fw);
            }
        }
        total
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Real(f64);

macro_rules! real_op {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for Real {
            type Output = Real;
            fn $f(self, o: Real) -> Real {
                Real(self.0 $op o.0)
            }
        }
    };
}
real_op!(Add, add, +);
real_op!(Sub, sub, -);
real_op!(Mul, mul, *);
real_op!(Div, div, /);

impl Zero for Real {
    fn zero() -> Self {
        Real(0.0)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0.0
    }
}

impl One for Real {
    fn one() -> Self {
        Real(1.0)
    }
}

impl From<i64> for Real {
    fn from(v: i64) -> Self {
        Real(v as f64)
    }
}

fn rat_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `R_eff(A, B)` with the default solver policy.
pub fn effective_resistance(g: &FiniteGraph, a: &[usize], b: &[usize]) -> Result<ResistanceValue> {
    effective_resistance_with(g, a, b, Solver::Auto)
}

/// Exact `R_eff(A, B)` as a rational number.
pub fn effective_resistance_exact(g: &FiniteGraph, a: &[usize], b: &[usize]) -> Result<BigRational> {
    let dp = Dirichlet::new(g, a, b)?;
    let (diag, off, rhs) = dp.system::<RationalScalar>(g);
    let f = SparseLdl::factor(diag, &off)?.solve(rhs);
    let current = dp.current(g, &f).0;
    if current.is_zero() {
        return Err(Error::Disconnected);
    }
    Ok(current.recip())
}

pub fn effective_resistance_with(g: &FiniteGraph, a: &[usize], b: &[usize], solver: Solver) -> Result<ResistanceValue> {
    let solver = match solver {
        Solver::Auto if g.vertex_count() <= EXACT_LIMIT => Solver::Exact,
        Solver::Auto if g.is_tree() => Solver::Direct,
        Solver::Auto => Solver::ConjugateGradient,
        s => s,
    };
    let ohms = match solver {
        Solver::Exact => effective_resistance_exact(g, a, b)?.to_f64().unwrap_or(f64::INFINITY),
        Solver::Direct => {
            let dp = Dirichlet::new(g, a, b)?;
            let (diag, off, rhs) = dp.system::<Real>(g);
            let f = SparseLdl::factor(diag, &off)?.solve(rhs);
            1.0 / dp.current(g, &f).0
        }
        Solver::ConjugateGradient | Solver::Auto => {
            let dp = Dirichlet::new(g, a, b)?;
            let (_, _, rhs) = dp.system::<Real>(g);
            let rhs: Vec<f64> = rhs.into_iter().map(|r| r.0).collect();
            let f = conjugate_gradient(g, &dp, &rhs)?;
            let f: Vec<Real> = f.into_iter().map(Real).collect();
            1.0 / dp.current(g, &f).0
        }
    };
    Ok(ResistanceValue { ohms })
}

#[derive(Clone, PartialEq)]
struct RationalScalar(BigRational);

macro_rules! rat_op {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr for RationalScalar {
            type Output = RationalScalar;
            fn $f(self, o: RationalScalar) -> RationalScalar {
                RationalScalar(self.0 $op o.0)
            }
        }
    };
}
rat_op!(Add, add, +);
rat_op!(Sub, sub, -);
rat_op!(Mul, mul, *);
rat_op!(Div, div, /);

impl Zero for RationalScalar {
    fn zero() -> Self {
        RationalScalar(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for RationalScalar {
    fn one() -> Self {
        RationalScalar(BigRational::one())
    }
}

impl From<i64> for RationalScalar {
    fn from(v: i64) -> Self {
        RationalScalar(rat_int(v))
    }
}

fn conjugate_gradient(g: &FiniteGraph, dp: &Dirichlet, rhs: &[f64]) -> Result<Vec<f64>> {
    let m = dp.interior.len();
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &v) in dp.interior.iter().enumerate() {
            let mut s = g.degree(v) as f64 * x[i];
            for &w in g.neighbors(v) {
                let l = dp.local[w];
                if l != usize::MAX {
                    s -= x[l];
                }
            }
            out[i] = s;
        }
    };
    let inv_diag: Vec<f64> = dp.interior.iter().map(|&v| 1.0 / g.degree(v) as f64).collect();
    let mut x = vec![0.0; m];
    let mut r = rhs.to_vec();
    let bnorm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; m];
    let max_iter = 10 * m + 100;
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= CG_TOLERANCE * bnorm {
            return Ok(x);
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::invalid("conjugate gradients did not converge"))
}

/// Sparse row of the partially eliminated matrix. Rows stay short on the
/// graphs this is used for, so a linear scan beats hashing.
#[derive(Clone)]
struct Row<T>(Vec<(usize, T)>);

impl<T> Row<T> {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn get(&self, k: usize) -> Option<&T> {
        self.0.iter().find(|e| e.0 == k).map(|e| &e.1)
    }

    fn insert(&mut self, k: usize, v: T) {
        match self.0.iter_mut().find(|e| e.0 == k) {
            Some(e) => e.1 = v,
            None => self.0.push((k, v)),
        }
    }

    fn remove(&mut self, k: usize) {
        if let Some(i) = self.0.iter().position(|e| e.0 == k) {
            self.0.swap_remove(i);
        }
    }
}

/// Factorization of the Laplacian with one vertex grounded, for many
/// point-to-point resistances on the same graph:
/// `R(x, y) = (e_x - e_y)^T L_g^{-1} (e_x - e_y)`.
pub struct LaplacianFactor {
    ground: usize,
    n: usize,
    ldl: SparseLdl<Real>,
}

impl LaplacianFactor {
    pub fn new(g: &FiniteGraph, ground: usize) -> Result<Self> {
        let n = g.vertex_count();
        if ground >= n {
            return Err(Error::invalid("ground vertex out of range"));
        }
        let idx = |v: usize| if v < ground { v } else { v - 1 };
        let diag = (0..n).filter(|&v| v != ground).map(|v| Real(g.degree(v) as f64)).collect();
        let off: Vec<_> = g
            .edges()
            .iter()
            .filter(|(a, b)| *a != ground && *b != ground)
            .map(|&(a, b)| (idx(a), idx(b), Real(-1.0)))
            .collect();
        let ldl = if g.is_tree() {
            // Leaves first toward the ground: every pivot is exactly 1 and
            // every multiplier -1, so tree resistances come out exact.
            let order: Vec<usize> = bfs_order(g, ground).into_iter().rev().filter(|&v| v != ground).map(idx).collect();
            SparseLdl::factor_in_order(diag, &off, &order)?
        } else {
            SparseLdl::factor(diag, &off)?
        };
        Ok(LaplacianFactor { ground, n, ldl })
    }

    pub fn resistance(&self, x: usize, y: usize) -> Result<ResistanceValue> {
        if x >= self.n || y >= self.n {
            return Err(Error::invalid("vertex out of range"));
        }
        if x == y {
            return Ok(ResistanceValue::ZERO);
        }
        let idx = |v: usize| if v < self.ground { v } else { v - 1 };
        let mut b = Vec::with_capacity(2);
        if x != self.ground {
            b.push((idx(x), Real(1.0)));
        }
        if y != self.ground {
            b.push((idx(y), Real(-1.0)));
        }
        Ok(ResistanceValue { ohms: self.ldl.inverse_quadratic_form_sparse(&b).0 })
    }
}

fn bfs_order(g: &FiniteGraph, start: usize) -> Vec<usize> {
    let mut seen = vec![false; g.vertex_count()];
    seen[start] = true;
    let mut order = vec![start];
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in g.neighbors(v) {
            if !std::mem::replace(&mut seen[w], true) {
                order.push(w);
            }
        }
    }
    order
}

/// Resistance between two tree vertices: the tree distance.
pub fn tree_resistance(t: &SpanningTree, x: &LatticePoint, y: &LatticePoint) -> Result<ResistanceValue> {
    Ok(ResistanceValue { ohms: t.distance(x, y)? as f64 })
}

/// Resistance from `x` to the grounded set `B` inside the tree, by
/// series/parallel reduction with the tree rooted at `x`. Returns 0 when
/// `x` is in `B`.
pub fn point_to_set_resistance(t: &SpanningTree, x: &LatticePoint, set: &[LatticePoint]) -> Result<ResistanceValue> {
    let xid = t.require(x)?;
    if set.is_empty() {
        return Err(Error::invalid("target set is empty"));
    }
    let grounded: FxHashSet<u32> = set.iter().map(|p| t.require(p)).collect::<Result<_>>()?;
    if grounded.contains(&xid) {
        return Ok(ResistanceValue::ZERO);
    }
    // breadth-first order from x, then fold conductances bottom-up
    let mut order = vec![xid];
    let mut up: FxHashMap<u32, u32> = FxHashMap::default();
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        if grounded.contains(&v) {
            continue;
        }
        for &w in t.neighbors(v) {
            if up.get(&v) != Some(&w) {
                up.insert(w, v);
                order.push(w);
            }
        }
    }
    let mut conductance: FxHashMap<u32, f64> = FxHashMap::default();
    for &v in order.iter().rev() {
        let c = if grounded.contains(&v) { f64::INFINITY } else { conductance.get(&v).copied().unwrap_or(0.0) };
        if v == xid {
            return Ok(ResistanceValue { ohms: 1.0 / c });
        }
        // a unit edge in series with the subtree below v
        let through = if c.is_infinite() { 1.0 } else { c / (1.0 + c) };
        *conductance.entry(up[&v]).or_insert(0.0) += through;
    }
    unreachable!("x is the first vertex of the search")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_parallel() {
        let edge = FiniteGraph::path(2);
        assert_eq!(effective_resistance(&edge, &[0], &[1]).unwrap().ohms, 1.0);
        let p = FiniteGraph::path(7);
        for s in [Solver::Exact, Solver::Direct, Solver::ConjugateGradient] {
            let r = effective_resistance_with(&p, &[0], &[6], s).unwrap().ohms;
            assert!((r - 6.0).abs() < 1e-12, "{s:?}");
        }
        // two length-2 paths between 0 and 3
        let g = FiniteGraph::new(4, &[(0, 1), (1, 3), (0, 2), (2, 3)]).unwrap();
        assert_eq!(effective_resistance_exact(&g, &[0], &[3]).unwrap(), rat_int(1));
    }

    #[test]
    fn terminals_must_be_disjoint() {
        let g = FiniteGraph::path(3);
        assert!(matches!(effective_resistance(&g, &[0, 1], &[1]), Err(Error::TerminalsOverlap)));
    }

    #[test]
    fn grounded_factor_matches_dirichlet() {
        let g = FiniteGraph::grid(5, 4);
        let f = LaplacianFactor::new(&g, 7).unwrap();
        for (x, y) in [(0, 19), (7, 3), (12, 13), (5, 5)] {
            let direct = f.resistance(x, y).unwrap().ohms;
            let exact = if x == y { 0.0 } else { effective_resistance_exact(&g, &[x], &[y]).unwrap().to_f64().unwrap() };
            assert!((direct - exact).abs() < 1e-12, "{x} {y}: {direct} vs {exact}");
        }
    }

    #[test]
    fn star_to_leaves() {
        let c = LatticePoint::ORIGIN;
        let leaves = [LatticePoint::new(1, 0, 0), LatticePoint::new(0, 1, 0), LatticePoint::new(0, 0, 1)];
        let edges: Vec<_> = leaves.iter().map(|&l| (c, l)).collect();
        let t = SpanningTree::from_edges(c, &edges, Default::default()).unwrap();
        let r = point_to_set_resistance(&t, &c, &leaves).unwrap().ohms;
        assert!((r - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(point_to_set_resistance(&t, &c, &[c]).unwrap().ohms, 0.0);
        assert_eq!(point_to_set_resistance(&t, &leaves[0], &[leaves[1]]).unwrap().ohms, 2.0);
    }
}
