//! Complete `b`-ary trees of dyadic cubes, leaf-supported measures and the
//! active collection of cubes.
//!
//! Nodes are stored in level order: the root is node 0, the children of
//! node `i` are `b*i + 1 ..= b*i + b`, and the leaves occupy the last
//! `b^depth` indices in lexicographic path order. Every reduction below runs
//! in a fixed index order, so results are bit-reproducible.

use std::ops::Range;

use crate::error::{param, Error, Result};

pub const DEFAULT_NODE_CAP: usize = 1 << 26;

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicTree {
    branching: usize,
    depth: usize,
    level_start: Vec<usize>,
}

impl DyadicTree {
    pub fn new(branching: usize, depth: usize) -> Result<Self> {
        Self::with_cap(branching, depth, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(branching: usize, depth: usize, cap: usize) -> Result<Self> {
        if branching < 2 {
            return param(format!("branching must be at least 2, got {branching}"));
        }
        if branching > DIGITS.len() {
            return param(format!("branching above {} is not addressable", DIGITS.len()));
        }
        let over = || Error::Resource { branching, depth, cap };
        let mut level_start = Vec::with_capacity(depth + 2);
        let mut start = 0usize;
        let mut width = 1usize;
        for _ in 0..=depth {
            level_start.push(start);
            start = start.checked_add(width).ok_or_else(over)?;
            if start > cap {
                return Err(over());
            }
            width = width.checked_mul(branching).ok_or_else(over)?;
        }
        level_start.push(start);
        Ok(Self { branching, depth, level_start })
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.level_start[self.depth + 1]
    }

    pub fn leaf_count(&self) -> usize {
        self.node_count() - self.level_start[self.depth]
    }

    /// Index of the first leaf node.
    pub fn first_leaf(&self) -> usize {
        self.level_start[self.depth]
    }

    pub fn leaf_node(&self, leaf: usize) -> usize {
        self.first_leaf() + leaf
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node >= self.first_leaf()
    }

    pub fn level(&self, node: usize) -> usize {
        debug_assert!(node < self.node_count());
        self.level_start.partition_point(|&s| s <= node) - 1
    }

    /// Nodes at level `k`.
    pub fn level_range(&self, k: usize) -> Range<usize> {
        self.level_start[k]..self.level_start[k + 1]
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        (node > 0).then(|| (node - 1) / self.branching)
    }

    pub fn children(&self, node: usize) -> Range<usize> {
        if self.is_leaf(node) {
            return 0..0;
        }
        let first = self.branching * node + 1;
        first..first + self.branching
    }

    pub fn child(&self, node: usize, i: usize) -> usize {
        assert!(!self.is_leaf(node) && i < self.branching);
        self.branching * node + 1 + i
    }

    /// Leaf numbers (not node indices) below `node`.
    pub fn leaf_range(&self, node: usize) -> Range<usize> {
        let k = self.level(node);
        let pos = node - self.level_start[k];
        let width = self.branching.pow((self.depth - k) as u32);
        pos * width..(pos + 1) * width
    }

    /// Nodes of the subtree of `node` lying at absolute level `k`.
    pub fn subtree_level(&self, node: usize, k: usize) -> Range<usize> {
        let j = self.level(node);
        debug_assert!(k >= j);
        let pos = node - self.level_start[j];
        let width = self.branching.pow((k - j) as u32);
        let lo = self.level_start[k] + pos * width;
        lo..lo + width
    }

    /// Whether `anc` is `node` or one of its ancestors.
    pub fn contains(&self, anc: usize, node: usize) -> bool {
        let (ka, kn) = (self.level(anc), self.level(node));
        if ka > kn {
            return false;
        }
        self.subtree_level(anc, kn).contains(&node)
    }

    pub fn path(&self, node: usize) -> String {
        let mut digits = Vec::new();
        let mut n = node;
        while let Some(p) = self.parent(n) {
            digits.push(DIGITS[n - (self.branching * p + 1)]);
            n = p;
        }
        digits.reverse();
        String::from_utf8(digits).expect("ascii digits")
    }

    pub fn node_from_path(&self, path: &str) -> Result<usize> {
        if path.len() > self.depth {
            return param(format!("path {path:?} is deeper than the tree"));
        }
        let mut node = 0usize;
        for ch in path.bytes() {
            let d = DIGITS
                .iter()
                .position(|&c| c == ch.to_ascii_lowercase())
                .filter(|&d| d < self.branching)
                .ok_or_else(|| Error::Parameter(format!("bad digit {:?} in path {path:?}", ch as char)))?;
            node = self.branching * node + 1 + d;
        }
        Ok(node)
    }

    /// Node aggregates of a leaf vector: `out[Q] = Σ_{x ⊆ Q} leaf[x]`.
    pub fn aggregate(&self, leaf: &[f64]) -> Vec<f64> {
        assert_eq!(leaf.len(), self.leaf_count());
        let mut out = vec![0.0; self.node_count()];
        out[self.first_leaf()..].copy_from_slice(leaf);
        for node in (0..self.first_leaf()).rev() {
            out[node] = self.children(node).map(|c| out[c]).sum();
        }
        out
    }

    /// `out[Q] = Σ_{R ⊆ Q} v[R]`.
    pub fn subtree_sum(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for node in (0..self.first_leaf()).rev() {
            let s: f64 = self.children(node).map(|c| out[c]).sum();
            out[node] += s;
        }
        out
    }

    /// `out[Q] = max_{R ⊆ Q} v[R]`.
    pub fn subtree_max(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for node in (0..self.first_leaf()).rev() {
            let m = self.children(node).map(|c| out[c]).fold(f64::NEG_INFINITY, f64::max);
            out[node] = out[node].max(m);
        }
        out
    }

    /// `out[Q] = Σ_{R ⊇ Q} v[R]`.
    pub fn ancestor_sum(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for node in 1..out.len() {
            out[node] += out[(node - 1) / self.branching];
        }
        out
    }

    /// `out[Q] = max_{R ⊇ Q} v[R]`.
    pub fn ancestor_max(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for node in 1..out.len() {
            out[node] = out[node].max(out[(node - 1) / self.branching]);
        }
        out
    }

    pub fn leaves<'a>(&self, node_values: &'a [f64]) -> &'a [f64] {
        &node_values[self.first_leaf()..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Sigma,
    Omega,
}

/// Exponents `0 < q < 1 <= p < ∞` and the integrability parameter `γ`
/// (which may be `±∞`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

impl Exponents {
    pub fn new(p: f64, q: f64, gamma: f64) -> Result<Self> {
        let e = Self { p, q, gamma };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return param(format!("q must lie in (0,1), got {}", self.q));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return param(format!("p must lie in [1,∞), got {}", self.p));
        }
        if self.gamma == 0.0 || self.gamma.is_nan() {
            return param("gamma must be nonzero");
        }
        Ok(())
    }

    /// Hölder conjugate, infinite at `p = 1`.
    pub fn p_prime(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// `(p−1)q/(p−q)`.
    pub fn r1(&self) -> f64 {
        (self.p - 1.0) * self.q / (self.p - self.q)
    }

    /// `q/(1−q)`.
    pub fn r2(&self) -> f64 {
        self.q / (1.0 - self.q)
    }

    /// `p/(p−q)`.
    pub fn r3(&self) -> f64 {
        self.p / (self.p - self.q)
    }
}

impl Default for Exponents {
    fn default() -> Self {
        Self { p: 2.0, q: 0.5, gamma: 1.0 }
    }
}

/// A tree together with coefficients `λ`, the measures `σ`, `ω` and exponents.
///
/// Node aggregates and the active collection are computed once at
/// construction; an instance is immutable afterwards.
#[derive(Debug, Clone)]
pub struct Instance {
    pub tree: DyadicTree,
    lambda: Vec<f64>,
    sigma: Vec<f64>,
    omega: Vec<f64>,
    pub exponents: Exponents,
    active: Vec<bool>,
    lambda_active: Vec<f64>,
}

impl Instance {
    pub fn new(
        tree: DyadicTree,
        lambda: Vec<f64>,
        sigma_leaves: &[f64],
        omega_leaves: &[f64],
        exponents: Exponents,
    ) -> Result<Self> {
        let n = tree.node_count();
        let l = tree.leaf_count();
        if lambda.len() != n {
            return param(format!("lambda has {} entries, tree has {n} nodes", lambda.len()));
        }
        if sigma_leaves.len() != l || omega_leaves.len() != l {
            return param(format!(
                "leaf masses must have {l} entries (sigma {}, omega {})",
                sigma_leaves.len(),
                omega_leaves.len()
            ));
        }
        let bad = |v: &f64| !(v.is_finite() && *v >= 0.0);
        if let Some(i) = lambda.iter().position(bad) {
            return param(format!("lambda at {:?} is not a finite nonnegative number", tree.path(i)));
        }
        if let Some(i) = sigma_leaves.iter().position(bad) {
            return param(format!("sigma leaf {i} is not a finite nonnegative number"));
        }
        if let Some(i) = omega_leaves.iter().position(bad) {
            return param(format!("omega leaf {i} is not a finite nonnegative number"));
        }
        exponents.validate()?;
        let sigma = tree.aggregate(sigma_leaves);
        let omega = tree.aggregate(omega_leaves);
        let active: Vec<bool> = (0..n).map(|i| lambda[i] > 0.0 && sigma[i] > 0.0 && omega[i] > 0.0).collect();
        let lambda_active = (0..n).map(|i| if active[i] { lambda[i] } else { 0.0 }).collect();
        Ok(Self { tree, lambda, sigma, omega, exponents, active, lambda_active })
    }

    pub fn with_exponents(&self, exponents: Exponents) -> Result<Self> {
        exponents.validate()?;
        let mut out = self.clone();
        out.exponents = exponents;
        Ok(out)
    }

    /// Same tree and measures, new coefficients.
    pub fn with_lambda(&self, lambda: Vec<f64>) -> Result<Self> {
        Self::new(
            self.tree.clone(),
            lambda,
            self.sigma_leaves(),
            self.omega_leaves(),
            self.exponents,
        )
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `λ` with every inactive cube set to zero.
    pub fn lambda_active(&self) -> &[f64] {
        &self.lambda_active
    }

    pub fn measure(&self, side: Side) -> &[f64] {
        match side {
            Side::Sigma => &self.sigma,
            Side::Omega => &self.omega,
        }
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn sigma_leaves(&self) -> &[f64] {
        self.tree.leaves(&self.sigma)
    }

    pub fn omega_leaves(&self) -> &[f64] {
        self.tree.leaves(&self.omega)
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.active[node]
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    /// The active collection in index order.
    pub fn active_collection(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&i| self.active[i]).collect()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Zero out a node family off the active collection.
    pub fn mask(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.active).map(|(&x, &a)| if a { x } else { 0.0 }).collect()
    }

    /// `ρ_Q(x) = Σ_{x ∈ R ⊆ Q} λ_R` for the leaves `x` under `Q`, in leaf order.
    pub fn localized_sum(&self, q: usize) -> Vec<f64> {
        localized_sum(&self.tree, &self.lambda_active, q)
    }

    /// `⟨f⟩^μ_Q` with the convention `0/0 = 0`.
    pub fn average(&self, f: &[f64], side: Side, q: usize) -> f64 {
        let mu = self.tree.leaves(self.measure(side));
        let num: f64 = self.tree.leaf_range(q).map(|x| f[x] * mu[x]).sum();
        let den = self.measure(side)[q];
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Leaf integral `∫ g dμ`.
    pub fn integrate(&self, g: &[f64], side: Side) -> f64 {
        let mu = self.tree.leaves(self.measure(side));
        g.iter().zip(mu).map(|(&a, &m)| if m == 0.0 { 0.0 } else { a * m }).sum()
    }
}

/// Top-down sweep over the subtree of `q` accumulating `λ` along paths.
pub fn localized_sum(tree: &DyadicTree, lambda: &[f64], q: usize) -> Vec<f64> {
    let k0 = tree.level(q);
    let mut acc = vec![lambda[q]];
    for k in k0 + 1..=tree.depth() {
        let range = tree.subtree_level(q, k);
        let b = tree.branching();
        let mut next = Vec::with_capacity(range.len());
        for (j, node) in range.enumerate() {
            next.push(acc[j / b] + lambda[node]);
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(b: usize, d: usize, lambda: Vec<f64>, s: &[f64], w: &[f64]) -> Instance {
        Instance::new(DyadicTree::new(b, d).unwrap(), lambda, s, w, Exponents::default()).unwrap()
    }

    #[test]
    fn node_counts() {
        let t = DyadicTree::new(2, 0).unwrap();
        assert_eq!((t.node_count(), t.leaf_count()), (1, 1));
        let t = DyadicTree::new(2, 2).unwrap();
        assert_eq!((t.node_count(), t.leaf_count()), (7, 4));
        assert_eq!(DyadicTree::new(4, 3).unwrap().node_count(), 85);
    }

    #[test]
    fn cap_is_enforced() {
        let err = DyadicTree::with_cap(2, 10, 100).unwrap_err();
        assert!(err.to_string().contains("100"));
        assert!(matches!(DyadicTree::new(2, 40), Err(Error::Resource { .. })));
    }

    #[test]
    fn parent_child_and_paths() {
        let t = DyadicTree::new(3, 3).unwrap();
        for node in 0..t.first_leaf() {
            for i in 0..3 {
                assert_eq!(t.parent(t.child(node, i)), Some(node));
            }
        }
        for node in 0..t.node_count() {
            assert_eq!(t.node_from_path(&t.path(node)).unwrap(), node);
        }
        assert_eq!(t.path(0), "");
        assert_eq!(t.path(t.leaf_node(0)), "000");
        assert_eq!(t.path(t.leaf_node(26)), "222");
        assert!(t.node_from_path("3").is_err());
        assert!(t.node_from_path("0000").is_err());
    }

    #[test]
    fn leaf_ranges_nest() {
        let t = DyadicTree::new(2, 3).unwrap();
        assert_eq!(t.leaf_range(0), 0..8);
        assert_eq!(t.leaf_range(2), 4..8);
        assert_eq!(t.leaf_range(t.leaf_node(5)), 5..6);
        assert!(t.contains(1, t.leaf_node(3)));
        assert!(!t.contains(2, t.leaf_node(3)));
    }

    #[test]
    fn node_measure_examples() {
        let i = inst(2, 1, vec![0.0; 3], &[0.5, 0.5], &[1.0, 1.0]);
        assert_eq!(i.sigma()[0], 1.0);
        assert_eq!(i.sigma()[1], 0.5);
        let i = inst(2, 2, vec![0.0; 7], &[1.0; 4], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(i.omega()[1], 3.0);
        assert_eq!(i.omega()[0], 10.0);
    }

    #[test]
    fn active_collection_examples() {
        let i = inst(2, 1, vec![0.0; 3], &[1.0, 1.0], &[1.0, 1.0]);
        assert!(i.active_collection().is_empty());
        let i = inst(2, 1, vec![1.0, 0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0]);
        assert_eq!(i.active_collection(), vec![0]);
        // ω vanishes on the right subtree: root and the left spine survive.
        let i = inst(2, 2, vec![1.0; 7], &[1.0; 4], &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(i.active_collection(), vec![0, 1, 3]);
    }

    #[test]
    fn localized_sum_examples() {
        let mut lam = vec![0.0; 7];
        lam[0] = 1.0;
        let i = inst(2, 2, lam, &[1.0; 4], &[1.0; 4]);
        assert_eq!(i.localized_sum(0), vec![1.0; 4]);
        let i = inst(2, 2, vec![0.5; 7], &[1.0; 4], &[1.0; 4]);
        assert_eq!(i.localized_sum(0), vec![1.5; 4]);
        assert_eq!(i.localized_sum(4), vec![0.5]);
        assert_eq!(i.localized_sum(2), vec![1.0; 2]);
    }

    #[test]
    fn average_examples() {
        let i = inst(2, 1, vec![0.0; 3], &[0.5, 0.5], &[0.0, 1.0]);
        assert_eq!(i.average(&[3.0, 3.0], Side::Sigma, 0), 3.0);
        assert_eq!(i.average(&[2.0, 0.0], Side::Sigma, 0), 1.0);
        assert_eq!(i.average(&[2.0, 0.0], Side::Omega, 1), 0.0);
    }

    #[test]
    fn sweeps_agree_with_brute_force() {
        let t = DyadicTree::new(3, 2).unwrap();
        let v: Vec<f64> = (0..t.node_count()).map(|i| (i * 7 % 5) as f64 + 0.25).collect();
        let sub = t.subtree_sum(&v);
        let anc = t.ancestor_max(&v);
        for q in 0..t.node_count() {
            let brute: f64 = (0..t.node_count()).filter(|&r| t.contains(q, r)).map(|r| v[r]).sum();
            assert_eq!(sub[q], brute);
            let m = (0..t.node_count()).filter(|&r| t.contains(r, q)).map(|r| v[r]).fold(0.0, f64::max);
            assert_eq!(anc[q], m);
        }
    }

    #[test]
    fn invalid_instances() {
        let t = DyadicTree::new(2, 1).unwrap();
        assert!(Instance::new(t.clone(), vec![0.0; 3], &[1.0], &[1.0, 1.0], Exponents::default()).is_err());
        assert!(Instance::new(t.clone(), vec![0.0; 3], &[-1.0, 1.0], &[1.0, 1.0], Exponents::default()).is_err());
        assert!(Exponents::new(2.0, 1.0, 1.0).is_err());
        assert!(Exponents::new(0.5, 0.5, 1.0).is_err());
        assert!(Exponents::new(2.0, 0.5, 0.0).is_err());
    }
}
