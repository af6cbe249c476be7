//! Tree expansion of the order coefficients, used as an independent oracle.
//!
//! `u^(k)_nu` is the sum over ordered rooted trees with `k` nodes and root-line
//! momentum `nu` of the product of node factors and line propagators:
//!
//! | node | factor |
//! |---|---|
//! | internal, `p` children, mode `nu_v` | `-eps a_{nu_v, p}` (separable: `-eps a_p`, mode 0) |
//! | end, mode `nu != 0` | `eps f_nu` (general: `-eps h_nu(c0)`) |
//! | end, mode `0` | `zeta` |
//!
//! Each line carries `1 / D(eps, omega . nu_l)`, or 1 if `nu_l = 0`. Line
//! momenta are the sum of the modes below the line; lines leaving internal
//! nodes must have nonzero momentum. Separable trees have `p >= 2` at every
//! internal node; general trees also allow `p = 1` nodes with `nu_v != 0`,
//! whose maximal runs are chains.
//!
//! Children are ordered, which matches the ordered index sums of the
//! recursion. Partial momenta of the trailing children are truncated to
//! `|nu|_1 <= N` exactly as the recursion truncates its partial products.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, MultiIndex};
use crate::range::denominator;
use crate::system::CentredSystem;

/// Largest order the enumerator accepts.
pub const MAX_TREE_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    End,
    Internal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TreeNode {
    pub kind: NodeKind,
    pub mode: MultiIndex,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn end(mode: MultiIndex) -> Self {
        TreeNode {
            kind: NodeKind::End,
            mode,
            children: Vec::new(),
        }
    }

    pub fn internal(mode: MultiIndex, children: Vec<TreeNode>) -> Self {
        TreeNode {
            kind: NodeKind::Internal,
            mode,
            children,
        }
    }

    /// Number of nodes.
    pub fn order(&self) -> usize {
        1 + self.children.iter().map(TreeNode::order).sum::<usize>()
    }

    /// Momentum of the line leaving this node.
    pub fn momentum(&self) -> MultiIndex {
        self.children
            .iter()
            .fold(self.mode.clone(), |acc, c| acc.add(&c.momentum()))
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    /// Nested JSON with fields `kind`, `mode` and (internal nodes) `children`.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("tree serializes")
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode, Option<&'a TreeNode>)) {
        fn go<'a>(n: &'a TreeNode, parent: Option<&'a TreeNode>, f: &mut impl FnMut(&'a TreeNode, Option<&'a TreeNode>)) {
            f(n, parent);
            for c in &n.children {
                go(c, Some(n), f);
            }
        }
        go(self, None, f);
    }

    /// Structural rules: internal lines carry nonzero momentum, separable
    /// internal nodes have `p >= 2` and mode 0, `p = 1` nodes have `nu_v != 0`.
    pub fn is_valid(&self, theorem: u8) -> bool {
        let mut ok = true;
        self.visit(&mut |n, _| match n.kind {
            NodeKind::End => ok &= n.children.is_empty(),
            NodeKind::Internal => {
                ok &= !n.momentum().is_zero() && !n.children.is_empty();
                if theorem == 1 {
                    ok &= n.arity() >= 2 && n.mode.is_zero();
                } else if n.arity() == 1 {
                    ok &= !n.mode.is_zero();
                }
            }
        });
        ok
    }
}

/// Coefficients and parameters needed to value trees.
#[derive(Debug, Clone)]
pub struct TreeContext {
    pub theorem: u8,
    pub epsilon: f64,
    pub zeta: f64,
    pub omega: Vec<f64>,
    pub a: f64,
    pub cutoff: u32,
    /// End-node factors for `nu != 0`, `eps` included.
    end_factors: BTreeMap<MultiIndex, Complex64>,
    /// `p -> alpha_p` for internal nodes (`p = 1` only for general systems,
    /// without the zero mode).
    internal: BTreeMap<usize, FourierSeries>,
}

impl TreeContext {
    pub fn from_system(system: &CentredSystem, omega: &[f64], epsilon: f64, zeta: f64, cutoff: u32) -> Result<Self> {
        if omega.len() != system.dim {
            return Err(Error::DimensionMismatch {
                expected: system.dim,
                found: omega.len(),
            });
        }
        let source = system.first_order_source().truncate(cutoff);
        let end_factors = source
            .iter()
            .filter(|(nu, _)| !nu.is_zero())
            .map(|(nu, c)| (nu.clone(), c * epsilon))
            .collect();
        let theorem = system.theorem();
        let mut internal = BTreeMap::new();
        if theorem == 2 {
            let alpha1 = system.alpha1_oscillating();
            if !alpha1.is_empty() {
                internal.insert(1, alpha1);
            }
        }
        for p in system.nonlinear_degrees() {
            internal.insert(p, system.alpha(p));
        }
        Ok(TreeContext {
            theorem,
            epsilon,
            zeta,
            omega: omega.to_vec(),
            a: system.a,
            cutoff,
            end_factors,
            internal,
        })
    }

    pub fn node_factor(&self, node: &TreeNode) -> Complex64 {
        match node.kind {
            NodeKind::End if node.mode.is_zero() => Complex64::new(self.zeta, 0.0),
            NodeKind::End => self.end_factors.get(&node.mode).copied().unwrap_or_default(),
            NodeKind::Internal => self
                .internal
                .get(&node.arity())
                .map_or(Complex64::default(), |s| s.get(&node.mode) * -self.epsilon),
        }
    }

    pub fn propagator(&self, momentum: &MultiIndex) -> Complex64 {
        if momentum.is_zero() {
            Complex64::new(1.0, 0.0)
        } else {
            denominator(self.epsilon, momentum.dot(&self.omega), self.a).inv()
        }
    }
}

/// Builds all trees order by order and caches them.
#[derive(Debug, Clone)]
pub struct TreeEnumerator {
    ctx: TreeContext,
    /// `levels[k]`: momentum -> trees of order `k`.
    levels: Vec<BTreeMap<MultiIndex, Vec<TreeNode>>>,
}

type Forests = BTreeMap<MultiIndex, Vec<Vec<TreeNode>>>;

impl TreeEnumerator {
    pub fn new(ctx: TreeContext) -> Self {
        TreeEnumerator {
            ctx,
            levels: vec![BTreeMap::new()],
        }
    }

    pub fn context(&self) -> &TreeContext {
        &self.ctx
    }

    /// All trees of order `k`, keyed by root momentum.
    pub fn level(&mut self, k: usize) -> Result<&BTreeMap<MultiIndex, Vec<TreeNode>>> {
        if k > MAX_TREE_ORDER {
            return Err(Error::TreeGuard {
                order: k,
                guard: MAX_TREE_ORDER,
            });
        }
        if k == 0 {
            return Err(Error::InvalidArgument("tree order must be positive".into()));
        }
        while self.levels.len() <= k {
            let next = self.build(self.levels.len());
            self.levels.push(next);
        }
        Ok(&self.levels[k])
    }

    /// Trees of order `k` with root momentum `nu`.
    pub fn trees(&mut self, k: usize, nu: &MultiIndex) -> Result<Vec<TreeNode>> {
        Ok(self.level(k)?.get(nu).cloned().unwrap_or_default())
    }

    fn build(&self, k: usize) -> BTreeMap<MultiIndex, Vec<TreeNode>> {
        let dim = self.ctx.omega.len();
        let mut out: BTreeMap<MultiIndex, Vec<TreeNode>> = BTreeMap::new();
        if k == 1 {
            let zero = MultiIndex::zero(dim);
            out.insert(zero.clone(), vec![TreeNode::end(zero)]);
            for nu in self.ctx.end_factors.keys() {
                out.entry(nu.clone()).or_default().push(TreeNode::end(nu.clone()));
            }
            return out;
        }
        let n = self.ctx.cutoff;
        for (&p, alpha) in &self.ctx.internal {
            if p > k - 1 {
                continue;
            }
            for comp in compositions(k - 1, p) {
                let forests = self.forests(&comp);
                for (mode, _) in alpha.iter() {
                    for (sum, list) in &forests {
                        let line = mode.add(sum);
                        if line.is_zero() || line.norm() > n {
                            continue;
                        }
                        let bucket = out.entry(line).or_default();
                        for children in list {
                            bucket.push(TreeNode::internal(mode.clone(), children.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    /// Ordered tuples of trees with the given orders, keyed by total momentum;
    /// every suffix sum (and the total) is kept within `|nu|_1 <= N`.
    fn forests(&self, orders: &[usize]) -> Forests {
        let n = self.ctx.cutoff;
        let first = &self.levels[orders[0]];
        if orders.len() == 1 {
            return first
                .iter()
                .map(|(nu, ts)| (nu.clone(), ts.iter().map(|t| vec![t.clone()]).collect()))
                .collect();
        }
        let rest = self.forests(&orders[1..]);
        let mut out: Forests = BTreeMap::new();
        for (nu1, ts) in first {
            for (nu2, tails) in &rest {
                let sum = nu1.add(nu2);
                if sum.norm() > n {
                    continue;
                }
                let bucket = out.entry(sum).or_default();
                for t in ts {
                    for tail in tails {
                        let mut f = Vec::with_capacity(tail.len() + 1);
                        f.push(t.clone());
                        f.extend(tail.iter().cloned());
                        bucket.push(f);
                    }
                }
            }
        }
        out
    }
}

/// Ordered compositions of `total` into `parts` positive integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if parts > total {
        return Vec::new();
    }
    let mut out = Vec::new();
    for first in 1..=total - (parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Trees of order `k` and root momentum `nu`.
pub fn enumerate_trees(ctx: &TreeContext, k: usize, nu: &MultiIndex) -> Result<Vec<TreeNode>> {
    TreeEnumerator::new(ctx.clone()).trees(k, nu)
}

/// Product of node factors and propagators, root line included.
pub fn tree_value(tree: &TreeNode, ctx: &TreeContext) -> Complex64 {
    let mut value = ctx.node_factor(tree) * ctx.propagator(&tree.momentum());
    for c in &tree.children {
        value *= tree_value(c, ctx);
    }
    value
}

/// `sum_theta Val(theta)` over trees of order `k` and momentum `nu`.
pub fn sum_trees(ctx: &TreeContext, k: usize, nu: &MultiIndex) -> Result<Complex64> {
    Ok(enumerate_trees(ctx, k, nu)?
        .iter()
        .map(|t| tree_value(t, ctx))
        .sum())
}

/// A maximal run of `p = 1` nodes, listed from the root side down.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chain {
    pub modes: Vec<MultiIndex>,
    /// Momentum of the line leaving each chain node.
    pub momenta: Vec<MultiIndex>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

fn is_chain_node(n: &TreeNode) -> bool {
    n.kind == NodeKind::Internal && n.arity() == 1
}

pub fn find_chains(tree: &TreeNode) -> Vec<Chain> {
    let mut chains = Vec::new();
    tree.visit(&mut |n, parent| {
        if !is_chain_node(n) || parent.is_some_and(is_chain_node) {
            return;
        }
        let mut chain = Chain {
            modes: Vec::new(),
            momenta: Vec::new(),
        };
        let mut cur = n;
        while is_chain_node(cur) {
            chain.modes.push(cur.mode.clone());
            chain.momenta.push(cur.momentum());
            cur = &cur.children[0];
        }
        chains.push(chain);
    });
    chains
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingReport {
    pub order: usize,
    pub end_nodes: usize,
    pub v1: usize,
    pub v2: usize,
    pub chains: usize,
    pub checks: Vec<(String, bool)>,
}

impl CountingReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

/// Node-count relations: `|E| >= |V2| + 1`, `|chains| <= |E| + |V2|`,
/// `|chains| <= |V1|`, `k = |E| + |V1| + |V2|`, and for separable trees
/// `|E| >= (k + 1) / 2`.
pub fn verify_counting(tree: &TreeNode, theorem: u8) -> CountingReport {
    let (mut e, mut v1, mut v2) = (0, 0, 0);
    tree.visit(&mut |n, _| match n.kind {
        NodeKind::End => e += 1,
        NodeKind::Internal if n.arity() == 1 => v1 += 1,
        NodeKind::Internal => v2 += 1,
    });
    let k = tree.order();
    let chains = find_chains(tree).len();
    let mut checks = vec![
        ("|E| >= |V2| + 1".to_string(), e > v2),
        ("|chains| <= |E| + |V2|".to_string(), chains <= e + v2),
        ("|chains| <= |V1|".to_string(), chains <= v1),
        ("k = |E| + |V1| + |V2|".to_string(), k == e + v1 + v2),
    ];
    if theorem == 1 {
        checks.push(("|E| >= (k + 1) / 2".to_string(), 2 * e > k));
    }
    CountingReport {
        order: k,
        end_nodes: e,
        v1,
        v2,
        chains,
        checks,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainBound {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `|Val(chain)|` against `C0^p beta^{(p-1)/2} prod e^{-3 xi |nu_v| / 4}`.
pub fn chain_value_bound_check(chain: &Chain, ctx: &TreeContext, c0: f64, beta: f64, xi: f64) -> ChainBound {
    let alpha1 = ctx.internal.get(&1);
    let mut value = Complex64::new(1.0, 0.0);
    let mut decay = 0.0;
    for (mode, momentum) in chain.modes.iter().zip(&chain.momenta) {
        let a = alpha1.map_or(Complex64::default(), |s| s.get(mode));
        value *= a * -ctx.epsilon * ctx.propagator(momentum);
        decay += f64::from(mode.norm());
    }
    let p = chain.len() as i32;
    let bound = c0.powi(p) * beta.powf(f64::from(p - 1) / 2.0) * (-0.75 * xi * decay).exp();
    ChainBound {
        value: value.norm(),
        bound,
        holds: value.norm() <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::range::RangeSolver;
    use crate::system::{GeneralSystem, SeparableSystem, TaylorPoly};
    use std::collections::BTreeSet;

    const PHI: f64 = 1.618_033_988_749_895;

    fn golden_forcing() -> FourierSeries {
        FourierSeries::cosine([1, 0].into(), 1.0)
            .add(&FourierSeries::cosine([0, 1].into(), 1.0))
            .unwrap()
    }

    fn separable(coeffs: Vec<f64>) -> CentredSystem {
        SeparableSystem::new(TaylorPoly::new(0.0, coeffs), golden_forcing())
            .unwrap()
            .recentre(0.0)
            .unwrap()
    }

    fn general() -> CentredSystem {
        let c = Complex64::new;
        let entries = vec![
            (MultiIndex::from([0, 1]), 0, c(0.0, -0.15)),
            (MultiIndex::from([0, -1]), 0, c(0.0, 0.15)),
            (MultiIndex::from([0, 0]), 1, c(1.0, 0.0)),
            (MultiIndex::from([1, 0]), 1, c(0.5, 0.0)),
            (MultiIndex::from([-1, 0]), 1, c(0.5, 0.0)),
            (MultiIndex::from([0, 0]), 2, c(1.0, 0.0)),
        ];
        GeneralSystem::new(2, 0.0, entries).unwrap().recentre(0.0).unwrap()
    }

    #[test]
    fn order_one_is_a_single_end_node() {
        let ctx = TreeContext::from_system(&separable(vec![0.0, 1.0, 1.0]), &[1.0, PHI], 0.05, 0.0, 8).unwrap();
        let nu = MultiIndex::from([1, 0]);
        let trees = enumerate_trees(&ctx, 1, &nu).unwrap();
        assert_eq!(trees.len(), 1);
        let expect = Complex64::new(0.5 * 0.05, 0.0) / denominator(0.05, 1.0, 1.0);
        assert!((tree_value(&trees[0], &ctx) - expect).norm() < 1e-17);
    }

    #[test]
    fn zero_mode_end_node_is_zeta() {
        let ctx = TreeContext::from_system(&separable(vec![0.0, 1.0, 1.0]), &[1.0, PHI], 0.05, 0.3, 8).unwrap();
        let t = TreeNode::end(MultiIndex::zero(2));
        assert_eq!(tree_value(&t, &ctx), Complex64::new(0.3, 0.0));
    }

    #[test]
    fn separable_order_two_is_empty() {
        let ctx = TreeContext::from_system(&separable(vec![0.0, 1.0, 1.0, 1.0]), &[1.0, PHI], 0.05, 0.2, 8).unwrap();
        let mut en = TreeEnumerator::new(ctx);
        assert!(en.level(2).unwrap().is_empty());
    }

    #[test]
    fn general_order_two_has_length_one_chains() {
        let ctx = TreeContext::from_system(&general(), &[1.0, PHI], 0.03, 0.0, 8).unwrap();
        let trees = enumerate_trees(&ctx, 2, &MultiIndex::from([1, 1])).unwrap();
        assert!(!trees.is_empty());
        for t in &trees {
            let chains = find_chains(t);
            assert_eq!(chains.len(), 1);
            assert_eq!(chains[0].len(), 1);
        }
    }

    #[test]
    fn three_node_tree_hand_product() {
        let eps = 0.05;
        let sys = separable(vec![0.0, 1.0, 1.0]);
        let ctx = TreeContext::from_system(&sys, &[1.0, PHI], eps, 0.0, 8).unwrap();
        let n0 = MultiIndex::from([1, 0]);
        let n1 = MultiIndex::from([0, 1]);
        let t = TreeNode::internal(
            MultiIndex::zero(2),
            vec![TreeNode::end(n0.clone()), TreeNode::end(n1.clone())],
        );
        let s0 = n0.dot(&[1.0, PHI]);
        let s1 = n1.dot(&[1.0, PHI]);
        let leaf = |s: f64| Complex64::new(0.5 * eps, 0.0) / denominator(eps, s, 1.0);
        let expect = -eps * leaf(s0) * leaf(s1) / denominator(eps, s0 + s1, 1.0);
        assert!((tree_value(&t, &ctx) - expect).norm() < 1e-18);
    }

    fn check_against_recursion(sys: &CentredSystem, zeta: f64, max_k: usize) {
        let omega = [1.0, PHI];
        let eps = 0.05;
        let n = 10;
        let ctx = TreeContext::from_system(sys, &omega, eps, zeta, n).unwrap();
        let solver = RangeSolver::new(sys, &omega, eps, n).unwrap();
        let ladder = solver.build_ladder(zeta, max_k).unwrap();
        let mut en = TreeEnumerator::new(ctx.clone());
        for k in 1..=max_k {
            let level = en.level(k).unwrap().clone();
            let scale = ladder.order(k).max_abs().max(f64::MIN_POSITIVE);
            let mut modes: BTreeSet<MultiIndex> = level.keys().cloned().collect();
            modes.extend(ladder.order(k).modes().cloned());
            for nu in modes {
                let sum: Complex64 = level
                    .get(&nu)
                    .map(|ts| ts.iter().map(|t| tree_value(t, &ctx)).sum())
                    .unwrap_or_default();
                let rec = ladder.order(k).get(&nu);
                assert!((sum - rec).norm() <= 1e-12 * scale, "k {k} nu {nu}: {sum} vs {rec}");
            }
        }
    }

    #[test]
    fn trees_reproduce_separable_recursion() {
        check_against_recursion(&separable(vec![0.0, 1.0, 1.0]), 0.0, 4);
        check_against_recursion(&separable(vec![0.0, 1.3, -0.4, 0.7]), 0.1, 4);
    }

    #[test]
    fn trees_reproduce_general_recursion() {
        check_against_recursion(&general(), 0.0, 4);
        check_against_recursion(&general(), 0.05, 4);
    }

    #[test]
    fn enumeration_is_duplicate_free_and_valid() {
        for (sys, th) in [(separable(vec![0.0, 1.0, 0.5, 1.0]), 1u8), (general(), 2)] {
            let ctx = TreeContext::from_system(&sys, &[1.0, PHI], 0.05, 0.1, 10).unwrap();
            let mut en = TreeEnumerator::new(ctx);
            for k in 1..=5 {
                let mut seen = BTreeSet::new();
                for (nu, trees) in en.level(k).unwrap() {
                    for t in trees {
                        assert_eq!(t.order(), k);
                        assert_eq!(&t.momentum(), nu);
                        assert!(t.is_valid(th));
                        assert!(seen.insert(t.canonical_json()));
                        assert!(verify_counting(t, th).all_pass());
                    }
                }
            }
        }
    }

    #[test]
    fn order_guard() {
        let ctx = TreeContext::from_system(&general(), &[1.0, PHI], 0.05, 0.0, 6).unwrap();
        assert!(matches!(
            enumerate_trees(&ctx, 6, &MultiIndex::from([1, 0])),
            Err(Error::TreeGuard { order: 6, guard: 5 })
        ));
    }

    #[test]
    fn chains_are_maximal() {
        let z = MultiIndex::zero(2);
        let m = MultiIndex::from([1, 0]);
        let leaf = TreeNode::end(MultiIndex::from([0, 1]));
        assert!(find_chains(&TreeNode::internal(z.clone(), vec![leaf.clone(), leaf.clone()])).is_empty());
        let one = TreeNode::internal(m.clone(), vec![leaf.clone()]);
        assert_eq!(find_chains(&one).len(), 1);
        let two = TreeNode::internal(m.clone(), vec![one.clone()]);
        let chains = find_chains(&two);
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 2);
        // Separated by a branching node: two chains.
        let split = TreeNode::internal(m.clone(), vec![TreeNode::internal(z, vec![one.clone(), leaf])]);
        assert_eq!(find_chains(&split).len(), 2);
    }

    #[test]
    fn counting_boundary_cases() {
        let leaf = TreeNode::end(MultiIndex::from([1]));
        let r = verify_counting(&leaf, 1);
        assert_eq!((r.end_nodes, r.v2), (1, 0));
        assert!(r.all_pass());
        let t = TreeNode::internal(MultiIndex::zero(1), vec![leaf.clone(), leaf]);
        let r = verify_counting(&t, 1);
        assert_eq!(r.end_nodes, 2);
        assert!(r.all_pass());
    }

    #[test]
    fn chain_bounds_hold_at_admissible_eps() {
        use crate::diophantine::{estimate_epsilon_bar, BoundsGuard};
        use crate::system::certify_envelope;
        let sys = general();
        let omega = [1.0, PHI];
        let (xi, rho) = (0.5, 0.5);
        let env = certify_envelope(&sys, xi, rho).unwrap();
        let b = estimate_epsilon_bar(&env, sys.a, &omega, 0.5, 2, BoundsGuard::for_dim(2)).unwrap();
        let eps = b.eps_bar;
        let ctx = TreeContext::from_system(&sys, &omega, eps, 0.0, 10).unwrap();
        let beta = b.delta.max(2.0 * (eps * sys.a).abs() / b.alpha_n0);
        let mut en = TreeEnumerator::new(ctx.clone());
        let mut lengths = BTreeSet::new();
        for k in 1..=5 {
            for trees in en.level(k).unwrap().values() {
                for t in trees {
                    for chain in find_chains(t) {
                        lengths.insert(chain.len());
                        let r = chain_value_bound_check(&chain, &ctx, b.c0, beta, xi);
                        assert!(r.holds, "{r:?}");
                    }
                }
            }
        }
        assert!(lengths.contains(&1) && lengths.contains(&2));
    }

    #[test]
    fn canonical_json_shape() {
        let t = TreeNode::internal(MultiIndex::from([1, 0]), vec![TreeNode::end(MultiIndex::from([0, -1]))]);
        assert_eq!(
            t.canonical_json(),
            r#"{"kind":"internal","mode":[1,0],"children":[{"kind":"end","mode":[0,-1]}]}"#
        );
    }
}
