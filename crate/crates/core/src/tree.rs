//! Decision-tree decomposition of a PTF into regular, close-to-constant and
//! (budget-exhausted) bad leaves.

use serde::{Deserialize, Serialize};

use crate::constants::TheoryConstants;
use crate::error::{invalid, Error, Result};
use crate::influence::{critical_index_of, influence_profile, CriticalIndex};
use crate::measure::{disagreement_with_constant, fit_constant, free_variables, stream_seed, Method};
use crate::poly::{sign, Mask, MultilinearPolynomial, Restriction};
use crate::serde_util::{one_based, one_based_vec};

/// Subtrees rooted above this depth are built on the rayon pool.
const PARALLEL_DEPTH: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub tau: f64,
    pub degree: usize,
    /// Closeness threshold for constant leaves; equal to `tau`.
    pub beta: f64,
    /// Regularity parameter used for the critical-index step.
    pub tau_tilde: f64,
    /// Equal to `tau`.
    pub tau_tilde_prime: f64,
    pub alpha: f64,
    pub per_stage_cap: u64,
    pub stage_cap: u64,
    pub total_budget: u64,
    pub budget_overridden: bool,
    /// `ln((1/tau) * max(d ln(1/tau), e)^{a d})` with `a = depth_exponent`.
    pub ln_depth_reference: f64,
    pub budget_within_reference: bool,
    pub constants: TheoryConstants,
}

/// `ln f(t)` for `f(t) = t (c' d L ln(1/t))^d`, `L = max(ln d, 1)`.
fn ln_tau_tilde_map(ln_t: f64, d: f64, c_prime: f64) -> f64 {
    let l = d.ln().max(1.0);
    ln_t + d * (c_prime * d * l * (-ln_t)).ln()
}

fn solve_tau_tilde(d: usize, tau: f64, c_prime: f64) -> Result<f64> {
    let dd = d as f64;
    let target = tau.ln();
    // f is increasing on (0, e^{-d}], so the root below that point is unique
    let mut hi = target.min(-dd);
    if ln_tau_tilde_map(hi, dd, c_prime) < target {
        return Err(invalid(format!("no tau_tilde solves the defining equation for tau = {tau}, c_prime = {c_prime}")));
    }
    let mut lo = 2.0 * hi;
    while ln_tau_tilde_map(lo, dd, c_prime) >= target {
        lo *= 2.0;
        if lo < -700.0 {
            return Err(Error::Resource(format!("tau_tilde for tau = {tau} underflows")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ln_tau_tilde_map(mid, dd, c_prime) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn saturating_ceil(x: f64) -> u64 {
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x.ceil().max(0.0) as u64
    }
}

/// Depth caps and auxiliary regularity parameters for a degree-`d` input.
pub fn derive_parameters(d: usize, tau: f64, constants: &TheoryConstants) -> Result<TreeParams> {
    constants.validate()?;
    if d == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    // tau = 1/2 is accepted: the defining formulas stay finite there
    if !(tau > 0.0 && tau <= 0.5) {
        return Err(invalid(format!("tau = {tau} outside (0, 1/2]")));
    }
    let dd = d as f64;
    let beta = tau;
    let tau_tilde = solve_tau_tilde(d, tau, constants.c_prime)?;
    let alpha = constants.alpha_mult * (dd * (1.0 / beta).ln().ln() + dd * dd.ln() + dd);
    if !(alpha > 0.0) {
        return Err(invalid(format!("head-size parameter alpha = {alpha} is not positive")));
    }
    let per_stage_cap = saturating_ceil(alpha / tau_tilde).max(1);
    let stage_cap = saturating_ceil(2.0 * constants.c.powi(d as i32) * (1.0 / tau).ln()).max(1);
    let (total_budget, budget_overridden) = match constants.depth_budget_override {
        Some(b) => (b, true),
        None => (per_stage_cap.saturating_mul(stage_cap), false),
    };
    let ln_depth_reference = (1.0 / tau).ln()
        + constants.depth_exponent * dd * (dd * (1.0 / tau).ln()).max(std::f64::consts::E).ln();
    let budget_within_reference = (total_budget.max(1) as f64).ln() <= ln_depth_reference;
    Ok(TreeParams {
        tau,
        degree: d,
        beta,
        tau_tilde,
        tau_tilde_prime: tau,
        alpha,
        per_stage_cap,
        stage_cap,
        total_budget,
        budget_overridden,
        ln_depth_reference,
        budget_within_reference,
        constants: constants.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BadReason {
    DepthBudget,
    StageCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeafClass {
    Regular,
    CloseToConstant { sign: i8, distance: f64 },
    Bad { reason: BadReason },
}

/// Numbers backing a leaf's class.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LeafEvidence {
    /// Critical index of the leaf polynomial at `tau` (absent when constant).
    pub critical_index: Option<usize>,
    /// `max_i Inf_i / sum_i Inf_i`.
    pub max_influence_fraction: Option<f64>,
    pub distance_to_constant: Option<f64>,
    pub distance_method: Option<Method>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaf {
    pub path: Restriction,
    pub polynomial: MultilinearPolynomial,
    pub class: LeafClass,
    pub evidence: LeafEvidence,
}

impl Leaf {
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn is_bad(&self) -> bool {
        matches!(self.class, LeafClass::Bad { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        #[serde(with = "one_based")]
        var: usize,
        plus: Box<TreeNode>,
        minus: Box<TreeNode>,
    },
    Leaf(Leaf),
}

impl TreeNode {
    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Leaf>) {
        match self {
            TreeNode::Internal { plus, minus, .. } => {
                plus.collect_leaves(out);
                minus.collect_leaves(out);
            }
            TreeNode::Leaf(leaf) => out.push(leaf),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionTree {
    pub params: TreeParams,
    /// The variance-normalized input; leaf polynomials are its restrictions.
    pub input: MultilinearPolynomial,
    pub root: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMassReport {
    pub good_mass: f64,
    pub regular_mass: f64,
    pub close_mass: f64,
    pub bad_mass: f64,
    pub regular_leaves: usize,
    pub close_leaves: usize,
    pub bad_leaves: usize,
    pub max_depth: usize,
    pub budget_exhausted: bool,
}

impl DecompositionTree {
    /// Leaves in depth-first order, `+1` branch first.
    pub fn leaves(&self) -> Vec<&Leaf> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out
    }

    pub fn depth(&self) -> usize {
        self.leaves().iter().map(|l| l.depth()).max().unwrap_or(0)
    }

    /// Index (in `leaves()` order) of the leaf reached by cube point `point`.
    pub fn leaf_index_for_point(&self, point: Mask) -> usize {
        fn walk(node: &TreeNode, point: Mask, offset: usize) -> usize {
            match node {
                TreeNode::Leaf(_) => offset,
                TreeNode::Internal { var, plus, minus } => {
                    if point & (1 << var) == 0 {
                        walk(plus, point, offset)
                    } else {
                        walk(minus, point, offset + count_leaves(plus))
                    }
                }
            }
        }
        walk(&self.root, point, 0)
    }

    pub fn leaf_for_point(&self, point: Mask) -> &Leaf {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf(leaf) => return leaf,
                TreeNode::Internal { var, plus, minus } => {
                    node = if point & (1 << var) == 0 { plus } else { minus };
                }
            }
        }
    }

    /// `sign` of the reached leaf's polynomial at `point`.
    pub fn sign_at(&self, point: Mask) -> i8 {
        sign(self.leaf_for_point(point).polynomial.evaluate_index(point))
    }

    /// Dyadic mass accounting for the uniform random root-to-leaf walk.
    pub fn path_mass(&self) -> PathMassReport {
        let mut r = PathMassReport {
            good_mass: 0.0,
            regular_mass: 0.0,
            close_mass: 0.0,
            bad_mass: 0.0,
            regular_leaves: 0,
            close_leaves: 0,
            bad_leaves: 0,
            max_depth: 0,
            budget_exhausted: false,
        };
        for leaf in self.leaves() {
            let mass = 0.5f64.powi(leaf.depth() as i32);
            r.max_depth = r.max_depth.max(leaf.depth());
            match leaf.class {
                LeafClass::Regular => {
                    r.regular_mass += mass;
                    r.regular_leaves += 1;
                }
                LeafClass::CloseToConstant { .. } => {
                    r.close_mass += mass;
                    r.close_leaves += 1;
                }
                LeafClass::Bad { .. } => {
                    r.bad_mass += mass;
                    r.bad_leaves += 1;
                    r.budget_exhausted = true;
                }
            }
        }
        r.good_mass = 1.0 - r.bad_mass;
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn count_leaves(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf(_) => 1,
        TreeNode::Internal { plus, minus, .. } => count_leaves(plus) + count_leaves(minus),
    }
}

struct Builder<'a> {
    params: &'a TreeParams,
    n: usize,
}

fn path_seed(master: u64, path: &Restriction) -> u64 {
    let index = ((path.mask() as u64) << 32) | path.negative_mask() as u64;
    stream_seed(master, "leaf", index)
}

impl Builder<'_> {
    fn leaf(&self, q: MultilinearPolynomial, path: Restriction, class: LeafClass, evidence: LeafEvidence) -> TreeNode {
        TreeNode::Leaf(Leaf { path, polynomial: q, class, evidence })
    }

    /// One stage: classify `q` or restrict its influence-ordered prefix.
    fn grow(&self, q: MultilinearPolynomial, path: Restriction, stage: u64) -> Result<TreeNode> {
        let k = &self.params.constants;
        let free = free_variables(self.n, path.mask());
        if q.variance() == 0.0 {
            let evidence = LeafEvidence {
                distance_to_constant: Some(0.0),
                distance_method: Some(Method::Exact { points: 1u64 << free.len().min(63) }),
                ..Default::default()
            };
            let class = LeafClass::CloseToConstant { sign: sign(q.constant_term()), distance: 0.0 };
            return Ok(self.leaf(q, path, class, evidence));
        }
        let profile = influence_profile(&q);
        let at_tau = critical_index_of(&profile, self.params.tau)?;
        let mut evidence = LeafEvidence {
            critical_index: at_tau.finite(),
            max_influence_fraction: Some(profile.max_influence() / profile.total),
            ..Default::default()
        };
        if at_tau == CriticalIndex::Finite(0) {
            return Ok(self.leaf(q, path, LeafClass::Regular, evidence));
        }
        if !path.is_empty() {
            let fit = fit_constant(&q, &free, k, path_seed(k.mc_seed, &path))?;
            evidence.distance_to_constant = Some(fit.distance);
            evidence.distance_method = Some(fit.method);
            if fit.distance <= self.params.beta {
                let class = LeafClass::CloseToConstant { sign: fit.sign, distance: fit.distance };
                return Ok(self.leaf(q, path, class, evidence));
            }
        }
        let depth = path.len() as u64;
        let remaining = self.params.total_budget.saturating_sub(depth);
        if remaining == 0 {
            return Ok(self.leaf(q, path, LeafClass::Bad { reason: BadReason::DepthBudget }, evidence));
        }
        if !self.params.budget_overridden && stage >= self.params.stage_cap {
            return Ok(self.leaf(q, path, LeafClass::Bad { reason: BadReason::StageCap }, evidence));
        }
        let ell = match critical_index_of(&profile, self.params.tau_tilde)? {
            CriticalIndex::Finite(l) => l as u64,
            CriticalIndex::Infinite => u64::MAX,
        };
        let take = ell.min(self.params.per_stage_cap).min(remaining).max(1) as usize;
        let vars = &profile.order[..take.min(profile.order.len())];
        self.branch(q, path, vars, stage)
    }

    fn branch(&self, q: MultilinearPolynomial, path: Restriction, vars: &[usize], stage: u64) -> Result<TreeNode> {
        let Some((&var, rest)) = vars.split_first() else {
            return self.grow(q, path, stage + 1);
        };
        let child = |value: i8| -> Result<TreeNode> {
            let single = Restriction::new(vec![(var, value)])?;
            self.branch(q.restrict(&single)?, path.extended(var, value)?, rest, stage)
        };
        let (plus, minus) = if path.len() < PARALLEL_DEPTH {
            rayon::join(|| child(1), || child(-1))
        } else {
            (child(1), child(-1))
        };
        Ok(TreeNode::Internal { var, plus: Box::new(plus?), minus: Box::new(minus?) })
    }
}

/// Grows the decomposition tree of `sign(p)` at regularity `tau`.
pub fn build_tree(p: &MultilinearPolynomial, tau: f64, constants: &TheoryConstants) -> Result<DecompositionTree> {
    build_tree_with_beta(p, tau, tau, constants)
}

/// As [`build_tree`], with a stricter closeness threshold `beta <= tau` for
/// constant leaves.
pub fn build_tree_with_beta(
    p: &MultilinearPolynomial,
    tau: f64,
    beta: f64,
    constants: &TheoryConstants,
) -> Result<DecompositionTree> {
    let mut params = derive_parameters(p.degree().max(1), tau, constants)?;
    if !(beta > 0.0 && beta <= tau) {
        return Err(invalid(format!("beta = {beta} outside (0, tau]")));
    }
    params.beta = beta;
    let builder = Builder { params: &params, n: p.n() };
    let (input, root) = if p.variance() == 0.0 {
        let root = builder.grow(p.clone(), Restriction::empty(), 0)?;
        (p.clone(), root)
    } else {
        let input = p.normalize_variance()?;
        let root = builder.grow(input.clone(), Restriction::empty(), 0)?;
        (input, root)
    };
    Ok(DecompositionTree { params, input, root })
}

/// Independent re-check of every leaf label and of pointwise sign equivalence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeAudit {
    pub leaves: usize,
    pub regular_verified: usize,
    pub close_verified: usize,
    pub label_failures: usize,
    pub max_close_distance: f64,
    pub sign_mismatches: u64,
    pub points_checked: u64,
}

impl TreeAudit {
    pub fn ok(&self) -> bool {
        self.label_failures == 0 && self.sign_mismatches == 0
    }
}

/// Recomputes every leaf polynomial from `p`, re-verifies its class, and compares
/// the tree's sign with `sign(p)` at every cube point.
pub fn audit_tree(tree: &DecompositionTree, p: &MultilinearPolynomial) -> Result<TreeAudit> {
    let k = &tree.params.constants;
    crate::poly::check_enumerable(p.n(), k.enumeration_limit)?;
    let reference = if p.variance() == 0.0 { p.clone() } else { p.normalize_variance()? };
    let leaves = tree.leaves();
    let mut audit = TreeAudit {
        leaves: leaves.len(),
        regular_verified: 0,
        close_verified: 0,
        label_failures: 0,
        max_close_distance: 0.0,
        sign_mismatches: 0,
        points_checked: 0,
    };
    for leaf in &leaves {
        let restricted = reference.restrict(&leaf.path)?;
        let same = restricted
            .terms()
            .zip(leaf.polynomial.terms())
            .all(|((ma, ca), (mb, cb))| ma == mb && (ca - cb).abs() <= 1e-9 * (1.0 + ca.abs()))
            && restricted.num_terms() == leaf.polynomial.num_terms();
        if !same {
            audit.label_failures += 1;
            continue;
        }
        match leaf.class {
            LeafClass::Regular => {
                let ok = restricted.variance() > 0.0
                    && critical_index_of(&influence_profile(&restricted), tree.params.tau)? == CriticalIndex::Finite(0);
                if ok {
                    audit.regular_verified += 1;
                } else {
                    audit.label_failures += 1;
                }
            }
            LeafClass::CloseToConstant { sign: s, .. } => {
                let free = free_variables(p.n(), leaf.path.mask());
                let (dist, _) = disagreement_with_constant(&restricted, &free, s, k, 0)?;
                audit.max_close_distance = audit.max_close_distance.max(dist);
                if dist <= tree.params.beta {
                    audit.close_verified += 1;
                } else {
                    audit.label_failures += 1;
                }
            }
            LeafClass::Bad { .. } => {}
        }
    }
    for point in 0..(1 as Mask) << p.n() {
        audit.points_checked += 1;
        if tree.sign_at(point) != sign(p.evaluate_index(point)) {
            audit.sign_mismatches += 1;
        }
    }
    Ok(audit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub restriction: Restriction,
    /// `p'(rho)`: the constant term after restricting the head.
    pub head_value: f64,
    /// l2 norm of the non-constant part of the restricted polynomial.
    pub tail_norm: f64,
    pub condition_i: bool,
    pub condition_ii: bool,
    pub good: bool,
    /// `dist(f_rho, sign(p'(rho)))`, exact.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub k: usize,
    pub beta: f64,
    #[serde(with = "one_based_vec")]
    pub head_vars: Vec<usize>,
    pub t_star: f64,
    pub tail_threshold: f64,
    pub entries: Vec<CensusEntry>,
    pub condition_i_fraction: f64,
    pub condition_ii_fraction: f64,
    pub good_fraction: f64,
    /// Lower bound on the good fraction the theory predicts, `1/(2C^d)`.
    pub predicted_good_fraction: f64,
    /// Good restrictions whose measured distance exceeds `beta`.
    pub good_but_far: usize,
}

/// Enumerates all `2^K` assignments to the `K` most influential variables and
/// tests both conditions of a good restriction.
pub fn good_restriction_census(
    p: &MultilinearPolynomial,
    k: usize,
    beta: f64,
    constants: &TheoryConstants,
) -> Result<CensusReport> {
    constants.validate()?;
    if k > 20 {
        return Err(Error::Resource(format!("census over 2^{k} head restrictions exceeds 2^20")));
    }
    if k > p.n() {
        return Err(invalid(format!("head size {k} exceeds n = {}", p.n())));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(invalid(format!("beta = {beta} outside (0, 1)")));
    }
    let p = p.normalize_variance()?;
    let d = p.degree().max(1) as i32;
    let t_star = 1.0 / (2.0 * constants.c.powi(d));
    let tail_threshold = t_star * (constants.theta_dfn2 * (1.0 / beta).ln()).powf(-(d as f64) / 2.0);
    let head_vars = influence_profile(&p).order[..k].to_vec();
    let mut entries = Vec::with_capacity(1 << k);
    for bits in 0..(1 as Mask) << k {
        let rho = Restriction::from_assignment(&head_vars, bits)?;
        let q = p.restrict(&rho)?;
        let head_value = q.constant_term();
        let tail_norm = q.variance().sqrt();
        let condition_i = head_value.abs() >= t_star;
        let condition_ii = tail_norm <= tail_threshold;
        let free = free_variables(p.n(), rho.mask());
        let seed = path_seed(constants.mc_seed, &rho);
        let (distance, _) = disagreement_with_constant(&q, &free, sign(head_value), constants, seed)?;
        entries.push(CensusEntry {
            restriction: rho,
            head_value,
            tail_norm,
            condition_i,
            condition_ii,
            good: condition_i && condition_ii,
            distance,
        });
    }
    let total = entries.len() as f64;
    let frac = |f: fn(&CensusEntry) -> bool| entries.iter().filter(|e| f(e)).count() as f64 / total;
    let condition_i_fraction = frac(|e| e.condition_i);
    let condition_ii_fraction = frac(|e| e.condition_ii);
    let good_fraction = frac(|e| e.good);
    let good_but_far = entries.iter().filter(|e| e.good && e.distance > beta).count();
    Ok(CensusReport {
        k,
        beta,
        head_vars,
        t_star,
        tail_threshold,
        entries,
        condition_i_fraction,
        condition_ii_fraction,
        good_fraction,
        predicted_good_fraction: t_star,
        good_but_far,
    })
}
