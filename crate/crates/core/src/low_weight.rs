//! Integer rounding of regular polynomials and assembly of a single low-weight
//! integer PTF from a decomposition tree.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::TheoryConstants;
use crate::error::{invalid, Error, Result};
use crate::influence::{critical_index, CriticalIndex};
use crate::measure::Method;
use crate::poly::{
    check_enumerable, fwht_synthesize, mask_to_vars, sign, vars_to_mask, walsh_hadamard_in_place, Mask,
    MultilinearPolynomial, Restriction, MAX_VARS,
};
use crate::serde_util::big_string;
use crate::tree::{build_tree_with_beta, DecompositionTree, LeafClass, PathMassReport};

/// Multilinear polynomial with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "IntegerPolynomialDoc", try_from = "IntegerPolynomialDoc")]
pub struct IntegerPolynomial {
    n: usize,
    degree_bound: usize,
    coeffs: BTreeMap<Mask, BigInt>,
}

/// On-disk form; coefficients are decimal strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegerPolynomialDoc {
    pub n: usize,
    pub degree: usize,
    pub terms: Vec<(Vec<usize>, String)>,
}

impl From<IntegerPolynomial> for IntegerPolynomialDoc {
    fn from(p: IntegerPolynomial) -> Self {
        let terms = p
            .coeffs
            .iter()
            .map(|(&m, c)| (mask_to_vars(m).into_iter().map(|v| v + 1).collect(), c.to_string()))
            .collect();
        IntegerPolynomialDoc { n: p.n, degree: p.degree_bound, terms }
    }
}

impl TryFrom<IntegerPolynomialDoc> for IntegerPolynomial {
    type Error = Error;

    fn try_from(doc: IntegerPolynomialDoc) -> Result<Self> {
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (vars, c) in doc.terms {
            if vars.contains(&0) {
                return Err(Error::Parse("variable indices are 1-based".into()));
            }
            let zero_based: Vec<usize> = vars.iter().map(|v| v - 1).collect();
            let coeff: BigInt = c.parse().map_err(|_| Error::Parse(format!("'{c}' is not an integer")))?;
            terms.push((vars_to_mask(doc.n, &zero_based)?, coeff));
        }
        IntegerPolynomial::new(doc.n, doc.degree, terms)
    }
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 900 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
}

impl IntegerPolynomial {
    pub fn new(n: usize, degree_bound: usize, terms: impl IntoIterator<Item = (Mask, BigInt)>) -> Result<Self> {
        if n > MAX_VARS {
            return Err(invalid(format!("n = {n} exceeds the supported {MAX_VARS} variables")));
        }
        if degree_bound > n.max(1) {
            return Err(invalid(format!("degree bound {degree_bound} exceeds n = {n}")));
        }
        let mut coeffs: BTreeMap<Mask, BigInt> = BTreeMap::new();
        for (m, c) in terms {
            if n < 32 && m >> n != 0 {
                return Err(invalid(format!("monomial mask {m:#b} outside {n} variables")));
            }
            if m.count_ones() as usize > degree_bound {
                return Err(invalid(format!("monomial of degree {} exceeds the bound {degree_bound}", m.count_ones())));
            }
            *coeffs.entry(m).or_default() += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Self { n, degree_bound, coeffs })
    }

    /// Convenience constructor from 0-based variable lists and machine integers.
    pub fn from_terms(n: usize, degree_bound: usize, terms: &[(&[usize], i64)]) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for (vars, c) in terms {
            out.push((vars_to_mask(n, vars)?, BigInt::from(*c)));
        }
        Self::new(n, degree_bound, out)
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, 0, [])
    }

    pub fn constant(n: usize, c: impl Into<BigInt>) -> Result<Self> {
        Self::new(n, 0, [(0, c.into())])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn coeff(&self, mask: Mask) -> BigInt {
        self.coeffs.get(&mask).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &BigInt)> + '_ {
        self.coeffs.iter().map(|(&m, c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> Mask {
        self.coeffs.keys().fold(0, |acc, m| acc | m)
    }

    /// Sum of squared coefficients.
    pub fn weight(&self) -> BigInt {
        self.coeffs.values().map(|c| c * c).sum()
    }

    pub fn evaluate_index(&self, point: Mask) -> BigInt {
        self.coeffs
            .iter()
            .map(|(&m, c)| if (m & point).count_ones() & 1 == 0 { c.clone() } else { -c })
            .sum()
    }

    pub fn sign_at(&self, point: Mask) -> i8 {
        if self.evaluate_index(point).is_negative() {
            -1
        } else {
            1
        }
    }

    /// Values on the sub-cube spanned by `vars`; entry `j` is the point whose
    /// variable `vars[i]` is `-1` exactly when bit `i` of `j` is set.
    pub fn values_on(&self, vars: &[usize]) -> Result<Vec<BigInt>> {
        let mut position = [usize::MAX; MAX_VARS];
        for (j, &v) in vars.iter().enumerate() {
            position[v] = j;
        }
        let mut data = vec![BigInt::zero(); 1usize << vars.len()];
        for (mut m, c) in self.terms() {
            let mut idx = 0usize;
            while m != 0 {
                let i = m.trailing_zeros() as usize;
                if position[i] == usize::MAX {
                    return Err(invalid(format!("monomial touches variable {} outside the sub-cube", i + 1)));
                }
                idx |= 1 << position[i];
                m &= m - 1;
            }
            data[idx] = c.clone();
        }
        walsh_hadamard_in_place(&mut data);
        Ok(data)
    }

    /// Values at all `2^n` points, indexed by cube point.
    pub fn values(&self, limit: usize) -> Result<Vec<BigInt>> {
        check_enumerable(self.n, limit)?;
        self.values_on(&(0..self.n).collect::<Vec<_>>())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(invalid("multiplying polynomials of different dimension"));
        }
        let mut coeffs: BTreeMap<Mask, BigInt> = BTreeMap::new();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                *coeffs.entry(a ^ b).or_default() += ca * cb;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Self { n: self.n, degree_bound: (self.degree_bound + other.degree_bound).min(self.n), coeffs })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(invalid("adding polynomials of different dimension"));
        }
        let mut coeffs = self.coeffs.clone();
        for (m, c) in other.terms() {
            *coeffs.entry(m).or_default() += c;
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(Self { n: self.n, degree_bound: self.degree_bound.max(other.degree_bound), coeffs })
    }

    /// Nearest `f64` coefficients; lossy once coefficients exceed 2^53.
    pub fn to_real(&self) -> MultilinearPolynomial {
        let terms = self.terms().map(|(m, c)| (m, c.to_f64().unwrap_or(f64::NAN)));
        MultilinearPolynomial::new(self.n, self.degree_bound, terms).expect("same shape as a valid polynomial")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("integer polynomial serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Exact `sum_S coeff(S)^2`.
pub fn weight_of(q: &IntegerPolynomial) -> BigInt {
    q.weight()
}

/// `prod_{(i, v) in rho} (1 + v x_i)`: `2^{|rho|}` on points consistent with `rho`, else 0.
pub fn indicator_poly(rho: &Restriction, n: usize) -> Result<IntegerPolynomial> {
    if let Some(&(v, _)) = rho.fixed().iter().find(|(v, _)| *v >= n) {
        return Err(invalid(format!("restricted variable {} beyond n = {n}", v + 1)));
    }
    let full = rho.mask();
    let negative = rho.negative_mask();
    let mut terms = Vec::with_capacity(1 << rho.len());
    // every submask of the fixed set, including the empty one
    let mut sub = full;
    loop {
        let c = if (sub & negative).count_ones() & 1 == 0 { 1 } else { -1 };
        terms.push((sub, BigInt::from(c)));
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & full;
    }
    IntegerPolynomial::new(n, rho.len().min(n), terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantChoice {
    Ceil,
    Floor,
    /// All coefficients doubled and the constant made odd.
    DoubledOdd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerizedConstant {
    pub choice: ConstantChoice,
    #[serde(with = "big_string")]
    pub constant: BigInt,
    /// The input with its constant set (and doubled, for the fallback).
    pub polynomial: IntegerPolynomial,
}

impl IntegerizedConstant {
    /// `polynomial / scale` is the integer part plus `constant / scale`.
    pub fn scale(&self) -> f64 {
        if self.choice == ConstantChoice::DoubledOdd {
            2.0
        } else {
            1.0
        }
    }
}

fn big_from_f64(x: f64) -> Result<BigInt> {
    if !x.is_finite() || x.abs() > 1e300 {
        return Err(Error::Resource(format!("value {x} is outside the representable range")));
    }
    BigInt::from_f64(x).ok_or_else(|| Error::Resource(format!("cannot represent {x} as an integer")))
}

/// Integer `m` such that `sign(alpha * (v(x) + m)) = sign(alpha * v(x) + c)` everywhere.
///
/// `v` carries the integer non-constant coefficients and must have no constant term.
pub fn integerize_constant(v: &IntegerPolynomial, c: f64, alpha: f64, limit: usize) -> Result<IntegerizedConstant> {
    integerize_with(v, c, alpha, limit, true)
}

fn integerize_with(
    v: &IntegerPolynomial,
    c: f64,
    alpha: f64,
    limit: usize,
    try_direct: bool,
) -> Result<IntegerizedConstant> {
    if !v.coeff(0).is_zero() {
        return Err(invalid("integer part must have no constant term"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("granularity alpha = {alpha} must be positive")));
    }
    let ratio = c / alpha;
    let vars = mask_to_vars(v.support());
    check_enumerable(vars.len(), limit)?;
    let values = v.values_on(&vars)?;
    // sign(alpha v + c) = +1 exactly when the integer v is at least ceil(-c / alpha)
    let threshold = big_from_f64((-ratio).ceil())?;
    let preserves = |factor: i64, m: &BigInt| {
        values.iter().all(|val| (val * factor + m >= BigInt::zero()) == (val >= &threshold))
    };
    let with_constant = |factor: i64, m: &BigInt| -> Result<IntegerPolynomial> {
        let terms = v.terms().map(|(mask, c)| (mask, c * factor)).chain([(0, m.clone())]);
        IntegerPolynomial::new(v.n(), v.degree_bound(), terms)
    };
    if try_direct {
        for (choice, m) in [(ConstantChoice::Ceil, ratio.ceil()), (ConstantChoice::Floor, ratio.floor())] {
            let m = big_from_f64(m)?;
            if preserves(1, &m) {
                let polynomial = with_constant(1, &m)?;
                return Ok(IntegerizedConstant { choice, constant: m, polynomial });
            }
        }
    }
    // 2 floor(c/alpha) + 1: the fractional part is nonnegative, so the odd
    // offset rounds up and every value 2v + m is odd, hence nonzero
    let m = big_from_f64(ratio.floor())? * 2 + BigInt::one();
    if !preserves(2, &m) {
        return Err(Error::Internal("odd-constant fallback changed a sign".into()));
    }
    let polynomial = with_constant(2, &m)?;
    Ok(IntegerizedConstant { choice: ConstantChoice::DoubledOdd, constant: m, polynomial })
}

/// Regularity parameter for an approximator of accuracy `eps`:
/// `min((theta eps / d)^{8d}, tau_ceiling)`.
pub fn approximator_tau(eps: f64, d: usize, constants: &TheoryConstants) -> f64 {
    let d = d.max(1) as f64;
    (8.0 * d * (constants.theta * eps / d).ln()).exp().min(constants.tau_ceiling)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularRounding {
    pub polynomial: IntegerPolynomial,
    pub epsilon: f64,
    pub tau: f64,
    pub alpha: f64,
    pub dominant_constant: bool,
    pub constant_choice: Option<ConstantChoice>,
    #[serde(with = "big_string")]
    pub weight: BigInt,
    pub ln_weight: f64,
    /// `ln(n^d (d/eps)^{w d})`.
    pub ln_weight_bound: f64,
    pub within_weight_bound: bool,
    /// Exact `dist(sign g, sign p)` over the support of `p`.
    pub distance: f64,
    pub points: u64,
    /// Disagreement points with `|e(x)| < tau` and `|p(x)| > tau`.
    pub decomposition_violations: u64,
}

/// Rounds a `tau`-regular, unit-variance `p` to integer weights at granularity
/// `alpha = tau / (K n ln(4/eps))^{d/2}`.
pub fn round_regular(p: &MultilinearPolynomial, eps: f64, constants: &TheoryConstants) -> Result<RegularRounding> {
    constants.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("epsilon = {eps} outside (0, 1)")));
    }
    if (p.variance() - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("variance {} is not 1", p.variance())));
    }
    let n = p.n();
    let d = p.degree().max(1);
    let df = d as f64;
    let tau = approximator_tau(eps, d, constants);
    if critical_index(p, tau)? != CriticalIndex::Finite(0) {
        return Err(invalid(format!("polynomial is not {tau}-regular")));
    }
    let ln_weight_bound = df * (n as f64).ln() + constants.weight_exponent * df * (df / eps).ln();
    let constant = p.constant_term();
    let dominant = constant.abs() > (constants.theta * (1.0 / eps).ln()).powf(df / 2.0);
    let alpha = tau / (constants.k_granularity * n as f64 * (4.0 / eps).ln()).powf(df / 2.0);
    let (polynomial, choice, scale) = if dominant {
        (IntegerPolynomial::constant(n, sign(constant) as i64)?, None, None)
    } else {
        let mut terms = Vec::with_capacity(p.num_terms());
        for (m, c) in p.terms().filter(|(m, _)| *m != 0) {
            terms.push((m, big_from_f64((c / alpha).round())?));
        }
        let v = IntegerPolynomial::new(n, p.degree_bound(), terms)?;
        let fixed = integerize_constant(&v, constant, alpha, constants.enumeration_limit)?;
        let scale = fixed.scale();
        (fixed.polynomial, Some(fixed.choice), Some(scale))
    };

    let vars = mask_to_vars(p.support() | polynomial.support());
    check_enumerable(vars.len(), constants.enumeration_limit)?;
    let p_values = fwht_synthesize(&p.compress(&vars)?, constants.enumeration_limit)?;
    let g_values = polynomial.values_on(&vars)?;
    let mut wrong = 0u64;
    let mut violations = 0u64;
    for (pv, gv) in p_values.values().iter().zip(&g_values) {
        let gs = if gv.is_negative() { -1 } else { 1 };
        if gs != sign(*pv) {
            wrong += 1;
            if let Some(s) = scale {
                let e = pv - alpha * gv.to_f64().unwrap_or(f64::INFINITY) / s;
                if e.abs() < tau && pv.abs() > tau {
                    violations += 1;
                }
            }
        }
    }
    let points = g_values.len() as u64;
    let weight = polynomial.weight();
    let ln_weight = ln_big(&weight);
    Ok(RegularRounding {
        polynomial,
        epsilon: eps,
        tau,
        alpha,
        dominant_constant: dominant,
        constant_choice: choice,
        within_weight_bound: ln_weight <= ln_weight_bound,
        weight,
        ln_weight,
        ln_weight_bound,
        distance: wrong as f64 / points as f64,
        points,
        decomposition_violations: violations,
    })
}

fn check_leaf_alignment(tree: &DecompositionTree, approximators: &[IntegerPolynomial]) -> Result<()> {
    let leaves = tree.leaves();
    if leaves.len() != approximators.len() {
        return Err(invalid(format!("{} approximators for {} leaves", approximators.len(), leaves.len())));
    }
    for (leaf, q) in leaves.iter().zip(approximators) {
        if q.n() != tree.input.n() {
            return Err(invalid("approximator dimension differs from the tree's"));
        }
        let clash = q.support() & leaf.path.mask();
        if clash != 0 {
            return Err(invalid(format!(
                "approximator uses variable {} fixed on its leaf path",
                clash.trailing_zeros() + 1
            )));
        }
    }
    Ok(())
}

/// `Q = sum_rho P_rho q_rho` over the leaves, in `tree.leaves()` order.
pub fn combine_tree(tree: &DecompositionTree, approximators: &[IntegerPolynomial]) -> Result<IntegerPolynomial> {
    check_leaf_alignment(tree, approximators)?;
    let n = tree.input.n();
    let mut coeffs: BTreeMap<Mask, BigInt> = BTreeMap::new();
    let mut degree_bound = 0;
    for (leaf, q) in tree.leaves().iter().zip(approximators) {
        let indicator = indicator_poly(&leaf.path, n)?;
        let product = indicator.multiply(q)?;
        degree_bound = degree_bound.max(leaf.depth() + q.degree_bound());
        for (m, c) in product.terms() {
            *coeffs.entry(m).or_default() += c;
        }
    }
    coeffs.retain(|_, c| !c.is_zero());
    Ok(IntegerPolynomial { n, degree_bound: degree_bound.min(n), coeffs })
}

/// `L * sum_rho 2^{|rho|} weight(q_rho)`, the Cauchy–Schwarz bound on `weight(Q)`.
pub fn cauchy_schwarz_weight_bound(tree: &DecompositionTree, approximators: &[IntegerPolynomial]) -> Result<BigInt> {
    check_leaf_alignment(tree, approximators)?;
    let leaves = tree.leaves();
    let sum: BigInt = leaves
        .iter()
        .zip(approximators)
        .map(|(leaf, q)| q.weight() << leaf.depth())
        .sum();
    Ok(sum * leaves.len())
}

/// Number of points where `Q(x) != 2^{|rho_x|} q_{rho_x}(x)`.
pub fn verify_combiner_identity(
    tree: &DecompositionTree,
    approximators: &[IntegerPolynomial],
    q: &IntegerPolynomial,
    limit: usize,
) -> Result<u64> {
    check_leaf_alignment(tree, approximators)?;
    let values = q.values(limit)?;
    let leaves = tree.leaves();
    let bad = values
        .par_iter()
        .enumerate()
        .filter(|(point, value)| {
            let point = *point as Mask;
            let idx = tree.leaf_index_for_point(point);
            let expected = approximators[idx].evaluate_index(point) << leaves[idx].depth();
            **value != expected
        })
        .count();
    Ok(bad as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// Measured distance at most epsilon.
    Certified,
    /// Bad mass within its allowance yet the distance exceeds epsilon.
    DistanceExceeded,
    /// Bad mass above tau; the achieved distance is reported as is.
    BadMassExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCertificate {
    pub target: MultilinearPolynomial,
    pub approximator: IntegerPolynomial,
    pub epsilon: f64,
    /// Accuracy requested from each regular leaf.
    pub leaf_epsilon: f64,
    pub tau: f64,
    pub beta: f64,
    pub distance: f64,
    pub distance_method: Method,
    #[serde(with = "big_string")]
    pub weight: BigInt,
    pub ln_weight: f64,
    /// `ln(2^{4 depth} n^d (d/eps)^{w d})`.
    pub ln_declared_weight_bound: f64,
    #[serde(with = "big_string")]
    pub cauchy_schwarz_bound: BigInt,
    pub degree: usize,
    pub input_degree: usize,
    pub tree_depth: usize,
    pub path_mass: PathMassReport,
    pub combiner_identity_violations: u64,
    /// Regular leaves whose rounding exceeded its own weight bound.
    pub leaves_over_weight_bound: usize,
    pub status: CertificateStatus,
    pub constants: TheoryConstants,
}

impl ApproximationCertificate {
    pub fn within_epsilon(&self) -> bool {
        self.distance <= self.epsilon
    }
}

/// Full pipeline: decompose, approximate every leaf, combine, and measure.
pub fn approximate(p: &MultilinearPolynomial, eps: f64, constants: &TheoryConstants) -> Result<ApproximationCertificate> {
    constants.validate()?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("epsilon = {eps} outside (0, 1)")));
    }
    if p.variance() <= 0.0 {
        return Err(Error::Degenerate("constant polynomial".into()));
    }
    let n = p.n();
    check_enumerable(n, constants.enumeration_limit)?;
    let d = p.degree().max(1);
    let leaf_eps = eps / 2.0;
    let tau = approximator_tau(leaf_eps, d, constants);
    // constant leaves may cost at most eps/2 each, even when tau is clamped above it
    let beta = tau.min(leaf_eps);
    let tree = build_tree_with_beta(p, tau, beta, constants)?;

    let roundings: Vec<Result<(IntegerPolynomial, bool)>> = tree
        .leaves()
        .par_iter()
        .map(|leaf| match leaf.class {
            LeafClass::Regular => {
                let r = round_regular(&leaf.polynomial.normalize_variance()?, leaf_eps, constants)?;
                Ok((r.polynomial, !r.within_weight_bound))
            }
            LeafClass::CloseToConstant { sign, .. } => Ok((IntegerPolynomial::constant(n, sign as i64)?, false)),
            LeafClass::Bad { .. } => Ok((IntegerPolynomial::constant(n, 1)?, false)),
        })
        .collect();
    let mut approximators = Vec::with_capacity(roundings.len());
    let mut leaves_over_weight_bound = 0;
    for r in roundings {
        let (q, over) = r?;
        leaves_over_weight_bound += usize::from(over);
        approximators.push(q);
    }

    let q = combine_tree(&tree, &approximators)?;
    let violations = verify_combiner_identity(&tree, &approximators, &q, constants.enumeration_limit)?;
    let q_values = q.values(constants.enumeration_limit)?;
    let p_values = fwht_synthesize(p, constants.enumeration_limit)?;
    let wrong = q_values
        .iter()
        .zip(p_values.values())
        .filter(|(qv, pv)| (if qv.is_negative() { -1 } else { 1 }) != sign(**pv))
        .count();
    let points = q_values.len() as u64;
    let distance = wrong as f64 / points as f64;

    let path_mass = tree.path_mass();
    let depth = tree.depth();
    let df = d as f64;
    let ln_declared_weight_bound = 4.0 * depth as f64 * std::f64::consts::LN_2
        + df * (n as f64).ln()
        + constants.weight_exponent * df * (df / eps).ln();
    let status = if path_mass.bad_mass > tau {
        CertificateStatus::BadMassExceeded
    } else if distance <= eps {
        CertificateStatus::Certified
    } else {
        CertificateStatus::DistanceExceeded
    };
    let weight = q.weight();
    Ok(ApproximationCertificate {
        target: p.clone(),
        degree: q.degree(),
        ln_weight: ln_big(&weight),
        weight,
        cauchy_schwarz_bound: cauchy_schwarz_weight_bound(&tree, &approximators)?,
        approximator: q,
        epsilon: eps,
        leaf_epsilon: leaf_eps,
        tau,
        beta,
        distance,
        distance_method: Method::Exact { points },
        ln_declared_weight_bound,
        input_degree: p.degree(),
        tree_depth: depth,
        path_mass,
        combiner_identity_violations: violations,
        leaves_over_weight_bound,
        status,
        constants: constants.clone(),
    })
}
