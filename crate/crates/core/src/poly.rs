//! Multilinear polynomials over `{-1,1}^n`, truth tables, and restrictions.
//!
//! A polynomial is stored sparsely as a map from subset bitmask to its Fourier
//! coefficient: bit `i` of a mask is set when variable `i` (0-based) belongs to
//! the subset. Points of the cube are addressed by an index `b` whose bit `i`
//! is set exactly when `x_i = -1`, so the all-`+1` point is index 0 and
//! `chi_S(x_b) = (-1)^{popcount(S & b)}`.
//!
//! Variable indices are 0-based throughout the Rust API. The polynomial file
//! format and every human-facing report use 1-based indices.

use std::collections::BTreeMap;
use std::ops::{Add, Sub};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Subset of variables encoded as a bitmask.
pub type Mask = u32;

/// Hard ceiling on the number of variables a polynomial may have.
pub const MAX_VARS: usize = 30;

/// Default ceiling on `n` for operations that enumerate the whole cube.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 20;

/// Threshold convention used everywhere a sign is taken: `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// `(-1)^{popcount(mask & point)}` as a float.
#[inline]
pub fn character_at(mask: Mask, point: Mask) -> f64 {
    if (mask & point).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Iterates all `n`-bit masks of popcount exactly `k`, in increasing order.
pub fn masks_of_weight(n: usize, k: usize) -> impl Iterator<Item = Mask> {
    let limit: u64 = 1u64 << n;
    let mut next: Option<u64> = if k > n {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nx = (((r ^ cur) >> 2) / c) | r;
            (nx < limit).then_some(nx)
        };
        Some(cur as Mask)
    })
}

pub(crate) fn check_enumerable(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        return Err(Error::Resource(format!(
            "exhaustive enumeration over 2^{n} points exceeds the limit 2^{limit}"
        )));
    }
    Ok(())
}

/// In-place unnormalized Walsh–Hadamard butterfly: `out[S] = sum_b in[b] (-1)^{|S & b|}`.
pub(crate) fn walsh_hadamard_in_place<T>(data: &mut [T])
where
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T>,
{
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in data.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let sum = &*a + &*b;
                let dif = &*a - &*b;
                *a = sum;
                *b = dif;
            }
        }
        half <<= 1;
    }
}

/// Real multilinear polynomial `p(x) = sum_S p̂(S) chi_S(x)` in `n` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolynomialDoc", try_from = "PolynomialDoc")]
pub struct MultilinearPolynomial {
    n: usize,
    degree_bound: usize,
    coeffs: BTreeMap<Mask, f64>,
}

impl MultilinearPolynomial {
    /// Builds a polynomial from `(mask, coefficient)` pairs. Repeated masks are
    /// summed and exact zeros dropped.
    pub fn new(
        n: usize,
        degree_bound: usize,
        terms: impl IntoIterator<Item = (Mask, f64)>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(invalid(format!("variable count {n} outside [1, {MAX_VARS}]")));
        }
        let mut coeffs = BTreeMap::new();
        for (mask, c) in terms {
            if (mask as u64) >> n != 0 {
                return Err(invalid(format!("mask {mask:#b} touches variables beyond n = {n}")));
            }
            if mask.count_ones() as usize > degree_bound {
                return Err(invalid(format!(
                    "monomial of degree {} exceeds the degree bound {degree_bound}",
                    mask.count_ones()
                )));
            }
            if !c.is_finite() {
                return Err(invalid("non-finite coefficient"));
            }
            *coeffs.entry(mask).or_insert(0.0) += c;
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(Self { n, degree_bound: degree_bound.min(n), coeffs })
    }

    /// Builds a polynomial from 0-based variable lists.
    pub fn from_terms(n: usize, degree_bound: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        let mut masked = Vec::with_capacity(terms.len());
        for (vars, c) in terms {
            masked.push((vars_to_mask(n, vars)?, *c));
        }
        Self::new(n, degree_bound, masked)
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::new(n, 0, [])
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(n, 0, [(0, c)])
    }

    /// The character `chi_S` for the subset encoded by `mask`.
    pub fn character(n: usize, mask: Mask) -> Result<Self> {
        Self::new(n, mask.count_ones() as usize, [(mask, 1.0)])
    }

    /// Gaussian coefficients on every monomial of degree at most `d`,
    /// constant term included. Deterministic in `seed`.
    pub fn random_gaussian(n: usize, d: usize, seed: u64) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(invalid(format!("variable count {n} outside [1, {MAX_VARS}]")));
        }
        let d = d.min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms = Vec::new();
        for k in 0..=d {
            for mask in masks_of_weight(n, k) {
                let c: f64 = StandardNormal.sample(&mut rng);
                terms.push((mask, c));
            }
        }
        Self::new(n, d, terms)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Largest `|S|` carrying a nonzero coefficient (0 for constants).
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn coeff(&self, mask: Mask) -> f64 {
        self.coeffs.get(&mask).copied().unwrap_or(0.0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coeff(0)
    }

    /// Nonzero coefficients in increasing mask order.
    pub fn terms(&self) -> impl Iterator<Item = (Mask, f64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Union of the supports of all monomials.
    pub fn support(&self) -> Mask {
        self.coeffs.keys().fold(0, |acc, m| acc | m)
    }

    /// `Var[p] = sum_{S != {}} p̂(S)^2`.
    pub fn variance(&self) -> f64 {
        self.terms().filter(|(m, _)| *m != 0).map(|(_, c)| c * c).sum()
    }

    /// Same coefficients with a larger declared degree bound.
    pub fn with_degree_bound(mut self, degree_bound: usize) -> Result<Self> {
        if degree_bound < self.degree() {
            return Err(invalid("degree bound below the actual degree"));
        }
        self.degree_bound = degree_bound.min(self.n);
        Ok(self)
    }

    /// Value at a `±1` point given coordinate-wise.
    pub fn evaluate(&self, x: &[i8]) -> Result<f64> {
        if x.len() != self.n {
            return Err(invalid(format!(
                "point has {} coordinates, polynomial has {} variables",
                x.len(),
                self.n
            )));
        }
        let mut index: Mask = 0;
        for (i, &v) in x.iter().enumerate() {
            match v {
                1 => {}
                -1 => index |= 1 << i,
                _ => return Err(invalid(format!("coordinate {v} is not ±1"))),
            }
        }
        Ok(self.evaluate_index(index))
    }

    /// Value at the cube point with index `point` (bit set ⇔ coordinate `-1`).
    pub fn evaluate_index(&self, point: Mask) -> f64 {
        self.terms().map(|(m, c)| c * character_at(m, point)).sum()
    }

    /// Value at an arbitrary real point (used for Gaussian inputs).
    pub fn evaluate_real(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(invalid("dimension mismatch"));
        }
        Ok(self
            .terms()
            .map(|(mut m, c)| {
                let mut prod = c;
                while m != 0 {
                    let i = m.trailing_zeros() as usize;
                    prod *= x[i];
                    m &= m - 1;
                }
                prod
            })
            .sum())
    }

    /// Substitutes the fixed values of `rho`:
    /// `p̂_rho(S) = sum_{T ⊆ fixed} p̂(S ∪ T) rho_T`. Dimension and degree bound
    /// are retained; fixed variables simply stop appearing.
    pub fn restrict(&self, rho: &Restriction) -> Result<Self> {
        if let Some(&(v, _)) = rho.fixed.iter().find(|(v, _)| *v >= self.n) {
            return Err(invalid(format!("restricted variable {} beyond n = {}", v + 1, self.n)));
        }
        let fixed = rho.mask();
        let negative = rho.negative_mask();
        let mut coeffs: BTreeMap<Mask, f64> = BTreeMap::new();
        for (m, c) in self.terms() {
            let t = m & fixed;
            let s = m & !fixed;
            let signed = if (t & negative).count_ones() & 1 == 0 { c } else { -c };
            *coeffs.entry(s).or_insert(0.0) += signed;
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(Self { n: self.n, degree_bound: self.degree_bound, coeffs })
    }

    /// Multilinear product using `chi_S chi_T = chi_{S Δ T}`.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(invalid("multiplying polynomials of different dimension"));
        }
        let mut coeffs: BTreeMap<Mask, f64> = BTreeMap::new();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                *coeffs.entry(a ^ b).or_insert(0.0) += ca * cb;
            }
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(Self {
            n: self.n,
            degree_bound: (self.degree_bound + other.degree_bound).min(self.n),
            coeffs,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.values_mut().for_each(|c| *c *= factor);
        coeffs.retain(|_, c| *c != 0.0);
        Self { n: self.n, degree_bound: self.degree_bound, coeffs }
    }

    pub fn negate(&self) -> Self {
        self.scale(-1.0)
    }

    /// `(sqrt(sum p̂(S)^2), (E[p^4])^{1/4})`; the `l4` part enumerates the cube.
    pub fn norms(&self, limit: usize) -> Result<(f64, f64)> {
        let l2 = self.terms().map(|(_, c)| c * c).sum::<f64>().sqrt();
        let table = fwht_synthesize(self, limit)?;
        let fourth = table.values.iter().map(|v| v * v * v * v).sum::<f64>() / table.len() as f64;
        Ok((l2, fourth.sqrt().sqrt()))
    }

    /// `p / sqrt(Var[p])`.
    pub fn normalize_variance(&self) -> Result<Self> {
        let var = self.variance();
        if var <= 0.0 {
            return Err(Error::Degenerate("constant polynomial has zero variance".into()));
        }
        Ok(self.scale(1.0 / var.sqrt()))
    }

    /// Head/tail view: the polynomial on `vars.len()` variables obtained by
    /// renaming `vars[j]` to `j`. Fails if a monomial touches other variables.
    pub fn compress(&self, vars: &[usize]) -> Result<Self> {
        let mut position = [usize::MAX; MAX_VARS];
        for (j, &v) in vars.iter().enumerate() {
            if v >= self.n {
                return Err(invalid("compress: variable out of range"));
            }
            position[v] = j;
        }
        let m = vars.len();
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (mut mask, c) in self.terms() {
            let mut out: Mask = 0;
            while mask != 0 {
                let i = mask.trailing_zeros() as usize;
                let j = position[i];
                if j == usize::MAX {
                    return Err(invalid(format!("monomial touches variable {} outside the kept set", i + 1)));
                }
                out |= 1 << j;
                mask &= mask - 1;
            }
            terms.push((out, c));
        }
        if m == 0 {
            // zero free variables: keep a one-variable shell around the constant
            return Self::new(1, 0, terms);
        }
        Self::new(m, self.degree_bound.min(m), terms)
    }

    /// Values at every point of the cube.
    pub fn truth_table(&self, limit: usize) -> Result<TruthTable> {
        fwht_synthesize(self, limit)
    }

    /// Serializes to the polynomial document format.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Coefficient-wise `sum_k s_k p_k`; exact zeros are pruned.
pub fn linear_combine(terms: &[(f64, &MultilinearPolynomial)]) -> Result<MultilinearPolynomial> {
    let (_, first) = terms.first().ok_or_else(|| invalid("linear combination of no polynomials"))?;
    let n = first.n;
    let mut degree_bound = 0;
    let mut coeffs: BTreeMap<Mask, f64> = BTreeMap::new();
    for (s, p) in terms {
        if p.n != n {
            return Err(invalid("linear combination of polynomials of different dimension"));
        }
        degree_bound = degree_bound.max(p.degree_bound);
        for (m, c) in p.terms() {
            *coeffs.entry(m).or_insert(0.0) += s * c;
        }
    }
    coeffs.retain(|_, c| *c != 0.0);
    Ok(MultilinearPolynomial { n, degree_bound, coeffs })
}

pub(crate) fn vars_to_mask(n: usize, vars: &[usize]) -> Result<Mask> {
    let mut mask: Mask = 0;
    for &v in vars {
        if v >= n {
            return Err(invalid(format!("variable {} beyond n = {n}", v + 1)));
        }
        if mask & (1 << v) != 0 {
            return Err(invalid(format!("variable {} repeated in a monomial", v + 1)));
        }
        mask |= 1 << v;
    }
    Ok(mask)
}

pub(crate) fn mask_to_vars(mask: Mask) -> Vec<usize> {
    (0..MAX_VARS).filter(|i| mask & (1 << i) != 0).collect()
}

/// On-disk form: 1-based sorted variable lists paired with coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolynomialDoc {
    pub n: usize,
    pub degree: usize,
    pub terms: Vec<(Vec<usize>, f64)>,
}

impl From<MultilinearPolynomial> for PolynomialDoc {
    fn from(p: MultilinearPolynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| (mask_to_vars(m).into_iter().map(|v| v + 1).collect(), c))
            .collect();
        PolynomialDoc { n: p.n, degree: p.degree_bound, terms }
    }
}

impl TryFrom<PolynomialDoc> for MultilinearPolynomial {
    type Error = Error;

    fn try_from(doc: PolynomialDoc) -> Result<Self> {
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (vars, c) in doc.terms {
            let mut zero_based = Vec::with_capacity(vars.len());
            for v in vars {
                if v == 0 {
                    return Err(Error::Parse("variable indices are 1-based".into()));
                }
                zero_based.push(v - 1);
            }
            terms.push((vars_to_mask(doc.n, &zero_based)?, c));
        }
        MultilinearPolynomial::new(doc.n, doc.degree, terms)
    }
}

/// Function values on the whole cube, indexed as described in the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthTable {
    n: usize,
    values: Vec<f64>,
}

impl TruthTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(invalid(format!("variable count {n} outside [1, {MAX_VARS}]")));
        }
        if values.len() != 1usize << n {
            return Err(invalid(format!("truth table of length {} for n = {n}", values.len())));
        }
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(Mask) -> f64) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(invalid(format!("variable count {n} outside [1, {MAX_VARS}]")));
        }
        Self::new(n, (0..1u32 << n).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// True when every entry is exactly `±1`.
    pub fn is_boolean(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0 || v == -1.0)
    }

    /// Pointwise `sign` under the `sign(0) = +1` convention.
    pub fn signs(&self) -> Vec<i8> {
        self.values.iter().map(|&v| sign(v)).collect()
    }
}

/// Fourier expansion of a truth table: `p̂(S) = 2^{-n} sum_x t(x) chi_S(x)`.
///
/// Coefficients whose magnitude is below `1e-13 · max|t|` are treated as
/// transform round-off and dropped, so the degree bound reflects the true degree.
pub fn fwht_analyze(table: &TruthTable) -> MultilinearPolynomial {
    let mut data = table.values.clone();
    walsh_hadamard_in_place(&mut data);
    let scale = 1.0 / data.len() as f64;
    let cutoff = 1e-13 * table.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut coeffs = BTreeMap::new();
    let mut degree = 0;
    for (mask, v) in data.into_iter().enumerate() {
        let c = v * scale;
        if c != 0.0 && c.abs() > cutoff {
            degree = degree.max((mask as Mask).count_ones() as usize);
            coeffs.insert(mask as Mask, c);
        }
    }
    MultilinearPolynomial { n: table.n, degree_bound: degree, coeffs }
}

/// Evaluates `p` on all `2^n` points via the inverse transform.
pub fn fwht_synthesize(p: &MultilinearPolynomial, limit: usize) -> Result<TruthTable> {
    check_enumerable(p.n, limit)?;
    let mut data = vec![0.0; 1usize << p.n];
    for (m, c) in p.terms() {
        data[m as usize] = c;
    }
    walsh_hadamard_in_place(&mut data);
    Ok(TruthTable { n: p.n, values: data })
}

/// Partial assignment of distinct variables to `±1`, in the order they were fixed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Restriction {
    fixed: Vec<(usize, i8)>,
}

impl Restriction {
    pub fn new(fixed: Vec<(usize, i8)>) -> Result<Self> {
        let mut seen: u64 = 0;
        for &(v, val) in &fixed {
            if v >= MAX_VARS {
                return Err(invalid(format!("variable {} beyond the supported range", v + 1)));
            }
            if val != 1 && val != -1 {
                return Err(invalid(format!("restriction value {val} is not ±1")));
            }
            if seen & (1 << v) != 0 {
                return Err(invalid(format!("variable {} fixed twice", v + 1)));
            }
            seen |= 1 << v;
        }
        Ok(Self { fixed })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Assigns `vars[j] := values bit j` (bit set means `-1`).
    pub fn from_assignment(vars: &[usize], bits: Mask) -> Result<Self> {
        Self::new(
            vars.iter()
                .enumerate()
                .map(|(j, &v)| (v, if bits & (1 << j) != 0 { -1 } else { 1 }))
                .collect(),
        )
    }

    /// A copy with one more variable fixed.
    pub fn extended(&self, var: usize, value: i8) -> Result<Self> {
        let mut fixed = self.fixed.clone();
        fixed.push((var, value));
        Self::new(fixed)
    }

    pub fn fixed(&self) -> &[(usize, i8)] {
        &self.fixed
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    /// Mask of all fixed variables.
    pub fn mask(&self) -> Mask {
        self.fixed.iter().fold(0, |acc, (v, _)| acc | (1 << v))
    }

    /// Mask of variables fixed to `-1`.
    pub fn negative_mask(&self) -> Mask {
        self.fixed
            .iter()
            .filter(|(_, val)| *val == -1)
            .fold(0, |acc, (v, _)| acc | (1 << v))
    }

    /// Whether the cube point `point` is consistent with this restriction.
    pub fn admits(&self, point: Mask) -> bool {
        (point & self.mask()) == self.negative_mask()
    }
}

impl Serialize for Restriction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let one_based: Vec<(usize, i8)> = self.fixed.iter().map(|&(v, x)| (v + 1, x)).collect();
        one_based.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Restriction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<(usize, i8)> = Vec::deserialize(d)?;
        let mut fixed = Vec::with_capacity(raw.len());
        for (v, x) in raw {
            if v == 0 {
                return Err(serde::de::Error::custom("variable indices are 1-based"));
            }
            fixed.push((v - 1, x));
        }
        Restriction::new(fixed).map_err(serde::de::Error::custom)
    }
}
