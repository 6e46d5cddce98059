//! Influences, the critical index, regularity predicates and head/tail splits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::poly::{Mask, MultilinearPolynomial};

/// Relative slack applied to the `<=` comparison in the critical-index test.
const CRITICAL_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceProfile {
    /// `influences[i] = Inf_i(p)` for 0-based variable `i`.
    pub influences: Vec<f64>,
    pub total: f64,
    pub variance: f64,
    /// Variables sorted by nonincreasing influence, ties by ascending index.
    pub order: Vec<usize>,
}

impl InfluenceProfile {
    /// Influences listed in sorted order.
    pub fn sorted_influences(&self) -> Vec<f64> {
        self.order.iter().map(|&i| self.influences[i]).collect()
    }

    pub fn max_influence(&self) -> f64 {
        self.order.first().map_or(0.0, |&i| self.influences[i])
    }
}

/// `Inf_i(p) = sum_{S ∋ i} p̂(S)^2` for every variable, plus total and variance.
pub fn influence_profile(p: &MultilinearPolynomial) -> InfluenceProfile {
    let n = p.n();
    let mut influences = vec![0.0; n];
    let mut variance = 0.0;
    for (mut m, c) in p.terms() {
        if m == 0 {
            continue;
        }
        let w = c * c;
        variance += w;
        while m != 0 {
            influences[m.trailing_zeros() as usize] += w;
            m &= m - 1;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| influences[b].total_cmp(&influences[a]).then(a.cmp(&b)));
    let total = influences.iter().sum();
    InfluenceProfile { influences, total, variance, order }
}

/// Result of the critical-index search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalIndex {
    Finite(usize),
    /// No prefix satisfies the defining inequality. Unreachable once an empty
    /// tail counts as satisfying it, kept so callers match on both cases.
    Infinite,
}

impl CriticalIndex {
    pub fn finite(self) -> Option<usize> {
        match self {
            CriticalIndex::Finite(k) => Some(k),
            CriticalIndex::Infinite => None,
        }
    }
}

fn require_variance(profile: &InfluenceProfile) -> Result<()> {
    if profile.variance <= 0.0 {
        return Err(Error::Degenerate("constant polynomial has no critical index".into()));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid(format!("tau = {tau} outside (0, 1)")));
    }
    Ok(())
}

/// Least `i` with `Inf_{(i+1)} <= tau * sum_{j >= i+1} Inf_{(j)}` in sorted order.
pub fn critical_index_of(profile: &InfluenceProfile, tau: f64) -> Result<CriticalIndex> {
    check_tau(tau)?;
    require_variance(profile)?;
    let sorted = profile.sorted_influences();
    let slack = CRITICAL_SLACK * profile.total;
    // suffix[i] = sum of sorted[i..]
    let mut suffix = vec![0.0; sorted.len() + 1];
    for i in (0..sorted.len()).rev() {
        suffix[i] = suffix[i + 1] + sorted[i];
    }
    for i in 0..=sorted.len() {
        let next = sorted.get(i).copied().unwrap_or(0.0);
        if next <= tau * suffix[i] + slack {
            return Ok(CriticalIndex::Finite(i));
        }
    }
    Ok(CriticalIndex::Infinite)
}

pub fn critical_index(p: &MultilinearPolynomial, tau: f64) -> Result<CriticalIndex> {
    critical_index_of(&influence_profile(p), tau)
}

/// Critical index zero.
pub fn is_tau_regular(p: &MultilinearPolynomial, tau: f64) -> Result<bool> {
    Ok(critical_index(p, tau)? == CriticalIndex::Finite(0))
}

/// `sqrt(sum_i Inf_i^2) <= eps * sum_i Inf_i`.
pub fn is_l2_regular(p: &MultilinearPolynomial, eps: f64) -> Result<bool> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let profile = influence_profile(p);
    if profile.total <= 0.0 {
        return Err(Error::Degenerate("total influence is zero".into()));
    }
    let l2 = profile.influences.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(l2 <= eps * profile.total * (1.0 + CRITICAL_SLACK))
}

/// Splits `p` into the part supported on the `k` most influential variables
/// and the remainder. Returns `(head, tail, head_vars)`.
pub fn head_tail_split(
    p: &MultilinearPolynomial,
    k: usize,
) -> Result<(MultilinearPolynomial, MultilinearPolynomial, Vec<usize>)> {
    if k > p.n() {
        return Err(invalid(format!("head size {k} exceeds n = {}", p.n())));
    }
    let profile = influence_profile(p);
    let head_vars: Vec<usize> = profile.order[..k].to_vec();
    let head_mask: Mask = head_vars.iter().fold(0, |acc, &v| acc | (1 << v));
    let (head, tail): (Vec<_>, Vec<_>) = p.terms().partition(|(m, _)| m & !head_mask == 0);
    Ok((
        MultilinearPolynomial::new(p.n(), p.degree_bound(), head)?,
        MultilinearPolynomial::new(p.n(), p.degree_bound(), tail)?,
        head_vars,
    ))
}

/// `sum_{i > j} Inf_{(i)}` over the sorted influence vector.
pub fn tail_influence_sum(p: &MultilinearPolynomial, j: usize) -> Result<f64> {
    if j > p.n() {
        return Err(invalid(format!("index {j} exceeds n = {}", p.n())));
    }
    Ok(influence_profile(p).sorted_influences()[j..].iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, d: usize, terms: &[(&[usize], f64)]) -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(n, d, terms).unwrap()
    }

    fn majority_linear(k: usize) -> MultilinearPolynomial {
        let terms: Vec<(Vec<usize>, f64)> = (0..k).map(|i| (vec![i], 1.0 / (k as f64).sqrt())).collect();
        let refs: Vec<(&[usize], f64)> = terms.iter().map(|(v, c)| (v.as_slice(), *c)).collect();
        poly(k, 1, &refs)
    }

    #[test]
    fn profile_examples() {
        let p = poly(4, 2, &[(&[0, 1], 1.0), (&[2], 1.0)]);
        let prof = influence_profile(&p);
        assert_eq!(prof.influences, vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(prof.total, 3.0);
        assert_eq!(prof.variance, 2.0);
        assert_eq!(prof.order, vec![0, 1, 2, 3]);

        let dict = poly(3, 1, &[(&[0], 1.0)]);
        let prof = influence_profile(&dict);
        assert_eq!(prof.influences, vec![1.0, 0.0, 0.0]);
        assert_eq!(prof.total, 1.0);

        let and2 = poly(2, 2, &[(&[], -0.5), (&[0], 0.5), (&[1], 0.5), (&[0, 1], 0.5)]);
        let prof = influence_profile(&and2);
        assert_eq!(prof.influences, vec![0.5, 0.5]);
        assert_eq!(prof.variance, 0.75);
    }

    #[test]
    fn order_breaks_ties_by_index_and_sorts_descending() {
        let p = poly(4, 1, &[(&[3], 2.0), (&[1], 1.0), (&[0], 1.0)]);
        assert_eq!(influence_profile(&p).order, vec![3, 0, 1, 2]);
    }

    #[test]
    fn critical_index_examples() {
        let dict = poly(1, 1, &[(&[0], 1.0)]);
        assert_eq!(critical_index(&dict, 0.1).unwrap(), CriticalIndex::Finite(1));
        let maj = majority_linear(3);
        assert_eq!(critical_index(&maj, 0.5).unwrap(), CriticalIndex::Finite(0));
        assert_eq!(critical_index(&maj, 0.1).unwrap(), CriticalIndex::Finite(3));
        let c = MultilinearPolynomial::constant(2, 1.0).unwrap();
        assert!(matches!(critical_index(&c, 0.1), Err(Error::Degenerate(_))));
        assert!(critical_index(&maj, 0.0).is_err());
        assert!(critical_index(&maj, 1.0).is_err());
    }

    #[test]
    fn regularity_examples() {
        let parity = poly(2, 2, &[(&[0, 1], 1.0)]);
        assert!(is_tau_regular(&parity, 0.5).unwrap());
        let dict = poly(2, 1, &[(&[0], 1.0)]);
        assert!(!is_tau_regular(&dict, 0.5).unwrap());
        let nine = majority_linear(9);
        assert!(is_tau_regular(&nine, 1.0 / 9.0).unwrap());
    }

    #[test]
    fn regular_implies_max_influence_bound() {
        let nine = majority_linear(9);
        let prof = influence_profile(&nine);
        let d = nine.degree() as f64;
        assert!(prof.max_influence() <= d * (1.0 / 9.0) * prof.variance + 1e-12);
    }

    #[test]
    fn l2_regularity_examples() {
        let nine = majority_linear(9);
        assert!(is_l2_regular(&nine, 1.0 / 3.0).unwrap());
        let dict = poly(2, 1, &[(&[0], 1.0)]);
        assert!(!is_l2_regular(&dict, 0.5).unwrap());
        let c = MultilinearPolynomial::constant(2, 1.0).unwrap();
        assert!(matches!(is_l2_regular(&c, 0.5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn l2_regular_implies_linf_regular_on_random_instances() {
        // l2-regular at eps means max_i Inf_i <= eps * total, i.e. the l_inf
        // inequality with the influence fraction; compare the two predicates.
        for seed in 0..40 {
            let p = MultilinearPolynomial::random_gaussian(8, 2, seed).unwrap();
            for eps in [0.2, 0.3, 0.5] {
                if is_l2_regular(&p, eps).unwrap() {
                    let prof = influence_profile(&p);
                    assert!(prof.max_influence() <= eps * prof.total * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn head_tail_examples() {
        let p = poly(3, 2, &[(&[0], 1.0), (&[1, 2], 1.0)]);
        let (h, t, vars) = head_tail_split(&p, 1).unwrap();
        assert_eq!(vars, vec![0]);
        assert_eq!(h.terms().collect::<Vec<_>>(), vec![(1, 1.0)]);
        assert_eq!(t.terms().collect::<Vec<_>>(), vec![(6, 1.0)]);

        let q = poly(3, 2, &[(&[], 0.5), (&[0], 1.0), (&[1, 2], 1.0)]);
        let (h, t, _) = head_tail_split(&q, 0).unwrap();
        assert_eq!(h.terms().collect::<Vec<_>>(), vec![(0, 0.5)]);
        assert_eq!(t.num_terms(), 2);
        let (h, t, _) = head_tail_split(&q, 3).unwrap();
        assert_eq!(h, q);
        assert!(t.is_zero());
        assert!(head_tail_split(&q, 4).is_err());
    }

    #[test]
    fn tail_sum_examples() {
        let maj = majority_linear(3);
        assert!((tail_influence_sum(&maj, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(tail_influence_sum(&maj, 3).unwrap(), 0.0);
        let total = influence_profile(&maj).total;
        assert_eq!(tail_influence_sum(&maj, 0).unwrap(), total);
    }
}
