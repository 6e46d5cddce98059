//! Exact and sampled verifiers for the moment, tail, anti-concentration and
//! invariance bounds, and the pairwise-distance ensemble experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::TheoryConstants;
use crate::error::{invalid, Error, Result};
use crate::influence::{critical_index, critical_index_of, influence_profile, CriticalIndex};
use crate::measure::{stream_seed, Method};
use crate::poly::{
    check_enumerable, fwht_analyze, fwht_synthesize, masks_of_weight, sign, Mask, MultilinearPolynomial, Restriction,
    TruthTable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Informational,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub parameters: Value,
    pub measured: f64,
    pub bound: f64,
    pub status: CheckStatus,
    pub method: Method,
    /// Half-width of the sampling band; present only for Monte Carlo reports.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sampling_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckReport {
    fn exact(check: &str, parameters: Value, measured: f64, bound: f64, status: CheckStatus, points: u64) -> Self {
        Self {
            check: check.into(),
            parameters,
            measured,
            bound,
            status,
            method: Method::Exact { points },
            sampling_error: None,
            note: None,
        }
    }

    /// True unless this is a hard check that failed.
    pub fn ok(&self) -> bool {
        self.status != CheckStatus::Fail
    }
}

fn pass_if(ok: bool) -> CheckStatus {
    if ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    }
}

/// `Pr_x[sign f(x) != sign g(x)]`; exact up to the enumeration limit.
pub fn dist(f: &MultilinearPolynomial, g: &MultilinearPolynomial, constants: &TheoryConstants) -> Result<(f64, Method)> {
    if f.n() != g.n() {
        return Err(invalid(format!("dimension mismatch: {} vs {}", f.n(), g.n())));
    }
    let n = f.n();
    if n <= constants.enumeration_limit {
        let a = fwht_synthesize(f, constants.enumeration_limit)?;
        let b = fwht_synthesize(g, constants.enumeration_limit)?;
        let wrong = a.values().iter().zip(b.values()).filter(|(x, y)| sign(**x) != sign(**y)).count();
        return Ok((wrong as f64 / a.len() as f64, Method::Exact { points: a.len() as u64 }));
    }
    let seed = stream_seed(constants.mc_seed, "dist", 0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = constants.mc_samples as u64;
    let mut wrong = 0u64;
    for _ in 0..samples {
        let point: Mask = rng.random::<u32>() & ((1u64 << n) - 1) as Mask;
        if sign(f.evaluate_index(point)) != sign(g.evaluate_index(point)) {
            wrong += 1;
        }
    }
    Ok((wrong as f64 / samples as f64, Method::MonteCarlo { samples, seed }))
}

/// `||p||_4 <= 3^{d/2} ||p||_2`, exact.
pub fn hypercontractivity_check(p: &MultilinearPolynomial, constants: &TheoryConstants) -> Result<CheckReport> {
    let (l2, l4) = p.norms(constants.enumeration_limit)?;
    let d = p.degree();
    let bound = 3f64.powf(d as f64 / 2.0) * l2;
    Ok(CheckReport::exact(
        "hypercontractivity",
        json!({ "n": p.n(), "degree": d, "q": 4, "l2": l2 }),
        l4,
        bound,
        pass_if(l4 <= bound + 1e-9),
        1u64 << p.n(),
    ))
}

fn tail_probability(values: &[f64], threshold: f64) -> f64 {
    values.iter().filter(|v| v.abs() >= threshold).count() as f64 / values.len() as f64
}

/// Exact `Pr[|p| >= t ||p||_2]` against `exp(-b t^{2/d})` (informational).
pub fn concentration_tail(p: &MultilinearPolynomial, t: f64, constants: &TheoryConstants) -> Result<CheckReport> {
    let d = p.degree().max(1) as f64;
    if !(t > d.exp()) {
        return Err(invalid(format!("t = {t} must exceed e^d = {}", d.exp())));
    }
    let table = fwht_synthesize(p, constants.enumeration_limit)?;
    let l2 = p.terms().map(|(_, c)| c * c).sum::<f64>().sqrt();
    let measured = tail_probability(table.values(), t * l2);
    let bound = (-constants.concentration_const * t.powf(2.0 / d)).exp();
    let mut r = CheckReport::exact(
        "concentration",
        json!({ "n": p.n(), "degree": p.degree(), "t": t, "b": constants.concentration_const }),
        measured,
        bound,
        CheckStatus::Informational,
        table.len() as u64,
    );
    r.note = Some(format!("measured {} the configured bound", if measured <= bound { "within" } else { "above" }));
    Ok(r)
}

/// Asserts the exact tail is nonincreasing along `grid` (sorted ascending).
pub fn concentration_grid(p: &MultilinearPolynomial, grid: &[f64], constants: &TheoryConstants) -> Result<CheckReport> {
    let d = p.degree().max(1) as f64;
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid must be nonempty and strictly increasing"));
    }
    if grid[0] <= d.exp() {
        return Err(invalid(format!("grid must lie above e^d = {}", d.exp())));
    }
    let table = fwht_synthesize(p, constants.enumeration_limit)?;
    let l2 = p.terms().map(|(_, c)| c * c).sum::<f64>().sqrt();
    let tails: Vec<f64> = grid.iter().map(|t| tail_probability(table.values(), t * l2)).collect();
    let worst_increase = tails.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(CheckReport::exact(
        "concentration_monotone",
        json!({ "n": p.n(), "degree": p.degree(), "grid": grid, "tails": tails }),
        worst_increase,
        0.0,
        pass_if(worst_increase <= 0.0),
        table.len() as u64,
    ))
}

fn escape_probability(values: &[f64], l2: f64, c0: f64, d: i32) -> f64 {
    let threshold = c0.powi(-d) * l2;
    values.iter().filter(|&&v| v > threshold).count() as f64 / values.len() as f64
}

/// Smallest `c0 > 1` (to 1e-6) with `Pr[p > c0^{-d} ||p||_2] > c0^{-d}`; `None`
/// if even `c0 = 1e6` fails.
pub fn minimal_passing_c0(p: &MultilinearPolynomial, constants: &TheoryConstants) -> Result<Option<f64>> {
    let table = fwht_synthesize(p, constants.enumeration_limit)?;
    let l2 = p.terms().map(|(_, c)| c * c).sum::<f64>().sqrt();
    let d = p.degree().max(1) as i32;
    let passes = |c0: f64| escape_probability(table.values(), l2, c0, d) > c0.powi(-d);
    let mut hi = 1e6;
    if !passes(hi) {
        return Ok(None);
    }
    let mut lo = 1.0;
    if passes(1.0 + 1e-12) {
        return Ok(Some(1.0));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// `Pr[p > c0^{-d} ||p||_2] > c0^{-d}` for zero-mean `p`, exact.
pub fn anticoncentration_check(p: &MultilinearPolynomial, constants: &TheoryConstants) -> Result<CheckReport> {
    if p.constant_term().abs() > 1e-9 {
        return Err(invalid(format!("mean {} is not zero", p.constant_term())));
    }
    if p.variance() <= 0.0 {
        return Err(Error::Degenerate("zero polynomial".into()));
    }
    let table = fwht_synthesize(p, constants.enumeration_limit)?;
    let l2 = p.variance().sqrt();
    let d = p.degree().max(1) as i32;
    let measured = escape_probability(table.values(), l2, constants.c0, d);
    let bound = constants.c0.powi(-d);
    let ok = measured > bound;
    let mut params = json!({ "n": p.n(), "degree": d, "c0": constants.c0 });
    if !ok {
        params["minimal_passing_c0"] = json!(minimal_passing_c0(p, constants)?);
    }
    Ok(CheckReport::exact("anticoncentration", params, measured, bound, pass_if(ok), table.len() as u64))
}

/// Exact `Pr[|p| <= tau]` for a unit-variance `p` against
/// `const * d * tau^{1/(8d)}` (informational). When `p` is not `tau`-regular the
/// measurement is still reported but the bound is marked not applicable.
pub fn regular_anticoncentration(
    p: &MultilinearPolynomial,
    tau: f64,
    constants: &TheoryConstants,
) -> Result<CheckReport> {
    if (p.variance() - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("variance {} is not 1", p.variance())));
    }
    let ci = critical_index(p, tau)?;
    let regular = ci == CriticalIndex::Finite(0);
    let table = fwht_synthesize(p, constants.enumeration_limit)?;
    let d = p.degree().max(1) as f64;
    let measured = table.values().iter().filter(|v| v.abs() <= tau).count() as f64 / table.len() as f64;
    let bound = constants.anticoncentration_const * d * tau.powf(1.0 / (8.0 * d));
    let status = if regular { CheckStatus::Informational } else { CheckStatus::NotApplicable };
    let mut r = CheckReport::exact(
        "regular_anticoncentration",
        json!({ "n": p.n(), "degree": p.degree(), "tau": tau, "constant": constants.anticoncentration_const,
                "regular": regular, "critical_index": ci.finite(), "within_bound": measured <= bound }),
        measured,
        bound,
        status,
        table.len() as u64,
    );
    if !regular {
        r.note = Some(format!("not {tau}-regular; bound does not apply"));
    }
    Ok(r)
}

/// `sup_t |F_a(t) - F_b(t)|` for the empirical CDFs of two samples.
pub fn sup_cdf_gap(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut gap: f64 = 0.0;
    // both CDFs are right-continuous steps; compare after each distinct jump
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        gap = gap.max((i as f64 / na - j as f64 / nb).abs());
    }
    gap
}

/// Half-width `sqrt(ln(2/delta) / (2N))` of the DKW band at `delta = 0.05`.
pub fn dkw_band(samples: usize) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * samples as f64)).sqrt()
}

fn gaussian_values(p: &MultilinearPolynomial, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; p.n()];
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        for xi in x.iter_mut() {
            *xi = rng.sample(StandardNormal);
        }
        out.push(p.evaluate_real(&x)?);
    }
    Ok(out)
}

/// Exact Boolean CDF of a unit-variance `p` against a sampled Gaussian CDF.
pub fn gaussian_invariance_gap(
    p: &MultilinearPolynomial,
    samples: usize,
    seed: u64,
    constants: &TheoryConstants,
) -> Result<CheckReport> {
    if (p.variance() - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("variance {} is not 1", p.variance())));
    }
    if samples == 0 {
        return Err(invalid("need at least one Gaussian sample"));
    }
    let table = fwht_synthesize(p, constants.enumeration_limit)?;
    let gauss = gaussian_values(p, samples, seed)?;
    let gap = sup_cdf_gap(table.values(), &gauss);
    let d = p.degree().max(1) as f64;
    let tau = influence_profile(p).max_influence();
    let bound = constants.invariance_const * d * tau.powf(1.0 / (8.0 * d));
    Ok(CheckReport {
        check: "gaussian_invariance".into(),
        parameters: json!({ "n": p.n(), "degree": p.degree(), "max_influence": tau,
                            "constant": constants.invariance_const, "boolean_points": table.len() }),
        measured: gap,
        bound,
        status: CheckStatus::Informational,
        method: Method::MonteCarlo { samples: samples as u64, seed },
        sampling_error: Some(dkw_band(samples)),
        note: None,
    })
}

/// `sum_S f^(S)^2 = 1` for a `±1`-valued table; not applicable otherwise.
pub fn parseval_check(table: &TruthTable) -> CheckReport {
    let points = table.len() as u64;
    if !table.is_boolean() {
        let mut r = CheckReport::exact("parseval", json!({ "n": table.n() }), 0.0, 1.0, CheckStatus::NotApplicable, points);
        r.note = Some("table is not ±1-valued".into());
        return r;
    }
    let mass: f64 = fwht_analyze(table).terms().map(|(_, c)| c * c).sum();
    CheckReport::exact("parseval", json!({ "n": table.n() }), mass, 1.0, pass_if((mass - 1.0).abs() <= 1e-9), points)
}

/// Averaging `Inf_l(p_rho)` over all `2^k` restrictions of the `k` most
/// influential variables recovers `Inf_l(p)` for every unfixed `l`.
pub fn restriction_average_check(p: &MultilinearPolynomial, k: usize) -> Result<CheckReport> {
    if k > 20 || k > p.n() {
        return Err(invalid(format!("head size {k} outside [0, min(n, 20)]")));
    }
    let profile = influence_profile(p);
    let head = &profile.order[..k];
    let mut sums = vec![0.0; p.n()];
    for bits in 0..(1 as Mask) << k {
        let restricted = p.restrict(&Restriction::from_assignment(head, bits)?)?;
        for (l, v) in influence_profile(&restricted).influences.into_iter().enumerate() {
            sums[l] += v;
        }
    }
    let count = (1u64 << k) as f64;
    let deviation = (0..p.n())
        .filter(|l| !head.contains(l))
        .map(|l| (sums[l] / count - profile.influences[l]).abs())
        .fold(0.0, f64::max);
    Ok(CheckReport::exact(
        "restriction_average",
        json!({ "n": p.n(), "degree": p.degree(), "k": k }),
        deviation,
        1e-9,
        pass_if(deviation <= 1e-9),
        1u64 << k,
    ))
}

/// `sum_{i > j} Inf_(i) <= (1 - tau)^j Inf(p)` for every `j` up to the
/// `tau`-critical index. Reports the largest excess over the bound.
pub fn influence_decay_check(p: &MultilinearPolynomial, tau: f64) -> Result<CheckReport> {
    let profile = influence_profile(p);
    let ell = critical_index_of(&profile, tau)?.finite().unwrap_or(p.n()).min(p.n());
    let sorted = profile.sorted_influences();
    let mut excess = f64::NEG_INFINITY;
    for j in 0..=ell {
        let tail: f64 = sorted[j..].iter().sum();
        excess = excess.max(tail - (1.0 - tau).powi(j as i32) * profile.total);
    }
    Ok(CheckReport::exact(
        "influence_decay",
        json!({ "n": p.n(), "degree": p.degree(), "tau": tau, "critical_index": ell }),
        excess,
        1e-9,
        pass_if(excess <= 1e-9),
        0,
    ))
}

/// Random polynomial with independent uniform `±1` coefficients on every
/// degree-exactly-`d` monomial.
pub fn sample_from_d(n: usize, d: usize, seed: u64) -> Result<MultilinearPolynomial> {
    if d == 0 || d > n {
        return Err(invalid(format!("degree {d} outside [1, {n}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(Mask, f64)> = masks_of_weight(n, d)
        .map(|m| (m, if rng.random::<bool>() { 1.0 } else { -1.0 }))
        .collect();
    MultilinearPolynomial::new(n, d, terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStatistics {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    /// `c^(∅) = sum_S a^(S) b^(S)`.
    pub bias: f64,
    /// `Var[c]` for `c = a b`.
    pub variance: f64,
    pub small_bias: bool,
    pub large_variance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub member_seeds: Vec<u64>,
    pub distances: Vec<Vec<f64>>,
    pub min_off_diagonal: Option<f64>,
    /// `C^{-d}` from the theory constants.
    pub distance_bound: f64,
    pub pairs: Vec<PairStatistics>,
    pub bias_threshold: f64,
    pub variance_threshold: f64,
    pub small_bias_fraction: f64,
    pub large_variance_fraction: f64,
    /// Set when `n` is odd and `floor(n/2)` stands in for `n/2`.
    pub odd_n: bool,
    /// Largest disagreement between the coefficient-side statistics and the
    /// same quantities from the pointwise product of the two value tables.
    pub max_consistency_error: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn negative_bits(values: &[f64]) -> Vec<u64> {
    let mut bits = vec![0u64; values.len().div_ceil(64)];
    for (i, &v) in values.iter().enumerate() {
        if sign(v) < 0 {
            bits[i / 64] |= 1 << (i % 64);
        }
    }
    bits
}

/// Samples `m` members, then computes all pairwise sign distances and product
/// statistics exactly.
pub fn ensemble_experiment(
    m: usize,
    n: usize,
    d: usize,
    seed: u64,
    constants: &TheoryConstants,
) -> Result<EnsembleResult> {
    constants.validate()?;
    check_enumerable(n, constants.enumeration_limit)?;
    let pair_count = m.saturating_mul(m.saturating_sub(1)) / 2;
    let work = (pair_count as u128) << n;
    if work > 1u128 << 36 {
        return Err(Error::Resource(format!("{pair_count} pairs over 2^{n} points exceed the work budget")));
    }
    let member_seeds: Vec<u64> = (0..m as u64).map(|i| stream_seed(seed, "member", i)).collect();
    let members: Vec<MultilinearPolynomial> =
        member_seeds.iter().map(|&s| sample_from_d(n, d, s)).collect::<Result<_>>()?;
    let tables: Vec<Vec<f64>> = members
        .iter()
        .map(|p| fwht_synthesize(p, constants.enumeration_limit).map(|t| t.into_values()))
        .collect::<Result<_>>()?;
    let signs: Vec<Vec<u64>> = tables.iter().map(|t| negative_bits(t)).collect();

    let half = n / 2;
    let bias_threshold = 0.25 * constants.c.powi(-(d as i32)) * binomial(half, d);
    let variance_threshold = binomial(half, d).powi(2) / 12.0;
    let points = (1u64 << n) as f64;

    let index_pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
    let results: Vec<Result<(PairStatistics, f64)>> = index_pairs
        .par_iter()
        .map(|&(i, j)| {
            let disagree: u32 = signs[i].iter().zip(&signs[j]).map(|(a, b)| (a ^ b).count_ones()).sum();
            let distance = disagree as f64 / points;
            let (a, b) = (&members[i], &members[j]);
            let bias: f64 = a.terms().map(|(s, c)| c * b.coeff(s)).sum();
            let c = a.multiply(b)?;
            let variance = influence_profile(&c).variance;
            // pointwise oracle: mean and variance of the product of value tables
            let (mut mean, mut second) = (0.0, 0.0);
            for (x, y) in tables[i].iter().zip(&tables[j]) {
                let v = x * y;
                mean += v;
                second += v * v;
            }
            mean /= points;
            second /= points;
            let err = (bias - c.constant_term())
                .abs()
                .max((bias - mean).abs())
                .max((variance - (second - mean * mean)).abs() / variance.max(1.0));
            let stats = PairStatistics {
                i,
                j,
                distance,
                bias,
                variance,
                small_bias: bias.abs() <= bias_threshold,
                large_variance: variance >= variance_threshold,
            };
            Ok((stats, err))
        })
        .collect();
    let mut pairs = Vec::with_capacity(results.len());
    let mut max_consistency_error: f64 = 0.0;
    for r in results {
        let (stats, err) = r?;
        max_consistency_error = max_consistency_error.max(err);
        pairs.push(stats);
    }
    let mut distances = vec![vec![0.0; m]; m];
    for s in &pairs {
        distances[s.i][s.j] = s.distance;
        distances[s.j][s.i] = s.distance;
    }
    let total = pairs.len().max(1) as f64;
    Ok(EnsembleResult {
        m,
        n,
        d,
        seed,
        member_seeds,
        min_off_diagonal: pairs.iter().map(|s| s.distance).min_by(f64::total_cmp),
        distance_bound: constants.c.powi(-(d as i32)),
        small_bias_fraction: pairs.iter().filter(|s| s.small_bias).count() as f64 / total,
        large_variance_fraction: pairs.iter().filter(|s| s.large_variance).count() as f64 / total,
        pairs,
        distances,
        bias_threshold,
        variance_threshold,
        odd_n: n % 2 == 1,
        max_consistency_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(n: usize, d: usize, terms: &[(&[usize], f64)]) -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(n, d, terms).unwrap()
    }

    fn sum_of(k: usize, scale: f64) -> MultilinearPolynomial {
        let terms: Vec<(Vec<usize>, f64)> = (0..k).map(|i| (vec![i], scale)).collect();
        let refs: Vec<(&[usize], f64)> = terms.iter().map(|(v, c)| (v.as_slice(), *c)).collect();
        poly(k, 1, &refs)
    }

    #[test]
    fn dist_examples() {
        let k = TheoryConstants::default();
        let x1 = poly(3, 1, &[(&[0], 1.0)]);
        let maj = sum_of(3, 1.0);
        assert_eq!(dist(&x1, &x1, &k).unwrap().0, 0.0);
        assert_eq!(dist(&maj, &x1, &k).unwrap().0, 0.25);
        assert_eq!(dist(&maj, &maj.negate(), &k).unwrap().0, 1.0);
        assert!(dist(&x1, &poly(2, 1, &[(&[0], 1.0)]), &k).is_err());
    }

    #[test]
    fn dist_falls_back_to_sampling() {
        let k = TheoryConstants { enumeration_limit: 4, mc_samples: 20_000, ..Default::default() };
        let a = sum_of(6, 1.0).scale(1.0);
        let x1 = poly(6, 1, &[(&[0], 1.0)]);
        let (d, method) = dist(&a, &x1, &k).unwrap();
        assert!(matches!(method, Method::MonteCarlo { samples: 20_000, .. }));
        // exact value: Pr[sign(x1 + S5) != x1] with S5 a sum of five signs
        let exact = dist(&a, &x1, &TheoryConstants::default()).unwrap().0;
        assert!((d - exact).abs() < 0.02);
    }

    #[test]
    fn hypercontractivity_examples() {
        let k = TheoryConstants::default();
        let r = hypercontractivity_check(&poly(2, 2, &[(&[0, 1], 1.0)]), &k).unwrap();
        assert_eq!((r.measured, r.bound, r.status), (1.0, 3.0, CheckStatus::Pass));
        let r = hypercontractivity_check(&poly(2, 1, &[(&[0], 1.0), (&[1], 1.0)]), &k).unwrap();
        assert!((r.measured - 8f64.powf(0.25)).abs() < 1e-12);
        assert!((r.bound - 6f64.sqrt()).abs() < 1e-12);
        assert!(r.sampling_error.is_none());
    }

    #[test]
    fn concentration_examples() {
        let k = TheoryConstants::default();
        let x1 = poly(1, 1, &[(&[0], 1.0)]);
        assert_eq!(concentration_tail(&x1, 3.0, &k).unwrap().measured, 0.0);
        assert!(concentration_tail(&x1, 2.0, &k).is_err());
        let nine = sum_of(9, 1.0 / 3.0);
        let grid = [std::f64::consts::E + 0.1, 4.0, 8.0];
        let r = concentration_grid(&nine, &grid, &k).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
    }

    #[test]
    fn anticoncentration_examples() {
        let k = TheoryConstants::default();
        let r = anticoncentration_check(&poly(1, 1, &[(&[0], 1.0)]), &k).unwrap();
        assert_eq!((r.measured, r.status), (0.5, CheckStatus::Pass));
        let r = anticoncentration_check(&poly(2, 2, &[(&[0, 1], 1.0)]), &k).unwrap();
        assert_eq!(r.measured, 0.5);
        assert!((r.bound - 1.0 / 9.0).abs() < 1e-15);
        assert!(anticoncentration_check(&poly(1, 1, &[(&[], 0.5), (&[0], 1.0)]), &k).is_err());
    }

    #[test]
    fn minimal_c0_is_tight() {
        let k = TheoryConstants::default();
        let p = poly(1, 1, &[(&[0], 1.0)]);
        // Pr[x1 > 1/c0] = 1/2 > 1/c0 needs c0 > 2
        let c0 = minimal_passing_c0(&p, &k).unwrap().unwrap();
        assert!((c0 - 2.0).abs() < 1e-5);
    }

    #[test]
    fn regular_anticoncentration_examples() {
        let k = TheoryConstants::default();
        let r = regular_anticoncentration(&sum_of(9, 1.0 / 3.0), 0.1, &k).unwrap();
        assert_eq!(r.measured, 0.0);
        assert_eq!(r.method, Method::Exact { points: 512 });
        // nine equal weights are only 1/9-regular, so the bound is flagged as not applicable
        assert_eq!(r.status, CheckStatus::NotApplicable);
        let x1 = poly(1, 1, &[(&[0], 1.0)]);
        assert_eq!(regular_anticoncentration(&x1, 0.5, &k).unwrap().measured, 0.0);
        assert!(regular_anticoncentration(&x1.scale(2.0), 0.5, &k).is_err());
        let sixteen = sum_of(16, 0.25);
        let r = regular_anticoncentration(&sixteen, 0.1, &k).unwrap();
        assert_eq!(r.status, CheckStatus::Informational);
        assert!(r.measured > 0.0 && r.measured <= r.bound);
        let parity = poly(2, 2, &[(&[0, 1], 1.0)]);
        assert_eq!(regular_anticoncentration(&parity, 0.5, &k).unwrap().measured, 0.0);
    }

    #[test]
    fn invariance_gap_examples() {
        let k = TheoryConstants::default();
        let x1 = poly(1, 1, &[(&[0], 1.0)]);
        let r = gaussian_invariance_gap(&x1, 100_000, 5, &k).unwrap();
        let band = r.sampling_error.unwrap();
        assert!((r.measured - 0.3413447).abs() <= band, "gap {} band {band}", r.measured);
        let values = fwht_synthesize(&x1, 20).unwrap().into_values();
        assert_eq!(sup_cdf_gap(&values, &values), 0.0);
        let nine = sum_of(9, 1.0 / 3.0);
        let r = gaussian_invariance_gap(&nine, 20_000, 1, &k).unwrap();
        assert!(r.measured < 0.2);
    }

    #[test]
    fn gaussian_runs_agree_within_their_bands() {
        let p = MultilinearPolynomial::random_gaussian(6, 2, 4).unwrap().normalize_variance().unwrap();
        let a = gaussian_values(&p, 20_000, 1).unwrap();
        let b = gaussian_values(&p, 40_000, 2).unwrap();
        assert!(sup_cdf_gap(&a, &b) <= dkw_band(20_000) + dkw_band(40_000));
    }

    #[test]
    fn parseval_applies_only_to_boolean_tables() {
        let maj = sum_of(3, 1.0);
        let signs: Vec<f64> = fwht_synthesize(&maj, 20).unwrap().signs().iter().map(|&s| s as f64).collect();
        let r = parseval_check(&TruthTable::new(3, signs).unwrap());
        assert_eq!(r.status, CheckStatus::Pass);
        let raw = fwht_synthesize(&maj, 20).unwrap();
        assert_eq!(parseval_check(&raw).status, CheckStatus::NotApplicable);
    }

    #[test]
    fn restriction_average_and_decay_hold_on_random_polynomials() {
        for seed in 0..5 {
            let p = MultilinearPolynomial::random_gaussian(8, 3, seed).unwrap();
            for k in 1..=4 {
                assert_eq!(restriction_average_check(&p, k).unwrap().status, CheckStatus::Pass);
            }
            for tau in [0.05, 0.1, 0.3] {
                assert_eq!(influence_decay_check(&p, tau).unwrap().status, CheckStatus::Pass);
            }
        }
    }

    #[test]
    fn sample_from_d_examples() {
        let p = sample_from_d(4, 2, 9).unwrap();
        assert_eq!(p.num_terms(), 6);
        assert!(p.terms().all(|(m, c)| m.count_ones() == 2 && c.abs() == 1.0));
        assert_eq!(p, sample_from_d(4, 2, 9).unwrap());
        assert_eq!(sample_from_d(5, 5, 1).unwrap().num_terms(), 1);
    }

    #[test]
    fn ensemble_small_case_is_consistent() {
        let k = TheoryConstants::default();
        let r = ensemble_experiment(6, 8, 2, 3, &k).unwrap();
        for i in 0..6 {
            assert_eq!(r.distances[i][i], 0.0);
            for j in 0..6 {
                assert_eq!(r.distances[i][j], r.distances[j][i]);
            }
        }
        assert_eq!(r.pairs.len(), 15);
        assert!(r.max_consistency_error < 1e-9);
        let one = ensemble_experiment(1, 8, 2, 3, &k).unwrap();
        assert!(one.pairs.is_empty() && one.min_off_diagonal.is_none());
        assert!(matches!(ensemble_experiment(4, 25, 2, 0, &k), Err(Error::Resource(_))));
    }

    #[test]
    fn product_statistics_examples() {
        let a = poly(4, 2, &[(&[0, 1], 1.0)]);
        let b = poly(4, 2, &[(&[2, 3], 1.0)]);
        let c = a.multiply(&b).unwrap();
        assert_eq!(c.constant_term(), 0.0);
        assert_eq!(c.variance(), 1.0);
        let k = TheoryConstants::default();
        assert_eq!(dist(&a, &b, &k).unwrap().0, 0.5);
        let same = a.multiply(&a).unwrap();
        assert_eq!((same.constant_term(), same.variance()), (1.0, 0.0));
    }
}
