//! Acceptance suite. One line per criterion; exits nonzero if any fails.
//!
//! Run with `cargo test --test acceptance` (add `--release` for speed).

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use ptfkit::checks::{
    anticoncentration_check, ensemble_experiment, hypercontractivity_check, influence_decay_check,
    parseval_check, regular_anticoncentration, restriction_average_check,
};
use ptfkit::cli::{execute, header_record, render, CommandName, InputSource, RunConfig};
use ptfkit::constants::TheoryConstants;
use ptfkit::influence::influence_profile;
use ptfkit::low_weight::{approximate, IntegerPolynomial};
use ptfkit::measure::Method;
use ptfkit::poly::{fwht_analyze, fwht_synthesize, MultilinearPolynomial, TruthTable};
use ptfkit::tree::{audit_tree, build_tree};

const FWHT_TOL: f64 = 1e-12;
const PARSEVAL_TOL: f64 = 1e-9;
const SLOPE_TOL: f64 = 0.5;
const CONSISTENCY_TOL: f64 = 1e-9;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn transforms() -> Verdict {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let n = 4 + (seed % 13) as usize;
        let d = 1 + (seed % 4) as usize;
        let p = MultilinearPolynomial::random_gaussian(n, d, seed).unwrap();
        let back = fwht_analyze(&fwht_synthesize(&p, 16).unwrap());
        let masks = p.terms().map(|(m, _)| m).chain(back.terms().map(|(m, _)| m));
        for m in masks {
            worst = worst.max((p.coeff(m) - back.coeff(m)).abs());
        }
    }
    let mut parseval_worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..100usize {
        let n = 1 + i % 12;
        let values: Vec<f64> = (0..1usize << n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let r = parseval_check(&TruthTable::new(n, values).unwrap());
        parseval_worst = parseval_worst.max((r.measured - 1.0).abs());
    }
    verdict(
        worst <= FWHT_TOL && parseval_worst <= PARSEVAL_TOL,
        format!("round-trip max error {worst:.2e} (tol {FWHT_TOL:e}), Parseval max error {parseval_worst:.2e} (tol {PARSEVAL_TOL:e})"),
    )
}

fn degree3_corpus() -> Vec<MultilinearPolynomial> {
    (0..50).map(|s| MultilinearPolynomial::random_gaussian(12, 3, s).unwrap()).collect()
}

fn restriction_average() -> Verdict {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for p in degree3_corpus() {
        for k in 1..=6 {
            let r = restriction_average_check(&p, k).unwrap();
            worst = worst.max(r.measured);
            failures += usize::from(!r.ok());
        }
    }
    verdict(failures == 0, format!("300 (poly, k) cases, max deviation {worst:.2e} (tol 1e-9)"))
}

fn influence_decay() -> Verdict {
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for p in degree3_corpus() {
        for tau in [0.05, 0.1, 0.3] {
            let r = influence_decay_check(&p, tau).unwrap();
            worst = worst.max(r.measured);
            failures += usize::from(!r.ok());
        }
    }
    verdict(failures == 0, format!("150 cases, largest excess over (1-tau)^j Inf(p): {worst:.2e} (tol 1e-9)"))
}

fn hypercontractivity(k: &TheoryConstants) -> Verdict {
    let mut failures = 0;
    let mut worst_ratio = 0.0f64;
    for seed in 0..200 {
        let p = MultilinearPolynomial::random_gaussian(10, 3, 1000 + seed).unwrap();
        let r = hypercontractivity_check(&p, k).unwrap();
        worst_ratio = worst_ratio.max(r.measured / r.bound);
        failures += usize::from(!r.ok());
    }
    verdict(failures == 0, format!("200 polynomials, {failures} failures, max ||p||_4 / bound = {worst_ratio:.4}"))
}

fn centered(p: &MultilinearPolynomial) -> MultilinearPolynomial {
    MultilinearPolynomial::new(p.n(), p.degree_bound(), p.terms().filter(|(m, _)| *m != 0)).unwrap()
}

fn anticoncentration(k: &TheoryConstants) -> Verdict {
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    for seed in 0..200 {
        let p = centered(&MultilinearPolynomial::random_gaussian(10, 3, 2000 + seed).unwrap());
        let r = anticoncentration_check(&p, k).unwrap();
        min_margin = min_margin.min(r.measured - r.bound);
        if !r.ok() {
            failures.push(format!("seed {}: minimal passing c0 {}", 2000 + seed, r.parameters["minimal_passing_c0"]));
        }
    }
    let mut detail = format!("c0 = {}, pass rate {}/200, min margin {min_margin:.4}", k.c0, 200 - failures.len());
    for f in &failures {
        detail.push_str("; ");
        detail.push_str(f);
    }
    verdict(failures.is_empty(), detail)
}

fn regularity_tree(k: &TheoryConstants) -> Verdict {
    let tau = 0.1;
    let (mut audits_failed, mut exhausted, mut low_mass) = (0, 0, 0);
    let mut worst = 1.0f64;
    for seed in 0..50 {
        let p = MultilinearPolynomial::random_gaussian(12, 2, seed).unwrap();
        let tree = build_tree(&p, tau, k).unwrap();
        let audit = audit_tree(&tree, &p).unwrap();
        audits_failed += usize::from(!audit.ok() || audit.points_checked != 4096);
        let mass = tree.path_mass();
        if mass.budget_exhausted {
            exhausted += 1;
        } else {
            worst = worst.min(mass.good_mass);
            low_mass += usize::from(mass.good_mass < 1.0 - tau);
        }
    }
    verdict(
        audits_failed == 0 && low_mass == 0,
        format!("50 trees: {audits_failed} audit failures, {exhausted} budget exhaustions, min good mass {worst:.4} (need >= {})", 1.0 - tau),
    )
}

fn integer_terms_are_exact(q: &IntegerPolynomial) -> bool {
    let doc: Value = serde_json::from_str(&q.to_json()).unwrap();
    doc["terms"].as_array().unwrap().iter().all(|t| {
        t[1].as_str().is_some_and(|s| s.parse::<num_bigint::BigInt>().is_ok())
    }) && IntegerPolynomial::from_json(&q.to_json()).unwrap() == *q
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn low_weight(k: &TheoryConstants) -> Verdict {
    let eps = 0.2;
    let d = 2;
    let (mut far, mut identity, mut non_integer, mut bad_heavy) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in [8usize, 10, 12] {
        let mut total = 0.0;
        for seed in 0..50 {
            let p = MultilinearPolynomial::random_gaussian(n, d, seed).unwrap();
            let cert = approximate(&p, eps, k).unwrap();
            total += cert.ln_weight;
            if n == 12 {
                identity += usize::from(cert.combiner_identity_violations != 0);
                non_integer += usize::from(!integer_terms_are_exact(&cert.approximator));
                if cert.path_mass.bad_mass <= cert.tau {
                    worst = worst.max(cert.distance);
                    far += usize::from(cert.distance > eps || !matches!(cert.distance_method, Method::Exact { .. }));
                } else {
                    bad_heavy += 1;
                }
            }
        }
        xs.push((n as f64).ln());
        ys.push(total / 50.0);
    }
    let slope = fit_slope(&xs, &ys);
    verdict(
        far == 0 && identity == 0 && non_integer == 0 && (slope - d as f64).abs() <= SLOPE_TOL,
        format!(
            "n=12: max distance {worst:.4} (eps {eps}), {far} over, {identity} identity failures, {non_integer} non-integer, {bad_heavy} with bad mass > tau; mean ln-weight {:.3}/{:.3}/{:.3} at n=8/10/12, slope {slope:.3} (d = {d} +- {SLOPE_TOL})",
            ys[0], ys[1], ys[2]
        ),
    )
}

fn small_ball(k: &TheoryConstants) -> Verdict {
    let p = MultilinearPolynomial::new(9, 1, (0..9).map(|i| (1u32 << i, 1.0 / 3.0))).unwrap();
    let r = regular_anticoncentration(&p, 0.1, k).unwrap();
    let exact512 = r.method == Method::Exact { points: 512 };
    verdict(
        r.measured == 0.0 && exact512,
        format!("Pr[|p| <= 0.1] = {} over {:?}", r.measured, r.method),
    )
}

fn ensemble(k: &TheoryConstants) -> Verdict {
    let m = 32;
    let res = ensemble_experiment(m, 12, 2, 7, k).unwrap();
    let square = res.distances.len() == m && res.distances.iter().all(|row| row.len() == m);
    let symmetric = (0..m).all(|i| (0..m).all(|j| res.distances[i][j] == res.distances[j][i]) && res.distances[i][i] == 0.0);
    let members: Vec<MultilinearPolynomial> =
        res.member_seeds.iter().map(|&s| ptfkit::checks::sample_from_d(12, 2, s).unwrap()).collect();
    let mut oracle_gap = 0.0f64;
    for pair in &res.pairs {
        let c = members[pair.i].multiply(&members[pair.j]).unwrap();
        let profile = influence_profile(&c);
        oracle_gap = oracle_gap.max((c.constant_term() - pair.bias).abs()).max((profile.variance - pair.variance).abs());
    }
    let min = res.min_off_diagonal.unwrap_or(0.0);
    verdict(
        square && symmetric && res.pairs.len() == m * (m - 1) / 2 && min > 0.0 && oracle_gap <= CONSISTENCY_TOL && res.max_consistency_error <= CONSISTENCY_TOL,
        format!(
            "{} pairs, min off-diagonal {min:.4}, pointwise cross-check {:.2e}, multiply/influence cross-check {oracle_gap:.2e} (tol {CONSISTENCY_TOL:e})",
            res.pairs.len(),
            res.max_consistency_error
        ),
    )
}

fn strip_timestamp(text: &str) -> Vec<Value> {
    text.lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            if let Some(obj) = v.as_object_mut() {
                obj.remove("timestamp");
            }
            v
        })
        .collect()
}

fn determinism() -> Verdict {
    let mut configs = Vec::new();
    let mut c = RunConfig::new(CommandName::Decompose);
    c.input = Some(InputSource::Generate { n: 12, d: 2, seed: 3 });
    configs.push(c.clone());
    c.command = CommandName::Approximate;
    c.epsilon = Some(0.2);
    configs.push(c);
    let mut c = RunConfig::new(CommandName::Verify);
    c.members = Some(3);
    c.vars = Some(8);
    c.seed = 11;
    configs.push(c);
    let mut c = RunConfig::new(CommandName::Ensemble);
    c.members = Some(8);
    c.vars = Some(10);
    c.seed = 5;
    configs.push(c);
    let mut mismatched = Vec::new();
    for cfg in &configs {
        let a = strip_timestamp(&render(cfg, &execute(cfg).unwrap()));
        let b = strip_timestamp(&render(cfg, &execute(cfg).unwrap()));
        if a != b || header_record(cfg).get("timestamp").is_none() {
            mismatched.push(format!("{:?}", cfg.command));
        }
    }
    verdict(mismatched.is_empty(), format!("{} commands re-run, mismatches: {mismatched:?}", configs.len()))
}

fn main() {
    let k = TheoryConstants::default();
    type Criterion<'a> = (&'a str, Duration, Box<dyn Fn() -> Verdict + 'a>);
    let criteria: Vec<Criterion> = vec![
        ("transform correctness", Duration::from_secs(10), Box::new(transforms)),
        ("restriction averaging of influences", Duration::from_secs(30), Box::new(restriction_average)),
        ("tail influence decay", Duration::from_secs(60), Box::new(influence_decay)),
        ("(2,4)-hypercontractivity", Duration::from_secs(60), Box::new(|| hypercontractivity(&k))),
        ("anticoncentration calibration", Duration::from_secs(60), Box::new(|| anticoncentration(&k))),
        ("regularity tree at desk scale", Duration::from_secs(300), Box::new(|| regularity_tree(&k))),
        ("low-weight integer approximator", Duration::from_secs(300), Box::new(|| low_weight(&k))),
        ("small-ball sanity", Duration::from_secs(10), Box::new(|| small_ball(&k))),
        ("ensemble distances and product statistics", Duration::from_secs(120), Box::new(|| ensemble(&k))),
        ("determinism", Duration::from_secs(120), Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let ok = v.ok && elapsed <= *limit;
        failed += usize::from(!ok);
        println!(
            "{} {:>2} {name}: {} [{:.2}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
