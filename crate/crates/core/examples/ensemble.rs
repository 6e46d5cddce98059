//! Pairwise distances between random homogeneous quadratic threshold
//! functions, with the bias and variance of each product.

use ptfkit::checks::ensemble_experiment;
use ptfkit::constants::TheoryConstants;

fn main() -> ptfkit::error::Result<()> {
    let k = TheoryConstants::default();
    let r = ensemble_experiment(32, 12, 2, 7, &k)?;
    println!("{} members, {} pairs", r.m, r.pairs.len());
    println!("min off-diagonal distance {:.4}", r.min_off_diagonal.unwrap_or(0.0));
    println!(
        "small bias (< {:.3}) in {:.1}% of pairs, large variance (> {:.1}) in {:.1}%",
        r.bias_threshold,
        100.0 * r.small_bias_fraction,
        r.variance_threshold,
        100.0 * r.large_variance_fraction
    );
    let closest = r.pairs.iter().min_by(|a, b| a.distance.total_cmp(&b.distance)).unwrap();
    println!("closest pair ({}, {}): distance {:.4}, bias {:.2}", closest.i, closest.j, closest.distance, closest.bias);
    Ok(())
}
