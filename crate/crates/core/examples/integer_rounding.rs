//! Rounding a regular polynomial to integer coefficients without changing
//! its sign pattern much, and integerizing a constant term exactly.

use ptfkit::constants::TheoryConstants;
use ptfkit::low_weight::{integerize_constant, round_regular, IntegerPolynomial};
use ptfkit::poly::MultilinearPolynomial;

fn main() -> ptfkit::error::Result<()> {
    let k = TheoryConstants::default();
    let p = MultilinearPolynomial::random_gaussian(10, 2, 3)?.normalize_variance()?;
    for eps in [0.3, 0.2, 0.1] {
        let r = round_regular(&p, eps, &k)?;
        println!(
            "eps {eps}: tau {:.3e}, weight {} (ln {:.2}, bound {:.2}), distance {:.4}",
            r.tau, r.weight, r.ln_weight, r.ln_weight_bound, r.distance
        );
    }

    let v = IntegerPolynomial::from_terms(3, 2, &[(&[0], 2), (&[1, 2], -3)])?;
    let fixed = integerize_constant(&v, 0.37, 0.25, 20)?;
    println!("constant 0.37 at granularity 0.25 -> {:?} {} : {}", fixed.choice, fixed.constant, fixed.polynomial.to_json());
    Ok(())
}
