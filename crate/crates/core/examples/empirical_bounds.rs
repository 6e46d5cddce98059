//! Exact checks of hypercontractivity, concentration, anticoncentration and
//! the Gaussian invariance gap on random cubics.

use ptfkit::checks::{
    anticoncentration_check, concentration_grid, gaussian_invariance_gap, hypercontractivity_check,
    regular_anticoncentration,
};
use ptfkit::constants::TheoryConstants;
use ptfkit::poly::MultilinearPolynomial;

fn main() -> ptfkit::error::Result<()> {
    let k = TheoryConstants::default();
    let p = MultilinearPolynomial::random_gaussian(10, 3, 5)?;
    let centered = MultilinearPolynomial::new(10, 3, p.terms().filter(|(m, _)| *m != 0))?;
    let e3 = 3f64.exp();
    let reports = [
        hypercontractivity_check(&p, &k)?,
        concentration_grid(&p, &[e3 + 0.5, 2.0 * e3, 4.0 * e3], &k)?,
        anticoncentration_check(&centered, &k)?,
        regular_anticoncentration(&centered.normalize_variance()?, 0.3, &k)?,
        gaussian_invariance_gap(&centered.normalize_variance()?, 20_000, 1, &k)?,
    ];
    for r in &reports {
        println!("{:<26} measured {:>10.5}  bound {:>10.5}  {:?}", r.check, r.measured, r.bound, r.status);
    }

    let sum9 = MultilinearPolynomial::new(9, 1, (0..9).map(|i| (1u32 << i, 1.0 / 3.0)))?;
    let small = regular_anticoncentration(&sum9, 0.1, &k)?;
    println!("(x1+...+x9)/3: Pr[|p| <= 0.1] = {} ({})", small.measured, small.note.unwrap_or_default());
    Ok(())
}
