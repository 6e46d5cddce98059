//! Census of head restrictions: how often fixing the most influential
//! variables leaves a function that is nearly constant.

use ptfkit::constants::TheoryConstants;
use ptfkit::poly::MultilinearPolynomial;
use ptfkit::tree::good_restriction_census;

fn main() -> ptfkit::error::Result<()> {
    let k = TheoryConstants::default();
    // four heavy variables, an offset, and a faint tail
    let mut terms: Vec<(u32, f64)> = vec![(0, 0.5)];
    terms.extend((0..4).map(|i| (1u32 << i, 1.0)));
    terms.extend((4..12).map(|i| (1u32 << i, 0.005)));
    let p = MultilinearPolynomial::new(12, 1, terms)?;
    for head in [2, 4, 6] {
        let census = good_restriction_census(&p, head, 0.05, &k)?;
        println!(
            "K = {head}: good {:.3} (predicted at least {:.3}), condition i {:.3}, condition ii {:.3}, good but far {}",
            census.good_fraction,
            census.predicted_good_fraction,
            census.condition_i_fraction,
            census.condition_ii_fraction,
            census.good_but_far
        );
    }
    let census = good_restriction_census(&p, 4, 0.05, &k)?;
    for e in census.entries.iter().filter(|e| e.good).take(3) {
        println!("  {:?}: head value {:.3}, tail norm {:.3}, distance {:.4}", e.restriction.fixed(), e.head_value, e.tail_norm, e.distance);
    }
    Ok(())
}
