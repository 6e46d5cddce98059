//! Influences, the critical index, and the head/tail split.

use ptfkit::influence::{critical_index, head_tail_split, influence_profile, is_tau_regular};
use ptfkit::poly::MultilinearPolynomial;

fn main() -> ptfkit::error::Result<()> {
    // three heavy variables followed by a flat tail
    let weights = [1.0, 0.7, 0.5, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1];
    let p = MultilinearPolynomial::new(12, 1, weights.iter().enumerate().map(|(i, &w)| (1u32 << i, w)))?;
    let profile = influence_profile(&p);
    println!("total influence {:.4}", profile.total);
    for (rank, &v) in profile.order.iter().enumerate().take(5) {
        println!("  #{rank}: x{} with influence {:.4}", v + 1, profile.influences[v]);
    }
    for tau in [0.05, 0.2, 0.6] {
        println!(
            "tau = {tau}: critical index {:?}, regular: {}",
            critical_index(&p, tau)?,
            is_tau_regular(&p, tau)?
        );
    }
    let random = MultilinearPolynomial::random_gaussian(12, 3, 1)?;
    println!("random cubic: critical index at 0.1 is {:?}", critical_index(&random, 0.1)?);
    let (head, tail, vars) = head_tail_split(&p, 3)?;
    println!(
        "head on x{:?}: {} terms; tail: {} terms",
        vars.iter().map(|v| v + 1).collect::<Vec<_>>(),
        head.num_terms(),
        tail.num_terms()
    );
    Ok(())
}
