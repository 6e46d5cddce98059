//! End-to-end: an integer polynomial whose sign agrees with a random
//! quadratic threshold function on all but an epsilon fraction of the cube.

use ptfkit::constants::TheoryConstants;
use ptfkit::low_weight::approximate;
use ptfkit::poly::MultilinearPolynomial;

fn main() -> ptfkit::error::Result<()> {
    let k = TheoryConstants::default();
    for n in [8, 10, 12] {
        let p = MultilinearPolynomial::random_gaussian(n, 2, 11)?;
        let cert = approximate(&p, 0.2, &k)?;
        println!(
            "n = {n}: {:?}, distance {:.4}, degree {}, ln weight {:.2} (declared bound {:.2}), {} terms, tree depth {}",
            cert.status,
            cert.distance,
            cert.degree,
            cert.ln_weight,
            cert.ln_declared_weight_bound,
            cert.approximator.num_terms(),
            cert.tree_depth
        );
    }
    let maj = MultilinearPolynomial::from_terms(3, 1, &[(&[0], 1.0), (&[1], 1.0), (&[2], 1.0)])?;
    let cert = approximate(&maj, 0.3, &k)?;
    println!("MAJ3 -> {}", cert.approximator.to_json());
    Ok(())
}
