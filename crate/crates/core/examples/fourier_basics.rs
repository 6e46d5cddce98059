//! Fourier expansion of a small threshold function and back.

use ptfkit::poly::{fwht_analyze, fwht_synthesize, sign, MultilinearPolynomial, TruthTable};

fn main() -> ptfkit::error::Result<()> {
    let maj = TruthTable::from_fn(3, |b| {
        let ones = b.count_ones() as i32;
        if ones <= 1 { 1.0 } else { -1.0 }
    })?;
    let p = fwht_analyze(&maj);
    println!("MAJ3 = {}", p.to_json());
    let mass: f64 = p.terms().map(|(_, c)| c * c).sum();
    println!("sum of squared coefficients: {mass}");

    let q = MultilinearPolynomial::from_terms(4, 2, &[(&[], 0.25), (&[0, 1], 1.0), (&[2, 3], -0.5)])?;
    let table = fwht_synthesize(&q, 4)?;
    let positive = table.values().iter().filter(|&&v| sign(v) > 0).count();
    println!("q is nonnegative on {positive} of {} points", table.len());

    let rho = ptfkit::poly::Restriction::new(vec![(0, -1)])?;
    println!("q with x1 = -1: {}", q.restrict(&rho)?.to_json());
    let (l2, l4) = q.norms(4)?;
    println!("||q||_2 = {l2:.4}, ||q||_4 = {l4:.4}");
    Ok(())
}
