//! Decompose a random quadratic threshold function into regular and
//! near-constant leaves, then audit every label.

use ptfkit::constants::TheoryConstants;
use ptfkit::poly::MultilinearPolynomial;
use ptfkit::tree::{audit_tree, build_tree, derive_parameters, LeafClass};

fn main() -> ptfkit::error::Result<()> {
    let k = TheoryConstants::default();
    let params = derive_parameters(2, 0.1, &k)?;
    println!(
        "tau~ = {:.3e}, per-stage cap {}, stage cap {}, budget {}",
        params.tau_tilde, params.per_stage_cap, params.stage_cap, params.total_budget
    );

    let p = MultilinearPolynomial::random_gaussian(10, 2, 42)?;
    let tree = build_tree(&p, 0.1, &k)?;
    let mass = tree.path_mass();
    println!(
        "{} regular, {} near-constant, {} bad leaves; depth {}; good mass {:.4}",
        mass.regular_leaves, mass.close_leaves, mass.bad_leaves, mass.max_depth, mass.good_mass
    );
    for leaf in tree.leaves().iter().take(4) {
        let label = match &leaf.class {
            LeafClass::Regular => "regular".to_string(),
            LeafClass::CloseToConstant { sign, distance } => format!("close to {sign:+} at distance {distance:.4}"),
            LeafClass::Bad { reason } => format!("bad ({reason:?})"),
        };
        println!("  path {:?}: {label}", leaf.path.fixed());
    }
    let audit = audit_tree(&tree, &p)?;
    println!("audit ok: {} ({} sign mismatches over {} points)", audit.ok(), audit.sign_mismatches, audit.points_checked);

    let spread = MultilinearPolynomial::new(10, 1, (0..10).map(|i| (1u32 << i, 1.0)))?;
    let flat = build_tree(&spread, 0.2, &k)?;
    println!("x1 + ... + x10 at tau 0.2: {} leaf, depth {}", flat.leaves().len(), flat.depth());

    // a tight budget leaves part of the cube unresolved
    let mut tight = k.clone();
    tight.depth_budget_override = Some(1);
    let shallow = build_tree(&MultilinearPolynomial::random_gaussian(10, 2, 7)?, 0.02, &tight)?;
    println!("budget 1: bad mass {:.3}", shallow.path_mass().bad_mass);
    Ok(())
}
