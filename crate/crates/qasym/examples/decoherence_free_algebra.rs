//! The decoherence-free algebra of a channel and the two structure theorems
//! around it: a faithful channel has attractor equal to that algebra (and
//! acts on it as a *-automorphism), and the attractor sits inside the algebra
//! exactly when the channel is peripherally automorphic.
//!
//! Two instances are contrasted: a faithful mixed-unitary channel, and a
//! non-faithful absorbing channel whose attractor is strictly smaller than
//! its decoherence-free algebra.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use qasym::dfa;
use qasym::op::{vectorize, Operator, Picture, Superoperator, Tolerances};
use qasym::random::random_unital_channel;
use qasym::spectral;

fn print_verdict(v: &dfa::TheoremVerdict) {
    println!("theorem: {}", v.name);
    println!("  hypothesis {}, conclusion {}, consistent {}",
        v.hypothesis_holds, v.conclusion_holds, v.consistent);
    for (name, r) in &v.residuals {
        println!("  {name:<36} {r:.3e}");
    }
}

fn main() -> qasym::error::Result<()> {
    let tol = Tolerances::default();

    println!("--- faithful mixed-unitary channel (d = 3) ---");
    let kraus = random_unital_channel(3, 2, 42)?;
    let s = Superoperator::from_kraus(&kraus, Picture::Heisenberg)?;
    let n = dfa::dfa_discrete(&s, &tol)?;
    println!("dim N = {}, star-closed {}, product-closed {}, factor {}",
        n.subspace.len(), n.is_star_closed, n.is_product_closed, n.is_factor);
    let (faithful, lam_min) = dfa::is_faithful(&s, &tol)?;
    println!("faithful {faithful} (min state eigenvalue {lam_min:.4})");
    print_verdict(&dfa::check_theorem_faithful(&s, &tol)?);
    print_verdict(&dfa::check_theorem_pa(&s, &tol)?);

    println!();
    println!("--- absorbing channel (d = 3, not faithful) ---");
    // Heisenberg picture of "everything decays into |0⟩": X ↦ ⟨0|X|0⟩ I.
    let d = 3;
    let mut m = Array2::<C64>::zeros((d * d, d * d));
    let vi = vectorize(&Operator::identity(d));
    let ve = vectorize(&Operator::matrix_unit(d, 0, 0));
    for i in 0..d * d {
        for j in 0..d * d {
            m[(i, j)] = vi[i] * ve[j].conj();
        }
    }
    let s = Superoperator::new(d, m)?;
    let n = dfa::dfa_discrete(&s, &tol)?;
    let attr = spectral::attractor_subspace(&s, &tol)?;
    let (faithful, lam_min) = dfa::is_faithful(&s, &tol)?;
    println!("dim N = {}, dim Attr = {}", n.subspace.len(), attr.len());
    println!("faithful {faithful} (min state eigenvalue {lam_min:.3e})");
    println!("Attr ⊆ N residual: {:.3e}  (containment, not equality)",
        n.subspace.containment_residual(&attr)?);
    print_verdict(&dfa::check_theorem_faithful(&s, &tol)?);

    // The peripheral projection is idempotent and unital completely positive;
    // its compositional defects vanish.
    let p = spectral::peripheral_projection(&s, &tol)?;
    let (left, right) = dfa::hamana_check(&p, 7)?;
    println!("projection defect norms: {left:.3e}, {right:.3e}");
    Ok(())
}
