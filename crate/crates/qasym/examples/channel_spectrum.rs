//! Spectral anatomy of a quantum channel: eigenvalues, peripheral/bulk
//! split, spectral gap, attractor and transient subspaces, and the
//! convergence of the iterates to the peripheral projection.
//!
//! The instance is the qubit dephasing channel Φ(X) = (1−p) X + p ZXZ,
//! whose spectrum {1, 1, 1−2p, 1−2p} is known in closed form.

use qasym::op::{Operator, Picture, Superoperator, Tolerances};
use qasym::spectral;

fn main() -> qasym::error::Result<()> {
    let tol = Tolerances::default();
    let p = 0.25f64;
    let kraus = vec![
        Operator::identity(2).scale_re((1.0 - p).sqrt()),
        Operator::pauli_z().scale_re(p.sqrt()),
    ];
    let s = Superoperator::from_kraus(&kraus, Picture::Heisenberg)?;

    let analysis = spectral::analyze(&s, &tol)?;
    println!("eigenvalues ({}):", analysis.eigenvalues.len());
    for z in &analysis.eigenvalues {
        println!("  {:+.6} {:+.6}i", z.re, z.im);
    }
    println!("peripheral count : {}", analysis.peripheral.len());
    println!("spectral gap     : {:.6}", analysis.gap);
    println!("dim Attr         : {}", analysis.attr.len());
    println!("dim Fix          : {}", analysis.fix.len());
    println!("dim transient    : {}", analysis.transient.len());

    // The attractor of dephasing is the diagonal algebra span{I, Z}.
    let diag = qasym::op::orthonormalize(
        &[Operator::identity(2), Operator::pauli_z()],
        tol.rank,
    )?;
    println!(
        "Attr = span{{I,Z}} residual: {:.3e}",
        analysis.attr.equality_residual(&diag)?
    );

    // The attractor and the transient part split operator space, and the
    // transient component of any operator decays at rate (1 − gap)ⁿ.
    let decay = spectral::jdlg_verify(&s, &analysis, &tol, 99)?;
    println!(
        "splitting residual {:.3e}, final transient norm {:.3e}, decay verified: {}",
        decay.reconstruction_residual, decay.final_transient_norm, decay.transient_decays
    );
    Ok(())
}
