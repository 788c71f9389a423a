//! Seeded random campaigns through the library API: generate instance
//! families, analyze each instance, and aggregate the theorem verdicts.
//! Identical master seeds reproduce identical summaries (apart from the
//! wall-clock field), and every trial's seed is recorded so any instance
//! can be regenerated in isolation.

use qasym::op::Tolerances;
use qasym::report::{campaign, Family};

fn main() -> qasym::error::Result<()> {
    let tol = Tolerances::default();

    for (family, dim, trials) in [
        (Family::Unital, 2, 5),
        (Family::Generic, 3, 5),
        (Family::Gkls, 2, 5),
    ] {
        let summary = campaign(family, dim, trials, 7, &tol)?;
        println!("family {:?}, d = {dim}, {trials} trials:", family);
        println!("  consistent      : {}", summary.consistent);
        println!("  max residual    : {:.3e}", summary.max_residual);
        println!(
            "  faithful trials : {}/{}",
            summary.results.iter().filter(|t| t.faithful).count(),
            trials
        );
        if !summary.non_pa_seeds.is_empty() {
            println!("  non-PA seeds    : {:?}", summary.non_pa_seeds);
        }
    }

    // Determinism: rerunning with the same master seed reproduces the
    // summary byte for byte once the timing field is cleared.
    let mut a = campaign(Family::Unital, 2, 3, 99, &tol)?;
    let mut b = campaign(Family::Unital, 2, 3, 99, &tol)?;
    a.strip_timing();
    b.strip_timing();
    println!();
    println!("same-seed summaries identical: {}", a.to_json()? == b.to_json()?);
    Ok(())
}
