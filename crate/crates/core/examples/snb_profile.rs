//! A small strong-natural-boundary growth profile: medians of
//! Y = ⨍_I |F(r_k e^{iθ})| dθ and the small-ball frequencies along A(r_k) = k⁶.
//!
//! cargo run --release --example snb_profile

use boundary_lab::functionals::{snb_growth_profile, PsiSpec};
use boundary_lab::{ArcSpec, CoeffLaw, LawSequence, Result};

fn main() -> Result<()> {
    let seq = LawSequence::iid(CoeffLaw::Rademacher)?;
    let arc = ArcSpec::new(1.0, 2.0, 4096)?;
    let p = snb_growth_profile(&seq, arc, &PsiSpec::power(1.0)?, 5, 200, 7)?;
    println!("{:>2} {:>12} {:>9} {:>10} {:>10} {:>8}", "k", "1 - r_k", "degree", "median", "f_k", "rho_k");
    for r in &p.rows {
        println!(
            "{:>2} {:>12.4e} {:>9} {:>10.4} {:>10.4} {:>8.4}",
            r.k,
            r.radius.gap(),
            r.degree,
            r.median,
            r.small_ball,
            r.rho
        );
    }
    println!("fitted constant {:.4}, median violations: {}", p.c_fit, p.median_violations());
    Ok(())
}
