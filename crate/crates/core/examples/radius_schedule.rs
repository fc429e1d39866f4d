//! The auxiliary series A(r) = Σ t_k² (1 − Q(X_k, t_k)) r^{2k}, the radii
//! r_k with A(r_k) = k⁶ and the truncation degree needed at each of them.
//!
//! cargo run --example radius_schedule

use boundary_lab::concentration::{AuxKind, AuxSeries};
use boundary_lab::laws::Weights;
use boundary_lab::series::{radius_schedule, truncation_order};
use boundary_lab::{CoeffLaw, LawSequence, Result};

fn main() -> Result<()> {
    let seq = LawSequence::iid(CoeffLaw::Rademacher)?.with_weights(Weights::Constant(1.0))?;
    let a = AuxSeries::new(AuxKind::A, seq.clone())?;
    for r in [0.5, 0.9, 0.99] {
        println!("A({r}) = {:.6}", a.eval(r)?);
    }
    let schedule = radius_schedule(&a, 8)?;
    println!("{:>3} {:>14} {:>12} {:>10}", "k", "1 - r_k", "target", "degree");
    for (k, (r, target)) in schedule.radii.iter().zip(&schedule.targets).enumerate() {
        let n = truncation_order(&seq, *r, 1e-6)?;
        println!("{:>3} {:>14.6e} {:>12} {:>10}", k + 1, r.gap(), target, n);
    }

    // constant coefficients never anti-concentrate
    let flat = LawSequence::iid(CoeffLaw::Deterministic { c: 1.0 })?.with_weights(Weights::Constant(1.0))?;
    match radius_schedule(&AuxSeries::new(AuxKind::A, flat)?, 3) {
        Err(e) => println!("deterministic: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
