//! Every inequality verifier on a few laws, printed as a report table.
//!
//! cargo run --release --example inequality_checks

use boundary_lab::inequalities::{self as ineq, BoundReport, LambdaRule};
use boundary_lab::{CoeffLaw, LawSequence, Result};

fn show(r: &BoundReport) {
    println!(
        "{:<20} {:<34} lhs={:<11.5} rhs={:<11.5} ratio={:<9.4} {}",
        r.name, r.subject, r.lhs, r.rhs, r.ratio, r.verdict
    );
}

fn main() -> Result<()> {
    let signs = LawSequence::iid(CoeffLaw::Rademacher)?;
    for r in ineq::rogozin_verify(&signs, &LambdaRule::Constant(1.0), 1.0, &[1, 10, 100, 1000], 0, 0)? {
        show(&r);
    }
    for n in [100, 400, 1600] {
        show(&ineq::berry_esseen_verify(&vec![1.0 / (n as f64).sqrt(); n], &[CoeffLaw::Rademacher], 0, 0)?);
    }
    let alpha = CoeffLaw::Alpha { alpha: 0.125 };
    for law in [CoeffLaw::Rademacher, CoeffLaw::Jump { k: 3 }, alpha.clone()] {
        show(&ineq::paley_zygmund_fact(&law, law.exact_moments()?.variance)?);
        show(&ineq::variance_reversal_check(&law)?);
        show(&ineq::levy_weak_l2_equiv_check(&law)?);
        show(&ineq::subgaussian_fact_check(&law)?);
    }
    show(&ineq::weak_symmetrization_check(&CoeffLaw::Gaussian { sigma: 1.0 }, 1.0, 0, 0)?);
    show(&ineq::weak_symmetrization_check(&alpha, 0.7, 1_000_000, 1)?);
    show(&ineq::log_plus_triangle_check(10_000, 1)?);
    let mixture = ineq::mixture_lemma_random(1000, 2)?;
    println!("mixture lemma: {} of {} random cases hold", mixture.iter().filter(|r| r.verdict.is_ok()).count(), mixture.len());
    println!("third-moment ratio, jump law k <= 100: {:.3}", ineq::third_moment_ratio_over(&LawSequence::jump(), 1..=100)?);
    Ok(())
}
