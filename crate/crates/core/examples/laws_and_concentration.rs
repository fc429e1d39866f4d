//! Closed-form Lévy concentration against plug-in estimates, plus the
//! anti-concentration series of a few sequences.
//!
//! cargo run --example laws_and_concentration

use boundary_lab::concentration::{anticoncentration_series, empirical_concentration};
use boundary_lab::inequalities::catalog_laws;
use boundary_lab::stats::sorted;
use boundary_lab::{LawSequence, Result, Stream};

fn main() -> Result<()> {
    println!("{:<24} {:>6} {:>10} {:>10}", "law", "lambda", "exact", "empirical");
    for (i, law) in catalog_laws().iter().enumerate() {
        let xs = sorted(&law.sample(&mut Stream::new(1, i as u64, 0), 100_000));
        for lambda in [0.25, 1.0, 2.5] {
            let exact = law.exact_concentration(lambda)?;
            let emp = empirical_concentration(&xs, lambda)?;
            println!("{:<24} {lambda:>6} {exact:>10.5} {emp:>10.5}", law.to_string());
        }
    }

    // Σ (1 − Q(X_k, ε)) decides natural-boundary behaviour
    let jump = LawSequence::jump();
    for k_max in [10, 100, 1000] {
        println!("jump law: sum_(k<={k_max}) (1 - Q(X_k, 1/2)) = {:.5}", anticoncentration_series(&jump, 0.5, k_max)?);
    }
    let alpha = LawSequence::alpha_optimal();
    println!("alpha-optimal, K = 10^4: {:.4}", anticoncentration_series(&alpha, 0.5, 10_000)?);
    Ok(())
}
