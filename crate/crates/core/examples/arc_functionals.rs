//! Arc integrals of ψ(|F|), Hardy means on circles and partial sums on the
//! boundary for one sampled Rademacher series.
//!
//! cargo run --example arc_functionals

use boundary_lab::functionals::{arc_integral, boundary_partial_sup, hardy_norm_estimate, PsiSpec};
use boundary_lab::series::sample_series;
use boundary_lab::{ArcSpec, CoeffLaw, LawSequence, Radius, Result};

fn main() -> Result<()> {
    let seq = LawSequence::iid(CoeffLaw::Rademacher)?;
    let s = sample_series(&seq, 20_000, 42, 0)?;
    let arc = ArcSpec::new(1.0, 2.0, 4096)?;
    for psi in [PsiSpec::power(1.0)?, PsiSpec::power(2.0)?, PsiSpec::LogPlus, PsiSpec::SignedLog] {
        for r in [0.9, 0.99, 0.999] {
            let v = arc_integral(&s, Radius::new(r)?, arc, &psi)?.normalize();
            println!("{psi:<12} r={r:<6} avg = {:>10.4} (err {:.1e})", v.value, v.error);
        }
    }

    let h = hardy_norm_estimate(&s, 2.0, &[0.5, 0.9, 0.99, 0.999])?;
    println!("H^2 means {:?}, monotone = {}", h.means, h.monotone);

    let p = boundary_partial_sup(&s.coeffs, 1.0, 10_000)?;
    println!(
        "max partial sum at theta=1 up to N=10^4: {:.2}; Abel domination slack {:.3e}",
        p.running_max.last().unwrap(),
        p.abel_slack
    );
    Ok(())
}
