//! Roots of random Gaussian polynomials: backward error, the Jensen
//! identity, annulus radii R_s and the Blaschke sum.
//!
//! cargo run --release --example roots_and_jensen

use boundary_lab::roots::{annulus_statistics, blaschke_sum, jensen_residual, polynomial_roots};
use boundary_lab::series::sample_series;
use boundary_lab::{CoeffLaw, LawSequence, Result};

fn main() -> Result<()> {
    let seq = LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 })?;
    let mut sets = Vec::new();
    for rep in 0..20 {
        let s = sample_series(&seq, 1024, 3, rep)?;
        let roots = polynomial_roots(&s.coeffs)?;
        if rep < 3 {
            println!(
                "replicate {rep}: backward error {:.2e}, Jensen residual at r=0.9 {:.2e}, Blaschke sum {:.3}",
                roots.backward_error,
                jensen_residual(&s, 0.9)?,
                blaschke_sum(&roots)
            );
        }
        sets.push(roots);
    }
    let st = annulus_statistics(&sets, &[10, 20, 50, 100])?;
    for row in &st.rows {
        println!("s={:<4} median(1 - R_s) = {:.5}  scaled = {:.4}", row.s, row.median_one_minus_r, row.scaled_median);
    }
    println!("log-log slope against log(s)/s: {:.3}", st.slope);
    Ok(())
}
