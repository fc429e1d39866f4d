//! Concentration of ∫_I log|F_N| for Gaussian coefficients around
//! (|I|/2)·log ρ_N(r), and the pointwise tail of log W_z.
//!
//! cargo run --release --example log_concentration

use boundary_lab::functionals::{log_fluctuation_tail, log_integral_band, radius_for_rho};
use boundary_lab::{ArcSpec, CoeffLaw, LawSequence, Result};
use num_complex::Complex64;

fn main() -> Result<()> {
    let seq = LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 })?;
    let n = 200;
    let r = radius_for_rho(&seq, n, 4f64.exp())?;
    let ts: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
    let band = log_integral_band(&seq, n, r, ArcSpec::new(1.0, 2.0, 256)?, 200, &ts, 5)?;
    println!("r = {r:.6}, center = {:.4}, median = {:.4}, MAD = {:.4}", band.center, band.median, band.median_abs_dev);
    println!("tail at t=1: {:?}, fitted decay {:?}", band.freq_at(1.0), band.decay_rate);

    let tail = log_fluctuation_tail(&seq, Complex64::new(0.5, 0.0), 50, 100_000, &[1.0, 2.0, 4.0, 8.0], 1)?;
    println!("E W = {:.6}; P(|log W - log EW| > t) = {:?}; decay {:?}", tail.mean_w, tail.freq, tail.decay_rate);
    Ok(())
}
