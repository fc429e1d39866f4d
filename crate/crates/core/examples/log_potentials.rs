//! Logarithmic potentials of circular arcs: closed form, convergence along
//! approach paths and the factored check with a polynomial cofactor.
//!
//! cargo run --example log_potentials

use boundary_lab::potential::{case_two_check, log_integral_convergence, log_potential, Approach, CircleArc};
use boundary_lab::Result;
use num_complex::Complex64;

fn main() -> Result<()> {
    // full circle: ∫ log|e^{iθ} − z| dθ = 2π log max(1, |z|)
    for z in [Complex64::new(0.3, 0.1), Complex64::new(2.0, -1.0)] {
        println!("U_circle({z}) = {:.12}", log_potential(1.0, 0.0, std::f64::consts::TAU, z)?);
    }
    let arc = CircleArc::new(1.0, 1.0, 2.0)?;
    let z0 = arc.point(1.5);
    let ns = [1, 2, 4, 8, 16, 32, 64];
    for (name, rule) in [("radial", Approach::Radial), ("on-arc", Approach::OnArc), ("disk", Approach::RandomDisk { seed: 1 })] {
        let rep = log_integral_convergence(rule, z0, arc, &ns);
        let ds: Vec<String> = rep.deviations.iter().map(|d| format!("{d:.2e}")).collect();
        println!("{name:<7} d_n = {}", ds.join(" "));
    }
    let inner = CircleArc::new(0.8, 1.0, 2.0)?;
    let w0 = inner.point(1.5) * 0.99;
    let pts: Vec<Complex64> = ns.iter().map(|&n| Approach::Radial.point(w0, n)).collect();
    let gaps = case_two_check(&[2.0, 0.5, 0.1], w0, &pts, inner, 4096)?;
    println!("factored check, max discrepancy {:.2e}", gaps.iter().fold(0.0f64, |m, g| m.max(*g)));
    Ok(())
}
