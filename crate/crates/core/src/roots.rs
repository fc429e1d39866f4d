//! Polynomial roots and the statistics built on them.
//!
//! Small degrees go through companion-matrix eigenvalues; large degrees use
//! Aberth–Ehrlich iteration started from Newton-polygon radii, because the
//! dense eigen solver is cubic. Either way the roots are finished with a few
//! damped Newton steps on the original coefficients.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::functionals::log_arc_integral;
use crate::series::{horner, ArcSpec, Radius, SeriesSample};
use crate::stats;

/// Largest degree handed to the dense eigen solver.
pub const COMPANION_MAX_DEGREE: usize = 256;
/// Hard cap on supported degrees.
pub const MAX_DEGREE: usize = 8192;

/// Roots of one polynomial, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// `max_j |F(z_j)|` after polishing.
    pub residual: f64,
    /// `max_j |F(z_j)| / Σ_k |a_k||z_j|^k`.
    pub backward_error: f64,
    /// Degree of the input before deflation.
    pub degree: usize,
}

impl RootSet {
    pub fn moduli_sorted(&self) -> Vec<f64> {
        stats::sorted(&self.roots.iter().map(|z| z.norm()).collect::<Vec<_>>())
    }
}

/// `p(z)`, `p'(z)` and `Σ|a_k||z|^k`, evaluated through the reversed
/// polynomial when `|z| > 1` to keep magnitudes bounded.
fn eval_newton(coeffs: &[f64], z: Complex64) -> (Complex64, f64) {
    // returns (p/p', |p| / Σ|a_k||z|^k)
    let n = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        let az = z.norm();
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
            scale = scale * az + c.abs();
        }
        (p / dp, p.norm() / scale.max(f64::MIN_POSITIVE))
    } else {
        let w = z.inv();
        let aw = w.norm();
        let mut q = Complex64::new(0.0, 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for &c in coeffs.iter() {
            dq = dq * w + q;
            q = q * w + c;
            scale = scale * aw + c.abs();
        }
        // p(z) = zⁿ q(w), p'(z) = zⁿ⁻¹ (n q − w q')
        let ratio = z * q / (q * n as f64 - w * dq);
        (ratio, q.norm() / scale.max(f64::MIN_POSITIVE))
    }
}

/// All complex roots of `Σ coeffs[k] z^k`.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<RootSet> {
    let degree = coeffs.len().saturating_sub(1);
    let top = coeffs.iter().rposition(|c| *c != 0.0).ok_or(LabError::DegreeZero)?;
    let low = coeffs.iter().position(|c| *c != 0.0).unwrap_or(0);
    if top == 0 {
        return Err(LabError::DegreeZero);
    }
    if coeffs[..=top].iter().any(|c| !c.is_finite()) {
        return Err(LabError::RootFinder("non-finite coefficient".into()));
    }
    if top > MAX_DEGREE {
        return Err(LabError::RootFinder(format!("degree {top} exceeds the cap {MAX_DEGREE}")));
    }
    // exact zeros at the origin, then the reduced polynomial
    let core = &coeffs[low..=top];
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    let n = core.len() - 1;
    let found = match n {
        0 => vec![],
        1 => vec![Complex64::new(-core[0] / core[1], 0.0)],
        2 => quadratic(core),
        _ if n <= COMPANION_MAX_DEGREE => companion_roots(core)?,
        _ => aberth(core)?,
    };
    let mut residual = 0.0f64;
    let mut backward = 0.0f64;
    for z in found {
        let z = polish(core, z);
        residual = residual.max((horner(core, z) * z.powu(low as u32)).norm());
        backward = backward.max(eval_newton(core, z).1);
        roots.push(z);
    }
    roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
    Ok(RootSet { roots, residual, backward_error: backward, degree })
}

fn quadratic(c: &[f64]) -> Vec<Complex64> {
    let (a, b, cc) = (c[2], c[1], c[0]);
    let disc = Complex64::new(b * b - 4.0 * a * cc, 0.0).sqrt();
    // stable form: avoid cancellation in −b ± √disc
    let s = if b >= 0.0 { -(Complex64::new(b, 0.0) + disc) } else { -(Complex64::new(b, 0.0) - disc) };
    let q = s * 0.5;
    if q.norm() == 0.0 {
        return vec![Complex64::new(0.0, 0.0); 2];
    }
    vec![q / a, Complex64::new(cc, 0.0) / q]
}

fn companion_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let ev = m.complex_eigenvalues();
    let out: Vec<Complex64> = ev.iter().map(|z| Complex64::new(z.re, z.im)).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LabError::RootFinder("eigen solver returned non-finite values".into()));
    }
    Ok(out)
}

/// Initial radii from the upper convex hull of `(k, log|a_k|)`.
fn newton_polygon_guesses(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let pts: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(k, a)| (k as f64, a.abs().ln()))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    for w in hull.windows(2) {
        let (k0, l0) = w[0];
        let (k1, l1) = w[1];
        let cnt = (k1 - k0) as usize;
        let rad = ((l0 - l1) / (k1 - k0)).exp();
        for j in 0..cnt {
            let phi = TAU * j as f64 / cnt as f64 + TAU * k1 / n as f64 + 0.4;
            out.push(Complex64::from_polar(rad, phi));
        }
    }
    out
}

fn aberth(c: &[f64]) -> Result<Vec<Complex64>> {
    let n = c.len() - 1;
    let mut z = newton_polygon_guesses(c);
    debug_assert_eq!(z.len(), n);
    let mut done = vec![false; n];
    let eps = 4.0 * f64::EPSILON;
    for _ in 0..500 {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (ratio, berr) = eval_newton(c, z[i]);
            if berr <= eps * n as f64 || !ratio.re.is_finite() {
                done[i] = true;
                continue;
            }
            all = false;
            let zi = z[i];
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    s += (zi - zj).inv();
                }
            }
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] = zi - step;
                if step.norm() <= eps * zi.norm() {
                    done[i] = true;
                }
            }
        }
        if all {
            return Ok(z);
        }
    }
    let unconverged = done.iter().filter(|d| !**d).count();
    if unconverged * 100 > n {
        return Err(LabError::RootFinder(format!(
            "Aberth iteration left {unconverged} of {n} roots unconverged"
        )));
    }
    Ok(z)
}

/// Damped Newton: accept a step only when it reduces the backward error.
fn polish(c: &[f64], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (ratio, berr) = eval_newton(c, z);
        if berr == 0.0 || !ratio.re.is_finite() || !ratio.im.is_finite() {
            break;
        }
        let mut step = ratio;
        let mut improved = false;
        for _ in 0..4 {
            let cand = z - step;
            if eval_newton(c, cand).1 < berr {
                z = cand;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    z
}

/// Jensen check: the circle mean of `log|F|` against `log|F(0)|` plus the
/// root sum. When `F` vanishes to order `m` at the origin, `F = z^m G` and
/// the right-hand side becomes `m·log r + log|G(0)| + Σ_{0<|z_j|<r} log(r/|z_j|)`.
pub fn jensen_residual(s: &SeriesSample, r: f64) -> Result<f64> {
    let radius = Radius::for_polynomial(r)?;
    let coeffs = &s.coeffs;
    let low = coeffs.iter().position(|c| *c != 0.0).ok_or(LabError::DegreeZero)?;
    let rhs = if coeffs[low..].iter().skip(1).all(|c| *c == 0.0) {
        low as f64 * r.ln() + coeffs[low].abs().ln()
    } else {
        let rs = polynomial_roots(coeffs)?;
        if rs.roots.iter().any(|z| (z.norm() - r).abs() < 1e-9) {
            return Err(LabError::RootOnCircle(r));
        }
        let inside: f64 = rs
            .roots
            .iter()
            .filter(|z| z.norm() > 0.0 && z.norm() < r)
            .map(|z| (r / z.norm()).ln())
            .sum();
        low as f64 * r.ln() + coeffs[low].abs().ln() + inside
    };
    let m = (8 * coeffs.len()).clamp(1024, 1 << 16);
    let lhs = log_arc_integral(s, radius, ArcSpec::full_circle(m)?)?.value / TAU;
    Ok((lhs - rhs).abs())
}

/// `R_s` over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusRow {
    pub s: usize,
    /// `1 − R_s` per replicate.
    pub one_minus_r: Vec<f64>,
    pub median_one_minus_r: f64,
    /// `median(1 − R_s)·s / log s`.
    pub scaled_median: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusStats {
    pub rows: Vec<AnnulusRow>,
    /// Fit of `log median(1 − R_s)` against `log(log s / s)`.
    pub slope: f64,
    pub intercept: f64,
}

/// `R_s` sits just below the `(s+1)`-th smallest root modulus above 1/2.
pub fn annulus_radius(rs: &RootSet, s: usize) -> Result<f64> {
    let mods: Vec<f64> = rs.moduli_sorted().into_iter().filter(|m| *m > 0.5).collect();
    if mods.len() < s + 1 {
        return Err(LabError::InsufficientRoots { needed: s + 1, found: mods.len() });
    }
    Ok((mods[s] - 1e-12).min(1.0))
}

pub fn annulus_statistics(sets: &[RootSet], s_grid: &[usize]) -> Result<AnnulusStats> {
    if sets.is_empty() || s_grid.is_empty() {
        return Err(LabError::Precondition("need root sets and an s grid".into()));
    }
    let mut rows = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        if s < 2 {
            return Err(LabError::Precondition(format!("s = {s} must be at least 2")));
        }
        let one_minus_r = sets
            .iter()
            .map(|rs| annulus_radius(rs, s).map(|r| 1.0 - r))
            .collect::<Result<Vec<_>>>()?;
        let med = stats::median(&one_minus_r);
        let sf = s as f64;
        rows.push(AnnulusRow { s, scaled_median: med * sf / sf.ln(), median_one_minus_r: med, one_minus_r });
    }
    let x: Vec<f64> = rows.iter().map(|r| ((r.s as f64).ln() / r.s as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.median_one_minus_r.ln()).collect();
    let (slope, intercept) = if rows.len() >= 2 { stats::linear_fit(&x, &y) } else { (f64::NAN, f64::NAN) };
    Ok(AnnulusStats { rows, slope, intercept })
}

/// `Σ (1 − |z_j|)` over roots in the open unit disk.
pub fn blaschke_sum(rs: &RootSet) -> f64 {
    stats::sum(rs.roots.iter().map(|z| z.norm()).filter(|m| *m < 1.0).map(|m| 1.0 - m))
}

/// Blaschke sum of the `w`-points: roots of `F − w`. Only real `w` keeps the
/// coefficients real, which is all the root finder supports.
pub fn blaschke_sum_at(coeffs: &[f64], w: f64) -> Result<f64> {
    let mut c = coeffs.to_vec();
    if let Some(c0) = c.first_mut() {
        *c0 -= w;
    }
    Ok(blaschke_sum(&polynomial_roots(&c)?))
}
