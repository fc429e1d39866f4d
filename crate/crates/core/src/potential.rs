//! Logarithmic potentials of arc-length measure on circular arcs.
//!
//! For `z = ρe^{iτ}`, `R = max(r, ρ)` and `q = min(r, ρ)/R ≤ 1`,
//!
//! ```text
//! ∫_a^b log|re^{iθ} − z| dθ = (b − a)·log R − Im[Li₂(q e^{i(b−τ)}) − Li₂(q e^{i(a−τ)})]
//! ```
//!
//! which follows from `log|1 − w| = −Re Σ wⁿ/n` integrated term by term. The
//! series converges on the closed unit disk, so the formula stays exact when
//! `z` sits on the arc itself and the integrand has a log singularity.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand_distr::{Distribution, Uniform};

use crate::error::{LabError, Result};
use crate::functionals::log_arc_integral;
use crate::rng::Stream;
use crate::series::{horner, ArcSpec, Radius, SeriesSample};

const PI2_6: f64 = PI * PI / 6.0;

/// `B_{2k}` for `k = 1..=20`.
const BERNOULLI_EVEN: [f64; 20] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
    -7709321041217.0 / 510.0,
    2577687858367.0 / 6.0,
    -26315271553053477373.0 / 1919190.0,
    2929993913841559.0 / 6.0,
    -261082718496449122051.0 / 13530.0,
];

/// Dilogarithm on the closed unit disk.
pub fn dilog(w: Complex64) -> Complex64 {
    debug_assert!(w.norm() <= 1.0 + 1e-12, "dilog outside the unit disk: {w}");
    let one = Complex64::new(1.0, 0.0);
    if w.norm_sqr() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if (one - w).norm() < 1e-300 {
        return Complex64::new(PI2_6, 0.0);
    }
    if w.norm() <= 0.5 {
        return dilog_series(w);
    }
    if w.re <= 0.5 {
        return dilog_bernoulli(w);
    }
    // reflection: 1 − w lands in the region handled above
    let v = one - w;
    let lv = if v.norm() < 1e-300 { Complex64::new(0.0, 0.0) } else { w.ln() * v.ln() };
    Complex64::new(PI2_6, 0.0) - lv - dilog(v)
}

fn dilog_series(w: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut p = w;
    for n in 1..200 {
        let t = p / (n * n) as f64;
        sum += t;
        if t.norm() < 1e-18 * sum.norm() {
            break;
        }
        p *= w;
    }
    sum
}

/// `Li₂(w) = Σ B_n uⁿ⁺¹/(n+1)!` with `u = −log(1 − w)`, valid for `|u| < 2π`.
fn dilog_bernoulli(w: Complex64) -> Complex64 {
    let u = -(Complex64::new(1.0, 0.0) - w).ln();
    let u2 = u * u;
    // n = 0 and n = 1 terms
    let mut sum = u - u2 * 0.25;
    // u^{2k+1} / (2k+1)!
    let mut p = u;
    let mut fact = 1.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2 * (k + 1);
        p *= u2;
        fact *= (n * (n + 1)) as f64;
        let t = p * (b / fact);
        sum += t;
        if t.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

/// Clausen function `Cl₂(θ) = Σ sin(nθ)/n² = Im Li₂(e^{iθ})`.
pub fn clausen2(theta: f64) -> f64 {
    dilog(Complex64::from_polar(1.0, theta)).im
}

/// The arc `{re^{iθ} : a ≤ θ ≤ b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleArc {
    pub r: f64,
    pub a: f64,
    pub b: f64,
}

impl CircleArc {
    pub fn new(r: f64, a: f64, b: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(LabError::Precondition(format!("arc radius {r} must be positive")));
        }
        if !(a.is_finite() && b.is_finite() && b > a && b - a <= TAU + 1e-12) {
            return Err(LabError::Precondition(format!(
                "arc ({a}, {b}) must satisfy 0 < b - a <= 2π"
            )));
        }
        Ok(Self { r, a, b })
    }

    pub fn full(r: f64) -> Result<Self> {
        Self::new(r, 0.0, TAU)
    }

    pub fn point(&self, theta: f64) -> Complex64 {
        Complex64::from_polar(self.r, theta)
    }

    /// Distance from `z` to the arc.
    pub fn distance(&self, z: Complex64) -> f64 {
        let t = (z.arg() - self.a).rem_euclid(TAU);
        if t <= self.b - self.a {
            (z.norm() - self.r).abs()
        } else {
            (z - self.point(self.a)).norm().min((z - self.point(self.b)).norm())
        }
    }
}

/// An arc and an evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialQuery {
    pub arc: CircleArc,
    pub z: Complex64,
}

/// `∫_a^b log|re^{iθ} − z| dθ`, exact up to rounding for every `z`.
pub fn arc_log_potential(q: &PotentialQuery) -> f64 {
    let CircleArc { r, a, b } = q.arc;
    let rho = q.z.norm();
    if rho == 0.0 {
        return (b - a) * r.ln();
    }
    let big = r.max(rho);
    let ratio = r.min(rho) / big;
    let tau = q.z.arg();
    let hi = dilog(Complex64::from_polar(ratio, b - tau));
    let lo = dilog(Complex64::from_polar(ratio, a - tau));
    (b - a) * big.ln() - (hi - lo).im
}

/// Shorthand for [`arc_log_potential`].
pub fn log_potential(r: f64, a: f64, b: f64, z: Complex64) -> Result<f64> {
    Ok(arc_log_potential(&PotentialQuery { arc: CircleArc::new(r, a, b)?, z }))
}

/// How the moving points `z_n` approach `z_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Approach {
    /// `z_n = z_0`.
    Fixed,
    /// `z_n = (1 − 1/n)·z_0`.
    Radial,
    /// `z_n = z_0·e^{i/n}`, sliding along the circle.
    OnArc,
    /// `z_n` uniform in the disk of radius `1/n` around `z_0`.
    RandomDisk { seed: u64 },
}

impl Approach {
    pub fn point(&self, z0: Complex64, n: usize) -> Complex64 {
        let n = n.max(1) as f64;
        match *self {
            Approach::Fixed => z0,
            Approach::Radial => z0 * (1.0 - 1.0 / n),
            Approach::OnArc => z0 * Complex64::from_polar(1.0, 1.0 / n),
            Approach::RandomDisk { seed } => {
                let mut s = Stream::new(seed, n as u64, 0);
                let u: f64 = Uniform::new(0.0, 1.0).expect("unit interval").sample(&mut s);
                let phi: f64 = Uniform::new(0.0, TAU).expect("angle range").sample(&mut s);
                z0 + Complex64::from_polar(u.sqrt() / n, phi)
            }
        }
    }
}

/// Deviations `d_n = |U(z_n) − U(z_0)|` of the arc potential.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub ns: Vec<usize>,
    pub points: Vec<Complex64>,
    pub deviations: Vec<f64>,
}

impl ConvergenceReport {
    /// True when `d_n` ends below `tol` and never rises after first dropping below it.
    pub fn settles_below(&self, tol: f64) -> bool {
        match self.deviations.iter().position(|d| *d < tol) {
            Some(i) => self.deviations[i..].iter().all(|d| *d < tol),
            None => false,
        }
    }
}

pub fn log_integral_convergence(
    rule: Approach,
    z0: Complex64,
    arc: CircleArc,
    ns: &[usize],
) -> ConvergenceReport {
    let u0 = arc_log_potential(&PotentialQuery { arc, z: z0 });
    let points: Vec<Complex64> = ns.iter().map(|&n| rule.point(z0, n)).collect();
    let deviations = points
        .iter()
        .map(|&z| (arc_log_potential(&PotentialQuery { arc, z }) - u0).abs())
        .collect();
    ConvergenceReport { ns: ns.to_vec(), points, deviations }
}

/// The on-arc deviation via the rotation identity: sliding the root by `δ`
/// equals shifting the arc by `−δ`, so the difference reduces to the two
/// boundary strips `[a−δ, a]` and `[b−δ, b]`.
pub fn boundary_strip_deviation(arc: CircleArc, t0: f64, tn: f64) -> f64 {
    let z0 = arc.point(t0);
    let delta = tn - t0;
    let strip = |lo: f64, hi: f64| {
        if hi == lo {
            return 0.0;
        }
        let (lo, hi, sign) = if hi > lo { (lo, hi, 1.0) } else { (hi, lo, -1.0) };
        sign * arc_log_potential(&PotentialQuery { arc: CircleArc { r: arc.r, a: lo, b: hi }, z: z0 })
    };
    // ∫_{a−δ}^{b−δ} − ∫_a^b = ∫_{a−δ}^{a} − ∫_{b−δ}^{b}
    strip(arc.a - delta, arc.a) - strip(arc.b - delta, arc.b)
}

/// Factored check: for `f_n = (z − z_n)·g` with a zero-free `g`, the
/// quadrature difference `∫_I log|f_n| − ∫_I log|f|` must match the monomial
/// deviation `U(z_n) − U(z_0)`. Returns the absolute discrepancy for every `z_n`.
pub fn case_two_check(
    g: &[f64],
    z0: Complex64,
    points: &[Complex64],
    arc: CircleArc,
    m: usize,
) -> Result<Vec<f64>> {
    if g.is_empty() {
        return Err(LabError::DegreeZero);
    }
    // g must not vanish on a neighbourhood of the closed disk of radius r
    let probe = crate::roots::polynomial_roots(g);
    match probe {
        Ok(rs) => {
            if let Some(z) = rs.roots.iter().find(|z| z.norm() <= arc.r * 1.05) {
                return Err(LabError::Precondition(format!("g has a root {z} near the disk")));
            }
        }
        Err(LabError::DegreeZero) => {}
        Err(e) => return Err(e),
    }
    if horner(g, Complex64::new(0.0, 0.0)).norm() == 0.0 {
        return Err(LabError::Precondition("g vanishes at 0".into()));
    }
    let radius = Radius::new(arc.r)?;
    let spec = ArcSpec::new(arc.a, arc.b, m)?;
    let with_root = |w: Complex64| -> Result<f64> {
        // real coefficients need the conjugate pair: f = (z − w)(z − w̄)·g
        let quad = [w.norm_sqr(), -2.0 * w.re, 1.0];
        let coeffs = poly_mul(&quad, g);
        let r = log_arc_integral(&SeriesSample::from_coeffs(coeffs), radius, spec)?;
        Ok(r.value)
    };
    let u = |w: Complex64| arc_log_potential(&PotentialQuery { arc, z: w });
    let base = with_root(z0)? - u(z0) - u(z0.conj());
    points
        .iter()
        .map(|&w| {
            let diff = with_root(w)? - u(w) - u(w.conj());
            Ok((diff - base).abs())
        })
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
