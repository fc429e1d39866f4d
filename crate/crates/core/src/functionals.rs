//! Arc functionals of random power series: `∫_I ψ(|F|)`, growth profiles
//! along the radius schedule, Hardy-type circle means, boundary partial sums
//! and the root-aware integral of `log|F|`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::concentration::{AuxKind, AuxSeries};
use crate::error::{LabError, Result};
use crate::laws::{LawSequence, Weights};
use crate::potential::{arc_log_potential, CircleArc, PotentialQuery};
use crate::roots::{polynomial_roots, MAX_DEGREE};
use crate::series::{
    arc_values, arc_values_multi, evaluate_on_grid, horner, radius_schedule, truncation_order,
    ArcRequest, ArcSpec, ArcValues, CoeffSource, LazySeries, Radius, RadiusSchedule, SeriesSample,
};
use crate::stats;

/// Node values below this trigger the root-aware path for `log|F|`.
pub const LOG_SPLIT_THRESHOLD: f64 = 1e-12;
/// Minimum replicate count for growth profiles.
pub const MIN_REPLICATES: usize = 200;

/// A test function `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    /// `t^p`, `p > 0`.
    Power(f64),
    /// `max(log t, 0)`.
    LogPlus,
    /// `log t`. Not a test function; only the log-integral operations take it.
    SignedLog,
    /// Piecewise-linear through the knots, extended with the last slope.
    Custom(Tabulated),
}

/// Knots `(t_i, ψ_i)` with `t_0 = 0`, increasing `t`, nondecreasing `ψ ≥ 0`
/// and a positive final slope.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    ts: Vec<f64>,
    vals: Vec<f64>,
}

impl Tabulated {
    pub fn new(ts: Vec<f64>, vals: Vec<f64>) -> Result<Self> {
        let bad = |m: &str| Err(LabError::Precondition(format!("custom ψ: {m}")));
        if ts.len() != vals.len() || ts.len() < 2 {
            return bad("need at least two (t, ψ) knots of equal length");
        }
        if ts[0] != 0.0 {
            return bad("the first knot must be t = 0");
        }
        if ts.iter().chain(&vals).any(|v| !v.is_finite()) {
            return bad("knots must be finite");
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return bad("knots must be strictly increasing in t");
        }
        if vals[0] < 0.0 || vals.windows(2).any(|w| w[1] < w[0]) {
            return bad("values must be nonnegative and nondecreasing");
        }
        let n = ts.len();
        if vals[n - 1] <= vals[n - 2] {
            return bad("the last segment must increase so that ψ(t) → ∞");
        }
        Ok(Self { ts, vals })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        let i = self.ts.partition_point(|x| *x <= t).clamp(1, n - 1);
        let (t0, t1, v0, v1) = (self.ts[i - 1], self.ts[i], self.vals[i - 1], self.vals[i]);
        v0 + (t - t0) * (v1 - v0) / (t1 - t0)
    }
}

impl PsiSpec {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(LabError::Precondition(format!("power ψ needs p > 0, got {p}")));
        }
        Ok(PsiSpec::Power(p))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PsiSpec::Power(p) => {
                if *p == 1.0 {
                    t
                } else if *p == 2.0 {
                    t * t
                } else {
                    t.powf(*p)
                }
            }
            PsiSpec::LogPlus => {
                if t > 1.0 {
                    t.ln()
                } else {
                    0.0
                }
            }
            PsiSpec::SignedLog => t.ln(),
            PsiSpec::Custom(tab) => tab.eval(t),
        }
    }

    pub fn is_test_function(&self) -> bool {
        !matches!(self, PsiSpec::SignedLog)
    }

    /// `C` with `ψ(t+s) ≤ C[1 + ψ(t) + ψ(s)]`: `2^p` from `|z₁+z₂|^p ≤ 2^p(|z₁|^p+|z₂|^p)`,
    /// and `1` for `log⁺` since `log⁺(t+s) ≤ log 2 + log⁺t + log⁺s`.
    pub fn subadditivity_constant(&self) -> Option<f64> {
        match self {
            PsiSpec::Power(p) => Some(2f64.powf(*p)),
            PsiSpec::LogPlus => Some(1.0),
            _ => None,
        }
    }

    /// Largest `ψ(t+s) / (C[1+ψ(t)+ψ(s)])` over a log grid on `[0, 10⁶]²`.
    /// The certificate holds when the result is at most 1.
    pub fn subadditivity_ratio(&self) -> Option<f64> {
        let c = self.subadditivity_constant()?;
        let mut grid = vec![0.0];
        grid.extend((0..=120).map(|i| 10f64.powf(-6.0 + 0.1 * i as f64)));
        let mut worst = 0.0f64;
        for &t in &grid {
            for &s in &grid {
                let r = self.eval(t + s) / (c * (1.0 + self.eval(t) + self.eval(s)));
                worst = worst.max(r);
            }
        }
        Some(worst)
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiSpec::Power(p) => write!(f, "power({p})"),
            PsiSpec::LogPlus => f.write_str("log_plus"),
            PsiSpec::SignedLog => f.write_str("signed_log"),
            PsiSpec::Custom(t) => write!(f, "custom({} knots)", t.ts.len()),
        }
    }
}

impl FromStr for PsiSpec {
    type Err = LabError;
    /// `power(p)`, `log_plus` or `signed_log`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "log_plus" | "log+" => return Ok(PsiSpec::LogPlus),
            "signed_log" | "log" => return Ok(PsiSpec::SignedLog),
            "identity" => return Ok(PsiSpec::Power(1.0)),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("power(").and_then(|r| r.strip_suffix(')')) {
            let p: f64 = inner
                .trim()
                .parse()
                .map_err(|_| LabError::Config(format!("bad exponent in `{s}`")))?;
            return PsiSpec::power(p);
        }
        Err(LabError::Config(format!("unknown ψ `{s}`; expected power(p), log_plus or signed_log")))
    }
}

/// Result of a midpoint-plus-Richardson arc quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcIntegralResult {
    pub value: f64,
    /// True when `value` is the average over the arc rather than the integral.
    pub normalized: bool,
    /// Number of coarse panels.
    pub m: usize,
    pub error: f64,
    pub arc_length: f64,
    /// Nodes whose value had to be floored.
    pub floored_nodes: usize,
}

impl ArcIntegralResult {
    /// The slashed average `⨍_I`.
    pub fn normalize(self) -> Self {
        if self.normalized {
            return self;
        }
        Self {
            value: self.value / self.arc_length,
            error: self.error / self.arc_length,
            normalized: true,
            ..self
        }
    }
}

fn panel_count(v: &ArcValues) -> usize {
    v.layout.panels + usize::from(v.layout.tail > 0.0)
}

fn richardson(coarse: f64, fine: f64) -> (f64, f64) {
    ((4.0 * fine - coarse) / 3.0, (fine - coarse).abs() / 3.0)
}

fn integrate_values(v: &ArcValues, psi: &PsiSpec, arc: &ArcSpec) -> ArcIntegralResult {
    let (coarse, fine) = v.integrate(|z| psi.eval(z.norm()));
    let (value, error) = richardson(coarse, fine);
    ArcIntegralResult {
        value,
        normalized: false,
        m: panel_count(v),
        error,
        arc_length: arc.len(),
        floored_nodes: 0,
    }
}

/// `∫_I ψ(|F_N(re^{iθ})|) dθ`. For `signed_log` the root-aware path takes over
/// as soon as a node value drops below [`LOG_SPLIT_THRESHOLD`].
pub fn arc_integral(
    src: &dyn CoeffSource,
    radius: Radius,
    arc: ArcSpec,
    psi: &PsiSpec,
) -> Result<ArcIntegralResult> {
    let v = arc_values(src, radius, arc);
    if matches!(psi, PsiSpec::SignedLog) {
        let tiny = v
            .fine_nodes()
            .iter()
            .chain(&v.coarse_nodes())
            .any(|(_, _, z)| z.norm() < LOG_SPLIT_THRESHOLD);
        if tiny {
            return log_arc_integral(src, radius, arc);
        }
    }
    Ok(integrate_values(&v, psi, &arc))
}

/// Per-`k` summary of `Y_{I,r_k}` over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthRow {
    pub k: usize,
    pub radius: Radius,
    pub degree: usize,
    /// `A(r_k)`, the schedule target `k⁶`.
    pub a_value: f64,
    /// `ψ(k)`.
    pub threshold: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// `#{Y ≤ ψ(k)} / R`.
    pub small_ball: f64,
    /// 99% Wilson half-width of `small_ball`.
    pub small_ball_ci: f64,
    /// `f_k·√A(r_k) / k`.
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    pub schedule: RadiusSchedule,
    pub rows: Vec<GrowthRow>,
    /// `Y[k−1][replicate]`.
    pub samples: Vec<Vec<f64>>,
    pub replicates: usize,
    pub seed: u64,
    /// First `k` with `k ≥ sup_j t_j`.
    pub k_start: usize,
    /// `max ρ_k` over `k ≥ max(2, k_start)`.
    pub c_fit: f64,
}

impl GrowthProfile {
    /// Adjacent decreases of the median over `k ≥ 2`.
    pub fn median_violations(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| w[0].k >= 2 && w[1].median < w[0].median)
            .count()
    }
}

/// Settings for [`growth_profile_at`].
#[derive(Debug, Clone)]
pub struct GrowthSettings<'a> {
    pub arc: ArcSpec,
    pub psi: &'a PsiSpec,
    pub replicates: usize,
    pub seed: u64,
    pub truncation_tol: f64,
}

/// `Y_{I,r_k}` statistics along the schedule `A(r_k) = k⁶`.
pub fn snb_growth_profile(
    seq: &LawSequence,
    arc: ArcSpec,
    psi: &PsiSpec,
    k_max: usize,
    replicates: usize,
    seed: u64,
) -> Result<GrowthProfile> {
    let seq = with_default_weights(seq)?;
    let schedule = radius_schedule(&AuxSeries::new(AuxKind::A, seq.clone())?, k_max)?;
    let settings = GrowthSettings { arc, psi, replicates, seed, truncation_tol: 1e-6 };
    growth_profile_at(&seq, schedule, &settings)
}

/// Unit weights unless the sequence carries its own.
fn with_default_weights(seq: &LawSequence) -> Result<LawSequence> {
    match seq.weights {
        Some(_) => Ok(seq.clone()),
        None => seq.clone().with_weights(Weights::Constant(1.0)),
    }
}

/// Growth statistics on an explicit schedule.
pub fn growth_profile_at(
    seq: &LawSequence,
    schedule: RadiusSchedule,
    s: &GrowthSettings<'_>,
) -> Result<GrowthProfile> {
    if !s.psi.is_test_function() {
        return Err(LabError::Precondition(format!("{} is not a test function", s.psi)));
    }
    if s.replicates < MIN_REPLICATES {
        return Err(LabError::Precondition(format!(
            "growth profiles need at least {MIN_REPLICATES} replicates, got {}",
            s.replicates
        )));
    }
    let degrees = schedule
        .radii
        .iter()
        .map(|r| truncation_order(seq, *r, s.truncation_tol))
        .collect::<Result<Vec<_>>>()?;
    let n_max = degrees.iter().copied().max().unwrap_or(0);
    let reqs: Vec<ArcRequest> = schedule
        .radii
        .iter()
        .zip(&degrees)
        .map(|(r, n)| ArcRequest { radius: *r, arc: s.arc, degree: *n })
        .collect();
    let per_rep: Vec<Vec<f64>> = (0..s.replicates as u64)
        .into_par_iter()
        .map(|rep| -> Result<Vec<f64>> {
            let src = LazySeries::new(seq, n_max, s.seed, rep)?;
            Ok(arc_values_multi(&src, &reqs)
                .iter()
                .map(|v| integrate_values(v, s.psi, &s.arc).normalize().value)
                .collect())
        })
        .collect::<Result<_>>()?;
    let sup_t = seq.weights.as_ref().map_or(1.0, |w| w.sup());
    let k_start = (sup_t.ceil() as usize).max(1);
    let mut rows = Vec::with_capacity(schedule.len());
    let mut samples = Vec::with_capacity(schedule.len());
    for (i, (radius, degree)) in schedule.radii.iter().zip(&degrees).enumerate() {
        let k = i + 1;
        let raw: Vec<f64> = per_rep.iter().map(|v| v[i]).collect();
        let ys = stats::sorted(&raw);
        let threshold = s.psi.eval(k as f64);
        let hits = ys.iter().filter(|y| **y <= threshold).count();
        let f = hits as f64 / s.replicates as f64;
        let a_value = schedule.targets[i];
        rows.push(GrowthRow {
            k,
            radius: *radius,
            degree: *degree,
            a_value,
            threshold,
            median: stats::quantile_sorted(&ys, 0.5),
            q1: stats::quantile_sorted(&ys, 0.25),
            q3: stats::quantile_sorted(&ys, 0.75),
            small_ball: f,
            small_ball_ci: stats::wilson_half_width(hits as u64, s.replicates as u64),
            rho: f * a_value.sqrt() / k as f64,
        });
        samples.push(raw);
    }
    let c_fit = rows.iter().filter(|r| r.k >= k_start.max(2)).map(|r| r.rho).fold(0.0, f64::max);
    Ok(GrowthProfile { schedule, rows, samples, replicates: s.replicates, seed: s.seed, k_start, c_fit })
}

/// `(1/2π)∫|F(re^{iθ})|^p dθ` at each radius of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyEstimate {
    pub radii: Vec<f64>,
    pub means: Vec<f64>,
    /// `max` over the grid.
    pub value: f64,
    /// Means nondecreasing along increasing radii (subharmonicity).
    pub monotone: bool,
}

pub fn hardy_norm_estimate(src: &dyn CoeffSource, p: f64, radii: &[f64]) -> Result<HardyEstimate> {
    if !(p > 0.0) {
        return Err(LabError::Precondition(format!("exponent {p} must be positive")));
    }
    if radii.is_empty() {
        return Err(LabError::Precondition("empty radius grid".into()));
    }
    let n = src.degree();
    // trapezoid on the circle is exact for p = 2 once m > N and spectrally accurate otherwise
    let m = (4 * (n + 1)).next_power_of_two().clamp(256, 1 << 22);
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|a, b| radii[*a].total_cmp(&radii[*b]));
    let mut means = vec![0.0; radii.len()];
    for &i in &order {
        let r = Radius::for_polynomial(radii[i])?;
        let vals = evaluate_on_grid(src, r, 0.0, m);
        means[i] = stats::sum(vals.iter().map(|z| z.norm().powf(p))) / m as f64;
    }
    let sorted_means: Vec<f64> = order.iter().map(|&i| means[i]).collect();
    let monotone = sorted_means.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let value = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(HardyEstimate { radii: radii.to_vec(), means, value, monotone })
}

/// Running maxima of boundary partial sums and the Abel domination check.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSupReport {
    /// `M_N = max_{m ≤ N} |Σ_{k ≤ m} X_k e^{ikθ}|`.
    pub running_max: Vec<f64>,
    /// `min (M_N − |F_N(te^{iθ})|)` over the `t` grid and all `N`.
    pub abel_slack: f64,
    pub abel_holds: bool,
}

pub fn boundary_partial_sup(coeffs: &[f64], theta: f64, n_max: usize) -> Result<PartialSupReport> {
    if n_max < 1 {
        return Err(LabError::Precondition("N_max must be at least 1".into()));
    }
    if coeffs.is_empty() {
        return Err(LabError::EmptySample);
    }
    let n = n_max.min(coeffs.len() - 1);
    let e = Complex64::from_polar(1.0, theta);
    let mut ts: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
    ts.extend((5..=20).map(|j| 1.0 - 2f64.powi(-j)));
    let mut sums = vec![Complex64::new(0.0, 0.0); ts.len()];
    let mut pows = vec![Complex64::new(1.0, 0.0); ts.len()];
    let mut boundary = Complex64::new(0.0, 0.0);
    let mut epow = Complex64::new(1.0, 0.0);
    let mut running = Vec::with_capacity(n + 1);
    let mut m = 0.0f64;
    let mut slack = f64::INFINITY;
    for (k, &c) in coeffs[..=n].iter().enumerate() {
        // recompute the unimodular power periodically to stop drift
        if k % 1024 == 0 {
            epow = Complex64::from_polar(1.0, crate::series::reduced_angle(k as f64, theta));
        }
        boundary += epow * c;
        m = m.max(boundary.norm());
        running.push(m);
        for ((acc, pw), t) in sums.iter_mut().zip(pows.iter_mut()).zip(&ts) {
            *acc += *pw * c;
            *pw *= e * *t;
            slack = slack.min(m - acc.norm());
        }
        epow *= e;
    }
    let scale = m.max(1.0);
    Ok(PartialSupReport { running_max: running, abel_slack: slack, abel_holds: slack >= -1e-9 * scale })
}

/// `∫_I log|F_N(re^{iθ})| dθ` with roots within `10·h` of the arc split off
/// and integrated exactly.
pub fn log_arc_integral(src: &dyn CoeffSource, radius: Radius, arc: ArcSpec) -> Result<ArcIntegralResult> {
    if !(radius.r() > 0.0) {
        return Err(LabError::RadiusOutOfRange(radius.r()));
    }
    let n = src.degree();
    let mut coeffs = vec![0.0; n + 1];
    src.fill(0, &mut coeffs);
    let v = arc_values(&coeffs, radius, arc);
    let h = v.layout.h;
    let circle = CircleArc { r: radius.r(), a: arc.a, b: arc.b };
    let mut near: Vec<Complex64> = Vec::new();
    let has_roots = coeffs.iter().skip(1).any(|c| *c != 0.0);
    let root_aware = has_roots && n <= MAX_DEGREE;
    if root_aware {
        let rs = polynomial_roots(&coeffs)?;
        near = rs.roots.into_iter().filter(|z| circle.distance(*z) < 10.0 * h).collect();
    }
    let deriv: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
    // log|G| at a node sitting on a split root: G(z_j) = F'(z_j) / Π_{i≠j} (z_j − z_i)
    let log_g_at_root = |j: usize| -> f64 {
        let zj = near[j];
        let rest: f64 =
            near.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, z)| (zj - z).norm().ln()).sum();
        horner(&deriv, zj).norm().ln() - rest
    };
    let mut floored = 0usize;
    let mut smooth = |nodes: Vec<(f64, f64, Complex64)>| -> f64 {
        let mut acc = stats::KahanSum::new();
        for (theta, w, val) in nodes {
            let p = circle.point(theta);
            if let Some(j) = near.iter().position(|z| (p - z).norm() < 1e-10 * circle.r) {
                acc.add(w * log_g_at_root(j));
                continue;
            }
            let mut a = val.norm();
            if a < f64::MIN_POSITIVE {
                a = if root_aware { f64::MIN_POSITIVE } else { LOG_SPLIT_THRESHOLD };
                floored += 1;
            } else if !root_aware && a < LOG_SPLIT_THRESHOLD {
                a = LOG_SPLIT_THRESHOLD;
                floored += 1;
            }
            let split: f64 = near.iter().map(|z| (p - z).norm().ln()).sum();
            acc.add(w * (a.ln() - split));
        }
        acc.value()
    };
    let coarse = smooth(v.coarse_nodes());
    let fine = smooth(v.fine_nodes());
    let (mut value, error) = richardson(coarse, fine);
    for z in &near {
        value += arc_log_potential(&PotentialQuery { arc: circle, z: *z });
    }
    Ok(ArcIntegralResult {
        value,
        normalized: false,
        m: panel_count(&v),
        error,
        arc_length: arc.len(),
        floored_nodes: floored,
    })
}

/// Empirical tail of `|log W_z − log E W_z|` with `W_z = |F_N(z)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationTail {
    pub mean_w: f64,
    pub ts: Vec<f64>,
    pub freq: Vec<f64>,
    pub ci: Vec<f64>,
    /// `ĉ` from `log P̂(t) ≈ log C − ĉ t` over points with at least 5 hits.
    pub decay_rate: Option<f64>,
    pub replicates: usize,
}

impl FluctuationTail {
    pub fn freq_at(&self, t: f64) -> Option<f64> {
        self.ts.iter().position(|x| (*x - t).abs() < 1e-12).map(|i| self.freq[i])
    }
}

/// `E W_z = Σ |z|^{2k} E[X_k²]`.
pub fn expected_w(seq: &LawSequence, z: Complex64, n: usize) -> Result<f64> {
    let x = z.norm_sqr();
    let mut acc = stats::KahanSum::new();
    let mut p = 1.0;
    for k in 0..=n as u64 {
        let m = seq.law_at(k)?.exact_moments()?;
        acc.add(p * (m.variance + m.mean * m.mean));
        p *= x;
    }
    Ok(acc.value())
}

pub fn log_fluctuation_tail(
    seq: &LawSequence,
    z: Complex64,
    n: usize,
    replicates: usize,
    ts: &[f64],
    seed: u64,
) -> Result<FluctuationTail> {
    if replicates == 0 {
        return Err(LabError::Precondition("need at least one replicate".into()));
    }
    let check_to = if seq.is_stationary() { 0 } else { n };
    for k in 0..=check_to {
        if seq.law_at(k as u64)?.density_bound().is_none() {
            return Err(LabError::MissingDensityBound(k));
        }
    }
    let mean_w = expected_w(seq, z, n)?;
    let log_mean = mean_w.ln();
    let devs: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let coeffs = LazySeries::new(seq, n, seed, rep)?.materialize();
            let w = horner(&coeffs, z).norm_sqr();
            Ok((w.ln() - log_mean).abs())
        })
        .collect::<Result<_>>()?;
    let (freq, ci, decay_rate) = tail_curve(&devs, ts);
    Ok(FluctuationTail { mean_w, ts: ts.to_vec(), freq, ci, decay_rate, replicates })
}

/// Exceedance frequencies of `devs` on `ts`, with 99% Wilson half-widths
/// and the log-linear decay rate fitted over points with at least 5 hits.
fn tail_curve(devs: &[f64], ts: &[f64]) -> (Vec<f64>, Vec<f64>, Option<f64>) {
    let n = devs.len() as u64;
    let mut freq = Vec::with_capacity(ts.len());
    let mut ci = Vec::with_capacity(ts.len());
    let mut fit_x = Vec::new();
    let mut fit_y = Vec::new();
    for &t in ts {
        let hits = devs.iter().filter(|d| **d > t).count() as u64;
        let f = hits as f64 / n as f64;
        freq.push(f);
        ci.push(stats::wilson_half_width(hits, n));
        if hits >= 5 {
            fit_x.push(t);
            fit_y.push(f.ln());
        }
    }
    let decay_rate = (fit_x.len() >= 2).then(|| -stats::linear_fit(&fit_x, &fit_y).0);
    (freq, ci, decay_rate)
}

/// Spread of `∫_I log|F_N(re^{iθ})| dθ` around `(|I|/2)·log ρ_N(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogBand {
    pub radius: f64,
    /// `(|I|/2)·log ρ_N(r)`.
    pub center: f64,
    /// One integral per replicate, in replicate order.
    pub values: Vec<f64>,
    pub median: f64,
    /// Median of `|value − center|`.
    pub median_abs_dev: f64,
    pub ts: Vec<f64>,
    /// `P̂(|value − center| > t)`.
    pub freq: Vec<f64>,
    pub ci: Vec<f64>,
    pub decay_rate: Option<f64>,
}

impl LogBand {
    pub fn freq_at(&self, t: f64) -> Option<f64> {
        self.ts.iter().position(|x| (*x - t).abs() < 1e-12).map(|i| self.freq[i])
    }
}

pub fn log_integral_band(
    seq: &LawSequence,
    n: usize,
    r: f64,
    arc: ArcSpec,
    replicates: usize,
    ts: &[f64],
    seed: u64,
) -> Result<LogBand> {
    if replicates == 0 {
        return Err(LabError::Precondition("need at least one replicate".into()));
    }
    let radius = Radius::new(r)?;
    let center = 0.5 * arc.len() * rho_n(seq, r, n)?.ln();
    let values: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| -> Result<f64> {
            let s = SeriesSample::from_coeffs(LazySeries::new(seq, n, seed, rep)?.materialize());
            Ok(log_arc_integral(&s, radius, arc)?.value)
        })
        .collect::<Result<_>>()?;
    let devs: Vec<f64> = values.iter().map(|v| (v - center).abs()).collect();
    let (freq, ci, decay_rate) = tail_curve(&devs, ts);
    Ok(LogBand {
        radius: r,
        center,
        median: stats::median(&values),
        median_abs_dev: stats::median(&devs),
        values,
        ts: ts.to_vec(),
        freq,
        ci,
        decay_rate,
    })
}

/// `ρ_N(r) = Σ_{k ≤ N} r^{2k} E[X_k²]`.
pub fn rho_n(seq: &LawSequence, r: f64, n: usize) -> Result<f64> {
    expected_w(seq, Complex64::new(r, 0.0), n)
}

/// Radius with `ρ_N(r) = target`, by bisection.
pub fn radius_for_rho(seq: &LawSequence, n: usize, target: f64) -> Result<f64> {
    let full = rho_n(seq, 1.0, n)?;
    let at0 = rho_n(seq, 0.0, n)?;
    if !(target > at0 && target < full) {
        return Err(LabError::Precondition(format!(
            "ρ_N ranges over ({at0}, {full}) on (0, 1); target {target} is outside"
        )));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if rho_n(seq, mid, n)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Full-circle helper used by Jensen-type checks.
pub fn circle_log_mean(src: &dyn CoeffSource, radius: Radius, m: usize) -> Result<f64> {
    Ok(log_arc_integral(src, radius, ArcSpec::full_circle(m)?)?.value / TAU)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::CoeffLaw;
    use crate::series::sample_series;
    use std::f64::consts::PI;

    fn arc(a: f64, b: f64, m: usize) -> ArcSpec {
        ArcSpec::new(a, b, m).unwrap()
    }

    #[test]
    fn psi_shapes() {
        assert_eq!(PsiSpec::LogPlus.eval(0.5), 0.0);
        assert!((PsiSpec::LogPlus.eval(std::f64::consts::E) - 1.0).abs() < 1e-15);
        assert_eq!(PsiSpec::Power(2.0).eval(3.0), 9.0);
        let c = PsiSpec::Custom(Tabulated::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 1.0]).unwrap());
        assert_eq!(c.eval(0.5), 0.0);
        assert_eq!(c.eval(4.0), 3.0);
        assert!(Tabulated::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(!PsiSpec::SignedLog.is_test_function());
        assert_eq!("power(1.5)".parse::<PsiSpec>().unwrap(), PsiSpec::Power(1.5));
        assert!("power(-1)".parse::<PsiSpec>().is_err());
        for psi in [PsiSpec::Power(0.5), PsiSpec::Power(1.0), PsiSpec::Power(3.0), PsiSpec::LogPlus] {
            let r = psi.subadditivity_ratio().unwrap();
            assert!(r <= 1.0, "{psi}: {r}");
        }
    }

    #[test]
    fn trivial_arc_integrals() {
        let one = vec![1.0];
        let r = Radius::new(0.7).unwrap();
        let v = arc_integral(&one, r, arc(0.0, PI, 64), &PsiSpec::LogPlus).unwrap();
        assert_eq!(v.value, 0.0);
        let v = arc_integral(&one, r, arc(0.0, PI, 64), &PsiSpec::Power(2.0)).unwrap();
        assert!((v.value - PI).abs() < 1e-13);
        assert!((v.normalize().value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn geometric_series_near_the_pole() {
        let seq = LawSequence::iid(CoeffLaw::Deterministic { c: 1.0 }).unwrap();
        let r = Radius::new(0.99).unwrap();
        let n = truncation_order(&seq, r, 1e-6).unwrap();
        let ones = vec![1.0; n + 1];
        let (a, b) = (TAU - 0.1, TAU + 0.1);
        let got = arc_integral(&ones, r, arc(a, b, 256), &PsiSpec::Power(1.0)).unwrap();
        let m = 1usize << 20;
        let h = 0.2 / m as f64;
        let oracle: f64 = (0..m)
            .map(|j| {
                let t = -0.1 + (j as f64 + 0.5) * h;
                1.0 / (Complex64::new(1.0, 0.0) - Complex64::from_polar(0.99, t)).norm()
            })
            .sum::<f64>()
            * h;
        assert!((got.value - oracle).abs() < 0.02 * oracle, "{} vs {oracle}", got.value);
    }

    #[test]
    fn richardson_estimate_is_honest() {
        let s = sample_series(&LawSequence::iid(CoeffLaw::Rademacher).unwrap(), 60, 5, 0).unwrap();
        let r = Radius::new(0.8).unwrap();
        let a = arc_integral(&s, r, arc(0.5, 2.0, 32), &PsiSpec::Power(2.0)).unwrap();
        let b = arc_integral(&s, r, arc(0.5, 2.0, 64), &PsiSpec::Power(2.0)).unwrap();
        assert!((a.value - b.value).abs() <= 4.0 * a.error.max(1e-13));
    }

    #[test]
    fn log_integral_examples() {
        let r = Radius::new(0.6).unwrap();
        let v = log_arc_integral(&vec![1.0], r, arc(0.0, PI, 64)).unwrap();
        assert_eq!(v.value, 0.0);
        // a root exactly on the circle at the arc midpoint
        let z0 = Complex64::from_polar(0.6, PI);
        let lin = [-z0.re, 1.0];
        let v = log_arc_integral(&lin.to_vec(), r, ArcSpec::full_circle(1024).unwrap()).unwrap();
        assert!((v.value - TAU * 0.6f64.ln()).abs() < 1e-10, "{}", v.value);
        // signed-log arc integral routes through the split when a node hits a root
        let full = ArcSpec::full_circle(1024).unwrap();
        let theta = arc_values(&vec![1.0], r, full).coarse_nodes()[300].0;
        let z1 = Complex64::from_polar(0.6, theta);
        let quad = vec![z1.norm_sqr(), -2.0 * z1.re, 1.0];
        let v2 = arc_integral(&quad, r, full, &PsiSpec::SignedLog).unwrap();
        assert!((v2.value - 2.0 * TAU * 0.6f64.ln()).abs() < 1e-9, "{}", v2.value);
    }

    #[test]
    fn deterministic_zero_profile_is_flat() {
        let seq = LawSequence::iid(CoeffLaw::Deterministic { c: 0.0 }).unwrap();
        let radii: Vec<Radius> = [0.5, 0.9, 0.99].iter().map(|r| Radius::new(*r).unwrap()).collect();
        let schedule = RadiusSchedule { radii, targets: vec![1.0, 64.0, 729.0], tolerance: 0.0 };
        let psi = PsiSpec::Power(1.0);
        let s = GrowthSettings { arc: arc(1.0, 2.0, 64), psi: &psi, replicates: 200, seed: 1, truncation_tol: 1e-6 };
        let p = growth_profile_at(&seq, schedule, &s).unwrap();
        assert!(p.samples.iter().flatten().all(|y| *y == 0.0));
        assert!(p.rows.iter().all(|r| r.small_ball == 1.0));
    }

    #[test]
    fn unreachable_schedule_propagates() {
        let seq = LawSequence::iid(CoeffLaw::Deterministic { c: 0.0 }).unwrap();
        let e = snb_growth_profile(&seq, arc(1.0, 2.0, 64), &PsiSpec::Power(1.0), 3, 200, 0).unwrap_err();
        assert!(matches!(e, LabError::ScheduleUnreachable(_)));
    }

    #[test]
    fn hardy_examples() {
        let h = hardy_norm_estimate(&vec![1.0], 2.0, &[0.3, 0.9]).unwrap();
        assert!(h.means.iter().all(|m| (m - 1.0).abs() < 1e-14));
        let geo: Vec<f64> = (0..60).map(|k| 0.5f64.powi(k)).collect();
        let h = hardy_norm_estimate(&geo, 4.0, &[0.5, 0.9, 0.999]).unwrap();
        assert!(h.monotone);
    }

    #[test]
    fn partial_sup_examples() {
        let mut c = vec![0.0; 50];
        c[0] = 1.0;
        let p = boundary_partial_sup(&c, 0.3, 49).unwrap();
        assert!(p.running_max.iter().all(|m| *m == 1.0) && p.abel_holds);
        let p = boundary_partial_sup(&vec![1.0; 101], PI, 100).unwrap();
        assert!(p.running_max.iter().all(|m| (m - 1.0).abs() < 1e-12));
        assert!(p.abel_holds);
        assert!(boundary_partial_sup(&c, 0.0, 0).is_err());
    }

    #[test]
    fn fluctuation_examples() {
        let point = LawSequence::iid(CoeffLaw::Deterministic { c: 1.0 }).unwrap();
        let e = log_fluctuation_tail(&point, Complex64::new(0.5, 0.0), 10, 10, &[1.0], 0).unwrap_err();
        assert_eq!(e, LabError::MissingDensityBound(0));
        let g = LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 }).unwrap();
        let ew = expected_w(&g, Complex64::new(0.5, 0.0), 50).unwrap();
        assert!((ew - (1.0 - 0.25f64.powi(51)) / 0.75).abs() < 1e-14);
        let ts: Vec<f64> = (0..=10).map(f64::from).collect();
        let tail = log_fluctuation_tail(&g, Complex64::new(0.5, 0.0), 50, 20_000, &ts, 3).unwrap();
        assert!(tail.freq_at(8.0).unwrap() <= 0.02);
        assert!(tail.decay_rate.unwrap() > 0.1);
    }

    #[test]
    fn log_band_tracks_half_log_rho() {
        let g = LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 }).unwrap();
        let ts: Vec<f64> = (1..=16).map(|i| i as f64 * 0.5).collect();
        let band = log_integral_band(&g, 200, 0.99, arc(1.0, 2.0, 256), 200, &ts, 9).unwrap();
        assert_eq!(band.values.len(), 200);
        assert!(band.median_abs_dev <= 8.0, "{band:?}");
        assert!(band.freq_at(8.0).unwrap() <= 0.05);
    }

    #[test]
    fn rho_inversion() {
        let g = LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 }).unwrap();
        let r = radius_for_rho(&g, 200, 4f64.exp()).unwrap();
        assert!((rho_n(&g, r, 200).unwrap() - 4f64.exp()).abs() < 1e-9);
    }
}
