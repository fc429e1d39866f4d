//! Coefficient distributions with exact analytics, and indexed families of them.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{LabError, Result};
use crate::expr::Expr;
use crate::rng::Stream;
use crate::stats::{normal_cdf, KahanSum};

/// One coefficient distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffLaw {
    /// Uniform on {-1, +1}.
    Rademacher,
    /// `c·δ` with `δ ~ Bernoulli(p)`.
    ScaledBernoulli { c: f64, p: f64 },
    /// 0 with probability `(k+1)^-2`, `k+1` otherwise.
    Jump { k: u64 },
    /// `sgn(ω)·sqrt(α/|ω|)·1{|ω| ≥ α}` with `ω` uniform on (-1/2, 1/2).
    Alpha { alpha: f64 },
    /// Centered normal.
    Gaussian { sigma: f64 },
    FiniteDiscrete { atoms: Vec<f64>, probs: Vec<f64> },
    Deterministic { c: f64 },
    /// `factor · base` with `factor > 0`.
    Scaled { base: Box<CoeffLaw>, factor: f64 },
    /// A stored sample; resampled uniformly. Carries no closed forms.
    Empirical { samples: Arc<[f64]> },
}

/// Closed-form moments of a law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub third_abs_central: f64,
    pub fourth_central: f64,
    /// `‖X‖_∞`, infinite for unbounded laws.
    pub sup_norm: f64,
}

impl fmt::Display for CoeffLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffLaw::Rademacher => write!(f, "Rademacher"),
            CoeffLaw::ScaledBernoulli { c, p } => write!(f, "ScaledBernoulli(c={c}, p={p})"),
            CoeffLaw::Jump { k } => write!(f, "JumpLaw(k={k})"),
            CoeffLaw::Alpha { alpha } => write!(f, "AlphaLaw(alpha={alpha})"),
            CoeffLaw::Gaussian { sigma } => write!(f, "Gaussian(sigma={sigma})"),
            CoeffLaw::FiniteDiscrete { atoms, .. } => {
                write!(f, "FiniteDiscrete({} atoms)", atoms.len())
            }
            CoeffLaw::Deterministic { c } => write!(f, "Deterministic({c})"),
            CoeffLaw::Scaled { base, factor } => write!(f, "{factor}*{base}"),
            CoeffLaw::Empirical { samples } => write!(f, "Empirical(n={})", samples.len()),
        }
    }
}

fn unsupported(op: &'static str, law: &CoeffLaw) -> LabError {
    LabError::UnsupportedLaw { op, law: law.to_string() }
}

impl CoeffLaw {
    pub fn scaled_bernoulli(c: f64, p: f64) -> Result<Self> {
        let law = CoeffLaw::ScaledBernoulli { c, p };
        law.validate()?;
        Ok(law)
    }

    pub fn alpha(alpha: f64) -> Result<Self> {
        let law = CoeffLaw::Alpha { alpha };
        law.validate()?;
        Ok(law)
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        let law = CoeffLaw::Gaussian { sigma };
        law.validate()?;
        Ok(law)
    }

    pub fn finite_discrete(atoms: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        let law = CoeffLaw::FiniteDiscrete { atoms, probs };
        law.validate()?;
        Ok(law)
    }

    pub fn empirical(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(LabError::EmptySample);
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(LabError::InvalidLaw("non-finite sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(CoeffLaw::Empirical { samples: samples.into() })
    }

    /// `factor · self`; a zero factor collapses to a point mass at 0.
    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(LabError::InvalidLaw(format!("scale factor {factor} must be >= 0")));
        }
        Ok(if factor == 0.0 {
            CoeffLaw::Deterministic { c: 0.0 }
        } else if factor == 1.0 {
            self
        } else {
            CoeffLaw::Scaled { base: Box::new(self), factor }
        })
    }

    /// Checks parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidLaw(m));
        match self {
            CoeffLaw::Rademacher | CoeffLaw::Jump { .. } => Ok(()),
            CoeffLaw::ScaledBernoulli { c, p } => {
                if !c.is_finite() {
                    bad(format!("amplitude {c} is not finite"))
                } else if !(*p > 0.0 && *p < 1.0) {
                    bad(format!("probability {p} must lie in (0, 1)"))
                } else {
                    Ok(())
                }
            }
            CoeffLaw::Alpha { alpha } => {
                if *alpha > 0.0 && *alpha < 0.5 {
                    Ok(())
                } else {
                    bad(format!("alpha {alpha} must lie in (0, 1/2)"))
                }
            }
            CoeffLaw::Gaussian { sigma } => {
                if sigma.is_finite() && *sigma > 0.0 {
                    Ok(())
                } else {
                    bad(format!("sigma {sigma} must be positive"))
                }
            }
            CoeffLaw::FiniteDiscrete { atoms, probs } => {
                if atoms.is_empty() || atoms.len() != probs.len() {
                    return bad("atoms and probs must be nonempty and of equal length".into());
                }
                if atoms.iter().any(|a| !a.is_finite()) {
                    return bad("non-finite atom".into());
                }
                if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                    return bad("negative probability".into());
                }
                let total: f64 = crate::stats::sum(probs.iter().copied());
                if (total - 1.0).abs() > 1e-12 {
                    return bad(format!("probabilities sum to {total}, not 1"));
                }
                Ok(())
            }
            CoeffLaw::Deterministic { c } => {
                if c.is_finite() {
                    Ok(())
                } else {
                    bad("non-finite point mass".into())
                }
            }
            CoeffLaw::Scaled { base, factor } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return bad(format!("scale factor {factor} must be positive"));
                }
                base.validate()
            }
            CoeffLaw::Empirical { samples } => {
                if samples.is_empty() {
                    Err(LabError::EmptySample)
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Sorted `(atom, mass)` pairs with positive mass, for purely atomic laws.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        let raw: Vec<(f64, f64)> = match self {
            CoeffLaw::Rademacher => vec![(-1.0, 0.5), (1.0, 0.5)],
            CoeffLaw::ScaledBernoulli { c, p } => vec![(0.0, 1.0 - p), (*c, *p)],
            CoeffLaw::Jump { k } => {
                let p0 = jump_zero_mass(*k);
                vec![(0.0, p0), ((*k + 1) as f64, 1.0 - p0)]
            }
            CoeffLaw::FiniteDiscrete { atoms, probs } => {
                atoms.iter().copied().zip(probs.iter().copied()).collect()
            }
            CoeffLaw::Deterministic { c } => vec![(*c, 1.0)],
            CoeffLaw::Scaled { base, factor } => {
                return base
                    .atoms()
                    .map(|v| v.into_iter().map(|(a, p)| (a * factor, p)).collect());
            }
            _ => return None,
        };
        let mut v: Vec<(f64, f64)> = raw.into_iter().filter(|(_, p)| *p > 0.0).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, p) in v {
            match merged.last_mut() {
                Some(last) if last.0 == a => last.1 += p,
                _ => merged.push((a, p)),
            }
        }
        Some(merged)
    }

    /// Lévy concentration `Q(X, λ) = sup_v P(v ≤ X ≤ v + λ)`.
    pub fn exact_concentration(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return Err(LabError::Precondition(format!("window length {lambda} must be >= 0")));
        }
        if let Some(atoms) = self.atoms() {
            return Ok(atomic_concentration(&atoms, lambda));
        }
        match self {
            CoeffLaw::Alpha { alpha } => Ok(alpha_concentration(*alpha, lambda)),
            CoeffLaw::Gaussian { sigma } => {
                Ok((2.0 * normal_cdf(lambda / (2.0 * sigma)) - 1.0).clamp(0.0, 1.0))
            }
            CoeffLaw::Scaled { base, factor } => base.exact_concentration(lambda / factor),
            _ => Err(unsupported("exact_concentration", self)),
        }
    }

    pub fn exact_moments(&self) -> Result<Moments> {
        if let Some(atoms) = self.atoms() {
            return Ok(atomic_moments(&atoms));
        }
        match self {
            CoeffLaw::Alpha { alpha } => {
                let a = *alpha;
                Ok(Moments {
                    mean: 0.0,
                    variance: -2.0 * a * (2.0 * a).ln(),
                    third_abs_central: 4.0 * a * (1.0 - (2.0 * a).sqrt()),
                    fourth_central: 2.0 * a * (1.0 - 2.0 * a),
                    sup_norm: 1.0,
                })
            }
            CoeffLaw::Gaussian { sigma } => {
                let s = *sigma;
                Ok(Moments {
                    mean: 0.0,
                    variance: s * s,
                    third_abs_central: 2.0 * (2.0 / std::f64::consts::PI).sqrt() * s.powi(3),
                    fourth_central: 3.0 * s.powi(4),
                    sup_norm: f64::INFINITY,
                })
            }
            CoeffLaw::Scaled { base, factor } => {
                let m = base.exact_moments()?;
                let f = *factor;
                Ok(Moments {
                    mean: f * m.mean,
                    variance: f * f * m.variance,
                    third_abs_central: f.powi(3) * m.third_abs_central,
                    fourth_central: f.powi(4) * m.fourth_central,
                    sup_norm: f * m.sup_norm,
                })
            }
            _ => Err(unsupported("exact_moments", self)),
        }
    }

    /// `‖X‖_∞`; cheap, and defined for stored samples too.
    pub fn sup_norm(&self) -> f64 {
        match self {
            CoeffLaw::Empirical { samples } => {
                samples.first().unwrap().abs().max(samples.last().unwrap().abs())
            }
            CoeffLaw::Scaled { base, factor } => factor * base.sup_norm(),
            CoeffLaw::Gaussian { .. } => f64::INFINITY,
            CoeffLaw::Alpha { .. } => 1.0,
            other => other
                .atoms()
                .map(|v| v.iter().fold(0.0f64, |m, (a, _)| m.max(a.abs())))
                .unwrap_or(f64::INFINITY),
        }
    }

    /// `P(|X| > δ)`.
    pub fn exact_tail(&self, delta: f64) -> Result<f64> {
        if !(delta >= 0.0) {
            return Err(LabError::Precondition(format!("tail level {delta} must be >= 0")));
        }
        self.prob_outside(0.0, delta)
    }

    /// `P(|X - center| > t)`.
    pub fn prob_outside(&self, center: f64, t: f64) -> Result<f64> {
        if let Some(atoms) = self.atoms() {
            return Ok(crate::stats::sum(
                atoms.iter().filter(|(a, _)| (a - center).abs() > t).map(|(_, p)| *p),
            ));
        }
        let above = 1.0 - self.cdf(center + t)?;
        let below = self.cdf_left(center - t)?;
        Ok((above + below).clamp(0.0, 1.0))
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if let Some(atoms) = self.atoms() {
            return Ok(crate::stats::sum(atoms.iter().filter(|(a, _)| *a <= x).map(|(_, p)| *p)));
        }
        match self {
            CoeffLaw::Alpha { alpha } => Ok(alpha_cdf(*alpha, x)),
            CoeffLaw::Gaussian { sigma } => Ok(normal_cdf(x / sigma)),
            CoeffLaw::Scaled { base, factor } => base.cdf(x / factor),
            _ => Err(unsupported("cdf", self)),
        }
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> Result<f64> {
        if let Some(atoms) = self.atoms() {
            return Ok(crate::stats::sum(atoms.iter().filter(|(a, _)| *a < x).map(|(_, p)| *p)));
        }
        match self {
            CoeffLaw::Alpha { alpha } => {
                let atom = if x == 0.0 { 2.0 * alpha } else { 0.0 };
                Ok(alpha_cdf(*alpha, x) - atom)
            }
            CoeffLaw::Gaussian { sigma } => Ok(normal_cdf(x / sigma)),
            CoeffLaw::Scaled { base, factor } => base.cdf_left(x / factor),
            _ => Err(unsupported("cdf_left", self)),
        }
    }

    /// Lower median `inf{m : P(X ≤ m) ≥ 1/2}`.
    pub fn median(&self) -> Result<f64> {
        if let Some(atoms) = self.atoms() {
            let mut acc = KahanSum::new();
            for (a, p) in &atoms {
                acc.add(*p);
                if acc.value() >= 0.5 - 1e-12 {
                    return Ok(*a);
                }
            }
            return Ok(atoms.last().unwrap().0);
        }
        match self {
            CoeffLaw::Alpha { .. } | CoeffLaw::Gaussian { .. } => Ok(0.0),
            CoeffLaw::Scaled { base, factor } => Ok(factor * base.median()?),
            CoeffLaw::Empirical { samples } => Ok(samples[samples.len().div_ceil(2) - 1]),
            _ => Err(unsupported("median", self)),
        }
    }

    /// Slope `b` with `Q(X, λ) ≤ bλ`, when the law has a bounded density.
    pub fn density_bound(&self) -> Option<f64> {
        match self {
            CoeffLaw::Gaussian { sigma } => {
                Some(1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
            }
            CoeffLaw::Scaled { base, factor } => base.density_bound().map(|b| b / factor),
            _ => None,
        }
    }

    /// One draw from `stream`.
    pub fn draw(&self, stream: &mut Stream) -> f64 {
        match self {
            CoeffLaw::Rademacher => {
                if stream.next_u64() >> 63 == 0 {
                    -1.0
                } else {
                    1.0
                }
            }
            CoeffLaw::ScaledBernoulli { c, p } => {
                if stream.next_open01() < *p {
                    *c
                } else {
                    0.0
                }
            }
            CoeffLaw::Jump { k } => {
                if stream.next_open01() < jump_zero_mass(*k) {
                    0.0
                } else {
                    (*k + 1) as f64
                }
            }
            CoeffLaw::Alpha { alpha } => {
                let w = stream.next_open01() - 0.5;
                if w.abs() < *alpha {
                    0.0
                } else {
                    w.signum() * (alpha / w.abs()).sqrt().min(1.0)
                }
            }
            CoeffLaw::Gaussian { sigma } => {
                let z: f64 = StandardNormal.sample(stream);
                sigma * z
            }
            CoeffLaw::FiniteDiscrete { atoms, probs } => {
                let u = stream.next_open01();
                let mut acc = 0.0;
                for (a, p) in atoms.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *a;
                    }
                }
                *atoms.last().unwrap()
            }
            CoeffLaw::Deterministic { c } => *c,
            CoeffLaw::Scaled { base, factor } => factor * base.draw(stream),
            CoeffLaw::Empirical { samples } => {
                let i = (stream.next_u64() % samples.len() as u64) as usize;
                samples[i]
            }
        }
    }

    /// `n` i.i.d. draws.
    pub fn sample(&self, stream: &mut Stream, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(stream)).collect()
    }
}

fn jump_zero_mass(k: u64) -> f64 {
    let k1 = (k + 1) as f64;
    1.0 / (k1 * k1)
}

fn atomic_concentration(atoms: &[(f64, f64)], lambda: f64) -> f64 {
    let mut best = 0.0f64;
    let mut window = 0.0;
    let mut j = 0;
    for i in 0..atoms.len() {
        if j < i {
            j = i;
            window = 0.0;
        }
        while j < atoms.len() && atoms[j].0 - atoms[i].0 <= lambda {
            window += atoms[j].1;
            j += 1;
        }
        best = best.max(window);
        window -= atoms[i].1;
    }
    best.min(1.0)
}

fn atomic_moments(atoms: &[(f64, f64)]) -> Moments {
    let moment = |f: &dyn Fn(f64) -> f64| {
        crate::stats::sum(atoms.iter().map(|(a, p)| p * f(*a)))
    };
    let mean = moment(&|a| a);
    Moments {
        mean,
        variance: moment(&|a| (a - mean).powi(2)).max(0.0),
        third_abs_central: moment(&|a| (a - mean).abs().powi(3)),
        fourth_central: moment(&|a| (a - mean).powi(4)),
        sup_norm: atoms.iter().fold(0.0f64, |m, (a, _)| m.max(a.abs())),
    }
}

/// Mass of the positive part on `(0, x]`.
fn alpha_half_mass(alpha: f64, x: f64) -> f64 {
    let s2 = 2.0 * alpha;
    if x * x < s2 {
        0.0
    } else if x >= 1.0 {
        0.5 - alpha
    } else {
        0.5 - alpha / (x * x)
    }
}

fn alpha_cdf(alpha: f64, x: f64) -> f64 {
    // the continuous part has no atoms, so P(-|x| < X < 0) is the half mass
    if x < 0.0 {
        0.5 - alpha - alpha_half_mass(alpha, -x)
    } else {
        0.5 + alpha + alpha_half_mass(alpha, x)
    }
    .clamp(0.0, 1.0)
}

/// Window maximization for the AlphaLaw. Windows either straddle the atom at
/// 0 (two concave half-masses), or sit on one side, where concavity of the
/// half-mass pushes the best window against the gap edge `sqrt(2α)`.
fn alpha_concentration(alpha: f64, lambda: f64) -> f64 {
    let s = (2.0 * alpha).sqrt();
    let g = |u: f64| alpha_half_mass(alpha, u);
    let mut best = 0.0f64;
    for u in [0.0, lambda, 0.5 * lambda, s, lambda - s, 1.0, lambda - 1.0] {
        if (0.0..=lambda).contains(&u) {
            best = best.max(g(u) + g(lambda - u));
        }
    }
    let straddling = 2.0 * alpha + best;
    let one_sided = g((s + lambda).min(1.0));
    straddling.max(one_sided).min(1.0)
}

/// `M_k` bound on `|X_k|` used to size truncations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvelopeShape {
    /// `M_k = m`.
    Constant(f64),
    /// `M_k = a + b·k`.
    Affine { a: f64, b: f64 },
    /// `M_k = c·(k+1)^d`.
    Power { c: f64, d: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub shape: EnvelopeShape,
    /// Set when the bound is not sure (Gaussian tails, sampled checks).
    pub heuristic: bool,
}

impl Envelope {
    pub fn at(&self, k: f64) -> f64 {
        match self.shape {
            EnvelopeShape::Constant(m) => m,
            EnvelopeShape::Affine { a, b } => a + b * k,
            EnvelopeShape::Power { c, d } => c * (k + 1.0).powi(d as i32),
        }
    }
}

/// Formula fields for laws defined per index.
#[derive(Debug, Clone, PartialEq)]
pub enum LawTemplate {
    Rademacher { scale: Expr },
    ScaledBernoulli { c: Expr, p: Expr },
    Jump { k: Expr },
    Alpha { alpha: Expr },
    Gaussian { sigma: Expr },
    Deterministic { c: Expr },
}

impl LawTemplate {
    /// True when no field depends on `k`.
    pub fn is_constant(&self) -> bool {
        match self {
            LawTemplate::Rademacher { scale: e }
            | LawTemplate::Jump { k: e }
            | LawTemplate::Alpha { alpha: e }
            | LawTemplate::Gaussian { sigma: e }
            | LawTemplate::Deterministic { c: e } => e.is_constant(),
            LawTemplate::ScaledBernoulli { c, p } => c.is_constant() && p.is_constant(),
        }
    }

    pub fn at(&self, k: u64) -> Result<CoeffLaw> {
        let x = k as f64;
        let law = match self {
            LawTemplate::Rademacher { scale } => CoeffLaw::Rademacher.scaled(scale.eval(x).abs())?,
            LawTemplate::ScaledBernoulli { c, p } => {
                CoeffLaw::scaled_bernoulli(c.eval(x), p.eval(x))?
            }
            LawTemplate::Jump { k: kk } => {
                let v = kk.eval(x);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(LabError::InvalidLaw(format!("jump index {v} at k={k}")));
                }
                CoeffLaw::Jump { k: v.round() as u64 }
            }
            LawTemplate::Alpha { alpha } => CoeffLaw::alpha(alpha.eval(x))?,
            LawTemplate::Gaussian { sigma } => CoeffLaw::gaussian(sigma.eval(x))?,
            LawTemplate::Deterministic { c } => CoeffLaw::Deterministic { c: c.eval(x) },
        };
        law.validate()?;
        Ok(law)
    }
}

/// How the `k`-th law is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum LawRule {
    Stationary(CoeffLaw),
    /// Explicit list; the last entry repeats.
    Tabulated(Vec<CoeffLaw>),
    /// `JumpLaw(k)` at index `k`.
    Jump,
    /// `AlphaLaw(α_k)` with `1/α_k = 3k·log(ek)^2`; index 0 is the point mass 0.
    AlphaOptimal,
    Template(LawTemplate),
}

/// Weight schedule `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    Constant(f64),
    Formula(Expr),
    /// Explicit list; the last entry repeats.
    Table(Vec<f64>),
}

impl Weights {
    pub fn at(&self, k: u64) -> f64 {
        match self {
            Weights::Constant(t) => *t,
            Weights::Formula(e) => e.eval(k as f64),
            Weights::Table(v) => v[(k as usize).min(v.len() - 1)],
        }
    }

    fn probe_indices() -> impl Iterator<Item = u64> {
        (0..=1000u64).chain((10..=40).map(|j| 1u64 << j))
    }

    /// Rejects negative, non-finite or (heuristically) unbounded schedules.
    pub fn validate(&self) -> Result<()> {
        let check = |k: u64, t: f64| {
            if !t.is_finite() || t < 0.0 {
                Err(LabError::UnboundedWeights(format!("t_{k} = {t}")))
            } else {
                Ok(())
            }
        };
        match self {
            Weights::Constant(t) => check(0, *t),
            Weights::Table(v) => {
                if v.is_empty() {
                    return Err(LabError::UnboundedWeights("empty weight table".into()));
                }
                for (k, t) in v.iter().enumerate() {
                    check(k as u64, *t)?;
                }
                Ok(())
            }
            Weights::Formula(e) => {
                let mut near = 0.0f64;
                let mut far = 0.0f64;
                for k in Self::probe_indices() {
                    let t = e.eval(k as f64);
                    check(k, t)?;
                    if k <= 1000 {
                        near = near.max(t);
                    } else {
                        far = far.max(t);
                    }
                }
                if far > near * (1.0 + 1e-3) + 1e-300 {
                    return Err(LabError::UnboundedWeights(format!(
                        "`{e}` keeps growing: sup over k <= 1000 is {near}, reaches {far} by k = 2^40"
                    )));
                }
                Ok(())
            }
        }
    }

    /// `sup_k t_k` as far as it can be certified by the probes.
    pub fn sup(&self) -> f64 {
        match self {
            Weights::Constant(t) => *t,
            Weights::Table(v) => v.iter().fold(0.0f64, |m, t| m.max(*t)),
            Weights::Formula(e) => {
                Self::probe_indices().fold(0.0f64, |m, k| m.max(e.eval(k as f64)))
            }
        }
    }
}

/// Family `k ↦ X_k` of independent coefficient laws with optional weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LawSequence {
    pub rule: LawRule,
    pub weights: Option<Weights>,
    pub epsilon: Option<f64>,
    label: String,
}

impl LawSequence {
    pub fn new(rule: LawRule) -> Result<Self> {
        match &rule {
            LawRule::Stationary(l) => l.validate()?,
            LawRule::Tabulated(v) => {
                if v.is_empty() {
                    return Err(LabError::InvalidLaw("empty law table".into()));
                }
                for l in v {
                    l.validate()?;
                }
            }
            LawRule::Template(t) => {
                t.at(0)?;
            }
            LawRule::Jump | LawRule::AlphaOptimal => {}
        }
        let label = match &rule {
            LawRule::Stationary(l) => format!("iid:{l}"),
            LawRule::Tabulated(v) => format!("table:{}", v.len()),
            LawRule::Jump => "jump".into(),
            LawRule::AlphaOptimal => "alpha-optimal".into(),
            LawRule::Template(t) => format!("template:{t:?}"),
        };
        Ok(Self { rule, weights: None, epsilon: None, label })
    }

    pub fn iid(law: CoeffLaw) -> Result<Self> {
        Self::new(LawRule::Stationary(law))
    }

    pub fn jump() -> Self {
        Self::new(LawRule::Jump).expect("jump rule is always valid")
    }

    pub fn alpha_optimal() -> Self {
        Self::new(LawRule::AlphaOptimal).expect("alpha rule is always valid")
    }

    pub fn with_weights(mut self, w: Weights) -> Result<Self> {
        w.validate()?;
        self.weights = Some(w);
        Ok(self)
    }

    pub fn with_epsilon(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LabError::Precondition(format!("epsilon {eps} must be positive")));
        }
        self.epsilon = Some(eps);
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Identifier recorded on samples.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// The `k`-th law.
    pub fn law_at(&self, k: u64) -> Result<CoeffLaw> {
        match &self.rule {
            LawRule::Stationary(l) => Ok(l.clone()),
            LawRule::Tabulated(v) => Ok(v[(k as usize).min(v.len() - 1)].clone()),
            LawRule::Jump => Ok(CoeffLaw::Jump { k }),
            LawRule::AlphaOptimal => Ok(match optimal_alpha(k) {
                Some(a) => CoeffLaw::Alpha { alpha: a },
                None => CoeffLaw::Deterministic { c: 0.0 },
            }),
            LawRule::Template(t) => t.at(k),
        }
    }

    pub fn weight(&self, k: u64) -> Result<f64> {
        self.weights.as_ref().map(|w| w.at(k)).ok_or(LabError::MissingWeights)
    }

    /// True when every law is the same.
    pub fn is_stationary(&self) -> bool {
        match &self.rule {
            LawRule::Stationary(_) => true,
            LawRule::Tabulated(v) => v.len() == 1,
            LawRule::Template(t) => t.is_constant(),
            _ => false,
        }
    }

    /// Index past which the sequence and weights no longer change, if any.
    pub fn stationary_from(&self) -> Option<u64> {
        let law_from = match &self.rule {
            LawRule::Stationary(_) => 0,
            LawRule::Tabulated(v) => v.len() as u64 - 1,
            LawRule::Template(t) if t.is_constant() => 0,
            _ => return None,
        };
        let w_from = match &self.weights {
            None | Some(Weights::Constant(_)) => 0,
            Some(Weights::Table(v)) => v.len() as u64 - 1,
            Some(Weights::Formula(e)) if e.is_constant() => 0,
            Some(Weights::Formula(_)) => return None,
        };
        Some(law_from.max(w_from))
    }

    /// Sup-norm envelope `|X_k| ≤ M_k` for truncation control.
    pub fn envelope(&self) -> Result<Envelope> {
        let sure = |shape| Envelope { shape, heuristic: false };
        match &self.rule {
            LawRule::Jump => Ok(sure(EnvelopeShape::Affine { a: 1.0, b: 1.0 })),
            LawRule::AlphaOptimal => Ok(sure(EnvelopeShape::Constant(1.0))),
            LawRule::Stationary(l) => law_envelope(l),
            LawRule::Tabulated(v) => {
                let mut m = 0.0f64;
                let mut heuristic = false;
                for l in v {
                    let e = law_envelope(l)?;
                    heuristic |= e.heuristic;
                    m = m.max(e.at(0.0));
                }
                Ok(Envelope { shape: EnvelopeShape::Constant(m), heuristic })
            }
            LawRule::Template(_) => self.probed_envelope(),
        }
    }

    fn probed_envelope(&self) -> Result<Envelope> {
        let mut pts = Vec::new();
        let mut heuristic = false;
        for k in (0..=1000u64).chain((11..=30).map(|j| 1u64 << j)) {
            let e = law_envelope(&self.law_at(k)?)?;
            heuristic |= e.heuristic;
            pts.push((k, e.at(0.0)));
        }
        for d in 0..=4u32 {
            let scaled = |k: u64, m: f64| m / ((k + 1) as f64).powi(d as i32);
            let near = pts.iter().filter(|(k, _)| *k <= 1000).map(|(k, m)| scaled(*k, *m));
            let near = near.fold(0.0f64, f64::max);
            let far = pts.iter().filter(|(k, _)| *k > 1000).map(|(k, m)| scaled(*k, *m));
            let far = far.fold(0.0f64, f64::max);
            if far <= near * (1.0 + 1e-3) {
                let shape = match d {
                    0 => EnvelopeShape::Constant(near),
                    1 => EnvelopeShape::Affine { a: near, b: near },
                    _ => EnvelopeShape::Power { c: near, d },
                };
                // sampled, so only sure for closed-form rules
                return Ok(Envelope { shape, heuristic: heuristic || d > 0 });
            }
        }
        Err(LabError::UnboundedGrowth(format!(
            "coefficient bounds of {} grow faster than k^4",
            self.label
        )))
    }
}

fn law_envelope(l: &CoeffLaw) -> Result<Envelope> {
    let m = l.sup_norm();
    if m.is_finite() {
        return Ok(Envelope { shape: EnvelopeShape::Constant(m), heuristic: false });
    }
    match l {
        CoeffLaw::Gaussian { sigma } => Ok(Envelope {
            shape: EnvelopeShape::Constant(6.0 * sigma),
            heuristic: true,
        }),
        CoeffLaw::Scaled { base, factor } => {
            let e = law_envelope(base)?;
            Ok(Envelope { shape: EnvelopeShape::Constant(factor * e.at(0.0)), heuristic: e.heuristic })
        }
        _ => Err(LabError::UnboundedGrowth(format!("{l} has no sup-norm bound"))),
    }
}

/// `α_k = 1/(3k·log(ek)^2)` for `k ≥ 1`.
pub fn optimal_alpha(k: u64) -> Option<f64> {
    if k == 0 {
        return None;
    }
    let kf = k as f64;
    let l = (std::f64::consts::E * kf).ln();
    Some(1.0 / (3.0 * kf * l * l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn concentration_examples() {
        assert_eq!(CoeffLaw::Rademacher.exact_concentration(1.0).unwrap(), 0.5);
        assert_eq!(CoeffLaw::Rademacher.exact_concentration(2.0).unwrap(), 1.0);
        assert_eq!(CoeffLaw::Jump { k: 3 }.exact_concentration(1.0).unwrap(), 0.9375);
        assert_eq!(CoeffLaw::alpha(0.125).unwrap().exact_concentration(2.0).unwrap(), 1.0);
        let sb = CoeffLaw::scaled_bernoulli(1.0, 0.3).unwrap();
        assert_eq!(sb.exact_concentration(0.5).unwrap(), 0.7);
        assert_eq!(sb.exact_concentration(1.0).unwrap(), 1.0);
        let g = CoeffLaw::gaussian(1.0).unwrap();
        assert!(close(g.exact_concentration(2.0).unwrap(), 0.682_689_492_137_086, 1e-12), "{}", g.exact_concentration(2.0).unwrap());
    }

    #[test]
    fn concentration_at_zero_is_largest_atom() {
        assert_eq!(CoeffLaw::Rademacher.exact_concentration(0.0).unwrap(), 0.5);
        let a = CoeffLaw::alpha(0.1).unwrap();
        assert!(close(a.exact_concentration(0.0).unwrap(), 0.2, 1e-15));
        assert_eq!(CoeffLaw::gaussian(2.0).unwrap().exact_concentration(0.0).unwrap(), 0.0);
    }

    /// Brute-force window maximization over a dense grid of left endpoints,
    /// using only the CDF.
    fn grid_concentration(law: &CoeffLaw, lambda: f64, lo: f64, hi: f64) -> f64 {
        let n = 10_000;
        (0..=n)
            .map(|i| {
                let v = lo + (hi - lo) * i as f64 / n as f64;
                law.cdf(v + lambda).unwrap() - law.cdf_left(v).unwrap()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn alpha_concentration_matches_grid_maximizer() {
        for alpha in [0.01, 0.05, 0.125, 0.25, 0.4] {
            let law = CoeffLaw::alpha(alpha).unwrap();
            for i in 0..=40 {
                let lambda = 2.2 * i as f64 / 40.0;
                let exact = law.exact_concentration(lambda).unwrap();
                let grid = grid_concentration(&law, lambda, -1.0 - lambda, 1.0);
                assert!(grid <= exact + 1e-12, "alpha={alpha} l={lambda}: {grid} > {exact}");
                assert!(exact - grid < 2e-3, "alpha={alpha} l={lambda}: {grid} vs {exact}");
            }
        }
    }

    #[test]
    fn one_sided_windows_can_win() {
        // window [s, 2s] holds 3/8 while any window through 0 holds 2α
        let alpha: f64 = 0.01;
        let s = (2.0 * alpha).sqrt();
        let q = CoeffLaw::alpha(alpha).unwrap().exact_concentration(s).unwrap();
        assert!(close(q, 0.375, 1e-12), "{q}");
    }

    #[test]
    fn alpha_cdf_shape() {
        let a = 0.125;
        let law = CoeffLaw::alpha(a).unwrap();
        assert_eq!(law.cdf(-1.5).unwrap(), 0.0);
        assert!(close(law.cdf(-0.1).unwrap(), 0.5 - a, 1e-15));
        assert!(close(law.cdf(0.0).unwrap(), 0.5 + a, 1e-15));
        assert!(close(law.cdf_left(0.0).unwrap(), 0.5 - a, 1e-15));
        assert_eq!(law.cdf(1.0).unwrap(), 1.0);
        // symmetric
        for x in [0.3, 0.6, 0.9] {
            let right = 1.0 - law.cdf(x).unwrap();
            let left = law.cdf_left(-x).unwrap();
            assert!(close(right, left, 1e-15));
        }
    }

    #[test]
    fn moments_examples() {
        let m = CoeffLaw::Rademacher.exact_moments().unwrap();
        assert_eq!((m.mean, m.variance, m.third_abs_central, m.fourth_central, m.sup_norm),
            (0.0, 1.0, 1.0, 1.0, 1.0));
        let m = CoeffLaw::alpha(0.25).unwrap().exact_moments().unwrap();
        assert!(close(m.variance, 0.346_573_590_279_972_6, 1e-15));
        let m = CoeffLaw::Jump { k: 4 }.exact_moments().unwrap();
        assert!(close(m.variance, 0.96, 1e-14));
        let g = CoeffLaw::gaussian(2.0).unwrap().exact_moments().unwrap();
        assert_eq!(g.sup_norm, f64::INFINITY);
        assert_eq!(g.fourth_central, 48.0);
    }

    #[test]
    fn alpha_variance_by_quadrature() {
        // 2α ∫_α^{1/2} dω/ω by midpoint rule
        for alpha in [0.05, 0.125, 0.25] {
            let n = 200_000;
            let h = (0.5 - alpha) / n as f64;
            let quad: f64 = (0..n).map(|i| 1.0 / (alpha + (i as f64 + 0.5) * h)).sum::<f64>() * h;
            let want = 2.0 * alpha * quad;
            let got = CoeffLaw::alpha(alpha).unwrap().exact_moments().unwrap().variance;
            assert!(close(got, want, 1e-8), "{got} vs {want}");
        }
    }

    #[test]
    fn jump_central_moments_closed_form() {
        for k in [1u64, 3, 10, 99] {
            let m = CoeffLaw::Jump { k }.exact_moments().unwrap();
            let a = (k + 1) as f64;
            let p = 1.0 / (a * a);
            let q = 1.0 - p;
            assert!(close(m.variance, q, 1e-12));
            let third = a.powi(3) * p * q * (q * q + p * p);
            let fourth = a.powi(4) * p * q * (q.powi(3) + p.powi(3));
            assert!(close(m.third_abs_central, third, 1e-10 * third));
            assert!(close(m.fourth_central, fourth, 1e-10 * fourth));
        }
        let m = CoeffLaw::Jump { k: 0 }.exact_moments().unwrap();
        assert_eq!(m.variance, 0.0);
    }

    #[test]
    fn third_moment_bound_for_bounded_laws() {
        let laws = [
            CoeffLaw::Rademacher,
            CoeffLaw::Jump { k: 5 },
            CoeffLaw::alpha(0.01).unwrap(),
            CoeffLaw::scaled_bernoulli(-3.0, 0.1).unwrap(),
            CoeffLaw::finite_discrete(vec![-1.0, 0.5, 2.0], vec![0.2, 0.5, 0.3]).unwrap(),
        ];
        for l in laws {
            let m = l.exact_moments().unwrap();
            assert!(m.third_abs_central <= 2.0 * m.sup_norm * m.variance + 1e-12, "{l}");
        }
    }

    #[test]
    fn tail_examples() {
        let a = CoeffLaw::alpha(0.125).unwrap();
        assert!(close(a.exact_tail(0.8).unwrap(), 0.140_625, 1e-15));
        assert_eq!(a.exact_tail(1.5).unwrap(), 0.0);
        assert!(close(a.exact_tail(0.1).unwrap(), 0.75, 1e-15));
        assert_eq!(CoeffLaw::Rademacher.exact_tail(0.5).unwrap(), 1.0);
        assert_eq!(CoeffLaw::Jump { k: 2 }.exact_tail(3.0).unwrap(), 0.0);
    }

    #[test]
    fn medians_use_lower_convention() {
        assert_eq!(CoeffLaw::Rademacher.median().unwrap(), -1.0);
        assert_eq!(CoeffLaw::Jump { k: 3 }.median().unwrap(), 4.0);
        assert_eq!(CoeffLaw::alpha(0.2).unwrap().median().unwrap(), 0.0);
        let e = CoeffLaw::empirical(vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(e.median().unwrap(), 2.0);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(CoeffLaw::alpha(0.5).is_err());
        assert!(CoeffLaw::alpha(0.0).is_err());
        assert!(CoeffLaw::scaled_bernoulli(1.0, 1.0).is_err());
        assert!(CoeffLaw::gaussian(-1.0).is_err());
        assert!(CoeffLaw::finite_discrete(vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(CoeffLaw::finite_discrete(vec![0.0, 1.0], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn empirical_has_no_closed_forms() {
        let e = CoeffLaw::empirical(vec![1.0, 2.0]).unwrap();
        assert!(matches!(e.exact_concentration(1.0), Err(LabError::UnsupportedLaw { .. })));
        assert!(matches!(e.exact_tail(1.0), Err(LabError::UnsupportedLaw { .. })));
    }

    #[test]
    fn sampling_contract() {
        let mut s = Stream::new(9, 0, 0);
        assert_eq!(CoeffLaw::Deterministic { c: 2.0 }.sample(&mut s, 3), vec![2.0; 3]);
        let n = 100_000;
        let xs = CoeffLaw::Rademacher.sample(&mut Stream::new(1, 0, 0), n);
        assert!(crate::stats::mean(&xs).abs() < 0.02);
        let law = CoeffLaw::alpha(0.125).unwrap();
        let xs = law.sample(&mut Stream::new(2, 0, 0), n);
        assert!(xs.iter().all(|x| x.abs() <= 1.0));
        let v = crate::stats::variance(&xs);
        let want = law.exact_moments().unwrap().variance;
        assert!((v - want).abs() < 0.02, "{v} vs {want}");
        let xs = CoeffLaw::Jump { k: 3 }.sample(&mut Stream::new(3, 0, 0), n);
        assert!(xs.iter().all(|x| *x == 0.0 || *x == 4.0));
        let v = crate::stats::variance(&xs);
        assert!((v - 0.9375).abs() < 0.03);
        // bit-for-bit reproducibility
        let a = law.sample(&mut Stream::new(5, 1, 2), 64);
        let b = law.sample(&mut Stream::new(5, 1, 2), 64);
        assert_eq!(a, b);
    }

    #[test]
    fn optimal_alpha_rule_is_exact() {
        let seq = LawSequence::alpha_optimal();
        assert_eq!(seq.law_at(0).unwrap(), CoeffLaw::Deterministic { c: 0.0 });
        for k in [1u64, 2, 10, 1000] {
            let CoeffLaw::Alpha { alpha } = seq.law_at(k).unwrap() else { panic!() };
            let kf = k as f64;
            let want = 3.0 * kf * (std::f64::consts::E * kf).ln().powi(2);
            assert!(close(1.0 / alpha, want, 1e-9 * want));
        }
    }

    #[test]
    fn unbounded_weights_are_rejected() {
        let seq = LawSequence::iid(CoeffLaw::Rademacher).unwrap();
        let grow = Weights::Formula(Expr::parse("log(k+1)").unwrap());
        assert!(matches!(seq.clone().with_weights(grow), Err(LabError::UnboundedWeights(_))));
        let neg = Weights::Table(vec![1.0, -0.5]);
        assert!(seq.clone().with_weights(neg).is_err());
        let ok = Weights::Formula(Expr::parse("1/(k+1)").unwrap());
        assert!(seq.clone().with_weights(ok).is_ok());
        let ok = Weights::Formula(Expr::parse("2 - 1/(k+1)").unwrap());
        assert!(seq.with_weights(ok).is_ok());
    }

    #[test]
    fn envelopes() {
        let jump = LawSequence::jump().envelope().unwrap();
        assert_eq!(jump.at(5.0), 6.0);
        assert!(!jump.heuristic);
        let g = LawSequence::iid(CoeffLaw::gaussian(1.0).unwrap()).unwrap().envelope().unwrap();
        assert!(g.heuristic);
        let t = LawSequence::new(LawRule::Template(LawTemplate::ScaledBernoulli {
            c: Expr::parse("1").unwrap(),
            p: Expr::parse("1/(k+2)").unwrap(),
        }))
        .unwrap();
        assert_eq!(t.envelope().unwrap().shape, EnvelopeShape::Constant(1.0));
        let poly = LawSequence::new(LawRule::Template(LawTemplate::Deterministic {
            c: Expr::parse("k^6").unwrap(),
        }))
        .unwrap();
        assert!(matches!(poly.envelope(), Err(LabError::UnboundedGrowth(_))));
    }
}
