//! Concentration analytics: plug-in `Q̂`, divergence series, the auxiliary
//! radial series `A`, `V`, `ρ`, and weak-L² / sub-gaussian norms.

use std::sync::Mutex;

use crate::error::{LabError, Result};
use crate::laws::{CoeffLaw, EnvelopeShape, LawSequence};
use crate::stats::KahanSum;

/// `max_v #{j : v ≤ x_j ≤ v + λ} / n` over closed windows. `sorted` must be
/// ascending.
pub fn empirical_concentration(sorted: &[f64], lambda: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(LabError::EmptySample);
    }
    if !(lambda >= 0.0) {
        return Err(LabError::Precondition(format!("window length {lambda} must be >= 0")));
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let n = sorted.len();
    let mut best = 0usize;
    let mut j = 0usize;
    for i in 0..n {
        if j < i {
            j = i;
        }
        let edge = sorted[i] + lambda;
        while j < n && sorted[j] <= edge {
            j += 1;
        }
        best = best.max(j - i);
    }
    Ok(best as f64 / n as f64)
}

/// Same as [`empirical_concentration`] for unsorted input.
pub fn empirical_concentration_unsorted(samples: &[f64], lambda: f64) -> Result<f64> {
    empirical_concentration(&crate::stats::sorted(samples), lambda)
}

/// `Q(X, λ)`, falling back to the stored sample for empirical laws.
pub fn concentration_of(law: &CoeffLaw, lambda: f64) -> Result<f64> {
    match law {
        CoeffLaw::Empirical { samples } => empirical_concentration(samples, lambda),
        CoeffLaw::Scaled { base, factor } if matches!(**base, CoeffLaw::Empirical { .. }) => {
            concentration_of(base, lambda / factor)
        }
        _ => law.exact_concentration(lambda),
    }
}

/// `Σ_{k ≤ K} (1 − Q(X_k, ε))`.
pub fn anticoncentration_series(seq: &LawSequence, eps: f64, k_max: u64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(LabError::Precondition(format!("epsilon {eps} must be positive")));
    }
    let mut acc = KahanSum::new();
    for k in 0..=k_max {
        acc.add(1.0 - concentration_of(&seq.law_at(k)?, eps)?);
    }
    Ok(acc.value())
}

/// `Σ_{k ≤ K} t_k² (1 − Q(X_k, t_k))`.
pub fn weighted_series(seq: &LawSequence, k_max: u64) -> Result<f64> {
    let mut acc = KahanSum::new();
    for k in 0..=k_max {
        acc.add(a_term(seq, k)?);
    }
    Ok(acc.value())
}

fn a_term(seq: &LawSequence, k: u64) -> Result<f64> {
    let t = seq.weight(k)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(t * t * (1.0 - concentration_of(&seq.law_at(k)?, t)?))
}

/// Which auxiliary series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxKind {
    /// `t_k² (1 − Q(X_k, t_k))`
    A,
    /// `Var[X_k]`
    V,
    /// `E|X_k|²`
    Rho,
}

/// `S(r) = Σ term_k r^{2k}`, optionally truncated at a degree.
#[derive(Debug)]
pub struct AuxSeries {
    kind: AuxKind,
    seq: LawSequence,
    max_index: Option<u64>,
    stationary_from: Option<u64>,
    terms: Mutex<Vec<f64>>,
}

/// Hard cap on directly summed terms for sequences without a stationary tail.
const MAX_DIRECT_TERMS: usize = 200_000_000;

impl AuxSeries {
    pub fn new(kind: AuxKind, seq: LawSequence) -> Result<Self> {
        if kind == AuxKind::A {
            seq.weight(0)?;
        }
        let stationary_from = seq.stationary_from();
        let s = Self { kind, seq, max_index: None, stationary_from, terms: Mutex::new(Vec::new()) };
        s.term(0)?;
        Ok(s)
    }

    /// Restrict to `k ≤ n`, as in `ρ_N`.
    pub fn truncated(mut self, n: u64) -> Self {
        self.max_index = Some(n);
        self
    }

    pub fn kind(&self) -> AuxKind {
        self.kind
    }

    pub fn sequence(&self) -> &LawSequence {
        &self.seq
    }

    fn compute_term(&self, k: u64) -> Result<f64> {
        match self.kind {
            AuxKind::A => a_term(&self.seq, k),
            AuxKind::V => Ok(self.seq.law_at(k)?.exact_moments()?.variance),
            AuxKind::Rho => {
                let m = self.seq.law_at(k)?.exact_moments()?;
                Ok(m.variance + m.mean * m.mean)
            }
        }
    }

    /// `term_k`, cached.
    pub fn term(&self, k: u64) -> Result<f64> {
        let k = match self.stationary_from {
            Some(k0) => k.min(k0),
            None => k,
        };
        let mut cache = self.terms.lock().expect("term cache poisoned");
        while cache.len() as u64 <= k {
            let next = cache.len() as u64;
            cache.push(self.compute_term(next)?);
        }
        Ok(cache[k as usize])
    }

    /// An upper bound on `term_j` for `j ≥ k`, with its growth shape.
    fn term_bound(&self, k: u64) -> Result<f64> {
        if let Some(k0) = self.stationary_from {
            if k >= k0 {
                return self.term(k0);
            }
        }
        match self.kind {
            AuxKind::A => {
                let w = self.seq.weights.as_ref().ok_or(LabError::MissingWeights)?;
                Ok(w.sup().powi(2))
            }
            AuxKind::V | AuxKind::Rho => {
                let env = self.seq.envelope()?;
                Ok(env.at(k as f64).powi(2))
            }
        }
    }

    fn bound_is_growing(&self) -> bool {
        if self.stationary_from.is_some() || self.kind == AuxKind::A {
            return false;
        }
        !matches!(self.seq.envelope().map(|e| e.shape), Ok(EnvelopeShape::Constant(_)))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(LabError::RadiusOutOfRange(r));
        }
        self.eval_gap(1.0 - r)
    }

    /// Evaluates at radius `1 − gap`; accurate for tiny gaps.
    pub fn eval_gap(&self, gap: f64) -> Result<f64> {
        if !(gap > 0.0 && gap < 1.0) {
            return Err(LabError::RadiusOutOfRange(1.0 - gap));
        }
        let ln_x = 2.0 * (-gap).ln_1p();
        let one_minus_x = gap * (2.0 - gap);
        let pow = |k: u64| (k as f64 * ln_x).exp();

        if let Some(k0) = self.stationary_from {
            let head_end = match self.max_index {
                Some(n) => k0.min(n + 1),
                None => k0,
            };
            let mut acc = KahanSum::new();
            for k in 0..head_end {
                acc.add(self.term(k)? * pow(k));
            }
            if self.max_index.is_none_or(|n| n >= k0) {
                let c = self.term(k0)?;
                let upper = match self.max_index {
                    Some(n) => pow(n + 1),
                    None => 0.0,
                };
                acc.add(c * (pow(k0) - upper) / one_minus_x);
            }
            return Ok(acc.value());
        }

        let mut acc = KahanSum::new();
        let mut xk = 1.0;
        let growing = self.bound_is_growing();
        let mut k = 0u64;
        loop {
            if let Some(n) = self.max_index {
                if k > n {
                    break;
                }
            }
            if k.is_multiple_of(1024) {
                xk = pow(k);
            }
            acc.add(self.term(k)? * xk);
            xk *= ln_x.exp();
            k += 1;
            if k.is_multiple_of(64) {
                let b = self.term_bound(k)?;
                let tail = if growing {
                    // polynomial bound times geometric: ratio of consecutive bounds
                    let ratio = self.term_bound(k + 1)? / b.max(1e-300) * ln_x.exp();
                    if ratio >= 1.0 {
                        f64::INFINITY
                    } else {
                        b * xk / (1.0 - ratio)
                    }
                } else {
                    b * xk / one_minus_x
                };
                if tail <= 1e-11 {
                    break;
                }
            }
            if k as usize > MAX_DIRECT_TERMS {
                return Err(LabError::Precondition(format!(
                    "radius 1-{gap:e} needs more than {MAX_DIRECT_TERMS} terms"
                )));
            }
        }
        Ok(acc.value())
    }

    /// Partial sum `Σ_{k ≤ n} term_k`, the `r → 1` growth certificate.
    pub fn partial_sum(&self, n: u64) -> Result<f64> {
        if let Some(k0) = self.stationary_from {
            let mut acc = KahanSum::new();
            for k in 0..=n.min(k0) {
                acc.add(self.term(k)?);
            }
            if n > k0 {
                acc.add(self.term(k0)? * (n - k0) as f64);
            }
            return Ok(acc.value());
        }
        let mut acc = KahanSum::new();
        for k in 0..=n {
            acc.add(self.term(k)?);
        }
        Ok(acc.value())
    }
}

/// `sup_t t·P(|x| ≥ t)^{1/2}` over the sample.
pub fn weak_l2_norm_samples(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(LabError::EmptySample);
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len() as f64;
    Ok(abs
        .iter()
        .enumerate()
        .map(|(i, t)| t * ((n - i as f64) / n).sqrt())
        .fold(0.0, f64::max))
}

/// `‖X − center‖_{2,∞}` from the law's tail.
pub fn weak_l2_norm_law(law: &CoeffLaw, center: f64) -> Result<f64> {
    if let CoeffLaw::Empirical { samples } = law {
        let shifted: Vec<f64> = samples.iter().map(|x| x - center).collect();
        return weak_l2_norm_samples(&shifted);
    }
    if let Some(atoms) = law.atoms() {
        // sup is attained approaching each atom distance from below
        let mut best = 0.0f64;
        for (a, _) in &atoms {
            let d = (a - center).abs();
            if d > 0.0 {
                let mass: f64 = atoms.iter().filter(|(b, _)| (b - center).abs() >= d).map(|x| x.1).sum();
                best = best.max(d * mass.sqrt());
            }
        }
        return Ok(best);
    }
    let scale = law_scale(law)?;
    let f = |t: f64| law.prob_outside(center, t).map(|p| t * p.sqrt());
    let mut cands: Vec<f64> = log_grid(scale * 1e-6, scale * 2.0, 10_000);
    if let CoeffLaw::Alpha { alpha } = law {
        let s = (2.0 * alpha).sqrt();
        cands.extend([s, s * (1.0 - 1e-12), s + center.abs(), (s - center.abs()).abs()]);
    }
    grid_sup(&cands, f)
}

/// `(log 2)^{-1/2} ‖X‖_∞`, an upper bound on the ψ₂ norm.
pub fn subgaussian_norm_bound(law: &CoeffLaw) -> Result<f64> {
    let m = law.sup_norm();
    if !m.is_finite() {
        return Err(LabError::UnboundedLaw(law.to_string()));
    }
    Ok(m / std::f64::consts::LN_2.sqrt())
}

/// Certified lower bound on `sup_δ δ² (1 − Q(X, δ))`.
pub fn sup_delta_concentration(law: &CoeffLaw) -> Result<f64> {
    let diam = law_scale(law)?;
    if diam == 0.0 {
        return Ok(0.0);
    }
    let f = |d: f64| concentration_of(law, d).map(|q| d * d * (1.0 - q));
    let mut cands = log_grid(diam * 1e-6, diam, 10_000);
    if let Some(atoms) = law.atoms() {
        // Q jumps up at every atom gap, so the sup sits just below one
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                cands.push((atoms[j].0 - atoms[i].0) * (1.0 - 1e-12));
            }
        }
    }
    if let CoeffLaw::Alpha { alpha } = law {
        let s = (2.0 * alpha).sqrt();
        cands.extend([s, 2.0 * s, 1.0, 1.0 + s, 2.0 * (1.0 - 1e-12)]);
    }
    grid_sup(&cands, f)
}

/// Support diameter, or a wide multiple of σ for unbounded laws.
fn law_scale(law: &CoeffLaw) -> Result<f64> {
    if let Some(atoms) = law.atoms() {
        return Ok(atoms.last().unwrap().0 - atoms[0].0);
    }
    match law {
        CoeffLaw::Alpha { .. } => Ok(2.0),
        CoeffLaw::Gaussian { sigma } => Ok(20.0 * sigma),
        CoeffLaw::Scaled { base, factor } => Ok(factor * law_scale(base)?),
        CoeffLaw::Empirical { samples } => Ok(samples[samples.len() - 1] - samples[0]),
        _ => Err(LabError::UnsupportedLaw { op: "law_scale", law: law.to_string() }),
    }
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Grid maximum refined by golden-section search around the best node.
fn grid_sup(cands: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut pts = cands.to_vec();
    pts.sort_by(f64::total_cmp);
    let mut best = (0.0f64, 0usize);
    for (i, &d) in pts.iter().enumerate() {
        let v = f(d)?;
        if v > best.0 {
            best = (v, i);
        }
    }
    let i = best.1;
    let (mut lo, mut hi) = (pts[i.saturating_sub(1)], pts[(i + 1).min(pts.len() - 1)]);
    let g = 0.618_033_988_749_895;
    for _ in 0..60 {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        let (v1, v2) = (f(m1)?, f(m2)?);
        best.0 = best.0.max(v1).max(v2);
        if v1 < v2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::{LawRule, LawTemplate, Weights};
    use crate::rng::Stream;
    use crate::expr::Expr;

    fn brute_force(xs: &[f64], lambda: f64) -> f64 {
        let n = xs.len();
        let mut best = 0;
        for &v in xs {
            best = best.max(xs.iter().filter(|&&x| v <= x && x <= v + lambda).count());
        }
        best as f64 / n as f64
    }

    #[test]
    fn two_pointer_matches_brute_force() {
        let mut s = Stream::new(11, 0, 0);
        for case in 0..200 {
            let n = 1 + (case % 50);
            // coarse lattice to force ties and exact edge hits
            let mut xs: Vec<f64> = (0..n).map(|_| (s.next_open01() * 20.0).floor() / 4.0).collect();
            xs.sort_by(f64::total_cmp);
            for lambda in [0.0, 0.25, 0.5, 1.0, 2.75, 10.0] {
                assert_eq!(empirical_concentration(&xs, lambda).unwrap(), brute_force(&xs, lambda));
            }
        }
    }

    #[test]
    fn empirical_examples() {
        assert_eq!(empirical_concentration(&[3.0; 10], 0.0).unwrap(), 1.0);
        assert!(empirical_concentration(&[], 1.0).is_err());
        let xs = CoeffLaw::Rademacher.sample(&mut Stream::new(3, 0, 0), 100_000);
        let q = empirical_concentration_unsorted(&xs, 1.0).unwrap();
        assert!((q - 0.5).abs() < 0.015);
        let mut s = Stream::new(4, 0, 0);
        let us: Vec<f64> = (0..100_000).map(|_| s.next_open01()).collect();
        let q = empirical_concentration_unsorted(&us, 0.25).unwrap();
        assert!((q - 0.25).abs() < 0.015);
    }

    #[test]
    fn divergence_series_examples() {
        let rad = LawSequence::iid(CoeffLaw::Rademacher).unwrap();
        assert_eq!(anticoncentration_series(&rad, 1.0, 99).unwrap(), 50.0);
        // JumpLaw(0) is a point mass, so the k = 0 term vanishes
        let direct: f64 = (1..=99u64).map(|k| 1.0 / ((k + 1) * (k + 1)) as f64).sum();
        let got = anticoncentration_series(&LawSequence::jump(), 1.0, 99).unwrap();
        assert!((got - direct).abs() < 1e-14);
        assert!((got - 0.634_983_900_184_893).abs() < 1e-12, "{got}");
        let det = LawSequence::iid(CoeffLaw::Deterministic { c: 3.0 }).unwrap();
        assert_eq!(anticoncentration_series(&det, 0.7, 500).unwrap(), 0.0);
    }

    #[test]
    fn weighted_series_examples() {
        let rad = LawSequence::iid(CoeffLaw::Rademacher).unwrap();
        assert!(matches!(weighted_series(&rad, 5), Err(LabError::MissingWeights)));
        let rad = rad.with_weights(Weights::Constant(1.0)).unwrap();
        assert_eq!(weighted_series(&rad, 99).unwrap(), 50.0);
        let sb = LawSequence::new(LawRule::Template(LawTemplate::ScaledBernoulli {
            c: Expr::parse("1").unwrap(),
            p: Expr::parse("1/(k+2)").unwrap(),
        }))
        .unwrap()
        .with_weights(Weights::Constant(0.5))
        .unwrap();
        assert_eq!(weighted_series(&sb, 0).unwrap(), 0.125);
    }

    #[test]
    fn aux_series_closed_forms() {
        let rad = LawSequence::iid(CoeffLaw::Rademacher).unwrap();
        let a = AuxSeries::new(AuxKind::A, rad.clone().with_weights(Weights::Constant(1.0)).unwrap())
            .unwrap();
        assert!((a.eval(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((a.eval(1e-9).unwrap() - 0.5).abs() < 1e-12);
        let rho = AuxSeries::new(AuxKind::Rho, rad.clone()).unwrap();
        assert!((rho.eval(0.5).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        let rho_n = AuxSeries::new(AuxKind::Rho, rad).unwrap().truncated(50);
        let want = (1.0 - 0.25f64.powi(51)) / 0.75;
        assert!((rho_n.eval(0.5).unwrap() - want).abs() < 1e-14);
        let gap = 1e-7;
        let r2 = gap * (2.0 - gap);
        assert!((a.eval_gap(gap).unwrap() * r2 / 0.5 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aux_series_direct_summation() {
        // Jump sequence: Var = 1 - (k+1)^-2, summed directly until the tail is tiny
        let v = AuxSeries::new(AuxKind::V, LawSequence::jump()).unwrap();
        let r: f64 = 0.9;
        let want: f64 = (0..2000).map(|k| (1.0 - 1.0 / ((k + 1) as f64).powi(2)) * r.powi(2 * k)).sum();
        assert!((v.eval(r).unwrap() - want).abs() < 1e-10);
        let rho = AuxSeries::new(AuxKind::Rho, LawSequence::jump()).unwrap();
        // E X² = (k+1)² - 1
        let want: f64 = (0..4000).map(|k| (((k + 1) * (k + 1)) as f64 - 1.0) * r.powi(2 * k)).sum();
        assert!((rho.eval(r).unwrap() - want).abs() < 1e-8 * want);
    }

    #[test]
    fn weak_l2_examples() {
        assert!((weak_l2_norm_law(&CoeffLaw::Rademacher, -1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(weak_l2_norm_law(&CoeffLaw::Deterministic { c: 3.0 }, 3.0).unwrap(), 0.0);
        let a = 0.125;
        let got = weak_l2_norm_law(&CoeffLaw::alpha(a).unwrap(), 0.0).unwrap();
        assert!((got - (2.0 * a * (1.0 - 2.0 * a)).sqrt()).abs() < 1e-9, "{got}");
        for n in [1_000, 10_000, 100_000] {
            let xs: Vec<f64> = CoeffLaw::Rademacher
                .sample(&mut Stream::new(8, 0, 0), n)
                .into_iter()
                .map(|x| x + 1.0)
                .collect();
            assert!((weak_l2_norm_samples(&xs).unwrap() - 2f64.sqrt()).abs() < 0.05);
        }
    }

    #[test]
    fn subgaussian_examples() {
        let want = 1.0 / std::f64::consts::LN_2.sqrt();
        assert!((subgaussian_norm_bound(&CoeffLaw::Rademacher).unwrap() - want).abs() < 1e-15);
        assert!((subgaussian_norm_bound(&CoeffLaw::alpha(0.3).unwrap()).unwrap() - want).abs() < 1e-15);
        assert_eq!(subgaussian_norm_bound(&CoeffLaw::Deterministic { c: 0.0 }).unwrap(), 0.0);
        assert!(subgaussian_norm_bound(&CoeffLaw::gaussian(1.0).unwrap()).is_err());
    }

    #[test]
    fn sup_delta_examples() {
        let v = sup_delta_concentration(&CoeffLaw::Rademacher).unwrap();
        assert!((v - 2.0).abs() < 1e-10, "{v}");
        assert_eq!(sup_delta_concentration(&CoeffLaw::Deterministic { c: 1.0 }).unwrap(), 0.0);
        for alpha in [0.01, 0.05, 0.125, 0.25] {
            let v = sup_delta_concentration(&CoeffLaw::alpha(alpha).unwrap()).unwrap();
            assert!(v <= 8.0 * alpha, "alpha={alpha}: {v}");
            assert!(v > 0.0);
        }
    }
}
