//! Coefficient realizations, evaluation on circles and arcs, radius
//! schedules and the rotation decomposition.
//!
//! Radii are carried as their distance to the unit circle (`gap = 1 − r`) so
//! that schedules with `1 − r` near `1e-9` keep full precision. Evaluation
//! folds coefficients modulo the grid size before a single inverse FFT, which
//! is exact and costs `O(N + M log M)` for any degree `N`.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rand::RngCore;
use rustfft::{Fft, FftPlanner};

use crate::concentration::AuxSeries;
use crate::error::{LabError, Result};
use crate::laws::{CoeffLaw, EnvelopeShape, LawSequence};
use crate::rng::ReplicateKey;

/// A radius stored through `1 − r`; inside the unit disk unless built with
/// [`Radius::for_polynomial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radius {
    gap: f64,
}

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&r) {
            return Err(LabError::RadiusOutOfRange(r));
        }
        Ok(Self { gap: 1.0 - r })
    }

    /// Any positive radius, for evaluating finite polynomials (`r ≥ 1` allowed).
    pub fn for_polynomial(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(LabError::RadiusOutOfRange(r));
        }
        Ok(Self { gap: 1.0 - r })
    }

    pub fn from_gap(gap: f64) -> Result<Self> {
        if !(gap > 0.0 && gap <= 1.0) {
            return Err(LabError::RadiusOutOfRange(1.0 - gap));
        }
        Ok(Self { gap })
    }

    pub fn r(&self) -> f64 {
        1.0 - self.gap
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// `log r`.
    pub fn ln(&self) -> f64 {
        (-self.gap).ln_1p()
    }

    /// `r^k`, with `0^0 = 1`.
    pub fn pow(&self, k: f64) -> f64 {
        if k == 0.0 {
            1.0
        } else if self.gap == 1.0 {
            0.0
        } else {
            (k * self.ln()).exp()
        }
    }
}

/// Anything that can hand out coefficients `X_0..X_N` in blocks.
pub trait CoeffSource: Sync {
    /// `N`, the highest index.
    fn degree(&self) -> usize;
    /// Writes `X_start, X_start+1, …` into `out`.
    fn fill(&self, start: usize, out: &mut [f64]);
}

impl CoeffSource for [f64] {
    fn degree(&self) -> usize {
        self.len().saturating_sub(1)
    }
    fn fill(&self, start: usize, out: &mut [f64]) {
        out.copy_from_slice(&self[start..start + out.len()]);
    }
}

impl CoeffSource for Vec<f64> {
    fn degree(&self) -> usize {
        self.as_slice().degree()
    }
    fn fill(&self, start: usize, out: &mut [f64]) {
        self.as_slice().fill(start, out)
    }
}

/// One seeded realization `X_0..X_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSample {
    pub coeffs: Vec<f64>,
    pub seq_id: String,
    pub seed: u64,
    pub replicate_id: u64,
}

impl SeriesSample {
    /// A sample with explicit coefficients (tests, fixed polynomials).
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        Self { coeffs, seq_id: "fixed".into(), seed: 0, replicate_id: 0 }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

impl CoeffSource for SeriesSample {
    fn degree(&self) -> usize {
        self.coeffs.degree()
    }
    fn fill(&self, start: usize, out: &mut [f64]) {
        self.coeffs.fill(start, out)
    }
}

/// Coefficients generated on demand from their addresses; never stored.
#[derive(Debug, Clone)]
pub struct LazySeries<'a> {
    seq: &'a LawSequence,
    key: ReplicateKey,
    n: usize,
    fixed: Option<CoeffLaw>,
}

impl<'a> LazySeries<'a> {
    pub fn new(seq: &'a LawSequence, n: usize, seed: u64, replicate: u64) -> Result<Self> {
        let fixed = if seq.is_stationary() { Some(seq.law_at(0)?) } else { None };
        // surface law errors before workers start
        seq.law_at(n as u64)?;
        Ok(Self { seq, key: ReplicateKey::new(seed, replicate), n, fixed })
    }

    #[inline]
    pub fn coeff(&self, k: usize) -> f64 {
        let mut s = self.key.stream(k as u64);
        match &self.fixed {
            Some(law) => law.draw(&mut s),
            None => self.seq.law_at(k as u64).map(|l| l.draw(&mut s)).unwrap_or(f64::NAN),
        }
    }

    pub fn materialize(&self) -> Vec<f64> {
        (0..=self.n).map(|k| self.coeff(k)).collect()
    }
}

impl CoeffSource for LazySeries<'_> {
    fn degree(&self) -> usize {
        self.n
    }
    fn fill(&self, start: usize, out: &mut [f64]) {
        if let Some(CoeffLaw::Rademacher) = self.fixed {
            // hot path of the growth experiments; same draws as `CoeffLaw::draw`
            for (i, x) in out.iter_mut().enumerate() {
                let bit = self.key.stream((start + i) as u64).next_u64() >> 63;
                *x = if bit == 0 { -1.0 } else { 1.0 };
            }
            return;
        }
        for (i, x) in out.iter_mut().enumerate() {
            *x = self.coeff(start + i);
        }
    }
}

/// Draws `X_k` from the `k`-th law with stream `(seed, replicate, k)`.
pub fn sample_series(seq: &LawSequence, n: usize, seed: u64, replicate: u64) -> Result<SeriesSample> {
    let coeffs = LazySeries::new(seq, n, seed, replicate)?.materialize();
    if coeffs.iter().any(|x| !x.is_finite()) {
        return Err(LabError::InvalidLaw(format!("non-finite coefficient in {}", seq.label())));
    }
    Ok(SeriesSample { coeffs, seq_id: seq.label().to_string(), seed, replicate_id: replicate })
}

/// `Σ c_k z^k` by Horner's rule.
pub fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Complex-coefficient Horner.
pub fn horner_c(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

const TAU_HI: f64 = std::f64::consts::TAU;
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `k·φ mod 2π` keeping the full product error out of the reduction.
pub(crate) fn reduced_angle(k: f64, phi: f64) -> f64 {
    let hi = k * phi;
    let lo = k.mul_add(phi, -hi);
    let n = (hi / TAU).round();
    let r = (-n).mul_add(TAU_HI, hi);
    (-n).mul_add(TAU_LO, r) + lo
}

/// `w^k` for `w = r·e^{iφ}`.
fn wpow(radius: Radius, phi: f64, k: usize) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(radius.pow(k as f64), reduced_angle(k as f64, phi))
}

/// Accumulates `Σ X_k w_p^k` folded modulo a period `m` for a few phases
/// `w_p = r·e^{iφ_p}` at once: `c[j][p] = Σ_q X_{qm+j} w_p^{qm}`, so that
/// `b_p[j] = w_p^j c[j][p]`. Sharing the pass keeps each coefficient read once.
#[derive(Debug, Clone)]
struct Fold {
    m: usize,
    radius: Radius,
    phases: Vec<f64>,
    limit: usize,
    c: Vec<Complex64>,
}

impl Fold {
    fn new(m: usize, radius: Radius, phase: f64, limit: usize) -> Self {
        Self::multi(m, radius, vec![phase], limit)
    }

    fn multi(m: usize, radius: Radius, phases: Vec<f64>, limit: usize) -> Self {
        debug_assert!((1..=4).contains(&phases.len()));
        let c = vec![Complex64::new(0.0, 0.0); m * phases.len()];
        Self { m, radius, phases, limit, c }
    }

    fn push(&mut self, start: usize, xs: &[f64]) {
        let end = (start + xs.len()).min(self.limit + 1);
        let np = self.phases.len();
        let mut scale = [Complex64::new(0.0, 0.0); 4];
        let mut k = start;
        while k < end {
            let q = k / self.m;
            let run_end = end.min((q + 1) * self.m);
            let base = q * self.m;
            let xs = &xs[k - start..run_end - start];
            if np == 1 {
                let s = wpow(self.radius, self.phases[0], base);
                if s == Complex64::new(0.0, 0.0) {
                    return;
                }
                for (c, &x) in self.c[k - base..run_end - base].iter_mut().zip(xs) {
                    // plain mul+add: `mul_add` is a libm call without the fma target feature
                    c.re += x * s.re;
                    c.im += x * s.im;
                }
            } else {
                for (s, &phi) in scale.iter_mut().zip(&self.phases) {
                    *s = wpow(self.radius, phi, base);
                }
                let cs = &mut self.c[(k - base) * np..(run_end - base) * np];
                match np {
                    2 => accumulate::<2>(cs, xs, &scale),
                    3 => accumulate::<3>(cs, xs, &scale),
                    _ => accumulate::<4>(cs, xs, &scale),
                }
            }
            k = run_end;
        }
    }

    /// Unfolded DFT inputs `b_p[j] = w_p^j c[j][p]`, one vector per phase.
    fn finish(self) -> Vec<Vec<Complex64>> {
        let np = self.phases.len();
        let radius = self.radius;
        self.phases
            .iter()
            .enumerate()
            .map(|(p, &phi)| {
                (0..self.m).map(|j| self.c[j * np + p] * wpow(radius, phi, j)).collect()
            })
            .collect()
    }

    /// Values at the nodes `r·e^{iφ_p}`.
    fn point_values(self) -> Vec<Complex64> {
        self.finish().into_iter().map(|b| b.into_iter().sum()).collect()
    }
}

#[inline]
fn accumulate<const P: usize>(cs: &mut [Complex64], xs: &[f64], scale: &[Complex64; 4]) {
    for (row, &x) in cs.chunks_exact_mut(P).zip(xs) {
        for p in 0..P {
            row[p].re += x * scale[p].re;
            row[p].im += x * scale[p].im;
        }
    }
}

const BLOCK: usize = 1 << 14;
const POINT_PERIOD: usize = 256;

/// Feeds the source through every fold in one pass.
fn run_folds(src: &dyn CoeffSource, folds: &mut [Fold]) {
    let lim = folds.iter().map(|f| f.limit).max().unwrap_or(0).min(src.degree());
    let mut buf = vec![0.0; BLOCK];
    let mut start = 0;
    while start <= lim {
        let len = BLOCK.min(lim + 1 - start);
        src.fill(start, &mut buf[..len]);
        for f in folds.iter_mut() {
            if start <= f.limit {
                f.push(start, &buf[..len]);
            }
        }
        start += len;
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn inverse_fft(m: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(m))
}

fn grid_from_fold(fold: Fold) -> Vec<Complex64> {
    let m = fold.m;
    let mut b = fold.finish().pop().unwrap();
    inverse_fft(m).process(&mut b);
    b
}

/// `F_N(r·e^{i(φ + 2πj/m)})` for `j = 0..m`, any `N`.
pub fn evaluate_on_grid(src: &dyn CoeffSource, radius: Radius, phase: f64, m: usize) -> Vec<Complex64> {
    assert!(m >= 1, "grid size must be positive");
    let mut folds = [Fold::new(m, radius, phase, src.degree())];
    run_folds(src, &mut folds);
    let [fold] = folds;
    grid_from_fold(fold)
}

/// `F_N(r·e^{2πij/m})`, `j = 0..m`. When `m ≥ N + 1` this is the FFT of the
/// zero-padded coefficients `X_k r^k`; otherwise coefficients are folded first.
pub fn evaluate_on_circle(src: &dyn CoeffSource, r: f64, m: usize) -> Result<Vec<Complex64>> {
    if m == 0 {
        return Err(LabError::Precondition("grid size must be positive".into()));
    }
    Ok(evaluate_on_grid(src, Radius::new(r)?, 0.0, m))
}

/// Values at arbitrary points `r·e^{iθ}` by folding with a short period.
pub fn evaluate_at_angles(src: &dyn CoeffSource, radius: Radius, thetas: &[f64]) -> Vec<Complex64> {
    let mut folds: Vec<Fold> = thetas
        .chunks(4)
        .map(|t| Fold::multi(POINT_PERIOD, radius, t.to_vec(), src.degree()))
        .collect();
    run_folds(src, &mut folds);
    folds.into_iter().flat_map(Fold::point_values).collect()
}

/// An arc `I = (a, b)` of the circle with a requested panel count. Angles can
/// wrap (`a < 0` is fine) as long as `0 < b − a ≤ 2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSpec {
    pub a: f64,
    pub b: f64,
    pub m: usize,
}

impl ArcSpec {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || !(b > a) || b - a > TAU + 1e-12 {
            return Err(LabError::Precondition(format!(
                "arc ({a}, {b}) must satisfy 0 < b - a <= 2π"
            )));
        }
        if m < 16 {
            return Err(LabError::Precondition(format!("arc grid size {m} must be >= 16")));
        }
        Ok(Self { a, b, m })
    }

    pub fn full_circle(m: usize) -> Result<Self> {
        Self::new(0.0, TAU, m)
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn with_m(&self, m: usize) -> Self {
        Self { m, ..*self }
    }
}

/// Node layout of the two nested midpoint rules on an arc: the coarse rule
/// has panels of width `h = 2π/M` plus one short trailing panel of width
/// `tail`; the fine rule halves every panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcLayout {
    pub arc: ArcSpec,
    /// size of the coarse periodic grid; the fine values come from `4M`
    pub big_m: usize,
    pub h: f64,
    pub panels: usize,
    pub tail: f64,
}

impl ArcLayout {
    pub fn new(arc: ArcSpec) -> Self {
        let target = TAU * arc.m as f64 / arc.len();
        let big_m = (target.ceil() as usize).next_power_of_two().max(4);
        let h = TAU / big_m as f64;
        let mut panels = (arc.len() / h).floor() as usize;
        let mut tail = arc.len() - panels as f64 * h;
        if tail < 1e-12 * arc.len() {
            tail = 0.0;
        } else if tail > h * (1.0 - 1e-12) {
            panels += 1;
            tail = 0.0;
        }
        Self { arc, big_m, h, panels, tail }
    }

    fn tail_angles(&self) -> [f64; 3] {
        let t0 = self.arc.a + self.panels as f64 * self.h;
        [t0 + 0.5 * self.tail, t0 + 0.25 * self.tail, t0 + 0.75 * self.tail]
    }
}

/// `F_N` on the nodes of both midpoint rules of an arc.
#[derive(Debug, Clone)]
pub struct ArcValues {
    pub layout: ArcLayout,
    pub radius: Radius,
    /// values at `a + j·h/4`, `j = 0..4M`
    grid: Vec<Complex64>,
    /// trailing-panel nodes: coarse midpoint, fine quarter points
    tail: [Complex64; 3],
}

impl ArcValues {
    /// `(coarse, fine)` midpoint sums of `f(F)` over the arc.
    pub fn integrate(&self, f: impl Fn(Complex64) -> f64) -> (f64, f64) {
        let l = &self.layout;
        let mut coarse = crate::stats::KahanSum::new();
        let mut fine = crate::stats::KahanSum::new();
        for p in 0..l.panels {
            coarse.add(f(self.grid[4 * p + 2]));
            fine.add(f(self.grid[4 * p + 1]));
            fine.add(f(self.grid[4 * p + 3]));
        }
        let mut c = coarse.value() * l.h;
        let mut fi = fine.value() * 0.5 * l.h;
        if l.tail > 0.0 {
            c += l.tail * f(self.tail[0]);
            fi += 0.5 * l.tail * (f(self.tail[1]) + f(self.tail[2]));
        }
        (c, fi)
    }

    /// `(θ, F(re^{iθ}))` on the fine rule's nodes with their weights.
    pub fn fine_nodes(&self) -> Vec<(f64, f64, Complex64)> {
        let l = &self.layout;
        let q = 0.25 * l.h;
        let mut out = Vec::with_capacity(2 * l.panels + 2);
        for p in 0..l.panels {
            for j in [4 * p + 1, 4 * p + 3] {
                out.push((l.arc.a + j as f64 * q, 0.5 * l.h, self.grid[j]));
            }
        }
        if l.tail > 0.0 {
            let t = l.tail_angles();
            out.push((t[1], 0.5 * l.tail, self.tail[1]));
            out.push((t[2], 0.5 * l.tail, self.tail[2]));
        }
        out
    }

    /// Coarse rule nodes with weights.
    pub fn coarse_nodes(&self) -> Vec<(f64, f64, Complex64)> {
        let l = &self.layout;
        let mut out: Vec<_> = (0..l.panels)
            .map(|p| (l.arc.a + (p as f64 + 0.5) * l.h, l.h, self.grid[4 * p + 2]))
            .collect();
        if l.tail > 0.0 {
            out.push((l.tail_angles()[0], l.tail, self.tail[0]));
        }
        out
    }
}

/// One requested arc evaluation.
#[derive(Debug, Clone, Copy)]
pub struct ArcRequest {
    pub radius: Radius,
    pub arc: ArcSpec,
    /// coefficients above this index are ignored
    pub degree: usize,
}

/// Evaluates every request in a single pass over the coefficients.
pub fn arc_values_multi(src: &dyn CoeffSource, reqs: &[ArcRequest]) -> Vec<ArcValues> {
    let mut folds = Vec::with_capacity(reqs.len() * 2);
    let layouts: Vec<ArcLayout> = reqs.iter().map(|q| ArcLayout::new(q.arc)).collect();
    for (q, l) in reqs.iter().zip(&layouts) {
        folds.push(Fold::new(4 * l.big_m, q.radius, q.arc.a, q.degree));
        let lim = if l.tail > 0.0 { q.degree } else { 0 };
        folds.push(Fold::multi(POINT_PERIOD, q.radius, l.tail_angles().to_vec(), lim));
    }
    run_folds(src, &mut folds);
    let mut it = folds.into_iter();
    reqs.iter()
        .zip(layouts)
        .map(|(q, layout)| {
            let grid = grid_from_fold(it.next().unwrap());
            let pts = it.next().unwrap().point_values();
            let tail = [pts[0], pts[1], pts[2]];
            ArcValues { layout, radius: q.radius, grid, tail }
        })
        .collect()
}

pub fn arc_values(src: &dyn CoeffSource, radius: Radius, arc: ArcSpec) -> ArcValues {
    let req = ArcRequest { radius, arc, degree: src.degree() };
    arc_values_multi(src, &[req]).pop().unwrap()
}

/// Radii `r_1 < … < r_K` with `A(r_k) = k⁶`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSchedule {
    pub radii: Vec<Radius>,
    pub targets: Vec<f64>,
    pub tolerance: f64,
}

impl RadiusSchedule {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

/// Inverts `r ↦ A(r)` at the targets `k⁶`, `k = 1..=K`, by bisection on
/// `log(1 − r)`.
pub fn radius_schedule(a: &AuxSeries, k_max: usize) -> Result<RadiusSchedule> {
    if k_max == 0 {
        return Ok(RadiusSchedule { radii: vec![], targets: vec![], tolerance: 1e-9 });
    }
    let top = (k_max as f64).powi(6);
    certify_divergence(a, top)?;
    let term0 = a.term(0)?;
    let mut radii = Vec::with_capacity(k_max);
    let mut targets = Vec::with_capacity(k_max);
    let mut hi_gap = 1.0f64;
    for k in 1..=k_max {
        let target = (k as f64).powi(6);
        if target <= term0 {
            return Err(LabError::ScheduleUnreachable(format!(
                "A(0+) = {term0} already exceeds the target {target} for k = {k}"
            )));
        }
        // bracket: A(lo_gap) >= target > A(hi_gap)
        let mut lo_gap = hi_gap;
        loop {
            let next = lo_gap * 0.5;
            if next < 1e-300 {
                return Err(unreachable_msg(top));
            }
            let v = a.eval_gap(next)?;
            lo_gap = next;
            if v >= target {
                break;
            }
            hi_gap = next;
        }
        for _ in 0..200 {
            let mid = (lo_gap * hi_gap).sqrt();
            if mid <= lo_gap || mid >= hi_gap {
                break;
            }
            let v = a.eval_gap(mid)?;
            if v >= target {
                lo_gap = mid;
            } else {
                hi_gap = mid;
            }
            if hi_gap / lo_gap - 1.0 < 1e-13 {
                break;
            }
        }
        let v_lo = a.eval_gap(lo_gap)?;
        let v_hi = if hi_gap < 1.0 { a.eval_gap(hi_gap)? } else { term0 };
        let gap = if (v_hi - target).abs() < (v_lo - target).abs() { hi_gap } else { lo_gap };
        radii.push(Radius::from_gap(gap)?);
        targets.push(target);
        hi_gap = gap;
    }
    Ok(RadiusSchedule { radii, targets, tolerance: 1e-9 })
}

fn unreachable_msg(top: f64) -> LabError {
    LabError::ScheduleUnreachable(format!(
        "partial sums of Σ t_k²(1 − Q(X_k, t_k)) stay below K⁶ = {top}; \
         the divergence condition Σ t_k²(1 − Q(X_k, t_k)) = ∞ is not met"
    ))
}

/// Partial sums must exceed `top`, otherwise `A` may be bounded.
fn certify_divergence(a: &AuxSeries, top: f64) -> Result<()> {
    let mut n = 1024u64;
    let cap = if a.sequence().stationary_from().is_some() { 1u64 << 60 } else { 1u64 << 24 };
    loop {
        if a.partial_sum(n)? > top {
            return Ok(());
        }
        if n >= cap {
            return Err(unreachable_msg(top));
        }
        n = (n * 4).min(cap);
    }
}

/// Smallest `N` with `Σ_{k>N} M_k r^k ≤ tol` for the sequence's envelope.
pub fn truncation_order(seq: &LawSequence, r: Radius, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(LabError::Precondition(format!("tolerance {tol} must be positive")));
    }
    if !(r.gap() > 0.0) {
        return Err(LabError::RadiusOutOfRange(r.r()));
    }
    let env = seq.envelope()?;
    let x = r;
    let gap = x.gap();
    let tail = |n: u64| -> f64 {
        // Σ_{k ≥ n} M_k x^k
        let xn = x.pow(n as f64);
        match env.shape {
            EnvelopeShape::Constant(m) => m * xn / gap,
            EnvelopeShape::Affine { a, b } => {
                let nf = n as f64;
                let xr = x.r();
                a * xn / gap + b * xn * (nf * gap + xr) / (gap * gap)
            }
            EnvelopeShape::Power { c, d } => {
                let nf = n as f64;
                let ratio = ((nf + 2.0) / (nf + 1.0)).powi(d as i32) * x.r();
                if ratio >= 1.0 {
                    f64::INFINITY
                } else {
                    c * (nf + 1.0).powi(d as i32) * xn / (1.0 - ratio)
                }
            }
        }
    };
    if tail(1) <= tol {
        return Ok(0);
    }
    let mut hi = 2u64;
    while tail(hi + 1) > tol {
        hi *= 2;
        if hi > 1 << 50 {
            return Err(LabError::UnboundedGrowth("truncation order overflow".into()));
        }
    }
    let mut lo = hi / 2;
    // tail(lo + 1) > tol >= tail(hi + 1)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid + 1) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi as usize)
}

/// `H_k` coefficient lists with `F(z) = Σ_{k<ℓ} z^k H_k(z)`; entry `j` of
/// `H_k` multiplies `z^{jℓ}`.
pub fn rotation_decompose(coeffs: &[f64], ell: usize) -> Result<Vec<Vec<f64>>> {
    if ell == 0 {
        return Err(LabError::Precondition("rotation order must be >= 1".into()));
    }
    Ok((0..ell).map(|k| coeffs.iter().skip(k).step_by(ell).copied().collect()).collect())
}

/// `H(z) = Σ_j h_j z^{jℓ}`.
pub fn eval_rotation_component(h: &[f64], ell: usize, z: Complex64) -> Complex64 {
    horner(h, z.powu(ell as u32))
}

/// Result of subtracting the pole `1/(1−z)² = Σ (k+1) z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleProbe {
    /// last index with a nonzero residual, −1 when none
    pub k0: i64,
    pub residual: Vec<f64>,
    pub exceptions: usize,
}

pub fn pole_subtraction_probe(coeffs: &[f64]) -> PoleProbe {
    let residual: Vec<f64> = coeffs.iter().enumerate().map(|(k, x)| x - (k + 1) as f64).collect();
    let k0 = residual.iter().rposition(|r| *r != 0.0).map_or(-1, |i| i as i64);
    let exceptions = residual.iter().filter(|r| **r != 0.0).count();
    PoleProbe { k0, residual, exceptions }
}
