//! Property tests for the invariants the library promises.

use std::f64::consts::{PI, TAU};

use boundary_lab::concentration::{empirical_concentration, AuxKind, AuxSeries};
use boundary_lab::functionals::{arc_integral, PsiSpec};
use boundary_lab::inequalities::{
    mixture_lemma_check, rademacher_sum_concentration, rogozin_core, Verdict,
};
use boundary_lab::laws::optimal_alpha;
use boundary_lab::potential::{dilog, log_potential, CircleArc};
use boundary_lab::runner::Cell;
use boundary_lab::series::{horner, sample_series};
use boundary_lab::stats::sorted;
use boundary_lab::{ArcSpec, CoeffLaw, LawSequence, Radius, SeriesSample, Stream};
use num_complex::Complex64;
use proptest::prelude::*;

fn any_law() -> impl Strategy<Value = CoeffLaw> {
    prop_oneof![
        Just(CoeffLaw::Rademacher),
        (0u64..50).prop_map(|k| CoeffLaw::Jump { k }),
        (0.01f64..0.49).prop_map(|alpha| CoeffLaw::Alpha { alpha }),
        (0.1f64..5.0).prop_map(|sigma| CoeffLaw::Gaussian { sigma }),
        (0.1f64..3.0, 0.05f64..0.95).prop_map(|(c, p)| CoeffLaw::scaled_bernoulli(c, p).unwrap()),
    ]
}

fn prob_vector(s: &mut Stream, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| s.next_open01()).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn concentration_is_monotone_and_bounded(law in any_law(), a in 0.001f64..5.0, b in 0.001f64..5.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let q_lo = law.exact_concentration(lo).unwrap();
        let q_hi = law.exact_concentration(hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&q_lo) && (0.0..=1.0).contains(&q_hi));
        prop_assert!(q_lo <= q_hi + 1e-12);
    }

    #[test]
    fn empirical_concentration_is_monotone(xs in prop::collection::vec(-10.0f64..10.0, 1..200), a in 0.0f64..5.0, d in 0.0f64..5.0) {
        let s = sorted(&xs);
        let q_a = empirical_concentration(&s, a).unwrap();
        let q_b = empirical_concentration(&s, a + d).unwrap();
        prop_assert!(q_a <= q_b);
        prop_assert!(q_a >= 1.0 / xs.len() as f64 - 1e-15);
    }

    #[test]
    fn variance_matches_closed_forms(k in 0u64..200, alpha in 0.01f64..0.49) {
        let jump = CoeffLaw::Jump { k }.exact_moments().unwrap().variance;
        let q = 1.0 / ((k + 1) * (k + 1)) as f64;
        prop_assert!((jump - (1.0 - q)).abs() < 1e-12);
        let v = CoeffLaw::Alpha { alpha }.exact_moments().unwrap().variance;
        prop_assert!((v + 2.0 * alpha * (2.0 * alpha).ln()).abs() < 1e-12);
    }

    #[test]
    fn samples_respect_support(k in 0u64..30, alpha in 0.01f64..0.49, seed in any::<u64>()) {
        let mut s = Stream::new(seed, 0, 0);
        for x in (CoeffLaw::Jump { k }).sample(&mut s, 64) {
            prop_assert!(x == 0.0 || x == (k + 1) as f64);
        }
        for x in (CoeffLaw::Alpha { alpha }).sample(&mut s, 64) {
            prop_assert!(x.abs() <= 1.0);
        }
    }

    #[test]
    fn streams_reproduce(seed in any::<u64>(), rep in any::<u64>(), idx in any::<u64>()) {
        let mut a = Stream::new(seed, rep, idx);
        let mut b = Stream::new(seed, rep, idx);
        for _ in 0..16 {
            prop_assert_eq!(a.next_open01().to_bits(), b.next_open01().to_bits());
        }
    }

    #[test]
    fn mixture_lemma_holds((nx, ny) in (1usize..6, 1usize..6), seed in any::<u64>(), t in 0.0f64..2.0) {
        let mut s = Stream::new(seed, 0, 0);
        let h: Vec<Vec<f64>> = (0..nx).map(|_| (0..ny).map(|_| 2.0 * s.next_open01()).collect()).collect();
        let mu = prob_vector(&mut s, nx);
        let nu = prob_vector(&mut s, ny);
        let r = mixture_lemma_check(&h, &mu, &nu, t).unwrap();
        prop_assert!(r.lhs <= 2.0 * r.rhs_core + 1e-12);
        prop_assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn log_plus_triangle(ws in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..8)) {
        let lp = |x: f64| x.ln().max(0.0);
        let total: Complex64 = ws.iter().map(|&(a, b)| Complex64::new(a, b)).sum();
        let rhs = (ws.len() as f64).ln() + ws.iter().map(|&(a, b)| lp(Complex64::new(a, b).norm())).sum::<f64>();
        prop_assert!(lp(total.norm()) <= rhs + 1e-12);
    }

    #[test]
    fn rogozin_core_is_scale_free(
        pairs in prop::collection::vec((0.01f64..5.0, 0.0f64..0.99), 1..20),
        l in 0.01f64..5.0,
        c in 0.1f64..10.0,
    ) {
        let (lams, qs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let base = rogozin_core(&lams, &qs, l).unwrap();
        let scaled_lams: Vec<f64> = lams.iter().map(|x| x * c).collect();
        let scaled = rogozin_core(&scaled_lams, &qs, l * c).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9 * base);
    }

    #[test]
    fn rademacher_sum_concentration_is_monotone(n in 1usize..400, l in 0.0f64..20.0) {
        let a = rademacher_sum_concentration(n, l);
        let b = rademacher_sum_concentration(n, l + 2.0);
        prop_assert!(a <= b && b <= 1.0 + 1e-12);
    }

    #[test]
    fn dilog_reflection(x in 0.01f64..0.99) {
        let lhs = dilog(Complex64::new(x, 0.0)) + dilog(Complex64::new(1.0 - x, 0.0));
        let rhs = PI * PI / 6.0 - x.ln() * (1.0 - x).ln();
        prop_assert!((lhs.re - rhs).abs() < 1e-12 && lhs.im.abs() < 1e-12);
    }

    #[test]
    fn circle_potential_mean_value(r in 0.0f64..0.99, phi in 0.0f64..TAU, outside in any::<bool>()) {
        let z = Complex64::from_polar(if outside { 1.0 / (1.0 - r) + 0.01 } else { r }, phi);
        let u = log_potential(1.0, 0.0, TAU, z).unwrap();
        prop_assert!((u - TAU * z.norm().max(1.0).ln()).abs() < 1e-8);
    }

    #[test]
    fn arc_potential_is_additive(a in -3.0f64..3.0, l1 in 0.1f64..2.0, l2 in 0.1f64..2.0, zr in 0.0f64..2.5, zphi in 0.0f64..TAU) {
        let z = Complex64::from_polar(zr, zphi);
        let arc = CircleArc::new(1.0, a, a + l1 + l2).unwrap();
        prop_assume!(arc.distance(z) > 1e-3);
        let whole = log_potential(1.0, a, a + l1 + l2, z).unwrap();
        let parts = log_potential(1.0, a, a + l1, z).unwrap() + log_potential(1.0, a + l1, a + l1 + l2, z).unwrap();
        prop_assert!((whole - parts).abs() < 1e-9);
    }

    #[test]
    fn arc_integrals_are_additive(seed in any::<u64>(), r in 0.1f64..0.95, mid in 0.5f64..2.5) {
        let seq = LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 }).unwrap();
        let s = sample_series(&seq, 64, seed, 0).unwrap();
        let psi = PsiSpec::power(2.0).unwrap();
        let radius = Radius::new(r).unwrap();
        let whole = arc_integral(&s, radius, ArcSpec::new(0.0, 3.0, 512).unwrap(), &psi).unwrap().value;
        let left = arc_integral(&s, radius, ArcSpec::new(0.0, mid, 512).unwrap(), &psi).unwrap().value;
        let right = arc_integral(&s, radius, ArcSpec::new(mid, 3.0, 512).unwrap(), &psi).unwrap().value;
        prop_assert!((whole - left - right).abs() <= 1e-8 * whole.max(1.0));
    }

    #[test]
    fn hardy_identity_on_full_circle(coeffs in prop::collection::vec(-3.0f64..3.0, 1..40), r in 0.1f64..0.99) {
        // (1/2π)∫|F|² = Σ c_k² r^{2k}
        let s = SeriesSample::from_coeffs(coeffs.clone());
        let v = arc_integral(&s, Radius::new(r).unwrap(), ArcSpec::full_circle(256).unwrap(), &PsiSpec::power(2.0).unwrap())
            .unwrap()
            .value / TAU;
        let exact: f64 = coeffs.iter().enumerate().map(|(k, c)| c * c * r.powi(2 * k as i32)).sum();
        prop_assert!((v - exact).abs() <= 1e-9 * exact.max(1e-3));
    }

    #[test]
    fn aux_series_is_increasing(r1 in 0.0f64..0.99, d in 0.0f64..0.009) {
        let seq = LawSequence::iid(CoeffLaw::Rademacher).unwrap()
            .with_weights(boundary_lab::laws::Weights::Constant(1.0)).unwrap();
        let a = AuxSeries::new(AuxKind::A, seq).unwrap();
        prop_assert!(a.eval(r1).unwrap() <= a.eval(r1 + d).unwrap() + 1e-12);
    }

    #[test]
    fn horner_matches_direct_sum(coeffs in prop::collection::vec(-2.0f64..2.0, 1..30), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let z = Complex64::new(x, y);
        let direct: Complex64 = coeffs.iter().enumerate().map(|(k, c)| *c * z.powu(k as u32)).sum();
        prop_assert!((horner(&coeffs, z) - direct).norm() < 1e-10);
    }

    #[test]
    fn csv_cells_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(Cell::Num(v).render().parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn optimal_alpha_stays_in_range(k in 1u64..1_000_000) {
        let a = optimal_alpha(k).unwrap();
        prop_assert!(a > 0.0 && a < 0.5);
    }
}
