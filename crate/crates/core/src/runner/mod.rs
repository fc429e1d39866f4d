//! Experiment orchestration: config → plan → parallel execution → CSV,
//! gnuplot and a JSON manifest.
//!
//! Each experiment is a pure function of `(plan, seed)`. Replicates run on a
//! dedicated rayon pool and merge in replicate order, so outputs are
//! byte-identical across repeated runs and across thread counts.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rand::RngCore;
use rayon::prelude::*;

use crate::concentration::{concentration_of, empirical_concentration};
use crate::error::{LabError, Result};
use crate::functionals::{log_fluctuation_tail, log_integral_band, radius_for_rho, snb_growth_profile};
use crate::inequalities::{self as ineq, BoundReport, LambdaRule, Verdict};
use crate::laws::{optimal_alpha, CoeffLaw, LawSequence};
use crate::potential::log_integral_convergence;
use crate::roots::{annulus_statistics, blaschke_sum, jensen_residual, polynomial_roots};
use crate::rng::Stream;
use crate::series::sample_series;
use crate::stats;

pub use config::{ExperimentConfig, ExperimentKind, Plan, RadiusChoice, Suite, SuitePlan};
pub use output::{read_csv, Cell, OutputFile, RunManifest, Table, MANIFEST_SCHEMA_VERSION};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "BOUNDARY_LAB_THREADS";

/// One line of the experiment catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub kind: ExperimentKind,
    /// `kind → statement` as printed by `list`.
    pub line: String,
    pub description: &'static str,
    /// CSV files and their columns.
    pub outputs: Vec<(&'static str, &'static [&'static str])>,
}

const GROWTH_COLS: &[&str] = &[
    "k", "radius", "gap", "degree", "a_value", "threshold", "median", "q1", "q3", "small_ball",
    "small_ball_ci", "rho",
];
const Y_COLS: &[&str] = &["replicate", "k", "value"];
const LOG_INT_COLS: &[&str] = &["replicate", "value", "deviation"];
const TAIL_COLS: &[&str] = &["t", "freq", "ci"];
const BOUND_COLS: &[&str] = &[
    "name", "subject", "lhs", "rhs", "rhs_core", "ratio", "explicit_constant", "relation",
    "n_samples", "wilson_ci", "verdict",
];
const ANNULUS_COLS: &[&str] = &["replicate", "s", "one_minus_r", "scaled"];
const ANNULUS_SUMMARY_COLS: &[&str] = &["s", "median_one_minus_r", "scaled_median"];
const ROOT_COLS: &[&str] = &["replicate", "degree", "backward_error", "blaschke_sum", "jensen_residual"];
const CONV_COLS: &[&str] = &["approach", "point", "n", "re", "im", "deviation"];
const CAL_COLS: &[&str] = &["law", "lambda", "exact", "empirical", "abs_diff"];

/// The six experiment kinds with the statement each one exercises.
pub fn list_experiments() -> Vec<CatalogEntry> {
    ExperimentKind::ALL
        .iter()
        .map(|&kind| {
            let (statement, description, outputs): (&str, &str, Vec<(&str, &[&str])>) = match kind {
                ExperimentKind::SnbProfile => (
                    "Theorem 3.3 / Claim 3.4",
                    "growth of Y = avg_I psi(|F(r_k e^it)|) along A(r_k) = k^6, small-ball frequencies",
                    vec![("y_samples", Y_COLS), ("growth", GROWTH_COLS)],
                ),
                ExperimentKind::LogSnbProfile => (
                    "log-integral concentration for laws with bounded density",
                    "spread of the arc integral of log|F_N| around (|I|/2) log rho_N(r)",
                    vec![("log_integrals", LOG_INT_COLS), ("log_tail", TAIL_COLS), ("pointwise_tail", TAIL_COLS)],
                ),
                ExperimentKind::InequalitySuite => (
                    "anti-concentration and moment inequalities",
                    "Rogozin, Berry-Esseen, mixture lemma, Paley-Zygmund, variance reversal, weak symmetrization",
                    vec![("bounds", BOUND_COLS)],
                ),
                ExperimentKind::RootsAnnulus => (
                    "root annulus radii 1 - R_s of random polynomials",
                    "roots of sampled polynomials, R_s statistics and Blaschke sums",
                    vec![("annulus", ANNULUS_COLS), ("annulus_summary", ANNULUS_SUMMARY_COLS), ("roots", ROOT_COLS)],
                ),
                ExperimentKind::PotentialConvergence => (
                    "Appendix B",
                    "convergence of arc log-potentials U(z_n) -> U(z_0) along approach paths",
                    vec![("convergence", CONV_COLS)],
                ),
                ExperimentKind::LawCalibration => (
                    "exact vs empirical Levy concentration",
                    "plug-in Q on samples against the closed form on a lambda grid",
                    vec![("calibration", CAL_COLS)],
                ),
            };
            CatalogEntry { kind, line: format!("{kind} → {statement}"), description, outputs }
        })
        .collect()
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
    /// Some explicit-constant inequality failed.
    pub violated: bool,
}

/// Tables and scalar summaries produced by one experiment.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub summaries: BTreeMap<String, f64>,
    pub violated: bool,
}

/// Loads, validates and runs a config file.
pub fn run(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let (cfg, text) = ExperimentConfig::load(path)?;
    run_config(&cfg, &text, opts)
}

/// Parses and validates a config file without running it.
pub fn validate(path: &Path) -> Result<Plan> {
    ExperimentConfig::load(path)?.0.plan()
}

pub fn run_config(cfg: &ExperimentConfig, text: &str, opts: &RunOptions) -> Result<RunOutcome> {
    let plan = cfg.plan()?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let threads = opts.threads.or(cfg.threads).unwrap_or_else(rayon::current_num_threads).max(1);
    let out_dir = opts
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.name.as_deref().unwrap_or(cfg.kind.as_str())));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Io(e.to_string()))?;
    let started = Instant::now();
    let result = pool.install(|| execute(&plan, seed))?;
    let wall = started.elapsed().as_secs_f64();
    let outputs = output::write_tables(&out_dir, &result.tables)?;
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        experiment: cfg.kind.to_string(),
        name: cfg.name.clone(),
        config_hash: output::sha256_hex(format!("{text}\n#seed={seed}").as_bytes()),
        seed,
        threads,
        wall_time_s: wall,
        outputs,
        summaries: result.summaries,
        status: if result.violated { "violated" } else { "ok" }.to_string(),
    };
    output::write_manifest(&out_dir, &manifest)?;
    Ok(RunOutcome { manifest, out_dir, violated: result.violated })
}

/// Runs a validated plan on the current rayon pool.
pub fn execute(plan: &Plan, seed: u64) -> Result<ExperimentOutput> {
    match plan {
        Plan::SnbProfile { seq, arc, psi, k_max, replicates } => {
            snb_profile(seq, *arc, psi, *k_max, *replicates, seed)
        }
        Plan::LogSnbProfile { seq, degree, radius, arc, ts, pointwise, replicates } => {
            log_snb_profile(seq, *degree, *radius, *arc, ts, *pointwise, *replicates, seed)
        }
        Plan::InequalitySuite(p) => inequality_suite(p, seed),
        Plan::RootsAnnulus { seq, degree, s_grid, jensen_radius, replicates } => {
            roots_annulus(seq, *degree, s_grid, *jensen_radius, *replicates, seed)
        }
        Plan::PotentialConvergence { arc, z0s, approaches, ns, tolerance } => {
            Ok(potential_convergence(*arc, z0s, approaches, ns, *tolerance))
        }
        Plan::LawCalibration { laws, samples, grid, lambda_max } => {
            law_calibration(laws, *samples, *grid, *lambda_max, seed)
        }
    }
}

fn snb_profile(
    seq: &LawSequence,
    arc: crate::series::ArcSpec,
    psi: &crate::functionals::PsiSpec,
    k_max: usize,
    replicates: usize,
    seed: u64,
) -> Result<ExperimentOutput> {
    let p = snb_growth_profile(seq, arc, psi, k_max, replicates, seed)?;
    let mut ys = Table::new("y_samples", Y_COLS);
    for rep in 0..p.replicates {
        for (i, row) in p.rows.iter().enumerate() {
            ys.push(vec![rep.into(), row.k.into(), p.samples[i][rep].into()]);
        }
    }
    let mut growth = Table::new("growth", GROWTH_COLS).plotted();
    for r in &p.rows {
        growth.push(vec![
            r.k.into(),
            r.radius.r().into(),
            r.radius.gap().into(),
            r.degree.into(),
            r.a_value.into(),
            r.threshold.into(),
            r.median.into(),
            r.q1.into(),
            r.q3.into(),
            r.small_ball.into(),
            r.small_ball_ci.into(),
            r.rho.into(),
        ]);
    }
    let mut summaries = BTreeMap::new();
    summaries.insert("c_fit".into(), p.c_fit);
    summaries.insert("median_violations".into(), p.median_violations() as f64);
    summaries.insert("k_start".into(), p.k_start as f64);
    summaries.insert("max_degree".into(), p.rows.iter().map(|r| r.degree).max().unwrap_or(0) as f64);
    for r in &p.rows {
        summaries.insert(format!("median:k={}", r.k), r.median);
    }
    Ok(ExperimentOutput { tables: vec![ys, growth], summaries, violated: false })
}

#[allow(clippy::too_many_arguments)]
fn log_snb_profile(
    seq: &LawSequence,
    degree: usize,
    radius: RadiusChoice,
    arc: crate::series::ArcSpec,
    ts: &[f64],
    pointwise: bool,
    replicates: usize,
    seed: u64,
) -> Result<ExperimentOutput> {
    let r = match radius {
        RadiusChoice::Fixed(r) => r,
        RadiusChoice::LogRho(l) => radius_for_rho(seq, degree, l.exp())?,
    };
    let band = log_integral_band(seq, degree, r, arc, replicates, ts, seed)?;
    let mut values = Table::new("log_integrals", LOG_INT_COLS);
    for (i, v) in band.values.iter().enumerate() {
        values.push(vec![i.into(), (*v).into(), (v - band.center).abs().into()]);
    }
    let tail_table = |name: &str, ts: &[f64], freq: &[f64], ci: &[f64]| {
        let mut t = Table::new(name, TAIL_COLS).plotted();
        for ((t0, f), c) in ts.iter().zip(freq).zip(ci) {
            t.push(vec![(*t0).into(), (*f).into(), (*c).into()]);
        }
        t
    };
    let mut tables = vec![values, tail_table("log_tail", ts, &band.freq, &band.ci)];
    let mut summaries = BTreeMap::new();
    summaries.insert("radius".into(), r);
    summaries.insert("center".into(), band.center);
    summaries.insert("median".into(), band.median);
    summaries.insert("median_abs_dev".into(), band.median_abs_dev);
    if let Some(c) = band.decay_rate {
        summaries.insert("decay_rate".into(), c);
    }
    if pointwise {
        let z = Complex64::from_polar(r, arc.midpoint());
        let tail = log_fluctuation_tail(seq, z, degree, replicates, ts, seed)?;
        tables.push(tail_table("pointwise_tail", ts, &tail.freq, &tail.ci));
        summaries.insert("pointwise_mean_w".into(), tail.mean_w);
        if let Some(c) = tail.decay_rate {
            summaries.insert("pointwise_decay_rate".into(), c);
        }
    }
    Ok(ExperimentOutput { tables, summaries, violated: false })
}

/// Independent seed for a sub-task.
fn sub_seed(seed: u64, tag: u64) -> u64 {
    Stream::new(seed, tag, u64::MAX).next_u64()
}

/// Every report the plan asks for, in a fixed order.
pub fn suite_reports(p: &SuitePlan, seed: u64) -> Result<(Vec<BoundReport>, BTreeMap<String, f64>)> {
    let mut reports = Vec::new();
    let mut extra = BTreeMap::new();
    let bounded: Vec<&CoeffLaw> = p.laws.iter().filter(|l| l.sup_norm().is_finite()).collect();
    for (tag, suite) in p.suites.iter().enumerate() {
        let s = sub_seed(seed, tag as u64);
        match suite {
            Suite::MixtureLemma => reports.extend(ineq::mixture_lemma_random(p.mixture_cases, s)?),
            Suite::PaleyZygmund => {
                for law in &p.laws {
                    let var = law.exact_moments()?.variance;
                    for frac in [1.0, 0.5, 0.1] {
                        reports.push(ineq::paley_zygmund_fact(law, frac * var)?);
                    }
                }
            }
            Suite::LogPlusTriangle => reports.push(ineq::log_plus_triangle_check(p.triangle_tuples, s)?),
            Suite::VarianceTailChain => {
                for law in &p.laws {
                    reports.push(ineq::variance_tail_chain(law, &p.eps_grid)?);
                }
            }
            Suite::Psi2Bound => {
                for law in &bounded {
                    reports.push(ineq::subgaussian_fact_check(law)?);
                }
            }
            Suite::Rogozin => {
                let seq = LawSequence::iid(CoeffLaw::Rademacher)?;
                let rule = LambdaRule::Constant(1.0);
                reports.extend(ineq::rogozin_verify(&seq, &rule, 1.0, &p.rogozin_ns, p.mc_replicates, s)?);
            }
            Suite::BerryEsseen => {
                for &n in &p.berry_esseen_ns {
                    let theta = vec![1.0 / (n as f64).sqrt(); n];
                    reports.push(ineq::berry_esseen_verify(&theta, &[CoeffLaw::Rademacher], p.mc_replicates, s)?);
                }
            }
            Suite::VarianceReversal => {
                for law in &bounded {
                    reports.push(ineq::variance_reversal_check(law)?);
                }
                for k in [4u64, 16, 64, 256] {
                    let law = CoeffLaw::alpha(optimal_alpha(k).expect("k > 0"))?;
                    reports.push(ineq::variance_reversal_check(&law)?);
                }
            }
            Suite::LevyWeakL2 => {
                for law in &p.laws {
                    reports.push(ineq::levy_weak_l2_equiv_check(law)?);
                }
            }
            Suite::WeakSymmetrization => {
                for (i, law) in p.laws.iter().enumerate() {
                    for (j, &t) in p.symmetrization_ts.iter().enumerate() {
                        let s = sub_seed(s, (i * 64 + j) as u64);
                        reports.push(ineq::weak_symmetrization_check(law, t, p.mc_replicates, s)?);
                    }
                }
            }
            Suite::ThirdMoment => match &p.seq {
                Some(seq) => {
                    extra.insert(
                        format!("third_moment_ratio:{}", seq.label()),
                        ineq::third_moment_ratio(seq, p.horizon)?,
                    );
                }
                None => {
                    for law in &p.laws {
                        let seq = LawSequence::iid(law.clone())?;
                        extra.insert(
                            format!("third_moment_ratio:{law}"),
                            ineq::third_moment_ratio(&seq, p.horizon)?,
                        );
                    }
                }
            },
        }
    }
    Ok((reports, extra))
}

fn inequality_suite(p: &SuitePlan, seed: u64) -> Result<ExperimentOutput> {
    let (reports, mut summaries) = suite_reports(p, seed)?;
    let mut t = Table::new("bounds", BOUND_COLS);
    for r in &reports {
        t.push(vec![
            r.name.as_str().into(),
            r.subject.as_str().into(),
            r.lhs.into(),
            r.rhs.into(),
            r.rhs_core.into(),
            r.ratio.into(),
            r.explicit_constant.map_or(Cell::Text(String::new()), Cell::Num),
            match r.relation {
                ineq::Relation::AtMost => "<=",
                ineq::Relation::AtLeast => ">=",
            }
            .into(),
            r.n_samples.into(),
            r.wilson_ci.into(),
            r.verdict.to_string().into(),
        ]);
    }
    let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count() as f64;
    let explicit_violations = reports
        .iter()
        .filter(|r| r.explicit_constant.is_some() && r.verdict == Verdict::Violated)
        .count();
    summaries.insert("reports".into(), reports.len() as f64);
    summaries.insert("holds".into(), count(Verdict::Holds));
    summaries.insert("holds_with_fitted_constant".into(), count(Verdict::HoldsWithFittedConstant));
    summaries.insert("violated".into(), count(Verdict::Violated));
    summaries.insert("explicit_violations".into(), explicit_violations as f64);
    for r in reports.iter().filter(|r| r.explicit_constant.is_none()) {
        let e = summaries.entry(format!("max_ratio:{}", r.name)).or_insert(f64::NEG_INFINITY);
        *e = e.max(r.ratio);
    }
    Ok(ExperimentOutput { tables: vec![t], summaries, violated: explicit_violations > 0 })
}

fn roots_annulus(
    seq: &LawSequence,
    degree: usize,
    s_grid: &[usize],
    jensen_radius: Option<f64>,
    replicates: usize,
    seed: u64,
) -> Result<ExperimentOutput> {
    let per_rep: Vec<_> = (0..replicates as u64)
        .into_par_iter()
        .map(|rep| -> Result<_> {
            let sample = sample_series(seq, degree, seed, rep)?;
            let roots = polynomial_roots(&sample.coeffs)?;
            let jensen = jensen_radius.map(|r| jensen_residual(&sample, r)).transpose()?;
            Ok((roots, jensen))
        })
        .collect::<Result<_>>()?;
    let sets: Vec<_> = per_rep.iter().map(|(r, _)| r.clone()).collect();
    let st = annulus_statistics(&sets, s_grid)?;
    let mut annulus = Table::new("annulus", ANNULUS_COLS);
    for rep in 0..replicates {
        for row in &st.rows {
            let v = row.one_minus_r[rep];
            let sf = row.s as f64;
            annulus.push(vec![rep.into(), row.s.into(), v.into(), (v * sf / sf.ln()).into()]);
        }
    }
    let mut summary = Table::new("annulus_summary", ANNULUS_SUMMARY_COLS).plotted();
    let mut summaries = BTreeMap::new();
    for row in &st.rows {
        summary.push(vec![row.s.into(), row.median_one_minus_r.into(), row.scaled_median.into()]);
        summaries.insert(format!("scaled_median:s={}", row.s), row.scaled_median);
        summaries.insert(format!("median_one_minus_r:s={}", row.s), row.median_one_minus_r);
    }
    if st.slope.is_finite() {
        summaries.insert("slope".into(), st.slope);
        summaries.insert("intercept".into(), st.intercept);
    }
    let mut roots = Table::new("roots", ROOT_COLS);
    for (rep, (rs, jensen)) in per_rep.iter().enumerate() {
        roots.push(vec![
            rep.into(),
            rs.degree.into(),
            rs.backward_error.into(),
            blaschke_sum(rs).into(),
            jensen.map_or(Cell::Text(String::new()), Cell::Num),
        ]);
    }
    summaries.insert(
        "max_backward_error".into(),
        per_rep.iter().map(|(r, _)| r.backward_error).fold(0.0, f64::max),
    );
    if jensen_radius.is_some() {
        summaries.insert(
            "max_jensen_residual".into(),
            per_rep.iter().filter_map(|(_, j)| *j).fold(0.0, f64::max),
        );
    }
    Ok(ExperimentOutput { tables: vec![annulus, summary, roots], summaries, violated: false })
}

fn potential_convergence(
    arc: crate::potential::CircleArc,
    z0s: &[Complex64],
    approaches: &[(String, crate::potential::Approach)],
    ns: &[usize],
    tolerance: f64,
) -> ExperimentOutput {
    let mut t = Table::new("convergence", CONV_COLS);
    let mut summaries = BTreeMap::new();
    for (i, z0) in z0s.iter().enumerate() {
        for (name, rule) in approaches {
            let rep = log_integral_convergence(*rule, *z0, arc, ns);
            for ((n, z), d) in rep.ns.iter().zip(&rep.points).zip(&rep.deviations) {
                t.push(vec![name.as_str().into(), i.into(), (*n).into(), z.re.into(), z.im.into(), (*d).into()]);
            }
            summaries.insert(format!("final_deviation:{name}:{i}"), *rep.deviations.last().unwrap());
            summaries.insert(format!("settled:{name}:{i}"), f64::from(u8::from(rep.settles_below(tolerance))));
        }
    }
    ExperimentOutput { tables: vec![t], summaries, violated: false }
}

fn law_calibration(
    laws: &[CoeffLaw],
    samples: usize,
    grid: usize,
    lambda_max: f64,
    seed: u64,
) -> Result<ExperimentOutput> {
    let lambdas: Vec<f64> = (1..=grid).map(|i| lambda_max * i as f64 / grid as f64).collect();
    let rows: Vec<Vec<(f64, f64, f64)>> = laws
        .par_iter()
        .enumerate()
        .map(|(i, law)| -> Result<_> {
            let xs = stats::sorted(&law.sample(&mut Stream::new(seed, i as u64, 0), samples));
            lambdas
                .iter()
                .map(|&l| Ok((l, concentration_of(law, l)?, empirical_concentration(&xs, l)?)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new("calibration", CAL_COLS).plotted();
    let mut summaries = BTreeMap::new();
    let mut worst = 0.0f64;
    for (law, rs) in laws.iter().zip(&rows) {
        let mut m = 0.0f64;
        for &(l, exact, emp) in rs {
            let d = (exact - emp).abs();
            m = m.max(d);
            t.push(vec![law.to_string().into(), l.into(), exact.into(), emp.into(), d.into()]);
        }
        summaries.insert(format!("max_abs_diff:{law}"), m);
        worst = worst.max(m);
    }
    summaries.insert("max_abs_diff".into(), worst);
    Ok(ExperimentOutput { tables: vec![t], summaries, violated: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_every_kind() {
        let cat = list_experiments();
        assert_eq!(cat.len(), 6);
        let lines: Vec<&str> = cat.iter().map(|c| c.line.as_str()).collect();
        assert!(lines.contains(&"snb-profile → Theorem 3.3 / Claim 3.4"));
        assert!(lines.contains(&"potential-convergence → Appendix B"));
    }

    #[test]
    fn calibration_runs_small() {
        let plan = Plan::LawCalibration {
            laws: vec![CoeffLaw::Rademacher],
            samples: 1000,
            grid: 5,
            lambda_max: 3.0,
        };
        let out = execute(&plan, 3).unwrap();
        assert_eq!(out.tables[0].rows.len(), 5);
        assert!(out.summaries["max_abs_diff"] < 0.1);
    }
}
