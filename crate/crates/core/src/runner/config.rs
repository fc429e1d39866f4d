//! Experiment configuration files (TOML) and their validation into a plan.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::expr::Expr;
use crate::functionals::{PsiSpec, MIN_REPLICATES};
use crate::inequalities::catalog_laws;
use crate::laws::{CoeffLaw, LawRule, LawSequence, LawTemplate, Weights};
use crate::potential::{Approach, CircleArc};
use crate::series::ArcSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SnbProfile,
    LogSnbProfile,
    InequalitySuite,
    RootsAnnulus,
    PotentialConvergence,
    LawCalibration,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::SnbProfile,
        ExperimentKind::LogSnbProfile,
        ExperimentKind::InequalitySuite,
        ExperimentKind::RootsAnnulus,
        ExperimentKind::PotentialConvergence,
        ExperimentKind::LawCalibration,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::SnbProfile => "snb-profile",
            ExperimentKind::LogSnbProfile => "log-snb-profile",
            ExperimentKind::InequalitySuite => "inequality-suite",
            ExperimentKind::RootsAnnulus => "roots-annulus",
            ExperimentKind::PotentialConvergence => "potential-convergence",
            ExperimentKind::LawCalibration => "law-calibration",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A number or an expression in `k`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Formula {
    Num(f64),
    Text(String),
}

impl Formula {
    fn expr(&self) -> Result<Expr> {
        match self {
            Formula::Num(v) => Ok(Expr::constant(*v)),
            Formula::Text(s) => Expr::parse(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    /// `iid`, `template`, `jump` or `alpha-optimal`.
    pub family: String,
    /// Base law for `iid` and `template`: `rademacher`, `scaled-bernoulli`,
    /// `jump`, `alpha`, `gaussian` or `deterministic`.
    pub dist: Option<String>,
    pub scale: Option<Formula>,
    pub sigma: Option<Formula>,
    pub alpha: Option<Formula>,
    pub k: Option<Formula>,
    pub c: Option<Formula>,
    pub p: Option<Formula>,
    pub weights: Option<Formula>,
    pub epsilon: Option<f64>,
    pub label: Option<String>,
}

impl LawConfig {
    pub fn build(&self) -> Result<LawSequence> {
        let seq = match self.family.as_str() {
            "jump" => LawSequence::jump(),
            "alpha-optimal" => LawSequence::alpha_optimal(),
            "iid" | "template" => {
                let t = self.template()?;
                if self.family == "iid" {
                    if !t.is_constant() {
                        return Err(LabError::Config(
                            "family `iid` needs constant parameters; use `template`".into(),
                        ));
                    }
                    LawSequence::iid(t.at(0)?)?
                } else {
                    LawSequence::new(LawRule::Template(t))?
                }
            }
            other => {
                return Err(LabError::Config(format!(
                    "unknown law family `{other}` (expected iid, template, jump, alpha-optimal)"
                )))
            }
        };
        let mut seq = match &self.weights {
            Some(Formula::Num(v)) => seq.with_weights(Weights::Constant(*v))?,
            Some(f) => seq.with_weights(Weights::Formula(f.expr()?))?,
            None => seq,
        };
        if let Some(eps) = self.epsilon {
            seq = seq.with_epsilon(eps)?;
        }
        if let Some(l) = &self.label {
            seq = seq.with_label(l.clone());
        }
        Ok(seq)
    }

    fn template(&self) -> Result<LawTemplate> {
        let dist = self
            .dist
            .as_deref()
            .ok_or_else(|| LabError::Config(format!("family `{}` needs `dist`", self.family)))?;
        let get = |f: &Option<Formula>, name: &str, default: Option<f64>| -> Result<Expr> {
            match (f, default) {
                (Some(f), _) => f.expr(),
                (None, Some(d)) => Ok(Expr::constant(d)),
                (None, None) => Err(LabError::Config(format!("law `{dist}` needs `{name}`"))),
            }
        };
        Ok(match dist {
            "rademacher" => LawTemplate::Rademacher { scale: get(&self.scale, "scale", Some(1.0))? },
            "scaled-bernoulli" => LawTemplate::ScaledBernoulli {
                c: get(&self.c, "c", None)?,
                p: get(&self.p, "p", None)?,
            },
            "jump" => LawTemplate::Jump { k: get(&self.k, "k", None)? },
            "alpha" => LawTemplate::Alpha { alpha: get(&self.alpha, "alpha", None)? },
            "gaussian" => LawTemplate::Gaussian { sigma: get(&self.sigma, "sigma", Some(1.0))? },
            "deterministic" => LawTemplate::Deterministic { c: get(&self.c, "c", Some(0.0))? },
            other => return Err(LabError::Config(format!("unknown law `{other}`"))),
        })
    }
}

fn default_m() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcConfig {
    pub a: f64,
    pub b: f64,
    /// Grid resolution `M` (nodes per full turn).
    #[serde(default = "default_m")]
    pub m: usize,
}

impl ArcConfig {
    fn build(&self) -> Result<ArcSpec> {
        ArcSpec::new(self.a, self.b, self.m)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSnbConfig {
    /// Truncation degree `N` (default 200).
    pub degree: Option<usize>,
    /// Radius; alternative to `log_rho`.
    pub radius: Option<f64>,
    /// Choose `r` with `log ρ_N(r)` equal to this (default 4).
    pub log_rho: Option<f64>,
    pub ts: Option<Vec<f64>>,
    /// Also tabulate the pointwise tail of `log W_z` at `r·e^{i·mid(I)}`.
    #[serde(default)]
    pub pointwise: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityConfig {
    pub suites: Option<Vec<String>>,
    pub mixture_cases: Option<usize>,
    pub triangle_tuples: Option<usize>,
    pub rogozin_ns: Option<Vec<usize>>,
    pub berry_esseen_ns: Option<Vec<usize>>,
    pub eps_grid: Option<Vec<f64>>,
    pub symmetrization_ts: Option<Vec<f64>>,
    /// Replicates for Monte Carlo paths (default 10⁶).
    pub mc_replicates: Option<usize>,
    /// Index horizon for the third-moment ratio.
    pub horizon: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootsConfig {
    pub degree: Option<usize>,
    pub s_grid: Option<Vec<usize>>,
    /// Radius for the optional Jensen residual column.
    pub jensen_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub r: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// Base points `[re, im]`; default is the arc midpoint.
    pub z0: Option<Vec<[f64; 2]>>,
    pub approaches: Option<Vec<String>>,
    pub ns: Option<Vec<usize>>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Sample size per law (default 10⁵).
    pub samples: Option<usize>,
    /// Number of λ values (default 30).
    pub grid: Option<usize>,
    pub lambda_max: Option<f64>,
}

fn default_seed() -> u64 {
    1
}

/// A parsed configuration file, before validation.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub replicates: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub law: Option<LawConfig>,
    pub arc: Option<ArcConfig>,
    pub psi: Option<String>,
    /// Schedule length `K`.
    pub schedule_len: Option<usize>,
    pub log_snb: Option<LogSnbConfig>,
    pub inequality: Option<InequalityConfig>,
    pub roots: Option<RootsConfig>,
    pub potential: Option<PotentialConfig>,
    pub calibration: Option<CalibrationConfig>,
}

impl FromStr for ExperimentConfig {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| LabError::Config(e.to_string()))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Ok((text.parse()?, text))
    }

    /// Resolves defaults and checks every law/ψ/schedule constraint.
    pub fn plan(&self) -> Result<Plan> {
        config_errors(self.plan_inner())
    }

    fn law_or(&self, default: impl FnOnce() -> Result<LawSequence>) -> Result<LawSequence> {
        match &self.law {
            Some(l) => l.build(),
            None => default(),
        }
    }

    fn plan_inner(&self) -> Result<Plan> {
        match self.kind {
            ExperimentKind::SnbProfile => {
                let seq = self.law_or(|| LawSequence::iid(CoeffLaw::Rademacher))?;
                let psi: PsiSpec = self.psi.as_deref().unwrap_or("power(1)").parse()?;
                if !psi.is_test_function() {
                    return Err(LabError::Config(format!("psi `{psi}` is not a test function")));
                }
                let reps = self.replicates.unwrap_or(500);
                if reps < MIN_REPLICATES {
                    return Err(LabError::Config(format!(
                        "snb-profile needs at least {MIN_REPLICATES} replicates"
                    )));
                }
                let arc = self.arc.clone().unwrap_or(ArcConfig { a: 1.0, b: 2.0, m: default_m() });
                Ok(Plan::SnbProfile {
                    seq,
                    arc: arc.build()?,
                    psi,
                    k_max: self.schedule_len.unwrap_or(8),
                    replicates: reps,
                })
            }
            ExperimentKind::LogSnbProfile => {
                let seq = self.law_or(|| LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 }))?;
                let c = self.log_snb.clone().unwrap_or_default();
                let degree = c.degree.unwrap_or(200);
                let probe = if seq.is_stationary() { 0 } else { degree as u64 };
                for k in 0..=probe {
                    if seq.law_at(k)?.density_bound().is_none() {
                        return Err(LabError::Config(format!(
                            "law at index {k} ({}) has no density bound; log-integral \
                             concentration needs Q(X_k, l) <= b l",
                            seq.law_at(k)?
                        )));
                    }
                }
                let radius = match (c.radius, c.log_rho) {
                    (Some(_), Some(_)) => {
                        return Err(LabError::Config("give either radius or log_rho".into()))
                    }
                    (Some(r), None) => RadiusChoice::Fixed(r),
                    (None, l) => RadiusChoice::LogRho(l.unwrap_or(4.0)),
                };
                let arc = self.arc.clone().unwrap_or(ArcConfig { a: 1.0, b: 2.0, m: 256 });
                let ts = c.ts.unwrap_or_else(|| (1..=80).map(|i| i as f64 * 0.1).collect());
                Ok(Plan::LogSnbProfile {
                    seq,
                    degree,
                    radius,
                    arc: arc.build()?,
                    ts,
                    pointwise: c.pointwise,
                    replicates: self.replicates.unwrap_or(200),
                })
            }
            ExperimentKind::InequalitySuite => {
                let c = self.inequality.clone().unwrap_or_default();
                let suites = match c.suites {
                    Some(v) => v.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>>>()?,
                    None => Suite::ALL.to_vec(),
                };
                Ok(Plan::InequalitySuite(SuitePlan {
                    suites,
                    mixture_cases: c.mixture_cases.unwrap_or(1000),
                    triangle_tuples: c.triangle_tuples.unwrap_or(10_000),
                    rogozin_ns: c.rogozin_ns.unwrap_or_else(|| vec![1, 10, 100, 1000]),
                    berry_esseen_ns: c.berry_esseen_ns.unwrap_or_else(|| vec![100, 400, 1600]),
                    eps_grid: c.eps_grid.unwrap_or_else(|| (1..=40).map(|i| i as f64 * 0.05).collect()),
                    symmetrization_ts: c.symmetrization_ts.unwrap_or_else(|| vec![0.25, 0.5, 1.0, 2.0]),
                    mc_replicates: c.mc_replicates.unwrap_or(1_000_000),
                    horizon: c.horizon.unwrap_or(100),
                    laws: catalog_laws(),
                    seq: self.law.as_ref().map(|l| l.build()).transpose()?,
                }))
            }
            ExperimentKind::RootsAnnulus => {
                let seq = self.law_or(|| LawSequence::iid(CoeffLaw::Gaussian { sigma: 1.0 }))?;
                let c = self.roots.clone().unwrap_or_default();
                let degree = c.degree.unwrap_or(4096);
                if degree == 0 || degree > crate::roots::MAX_DEGREE {
                    return Err(LabError::Config(format!(
                        "degree {degree} outside 1..={}",
                        crate::roots::MAX_DEGREE
                    )));
                }
                let s_grid = c.s_grid.unwrap_or_else(|| vec![50, 100]);
                if s_grid.iter().any(|s| *s < 2) {
                    return Err(LabError::Config("every s must be at least 2".into()));
                }
                Ok(Plan::RootsAnnulus {
                    seq,
                    degree,
                    s_grid,
                    jensen_radius: c.jensen_radius,
                    replicates: self.replicates.unwrap_or(100),
                })
            }
            ExperimentKind::PotentialConvergence => {
                let c = self.potential.clone().unwrap_or_default();
                let arc = CircleArc::new(c.r.unwrap_or(1.0), c.a.unwrap_or(1.0), c.b.unwrap_or(2.0))?;
                let z0s = match c.z0 {
                    Some(v) => v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect(),
                    None => vec![arc.point(0.5 * (arc.a + arc.b))],
                };
                let names = c.approaches.unwrap_or_else(|| {
                    ["radial", "on-arc", "disk"].iter().map(|s| s.to_string()).collect()
                });
                let approaches = names
                    .iter()
                    .map(|n| parse_approach(n, self.seed).map(|a| (n.clone(), a)))
                    .collect::<Result<Vec<_>>>()?;
                let ns = c.ns.unwrap_or_else(|| (1..=64).collect());
                if ns.is_empty() || ns.contains(&0) {
                    return Err(LabError::Config("ns must be non-empty positive integers".into()));
                }
                Ok(Plan::PotentialConvergence {
                    arc,
                    z0s,
                    approaches,
                    ns,
                    tolerance: c.tolerance.unwrap_or(0.05),
                })
            }
            ExperimentKind::LawCalibration => {
                let c = self.calibration.clone().unwrap_or_default();
                let laws = match &self.law {
                    Some(l) => {
                        let seq = l.build()?;
                        if !seq.is_stationary() {
                            return Err(LabError::Config("law-calibration needs an iid law".into()));
                        }
                        vec![seq.law_at(0)?]
                    }
                    None => catalog_laws(),
                };
                let grid = c.grid.unwrap_or(30);
                if grid == 0 {
                    return Err(LabError::Config("grid must be positive".into()));
                }
                Ok(Plan::LawCalibration {
                    laws,
                    samples: c.samples.unwrap_or(100_000),
                    grid,
                    lambda_max: c.lambda_max.unwrap_or(3.0),
                })
            }
        }
    }
}

/// Validation failures all surface as config errors.
fn config_errors<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        LabError::Config(_) => e,
        other => LabError::Config(other.to_string()),
    })
}

fn parse_approach(name: &str, seed: u64) -> Result<Approach> {
    match name {
        "fixed" => Ok(Approach::Fixed),
        "radial" => Ok(Approach::Radial),
        "on-arc" => Ok(Approach::OnArc),
        "disk" => Ok(Approach::RandomDisk { seed }),
        other => Err(LabError::Config(format!(
            "unknown approach `{other}` (fixed, radial, on-arc, disk)"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiusChoice {
    Fixed(f64),
    LogRho(f64),
}

/// Verifier families of the inequality suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    MixtureLemma,
    PaleyZygmund,
    LogPlusTriangle,
    VarianceTailChain,
    Psi2Bound,
    Rogozin,
    BerryEsseen,
    VarianceReversal,
    LevyWeakL2,
    WeakSymmetrization,
    ThirdMoment,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::MixtureLemma,
        Suite::PaleyZygmund,
        Suite::LogPlusTriangle,
        Suite::VarianceTailChain,
        Suite::Psi2Bound,
        Suite::Rogozin,
        Suite::BerryEsseen,
        Suite::VarianceReversal,
        Suite::LevyWeakL2,
        Suite::WeakSymmetrization,
        Suite::ThirdMoment,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::MixtureLemma => "mixture-lemma",
            Suite::PaleyZygmund => "paley-zygmund",
            Suite::LogPlusTriangle => "log-plus-triangle",
            Suite::VarianceTailChain => "variance-tail-chain",
            Suite::Psi2Bound => "psi2-bound",
            Suite::Rogozin => "rogozin",
            Suite::BerryEsseen => "berry-esseen",
            Suite::VarianceReversal => "variance-reversal",
            Suite::LevyWeakL2 => "levy-weak-l2",
            Suite::WeakSymmetrization => "weak-symmetrization",
            Suite::ThirdMoment => "third-moment",
        }
    }
}

impl FromStr for Suite {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| LabError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct SuitePlan {
    pub suites: Vec<Suite>,
    pub mixture_cases: usize,
    pub triangle_tuples: usize,
    pub rogozin_ns: Vec<usize>,
    pub berry_esseen_ns: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub symmetrization_ts: Vec<f64>,
    pub mc_replicates: usize,
    pub horizon: u64,
    pub laws: Vec<CoeffLaw>,
    /// Sequence for the third-moment gate; the catalog laws otherwise.
    pub seq: Option<LawSequence>,
}

/// A validated experiment with every default resolved.
#[derive(Debug, Clone)]
pub enum Plan {
    SnbProfile { seq: LawSequence, arc: ArcSpec, psi: PsiSpec, k_max: usize, replicates: usize },
    LogSnbProfile {
        seq: LawSequence,
        degree: usize,
        radius: RadiusChoice,
        arc: ArcSpec,
        ts: Vec<f64>,
        pointwise: bool,
        replicates: usize,
    },
    InequalitySuite(SuitePlan),
    RootsAnnulus {
        seq: LawSequence,
        degree: usize,
        s_grid: Vec<usize>,
        jensen_radius: Option<f64>,
        replicates: usize,
    },
    PotentialConvergence {
        arc: CircleArc,
        z0s: Vec<Complex64>,
        approaches: Vec<(String, Approach)>,
        ns: Vec<usize>,
        tolerance: f64,
    },
    LawCalibration { laws: Vec<CoeffLaw>, samples: usize, grid: usize, lambda_max: f64 },
}
