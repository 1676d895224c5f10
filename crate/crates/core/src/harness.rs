//! Config-driven experiments.
//!
//! A config is a TOML file with `[environment]`, `[spectral]`, `[run]` and
//! `[output]` sections:
//!
//! ```toml
//! [environment]
//! kind = "dirichlet"      # "sieve" | "dirichlet" | "deterministic"
//! m = 2
//! alpha = 1.0
//!
//! [run]
//! mode = "ball_driven"    # or "tree_first"
//! n_list = [1000, 100000]
//! a = 0.5
//! b = 0.0
//! replicas = 50
//! master_seed = 1
//! ```
//!
//! Each replica is determined by `(master_seed, replica)` alone, and rows are
//! emitted in replica-major order, so output does not depend on threads.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::environment::{EnvironmentSpec, StickLaw, DEFAULT_MASS_FLOOR};
use crate::error::{Error, Result};
use crate::occupancy::{
    occupancy_counts, poisson_count, throw_balls_lazy, throw_balls_tree, DEFAULT_K_MAX,
};
use crate::predictions::{self, level_for, PredictionInput};
use crate::rng::stream;
use crate::spectral::{CriticalConstants, McConfig, RegimeLabel, SpectralProfile};
use crate::tree::WeightedTree;

pub const CSV_HEADER: [&str; 11] = [
    "replica",
    "n_or_t",
    "j",
    "k",
    "K",
    "L",
    "Z",
    "W_theta_json",
    "predicted",
    "relative_error",
    "overflow_balls",
];

const TAG_TREE: u64 = 0x7472_6565;
const TAG_BALLS: u64 = 0x6261_6c6c;

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub kind: String,
    /// Sieve stick law: "uniform" or "beta".
    pub stick: Option<String>,
    pub beta_a: Option<f64>,
    pub beta_b: Option<f64>,
    pub m: Option<usize>,
    pub alpha: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

impl EnvironmentSection {
    pub fn to_spec(&self) -> Result<EnvironmentSpec> {
        let need = |x: Option<f64>, name: &str| {
            x.ok_or_else(|| Error::Config(format!("environment.{name} is required")))
        };
        let spec = match self.kind.as_str() {
            "sieve" | "bernoulli_sieve" => match self.stick.as_deref().unwrap_or("uniform") {
                "uniform" => EnvironmentSpec::BernoulliSieve(StickLaw::Uniform),
                "beta" => EnvironmentSpec::BernoulliSieve(StickLaw::Beta {
                    a: need(self.beta_a, "beta_a")?,
                    b: need(self.beta_b, "beta_b")?,
                }),
                other => return Err(Error::Config(format!("unknown stick law {other:?}"))),
            },
            "dirichlet" => EnvironmentSpec::DirichletSplit {
                m: self
                    .m
                    .ok_or_else(|| Error::Config("environment.m is required".into()))?,
                alpha: need(self.alpha, "alpha")?,
            },
            "deterministic" => EnvironmentSpec::DeterministicSplit(
                self.weights
                    .clone()
                    .ok_or_else(|| Error::Config("environment.weights is required".into()))?,
            ),
            other => return Err(Error::Config(format!("unknown environment kind {other:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectralSection {
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_step: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl SpectralSection {
    pub fn mc_config(&self) -> McConfig {
        let d = McConfig::default();
        McConfig {
            grid_min: self.grid_min,
            grid_max: self.grid_max.unwrap_or(d.grid_max),
            grid_step: self.grid_step.unwrap_or(d.grid_step),
            samples: self.samples.unwrap_or(d.samples),
            seed: self.seed.unwrap_or(d.seed),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    TreeFirst,
    #[default]
    BallDriven,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub n_list: Vec<u64>,
    /// Poisson intensities; used instead of `n_list` when nonempty.
    #[serde(default)]
    pub t_list: Vec<f64>,
    pub a: Option<f64>,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "one")]
    pub k: u32,
    /// Explicit levels; used instead of the level rule when nonempty.
    #[serde(default)]
    pub j_list: Vec<usize>,
    pub j_max: Option<usize>,
    #[serde(default = "default_floor")]
    pub mass_floor: f64,
    #[serde(default = "one_u")]
    pub replicas: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub thetas: Vec<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Regime to predict; derived from `a` when absent.
    pub regime: Option<String>,
}

fn one() -> u32 {
    1
}
fn one_u() -> usize {
    1
}
fn default_floor() -> f64 {
    DEFAULT_MASS_FLOOR
}
fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: RunMode::default(),
            n_list: Vec::new(),
            t_list: Vec::new(),
            a: None,
            b: 0.0,
            k: 1,
            j_list: Vec::new(),
            j_max: None,
            mass_floor: DEFAULT_MASS_FLOOR,
            replicas: 1,
            master_seed: 0,
            thetas: Vec::new(),
            k_max: DEFAULT_K_MAX,
            regime: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

/// Settings for the `verify-llt` subcommand.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LltSection {
    pub theta: f64,
    pub j_list: Vec<usize>,
    #[serde(default = "default_h")]
    pub h_grid: Vec<f64>,
    /// Points `x / sqrt(lambda''(theta) j)`.
    #[serde(default = "default_x")]
    pub x_grid: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
}

fn default_h() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_x() -> Vec<f64> {
    (-8..=8).map(|i| i as f64 * 0.25).collect()
}
fn default_seeds() -> usize {
    50
}

/// Settings for the `sweep` subcommand.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub a_min: f64,
    pub a_max: f64,
    pub a_step: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            a_min: 0.1,
            a_max: 3.0,
            a_step: 0.05,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
    pub llt: Option<LltSection>,
    pub sweep: Option<SweepSection>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn env_spec(&self) -> Result<EnvironmentSpec> {
        self.environment.to_spec()
    }

    pub fn profile(&self) -> Result<SpectralProfile> {
        SpectralProfile::build(&self.env_spec()?, Some(&self.spectral.mc_config()))
    }

    /// Ball counts or Poisson intensities, as floats.
    pub fn sizes(&self) -> Vec<f64> {
        if self.run.t_list.is_empty() {
            self.run.n_list.iter().map(|&n| n as f64).collect()
        } else {
            self.run.t_list.clone()
        }
    }

    pub fn poissonized(&self) -> bool {
        !self.run.t_list.is_empty()
    }

    /// Levels for one size: the explicit list, or `j_n` from the level rule.
    pub fn levels_for(&self, n: f64) -> Result<Vec<(usize, Option<f64>)>> {
        if !self.run.j_list.is_empty() {
            return Ok(self.run.j_list.iter().map(|&j| (j, None)).collect());
        }
        let a = self.run.a.ok_or_else(|| Error::Config("run.a or run.j_list is required".into()))?;
        let (j, b) = level_for(n, a, self.run.b);
        Ok(vec![(j, Some(b))])
    }

    pub fn validate(&self) -> Result<()> {
        self.env_spec()?;
        let r = &self.run;
        if r.n_list.is_empty() && r.t_list.is_empty() {
            return Err(Error::Config("run.n_list (or run.t_list) must be nonempty".into()));
        }
        if r.n_list.contains(&0) || r.t_list.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Config("sizes must be positive".into()));
        }
        if r.replicas == 0 {
            return Err(Error::Config("run.replicas must be at least 1".into()));
        }
        if r.j_list.is_empty() {
            match r.a {
                Some(a) if a > 0.0 => {}
                _ => return Err(Error::Config("run.a must be positive when no j_list is given".into())),
            }
        }
        if r.k == 0 || r.k as usize > r.k_max.max(1) {
            return Err(Error::Config("run.k must lie in 1..=k_max".into()));
        }
        if r.j_list.contains(&0) {
            return Err(Error::Config("levels start at 1".into()));
        }
        let need = self.max_level()?;
        if let Some(jm) = r.j_max {
            if jm < need {
                return Err(Error::Config(format!("run.j_max = {jm} is below the deepest level {need}")));
            }
        }
        if let Some(name) = &r.regime {
            RegimeLabel::from_code(name)
                .ok_or_else(|| Error::Config(format!("unknown regime {name:?}")))?;
        }
        Ok(())
    }

    pub fn max_level(&self) -> Result<usize> {
        let mut m = 1;
        for n in self.sizes() {
            for (j, _) in self.levels_for(n)? {
                m = m.max(j);
            }
        }
        Ok(m)
    }

    /// Depth to build: `j_max` when given, else the deepest needed level.
    pub fn depth(&self) -> Result<usize> {
        Ok(self.run.j_max.unwrap_or(self.max_level()?))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub replica: usize,
    pub n_or_t: f64,
    pub j: usize,
    pub k: u32,
    pub big_k: Option<u64>,
    pub l: Option<u64>,
    pub z: Option<u64>,
    pub w: Vec<(f64, f64)>,
    pub predicted: Option<f64>,
    pub relative_error: Option<f64>,
    pub overflow: Option<u64>,
    /// Realized ball count (differs from `n_or_t` when Poissonized).
    pub balls: u64,
    /// Observed quantity matching the prediction.
    pub observed: Option<f64>,
    /// Set when the replica failed; the message is kept.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

pub fn quartiles(xs: &[f64]) -> Option<Quartiles> {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = p * (v.len() - 1) as f64;
        let i = h.floor() as usize;
        let f = h - i as f64;
        if i + 1 < v.len() { v[i] + f * (v[i + 1] - v[i]) } else { v[i] }
    };
    Some(Quartiles {
        q1: q(0.25),
        median: q(0.5),
        q3: q(0.75),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub n_or_t: f64,
    pub j: usize,
    pub k: u32,
    pub b_realized: Option<f64>,
    pub big_k: Option<Quartiles>,
    pub observed: Option<Quartiles>,
    pub predicted: Option<Quartiles>,
    pub relative_error: Option<Quartiles>,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

/// Levels and realized `b` planned for one ball count.
type Plan = Vec<(f64, Vec<(usize, Option<f64>)>)>;

struct Shared {
    env: EnvironmentSpec,
    profile: Option<SpectralProfile>,
    constants: Option<CriticalConstants>,
    regime: Option<RegimeLabel>,
    plan: Plan,
    depth: usize,
}

/// Runs every replica in parallel on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let env = cfg.env_spec()?;
    let tree_mode = cfg.run.mode == RunMode::TreeFirst;
    // Spectral data is needed only for W tables and predictions.
    let profile = if cfg.run.a.is_some() || !cfg.run.thetas.is_empty() {
        Some(cfg.profile()?)
    } else {
        None
    };
    let constants = profile
        .as_ref()
        .filter(|p| !p.is_lattice())
        .and_then(|p| p.critical_constants().ok());
    let regime = match (&cfg.run.regime, cfg.run.a, &profile, &constants) {
        (Some(name), _, _, _) => RegimeLabel::from_code(name),
        (None, Some(a), Some(p), Some(c)) => p
            .classify_regime(c, a)
            .ok()
            .map(|cls| {
                // Freezing takes precedence: it is the statement about L.
                if cls.has(RegimeLabel::Freezing) {
                    RegimeLabel::Freezing
                } else {
                    cls.labels[0]
                }
            })
            .filter(|&l| l != RegimeLabel::OutOfRange),
        _ => None,
    };
    let plan = cfg
        .sizes()
        .into_iter()
        .map(|n| Ok((n, cfg.levels_for(n)?)))
        .collect::<Result<Vec<_>>>()?;
    if tree_mode {
        let est = WeightedTree::estimated_boxes(&env, cfg.depth()?, cfg.run.mass_floor);
        let budget = crate::tree::budget_boxes();
        if est > budget as f64 {
            return Err(Error::MemoryBudget {
                estimated_boxes: est,
                budget_boxes: budget,
            });
        }
    }
    let shared = Shared {
        env,
        profile,
        constants,
        regime,
        plan,
        depth: cfg.depth()?,
    };
    let per_replica: Vec<Vec<ResultRow>> = (0..cfg.run.replicas)
        .into_par_iter()
        .map(|r| run_replica(cfg, &shared, r))
        .collect();
    let rows: Vec<ResultRow> = per_replica.into_iter().flatten().collect();
    let summary = summarize(&rows, &shared.plan);
    Ok(ExperimentResult { rows, summary })
}

fn failed_rows(shared: &Shared, cfg: &ExperimentConfig, r: usize, msg: String) -> Vec<ResultRow> {
    let mut out = Vec::new();
    for (n, levels) in &shared.plan {
        for &(j, _) in levels {
            out.push(ResultRow {
                replica: r,
                n_or_t: *n,
                j,
                k: cfg.run.k,
                big_k: None,
                l: None,
                z: None,
                w: Vec::new(),
                predicted: None,
                relative_error: None,
                overflow: None,
                balls: 0,
                observed: None,
                failure: Some(msg.clone()),
            });
        }
    }
    out
}

fn run_replica(cfg: &ExperimentConfig, shared: &Shared, r: usize) -> Vec<ResultRow> {
    match try_replica(cfg, shared, r) {
        Ok(rows) => rows,
        Err(e) => failed_rows(shared, cfg, r, e.to_string()),
    }
}

fn try_replica(cfg: &ExperimentConfig, shared: &Shared, r: usize) -> Result<Vec<ResultRow>> {
    let run = &cfg.run;
    let seed = run.master_seed;
    let tree = if run.mode == RunMode::TreeFirst {
        Some(WeightedTree::materialize(
            &shared.env,
            shared.depth,
            run.mass_floor,
            crate::rng::derive_seed(seed, &[r as u64, TAG_TREE]),
        )?)
    } else {
        None
    };
    let deepest = shared.depth;
    let w_at = |theta: f64| -> Option<(f64, bool)> {
        let (t, p) = (tree.as_ref()?, shared.profile.as_ref()?);
        let m = t.martingale(p, theta, deepest);
        Some((m.value, m.approximate))
    };
    let w_table: Vec<(f64, f64)> = run
        .thetas
        .iter()
        .filter_map(|&t| w_at(t).map(|(v, _)| (t, v)))
        .collect();

    let mut rows = Vec::new();
    for (ni, (n, levels)) in shared.plan.iter().enumerate() {
        let mut rng = stream(seed, &[r as u64, TAG_BALLS, ni as u64]);
        let balls = if cfg.poissonized() {
            poisson_count(*n, &mut rng)?
        } else {
            *n as u64
        };
        let alloc = match &tree {
            Some(t) => throw_balls_tree(t, balls, &mut rng),
            None => throw_balls_lazy(&shared.env, balls, levels.iter().map(|l| l.0).max().unwrap_or(1), &mut rng)?,
        };
        debug_assert!(alloc.check_consistency().is_ok());
        for &(j, b_real) in levels {
            let counts = occupancy_counts(&alloc, j, run.k_max, tree.as_ref())?;
            let mut row = ResultRow {
                replica: r,
                n_or_t: *n,
                j,
                k: run.k,
                big_k: Some(counts.at_least(run.k as usize)),
                l: counts.l,
                z: counts.z,
                w: w_table.clone(),
                predicted: None,
                relative_error: None,
                overflow: Some(counts.overflow),
                balls,
                observed: None,
                failure: None,
            };
            if let (Some(p), Some(c), Some(regime), Some(a)) =
                (&shared.profile, &shared.constants, shared.regime, run.a)
            {
                let mut input = PredictionInput {
                    a,
                    b: b_real.unwrap_or(run.b),
                    n: *n,
                    j,
                    k: run.k,
                    regime,
                    w_hat: Vec::new(),
                    w_approximate: false,
                };
                if let Some(theta) = predictions::required_theta(p, &input) {
                    if let Some((v, approx)) = w_at(theta) {
                        input.w_hat.push((theta, v));
                        input.w_approximate = approx;
                    }
                }
                if let Ok(pred) = predictions::predict(p, c, &input) {
                    row.predicted = Some(pred.value);
                    if let Ok(obs) = predictions::observed_for(&pred, &counts, balls as f64) {
                        row.observed = Some(obs);
                        row.relative_error = predictions::compare_values(pred.value, obs).relative_error;
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

fn summarize(rows: &[ResultRow], plan: &Plan) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, usize), Vec<&ResultRow>> = BTreeMap::new();
    let index: Vec<(f64, usize, Option<f64>)> = plan
        .iter()
        .flat_map(|(n, ls)| ls.iter().map(move |&(j, b)| (*n, j, b)))
        .collect();
    for row in rows {
        let gi = index
            .iter()
            .position(|&(n, j, _)| n == row.n_or_t && j == row.j)
            .expect("row from plan");
        groups.entry((gi, row.k as usize)).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|((gi, k), rs)| {
            let col = |f: &dyn Fn(&ResultRow) -> Option<f64>| {
                quartiles(&rs.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
            };
            SummaryRow {
                n_or_t: index[gi].0,
                j: index[gi].1,
                k: k as u32,
                b_realized: index[gi].2,
                big_k: col(&|r| r.big_k.map(|x| x as f64)),
                observed: col(&|r| r.observed),
                predicted: col(&|r| r.predicted),
                relative_error: col(&|r| r.relative_error),
                failures: rs.iter().filter(|r| r.failure.is_some()).count(),
            }
        })
        .collect()
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn w_json(w: &[(f64, f64)]) -> String {
    let body: Vec<String> = w
        .iter()
        .map(|(t, v)| format!("\"{}\":{}", t, fmt_float(*v)))
        .collect();
    format!("{{{}}}", body.join(","))
}

pub fn write_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    let opt_u = |x: Option<u64>| x.map_or_else(String::new, |v| v.to_string());
    let opt_f = |x: Option<f64>| x.map_or_else(String::new, fmt_float);
    for r in &result.rows {
        w.write_record([
            r.replica.to_string(),
            fmt_float(r.n_or_t),
            r.j.to_string(),
            r.k.to_string(),
            opt_u(r.big_k),
            opt_u(r.l),
            opt_u(r.z),
            w_json(&r.w),
            opt_f(r.predicted),
            opt_f(r.relative_error),
            opt_u(r.overflow),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(result: &ExperimentResult, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{:>12} {:>4} {:>2} {:>9} {:>14} {:>14} {:>14} {:>10} {:>4}",
        "n_or_t", "j", "k", "b_real", "median_K", "median_pred", "median_obs", "med_relerr", "fail"
    )?;
    let m = |q: &Option<Quartiles>| q.as_ref().map_or("-".to_string(), |q| format!("{:.6e}", q.median));
    for s in &result.summary {
        writeln!(
            out,
            "{:>12} {:>4} {:>2} {:>9} {:>14} {:>14} {:>14} {:>10} {:>4}",
            format!("{:.4e}", s.n_or_t),
            s.j,
            s.k,
            s.b_realized.map_or("-".to_string(), |b| format!("{b:.4}")),
            m(&s.big_k),
            m(&s.predicted),
            m(&s.observed),
            s.relative_error
                .as_ref()
                .map_or("-".to_string(), |q| format!("{:.4}", q.median)),
            s.failures
        )?;
    }
    Ok(())
}

/// One line of an `a` sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub labels: String,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub legendre: Option<f64>,
}

pub fn sweep(profile: &SpectralProfile, constants: &CriticalConstants, s: &SweepSection) -> Result<Vec<SweepRow>> {
    if !(s.a_step > 0.0 && s.a_max >= s.a_min) {
        return Err(Error::Config("sweep needs a_step > 0 and a_max >= a_min".into()));
    }
    let steps = ((s.a_max - s.a_min) / s.a_step + 1e-9).floor() as usize;
    (0..=steps)
        .map(|i| {
            let a = s.a_min + s.a_step * i as f64;
            let cls = profile.classify_regime(constants, a)?;
            let codes: Vec<&str> = cls.labels.iter().map(|l| l.code()).collect();
            Ok(SweepRow {
                a,
                labels: codes.join("+"),
                theta: cls.theta,
                alpha: profile.alpha_exponent(constants, a).ok(),
                legendre: profile.legendre(a).ok(),
            })
        })
        .collect()
}

/// Median local-limit discrepancy per level over independent trees.
pub fn verify_llt(
    env: &EnvironmentSpec,
    profile: &SpectralProfile,
    constants: &CriticalConstants,
    llt: &LltSection,
    master_seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let depth = *llt
        .j_list
        .iter()
        .max()
        .ok_or_else(|| Error::Config("llt.j_list must be nonempty".into()))?;
    let var = profile.d2lambda(llt.theta);
    let per_seed: Vec<Vec<f64>> = (0..llt.seeds)
        .into_par_iter()
        .map(|s| {
            let tree = WeightedTree::materialize(
                env,
                depth,
                DEFAULT_MASS_FLOOR,
                crate::rng::derive_seed(master_seed, &[s as u64, TAG_TREE]),
            )?;
            llt.j_list
                .iter()
                .map(|&j| {
                    let sd = (var * j as f64).sqrt();
                    let xs: Vec<f64> = llt.x_grid.iter().map(|x| x * sd).collect();
                    predictions::check_local_limit(&tree, profile, constants, llt.theta, j, &llt.h_grid, &xs)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(llt
        .j_list
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let col: Vec<f64> = per_seed.iter().map(|v| v[i]).collect();
            (j, quartiles(&col).map_or(f64::NAN, |q| q.median))
        })
        .collect())
}
