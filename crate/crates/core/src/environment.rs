//! Random environments: the law of one box's fragmentation into daughter
//! probabilities summing to one.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::error::{Error, Result};
use crate::special::{digamma, ln_gamma, trigamma};

/// Default relative truncation threshold for infinite stick-breaking.
pub const DEFAULT_MASS_FLOOR: f64 = 1e-9;

/// Truncation threshold used by the Monte Carlo log-Laplace estimator.
const MC_MASS_FLOOR: f64 = 1e-12;

/// Tolerance on `sum(weights) == 1` for deterministic splits.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Law of the stick variable `W` in a Bernoulli sieve.
#[derive(Clone, Debug, PartialEq)]
pub enum StickLaw {
    Uniform,
    Beta { a: f64, b: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvironmentSpec {
    /// Residual allocation `P_r = W_1 ... W_{r-1} (1 - W_r)` with iid sticks.
    BernoulliSieve(StickLaw),
    /// Symmetric Dirichlet vector of length `m`.
    DirichletSplit { m: usize, alpha: f64 },
    /// The same fixed probability vector for every box.
    DeterministicSplit(Vec<f64>),
}

/// One box's fragmentation. `residual` is the unexpanded tail mass of an
/// infinite environment; it is never folded back into `probs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragmentation {
    pub probs: Vec<f64>,
    pub residual: f64,
}

impl Fragmentation {
    pub fn total(&self) -> f64 {
        self.probs.iter().sum::<f64>() + self.residual
    }
}

/// Monte Carlo estimate of `lambda(theta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// Set when the sample looks heavy tailed or the estimator diverged.
    pub flagged: bool,
}

impl EnvironmentSpec {
    pub fn uniform_sieve() -> Self {
        EnvironmentSpec::BernoulliSieve(StickLaw::Uniform)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            EnvironmentSpec::BernoulliSieve(StickLaw::Uniform) => Ok(()),
            EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a, b }) => {
                if !(a.is_finite() && *a > 0.0 && b.is_finite() && *b > 0.0) {
                    return Err(Error::Config(format!(
                        "beta stick law needs positive finite parameters, got a={a}, b={b}"
                    )));
                }
                Ok(())
            }
            EnvironmentSpec::DirichletSplit { m, alpha } => {
                if *m < 2 {
                    return Err(Error::Config(format!("dirichlet split needs m >= 2, got {m}")));
                }
                if !(alpha.is_finite() && *alpha > 0.0) {
                    return Err(Error::Config(format!(
                        "dirichlet split needs alpha > 0, got {alpha}"
                    )));
                }
                Ok(())
            }
            EnvironmentSpec::DeterministicSplit(w) => {
                if w.len() < 2 {
                    return Err(Error::Config(
                        "deterministic split needs at least two weights".into(),
                    ));
                }
                if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
                    return Err(Error::Config(format!(
                        "deterministic weight {bad} is outside (0, 1]"
                    )));
                }
                let s: f64 = w.iter().sum();
                if (s - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::Config(format!(
                        "deterministic weights sum to {s}, not 1"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Infimum of the domain of `lambda`.
    pub fn theta_lower(&self) -> f64 {
        match self {
            EnvironmentSpec::BernoulliSieve(_) => 0.0,
            EnvironmentSpec::DirichletSplit { alpha, .. } => -alpha,
            EnvironmentSpec::DeterministicSplit(_) => f64::NEG_INFINITY,
        }
    }

    /// Number of fragments when it is finite (and then deterministic).
    pub fn finite_offspring(&self) -> Option<usize> {
        match self {
            EnvironmentSpec::BernoulliSieve(_) => None,
            EnvironmentSpec::DirichletSplit { m, .. } => Some(*m),
            EnvironmentSpec::DeterministicSplit(w) => Some(w.len()),
        }
    }

    /// Whether the positions `-log P_k` live on a lattice `aZ + b`.
    ///
    /// Only deterministic splits can be lattice. Two distinct log-weights are
    /// always lattice; with more, the ratios of their differences are tested
    /// for rationality with denominators up to 1000.
    pub fn is_lattice(&self) -> bool {
        match self {
            EnvironmentSpec::DeterministicSplit(w) => {
                let mut logs: Vec<f64> = w.iter().map(|x| -x.ln()).collect();
                logs.sort_by(f64::total_cmp);
                logs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
                if logs.len() <= 2 {
                    return true;
                }
                let base = logs[1] - logs[0];
                logs[2..]
                    .iter()
                    .all(|v| is_nearly_rational((v - logs[0]) / base, 1000, 1e-9))
            }
            _ => false,
        }
    }

    pub fn sampler(&self) -> Result<FragmentationSampler> {
        self.validate()?;
        let kind = match self {
            EnvironmentSpec::BernoulliSieve(StickLaw::Uniform) => SamplerKind::Sieve(None),
            EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a, b }) => SamplerKind::Sieve(Some(
                Beta::new(*a, *b).map_err(|e| Error::Config(e.to_string()))?,
            )),
            EnvironmentSpec::DirichletSplit { m, alpha } => SamplerKind::Dirichlet {
                m: *m,
                gamma: Gamma::new(*alpha, 1.0).map_err(|e| Error::Config(e.to_string()))?,
            },
            EnvironmentSpec::DeterministicSplit(w) => SamplerKind::Fixed(w.clone()),
        };
        Ok(FragmentationSampler { kind })
    }

    pub fn sample_fragmentation<R: Rng + ?Sized>(
        &self,
        mass_floor: f64,
        rng: &mut R,
    ) -> Result<Fragmentation> {
        self.sampler()?.sample(mass_floor, rng)
    }

    pub fn closed_form_spectral(&self) -> Option<ClosedForm> {
        match self {
            EnvironmentSpec::BernoulliSieve(StickLaw::Uniform) => Some(ClosedForm::UniformSieve),
            EnvironmentSpec::BernoulliSieve(StickLaw::Beta { .. }) => None,
            EnvironmentSpec::DirichletSplit { m, alpha } => Some(ClosedForm::Dirichlet {
                m: *m as f64,
                alpha: *alpha,
            }),
            EnvironmentSpec::DeterministicSplit(w) => Some(ClosedForm::Deterministic {
                log_weights: w.iter().map(|x| x.ln()).collect(),
            }),
        }
    }

    /// Monte Carlo estimate of `lambda(theta) = log E sum_k P_k^theta`.
    ///
    /// Truncated sieves are corrected for their unexpanded tail through the
    /// regeneration identity `L = E S_tau + E R_tau^theta * L`, where `S_tau`
    /// is the expanded sum and `R_tau` the stopped residual.
    pub fn mc_log_laplace<R: Rng + ?Sized>(
        &self,
        theta: f64,
        samples: usize,
        rng: &mut R,
    ) -> Result<McEstimate> {
        let set = LaplaceSampleSet::draw(self, samples, rng)?;
        Ok(set.estimate(theta))
    }
}

fn is_nearly_rational(x: f64, max_den: u64, tol: f64) -> bool {
    (1..=max_den).any(|q| {
        let p = (x * q as f64).round();
        (x - p / q as f64).abs() <= tol * x.abs().max(1.0)
    })
}

enum SamplerKind {
    Sieve(Option<Beta<f64>>),
    Dirichlet { m: usize, gamma: Gamma<f64> },
    Fixed(Vec<f64>),
}

/// A validated environment ready to draw fragmentations.
pub struct FragmentationSampler {
    kind: SamplerKind,
}

impl FragmentationSampler {
    pub fn is_infinite(&self) -> bool {
        matches!(self.kind, SamplerKind::Sieve(_))
    }

    /// Draws one stick variable `W`; only meaningful for sieves.
    #[inline]
    pub fn draw_stick<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Sieve(None) => rng.random::<f64>(),
            SamplerKind::Sieve(Some(beta)) => beta.sample(rng),
            _ => unreachable!("draw_stick on a finite environment"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, mass_floor: f64, rng: &mut R) -> Result<Fragmentation> {
        match &self.kind {
            SamplerKind::Sieve(_) => {
                if !(mass_floor > 0.0 && mass_floor < 1.0) {
                    return Err(Error::Config(format!(
                        "stick-breaking needs mass_floor in (0, 1), got {mass_floor}; \
                         an infinite sieve cannot be fully expanded"
                    )));
                }
                let mut probs = Vec::new();
                let mut rest = 1.0;
                while rest >= mass_floor {
                    let w = self.draw_stick(rng);
                    let p = rest * (1.0 - w);
                    if p > 0.0 {
                        probs.push(p);
                    }
                    rest *= w;
                }
                Ok(Fragmentation {
                    probs,
                    residual: rest,
                })
            }
            SamplerKind::Dirichlet { m, gamma } => Ok(Fragmentation {
                probs: self.dirichlet(*m, gamma, rng),
                residual: 0.0,
            }),
            SamplerKind::Fixed(w) => Ok(Fragmentation {
                probs: w.clone(),
                residual: 0.0,
            }),
        }
    }

    /// Finite fragmentation vector; `None` for sieves.
    pub fn sample_finite<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<f64>> {
        match &self.kind {
            SamplerKind::Sieve(_) => None,
            SamplerKind::Dirichlet { m, gamma } => Some(self.dirichlet(*m, gamma, rng)),
            SamplerKind::Fixed(w) => Some(w.clone()),
        }
    }

    fn dirichlet<R: Rng + ?Sized>(&self, m: usize, gamma: &Gamma<f64>, rng: &mut R) -> Vec<f64> {
        loop {
            let g: Vec<f64> = (0..m).map(|_| gamma.sample(rng)).collect();
            let s: f64 = g.iter().sum();
            if s > 0.0 {
                // Exact zeros are cemetery fragments and are dropped.
                return g.into_iter().filter(|&x| x > 0.0).map(|x| x / s).collect();
            }
        }
    }
}

/// Stored fragmentations for common-random-number evaluation of
/// `lambda` on many `theta` values.
pub(crate) struct LaplaceSampleSet {
    log_probs: Vec<Vec<f64>>,
    log_residual: Vec<f64>,
}

impl LaplaceSampleSet {
    pub(crate) fn draw<R: Rng + ?Sized>(
        env: &EnvironmentSpec,
        samples: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if samples < 100 {
            return Err(Error::Config(format!(
                "Monte Carlo log-Laplace needs at least 100 samples, got {samples}"
            )));
        }
        let sampler = env.sampler()?;
        let mut log_probs = Vec::with_capacity(samples);
        let mut log_residual = Vec::with_capacity(samples);
        for _ in 0..samples {
            let f = sampler.sample(MC_MASS_FLOOR, rng)?;
            log_probs.push(f.probs.iter().map(|p| p.ln()).collect());
            log_residual.push(f.residual.ln());
        }
        Ok(Self {
            log_probs,
            log_residual,
        })
    }

    pub(crate) fn estimate(&self, theta: f64) -> McEstimate {
        let n = self.log_probs.len() as f64;
        let sums: Vec<f64> = self
            .log_probs
            .iter()
            .map(|lp| lp.iter().map(|l| (theta * l).exp()).sum())
            .collect();
        let tails: Vec<f64> = self
            .log_residual
            .iter()
            .map(|&l| if l == f64::NEG_INFINITY { 0.0 } else { (theta * l).exp() })
            .collect();
        let mean_s = sums.iter().sum::<f64>() / n;
        let mean_t = tails.iter().sum::<f64>() / n;
        let keep = 1.0 - mean_t;
        if !(keep > 0.0) || !mean_s.is_finite() || mean_s <= 0.0 {
            return McEstimate {
                estimate: f64::INFINITY,
                stderr: f64::INFINITY,
                flagged: true,
            };
        }
        let (mut vs, mut vt, mut cst) = (0.0, 0.0, 0.0);
        for (s, t) in sums.iter().zip(&tails) {
            vs += (s - mean_s).powi(2);
            vt += (t - mean_t).powi(2);
            cst += (s - mean_s) * (t - mean_t);
        }
        let denom = (n - 1.0).max(1.0);
        let (vs, vt, cst) = (vs / denom, vt / denom, cst / denom);
        let var_log = (vs / (mean_s * mean_s)
            + vt / (keep * keep)
            + 2.0 * cst / (mean_s * keep))
            / n;
        let max_share = sums.iter().cloned().fold(0.0, f64::max) / (mean_s * n);
        McEstimate {
            estimate: mean_s.ln() - keep.ln(),
            stderr: var_log.max(0.0).sqrt(),
            flagged: max_share > 0.1,
        }
    }
}

/// Analytic spectral data for environments that have it.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosedForm {
    /// `lambda(theta) = -log theta` on `(0, inf)`.
    UniformSieve,
    /// `lambda(theta) = log m + lnG(a+t) + lnG(am) - lnG(a) - lnG(am+t)`.
    Dirichlet { m: f64, alpha: f64 },
    /// `lambda(theta) = log sum_i w_i^theta`.
    Deterministic { log_weights: Vec<f64> },
}

impl ClosedForm {
    pub fn theta_lower(&self) -> f64 {
        match self {
            ClosedForm::UniformSieve => 0.0,
            ClosedForm::Dirichlet { alpha, .. } => -alpha,
            ClosedForm::Deterministic { .. } => f64::NEG_INFINITY,
        }
    }

    pub fn lambda(&self, theta: f64) -> f64 {
        if theta <= self.theta_lower() {
            return f64::INFINITY;
        }
        match self {
            ClosedForm::UniformSieve => -theta.ln(),
            ClosedForm::Dirichlet { m, alpha } => {
                m.ln() + ln_gamma(alpha + theta) + ln_gamma(alpha * m)
                    - ln_gamma(*alpha)
                    - ln_gamma(alpha * m + theta)
            }
            ClosedForm::Deterministic { log_weights } => {
                let mx = log_weights
                    .iter()
                    .map(|l| theta * l)
                    .fold(f64::NEG_INFINITY, f64::max);
                mx + log_weights
                    .iter()
                    .map(|l| (theta * l - mx).exp())
                    .sum::<f64>()
                    .ln()
            }
        }
    }

    pub fn dlambda(&self, theta: f64) -> f64 {
        if theta <= self.theta_lower() {
            return f64::NAN;
        }
        match self {
            ClosedForm::UniformSieve => -1.0 / theta,
            ClosedForm::Dirichlet { m, alpha } => {
                digamma(alpha + theta) - digamma(alpha * m + theta)
            }
            ClosedForm::Deterministic { log_weights } => {
                let (mean, _) = tilted_moments(log_weights, theta);
                mean
            }
        }
    }

    pub fn d2lambda(&self, theta: f64) -> f64 {
        if theta <= self.theta_lower() {
            return f64::NAN;
        }
        match self {
            ClosedForm::UniformSieve => 1.0 / (theta * theta),
            ClosedForm::Dirichlet { m, alpha } => {
                trigamma(alpha + theta) - trigamma(alpha * m + theta)
            }
            ClosedForm::Deterministic { log_weights } => {
                let (_, var) = tilted_moments(log_weights, theta);
                var
            }
        }
    }
}

/// Mean and variance of `log w` under the weights `w^theta / sum w^theta`.
fn tilted_moments(log_weights: &[f64], theta: f64) -> (f64, f64) {
    let mx = log_weights
        .iter()
        .map(|l| theta * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = log_weights.iter().map(|l| (theta * l - mx).exp()).collect();
    let total: f64 = ws.iter().sum();
    let mean = ws.iter().zip(log_weights).map(|(w, l)| w * l).sum::<f64>() / total;
    let var = ws
        .iter()
        .zip(log_weights)
        .map(|(w, l)| w * (l - mean).powi(2))
        .sum::<f64>()
        / total;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn dirichlet21() -> EnvironmentSpec {
        EnvironmentSpec::DirichletSplit { m: 2, alpha: 1.0 }
    }

    #[test]
    fn deterministic_fragmentation_is_the_fixed_vector() {
        let env = EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]);
        let f = env.sample_fragmentation(0.3, &mut stream(1, &[])).unwrap();
        assert_eq!(f.probs, vec![0.5, 0.5]);
        assert_eq!(f.residual, 0.0);
    }

    #[test]
    fn sieve_rejects_zero_floor() {
        let env = EnvironmentSpec::uniform_sieve();
        assert!(matches!(
            env.sample_fragmentation(0.0, &mut stream(1, &[])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sieve_residual_below_floor() {
        let env = EnvironmentSpec::uniform_sieve();
        let mut rng = stream(2, &[]);
        for _ in 0..1000 {
            let f = env.sample_fragmentation(1e-9, &mut rng).unwrap();
            assert!(f.probs.iter().sum::<f64>() >= 1.0 - 1e-9);
            assert!(f.residual < 1e-9);
            assert!((f.total() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn dirichlet_first_coordinate_mean() {
        let env = dirichlet21();
        let mut rng = stream(3, &[]);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| env.sample_fragmentation(0.0, &mut rng).unwrap().probs[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn invalid_parameters_are_config_errors() {
        let bad = [
            EnvironmentSpec::DirichletSplit { m: 2, alpha: 0.0 },
            EnvironmentSpec::DirichletSplit { m: 1, alpha: 1.0 },
            EnvironmentSpec::DeterministicSplit(vec![0.5, 0.4]),
            EnvironmentSpec::DeterministicSplit(vec![1.0]),
            EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a: -1.0, b: 1.0 }),
        ];
        for env in bad {
            assert!(matches!(env.validate(), Err(Error::Config(_))), "{env:?}");
        }
    }

    #[test]
    fn lattice_tags() {
        assert!(EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]).is_lattice());
        assert!(EnvironmentSpec::DeterministicSplit(vec![0.5, 0.25, 0.25]).is_lattice());
        assert!(!EnvironmentSpec::DeterministicSplit(vec![0.5, 0.3, 0.2]).is_lattice());
        assert!(!dirichlet21().is_lattice());
        assert!(!EnvironmentSpec::uniform_sieve().is_lattice());
    }

    #[test]
    fn closed_form_golden_values() {
        let u = EnvironmentSpec::uniform_sieve().closed_form_spectral().unwrap();
        assert_eq!(u.lambda(1.0), 0.0);
        assert!((u.lambda(2.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(u.theta_lower(), 0.0);

        let d = dirichlet21().closed_form_spectral().unwrap();
        for &t in &[-0.5f64, 0.0, 1.0, 2.0, 3.3] {
            let expect = std::f64::consts::LN_2 - (1.0 + t).ln();
            assert!((d.lambda(t) - expect).abs() < 1e-13, "theta {t}");
            assert!((d.dlambda(t) + 1.0 / (1.0 + t)).abs() < 1e-12);
            assert!((d.d2lambda(t) - 1.0 / (1.0 + t).powi(2)).abs() < 1e-11);
        }
        assert!(d.lambda(1.0).abs() < 1e-14);
        assert_eq!(d.theta_lower(), -1.0);

        let h = EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5])
            .closed_form_spectral()
            .unwrap();
        assert!(h.lambda(1.0).abs() < 1e-15);
        assert!((h.lambda(2.0) + std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(h.d2lambda(3.0), 0.0);

        assert!(EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a: 2.0, b: 1.0 })
            .closed_form_spectral()
            .is_none());
    }

    #[test]
    fn mc_deterministic_is_exact() {
        let env = EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]);
        let est = env.mc_log_laplace(2.0, 100, &mut stream(4, &[])).unwrap();
        assert_eq!(est.estimate, 0.5f64.ln());
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn mc_uniform_sieve_theta_two() {
        let env = EnvironmentSpec::uniform_sieve();
        let est = env.mc_log_laplace(2.0, 100_000, &mut stream(5, &[])).unwrap();
        let err = (est.estimate + std::f64::consts::LN_2).abs();
        assert!(err <= 3.0 * est.stderr, "{est:?}");
        assert!(!est.flagged);
    }

    #[test]
    fn mc_dirichlet_theta_zero() {
        let est = dirichlet21()
            .mc_log_laplace(0.0, 1000, &mut stream(6, &[]))
            .unwrap();
        assert!((est.estimate - std::f64::consts::LN_2).abs() <= 3.0 * est.stderr + 1e-15);
    }

    #[test]
    fn mc_theta_one_is_zero() {
        let envs = [
            EnvironmentSpec::uniform_sieve(),
            EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a: 2.0, b: 3.0 }),
            dirichlet21(),
            EnvironmentSpec::DirichletSplit { m: 3, alpha: 0.5 },
        ];
        for env in envs {
            let est = env.mc_log_laplace(1.0, 2000, &mut stream(7, &[])).unwrap();
            assert!(est.estimate.abs() <= 3.0 * est.stderr + 1e-12, "{env:?}: {est:?}");
        }
    }

    #[test]
    fn mc_agrees_with_closed_form_on_grid() {
        let envs = [EnvironmentSpec::uniform_sieve(), dirichlet21()];
        for env in envs {
            let cf = env.closed_form_spectral().unwrap();
            let set = LaplaceSampleSet::draw(&env, 20_000, &mut stream(8, &[])).unwrap();
            for &t in &[0.5, 1.0, 1.5, 2.0, 3.0, 4.0] {
                let est = set.estimate(t);
                assert!(
                    (est.estimate - cf.lambda(t)).abs() <= 4.0 * est.stderr + 1e-12,
                    "{env:?} theta {t}: {est:?} vs {}",
                    cf.lambda(t)
                );
            }
        }
    }

    #[test]
    fn mc_grid_is_convex() {
        let env = EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a: 1.5, b: 1.0 });
        let set = LaplaceSampleSet::draw(&env, 5000, &mut stream(9, &[])).unwrap();
        let h = 0.25;
        let grid: Vec<f64> = (0..16).map(|i| 0.5 + h * i as f64).collect();
        let est: Vec<McEstimate> = grid.iter().map(|&t| set.estimate(t)).collect();
        for w in est.windows(3) {
            let dd = w[0].estimate - 2.0 * w[1].estimate + w[2].estimate;
            let se = w[0].stderr + 2.0 * w[1].stderr + w[2].stderr;
            assert!(dd >= -4.0 * se, "second difference {dd}");
        }
    }

    proptest! {
        #[test]
        fn fragmentation_conserves_mass(
            seed in any::<u64>(),
            a in 0.2f64..5.0,
            b in 0.2f64..5.0,
            m in 2usize..6,
            floor_exp in 2i32..12,
        ) {
            let floor = 10f64.powi(-floor_exp);
            let envs = [
                EnvironmentSpec::uniform_sieve(),
                EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a, b }),
                EnvironmentSpec::DirichletSplit { m, alpha: a },
            ];
            let mut rng = stream(seed, &[]);
            for env in envs {
                let f = env.sample_fragmentation(floor, &mut rng).unwrap();
                prop_assert!((f.total() - 1.0).abs() <= 1e-12);
                prop_assert!(f.probs.iter().all(|&p| p > 0.0 && p <= 1.0));
                prop_assert!(f.residual >= 0.0 && f.residual < 1.0);
            }
        }
    }
}
