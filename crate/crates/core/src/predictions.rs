//! Leading-order predictions for occupancy counts and finite-level checks of
//! the local limit estimates they rest on.
//!
//! The martingale limit `W(theta)` is not observable; callers pass `W_J(theta)`
//! from the deepest materialized level of the same tree.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::occupancy::{kernel_m, phi, OccupancyCounts};
use crate::special::{gamma, ln_factorial, ln_gamma, normal_cdf, normal_pdf};
use crate::spectral::{CriticalConstants, RegimeLabel, SpectralProfile};
use crate::tree::WeightedTree;

const THETA_MATCH_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionInput {
    pub a: f64,
    pub b: f64,
    /// Ball count, or the Poisson intensity `t`.
    pub n: f64,
    pub j: usize,
    pub k: u32,
    pub regime: RegimeLabel,
    /// `(theta, W(theta))` estimates.
    pub w_hat: Vec<(f64, f64)>,
    pub w_approximate: bool,
}

impl PredictionInput {
    fn w(&self, theta: f64) -> Result<f64> {
        self.w_hat
            .iter()
            .find(|(t, _)| (t - theta).abs() <= THETA_MATCH_TOL)
            .map(|&(_, w)| w)
            .ok_or_else(|| Error::Refused(format!("no W estimate supplied for theta = {theta}")))
    }
}

/// What a prediction is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `K(1)` in the given regime.
    Occupied(RegimeLabel),
    /// `K(k)` at the level `log n / (-lambda'(k))`.
    AtLeast(u32),
    /// Empty boxes `L` in the freezing window.
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionForm {
    /// Every ball alone: `K = n`.
    ExactN,
    /// Predicted `n - K`.
    Deficit,
    /// Predicted `K / n`.
    Fraction,
    Count,
}

/// `value = coefficient * gaussian * w_hat * exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantBreakdown {
    pub theta: f64,
    pub coefficient: f64,
    pub gaussian: f64,
    pub w_hat: f64,
    pub log_scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub form: PredictionForm,
    pub target: Target,
    pub breakdown: ConstantBreakdown,
    pub approximate: bool,
}

/// Which result applies to the input: freezing, `k >= 2`, otherwise the regime.
pub fn target_for(input: &PredictionInput) -> Target {
    if input.regime == RegimeLabel::Freezing {
        Target::Empty
    } else if input.k >= 2 {
        Target::AtLeast(input.k)
    } else {
        Target::Occupied(input.regime)
    }
}

/// The `theta` whose `W(theta)` the prediction needs, if any.
pub fn required_theta(profile: &SpectralProfile, input: &PredictionInput) -> Option<f64> {
    match target_for(input) {
        Target::AtLeast(k) => Some(k as f64),
        Target::Occupied(RegimeLabel::PresatA | RegimeLabel::PresatB) => Some(2.0),
        Target::Occupied(RegimeLabel::PresatC | RegimeLabel::Postsat) | Target::Empty => {
            profile.solve_theta_for_slope(input.a).ok()
        }
        Target::Occupied(_) => None,
    }
}

/// `int f` of the kernel behind each Gaussian-template prediction.
pub fn kernel_integral(target: Target, theta: f64) -> f64 {
    match target {
        Target::Occupied(RegimeLabel::PresatC) => gamma(2.0 - theta) / (theta * (theta - 1.0)),
        Target::Occupied(RegimeLabel::Postsat) => gamma(1.0 - theta) / theta,
        Target::Empty => gamma(-theta),
        _ => f64::NAN,
    }
}

pub fn predict(
    profile: &SpectralProfile,
    constants: &CriticalConstants,
    input: &PredictionInput,
) -> Result<Prediction> {
    if !(input.n > 0.0) || input.j == 0 {
        return Err(Error::Refused("prediction needs n > 0 and j >= 1".into()));
    }
    let target = target_for(input);
    let ln_n = input.n.ln();
    let j = input.j as f64;
    let (a, b) = (input.a, input.b);

    if let Target::AtLeast(k) = target {
        let kf = k as f64;
        if !(kf > profile.theta_lower() && kf < constants.theta_star) {
            return Err(Error::Refused(format!(
                "k = {k} must lie in (theta_lower, theta*) = ({}, {})",
                profile.theta_lower(),
                constants.theta_star
            )));
        }
        return at_least_k(profile, input, k, ln_n, j);
    }

    let cls = profile.classify_regime(constants, a)?;
    if !cls.has(input.regime) || input.regime == RegimeLabel::OutOfRange {
        return Err(Error::Refused(format!(
            "a = {a} is classified {cls}, not {}",
            input.regime
        )));
    }
    let regime = input.regime;
    let done = |form, coefficient: f64, gaussian: f64, w_hat: f64, log_scale: f64, theta| {
        let value = if coefficient == 0.0 || gaussian == 0.0 || w_hat == 0.0 {
            0.0
        } else {
            (coefficient.ln() + gaussian.ln() + w_hat.ln() + log_scale).exp()
        };
        Prediction {
            value,
            form,
            target,
            breakdown: ConstantBreakdown {
                theta,
                coefficient,
                gaussian,
                w_hat,
                log_scale,
            },
            approximate: input.w_approximate,
        }
    };
    match regime {
        RegimeLabel::VeryLow => Ok(done(PredictionForm::ExactN, 1.0, 1.0, 1.0, ln_n, f64::NAN)),
        RegimeLabel::PresatA | RegimeLabel::PresatB => {
            let w2 = input.w(2.0)?;
            let gaussian = if regime == RegimeLabel::PresatB {
                normal_cdf(-b * (a / profile.d2lambda(2.0)).sqrt())
            } else {
                1.0
            };
            let log_scale = 2.0 * ln_n + profile.lambda(2.0) * j;
            Ok(done(PredictionForm::Deficit, 0.5, gaussian, w2, log_scale, 2.0))
        }
        RegimeLabel::Saturation => {
            let frac = normal_cdf(-b * (a / profile.d2lambda(1.0)).sqrt());
            Ok(done(PredictionForm::Fraction, 1.0, frac, 1.0, 0.0, 1.0))
        }
        RegimeLabel::PresatC | RegimeLabel::Postsat | RegimeLabel::Freezing => {
            let theta = cls.theta.ok_or(Error::SlopeOutOfRange { a })?;
            let w = input.w(theta)?;
            let var = profile.d2lambda(theta);
            let coefficient = kernel_integral(target, theta) / (2.0 * PI * var).sqrt();
            let gaussian = (-a * b * b / (2.0 * var)).exp();
            let log_scale = theta * ln_n + profile.lambda(theta) * j - 0.5 * j.ln();
            let form = if regime == RegimeLabel::PresatC {
                PredictionForm::Deficit
            } else {
                PredictionForm::Count
            };
            Ok(done(form, coefficient, gaussian, w, log_scale, theta))
        }
        RegimeLabel::OutOfRange => unreachable!(),
    }
}

fn at_least_k(profile: &SpectralProfile, input: &PredictionInput, k: u32, ln_n: f64, j: f64) -> Result<Prediction> {
    let kf = k as f64;
    let w = input.w(kf)?;
    let d1 = profile.dlambda(kf);
    let gaussian = normal_cdf(-input.b * (-d1 / profile.d2lambda(kf)).sqrt());
    let log_scale = kf * ln_n + profile.lambda(kf) * j - (kf - 1.0) * (d1 * j + ln_n);
    let ln_coef = -ln_factorial(k as u64);
    let value = if gaussian == 0.0 || w == 0.0 {
        0.0
    } else {
        (ln_coef + gaussian.ln() + w.ln() + log_scale).exp()
    };
    Ok(Prediction {
        value,
        form: PredictionForm::Count,
        target: Target::AtLeast(k),
        breakdown: ConstantBreakdown {
            theta: kf,
            coefficient: ln_coef.exp(),
            gaussian,
            w_hat: w,
            log_scale,
        },
        approximate: input.w_approximate,
    })
}

/// `j_n` for the level rule `(ln n - a j) / sqrt(ln n) = b`, rounded half up,
/// and the `b` it actually realizes.
pub fn level_for(n: f64, a: f64, b: f64) -> (usize, f64) {
    let ln_n = n.ln();
    let j = ((ln_n - b * ln_n.sqrt()) / a + 0.5).floor().max(1.0);
    (j as usize, (ln_n - a * j) / ln_n.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub observed: f64,
    pub predicted: f64,
    pub absolute_error: f64,
    /// Absent when the prediction is zero.
    pub relative_error: Option<f64>,
    pub log_ratio: Option<f64>,
    pub exact_match: bool,
}

/// The observed quantity matching the prediction's form and target.
pub fn observed_for(pred: &Prediction, counts: &OccupancyCounts, n: f64) -> Result<f64> {
    let k1 = counts.at_least(1) as f64;
    Ok(match (pred.form, pred.target) {
        (PredictionForm::ExactN, _) => k1,
        (PredictionForm::Deficit, _) => n - k1,
        (PredictionForm::Fraction, _) => k1 / n,
        (_, Target::AtLeast(k)) => {
            if k as usize > counts.k.len() {
                return Err(Error::Refused(format!("K({k}) not tabulated; raise k_max")));
            }
            counts.at_least(k as usize) as f64
        }
        (_, Target::Empty) => counts
            .l
            .ok_or_else(|| Error::Refused("empty-box count needs an untruncated tree level".into()))?
            as f64,
        _ => k1,
    })
}

pub fn compare(pred: &Prediction, counts: &OccupancyCounts, n: f64) -> Result<Comparison> {
    Ok(compare_values(pred.value, observed_for(pred, counts, n)?))
}

pub fn compare_values(predicted: f64, observed: f64) -> Comparison {
    let absolute_error = (observed - predicted).abs();
    let positive = predicted > 0.0;
    Comparison {
        observed,
        predicted,
        absolute_error,
        relative_error: positive.then(|| absolute_error / predicted),
        log_ratio: (positive && observed > 0.0).then(|| (observed / predicted).ln()),
        exact_match: observed == predicted,
    }
}

// Local limit checks

/// Gibbs weights `exp(-theta V - lambda(theta) j)` of one level, sorted by `V`.
struct Gibbs {
    v: Vec<f64>,
    w: Vec<f64>,
    /// `cum[i] = sum w[..i]`.
    cum: Vec<f64>,
    total: f64,
    mean: f64,
    var: f64,
    sqrt_j: f64,
}

impl Gibbs {
    fn new(tree: &WeightedTree, profile: &SpectralProfile, theta: f64, j: usize) -> Self {
        let lam = profile.lambda(theta) * j as f64;
        let mut pairs: Vec<(f64, f64)> = tree
            .level(j)
            .position
            .iter()
            .map(|&v| (v, (-theta * v - lam).exp()))
            .collect();
        pairs.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));
        let (v, w): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut cum = Vec::with_capacity(w.len() + 1);
        let mut s = 0.0;
        cum.push(0.0);
        for &x in &w {
            s += x;
            cum.push(s);
        }
        Self {
            v,
            w,
            cum,
            total: s,
            mean: -profile.dlambda(theta) * j as f64,
            var: profile.d2lambda(theta),
            sqrt_j: (j as f64).sqrt(),
        }
    }

    /// Mass on `(lo, hi]`.
    fn mass(&self, lo: f64, hi: f64) -> f64 {
        let i = self.v.partition_point(|&x| x <= lo);
        let k = self.v.partition_point(|&x| x <= hi);
        if k > i { self.cum[k] - self.cum[i] } else { 0.0 }
    }

    /// Mass on `[lo, inf)`.
    fn mass_above(&self, lo: f64) -> f64 {
        let i = self.v.partition_point(|&x| x < lo);
        self.total - self.cum[i]
    }

    fn density(&self, y: f64) -> f64 {
        normal_pdf(y / self.sqrt_j, self.var)
    }
}

fn check_theta(
    profile: &SpectralProfile,
    constants: &CriticalConstants,
    theta: f64,
    j: usize,
    tree: &WeightedTree,
) -> Result<()> {
    if profile.is_lattice() {
        return Err(Error::Lattice("local limit checks"));
    }
    if !(theta > constants.theta_sub && theta < constants.theta_star) {
        return Err(Error::Domain(format!(
            "theta = {theta} outside (theta_*, theta*) = ({}, {})",
            constants.theta_sub, constants.theta_star
        )));
    }
    if j == 0 || j > tree.depth() {
        return Err(Error::Config(format!("level {j} not materialized")));
    }
    Ok(())
}

/// `sup |sqrt(j) Z((x + c - h, x + c + h]) - 2h W_j g(x / sqrt(j))|` over the
/// grids, `c = -lambda'(theta) j`.
pub fn check_local_limit(
    tree: &WeightedTree,
    profile: &SpectralProfile,
    constants: &CriticalConstants,
    theta: f64,
    j: usize,
    h_grid: &[f64],
    x_grid: &[f64],
) -> Result<f64> {
    check_theta(profile, constants, theta, j, tree)?;
    let g = Gibbs::new(tree, profile, theta, j);
    let mut sup = 0.0f64;
    for &h in h_grid {
        for &x in x_grid {
            let c = g.mean + x;
            let lhs = g.sqrt_j * g.mass(c - h, c + h);
            let rhs = 2.0 * h * g.total * g.density(x);
            sup = sup.max((lhs - rhs).abs());
        }
    }
    Ok(sup)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RenewalKernel {
    /// `1{0 <= x < 1}`.
    Indicator,
    /// `e^{-theta x} m(e^x)`, for `theta` in `(1, 2)`.
    Deficit,
    /// `e^{-theta x} phi_k(e^x)`, for `theta` in `(0, k)`.
    Phi(u32),
}

impl RenewalKernel {
    pub fn integral(self, theta: f64) -> f64 {
        match self {
            RenewalKernel::Indicator => 1.0,
            RenewalKernel::Deficit => gamma(2.0 - theta) / (theta * (theta - 1.0)),
            RenewalKernel::Phi(k) => {
                (ln_gamma(k as f64 - theta) - ln_factorial(k as u64 - 1)).exp() / theta
            }
        }
    }

    fn valid(self, theta: f64) -> bool {
        match self {
            RenewalKernel::Indicator => true,
            RenewalKernel::Deficit => theta > 1.0 && theta < 2.0,
            RenewalKernel::Phi(k) => k >= 1 && theta > 0.0 && theta < k as f64,
        }
    }

    pub fn eval(self, theta: f64, x: f64) -> f64 {
        match self {
            RenewalKernel::Indicator => {
                if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }
            }
            RenewalKernel::Deficit => {
                let m = kernel_m(x.exp());
                if m > 0.0 { (m.ln() - theta * x).exp() } else { 0.0 }
            }
            RenewalKernel::Phi(k) => {
                let p = phi(k, x.exp());
                if p > 0.0 { (p.ln() - theta * x).exp() } else { 0.0 }
            }
        }
    }
}

/// `sup_y |sqrt(j) sum w_u f(c + y - V(u)) - W_j g(y / sqrt(j)) int f|`.
pub fn check_renewal_sum(
    tree: &WeightedTree,
    profile: &SpectralProfile,
    constants: &CriticalConstants,
    theta: f64,
    j: usize,
    kernel: RenewalKernel,
    y_grid: &[f64],
) -> Result<f64> {
    check_theta(profile, constants, theta, j, tree)?;
    if !kernel.valid(theta) {
        return Err(Error::Domain(format!("kernel {kernel:?} needs another theta than {theta}")));
    }
    let g = Gibbs::new(tree, profile, theta, j);
    let int_f = kernel.integral(theta);
    let mut sup = 0.0f64;
    for &y in y_grid {
        let c = g.mean + y;
        let lhs: f64 = match kernel {
            RenewalKernel::Indicator => g.mass(c - 1.0, c),
            _ => g.v.iter().zip(&g.w).map(|(&v, &w)| w * kernel.eval(theta, c - v)).sum(),
        } * g.sqrt_j;
        let rhs = g.total * g.density(y) * int_f;
        sup = sup.max((lhs - rhs).abs());
    }
    Ok(sup)
}

/// `sup_y |sum w_u 1{V(u) >= delta j + y} - W_j|` for `delta < -lambda'(theta)`.
pub fn check_clt_tail(
    tree: &WeightedTree,
    profile: &SpectralProfile,
    constants: &CriticalConstants,
    theta: f64,
    j: usize,
    delta: f64,
    y_grid: &[f64],
) -> Result<f64> {
    check_theta(profile, constants, theta, j, tree)?;
    let slope = -profile.dlambda(theta);
    if !(delta > 0.0 && delta < slope) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, {slope})")));
    }
    let g = Gibbs::new(tree, profile, theta, j);
    let base = delta * j as f64;
    Ok(y_grid
        .iter()
        .map(|&y| (g.mass_above(base + y) - g.total).abs())
        .fold(0.0, f64::max))
}

/// `sup_y |sum w_u 1{V(u) >= c + y} - W_j Phi(-y / sqrt(lambda'' j))|`.
pub fn check_clt_gaussian(
    tree: &WeightedTree,
    profile: &SpectralProfile,
    constants: &CriticalConstants,
    theta: f64,
    j: usize,
    y_grid: &[f64],
) -> Result<f64> {
    check_theta(profile, constants, theta, j, tree)?;
    let g = Gibbs::new(tree, profile, theta, j);
    let sd = (g.var * j as f64).sqrt();
    Ok(y_grid
        .iter()
        .map(|&y| (g.mass_above(g.mean + y) - g.total * normal_cdf(-y / sd)).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvironmentSpec;
    use std::f64::consts::SQRT_2;

    fn uniform() -> (SpectralProfile, CriticalConstants) {
        let p = SpectralProfile::build(&EnvironmentSpec::uniform_sieve(), None).unwrap();
        let c = p.critical_constants().unwrap();
        (p, c)
    }

    fn dirichlet() -> (EnvironmentSpec, SpectralProfile, CriticalConstants) {
        let env = EnvironmentSpec::DirichletSplit { m: 2, alpha: 1.0 };
        let p = SpectralProfile::build(&env, None).unwrap();
        let c = p.critical_constants().unwrap();
        (env, p, c)
    }

    fn input(a: f64, b: f64, regime: RegimeLabel, w: Vec<(f64, f64)>) -> PredictionInput {
        PredictionInput {
            a,
            b,
            n: 1e5,
            j: 12,
            k: 1,
            regime,
            w_hat: w,
            w_approximate: false,
        }
    }

    #[test]
    fn saturation_at_b_zero_is_half() {
        let (p, c) = uniform();
        let pr = predict(&p, &c, &input(1.0, 0.0, RegimeLabel::Saturation, vec![])).unwrap();
        assert_eq!(pr.form, PredictionForm::Fraction);
        assert_eq!(pr.value, 0.5);
        let (_, p, c) = dirichlet();
        let pr = predict(&p, &c, &input(0.5, 0.0, RegimeLabel::Saturation, vec![])).unwrap();
        assert_eq!(pr.value, 0.5);
    }

    #[test]
    fn postsaturation_coefficient() {
        let (p, c) = uniform();
        let pr = predict(&p, &c, &input(2.0, 0.0, RegimeLabel::Postsat, vec![(0.5, 1.0)])).unwrap();
        assert!((pr.breakdown.coefficient - 1.0 / SQRT_2).abs() < 1e-12);
        assert_eq!(pr.breakdown.gaussian, 1.0);
        let want = 0.5 * 1e5f64.ln() + 2f64.ln() * 12.0 - 0.5 * 12f64.ln();
        assert!((pr.breakdown.log_scale - want).abs() < 1e-12);
    }

    #[test]
    fn template_coefficients_differ_by_sign() {
        for &t in &[0.3, 0.7, 1.4, 1.8] {
            let iic = kernel_integral(Target::Occupied(RegimeLabel::PresatC), t);
            let iv = kernel_integral(Target::Occupied(RegimeLabel::Postsat), t);
            let ratio = (t - 1.0) * gamma(1.0 - t) / gamma(2.0 - t);
            assert!((iv / iic - ratio).abs() < 1e-12, "theta {t}");
            assert!((ratio + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn count_at_k_one_is_saturation() {
        let (_, p, c) = dirichlet();
        for &b in &[-1.0, 0.0, 0.7] {
            let mut inp = input(0.5, b, RegimeLabel::Saturation, vec![(1.0, 1.0)]);
            let sat = predict(&p, &c, &inp).unwrap();
            inp.regime = RegimeLabel::Postsat;
            let thm2 = at_least_k(&p, &inp, 1, inp.n.ln(), inp.j as f64).unwrap();
            assert!((thm2.value - sat.value * inp.n).abs() <= 1e-12 * thm2.value);
        }
    }

    #[test]
    fn count_needs_k_below_theta_star() {
        let (p, c) = uniform();
        let mut inp = input(0.5, 0.0, RegimeLabel::PresatB, vec![(2.0, 1.0), (3.0, 1.0)]);
        inp.k = 2;
        assert_eq!(predict(&p, &c, &inp).unwrap().target, Target::AtLeast(2));
        inp.k = 3;
        assert!(matches!(predict(&p, &c, &inp), Err(Error::Refused(_))));
    }

    #[test]
    fn predictions_positive_and_b_continuous() {
        let (p, c) = uniform();
        let w = vec![(2.0, 1.3), (0.5, 0.8), (4.0 / 3.0, 1.1)];
        for (a, regime) in [
            (0.45, RegimeLabel::PresatA),
            (0.5, RegimeLabel::PresatB),
            (0.75, RegimeLabel::PresatC),
            (2.0, RegimeLabel::Postsat),
        ] {
            let at = |b: f64| predict(&p, &c, &input(a, b, regime, w.clone())).unwrap();
            let v0 = at(0.0);
            assert!(v0.value > 0.0);
            assert!(((at(1e-7).value - v0.value) / v0.value).abs() < 1e-5);
        }
    }

    #[test]
    fn inadmissible_inputs_refused() {
        let (p, c) = uniform();
        assert!(matches!(
            predict(&p, &c, &input(0.75, 0.0, RegimeLabel::Postsat, vec![(4.0 / 3.0, 1.0)])),
            Err(Error::Refused(_))
        ));
        assert!(matches!(
            predict(&p, &c, &input(0.75, 0.0, RegimeLabel::PresatC, vec![])),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn comparisons() {
        let c = compare_values(4.0, 4.0);
        assert_eq!(c.relative_error, Some(0.0));
        assert!(c.exact_match);
        assert_eq!(compare_values(0.0, 3.0).relative_error, None);
        let counts = OccupancyCounts {
            j: 3,
            k: vec![100, 0],
            beyond: 0,
            l: None,
            z: None,
            overflow: 0,
        };
        let (p, cc) = uniform();
        let pr = predict(&p, &cc, &input(0.2, 0.0, RegimeLabel::VeryLow, vec![])).unwrap();
        let cmp = compare(&pr, &counts, 100.0).unwrap();
        assert!(cmp.observed == 100.0 && pr.value > 0.0);
    }

    #[test]
    fn level_rule_rounds_half_up() {
        let (j, b) = level_for(1e5, 0.5, 0.0);
        assert_eq!(j, 23);
        assert!((b - (1e5f64.ln() - 11.5) / 1e5f64.ln().sqrt()).abs() < 1e-12);
        assert_eq!(level_for(1e5, 1.5, 0.0).0, 8);
        assert_eq!(level_for(std::f64::consts::E.powi(3), 2.0, 0.0).0, 2);
    }

    #[test]
    fn renewal_integrals() {
        assert!((RenewalKernel::Deficit.integral(1.5) - 2.363_271_80).abs() < 1e-7);
        assert!((RenewalKernel::Phi(1).integral(0.5) - 3.544_907_70).abs() < 1e-7);
        // numerical quadrature of the kernels themselves
        for (kern, theta) in [
            (RenewalKernel::Deficit, 1.5),
            (RenewalKernel::Phi(1), 0.5),
            (RenewalKernel::Phi(3), 1.2),
        ] {
            let h = 1e-3;
            let q: f64 = (-60_000..90_000).map(|i| kern.eval(theta, i as f64 * h) * h).sum();
            assert!((q / kern.integral(theta) - 1.0).abs() < 1e-4, "{kern:?}: {q}");
        }
    }

    #[test]
    fn local_checks_basic() {
        let (env, p, c) = dirichlet();
        let tree = WeightedTree::materialize(&env, 12, 0.0, 3).unwrap();
        assert_eq!(check_local_limit(&tree, &p, &c, 1.0, 12, &[0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let far = 10.0 * (0.25f64 * 12.0).sqrt();
        assert!(check_local_limit(&tree, &p, &c, 1.0, 12, &[0.5], &[far, -far]).unwrap() < 1e-8);
        let w = tree.martingale(&p, 1.0, 12).value;
        let d = check_clt_tail(&tree, &p, &c, 1.0, 12, 0.25, &[-far]).unwrap();
        assert!(d < 1e-9 * w.max(1.0));
        assert!(matches!(
            check_clt_tail(&tree, &p, &c, 1.0, 12, 0.6, &[0.0]),
            Err(Error::Domain(_))
        ));
        assert!(check_renewal_sum(&tree, &p, &c, 1.0, 12, RenewalKernel::Indicator, &[0.0]).is_ok());
        assert!(matches!(
            check_renewal_sum(&tree, &p, &c, 1.0, 12, RenewalKernel::Deficit, &[0.0]),
            Err(Error::Domain(_))
        ));
        let det = EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]);
        let dp = SpectralProfile::build(&det, None).unwrap();
        let dt = WeightedTree::materialize(&det, 3, 0.0, 1).unwrap();
        assert!(matches!(
            check_local_limit(&dt, &dp, &c, 1.0, 3, &[0.5], &[0.0]),
            Err(Error::Lattice(_))
        ));
    }
}
