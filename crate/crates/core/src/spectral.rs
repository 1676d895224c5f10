//! Spectral apparatus of the branching random walk: `lambda` and its
//! derivatives, critical points, the Legendre transform `lambda*`, the
//! deficit exponent `alpha(a)` and the regime classification in the density
//! of balls `a`.
//!
//! All roots are found by bisection to an absolute tolerance of `1e-10`;
//! convexity of `lambda` gives monotone brackets.

use std::fmt;

use crate::environment::{ClosedForm, EnvironmentSpec, LaplaceSampleSet};
use crate::error::{Error, Result};
use crate::rng::stream;

pub const ROOT_TOL: f64 = 1e-10;
/// Absolute tolerance for detecting the equality regimes IIB and III.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Upper end of root searches on unbounded domains.
pub const THETA_SEARCH_MAX: f64 = 1e4;

const A_BAR_OFFSET: f64 = 1e-6;
const A_BAR_MINUS_OFFSET: f64 = 1e-8;

/// Monte Carlo grid used when no closed form exists.
#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    /// Defaults to `theta_lower + 0.1`.
    pub grid_min: Option<f64>,
    pub grid_max: f64,
    pub grid_step: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            grid_min: None,
            grid_max: 8.0,
            grid_step: 0.05,
            samples: 10_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileSource {
    ClosedForm,
    MonteCarlo {
        grid_min: f64,
        grid_max: f64,
        grid_step: f64,
        samples: usize,
    },
}

/// Natural cubic spline through `lambda` estimates on a uniform grid.
#[derive(Clone, Debug)]
struct Table {
    theta0: f64,
    step: f64,
    values: Vec<f64>,
    stderr: Vec<f64>,
    second: Vec<f64>,
    samples: usize,
}

impl Table {
    fn new(theta0: f64, step: f64, values: Vec<f64>, stderr: Vec<f64>, samples: usize) -> Self {
        let n = values.len();
        // Tridiagonal solve for the spline second derivatives, natural ends.
        let mut second = vec![0.0; n];
        if n > 2 {
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let rhs = 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (step * step);
                let denom = 4.0 - c[i - 1];
                c[i] = 1.0 / denom;
                d[i] = (rhs - d[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                second[i] = d[i] - c[i] * second[i + 1];
            }
        }
        Self {
            theta0,
            step,
            values,
            stderr,
            second,
            samples,
        }
    }

    fn theta_end(&self) -> f64 {
        self.theta0 + self.step * (self.values.len() - 1) as f64
    }

    fn eval(&self, theta: f64) -> f64 {
        let lo = self.theta0 - self.step;
        let hi = self.theta_end() + self.step;
        if !(theta >= lo && theta <= hi) {
            return f64::NAN;
        }
        let n = self.values.len();
        let pos = (theta - self.theta0) / self.step;
        let i = (pos.floor() as isize).clamp(0, n as isize - 2) as usize;
        let t = pos - i as f64;
        let s = 1.0 - t;
        let h2 = self.step * self.step / 6.0;
        s * self.values[i]
            + t * self.values[i + 1]
            + h2 * ((s * s * s - s) * self.second[i] + (t * t * t - t) * self.second[i + 1])
    }
}

#[derive(Clone, Debug)]
enum Backend {
    Closed(ClosedForm),
    Table(Table),
}

/// Evaluators for `lambda`, `lambda'`, `lambda''`. Immutable once built.
#[derive(Clone, Debug)]
pub struct SpectralProfile {
    backend: Backend,
    theta_lower: f64,
    lattice: bool,
}

impl SpectralProfile {
    pub fn from_closed_form(cf: ClosedForm, lattice: bool) -> Self {
        let theta_lower = cf.theta_lower();
        Self {
            backend: Backend::Closed(cf),
            theta_lower,
            lattice,
        }
    }

    /// Closed form when available, otherwise a Monte Carlo grid.
    pub fn build(env: &EnvironmentSpec, mc: Option<&McConfig>) -> Result<Self> {
        env.validate()?;
        if let Some(cf) = env.closed_form_spectral() {
            return Ok(Self::from_closed_form(cf, env.is_lattice()));
        }
        let default = McConfig::default();
        Self::build_monte_carlo(env, mc.unwrap_or(&default))
    }

    /// Tabulates `lambda` from one common sample of fragmentations, so the
    /// grid values come from a single convex empirical function.
    pub fn build_monte_carlo(env: &EnvironmentSpec, mc: &McConfig) -> Result<Self> {
        let lower = env.theta_lower();
        let grid_min = mc.grid_min.unwrap_or(if lower.is_finite() {
            lower + 0.1
        } else {
            -3.0
        });
        if grid_min <= lower {
            return Err(Error::Domain(format!(
                "Monte Carlo grid starts at {grid_min}, at or below the domain bound {lower}"
            )));
        }
        if !(mc.grid_step > 0.0) || !(mc.grid_max > grid_min) {
            return Err(Error::Config(format!(
                "bad Monte Carlo grid [{grid_min}, {}] step {}",
                mc.grid_max, mc.grid_step
            )));
        }
        if !(grid_min < 1.0 && mc.grid_max > 2.0) {
            return Err(Error::Config(
                "Monte Carlo grid must cover theta = 1 and theta = 2".into(),
            ));
        }
        let n = ((mc.grid_max - grid_min) / mc.grid_step).round() as usize + 1;
        let set = LaplaceSampleSet::draw(env, mc.samples, &mut stream(mc.seed, &[0x4c41_4d42]))?;
        let mut values = Vec::with_capacity(n);
        let mut stderr = Vec::with_capacity(n);
        for i in 0..n {
            let est = set.estimate(grid_min + mc.grid_step * i as f64);
            if !est.estimate.is_finite() {
                return Err(Error::Domain(format!(
                    "Monte Carlo lambda diverges at theta = {}",
                    grid_min + mc.grid_step * i as f64
                )));
            }
            values.push(est.estimate);
            stderr.push(est.stderr);
        }
        Ok(Self {
            backend: Backend::Table(Table::new(grid_min, mc.grid_step, values, stderr, mc.samples)),
            theta_lower: lower,
            lattice: env.is_lattice(),
        })
    }

    pub fn theta_lower(&self) -> f64 {
        self.theta_lower
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice
    }

    pub fn source(&self) -> ProfileSource {
        match &self.backend {
            Backend::Closed(_) => ProfileSource::ClosedForm,
            Backend::Table(t) => ProfileSource::MonteCarlo {
                grid_min: t.theta0,
                grid_max: t.theta_end(),
                grid_step: t.step,
                samples: t.samples,
            },
        }
    }

    /// Open interval on which root searches run.
    pub fn search_domain(&self) -> (f64, f64) {
        match &self.backend {
            Backend::Closed(_) => (self.theta_lower, THETA_SEARCH_MAX),
            Backend::Table(t) => (t.theta0, t.theta_end()),
        }
    }

    /// `true` when `lambda(0) = inf`, i.e. infinitely many boxes on average.
    pub fn infinite_mean_offspring(&self) -> bool {
        self.theta_lower >= 0.0
    }

    pub fn lambda(&self, theta: f64) -> f64 {
        match &self.backend {
            Backend::Closed(cf) => cf.lambda(theta),
            Backend::Table(t) => t.eval(theta),
        }
    }

    pub fn dlambda(&self, theta: f64) -> f64 {
        match &self.backend {
            Backend::Closed(cf) => cf.dlambda(theta),
            Backend::Table(t) => {
                let h = t.step / 4.0;
                (t.eval(theta + h) - t.eval(theta - h)) / (2.0 * h)
            }
        }
    }

    pub fn d2lambda(&self, theta: f64) -> f64 {
        match &self.backend {
            Backend::Closed(cf) => cf.d2lambda(theta),
            Backend::Table(t) => {
                let h = t.step / 4.0;
                (t.eval(theta + h) - 2.0 * t.eval(theta) + t.eval(theta - h)) / (h * h)
            }
        }
    }

    /// Standard error of the tabulated `lambda` at the nearest grid point.
    pub fn lambda_stderr(&self, theta: f64) -> f64 {
        match &self.backend {
            Backend::Closed(_) => 0.0,
            Backend::Table(t) => {
                let i = ((theta - t.theta0) / t.step).round();
                let i = i.clamp(0.0, (t.stderr.len() - 1) as f64) as usize;
                t.stderr[i]
            }
        }
    }

    /// `theta * lambda'(theta) - lambda(theta)`; vanishes at `theta*`.
    pub fn gap(&self, theta: f64) -> f64 {
        theta * self.dlambda(theta) - self.lambda(theta)
    }

    /// Root of `theta lambda'(theta) = lambda(theta)` on `(1, inf)`.
    pub fn solve_theta_star(&self) -> Result<f64> {
        let (_, theta_max) = self.search_domain();
        // gap(1) = lambda'(1) < 0 and gap is increasing for theta > 0.
        let mut lo = 1.0;
        let mut hi = 2.0f64.min(theta_max);
        loop {
            let g = self.gap(hi);
            if g > 0.0 {
                return Ok(bisect(|t| self.gap(t), lo, hi));
            }
            if g == 0.0 {
                return Ok(hi);
            }
            if hi >= theta_max {
                return Err(Error::NoThetaStar { theta_max });
            }
            lo = hi;
            hi = (2.0 * hi).min(theta_max);
        }
    }

    /// The unique `theta` with `-lambda'(theta) = a`.
    pub fn solve_theta_for_slope(&self, a: f64) -> Result<f64> {
        if !a.is_finite() {
            return Err(Error::SlopeOutOfRange { a });
        }
        let (dom_lo, dom_hi) = self.search_domain();
        // -lambda' - a is decreasing in theta.
        let h = |t: f64| -self.dlambda(t) - a;
        let h1 = h(1.0);
        if h1 == 0.0 {
            return Ok(1.0);
        }
        if h1 > 0.0 {
            let mut lo = 1.0;
            let mut hi = 2.0f64.min(dom_hi);
            loop {
                let v = h(hi);
                if v < 0.0 {
                    return Ok(bisect(h, lo, hi));
                }
                if v == 0.0 {
                    return Ok(hi);
                }
                if hi >= dom_hi {
                    return Err(Error::SlopeOutOfRange { a });
                }
                lo = hi;
                hi = (2.0 * hi).min(dom_hi);
            }
        }
        let mut hi = 1.0;
        for k in 1..=64 {
            let lo = if dom_lo.is_finite() {
                dom_lo + (1.0 - dom_lo) * 0.5f64.powi(k)
            } else {
                1.0 - 2.0f64.powi(k)
            };
            let v = h(lo);
            if v > 0.0 {
                return Ok(bisect(h, lo, hi));
            }
            if v == 0.0 {
                return Ok(lo);
            }
            if lo <= dom_lo || !v.is_finite() {
                break;
            }
            hi = lo;
        }
        Err(Error::SlopeOutOfRange { a })
    }

    /// `lambda*(a) = -(theta a + lambda(theta))` at `-lambda'(theta) = a`.
    pub fn legendre(&self, a: f64) -> Result<f64> {
        let theta = self.solve_theta_for_slope(a)?;
        Ok(-(theta * a + self.lambda(theta)))
    }

    pub fn critical_constants(&self) -> Result<CriticalConstants> {
        if self.lattice {
            return Err(Error::Lattice("critical constants"));
        }
        let theta_star = self.solve_theta_star()?;
        let v = -self.lambda(theta_star) / theta_star;
        let lambda_two = self.lambda(2.0);
        let a_star = if theta_star > 2.0 { -lambda_two / 2.0 } else { v };
        let a_c = -self.dlambda(1.0);
        let slope_at_two = -self.dlambda(2.0);
        let property = if self.infinite_mean_offspring() {
            Property::A
        } else {
            Property::B
        };
        let (a_bar, theta_sub, a_bar_minus, slope_at_zero) = match property {
            // lambda blows up at 0 from the right, so does -lambda'.
            Property::A => (f64::INFINITY, self.theta_lower, None, None),
            Property::B => {
                let a_bar = -self.dlambda(A_BAR_OFFSET);
                let theta_sub = self.solve_theta_sub();
                let probe = if theta_sub.is_finite() {
                    theta_sub + A_BAR_MINUS_OFFSET
                } else {
                    -1e6
                };
                (a_bar, theta_sub, Some(-self.dlambda(probe)), Some(-self.dlambda(0.0)))
            }
        };
        Ok(CriticalConstants {
            theta_star,
            v,
            theta_sub,
            a_star,
            a_c,
            a_bar,
            a_bar_minus,
            property,
            slope_at_two,
            slope_at_zero,
        })
    }

    /// `theta_*`: the zero of the gap on the negative half-line, or the
    /// domain bound when the gap stays negative there.
    fn solve_theta_sub(&self) -> f64 {
        let (dom_lo, _) = self.search_domain();
        // gap is decreasing on (theta_lower, 0) and gap(0) = -lambda(0) < 0.
        let mut hi = 0.0;
        for k in 1..=64 {
            let lo = if dom_lo.is_finite() {
                dom_lo * (1.0 - 0.5f64.powi(k))
            } else {
                -(2.0f64.powi(k))
            };
            let g = self.gap(lo);
            if g > 0.0 {
                return bisect(|t| self.gap(t), lo, hi);
            }
            if !g.is_finite() {
                break;
            }
            hi = lo;
        }
        self.theta_lower
    }

    /// Exponent of the sublinear part: `n - K` in regime II, `K` in IV.
    pub fn alpha_exponent(&self, constants: &CriticalConstants, a: f64) -> Result<f64> {
        if !(a > constants.a_star && a < constants.a_bar) {
            return Err(Error::Domain(format!(
                "alpha(a) is defined on (a_*, a_bar) = ({}, {}), got {a}",
                constants.a_star, constants.a_bar
            )));
        }
        if a > constants.slope_at_two {
            Ok(-self.legendre(a)? / a)
        } else {
            Ok(2.0 + self.lambda(2.0) / a)
        }
    }

    pub fn classify_regime(
        &self,
        constants: &CriticalConstants,
        a: f64,
    ) -> Result<RegimeClassification> {
        if self.lattice {
            return Err(Error::Lattice("regime classification"));
        }
        let mut labels = Vec::with_capacity(2);
        if a > 0.0 {
            let c = constants;
            if (a - c.a_star).abs() <= EQUALITY_TOL {
                // boundary a = a_*: no statement
            } else if a < c.a_star {
                labels.push(RegimeLabel::VeryLow);
            } else if (a - c.a_c).abs() <= EQUALITY_TOL {
                labels.push(RegimeLabel::Saturation);
            } else if a < c.a_c {
                if (a - c.slope_at_two).abs() <= EQUALITY_TOL {
                    labels.push(RegimeLabel::PresatB);
                } else if a < c.slope_at_two {
                    labels.push(RegimeLabel::PresatA);
                } else {
                    labels.push(RegimeLabel::PresatC);
                }
            } else if a < c.a_bar {
                labels.push(RegimeLabel::Postsat);
            }
            if let (Some(lo), Some(hi)) = (c.slope_at_zero, c.a_bar_minus) {
                if a > lo && a < hi {
                    labels.push(RegimeLabel::Freezing);
                }
            }
        }
        if labels.is_empty() {
            labels.push(RegimeLabel::OutOfRange);
        }
        Ok(RegimeClassification {
            labels,
            theta: self.solve_theta_for_slope(a).ok(),
        })
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let lo_sign = f(lo) > 0.0;
    for _ in 0..400 {
        if (hi - lo).abs() <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    /// `lambda(0) = inf`: `lambda*` strictly decreasing.
    A,
    /// `theta_lower < 0`: `lambda*` minimal at `-lambda'(0)`.
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalConstants {
    pub theta_star: f64,
    /// Speed of the branching random walk.
    pub v: f64,
    pub theta_sub: f64,
    pub a_star: f64,
    pub a_c: f64,
    pub a_bar: f64,
    pub a_bar_minus: Option<f64>,
    pub property: Property,
    /// `-lambda'(2)`, the boundary between IIA and IIC.
    pub slope_at_two: f64,
    /// `-lambda'(0)` under property B.
    pub slope_at_zero: Option<f64>,
}

impl CriticalConstants {
    /// `(key, value)` pairs in a fixed order, for text and key=value output.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), fmt_f64);
        vec![
            ("theta_star", fmt_f64(self.theta_star)),
            ("v", fmt_f64(self.v)),
            ("theta_sub", fmt_f64(self.theta_sub)),
            ("a_star", fmt_f64(self.a_star)),
            ("a_c", fmt_f64(self.a_c)),
            ("a_bar", fmt_f64(self.a_bar)),
            ("a_bar_minus", opt(self.a_bar_minus)),
            ("slope_at_two", fmt_f64(self.slope_at_two)),
            ("slope_at_zero", opt(self.slope_at_zero)),
            (
                "property",
                match self.property {
                    Property::A => "A".into(),
                    Property::B => "B".into(),
                },
            ),
        ]
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.10}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeLabel {
    /// I: every ball in its own box.
    VeryLow,
    /// IIA: deficit driven by `W(2)`.
    PresatA,
    /// IIB: `a = -lambda'(2)`.
    PresatB,
    /// IIC: deficit of order `n^theta e^{lambda(theta) j} / sqrt(j)`.
    PresatC,
    /// III: `a = a_c`, a Gaussian fraction of `n` boxes occupied.
    Saturation,
    /// IV: occupied count sublinear.
    Postsat,
    /// Nearly all available boxes occupied; empty boxes sublinear.
    Freezing,
    OutOfRange,
}

impl RegimeLabel {
    pub fn code(self) -> &'static str {
        match self {
            RegimeLabel::VeryLow => "I",
            RegimeLabel::PresatA => "IIA",
            RegimeLabel::PresatB => "IIB",
            RegimeLabel::PresatC => "IIC",
            RegimeLabel::Saturation => "III",
            RegimeLabel::Postsat => "IV",
            RegimeLabel::Freezing => "Freezing",
            RegimeLabel::OutOfRange => "OutOfRange",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        Some(match code {
            "I" => RegimeLabel::VeryLow,
            "IIA" => RegimeLabel::PresatA,
            "IIB" => RegimeLabel::PresatB,
            "IIC" => RegimeLabel::PresatC,
            "III" => RegimeLabel::Saturation,
            "IV" => RegimeLabel::Postsat,
            "Freezing" => RegimeLabel::Freezing,
            "OutOfRange" => RegimeLabel::OutOfRange,
            _ => return None,
        })
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeClassification {
    pub labels: Vec<RegimeLabel>,
    /// Solution of `-lambda'(theta) = a`, when attainable.
    pub theta: Option<f64>,
}

impl RegimeClassification {
    pub fn has(&self, label: RegimeLabel) -> bool {
        self.labels.contains(&label)
    }
}

impl fmt::Display for RegimeClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<&str> = self.labels.iter().map(|l| l.code()).collect();
        write!(f, "{}", codes.join("+"))?;
        if let Some(t) = self.theta {
            write!(f, " (θ={t:.4})")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::StickLaw;
    use std::f64::consts::{E, LN_2};

    fn uniform() -> SpectralProfile {
        SpectralProfile::build(&EnvironmentSpec::uniform_sieve(), None).unwrap()
    }

    fn dirichlet() -> SpectralProfile {
        SpectralProfile::build(&EnvironmentSpec::DirichletSplit { m: 2, alpha: 1.0 }, None).unwrap()
    }

    /// Independent bisection on the explicit Dirichlet(2,1) gap function.
    fn dirichlet_gap_root(mut lo: f64, mut hi: f64) -> f64 {
        let g = |t: f64| -t / (1.0 + t) - LN_2 + (1.0 + t).ln();
        let up = g(hi) > 0.0;
        while hi - lo > 1e-13 {
            let mid = 0.5 * (lo + hi);
            if (g(mid) > 0.0) == up {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn profile_derivatives() {
        assert_eq!(uniform().dlambda(2.0), -0.5);
        let det = SpectralProfile::build(&EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]), None)
            .unwrap();
        assert!(det.is_lattice());
        for &t in &[-2.0, 0.0, 1.0, 5.0] {
            assert!(det.d2lambda(t).abs() < 1e-15);
        }
        assert!((dirichlet().d2lambda(1.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn theta_star_values() {
        assert!((uniform().solve_theta_star().unwrap() - E).abs() < 1e-9);
        let oracle = dirichlet_gap_root(1.0, 10.0);
        assert!((oracle - 3.3111).abs() < 1e-3);
        assert!((dirichlet().solve_theta_star().unwrap() - oracle).abs() < 1e-9);
        let det = SpectralProfile::build(&EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]), None)
            .unwrap();
        assert!(matches!(det.solve_theta_star(), Err(Error::NoThetaStar { .. })));
    }

    #[test]
    fn slope_inversion() {
        let u = uniform();
        assert!((u.solve_theta_for_slope(1.0).unwrap() - 1.0).abs() < 1e-10);
        assert!((u.solve_theta_for_slope(2.0).unwrap() - 0.5).abs() < 1e-10);
        assert!((dirichlet().solve_theta_for_slope(2.0).unwrap() + 0.5).abs() < 1e-10);
        // -lambda' < 1/(1 + theta_lower) is never below 0 for Dirichlet(2,1)
        assert!(matches!(
            dirichlet().solve_theta_for_slope(-0.1),
            Err(Error::SlopeOutOfRange { .. })
        ));
    }

    #[test]
    fn slope_inversion_round_trip() {
        for p in [uniform(), dirichlet()] {
            for i in 0..40 {
                let t = -0.9 + 0.2 * i as f64;
                if t <= p.theta_lower() {
                    continue;
                }
                let back = p.solve_theta_for_slope(-p.dlambda(t)).unwrap();
                assert!((back - t).abs() < 1e-8, "theta {t} -> {back}");
            }
        }
    }

    #[test]
    fn legendre_values() {
        let u = uniform();
        let c = u.critical_constants().unwrap();
        assert!(u.legendre(c.v).unwrap().abs() < 1e-8);
        assert!((u.legendre(1.0).unwrap() + 1.0).abs() < 1e-10);
        assert!((u.legendre(2.0).unwrap() + 1.0 + LN_2).abs() < 1e-9);
    }

    #[test]
    fn legendre_convex_and_slope_at_speed() {
        for p in [uniform(), dirichlet()] {
            let c = p.critical_constants().unwrap();
            let h = 1e-4;
            let grid: Vec<f64> = (0..60).map(|i| c.v * 0.5 + 0.02 * i as f64).collect();
            let vals: Vec<f64> = grid.iter().map(|&a| p.legendre(a).unwrap()).collect();
            for w in vals.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
            }
            let d = (p.legendre(c.v + h).unwrap() - p.legendre(c.v - h).unwrap()) / (2.0 * h);
            assert!((d + c.theta_star).abs() < 1e-4, "slope {d}");
        }
    }

    #[test]
    fn uniform_constants() {
        let c = uniform().critical_constants().unwrap();
        assert!((c.theta_star - E).abs() < 1e-8);
        assert!((c.v - 1.0 / E).abs() < 1e-9);
        assert!((c.a_star - LN_2 / 2.0).abs() < 1e-10);
        assert!((c.a_c - 1.0).abs() < 1e-10);
        assert_eq!(c.a_bar, f64::INFINITY);
        assert_eq!(c.property, Property::A);
        assert_eq!(c.theta_sub, 0.0);
        assert!(c.a_star < c.v);
    }

    #[test]
    fn dirichlet_constants() {
        let c = dirichlet().critical_constants().unwrap();
        assert!((c.theta_star - 3.3111).abs() < 1e-3);
        assert!((c.a_star - (1.5f64).ln() / 2.0).abs() < 1e-10);
        assert!((c.a_c - 0.5).abs() < 1e-10);
        assert!((c.slope_at_zero.unwrap() - 1.0).abs() < 1e-12);
        let oracle = dirichlet_gap_root(-1.0 + 1e-12, -1e-9);
        assert!((c.theta_sub - oracle).abs() < 1e-9);
        assert!((c.theta_sub + 0.6265).abs() < 1e-3);
        assert!((c.a_bar_minus.unwrap() - 1.0 / (1.0 + oracle)).abs() < 1e-6);
        assert_eq!(c.property, Property::B);
        assert!(c.a_star <= c.a_c && c.a_c < c.a_bar);
        assert!(c.a_c < 1.0 && 1.0 < c.a_bar_minus.unwrap());
        assert!((c.v - (-dirichlet().dlambda(c.theta_star))).abs() < 1e-6);
    }

    #[test]
    fn alpha_exponent_values() {
        let u = uniform();
        let c = u.critical_constants().unwrap();
        assert!((u.alpha_exponent(&c, 1.0).unwrap() - 1.0).abs() < 1e-9);
        assert!((u.alpha_exponent(&c, 2.0).unwrap() - (1.0 + LN_2) / 2.0).abs() < 1e-9);
        // Oracle: exponent of n^2 e^{lambda(2) log n / a}
        let a = 0.45;
        let oracle = 2.0 - LN_2 / a;
        assert!((u.alpha_exponent(&c, a).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.45967).abs() < 1e-4);
        assert!(u.alpha_exponent(&c, 0.2).is_err());
    }

    #[test]
    fn alpha_exponent_stays_below_one() {
        for p in [uniform(), dirichlet()] {
            let c = p.critical_constants().unwrap();
            for i in 1..60 {
                let t = 0.05 * i as f64;
                if (t - 1.0).abs() < 1e-9 {
                    continue;
                }
                assert!(p.gap(t) > p.dlambda(t), "theta {t}");
            }
            let mut a = c.a_star + 0.01;
            while a < c.a_bar.min(3.0) {
                if (a - c.a_c).abs() > 1e-3 {
                    assert!(p.alpha_exponent(&c, a).unwrap() < 1.0, "a {a}");
                }
                a += 0.013;
            }
        }
    }

    #[test]
    fn regimes_uniform() {
        let u = uniform();
        let c = u.critical_constants().unwrap();
        let expect = [
            (0.2, RegimeLabel::VeryLow),
            (0.45, RegimeLabel::PresatA),
            (0.5, RegimeLabel::PresatB),
            (0.75, RegimeLabel::PresatC),
            (1.0, RegimeLabel::Saturation),
            (2.0, RegimeLabel::Postsat),
        ];
        for (a, label) in expect {
            assert_eq!(u.classify_regime(&c, a).unwrap().labels, vec![label], "a={a}");
        }
        assert_eq!(
            u.classify_regime(&c, c.a_star).unwrap().labels,
            vec![RegimeLabel::OutOfRange]
        );
        assert_eq!(u.classify_regime(&c, 0.75).unwrap().to_string(), "IIC (θ=1.3333)");
    }

    #[test]
    fn regimes_dirichlet_freezing_window() {
        let p = dirichlet();
        let c = p.critical_constants().unwrap();
        // IV needs theta > 0, i.e. a < -lambda'(0) = 1; a = 2 sits in the freezing window only.
        assert_eq!(p.classify_regime(&c, 2.0).unwrap().labels, vec![RegimeLabel::Freezing]);
        assert_eq!(p.classify_regime(&c, 0.8).unwrap().labels, vec![RegimeLabel::Postsat]);
        assert_eq!(p.classify_regime(&c, 3.0).unwrap().labels, vec![RegimeLabel::OutOfRange]);
    }

    #[test]
    fn regimes_stable_under_tiny_perturbation() {
        let u = uniform();
        let c = u.critical_constants().unwrap();
        for &a in &[0.2, 0.45, 0.75, 2.0] {
            let base = u.classify_regime(&c, a).unwrap().labels;
            for d in [1e-12, -1e-12, 5e-11, -5e-11] {
                assert_eq!(u.classify_regime(&c, a + d).unwrap().labels, base);
            }
        }
        for &a in &[c.a_star, 0.5, 1.0] {
            let base = u.classify_regime(&c, a).unwrap().labels;
            for d in [1e-12, -1e-12] {
                assert_eq!(u.classify_regime(&c, a + d).unwrap().labels, base);
            }
        }
    }

    #[test]
    fn lattice_is_refused() {
        let det = SpectralProfile::build(&EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]), None)
            .unwrap();
        assert!(matches!(det.critical_constants(), Err(Error::Lattice(_))));
    }

    #[test]
    fn monte_carlo_profile_tracks_closed_form() {
        // A uniform stick law is Beta(1, 1); force the Monte Carlo path.
        let env = EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a: 1.0, b: 1.0 });
        let p = SpectralProfile::build(
            &env,
            Some(&McConfig {
                samples: 20_000,
                ..McConfig::default()
            }),
        )
        .unwrap();
        assert!(matches!(p.source(), ProfileSource::MonteCarlo { .. }));
        assert!(p.lambda(1.0).abs() < 1e-12);
        for &t in &[0.5, 1.0, 2.0, 3.0] {
            assert!((p.lambda(t) + t.ln()).abs() < 4.0 * p.lambda_stderr(t) + 1e-6, "theta {t}");
            assert!(p.dlambda(t) < 0.0 && p.d2lambda(t) > 0.0);
        }
        let c = p.critical_constants().unwrap();
        assert!((c.theta_star - E).abs() < 0.1, "{}", c.theta_star);
        assert!((c.a_c - 1.0).abs() < 0.05);
    }

    #[test]
    fn monte_carlo_grid_below_domain_is_refused() {
        let env = EnvironmentSpec::BernoulliSieve(StickLaw::Beta { a: 2.0, b: 1.0 });
        let cfg = McConfig {
            grid_min: Some(-0.5),
            ..McConfig::default()
        };
        assert!(matches!(
            SpectralProfile::build_monte_carlo(&env, &cfg),
            Err(Error::Domain(_))
        ));
    }
}
