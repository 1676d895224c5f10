//! Ball allocation through nested partitions and occupancy counts.
//!
//! Two allocators produce the same law of per-level counts:
//!
//! - tree-first: `n` uniforms located in the intervals of a materialized tree;
//! - lazy: starting from `n` balls at the root, only occupied boxes are
//!   fragmented and their balls split by sequential binomial draws.
//!
//! The lazy allocator stops tracking a box once it holds a single ball, since
//! a lone ball occupies exactly one box at every deeper level. Such balls are
//! counted in [`AllocLevel::singletons`].

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::environment::{EnvironmentSpec, FragmentationSampler};
use crate::error::{Error, Result};
use crate::special::ln_factorial;
use crate::tree::WeightedTree;

pub const DEFAULT_K_MAX: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AllocationMode {
    TreeFirst,
    BallDriven,
}

/// A box with at least one ball (at least two in ball-driven mode).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OccupiedBox {
    /// Box index in the tree level; a running label in ball-driven mode.
    pub index: u32,
    /// Position of the parent in the previous level's `boxes`.
    pub parent: u32,
    pub count: u64,
    /// Children at the next level holding exactly one ball that were
    /// collapsed into `singletons`.
    pub single_children: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AllocLevel {
    pub boxes: Vec<OccupiedBox>,
    /// Collapsed one-ball boxes.
    pub singletons: u64,
    /// Balls that fell into truncated mass at or above this level.
    pub overflow: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    pub mode: AllocationMode,
    pub n: u64,
    /// Poisson intensity when the ball count was drawn.
    pub t: Option<f64>,
    pub levels: Vec<AllocLevel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyCounts {
    pub j: usize,
    /// `k[i]` is `K(i + 1)`, the number of boxes with at least `i + 1` balls.
    pub k: Vec<u64>,
    /// `sum_{k > k_max} K(k)`, so that `sum(k) + beyond` is the ball total.
    pub beyond: u64,
    pub l: Option<u64>,
    pub z: Option<u64>,
    pub overflow: u64,
}

impl OccupancyCounts {
    /// `K(k)` for `k >= 1`; zero past `k_max` is not implied, use `beyond`.
    pub fn at_least(&self, k: usize) -> u64 {
        self.k[k - 1]
    }
}

impl Allocation {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Ball total, collisions and parent-child sums at every level.
    pub fn check_consistency(&self) -> Result<()> {
        for (j, level) in self.levels.iter().enumerate() {
            let total: u64 = level.boxes.iter().map(|b| b.count).sum::<u64>() + level.singletons;
            if total + level.overflow != self.n {
                return Err(Error::Domain(format!(
                    "level {j}: {total} balls + {} overflow != {}",
                    level.overflow, self.n
                )));
            }
            if j == 0 {
                continue;
            }
            let prev = &self.levels[j - 1];
            let mut sums = vec![0u64; prev.boxes.len()];
            for b in &level.boxes {
                sums[b.parent as usize] += b.count;
            }
            let single_new: u64 = prev.boxes.iter().map(|b| b.single_children).sum();
            if level.singletons != prev.singletons + single_new {
                return Err(Error::Domain(format!("level {j}: singleton bookkeeping")));
            }
            let lost = level.overflow - prev.overflow;
            let mut missing = 0;
            for (p, s) in prev.boxes.iter().zip(&sums) {
                let placed = s + p.single_children;
                if placed > p.count {
                    return Err(Error::Domain(format!("level {j}: children exceed parent")));
                }
                missing += p.count - placed;
            }
            if missing != lost {
                return Err(Error::Domain(format!("level {j}: parent-child counts differ")));
            }
        }
        Ok(())
    }
}

/// Locates `n` fresh uniforms in the tree.
pub fn throw_balls_tree<R: Rng + ?Sized>(tree: &WeightedTree, n: u64, rng: &mut R) -> Allocation {
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    u.sort_unstable_by(f64::total_cmp);
    allocate_sorted(tree, &u)
}

/// Allocates the given sorted points; intervals are half-open.
pub fn allocate_sorted(tree: &WeightedTree, sorted: &[f64]) -> Allocation {
    let n = sorted.len() as u64;
    let mut levels = Vec::with_capacity(tree.depth() + 1);
    // (box index, ball range) of the occupied boxes of the current level.
    let mut ranges: Vec<(usize, usize, usize)> = Vec::new();
    let mut root = AllocLevel::default();
    if n > 0 {
        root.boxes.push(OccupiedBox {
            index: 0,
            parent: 0,
            count: n,
            single_children: 0,
        });
        ranges.push((0, 0, sorted.len()));
    }
    levels.push(root);
    let finite = tree.env().finite_offspring().is_some();
    for j in 0..tree.depth() {
        let next_level = tree.level(j + 1);
        let mut next = AllocLevel {
            overflow: levels[j].overflow,
            ..AllocLevel::default()
        };
        let mut next_ranges = Vec::with_capacity(ranges.len());
        for (pos, &(u, lo, hi)) in ranges.iter().enumerate() {
            let mut cursor = lo;
            let kids = tree.children(j, u);
            let last = kids.end.saturating_sub(1);
            for c in kids {
                // Rounding in prefix sums must not leak balls out of a finite split.
                let stop = if finite && c == last {
                    hi
                } else {
                    let end = next_level.end(c);
                    cursor + sorted[cursor..hi].partition_point(|&x| x < end)
                };
                if stop > cursor {
                    next.boxes.push(OccupiedBox {
                        index: c as u32,
                        parent: pos as u32,
                        count: (stop - cursor) as u64,
                        single_children: 0,
                    });
                    next_ranges.push((c, cursor, stop));
                }
                cursor = stop;
                if cursor == hi {
                    break;
                }
            }
            next.overflow += (hi - cursor) as u64;
        }
        levels.push(next);
        ranges = next_ranges;
    }
    Allocation {
        mode: AllocationMode::TreeFirst,
        n,
        t: None,
        levels,
    }
}

/// Ball-driven allocation to `depth` levels; no tree is kept.
pub fn throw_balls_lazy<R: Rng + ?Sized>(
    env: &EnvironmentSpec,
    n: u64,
    depth: usize,
    rng: &mut R,
) -> Result<Allocation> {
    let sampler = env.sampler()?;
    let mut levels = Vec::with_capacity(depth + 1);
    let mut root = AllocLevel::default();
    match n {
        0 => {}
        1 => root.singletons = 1,
        _ => root.boxes.push(OccupiedBox {
            index: 0,
            parent: 0,
            count: n,
            single_children: 0,
        }),
    }
    levels.push(root);
    let mut label = 1u32;
    let mut split = Vec::new();
    for j in 0..depth {
        let mut next = AllocLevel {
            singletons: levels[j].singletons,
            ..AllocLevel::default()
        };
        let prev = &mut levels[j];
        for (pos, b) in prev.boxes.iter_mut().enumerate() {
            split.clear();
            split_balls(&sampler, b.count, rng, &mut split);
            for &c in &split {
                if c == 1 {
                    b.single_children += 1;
                } else {
                    next.boxes.push(OccupiedBox {
                        index: label,
                        parent: pos as u32,
                        count: c,
                        single_children: 0,
                    });
                    label = label.wrapping_add(1);
                }
            }
            next.singletons += b.single_children;
        }
        levels.push(next);
    }
    Ok(Allocation {
        mode: AllocationMode::BallDriven,
        n,
        t: None,
        levels,
    })
}

/// Splits `c >= 2` balls among one box's children, pushing positive counts.
fn split_balls<R: Rng + ?Sized>(sampler: &FragmentationSampler, c: u64, rng: &mut R, out: &mut Vec<u64>) {
    let mut left = c;
    if sampler.is_infinite() {
        // Stick r takes Bin(left, 1 - W_r) of the balls not yet placed.
        while left > 0 {
            let w = sampler.draw_stick(rng);
            let k = binomial(left, 1.0 - w, rng);
            if k > 0 {
                out.push(k);
                left -= k;
            }
        }
        return;
    }
    let probs = sampler.sample_finite(rng).expect("finite environment");
    let mut rest = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let k = if i + 1 == probs.len() {
            left
        } else {
            binomial(left, (p / rest).min(1.0), rng)
        };
        if k > 0 {
            out.push(k);
            left -= k;
        }
        rest -= p;
    }
}

#[inline]
fn binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

pub fn poisson_count<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<u64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Config(format!("Poisson intensity must be positive, got {t}")));
    }
    Ok(Poisson::new(t).map_err(|e| Error::Config(e.to_string()))?.sample(rng) as u64)
}

/// Poissonized tree-first allocation: `N_t ~ Poisson(t)` balls.
pub fn poissonize_tree<R: Rng + ?Sized>(tree: &WeightedTree, t: f64, rng: &mut R) -> Result<Allocation> {
    let n = poisson_count(t, rng)?;
    let mut a = throw_balls_tree(tree, n, rng);
    a.t = Some(t);
    Ok(a)
}

/// Poissonized ball-driven allocation.
pub fn poissonize_lazy<R: Rng + ?Sized>(
    env: &EnvironmentSpec,
    t: f64,
    depth: usize,
    rng: &mut R,
) -> Result<Allocation> {
    let n = poisson_count(t, rng)?;
    let mut a = throw_balls_lazy(env, n, depth, rng)?;
    a.t = Some(t);
    Ok(a)
}

/// `K(1..=k_max)` at level `j`; with a tree, also `Z` and `L = Z - K(1)`.
pub fn occupancy_counts(
    alloc: &Allocation,
    j: usize,
    k_max: usize,
    tree: Option<&WeightedTree>,
) -> Result<OccupancyCounts> {
    if j > alloc.depth() {
        return Err(Error::Config(format!("level {j} beyond allocation depth {}", alloc.depth())));
    }
    let k_max = k_max.max(1);
    let level = &alloc.levels[j];
    let mut k = vec![0u64; k_max];
    let mut beyond = 0;
    k[0] = level.singletons;
    for b in &level.boxes {
        let c = b.count as usize;
        for slot in k.iter_mut().take(c.min(k_max)) {
            *slot += 1;
        }
        beyond += (b.count).saturating_sub(k_max as u64);
    }
    let (l, z) = match tree {
        Some(t) if j <= t.depth() && t.is_exact(j) => {
            let z = t.level(j).len() as u64;
            (Some(z - k[0]), Some(z))
        }
        _ => (None, None),
    };
    Ok(OccupancyCounts {
        j,
        k,
        beyond,
        l,
        z,
        overflow: level.overflow,
    })
}

/// Like [`occupancy_counts`] but fails unless `L` and `Z` are available.
pub fn occupancy_counts_with_empty(
    alloc: &Allocation,
    j: usize,
    k_max: usize,
    tree: &WeightedTree,
) -> Result<OccupancyCounts> {
    if j > tree.depth() || !tree.is_exact(j) {
        return Err(Error::Refused(format!(
            "empty-box count at level {j} needs an untruncated tree level; \
             truncated mass hides an unknown number of boxes"
        )));
    }
    occupancy_counts(alloc, j, k_max, Some(tree))
}

// Poisson kernels

const SERIES_SWITCH: f64 = 0.1;

/// `(P(Pois(z) >= k), P(Pois(z) < k))`, each computed without cancellation.
fn poisson_split(k: u32, z: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    if z <= 0.0 {
        return (0.0, 1.0);
    }
    let kf = k as f64;
    let log_term = |i: f64| i * z.ln() - z - ln_factorial(i as u64);
    if z < kf {
        // Upper tail from its first term.
        let mut term = log_term(kf).exp();
        let mut tail = 0.0;
        let mut i = kf;
        while term > tail * 1e-17 && i < kf + 1000.0 {
            tail += term;
            i += 1.0;
            term *= z / i;
        }
        let tail = tail.min(1.0);
        (tail, 1.0 - tail)
    } else {
        // Lower tail summed downwards from its largest term.
        let mut term = log_term(kf - 1.0).exp();
        let mut head = 0.0;
        let mut i = kf - 1.0;
        loop {
            head += term;
            if i == 0.0 || term < head * 1e-17 {
                break;
            }
            term *= i / z;
            i -= 1.0;
        }
        let head = head.min(1.0);
        (1.0 - head, head)
    }
}

/// `phi_k(z) = P(Pois(z) >= k)`.
pub fn phi(k: u32, z: f64) -> f64 {
    if k == 1 {
        return -(-z).exp_m1();
    }
    poisson_split(k, z).0
}

/// `x - 1 + e^{-x}`, the mean deficit of one box.
pub fn kernel_m(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        // sum_{i>=2} (-x)^i / i!
        let mut term = x * x / 2.0;
        let mut s = 0.0f64;
        let mut i = 2.0;
        while term.abs() > 1e-18 * s.abs().max(f64::MIN_POSITIVE) {
            s += term;
            i += 1.0;
            term *= -x / i;
        }
        s
    } else {
        x + (-x).exp_m1()
    }
}

/// `1 - e^{-2x} - 2x e^{-x}`.
pub fn kernel_w(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        // coefficient of x^i: -(-2)^i/i! + 2(-1)^i/(i-1)!, zero for i < 3
        let mut s = 0.0;
        let mut a = 1.0; // (-2)^i / i!
        let mut b = 1.0; // (-1)^(i-1) / (i-1)!
        let mut xp = 1.0;
        for i in 1..40 {
            let fi = i as f64;
            a *= -2.0 / fi;
            if i > 1 {
                b *= -1.0 / (fi - 1.0);
            }
            xp *= x;
            let c = -a - 2.0 * b;
            if i >= 3 {
                s += c * xp;
            }
        }
        s
    } else {
        -(-2.0 * x).exp_m1() - 2.0 * x * (-x).exp()
    }
}

/// `x + e^{-x} - e^{-2x} - 2x e^{-x}`, the deficit variance of one box.
pub fn kernel_v(x: f64) -> f64 {
    if x < SERIES_SWITCH {
        kernel_m(x) + kernel_w(x)
    } else {
        x + (-x).exp() - (-2.0 * x).exp() - 2.0 * x * (-x).exp()
    }
}

/// `psi_{l,k}(x) = phi_k(x) (1 - phi_l(x))` for `l <= k`.
pub fn kernel_psi(l: u32, k: u32, x: f64) -> f64 {
    phi(k, x) * poisson_split(l, x).1
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PoissonKernel {
    Phi(u32),
    M,
    V,
    W,
    Psi(u32, u32),
}

impl PoissonKernel {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            PoissonKernel::Phi(k) => phi(k, x),
            PoissonKernel::M => kernel_m(x),
            PoissonKernel::V => kernel_v(x),
            PoissonKernel::W => kernel_w(x),
            PoissonKernel::Psi(l, k) => kernel_psi(l, k, x),
        }
    }
}

/// Quenched moments at level `j` for Poisson intensity `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalMoments {
    pub mean: f64,
    pub variance: f64,
    /// Mean of `N_t - K_t(1)`.
    pub deficit_mean: f64,
    pub deficit_variance: f64,
}

pub fn conditional_moments(tree: &WeightedTree, t: f64, j: usize, k: u32) -> ConditionalMoments {
    let mut m = ConditionalMoments {
        mean: 0.0,
        variance: 0.0,
        deficit_mean: 0.0,
        deficit_variance: 0.0,
    };
    for &w in &tree.level(j).weight {
        let x = t * w;
        let (p, q) = poisson_split(k, x);
        let p = if k == 1 { phi(1, x) } else { p };
        m.mean += p;
        m.variance += p * q;
        m.deficit_mean += kernel_m(x);
        m.deficit_variance += kernel_v(x);
    }
    m
}

/// `Cov(K_t(l), K_t(k))` given the tree, `l <= k`.
pub fn conditional_covariance(tree: &WeightedTree, t: f64, j: usize, l: u32, k: u32) -> f64 {
    let (l, k) = (l.min(k), l.max(k));
    tree.level(j).weight.iter().map(|&w| kernel_psi(l, k, t * w)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn dirichlet() -> EnvironmentSpec {
        EnvironmentSpec::DirichletSplit { m: 2, alpha: 1.0 }
    }

    #[test]
    fn one_ball_everywhere() {
        let t = WeightedTree::materialize(&dirichlet(), 6, 0.0, 1).unwrap();
        let mut rng = stream(1, &[]);
        let a = throw_balls_tree(&t, 1, &mut rng);
        let b = throw_balls_lazy(&EnvironmentSpec::uniform_sieve(), 1, 6, &mut rng).unwrap();
        for alloc in [&a, &b] {
            alloc.check_consistency().unwrap();
            for j in 0..=6 {
                assert_eq!(occupancy_counts(alloc, j, 8, None).unwrap().at_least(1), 1);
            }
        }
    }

    #[test]
    fn five_balls_in_one_box() {
        let t = WeightedTree::materialize(&dirichlet(), 2, 0.0, 1).unwrap();
        let a = allocate_sorted(&t, &[0.1, 0.2, 0.3, 0.4, 0.5]);
        let c = occupancy_counts(&a, 0, 8, Some(&t)).unwrap();
        assert_eq!(c.k, vec![1, 1, 1, 1, 1, 0, 0, 0]);
        assert_eq!(c.l, Some(0));
        assert_eq!(c.z, Some(1));
    }

    #[test]
    fn deterministic_pair_collision_rate() {
        let env = EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]);
        let t = WeightedTree::materialize(&env, 1, 0.0, 1).unwrap();
        let mut rng = stream(3, &[]);
        let reps = 100_000;
        let mut both = 0;
        for _ in 0..reps {
            let a = throw_balls_tree(&t, 2, &mut rng);
            if occupancy_counts(&a, 1, 2, None).unwrap().at_least(1) == 2 {
                both += 1;
            }
        }
        let p = both as f64 / reps as f64;
        assert!((p - 0.5).abs() < 0.005, "{p}");
    }

    #[test]
    fn lazy_sieve_conserves_balls() {
        let mut rng = stream(5, &[]);
        let a = throw_balls_lazy(&EnvironmentSpec::uniform_sieve(), 100_000, 25, &mut rng).unwrap();
        a.check_consistency().unwrap();
        let mut prev = 0;
        for j in 0..=25 {
            let c = occupancy_counts(&a, j, 8, None).unwrap();
            assert_eq!(c.k.iter().sum::<u64>() + c.beyond, 100_000);
            assert!(c.at_least(1) >= prev);
            prev = c.at_least(1);
        }
    }

    #[test]
    fn truncated_levels_refuse_empty_counts() {
        let t = WeightedTree::materialize(&EnvironmentSpec::uniform_sieve(), 2, 1e-3, 1).unwrap();
        let mut rng = stream(1, &[]);
        let a = throw_balls_tree(&t, 50, &mut rng);
        a.check_consistency().unwrap();
        assert!(matches!(
            occupancy_counts_with_empty(&a, 2, 8, &t),
            Err(Error::Refused(_))
        ));
        assert_eq!(occupancy_counts(&a, 2, 8, Some(&t)).unwrap().l, None);
    }

    #[test]
    fn poisson_thinning() {
        let env = EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]);
        let t = WeightedTree::materialize(&env, 1, 0.0, 1).unwrap();
        let mut rng = stream(9, &[]);
        let reps = 20_000;
        let xs: Vec<f64> = (0..reps)
            .map(|_| {
                let a = poissonize_tree(&t, 2.0, &mut rng).unwrap();
                a.levels[1]
                    .boxes
                    .iter()
                    .find(|b| b.index == 0)
                    .map_or(0.0, |b| b.count as f64)
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!((mean - 1.0).abs() < 0.04, "{mean}");
        assert!((var - 1.0).abs() < 0.1, "{var}");
        let a = poissonize_tree(&t, 1e-9, &mut rng).unwrap();
        assert_eq!(a.n, 0);
        assert_eq!(occupancy_counts(&a, 1, 8, None).unwrap().at_least(1), 0);
    }

    #[test]
    fn kernel_values() {
        assert!((phi(1, 1.0) - 0.632_120_558_8).abs() < 1e-10);
        assert_eq!(kernel_m(0.0), 0.0);
        assert_eq!(kernel_v(0.0), 0.0);
        assert_eq!(kernel_w(0.0), 0.0);
        for i in 0..=5000 {
            let x = i as f64 * 0.01;
            let direct = x + (-x).exp() - (-2.0 * x).exp() - 2.0 * x * (-x).exp();
            assert!((kernel_m(x) + kernel_w(x) - kernel_v(x)).abs() < 1e-12);
            assert!((kernel_v(x) - direct).abs() < 1e-12, "x={x}");
        }
        // small-argument leading terms
        let x = 1e-5;
        assert!((kernel_m(x) / (x * x / 2.0) - 1.0).abs() < 1e-4);
        assert!((kernel_w(x) / (x * x * x / 3.0) - 1.0).abs() < 1e-4);
        assert!((phi(3, x) / (x * x * x / 6.0) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn phi_matches_statrs() {
        use statrs::distribution::{DiscreteCDF, Poisson as SPoisson};
        for &z in &[0.3, 1.0, 4.5, 20.0, 80.0] {
            let d = SPoisson::new(z).unwrap();
            for k in 1..8u32 {
                let want = 1.0 - d.cdf(k as u64 - 1);
                assert!((phi(k, z) - want).abs() < 1e-12, "k={k} z={z}");
                assert!((kernel_psi(1, k, z) - want * d.cdf(0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn moments_two_half_boxes() {
        let env = EnvironmentSpec::DeterministicSplit(vec![0.5, 0.5]);
        let t = WeightedTree::materialize(&env, 1, 0.0, 1).unwrap();
        let m = conditional_moments(&t, 2.0, 1, 1);
        let e1 = (-1.0f64).exp();
        assert!((m.mean - 2.0 * (1.0 - e1)).abs() < 1e-12);
        assert!((m.variance - 2.0 * (1.0 - e1) * e1).abs() < 1e-12);
        assert!((m.deficit_mean - 2.0 * kernel_m(1.0)).abs() < 1e-15);
        let z = conditional_moments(&t, 0.0, 1, 1);
        assert_eq!((z.mean, z.variance), (0.0, 0.0));
        assert!((conditional_covariance(&t, 2.0, 1, 1, 1) - m.variance).abs() < 1e-15);
    }

    #[test]
    fn quenched_mean_by_simulation() {
        let t = WeightedTree::materialize(&dirichlet(), 8, 0.0, 4).unwrap();
        let mut rng = stream(4, &[1]);
        let reps = 20_000;
        let ks: Vec<f64> = (0..reps)
            .map(|_| {
                let a = poissonize_tree(&t, 100.0, &mut rng).unwrap();
                occupancy_counts(&a, 8, 2, None).unwrap().at_least(2) as f64
            })
            .collect();
        let mean = ks.iter().sum::<f64>() / reps as f64;
        let sd = (ks.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        let want = conditional_moments(&t, 100.0, 8, 2);
        assert!((mean - want.mean).abs() < 4.0 * sd / (reps as f64).sqrt());
        assert!((sd * sd / want.variance - 1.0).abs() < 0.1);
    }
}
