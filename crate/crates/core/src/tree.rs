//! Materialized weighted branching trees.
//!
//! Levels are stored as flat arrays. Box `i` of level `j + 1` has parent
//! `parent[i]` in level `j`; the children of box `u` of level `j` occupy
//! indices `first_child[u] .. first_child[u + 1]` of level `j + 1`.
//! Intervals are given by their left endpoint only; the children of `u`
//! tile `[start(u), start(u) + weight(u) - truncated(u))` in generation
//! order and the truncated tail of `u` is never expanded.
//!
//! Each box's fragmentation is drawn from the stream `(seed, level, index)`,
//! so extending a tree deeper never changes the levels already built.
//!
//! # Level dump format
//!
//! [`WeightedTree::write_level`] writes, little-endian:
//!
//! ```text
//! u64       number of boxes
//! (f64 f64) weight, position   repeated per box
//! ```

use std::io::{Read, Write};

use crate::environment::{EnvironmentSpec, FragmentationSampler, StickLaw};
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::special::digamma;
use crate::spectral::SpectralProfile;

pub const MEMORY_BUDGET_ENV: &str = "NESTOCC_MEMORY_BUDGET_MB";
pub const DEFAULT_MEMORY_BUDGET_MB: usize = 2048;
/// Bytes per stored box: parent, weight, position, start, child offset.
const BYTES_PER_BOX: usize = 32;
const CONSERVATION_TOL: f64 = 1e-9;

/// Box budget derived from `NESTOCC_MEMORY_BUDGET_MB`.
pub fn budget_boxes() -> usize {
    let mb = std::env::var(MEMORY_BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(DEFAULT_MEMORY_BUDGET_MB);
    mb.saturating_mul(1 << 20) / BYTES_PER_BOX
}

#[derive(Clone, Debug, Default)]
pub struct Level {
    pub parent: Vec<u32>,
    pub weight: Vec<f64>,
    /// `V(u) = -ln P(u)`.
    pub position: Vec<f64>,
    pub start: Vec<f64>,
    /// Total truncated mass at this level, including inherited truncation.
    pub residual_mass: f64,
}

impl Level {
    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    /// Right endpoint of the materialized part of box `i`.
    pub fn end(&self, i: usize) -> f64 {
        self.start[i] + self.weight[i]
    }
}

#[derive(Clone, Debug)]
pub struct WeightedTree {
    env: EnvironmentSpec,
    mass_floor: f64,
    seed: u64,
    levels: Vec<Level>,
    /// `first_child[j]` has `levels[j].len() + 1` offsets into level `j + 1`.
    first_child: Vec<Vec<u32>>,
    budget: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartingaleValue {
    pub value: f64,
    /// Set when truncation may bias the value with no pathwise bound.
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelStats {
    pub j: usize,
    pub z: usize,
    /// `z` counts every available box only when nothing was truncated.
    pub z_exact: bool,
    pub w: Vec<(f64, MartingaleValue)>,
    pub min_v: f64,
}

impl WeightedTree {
    /// Builds levels `0..=depth` under the box budget from the environment.
    pub fn materialize(env: &EnvironmentSpec, depth: usize, mass_floor: f64, seed: u64) -> Result<Self> {
        Self::materialize_with_budget(env, depth, mass_floor, seed, budget_boxes())
    }

    pub fn materialize_with_budget(
        env: &EnvironmentSpec,
        depth: usize,
        mass_floor: f64,
        seed: u64,
        budget: usize,
    ) -> Result<Self> {
        env.validate()?;
        if depth < 1 {
            return Err(Error::Config("tree depth must be at least 1".into()));
        }
        if env.finite_offspring().is_none() && !(mass_floor > 0.0 && mass_floor < 1.0) {
            return Err(Error::Refused(format!(
                "infinite offspring needs mass_floor in (0, 1), got {mass_floor}"
            )));
        }
        let mut tree = Self {
            env: env.clone(),
            mass_floor,
            seed,
            levels: vec![Level {
                parent: vec![0],
                weight: vec![1.0],
                position: vec![0.0],
                start: vec![0.0],
                residual_mass: 0.0,
            }],
            first_child: Vec::new(),
            budget,
        };
        tree.extend_to(depth)?;
        Ok(tree)
    }

    /// Expected number of boxes in levels `0..=depth`.
    pub fn estimated_boxes(env: &EnvironmentSpec, depth: usize, mass_floor: f64) -> f64 {
        let per_box = match (env.finite_offspring(), env) {
            (Some(m), _) => m as f64,
            (None, EnvironmentSpec::BernoulliSieve(law)) => {
                // Sticks until the running product drops below the floor.
                let mean_log = match law {
                    StickLaw::Uniform => 1.0,
                    StickLaw::Beta { a, b } => digamma(a + b) - digamma(*a),
                };
                (1.0 / mass_floor).ln() / mean_log + 1.0
            }
            (None, _) => unreachable!("only sieves have infinite offspring"),
        };
        (0..=depth).map(|j| per_box.powi(j as i32)).sum()
    }

    /// Grows the tree to `depth` levels below the root.
    pub fn extend_to(&mut self, depth: usize) -> Result<()> {
        if depth < self.levels.len() {
            return Ok(());
        }
        let estimate = Self::estimated_boxes(&self.env, depth, self.mass_floor);
        if estimate > self.budget as f64 {
            return Err(Error::MemoryBudget {
                estimated_boxes: estimate,
                budget_boxes: self.budget,
            });
        }
        let sampler = self.env.sampler()?;
        let mut total: usize = self.levels.iter().map(Level::len).sum();
        while self.levels.len() <= depth {
            let j = self.levels.len() - 1;
            let (next, offsets) = self.grow(&sampler, j, &mut total)?;
            self.first_child.push(offsets);
            self.levels.push(next);
        }
        Ok(())
    }

    fn grow(&self, sampler: &FragmentationSampler, j: usize, total: &mut usize) -> Result<(Level, Vec<u32>)> {
        let cur = &self.levels[j];
        let mut next = Level {
            residual_mass: cur.residual_mass,
            ..Level::default()
        };
        let mut offsets = Vec::with_capacity(cur.len() + 1);
        offsets.push(0u32);
        for u in 0..cur.len() {
            let mut rng = stream(self.seed, &[j as u64, u as u64]);
            let frag = sampler.sample(self.mass_floor, &mut rng)?;
            let w = cur.weight[u];
            let mut s = cur.start[u];
            for &p in &frag.probs {
                let cw = w * p;
                next.parent.push(u as u32);
                next.weight.push(cw);
                next.position.push(-cw.ln());
                next.start.push(s);
                s += cw;
            }
            next.residual_mass += w * frag.residual;
            *total += frag.probs.len();
            if *total > self.budget || next.len() > u32::MAX as usize {
                return Err(Error::MemoryBudget {
                    estimated_boxes: *total as f64,
                    budget_boxes: self.budget,
                });
            }
            offsets.push(next.len() as u32);
        }
        Ok((next, offsets))
    }

    pub fn env(&self) -> &EnvironmentSpec {
        &self.env
    }

    pub fn mass_floor(&self) -> f64 {
        self.mass_floor
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Deepest level index.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, j: usize) -> &Level {
        &self.levels[j]
    }

    /// Children of box `u` of level `j`, as an index range into level `j + 1`.
    pub fn children(&self, j: usize, u: usize) -> std::ops::Range<usize> {
        let o = &self.first_child[j];
        o[u] as usize..o[u + 1] as usize
    }

    /// `true` when no mass was truncated down to level `j`.
    pub fn is_exact(&self, j: usize) -> bool {
        self.levels[j].residual_mass == 0.0
    }

    /// `W_j(theta) = sum exp(-theta V(u) - lambda(theta) j)`.
    pub fn martingale(&self, profile: &SpectralProfile, theta: f64, j: usize) -> MartingaleValue {
        let lam = profile.lambda(theta) * j as f64;
        let level = &self.levels[j];
        let value = if theta == 1.0 && lam == 0.0 {
            level.weight.iter().sum()
        } else {
            level.position.iter().map(|&v| (-theta * v - lam).exp()).sum()
        };
        MartingaleValue {
            value,
            approximate: level.residual_mass > 0.0 && theta < 1.0,
        }
    }

    pub fn level_stats(&self, profile: &SpectralProfile, j: usize, thetas: &[f64]) -> LevelStats {
        let level = &self.levels[j];
        LevelStats {
            j,
            z: level.len(),
            z_exact: self.is_exact(j),
            w: thetas.iter().map(|&t| (t, self.martingale(profile, t, j))).collect(),
            min_v: level.position.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    /// Conservation, interval ordering and parent-child nesting.
    pub fn check_invariants(&self) -> Result<()> {
        for (j, level) in self.levels.iter().enumerate() {
            let s: f64 = level.weight.iter().sum();
            if (s + level.residual_mass - 1.0).abs() > CONSERVATION_TOL {
                return Err(Error::Domain(format!(
                    "level {j}: weights {s} + residual {} != 1",
                    level.residual_mass
                )));
            }
            if level.start.windows(2).any(|w| w[1] < w[0] - 4.0 * f64::EPSILON) {
                return Err(Error::Domain(format!("level {j}: starts decreasing")));
            }
            if j + 1 < self.levels.len() {
                let next = &self.levels[j + 1];
                for u in 0..level.len() {
                    let r = self.children(j, u);
                    let cs: f64 = next.weight[r.clone()].iter().sum();
                    if cs > level.weight[u] * (1.0 + 1e-12) {
                        return Err(Error::Domain(format!("level {j} box {u}: children exceed parent")));
                    }
                    if let Some(first) = r.clone().next() {
                        if next.start[first] != level.start[u] {
                            return Err(Error::Domain(format!("level {j} box {u}: children not nested")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn write_level<W: Write>(&self, j: usize, mut out: W) -> Result<()> {
        let level = &self.levels[j];
        out.write_all(&(level.len() as u64).to_le_bytes())?;
        for i in 0..level.len() {
            out.write_all(&level.weight[i].to_le_bytes())?;
            out.write_all(&level.position[i].to_le_bytes())?;
        }
        Ok(())
    }
}

/// Reads a level written by [`WeightedTree::write_level`] as `(weight, position)` pairs.
pub fn read_level<R: Read>(mut input: R) -> Result<Vec<(f64, f64)>> {
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        input.read_exact(&mut b8)?;
        let w = f64::from_le_bytes(b8);
        input.read_exact(&mut b8)?;
        out.push((w, f64::from_le_bytes(b8)));
    }
    Ok(out)
}
