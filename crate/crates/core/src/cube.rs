//! Construction and the level-indexed neighbor oracle.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, FormatError, Result};
use crate::label::Vertex;
use crate::policy::CouplingPolicy;
use crate::rng::matching_stream;

pub const MAX_DIMENSION: u32 = 30;

/// 8 GiB.
pub const DEFAULT_MEM_BUDGET: u64 = 8 << 30;

pub const MEM_BUDGET_ENV: &str = "TWISTCUBE_MEM_BUDGET";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Upper bound on matching-table bytes a build may allocate.
    pub mem_budget: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            mem_budget: DEFAULT_MEM_BUDGET,
        }
    }
}

impl BuildOptions {
    /// Defaults, with the budget taken from `TWISTCUBE_MEM_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MEM_BUDGET_ENV) {
            Ok(raw) => {
                let mem_budget = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(MEM_BUDGET_ENV, format!("not a byte count: `{raw}`")))?;
                Ok(BuildOptions { mem_budget })
            }
            Err(_) => Ok(BuildOptions::default()),
        }
    }
}

/// Bytes of forward plus inverse tables a build of `(n, policy)` allocates.
pub fn required_table_bytes(n: u32, policy: CouplingPolicy) -> u64 {
    (2..=n)
        .map(|k| policy.stored_copies(n, k) * 2 * (1u64 << (k - 1)) * 4)
        .sum()
}

/// The matching tables of one level `k`.
///
/// Each stored copy owns a permutation of `0..2^(k-1)`: the forward table maps
/// the low coordinates of a vertex with coordinate `k` equal to 0 onto the low
/// coordinates of its partner, the inverse table goes the other way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingLevel {
    level: u32,
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl MatchingLevel {
    /// Validated construction from concatenated forward tables.
    pub fn from_forward(level: u32, forward: Vec<u32>) -> Result<Self, FormatError> {
        let half = 1usize << (level - 1);
        assert!(forward.len() % half == 0, "table length must be a multiple of 2^(k-1)");
        let mut inverse = vec![u32::MAX; forward.len()];
        for (copy, (fwd, inv)) in forward
            .chunks_exact(half)
            .zip(inverse.chunks_exact_mut(half))
            .enumerate()
        {
            for (low, &image) in fwd.iter().enumerate() {
                let slot = inv.get_mut(image as usize);
                match slot {
                    Some(s) if *s == u32::MAX => *s = low as u32,
                    _ => {
                        return Err(FormatError::NotABijection {
                            level,
                            copy: copy as u64,
                        })
                    }
                }
            }
        }
        Ok(MatchingLevel {
            level,
            forward,
            inverse,
        })
    }

    /// Builds a level from raw tables without checking that they are inverse
    /// bijections. Meant for negative-control fixtures.
    pub fn from_raw_unchecked(level: u32, forward: Vec<u32>, inverse: Vec<u32>) -> Self {
        assert_eq!(forward.len(), inverse.len());
        MatchingLevel {
            level,
            forward,
            inverse,
        }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn half(&self) -> usize {
        1 << (self.level - 1)
    }

    pub fn stored_copies(&self) -> usize {
        self.forward.len() / self.half()
    }

    pub fn forward(&self, table: usize) -> &[u32] {
        let h = self.half();
        &self.forward[table * h..(table + 1) * h]
    }

    pub fn inverse(&self, table: usize) -> &[u32] {
        let h = self.half();
        &self.inverse[table * h..(table + 1) * h]
    }

    pub(crate) fn forward_all(&self) -> &[u32] {
        &self.forward
    }
}

/// An immutable twisted hypercube.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedCube {
    n: u32,
    policy: CouplingPolicy,
    seed: u64,
    // levels[i] holds level i + 2; empty for the identity policy.
    levels: Vec<MatchingLevel>,
}

impl TwistedCube {
    /// Builds with the default memory budget.
    pub fn build(n: u32, policy: CouplingPolicy, seed: u64) -> Result<Self> {
        Self::build_with(n, policy, seed, BuildOptions::default())
    }

    pub fn build_with(n: u32, policy: CouplingPolicy, seed: u64, opts: BuildOptions) -> Result<Self> {
        check_dimension(n)?;
        let required = required_table_bytes(n, policy);
        if required > opts.mem_budget {
            return Err(Error::MemoryBudget {
                required,
                allowed: opts.mem_budget,
            });
        }
        let levels = match policy {
            CouplingPolicy::IdentityMatching => Vec::new(),
            _ => (2..=n).map(|k| build_level(n, k, policy, seed)).collect(),
        };
        Ok(TwistedCube {
            n,
            policy,
            seed,
            levels,
        })
    }

    /// Assembles a graph from parts without validating the tables.
    pub fn from_parts_unchecked(
        n: u32,
        policy: CouplingPolicy,
        seed: u64,
        levels: Vec<MatchingLevel>,
    ) -> Self {
        TwistedCube {
            n,
            policy,
            seed,
            levels,
        }
    }

    pub(crate) fn from_parts(
        n: u32,
        policy: CouplingPolicy,
        seed: u64,
        levels: Vec<MatchingLevel>,
    ) -> Self {
        Self::from_parts_unchecked(n, policy, seed, levels)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn policy(&self) -> CouplingPolicy {
        self.policy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_vertices(&self) -> u64 {
        1u64 << self.n
    }

    /// Matching tables for `level` in `2..=n`; `None` for level 1 and the
    /// identity policy.
    pub fn level(&self, level: u32) -> Option<&MatchingLevel> {
        if level < 2 {
            return None;
        }
        self.levels.get(level as usize - 2)
    }

    pub fn levels(&self) -> &[MatchingLevel] {
        &self.levels
    }

    pub fn contains(&self, v: Vertex) -> bool {
        u64::from(v.0) < self.num_vertices()
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: u64::from(v.0),
                n: self.n,
            })
        }
    }

    /// The partner of `v` in the level-`level` matching, with range checks.
    pub fn neighbor(&self, v: Vertex, level: u32) -> Result<Vertex> {
        if level == 0 || level > self.n {
            return Err(Error::LevelOutOfRange { level, n: self.n });
        }
        self.check_vertex(v)?;
        Ok(self.step(v, level))
    }

    /// Unchecked form of [`neighbor`](Self::neighbor) for hot loops.
    ///
    /// Flips coordinate `level`, keeps higher coordinates and sends the lower
    /// ones through the copy's table.
    #[inline]
    pub fn step(&self, v: Vertex, level: u32) -> Vertex {
        debug_assert!(level >= 1 && level <= self.n);
        let flip = 1u32 << (level - 1);
        if level == 1 || self.levels.is_empty() {
            return Vertex(v.0 ^ flip);
        }
        let low_mask = flip - 1;
        let low = (v.0 & low_mask) as usize;
        let copy = v.0 >> level;
        let lvl = &self.levels[level as usize - 2];
        let base = self.policy.table_index(copy) as usize * lvl.half();
        let image = if v.0 & flip == 0 {
            lvl.forward[base + low]
        } else {
            lvl.inverse[base + low]
        };
        Vertex(((v.0 & !low_mask) ^ flip) | image)
    }

    /// All `n` neighbors; element `k - 1` is the level-`k` partner.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check_vertex(v)?;
        Ok(self.neighbors_iter(v).collect())
    }

    #[inline]
    pub fn neighbors_iter(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        (1..=self.n).map(move |k| self.step(v, k))
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.num_vertices()).map(|v| Vertex(v as u32))
    }

    /// The induced copy of dimension `k` made of vertices whose coordinates
    /// above `k` equal those of `copy << k`, relabelled by their low `k` bits.
    pub fn subcube(&self, k: u32, copy: u32) -> Result<TwistedCube> {
        if k == 0 || k > self.n {
            return Err(Error::LevelOutOfRange { level: k, n: self.n });
        }
        if u64::from(copy) >= 1u64 << (self.n - k) {
            return Err(Error::VertexOutOfRange {
                vertex: u64::from(copy) << k,
                n: self.n,
            });
        }
        let levels = self
            .levels
            .iter()
            .take_while(|lvl| lvl.level <= k)
            .map(|lvl| {
                let j = lvl.level;
                let per_copy = 1usize << (k - j);
                let (first, count) = match self.policy {
                    CouplingPolicy::Independent => (copy as usize * per_copy, per_copy),
                    _ => (0, 1),
                };
                let h = lvl.half();
                MatchingLevel {
                    level: j,
                    forward: lvl.forward[first * h..(first + count) * h].to_vec(),
                    inverse: lvl.inverse[first * h..(first + count) * h].to_vec(),
                }
            })
            .collect();
        Ok(TwistedCube {
            n: k,
            policy: self.policy,
            seed: self.seed,
            levels,
        })
    }
}

pub(crate) fn check_dimension(n: u32) -> Result<()> {
    if (1..=MAX_DIMENSION).contains(&n) {
        Ok(())
    } else {
        Err(Error::DimensionOutOfRange {
            n,
            max: MAX_DIMENSION,
        })
    }
}

fn build_level(n: u32, k: u32, policy: CouplingPolicy, seed: u64) -> MatchingLevel {
    let half = 1usize << (k - 1);
    let copies = policy.stored_copies(n, k) as usize;
    let mut forward = vec![0u32; copies * half];
    forward
        .par_chunks_mut(half)
        .enumerate()
        .for_each(|(copy, table)| {
            for (i, slot) in table.iter_mut().enumerate() {
                *slot = i as u32;
            }
            table.shuffle(&mut matching_stream(seed, k, copy as u64));
        });
    let mut inverse = vec![0u32; copies * half];
    inverse
        .par_chunks_mut(half)
        .zip(forward.par_chunks(half))
        .for_each(|(inv, fwd)| {
            for (low, &image) in fwd.iter().enumerate() {
                inv[image as usize] = low as u32;
            }
        });
    MatchingLevel {
        level: k,
        forward,
        inverse,
    }
}
