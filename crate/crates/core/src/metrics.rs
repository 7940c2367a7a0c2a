//! Distances, eccentricities and diameters.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::TwistedCube;
use crate::error::{Error, Result};
use crate::label::Vertex;
use crate::policy::CouplingPolicy;
use crate::rng::{purpose, sampling_stream};
use crate::routing::{ball_bfs, twist_route, RouterParams};

/// Largest dimension [`exact_diameter`] accepts unless told otherwise.
pub const DEFAULT_EXACT_CAP: u32 = 16;

pub const DEFAULT_RESTARTS: u32 = 4;

const UNSEEN: u8 = u8::MAX;

/// Distances from `source` to every label, one byte each.
pub fn bfs_distances(g: &TwistedCube, source: Vertex) -> Vec<u8> {
    let mut dist = vec![UNSEEN; g.num_vertices() as usize];
    let mut frontier = vec![source];
    let mut next = Vec::new();
    dist[source.0 as usize] = 0;
    let mut d = 0u8;
    while !frontier.is_empty() {
        d += 1;
        for &w in &frontier {
            for x in g.neighbors_iter(w) {
                let slot = &mut dist[x.0 as usize];
                if *slot == UNSEEN {
                    *slot = d;
                    next.push(x);
                }
            }
        }
        std::mem::swap(&mut frontier, &mut next);
        next.clear();
    }
    dist
}

/// Largest distance and the smallest label attaining it.
fn farthest(dist: &[u8]) -> (u32, Vertex) {
    let (idx, &d) = dist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("graph has vertices");
    (u32::from(d), Vertex(idx as u32))
}

pub fn eccentricity(g: &TwistedCube, v: Vertex) -> u32 {
    farthest(&bfs_distances(g, v)).0
}

const LANES: usize = 4;
const BATCH: usize = LANES * 64;
type Block = [u64; LANES];

fn adjacency(g: &TwistedCube) -> Vec<u32> {
    let n = g.n() as usize;
    let mut adj = vec![0u32; g.num_vertices() as usize * n];
    adj.par_chunks_mut(n).enumerate().for_each(|(v, row)| {
        for (slot, w) in row.iter_mut().zip(g.neighbors_iter(Vertex(v as u32))) {
            *slot = w.0;
        }
    });
    adj
}

/// Word-parallel BFS from up to 256 consecutive sources at once.
///
/// Bit `i` of `seen[x]` records whether source `first + i` has reached `x`;
/// a source's eccentricity is the last round in which its bit spread.
fn batch_eccentricities(adj: &[u32], n: usize, first: usize, out: &mut [u8]) {
    let size = adj.len() / n;
    let mut seen: Vec<Block> = vec![[0; LANES]; size];
    let mut next: Vec<Block> = vec![[0; LANES]; size];
    for i in 0..out.len() {
        seen[first + i][i / 64] |= 1 << (i % 64);
    }
    out.fill(0);
    let mut round = 0u8;
    loop {
        round += 1;
        let mut grew: Block = [0; LANES];
        for (x, (row, dst)) in adj.chunks_exact(n).zip(next.iter_mut()).enumerate() {
            let mut acc = seen[x];
            for &w in row {
                let s = &seen[w as usize];
                for l in 0..LANES {
                    acc[l] |= s[l];
                }
            }
            for l in 0..LANES {
                grew[l] |= acc[l] ^ seen[x][l];
            }
            *dst = acc;
        }
        if grew.iter().all(|&w| w == 0) {
            break;
        }
        for (l, &word) in grew.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out[l * 64 + b] = round;
                bits &= bits - 1;
            }
        }
        std::mem::swap(&mut seen, &mut next);
    }
}

/// Eccentricity of every vertex via all-pairs BFS, parallel over source batches.
pub fn all_eccentricities(g: &TwistedCube) -> Vec<u8> {
    let adj = adjacency(g);
    let n = g.n() as usize;
    let mut ecc = vec![0u8; g.num_vertices() as usize];
    ecc.par_chunks_mut(BATCH)
        .enumerate()
        .for_each(|(b, out)| batch_eccentricities(&adj, n, b * BATCH, out));
    ecc
}

/// Exact diameter by all-pairs BFS; refuses dimensions above `cap`.
pub fn exact_diameter(g: &TwistedCube, cap: u32) -> Result<u32> {
    if g.n() > cap {
        return Err(Error::ExactCapExceeded { n: g.n(), cap });
    }
    Ok(all_eccentricities(g).into_iter().max().map_or(0, u32::from))
}

/// Number of vertices within distance `t` of `v`.
pub fn ball_size(g: &TwistedCube, v: Vertex, t: u32) -> usize {
    ball_bfs(g, v, t, g.n() + 1).len()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiameterMethod {
    AllPairs,
    SampledSweep,
}

impl DiameterMethod {
    pub fn name(self) -> &'static str {
        match self {
            DiameterMethod::AllPairs => "all_pairs",
            DiameterMethod::SampledSweep => "sampled_sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiameterReport {
    pub n: u32,
    pub policy: CouplingPolicy,
    pub seed: u64,
    pub exact: Option<u32>,
    pub lower_bound: u32,
    pub upper_bound: u32,
    /// Set when `upper_bound` is a route-length statistic rather than a proof.
    pub upper_is_heuristic: bool,
    pub method: DiameterMethod,
    /// BFS sources examined (including double-sweep restarts).
    pub samples: u64,
    /// Routed pairs behind the upper bound.
    pub pairs: u64,
    pub wall_time: f64,
}

pub fn exact_report(g: &TwistedCube, cap: u32) -> Result<DiameterReport> {
    let start = Instant::now();
    let d = exact_diameter(g, cap)?;
    Ok(DiameterReport {
        n: g.n(),
        policy: g.policy(),
        seed: g.seed(),
        exact: Some(d),
        lower_bound: d,
        upper_bound: d,
        upper_is_heuristic: false,
        method: DiameterMethod::AllPairs,
        samples: g.num_vertices(),
        pairs: 0,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleOptions {
    pub num_sources: u64,
    pub num_pairs: u64,
    pub seed: u64,
    /// Double-sweep restarts per random source.
    pub restarts: u32,
    /// Router used for the upper bound; `None` selects [`RouterParams::auto`].
    pub router: Option<RouterParams>,
}

impl SampleOptions {
    pub fn new(num_sources: u64, num_pairs: u64, seed: u64) -> Self {
        SampleOptions {
            num_sources,
            num_pairs,
            seed,
            restarts: DEFAULT_RESTARTS,
            router: None,
        }
    }
}

/// Sampled diameter bounds for graphs too large for all-pairs BFS.
///
/// The lower bound is the largest eccentricity seen from random sources,
/// each followed by a double sweep. The upper bound is the longest
/// ball-search route over random pairs, clamped into `[lower, n]`.
pub fn diameter_bounds_sampled(g: &TwistedCube, opts: &SampleOptions) -> DiameterReport {
    let start = Instant::now();
    let size = g.num_vertices();
    let (sources, restarts): (Vec<Vertex>, u32) = if opts.num_sources >= size {
        (g.vertices().collect(), 0)
    } else {
        let mut rng = sampling_stream(opts.seed, purpose::DIAMETER_SOURCES);
        let picks = (0..opts.num_sources)
            .map(|_| Vertex(rng.random_range(0..size) as u32))
            .collect();
        (picks, opts.restarts)
    };
    let lower = sources
        .par_iter()
        .map(|&s| {
            let (mut best, mut far) = farthest(&bfs_distances(g, s));
            for _ in 0..restarts {
                let (d, f) = farthest(&bfs_distances(g, far));
                best = best.max(d);
                far = f;
            }
            best
        })
        .max()
        .unwrap_or(0);

    let params = opts.router.unwrap_or_else(|| RouterParams::auto(g.n()));
    let mut rng = sampling_stream(opts.seed, purpose::DIAMETER_PAIRS);
    let pairs: Vec<(Vertex, Vertex)> = (0..opts.num_pairs)
        .map(|_| {
            (
                Vertex(rng.random_range(0..size) as u32),
                Vertex(rng.random_range(0..size) as u32),
            )
        })
        .collect();
    let route_max = pairs
        .par_iter()
        .map(|&(u, v)| twist_route(g, u, v, params).len() as u32)
        .max()
        .unwrap_or(0);

    DiameterReport {
        n: g.n(),
        policy: g.policy(),
        seed: g.seed(),
        exact: None,
        lower_bound: lower,
        upper_bound: route_max.clamp(lower, g.n().max(lower)),
        upper_is_heuristic: true,
        method: DiameterMethod::SampledSweep,
        samples: sources.len() as u64 * (1 + u64::from(restarts)),
        pairs: opts.num_pairs,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::alpha;
    use crate::routing::greedy_route;

    #[test]
    fn single_edge() {
        for p in CouplingPolicy::ALL {
            let g = TwistedCube::build(1, p, 0).unwrap();
            assert_eq!(bfs_distances(&g, Vertex(0)), vec![0, 1]);
            assert_eq!(eccentricity(&g, Vertex(0)), 1);
            assert_eq!(exact_diameter(&g, DEFAULT_EXACT_CAP).unwrap(), 1);
        }
    }

    #[test]
    fn hypercube_metric() {
        let g = TwistedCube::build(9, CouplingPolicy::IdentityMatching, 0).unwrap();
        for s in [0u32, 5, 511, 300] {
            let dist = bfs_distances(&g, Vertex(s));
            for (v, &d) in dist.iter().enumerate() {
                assert_eq!(u32::from(d), (s ^ v as u32).count_ones());
            }
            assert_eq!(eccentricity(&g, Vertex(s)), 9);
        }
    }

    #[test]
    fn distances_bounded_by_alpha() {
        let g = TwistedCube::build(11, CouplingPolicy::Independent, 21).unwrap();
        for s in [0u32, 1000, 2047] {
            let dist = bfs_distances(&g, Vertex(s));
            for (v, &d) in dist.iter().enumerate() {
                assert!(u32::from(d) <= alpha(Vertex(s), Vertex(v as u32)));
            }
        }
    }

    #[test]
    fn greedy_dominance_exhaustive() {
        for policy in [CouplingPolicy::Independent, CouplingPolicy::Duplicube] {
            let g = TwistedCube::build(8, policy, 4).unwrap();
            for u in g.vertices() {
                let dist = bfs_distances(&g, u);
                for v in g.vertices() {
                    let greedy = greedy_route(&g, u, v).len() as u32;
                    let d = u32::from(dist[v.0 as usize]);
                    assert!(d <= greedy && greedy <= alpha(u, v));
                }
            }
        }
    }

    #[test]
    fn word_parallel_matches_single_source_bfs() {
        // 600 vertices > 2 batches exercises a partial final batch
        for (n, policy, seed) in [
            (10, CouplingPolicy::Independent, 1),
            (10, CouplingPolicy::Duplicube, 2),
            (9, CouplingPolicy::IdentityMatching, 3),
            (3, CouplingPolicy::Independent, 4),
        ] {
            let g = TwistedCube::build(n, policy, seed).unwrap();
            let fast = all_eccentricities(&g);
            let slow: Vec<u8> = g.vertices().map(|v| eccentricity(&g, v) as u8).collect();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn exact_cap() {
        let g = TwistedCube::build(9, CouplingPolicy::Independent, 0).unwrap();
        assert!(matches!(
            exact_diameter(&g, 8),
            Err(Error::ExactCapExceeded { n: 9, cap: 8 })
        ));
    }

    #[test]
    fn sampled_with_all_sources_is_exact() {
        let g = TwistedCube::build(9, CouplingPolicy::Independent, 17).unwrap();
        let exact = exact_diameter(&g, 16).unwrap();
        let r = diameter_bounds_sampled(&g, &SampleOptions::new(512, 50, 1));
        assert_eq!(r.lower_bound, exact);
        assert!(r.lower_bound <= r.upper_bound && r.upper_bound <= 9);
        assert!(r.upper_is_heuristic);
    }

    #[test]
    fn sampled_lower_bound_never_exceeds_exact() {
        for seed in 0..4 {
            let g = TwistedCube::build(10, CouplingPolicy::Duplicube, seed).unwrap();
            let exact = exact_diameter(&g, 16).unwrap();
            let r = diameter_bounds_sampled(&g, &SampleOptions::new(3, 20, seed));
            assert!(r.lower_bound <= exact);
            assert_eq!(r.samples, 3 * (1 + u64::from(DEFAULT_RESTARTS)));
        }
    }

    #[test]
    fn double_sweep_finds_antipode() {
        let g = TwistedCube::build(14, CouplingPolicy::IdentityMatching, 0).unwrap();
        let r = diameter_bounds_sampled(&g, &SampleOptions::new(1, 10, 5));
        assert_eq!(r.lower_bound, 14);
        assert_eq!(r.upper_bound, 14);
    }

    #[test]
    fn ball_sizes() {
        let g = TwistedCube::build(5, CouplingPolicy::Independent, 2).unwrap();
        for v in g.vertices() {
            assert_eq!(ball_size(&g, v, 0), 1);
            assert_eq!(ball_size(&g, v, 1), 6);
            assert!(ball_size(&g, v, 2) >= 15);
            assert_eq!(ball_size(&g, v, 5), 32);
        }
    }

    #[test]
    fn reports() {
        let g = TwistedCube::build(6, CouplingPolicy::IdentityMatching, 8).unwrap();
        let r = exact_report(&g, 16).unwrap();
        assert_eq!((r.exact, r.lower_bound, r.upper_bound), (Some(6), 6, 6));
        assert_eq!(r.method, DiameterMethod::AllPairs);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["method"], "all_pairs");
        assert_eq!(json["policy"], "identity");
    }
}
