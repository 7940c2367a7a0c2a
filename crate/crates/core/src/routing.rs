//! Greedy and ball-search routing.
//!
//! The greedy walk repeatedly takes the matching edge at the highest
//! coordinate where the current vertex still differs from the target. The
//! ball-search router spends up to `t` edges inside the current subcube to
//! find a launch point whose cross-edge lands as close to the target as
//! possible, and falls back to the greedy walk once the highest differing
//! coordinate drops below `n0`.

use std::collections::HashMap;

use serde::Serialize;

use crate::cube::TwistedCube;
use crate::error::{Error, Result};
use crate::label::{alpha, Vertex};

/// One ball-search phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Phase {
    pub alpha_before: u32,
    pub alpha_after: u32,
    /// Edges added by this phase: the in-ball path plus the cross edge.
    pub edges: u32,
}

impl Phase {
    pub fn drop(&self) -> u32 {
        self.alpha_before - self.alpha_after
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Path {
    pub vertices: Vec<Vertex>,
    /// `levels[i]` is the matching level of the edge `vertices[i] -> vertices[i + 1]`.
    pub levels: Vec<u8>,
    /// Ball-search phases, empty for greedy routes.
    pub phases: Vec<Phase>,
}

impl Path {
    fn start(u: Vertex) -> Self {
        Path {
            vertices: vec![u],
            levels: Vec::new(),
            phases: Vec::new(),
        }
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().expect("path has at least one vertex")
    }

    /// Highest differing coordinate to the target at each phase boundary.
    pub fn alpha_trace(&self) -> Vec<u32> {
        let mut trace: Vec<u32> = self.phases.iter().map(|p| p.alpha_before).collect();
        if let Some(p) = self.phases.last() {
            trace.push(p.alpha_after);
        }
        trace
    }

    fn push(&mut self, w: Vertex, level: u32) {
        self.vertices.push(w);
        self.levels.push(level as u8);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RouterParams {
    /// Ball radius.
    pub t: u32,
    /// Greedy-switch threshold.
    pub n0: u32,
}

impl RouterParams {
    /// Default schedule: `n0 = max(1, ceil(n / log2(n)^2))`, and
    /// `t = max(3, floor(log2 n0 / (4 log2 log2 n0)))` when `n0 >= 5`, else 3.
    ///
    /// The radius never drops below 3: at `t = 2` the targeted drop
    /// `(t - 2) log2 k` is zero.
    pub fn auto(n: u32) -> Self {
        let n0 = if n <= 1 {
            1
        } else {
            let l = f64::from(n).log2();
            ((f64::from(n) / (l * l)).ceil() as u32).clamp(1, n)
        };
        let t = if n0 >= 5 {
            let l = f64::from(n0).log2();
            ((l / (4.0 * l.log2())).floor() as u32).max(3)
        } else {
            3
        };
        RouterParams { t, n0 }
    }

    /// `n0 = n + 1` is accepted and disables the ball search entirely.
    pub fn validate(&self, n: u32) -> Result<()> {
        if self.t < 1 {
            return Err(Error::RouterParams(format!("t must be >= 1, got {}", self.t)));
        }
        if self.n0 < 1 || self.n0 > n + 1 {
            return Err(Error::RouterParams(format!(
                "n0 must be in 1..={}, got {}",
                n + 1,
                self.n0
            )));
        }
        Ok(())
    }
}

fn greedy_extend(g: &TwistedCube, path: &mut Path, v: Vertex) {
    let mut cur = path.last();
    loop {
        let k = alpha(cur, v);
        if k == 0 {
            break;
        }
        cur = g.step(cur, k);
        path.push(cur, k);
    }
}

/// Greedy walk from `u` to `v`; its length is at most `alpha(u, v)`.
pub fn greedy_route(g: &TwistedCube, u: Vertex, v: Vertex) -> Path {
    let mut path = Path::start(u);
    greedy_extend(g, &mut path, v);
    path
}

#[derive(Clone, Copy, Debug)]
struct BallEntry {
    dist: u8,
    parent: Vertex,
    level: u8,
}

/// A breadth-first ball confined to levels below a cap.
#[derive(Clone, Debug)]
pub struct Ball {
    center: Vertex,
    order: Vec<Vertex>,
    entries: HashMap<Vertex, BallEntry>,
}

impl Ball {
    pub fn center(&self) -> Vertex {
        self.center
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Members with their distances, in nondecreasing distance order.
    pub fn members(&self) -> impl Iterator<Item = (Vertex, u32)> + '_ {
        self.order
            .iter()
            .map(move |w| (*w, u32::from(self.entries[w].dist)))
    }

    pub fn distance(&self, w: Vertex) -> Option<u32> {
        self.entries.get(&w).map(|e| u32::from(e.dist))
    }

    /// Number of members at distance at most `r`.
    pub fn count_within(&self, r: u32) -> usize {
        self.order.partition_point(|w| u32::from(self.entries[w].dist) <= r)
    }

    /// Vertices and levels of a shortest in-ball path from the center to `w`.
    fn path_to(&self, w: Vertex) -> (Vec<Vertex>, Vec<u8>) {
        let mut vertices = vec![w];
        let mut levels = Vec::new();
        let mut cur = w;
        while cur != self.center {
            let e = self.entries[&cur];
            levels.push(e.level);
            cur = e.parent;
            vertices.push(cur);
        }
        vertices.reverse();
        levels.reverse();
        (vertices, levels)
    }
}

/// Breadth-first ball of `radius` around `center` using only levels `< cap`.
///
/// With `cap = k` the search never leaves the copy of dimension `k - 1`
/// containing the center; `cap = n + 1` explores the whole graph.
pub fn ball_bfs(g: &TwistedCube, center: Vertex, radius: u32, cap: u32) -> Ball {
    let max_level = cap.saturating_sub(1).min(g.n());
    let mut entries = HashMap::new();
    entries.insert(
        center,
        BallEntry {
            dist: 0,
            parent: center,
            level: 0,
        },
    );
    let mut order = vec![center];
    let mut head = 0;
    let radius = radius.min(u32::from(u8::MAX) - 1);
    while head < order.len() {
        let w = order[head];
        head += 1;
        let d = entries[&w].dist;
        if u32::from(d) >= radius {
            // BFS order: every later vertex is at least as far
            break;
        }
        for level in 1..=max_level {
            let x = g.step(w, level);
            entries.entry(x).or_insert_with(|| {
                order.push(x);
                BallEntry {
                    dist: d + 1,
                    parent: w,
                    level: level as u8,
                }
            });
        }
    }
    Ball {
        center,
        order,
        entries,
    }
}

/// Ball-search router. Always returns a valid path ending at `v`.
pub fn twist_route(g: &TwistedCube, u: Vertex, v: Vertex, params: RouterParams) -> Path {
    let mut path = Path::start(u);
    let mut cur = u;
    loop {
        let k = alpha(cur, v);
        if k == 0 || k < params.n0 {
            break;
        }
        let ball = ball_bfs(g, cur, params.t, k);
        // w = cur is always a candidate and lands strictly below k
        let (_, _, w) = ball
            .members()
            .map(|(w, d)| (alpha(g.step(w, k), v), d, w))
            .min()
            .expect("ball contains its center");
        let (vertices, levels) = ball.path_to(w);
        for (x, l) in vertices.into_iter().skip(1).zip(levels) {
            path.push(x, u32::from(l));
        }
        let next = g.step(w, k);
        path.push(next, k);
        let alpha_after = alpha(next, v);
        path.phases.push(Phase {
            alpha_before: k,
            alpha_after,
            edges: ball.distance(w).unwrap() + 1,
        });
        cur = next;
    }
    greedy_extend(g, &mut path, v);
    path
}

/// True iff `p` runs from `u` to `v` along edges of the recorded levels.
pub fn validate_path(g: &TwistedCube, p: &Path, u: Vertex, v: Vertex) -> bool {
    let (Some(&first), Some(&last)) = (p.vertices.first(), p.vertices.last()) else {
        return false;
    };
    if first != u || last != v || p.levels.len() + 1 != p.vertices.len() {
        return false;
    }
    if !p.vertices.iter().all(|&x| g.contains(x)) {
        return false;
    }
    p.vertices.windows(2).zip(&p.levels).all(|(pair, &level)| {
        let level = u32::from(level);
        (1..=g.n()).contains(&level) && g.step(pair[0], level) == pair[1]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::CouplingPolicy;
    use crate::rng::sampling_stream;
    use rand::Rng;

    fn binom(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn auto_params() {
        assert_eq!(RouterParams::auto(1), RouterParams { t: 3, n0: 1 });
        assert_eq!(RouterParams::auto(2), RouterParams { t: 3, n0: 2 });
        assert_eq!(RouterParams::auto(12), RouterParams { t: 3, n0: 1 });
        assert_eq!(RouterParams::auto(20), RouterParams { t: 3, n0: 2 });
        assert_eq!(RouterParams::auto(30), RouterParams { t: 3, n0: 2 });
        for n in 1..=30 {
            let p = RouterParams::auto(n);
            p.validate(n).unwrap();
            assert!(p.n0 <= n);
        }
        assert!(RouterParams { t: 0, n0: 1 }.validate(5).is_err());
        assert!(RouterParams { t: 2, n0: 0 }.validate(5).is_err());
        assert!(RouterParams { t: 2, n0: 7 }.validate(5).is_err());
        RouterParams { t: 2, n0: 6 }.validate(5).unwrap();
    }

    #[test]
    fn greedy_on_hypercube_flips_high_to_low() {
        let g = TwistedCube::build(4, CouplingPolicy::IdentityMatching, 0).unwrap();
        let p = greedy_route(&g, Vertex(0), Vertex(0b1011));
        assert_eq!(p.len(), 3);
        assert_eq!(p.levels, vec![4, 2, 1]);
        assert_eq!(
            p.vertices,
            vec![Vertex(0), Vertex(0b1000), Vertex(0b1010), Vertex(0b1011)]
        );
        assert!(validate_path(&g, &p, Vertex(0), Vertex(0b1011)));
    }

    #[test]
    fn trivial_routes() {
        let g = TwistedCube::build(8, CouplingPolicy::Independent, 3).unwrap();
        assert!(greedy_route(&g, Vertex(17), Vertex(17)).is_empty());
        let p = twist_route(&g, Vertex(17), Vertex(17), RouterParams { t: 3, n0: 1 });
        assert!(p.is_empty());
        assert!(p.phases.is_empty());
    }

    #[test]
    fn greedy_is_monotone_and_bounded() {
        let g = TwistedCube::build(10, CouplingPolicy::Independent, 8).unwrap();
        let mut rng = sampling_stream(1, 0);
        for _ in 0..2000 {
            let u = Vertex(rng.random_range(0..1024));
            let v = Vertex(rng.random_range(0..1024));
            let p = greedy_route(&g, u, v);
            assert!(validate_path(&g, &p, u, v));
            assert!(p.len() as u32 <= alpha(u, v));
            let alphas: Vec<u32> = p.vertices.iter().map(|&x| alpha(x, v)).collect();
            assert!(alphas.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn twist_without_phases_equals_greedy() {
        let g = TwistedCube::build(11, CouplingPolicy::Duplicube, 2).unwrap();
        let mut rng = sampling_stream(2, 0);
        for _ in 0..300 {
            let u = Vertex(rng.random_range(0..2048));
            let v = Vertex(rng.random_range(0..2048));
            for t in [1, 2, 5] {
                let p = twist_route(&g, u, v, RouterParams { t, n0: 12 });
                assert_eq!(p, greedy_route(&g, u, v));
            }
        }
    }

    #[test]
    fn twist_phases_progress() {
        for policy in CouplingPolicy::ALL {
            let g = TwistedCube::build(12, policy, 5).unwrap();
            let mut rng = sampling_stream(3, 0);
            for _ in 0..300 {
                let u = Vertex(rng.random_range(0..4096));
                let v = Vertex(rng.random_range(0..4096));
                for params in [RouterParams { t: 1, n0: 1 }, RouterParams { t: 3, n0: 4 }] {
                    let p = twist_route(&g, u, v, params);
                    assert!(validate_path(&g, &p, u, v));
                    assert!(p.len() as u32 <= 12 * (params.t + 1));
                    let phase_edges: u32 = p.phases.iter().map(|ph| ph.edges).sum();
                    assert!(phase_edges as usize <= p.len());
                    for ph in &p.phases {
                        assert!(ph.alpha_after < ph.alpha_before);
                        assert!(ph.alpha_before >= params.n0);
                        assert!(ph.edges <= params.t + 1);
                    }
                    let trace = p.alpha_trace();
                    assert!(trace.windows(2).all(|w| w[1] < w[0]));
                }
            }
        }
    }

    #[test]
    fn ball_basics() {
        let g = TwistedCube::build(9, CouplingPolicy::Independent, 6).unwrap();
        let c = Vertex(300);
        let b0 = ball_bfs(&g, c, 0, 10);
        assert_eq!(b0.members().collect::<Vec<_>>(), vec![(c, 0)]);
        let b1 = ball_bfs(&g, c, 1, 10);
        assert_eq!(b1.len(), 10);
        for t in 0..=5 {
            let b = ball_bfs(&g, c, t, 10);
            assert!(b.len() as u64 >= binom(10, u64::from(t)));
            assert_eq!(b.count_within(t), b.len());
        }
    }

    #[test]
    fn ball_stays_in_subcube_and_distances_are_exact() {
        let g = TwistedCube::build(10, CouplingPolicy::Independent, 13).unwrap();
        let c = Vertex(0b1011001110);
        for cap in 1..=11 {
            let ball = ball_bfs(&g, c, 3, cap);
            let sub_dim = cap - 1;
            for (w, d) in ball.members() {
                assert!(alpha(w, c) < cap);
                let (vs, ls) = ball.path_to(w);
                assert_eq!(vs.len() as u32, d + 1);
                assert!(ls.iter().all(|&l| u32::from(l) < cap.max(1)));
            }
            // cross-check distances against a plain BFS on the extracted subcube
            if sub_dim >= 1 {
                let copy = c.0 >> sub_dim;
                let sub = g.subcube(sub_dim, copy).unwrap();
                let mask = (1u32 << sub_dim) - 1;
                let dist = crate::metrics::bfs_distances(&sub, Vertex(c.0 & mask));
                let mut expected: Vec<u32> = (0..=mask)
                    .filter(|&x| u32::from(dist[x as usize]) <= 3)
                    .map(|x| (copy << sub_dim) | x)
                    .collect();
                expected.sort();
                let mut got: Vec<u32> = ball.members().map(|(w, _)| w.0).collect();
                got.sort();
                assert_eq!(got, expected);
                for (w, d) in ball.members() {
                    assert_eq!(d, u32::from(dist[(w.0 & mask) as usize]));
                }
            } else {
                assert_eq!(ball.len(), 1);
            }
        }
    }

    #[test]
    fn validate_rejects_broken_paths() {
        let g = TwistedCube::build(8, CouplingPolicy::Independent, 1).unwrap();
        let (u, v) = (Vertex(3), Vertex(250));
        let p = greedy_route(&g, u, v);
        assert!(validate_path(&g, &p, u, v));
        assert!(!validate_path(&g, &p, Vertex(4), v));
        assert!(!validate_path(&g, &p, u, Vertex(251)));

        let mut bad = p.clone();
        let mid = bad.vertices.len() / 2;
        let original = bad.vertices[mid];
        let replacement = (0..256)
            .map(Vertex)
            .find(|&x| x != original && g.step(bad.vertices[mid - 1], u32::from(bad.levels[mid - 1])) != x)
            .unwrap();
        bad.vertices[mid] = replacement;
        assert!(!validate_path(&g, &bad, u, v));

        let mut bad = p.clone();
        bad.levels[0] = 9;
        assert!(!validate_path(&g, &bad, u, v));

        let mut bad = p;
        bad.levels.pop();
        assert!(!validate_path(&g, &bad, u, v));

        let empty = Path {
            vertices: vec![],
            levels: vec![],
            phases: vec![],
        };
        assert!(!validate_path(&g, &empty, u, u));
    }
}
