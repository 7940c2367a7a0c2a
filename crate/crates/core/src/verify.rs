//! Executable structural checks.
//!
//! Deterministic checks produce a [`CheckReport`] whose failures list names
//! the offending vertices. The quasirandomness estimator only reports an
//! empirical frequency and never fails.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cube::TwistedCube;
use crate::error::{Error, Result};
use crate::label::{alpha, Vertex};
use crate::policy::CouplingPolicy;
use crate::rng::{purpose, sampling_stream};
use crate::routing::ball_bfs;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scope {
    Exhaustive { checked: u64 },
    Sampled { checked: u64, population: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub subject: String,
    pub observed: String,
    pub required: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub n: u32,
    pub policy: CouplingPolicy,
    pub seed: u64,
    pub scope: Scope,
    pub passed: bool,
    pub failures: Vec<Witness>,
    pub summary: Map<String, Value>,
}

impl CheckReport {
    fn new(check: &str, g: &TwistedCube, scope: Scope, failures: Vec<Witness>) -> Self {
        CheckReport {
            check: check.to_string(),
            n: g.n(),
            policy: g.policy(),
            seed: g.seed(),
            scope,
            passed: failures.is_empty(),
            failures,
            summary: Map::new(),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.summary.insert(key.to_string(), value);
        self
    }
}

/// Controls exhaustive-versus-sampled scanning.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Graphs up to this dimension are always scanned exhaustively.
    pub exhaustive_max_n: u32,
    /// Larger graphs are still scanned exhaustively when the estimated work
    /// stays within this many elementary checks.
    pub work_budget: u64,
    /// Vertices examined when sampling.
    pub samples: u64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            exhaustive_max_n: 12,
            work_budget: 1 << 24,
            samples: 4096,
            seed: 0,
        }
    }
}

fn plan_vertices(g: &TwistedCube, per_vertex: u64, opts: &VerifyOptions) -> (Vec<Vertex>, Scope) {
    let size = g.num_vertices();
    if g.n() <= opts.exhaustive_max_n || size.saturating_mul(per_vertex) <= opts.work_budget {
        return (g.vertices().collect(), Scope::Exhaustive { checked: size });
    }
    let mut rng = sampling_stream(opts.seed, purpose::VERIFY_VERTICES);
    let picks: Vec<Vertex> = (0..opts.samples)
        .map(|_| Vertex(rng.random_range(0..size) as u32))
        .collect();
    let scope = Scope::Sampled {
        checked: picks.len() as u64,
        population: size,
    };
    (picks, scope)
}

/// `C(n, k)` saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

fn binomial_prefix(n: u64, t: u64) -> u64 {
    (0..=t).fold(0u64, |acc, s| acc.saturating_add(binomial(n, s)))
}

/// Every ball of radius `t <= t_max` holds at least `C(n + 1, t)` vertices.
pub fn check_ball_lower_bound(g: &TwistedCube, t_max: u32, opts: &VerifyOptions) -> Result<CheckReport> {
    let n = g.n();
    if t_max > n {
        return Err(Error::CheckArgs(format!("t_max = {t_max} exceeds n = {n}")));
    }
    let per_vertex = binomial_prefix(u64::from(n), u64::from(t_max)).saturating_mul(u64::from(n));
    let (vertices, scope) = plan_vertices(g, per_vertex, opts);
    let required: Vec<u64> = (0..=t_max)
        .map(|t| binomial(u64::from(n) + 1, u64::from(t)))
        .collect();
    let counts: Vec<Vec<u64>> = vertices
        .par_iter()
        .map(|&v| {
            let ball = ball_bfs(g, v, t_max, n + 1);
            (0..=t_max).map(|t| ball.count_within(t) as u64).collect()
        })
        .collect();
    let mut min_sizes = vec![u64::MAX; required.len()];
    let mut failures = Vec::new();
    for (v, sizes) in vertices.iter().zip(&counts) {
        for (t, (&size, &req)) in sizes.iter().zip(&required).enumerate() {
            min_sizes[t] = min_sizes[t].min(size);
            if size < req {
                failures.push(Witness {
                    subject: format!("v={v} t={t}"),
                    observed: size.to_string(),
                    required: format!(">= {req}"),
                });
            }
        }
    }
    Ok(CheckReport::new("ball_lower_bound", g, scope, failures)
        .with("t_max", json!(t_max))
        .with("min_ball_size", json!(min_sizes))
        .with("required", json!(required)))
}

/// Default cap on enumerated images for [`check_injectivity`].
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 20;

fn for_each_decreasing(n: u32, t: u32, prefix: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    f(prefix);
    if prefix.len() as u32 == t {
        return;
    }
    let top = prefix.last().map_or(n, |&a| a - 1);
    for a in (1..=top).rev() {
        prefix.push(a);
        for_each_decreasing(n, t, prefix, f);
        prefix.pop();
    }
}

/// The map sending `a_1 > ... > a_s` (`s <= t`) to `eta_{a_s}(... eta_{a_1}(v))`
/// is injective, lands in the radius-`t` ball, and can be inverted greedily.
pub fn check_injectivity(g: &TwistedCube, v: Vertex, t: u32, budget: u64) -> Result<CheckReport> {
    let n = g.n();
    g.check_vertex(v)?;
    if t > n {
        return Err(Error::CheckArgs(format!("t = {t} exceeds n = {n}")));
    }
    let expected = binomial_prefix(u64::from(n), u64::from(t));
    if expected > budget {
        return Err(Error::EnumerationBudget {
            required: expected,
            allowed: budget,
        });
    }
    let ball = ball_bfs(g, v, t, n + 1);
    let mut images: HashMap<Vertex, Vec<u32>> = HashMap::new();
    let mut failures = Vec::new();
    let mut enumerated = 0u64;
    for_each_decreasing(n, t, &mut Vec::new(), &mut |seq| {
        enumerated += 1;
        let w = seq.iter().fold(v, |x, &a| g.step(x, a));
        let name = || format!("v={v} A={seq:?}");
        if let Some(prev) = images.insert(w, seq.to_vec()) {
            failures.push(Witness {
                subject: name(),
                observed: format!("image {w} shared with A={prev:?}"),
                required: "distinct images".into(),
            });
        }
        match ball.distance(w) {
            Some(d) if d <= t => {}
            _ => failures.push(Witness {
                subject: name(),
                observed: format!("image {w} outside ball"),
                required: format!("distance <= {t}"),
            }),
        }
        if let Some(&a1) = seq.first() {
            let got = alpha(v, w);
            if got != a1 {
                failures.push(Witness {
                    subject: name(),
                    observed: format!("alpha(v, f(A)) = {got}"),
                    required: format!("= a_1 = {a1}"),
                });
            }
        }
        let mut recovered = Vec::new();
        let mut cur = v;
        while cur != w && recovered.len() <= t as usize {
            let a = alpha(cur, w);
            recovered.push(a);
            cur = g.step(cur, a);
        }
        if recovered != seq {
            failures.push(Witness {
                subject: name(),
                observed: format!("recovered {recovered:?}"),
                required: "recovery returns A".into(),
            });
        }
    });
    Ok(CheckReport::new(
        "injectivity",
        g,
        Scope::Exhaustive { checked: enumerated },
        failures,
    )
    .with("center", json!(v.0))
    .with("t", json!(t))
    .with("images", json!(images.len()))
    .with("expected_images", json!(expected)))
}

fn count_subcube(g: &TwistedCube, v: Vertex, k: u32) -> u64 {
    g.vertices().filter(|&w| alpha(w, v) <= k).count() as u64
}

/// Exactly `2^k` labels satisfy `alpha(w, v) <= k`.
pub fn check_subcube_size(g: &TwistedCube, v: Vertex, k: u32) -> Result<CheckReport> {
    g.check_vertex(v)?;
    if k > g.n() {
        return Err(Error::CheckArgs(format!("k = {k} exceeds n = {}", g.n())));
    }
    let count = count_subcube(g, v, k);
    let mut failures = Vec::new();
    if count != 1 << k {
        failures.push(Witness {
            subject: format!("v={v} k={k}"),
            observed: count.to_string(),
            required: format!("= {}", 1u64 << k),
        });
    }
    Ok(CheckReport::new("subcube_size", g, Scope::Exhaustive { checked: 1 }, failures)
        .with("count", json!(count)))
}

/// [`check_subcube_size`] over every `k` and every (or a sample of) vertex.
pub fn check_subcube_sizes(g: &TwistedCube, opts: &VerifyOptions) -> CheckReport {
    let n = g.n();
    let per_vertex = (u64::from(n) + 1).saturating_mul(g.num_vertices());
    // each count is a full label scan, so the exhaustive cutoff is tighter
    let opts = VerifyOptions {
        exhaustive_max_n: opts.exhaustive_max_n.min(10),
        samples: opts.samples.min(16),
        ..*opts
    };
    let (vertices, scope) = plan_vertices(g, per_vertex, &opts);
    let failures: Vec<Witness> = vertices
        .par_iter()
        .flat_map_iter(|&v| {
            (0..=n).filter_map(move |k| {
                let count = count_subcube(g, v, k);
                (count != 1 << k).then(|| Witness {
                    subject: format!("v={v} k={k}"),
                    observed: count.to_string(),
                    required: format!("= {}", 1u64 << k),
                })
            })
        })
        .collect();
    CheckReport::new("subcube_size", g, scope, failures)
}

/// `eta_k(eta_k(v)) = v` and `eta_k(v)` differs from `v` exactly up to coordinate `k`.
pub fn check_matching_involution(g: &TwistedCube, opts: &VerifyOptions) -> CheckReport {
    let n = g.n();
    let (vertices, scope) = plan_vertices(g, u64::from(n), opts);
    let failures: Vec<Witness> = vertices
        .par_iter()
        .flat_map_iter(|&v| {
            (1..=n).filter_map(move |k| {
                let w = g.step(v, k);
                let back = g.step(w, k);
                if back != v {
                    Some(Witness {
                        subject: format!("v={v} k={k}"),
                        observed: format!("eta_k(eta_k(v)) = {back}"),
                        required: format!("= {v}"),
                    })
                } else if alpha(v, w) != k {
                    Some(Witness {
                        subject: format!("v={v} k={k}"),
                        observed: format!("alpha(v, eta_k(v)) = {}", alpha(v, w)),
                        required: format!("= {k}"),
                    })
                } else {
                    None
                }
            })
        })
        .collect();
    CheckReport::new("matching_involution", g, scope, failures)
}

/// Every vertex has `n` distinct neighbors, none equal to itself.
pub fn check_degree(g: &TwistedCube, opts: &VerifyOptions) -> CheckReport {
    let n = g.n();
    let (vertices, scope) = plan_vertices(g, u64::from(n) * u64::from(n), opts);
    let failures: Vec<Witness> = vertices
        .par_iter()
        .filter_map(|&v| {
            let mut nb: Vec<Vertex> = g.neighbors_iter(v).collect();
            let has_loop = nb.contains(&v);
            nb.sort_unstable();
            nb.dedup();
            (nb.len() != n as usize || has_loop).then(|| Witness {
                subject: format!("v={v}"),
                observed: format!("{} distinct neighbors, self-loop: {has_loop}", nb.len()),
                required: format!("{n} distinct, no self-loop"),
            })
        })
        .collect();
    CheckReport::new("degree", g, scope, failures)
}

/// Smallest diameter compatible with the neighborhood-growth count,
/// `ceil((n - 1) / log2 n)`.
pub fn diameter_lower_bound(n: u32) -> u32 {
    assert!(n >= 2, "the bound needs n >= 2");
    (f64::from(n - 1) / f64::from(n).log2()).ceil() as u32
}

/// Upper bound `min(2^n, 2 n^d)` on vertices within distance `d` in an
/// `n`-regular graph on `2^n` vertices.
pub fn reachable_bound(n: u32, d: u32) -> u64 {
    let total = 1u64 << n;
    let grown = u64::from(n).checked_pow(d).and_then(|p| p.checked_mul(2));
    grown.map_or(total, |g| g.min(total))
}

pub fn check_diameter_lower_bound(n: u32, diameter: u32) -> bool {
    diameter >= diameter_lower_bound(n)
}

/// Outcome of the ball-search event for one pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PairOutcome {
    pub u: Vertex,
    pub v: Vertex,
    pub ball_size: u64,
    /// `min over w in B' of alpha(eta_k(w), v)`.
    pub best_alpha: u32,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiReport {
    pub n: u32,
    pub policy: CouplingPolicy,
    pub seed: u64,
    pub k: u32,
    pub t: u32,
    pub pairs: u64,
    pub sample_seed: u64,
    pub required_drop: u32,
    /// The event needs `best_alpha <= threshold`; negative means unattainable.
    pub threshold: i64,
    pub failures: u64,
    pub failure_frequency: f64,
    pub mean_ball_size: f64,
    pub min_ball_size: u64,
    pub max_ball_size: u64,
    /// Mean over pairs of `(1 - k^-(t-2))^|B'|`.
    pub bound_mean: f64,
    /// The same bound at the smallest observed ball.
    pub bound_at_min_ball: f64,
    /// Mean over pairs of the failure probability under a uniform matching,
    /// `prod_{i < |B'|} (2^(k-1) - |B''| - i) / (2^(k-1) - i)`.
    pub uniform_probability_mean: f64,
    pub warnings: Vec<String>,
}

/// `max(1, ceil((t - 2) log2 k))`.
pub fn required_drop(k: u32, t: u32) -> u32 {
    let raw = (f64::from(t) - 2.0) * f64::from(k).log2();
    (raw.ceil().max(1.0)) as u32
}

fn sample_pair(rng: &mut impl Rng, n: u32, k: u32) -> (Vertex, Vertex) {
    let u = rng.random_range(0..(1u64 << n)) as u32;
    let flip = 1u32 << (k - 1);
    let low = rng.random_range(0..flip);
    let high = u & !((flip << 1).wrapping_sub(1));
    (Vertex(u), Vertex(high | (!u & flip) | low))
}

/// Per-pair outcomes in sampling order.
pub fn quasi_pair_outcomes(
    g: &TwistedCube,
    k: u32,
    t: u32,
    num_pairs: u64,
    seed: u64,
) -> Result<Vec<PairOutcome>> {
    if k == 0 || k > g.n() {
        return Err(Error::LevelOutOfRange { level: k, n: g.n() });
    }
    let threshold = i64::from(k) - i64::from(required_drop(k, t));
    let mut rng = sampling_stream(seed, purpose::QUASI_PAIRS);
    let pairs: Vec<(Vertex, Vertex)> = (0..num_pairs).map(|_| sample_pair(&mut rng, g.n(), k)).collect();
    Ok(pairs
        .par_iter()
        .map(|&(u, v)| {
            let ball = ball_bfs(g, u, t, k);
            let best_alpha = ball
                .members()
                .map(|(w, _)| alpha(g.step(w, k), v))
                .min()
                .expect("ball contains its center");
            PairOutcome {
                u,
                v,
                ball_size: ball.len() as u64,
                best_alpha,
                holds: i64::from(best_alpha) <= threshold,
            }
        })
        .collect())
}

fn stated_bound(k: u32, t: u32, ball: u64) -> f64 {
    let base = (1.0 - f64::from(k).powf(-(f64::from(t) - 2.0))).clamp(0.0, 1.0);
    base.powf(ball as f64)
}

fn uniform_failure_probability(k: u32, threshold: i64, ball: u64) -> f64 {
    let half = 2f64.powi(k as i32 - 1);
    let good = if threshold < 0 { 0.0 } else { 2f64.powi(threshold as i32) };
    let mut log_p = 0.0;
    for i in 0..ball {
        let num = half - good - i as f64;
        if num <= 0.0 {
            return 0.0;
        }
        log_p += (num / (half - i as f64)).ln();
    }
    log_p.exp()
}

/// Empirical frequency of the per-pair failure event at level `k`.
pub fn estimate_quasirandomness(
    g: &TwistedCube,
    k: u32,
    t: u32,
    num_pairs: u64,
    seed: u64,
) -> Result<QuasiReport> {
    let outcomes = quasi_pair_outcomes(g, k, t, num_pairs, seed)?;
    let drop = required_drop(k, t);
    let threshold = i64::from(k) - i64::from(drop);
    let n = g.n();
    let mut warnings = Vec::new();
    if n >= 2 {
        let l = f64::from(n).log2();
        if f64::from(k) < f64::from(n) / (l * l) {
            warnings.push(format!("k = {k} is below n / log2(n)^2"));
        }
    }
    if t < 3 {
        warnings.push(format!("t = {t} < 3; required drop clamped to {drop}"));
    }
    let regime = 4.0 * f64::from(t).powf(2.0 * f64::from(t));
    if f64::from(k) < regime {
        warnings.push(format!("k = {k} < 4 t^(2t) = {regime}; frequency is descriptive only"));
    }
    if threshold < 0 {
        warnings.push(format!("required drop {drop} exceeds k; the event cannot hold"));
    }
    let count = outcomes.len().max(1) as f64;
    let failures = outcomes.iter().filter(|o| !o.holds).count() as u64;
    let min_ball = outcomes.iter().map(|o| o.ball_size).min().unwrap_or(0);
    let max_ball = outcomes.iter().map(|o| o.ball_size).max().unwrap_or(0);
    Ok(QuasiReport {
        n,
        policy: g.policy(),
        seed: g.seed(),
        k,
        t,
        pairs: num_pairs,
        sample_seed: seed,
        required_drop: drop,
        threshold,
        failures,
        failure_frequency: failures as f64 / count,
        mean_ball_size: outcomes.iter().map(|o| o.ball_size as f64).sum::<f64>() / count,
        min_ball_size: min_ball,
        max_ball_size: max_ball,
        bound_mean: outcomes.iter().map(|o| stated_bound(k, t, o.ball_size)).sum::<f64>() / count,
        bound_at_min_ball: stated_bound(k, t, min_ball),
        uniform_probability_mean: outcomes
            .iter()
            .map(|o| uniform_failure_probability(k, threshold, o.ball_size))
            .sum::<f64>()
            / count,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Balls,
    Injectivity,
    Subcube,
    Involution,
    Quasi,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "all" => Suite::All,
            "balls" => Suite::Balls,
            "injectivity" => Suite::Injectivity,
            "subcube" => Suite::Subcube,
            "involution" => Suite::Involution,
            "quasi" => Suite::Quasi,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

/// Arguments for [`run_suite`]; `None` picks a size-dependent default.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteArgs {
    pub t: Option<u32>,
    pub k: Option<u32>,
    pub pairs: Option<u64>,
    pub centers: Option<u64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub passed: bool,
    pub reports: Vec<CheckReport>,
    pub quasi: Option<QuasiReport>,
}

pub fn run_suite(g: &TwistedCube, suite: Suite, args: &SuiteArgs) -> Result<SuiteOutcome> {
    let n = g.n();
    let opts = VerifyOptions {
        seed: args.seed,
        ..VerifyOptions::default()
    };
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut reports = Vec::new();
    if wants(Suite::Involution) {
        reports.push(check_matching_involution(g, &opts));
        reports.push(check_degree(g, &opts));
    }
    if wants(Suite::Subcube) {
        reports.push(check_subcube_sizes(g, &opts));
    }
    if wants(Suite::Balls) {
        let t = args.t.unwrap_or(4).min(n);
        reports.push(check_ball_lower_bound(g, t, &opts)?);
    }
    if wants(Suite::Injectivity) {
        let t = args.t.unwrap_or(3).min(n);
        let mut rng = sampling_stream(args.seed, purpose::VERIFY_VERTICES ^ 0xff);
        for _ in 0..args.centers.unwrap_or(10) {
            let v = Vertex(rng.random_range(0..g.num_vertices()) as u32);
            reports.push(check_injectivity(g, v, t, DEFAULT_ENUMERATION_BUDGET)?);
        }
    }
    let quasi = if wants(Suite::Quasi) {
        let k = args.k.unwrap_or(n.saturating_sub(2).max(1));
        let t = args.t.unwrap_or(3);
        Some(estimate_quasirandomness(g, k, t, args.pairs.unwrap_or(1000), args.seed)?)
    } else {
        None
    };
    Ok(SuiteOutcome {
        passed: reports.iter().all(|r| r.passed),
        reports,
        quasi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cube::MatchingLevel;

    #[test]
    fn binomials() {
        assert_eq!(binomial(11, 3), 165);
        assert_eq!(binomial(6, 2), 15);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial_prefix(10, 3), 176);
        assert_eq!(binomial(200, 100), u64::MAX);
    }

    #[test]
    fn ball_bound_passes() {
        let g = TwistedCube::build(8, CouplingPolicy::Duplicube, 3).unwrap();
        let r = check_ball_lower_bound(&g, 4, &VerifyOptions::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.scope, Scope::Exhaustive { checked: 256 });
        let r0 = check_ball_lower_bound(&g, 0, &VerifyOptions::default()).unwrap();
        assert!(r0.passed);
        assert_eq!(r0.summary["required"], json!([1]));
        assert!(check_ball_lower_bound(&g, 9, &VerifyOptions::default()).is_err());
    }

    #[test]
    fn ball_bound_min_size_n10_t3() {
        let g = TwistedCube::build(10, CouplingPolicy::Independent, 12).unwrap();
        let r = check_ball_lower_bound(&g, 3, &VerifyOptions::default()).unwrap();
        assert!(r.passed);
        let min = r.summary["min_ball_size"][3].as_u64().unwrap();
        assert!(min >= 165);
    }

    #[test]
    fn ball_bound_samples_large_graphs() {
        let g = TwistedCube::build(18, CouplingPolicy::Duplicube, 1).unwrap();
        let opts = VerifyOptions {
            samples: 64,
            ..VerifyOptions::default()
        };
        let r = check_ball_lower_bound(&g, 3, &opts).unwrap();
        assert!(r.passed);
        assert_eq!(
            r.scope,
            Scope::Sampled {
                checked: 64,
                population: 1 << 18
            }
        );
    }

    #[test]
    fn injectivity_counts() {
        let g = TwistedCube::build(10, CouplingPolicy::Independent, 4).unwrap();
        let r = check_injectivity(&g, Vertex(613), 3, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.summary["images"], json!(176));
        let r0 = check_injectivity(&g, Vertex(5), 0, 10).unwrap();
        assert_eq!(r0.summary["images"], json!(1));
        let r1 = check_injectivity(&g, Vertex(5), 1, 100).unwrap();
        assert_eq!(r1.summary["images"], json!(11));
        assert!(matches!(
            check_injectivity(&g, Vertex(5), 3, 100),
            Err(Error::EnumerationBudget { required: 176, allowed: 100 })
        ));
    }

    #[test]
    fn decreasing_sequences_enumerated_once() {
        let mut seen = Vec::new();
        for_each_decreasing(5, 2, &mut Vec::new(), &mut |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 16);
        assert!(seen.iter().all(|s| s.windows(2).all(|w| w[0] > w[1])));
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn subcube_counts() {
        let g = TwistedCube::build(5, CouplingPolicy::Independent, 0).unwrap();
        for v in [0u32, 7, 31].map(Vertex) {
            assert_eq!(check_subcube_size(&g, v, 0).unwrap().summary["count"], json!(1));
            assert_eq!(check_subcube_size(&g, v, 3).unwrap().summary["count"], json!(8));
            assert_eq!(check_subcube_size(&g, v, 5).unwrap().summary["count"], json!(32));
        }
        assert!(check_subcube_size(&g, Vertex(0), 6).is_err());
        assert!(check_subcube_sizes(&g, &VerifyOptions::default()).passed);
    }

    #[test]
    fn involution_and_degree_pass() {
        for p in CouplingPolicy::ALL {
            let g = TwistedCube::build(11, p, 6).unwrap();
            let opts = VerifyOptions::default();
            let r = check_matching_involution(&g, &opts);
            assert!(r.passed);
            assert_eq!(r.scope, Scope::Exhaustive { checked: 2048 });
            assert!(check_degree(&g, &opts).passed);
        }
    }

    #[test]
    fn corrupted_table_is_caught() {
        let g = TwistedCube::build(6, CouplingPolicy::Duplicube, 2).unwrap();
        let mut levels = g.levels().to_vec();
        let lvl = &levels[2]; // level 4
        let mut inverse = lvl.inverse(0).to_vec();
        inverse.swap(0, 1);
        levels[2] = MatchingLevel::from_raw_unchecked(4, lvl.forward(0).to_vec(), inverse);
        let bad = TwistedCube::from_parts_unchecked(6, CouplingPolicy::Duplicube, 2, levels);
        let r = check_matching_involution(&bad, &VerifyOptions::default());
        assert!(!r.passed);
        assert!(r.failures.iter().all(|w| w.subject.ends_with("k=4")));
        assert!(r.failures.iter().any(|w| w.subject.starts_with("v=")));
    }

    #[test]
    fn diameter_bound_arithmetic() {
        assert_eq!(diameter_lower_bound(10), 3);
        assert!(check_diameter_lower_bound(10, 3));
        assert!(check_diameter_lower_bound(4, 4));
        assert_eq!(diameter_lower_bound(16), 4);
        assert!(!check_diameter_lower_bound(16, 3));
        assert_eq!(diameter_lower_bound(20), 5);
        assert_eq!(diameter_lower_bound(2), 1);
        assert_eq!(reachable_bound(10, 2), 200);
        assert_eq!(reachable_bound(10, 3), 1024);
        assert_eq!(reachable_bound(30, 40), 1 << 30);
    }

    #[test]
    fn lower_bound_matches_counting_argument() {
        // a graph of diameter d needs 2 n^d >= 2^n
        for n in 2..=30u32 {
            let least = (0..=n).find(|&d| reachable_bound(n, d) >= 1 << n).unwrap();
            assert_eq!(diameter_lower_bound(n), least, "n = {n}");
        }
    }

    #[test]
    fn drop_rounding() {
        assert_eq!(required_drop(18, 3), 5);
        assert_eq!(required_drop(16, 3), 4);
        assert_eq!(required_drop(16, 2), 1);
        assert_eq!(required_drop(16, 1), 1);
        assert_eq!(required_drop(8, 5), 9);
    }

    #[test]
    fn pair_sampling_domain() {
        let mut rng = sampling_stream(3, 0);
        for k in 1..=12 {
            for _ in 0..200 {
                let (u, v) = sample_pair(&mut rng, 12, k);
                assert_eq!(alpha(u, v), k);
                assert!(u.0 < 4096 && v.0 < 4096);
            }
        }
    }

    #[test]
    fn quasi_report_is_reproducible() {
        let g = TwistedCube::build(12, CouplingPolicy::Independent, 9).unwrap();
        let a = estimate_quasirandomness(&g, 10, 3, 200, 5).unwrap();
        let b = estimate_quasirandomness(&g, 10, 3, 200, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.required_drop, 4);
        assert_eq!(a.threshold, 6);
        assert!((0.0..=1.0).contains(&a.failure_frequency));
        assert!(a.bound_mean >= 0.0 && a.uniform_probability_mean >= 0.0);
        assert!(estimate_quasirandomness(&g, 13, 3, 10, 0).is_err());
        let vacuous = estimate_quasirandomness(&g, 4, 6, 50, 0).unwrap();
        assert_eq!(vacuous.failures, 50);
        assert!(vacuous.threshold < 0);
    }

    #[test]
    fn uniform_probability_edges() {
        assert_eq!(uniform_failure_probability(4, -1, 3), 1.0);
        // 8 slots, 2 good, ball of 1: 6/8
        assert!((uniform_failure_probability(4, 1, 1) - 0.75).abs() < 1e-12);
        assert_eq!(uniform_failure_probability(4, 2, 5), 0.0);
    }

    #[test]
    fn suites() {
        let g = TwistedCube::build(7, CouplingPolicy::Independent, 1).unwrap();
        let out = run_suite(&g, Suite::All, &SuiteArgs::default()).unwrap();
        assert!(out.passed);
        assert!(out.quasi.is_some());
        assert_eq!(out.reports.len(), 2 + 1 + 1 + 10);
        let only = run_suite(&g, Suite::Subcube, &SuiteArgs::default()).unwrap();
        assert_eq!(only.reports.len(), 1);
        assert!(only.quasi.is_none());
        assert_eq!("quasi".parse::<Suite>(), Ok(Suite::Quasi));
        assert!("nope".parse::<Suite>().is_err());
    }
}
