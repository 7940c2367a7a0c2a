//! Config-driven experiment sweeps.
//!
//! A sweep visits every `(n, policy, seed)` cell, builds the graph, measures
//! its diameter (exactly up to `exact_cap`, by sampling above) and collects
//! greedy and ball-search routing statistics over random pairs. Records are
//! a pure function of the config; only the optional timing columns vary
//! between runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cube::{BuildOptions, TwistedCube, DEFAULT_MEM_BUDGET, MAX_DIMENSION};
use crate::error::{Error, Result};
use crate::label::Vertex;
use crate::metrics::{diameter_bounds_sampled, exact_report, SampleOptions, DEFAULT_EXACT_CAP};
use crate::policy::CouplingPolicy;
use crate::rng::{purpose, sampling_stream};
use crate::routing::{greedy_route, twist_route, RouterParams};

pub const CSV_HEADER: [&str; 16] = [
    "n",
    "policy",
    "seed",
    "diam_exact",
    "diam_lower",
    "diam_upper",
    "method",
    "greedy_mean",
    "greedy_max",
    "twist_mean",
    "twist_max",
    "phases_mean",
    "drop_mean",
    "ratio",
    "build_s",
    "measure_s",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n_values: Vec<u32>,
    pub policies: Vec<CouplingPolicy>,
    pub seeds_per_cell: u32,
    /// Cell seeds are `base_seed, base_seed + 1, ...`.
    pub base_seed: u64,
    pub exact_cap: u32,
    /// Random BFS sources for sampled diameter bounds.
    pub sources: u64,
    /// Random pairs for routing statistics and the sampled upper bound.
    pub pairs: u64,
    /// Overrides for [`RouterParams::auto`].
    pub router_t: Option<u32>,
    pub router_n0: Option<u32>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    /// 0 lets the thread pool decide.
    pub threads: usize,
    /// Record wall times; disable for byte-reproducible output.
    pub timing: bool,
    pub mem_budget: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_values: Vec::new(),
            policies: vec![CouplingPolicy::Independent, CouplingPolicy::Duplicube],
            seeds_per_cell: 1,
            base_seed: 0,
            exact_cap: DEFAULT_EXACT_CAP,
            sources: 16,
            pairs: 1000,
            router_t: None,
            router_n0: None,
            output: None,
            format: OutputFormat::Csv,
            threads: 0,
            timing: true,
            mem_budget: DEFAULT_MEM_BUDGET,
        }
    }
}

fn parse_num<T: std::str::FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(field, format!("not a number: `{value}`")))
}

/// Parses `4..8,10,12` (ranges inclusive).
fn parse_dimensions(value: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let (lo, hi): (u32, u32) = (parse_num("n_values", lo)?, parse_num("n_values", hi)?);
            if lo > hi {
                return Err(Error::config("n_values", format!("empty range `{part}`")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(parse_num("n_values", part)?);
        }
    }
    Ok(out)
}

fn parse_bool(field: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(Error::config(field, format!("not a boolean: `{other}`"))),
    }
}

impl SweepConfig {
    /// Parses a flat `key = value` file; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Applies the settings in `text` on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    &format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    /// Applies one setting; used for both file lines and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n_values" | "n" => self.n_values = parse_dimensions(value)?,
            "policies" | "policy" => {
                self.policies = value
                    .split(',')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(|p| p.parse().map_err(|e: String| Error::config("policies", e)))
                    .collect::<Result<_>>()?
            }
            "seeds_per_cell" | "seeds" => self.seeds_per_cell = parse_num(key, value)?,
            "base_seed" | "seed" => self.base_seed = parse_num(key, value)?,
            "exact_cap" => self.exact_cap = parse_num(key, value)?,
            "sources" => self.sources = parse_num(key, value)?,
            "pairs" => self.pairs = parse_num(key, value)?,
            "router" => {
                let v = value.trim();
                if v.eq_ignore_ascii_case("auto") {
                    self.router_t = None;
                    self.router_n0 = None;
                } else {
                    let (t, n0) = v
                        .split_once(',')
                        .ok_or_else(|| Error::config("router", "expected `auto` or `T,N0`"))?;
                    self.router_t = Some(parse_num("router", t)?);
                    self.router_n0 = Some(parse_num("router", n0)?);
                }
            }
            "router_t" | "t" => self.router_t = Some(parse_num(key, value)?),
            "router_n0" | "n0" => self.router_n0 = Some(parse_num(key, value)?),
            "output" => self.output = Some(PathBuf::from(value.trim())),
            "format" => {
                self.format = match value.trim().to_ascii_lowercase().as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(Error::config("format", format!("expected csv or json, got `{other}`"))),
                }
            }
            "threads" => {
                let v = value.trim();
                self.threads = if v.eq_ignore_ascii_case("auto") { 0 } else { parse_num(key, v)? };
            }
            "timing" => self.timing = parse_bool(key, value)?,
            "mem_budget" => self.mem_budget = parse_num(key, value)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::config("n_values", "must be nonempty"));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n == 0 || n > MAX_DIMENSION) {
            return Err(Error::config(
                "n_values",
                format!("{n} outside 1..={MAX_DIMENSION}"),
            ));
        }
        if self.policies.is_empty() {
            return Err(Error::config("policies", "must be nonempty"));
        }
        if self.seeds_per_cell == 0 {
            return Err(Error::config("seeds_per_cell", "must be >= 1"));
        }
        if self.router_t == Some(0) {
            return Err(Error::config("router_t", "must be >= 1"));
        }
        if self.router_n0 == Some(0) {
            return Err(Error::config("router_n0", "must be >= 1"));
        }
        Ok(())
    }

    /// Router for dimension `n`: the auto schedule with any overrides applied.
    /// `n0` is clamped to `n + 1`.
    pub fn router_for(&self, n: u32) -> RouterParams {
        let auto = RouterParams::auto(n);
        RouterParams {
            t: self.router_t.unwrap_or(auto.t),
            n0: self.router_n0.unwrap_or(auto.n0).min(n + 1),
        }
    }

    fn cells(&self) -> Vec<(u32, CouplingPolicy, u64)> {
        let mut cells = Vec::new();
        for &n in &self.n_values {
            for &policy in &self.policies {
                for i in 0..self.seeds_per_cell {
                    cells.push((n, policy, self.base_seed.wrapping_add(u64::from(i))));
                }
            }
        }
        cells
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub n: u32,
    pub policy: CouplingPolicy,
    pub seed: u64,
    pub diam_exact: Option<u32>,
    pub diam_lower: Option<u32>,
    pub diam_upper: Option<u32>,
    pub method: String,
    pub greedy_mean: Option<f64>,
    pub greedy_max: Option<u32>,
    pub twist_mean: Option<f64>,
    pub twist_max: Option<u32>,
    pub phases_mean: Option<f64>,
    pub drop_mean: Option<f64>,
    pub ratio: Option<f64>,
    pub build_s: Option<f64>,
    pub measure_s: Option<f64>,
    pub router: Option<RouterParams>,
    pub skip_reason: Option<String>,
}

impl SweepRecord {
    pub fn is_skipped(&self) -> bool {
        self.skip_reason.is_some()
    }

    fn skipped(n: u32, policy: CouplingPolicy, seed: u64, reason: String) -> Self {
        SweepRecord {
            n,
            policy,
            seed,
            diam_exact: None,
            diam_lower: None,
            diam_upper: None,
            method: "skipped".into(),
            greedy_mean: None,
            greedy_max: None,
            twist_mean: None,
            twist_max: None,
            phases_mean: None,
            drop_mean: None,
            ratio: None,
            build_s: None,
            measure_s: None,
            router: None,
            skip_reason: Some(reason),
        }
    }
}

/// `diameter / (n / log2 n)`; absent for `n = 1`.
pub fn diameter_ratio(n: u32, diameter: u32) -> Option<f64> {
    (n >= 2).then(|| f64::from(diameter) * f64::from(n).log2() / f64::from(n))
}

#[derive(Default)]
struct RouteStats {
    greedy_total: u64,
    greedy_max: u32,
    twist_total: u64,
    twist_max: u32,
    phases: u64,
    drop_total: u64,
}

fn route_stats(g: &TwistedCube, params: RouterParams, pairs: u64, seed: u64) -> RouteStats {
    let size = g.num_vertices();
    let mut rng = sampling_stream(seed, purpose::ROUTE_PAIRS);
    let pairs: Vec<(Vertex, Vertex)> = (0..pairs)
        .map(|_| {
            (
                Vertex(rng.random_range(0..size) as u32),
                Vertex(rng.random_range(0..size) as u32),
            )
        })
        .collect();
    pairs
        .par_iter()
        .map(|&(u, v)| {
            let greedy = greedy_route(g, u, v).len() as u32;
            let twist = twist_route(g, u, v, params);
            RouteStats {
                greedy_total: u64::from(greedy),
                greedy_max: greedy,
                twist_total: twist.len() as u64,
                twist_max: twist.len() as u32,
                phases: twist.phases.len() as u64,
                drop_total: twist.phases.iter().map(|p| u64::from(p.drop())).sum(),
            }
        })
        .reduce(RouteStats::default, |a, b| RouteStats {
            greedy_total: a.greedy_total + b.greedy_total,
            greedy_max: a.greedy_max.max(b.greedy_max),
            twist_total: a.twist_total + b.twist_total,
            twist_max: a.twist_max.max(b.twist_max),
            phases: a.phases + b.phases,
            drop_total: a.drop_total + b.drop_total,
        })
}

fn run_cell(cfg: &SweepConfig, n: u32, policy: CouplingPolicy, seed: u64) -> Result<SweepRecord> {
    let start = Instant::now();
    let opts = BuildOptions {
        mem_budget: cfg.mem_budget,
    };
    let g = match TwistedCube::build_with(n, policy, seed, opts) {
        Ok(g) => g,
        Err(e) if e.is_resource_rejection() => {
            return Ok(SweepRecord::skipped(n, policy, seed, e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let build_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let params = cfg.router_for(n);
    let report = if n <= cfg.exact_cap {
        exact_report(&g, cfg.exact_cap)?
    } else {
        let mut sample = SampleOptions::new(cfg.sources, cfg.pairs, seed);
        sample.router = Some(params);
        diameter_bounds_sampled(&g, &sample)
    };
    let stats = route_stats(&g, params, cfg.pairs, seed);
    let measure_s = start.elapsed().as_secs_f64();

    let count = cfg.pairs as f64;
    let has_pairs = cfg.pairs > 0;
    let mean = |total: u64| has_pairs.then(|| total as f64 / count);
    let diameter = report.exact.unwrap_or(report.lower_bound);
    Ok(SweepRecord {
        n,
        policy,
        seed,
        diam_exact: report.exact,
        diam_lower: Some(report.lower_bound),
        diam_upper: Some(report.upper_bound),
        method: report.method.name().into(),
        greedy_mean: mean(stats.greedy_total),
        greedy_max: has_pairs.then_some(stats.greedy_max),
        twist_mean: mean(stats.twist_total),
        twist_max: has_pairs.then_some(stats.twist_max),
        phases_mean: mean(stats.phases),
        drop_mean: (stats.phases > 0).then(|| stats.drop_total as f64 / stats.phases as f64),
        ratio: diameter_ratio(n, diameter),
        build_s: cfg.timing.then_some(build_s),
        measure_s: cfg.timing.then_some(measure_s),
        router: Some(params),
        skip_reason: None,
    })
}

/// Runs every cell, in parallel, returning records in config order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    let cells = cfg.cells();
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(n, policy, seed)| run_cell(cfg, n, policy, seed))
            .collect()
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn csv_row(r: &SweepRecord) -> [String; 16] {
    [
        r.n.to_string(),
        r.policy.name().to_string(),
        r.seed.to_string(),
        opt(r.diam_exact),
        opt(r.diam_lower),
        opt(r.diam_upper),
        r.method.clone(),
        opt_f(r.greedy_mean),
        opt(r.greedy_max),
        opt_f(r.twist_mean),
        opt(r.twist_max),
        opt_f(r.phases_mean),
        opt_f(r.drop_mean),
        opt_f(r.ratio),
        opt_f(r.build_s),
        opt_f(r.measure_s),
    ]
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record(csv_row(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn to_json(records: &[SweepRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    let _ = writeln!(s);
    s
}

pub fn render(records: &[SweepRecord], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => to_csv(records),
        OutputFormat::Json => to_json(records),
    }
}

pub fn emit(records: &[SweepRecord], format: OutputFormat, path: &Path) -> Result<()> {
    fs::write(path, render(records, format)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::parse(text).unwrap()
    }

    #[test]
    fn parse_and_override() {
        let mut c = cfg(
            "# sweep\nn_values = 4..6, 9\npolicies = independent,identity\nseeds_per_cell = 3\n\
             base_seed = 10\nrouter = 3,4\nformat = json\nthreads = auto\ntiming = off\n",
        );
        assert_eq!(c.n_values, vec![4, 5, 6, 9]);
        assert_eq!(
            c.policies,
            vec![CouplingPolicy::Independent, CouplingPolicy::IdentityMatching]
        );
        assert_eq!((c.seeds_per_cell, c.base_seed), (3, 10));
        assert_eq!(c.router_for(9), RouterParams { t: 3, n0: 4 });
        assert_eq!(c.router_for(2), RouterParams { t: 3, n0: 3 });
        assert_eq!(c.format, OutputFormat::Json);
        assert!(!c.timing);
        c.set("router", "auto").unwrap();
        assert_eq!(c.router_for(12), RouterParams::auto(12));
        c.set("n", "1..=3").unwrap();
        assert_eq!(c.n_values, vec![1, 2, 3]);
        assert_eq!(c.cells().len(), 3 * 2 * 3);
    }

    #[test]
    fn config_errors_name_the_field() {
        let field = |text: &str| match SweepConfig::parse(text).and_then(|c| c.validate().map(|_| c)) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(field("n_values = 31"), "n_values");
        assert_eq!(field("n_values = 0"), "n_values");
        assert_eq!(field("policies = independent"), "n_values");
        assert_eq!(field("n_values = 4\nseeds_per_cell = 0"), "seeds_per_cell");
        assert_eq!(field("n_values = 4\npolicies = foo"), "policies");
        assert_eq!(field("n_values = 8..4"), "n_values");
        assert_eq!(field("bogus = 1"), "bogus");
        assert_eq!(field("n_values 4"), "line 1");
        assert_eq!(field("n_values = 4\nformat = xml"), "format");
    }

    #[test]
    fn single_edge_row_has_no_ratio() {
        let records = run_sweep(&cfg("n_values = 1\npolicies = duplicube\npairs = 5")).unwrap();
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(r.diam_exact, Some(1));
        assert_eq!(r.ratio, None);
        let csv = to_csv(&records);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[13], "");
    }

    #[test]
    fn hypercube_rows() {
        let records =
            run_sweep(&cfg("n_values = 4..9\npolicies = identity\npairs = 50\ntiming = false")).unwrap();
        for r in &records {
            assert_eq!(r.diam_exact, Some(r.n));
            let expected = f64::from(r.n).log2();
            assert!((r.ratio.unwrap() - expected).abs() < 1e-12);
            assert!(r.build_s.is_none());
        }
    }

    #[test]
    fn memory_rejection_becomes_skipped_row() {
        let records =
            run_sweep(&cfg("n_values = 6, 12\npolicies = independent\nmem_budget = 10000\npairs = 5"))
                .unwrap();
        assert!(!records[0].is_skipped());
        assert!(records[1].is_skipped());
        assert!(records[1].skip_reason.as_ref().unwrap().contains("memory budget"));
        let csv = to_csv(&records);
        assert!(csv.lines().nth(2).unwrap().starts_with("12,independent,0,,,,skipped,"));
    }

    #[test]
    fn sampled_cells_above_cap() {
        let records = run_sweep(&cfg(
            "n_values = 13\npolicies = duplicube\nexact_cap = 12\nsources = 4\npairs = 30",
        ))
        .unwrap();
        let r = &records[0];
        assert_eq!(r.method, "sampled_sweep");
        assert_eq!(r.diam_exact, None);
        assert!(r.diam_lower.unwrap() <= r.diam_upper.unwrap());
        assert!(r.diam_upper.unwrap() <= 13);
        assert!(r.build_s.unwrap() > 0.0 && r.measure_s.unwrap() > 0.0);
    }

    #[test]
    fn csv_shape() {
        assert_eq!(to_csv(&[]), CSV_HEADER.join(",") + "\n");
        let records = run_sweep(&cfg("n_values = 5\npolicies = independent\npairs = 10")).unwrap();
        let csv = to_csv(&records);
        assert_eq!(csv.lines().count(), 2);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 16);
        let json: serde_json::Value = serde_json::from_str(&to_json(&records)).unwrap();
        assert_eq!(json[0]["n"], 5);
        assert_eq!(json[0]["policy"], "independent");
    }

    #[test]
    fn emit_reports_path_on_failure() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("missing").join("out.csv");
        match emit(&[], OutputFormat::Csv, &bad) {
            Err(Error::Io { path, .. }) => assert_eq!(path, bad),
            other => panic!("unexpected {other:?}"),
        }
        let good = dir.path().join("out.csv");
        emit(&[], OutputFormat::Csv, &good).unwrap();
        assert!(fs::read_to_string(good).unwrap().starts_with("n,policy,seed,"));
    }
}
