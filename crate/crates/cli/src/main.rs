use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twistcube::format::{read_file, write_file};
use twistcube::harness::{emit, render, run_sweep, SweepConfig};
use twistcube::metrics::{self, diameter_bounds_sampled, exact_report, SampleOptions};
use twistcube::routing::{greedy_route, twist_route, validate_path, RouterParams};
use twistcube::verify::{run_suite, Suite, SuiteArgs};
use twistcube::{BuildOptions, CouplingPolicy, Error, TwistedCube, Vertex};

mod exit {
    pub const USAGE: u8 = 1;
    pub const PARTIAL: u8 = 2;
    pub const RESOURCE: u8 = 3;
    pub const CHECK_FAILED: u8 = 4;
}

#[derive(Parser, Debug)]
#[command(name = "twistcube", version, about = "Random twisted hypercubes: build, route, measure, verify")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Emit one JSON document on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug, Clone)]
struct GraphArgs {
    /// Dimension of a freshly built graph.
    #[arg(long, conflicts_with = "graph_file")]
    n: Option<u32>,

    #[arg(long, value_enum, default_value = "independent")]
    policy: PolicyArg,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Load a TWC1 graph file instead of building.
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Independent,
    Duplicube,
    Identity,
}

impl From<PolicyArg> for CouplingPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Independent => CouplingPolicy::Independent,
            PolicyArg::Duplicube => CouplingPolicy::Duplicube,
            PolicyArg::Identity => CouplingPolicy::IdentityMatching,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Greedy,
    Twist,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    All,
    Balls,
    Injectivity,
    Subcube,
    Involution,
    Quasi,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Balls => Suite::Balls,
            SuiteArg::Injectivity => Suite::Injectivity,
            SuiteArg::Subcube => Suite::Subcube,
            SuiteArg::Involution => Suite::Involution,
            SuiteArg::Quasi => Suite::Quasi,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph and write it as a TWC1 file.
    Generate {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value = "independent")]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Route between two vertices.
    Route {
        #[command(flatten)]
        graph: GraphArgs,
        /// Source label, decimal or 0b-prefixed binary.
        #[arg(long, value_parser = parse_label)]
        from: u32,
        #[arg(long, value_parser = parse_label)]
        to: u32,
        #[arg(long, value_enum, default_value = "twist")]
        algo: Algo,
        /// Ball radius (twist only).
        #[arg(long)]
        t: Option<u32>,
        /// Greedy-switch threshold (twist only).
        #[arg(long)]
        n0: Option<u32>,
    },
    /// Exact or sampled diameter.
    Diameter {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, conflicts_with = "sampled")]
        exact: bool,
        #[arg(long)]
        sampled: bool,
        /// Largest dimension accepted for exact computation.
        #[arg(long, default_value_t = metrics::DEFAULT_EXACT_CAP)]
        cap: u32,
        #[arg(long, default_value_t = 16)]
        sources: u64,
        #[arg(long, default_value_t = 1000)]
        pairs: u64,
        /// Seed for source and pair sampling.
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// Run structural checks; exits 4 if any deterministic check fails.
    Verify {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        pairs: Option<u64>,
        /// Random centers for the injectivity check.
        #[arg(long)]
        centers: Option<u64>,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// Run an experiment sweep.
    Sweep {
        /// Flat `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config key, e.g. `--set n_values=4..12`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        /// Leave timing columns empty so output is byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
}

fn parse_label(s: &str) -> Result<u32, String> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        Some(bits) => u32::from_str_radix(&bits.replace('_', ""), 2),
        None => s.parse(),
    };
    parsed.map_err(|_| format!("not a vertex label: `{s}`"))
}

fn binary(v: Vertex, n: u32) -> String {
    format!("0b{:0width$b}", v.0, width = n as usize)
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_resource_rejection() {
            exit::RESOURCE
        } else {
            exit::USAGE
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: exit::USAGE,
        message: message.into(),
    }
}

fn load_graph(args: &GraphArgs) -> Result<TwistedCube, Failure> {
    match (&args.graph_file, args.n) {
        (Some(path), None) => Ok(read_file(path)?),
        (None, Some(n)) => {
            let opts = BuildOptions::from_env()?;
            Ok(TwistedCube::build_with(n, args.policy.into(), args.seed, opts)?)
        }
        _ => Err(usage("exactly one of --n or --graph-file is required")),
    }
}

fn print(json_mode: bool, doc: &Value, text: impl FnOnce() -> String) {
    if json_mode {
        println!("{doc}");
    } else {
        println!("{}", text());
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(threads) = cli.threads {
        // the global pool can only be configured once; later calls are no-ops
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let json_mode = cli.json;
    match cli.command {
        Command::Generate { n, policy, seed, out } => {
            let opts = BuildOptions::from_env()?;
            let g = TwistedCube::build_with(n, policy.into(), seed, opts)?;
            let bytes = write_file(&g, &out)?;
            let doc = json!({
                "n": n,
                "policy": g.policy().name(),
                "seed": seed,
                "bytes": bytes,
                "path": out.display().to_string(),
            });
            println!("{doc}");
            Ok(0)
        }
        Command::Route {
            graph,
            from,
            to,
            algo,
            t,
            n0,
        } => {
            let g = load_graph(&graph)?;
            let (u, v) = (Vertex(from), Vertex(to));
            g.check_vertex(u)?;
            g.check_vertex(v)?;
            let (path, params) = match algo {
                Algo::Greedy => (greedy_route(&g, u, v), None),
                Algo::Twist => {
                    let auto = RouterParams::auto(g.n());
                    let params = RouterParams {
                        t: t.unwrap_or(auto.t),
                        n0: n0.unwrap_or(auto.n0),
                    };
                    params.validate(g.n())?;
                    (twist_route(&g, u, v, params), Some(params))
                }
            };
            let valid = validate_path(&g, &path, u, v);
            let n = g.n();
            let mut doc = json!({
                "algo": match algo { Algo::Greedy => "greedy", Algo::Twist => "twist" },
                "from": u.0,
                "from_bin": binary(u, n),
                "to": v.0,
                "to_bin": binary(v, n),
                "length": path.len(),
                "valid": valid,
                "vertices": path.vertices.iter().map(|x| x.0).collect::<Vec<_>>(),
                "vertices_bin": path.vertices.iter().map(|&x| binary(x, n)).collect::<Vec<_>>(),
                "levels": path.levels,
            });
            if let Some(p) = params {
                doc["t"] = json!(p.t);
                doc["n0"] = json!(p.n0);
                doc["phases"] = json!(path.phases.len());
                doc["alpha_trace"] = json!(path.alpha_trace());
            }
            print(json_mode, &doc, || {
                format!(
                    "{} -> {}: length {} ({}), valid: {valid}",
                    binary(u, n),
                    binary(v, n),
                    path.len(),
                    path.levels.iter().map(u8::to_string).collect::<Vec<_>>().join(" ")
                )
            });
            Ok(if valid { 0 } else { exit::CHECK_FAILED })
        }
        Command::Diameter {
            graph,
            exact,
            sampled,
            cap,
            sources,
            pairs,
            sample_seed,
        } => {
            let g = load_graph(&graph)?;
            let use_exact = exact || (!sampled && g.n() <= cap);
            let report = if use_exact {
                exact_report(&g, cap)?
            } else {
                diameter_bounds_sampled(&g, &SampleOptions::new(sources, pairs, sample_seed))
            };
            let doc = serde_json::to_value(&report).expect("report serializes");
            print(json_mode, &doc, || match report.exact {
                Some(d) => format!("diameter {d} (all pairs, {:.3}s)", report.wall_time),
                None => format!(
                    "diameter in [{}, {}] (sampled; upper bound is a route-length heuristic)",
                    report.lower_bound, report.upper_bound
                ),
            });
            Ok(0)
        }
        Command::Verify {
            graph,
            suite,
            k,
            t,
            pairs,
            centers,
            sample_seed,
        } => {
            let g = load_graph(&graph)?;
            let args = SuiteArgs {
                t,
                k,
                pairs,
                centers,
                seed: sample_seed,
            };
            let outcome = run_suite(&g, suite.into(), &args)?;
            let doc = serde_json::to_value(&outcome).expect("report serializes");
            print(json_mode, &doc, || {
                let mut lines: Vec<String> = outcome
                    .reports
                    .iter()
                    .map(|r| {
                        format!(
                            "{} {}: {} failures",
                            if r.passed { "ok  " } else { "FAIL" },
                            r.check,
                            r.failures.len()
                        )
                    })
                    .collect();
                if let Some(q) = &outcome.quasi {
                    lines.push(format!(
                        "quasi k={} t={}: failure frequency {:.4} over {} pairs, bound mean {:.3e}",
                        q.k, q.t, q.failure_frequency, q.pairs, q.bound_mean
                    ));
                }
                lines.join("\n")
            });
            Ok(if outcome.passed { 0 } else { exit::CHECK_FAILED })
        }
        Command::Sweep {
            config,
            overrides,
            output,
            format,
            no_timing,
        } => {
            let mut cfg = SweepConfig {
                mem_budget: BuildOptions::from_env()?.mem_budget,
                ..SweepConfig::default()
            };
            if let Some(path) = &config {
                cfg.apply_file(path)?;
            }
            for kv in &overrides {
                let (key, value) = kv
                    .split_once('=')
                    .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
                cfg.set(key.trim(), value.trim())?;
            }
            if let Some(f) = &format {
                cfg.set("format", f)?;
            }
            if let Some(out) = output {
                cfg.output = Some(out);
            }
            if let Some(threads) = cli.threads {
                cfg.threads = threads;
            }
            if no_timing {
                cfg.timing = false;
            }
            let records = run_sweep(&cfg)?;
            let skipped: Vec<&str> = records
                .iter()
                .filter_map(|r| r.skip_reason.as_deref())
                .collect();
            for reason in &skipped {
                eprintln!("skipped cell: {reason}");
            }
            match &cfg.output {
                Some(path) => {
                    emit(&records, cfg.format, path)?;
                    let doc = json!({
                        "records": records.len(),
                        "skipped": skipped.len(),
                        "output": path.display().to_string(),
                    });
                    print(json_mode, &doc, || {
                        format!("{} records ({} skipped) -> {}", records.len(), skipped.len(), path.display())
                    });
                }
                None => print!("{}", render(&records, cfg.format)),
            }
            Ok(if skipped.is_empty() { 0 } else { exit::PARTIAL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
