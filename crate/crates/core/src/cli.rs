//! Command-line front end: list the registry, run campaigns and searches,
//! replay matrix witnesses and emit machine-readable reports.
//!
//! Exit codes: 0 when every check matched its claim, 1 on a tolerance
//! failure or violation where the statement claims nonnegativity (or a
//! missing violation where one is a known certainty), 2 on usage or
//! configuration errors.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::harness::{
    builtin_counterexamples, lookup, run_campaign, search_counterexample, CampaignReport, Claim,
    Distribution, InputValue, SearchConfig, REGISTRY,
};
use crate::matrix::{parse_matrices, PARSE_ASYMMETRY_WARN};
use crate::tol::TolerancePolicy;
use crate::Result;

#[derive(Parser)]
#[command(
    name = "hlawka",
    version,
    about = "Numerical verification of Hornich-Hlawka type functional and matrix inequalities"
)]
struct Cli {
    /// Cap on worker threads used by campaigns.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered inequality identifiers and their statements.
    List,
    /// Run a randomized verification campaign for one inequality.
    Verify {
        /// Registered inequality identifier (see `list`).
        id: String,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Search for a counterexample to a registered statement.
    Search {
        /// Registered statement identifier (see `list`).
        id: String,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Evaluate an inequality on explicit matrices from a file.
    Replay {
        /// Registered inequality identifier (see `list`).
        id: String,
        /// Plain-text matrix file: per matrix, the dimension N followed by
        /// N*N entries.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        opts: ConfigOpts,
    },
    /// Built-in demonstrations; `demo counterexamples` prints the known
    /// violations with their witnesses.
    Demo { topic: String },
}

#[derive(Args, Default)]
struct ConfigOpts {
    /// Matrix dimension N.
    #[arg(long)]
    dim: Option<usize>,
    /// Difference/subset order n (or first block exponent).
    #[arg(long)]
    order: Option<usize>,
    /// Tensor power p (or second block exponent / subset size k).
    #[arg(long = "p")]
    power: Option<usize>,
    /// Exponent for det^(-rho) sums.
    #[arg(long)]
    rho: Option<f64>,
    /// Parameter for parametric catalog functions.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of sampled trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Base seed of the per-trial RNG streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance of the pass rule margin >= -tol * scale.
    #[arg(long)]
    tol: Option<f64>,
    /// Sampling distribution: gram | gram+shift | diagonal | boundary | mixed.
    #[arg(long)]
    distribution: Option<String>,
    /// Function or variant selector for targets that take one.
    #[arg(long)]
    function: Option<String>,
    /// Condition-number cap for strictly positive definite sampling.
    #[arg(long)]
    cond_cap: Option<f64>,
    /// Report format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Report serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Serialize a campaign report: JSON round-trips losslessly; CSV emits the
/// fixed header `inequality,seed,trials,dim,order,power,min_margin,`
/// `failures,elapsed_ms` and one row.
pub fn serialize_report(report: &CampaignReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => serde_json::to_string(report).expect("report serializes"),
        ReportFormat::Csv => {
            let mut s =
                String::from("inequality,seed,trials,dim,order,power,min_margin,failures,elapsed_ms\n");
            s.push_str(&format!(
                "{},{},{},{},{},{},{:?},{},{}\n",
                report.inequality,
                report.config.seed,
                report.trials,
                report.config.dim,
                report.config.order,
                report.config.power,
                report.min_margin,
                report.failures,
                report.elapsed_ms,
            ));
            s
        }
    }
}

fn parse_config_file(path: &PathBuf, cfg: &mut SearchConfig) -> Result<()> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("line {}: bad {what} '{value}'", lineno + 1));
        match key {
            "dim" => cfg.dim = value.parse().map_err(|_| bad("dim"))?,
            "order" => cfg.order = value.parse().map_err(|_| bad("order"))?,
            "p" | "power" => cfg.power = value.parse().map_err(|_| bad("power"))?,
            "rho" => cfg.rho = value.parse().map_err(|_| bad("rho"))?,
            "alpha" => cfg.alpha = value.parse().map_err(|_| bad("alpha"))?,
            "trials" => cfg.trials = value.parse().map_err(|_| bad("trials"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
            "tol" => cfg.tol = TolerancePolicy::new(value.parse().map_err(|_| bad("tol"))?),
            "distribution" => cfg.distribution = Distribution::parse(value)?,
            "function" => cfg.function = Some(value.to_string()),
            "cond-cap" | "cond_cap" => cfg.cond_cap = value.parse().map_err(|_| bad("cond-cap"))?,
            other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
        }
    }
    Ok(())
}

impl ConfigOpts {
    /// Defaults, then the config file, then explicit flags.
    fn resolve(&self) -> Result<SearchConfig> {
        let mut cfg = SearchConfig::default();
        if let Some(path) = &self.config {
            parse_config_file(path, &mut cfg)?;
        }
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.order {
            cfg.order = v;
        }
        if let Some(v) = self.power {
            cfg.power = v;
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = TolerancePolicy::new(v);
        }
        if let Some(v) = &self.distribution {
            cfg.distribution = Distribution::parse(v)?;
        }
        if let Some(v) = &self.function {
            cfg.function = Some(v.clone());
        }
        if let Some(v) = self.cond_cap {
            cfg.cond_cap = v;
        }
        Ok(cfg)
    }

    fn format(&self) -> ReportFormat {
        match self.format.as_deref() {
            Some("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

fn cmd_list() -> i32 {
    for info in REGISTRY {
        let kind = if info.loewner { "loewner" } else { "scalar" };
        println!("{:<20} [{kind}] {}", info.id, info.statement);
    }
    0
}

fn cmd_verify(id: &str, opts: &ConfigOpts) -> Result<i32> {
    let info = lookup(id)?;
    let cfg = opts.resolve()?;
    let report = run_campaign(id, &cfg)?;
    let text = serialize_report(&report, opts.format());
    opts.emit(&text)?;
    let claim = info.target.claim(&cfg);
    let ok = report.failures == 0;
    eprintln!(
        "{id}: {} trials, min margin {:.6e} at trial {}, {} tolerance failure(s) -> {}",
        report.trials,
        report.min_margin,
        report.witness.trial,
        report.failures,
        if ok { "all passed" } else { "violations seen" },
    );
    match claim {
        Claim::Nonneg if !ok => Ok(1),
        _ => Ok(0),
    }
}

fn cmd_search(id: &str, opts: &ConfigOpts) -> Result<i32> {
    let info = lookup(id)?;
    let cfg = opts.resolve()?;
    let found = search_counterexample(id, &cfg)?;
    let claim = info.target.claim(&cfg);
    match &found {
        Some(w) => {
            let text = serde_json::to_string(w).expect("witness serializes");
            opts.emit(&text)?;
            eprintln!(
                "{id}: violation found, margin {:.6e} (trial {}, refined: {})",
                w.margin, w.trial, w.refined
            );
            Ok(if claim == Claim::Nonneg { 1 } else { 0 })
        }
        None => {
            opts.emit("null")?;
            eprintln!("{id}: no violation in {} trials", cfg.trials);
            // a known violation that the search cannot reproduce is a failure
            Ok(if claim == Claim::Violable { 1 } else { 0 })
        }
    }
}

fn cmd_replay(id: &str, input: &PathBuf, opts: &ConfigOpts) -> Result<i32> {
    let info = lookup(id)?;
    let cfg = opts.resolve()?;
    let text = fs::read_to_string(input)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
    let parsed = parse_matrices(&text)?;
    let mut inputs = Vec::with_capacity(parsed.len());
    for (i, p) in parsed.iter().enumerate() {
        if p.asymmetry > PARSE_ASYMMETRY_WARN {
            eprintln!(
                "warning: matrix {} symmetrized, asymmetry {:.3e}",
                i + 1,
                p.asymmetry
            );
        }
        inputs.push(InputValue::Matrix(p.matrix.clone()));
    }
    let margin = info.target.eval(&cfg, &inputs)?;
    let passed = margin.passes(cfg.tol);
    let out = serde_json::json!({
        "inequality": id,
        "margin": margin.value,
        "scale": margin.scale,
        "passed": passed,
    });
    opts.emit(&out.to_string())?;
    eprintln!(
        "{id}: margin {:.6e} at scale {:.6e} -> {}",
        margin.value,
        margin.scale,
        if passed { "passed" } else { "failed" }
    );
    match info.target.claim(&cfg) {
        Claim::Nonneg if !passed => Ok(1),
        _ => Ok(0),
    }
}

fn cmd_demo(topic: &str) -> Result<i32> {
    if topic != "counterexamples" {
        return Err(Error::Config(format!(
            "unknown demo topic '{topic}' (available: counterexamples)"
        )));
    }
    for (id, inputs, margin) in builtin_counterexamples() {
        let info = lookup(&id)?;
        println!("{id}: {}", info.statement);
        println!("  margin {:.6} at scale {:.6}", margin.value, margin.scale);
        for input in &inputs {
            match input {
                InputValue::Scalar(s) => println!("    input {s}"),
                InputValue::Point(p) => println!("    input {p:?}"),
                InputValue::Matrix(m) => println!("    input matrix\n{}", m.to_text()),
            }
        }
    }
    Ok(0)
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::List => Ok(cmd_list()),
        Command::Verify { id, opts } => cmd_verify(id, opts),
        Command::Search { id, opts } => cmd_search(id, opts),
        Command::Replay { id, input, opts } => cmd_replay(id, input, opts),
        Command::Demo { topic } => cmd_demo(topic),
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            // help and version requests are not errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let body = || match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(body),
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                2
            }
        },
        None => body(),
    }
}
