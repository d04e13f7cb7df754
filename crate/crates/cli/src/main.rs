mod commands;
mod config;

use clap::{Args, Parser, Subcommand};
use commands::Report;
use config::{ConfigError, Format, Raw};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exact cascade measures on interval grids: build, verify and export.
#[derive(Parser)]
#[command(name = "cascade", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Opts {
    /// key=value file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// N,Q,eps
    #[arg(long, global = true)]
    params: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    lambda: Option<String>,
    #[arg(long, global = true)]
    depth: Option<String>,
    #[arg(long, global = true)]
    size_floor: Option<String>,
    #[arg(long, global = true)]
    paths: Option<String>,
    #[arg(long, global = true)]
    max_steps: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Start node: inf, outer:N, c:LO:LEVEL or gap:LO:LEVEL:N
    #[arg(long, global = true)]
    start: Option<String>,
    #[arg(long, global = true)]
    min_mass: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    /// Number of paths written to trajectories.csv
    #[arg(long, global = true)]
    trajectories: Option<String>,
    /// Keep walking after J_∞ instead of counting +1 per step
    #[arg(long, global = true)]
    no_stop: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// The 5-ary model: doubling scans, layer masses, optional dimension estimate
    Model5 {
        #[arg(long)]
        dimension: bool,
    },
    /// Gaps, the Whitney condition and child counts
    Cantor,
    /// Exact first and second moments per node class
    Expect,
    /// Monte Carlo walk to J_∞
    Walk,
    /// Certified μ, Lebesgue and ν bounds for the J_∞ set
    Support,
    /// ν = λμ + (1-λ)dx, the map f and its quasisymmetry ratio
    Interp,
    /// Harmonic measure certificates of leaves and bands
    Harmonic,
    /// Write all plot-ready artifacts to --out
    Export,
}

fn raw_config(o: &Opts) -> Result<Raw, ConfigError> {
    let mut raw = match &o.config {
        Some(p) => Raw::load(p)?,
        None => Raw::default(),
    };
    if let Some(p) = &o.params {
        let parts: Vec<&str> = p.split(',').map(str::trim).collect();
        let [n, q, eps] = parts.as_slice() else {
            return Err(ConfigError(format!("--params expects N,Q,eps, got `{p}`")));
        };
        raw.set("n", Some(n.to_string()));
        raw.set("q", Some(q.to_string()));
        raw.set("eps", Some(eps.to_string()));
    }
    for (k, v) in [
        ("alpha", &o.alpha),
        ("lambda", &o.lambda),
        ("depth", &o.depth),
        ("size_floor", &o.size_floor),
        ("paths", &o.paths),
        ("max_steps", &o.max_steps),
        ("seed", &o.seed),
        ("start", &o.start),
        ("min_mass", &o.min_mass),
        ("samples", &o.samples),
        ("trajectories", &o.trajectories),
    ] {
        raw.set(k, v.clone());
    }
    raw.set("out", o.out.as_ref().map(|p| p.display().to_string()));
    raw.set("format", o.format.map(|f| if f == Format::Csv { "csv".into() } else { "json".into() }));
    if o.no_stop {
        raw.set("stop_at_infinity", Some("false".into()));
    }
    Ok(raw)
}

fn emit(report: &Report, cfg: &config::Config) -> anyhow::Result<()> {
    let mut json = report.json.clone();
    json["command"] = report.name.into();
    json["pass"] = report.failures.is_empty().into();
    json["failures"] = report.failures.clone().into();
    let mut csv_text = Vec::new();
    cascade::export::write_table(&mut csv_text, &report.table)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &json)?;
            writeln!(out)?;
        }
        Format::Csv => out.write_all(&csv_text)?,
    }
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.json", report.name)), serde_json::to_vec_pretty(&json)?)?;
        if !report.table.is_empty() {
            std::fs::write(dir.join(format!("{}.csv", report.name)), &csv_text)?;
        }
        for (name, bytes) in &report.files {
            std::fs::write(dir.join(name), bytes)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match raw_config(&cli.opts).and_then(|r| r.resolve()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.cmd {
        Cmd::Model5 { dimension } => commands::model5(&cfg, dimension),
        Cmd::Cantor => commands::cantor(&cfg),
        Cmd::Expect => commands::expect(&cfg),
        Cmd::Walk => commands::walk(&cfg),
        Cmd::Support => commands::support(&cfg),
        Cmd::Interp => commands::interp(&cfg),
        Cmd::Harmonic => commands::harmonic(&cfg),
        Cmd::Export => commands::export(&cfg),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&report, &cfg) {
        let closed = e.chain().any(|c| {
            let io = c.downcast_ref::<std::io::Error>().map(|io| io.kind());
            let js = c.downcast_ref::<serde_json::Error>().and_then(|j| j.io_error_kind());
            io.or(js) == Some(std::io::ErrorKind::BrokenPipe)
        });
        if closed {
            return ExitCode::SUCCESS;
        }
        eprintln!("error writing output: {e:#}");
        return ExitCode::from(1);
    }
    for f in &report.failures {
        eprintln!("invariant failed: {f}");
    }
    if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
