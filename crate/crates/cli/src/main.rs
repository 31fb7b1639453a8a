mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "surface-poisson", version, about = "Numerical checks on moduli of flat connections over surfaces with boundary")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate alcove, stabilizer and fiber data over a grid of torus points.
    Alcove(Common),
    /// Run the invariant suite at sampled points; exits nonzero on failure.
    Verify(Common),
    /// Cohomology dimensions of the twisted complexes at sampled points.
    Cohomology(Common),
    /// Sample representations and tabulate leaf coordinates and Wilson values.
    Sample(Common),
    /// Poisson brackets along a path of boundary classes.
    Bracket(BracketArgs),
}

#[derive(Args)]
struct Common {
    /// TOML config; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    genus: Option<usize>,
    #[arg(long)]
    boundaries: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Class target per boundary circle, e.g. `--class 0.1,-0.1 --class 0.2,-0.2`.
    #[arg(long = "class", value_delimiter = ';', allow_hyphen_values = true)]
    classes: Vec<String>,
    /// JSON report destination (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV export of the report table.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Flip the sign of the beta term in the total form.
    #[arg(long)]
    tamper_beta: bool,
    #[arg(long)]
    tol_relation: Option<f64>,
    #[arg(long)]
    tol_complex: Option<f64>,
    #[arg(long)]
    tol_diagram: Option<f64>,
    #[arg(long)]
    tol_closed: Option<f64>,
    #[arg(long)]
    tol_invariance: Option<f64>,
    #[arg(long)]
    tol_momentum: Option<f64>,
    #[arg(long)]
    tol_casimir: Option<f64>,
    #[arg(long)]
    tol_jacobi: Option<f64>,
    #[arg(long)]
    tol_flow: Option<f64>,
    #[arg(long)]
    tol_self_bracket: Option<f64>,
    #[arg(long)]
    tol_slope: Option<f64>,
}

#[derive(Args)]
struct BracketArgs {
    #[command(flatten)]
    common: Common,
    /// First function: a word such as `x1 y1^-1`, or `class:k[:power[:im]]`.
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<String>,
    /// Class targets at the start of the path, one per boundary circle.
    #[arg(long = "from", allow_hyphen_values = true)]
    from: Vec<String>,
    #[arg(long = "to", allow_hyphen_values = true)]
    to: Vec<String>,
    #[arg(long)]
    steps: Option<usize>,
}

fn parse_nu(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|e| anyhow::anyhow!("bad class coordinate {x:?}: {e}")))
        .collect()
}

impl Common {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.group {
            cfg.group = v.clone();
        }
        if let Some(v) = self.genus {
            cfg.genus = v;
        }
        if let Some(v) = self.boundaries {
            cfg.boundaries = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if !self.classes.is_empty() {
            cfg.classes = self.classes.iter().map(|c| parse_nu(c)).collect::<anyhow::Result<_>>()?;
        }
        cfg.tamper_beta |= self.tamper_beta;
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.csv.is_some() {
            cfg.csv = self.csv.clone();
        }
        let t = &mut cfg.tolerances;
        for (flag, slot) in [
            (self.tol_relation, &mut t.relation),
            (self.tol_complex, &mut t.complex),
            (self.tol_diagram, &mut t.diagram),
            (self.tol_closed, &mut t.closed),
            (self.tol_invariance, &mut t.invariance),
            (self.tol_momentum, &mut t.momentum),
            (self.tol_casimir, &mut t.casimir),
            (self.tol_jacobi, &mut t.jacobi),
            (self.tol_flow, &mut t.flow),
            (self.tol_self_bracket, &mut t.self_bracket),
            (self.tol_slope, &mut t.slope),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let (cfg, mut report) = match &cli.command {
        Command::Alcove(c) => {
            let cfg = c.resolve()?;
            let r = commands::cmd_alcove(&cfg)?;
            (cfg, r)
        }
        Command::Verify(c) => {
            let cfg = c.resolve()?;
            let r = commands::cmd_verify(&cfg)?;
            (cfg, r)
        }
        Command::Cohomology(c) => {
            let cfg = c.resolve()?;
            let r = commands::cmd_cohomology(&cfg)?;
            (cfg, r)
        }
        Command::Sample(c) => {
            let cfg = c.resolve()?;
            let r = commands::cmd_sample(&cfg)?;
            (cfg, r)
        }
        Command::Bracket(b) => {
            let mut cfg = b.common.resolve()?;
            if let Some(f) = &b.f {
                cfg.bracket.f = f.clone();
            }
            if let Some(g) = &b.g {
                cfg.bracket.g = g.clone();
            }
            if !b.from.is_empty() {
                cfg.bracket.start = b.from.iter().map(|c| parse_nu(c)).collect::<anyhow::Result<_>>()?;
            }
            if !b.to.is_empty() {
                cfg.bracket.end = b.to.iter().map(|c| parse_nu(c)).collect::<anyhow::Result<_>>()?;
            }
            if let Some(s) = b.steps {
                cfg.bracket.steps = s;
            }
            let r = commands::cmd_bracket(&cfg)?;
            (cfg, r)
        }
    };
    report.finish();
    report.write(cfg.out.as_deref())?;
    if let (Some(path), Some(table)) = (&cfg.csv, report.tables.first()) {
        table.write_csv(path)?;
    }
    for line in report.summary_lines() {
        eprintln!("{line}");
    }
    Ok(report.summary.all_passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
