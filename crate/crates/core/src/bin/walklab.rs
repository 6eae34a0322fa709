use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use walklab::experiments::grammar::{parse_group_spec, parse_measure_source, parse_word};
use walklab::experiments::{preset, resolve_out_dir, run_experiment, ExperimentConfig, Format, Mode, PRESETS};
use walklab::magnus;
use walklab::measures::{FiniteMeasure, Rational, Weight, DEFAULT_SUPPORT_CAP};
use walklab::walk::{entropy_ladder, mc_escape, range_rate, rigorous_escape, EscapeEstimate};
use walklab::{Error, Result};

#[derive(Parser)]
#[command(name = "walklab", version, about = "Random walks on groups: entropy ladders, escape probabilities, Magnus embeddings")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every Monte Carlo step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exact rational arithmetic (default).
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Floating-point arithmetic.
    #[arg(long, global = true)]
    float: bool,
    /// Support cap for convolution powers.
    #[arg(long, global = true)]
    cap: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy ladder H(mu^n), n = 0..=nmax.
    Ladder {
        group: String,
        /// Measure literal or family reference.
        measure: String,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
    },
    /// Escape probability estimate.
    Escape {
        group: String,
        measure: String,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Path length for the range rate.
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_terms: usize,
    },
    /// Magnus embedding of free solvable groups.
    Magnus {
        #[command(subcommand)]
        command: MagnusCommand,
    },
    /// Run packaged or file-based experiments.
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
    /// List packaged experiments.
    List,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Mc,
    Range,
}

#[derive(Subcommand)]
enum MagnusCommand {
    /// Image of a word in S(d, m).
    Embed {
        word: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
    },
    /// Whether a word is trivial in S(d, m).
    CheckIdentity {
        word: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
    },
    /// Homomorphism, kernel and tower checks (experiment E7).
    Suite,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Run an experiment by id (E1..E7) or from a TOML file.
    Run { target: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn mode(g: &Global) -> Option<Mode> {
    if g.float {
        Some(Mode::Float)
    } else if g.exact {
        Some(Mode::Exact)
    } else {
        None
    }
}

/// Returns whether every declared expectation passed.
fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    let float = mode(g) == Some(Mode::Float);
    match &cli.command {
        Command::Ladder { group, measure, nmax } => {
            if float {
                ladder::<f64>(g, group, measure, *nmax)
            } else {
                ladder::<Rational>(g, group, measure, *nmax)
            }
        }
        Command::Escape { group, measure, method, horizon, samples, n, tol, max_terms } => {
            let spec = parse_group_spec(group)?;
            let est = if float {
                let mu: FiniteMeasure<f64> = parse_measure_source(Some(&spec), measure)?;
                escape(g, &mu, *method, *horizon, *samples, *n, *tol, *max_terms)?
            } else {
                let mu: FiniteMeasure<Rational> = parse_measure_source(Some(&spec), measure)?;
                escape(g, &mu, *method, *horizon, *samples, *n, *tol, *max_terms)?
            };
            let text = match g.format {
                Some(OutFormat::Csv) => format!(
                    "method,value,lo,hi,horizon,n,samples,seed\n{},{},{},{},{},{},{},{}\n",
                    est.method.as_str(),
                    est.value,
                    est.lo,
                    est.hi,
                    opt(est.horizon),
                    opt(est.n),
                    opt(est.samples),
                    opt(est.seed)
                ),
                _ => serde_json::to_string_pretty(&est).expect("plain data") + "\n",
            };
            emit(g, "escape", &text)?;
            Ok(true)
        }
        Command::Magnus { command } => match command {
            MagnusCommand::Embed { word, d, m } => {
                println!("{}", magnus::magnus_embed(&parse_word(word)?, *d, *m)?);
                Ok(true)
            }
            MagnusCommand::CheckIdentity { word, d, m } => {
                println!("{}", magnus::is_identity_in_sdm(&parse_word(word)?, *d, *m)?);
                Ok(true)
            }
            MagnusCommand::Suite => experiment(g, preset("E7")?),
        },
        Command::Experiment { command: ExperimentCommand::Run { target } } => {
            let cfg = if Path::new(target).is_file() {
                ExperimentConfig::from_toml(&std::fs::read_to_string(target)?)?
            } else {
                preset(target)?
            };
            experiment(g, cfg)
        }
        Command::List => {
            for (id, text) in PRESETS {
                let cfg = ExperimentConfig::from_toml(text)?;
                println!("{id}\t{}", cfg.title);
            }
            Ok(true)
        }
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Prints `text` and, with `--out`, also writes it to `<out>/<stem>.<ext>`.
fn emit(g: &Global, stem: &str, text: &str) -> Result<()> {
    print!("{text}");
    if let Some(dir) = &g.out {
        std::fs::create_dir_all(dir)?;
        let ext = if g.format == Some(OutFormat::Csv) { "csv" } else { "json" };
        std::fs::write(dir.join(format!("{stem}.{ext}")), text)?;
    }
    Ok(())
}

fn ladder<W: Weight>(g: &Global, group: &str, measure: &str, nmax: usize) -> Result<bool> {
    let spec = parse_group_spec(group)?;
    let mu: FiniteMeasure<W> = parse_measure_source(Some(&spec), measure)?;
    let ladder = entropy_ladder(&mu, nmax, g.cap.unwrap_or(DEFAULT_SUPPORT_CAP))?;
    let inv = ladder.check_invariants()?;
    let text = match g.format {
        Some(OutFormat::Csv) => ladder.to_csv(),
        _ => {
            serde_json::to_string_pretty(&serde_json::json!({
                "group": spec.to_string(),
                "measure": walklab::walk::describe(&mu),
                "exact": W::EXACT,
                "rows": ladder.rows(),
                "invariants": inv,
            }))
            .expect("plain data")
                + "\n"
        }
    };
    emit(g, "ladder", &text)?;
    Ok(inv.all_hold())
}

#[allow(clippy::too_many_arguments)]
fn escape<W: Weight>(
    g: &Global,
    mu: &FiniteMeasure<W>,
    method: Method,
    horizon: usize,
    samples: usize,
    n: usize,
    tol: f64,
    max_terms: usize,
) -> Result<EscapeEstimate> {
    let seed = || g.seed.ok_or_else(|| Error::InvalidParameter("Monte Carlo methods need --seed".into()));
    match method {
        Method::Exact => rigorous_escape(mu, tol, max_terms),
        Method::Mc => mc_escape(mu, horizon, samples, seed()?),
        Method::Range => range_rate(mu, n, samples, seed()?),
    }
}

fn experiment(g: &Global, mut cfg: ExperimentConfig) -> Result<bool> {
    if let Some(s) = g.seed {
        cfg.seed = Some(s);
    }
    if let Some(m) = mode(g) {
        cfg.mode = m;
    }
    if let (Some(c), Some(l)) = (g.cap, cfg.ladder.as_mut()) {
        l.cap = Some(c);
    }
    let report = run_experiment(&cfg)?;
    let formats = match g.format {
        Some(OutFormat::Json) => vec![Format::Json],
        Some(OutFormat::Csv) => vec![Format::Csv],
        None => cfg.output.as_ref().map(|o| o.formats.clone()).unwrap_or_else(|| vec![Format::Json, Format::Csv]),
    };
    let dir = resolve_out_dir(g.out.as_deref(), &cfg);
    let written = report.write(&dir, &formats)?;
    println!("{} {}: {}", report.id, report.title, if report.passed { "PASS" } else { "FAIL" });
    for e in &report.expectations {
        println!("  [{}] {}: {}", if e.passed { "pass" } else { "FAIL" }, e.name, e.detail);
    }
    println!("  {} files in {} ({:.1} s)", written.len(), dir.display(), report.wall_clock_seconds);
    Ok(report.passed)
}
