use bsweak::commands::{self, Command, Exit, LemmaTable};
use bsweak::config::{ConfigError, Format, PotentialSpec, RunConfig, SchemeName};
use bsweak::output;
use clap::{Args, Parser, Subcommand};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Weak-coupling bound states of 2-D Schrödinger operators via the
/// Birman–Schwinger principle.
#[derive(Parser, Debug)]
#[command(name = "bsweak", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Integrability hypotheses (L1, ln_s, roll, simon_s, simon_eta).
    CheckAssumptions,
    /// Root of the Birman–Schwinger determinant at each ε.
    Solve,
    /// ε ln(-λ_ε) against its limit over a list of ε.
    Sweep,
    /// Hilbert–Schmidt norm of Q(α) with the autocorrelation oracle.
    HsNorm,
    /// Birman–Schwinger eigenvalues against finite differences.
    OracleCompare,
    /// Kernel inequality constants or M(α) rate columns.
    LemmaCheck {
        #[arg(long, value_enum, default_value_t = LemmaTable::Ineq)]
        table: LemmaTable,
    },
    /// Full acceptance suite.
    VerifyPaper,
}

#[derive(Args, Debug)]
struct Flags {
    /// JSON run config, or the sidecar of an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in name, or a JSON potential file.
    #[arg(long, global = true)]
    potential: Option<String>,
    /// Potential parameters as `key=value,...`.
    #[arg(long, global = true)]
    params: Option<String>,
    #[arg(long, global = true, value_enum)]
    grid: Option<SchemeName>,
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    s: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',')]
    eta: Option<Vec<f64>>,
    /// Conditions for check-assumptions.
    #[arg(long, global = true, value_delimiter = ',')]
    conditions: Option<Vec<String>>,
    /// Eigenvalues reported by hs-norm.
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Halve resolutions and relax tolerances by 2.
    #[arg(long, global = true)]
    quick: bool,
}

fn parse_params(text: &str) -> Result<BTreeMap<String, f64>, ConfigError> {
    let mut out = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| ConfigError::new("params", format!("expected key=value, got `{item}`")))?;
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| ConfigError::new(format!("params.{}", k.trim()), format!("not a number: `{v}`")))?;
        out.insert(k.trim().to_string(), x);
    }
    Ok(out)
}

fn build_config(cmd: Command, f: &Flags) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &f.config {
        Some(p) => RunConfig::from_path(p)?,
        None => {
            let spec = match &f.potential {
                Some(_) => PotentialSpec::default(),
                None if matches!(cmd, Command::VerifyPaper | Command::LemmaCheck(LemmaTable::Ineq)) => {
                    PotentialSpec::named("disk", &[])
                }
                None => return Err(ConfigError::new("potential", "required (--potential or --config)")),
            };
            RunConfig::new(spec)
        }
    };
    if let Some(p) = &f.potential {
        let path = PathBuf::from(p);
        cfg.potential = if p.ends_with(".json") || path.is_file() {
            PotentialSpec {
                file: Some(path),
                ..PotentialSpec::default()
            }
        } else {
            PotentialSpec {
                name: Some(p.clone()),
                ..PotentialSpec::default()
            }
        };
    }
    if let Some(text) = &f.params {
        cfg.potential.params = parse_params(text)?;
    }
    if let Some(g) = f.grid {
        cfg.grid.scheme = Some(g);
    }
    if let Some(r) = f.resolution {
        cfg.grid.resolution = r;
    }
    macro_rules! take {
        ($field:ident) => {
            if let Some(x) = &f.$field {
                cfg.$field = Some(x.clone());
            }
        };
    }
    take!(eps);
    take!(alpha);
    take!(s);
    take!(eta);
    take!(conditions);
    if let Some(k) = f.k {
        cfg.k = Some(k);
    }
    if let Some(seed) = f.seed {
        cfg.seed = seed;
    }
    if f.quick {
        cfg.quick = true;
    }
    if let Some(out) = &f.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(fmt) = f.format {
        cfg.output.format = fmt;
    }
    cfg.validate()?;
    Ok(commands::resolve(cmd, cfg))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { Exit::Usage as u8 } else { 0 });
        }
    };
    let cmd = match cli.command {
        Sub::CheckAssumptions => Command::CheckAssumptions,
        Sub::Solve => Command::Solve,
        Sub::Sweep => Command::Sweep,
        Sub::HsNorm => Command::HsNorm,
        Sub::OracleCompare => Command::OracleCompare,
        Sub::LemmaCheck { table } => Command::LemmaCheck(table),
        Sub::VerifyPaper => Command::VerifyPaper,
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.flags.jobs).build_global() {
        eprintln!("bsweak: thread pool: {e}");
    }
    let cfg = match build_config(cmd, &cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bsweak: config error: {e}");
            return ExitCode::from(Exit::Usage as u8);
        }
    };
    let t0 = Instant::now();
    let outcome = match commands::run(cmd, &cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("bsweak: {e}");
            return ExitCode::from(e.exit() as u8);
        }
    };
    let seconds = t0.elapsed().as_secs_f64();
    if cmd == Command::VerifyPaper {
        for row in &outcome.table.rows {
            let cells: Vec<String> = row.iter().map(|c| c.text()).collect();
            println!("criterion {:<3} {:<34} {}  {}", cells[0], cells[1], cells[2].to_uppercase(), cells[3]);
        }
        if cfg.output.path.is_none() {
            return ExitCode::from(outcome.exit as u8);
        }
    }
    if let Err(e) = output::emit(cmd, &cfg, &outcome, seconds) {
        eprintln!("bsweak: writing output: {e}");
        return ExitCode::from(Exit::Usage as u8);
    }
    ExitCode::from(outcome.exit as u8)
}
