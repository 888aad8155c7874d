use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use psqm::scattering::{Mode, Sign};
use psqm_cli::config::{HeightSpec, PotentialKind, SpinSpec};
use psqm_cli::{run, stdout_text, write_outputs, CliError, Command, Format, RunConfig};

/// Phase-space solvers for a particle with a binary internal degree of
/// freedom. Exit status: 0 when every identity check passes, 1 when one
/// fails, 2 on configuration or solver errors.
#[derive(Debug, Parser)]
#[command(name = "psqm", version)]
struct Cli {
    /// command to run (may instead come from --config)
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON run configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,

    /// energy
    #[arg(long = "E", allow_hyphen_values = true)]
    energy: Option<f64>,
    /// mass
    #[arg(long = "M", allow_hyphen_values = true)]
    mass: Option<f64>,
    /// speed of light
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// charge
    #[arg(long, allow_hyphen_values = true)]
    q: Option<f64>,
    /// step height, or start:stop:step for klein-scan
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<HeightSpec>,
    /// momentum of a free eigenstate
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// up, down, or four mixture coefficients a,b,c,d
    #[arg(long)]
    spin: Option<SpinSpec>,
    /// particle or antiparticle
    #[arg(long, value_parser = parse_sign)]
    sign: Option<Sign>,
    /// nonrel or dirac
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    #[arg(long, allow_hyphen_values = true)]
    hbar: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    n_x: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    p_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p_max: Option<f64>,
    #[arg(long)]
    n_p: Option<usize>,

    /// packet centre
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// packet mean momentum
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<f64>,
    /// packet width in x
    #[arg(long, allow_hyphen_values = true)]
    width: Option<f64>,
    #[arg(long, value_enum)]
    potential: Option<PotentialKind>,
    /// height, slope or spring constant of the potential
    #[arg(long, allow_hyphen_values = true)]
    strength: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    /// keep every n-th step
    #[arg(long)]
    sample_every: Option<usize>,

    /// run a single acceptance criterion (verify)
    #[arg(long)]
    criterion: Option<u8>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// directory for tables and report.json; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "particle" | "+" => Ok(Sign::Particle),
        "antiparticle" | "-" => Ok(Sign::Antiparticle),
        _ => Err(format!("expected particle or antiparticle, got `{s}`")),
    }
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "nonrel" => Ok(Mode::Nonrel),
        "dirac" => Ok(Mode::Dirac),
        _ => Err(format!("expected nonrel or dirac, got `{s}`")),
    }
}

impl Cli {
    fn flags(&self) -> RunConfig {
        RunConfig {
            command: self.command,
            energy: self.energy,
            mass: self.mass,
            c: self.c,
            q: self.q,
            v0: self.v0,
            p: self.p,
            spin: self.spin,
            sign: self.sign,
            mode: self.mode,
            hbar: self.hbar,
            x_min: self.x_min,
            x_max: self.x_max,
            n_x: self.n_x,
            p_min: self.p_min,
            p_max: self.p_max,
            n_p: self.n_p,
            x0: self.x0,
            p0: self.p0,
            width: self.width,
            potential: self.potential,
            strength: self.strength,
            t_end: self.t_end,
            dt: self.dt,
            sample_every: self.sample_every,
            regularization: None,
            criterion: self.criterion,
            seed: self.seed,
            format: self.format,
            out: self.out.clone(),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("PSQM_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("PSQM_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main_inner() -> Result<bool, CliError> {
    let cli = Cli::parse();
    configure_threads()?;
    let base = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let cfg = base.overlay(&cli.flags());
    let start = Instant::now();
    let report = run(&cfg)?;
    let format = cfg.format.unwrap_or_default();
    match &cfg.out {
        Some(dir) => write_outputs(&report, dir, format)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(stdout_text(&report, format).as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    eprint!("{}", report.summary());
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    Ok(report.pass)
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("psqm: {e}");
            ExitCode::from(2)
        }
    }
}
