use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dicke_cli::config::ResolvedConfig;
use dicke_cli::{commands, selftest, with_threads, CliError};
use dicke_core::phases::Mode;

#[derive(Parser, Debug)]
#[command(name = "dicke", version, about = "Optomechanical Dicke model: evolutions, boundaries and phase sweeps")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.dir)
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Classification mode for sweeps
    #[arg(long, global = true)]
    mode: Option<Mode>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one trajectory and summarise its late-time behaviour
    Evolve,
    /// Trace the critical-coupling curves
    Boundary,
    /// Label every cell of an (omega, lambda) grid
    Sweep,
    /// Run the invariant suite
    Selftest,
}

fn load(args: &Args) -> Result<ResolvedConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ResolvedConfig::load(path)?,
        None if matches!(args.command, Command::Selftest) => {
            dicke_cli::RunConfig { params: Default::default(), ..Default::default() }.resolve("selftest")?
        }
        None => return Err(CliError::Config("--config is required".into())),
    };
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    if let Some(mode) = args.mode {
        cfg.sweep.mode = mode;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = load(args)?;
    match args.command {
        Command::Evolve => {
            let (s, files) = commands::evolve(&cfg)?;
            println!("verdict: {:?}", s.cycle.verdict);
            match s.relaxation_time {
                Some(t) => println!("relaxation_time: {t:.1} us"),
                None => println!("relaxation_time: none"),
            }
            report(&files);
        }
        Command::Boundary => {
            let (out, files) = commands::boundary(&cfg)?;
            for tr in out.traces.iter().chain(&out.reference) {
                println!("{}: {} points in {} segments", tr.kind.code(), tr.points().count(), tr.segments.len());
            }
            report(&files);
        }
        Command::Sweep => {
            let (out, files) = with_threads(args.threads, || commands::sweep(&cfg))??;
            for (code, n) in &out.summary.counts {
                println!("{code:>24} {n}");
            }
            println!("undecided cells: {}", out.summary.undecided);
            println!("2SRA area: {} MHz^2", out.summary.two_sra_area);
            report(&files);
        }
        Command::Selftest => {
            let rep = with_threads(args.threads, || selftest(&cfg))?;
            for c in &rep.checks {
                println!("{c}");
            }
            if !rep.passed() {
                let n = rep.checks.iter().filter(|c| !c.passed).count();
                return Err(CliError::Selftest(format!("{n} check(s) failed")));
            }
        }
    }
    Ok(())
}

fn report(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
