use clap::{Args, Parser, Subcommand};
use psieve::cli::{self, ExitStatus, Options, Outcome, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Dyadic interval sieve for inhomogeneous Diophantine approximation.
#[derive(Parser)]
#[command(name = "psieve", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List the built-in function systems.
    Presets {
        /// Print one preset's functions and notes.
        #[arg(long, value_name = "NAME")]
        show: Option<String>,
    },
    /// Check the growth and sum conditions.
    Check(Common),
    /// Run the sieve and write the witness.
    Construct(Common),
    /// Verify a witness at every x of the range.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        witness: PathBuf,
    },
    /// Exact counting bounds and finite badness scans.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "NU")]
        nu_max: Option<u32>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (default: config `output.dir`, else ./psieve-out).
    #[arg(long, value_name = "DIR", env = "PSIEVE_OUT")]
    out: Option<PathBuf>,
    /// Construct even if the admissibility check fails.
    #[arg(long)]
    force: bool,
    /// Keep going after a halving violation.
    #[arg(long)]
    best_effort: bool,
    /// Use the homogeneous distance in the second filter.
    #[arg(long)]
    filter_homogeneous: bool,
    #[arg(long, value_name = "BITS")]
    precision_cap: Option<u32>,
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, Options), Outcome> {
        let cfg = RunConfig::load(&self.config).map_err(|e| Outcome {
            status: ExitStatus::InputError,
            files: vec![],
            lines: vec![e.to_string()],
        })?;
        let opts = Options {
            out_dir: self.out.clone(),
            force: self.force,
            best_effort: self.best_effort,
            filter_homogeneous: self.filter_homogeneous,
            precision_cap: self.precision_cap,
            threads: self.threads,
            nu_max: None,
        };
        Ok((cfg, opts))
    }
}

fn run(cmd: Cmd) -> Outcome {
    let with = |c: &Common, f: &dyn Fn(&RunConfig, &Options) -> Outcome| match c.load() {
        Ok((cfg, opts)) => f(&cfg, &opts),
        Err(o) => o,
    };
    match cmd {
        Cmd::Presets { show } => cli::presets(show.as_deref()),
        Cmd::Check(c) => with(&c, &cli::check),
        Cmd::Construct(c) => with(&c, &cli::construct),
        Cmd::Verify { common, witness } => with(&common, &|cfg, opts| cli::verify(cfg, &witness, opts)),
        Cmd::Oracle { common, nu_max } => with(&common, &|cfg, opts| {
            let opts = Options { nu_max, ..opts.clone() };
            cli::oracle(cfg, &opts)
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = run(cli.cmd);
    for l in &out.lines {
        if out.status == ExitStatus::InputError {
            eprintln!("psieve: {l}");
        } else {
            println!("{l}");
        }
    }
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    ExitCode::from(out.status.code() as u8)
}
