//! Binary shell: flag parsing and I/O routing for the command library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entlife_cli::{
    build_pair, decompose_report, ea_check_report, examples_report, lifetime_report,
    parse_state_choice, robust_state_report, trace_csv, PairSpec, RunError, StateChoice,
};

#[derive(Parser)]
#[command(
    name = "entlife",
    version,
    about = "Entanglement lifetimes of two qubits under local noise",
    long_about = "Decomposes qubit channels into scaled unital form, decides whether a \
                  pair of local noise channels eventually destroys all entanglement, and \
                  tracks how long given two-qubit states stay entangled."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct FamilyArgs {
    /// Noise family on the first qubit: gad, inftemp-ad or depolarizing
    #[arg(long)]
    family: String,
    /// Damping or depolarizing rate of the first family
    #[arg(long)]
    gamma: f64,
    /// Excited-state weight for gad, in (0,1)
    #[arg(long)]
    w: Option<f64>,
    /// Family on the second qubit; defaults to the first
    #[arg(long)]
    family2: Option<String>,
    /// Rate of the second family; defaults to --gamma
    #[arg(long)]
    gamma2: Option<f64>,
    /// Excited-state weight of the second family; defaults to --w
    #[arg(long)]
    w2: Option<f64>,
}

impl FamilyArgs {
    fn spec(&self) -> PairSpec<'_> {
        PairSpec {
            family: &self.family,
            gamma: self.gamma,
            w: self.w,
            family2: self.family2.as_deref(),
            gamma2: self.gamma2,
            w2: self.w2,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Decompose one channel into scaled unital form
    Decompose {
        /// Channel description, JSON with "lambda"/"t" or "kraus"
        channel: PathBuf,
        /// Write the result here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether two channels annihilate all entanglement
    EaCheck {
        /// First channel JSON
        left: PathBuf,
        /// Second channel JSON
        right: PathBuf,
        /// Pure states drawn for the sampled cross-check
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Seed for the sampled cross-check
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entanglement lifetime of one state under a pair of noise families
    Lifetime {
        #[command(flatten)]
        fams: FamilyArgs,
        /// Initial state: bell, robust, interp or file:PATH
        #[arg(long)]
        state: String,
        /// Preparation time for --state interp
        #[arg(long)]
        t0: Option<f64>,
        /// Search horizon; defaults to when both channels break entanglement
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The state that stays entangled longest under a pair of families
    RobustState {
        #[command(flatten)]
        fams: FamilyArgs,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of negativity against time for chosen initial states
    Trace {
        #[command(flatten)]
        fams: FamilyArgs,
        /// Largest time in the grid
        #[arg(long)]
        tmax: f64,
        /// Number of grid rows, endpoints included
        #[arg(long, default_value_t = 201)]
        steps: usize,
        /// Columns joined with '+': bell, robust, interp-envelope
        #[arg(long)]
        state: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worked examples: closed forms next to the numeric pipeline
    Examples,
}

fn read_file(path: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|e| {
        RunError::Domain(entlife::Error::Parse(format!(
            "cannot read {}: {e}",
            path.display()
        )))
    })
}

fn run(cmd: Cmd) -> Result<(String, Option<PathBuf>), RunError> {
    match cmd {
        Cmd::Decompose { channel, out } => {
            let text = read_file(&channel)?;
            Ok((decompose_report(&text)?, out))
        }
        Cmd::EaCheck {
            left,
            right,
            samples,
            seed,
            out,
        } => {
            let lt = read_file(&left)?;
            let rt = read_file(&right)?;
            Ok((ea_check_report(&lt, &rt, samples, seed)?, out))
        }
        Cmd::Lifetime {
            fams,
            state,
            t0,
            tmax,
            out,
        } => {
            let (l, r) = build_pair(&fams.spec())?;
            let file_text = match state.strip_prefix("file:") {
                Some(path) => Some(read_file(&PathBuf::from(path))?),
                None => None,
            };
            let choice: StateChoice = parse_state_choice(&state, t0, file_text.as_deref())?;
            Ok((lifetime_report(&l, &r, &choice, tmax)?, out))
        }
        Cmd::RobustState { fams, tmax, out } => {
            let (l, r) = build_pair(&fams.spec())?;
            Ok((robust_state_report(&l, &r, tmax)?, out))
        }
        Cmd::Trace {
            fams,
            tmax,
            steps,
            state,
            out,
        } => {
            let (l, r) = build_pair(&fams.spec())?;
            Ok((trace_csv(&l, &r, &state, tmax, steps)?, out))
        }
        Cmd::Examples => Ok((examples_report()?, None)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok((text, None)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok((text, Some(path))) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(RunError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
