use clap::{Parser, Subcommand, ValueEnum};
use msk_cli::{CliError, CliResult};
use msk_core::fractal::{FractalFormat, FractalSet};
use msk_core::lp::Sense;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exact-arithmetic multistochastic Kantorovich toolbox: XOR transport
/// plans, dual potentials, rational linear programs, fractal exports.
///
/// All reported numbers are exact "p/q" rationals; verification commands
/// emit deterministic JSON reports and exit nonzero when an asserted check
/// fails. The memo table budget is bounded by the MSK_MEMO_MAX_ENTRIES
/// environment variable.
#[derive(Parser)]
#[command(name = "msk", version, max_term_width = 100)]
struct Cli {
    /// Include wall-clock timing in reports (off by default so identical
    /// inputs produce byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The recurrence-defined dual potential f.
    Potential {
        #[command(subcommand)]
        cmd: PotentialCmd,
    },
    /// The cumulative XOR integral I(a,b).
    Integral {
        #[command(subcommand)]
        cmd: IntegralCmd,
    },
    /// Multistochastic linear programs from JSON problem files.
    Lp {
        #[command(subcommand)]
        cmd: LpCmd,
    },
    /// Worked examples and counterexamples.
    Examples {
        #[command(subcommand)]
        cmd: ExamplesCmd,
    },
    /// Fractal point-set exports.
    Fractal {
        #[command(subcommand)]
        cmd: FractalCmd,
    },
    /// Cyclical-monotonicity checks.
    Monotone {
        #[command(subcommand)]
        cmd: MonotoneCmd,
    },
    /// Run every potential and integral verification sweep.
    VerifyAll {
        /// Sweep level: bound and identities at n, integral checks capped
        /// at level 6, Lipschitz pairs at min(n, 3).
        #[arg(long, default_value_t = 4)]
        level: u32,
        /// Corrupt a base value of the recurrence to prove the harness
        /// catches it (the run then fails, naming the broken identity).
        #[arg(long)]
        inject_fault: bool,
    },
    /// Primal optimum, plan cost, dual objectives and refinement gaps.
    ReportDuality {
        /// Grid level for the LP part (8^n variables; levels above 2 are
        /// slow and their equality is recorded, not asserted).
        #[arg(long, default_value_t = 2)]
        level: u32,
    },
    /// Solve the uniform problem at a level and compare with the XOR plan.
    XorOptimality {
        #[arg(long, default_value_t = 2)]
        level: u32,
        #[arg(long, value_enum, default_value_t = SenseArg::Min)]
        sense: SenseArg,
    },
}

#[derive(Subcommand)]
enum PotentialCmd {
    /// Print f(a,b), or f_C(a/2^n, b/2^n) with --level n.
    Eval {
        a: u64,
        b: u64,
        #[arg(long)]
        level: Option<u32>,
    },
    /// Bound sweep, identities, Lipschitz increments; JSON report.
    Verify {
        #[arg(long, default_value_t = 4)]
        level: u32,
    },
}

#[derive(Subcommand)]
enum IntegralCmd {
    /// Print I(a,b) for dyadic a, b in [0,1] (accepts "m/2^n" or "p/q").
    Eval { a: String, b: String },
    /// Oracle equivalence and property sweep; JSON report.
    Verify {
        #[arg(long, default_value_t = 6)]
        level: u32,
    },
}

#[derive(Subcommand)]
enum LpCmd {
    /// Solve a problem file exactly, with dual potentials and certificates.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Consistency check plus phase-one feasibility with Farkas output.
    Feasibility {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExamplesCmd {
    /// The 8x8x8 grid where the XOR plan stops being optimal.
    Epsilon {
        /// Rational epsilon in (0, 1/8), e.g. 1/128.
        #[arg(long)]
        eps: String,
    },
    /// Both optimization senses on the {0,1}^3 cube.
    BabyCube,
    /// Random sorted 4-grids: LP minimum vs plan cost and CDF dominance.
    FourPoint {
        #[arg(long, default_value_t = 100)]
        trials: u32,
        /// Random feasible measures checked per grid.
        #[arg(long, default_value_t = 20)]
        measures: u32,
        /// Seed for the grid and objective draws (mandatory: reports are
        /// reproducible by construction).
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum FractalCmd {
    /// Write a point-set file.
    Export {
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum)]
        what: WhatArg,
        #[arg(long, value_enum)]
        format: FormatArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum MonotoneCmd {
    /// Competitor search for the uniform measure on a CSV point set.
    Check {
        /// CSV file with "x,y,z" rational rows.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, value_enum, default_value_t = SenseArg::Max)]
        sense: SenseArg,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum SenseArg {
    Min,
    Max,
}

impl From<SenseArg> for Sense {
    fn from(s: SenseArg) -> Sense {
        match s {
            SenseArg::Min => Sense::Min,
            SenseArg::Max => Sense::Max,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    TetrahedronMin,
    TetrahedronMax,
    Triangle,
}

impl From<WhatArg> for FractalSet {
    fn from(w: WhatArg) -> FractalSet {
        match w {
            WhatArg::TetrahedronMin => FractalSet::TetrahedronMin,
            WhatArg::TetrahedronMax => FractalSet::TetrahedronMax,
            WhatArg::Triangle => FractalSet::Triangle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Ply,
    Pgm,
}

impl From<FormatArg> for FractalFormat {
    fn from(f: FormatArg) -> FractalFormat {
        match f {
            FormatArg::Csv => FractalFormat::Csv,
            FormatArg::Ply => FractalFormat::Ply,
            FormatArg::Pgm => FractalFormat::Pgm,
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let timing = cli.timing;
    match cli.command {
        Command::Potential { cmd } => match cmd {
            PotentialCmd::Eval { a, b, level } => msk_cli::potential_eval(a, b, level),
            PotentialCmd::Verify { level } => msk_cli::potential_verify(level, timing),
        },
        Command::Integral { cmd } => match cmd {
            IntegralCmd::Eval { a, b } => msk_cli::integral_eval(&a, &b),
            IntegralCmd::Verify { level } => msk_cli::integral_verify(level, timing),
        },
        Command::Lp { cmd } => match cmd {
            LpCmd::Solve { input, output } => msk_cli::lp_solve(&input, output.as_deref()),
            LpCmd::Feasibility { input, output } => {
                msk_cli::lp_feasibility(&input, output.as_deref())
            }
        },
        Command::Examples { cmd } => match cmd {
            ExamplesCmd::Epsilon { eps } => msk_cli::examples_epsilon(&eps, timing),
            ExamplesCmd::BabyCube => msk_cli::examples_baby_cube(timing),
            ExamplesCmd::FourPoint {
                trials,
                measures,
                seed,
            } => msk_cli::examples_four_point(trials, measures, seed, timing),
        },
        Command::Fractal { cmd } => match cmd {
            FractalCmd::Export {
                level,
                what,
                format,
                out,
            } => msk_cli::fractal_export(level, what.into(), format.into(), &out),
        },
        Command::Monotone { cmd } => match cmd {
            MonotoneCmd::Check { points, sense } => {
                msk_cli::monotone_check(&points, sense.into())
            }
        },
        Command::VerifyAll {
            level,
            inject_fault,
        } => msk_cli::verify_all(level, inject_fault, timing),
        Command::ReportDuality { level } => msk_cli::report_duality(level, timing),
        Command::XorOptimality { level, sense } => {
            msk_cli::xor_optimality(level, sense.into(), timing)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            print!("{}", output.stdout);
            if output.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}
