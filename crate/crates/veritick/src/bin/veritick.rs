//! Command line for the constant-time hardware verifier.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use veritick::oracle::Property;
use veritick::pipeline::{
    run_pipeline, EmitStage, Mode, ModeOutput, RunConfig, SolverChoice,
};

#[derive(Parser)]
#[command(
    name = "veritick",
    version,
    about = "Clock-precise constant-time verification for synchronous Verilog designs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Verilog source files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Top module (defaults to the first module of the first file).
    #[arg(long)]
    top: Option<String>,
    /// Sidecar annotation file; replaces source-comment annotations.
    #[arg(long)]
    annot: Option<PathBuf>,
    /// Write the JSON report (or JSON trace) to this path.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Seed for randomized components.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Ct,
    Liveq,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Translated,
    Instrumented,
    Product,
}

#[derive(Subcommand)]
enum Command {
    /// Prove (or fail to prove) constant-time execution.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// builtin, external (use VERITICK_SMT_SOLVER), or external:<cmd>.
        #[arg(long, default_value = "builtin")]
        solver: String,
        /// User hint file, one `live x = live y` per line.
        #[arg(long)]
        hints: Option<PathBuf>,
        /// Run the bounded refutation search when the proof fails.
        #[arg(long)]
        bmc_depth: Option<u32>,
    },
    /// Run the cycle-accurate interpreter and dump the trace.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Input schedule in JSON.
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long, default_value_t = 6)]
        cycles: u32,
        /// Cycle at which source liveness is issued.
        #[arg(long)]
        issue: Option<u32>,
        /// Dump the trace as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Brute-force ground truth on a small instance.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "ct")]
        property: PropertyArg,
        #[arg(long, default_value_t = 1)]
        width: u8,
        #[arg(long, default_value_t = 6)]
        cycles: u32,
        #[arg(long, default_value_t = 1 << 14)]
        max_pairs: u64,
    },
    /// Race-freedom gate: static checks plus a randomized-schedule differ.
    Races {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Bounded counterexample search for liveness divergence.
    Bmc {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 6)]
        bmc_depth: u32,
        #[arg(long, default_value_t = 1)]
        width: u8,
    },
    /// Emit the intermediate representation.
    EmitIr {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "translated")]
        stage: StageArg,
    },
    /// Emit the Horn system as SMT-LIB text.
    EmitVc {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn parse_solver(s: &str) -> Result<SolverChoice, String> {
    match s {
        "builtin" => Ok(SolverChoice::Builtin),
        "external" => Ok(SolverChoice::External(None)),
        _ => match s.strip_prefix("external:") {
            Some(cmd) if !cmd.is_empty() => Ok(SolverChoice::External(Some(cmd.to_string()))),
            _ => Err(format!(
                "unknown solver `{s}`; use builtin, external, or external:<command>"
            )),
        },
    }
}

fn build_config(cli: Command) -> Result<(RunConfig, CommonArgs, bool), String> {
    let mut cfg = RunConfig::default();
    let (common, csv) = match cli {
        Command::Check {
            common,
            solver,
            hints,
            bmc_depth,
        } => {
            cfg.mode = Mode::Check;
            cfg.solver = parse_solver(&solver)?;
            cfg.hints_file = hints;
            cfg.bmc_depth = bmc_depth;
            (common, false)
        }
        Command::Simulate {
            common,
            inputs,
            cycles,
            issue,
            csv,
        } => {
            cfg.mode = Mode::Simulate;
            cfg.inputs_file = inputs;
            cfg.sim_cycles = cycles;
            cfg.sim_issue = issue;
            (common, csv)
        }
        Command::Oracle {
            common,
            property,
            width,
            cycles,
            max_pairs,
        } => {
            cfg.mode = Mode::Oracle;
            cfg.oracle_property = match property {
                PropertyArg::Ct => Property::ConstantTime,
                PropertyArg::Liveq => Property::LivenessEquivalent,
            };
            cfg.oracle_width = width;
            cfg.oracle_cycles = cycles;
            cfg.oracle_max_pairs = max_pairs;
            (common, false)
        }
        Command::Races { common, trials } => {
            cfg.mode = Mode::Races;
            cfg.trials = trials;
            (common, false)
        }
        Command::Bmc {
            common,
            bmc_depth,
            width,
        } => {
            cfg.mode = Mode::Bmc;
            cfg.bmc_depth = Some(bmc_depth);
            cfg.oracle_width = width;
            (common, false)
        }
        Command::EmitIr { common, stage } => {
            cfg.mode = Mode::EmitIr;
            cfg.emit_stage = match stage {
                StageArg::Translated => EmitStage::Translated,
                StageArg::Instrumented => EmitStage::Instrumented,
                StageArg::Product => EmitStage::Product,
            };
            (common, false)
        }
        Command::EmitVc { common } => {
            cfg.mode = Mode::EmitVc;
            (common, false)
        }
    };
    cfg.files = common.files.clone();
    cfg.top = common.top.clone();
    cfg.annot_file = common.annot.clone();
    cfg.seed = common.seed;
    Ok((cfg, common, csv))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, common, csv) = match build_config(cli.command) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    };
    match run_pipeline(&cfg) {
        Ok((output, code)) => {
            let rendered = match &output {
                ModeOutput::Report(report) => report.to_json(),
                ModeOutput::Artifact(text) => text.clone(),
                ModeOutput::Trace(trace) => {
                    if csv {
                        trace.to_csv()
                    } else {
                        serde_json::to_string_pretty(trace).expect("trace serializes")
                    }
                }
            };
            match &common.json {
                Some(path) => {
                    // --json always writes the structured form.
                    let structured = match &output {
                        ModeOutput::Trace(trace) if csv => {
                            serde_json::to_string_pretty(trace).expect("trace serializes")
                        }
                        _ => rendered.clone(),
                    };
                    if let Err(e) = std::fs::write(path, structured + "\n") {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(4);
                    }
                    if let ModeOutput::Report(report) = &output {
                        println!("verdict: {:?}", report.verdict);
                    }
                }
                None => println!("{rendered}"),
            }
            ExitCode::from(code.clamp(0, 255) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(4)
        }
    }
}
