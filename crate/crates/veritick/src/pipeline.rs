//! The user-facing pipeline: parse, normalize, translate, validate, race
//! check, instrument, product, verify — or simulate, oracle, races, bmc, and
//! the emit modes — with machine-readable reports.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend;
use crate::ir::{self, program_to_text, AnnotationSet, Program};
use crate::oracle::{self, OracleConfig, Property, Witness};
use crate::races::{self, RaceReport};
use crate::sim::{self, InputSchedule};
use crate::vc::{self, Hint, SolverBackend, VerifierResult};
use crate::xform;

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable consulted when `--solver external` gives no command.
pub const SOLVER_ENV: &str = "VERITICK_SMT_SOLVER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Check,
    Simulate,
    Oracle,
    Races,
    Bmc,
    EmitIr,
    EmitVc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmitStage {
    Translated,
    Instrumented,
    Product,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SolverChoice {
    #[default]
    Builtin,
    /// External command; `None` defers to the environment variable.
    External(Option<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub files: Vec<PathBuf>,
    pub top: Option<String>,
    pub mode: Mode,
    pub annot_file: Option<PathBuf>,
    pub solver: SolverChoice,
    pub hints_file: Option<PathBuf>,
    /// Enables the bounded refutation search after a failed proof.
    pub bmc_depth: Option<u32>,
    pub oracle_width: u8,
    pub oracle_cycles: u32,
    pub oracle_max_pairs: u64,
    pub oracle_property: Property,
    pub seed: u64,
    pub trials: u64,
    pub emit_stage: EmitStage,
    /// Simulation inputs.
    pub inputs_file: Option<PathBuf>,
    pub sim_cycles: u32,
    pub sim_issue: Option<u32>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            files: Vec::new(),
            top: None,
            mode: Mode::Check,
            annot_file: None,
            solver: SolverChoice::Builtin,
            hints_file: None,
            bmc_depth: None,
            oracle_width: 1,
            oracle_cycles: 6,
            oracle_max_pairs: 1 << 14,
            oracle_property: Property::ConstantTime,
            seed: 0,
            trials: 100,
            emit_stage: EmitStage::Translated,
            inputs_file: None,
            sim_cycles: 6,
            sim_issue: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Verified,
    Violation,
    CannotProve,
    Racy,
    IllFormed,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Violation => 1,
            Verdict::CannotProve => 2,
            Verdict::Racy | Verdict::IllFormed => 3,
        }
    }
}

/// The machine-readable result of one pipeline invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub verdict: Verdict,
    /// Sources, sinks, and assumption formulas the run used, echoed back.
    pub assumptions: Vec<String>,
    pub timings_ms: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped_predicates: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_clause: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub races: Option<RaceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<oracle::OracleVerdict>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub diagnostics: Vec<String>,
}

impl Report {
    fn new(verdict: Verdict) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            verdict,
            assumptions: Vec::new(),
            timings_ms: BTreeMap::new(),
            invariant: None,
            dropped_predicates: None,
            failing_clause: None,
            witness: None,
            races: None,
            oracle: None,
            diagnostics: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// What an invocation produces besides the exit code.
#[derive(Debug, Clone)]
pub enum ModeOutput {
    Report(Box<Report>),
    /// Emitted text (IR or SMT-LIB).
    Artifact(String),
    /// Simulation trace.
    Trace(sim::Trace),
}

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("io error on {path}: {err}")]
    Io { path: String, err: String },
    #[error(transparent)]
    Solver(#[from] vc::SolverUnavailable),
    #[error("{0}")]
    BadInvocation(String),
}

struct Timings {
    start: Instant,
    stage_start: Instant,
    timings: BTreeMap<String, u64>,
}

impl Timings {
    fn new() -> Self {
        let now = Instant::now();
        Timings {
            start: now,
            stage_start: now,
            timings: BTreeMap::new(),
        }
    }

    fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.timings.insert(
            name.to_string(),
            now.duration_since(self.stage_start).as_millis() as u64,
        );
        self.stage_start = now;
    }

    fn finish(mut self) -> BTreeMap<String, u64> {
        self.timings
            .insert("total".to_string(), self.start.elapsed().as_millis() as u64);
        self.timings
    }
}

fn read_file(path: &PathBuf) -> Result<String, ToolError> {
    std::fs::read_to_string(path).map_err(|e| ToolError::Io {
        path: path.display().to_string(),
        err: e.to_string(),
    })
}

fn echo_assumptions(annots: &AnnotationSet) -> Vec<String> {
    let mut out = Vec::new();
    for s in &annots.sources {
        out.push(format!("source {s}"));
    }
    for s in &annots.sinks {
        out.push(format!("sink {s}"));
    }
    for f in &annots.initial_eq {
        out.push(format!("init_eq {}", ir::formula_to_text(f)));
    }
    for f in &annots.always_eq {
        out.push(format!("always_eq {}", ir::formula_to_text(f)));
    }
    out
}

/// Parses a sidecar annotation file: the annotation header lines of the
/// textual IR format. When present it replaces the source-comment
/// annotations entirely, so an unmodified design can be explored under
/// different assumption sets.
pub fn parse_annot_file(text: &str) -> Result<AnnotationSet, ir::IrParseError> {
    let (program, annots) = ir::parse_ir_text(text)?;
    if !program.processes.is_empty() || !program.vars.is_empty() {
        return Err(ir::IrParseError {
            line: 1,
            message: "annotation files may only contain annotation lines".into(),
        });
    }
    Ok(annots)
}

/// Parses a hints file: one `live x = live y` per line, `#` comments.
pub fn parse_hints(text: &str) -> Result<Vec<Hint>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || format!("line {}: hints look like `live x = live y`", i + 1);
        let rest = line.strip_prefix("live ").ok_or_else(bad)?;
        let (a, b) = rest.split_once('=').ok_or_else(bad)?;
        let b = b.trim().strip_prefix("live ").ok_or_else(bad)?;
        out.push(Hint {
            a: a.trim().to_string(),
            b: b.trim().to_string(),
        });
    }
    Ok(out)
}

struct FrontendOut {
    program: Program,
    annots: AnnotationSet,
}

fn ill_formed(diags: Vec<String>, timings: &mut Timings) -> Box<Report> {
    let mut r = Report::new(Verdict::IllFormed);
    r.diagnostics = diags;
    r.timings_ms = std::mem::replace(timings, Timings::new()).finish();
    Box::new(r)
}

fn frontend_load(cfg: &RunConfig, timings: &mut Timings) -> Result<FrontendOut, Box<Report>> {
    let mut asts = Vec::new();
    for path in &cfg.files {
        let text = match read_file(path) {
            Ok(t) => t,
            Err(e) => return Err(ill_formed(vec![e.to_string()], timings)),
        };
        match frontend::parse_verilog(&text) {
            Ok(mut ms) => asts.append(&mut ms),
            Err(e) => {
                return Err(ill_formed(vec![format!("{}: {e}", path.display())], timings));
            }
        }
    }
    timings.stage("parse");

    let top = cfg
        .top
        .clone()
        .or_else(|| asts.first().map(|m| m.name.clone()))
        .unwrap_or_default();
    let flat = match frontend::normalize(&asts, &top) {
        Ok(f) => f,
        Err(e) => return Err(ill_formed(vec![e.to_string()], timings)),
    };
    timings.stage("normalize");

    let (program, mut annots) = match frontend::translate(&flat) {
        Ok(x) => x,
        Err(e) => return Err(ill_formed(vec![e.to_string()], timings)),
    };
    timings.stage("translate");

    if let Some(path) = &cfg.annot_file {
        let text = match read_file(path) {
            Ok(t) => t,
            Err(e) => return Err(ill_formed(vec![e.to_string()], timings)),
        };
        match parse_annot_file(&text) {
            Ok(a) => annots = a,
            Err(e) => return Err(ill_formed(vec![e.to_string()], timings)),
        }
    }

    let diags = ir::validate_program(&program, &annots);
    timings.stage("validate");
    if !diags.is_empty() {
        return Err(ill_formed(
            diags.into_iter().map(|d| d.message).collect(),
            timings,
        ));
    }
    Ok(FrontendOut { program, annots })
}

fn solver_backend(cfg: &RunConfig) -> Result<SolverBackend, ToolError> {
    Ok(match &cfg.solver {
        SolverChoice::Builtin => SolverBackend::Builtin,
        SolverChoice::External(Some(cmd)) => SolverBackend::External {
            command: cmd.clone(),
        },
        SolverChoice::External(None) => match std::env::var(SOLVER_ENV) {
            Ok(cmd) if !cmd.is_empty() => SolverBackend::External { command: cmd },
            _ => {
                return Err(ToolError::BadInvocation(format!(
                    "--solver external given without a command and {SOLVER_ENV} is not set"
                )))
            }
        },
    })
}

fn oracle_config(cfg: &RunConfig) -> OracleConfig {
    OracleConfig {
        width: cfg.oracle_width,
        n_cycles: cfg.oracle_cycles,
        issue_cycles: None,
        max_pairs: cfg.oracle_max_pairs,
        sample_seed: Some(cfg.seed),
    }
}

/// Runs one invocation; returns the output and the process exit code.
pub fn run_pipeline(cfg: &RunConfig) -> Result<(ModeOutput, i32), ToolError> {
    let mut timings = Timings::new();
    let fe = match frontend_load(cfg, &mut timings) {
        Ok(fe) => fe,
        Err(report) => {
            let code = report.verdict.exit_code();
            return Ok((ModeOutput::Report(report), code));
        }
    };
    let FrontendOut { program, annots } = fe;

    match cfg.mode {
        Mode::EmitIr => {
            let text = match cfg.emit_stage {
                EmitStage::Translated => program_to_text(&program, &annots),
                EmitStage::Instrumented => {
                    let ip = xform::instrument(&program, &annots);
                    program_to_text(&ip.program, &ip.annots)
                }
                EmitStage::Product => {
                    let pp = xform::build_product(&xform::instrument(&program, &annots));
                    program_to_text(&pp.program, &AnnotationSet::default())
                }
            };
            Ok((ModeOutput::Artifact(text), 0))
        }
        Mode::EmitVc => {
            let pp = xform::build_product(&xform::instrument(&program, &annots));
            match vc::generate_horn(&pp) {
                Ok(hs) => Ok((ModeOutput::Artifact(vc::smtlib::emit_smtlib(&hs)), 0)),
                Err(e) => {
                    let report = ill_formed(vec![e.to_string()], &mut timings);
                    let code = report.verdict.exit_code();
                    Ok((ModeOutput::Report(report), code))
                }
            }
        }
        Mode::Simulate => {
            let inputs = match &cfg.inputs_file {
                None => InputSchedule::default(),
                Some(path) => {
                    let text = read_file(path)?;
                    match serde_json::from_str(&text) {
                        Ok(s) => s,
                        Err(e) => {
                            let report =
                                ill_formed(vec![format!("bad schedule: {e}")], &mut timings);
                            let code = report.verdict.exit_code();
                            return Ok((ModeOutput::Report(report), code));
                        }
                    }
                }
            };
            match sim::run(&program, &annots, &inputs, cfg.sim_issue, cfg.sim_cycles) {
                Ok(trace) => Ok((ModeOutput::Trace(trace), 0)),
                Err(e) => {
                    let report = ill_formed(vec![e.to_string()], &mut timings);
                    let code = report.verdict.exit_code();
                    Ok((ModeOutput::Report(report), code))
                }
            }
        }
        Mode::Races => {
            let mut report = Report::new(Verdict::Verified);
            report.assumptions = echo_assumptions(&annots);
            let mut r = races::static_races(&program);
            let dynamic = races::dynamic_differ(&program, &annots, cfg.trials, cfg.seed);
            r.findings.extend(dynamic.findings);
            if !r.findings.is_empty() {
                r.verdict = races::RaceVerdict::Racy;
                report.verdict = Verdict::Racy;
            }
            timings.stage("races");
            report.races = Some(r);
            report.timings_ms = timings.finish();
            let code = report.verdict.exit_code();
            Ok((ModeOutput::Report(Box::new(report)), code))
        }
        Mode::Oracle => {
            let ocfg = oracle_config(cfg);
            let verdict = match cfg.oracle_property {
                Property::ConstantTime => oracle::brute_force_ct(&program, &annots, &ocfg),
                Property::LivenessEquivalent => {
                    oracle::brute_force_liveq(&program, &annots, &ocfg)
                }
            };
            let mut report = Report::new(Verdict::Verified);
            report.assumptions = echo_assumptions(&annots);
            match verdict {
                Ok(v) => {
                    report.verdict = if v.holds {
                        Verdict::Verified
                    } else {
                        Verdict::Violation
                    };
                    report.witness = v.witness.clone();
                    report.oracle = Some(v);
                }
                Err(e) => {
                    report.verdict = Verdict::IllFormed;
                    report.diagnostics.push(e.to_string());
                }
            }
            timings.stage("oracle");
            report.timings_ms = timings.finish();
            let code = report.verdict.exit_code();
            Ok((ModeOutput::Report(Box::new(report)), code))
        }
        Mode::Bmc => {
            let depth = cfg.bmc_depth.unwrap_or(cfg.oracle_cycles);
            let mut report = Report::new(Verdict::CannotProve);
            report.assumptions = echo_assumptions(&annots);
            match vc::bmc_refute(&program, &annots, depth, cfg.oracle_width) {
                Ok(Some(w)) => {
                    report.verdict = Verdict::Violation;
                    report.witness = Some(w);
                }
                Ok(None) => {}
                Err(e) => {
                    report.verdict = Verdict::IllFormed;
                    report.diagnostics.push(e.to_string());
                }
            }
            timings.stage("bmc");
            report.timings_ms = timings.finish();
            let code = report.verdict.exit_code();
            Ok((ModeOutput::Report(Box::new(report)), code))
        }
        Mode::Check => check_mode(cfg, &program, &annots, timings),
    }
}

fn check_mode(
    cfg: &RunConfig,
    program: &Program,
    annots: &AnnotationSet,
    mut timings: Timings,
) -> Result<(ModeOutput, i32), ToolError> {
    let mut report = Report::new(Verdict::CannotProve);
    report.assumptions = echo_assumptions(annots);

    // Race gate first: the product construction is unsound on racy designs.
    let mut race_report = races::static_races(program);
    let dynamic = races::dynamic_differ(program, annots, cfg.trials.min(25), cfg.seed);
    race_report.findings.extend(dynamic.findings);
    timings.stage("races");
    if !race_report.findings.is_empty() {
        race_report.verdict = races::RaceVerdict::Racy;
        report.verdict = Verdict::Racy;
        report.races = Some(race_report);
        report.timings_ms = timings.finish();
        let code = report.verdict.exit_code();
        return Ok((ModeOutput::Report(Box::new(report)), code));
    }

    let ip = xform::instrument(program, annots);
    timings.stage("instrument");
    let pp = xform::build_product(&ip);
    timings.stage("product");

    let hints = match &cfg.hints_file {
        None => Vec::new(),
        Some(path) => {
            let text = read_file(path)?;
            match parse_hints(&text) {
                Ok(h) => h,
                Err(e) => {
                    let report = ill_formed(vec![e], &mut timings);
                    let code = report.verdict.exit_code();
                    return Ok((ModeOutput::Report(report), code));
                }
            }
        }
    };

    let hs = match vc::generate_horn(&pp) {
        Ok(hs) => hs,
        Err(e) => {
            let report = ill_formed(vec![e.to_string()], &mut timings);
            let code = report.verdict.exit_code();
            return Ok((ModeOutput::Report(report), code));
        }
    };
    timings.stage("vcgen");

    let backend = solver_backend(cfg)?;
    let universe = vc::predicate_universe(&pp, &hints);
    let verdict = vc::houdini_solve(&hs, &universe, &backend)?;
    timings.stage("solve");

    report.invariant = Some(verdict.invariant.clone());
    report.dropped_predicates = Some(verdict.dropped.clone());
    report.failing_clause = verdict.failing_clause.clone();
    match verdict.result {
        VerifierResult::Verified => report.verdict = Verdict::Verified,
        VerifierResult::CannotProve => {
            report.verdict = Verdict::CannotProve;
            // Opt-in refutation: a concrete divergence upgrades the verdict
            // to a violation with a replayable witness.
            if let Some(depth) = cfg.bmc_depth {
                match vc::bmc_refute(program, annots, depth, cfg.oracle_width) {
                    Ok(Some(w)) => {
                        report.verdict = Verdict::Violation;
                        report.witness = Some(w);
                    }
                    Ok(None) => {}
                    Err(e) => report.diagnostics.push(format!("bmc: {e}")),
                }
                timings.stage("bmc");
            }
        }
    }
    report.timings_ms = timings.finish();
    let code = report.verdict.exit_code();
    Ok((ModeOutput::Report(Box::new(report)), code))
}
