//! Brute-force ground truth for constant-time execution and liveness
//! equivalence on desk-scale instances.
//!
//! The oracle enumerates initial values for every register that can matter —
//! sources, registers named in assumptions, and registers read anywhere —
//! holds them for the length of the run, and compares every ordered pair of
//! the induced traces that satisfies the assumptions. It exists to check the
//! verifier, not to scale.

pub mod generate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{AnnotationSet, Program};
use crate::sim::{
    ct_divergence, liveq_divergence, pair_satisfies_assumptions, run, DefaultPolicy,
    InputSchedule, SimError, Trace,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Bits enumerated per register (low bits of wider registers).
    pub width: u8,
    /// Trace horizon.
    pub n_cycles: u32,
    /// Issue cycles tested for liveness equivalence; `None` means all
    /// `t < n_cycles`.
    pub issue_cycles: Option<Vec<u32>>,
    /// Ordered-pair budget: enumeration is exhaustive up to this many pairs.
    pub max_pairs: u64,
    /// With a seed, domains beyond the budget are sampled instead of
    /// rejected.
    pub sample_seed: Option<u64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            width: 1,
            n_cycles: 6,
            issue_cycles: None,
            max_pairs: 1 << 14,
            sample_seed: None,
        }
    }
}

impl OracleConfig {
    fn issues(&self) -> Vec<u32> {
        self.issue_cycles
            .clone()
            .unwrap_or_else(|| (0..self.n_cycles).collect())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{pairs} schedule pairs exceed the budget of {budget} and sampling is disabled")]
    DomainTooLarge { pairs: u128, budget: u64 },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    ConstantTime,
    LivenessEquivalent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub left: InputSchedule,
    pub right: InputSchedule,
    pub t_issue: Option<u32>,
    pub cycle: u32,
    pub sink: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub pairs_checked: u64,
    pub skipped_unknown_guards: u64,
    /// Snapshots at which a live variable was missing its issue cycle;
    /// always zero, counted as a cross-check.
    pub lemma_violations: u64,
}

/// The registers whose initial values span the trace set: sources, registers
/// appearing in assumption formulas, and registers read anywhere.
pub fn enumerated_registers(program: &Program, annots: &AnnotationSet) -> Vec<String> {
    let mut set: BTreeSet<String> = annots.sources.clone();
    for v in annots.formula_vars() {
        if program.is_register(&v) {
            set.insert(v);
        }
    }
    set.extend(program.read_registers());
    set.into_iter().collect()
}

/// The number of distinct single-run schedules for the configured domain.
pub fn schedule_count(program: &Program, annots: &AnnotationSet, cfg: &OracleConfig) -> u128 {
    let mut n: u128 = 1;
    for r in enumerated_registers(program, annots) {
        let w = program.vars[&r].width.min(cfg.width);
        n = n.saturating_mul(1u128 << w);
    }
    n
}

/// All single-run schedules of the enumeration domain, in lexicographic
/// order of the (sorted) register values.
fn build_schedules(program: &Program, annots: &AnnotationSet, cfg: &OracleConfig) -> Vec<InputSchedule> {
    let regs = enumerated_registers(program, annots);
    let widths: Vec<u8> = regs
        .iter()
        .map(|r| program.vars[r].width.min(cfg.width))
        .collect();
    let mut out = Vec::new();
    let mut counter: Vec<u64> = vec![0; regs.len()];
    loop {
        let mut s = InputSchedule::new(DefaultPolicy::HoldPrevious);
        for (i, r) in regs.iter().enumerate() {
            s.set(0, r.clone(), counter[i]);
        }
        out.push(s);
        // Mixed-radix increment.
        let mut i = regs.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            counter[i] += 1;
            if counter[i] < (1u64 << widths[i]) {
                break;
            }
            counter[i] = 0;
        }
    }
}

/// One run per schedule, or `None` where the run aborts on an unknown guard.
struct RunTable<'a> {
    program: &'a Program,
    annots: &'a AnnotationSet,
    n_cycles: u32,
    schedules: Vec<InputSchedule>,
    /// Value traces (no issue); liveness is issue-independent of these.
    plain: Vec<Option<Trace>>,
}

impl<'a> RunTable<'a> {
    fn new(
        program: &'a Program,
        annots: &'a AnnotationSet,
        cfg: &OracleConfig,
    ) -> Result<Self, OracleError> {
        let schedules = build_schedules(program, annots, cfg);
        let mut plain = Vec::with_capacity(schedules.len());
        for s in &schedules {
            match run(program, annots, s, None, cfg.n_cycles) {
                Ok(t) => plain.push(Some(t)),
                Err(SimError::GuardUnknown { .. }) => plain.push(None),
                Err(e) => return Err(e.into()),
            }
        }
        Ok(RunTable {
            program,
            annots,
            n_cycles: cfg.n_cycles,
            schedules,
            plain,
        })
    }

    fn issue_run(&self, idx: usize, t: u32) -> Result<Option<Trace>, OracleError> {
        match run(
            self.program,
            self.annots,
            &self.schedules[idx],
            Some(t),
            self.n_cycles,
        ) {
            Ok(tr) => Ok(Some(tr)),
            Err(SimError::GuardUnknown { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }
}

/// The ordered schedule pairs whose induced traces satisfy the assumptions.
/// Pairs are enumerated exhaustively below the budget; beyond it, sampling
/// kicks in when a seed is configured.
pub fn enumerate_pairs(
    program: &Program,
    annots: &AnnotationSet,
    cfg: &OracleConfig,
) -> Result<Vec<(InputSchedule, InputSchedule)>, OracleError> {
    let table = RunTable::new(program, annots, cfg)?;
    let mut out = Vec::new();
    for_each_pair(&table, cfg, |_, _, l, r| {
        if let (Some(lt), Some(rt)) = (&table.plain[l], &table.plain[r]) {
            if pair_satisfies_assumptions(annots, lt, rt) {
                out.push((table.schedules[l].clone(), table.schedules[r].clone()));
            }
        }
        Ok(())
    })?;
    Ok(out)
}

fn for_each_pair(
    table: &RunTable,
    cfg: &OracleConfig,
    mut f: impl FnMut(&RunTable, &OracleConfig, usize, usize) -> Result<(), OracleError>,
) -> Result<(), OracleError> {
    let n = table.schedules.len() as u128;
    let total = n * n;
    if total <= cfg.max_pairs as u128 {
        for l in 0..table.schedules.len() {
            for r in 0..table.schedules.len() {
                f(table, cfg, l, r)?;
            }
        }
        return Ok(());
    }
    let Some(seed) = cfg.sample_seed else {
        return Err(OracleError::DomainTooLarge {
            pairs: total,
            budget: cfg.max_pairs,
        });
    };
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.max_pairs {
        let l = rng.gen_range(0..table.schedules.len());
        let r = rng.gen_range(0..table.schedules.len());
        f(table, cfg, l, r)?;
    }
    Ok(())
}

/// Exhaustively checks constant-time execution: equal sink influence sets on
/// every assumption-satisfying pair. Influence sets do not depend on the
/// issue cycle, so plain runs suffice.
pub fn brute_force_ct(
    program: &Program,
    annots: &AnnotationSet,
    cfg: &OracleConfig,
) -> Result<OracleVerdict, OracleError> {
    let table = RunTable::new(program, annots, cfg)?;
    let mut verdict = OracleVerdict {
        property: Property::ConstantTime,
        holds: true,
        witness: None,
        pairs_checked: 0,
        skipped_unknown_guards: 0,
        lemma_violations: 0,
    };
    let mut best: Option<(u32, usize, usize, String)> = None;
    for_each_pair(&table, cfg, |table, _, l, r| {
        let (Some(lt), Some(rt)) = (&table.plain[l], &table.plain[r]) else {
            verdict.skipped_unknown_guards += 1;
            return Ok(());
        };
        if !pair_satisfies_assumptions(annots, lt, rt) {
            return Ok(());
        }
        verdict.pairs_checked += 1;
        if let Some((cycle, sink)) = ct_divergence(lt, rt, &annots.sinks) {
            if best.as_ref().map(|(c, ..)| cycle < *c).unwrap_or(true) {
                best = Some((cycle, l, r, sink));
            }
        }
        Ok(())
    })?;
    if let Some((cycle, l, r, sink)) = best {
        verdict.holds = false;
        verdict.witness = Some(Witness {
            left: table.schedules[l].clone(),
            right: table.schedules[r].clone(),
            t_issue: None,
            cycle,
            sink,
        });
    }
    Ok(verdict)
}

/// Exhaustively checks liveness equivalence: equal sink liveness bits on
/// every assumption-satisfying pair of t-traces, for every issue cycle in
/// the configuration.
pub fn brute_force_liveq(
    program: &Program,
    annots: &AnnotationSet,
    cfg: &OracleConfig,
) -> Result<OracleVerdict, OracleError> {
    let table = RunTable::new(program, annots, cfg)?;
    let mut verdict = OracleVerdict {
        property: Property::LivenessEquivalent,
        holds: true,
        witness: None,
        pairs_checked: 0,
        skipped_unknown_guards: 0,
        lemma_violations: 0,
    };
    let mut best: Option<(u32, u32, usize, usize, String)> = None;
    for t in cfg.issues() {
        // The assumption filter only reads stores, which are identical across
        // issue cycles, so the plain traces drive the filter.
        let mut issue_runs: Vec<Option<Option<Trace>>> = vec![None; table.schedules.len()];
        let run_at = |idx: usize,
                          runs: &mut Vec<Option<Option<Trace>>>,
                          verdict: &mut OracleVerdict|
         -> Result<Option<Trace>, OracleError> {
            if runs[idx].is_none() {
                let tr = table.issue_run(idx, t)?;
                if let Some(tr) = &tr {
                    verdict.lemma_violations += tr.live_implies_influence(t).len() as u64;
                }
                runs[idx] = Some(tr);
            }
            Ok(runs[idx].as_ref().unwrap().clone())
        };
        for_each_pair(&table, cfg, |table, _, l, r| {
            let (Some(lp), Some(rp)) = (&table.plain[l], &table.plain[r]) else {
                verdict.skipped_unknown_guards += 1;
                return Ok(());
            };
            if !pair_satisfies_assumptions(annots, lp, rp) {
                return Ok(());
            }
            let (Some(lt), Some(rt)) = (
                run_at(l, &mut issue_runs, &mut verdict)?,
                run_at(r, &mut issue_runs, &mut verdict)?,
            ) else {
                verdict.skipped_unknown_guards += 1;
                return Ok(());
            };
            verdict.pairs_checked += 1;
            if let Some((cycle, sink)) = liveq_divergence(&lt, &rt, &annots.sinks) {
                let better = best
                    .as_ref()
                    .map(|(c, ..)| cycle < *c)
                    .unwrap_or(true);
                if better {
                    best = Some((cycle, t, l, r, sink));
                }
            }
            Ok(())
        })?;
    }
    if let Some((cycle, t, l, r, sink)) = best {
        verdict.holds = false;
        verdict.witness = Some(Witness {
            left: table.schedules[l].clone(),
            right: table.schedules[r].clone(),
            t_issue: Some(t),
            cycle,
            sink,
        });
    }
    Ok(verdict)
}

/// Re-runs a witness and confirms the reported divergence reproduces.
pub fn replay_witness(
    program: &Program,
    annots: &AnnotationSet,
    property: Property,
    witness: &Witness,
    n_cycles: u32,
) -> Result<bool, SimError> {
    let left = run(program, annots, &witness.left, witness.t_issue, n_cycles)?;
    let right = run(program, annots, &witness.right, witness.t_issue, n_cycles)?;
    let found = match property {
        Property::ConstantTime => ct_divergence(&left, &right, &annots.sinks),
        Property::LivenessEquivalent => liveq_divergence(&left, &right, &annots.sinks),
    };
    Ok(found == Some((witness.cycle, witness.sink.clone())))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Disagreement {
    pub program_ir: String,
    pub ct_holds: bool,
    pub liveq_holds: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub programs: u64,
    pub ct_held: u64,
    pub disagreements: Vec<Disagreement>,
    pub skipped_unknown_guards: u64,
    pub lemma_violations: u64,
}

/// Empirical cross-check of the equivalence between constant-time execution
/// and liveness equivalence: on randomly generated race-free programs, the
/// two brute-force checks must agree.
pub fn theorem1_crosscheck(seed: u64, count: u64) -> Result<CrosscheckReport, OracleError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cfg = OracleConfig::default();
    let mut report = CrosscheckReport {
        programs: count,
        ct_held: 0,
        disagreements: Vec::new(),
        skipped_unknown_guards: 0,
        lemma_violations: 0,
    };
    for _ in 0..count {
        let (program, annots) = generate::random_program(&mut rng);
        let ct = brute_force_ct(&program, &annots, &cfg)?;
        let liveq = brute_force_liveq(&program, &annots, &cfg)?;
        report.skipped_unknown_guards += ct.skipped_unknown_guards + liveq.skipped_unknown_guards;
        report.lemma_violations += liveq.lemma_violations;
        if ct.holds {
            report.ct_held += 1;
        }
        if ct.holds != liveq.holds {
            report.disagreements.push(Disagreement {
                program_ir: crate::ir::program_to_text(&program, &annots),
                ct_holds: ct.holds,
                liveq_holds: liveq.holds,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests;
