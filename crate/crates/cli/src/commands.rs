//! One function per subcommand. Each returns the envelope, a human-readable
//! rendering and whether the command's own verification passed.

use crate::envelope::ReportEnvelope;
use hardylab_core::lhv::{
    self, completed_claims_table, feasibility, validate_certificate, ClaimsCompletion, LhvCertificate, RationalTable,
    Witness,
};
use hardylab_core::observables::{self, Interpretation, Observable, ObservableSet};
use hardylab_core::protocol::{self, BellIndex, BellPair};
use hardylab_core::sampler::{self, RunConfig, SamplerError};
use hardylab_core::Tolerance;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;

pub struct Outcome {
    pub envelope: ReportEnvelope,
    pub text: String,
    pub passed: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: exit 2.
    #[error("{0}")]
    Usage(String),
    /// A computation or invariant broke: exit 1.
    #[error("{0}")]
    Failed(String),
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

pub fn expand(pair: BellPair, tol: Tolerance) -> Result<Outcome, CliError> {
    let report = protocol::verify_expansion_against_paper(pair, tol).map_err(failed)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "expansion on {} (residual slots {}), printed overall factor {}",
        pair,
        report.residual_slots.iter().map(|s| s.to_string()).collect::<String>(),
        report.printed_overall
    );
    let _ = writeln!(
        text,
        "{:<6} {:>10} {:>7} {:>7} {:>12}",
        "branch", "coef", "exact", "phase", "phase factor"
    );
    for b in &report.branches {
        let phase = b
            .phase
            .map_or("-".to_string(), |p| format!("{:+.3}{:+.3}i", p.re, p.im));
        let _ = writeln!(
            text,
            "{:<6} {:>+10.6} {:>7} {:>7} {:>12}",
            b.bell.to_string(),
            b.coefficient.re,
            b.exact_match,
            b.phase_match,
            phase
        );
    }
    let _ = writeln!(
        text,
        "all exact: {}   all up to phase: {}   reconstruction deviation: {:e}",
        report.all_exact, report.all_up_to_phase, report.reconstruction_deviation
    );
    let passed = report.all_up_to_phase;
    Ok(Outcome {
        envelope: ReportEnvelope::new("expand", tol.0)
            .param("slots", pair)
            .results(&report),
        text,
        passed,
    })
}

#[derive(Serialize)]
struct AuditEntry {
    report: observables::AuditReport,
    deductions: lhv::DeductionTrace,
}

fn audit_entry(i: BellIndex, j: BellIndex, interp: Interpretation, tol: Tolerance) -> Result<AuditEntry, CliError> {
    let report = observables::audit_pair(i, j, interp, tol).map_err(failed)?;
    let deductions = lhv::replay_deductions(&report.measured, tol);
    Ok(AuditEntry { report, deductions })
}

fn audit_line(text: &mut String, e: &AuditEntry) {
    let m = &e.report.measured;
    let stop = match &e.deductions.outcome {
        lhv::TraceOutcome::Contradiction { .. } => "contradiction".to_string(),
        lhv::TraceOutcome::NoContradiction { stopped_at, .. } => {
            format!(
                "stops at {}",
                serde_json::to_value(stopped_at).unwrap().as_str().unwrap_or("?")
            )
        }
    };
    let _ = writeln!(
        text,
        "{:<5} {:<5} {:>10.6} {:>10.6} {:>10.6} {:>10.6}  {}/4  {}",
        e.report.d1.to_string(),
        e.report.d2.to_string(),
        m.p_joint,
        m.c_d1u2,
        m.c_d2u1,
        m.p_u1u2,
        e.report.verdicts.pass_count(),
        stop
    );
}

const AUDIT_HEADER: &str = "d1    d2       P(D1D2) P(U2|D1)  P(U1|D2)   P(U1U2)  pass  deductions";

pub fn audit(
    pair: Option<(BellIndex, BellIndex)>,
    interp: Interpretation,
    tol: Tolerance,
) -> Result<Outcome, CliError> {
    let mut text = format!("interpretation: {} ({})\n{AUDIT_HEADER}\n", interp, interp.note());
    let envelope = ReportEnvelope::new("audit", tol.0).param("interp", interp);
    let envelope = match pair {
        Some((i, j)) => {
            let entry = audit_entry(i, j, interp, tol)?;
            audit_line(&mut text, &entry);
            if let lhv::TraceOutcome::NoContradiction { reason, .. } = &entry.deductions.outcome {
                let _ = writeln!(text, "replay: {reason}");
            }
            envelope.param("d1", i).param("d2", j).results(&entry)
        }
        None => {
            let all = observables::enumerate_all_pairs(interp, tol).map_err(failed)?;
            let entries: Vec<AuditEntry> = all
                .reports
                .into_iter()
                .map(|report| {
                    let deductions = lhv::replay_deductions(&report.measured, tol);
                    AuditEntry { report, deductions }
                })
                .collect();
            for e in &entries {
                audit_line(&mut text, e);
            }
            let _ = writeln!(
                text,
                "sum of P(D1D2) over {} pairs: {:.15}; pairs passing all four claims: {}",
                all.summary.pairs, all.summary.sum_p_joint, all.summary.pairs_passing_all
            );
            #[derive(Serialize)]
            struct All {
                reports: Vec<AuditEntry>,
                summary: observables::EnumerationSummary,
            }
            envelope.param("all", true).results(All {
                reports: entries,
                summary: all.summary,
            })
        }
    };
    // the audit is informational: mismatched claims are data, not failures
    Ok(Outcome {
        envelope,
        text,
        passed: true,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum LhvSource {
    PaperClaims,
    Quantum(BellIndex, BellIndex, Interpretation),
    File(PathBuf),
}

impl LhvSource {
    pub fn parse(s: &str) -> Result<Self, String> {
        if s == "paper-claims" {
            return Ok(LhvSource::PaperClaims);
        }
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err("file: needs a path".into());
            }
            return Ok(LhvSource::File(path.into()));
        }
        if let Some(rest) = s.strip_prefix("quantum:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if let [i, j, interp] = parts[..] {
                let bell = |x: &str| BellIndex::parse(x).ok_or_else(|| format!("unknown Bell label `{x}`"));
                let interp =
                    Interpretation::parse(interp).ok_or_else(|| format!("unknown interpretation `{interp}`"))?;
                return Ok(LhvSource::Quantum(bell(i)?, bell(j)?, interp));
            }
            return Err("expected quantum:<d1>,<d2>,<fixed|collapsed>".into());
        }
        Err(format!(
            "unknown source `{s}` (paper-claims, quantum:i,j,interp or file:PATH)"
        ))
    }

    fn label(&self) -> String {
        match self {
            LhvSource::PaperClaims => "paper-claims".into(),
            LhvSource::Quantum(i, j, interp) => format!("quantum:{i},{j},{interp}"),
            LhvSource::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Serialize)]
struct LhvResults {
    table: RationalTable,
    #[serde(skip_serializing_if = "Option::is_none")]
    completion: Option<ClaimsCompletion>,
    certificate: LhvCertificate,
    validated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation_error: Option<String>,
}

pub fn lhv(source: &LhvSource, tol: Tolerance) -> Result<Outcome, CliError> {
    let mut completion = None;
    let table = match source {
        LhvSource::PaperClaims => {
            let c = ClaimsCompletion::paper();
            let t = completed_claims_table(&c).map_err(failed)?;
            completion = Some(c);
            t
        }
        LhvSource::Quantum(i, j, interp) => {
            let q = observables::quantum_probability_table(*i, *j, *interp, tol).map_err(failed)?;
            RationalTable::from_probabilities(&q, tol).map_err(failed)?
        }
        LhvSource::File(path) => {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let t: RationalTable = serde_json::from_str(&raw)
                .map_err(|e| CliError::Usage(format!("malformed table {}: {e}", path.display())))?;
            t.validate()
                .map_err(|e| CliError::Usage(format!("invalid table {}: {e}", path.display())))?;
            t
        }
    };
    let certificate = feasibility(&table).map_err(failed)?;
    let check = validate_certificate(&table, &certificate);

    let mut text = String::new();
    let _ = writeln!(text, "source: {}", source.label());
    for (cell, p) in table.cells() {
        let _ = writeln!(text, "  {cell} = {p}");
    }
    let _ = writeln!(
        text,
        "verdict: {}",
        serde_json::to_value(certificate.verdict)
            .unwrap()
            .as_str()
            .unwrap_or("?")
    );
    match (&certificate.model, &certificate.witness) {
        (Some(model), _) => {
            for w in &model.weights {
                let _ = writeln!(text, "  weight {} on {}", w.weight, w.assignment);
            }
        }
        (_, Some(Witness::DeductionChain { steps, functional })) => {
            for s in steps {
                let _ = writeln!(
                    text,
                    "  {}: {}",
                    serde_json::to_value(s.rule).unwrap().as_str().unwrap_or("?"),
                    s.conclusion
                );
            }
            if let Some(v) = functional.on_table(&table) {
                let _ = writeln!(text, "  functional value on table: {v}");
            }
        }
        (_, Some(Witness::SeparatingFunctional { functional })) => {
            if let Some(v) = functional.on_table(&table) {
                let _ = writeln!(text, "  separating functional value on table: {v}");
            }
        }
        _ => {}
    }
    let _ = writeln!(
        text,
        "certificate: {}",
        match &check {
            Ok(()) => "validated".to_string(),
            Err(e) => format!("INVALID ({e})"),
        }
    );
    let passed = check.is_ok();
    let results = LhvResults {
        table,
        completion,
        certificate,
        validated: passed,
        validation_error: check.err().map(|e| e.to_string()),
    };
    Ok(Outcome {
        envelope: ReportEnvelope::new("lhv", tol.0)
            .param("source", source.label())
            .results(&results),
        text,
        passed,
    })
}

/// Two observables, Alice's outcome first.
pub fn parse_context(s: &str) -> Result<(Observable, Observable), String> {
    let bad = || format!("context `{s}` must be two of d1, d2, u1, u2, e.g. d1d2");
    if s.len() != 4 || !s.is_ascii() {
        return Err(bad());
    }
    let a = Observable::parse(&s[..2]).ok_or_else(bad)?;
    let b = Observable::parse(&s[2..]).ok_or_else(bad)?;
    if a == b {
        return Err(bad());
    }
    Ok((a, b))
}

pub struct SampleArgs {
    pub context: (Observable, Observable),
    pub d1: BellIndex,
    pub d2: BellIndex,
    pub interp: Interpretation,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Serialize)]
struct SampleResults {
    counts: sampler::CountTable,
    exact: [[f64; 2]; 2],
    deviations: Option<sampler::DeviationReport>,
}

pub fn sample(args: &SampleArgs, tol: Tolerance) -> Result<Outcome, CliError> {
    let set = ObservableSet::new(args.d1, args.d2, args.interp, tol).map_err(failed)?;
    let (a, b) = args.context;
    let cfg =
        RunConfig::new(set.get(a).clone(), set.get(b).clone(), args.shots, args.seed, tol).map_err(|e| match e {
            SamplerError::NonCommuting { .. } => CliError::Usage(e.to_string()),
            other => failed(other),
        })?;
    let state = protocol::make_total_state();
    let exact = sampler::sampling_distribution(&state, &cfg).map_err(failed)?;
    let counts = sampler::sample(&state, &cfg).map_err(failed)?;
    let deviations = if counts.shots > 0 {
        Some(sampler::compare_frequencies(&counts, &exact).map_err(failed)?)
    } else {
        None
    };

    let (la, lb) = (a.label(), b.label());
    let mut text = format!(
        "context ({la}, {lb}) with d1={} d2={} interp={}; {} shots, seed {}\n",
        args.d1, args.d2, args.interp, args.shots, args.seed
    );
    let _ = writeln!(
        text,
        "{la} {lb} {:>10} {:>10} {:>10} {:>8}",
        "count", "observed", "exact", "z"
    );
    for x in 0..2 {
        for y in 0..2 {
            let (obs, z) = match &deviations {
                Some(d) => {
                    let c = &d.cells[2 * x + y];
                    (
                        format!("{:.6}", c.observed),
                        c.z.map_or("-".into(), |z| format!("{z:+.3}")),
                    )
                }
                None => ("-".into(), "-".into()),
            };
            let _ = writeln!(
                text,
                "{x:>2} {y:>2} {:>10} {obs:>10} {:>10.6} {z:>8}",
                counts.counts[x][y], exact[x][y]
            );
        }
    }
    let violation = deviations.as_ref().is_some_and(|d| d.impossible_event_violation);
    if violation {
        let _ = writeln!(text, "IMPOSSIBLE EVENT OBSERVED");
    }
    Ok(Outcome {
        envelope: ReportEnvelope::new("sample", tol.0)
            .param("context", format!("{la}{lb}"))
            .param("d1", args.d1)
            .param("d2", args.d2)
            .param("interp", args.interp)
            .param("shots", args.shots)
            .param("seed", args.seed)
            .results(SampleResults {
                counts,
                exact,
                deviations,
            }),
        text,
        passed: !violation,
    })
}
