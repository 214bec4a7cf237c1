//! Runs the random corpus through decision, oracle, construction, converter
//! and the unipotent analyses, and reports everything as deterministic JSON.

use std::thread;

use serde::Serialize;

use crate::arith::Field;
use crate::certificate::{Route, Setting, Symmetry};
use crate::construction::{construct_infinitesimal_form_with, construct_invariant_form_with, skew_symmetric_converter};
use crate::corpus::{generate_corpus, unipotent_corpus, CorpusInstance, Flavor, UnipotentInstance, CORPUS_MAX_DIM};
use crate::decision::{decide_infinitesimal_form_with, decide_invariant_form_with};
use crate::factor::{FactorOptions, DEFAULT_DEGREE_LIMIT};
use crate::isometry::{level_analysis, orthogonal_decomposition, LevelReport, SummandKind};
use crate::linalg::Matrix;
use crate::oracle::{oracle_exists, DEFAULT_TRIALS};

pub const DEFAULT_SELFTEST_SEED: u64 = 20_240_601;
pub const DEFAULT_CORPUS_SIZE: usize = 500;
/// Prime used for the unipotent sweep.
pub const UNIPOTENT_PRIME: u64 = 101;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelftestOptions {
    pub seed: u64,
    pub count: usize,
    pub jobs: usize,
    pub trials: usize,
    pub degree_limit: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: DEFAULT_SELFTEST_SEED,
            count: DEFAULT_CORPUS_SIZE,
            jobs: 1,
            trials: DEFAULT_TRIALS,
            degree_limit: DEFAULT_DEGREE_LIMIT,
        }
    }
}

impl SelftestOptions {
    fn factor_options(&self) -> FactorOptions {
        FactorOptions {
            degree_limit: self.degree_limit,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseOutcome {
    pub setting: Setting,
    pub symmetry: Symmetry,
    pub decision: bool,
    pub oracle: bool,
    pub agree: bool,
    /// Present for positive decisions.
    pub witness_verified: Option<bool>,
    pub routes: Vec<Route>,
    /// Present when the converter applies (invariant setting, no eigenvalue ±1).
    pub converter_verified: Option<bool>,
    pub error: Option<String>,
}

impl CaseOutcome {
    fn ok(&self) -> bool {
        self.agree && self.witness_verified != Some(false) && self.converter_verified != Some(false) && self.error.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceOutcome {
    pub id: usize,
    pub field: String,
    pub flavor: Flavor,
    pub dim: usize,
    pub blocks: Vec<String>,
    pub cases: Vec<CaseOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnipotentOutcome {
    pub parts: Vec<usize>,
    pub eigenvalue: i64,
    pub symmetry: Symmetry,
    pub admits: bool,
    pub level: Option<LevelReport>,
    pub summand_kinds: Vec<SummandKind>,
    pub orthogonal_ok: Option<bool>,
    pub error: Option<String>,
}

impl UnipotentOutcome {
    fn ok(&self) -> bool {
        self.error.is_none()
            && self.orthogonal_ok != Some(false)
            && self.level.as_ref().is_none_or(|l| l.bound_satisfied)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub cases: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub positive_cases: usize,
    pub witnesses_verified: usize,
    pub converter_checked: usize,
    pub converter_verified: usize,
    pub trace_norm_direct: usize,
    pub trace_norm_fallback: usize,
    pub oracle_blocks: usize,
    pub errors: usize,
    pub unipotent_cases: usize,
    pub level_checked: usize,
    pub level_satisfied: usize,
    pub orthogonal_checked: usize,
    pub orthogonal_ok: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub count: usize,
    pub trials: usize,
    pub summary: Summary,
    pub instances: Vec<InstanceOutcome>,
    pub unipotent: Vec<UnipotentOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.instances.iter().all(|i| i.cases.iter().all(CaseOutcome::ok)) && self.unipotent.iter().all(UnipotentOutcome::ok)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn converter_check(m: &Matrix, cert: &crate::certificate::FormCertificate) -> Option<bool> {
    let inv = m.inverse().ok()?;
    if (m - &inv).det().ok()?.is_zero() {
        return None;
    }
    Some(skew_symmetric_converter(m, cert).is_ok_and(|c| c.holds_for(m) && c.symmetry() == cert.symmetry().opposite()))
}

fn evaluate_case(inst: &CorpusInstance, setting: Setting, symmetry: Symmetry, opts: &SelftestOptions) -> CaseOutcome {
    let m = &inst.matrix;
    let fopts = opts.factor_options();
    let mut outcome = CaseOutcome {
        setting,
        symmetry,
        decision: false,
        oracle: false,
        agree: false,
        witness_verified: None,
        routes: Vec::new(),
        converter_verified: None,
        error: None,
    };
    let decision = match setting {
        Setting::Invariant => decide_invariant_form_with(m, symmetry, &fopts),
        Setting::Infinitesimal => decide_infinitesimal_form_with(m, symmetry, &fopts),
    };
    let oracle = oracle_exists(m, symmetry, setting, opts.seed.wrapping_add(inst.id as u64), opts.trials);
    match (decision, oracle) {
        (Ok(d), Ok(o)) => {
            outcome.decision = d.exists;
            outcome.oracle = o.is_some();
            outcome.agree = d.exists == o.is_some();
        }
        (Err(e), _) | (_, Err(e)) => {
            outcome.error = Some(e.to_string());
            return outcome;
        }
    }
    if outcome.decision {
        let cert = match setting {
            Setting::Invariant => construct_invariant_form_with(m, symmetry, &fopts),
            Setting::Infinitesimal => construct_infinitesimal_form_with(m, symmetry, &fopts),
        };
        match cert {
            Ok(c) => {
                outcome.witness_verified = Some(c.holds_for(m));
                outcome.routes = c.provenance().iter().flat_map(|p| p.routes.iter().copied()).collect();
                if setting == Setting::Invariant {
                    outcome.converter_verified = converter_check(m, &c);
                }
            }
            Err(e) => {
                outcome.witness_verified = Some(false);
                outcome.error = Some(e.to_string());
            }
        }
    }
    outcome
}

pub fn evaluate_instance(inst: &CorpusInstance, opts: &SelftestOptions) -> InstanceOutcome {
    let invertible = inst.matrix.det().is_ok_and(|d| !d.is_zero());
    let mut cases = Vec::new();
    for setting in [Setting::Invariant, Setting::Infinitesimal] {
        if setting == Setting::Invariant && !invertible {
            continue;
        }
        for symmetry in [Symmetry::Symmetric, Symmetry::Skew] {
            cases.push(evaluate_case(inst, setting, symmetry, opts));
        }
    }
    InstanceOutcome {
        id: inst.id,
        field: inst.field.to_string(),
        flavor: inst.flavor,
        dim: inst.matrix.rows(),
        blocks: inst.blocks.clone(),
        cases,
    }
}

pub fn evaluate_unipotent(inst: &UnipotentInstance, symmetry: Symmetry, opts: &SelftestOptions) -> UnipotentOutcome {
    let fopts = opts.factor_options();
    let mut outcome = UnipotentOutcome {
        parts: inst.parts.clone(),
        eigenvalue: inst.eigenvalue,
        symmetry,
        admits: false,
        level: None,
        summand_kinds: Vec::new(),
        orthogonal_ok: None,
        error: None,
    };
    let m = &inst.matrix;
    let mut run = || -> crate::error::Result<()> {
        outcome.admits = decide_invariant_form_with(m, symmetry, &fopts)?.exists;
        if !outcome.admits {
            return Ok(());
        }
        let cert = construct_invariant_form_with(m, symmetry, &fopts)?;
        if inst.eigenvalue == 1 {
            outcome.level = Some(level_analysis(m, &cert)?);
        }
        let report = orthogonal_decomposition(m, &cert)?;
        outcome.summand_kinds = report.summands.iter().map(|s| s.kind).collect();
        outcome.orthogonal_ok = Some(report.check(m, cert.gram(), symmetry).all());
        Ok(())
    };
    if let Err(e) = run() {
        outcome.error = Some(e.to_string());
    }
    outcome
}

/// Maps `f` over `items` on `jobs` threads, keeping input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let f = &f;
    let mut indexed: Vec<(usize, R)> = thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|t| {
                scope.spawn(move || {
                    items
                        .iter()
                        .enumerate()
                        .skip(t)
                        .step_by(jobs)
                        .map(|(i, item)| (i, f(item)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("selftest worker panicked"))
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, r)| r).collect()
}

fn summarize(instances: &[InstanceOutcome], unipotent: &[UnipotentOutcome]) -> Summary {
    let mut s = Summary {
        instances: instances.len(),
        ..Summary::default()
    };
    for case in instances.iter().flat_map(|i| &i.cases) {
        s.cases += 1;
        if case.agree {
            s.agreements += 1;
        } else {
            s.disagreements += 1;
        }
        if case.decision {
            s.positive_cases += 1;
        }
        if case.witness_verified == Some(true) {
            s.witnesses_verified += 1;
        }
        if let Some(ok) = case.converter_verified {
            s.converter_checked += 1;
            s.converter_verified += usize::from(ok);
        }
        for r in &case.routes {
            match r {
                Route::TraceNorm => s.trace_norm_direct += 1,
                Route::TraceNormFallback => s.trace_norm_fallback += 1,
                Route::Oracle => s.oracle_blocks += 1,
                _ => {}
            }
        }
        s.errors += usize::from(case.error.is_some());
    }
    for u in unipotent {
        s.unipotent_cases += 1;
        if let Some(l) = &u.level {
            s.level_checked += 1;
            s.level_satisfied += usize::from(l.bound_satisfied);
        }
        if let Some(ok) = u.orthogonal_ok {
            s.orthogonal_checked += 1;
            s.orthogonal_ok += usize::from(ok);
        }
        s.errors += usize::from(u.error.is_some());
    }
    s
}

pub fn run_selftest(opts: &SelftestOptions) -> SelftestReport {
    let corpus = generate_corpus(opts.seed, opts.count);
    let instances = parallel_map(&corpus, opts.jobs, |inst| evaluate_instance(inst, opts));
    let sweep = unipotent_corpus(Field::Prime(UNIPOTENT_PRIME), CORPUS_MAX_DIM, opts.seed);
    let pairs: Vec<(&UnipotentInstance, Symmetry)> = sweep
        .iter()
        .flat_map(|u| [Symmetry::Symmetric, Symmetry::Skew].map(|s| (u, s)))
        .collect();
    let unipotent = parallel_map(&pairs, opts.jobs, |(u, s)| evaluate_unipotent(u, *s, opts));
    SelftestReport {
        seed: opts.seed,
        count: opts.count,
        trials: opts.trials,
        summary: summarize(&instances, &unipotent),
        instances,
        unipotent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_selftest_passes_and_is_deterministic() {
        let opts = SelftestOptions {
            count: 12,
            jobs: 3,
            ..SelftestOptions::default()
        };
        let a = run_selftest(&opts);
        assert!(a.passed(), "{}", a.to_json());
        let b = run_selftest(&SelftestOptions { jobs: 1, ..opts });
        assert_eq!(a.to_json(), b.to_json());
    }
}
