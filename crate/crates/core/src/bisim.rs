//! Empirical check that an order-sorted algebra and its translation simulate
//! each other step for step on enumerated ground terms.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{e_class_bounded, steps_on_class, ClosureConfig, MsTheory, OsTheory, RewriteStep, StepSet, Theory};
use crate::terms::{GroundTerm, MSAlgebra, OSAlgebra, Operator, Rule, Sort, SortDiscipline};
use crate::translate::{translate_algebra, TranslateError, TranslationMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Terms with their sort, lower heights first.
    pub terms: Vec<(GroundTerm, Sort)>,
    /// Some level was sampled rather than listed in full.
    pub truncated: bool,
}

fn product(sizes: impl Iterator<Item = usize>) -> usize {
    sizes.fold(1usize, |acc, n| acc.saturating_mul(n))
}

/// Ground terms of height at most `depth`, optionally only those whose sort
/// is admitted by `sort`. When a level would exceed `max_terms`, its new
/// terms are drawn at random with a generator seeded by `seed`.
pub fn enumerate_ground_terms<S: SortDiscipline + ?Sized>(
    sig: &S,
    operators: &[Operator],
    sort: Option<&Sort>,
    depth: usize,
    max_terms: usize,
    seed: u64,
) -> Enumeration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truncated = false;
    let mut level: Vec<(GroundTerm, Sort)> = Vec::new();
    let mut seen: HashSet<GroundTerm> = HashSet::new();
    for op in operators.iter().filter(|o| o.arity() == 0) {
        let t = GroundTerm::constant(op.constructor.clone());
        if seen.insert(t.clone()) {
            if let Ok(s) = sig.term_sort(&t) {
                level.push((t, s));
            }
        }
    }
    for _ in 0..depth {
        let candidates: Vec<Vec<Vec<usize>>> = operators
            .iter()
            .map(|op| {
                op.arg_sorts
                    .iter()
                    .map(|want| (0..level.len()).filter(|&i| sig.admits(&level[i].1, want)).collect())
                    .collect()
            })
            .collect();
        let counts: Vec<usize> = operators
            .iter()
            .zip(&candidates)
            .map(|(op, c)| if op.arity() == 0 { 0 } else { product(c.iter().map(Vec::len)) })
            .collect();
        let total = counts.iter().fold(0usize, |a, &n| a.saturating_add(n));
        let room = max_terms.saturating_sub(level.len());
        let mut fresh = Vec::new();
        let mut push = |t: GroundTerm, fresh: &mut Vec<(GroundTerm, Sort)>| {
            if !seen.contains(&t) {
                if let Ok(s) = sig.term_sort(&t) {
                    seen.insert(t.clone());
                    fresh.push((t, s));
                }
            }
        };
        if total <= room {
            for (op, cands) in operators.iter().zip(&candidates) {
                if op.arity() == 0 {
                    continue;
                }
                let mut idx = vec![0usize; cands.len()];
                if cands.iter().any(Vec::is_empty) {
                    continue;
                }
                loop {
                    let args = idx.iter().zip(cands).map(|(&i, c)| level[c[i]].0.clone()).collect();
                    push(GroundTerm::new(op.constructor.clone(), args), &mut fresh);
                    let mut k = cands.len();
                    loop {
                        if k == 0 {
                            break;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < cands[k].len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
        } else {
            truncated = true;
            let live: Vec<usize> = (0..operators.len()).filter(|&i| counts[i] > 0).collect();
            let mut attempts = 0;
            while fresh.len() < room && attempts < room.saturating_mul(20) {
                attempts += 1;
                let oi = live[rng.gen_range(0..live.len())];
                let args = candidates[oi]
                    .iter()
                    .map(|c| level[c[rng.gen_range(0..c.len())]].0.clone())
                    .collect();
                push(GroundTerm::new(operators[oi].constructor.clone(), args), &mut fresh);
            }
        }
        if fresh.is_empty() {
            break;
        }
        level.extend(fresh);
    }
    if let Some(want) = sort {
        level.retain(|(_, s)| sig.admits(s, want));
    }
    Enumeration { terms: level, truncated }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BisimConfig {
    pub term_depth: usize,
    pub eclass_depth: usize,
    pub eclass_max: usize,
    /// Cap on enumerated terms per direction.
    pub max_terms: usize,
    pub seed: u64,
}

impl Default for BisimConfig {
    fn default() -> Self {
        Self {
            term_depth: 3,
            eclass_depth: 5,
            eclass_max: 10_000,
            max_terms: 2_000,
            seed: 0,
        }
    }
}

impl BisimConfig {
    fn closure(&self) -> ClosureConfig {
        ClosureConfig {
            depth: self.eclass_depth,
            max_size: self.eclass_max,
            size_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub direction: Direction,
    pub source_term: GroundTerm,
    pub rule_index: usize,
    pub rule: Rule,
    /// The step that had no counterpart.
    pub witness: RewriteStep,
    pub missing: String,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: rule {} ({}) at {}: {}",
            self.direction, self.source_term, self.rule_index, self.rule, self.witness.position, self.missing
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BisimReport {
    pub terms_checked: usize,
    pub steps_checked: usize,
    pub forward_failures: Vec<Counterexample>,
    pub backward_failures: Vec<Counterexample>,
    pub skipped_unexhausted: usize,
    pub skipped_not_in_image: usize,
    pub truncated: bool,
}

impl BisimReport {
    pub fn passes(&self) -> bool {
        self.forward_failures.is_empty() && self.backward_failures.is_empty()
    }

    pub fn merge(&mut self, other: BisimReport) {
        self.terms_checked += other.terms_checked;
        self.steps_checked += other.steps_checked;
        self.forward_failures.extend(other.forward_failures);
        self.backward_failures.extend(other.backward_failures);
        self.skipped_unexhausted += other.skipped_unexhausted;
        self.skipped_not_in_image += other.skipped_not_in_image;
        self.truncated |= other.truncated;
    }
}

impl fmt::Display for BisimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} terms, {} steps, {} forward failures, {} backward failures, {} skipped (unexhausted), {} skipped (not in image){}",
            self.terms_checked,
            self.steps_checked,
            self.forward_failures.len(),
            self.backward_failures.len(),
            self.skipped_unexhausted,
            self.skipped_not_in_image,
            if self.truncated { ", sampled" } else { "" }
        )
    }
}

/// Whether some step in `candidates` with the given rule lands on `target`,
/// first syntactically and then up to the equations. `None` means the
/// answer depends on a closure that did not reach its fixpoint.
fn has_counterpart<T: Theory + ?Sized>(
    th: &T,
    candidates: &StepSet,
    rule_index: usize,
    target: &GroundTerm,
    root: &Sort,
    cfg: &ClosureConfig,
) -> Option<bool> {
    let same_rule: Vec<&RewriteStep> = candidates.steps.iter().filter(|s| s.rule_index == rule_index).collect();
    if same_rule.iter().any(|s| s.result == *target) {
        return Some(true);
    }
    let class = e_class_bounded(th, target, root, cfg);
    if same_rule.iter().any(|s| class.contains(&s.result)) {
        return Some(true);
    }
    class.exhausted.then_some(false)
}

struct Pair<'a> {
    os: OsTheory<'a>,
    ms: MsTheory<'a>,
    tm: &'a TranslationMap,
}

impl Pair<'_> {
    /// Steps of `t` and of its translation `p`, or `None` when either
    /// closure stops short of its fixpoint.
    fn both_steps(&self, t: &GroundTerm, p: &GroundTerm, root: &Sort, cfg: &ClosureConfig) -> Option<(StepSet, StepSet)> {
        let os_class = e_class_bounded(&self.os, t, root, cfg);
        if !os_class.exhausted {
            return None;
        }
        let ms_class = e_class_bounded(&self.ms, p, root, cfg);
        if !ms_class.exhausted {
            return None;
        }
        Some((steps_on_class(&self.os, os_class, root), steps_on_class(&self.ms, ms_class, root)))
    }

    fn forward_one(&self, t: &GroundTerm, cfg: &BisimConfig) -> BisimReport {
        let mut report = BisimReport::default();
        let closure = cfg.closure();
        let Some(root) = self.os.sort_of(t) else {
            return report;
        };
        let Ok((p, _)) = self.tm.tr_ground(t, Some(&root)) else {
            report.skipped_not_in_image += 1;
            return report;
        };
        let Some((os_steps, ms_steps)) = self.both_steps(t, &p, &root, &closure) else {
            report.skipped_unexhausted += 1;
            return report;
        };
        report.terms_checked += 1;
        for step in &os_steps.steps {
            report.steps_checked += 1;
            let target = match self.tm.tr_ground(&step.result, Some(&root)) {
                Ok((u, _)) => self.tm.canonicalize(&u),
                Err(e) => {
                    report.forward_failures.push(Counterexample {
                        direction: Direction::Forward,
                        source_term: t.clone(),
                        rule_index: step.rule_index,
                        rule: step.rule.clone(),
                        witness: step.clone(),
                        missing: format!("result does not translate: {e}"),
                    });
                    continue;
                }
            };
            match has_counterpart(&self.ms, &ms_steps, step.rule_index, &target, &root, &closure) {
                Some(true) => {}
                Some(false) => report.forward_failures.push(Counterexample {
                    direction: Direction::Forward,
                    source_term: t.clone(),
                    rule_index: step.rule_index,
                    rule: step.rule.clone(),
                    witness: step.clone(),
                    missing: format!("no translated step from {p} reaches {target}"),
                }),
                None => report.skipped_unexhausted += 1,
            }
        }
        report
    }

    fn backward_one(&self, p: &GroundTerm, sort: &Sort, cfg: &BisimConfig) -> BisimReport {
        let mut report = BisimReport::default();
        let closure = cfg.closure();
        let q = self.tm.canonicalize(p);
        let t = self.tm.invert(&q);
        let in_image = self
            .os
            .sort_of(&t)
            .filter(|s| self.os.le(s, sort))
            .and_then(|_| self.tm.tr_ground(&t, Some(sort)).ok())
            .is_some_and(|(u, _)| self.tm.canonicalize(&u) == q);
        if !in_image {
            report.skipped_not_in_image += 1;
            return report;
        }
        let Some((os_steps, ms_steps)) = self.both_steps(&t, &q, sort, &closure) else {
            report.skipped_unexhausted += 1;
            return report;
        };
        report.terms_checked += 1;
        for step in &ms_steps.steps {
            report.steps_checked += 1;
            let found = os_steps.steps.iter().filter(|s| s.rule_index == step.rule_index).any(|s| {
                self.tm
                    .tr_ground(&s.result, Some(sort))
                    .is_ok_and(|(u, _)| self.tm.canonicalize(&u) == step.result)
            });
            if found {
                continue;
            }
            let preimage = self.tm.invert(&step.result);
            let verdict = if self.os.sort_of(&preimage).is_some() {
                has_counterpart(&self.os, &os_steps, step.rule_index, &preimage, sort, &closure)
            } else {
                Some(false)
            };
            match verdict {
                Some(true) => {}
                Some(false) => report.backward_failures.push(Counterexample {
                    direction: Direction::Backward,
                    source_term: q.clone(),
                    rule_index: step.rule_index,
                    rule: step.rule.clone(),
                    witness: step.clone(),
                    missing: format!("no source step from {t} reaches {preimage}"),
                }),
                None => report.skipped_unexhausted += 1,
            }
        }
        report
    }
}

fn merged(parts: Vec<BisimReport>, truncated: bool) -> BisimReport {
    let mut report = BisimReport {
        truncated,
        ..BisimReport::default()
    };
    for part in parts {
        report.merge(part);
    }
    report
}

/// Every source step on enumerated source terms has a translated counterpart.
pub fn check_forward(os: &OSAlgebra, ms: &MSAlgebra, tm: &TranslationMap, cfg: &BisimConfig) -> BisimReport {
    let pair = Pair {
        os: OsTheory::new(os),
        ms: MsTheory::new(ms, tm.casts().clone()),
        tm,
    };
    let sig = &os.signature;
    let terms = enumerate_ground_terms(sig, sig.operators(), None, cfg.term_depth, cfg.max_terms, cfg.seed);
    let parts = terms.terms.par_iter().map(|(t, _)| pair.forward_one(t, cfg)).collect();
    merged(parts, terms.truncated)
}

/// Every translated step on enumerated image terms has a source counterpart.
pub fn check_backward(os: &OSAlgebra, ms: &MSAlgebra, tm: &TranslationMap, cfg: &BisimConfig) -> BisimReport {
    let pair = Pair {
        os: OsTheory::new(os),
        ms: MsTheory::new(ms, tm.casts().clone()),
        tm,
    };
    let sig = &ms.signature;
    let terms = enumerate_ground_terms(
        sig,
        sig.operators(),
        None,
        cfg.term_depth,
        cfg.max_terms,
        cfg.seed.wrapping_add(1),
    );
    let parts = terms.terms.par_iter().map(|(p, s)| pair.backward_one(p, s, cfg)).collect();
    merged(parts, terms.truncated)
}

/// Translates `os` and checks both directions.
pub fn run_bisim(os: &OSAlgebra, cfg: &BisimConfig) -> Result<BisimReport, TranslateError> {
    let (ms, tm) = translate_algebra(os)?;
    let mut report = check_forward(os, &ms, &tm, cfg);
    report.merge(check_backward(os, &ms, &tm, cfg));
    Ok(report)
}
