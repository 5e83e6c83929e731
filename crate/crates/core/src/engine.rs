//! Rewriting modulo equations.
//!
//! Equality modulo the equations is approximated by a breadth-first closure
//! that only visits terms no larger than a size bound; rules then fire on
//! every member of the closure. The many-sorted theory works on terms whose
//! cast chains are in canonical form and matches modulo core equality.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::poset::{build_poset, PosetError, TieBreak};
use crate::terms::{
    Equation, GroundTerm, MSAlgebra, OSAlgebra, OSSignature, PatternTerm, Position, Rule, Sort, SortDiscipline,
    Substitution, Symbol,
};
use crate::translate::CastTable;

/// The result of firing one oriented equation or rule somewhere in a term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub position: Position,
    pub substitution: Substitution,
    pub result: GroundTerm,
}

/// A sorted term language with equations and rules.
pub trait Theory: Sync {
    fn sort_of(&self, t: &GroundTerm) -> Option<Sort>;

    fn le(&self, a: &Sort, b: &Sort) -> bool;

    /// Representative of a term's syntactic equivalence class.
    fn normalize(&self, t: GroundTerm) -> GroundTerm;

    /// Size used to bound the closure.
    fn measure(&self, t: &GroundTerm) -> usize;

    /// Equations used by the closure, each oriented in every direction that
    /// does not introduce variables.
    fn oriented_equations(&self) -> &[(PatternTerm, PatternTerm)];

    fn rules(&self) -> &[Rule];

    /// The rules as `(lhs, rhs)` pairs, in order.
    fn rule_pairs(&self) -> &[(PatternTerm, PatternTerm)];

    /// Every way to rewrite `t` once by one of `pairs` so that the result is
    /// still a term of sort `root_sort` with measure within `limit`. Each
    /// application comes with the index of the pair used.
    fn apply_all(
        &self,
        t: &GroundTerm,
        root_sort: &Sort,
        pairs: &[(PatternTerm, PatternTerm)],
        limit: Option<usize>,
    ) -> Vec<(usize, Application)>;

    fn apply_everywhere(
        &self,
        t: &GroundTerm,
        root_sort: &Sort,
        lhs: &PatternTerm,
        rhs: &PatternTerm,
        limit: Option<usize>,
    ) -> Vec<Application> {
        self.apply_all(t, root_sort, &[(lhs.clone(), rhs.clone())], limit)
            .into_iter()
            .map(|(_, a)| a)
            .collect()
    }

    /// Rebuilds the result of a step from its parts.
    fn replay(&self, t: &GroundTerm, pos: &Position, lhs: &PatternTerm, rhs: &PatternTerm, h: &Substitution)
        -> Option<GroundTerm>;
}

fn orient(equations: &[Equation]) -> Vec<(PatternTerm, PatternTerm)> {
    let mut out = Vec::new();
    for e in equations {
        let l = e.lhs.variable_names();
        let r = e.rhs.variable_names();
        if r.is_subset(&l) {
            out.push((e.lhs.clone(), e.rhs.clone()));
        }
        if l.is_subset(&r) {
            out.push((e.rhs.clone(), e.lhs.clone()));
        }
    }
    out
}

fn rule_pairs(rules: &[Rule]) -> Vec<(PatternTerm, PatternTerm)> {
    rules.iter().map(|r| (r.lhs.clone(), r.rhs.clone())).collect()
}

fn bind(h: &mut Substitution, name: &Symbol, value: GroundTerm) -> bool {
    match h.get(name) {
        Some(prev) => *prev == value,
        None => {
            h.insert(name.clone(), value);
            true
        }
    }
}

fn head_fits(p: &PatternTerm, t: &GroundTerm) -> bool {
    match p {
        PatternTerm::Var { .. } => true,
        PatternTerm::Node { head, args } => *head == t.head && args.len() == t.args.len(),
    }
}

/// A term's sort together with the sorts of all its subterms.
#[derive(Debug, Clone)]
struct Sorted {
    sort: Sort,
    kids: Vec<Sorted>,
}

/// Syntactic order-sorted matching: a variable `x:s` takes any subterm
/// whose least sort is at most `s`.
pub fn match_os(sig: &OSSignature, p: &PatternTerm, t: &GroundTerm) -> Option<Substitution> {
    fn go(sig: &OSSignature, p: &PatternTerm, t: &GroundTerm, h: &mut Substitution) -> bool {
        match p {
            PatternTerm::Var { name, sort } => match sig.least_sort(t) {
                Ok(s) if sig.poset().le(&s, sort) => bind(h, name, t.clone()),
                _ => false,
            },
            PatternTerm::Node { head, args } => {
                *head == t.head
                    && args.len() == t.args.len()
                    && args.iter().zip(&t.args).all(|(p, t)| go(sig, p, t, h))
            }
        }
    }
    let mut h = Substitution::new();
    go(sig, p, t, &mut h).then_some(h)
}

/// Syntactic many-sorted matching with exact sorts at variables.
pub fn match_exact<S: SortDiscipline>(sig: &S, p: &PatternTerm, t: &GroundTerm) -> Option<Substitution> {
    fn go<S: SortDiscipline>(sig: &S, p: &PatternTerm, t: &GroundTerm, h: &mut Substitution) -> bool {
        match p {
            PatternTerm::Var { name, sort } => match sig.term_sort(t) {
                Ok(s) if s == *sort => bind(h, name, t.clone()),
                _ => false,
            },
            PatternTerm::Node { head, args } => {
                *head == t.head
                    && args.len() == t.args.len()
                    && args.iter().zip(&t.args).all(|(p, t)| go(sig, p, t, h))
            }
        }
    }
    let mut h = Substitution::new();
    go(sig, p, t, &mut h).then_some(h)
}

/// The order-sorted algebra as a theory; terms keep their least sort below
/// the root sort they started with.
pub struct OsTheory<'a> {
    alg: &'a OSAlgebra,
    oriented: Vec<(PatternTerm, PatternTerm)>,
    rule_pairs: Vec<(PatternTerm, PatternTerm)>,
}

impl<'a> OsTheory<'a> {
    pub fn new(alg: &'a OSAlgebra) -> Self {
        Self {
            alg,
            oriented: orient(&alg.equations),
            rule_pairs: rule_pairs(&alg.rules),
        }
    }

    pub fn algebra(&self) -> &OSAlgebra {
        self.alg
    }

    fn sig(&self) -> &OSSignature {
        &self.alg.signature
    }

    fn annotate(&self, t: &GroundTerm) -> Option<Sorted> {
        let kids = t.args.iter().map(|a| self.annotate(a)).collect::<Option<Vec<_>>>()?;
        let sorts: Vec<Sort> = kids.iter().map(|k| k.sort.clone()).collect();
        let sort = self.sig().node_sort(&t.head, &sorts).ok()?;
        Some(Sorted { sort, kids })
    }

    fn match_sorted(&self, p: &PatternTerm, t: &GroundTerm, s: &Sorted, h: &mut Substitution) -> bool {
        match p {
            PatternTerm::Var { name, sort } => self.sig().poset().le(&s.sort, sort) && bind(h, name, t.clone()),
            PatternTerm::Node { head, args } => {
                *head == t.head
                    && args.len() == t.args.len()
                    && args
                        .iter()
                        .zip(&t.args)
                        .zip(&s.kids)
                        .all(|((p, t), s)| self.match_sorted(p, t, s, h))
            }
        }
    }

    /// Least sort of the whole term after the subterm below `path` takes
    /// sort `new`; `None` when some ancestor stops being well-formed.
    fn resort(&self, path: &[(&GroundTerm, &Sorted, usize)], mut new: Sort) -> Option<Sort> {
        for &(node, sorted, slot) in path.iter().rev() {
            if sorted.kids[slot].sort == new {
                return Some(path[0].1.sort.clone());
            }
            let sorts: Vec<Sort> = sorted
                .kids
                .iter()
                .enumerate()
                .map(|(j, k)| if j == slot { new.clone() } else { k.sort.clone() })
                .collect();
            new = self.sig().node_sort(&node.head, &sorts).ok()?;
        }
        Some(new)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk<'t>(
        &self,
        whole: &GroundTerm,
        size: usize,
        sub: &'t GroundTerm,
        sorted: &'t Sorted,
        pos: &mut Vec<usize>,
        path: &mut Vec<(&'t GroundTerm, &'t Sorted, usize)>,
        root_sort: &Sort,
        pairs: &[(PatternTerm, PatternTerm)],
        limit: Option<usize>,
        out: &mut Vec<(usize, Application)>,
    ) {
        for (k, (lhs, rhs)) in pairs.iter().enumerate() {
            if !head_fits(lhs, sub) {
                continue;
            }
            let mut h = Substitution::new();
            if !self.match_sorted(lhs, sub, sorted, &mut h) {
                continue;
            }
            let Ok(inst) = h.instantiate(rhs) else {
                continue;
            };
            if limit.is_some_and(|l| size - sub.size() + inst.size() > l) {
                continue;
            }
            let Ok(inst_sort) = self.sig().least_sort(&inst) else {
                continue;
            };
            let top = if path.is_empty() {
                Some(inst_sort)
            } else {
                self.resort(path, inst_sort)
            };
            if !top.is_some_and(|s| self.le(&s, root_sort)) {
                continue;
            }
            let position = Position(pos.clone());
            let result = whole.replace(&position, inst).expect("position from this term");
            out.push((
                k,
                Application {
                    position,
                    substitution: h,
                    result,
                },
            ));
        }
        for (i, (child, cs)) in sub.args.iter().zip(&sorted.kids).enumerate() {
            pos.push(i);
            path.push((sub, sorted, i));
            self.walk(whole, size, child, cs, pos, path, root_sort, pairs, limit, out);
            path.pop();
            pos.pop();
        }
    }
}

impl Theory for OsTheory<'_> {
    fn sort_of(&self, t: &GroundTerm) -> Option<Sort> {
        self.sig().least_sort(t).ok()
    }

    fn le(&self, a: &Sort, b: &Sort) -> bool {
        self.sig().poset().le(a, b)
    }

    fn normalize(&self, t: GroundTerm) -> GroundTerm {
        t
    }

    fn measure(&self, t: &GroundTerm) -> usize {
        t.size()
    }

    fn oriented_equations(&self) -> &[(PatternTerm, PatternTerm)] {
        &self.oriented
    }

    fn rules(&self) -> &[Rule] {
        &self.alg.rules
    }

    fn rule_pairs(&self) -> &[(PatternTerm, PatternTerm)] {
        &self.rule_pairs
    }

    fn apply_all(
        &self,
        t: &GroundTerm,
        root_sort: &Sort,
        pairs: &[(PatternTerm, PatternTerm)],
        limit: Option<usize>,
    ) -> Vec<(usize, Application)> {
        let Some(sorted) = self.annotate(t) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        self.walk(
            t,
            t.size(),
            t,
            &sorted,
            &mut Vec::new(),
            &mut Vec::new(),
            root_sort,
            pairs,
            limit,
            &mut out,
        );
        out
    }

    fn replay(&self, t: &GroundTerm, pos: &Position, _lhs: &PatternTerm, rhs: &PatternTerm, h: &Substitution)
        -> Option<GroundTerm> {
        t.replace(pos, h.instantiate(rhs).ok()?)
    }
}

/// The many-sorted algebra as a theory. Terms are kept with canonical cast
/// chains, which decides core equality, so the generated core equations are
/// not used by the closure.
pub struct MsTheory<'a> {
    alg: &'a MSAlgebra,
    casts: CastTable,
    oriented: Vec<(PatternTerm, PatternTerm)>,
    rule_pairs: Vec<(PatternTerm, PatternTerm)>,
}

impl<'a> MsTheory<'a> {
    pub fn new(alg: &'a MSAlgebra, casts: CastTable) -> Self {
        Self {
            alg,
            casts,
            oriented: orient(&alg.equations),
            rule_pairs: rule_pairs(&alg.rules),
        }
    }

    /// Reads the subsort order off the cast operators of a spec that was not
    /// produced in this session.
    pub fn standalone(alg: &'a MSAlgebra) -> Result<Self, PosetError> {
        let pairs: Vec<(Sort, Sort)> = alg
            .signature
            .casts()
            .map(|c| (c.arg_sorts[0].clone(), c.target.clone()))
            .collect();
        let poset = build_poset(alg.signature.sorts(), &pairs)?;
        Ok(Self::new(alg, CastTable::new(&poset, TieBreak::default())))
    }

    pub fn algebra(&self) -> &MSAlgebra {
        self.alg
    }

    pub fn casts(&self) -> &CastTable {
        &self.casts
    }

    fn annotate(&self, t: &GroundTerm) -> Option<Sorted> {
        let kids = t.args.iter().map(|a| self.annotate(a)).collect::<Option<Vec<_>>>()?;
        let sorts: Vec<Sort> = kids.iter().map(|k| k.sort.clone()).collect();
        let sort = self.alg.signature.operator(&t.head, &sorts)?.target.clone();
        Some(Sorted { sort, kids })
    }

    /// Skips the cast chain on top of `t`.
    fn core<'t>(&self, mut t: &'t GroundTerm, mut s: &'t Sorted) -> (&'t GroundTerm, &'t Sorted, usize) {
        let mut n = 0;
        while self.casts.is_cast(&t.head) {
            t = &t.args[0];
            s = &s.kids[0];
            n += 1;
        }
        (t, s, n)
    }

    /// Matches `p`, expected at sort `sigma`, against the core `c` whose
    /// cast chain reaches at least `sigma`.
    fn match_core(&self, p: &PatternTerm, c: &GroundTerm, cs: &Sorted, sigma: &Sort, h: &mut Substitution) -> bool {
        let a = &cs.sort;
        match p {
            PatternTerm::Var { name, .. } => {
                if !self.casts.le(a, sigma) {
                    return false;
                }
                match self.casts.wrap(c.clone(), a, sigma) {
                    Ok(v) => bind(h, name, v),
                    Err(_) => false,
                }
            }
            PatternTerm::Node { head, args } => {
                if let Some((b, _)) = self.casts.cast_pair(head) {
                    return self.casts.le(a, b) && self.match_core(&args[0], c, cs, b, h);
                }
                if a != sigma || *head != c.head || args.len() != c.args.len() {
                    return false;
                }
                args.iter().zip(&c.args).zip(&cs.kids).all(|((pi, ci), si)| {
                    let (core, core_sorted, _) = self.core(ci, si);
                    self.match_core(pi, core, core_sorted, &si.sort, h)
                })
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        whole: &GroundTerm,
        whole_measure: usize,
        sub: &GroundTerm,
        sorted: &Sorted,
        pos: &mut Vec<usize>,
        pairs: &[(PatternTerm, PatternTerm, Option<Sort>)],
        limit: Option<usize>,
        out: &mut Vec<(usize, Application)>,
    ) {
        let tau = &sorted.sort;
        let (core, core_sorted, chain) = self.core(sub, sorted);
        let a = &core_sorted.sort;
        for (k, (lhs, rhs, sigma_l)) in pairs.iter().enumerate() {
            let Some(sigma_l) = sigma_l else {
                continue;
            };
            if !head_fits(lhs, core) || !self.casts.le(a, sigma_l) || !self.casts.le(sigma_l, tau) {
                continue;
            }
            let mut h = Substitution::new();
            if !self.match_core(lhs, core, core_sorted, sigma_l, &mut h) {
                continue;
            }
            let Ok(inst) = h.instantiate(rhs) else {
                continue;
            };
            let within = limit.is_none_or(|l| {
                whole_measure - self.casts.core_size(sub) + self.casts.core_size(&inst) <= l
            });
            if !within {
                continue;
            }
            let Ok(placed) = self.casts.wrap(inst, sigma_l, tau) else {
                continue;
            };
            let position = Position(pos.clone());
            let result = whole
                .replace(&position, self.casts.canonicalize(&placed))
                .expect("position from this term");
            out.push((
                k,
                Application {
                    position,
                    substitution: h,
                    result,
                },
            ));
        }
        let depth = pos.len();
        pos.extend(std::iter::repeat_n(0, chain));
        for (i, (child, cs)) in core.args.iter().zip(&core_sorted.kids).enumerate() {
            pos.push(i);
            self.visit(whole, whole_measure, child, cs, pos, pairs, limit, out);
            pos.pop();
        }
        pos.truncate(depth);
    }
}

impl Theory for MsTheory<'_> {
    fn sort_of(&self, t: &GroundTerm) -> Option<Sort> {
        self.alg.signature.term_sort(t).ok()
    }

    fn le(&self, a: &Sort, b: &Sort) -> bool {
        a == b
    }

    fn normalize(&self, t: GroundTerm) -> GroundTerm {
        self.casts.canonicalize(&t)
    }

    fn measure(&self, t: &GroundTerm) -> usize {
        self.casts.core_size(t)
    }

    fn oriented_equations(&self) -> &[(PatternTerm, PatternTerm)] {
        &self.oriented
    }

    fn rules(&self) -> &[Rule] {
        &self.alg.rules
    }

    fn rule_pairs(&self) -> &[(PatternTerm, PatternTerm)] {
        &self.rule_pairs
    }

    fn apply_all(
        &self,
        t: &GroundTerm,
        root_sort: &Sort,
        pairs: &[(PatternTerm, PatternTerm)],
        limit: Option<usize>,
    ) -> Vec<(usize, Application)> {
        let Some(sorted) = self.annotate(t) else {
            return Vec::new();
        };
        if sorted.sort != *root_sort {
            return Vec::new();
        }
        let sorted_pairs: Vec<(PatternTerm, PatternTerm, Option<Sort>)> = pairs
            .iter()
            .map(|(l, r)| (l.clone(), r.clone(), self.alg.signature.pattern_sort(l).ok()))
            .collect();
        let mut out = Vec::new();
        self.visit(t, self.measure(t), t, &sorted, &mut Vec::new(), &sorted_pairs, limit, &mut out);
        out
    }

    fn replay(&self, t: &GroundTerm, pos: &Position, lhs: &PatternTerm, rhs: &PatternTerm, h: &Substitution)
        -> Option<GroundTerm> {
        let sigma_l = self.alg.signature.pattern_sort(lhs).ok()?;
        let tau = self.alg.signature.term_sort(t.subterm(pos)?).ok()?;
        let placed = self.casts.wrap(h.instantiate(rhs).ok()?, &sigma_l, &tau).ok()?;
        Some(self.casts.canonicalize(&t.replace(pos, placed)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosureConfig {
    /// Breadth-first layers explored.
    pub depth: usize,
    /// Most members kept.
    pub max_size: usize,
    /// Largest measure a member may have; the seed's own measure when unset.
    pub size_limit: Option<usize>,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            depth: 5,
            max_size: 10_000,
            size_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EClassApprox {
    pub seed: GroundTerm,
    /// Breadth-first order; the seed comes first.
    pub members: Vec<GroundTerm>,
    pub depth_used: usize,
    /// A fixpoint was reached within the budget.
    pub exhausted: bool,
}

impl EClassApprox {
    pub fn contains(&self, t: &GroundTerm) -> bool {
        self.members.contains(t)
    }
}

/// Terms reachable from `t` by equation steps that stay of sort `root_sort`
/// and within the size bound.
pub fn e_class_bounded<T: Theory + ?Sized>(th: &T, t: &GroundTerm, root_sort: &Sort, cfg: &ClosureConfig) -> EClassApprox {
    let seed = th.normalize(t.clone());
    let limit = cfg.size_limit.unwrap_or_else(|| th.measure(&seed));
    let mut members = vec![seed.clone()];
    let mut seen: HashSet<GroundTerm> = HashSet::from([seed.clone()]);
    let mut frontier = 0..1;
    let mut depth_used = 0;
    loop {
        let mut next = Vec::new();
        for i in frontier.clone() {
            for (_, app) in th.apply_all(&members[i], root_sort, th.oriented_equations(), Some(limit)) {
                if seen.insert(app.result.clone()) {
                    next.push(app.result);
                    if members.len() + next.len() > cfg.max_size {
                        return EClassApprox {
                            seed,
                            members,
                            depth_used,
                            exhausted: false,
                        };
                    }
                }
            }
        }
        if next.is_empty() {
            return EClassApprox {
                seed,
                members,
                depth_used,
                exhausted: true,
            };
        }
        if depth_used == cfg.depth {
            return EClassApprox {
                seed,
                members,
                depth_used,
                exhausted: false,
            };
        }
        let start = members.len();
        members.extend(next);
        frontier = start..members.len();
        depth_used += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule_index: usize,
    pub rule: Rule,
    /// Index of the bridging term in the closure it was drawn from.
    pub member_index: usize,
    pub position: Position,
    pub substitution: Substitution,
    /// The equivalent term on which the rule fired.
    pub bridging: GroundTerm,
    pub result: GroundTerm,
}

impl fmt::Display for RewriteStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}  {}  {} --> {}", self.position, self.rule_index, self.bridging, self.result)
    }
}

#[derive(Debug, Clone)]
pub struct StepSet {
    pub steps: Vec<RewriteStep>,
    pub class: EClassApprox,
}

impl StepSet {
    /// False when the closure hit its budget and steps may be missing.
    pub fn complete(&self) -> bool {
        self.class.exhausted
    }
}

/// Every rule application on every member of the closure of `t`.
pub fn rewrite_step<T: Theory + ?Sized>(th: &T, t: &GroundTerm, root_sort: &Sort, cfg: &ClosureConfig) -> StepSet {
    steps_on_class(th, e_class_bounded(th, t, root_sort, cfg), root_sort)
}

/// Every rule application on every member of an already computed closure.
pub fn steps_on_class<T: Theory + ?Sized>(th: &T, class: EClassApprox, root_sort: &Sort) -> StepSet {
    let mut steps = Vec::new();
    for (member_index, m) in class.members.iter().enumerate() {
        let mut found = th.apply_all(m, root_sort, th.rule_pairs(), None);
        found.sort_by_key(|(rule_index, _)| *rule_index);
        for (rule_index, app) in found {
            steps.push(RewriteStep {
                rule_index,
                rule: th.rules()[rule_index].clone(),
                member_index,
                position: app.position,
                substitution: app.substitution,
                bridging: m.clone(),
                result: app.result,
            });
        }
    }
    StepSet { steps, class }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    LeftmostInnermost,
    LeftmostOutermost,
    ExhaustiveBreadth,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "leftmost-innermost" | "innermost" => Ok(Strategy::LeftmostInnermost),
            "leftmost-outermost" | "outermost" => Ok(Strategy::LeftmostOutermost),
            "exhaustive-breadth" | "breadth" => Ok(Strategy::ExhaustiveBreadth),
            other => Err(format!(
                "unknown strategy `{other}` (expected leftmost-innermost, leftmost-outermost or exhaustive-breadth)"
            )),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::LeftmostInnermost => "leftmost-innermost",
            Strategy::LeftmostOutermost => "leftmost-outermost",
            Strategy::ExhaustiveBreadth => "exhaustive-breadth",
        })
    }
}

/// Pre-order: a position comes before everything below it.
fn outermost_cmp(p: &Position, q: &Position) -> Ordering {
    p.0.cmp(&q.0)
}

/// Post-order: everything below a position comes before it.
fn innermost_cmp(p: &Position, q: &Position) -> Ordering {
    for (a, b) in p.0.iter().zip(&q.0) {
        if a != b {
            return a.cmp(b);
        }
    }
    q.0.len().cmp(&p.0.len())
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub steps: Vec<RewriteStep>,
    /// Every closure reached its fixpoint.
    pub complete: bool,
    /// The run stopped because nothing applied.
    pub normal_form: bool,
}

pub fn rewrite_trace<T: Theory + ?Sized>(
    th: &T,
    t: &GroundTerm,
    strategy: Strategy,
    max_steps: usize,
    cfg: &ClosureConfig,
) -> Option<Trace> {
    let root_sort = th.sort_of(&th.normalize(t.clone()))?;
    let mut trace = Trace {
        steps: Vec::new(),
        complete: true,
        normal_form: false,
    };
    if strategy == Strategy::ExhaustiveBreadth {
        let start = th.normalize(t.clone());
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(cur) = queue.pop_front() {
            let set = rewrite_step(th, &cur, &root_sort, cfg);
            trace.complete &= set.complete();
            for step in set.steps {
                if trace.steps.len() == max_steps {
                    return Some(trace);
                }
                if seen.insert(step.result.clone()) {
                    queue.push_back(step.result.clone());
                }
                trace.steps.push(step);
            }
        }
        trace.normal_form = true;
        return Some(trace);
    }
    let cmp = match strategy {
        Strategy::LeftmostOutermost => outermost_cmp,
        _ => innermost_cmp,
    };
    let mut cur = th.normalize(t.clone());
    while trace.steps.len() < max_steps {
        let set = rewrite_step(th, &cur, &root_sort, cfg);
        trace.complete &= set.complete();
        let Some(step) = set.steps.into_iter().min_by(|a, b| {
            a.member_index
                .cmp(&b.member_index)
                .then_with(|| cmp(&a.position, &b.position))
                .then_with(|| a.rule_index.cmp(&b.rule_index))
        }) else {
            trace.normal_form = true;
            break;
        };
        cur = step.result.clone();
        trace.steps.push(step);
    }
    Some(trace)
}
