//! Order-sorted to many-sorted translation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::poset::{SortPoset, TieBreak};
use crate::specfmt::cast_name;
use crate::terms::{
    Equation, GroundTerm, MSAlgebra, MSSignature, OSAlgebra, OSSignature, Operator, PatternTerm, Rule,
    SignatureError, Sort, SortDiscipline, Symbol, TermError,
};
use crate::validity::{self, argument_compatible, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("algebra is not translatable: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotStrictlySensible(Vec<Violation>),
    #[error("rename collision: {0}")]
    RenameCollision(String),
    #[error("no subsort path from {from} to {to}")]
    UntranslatableSort { from: Sort, to: Sort },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("translated algebra is ill-formed: {0}")]
    InvalidOutput(String),
}

/// The generated cast operators and the canonical chain for every strict
/// subsort relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CastTable {
    casts: Vec<Operator>,
    by_name: HashMap<Symbol, (Sort, Sort)>,
    canonical: HashMap<(Sort, Sort), Vec<Sort>>,
    chains: HashMap<(Sort, Sort), Vec<Symbol>>,
    tie: TieBreak,
}

impl CastTable {
    pub fn new(poset: &SortPoset, tie: TieBreak) -> Self {
        let mut casts = Vec::new();
        let mut by_name = HashMap::new();
        for (a, b) in poset.base_pairs() {
            let name = cast_name(a, b);
            by_name.insert(name.clone(), (a.clone(), b.clone()));
            casts.push(Operator::new(name, vec![a.clone()], b.clone()));
        }
        let mut canonical = HashMap::new();
        let mut chains = HashMap::new();
        for (a, b) in poset.closure_pairs() {
            if a != b {
                let path = poset
                    .canonical_path(&a, &b, tie)
                    .expect("sorts come from the poset")
                    .expect("a < b has a path");
                chains.insert((a.clone(), b.clone()), path.windows(2).map(|w| cast_name(&w[0], &w[1])).collect());
                canonical.insert((a, b), path);
            }
        }
        Self {
            casts,
            by_name,
            canonical,
            chains,
            tie,
        }
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie
    }

    /// One operator per declared subsort pair, in declaration order.
    pub fn operators(&self) -> &[Operator] {
        &self.casts
    }

    /// The pair realised by a cast constructor.
    pub fn cast_pair(&self, head: &Symbol) -> Option<&(Sort, Sort)> {
        self.by_name.get(head)
    }

    pub fn is_cast(&self, head: &Symbol) -> bool {
        self.by_name.contains_key(head)
    }

    /// Whether `a ≤ b` in the source order.
    pub fn le(&self, a: &Sort, b: &Sort) -> bool {
        a == b || self.canonical.contains_key(&(a.clone(), b.clone()))
    }

    /// The canonical path for `a < b`, including both ends.
    pub fn canonical_path(&self, a: &Sort, b: &Sort) -> Option<&[Sort]> {
        self.canonical.get(&(a.clone(), b.clone())).map(Vec::as_slice)
    }

    /// The cast constructors of the canonical chain from `a` to `b`,
    /// innermost first. Empty when `a == b`.
    pub fn chain(&self, a: &Sort, b: &Sort) -> Result<Vec<Symbol>, TranslateError> {
        if a == b {
            return Ok(Vec::new());
        }
        self.chains
            .get(&(a.clone(), b.clone()))
            .cloned()
            .ok_or_else(|| TranslateError::UntranslatableSort {
                from: a.clone(),
                to: b.clone(),
            })
    }

    pub fn wrap(&self, t: GroundTerm, a: &Sort, b: &Sort) -> Result<GroundTerm, TranslateError> {
        Ok(self
            .chain(a, b)?
            .into_iter()
            .fold(t, |acc, c| GroundTerm::new(c, vec![acc])))
    }

    pub fn wrap_pattern(&self, p: PatternTerm, a: &Sort, b: &Sort) -> Result<PatternTerm, TranslateError> {
        Ok(self
            .chain(a, b)?
            .into_iter()
            .fold(p, |acc, c| PatternTerm::node(c, vec![acc])))
    }

    /// Splits a term into its top cast chain and the core below it. Returns
    /// the core, the core's sort as seen by the lowest cast and the sort
    /// produced by the highest cast; both sorts are `None` when there is no
    /// chain.
    pub fn decompose<'t>(&self, t: &'t GroundTerm) -> (&'t GroundTerm, Option<(Sort, Sort)>) {
        let Some((_, top)) = self.by_name.get(&t.head) else {
            return (t, None);
        };
        let mut cur = t;
        let mut bottom = top;
        while let Some((a, _)) = self.by_name.get(&cur.head) {
            bottom = a;
            cur = &cur.args[0];
        }
        (cur, Some((bottom.clone(), top.clone())))
    }

    /// Replaces every maximal cast chain by the canonical chain between the
    /// same two sorts. Two well-formed terms are core equal exactly when
    /// their canonical forms coincide.
    pub fn canonicalize(&self, t: &GroundTerm) -> GroundTerm {
        let (core, ends) = self.decompose(t);
        let core = GroundTerm::new(core.head.clone(), core.args.iter().map(|a| self.canonicalize(a)).collect());
        match ends {
            None => core,
            // A chain that returns to its start sort cannot occur in an
            // acyclic order; keep it unchanged rather than guess.
            Some((a, b)) if a == b => t.clone(),
            Some((a, b)) => self.wrap(core, &a, &b).unwrap_or_else(|_| t.clone()),
        }
    }

    /// Nodes that are not casts.
    pub fn core_size(&self, t: &GroundTerm) -> usize {
        let own = usize::from(!self.is_cast(&t.head));
        own + t.args.iter().map(|a| self.core_size(a)).sum::<usize>()
    }
}

/// Everything needed to translate and invert terms.
#[derive(Debug, Clone)]
pub struct TranslationMap {
    source: OSSignature,
    /// Representative operator index for each source operator index.
    representative_of: Vec<usize>,
    rename_of: BTreeMap<Operator, Symbol>,
    original_of: HashMap<Symbol, Symbol>,
    casts: CastTable,
}

impl TranslationMap {
    pub fn source(&self) -> &OSSignature {
        &self.source
    }

    pub fn casts(&self) -> &CastTable {
        &self.casts
    }

    pub fn tie_break(&self) -> TieBreak {
        self.casts.tie
    }

    pub fn representative_of(&self, op: &Operator) -> Option<&Operator> {
        let ops = self.source.operators();
        let i = ops.iter().position(|o| o == op)?;
        Some(&ops[self.representative_of[i]])
    }

    /// Representatives in source declaration order.
    pub fn representatives(&self) -> Vec<&Operator> {
        let ops = self.source.operators();
        let reps: BTreeSet<usize> = self.representative_of.iter().copied().collect();
        reps.into_iter().map(|i| &ops[i]).collect()
    }

    /// Translated constructor name of a representative.
    pub fn rename_of(&self, rep: &Operator) -> Option<&Symbol> {
        self.rename_of.get(rep)
    }

    /// Source constructor of a translated, non-cast constructor.
    pub fn original_constructor(&self, translated: &Symbol) -> Option<&Symbol> {
        self.original_of.get(translated)
    }

    pub fn canonical_path(&self, from: &Sort, to: &Sort) -> Result<Vec<Sort>, TranslateError> {
        self.casts
            .canonical_path(from, to)
            .map(<[Sort]>::to_vec)
            .ok_or_else(|| TranslateError::UntranslatableSort {
                from: from.clone(),
                to: to.clone(),
            })
    }

    /// The representative and its translated name for a node whose
    /// children have the given least sorts.
    fn resolve(&self, head: &Symbol, child_sorts: &[Sort], shown: impl Fn() -> String) -> Result<(&Operator, &Symbol), TranslateError> {
        let ops = self.source.operators();
        let admitting = self.source.admitting(head, child_sorts);
        let Some(&first) = admitting.first() else {
            return Err(TermError::IllFormedTerm {
                term: shown(),
                reason: format!("no `{head}` operator accepts these argument sorts"),
            }
            .into());
        };
        let rep = &ops[self.representative_of[first]];
        Ok((rep, &self.rename_of[rep]))
    }

    /// Translates a ground term, returning it with its sort. With
    /// `expected`, the root is cast up to that sort.
    pub fn tr_ground(&self, t: &GroundTerm, expected: Option<&Sort>) -> Result<(GroundTerm, Sort), TranslateError> {
        let (args, sorts): (Vec<GroundTerm>, Vec<Sort>) = t
            .args
            .iter()
            .map(|a| self.tr_ground(a, None))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        let (rep, name) = self.resolve(&t.head, &sorts, || t.to_string())?;
        let args = args
            .into_iter()
            .zip(&sorts)
            .zip(&rep.arg_sorts)
            .map(|((a, have), want)| self.casts.wrap(a, have, want))
            .collect::<Result<Vec<_>, _>>()?;
        let out = GroundTerm::new(name.clone(), args);
        match expected {
            Some(e) => Ok((self.casts.wrap(out, &rep.target, e)?, e.clone())),
            None => Ok((out, rep.target.clone())),
        }
    }

    pub fn tr_pattern(&self, p: &PatternTerm, expected: Option<&Sort>) -> Result<(PatternTerm, Sort), TranslateError> {
        let (out, sort) = match p {
            PatternTerm::Var { sort, .. } => (p.clone(), sort.clone()),
            PatternTerm::Node { head, args } => {
                let (targs, sorts): (Vec<PatternTerm>, Vec<Sort>) = args
                    .iter()
                    .map(|a| self.tr_pattern(a, None))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .unzip();
                let (rep, name) = self.resolve(head, &sorts, || p.to_string())?;
                let targs = targs
                    .into_iter()
                    .zip(&sorts)
                    .zip(&rep.arg_sorts)
                    .map(|((a, have), want)| self.casts.wrap_pattern(a, have, want))
                    .collect::<Result<Vec<_>, _>>()?;
                (PatternTerm::node(name.clone(), targs), rep.target.clone())
            }
        };
        match expected {
            Some(e) => Ok((self.casts.wrap_pattern(out, &sort, e)?, e.clone())),
            None => Ok((out, sort)),
        }
    }

    /// Strips casts and restores source constructor names.
    pub fn invert(&self, t: &GroundTerm) -> GroundTerm {
        let (core, _) = self.casts.decompose(t);
        let head = self.original_of.get(&core.head).cloned().unwrap_or_else(|| core.head.clone());
        GroundTerm::new(head, core.args.iter().map(|a| self.invert(a)).collect())
    }

    pub fn canonicalize(&self, t: &GroundTerm) -> GroundTerm {
        self.casts.canonicalize(t)
    }
}

/// Collapses each argument compatible group to its maximal representative.
/// Returns the representative index of every operator.
pub fn select_representatives(alg: &OSAlgebra) -> Result<Vec<usize>, TranslateError> {
    let (ok, reps, violations) = validity::check_maximal_argument_bounding(alg);
    if !ok {
        return Err(TranslateError::NotStrictlySensible(violations));
    }
    Ok(reps.0.into_iter().map(|r| r.expect("checked above")).collect())
}

/// Names for the representatives. Representatives sharing a constructor get
/// the target sort appended, then the argument sorts as well if that is
/// still ambiguous.
pub fn rename_constructors(
    reps: &[&Operator],
    reserved: &BTreeSet<Symbol>,
) -> Result<BTreeMap<Operator, Symbol>, TranslateError> {
    let mut by_constructor: BTreeMap<&Symbol, Vec<&Operator>> = BTreeMap::new();
    for r in reps {
        by_constructor.entry(&r.constructor).or_default().push(r);
    }
    let mut out = BTreeMap::new();
    let mut taken: BTreeSet<Symbol> = reserved.clone();
    // Constructors that keep their name are claimed first.
    for (c, group) in &by_constructor {
        if group.len() == 1 {
            taken.insert((*c).clone());
            out.insert(group[0].clone(), (*c).clone());
        }
    }
    for (c, group) in &by_constructor {
        if group.len() == 1 {
            continue;
        }
        let by_target = |o: &Operator| Symbol::new(format!("{c}{}", o.target));
        let by_profile = |o: &Operator| {
            let args: String = o.arg_sorts.iter().map(Sort::as_str).collect();
            Symbol::new(format!("{c}{args}{}", o.target))
        };
        let first: Vec<Symbol> = group.iter().map(|o| by_target(o)).collect();
        let unique_targets = first.iter().collect::<BTreeSet<_>>().len() == first.len();
        for o in group {
            let mut name = if unique_targets { by_target(o) } else { by_profile(o) };
            if taken.contains(&name) && unique_targets {
                name = by_profile(o);
            }
            if !taken.insert(name.clone()) {
                return Err(TranslateError::RenameCollision(format!(
                    "cannot find a fresh name for `{o}`; `{name}` is taken"
                )));
            }
            out.insert((*o).clone(), name);
        }
    }
    Ok(out)
}

/// One unary `Cast_a_to_b : a -> b` per declared subsort pair.
pub fn generate_cast_operators(poset: &SortPoset) -> Vec<Operator> {
    CastTable::new(poset, TieBreak::default()).casts
}

/// Equations identifying each non-canonical path with the canonical one.
pub fn generate_core_equations(poset: &SortPoset, tie: TieBreak) -> Vec<Equation> {
    let chain = |path: &[Sort]| {
        path.windows(2).fold(PatternTerm::var("A", path[0].clone()), |acc, w| {
            PatternTerm::node(cast_name(&w[0], &w[1]), vec![acc])
        })
    };
    poset
        .find_diamonds(tie)
        .into_iter()
        .map(|d| Equation::new(chain(&d.path_a), chain(&d.path_b)))
        .collect()
}

/// Translates both sides of each equation at their common sort.
pub fn tr_equations(tm: &TranslationMap, eqs: &[Equation]) -> Result<Vec<Equation>, TranslateError> {
    eqs.iter()
        .map(|e| {
            let sort = tm.source.pattern_sort(&e.lhs)?;
            let (l, _) = tm.tr_pattern(&e.lhs, Some(&sort))?;
            let (r, _) = tm.tr_pattern(&e.rhs, Some(&sort))?;
            Ok(Equation::new(l, r))
        })
        .collect()
}

/// Translates each rule, casting the right side up to the left side's sort.
pub fn tr_rules(tm: &TranslationMap, rules: &[Rule]) -> Result<Vec<Rule>, TranslateError> {
    rules
        .iter()
        .map(|r| {
            let (l, sort) = tm.tr_pattern(&r.lhs, None)?;
            let (rhs, _) = tm.tr_pattern(&r.rhs, Some(&sort))?;
            Ok(Rule::new(l, rhs))
        })
        .collect()
}

/// Operator pairs of the translated signature that share a source
/// constructor and arity but have a common supersort at every position.
pub fn overlapping_translated_operators(
    source: &SortPoset,
    tm: &TranslationMap,
    ms: &MSSignature,
) -> Vec<(Operator, Operator)> {
    let core: Vec<(Operator, Symbol)> = ms
        .operators()
        .iter()
        .zip(ms.non_core_flags())
        .filter(|(_, &nc)| !nc)
        .map(|(o, _)| {
            let orig = tm.original_constructor(&o.constructor).cloned().unwrap_or_else(|| o.constructor.clone());
            (Operator::new(orig.clone(), o.arg_sorts.clone(), o.target.clone()), orig)
        })
        .collect();
    let mut out = Vec::new();
    for (i, (f, _)) in core.iter().enumerate() {
        for (g, _) in &core[i + 1..] {
            if argument_compatible(source, f, g) {
                out.push((f.clone(), g.clone()));
            }
        }
    }
    out
}

pub fn translate_algebra(alg: &OSAlgebra) -> Result<(MSAlgebra, TranslationMap), TranslateError> {
    translate_algebra_with(alg, TieBreak::default())
}

pub fn translate_algebra_with(alg: &OSAlgebra, tie: TieBreak) -> Result<(MSAlgebra, TranslationMap), TranslateError> {
    let report = validity::validate(alg);
    if !report.is_translatable() {
        return Err(TranslateError::NotStrictlySensible(report.violations));
    }
    let sig = &alg.signature;
    let ops = sig.operators();
    let representative_of = select_representatives(alg)?;
    let rep_set: BTreeSet<usize> = representative_of.iter().copied().collect();
    let reps: Vec<&Operator> = rep_set.iter().map(|&i| &ops[i]).collect();

    let casts = CastTable::new(sig.poset(), tie);
    let cast_names: BTreeSet<Symbol> = casts.casts.iter().map(|c| c.constructor.clone()).collect();
    for c in sig.constructors() {
        if cast_names.contains(&c) {
            return Err(TranslateError::RenameCollision(format!(
                "constructor `{c}` clashes with a generated cast"
            )));
        }
    }
    // Renamed constructors must avoid every source constructor that stays
    // in use as well as the casts.
    let mut reserved = cast_names.clone();
    reserved.extend(sig.constructors().into_iter().filter(|c| {
        reps.iter().filter(|r| &r.constructor == c).count() == 1
    }));
    let rename_of = rename_constructors(&reps, &reserved)?;
    let original_of = rename_of
        .iter()
        .map(|(o, n)| (n.clone(), o.constructor.clone()))
        .collect();

    let mut ms_ops: Vec<Operator> = reps
        .iter()
        .map(|r| Operator::new(rename_of[*r].clone(), r.arg_sorts.clone(), r.target.clone()))
        .collect();
    let mut non_core = vec![false; ms_ops.len()];
    ms_ops.extend(casts.casts.iter().cloned());
    non_core.resize(ms_ops.len(), true);
    let ms_sig = MSSignature::new(sig.sorts().to_vec(), ms_ops, non_core)?;

    let tm = TranslationMap {
        source: sig.clone(),
        representative_of,
        rename_of,
        original_of,
        casts,
    };
    let equations = tr_equations(&tm, &alg.equations)?;
    let core = generate_core_equations(sig.poset(), tie);
    let rules = tr_rules(&tm, &alg.rules)?;
    let ms = MSAlgebra::new(alg.name.clone(), ms_sig, equations, core, rules)
        .map_err(|e| TranslateError::InvalidOutput(e.to_string()))?;
    Ok((ms, tm))
}
