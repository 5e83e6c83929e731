//! Sorts, operators, signatures, terms and the two algebra containers.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::poset::{build_poset, PosetError, SortPoset};

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: impl AsRef<str>) -> Self {
                Self(Arc::from(name.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }
    };
}

name_type!(
    /// A sort name.
    Sort
);
name_type!(
    /// A constructor or variable name.
    Symbol
);

/// An operator declaration `constructor : arg_sorts -> target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operator {
    pub constructor: Symbol,
    pub arg_sorts: Vec<Sort>,
    pub target: Sort,
}

impl Operator {
    pub fn new(constructor: impl Into<Symbol>, arg_sorts: Vec<Sort>, target: impl Into<Sort>) -> Self {
        Self {
            constructor: constructor.into(),
            arg_sorts,
            target: target.into(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arg_sorts.len()
    }
}

impl From<String> for Symbol {
    fn from(s: String) -> Self {
        Self::new(s)
    }
}

impl From<String> for Sort {
    fn from(s: String) -> Self {
        Self::new(s)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :", self.constructor)?;
        for s in &self.arg_sorts {
            write!(f, " {s}")?;
        }
        write!(f, " -> {}", self.target)
    }
}

/// A path from the root of a term: the sequence of child indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        Self(p)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("/");
        }
        for i in &self.0 {
            write!(f, "/{i}")?;
        }
        Ok(())
    }
}

/// A variable-free constructor tree.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundTerm {
    pub head: Symbol,
    pub args: Vec<GroundTerm>,
}

impl GroundTerm {
    pub fn new(head: impl Into<Symbol>, args: Vec<GroundTerm>) -> Self {
        Self {
            head: head.into(),
            args,
        }
    }

    pub fn constant(head: impl Into<Symbol>) -> Self {
        Self::new(head, Vec::new())
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.args.iter().map(GroundTerm::size).sum::<usize>()
    }

    /// Constants have height 0.
    pub fn height(&self) -> usize {
        self.args.iter().map(|a| a.height() + 1).max().unwrap_or(0)
    }

    pub fn subterm(&self, pos: &Position) -> Option<&GroundTerm> {
        pos.0.iter().try_fold(self, |t, &i| t.args.get(i))
    }

    /// A copy of `self` with the subterm at `pos` replaced.
    pub fn replace(&self, pos: &Position, with: GroundTerm) -> Option<GroundTerm> {
        fn go(t: &GroundTerm, path: &[usize], with: GroundTerm) -> Option<GroundTerm> {
            match path.split_first() {
                None => Some(with),
                Some((&i, rest)) => {
                    let child = t.args.get(i)?;
                    let mut args = t.args.clone();
                    args[i] = go(child, rest, with)?;
                    Some(GroundTerm::new(t.head.clone(), args))
                }
            }
        }
        go(self, &pos.0, with)
    }

    /// All positions in pre-order (parents before children, left to right).
    pub fn positions(&self) -> Vec<Position> {
        fn go(t: &GroundTerm, here: &mut Vec<usize>, out: &mut Vec<Position>) {
            out.push(Position(here.clone()));
            for (i, a) in t.args.iter().enumerate() {
                here.push(i);
                go(a, here, out);
                here.pop();
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.head.as_str())?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A term that may contain sort-annotated variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternTerm {
    Var { name: Symbol, sort: Sort },
    Node { head: Symbol, args: Vec<PatternTerm> },
}

impl PatternTerm {
    pub fn var(name: impl Into<Symbol>, sort: impl Into<Sort>) -> Self {
        Self::Var {
            name: name.into(),
            sort: sort.into(),
        }
    }

    pub fn node(head: impl Into<Symbol>, args: Vec<PatternTerm>) -> Self {
        Self::Node {
            head: head.into(),
            args,
        }
    }

    pub fn constant(head: impl Into<Symbol>) -> Self {
        Self::node(head, Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Self::Var { .. })
    }

    /// The annotated variables of the pattern.
    pub fn variables(&self) -> Result<BTreeMap<Symbol, Sort>, TermError> {
        let mut out = BTreeMap::new();
        self.collect_variables(&mut out)?;
        Ok(out)
    }

    pub(crate) fn collect_variables(&self, out: &mut BTreeMap<Symbol, Sort>) -> Result<(), TermError> {
        match self {
            Self::Var { name, sort } => match out.get(name) {
                Some(prev) if prev != sort => Err(TermError::InconsistentAnnotation {
                    var: name.clone(),
                    first: prev.clone(),
                    second: sort.clone(),
                }),
                Some(_) => Ok(()),
                None => {
                    out.insert(name.clone(), sort.clone());
                    Ok(())
                }
            },
            Self::Node { args, .. } => args.iter().try_for_each(|a| a.collect_variables(out)),
        }
    }

    /// Variable names in left-to-right order of first occurrence.
    pub fn variable_names(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        fn go(p: &PatternTerm, out: &mut BTreeSet<Symbol>) {
            match p {
                PatternTerm::Var { name, .. } => {
                    out.insert(name.clone());
                }
                PatternTerm::Node { args, .. } => args.iter().for_each(|a| go(a, out)),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn to_ground(&self) -> Option<GroundTerm> {
        match self {
            Self::Var { .. } => None,
            Self::Node { head, args } => Some(GroundTerm::new(
                head.clone(),
                args.iter().map(PatternTerm::to_ground).collect::<Option<_>>()?,
            )),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Self::Var { .. } => 1,
            Self::Node { args, .. } => 1 + args.iter().map(PatternTerm::size).sum::<usize>(),
        }
    }
}

impl From<&GroundTerm> for PatternTerm {
    fn from(t: &GroundTerm) -> Self {
        Self::node(t.head.clone(), t.args.iter().map(PatternTerm::from).collect())
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Var { name, sort } => write!(f, "{name}:{sort}"),
            Self::Node { head, args } => {
                f.write_str(head.as_str())?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The annotated variables of `p`; fails when one name carries two sorts.
pub fn variables_of(p: &PatternTerm) -> Result<BTreeSet<(Symbol, Sort)>, TermError> {
    Ok(p.variables()?.into_iter().collect())
}

/// A finite map from variable names to ground terms.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Substitution(pub BTreeMap<Symbol, GroundTerm>);

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &Symbol) -> Option<&GroundTerm> {
        self.0.get(name)
    }

    pub fn insert(&mut self, name: Symbol, t: GroundTerm) -> Option<GroundTerm> {
        self.0.insert(name, t)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Replaces every variable of `p`, without any sort checks.
    pub fn instantiate(&self, p: &PatternTerm) -> Result<GroundTerm, TermError> {
        match p {
            PatternTerm::Var { name, .. } => self
                .get(name)
                .cloned()
                .ok_or_else(|| TermError::UnboundVariable(name.clone())),
            PatternTerm::Node { head, args } => Ok(GroundTerm::new(
                head.clone(),
                args.iter().map(|a| self.instantiate(a)).collect::<Result<_, _>>()?,
            )),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} |-> {v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Equation {
    pub lhs: PatternTerm,
    pub rhs: PatternTerm,
}

impl Equation {
    pub fn new(lhs: PatternTerm, rhs: PatternTerm) -> Self {
        Self { lhs, rhs }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: PatternTerm,
    pub rhs: PatternTerm,
}

impl Rule {
    pub fn new(lhs: PatternTerm, rhs: PatternTerm) -> Self {
        Self { lhs, rhs }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} => {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("ill-formed term {term}: {reason}")]
    IllFormedTerm { term: String, reason: String },
    #[error("term {term} has incomparable candidate sorts {candidates:?}")]
    AmbiguousSort { term: String, candidates: Vec<Sort> },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(Symbol),
    #[error("variable `{var}` of sort {expected} cannot be bound to {term} of sort {found}")]
    SortViolation {
        var: Symbol,
        expected: Sort,
        found: Sort,
        term: String,
    },
    #[error("variable `{var}` is annotated with both {first} and {second}")]
    InconsistentAnnotation { var: Symbol, first: Sort, second: Sort },
}

/// What the two kinds of signature share: a way to sort terms and a rule for
/// which actual sorts a declared sort admits.
pub trait SortDiscipline {
    /// The least sort (order-sorted) or the sort (many-sorted) of `t`.
    fn term_sort(&self, t: &GroundTerm) -> Result<Sort, TermError>;

    /// Sort of a pattern whose variables have their declared sorts.
    fn pattern_sort(&self, p: &PatternTerm) -> Result<Sort, TermError>;

    /// Whether a term of sort `actual` may stand where `declared` is expected.
    fn admits(&self, actual: &Sort, declared: &Sort) -> bool;
}

/// Whether `t` belongs to the ground term algebra of `sig`.
pub fn well_formed_ground<S: SortDiscipline + ?Sized>(sig: &S, t: &GroundTerm) -> bool {
    sig.term_sort(t).is_ok()
}

/// Replaces each variable of `p` by its image under `h`, checking the sort
/// side conditions of `sig`.
pub fn apply_substitution<S: SortDiscipline + ?Sized>(
    sig: &S,
    p: &PatternTerm,
    h: &Substitution,
) -> Result<GroundTerm, TermError> {
    for (name, declared) in p.variables()? {
        let image = h.get(&name).ok_or_else(|| TermError::UnboundVariable(name.clone()))?;
        let actual = sig.term_sort(image)?;
        if !sig.admits(&actual, &declared) {
            return Err(TermError::SortViolation {
                var: name,
                expected: declared,
                found: actual,
                term: image.to_string(),
            });
        }
    }
    let result = h.instantiate(p)?;
    sig.term_sort(&result)?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("sort `{0}` is declared twice")]
    DuplicateSort(Sort),
    #[error("operator `{0}` is declared twice")]
    DuplicateOperator(Operator),
    #[error("operator `{op}` mentions unknown sort `{sort}`")]
    UnknownSort { op: Operator, sort: Sort },
    #[error("cast operator `{0}` must be unary")]
    NonUnaryCast(Operator),
}

fn check_sorts(sorts: &[Sort]) -> Result<(), SignatureError> {
    let mut seen = BTreeSet::new();
    for s in sorts {
        if !seen.insert(s) {
            return Err(SignatureError::DuplicateSort(s.clone()));
        }
    }
    Ok(())
}

/// With `exact_profile`, two operators may not share constructor and
/// argument sorts; otherwise only identical declarations are rejected.
fn check_operators(sorts: &[Sort], operators: &[Operator], exact_profile: bool) -> Result<(), SignatureError> {
    let known: BTreeSet<&Sort> = sorts.iter().collect();
    let mut seen = BTreeSet::new();
    for op in operators {
        for s in op.arg_sorts.iter().chain(std::iter::once(&op.target)) {
            if !known.contains(s) {
                return Err(SignatureError::UnknownSort {
                    op: op.clone(),
                    sort: s.clone(),
                });
            }
        }
        let target = if exact_profile { None } else { Some(&op.target) };
        if !seen.insert((&op.constructor, &op.arg_sorts, target)) {
            return Err(SignatureError::DuplicateOperator(op.clone()));
        }
    }
    Ok(())
}

/// An order-sorted signature `(S, O, Φ, Σ)`.
#[derive(Debug, Clone)]
pub struct OSSignature {
    sorts: Vec<Sort>,
    operators: Vec<Operator>,
    poset: SortPoset,
    by_head: HashMap<(Symbol, usize), Vec<usize>>,
}

impl PartialEq for OSSignature {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts && self.poset == other.poset && self.operators == other.operators
    }
}

impl Eq for OSSignature {}

impl OSSignature {
    pub fn new(sorts: Vec<Sort>, subsort_pairs: Vec<(Sort, Sort)>, operators: Vec<Operator>) -> Result<Self, SignatureError> {
        check_sorts(&sorts)?;
        let poset = build_poset(&sorts, &subsort_pairs)?;
        check_operators(&sorts, &operators, false)?;
        let mut by_head: HashMap<(Symbol, usize), Vec<usize>> = HashMap::new();
        for (i, op) in operators.iter().enumerate() {
            by_head.entry((op.constructor.clone(), op.arity())).or_default().push(i);
        }
        Ok(Self {
            sorts,
            operators,
            poset,
            by_head,
        })
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn subsort_pairs(&self) -> &[(Sort, Sort)] {
        self.poset.base_pairs()
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn poset(&self) -> &SortPoset {
        &self.poset
    }

    /// The constructor set Φ.
    pub fn constructors(&self) -> BTreeSet<Symbol> {
        self.operators.iter().map(|o| o.constructor.clone()).collect()
    }

    /// Indices of the operators with this constructor and arity.
    pub fn overloads(&self, head: &Symbol, arity: usize) -> &[usize] {
        self.by_head
            .get(&(head.clone(), arity))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Operators whose argument sorts are supersorts of `child_sorts`.
    pub fn admitting(&self, head: &Symbol, child_sorts: &[Sort]) -> Vec<usize> {
        self.overloads(head, child_sorts.len())
            .iter()
            .copied()
            .filter(|&i| {
                self.operators[i]
                    .arg_sorts
                    .iter()
                    .zip(child_sorts)
                    .all(|(declared, actual)| self.poset.le(actual, declared))
            })
            .collect()
    }

    /// The least target sort among the operators that admit `child_sorts`.
    fn resolve(&self, head: &Symbol, child_sorts: &[Sort], shown: impl Fn() -> String) -> Result<Sort, TermError> {
        let candidates = self.admitting(head, child_sorts);
        if candidates.is_empty() {
            let reason = if self.overloads(head, child_sorts.len()).is_empty() {
                format!("no operator `{head}` of arity {}", child_sorts.len())
            } else {
                format!(
                    "no `{head}` operator accepts argument sorts ({})",
                    child_sorts.iter().map(Sort::as_str).collect::<Vec<_>>().join(", ")
                )
            };
            return Err(TermError::IllFormedTerm { term: shown(), reason });
        }
        let targets: Vec<&Sort> = candidates.iter().map(|&i| &self.operators[i].target).collect();
        targets
            .iter()
            .find(|m| targets.iter().all(|t| self.poset.le(m, t)))
            .map(|m| (*m).clone())
            .ok_or_else(|| {
                let mut c: Vec<Sort> = targets.iter().map(|s| (*s).clone()).collect();
                c.sort();
                c.dedup();
                TermError::AmbiguousSort {
                    term: shown(),
                    candidates: c,
                }
            })
    }

    /// Least sort of a node with the given head whose children have the
    /// given least sorts.
    pub fn node_sort(&self, head: &Symbol, child_sorts: &[Sort]) -> Result<Sort, TermError> {
        self.resolve(head, child_sorts, || head.to_string())
    }

    pub fn least_sort(&self, t: &GroundTerm) -> Result<Sort, TermError> {
        let child_sorts = t
            .args
            .iter()
            .map(|a| self.least_sort(a))
            .collect::<Result<Vec<_>, _>>()?;
        self.resolve(&t.head, &child_sorts, || t.to_string())
    }
}

impl SortDiscipline for OSSignature {
    fn term_sort(&self, t: &GroundTerm) -> Result<Sort, TermError> {
        self.least_sort(t)
    }

    fn pattern_sort(&self, p: &PatternTerm) -> Result<Sort, TermError> {
        match p {
            PatternTerm::Var { name, sort } => {
                if self.poset.contains(sort) {
                    Ok(sort.clone())
                } else {
                    Err(TermError::IllFormedTerm {
                        term: p.to_string(),
                        reason: format!("variable `{name}` has unknown sort `{sort}`"),
                    })
                }
            }
            PatternTerm::Node { head, args } => {
                let child_sorts = args
                    .iter()
                    .map(|a| self.pattern_sort(a))
                    .collect::<Result<Vec<_>, _>>()?;
                self.resolve(head, &child_sorts, || p.to_string())
            }
        }
    }

    fn admits(&self, actual: &Sort, declared: &Sort) -> bool {
        self.poset.le(actual, declared)
    }
}

/// A many-sorted signature; `non_core` flags generated cast operators.
#[derive(Debug, Clone)]
pub struct MSSignature {
    sorts: Vec<Sort>,
    operators: Vec<Operator>,
    non_core: Vec<bool>,
    by_profile: HashMap<(Symbol, Vec<Sort>), usize>,
    casts: HashMap<Symbol, usize>,
}

impl PartialEq for MSSignature {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts && self.operators == other.operators && self.non_core == other.non_core
    }
}

impl Eq for MSSignature {}

impl MSSignature {
    pub fn new(sorts: Vec<Sort>, operators: Vec<Operator>, non_core: Vec<bool>) -> Result<Self, SignatureError> {
        assert_eq!(operators.len(), non_core.len(), "one non-core flag per operator");
        check_sorts(&sorts)?;
        check_operators(&sorts, &operators, true)?;
        let mut by_profile = HashMap::new();
        let mut casts = HashMap::new();
        for (i, op) in operators.iter().enumerate() {
            by_profile.insert((op.constructor.clone(), op.arg_sorts.clone()), i);
            if non_core[i] {
                if op.arity() != 1 {
                    return Err(SignatureError::NonUnaryCast(op.clone()));
                }
                casts.insert(op.constructor.clone(), i);
            }
        }
        Ok(Self {
            sorts,
            operators,
            non_core,
            by_profile,
            casts,
        })
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn is_non_core(&self, index: usize) -> bool {
        self.non_core[index]
    }

    pub fn non_core_flags(&self) -> &[bool] {
        &self.non_core
    }

    /// The generated cast operators.
    pub fn casts(&self) -> impl Iterator<Item = &Operator> {
        self.operators
            .iter()
            .zip(&self.non_core)
            .filter(|(_, &nc)| nc)
            .map(|(o, _)| o)
    }

    /// The cast operator with this constructor, if any.
    pub fn cast(&self, head: &Symbol) -> Option<&Operator> {
        self.casts.get(head).map(|&i| &self.operators[i])
    }

    pub fn constructors(&self) -> BTreeSet<Symbol> {
        self.operators.iter().map(|o| o.constructor.clone()).collect()
    }

    pub fn operator(&self, head: &Symbol, arg_sorts: &[Sort]) -> Option<&Operator> {
        self.by_profile
            .get(&(head.clone(), arg_sorts.to_vec()))
            .map(|&i| &self.operators[i])
    }

    fn resolve(&self, head: &Symbol, child_sorts: Vec<Sort>, shown: impl Fn() -> String) -> Result<Sort, TermError> {
        match self.by_profile.get(&(head.clone(), child_sorts)) {
            Some(&i) => Ok(self.operators[i].target.clone()),
            None => Err(TermError::IllFormedTerm {
                term: shown(),
                reason: format!("no `{head}` operator with exactly these argument sorts"),
            }),
        }
    }
}

impl SortDiscipline for MSSignature {
    fn term_sort(&self, t: &GroundTerm) -> Result<Sort, TermError> {
        let child_sorts = t
            .args
            .iter()
            .map(|a| self.term_sort(a))
            .collect::<Result<Vec<_>, _>>()?;
        self.resolve(&t.head, child_sorts, || t.to_string())
    }

    fn pattern_sort(&self, p: &PatternTerm) -> Result<Sort, TermError> {
        match p {
            PatternTerm::Var { name, sort } => {
                if self.sorts.contains(sort) {
                    Ok(sort.clone())
                } else {
                    Err(TermError::IllFormedTerm {
                        term: p.to_string(),
                        reason: format!("variable `{name}` has unknown sort `{sort}`"),
                    })
                }
            }
            PatternTerm::Node { head, args } => {
                let child_sorts = args
                    .iter()
                    .map(|a| self.pattern_sort(a))
                    .collect::<Result<Vec<_>, _>>()?;
                self.resolve(head, child_sorts, || p.to_string())
            }
        }
    }

    fn admits(&self, actual: &Sort, declared: &Sort) -> bool {
        actual == declared
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("{kind} {index} ({text}): {source}")]
    Term {
        kind: &'static str,
        index: usize,
        text: String,
        source: TermError,
    },
}

/// Sorts both sides of an equation or rule, checking that shared variable
/// names carry one sort.
pub(crate) fn side_sorts<S: SortDiscipline + ?Sized>(
    sig: &S,
    lhs: &PatternTerm,
    rhs: &PatternTerm,
) -> Result<(Sort, Sort), TermError> {
    let mut vars = BTreeMap::new();
    lhs.collect_variables(&mut vars)?;
    rhs.collect_variables(&mut vars)?;
    Ok((sig.pattern_sort(lhs)?, sig.pattern_sort(rhs)?))
}

fn check_sides<S: SortDiscipline + ?Sized>(
    sig: &S,
    kind: &'static str,
    index: usize,
    lhs: &PatternTerm,
    rhs: &PatternTerm,
    text: impl fmt::Display,
) -> Result<(), AlgebraError> {
    side_sorts(sig, lhs, rhs).map(|_| ()).map_err(|source| AlgebraError::Term {
        kind,
        index,
        text: text.to_string(),
        source,
    })
}

/// An order-sorted algebra `(S, O, Φ, Σ, E, R)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OSAlgebra {
    pub name: String,
    pub signature: OSSignature,
    pub equations: Vec<Equation>,
    pub rules: Vec<Rule>,
}

impl OSAlgebra {
    /// Checks that every equation and rule side is a well-formed pattern.
    /// Sort-equality of equations and sort-decreasingness of rules are left
    /// to the validity checks.
    pub fn new(
        name: impl Into<String>,
        signature: OSSignature,
        equations: Vec<Equation>,
        rules: Vec<Rule>,
    ) -> Result<Self, AlgebraError> {
        for (i, e) in equations.iter().enumerate() {
            check_sides(&signature, "equation", i, &e.lhs, &e.rhs, e)?;
        }
        for (i, r) in rules.iter().enumerate() {
            check_sides(&signature, "rule", i, &r.lhs, &r.rhs, r)?;
        }
        Ok(Self {
            name: name.into(),
            signature,
            equations,
            rules,
        })
    }
}

/// A many-sorted algebra. `core_equations` holds the generated core-equality
/// equations, kept apart from the translated user equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MSAlgebra {
    pub name: String,
    pub signature: MSSignature,
    pub equations: Vec<Equation>,
    pub core_equations: Vec<Equation>,
    pub rules: Vec<Rule>,
}

impl MSAlgebra {
    /// Checks well-formedness and exact sort equality of both sides of
    /// every equation and rule.
    pub fn new(
        name: impl Into<String>,
        signature: MSSignature,
        equations: Vec<Equation>,
        core_equations: Vec<Equation>,
        rules: Vec<Rule>,
    ) -> Result<Self, AlgebraError> {
        let sides = equations
            .iter()
            .chain(&core_equations)
            .map(|e| ("equation", &e.lhs, &e.rhs, e.to_string()))
            .enumerate()
            .chain(
                rules
                    .iter()
                    .map(|r| ("rule", &r.lhs, &r.rhs, r.to_string()))
                    .enumerate(),
            );
        for (index, (kind, lhs, rhs, text)) in sides {
            let err = |source| AlgebraError::Term {
                kind,
                index,
                text: text.clone(),
                source,
            };
            let (l, r) = side_sorts(&signature, lhs, rhs).map_err(err)?;
            if l != r {
                return Err(err(TermError::IllFormedTerm {
                    term: text.clone(),
                    reason: format!("sides have different sorts {l} and {r}"),
                }));
            }
        }
        Ok(Self {
            name: name.into(),
            signature,
            equations,
            core_equations,
            rules,
        })
    }

    /// Translated equations followed by core equations.
    pub fn all_equations(&self) -> impl Iterator<Item = &Equation> {
        self.equations.iter().chain(&self.core_equations)
    }
}
