//! Classification of order-sorted algebras.

use std::fmt;

use crate::poset::SortPoset;
use crate::terms::{OSAlgebra, Operator, SortDiscipline};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    NotSensible,
    NotStrongSensible,
    OverloadedConstant,
    NoMaximalRepresentative,
    TopNotUnique,
    RuleNotSortDecreasing,
    EquationNotSortEqual,
    IllSortedSide,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::NotSensible => "not sensible",
            ViolationKind::NotStrongSensible => "not strong sensible",
            ViolationKind::OverloadedConstant => "overloaded constant",
            ViolationKind::NoMaximalRepresentative => "no maximal representative",
            ViolationKind::TopNotUnique => "top supersort not unique",
            ViolationKind::RuleNotSortDecreasing => "rule not sort decreasing",
            ViolationKind::EquationNotSortEqual => "equation sides differ in sort",
            ViolationKind::IllSortedSide => "ill-sorted side",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub sensible: bool,
    pub strong_sensible: bool,
    pub maximal_argument_bounding: bool,
    pub strictly_sensible: bool,
    pub unique_tops: bool,
    pub rules_sort_decreasing: bool,
    pub equations_sort_equal: bool,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    /// Everything the translation needs.
    pub fn is_translatable(&self) -> bool {
        self.strictly_sensible && self.unique_tops && self.rules_sort_decreasing && self.equations_sort_equal
    }
}

/// Same constructor, same arity and a common supersort at every position.
pub fn argument_compatible(p: &SortPoset, f: &Operator, g: &Operator) -> bool {
    f.constructor == g.constructor
        && f.arity() == g.arity()
        && f.arg_sorts.iter().zip(&g.arg_sorts).all(|(a, b)| p.compatible(a, b))
}

/// Whether every argument sort of `g` lies below the one of `f`.
fn dominates(p: &SortPoset, f: &Operator, g: &Operator) -> bool {
    f.arg_sorts.iter().zip(&g.arg_sorts).all(|(a, b)| p.le(b, a))
}

fn compatible_pairs(alg: &OSAlgebra) -> Vec<(&Operator, &Operator)> {
    let sig = &alg.signature;
    let ops = sig.operators();
    let mut out = Vec::new();
    for (i, f) in ops.iter().enumerate() {
        for g in &ops[i + 1..] {
            if argument_compatible(sig.poset(), f, g) {
                out.push((f, g));
            }
        }
    }
    out
}

pub fn check_sensible(alg: &OSAlgebra) -> (bool, Vec<Violation>) {
    let p = alg.signature.poset();
    let v: Vec<Violation> = compatible_pairs(alg)
        .into_iter()
        .filter(|(f, g)| !p.compatible(&f.target, &g.target))
        .map(|(f, g)| {
            Violation::new(
                ViolationKind::NotSensible,
                format!("`{f}` and `{g}` are argument compatible but their targets share no supersort"),
            )
        })
        .collect();
    (v.is_empty(), v)
}

pub fn check_strong_sensible(alg: &OSAlgebra) -> (bool, Vec<Violation>) {
    let v: Vec<Violation> = compatible_pairs(alg)
        .into_iter()
        .filter(|(f, g)| f.target != g.target)
        .map(|(f, g)| {
            let kind = if f.arity() == 0 {
                ViolationKind::OverloadedConstant
            } else {
                ViolationKind::NotStrongSensible
            };
            Violation::new(kind, format!("`{f}` and `{g}` are argument compatible with different targets"))
        })
        .collect();
    (v.is_empty(), v)
}

/// For each operator, the index of its position-wise maximal argument
/// compatible operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepresentativeMap(pub Vec<Option<usize>>);

impl RepresentativeMap {
    pub fn get(&self, op: usize) -> Option<usize> {
        self.0[op]
    }
}

pub fn check_maximal_argument_bounding(alg: &OSAlgebra) -> (bool, RepresentativeMap, Vec<Violation>) {
    let sig = &alg.signature;
    let p = sig.poset();
    let ops = sig.operators();
    let mut reps = Vec::with_capacity(ops.len());
    let mut violations = Vec::new();
    for f in ops {
        let class: Vec<&Operator> = sig
            .overloads(&f.constructor, f.arity())
            .iter()
            .map(|&i| &ops[i])
            .filter(|g| argument_compatible(p, f, g))
            .collect();
        let rep = sig.overloads(&f.constructor, f.arity()).iter().copied().find(|&r| {
            class
                .iter()
                .all(|g| argument_compatible(p, &ops[r], g) && dominates(p, &ops[r], g))
        });
        if rep.is_none() {
            violations.push(Violation::new(
                ViolationKind::NoMaximalRepresentative,
                format!("no operator bounds the arguments of everything compatible with `{f}`"),
            ));
        }
        reps.push(rep);
    }
    (violations.is_empty(), RepresentativeMap(reps), violations)
}

pub fn check_rules_sort_decreasing(alg: &OSAlgebra) -> (bool, Vec<Violation>) {
    let sig = &alg.signature;
    let mut v = Vec::new();
    for (i, r) in alg.rules.iter().enumerate() {
        match (sig.pattern_sort(&r.lhs), sig.pattern_sort(&r.rhs)) {
            (Ok(l), Ok(rs)) if sig.poset().le(&rs, &l) => {}
            (Ok(l), Ok(rs)) => v.push(Violation::new(
                ViolationKind::RuleNotSortDecreasing,
                format!("rule {i} `{r}`: right side sort {rs} is not below left side sort {l}"),
            )),
            (Err(e), _) | (_, Err(e)) => {
                v.push(Violation::new(ViolationKind::IllSortedSide, format!("rule {i} `{r}`: {e}")))
            }
        }
    }
    (v.is_empty(), v)
}

pub fn check_equations_sort_equal(alg: &OSAlgebra) -> (bool, Vec<Violation>) {
    let sig = &alg.signature;
    let mut v = Vec::new();
    for (i, e) in alg.equations.iter().enumerate() {
        match (sig.pattern_sort(&e.lhs), sig.pattern_sort(&e.rhs)) {
            (Ok(l), Ok(r)) if l == r => {}
            (Ok(l), Ok(r)) => v.push(Violation::new(
                ViolationKind::EquationNotSortEqual,
                format!("equation {i} `{e}`: sides have sorts {l} and {r}"),
            )),
            (Err(err), _) | (_, Err(err)) => v.push(Violation::new(
                ViolationKind::IllSortedSide,
                format!("equation {i} `{e}`: {err}"),
            )),
        }
    }
    (v.is_empty(), v)
}

pub fn check_unique_tops(alg: &OSAlgebra) -> (bool, Vec<Violation>) {
    let v: Vec<Violation> = alg
        .signature
        .poset()
        .check_unique_tops()
        .into_iter()
        .map(|t| Violation::new(ViolationKind::TopNotUnique, t.to_string()))
        .collect();
    (v.is_empty(), v)
}

pub fn validate(alg: &OSAlgebra) -> ValidityReport {
    let (sensible, mut violations) = check_sensible(alg);
    let (strong_sensible, v) = check_strong_sensible(alg);
    violations.extend(v);
    let (maximal_argument_bounding, _, v) = check_maximal_argument_bounding(alg);
    violations.extend(v);
    let (unique_tops, v) = check_unique_tops(alg);
    violations.extend(v);
    let (rules_sort_decreasing, v) = check_rules_sort_decreasing(alg);
    violations.extend(v);
    let (equations_sort_equal, v) = check_equations_sort_equal(alg);
    violations.extend(v);
    ValidityReport {
        sensible,
        strong_sensible,
        maximal_argument_bounding,
        strictly_sensible: strong_sensible && maximal_argument_bounding,
        unique_tops,
        rules_sort_decreasing,
        equations_sort_equal,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::specfmt::parse_os;
    use crate::terms::{OSSignature, Sort};

    fn s(n: &str) -> Sort {
        Sort::new(n)
    }

    fn op(c: &str, args: &[&str], t: &str) -> Operator {
        Operator::new(c, args.iter().map(|a| s(a)).collect(), t)
    }

    fn imp_with_plus_target(target: &str) -> OSAlgebra {
        let text = fixtures::IMP.replace("op + : nat nat -> AExp", &format!("op + : nat nat -> {target}"));
        parse_os(&text).unwrap()
    }

    fn algebra(sorts: &[&str], pairs: &[(&str, &str)], ops: Vec<Operator>) -> OSAlgebra {
        let sig = OSSignature::new(
            sorts.iter().map(|n| s(n)).collect(),
            pairs.iter().map(|(a, b)| (s(a), s(b))).collect(),
            ops,
        )
        .unwrap();
        OSAlgebra::new("t", sig, vec![], vec![]).unwrap()
    }

    #[test]
    fn imp_is_strictly_sensible() {
        let r = validate(&fixtures::imp());
        assert!(r.sensible && r.strong_sensible && r.maximal_argument_bounding && r.strictly_sensible);
        assert!(r.is_translatable(), "{:?}", r.violations);
    }

    #[test]
    fn argument_compatibility() {
        let imp = fixtures::imp();
        let p = imp.signature.poset();
        assert!(argument_compatible(p, &op("+", &["AExp", "AExp"], "AExp"), &op("+", &["nat", "nat"], "AExp")));
        assert!(!argument_compatible(p, &op("+", &["AExp", "AExp"], "AExp"), &op("+", &["BExp", "BExp"], "BExp")));
        let f = op("-", &["int"], "int");
        assert!(argument_compatible(p, &f, &f));
    }

    #[test]
    fn sensible_but_not_strict() {
        let a = imp_with_plus_target("nat");
        let r = validate(&a);
        assert!(r.sensible);
        assert!(!r.strong_sensible);
        assert!(!r.strictly_sensible);
    }

    #[test]
    fn not_sensible() {
        // Terms built with + on nats no longer have a least sort, so only the
        // signature part is kept.
        let sig_only = fixtures::IMP.split("\neq ").next().unwrap();
        let a = parse_os(&sig_only.replace("op + : nat nat -> AExp", "op + : nat nat -> Stmt")).unwrap();
        assert!(!check_sensible(&a).0);
        let plain = algebra(&["a"], &[], vec![op("k", &[], "a"), op("f", &["a"], "a")]);
        assert!(check_sensible(&plain).0);
    }

    #[test]
    fn overloaded_constants_are_rejected() {
        let a = algebra(&["a", "b"], &[], vec![op("c", &[], "a"), op("c", &[], "b")]);
        let (ok, v) = check_strong_sensible(&a);
        assert!(!ok);
        assert_eq!(v[0].kind, ViolationKind::OverloadedConstant);
    }

    #[test]
    fn representatives() {
        let imp = fixtures::imp();
        let (ok, reps, _) = check_maximal_argument_bounding(&imp);
        assert!(ok);
        let ops = imp.signature.operators();
        let idx = |o: &Operator| ops.iter().position(|x| x == o).unwrap();
        let rep = |o: Operator| &ops[reps.get(idx(&o)).unwrap()];
        assert_eq!(rep(op("+", &["nat", "nat"], "AExp")), &op("+", &["AExp", "AExp"], "AExp"));
        assert_eq!(rep(op("+", &["bool", "bool"], "BExp")), &op("+", &["BExp", "BExp"], "BExp"));
        assert_eq!(rep(op("-", &["nat"], "int")), &op("-", &["int"], "int"));
        assert_eq!(rep(op("v", &["nat"], "Id")), &op("v", &["nat"], "Id"));

        let crossed = algebra(
            &["nat", "int"],
            &[("nat", "int")],
            vec![op("+", &["int", "nat"], "int"), op("+", &["nat", "int"], "int")],
        );
        assert!(!check_maximal_argument_bounding(&crossed).0);
    }

    #[test]
    fn sort_decreasing_rules_and_sort_equal_equations() {
        let base = fixtures::IMP.split("\neq ").next().unwrap().to_string();
        let with = |extra: &str| parse_os(&format!("{base}\n{extra}\n")).unwrap();
        assert!(check_rules_sort_decreasing(&with("rule -(0) => 0")).0);
        assert!(!check_rules_sort_decreasing(&with("rule 0 => -(0)")).0);
        assert!(check_rules_sort_decreasing(&with("rule s(0) => 0")).0);
        assert!(check_equations_sort_equal(&with("eq -(-(A:int)) = A:int")).0);
        assert!(!check_equations_sort_equal(&with("eq -(0) = 0")).0);
        assert!(check_equations_sort_equal(&with("eq A:nat = A:nat")).0);
    }

    #[test]
    fn strictly_sensible_is_the_conjunction() {
        for a in [fixtures::imp(), imp_with_plus_target("nat")] {
            let r = validate(&a);
            assert_eq!(r.strictly_sensible, r.strong_sensible && r.maximal_argument_bounding);
        }
    }
}
