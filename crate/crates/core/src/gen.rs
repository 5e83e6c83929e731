//! Random posets and random strictly sensible algebras for property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::poset::build_poset;
use crate::terms::{Equation, OSAlgebra, OSSignature, Operator, PatternTerm, Rule, Sort, SortDiscipline};
use crate::validity::validate;

/// Size bounds for [`random_algebra`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenConfig {
    pub max_sorts: usize,
    pub max_operators: usize,
    pub max_rules: usize,
    pub max_equations: usize,
    /// Height of generated pattern sides.
    pub pattern_height: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            max_sorts: 5,
            max_operators: 8,
            max_rules: 4,
            max_equations: 4,
            pattern_height: 2,
        }
    }
}

/// Sorts `s0 .. s{n-1}` with subsort pairs that only point to higher
/// indices, so the order is acyclic. Some pairs may be implied by others.
pub fn random_poset<R: Rng + ?Sized>(rng: &mut R, max_sorts: usize) -> (Vec<Sort>, Vec<(Sort, Sort)>) {
    let n = rng.gen_range(1..=max_sorts.max(1));
    let sorts: Vec<Sort> = (0..n).map(|i| Sort::new(format!("s{i}"))).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.3) {
                pairs.push((sorts[i].clone(), sorts[j].clone()));
            }
        }
    }
    (sorts, pairs)
}

struct PatternGen<'a> {
    sig: &'a OSSignature,
    vars: Vec<(String, Sort)>,
}

impl PatternGen<'_> {
    /// A pattern whose least sort is at most `want`; non-variable at the
    /// root when `node` is set.
    fn pattern<R: Rng + ?Sized>(&self, rng: &mut R, want: &Sort, height: usize, node: bool) -> Option<PatternTerm> {
        let p = self.sig.poset();
        let vars: Vec<&(String, Sort)> = self.vars.iter().filter(|(_, s)| p.le(s, want)).collect();
        let ops: Vec<&Operator> = self
            .sig
            .operators()
            .iter()
            .filter(|o| p.le(&o.target, want) && (height > 0 || o.arity() == 0))
            .collect();
        let use_var = !node && !vars.is_empty() && (ops.is_empty() || rng.gen_bool(0.4));
        if use_var {
            let (name, sort) = vars.choose(rng)?;
            return Some(PatternTerm::var(name.as_str(), sort.clone()));
        }
        let op = *ops.choose(rng)?;
        let args = op
            .arg_sorts
            .iter()
            .map(|a| self.pattern(rng, a, height.saturating_sub(1), false))
            .collect::<Option<Vec<_>>>()?;
        let t = PatternTerm::node(op.constructor.clone(), args);
        self.sig.pattern_sort(&t).ok().map(|_| t)
    }
}

fn random_signature<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> Option<OSSignature> {
    let (sorts, pairs) = random_poset(rng, cfg.max_sorts);
    let poset = build_poset(&sorts, &pairs).ok()?;
    if !poset.check_unique_tops().is_empty() {
        return None;
    }
    let n_ops = rng.gen_range(1..=cfg.max_operators.max(1));
    let n_consts = rng.gen_range(1..=n_ops.min(3));
    let mut ops = Vec::new();
    for i in 0..n_consts {
        ops.push(Operator::new(format!("c{i}"), vec![], sorts.choose(rng)?.clone()));
    }
    for _ in n_consts..n_ops {
        let name = ["f", "g", "h"].choose(rng)?;
        let arity = rng.gen_range(1..=2);
        let args = (0..arity).map(|_| sorts.choose(rng).cloned()).collect::<Option<Vec<_>>>()?;
        let op = Operator::new(*name, args, sorts.choose(rng)?.clone());
        if !ops.contains(&op) {
            ops.push(op);
        }
    }
    OSSignature::new(sorts, pairs, ops).ok()
}

fn fill<R: Rng + ?Sized>(rng: &mut R, sig: OSSignature, cfg: &GenConfig) -> Option<OSAlgebra> {
    let sorts = sig.sorts().to_vec();
    let vars = (0..3)
        .map(|i| sorts.choose(rng).map(|s| (format!("V{i}"), s.clone())))
        .collect::<Option<Vec<_>>>()?;
    let gen = PatternGen { sig: &sig, vars };
    let h = cfg.pattern_height;
    let mut rules: Vec<Rule> = Vec::new();
    for _ in 0..rng.gen_range(0..=cfg.max_rules) {
        for _ in 0..20 {
            let want = sorts.choose(rng)?;
            let Some(lhs) = gen.pattern(rng, want, h, true) else {
                continue;
            };
            let lhs_sort = sig.pattern_sort(&lhs).ok()?;
            let Some(rhs) = gen.pattern(rng, &lhs_sort, h, false) else {
                continue;
            };
            if !rhs.variable_names().is_subset(&lhs.variable_names()) || rhs == lhs {
                continue;
            }
            let r = Rule::new(lhs, rhs);
            if !rules.contains(&r) {
                rules.push(r);
            }
            break;
        }
    }
    let mut equations: Vec<Equation> = Vec::new();
    for _ in 0..rng.gen_range(0..=cfg.max_equations) {
        for _ in 0..20 {
            let want = sorts.choose(rng)?;
            let (Some(lhs), Some(rhs)) = (gen.pattern(rng, want, h, false), gen.pattern(rng, want, h, false)) else {
                continue;
            };
            if lhs == rhs
                || lhs.variable_names() != rhs.variable_names()
                || sig.pattern_sort(&lhs).ok() != sig.pattern_sort(&rhs).ok()
            {
                continue;
            }
            let e = Equation::new(lhs, rhs);
            if !equations.contains(&e) {
                equations.push(e);
            }
            break;
        }
    }
    OSAlgebra::new("RANDOM", sig, equations, rules).ok()
}

/// A random algebra that passes every validity check, so it can be
/// translated. Draws until one is found.
pub fn random_algebra<R: Rng + ?Sized>(rng: &mut R, cfg: &GenConfig) -> OSAlgebra {
    loop {
        let Some(sig) = random_signature(rng, cfg) else {
            continue;
        };
        let Some(alg) = fill(rng, sig, cfg) else {
            continue;
        };
        if validate(&alg).is_translatable() {
            return alg;
        }
    }
}
