use std::collections::{BTreeSet, HashSet};
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ostr_core::bisim::enumerate_ground_terms;
use ostr_core::engine::{e_class_bounded, rewrite_step, ClosureConfig, MsTheory, OsTheory};
use ostr_core::fixtures;
use ostr_core::gen::{random_algebra, random_poset, GenConfig};
use ostr_core::poset::{build_poset, SortPoset, TieBreak};
use ostr_core::specfmt::{parse_ms, parse_os, print_ms, print_os};
use ostr_core::terms::{GroundTerm, OSAlgebra, Sort, SortDiscipline};
use ostr_core::translate::{generate_core_equations, translate_algebra, translate_algebra_with};

fn poset_from(seed: u64, max_sorts: usize) -> (Vec<Sort>, Vec<(Sort, Sort)>, SortPoset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sorts, pairs) = random_poset(&mut rng, max_sorts);
    let p = build_poset(&sorts, &pairs).unwrap();
    (sorts, pairs, p)
}

fn algebra_from(seed: u64) -> OSAlgebra {
    random_algebra(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default())
}

fn reach(sorts: &[Sort], pairs: &[(Sort, Sort)]) -> Vec<Vec<bool>> {
    let n = sorts.len();
    let idx = |s: &Sort| sorts.iter().position(|x| x == s).unwrap();
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in pairs {
        r[idx(a)][idx(b)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn all_paths(pairs: &[(Sort, Sort)], from: &Sort, to: &Sort) -> BTreeSet<Vec<Sort>> {
    fn go(pairs: &[(Sort, Sort)], path: &mut Vec<Sort>, to: &Sort, out: &mut BTreeSet<Vec<Sort>>) {
        let last = path.last().unwrap().clone();
        if &last == to && path.len() > 1 {
            out.insert(path.clone());
            return;
        }
        for (a, b) in pairs {
            if *a == last {
                path.push(b.clone());
                go(pairs, path, to, out);
                path.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(pairs, &mut vec![from.clone()], to, &mut out);
    out
}

fn segment_closure(start: &[Sort], eqs: &[(Vec<Sort>, Vec<Sort>)]) -> HashSet<Vec<Sort>> {
    let mut seen = HashSet::from([start.to_vec()]);
    let mut todo = vec![start.to_vec()];
    while let Some(p) = todo.pop() {
        for (l, r) in eqs.iter().flat_map(|(l, r)| [(l, r), (r, l)]) {
            for i in 0..(p.len() + 1).saturating_sub(l.len()) {
                if p[i..i + l.len()] == l[..] {
                    let q: Vec<Sort> = p[..i].iter().chain(r).chain(&p[i + l.len()..]).cloned().collect();
                    if seen.insert(q.clone()) {
                        todo.push(q);
                    }
                }
            }
        }
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn order_is_reflexive_closure_of_pairs(seed in any::<u64>()) {
        let (sorts, pairs, p) = poset_from(seed, 8);
        let r = reach(&sorts, &pairs);
        for (i, a) in sorts.iter().enumerate() {
            for (j, b) in sorts.iter().enumerate() {
                prop_assert_eq!(p.le(a, b), r[i][j]);
                if i != j && p.le(a, b) {
                    prop_assert!(!p.le(b, a));
                }
            }
        }
    }

    #[test]
    fn paths_match_brute_force(seed in any::<u64>()) {
        let (sorts, pairs, p) = poset_from(seed, 6);
        for a in &sorts {
            for b in &sorts {
                let got: BTreeSet<Vec<Sort>> = p.enumerate_paths(a, b).unwrap().into_iter().collect();
                let want = if a == b { BTreeSet::new() } else { all_paths(&pairs, a, b) };
                prop_assert_eq!(&got, &want);
                for tie in [TieBreak::Lexicographic, TieBreak::ReverseLexicographic] {
                    let canon = p.canonical_path(a, b, tie).unwrap();
                    let best = want.iter().min_by(|x, y| {
                        x.len().cmp(&y.len()).then_with(|| match tie {
                            TieBreak::Lexicographic => x.cmp(y),
                            TieBreak::ReverseLexicographic => y.cmp(x),
                        })
                    });
                    prop_assert_eq!(canon.as_ref(), best);
                    if let Some(c) = canon.filter(|c| c.len() > 2) {
                        let tail = p.canonical_path(&c[1], b, tie).unwrap().unwrap();
                        prop_assert_eq!(&tail[..], &c[1..]);
                    }
                }
            }
        }
    }

    #[test]
    fn diamonds_are_distinct_paths(seed in any::<u64>()) {
        let (sorts, pairs, p) = poset_from(seed, 8);
        let diamonds = p.find_diamonds(TieBreak::default());
        for d in &diamonds {
            prop_assert_ne!(&d.path_a, &d.path_b);
            let paths = all_paths(&pairs, &d.bottom, &d.top);
            prop_assert!(paths.contains(&d.path_a) && paths.contains(&d.path_b));
        }
        prop_assert!(generate_core_equations(&p, TieBreak::default()).len() < sorts.len() * sorts.len());
        // Replacing segments by the other side of a diamond connects every
        // path between two sorts.
        let eqs: Vec<(Vec<Sort>, Vec<Sort>)> = diamonds.iter().map(|d| (d.path_a.clone(), d.path_b.clone())).collect();
        for a in &sorts {
            for b in &sorts {
                let paths = all_paths(&pairs, a, b);
                if let Some(first) = paths.iter().next() {
                    let class = segment_closure(first, &eqs);
                    prop_assert!(paths.iter().all(|q| class.contains(q)));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_preserves_sorts_and_inverts(seed in any::<u64>()) {
        let alg = algebra_from(seed);
        let (ms, tm) = translate_algebra(&alg).unwrap();
        let sig = &alg.signature;
        let en = enumerate_ground_terms(sig, sig.operators(), None, 2, 300, seed);
        for (t, least) in &en.terms {
            let (u, s) = tm.tr_ground(t, None).unwrap();
            prop_assert_eq!(&s, least);
            prop_assert_eq!(ms.signature.term_sort(&u).unwrap(), s.clone());
            prop_assert_eq!(&tm.invert(&u), t);
            let c = tm.canonicalize(&u);
            prop_assert_eq!(&c, &u);
            prop_assert_eq!(tm.canonicalize(&c), c);
            for up in sig.poset().sorts().iter().filter(|x| sig.poset().le(&s, x)) {
                let (w, ws) = tm.tr_ground(t, Some(up)).unwrap();
                prop_assert_eq!(&ws, up);
                prop_assert_eq!(ms.signature.term_sort(&w).unwrap(), up.clone());
                prop_assert_eq!(&tm.invert(&w), t);
            }
        }
    }

    #[test]
    fn tie_break_only_changes_casts(seed in any::<u64>()) {
        let alg = algebra_from(seed);
        let (_, lex) = translate_algebra_with(&alg, TieBreak::Lexicographic).unwrap();
        let (_, rev) = translate_algebra_with(&alg, TieBreak::ReverseLexicographic).unwrap();
        let sig = &alg.signature;
        for (t, _) in enumerate_ground_terms(sig, sig.operators(), None, 2, 300, seed).terms {
            let (a, _) = lex.tr_ground(&t, None).unwrap();
            let (b, _) = rev.tr_ground(&t, None).unwrap();
            prop_assert_eq!(lex.canonicalize(&b), a.clone());
            prop_assert_eq!(rev.canonicalize(&a), b);
        }
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let alg = algebra_from(seed);
        let text = print_os(&alg);
        prop_assert_eq!(&parse_os(&text).unwrap(), &alg);
        prop_assert_eq!(print_os(&parse_os(&text).unwrap()), text);
        let (ms, _) = translate_algebra(&alg).unwrap();
        prop_assert_eq!(parse_ms(&print_ms(&ms)).unwrap(), ms);
    }
}

const LIMIT: usize = 6;

fn closure_cfg() -> ClosureConfig {
    ClosureConfig {
        depth: 40,
        max_size: 5_000,
        size_limit: Some(LIMIT),
    }
}

/// Small IMP terms of arithmetic and boolean sorts.
fn imp_terms() -> &'static (OSAlgebra, Vec<(GroundTerm, Sort)>) {
    static CELL: OnceLock<(OSAlgebra, Vec<(GroundTerm, Sort)>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let imp = fixtures::imp();
        let sig = &imp.signature;
        let terms: Vec<(GroundTerm, Sort)> = enumerate_ground_terms(sig, sig.operators(), None, 2, 10_000, 0)
            .terms
            .into_iter()
            .filter(|(t, s)| {
                t.size() <= LIMIT && ["AExp", "BExp"].iter().any(|top| sig.poset().le(s, &Sort::new(*top)))
            })
            .collect();
        (imp, terms)
    })
}

fn top_of(sig: &ostr_core::terms::OSSignature, s: &Sort) -> Sort {
    sig.poset().tops_above(s).unwrap().remove(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eclass_membership_is_symmetric(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let (imp, terms) = imp_terms();
        let th = OsTheory::new(imp);
        let (t, s) = &terms[i.index(terms.len())];
        let root = top_of(&imp.signature, s);
        let class = e_class_bounded(&th, t, &root, &closure_cfg());
        prop_assume!(class.exhausted);
        let u = class.members[j.index(class.members.len())].clone();
        let back = e_class_bounded(&th, &u, &root, &closure_cfg());
        prop_assert!(back.exhausted);
        prop_assert!(back.contains(t));
        let a: HashSet<_> = class.members.iter().collect();
        let b: HashSet<_> = back.members.iter().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn steps_do_not_depend_on_the_class_member(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let (imp, terms) = imp_terms();
        let th = OsTheory::new(imp);
        let (t, s) = &terms[i.index(terms.len())];
        let root = top_of(&imp.signature, s);
        let from_t = rewrite_step(&th, t, &root, &closure_cfg());
        prop_assume!(from_t.complete());
        let u = from_t.class.members[j.index(from_t.class.members.len())].clone();
        let from_u = rewrite_step(&th, &u, &root, &closure_cfg());
        let key = |v: &ostr_core::engine::StepSet| -> BTreeSet<(usize, GroundTerm)> {
            v.steps.iter().map(|s| (s.rule_index, s.result.clone())).collect()
        };
        prop_assert_eq!(key(&from_t), key(&from_u));
    }

    #[test]
    fn many_sorted_steps_preserve_sort(i in any::<prop::sample::Index>()) {
        let (imp, terms) = imp_terms();
        let (ms, tm) = translate_algebra(imp).unwrap();
        let th = MsTheory::new(&ms, tm.casts().clone());
        let (t, s) = &terms[i.index(terms.len())];
        let root = top_of(&imp.signature, s);
        let (p, _) = tm.tr_ground(t, Some(&root)).unwrap();
        let steps = rewrite_step(&th, &p, &root, &ClosureConfig { size_limit: None, ..closure_cfg() });
        for step in &steps.steps {
            prop_assert_eq!(ms.signature.term_sort(&step.result).unwrap(), root.clone());
            prop_assert_eq!(&tm.canonicalize(&step.result), &step.result);
        }
    }
}
