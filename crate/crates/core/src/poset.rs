//! The subsort order: closure of the declared pairs, top-sort checks, path
//! enumeration and diamond detection.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::terms::Sort;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("unknown sort `{0}`")]
    UnknownSort(Sort),
    #[error("subsort pairs form a cycle through {}", fmt_sorts(.0))]
    CycleDetected(Vec<Sort>),
}

fn fmt_sorts(sorts: &[Sort]) -> String {
    sorts.iter().map(Sort::as_str).collect::<Vec<_>>().join(" < ")
}

/// How ties between equally short paths are broken when a canonical path is
/// chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TieBreak {
    /// Prefer the lexicographically smallest sequence of sort names.
    #[default]
    Lexicographic,
    /// Prefer the lexicographically largest sequence of sort names.
    ReverseLexicographic,
}

/// Two different directed paths in the subsort graph sharing both endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diamond {
    pub bottom: Sort,
    pub top: Sort,
    /// The canonical path from `bottom` to `top`.
    pub path_a: Vec<Sort>,
    /// A path leaving `bottom` through a different first edge, then following
    /// the canonical path from there.
    pub path_b: Vec<Sort>,
}

/// A pair of sorts in one connected component without a unique maximal
/// common supersort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopViolation {
    pub left: Sort,
    pub right: Sort,
    pub maximal_upper_bounds: Vec<Sort>,
}

impl fmt::Display for TopViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.maximal_upper_bounds.is_empty() {
            write!(f, "{} and {} have no common supersort", self.left, self.right)
        } else {
            write!(
                f,
                "{} and {} have several maximal common supersorts: {}",
                self.left,
                self.right,
                self.maximal_upper_bounds
                    .iter()
                    .map(Sort::as_str)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        }
    }
}

/// The partial order generated by a set of subsort pairs.
#[derive(Debug, Clone)]
pub struct SortPoset {
    sorts: Vec<Sort>,
    index: HashMap<Sort, usize>,
    base_pairs: Vec<(Sort, Sort)>,
    /// Direct supersorts of each sort, ordered by name.
    succ: Vec<Vec<usize>>,
    /// `leq[a][b]` iff `sorts[a] <= sorts[b]`.
    leq: Vec<Vec<bool>>,
    component: Vec<usize>,
}

impl PartialEq for SortPoset {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts && self.base_pairs == other.base_pairs
    }
}

impl Eq for SortPoset {}

/// Builds the reflexive-transitive closure of `pairs` over `sorts`,
/// rejecting unknown sorts and cycles.
pub fn build_poset(sorts: &[Sort], pairs: &[(Sort, Sort)]) -> Result<SortPoset, PosetError> {
    let index: HashMap<Sort, usize> = sorts
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    let n = sorts.len();
    let mut succ = vec![Vec::new(); n];
    for (lo, hi) in pairs {
        let a = *index.get(lo).ok_or_else(|| PosetError::UnknownSort(lo.clone()))?;
        let b = *index.get(hi).ok_or_else(|| PosetError::UnknownSort(hi.clone()))?;
        if a == b {
            return Err(PosetError::CycleDetected(vec![lo.clone(), hi.clone()]));
        }
        if !succ[a].contains(&b) {
            succ[a].push(b);
        }
    }
    for s in &mut succ {
        s.sort_by(|&x, &y| sorts[x].cmp(&sorts[y]));
    }
    if let Some(cycle) = find_cycle(&succ) {
        return Err(PosetError::CycleDetected(
            cycle.into_iter().map(|i| sorts[i].clone()).collect(),
        ));
    }

    let mut leq = vec![vec![false; n]; n];
    for (start, row) in leq.iter_mut().enumerate() {
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if !row[v] {
                row[v] = true;
                stack.extend(succ[v].iter().copied());
            }
        }
    }

    // Components of the undirected subsort graph.
    let mut component = vec![usize::MAX; n];
    let mut next = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if component[v] != usize::MAX {
                continue;
            }
            component[v] = next;
            for w in 0..n {
                if component[w] == usize::MAX && (succ[v].contains(&w) || succ[w].contains(&v)) {
                    stack.push(w);
                }
            }
        }
        next += 1;
    }

    Ok(SortPoset {
        sorts: sorts.to_vec(),
        index,
        base_pairs: pairs.to_vec(),
        succ,
        leq,
        component,
    })
}

fn find_cycle(succ: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(v: usize, succ: &[Vec<usize>], marks: &mut [Mark], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        marks[v] = Mark::Active;
        stack.push(v);
        for &w in &succ[v] {
            match marks[w] {
                Mark::Active => {
                    let from = stack.iter().position(|&x| x == w).unwrap_or(0);
                    let mut cycle = stack[from..].to_vec();
                    cycle.push(w);
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = visit(w, succ, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[v] = Mark::Done;
        None
    }
    let mut marks = vec![Mark::New; succ.len()];
    let mut stack = Vec::new();
    (0..succ.len()).find_map(|v| {
        if marks[v] == Mark::New {
            visit(v, succ, &mut marks, &mut stack)
        } else {
            None
        }
    })
}

impl SortPoset {
    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn base_pairs(&self) -> &[(Sort, Sort)] {
        &self.base_pairs
    }

    pub fn contains(&self, s: &Sort) -> bool {
        self.index.contains_key(s)
    }

    pub fn index_of(&self, s: &Sort) -> Result<usize, PosetError> {
        self.index
            .get(s)
            .copied()
            .ok_or_else(|| PosetError::UnknownSort(s.clone()))
    }

    /// Direct supersorts of `s`, in name order.
    pub fn direct_supersorts(&self, s: &Sort) -> Result<Vec<Sort>, PosetError> {
        let i = self.index_of(s)?;
        Ok(self.succ[i].iter().map(|&j| self.sorts[j].clone()).collect())
    }

    pub fn leq(&self, s: &Sort, s2: &Sort) -> Result<bool, PosetError> {
        Ok(self.leq[self.index_of(s)?][self.index_of(s2)?])
    }

    /// `leq` for sorts already known to belong to the poset; unknown sorts
    /// compare as unrelated.
    pub fn le(&self, s: &Sort, s2: &Sort) -> bool {
        match (self.index.get(s), self.index.get(s2)) {
            (Some(&a), Some(&b)) => self.leq[a][b],
            _ => false,
        }
    }

    /// Every pair of the closure, including the reflexive ones.
    pub fn closure_pairs(&self) -> Vec<(Sort, Sort)> {
        let mut out = Vec::new();
        for (a, row) in self.leq.iter().enumerate() {
            for (b, &le) in row.iter().enumerate() {
                if le {
                    out.push((self.sorts[a].clone(), self.sorts[b].clone()));
                }
            }
        }
        out
    }

    pub fn common_supersort_exists(&self, s: &Sort, s2: &Sort) -> Result<bool, PosetError> {
        let a = self.index_of(s)?;
        let b = self.index_of(s2)?;
        Ok((0..self.sorts.len()).any(|u| self.leq[a][u] && self.leq[b][u]))
    }

    /// Infallible variant of [`Self::common_supersort_exists`]; unknown sorts
    /// only relate to themselves.
    pub fn compatible(&self, s: &Sort, s2: &Sort) -> bool {
        self.common_supersort_exists(s, s2).unwrap_or(s == s2)
    }

    pub fn same_component(&self, s: &Sort, s2: &Sort) -> bool {
        match (self.index.get(s), self.index.get(s2)) {
            (Some(&a), Some(&b)) => self.component[a] == self.component[b],
            _ => s == s2,
        }
    }

    /// The maximal sorts above `s`.
    pub fn tops_above(&self, s: &Sort) -> Result<Vec<Sort>, PosetError> {
        let a = self.index_of(s)?;
        Ok((0..self.sorts.len())
            .filter(|&u| self.leq[a][u] && self.succ[u].is_empty())
            .map(|u| self.sorts[u].clone())
            .collect())
    }

    /// Pairs within a connected component that lack a unique maximal common
    /// upper bound.
    pub fn check_unique_tops(&self) -> Vec<TopViolation> {
        let n = self.sorts.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a..n {
                if self.component[a] != self.component[b] {
                    continue;
                }
                let upper: Vec<usize> = (0..n).filter(|&u| self.leq[a][u] && self.leq[b][u]).collect();
                let maximal: Vec<usize> = upper
                    .iter()
                    .copied()
                    .filter(|&u| !upper.iter().any(|&v| v != u && self.leq[u][v]))
                    .collect();
                if maximal.len() != 1 {
                    out.push(TopViolation {
                        left: self.sorts[a].clone(),
                        right: self.sorts[b].clone(),
                        maximal_upper_bounds: maximal.iter().map(|&u| self.sorts[u].clone()).collect(),
                    });
                }
            }
        }
        out
    }

    /// All simple directed paths from `from` to `to` over the declared pairs.
    /// A sort has no non-trivial path to itself, so `from == to` yields none.
    pub fn enumerate_paths(&self, from: &Sort, to: &Sort) -> Result<Vec<Vec<Sort>>, PosetError> {
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        let mut out: Vec<Vec<usize>> = Vec::new();
        if a == b || !self.leq[a][b] {
            return Ok(Vec::new());
        }
        let mut path = vec![a];
        self.paths_from(a, b, &mut path, &mut out);
        Ok(out
            .into_iter()
            .map(|p| p.into_iter().map(|i| self.sorts[i].clone()).collect())
            .collect())
    }

    fn paths_from(&self, v: usize, goal: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if v == goal {
            out.push(path.clone());
            return;
        }
        for &w in &self.succ[v] {
            if self.leq[w][goal] {
                path.push(w);
                self.paths_from(w, goal, path, out);
                path.pop();
            }
        }
    }

    /// Length in edges of the shortest path from every sort to `to`
    /// (`usize::MAX` when unreachable).
    fn distances_to(&self, to: usize) -> Vec<usize> {
        let n = self.sorts.len();
        let mut dist = vec![usize::MAX; n];
        dist[to] = 0;
        let mut queue = VecDeque::from([to]);
        while let Some(v) = queue.pop_front() {
            for u in 0..n {
                if dist[u] == usize::MAX && self.succ[u].contains(&v) {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// The shortest path from `from` to `to`, ties broken by comparing the
    /// sequences of sort names. The choice is suffix-closed: the tail of a
    /// canonical path is itself canonical. `None` unless `from < to`.
    pub fn canonical_path(&self, from: &Sort, to: &Sort, tie: TieBreak) -> Result<Option<Vec<Sort>>, PosetError> {
        let a = self.index_of(from)?;
        let b = self.index_of(to)?;
        Ok(self
            .canonical_path_idx(a, b, &self.distances_to(b), tie)
            .map(|p| p.into_iter().map(|i| self.sorts[i].clone()).collect()))
    }

    fn canonical_path_idx(&self, a: usize, b: usize, dist: &[usize], tie: TieBreak) -> Option<Vec<usize>> {
        if a == b || dist[a] == usize::MAX {
            return None;
        }
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            let candidates = self.succ[cur].iter().copied().filter(|&w| dist[w] != usize::MAX && dist[w] + 1 == dist[cur]);
            // `succ` is name-ordered, so the first/last candidate is the
            // lexicographically smallest/largest continuation.
            let next = match tie {
                TieBreak::Lexicographic => candidates.min_by(|&x, &y| self.sorts[x].cmp(&self.sorts[y])),
                TieBreak::ReverseLexicographic => candidates.max_by(|&x, &y| self.sorts[x].cmp(&self.sorts[y])),
            }?;
            path.push(next);
            cur = next;
        }
        Some(path)
    }

    /// Diamonds whose path equalities generate, under congruence, equality
    /// of every pair of parallel paths.
    ///
    /// For each pair `bottom < top` and each direct supersort `u` of
    /// `bottom` below `top` that is not the second sort of the canonical
    /// path, one diamond pairs the canonical path with `bottom` followed by
    /// the canonical path from `u`. Any path `bottom, u, ...` is equal to
    /// `bottom` followed by the canonical path from `u` by induction on its
    /// length, so these diamonds suffice.
    pub fn find_diamonds(&self, tie: TieBreak) -> Vec<Diamond> {
        let n = self.sorts.len();
        let mut out = Vec::new();
        for top in 0..n {
            let dist = self.distances_to(top);
            for bottom in 0..n {
                let Some(canon) = self.canonical_path_idx(bottom, top, &dist, tie) else {
                    continue;
                };
                for &u in &self.succ[bottom] {
                    if u == canon[1] || !self.leq[u][top] {
                        continue;
                    }
                    let mut other = vec![bottom];
                    match self.canonical_path_idx(u, top, &dist, tie) {
                        Some(rest) => other.extend(rest),
                        None => other.push(u),
                    }
                    let names = |p: &[usize]| p.iter().map(|&i| self.sorts[i].clone()).collect::<Vec<_>>();
                    out.push(Diamond {
                        bottom: self.sorts[bottom].clone(),
                        top: self.sorts[top].clone(),
                        path_a: names(&canon),
                        path_b: names(&other),
                    });
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str) -> Sort {
        Sort::new(name)
    }

    fn pairs(ps: &[(&str, &str)]) -> Vec<(Sort, Sort)> {
        ps.iter().map(|(a, b)| (s(a), s(b))).collect()
    }

    fn imp() -> SortPoset {
        let sorts: Vec<Sort> = ["nat", "int", "AExp", "Id", "bool", "BExp", "Block", "Stmt", "Map", "Pgm"]
            .into_iter()
            .map(s)
            .collect();
        let o = pairs(&[
            ("nat", "int"),
            ("int", "AExp"),
            ("Id", "AExp"),
            ("bool", "BExp"),
            ("Block", "Stmt"),
        ]);
        build_poset(&sorts, &o).unwrap()
    }

    fn imp_real() -> SortPoset {
        let mut sorts: Vec<Sort> = imp().sorts().to_vec();
        sorts.push(s("real"));
        let mut o = imp().base_pairs().to_vec();
        o.extend(pairs(&[("nat", "real"), ("real", "AExp")]));
        build_poset(&sorts, &o).unwrap()
    }

    #[test]
    fn imp_closure() {
        let p = imp();
        assert!(p.leq(&s("nat"), &s("AExp")).unwrap());
        assert!(!p.leq(&s("bool"), &s("AExp")).unwrap());
        // 10 reflexive pairs, 5 declared pairs and nat <= AExp.
        assert_eq!(p.closure_pairs().len(), 16);
        for x in p.sorts() {
            assert!(p.leq(x, x).unwrap());
        }
    }

    #[test]
    fn cycles_and_unknown_sorts_are_rejected() {
        let ab = [s("a"), s("b")];
        assert!(matches!(
            build_poset(&ab, &pairs(&[("a", "b"), ("b", "a")])),
            Err(PosetError::CycleDetected(_))
        ));
        assert!(matches!(
            build_poset(&ab, &pairs(&[("a", "c")])),
            Err(PosetError::UnknownSort(_))
        ));
        let p = build_poset(&ab, &[]).unwrap();
        assert_eq!(p.closure_pairs(), pairs(&[("a", "a"), ("b", "b")]));
    }

    #[test]
    fn common_supersorts() {
        let p = imp();
        assert!(p.common_supersort_exists(&s("nat"), &s("Id")).unwrap());
        assert!(!p.common_supersort_exists(&s("bool"), &s("nat")).unwrap());
        assert!(p.common_supersort_exists(&s("Map"), &s("Map")).unwrap());
        assert!(p.common_supersort_exists(&s("nope"), &s("Map")).is_err());
    }

    #[test]
    fn unique_tops() {
        assert!(imp().check_unique_tops().is_empty());
        let abcd = [s("a"), s("c"), s("d")];
        let p = build_poset(&abcd, &pairs(&[("a", "c"), ("a", "d")])).unwrap();
        let v = p.check_unique_tops();
        assert!(!v.is_empty());
        assert!(v.iter().any(|t| t.left == s("a") && t.right == s("a")));
        let single = build_poset(&[s("x")], &[]).unwrap();
        assert!(single.check_unique_tops().is_empty());
    }

    #[test]
    fn paths() {
        let p = imp();
        assert_eq!(
            p.enumerate_paths(&s("nat"), &s("AExp")).unwrap(),
            vec![vec![s("nat"), s("int"), s("AExp")]]
        );
        assert!(p.enumerate_paths(&s("nat"), &s("nat")).unwrap().is_empty());
        assert!(p.enumerate_paths(&s("AExp"), &s("nat")).unwrap().is_empty());
        let r = imp_real();
        assert_eq!(r.enumerate_paths(&s("nat"), &s("AExp")).unwrap().len(), 2);
    }

    #[test]
    fn canonical_paths_and_tie_breaks() {
        let r = imp_real();
        assert_eq!(
            r.canonical_path(&s("nat"), &s("AExp"), TieBreak::Lexicographic).unwrap(),
            Some(vec![s("nat"), s("int"), s("AExp")])
        );
        assert_eq!(
            r.canonical_path(&s("nat"), &s("AExp"), TieBreak::ReverseLexicographic).unwrap(),
            Some(vec![s("nat"), s("real"), s("AExp")])
        );
        assert_eq!(r.canonical_path(&s("nat"), &s("nat"), TieBreak::Lexicographic).unwrap(), None);
        // A shorter path beats a lexicographically smaller one.
        let abc = [s("a"), s("b"), s("c")];
        let q = build_poset(&abc, &pairs(&[("a", "b"), ("b", "c"), ("a", "c")])).unwrap();
        assert_eq!(
            q.canonical_path(&s("a"), &s("c"), TieBreak::Lexicographic).unwrap(),
            Some(vec![s("a"), s("c")])
        );
    }

    #[test]
    fn diamonds() {
        assert!(imp().find_diamonds(TieBreak::Lexicographic).is_empty());
        let d = imp_real().find_diamonds(TieBreak::Lexicographic);
        assert_eq!(
            d,
            vec![Diamond {
                bottom: s("nat"),
                top: s("AExp"),
                path_a: vec![s("nat"), s("int"), s("AExp")],
                path_b: vec![s("nat"), s("real"), s("AExp")],
            }]
        );
        let chain = build_poset(&[s("a"), s("b"), s("c")], &pairs(&[("a", "b"), ("b", "c")])).unwrap();
        assert!(chain.find_diamonds(TieBreak::Lexicographic).is_empty());
    }
}
