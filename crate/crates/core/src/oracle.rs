//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here is indexed or incremental; each function reads as a direct
//! transcription of the defining condition.

use std::collections::{BTreeSet, VecDeque};

use crate::semantics::{AFModel, Frame, Universe};
use crate::syntax::{Formula, Sort, Term};

/// Least fixpoint of the closure conditions inside `u`, by re-deriving every
/// candidate triple each round until nothing changes.
pub fn naive_saturate(m: &AFModel, u: &Universe) -> BTreeSet<(usize, Term, Formula)> {
    let n = m.frame.len();
    let kernel = m.kernel();
    let mut facts: BTreeSet<(usize, Term, Formula)> = BTreeSet::new();
    for f in &m.base {
        if f.world < n && u.terms.contains(&f.term) && u.formulas.contains(&f.formula) {
            facts.insert((f.world, f.term.clone(), f.formula.clone()));
        }
    }
    for t in &u.terms {
        if let Term::Const(c, s) = t {
            for a in &u.formulas {
                if m.cs.contains(&kernel, *c, *s, a) {
                    for w in 0..n {
                        facts.insert((w, t.clone(), a.clone()));
                    }
                }
            }
        }
    }
    let rel: Vec<(Sort, Vec<Vec<bool>>)> = Sort::all(m.h())
        .into_iter()
        .filter(|s| s.is_star())
        .map(|s| (s, m.frame.relation(s)))
        .collect();
    loop {
        let mut new = Vec::new();
        for w in 0..n {
            for t in &u.terms {
                for a in &u.formulas {
                    let cand = (w, t.clone(), a.clone());
                    if !facts.contains(&cand) && derivable(&facts, &rel, u, w, t, a) {
                        new.push(cand);
                    }
                }
            }
        }
        if new.is_empty() {
            return facts;
        }
        facts.extend(new);
    }
}

fn derivable(
    facts: &BTreeSet<(usize, Term, Formula)>,
    rel: &[(Sort, Vec<Vec<bool>>)],
    u: &Universe,
    w: usize,
    t: &Term,
    a: &Formula,
) -> bool {
    let has = |t: &Term, a: &Formula| facts.contains(&(w, t.clone(), a.clone()));
    for (s, r) in rel {
        if t.sort() == *s && (0..r.len()).any(|v| r[v][w] && facts.contains(&(v, t.clone(), a.clone()))) {
            return true;
        }
    }
    match t {
        Term::Const(..) | Term::Var(..) => false,
        Term::Sum(l, r, _) => has(l, a) || has(r, a),
        Term::App(l, r, _) => u.formulas.iter().any(|x| {
            let imp = Formula::imp(x.clone(), a.clone());
            u.formulas.contains(&imp) && has(l, &imp) && has(r, x)
        }),
        Term::Bang(s, _) | Term::Tail(s) => match a {
            Formula::Just(t2, _, b) => t2 == &**s && has(s, b),
            _ => false,
        },
        Term::Tuple(ts) => ts.iter().all(|c| has(c, a)),
        Term::Proj(_, e) | Term::Head(e) => has(e, a),
        Term::Ind(c, s) => {
            let step = Formula::imp(a.clone(), Formula::just((**s).clone(), a.clone()));
            has(s, a) && u.formulas.contains(&step) && has(c, &step)
        }
    }
}

/// Worlds reachable from `w` in one or more steps of the union of the agent
/// relations, by breadth-first search.
pub fn reachable_plus(frame: &Frame, w: usize) -> BTreeSet<usize> {
    let n = frame.len();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([w]);
    while let Some(x) = queue.pop_front() {
        for v in 0..n {
            if frame.rel.iter().any(|r| r[x][v]) && seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::ConstantSpecification;
    use crate::semantics::{build_universe, saturate, EvidenceMode};
    use crate::syntax::{parse_formula, parse_term};

    #[test]
    fn head_example_agrees() {
        let mut m = AFModel::new(Frame::new(1, 1), ConstantSpecification::empty(), EvidenceMode::Base);
        m.add_fact(0, parse_term("c1@C", 1).unwrap(), parse_formula("P1", 1).unwrap());
        let q = parse_formula("[head(c1@C)]@E P1", 1).unwrap();
        let u = build_universe(&m, &[&q], 0).unwrap();
        let slow = naive_saturate(&m, &u);
        assert!(slow.contains(&(0, parse_term("head(c1@C)", 1).unwrap(), parse_formula("P1", 1).unwrap())));
        let fast: BTreeSet<_> = saturate(&m, &u)
            .facts()
            .into_iter()
            .map(|f| (f.world, f.term, f.formula))
            .collect();
        assert_eq!(fast, slow);
    }

    #[test]
    fn bfs_reach() {
        let mut f = Frame::new(2, 4);
        f.add_edge(1, 1, 2);
        f.add_edge(2, 0, 1);
        f.add_edge(2, 2, 3);
        f.close();
        assert_eq!(reachable_plus(&f, 0), BTreeSet::from([0, 1, 2, 3]));
        assert_eq!(reachable_plus(&f, 3), BTreeSet::from([3]));
    }
}
