//! Bounded least-fixpoint computation of the evidence function.
//!
//! Terms and formulas are interned, each term keeps the list of universe
//! terms built directly on top of it, and new facts are pushed through a
//! worklist so every rule fires once per fact (semi-naive evaluation).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::{AFModel, EvidenceFact, Relation};
use crate::syntax::{subformulas, subterms, Formula, Sort, Term};
use crate::ResourceError;

/// Default bound on `|terms| + |formulas|`.
pub const DEFAULT_UNIVERSE_CAP: usize = 20_000;

/// The finite window the evidence function is computed in.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Universe {
    pub terms: BTreeSet<Term>,
    pub formulas: BTreeSet<Formula>,
    pub depth_budget: usize,
}

impl Universe {
    pub fn size(&self) -> usize {
        self.terms.len() + self.formulas.len()
    }

    fn add_term(&mut self, t: &Term) {
        if !self.terms.contains(t) {
            self.terms.extend(subterms(t));
        }
    }

    /// Adds `a`, its subformulas and every subterm of their boxes.
    pub fn add_formula(&mut self, a: &Formula) -> bool {
        if self.formulas.contains(a) {
            return false;
        }
        for g in subformulas(a) {
            if let Formula::Just(t, _, _) = &g {
                self.add_term(t);
            }
            self.formulas.insert(g);
        }
        true
    }

    fn check_cap(&self, cap: usize) -> Result<(), ResourceError> {
        if self.size() > cap {
            return Err(ResourceError::UniverseTooLarge {
                size: self.size(),
                cap,
            });
        }
        Ok(())
    }

    /// Pulls in the formulas a finite specification assigns to universe
    /// constants, until nothing new appears.
    fn close_under_cs(&mut self, m: &AFModel) {
        loop {
            let mut added = false;
            let consts: Vec<(u32, Sort)> = self
                .terms
                .iter()
                .filter_map(|t| match t {
                    Term::Const(c, s) => Some((*c, *s)),
                    _ => None,
                })
                .collect();
            for (c, s) in consts {
                for a in m.cs.formulas_for(c, s).unwrap_or_default() {
                    added |= self.add_formula(&a);
                }
            }
            if !added {
                return;
            }
        }
    }
}

/// Syntactic closure of the queries and the base, then `depth_budget`
/// rounds adding the formulas that inspection, co-closure and induction
/// need to fire on facts found so far.
pub fn build_universe(
    m: &AFModel,
    queries: &[&Formula],
    depth_budget: usize,
) -> Result<Universe, ResourceError> {
    let mut u = Universe {
        depth_budget,
        ..Universe::default()
    };
    for q in queries {
        u.add_formula(q);
    }
    for f in &m.base {
        u.add_term(&f.term);
        u.add_formula(&f.formula);
    }
    u.close_under_cs(m);
    u.check_cap(m.universe_cap)?;
    for _ in 0..depth_budget {
        let sat = saturate(m, &u);
        let mut added = false;
        for d in sat.demands() {
            added |= u.add_formula(&d);
        }
        u.close_under_cs(m);
        u.check_cap(m.universe_cap)?;
        if !added {
            break;
        }
    }
    Ok(u)
}

type Id = usize;

/// A universe term with its children replaced by ids.
#[derive(Clone, Debug)]
enum Node {
    Leaf,
    Bang,
    Sum,
    App(Id, Id),
    Tuple(Vec<Id>),
    Proj,
    Head,
    Tail,
    Ind(Id, Id),
}

struct Index {
    terms: Vec<Term>,
    term_id: HashMap<Term, Id>,
    nodes: Vec<Node>,
    parents: Vec<Vec<Id>>,
    formulas: Vec<Formula>,
    formula_id: HashMap<Formula, Id>,
    /// `A → B` by `(A, B)`.
    imp: HashMap<(Id, Id), Id>,
    /// `[t] A` by `(t, A)`.
    just: HashMap<(Id, Id), Id>,
    /// Antecedent and consequent of implications.
    imp_parts: Vec<Option<(Id, Id)>>,
}

impl Index {
    fn new(u: &Universe) -> Index {
        let terms: Vec<Term> = u.terms.iter().cloned().collect();
        let term_id: HashMap<Term, Id> = terms.iter().cloned().enumerate().map(|(k, t)| (t, k)).collect();
        let id = |t: &Term| term_id[t];
        let mut parents = vec![Vec::new(); terms.len()];
        let nodes: Vec<Node> = terms
            .iter()
            .map(|t| match t {
                Term::Const(..) | Term::Var(..) => Node::Leaf,
                Term::Bang(..) => Node::Bang,
                Term::Sum(..) => Node::Sum,
                Term::App(a, b, _) => Node::App(id(a), id(b)),
                Term::Tuple(ts) => Node::Tuple(ts.iter().map(id).collect()),
                Term::Proj(..) => Node::Proj,
                Term::Head(_) => Node::Head,
                Term::Tail(_) => Node::Tail,
                Term::Ind(a, b) => Node::Ind(id(a), id(b)),
            })
            .collect();
        for (p, t) in terms.iter().enumerate() {
            let mut kids: Vec<Id> = t.children().into_iter().map(id).collect();
            kids.sort_unstable();
            kids.dedup();
            for k in kids {
                parents[k].push(p);
            }
        }
        let formulas: Vec<Formula> = u.formulas.iter().cloned().collect();
        let formula_id: HashMap<Formula, Id> =
            formulas.iter().cloned().enumerate().map(|(k, f)| (f, k)).collect();
        let mut imp = HashMap::new();
        let mut just = HashMap::new();
        let mut imp_parts = vec![None; formulas.len()];
        for (k, f) in formulas.iter().enumerate() {
            match f {
                Formula::Imp(a, b) => {
                    let pair = (formula_id[&**a], formula_id[&**b]);
                    imp.insert(pair, k);
                    imp_parts[k] = Some(pair);
                }
                Formula::Just(t, _, a) => {
                    just.insert((term_id[t], formula_id[&**a]), k);
                }
                _ => {}
            }
        }
        Index {
            terms,
            term_id,
            nodes,
            parents,
            formulas,
            formula_id,
            imp,
            just,
            imp_parts,
        }
    }

    fn sort(&self, t: Id) -> Sort {
        self.terms[t].sort()
    }
}

/// Saturated evidence over one universe.
pub struct Saturation {
    index: Index,
    facts: HashSet<(usize, Id, Id)>,
    /// Formulas per `(world, term)`, in derivation order.
    at: HashMap<(usize, Id), Vec<Id>>,
}

impl Saturation {
    pub fn contains(&self, w: usize, t: &Term, a: &Formula) -> bool {
        match (self.index.term_id.get(t), self.index.formula_id.get(a)) {
            (Some(&t), Some(&a)) => self.facts.contains(&(w, t, a)),
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn facts(&self) -> BTreeSet<EvidenceFact> {
        self.facts
            .iter()
            .map(|&(w, t, a)| {
                EvidenceFact::new(w, self.index.terms[t].clone(), self.index.formulas[a].clone())
            })
            .collect()
    }

    fn has(&self, w: usize, t: Id, a: Id) -> bool {
        self.facts.contains(&(w, t, a))
    }

    fn at(&self, w: usize, t: Id) -> &[Id] {
        self.at.get(&(w, t)).map_or(&[], |v| v.as_slice())
    }

    /// Formulas outside the universe that a rule would conclude or need
    /// as a premise, given the facts found.
    fn demands(&self) -> BTreeSet<Formula> {
        let ix = &self.index;
        let mut out = BTreeSet::new();
        for &(_, t, a) in &self.facts {
            for &p in &ix.parents[t] {
                let body = &ix.formulas[a];
                let boxed = || Formula::just(ix.terms[t].clone(), body.clone());
                match ix.nodes[p] {
                    Node::Bang | Node::Tail => {
                        out.insert(boxed());
                    }
                    Node::Ind(_, s) if s == t => {
                        out.insert(Formula::imp(body.clone(), boxed()));
                    }
                    _ => {}
                }
            }
        }
        out.retain(|f| !ix.formula_id.contains_key(f));
        out
    }
}

struct Engine<'a> {
    sat: Saturation,
    queue: Vec<(usize, Id, Id)>,
    rel: &'a BTreeMap<Sort, Relation>,
}

impl Engine<'_> {
    fn add(&mut self, w: usize, t: Id, a: Id) {
        if self.sat.facts.insert((w, t, a)) {
            self.sat.at.entry((w, t)).or_default().push(a);
            self.queue.push((w, t, a));
        }
    }

    fn fire(&mut self, w: usize, t: Id, a: Id) {
        let ix = &self.sat.index;
        let mut out: Vec<(usize, Id, Id)> = Vec::new();
        let sort = ix.sort(t);

        if sort.is_star() {
            for (v, &r) in self.rel[&sort][w].iter().enumerate() {
                if r && v != w {
                    out.push((v, t, a));
                }
            }
        }

        for &p in &ix.parents[t] {
            match &ix.nodes[p] {
                Node::Leaf => {}
                Node::Bang => {
                    if let Some(&f) = ix.just.get(&(t, a)) {
                        out.push((w, p, f));
                    }
                }
                Node::Sum | Node::Proj | Node::Head => out.push((w, p, a)),
                Node::Tail => {
                    if let Some(&f) = ix.just.get(&(t, a)) {
                        out.push((w, p, f));
                    }
                }
                Node::App(major, minor) => {
                    if *major == t {
                        if let Some((x, y)) = ix.imp_parts[a] {
                            if self.sat.has(w, *minor, x) {
                                out.push((w, p, y));
                            }
                        }
                    }
                    if *minor == t {
                        for &f in self.sat.at(w, *major) {
                            if let Some((x, y)) = ix.imp_parts[f] {
                                if x == a {
                                    out.push((w, p, y));
                                }
                            }
                        }
                    }
                }
                Node::Tuple(ts) => {
                    if ts.iter().all(|&c| self.sat.has(w, c, a)) {
                        out.push((w, p, a));
                    }
                }
                Node::Ind(tc, se) => {
                    if *se == t {
                        let step = ix
                            .just
                            .get(&(t, a))
                            .and_then(|&j| ix.imp.get(&(a, j)));
                        if let Some(&step) = step {
                            if self.sat.has(w, *tc, step) {
                                out.push((w, p, a));
                            }
                        }
                    }
                    if *tc == t {
                        if let Some((x, y)) = ix.imp_parts[a] {
                            if ix.just.get(&(*se, x)) == Some(&y) && self.sat.has(w, *se, x) {
                                out.push((w, p, x));
                            }
                        }
                    }
                }
            }
        }
        for (v, s, f) in out {
            self.add(v, s, f);
        }
    }
}

/// The star-sort relations the monotonicity rule runs along.
pub(crate) fn star_relations(m: &AFModel) -> BTreeMap<Sort, Relation> {
    Sort::all(m.h())
        .into_iter()
        .filter(|s| s.is_star())
        .map(|s| (s, m.frame.relation(s)))
        .collect()
}

/// Formulas of the universe some constant is specified for: the CS facts.
pub(crate) fn cs_facts(m: &AFModel, u: &Universe) -> Vec<(Term, Formula)> {
    let kernel = m.kernel();
    let mut out = Vec::new();
    for t in &u.terms {
        if let Term::Const(c, s) = t {
            for a in &u.formulas {
                if m.cs.contains(&kernel, *c, *s, a) {
                    out.push((t.clone(), a.clone()));
                }
            }
        }
    }
    out
}

/// Least set of facts inside `u` containing the base and the CS facts and
/// closed under the nine closure conditions.
pub fn saturate(m: &AFModel, u: &Universe) -> Saturation {
    let rel = star_relations(m);
    let index = Index::new(u);
    let mut engine = Engine {
        sat: Saturation {
            index,
            facts: HashSet::new(),
            at: HashMap::new(),
        },
        queue: Vec::new(),
        rel: &rel,
    };
    let n = m.frame.len();
    let mut seeds = Vec::new();
    for (t, a) in cs_facts(m, u) {
        let (t, a) = (engine.sat.index.term_id[&t], engine.sat.index.formula_id[&a]);
        seeds.extend((0..n).map(|w| (w, t, a)));
    }
    for f in &m.base {
        let ix = &engine.sat.index;
        if let (Some(&t), Some(&a)) = (ix.term_id.get(&f.term), ix.formula_id.get(&f.formula)) {
            if f.world < n {
                seeds.push((f.world, t, a));
            }
        }
    }
    for (w, t, a) in seeds {
        engine.add(w, t, a);
    }
    while let Some((w, t, a)) = engine.queue.pop() {
        engine.fire(w, t, a);
    }
    engine.sat
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::ConstantSpecification;
    use crate::semantics::{EvidenceMode, Frame};
    use crate::syntax::{parse_formula, parse_term};

    fn t(s: &str) -> Term {
        parse_term(s, 2).unwrap()
    }

    fn f(s: &str) -> Formula {
        parse_formula(s, 2).unwrap()
    }

    fn model(cs: ConstantSpecification) -> AFModel {
        AFModel::new(Frame::new(2, 1), cs, EvidenceMode::Base)
    }

    #[test]
    fn head_from_c_fact() {
        let mut m = model(ConstantSpecification::empty());
        m.add_fact(0, t("c1@C"), f("P1"));
        let u = build_universe(&m, &[&f("[head(c1@C)]@E P1")], 0).unwrap();
        let s = saturate(&m, &u);
        assert!(s.contains(0, &t("head(c1@C)"), &f("P1")));
        assert!(!s.contains(0, &t("head(c1@C)"), &f("P2")));
    }

    #[test]
    fn total_c_constants_justify_axioms() {
        let m = model(ConstantSpecification::TotalC);
        let ax = f("[x1@1]@1 P1 -> P1");
        let q = Formula::just(t("c1@C"), ax.clone());
        let u = build_universe(&m, &[&q], 0).unwrap();
        assert!(saturate(&m, &u).contains(0, &t("c1@C"), &ax));
        assert!(!saturate(&m, &u).contains(0, &t("c1@C"), &f("P1")));
    }

    #[test]
    fn inspection_and_tail_need_budget() {
        let mut m = model(ConstantSpecification::empty());
        m.add_fact(0, t("x1@1"), f("P1"));
        m.add_fact(0, t("x1@C"), f("P2"));
        let q1 = f("[!1(x1@1)]@1 P3");
        let q2 = f("[tail(x1@C)]@E P3");
        let u0 = build_universe(&m, &[&q1, &q2], 0).unwrap();
        let u1 = build_universe(&m, &[&q1, &q2], 1).unwrap();
        assert!(u0.formulas.is_subset(&u1.formulas));
        assert!(!u0.formulas.contains(&f("[x1@1]@1 P1")));
        let s = saturate(&m, &u1);
        assert!(s.contains(0, &t("!1(x1@1)"), &f("[x1@1]@1 P1")));
        assert!(s.contains(0, &t("tail(x1@C)"), &f("[x1@C]@C P2")));
    }

    #[test]
    fn induction_fires() {
        let mut m = model(ConstantSpecification::empty());
        m.add_fact(0, t("x1@E"), f("P1"));
        m.add_fact(0, t("x1@C"), f("P1 -> [x1@E]@E P1"));
        let u = build_universe(&m, &[&f("[ind(x1@C, x1@E)]@C P1")], 0).unwrap();
        assert!(saturate(&m, &u).contains(0, &t("ind(x1@C, x1@E)"), &f("P1")));
    }

    #[test]
    fn application_tupling_projection() {
        let mut m = model(ConstantSpecification::empty());
        m.add_fact(0, t("x1@1"), f("P1 -> P2"));
        m.add_fact(0, t("x2@1"), f("P1"));
        m.add_fact(0, t("x1@2"), f("P2"));
        let q = f("[pi_2(<x1@1 * x2@1, x1@2>)]@2 P2");
        let u = build_universe(&m, &[&q], 0).unwrap();
        let s = saturate(&m, &u);
        assert!(s.contains(0, &t("x1@1 * x2@1"), &f("P2")));
        assert!(s.contains(0, &t("<x1@1 * x2@1, x1@2>"), &f("P2")));
        assert!(s.contains(0, &t("pi_2(<x1@1 * x2@1, x1@2>)"), &f("P2")));
    }

    #[test]
    fn monotone_along_c_not_e() {
        let mut frame = Frame::new(1, 3);
        frame.add_edge(1, 0, 1);
        frame.close();
        let mut m = AFModel::new(frame, ConstantSpecification::empty(), EvidenceMode::Base);
        m.add_fact(0, Term::var(1, Sort::C), Formula::prop(1));
        m.add_fact(0, Term::Tuple(vec![Term::var(1, Sort::agent(1))]), Formula::prop(1));
        let u = build_universe(&m, &[], 0).unwrap();
        let s = saturate(&m, &u);
        assert!(s.contains(1, &Term::var(1, Sort::C), &Formula::prop(1)));
        assert!(!s.contains(2, &Term::var(1, Sort::C), &Formula::prop(1)));
        assert!(!s.contains(1, &Term::Tuple(vec![Term::var(1, Sort::agent(1))]), &Formula::prop(1)));
    }

    #[test]
    fn cap_is_enforced() {
        let mut m = model(ConstantSpecification::empty());
        m.universe_cap = 3;
        let q = f("[x1@1]@1 (P1 & P2)");
        assert!(matches!(
            build_universe(&m, &[&q], 0),
            Err(ResourceError::UniverseTooLarge { .. })
        ));
    }
}
