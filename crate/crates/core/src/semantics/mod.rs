//! Finite evidence models: frames, evidence bases, closure by saturation,
//! and the satisfaction relation.
//!
//! An evidence function is given by a finite base of facts and is closed
//! on demand inside a finite universe of terms and formulas. Answers are
//! therefore sound: a fact reported present is forced by the closure
//! conditions, while absence only holds relative to the universe.

mod format;
mod random;
mod saturate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::deduction::{ConstantSpecification, Kernel};
use crate::syntax::{Formula, Sort, Term};
use crate::ResourceError;

pub use format::{parse_model, print_model, ModelFileError, ParsedModel};
pub use random::{random_frame, random_model, RandomModelParams};
pub use saturate::{build_universe, saturate, Saturation, Universe, DEFAULT_UNIVERSE_CAP};

/// A square boolean matrix over world indices.
pub type Relation = Vec<Vec<bool>>;

/// Worlds, agent relations and valuation; shared by evidence and Kripke models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub h: usize,
    pub worlds: Vec<String>,
    /// `rel[i - 1][w][v]` for agent `i`.
    pub rel: Vec<Relation>,
    pub val: BTreeMap<u32, BTreeSet<usize>>,
}

fn identity(n: usize) -> Relation {
    (0..n).map(|w| (0..n).map(|v| v == w).collect()).collect()
}

/// Reflexive-transitive closure (Warshall).
pub fn rt_closure(r: &Relation) -> Relation {
    let mut c = transitive_closure(r);
    for (w, row) in c.iter_mut().enumerate() {
        row[w] = true;
    }
    c
}

pub fn transitive_closure(r: &Relation) -> Relation {
    let n = r.len();
    let mut c = r.clone();
    for k in 0..n {
        for w in 0..n {
            if c[w][k] {
                for v in 0..n {
                    if c[k][v] {
                        c[w][v] = true;
                    }
                }
            }
        }
    }
    c
}

fn pairs(r: &Relation) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for (w, row) in r.iter().enumerate() {
        for (v, &b) in row.iter().enumerate() {
            if b {
                out.insert((w, v));
            }
        }
    }
    out
}

impl Frame {
    /// Worlds `0..n` with identity relations and an empty valuation.
    pub fn new(h: usize, n: usize) -> Self {
        Frame::named(h, (0..n).map(|w| w.to_string()).collect())
    }

    pub fn named(h: usize, worlds: Vec<String>) -> Self {
        let n = worlds.len();
        Frame {
            h,
            worlds,
            rel: vec![identity(n); h],
            val: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    /// Adds `(w, v)` to agent `i`'s relation without closing it.
    pub fn add_edge(&mut self, i: u32, w: usize, v: usize) {
        self.rel[i as usize - 1][w][v] = true;
    }

    /// Replaces every agent relation by its reflexive-transitive closure.
    pub fn close(&mut self) {
        for r in &mut self.rel {
            *r = rt_closure(r);
        }
    }

    pub fn set_true(&mut self, p: u32, w: usize) {
        self.val.entry(p).or_default().insert(w);
    }

    pub fn holds_prop(&self, p: u32, w: usize) -> bool {
        self.val.get(&p).is_some_and(|s| s.contains(&w))
    }

    pub fn reach_e_matrix(&self) -> Relation {
        let n = self.len();
        let mut r = vec![vec![false; n]; n];
        for ri in &self.rel {
            for w in 0..n {
                for v in 0..n {
                    r[w][v] |= ri[w][v];
                }
            }
        }
        r
    }

    pub fn reach_c_matrix(&self) -> Relation {
        transitive_closure(&self.reach_e_matrix())
    }

    /// The accessibility relation for boxes of sort `s`.
    pub fn relation(&self, s: Sort) -> Relation {
        match s {
            Sort::Agent(i) => self.rel[i.index() as usize - 1].clone(),
            Sort::E => self.reach_e_matrix(),
            Sort::C => self.reach_c_matrix(),
        }
    }

    /// Missing reflexive or transitive pairs and out-of-range valuations.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.len();
        if n == 0 {
            out.push(Violation::NoWorlds);
        }
        if self.rel.len() != self.h {
            out.push(Violation::AgentCount {
                expected: self.h,
                found: self.rel.len(),
            });
        }
        for (i, r) in self.rel.iter().enumerate() {
            let agent = i as u32 + 1;
            if r.len() != n || r.iter().any(|row| row.len() != n) {
                out.push(Violation::MalformedRelation { agent });
                continue;
            }
            for w in 0..n {
                if !r[w][w] {
                    out.push(Violation::NotReflexive { agent, world: w });
                }
            }
            for w in 0..n {
                for u in 0..n {
                    if !r[w][u] {
                        continue;
                    }
                    for v in 0..n {
                        if r[u][v] && !r[w][v] {
                            out.push(Violation::NotTransitive { agent, w, u, v });
                        }
                    }
                }
            }
        }
        for (p, ws) in &self.val {
            for w in ws {
                if *w >= n {
                    out.push(Violation::ValuationWorld { prop: *p, world: *w });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvidenceFact {
    pub world: usize,
    pub term: Term,
    pub formula: Formula,
}

impl EvidenceFact {
    pub fn new(world: usize, term: Term, formula: Formula) -> Self {
        EvidenceFact {
            world,
            term,
            formula,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EvidenceMode {
    /// The least evidence function over the base facts and the specification.
    #[default]
    Base,
    /// Every term is evidence for every formula.
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoWorlds,
    AgentCount { expected: usize, found: usize },
    MalformedRelation { agent: u32 },
    NotReflexive { agent: u32, world: usize },
    NotTransitive { agent: u32, w: usize, u: usize, v: usize },
    ValuationWorld { prop: u32, world: usize },
    FactWorld { world: usize },
    IllSortedFact { fact: String, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoWorlds => f.write_str("the set of worlds is empty"),
            Violation::AgentCount { expected, found } => {
                write!(f, "{found} agent relations for h = {expected}")
            }
            Violation::MalformedRelation { agent } => {
                write!(f, "relation of agent {agent} does not match the world count")
            }
            Violation::NotReflexive { agent, world } => {
                write!(f, "agent {agent}: missing reflexive pair ({world},{world})")
            }
            Violation::NotTransitive { agent, w, u, v } => write!(
                f,
                "agent {agent}: ({w},{u}) and ({u},{v}) present but ({w},{v}) missing"
            ),
            Violation::ValuationWorld { prop, world } => {
                write!(f, "valuation of P{prop} mentions unknown world {world}")
            }
            Violation::FactWorld { world } => write!(f, "evidence fact at unknown world {world}"),
            Violation::IllSortedFact { fact, reason } => write!(f, "evidence fact {fact}: {reason}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Resource(#[from] ResourceError),
    #[error("unknown world {0}")]
    UnknownWorld(usize),
}

/// A finite AF-model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AFModel {
    pub frame: Frame,
    pub base: BTreeSet<EvidenceFact>,
    pub cs: ConstantSpecification,
    pub mode: EvidenceMode,
    /// Upper bound on `|terms| + |formulas|` of a saturation universe.
    pub universe_cap: usize,
}

impl AFModel {
    pub fn new(frame: Frame, cs: ConstantSpecification, mode: EvidenceMode) -> Self {
        AFModel {
            frame,
            base: BTreeSet::new(),
            cs,
            mode,
            universe_cap: DEFAULT_UNIVERSE_CAP,
        }
    }

    pub fn h(&self) -> usize {
        self.frame.h
    }

    pub fn kernel(&self) -> Kernel {
        Kernel::new(self.h())
    }

    pub fn add_fact(&mut self, world: usize, term: Term, formula: Formula) {
        self.base.insert(EvidenceFact::new(world, term, formula));
    }
}

pub fn validate_model(m: &AFModel) -> ValidationReport {
    let mut violations = m.frame.violations();
    for fact in &m.base {
        if fact.world >= m.frame.len() {
            violations.push(Violation::FactWorld { world: fact.world });
        }
        let shown = format!("({}, {}, {})", fact.world, fact.term, fact.formula);
        if let Err(e) = crate::syntax::sort_of(&fact.term, m.h()) {
            violations.push(Violation::IllSortedFact { fact: shown.clone(), reason: e.to_string() });
        }
        if let Err(e) = fact.formula.check(m.h()) {
            violations.push(Violation::IllSortedFact { fact: shown, reason: e.to_string() });
        }
    }
    ValidationReport { violations }
}

pub fn reach_e(m: &AFModel) -> BTreeSet<(usize, usize)> {
    pairs(&m.frame.reach_e_matrix())
}

pub fn reach_c(m: &AFModel) -> BTreeSet<(usize, usize)> {
    pairs(&m.frame.reach_c_matrix())
}

/// Evaluates formulas against one saturation of the evidence.
pub struct Evaluator<'m> {
    model: &'m AFModel,
    facts: Option<Saturation>,
    relations: BTreeMap<Sort, Relation>,
}

impl<'m> Evaluator<'m> {
    /// Prepares evaluation of `queries` and their subformulas.
    pub fn new(
        model: &'m AFModel,
        queries: &[&Formula],
        depth_budget: usize,
    ) -> Result<Self, SemanticsError> {
        let facts = match model.mode {
            EvidenceMode::Full => None,
            EvidenceMode::Base => {
                let u = build_universe(model, queries, depth_budget)?;
                Some(saturate(model, &u))
            }
        };
        Ok(Evaluator {
            model,
            facts,
            relations: BTreeMap::new(),
        })
    }

    pub fn evidence(&self, w: usize, t: &Term, a: &Formula) -> bool {
        match &self.facts {
            None => true,
            Some(s) => s.contains(w, t, a),
        }
    }

    pub fn satisfies(&mut self, w: usize, a: &Formula) -> bool {
        match a {
            Formula::Prop(p) => self.model.frame.holds_prop(*p, w),
            Formula::Neg(x) => !self.satisfies(w, x),
            Formula::And(x, y) => self.satisfies(w, x) && self.satisfies(w, y),
            Formula::Or(x, y) => self.satisfies(w, x) || self.satisfies(w, y),
            Formula::Imp(x, y) => !self.satisfies(w, x) || self.satisfies(w, y),
            Formula::Just(t, s, body) => {
                if !self.evidence(w, t, body) {
                    return false;
                }
                let frame = &self.model.frame;
                let row = self
                    .relations
                    .entry(*s)
                    .or_insert_with(|| frame.relation(*s))[w]
                    .clone();
                row.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .all(|(v, _)| self.satisfies(v, body))
            }
        }
    }
}

fn check_world(m: &AFModel, w: usize) -> Result<(), SemanticsError> {
    if w >= m.frame.len() {
        return Err(SemanticsError::UnknownWorld(w));
    }
    Ok(())
}

/// Whether `a ∈ E_s(w, t)` in the least evidence function, decided inside
/// the universe of `[t]@s a` grown `depth_budget` times.
pub fn evidence_holds(
    m: &AFModel,
    w: usize,
    t: &Term,
    a: &Formula,
    depth_budget: usize,
) -> Result<bool, SemanticsError> {
    check_world(m, w)?;
    let q = Formula::just(t.clone(), a.clone());
    let ev = Evaluator::new(m, &[&q], depth_budget)?;
    Ok(ev.evidence(w, t, a))
}

pub fn satisfies(
    m: &AFModel,
    w: usize,
    a: &Formula,
    depth_budget: usize,
) -> Result<bool, SemanticsError> {
    check_world(m, w)?;
    let mut ev = Evaluator::new(m, &[a], depth_budget)?;
    Ok(ev.satisfies(w, a))
}

pub fn valid_in_model(m: &AFModel, a: &Formula, depth_budget: usize) -> Result<bool, SemanticsError> {
    let mut ev = Evaluator::new(m, &[a], depth_budget)?;
    Ok((0..m.frame.len()).all(|w| ev.satisfies(w, a)))
}

/// The singleton model on `w`: loops only, valuation and base facts at `w`.
pub fn restrict_to_world(m: &AFModel, w: usize) -> Result<AFModel, SemanticsError> {
    check_world(m, w)?;
    let mut frame = Frame::named(m.h(), vec![m.frame.worlds[w].clone()]);
    for (p, ws) in &m.frame.val {
        if ws.contains(&w) {
            frame.set_true(*p, 0);
        }
    }
    let mut out = AFModel {
        frame,
        base: BTreeSet::new(),
        cs: m.cs.clone(),
        mode: m.mode,
        universe_cap: m.universe_cap,
    };
    for f in m.base.iter().filter(|f| f.world == w) {
        out.add_fact(0, f.term.clone(), f.formula.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_term};

    /// The coordinated-attack frame: G = agent 1, H = agent 2, del = P1,
    /// m1 = c1@2, m2 = c2@1.
    pub(crate) fn attack_model(mode: EvidenceMode) -> AFModel {
        let mut frame = Frame::new(2, 4);
        frame.add_edge(1, 1, 2);
        frame.add_edge(2, 0, 1);
        frame.add_edge(2, 2, 3);
        frame.close();
        for w in 0..3 {
            frame.set_true(1, w);
        }
        let mut m = AFModel::new(frame, ConstantSpecification::TotalC, mode);
        m.add_fact(0, parse_term("c1@2", 2).unwrap(), parse_formula("P1", 2).unwrap());
        m.add_fact(
            0,
            parse_term("c2@1", 2).unwrap(),
            parse_formula("[c1@2]@2 P1", 2).unwrap(),
        );
        m
    }

    #[test]
    fn attack_model_is_valid() {
        let m = attack_model(EvidenceMode::Base);
        assert!(validate_model(&m).is_valid());
        assert!(reach_c(&m).contains(&(0, 3)));
        assert!(!reach_e(&m).contains(&(0, 3)));
    }

    #[test]
    fn frame_violations() {
        let mut f = Frame::new(1, 3);
        f.add_edge(1, 0, 1);
        f.add_edge(1, 1, 2);
        let v = f.violations();
        assert_eq!(v, vec![Violation::NotTransitive { agent: 1, w: 0, u: 1, v: 2 }]);
        let empty = Frame::new(1, 0);
        assert_eq!(empty.violations(), vec![Violation::NoWorlds]);
        let mut f = Frame::new(1, 2);
        f.rel[0][1][1] = false;
        assert_eq!(f.violations(), vec![Violation::NotReflexive { agent: 1, world: 1 }]);
    }

    #[test]
    fn attack_satisfaction() {
        for mode in [EvidenceMode::Base, EvidenceMode::Full] {
            let m = attack_model(mode);
            let f = |s: &str| parse_formula(s, 2).unwrap();
            assert!(satisfies(&m, 0, &f("[c1@2]@2 P1"), 2).unwrap());
            assert!(satisfies(&m, 0, &f("[c2@1]@1 [c1@2]@2 P1"), 2).unwrap());
            assert!(!satisfies(&m, 0, &f("[x1@2]@2 [c2@1]@1 [c1@2]@2 P1"), 2).unwrap());
            assert!(!satisfies(&m, 0, &f("[x1@C]@C P1"), 2).unwrap());
            assert!(!satisfies(&m, 3, &f("P1"), 0).unwrap());
        }
    }

    #[test]
    fn restriction() {
        let m = attack_model(EvidenceMode::Base);
        let r = restrict_to_world(&m, 0).unwrap();
        assert_eq!(r.frame.len(), 1);
        assert!(validate_model(&r).is_valid());
        assert_eq!(r.base.len(), 2);
        assert_eq!(restrict_to_world(&r, 0).unwrap(), r);
        assert_eq!(reach_c(&r), BTreeSet::from([(0, 0)]));
        assert_eq!(reach_e(&r), reach_c(&r));
        assert!(matches!(restrict_to_world(&m, 9), Err(SemanticsError::UnknownWorld(9))));
    }

    #[test]
    fn full_mode_answers_true() {
        let m = attack_model(EvidenceMode::Full);
        let t = parse_term("ind(x1@C, x1@E)", 2).unwrap();
        assert!(evidence_holds(&m, 3, &t, &parse_formula("P3", 2).unwrap(), 0).unwrap());
    }
}
