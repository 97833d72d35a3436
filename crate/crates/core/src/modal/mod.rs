//! The modal side: formulas with `□_i`, `E` and `C`, Kripke evaluation,
//! forgetful projection, realization checking and the conservativity
//! translation into the single-agent fragment.

mod translate;

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::deduction::Derivation;
use crate::semantics::{random_frame, Frame};
use crate::syntax::{
    binary, Agent, Formula, Names, ParseError, Parser, Sort, SyntaxError, Tok, AND, IMP,
    OR, UNARY,
};

pub use translate::{conservative_projection, translate_derivation_x, TranslateError, XTranslation};

/// Kripke models share the frame type with evidence models.
pub type KripkeModel = Frame;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModalFormula {
    Prop(u32),
    Neg(Box<ModalFormula>),
    And(Box<ModalFormula>, Box<ModalFormula>),
    Or(Box<ModalFormula>, Box<ModalFormula>),
    Imp(Box<ModalFormula>, Box<ModalFormula>),
    Box(Agent, Box<ModalFormula>),
    Every(Box<ModalFormula>),
    Common(Box<ModalFormula>),
}

impl ModalFormula {
    pub fn neg(a: ModalFormula) -> Self {
        ModalFormula::Neg(Box::new(a))
    }

    pub fn and(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::Imp(Box::new(a), Box::new(b))
    }

    pub fn boxed(i: u32, a: ModalFormula) -> Self {
        ModalFormula::Box(Agent::new(i), Box::new(a))
    }

    pub fn every(a: ModalFormula) -> Self {
        ModalFormula::Every(Box::new(a))
    }

    pub fn common(a: ModalFormula) -> Self {
        ModalFormula::Common(Box::new(a))
    }

    /// The operator `[t]@s` forgets to.
    fn modality(s: Sort, a: ModalFormula) -> Self {
        match s {
            Sort::Agent(i) => ModalFormula::Box(i, Box::new(a)),
            Sort::E => ModalFormula::every(a),
            Sort::C => ModalFormula::common(a),
        }
    }

    pub fn props(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<u32>) {
        match self {
            ModalFormula::Prop(k) => {
                out.insert(*k);
            }
            ModalFormula::Neg(a) | ModalFormula::Box(_, a) | ModalFormula::Every(a) | ModalFormula::Common(a) => {
                a.collect_props(out)
            }
            ModalFormula::And(a, b) | ModalFormula::Or(a, b) | ModalFormula::Imp(a, b) => {
                a.collect_props(out);
                b.collect_props(out);
            }
        }
    }

    /// Largest agent index under a `□_i`, or 0.
    pub fn max_agent(&self) -> u32 {
        match self {
            ModalFormula::Prop(_) => 0,
            ModalFormula::Box(i, a) => i.index().max(a.max_agent()),
            ModalFormula::Neg(a) | ModalFormula::Every(a) | ModalFormula::Common(a) => a.max_agent(),
            ModalFormula::And(a, b) | ModalFormula::Or(a, b) | ModalFormula::Imp(a, b) => {
                a.max_agent().max(b.max_agent())
            }
        }
    }
}

fn write_modal(out: &mut dyn Write, a: &ModalFormula, ctx: u8) -> fmt::Result {
    match a {
        ModalFormula::Prop(k) => write!(out, "P{k}"),
        ModalFormula::Neg(x) => {
            out.write_char('~')?;
            write_modal(out, x, UNARY)
        }
        ModalFormula::Box(i, x) => {
            write!(out, "#{i} ")?;
            write_modal(out, x, UNARY)
        }
        ModalFormula::Every(x) => {
            out.write_str("#E ")?;
            write_modal(out, x, UNARY)
        }
        ModalFormula::Common(x) => {
            out.write_str("#C ")?;
            write_modal(out, x, UNARY)
        }
        ModalFormula::And(x, y) => binary(out, ctx, AND, " & ", |o, c| write_modal(o, x, c), |o, c| write_modal(o, y, c)),
        ModalFormula::Or(x, y) => binary(out, ctx, OR, " | ", |o, c| write_modal(o, x, c), |o, c| write_modal(o, y, c)),
        ModalFormula::Imp(x, y) => binary(out, ctx, IMP, " -> ", |o, c| write_modal(o, x, c), |o, c| write_modal(o, y, c)),
    }
}

impl fmt::Display for ModalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_modal(f, self, 0)
    }
}

struct ModalParser<'n>(Parser<'n>);

impl ModalParser<'_> {
    fn formula(&mut self) -> Result<ModalFormula, ParseError> {
        let left = self.disjunction()?;
        if self.0.eat(&Tok::Arrow) {
            return Ok(ModalFormula::imp(left, self.formula()?));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<ModalFormula, ParseError> {
        let mut left = self.conjunction()?;
        while self.0.eat(&Tok::Bar) {
            left = ModalFormula::or(left, self.conjunction()?);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<ModalFormula, ParseError> {
        let mut left = self.unary()?;
        while self.0.eat(&Tok::Amp) {
            left = ModalFormula::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<ModalFormula, ParseError> {
        match self.0.peek().clone() {
            Tok::Tilde => {
                self.0.bump();
                Ok(ModalFormula::neg(self.unary()?))
            }
            Tok::Hash => {
                self.0.bump();
                match self.0.peek().clone() {
                    Tok::Num(i) if i >= 1 && i as usize <= self.0.h() => {
                        self.0.bump();
                        Ok(ModalFormula::boxed(i, self.unary()?))
                    }
                    Tok::Num(i) => Err(self.0.error(format!("agent {i} outside 1..={}", self.0.h()))),
                    Tok::Ident(s) if s == "E" => {
                        self.0.bump();
                        Ok(ModalFormula::every(self.unary()?))
                    }
                    Tok::Ident(s) if s == "C" => {
                        self.0.bump();
                        Ok(ModalFormula::common(self.unary()?))
                    }
                    _ => Err(self.0.error("expected an agent, `E` or `C` after `#`")),
                }
            }
            Tok::LParen => {
                self.0.bump();
                let a = self.formula()?;
                self.0.expect(Tok::RParen)?;
                Ok(a)
            }
            Tok::Ident(name) => match self.0.prop_index(&name) {
                Some(0) => Err(self.0.error("indices start at 1")),
                Some(k) => {
                    self.0.bump();
                    Ok(ModalFormula::Prop(k))
                }
                None => Err(self.0.error(format!("unknown proposition `{name}`"))),
            },
            _ => Err(self.0.error("expected a modal formula")),
        }
    }
}

pub fn parse_modal_with(text: &str, h: usize, names: &Names) -> Result<ModalFormula, SyntaxError> {
    let mut p = ModalParser(Parser::new(text, h, names)?);
    let a = p.formula()?;
    p.0.expect_end()?;
    Ok(a)
}

pub fn parse_modal(text: &str, h: usize) -> Result<ModalFormula, SyntaxError> {
    parse_modal_with(text, h, &Names::new())
}

/// Replaces every `[t]@s` by the modality of sort `s`.
pub fn forgetful(a: &Formula) -> ModalFormula {
    match a {
        Formula::Prop(k) => ModalFormula::Prop(*k),
        Formula::Neg(x) => ModalFormula::neg(forgetful(x)),
        Formula::And(x, y) => ModalFormula::and(forgetful(x), forgetful(y)),
        Formula::Or(x, y) => ModalFormula::or(forgetful(x), forgetful(y)),
        Formula::Imp(x, y) => ModalFormula::imp(forgetful(x), forgetful(y)),
        Formula::Just(_, s, x) => ModalFormula::modality(*s, forgetful(x)),
    }
}

/// `r` is a realization of `a`.
pub fn realizes(r: &Formula, a: &ModalFormula) -> bool {
    forgetful(r) == *a
}

/// Evaluates `a` at `w`. Relations are used as given.
pub fn kripke_satisfies(k: &KripkeModel, w: usize, a: &ModalFormula) -> bool {
    Evaluator::new(k).holds(w, a)
}

pub fn kripke_valid(k: &KripkeModel, a: &ModalFormula) -> bool {
    let mut ev = Evaluator::new(k);
    (0..k.len()).all(|w| ev.holds(w, a))
}

struct Evaluator<'k> {
    k: &'k KripkeModel,
    every: Option<Vec<Vec<bool>>>,
    common: Option<Vec<Vec<bool>>>,
}

impl<'k> Evaluator<'k> {
    fn new(k: &'k KripkeModel) -> Self {
        Evaluator {
            k,
            every: None,
            common: None,
        }
    }

    fn all_succ(&mut self, row: &[bool], a: &ModalFormula) -> bool {
        let succ: Vec<usize> = row.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v).collect();
        succ.into_iter().all(|v| self.holds(v, a))
    }

    fn holds(&mut self, w: usize, a: &ModalFormula) -> bool {
        match a {
            ModalFormula::Prop(p) => self.k.holds_prop(*p, w),
            ModalFormula::Neg(x) => !self.holds(w, x),
            ModalFormula::And(x, y) => self.holds(w, x) && self.holds(w, y),
            ModalFormula::Or(x, y) => self.holds(w, x) || self.holds(w, y),
            ModalFormula::Imp(x, y) => !self.holds(w, x) || self.holds(w, y),
            ModalFormula::Box(i, x) => {
                let row = self.k.rel[i.index() as usize - 1][w].clone();
                self.all_succ(&row, x)
            }
            ModalFormula::Every(x) => {
                let row = self.every.get_or_insert_with(|| self.k.reach_e_matrix())[w].clone();
                self.all_succ(&row, x)
            }
            ModalFormula::Common(x) => {
                let row = self.common.get_or_insert_with(|| self.k.reach_c_matrix())[w].clone();
                self.all_succ(&row, x)
            }
        }
    }
}

/// Outcome of searching random Kripke models for a counterexample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub formula: ModalFormula,
    pub trials: usize,
    /// First falsifying model and world found.
    pub counterexample: Option<(KripkeModel, usize)>,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.counterexample {
            None => write!(f, "no counterexample in {} trials: {}", self.trials, self.formula),
            Some((k, w)) => {
                writeln!(f, "counterexample to {} at world {}", self.formula, k.worlds[*w])?;
                for (i, r) in k.rel.iter().enumerate() {
                    let pairs: Vec<String> = (0..k.len())
                        .flat_map(|a| (0..k.len()).map(move |b| (a, b)))
                        .filter(|&(a, b)| a != b && r[a][b])
                        .map(|(a, b)| format!("({a},{b})"))
                        .collect();
                    writeln!(f, "rel {}: {}", i + 1, pairs.join(" "))?;
                }
                let vals: Vec<String> = k
                    .val
                    .iter()
                    .map(|(p, ws)| {
                        let ws: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
                        format!("P{p}: {}", ws.join(" "))
                    })
                    .collect();
                write!(f, "val {}", vals.join("; "))
            }
        }
    }
}

/// Searches `trials` random frames with 1 to 4 worlds for a world
/// falsifying `a`.
pub fn probe_formula(a: &ModalFormula, h: usize, trials: usize, seed: u64) -> ProbeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let props = a.props();
    for _ in 0..trials {
        let n = rng.random_range(1..=4);
        let density = rng.random_range(0.0..0.8);
        let mut k = random_frame(&mut rng, h, n, density);
        for p in &props {
            for w in 0..n {
                if rng.random_bool(0.5) {
                    k.set_true(*p, w);
                }
            }
        }
        let mut ev = Evaluator::new(&k);
        if let Some(w) = (0..n).find(|&w| !ev.holds(w, a)) {
            return ProbeReport {
                formula: a.clone(),
                trials,
                counterexample: Some((k, w)),
            };
        }
    }
    ProbeReport {
        formula: a.clone(),
        trials,
        counterexample: None,
    }
}

/// Looks for a Kripke countermodel to the forgetful image of `d`'s conclusion.
pub fn forgetful_soundness_probe(d: &Derivation, h: usize, trials: usize, seed: u64) -> ProbeReport {
    let a = d
        .conclusion()
        .map(forgetful)
        .unwrap_or(ModalFormula::imp(ModalFormula::Prop(1), ModalFormula::Prop(1)));
    probe_formula(&a, h, trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deduction::{Kernel, ConstantSpecification, DerivationBuilder, AxiomSchema};
    use crate::syntax::parse_formula;

    fn m(s: &str) -> ModalFormula {
        parse_modal(s, 2).unwrap()
    }

    #[test]
    fn round_trip() {
        for s in ["#1 P1 -> #C P1", "#E (P1 & P2) | ~#2 P3", "(P1 -> P2) -> P3", "#C #E #1 P1"] {
            assert_eq!(m(s).to_string(), s);
        }
        assert!(parse_modal("#3 P1", 2).is_err());
        assert!(parse_modal("#X P1", 2).is_err());
    }

    #[test]
    fn forgetful_examples() {
        let f = |s: &str| forgetful(&parse_formula(s, 2).unwrap());
        assert_eq!(f("[x1@C]@C P1"), m("#C P1"));
        assert_eq!(f("P1 -> P2"), m("P1 -> P2"));
        assert_eq!(f("[c2@1]@1 [c1@2]@2 P1"), m("#1 #2 P1"));
        assert!(realizes(&parse_formula("[x1@C]@C P1", 2).unwrap(), &m("#C P1")));
        assert!(!realizes(&parse_formula("[x1@1]@1 P1", 2).unwrap(), &m("#C P1")));
        assert!(realizes(&parse_formula("P1", 2).unwrap(), &m("P1")));
    }

    fn attack_frame() -> KripkeModel {
        let mut k = Frame::new(2, 4);
        k.add_edge(1, 1, 2);
        k.add_edge(2, 0, 1);
        k.add_edge(2, 2, 3);
        k.close();
        for w in 0..3 {
            k.set_true(1, w);
        }
        k
    }

    #[test]
    fn attack_refutation() {
        let k = attack_frame();
        let a = m("#2 P1 & #1 #2 P1 -> #C P1");
        assert!(!kripke_satisfies(&k, 0, &a));
        let mut all = k.clone();
        for w in 0..4 {
            all.set_true(1, w);
        }
        assert!(kripke_satisfies(&all, 0, &a));
    }

    #[test]
    fn single_world() {
        let mut k = Frame::new(2, 1);
        assert!(!kripke_satisfies(&k, 0, &m("#C P1")));
        k.set_true(1, 0);
        assert!(kripke_satisfies(&k, 0, &m("#C P1")));
    }

    #[test]
    fn probes() {
        let control = m("#1 P1 -> #C P1");
        assert!(probe_formula(&control, 2, 100, 0).counterexample.is_some());
        let mut chain = Frame::new(2, 2);
        chain.add_edge(2, 0, 1);
        chain.set_true(1, 0);
        assert!(!kripke_satisfies(&chain, 0, &control));

        let kernel = Kernel::new(2);
        let mut b = DerivationBuilder::new();
        let k = b.axiom(parse_formula("[x1@1]@1 P1 -> P1", 2).unwrap(), AxiomSchema::Refl);
        let d = b.finish(k);
        assert!(kernel.check(&d, &ConstantSpecification::TotalC).is_accepted());
        assert!(forgetful_soundness_probe(&d, 2, 100, 1).counterexample.is_none());
    }
}
