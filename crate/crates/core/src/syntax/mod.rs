//! Sorted evidence terms and formulas.
//!
//! Terms come in `h + 2` sorts: one per agent, one for mutual knowledge (`E`)
//! and one for common knowledge (`C`). The number of agents `h` is a runtime
//! parameter; it is not stored in the syntax tree, so every operation that
//! needs it (sort checking, tuple arity) takes it explicitly.

mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub use parse::{
    parse_formula, parse_formula_with, parse_term, parse_term_with, Names, ParseError, SyntaxError,
};
pub use print::{print_formula, print_term};
pub(crate) use print::{binary, AND, IMP, OR, UNARY};
pub(crate) use parse::{Parser, Tok};

/// A 1-based agent index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Agent(u32);

impl Agent {
    /// Panics on zero; agent indices are 1-based.
    pub fn new(index: u32) -> Agent {
        assert!(index >= 1, "agent indices start at 1");
        Agent(index)
    }

    pub fn try_new(index: u32) -> Option<Agent> {
        (index >= 1).then_some(Agent(index))
    }

    pub fn index(self) -> u32 {
        self.0
    }

    /// All agents `1..=h`.
    pub fn all(h: usize) -> impl Iterator<Item = Agent> {
        (1..=h as u32).map(Agent)
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Agent(Agent),
    E,
    C,
}

impl Sort {
    pub fn agent(i: u32) -> Sort {
        Sort::Agent(Agent::new(i))
    }

    /// Sorts admitting `+` and `*`: the agents and `C`.
    pub fn is_star(self) -> bool {
        !matches!(self, Sort::E)
    }

    /// Every sort available with `h` agents, agents first.
    pub fn all(h: usize) -> Vec<Sort> {
        Agent::all(h)
            .map(Sort::Agent)
            .chain([Sort::E, Sort::C])
            .collect()
    }

    fn in_range(self, h: usize) -> bool {
        match self {
            Sort::Agent(a) => a.0 as usize <= h,
            _ => true,
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Agent(a) => write!(f, "{a}"),
            Sort::E => f.write_str("E"),
            Sort::C => f.write_str("C"),
        }
    }
}

/// Evidence term. `Sum` and `App` carry the sort of their operands.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(u32, Sort),
    Var(u32, Sort),
    Bang(Box<Term>, Agent),
    Sum(Box<Term>, Box<Term>, Sort),
    App(Box<Term>, Box<Term>, Sort),
    Tuple(Vec<Term>),
    Proj(Agent, Box<Term>),
    Head(Box<Term>),
    Tail(Box<Term>),
    Ind(Box<Term>, Box<Term>),
}

impl Term {
    pub fn constant(index: u32, sort: Sort) -> Term {
        Term::Const(index, sort)
    }

    pub fn var(index: u32, sort: Sort) -> Term {
        Term::Var(index, sort)
    }

    pub fn bang(t: Term, agent: Agent) -> Term {
        Term::Bang(Box::new(t), agent)
    }

    pub fn sum(t: Term, s: Term, sort: Sort) -> Term {
        Term::Sum(Box::new(t), Box::new(s), sort)
    }

    pub fn app(t: Term, s: Term, sort: Sort) -> Term {
        Term::App(Box::new(t), Box::new(s), sort)
    }

    pub fn proj(agent: Agent, t: Term) -> Term {
        Term::Proj(agent, Box::new(t))
    }

    pub fn head(t: Term) -> Term {
        Term::Head(Box::new(t))
    }

    pub fn tail(t: Term) -> Term {
        Term::Tail(Box::new(t))
    }

    pub fn ind(t: Term, s: Term) -> Term {
        Term::Ind(Box::new(t), Box::new(s))
    }

    /// The sort the outermost constructor produces, without checking
    /// the children. Use [`sort_of`] to validate a whole term.
    pub fn sort(&self) -> Sort {
        match self {
            Term::Const(_, s) | Term::Var(_, s) | Term::Sum(_, _, s) | Term::App(_, _, s) => *s,
            Term::Bang(_, a) | Term::Proj(a, _) => Sort::Agent(*a),
            Term::Tuple(_) | Term::Head(_) | Term::Tail(_) => Sort::E,
            Term::Ind(_, _) => Sort::C,
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Const(..) | Term::Var(..) => vec![],
            Term::Bang(t, _) | Term::Proj(_, t) | Term::Head(t) | Term::Tail(t) => vec![t],
            Term::Sum(t, s, _) | Term::App(t, s, _) | Term::Ind(t, s) => vec![t, s],
            Term::Tuple(ts) => ts.iter().collect(),
        }
    }

    /// Pre-order traversal of all subterm occurrences, including `self`.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.visit(&mut |t| {
            if matches!(t, Term::Var(..)) {
                ground = false;
            }
        });
        ground
    }

    /// True when some subterm (the term itself included) has sort `E` or `C`.
    pub fn mentions_group_evidence(&self) -> bool {
        let mut found = false;
        self.visit(&mut |t| {
            if matches!(t.sort(), Sort::E | Sort::C) {
                found = true;
            }
        });
        found
    }

    /// Largest index of a variable of the given sort, 0 if none.
    pub fn max_var_index(&self, sort: Sort) -> u32 {
        let mut m = 0;
        self.visit(&mut |t| {
            if let Term::Var(k, s) = t {
                if *s == sort {
                    m = m.max(*k);
                }
            }
        });
        m
    }

    pub fn max_const_index(&self, sort: Sort) -> u32 {
        let mut m = 0;
        self.visit(&mut |t| {
            if let Term::Const(k, s) = t {
                if *s == sort {
                    m = m.max(*k);
                }
            }
        });
        m
    }

    /// Number of constructors on the longest root-to-leaf path; leaves have depth 1.
    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(u32),
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    /// `[t]@sort body`
    Just(Term, Sort, Box<Formula>),
}

impl Formula {
    pub fn prop(index: u32) -> Formula {
        Formula::Prop(index)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Formula {
        Formula::Neg(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    /// `[t]@sort body` with the sort read off the term.
    pub fn just(t: Term, body: Formula) -> Formula {
        let sort = t.sort();
        Formula::Just(t, sort, Box::new(body))
    }

    /// Left-nested conjunction `((a1 & a2) & a3) ...`. Panics on an empty list.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        let first = it.next().expect("conjunction of no formulas");
        it.fold(first, Formula::and)
    }

    /// `p1 -> (p2 -> ... -> concl)`
    pub fn imp_chain(premises: &[Formula], concl: Formula) -> Formula {
        premises
            .iter()
            .rev()
            .fold(concl, |acc, p| Formula::imp(p.clone(), acc))
    }

    pub fn as_imp(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Imp(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn as_just(&self) -> Option<(&Term, Sort, &Formula)> {
        match self {
            Formula::Just(t, s, b) => Some((t, *s, b)),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Prop(_) => vec![],
            Formula::Neg(a) | Formula::Just(_, _, a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => vec![a, b],
        }
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Every term appearing directly under a justification box, at any depth.
    pub fn terms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        self.visit(&mut |g| {
            if let Formula::Just(t, _, _) = g {
                out.push(t);
            }
        });
        out
    }

    pub fn props(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            if let Formula::Prop(k) = g {
                out.insert(*k);
            }
        });
        out
    }

    pub fn max_var_index(&self, sort: Sort) -> u32 {
        self.terms()
            .iter()
            .map(|t| t.max_var_index(sort))
            .max()
            .unwrap_or(0)
    }

    pub fn max_const_index(&self, sort: Sort) -> u32 {
        self.terms()
            .iter()
            .map(|t| t.max_const_index(sort))
            .max()
            .unwrap_or(0)
    }

    /// True if no term anywhere in the formula mentions `E` or `C` evidence.
    pub fn is_single_agent_fragment(&self) -> bool {
        self.terms().iter().all(|t| !t.mentions_group_evidence())
    }

    /// Checks every term is well sorted and every box matches its term's sort.
    pub fn check(&self, h: usize) -> Result<(), SortError> {
        match self {
            Formula::Prop(k) => {
                if *k == 0 {
                    return Err(SortError::new(self.to_string(), SortViolation::ZeroIndex));
                }
                Ok(())
            }
            Formula::Neg(a) => a.check(h),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.check(h)?;
                b.check(h)
            }
            Formula::Just(t, s, a) => {
                let actual = sort_of(t, h)?;
                if actual != *s || !s.in_range(h) {
                    return Err(SortError::new(
                        self.to_string(),
                        SortViolation::BoxMismatch {
                            term: actual,
                            boxed: *s,
                        },
                    ));
                }
                a.check(h)
            }
        }
    }
}

/// Which sorting rule a term or formula breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SortViolation {
    ZeroIndex,
    AgentOutOfRange { agent: u32, h: usize },
    NotStar(Sort),
    OperandMismatch { expected: Sort, found: Sort },
    TupleArity { expected: usize, found: usize },
    TupleComponent { position: usize, found: Sort },
    ExpectedSort { expected: Sort, found: Sort },
    BoxMismatch { term: Sort, boxed: Sort },
    NotAVariable,
}

impl fmt::Display for SortViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SortViolation::ZeroIndex => f.write_str("indices start at 1"),
            SortViolation::AgentOutOfRange { agent, h } => {
                write!(f, "agent {agent} is outside 1..{h}")
            }
            SortViolation::NotStar(s) => write!(f, "+ and * need an agent or C sort, got {s}"),
            SortViolation::OperandMismatch { expected, found } => {
                write!(f, "operand of sort {found} where {expected} is required")
            }
            SortViolation::TupleArity { expected, found } => {
                write!(f, "tuple has {found} components, expected {expected}")
            }
            SortViolation::TupleComponent { position, found } => {
                write!(f, "tuple component {position} has sort {found}, expected {position}")
            }
            SortViolation::ExpectedSort { expected, found } => {
                write!(f, "expected a term of sort {expected}, found {found}")
            }
            SortViolation::BoxMismatch { term, boxed } => {
                write!(f, "term of sort {term} under a box of sort {boxed}")
            }
            SortViolation::NotAVariable => f.write_str("only variables can be substituted"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("sort error in `{subterm}`: {violation}")]
pub struct SortError {
    pub subterm: String,
    pub violation: SortViolation,
}

impl SortError {
    fn new(subterm: String, violation: SortViolation) -> Self {
        SortError { subterm, violation }
    }

    fn at(t: &Term, violation: SortViolation) -> Self {
        SortError::new(t.to_string(), violation)
    }
}

fn check_agent(t: &Term, a: Agent, h: usize) -> Result<(), SortError> {
    if a.0 as usize > h {
        return Err(SortError::at(
            t,
            SortViolation::AgentOutOfRange { agent: a.0, h },
        ));
    }
    Ok(())
}

fn expect_sort(t: &Term, child: &Term, expected: Sort, h: usize) -> Result<(), SortError> {
    let found = sort_of(child, h)?;
    if found != expected {
        return Err(SortError::at(
            t,
            SortViolation::ExpectedSort { expected, found },
        ));
    }
    Ok(())
}

/// Validates the whole term and returns its sort.
pub fn sort_of(t: &Term, h: usize) -> Result<Sort, SortError> {
    match t {
        Term::Const(k, s) | Term::Var(k, s) => {
            if *k == 0 {
                return Err(SortError::at(t, SortViolation::ZeroIndex));
            }
            if let Sort::Agent(a) = s {
                check_agent(t, *a, h)?;
            }
            Ok(*s)
        }
        Term::Bang(inner, a) => {
            check_agent(t, *a, h)?;
            expect_sort(t, inner, Sort::Agent(*a), h)?;
            Ok(Sort::Agent(*a))
        }
        Term::Sum(l, r, s) | Term::App(l, r, s) => {
            if let Sort::Agent(a) = s {
                check_agent(t, *a, h)?;
            }
            if !s.is_star() {
                return Err(SortError::at(t, SortViolation::NotStar(*s)));
            }
            for side in [l, r] {
                let found = sort_of(side, h)?;
                if found != *s {
                    return Err(SortError::at(
                        t,
                        SortViolation::OperandMismatch { expected: *s, found },
                    ));
                }
            }
            Ok(*s)
        }
        Term::Tuple(items) => {
            if items.len() != h {
                return Err(SortError::at(
                    t,
                    SortViolation::TupleArity {
                        expected: h,
                        found: items.len(),
                    },
                ));
            }
            for (k, item) in items.iter().enumerate() {
                let found = sort_of(item, h)?;
                if found != Sort::agent(k as u32 + 1) {
                    return Err(SortError::at(
                        t,
                        SortViolation::TupleComponent {
                            position: k + 1,
                            found,
                        },
                    ));
                }
            }
            Ok(Sort::E)
        }
        Term::Proj(a, inner) => {
            check_agent(t, *a, h)?;
            expect_sort(t, inner, Sort::E, h)?;
            Ok(Sort::Agent(*a))
        }
        Term::Head(inner) | Term::Tail(inner) => {
            expect_sort(t, inner, Sort::C, h)?;
            Ok(Sort::E)
        }
        Term::Ind(l, r) => {
            expect_sort(t, l, Sort::C, h)?;
            expect_sort(t, r, Sort::E, h)?;
            Ok(Sort::C)
        }
    }
}

/// Reflexive-transitive subterm closure.
pub fn subterms(t: &Term) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    t.visit(&mut |s| {
        out.insert(s.clone());
    });
    out
}

/// Reflexive-transitive subformula closure. Terms are not descended into.
pub fn subformulas(a: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    a.visit(&mut |g| {
        out.insert(g.clone());
    });
    out
}

fn subst_term(t: &Term, x: &Term, by: &Term) -> Term {
    if t == x {
        return by.clone();
    }
    match t {
        Term::Const(..) | Term::Var(..) => t.clone(),
        Term::Bang(a, i) => Term::bang(subst_term(a, x, by), *i),
        Term::Sum(a, b, s) => Term::sum(subst_term(a, x, by), subst_term(b, x, by), *s),
        Term::App(a, b, s) => Term::app(subst_term(a, x, by), subst_term(b, x, by), *s),
        Term::Tuple(ts) => Term::Tuple(ts.iter().map(|c| subst_term(c, x, by)).collect()),
        Term::Proj(i, a) => Term::proj(*i, subst_term(a, x, by)),
        Term::Head(a) => Term::head(subst_term(a, x, by)),
        Term::Tail(a) => Term::tail(subst_term(a, x, by)),
        Term::Ind(a, b) => Term::ind(subst_term(a, x, by), subst_term(b, x, by)),
    }
}

/// A simultaneous substitution `(x/t, P/B)`. Either half may be absent.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    var: Option<(Term, Term)>,
    prop: Option<(u32, Formula)>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replace the variable `x` by `t`; both must have the same sort.
    pub fn var(mut self, x: Term, t: Term, h: usize) -> Result<Self, SortError> {
        if !matches!(x, Term::Var(..)) {
            return Err(SortError::at(&x, SortViolation::NotAVariable));
        }
        let xs = sort_of(&x, h)?;
        let ts = sort_of(&t, h)?;
        if xs != ts {
            return Err(SortError::at(
                &t,
                SortViolation::OperandMismatch {
                    expected: xs,
                    found: ts,
                },
            ));
        }
        self.var = Some((x, t));
        Ok(self)
    }

    pub fn prop(mut self, p: u32, b: Formula) -> Self {
        self.prop = Some((p, b));
        self
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        match &self.var {
            Some((x, by)) => subst_term(t, x, by),
            None => t.clone(),
        }
    }

    pub fn apply(&self, a: &Formula) -> Formula {
        match a {
            Formula::Prop(k) => match &self.prop {
                Some((p, b)) if p == k => b.clone(),
                _ => a.clone(),
            },
            Formula::Neg(x) => Formula::neg(self.apply(x)),
            Formula::And(x, y) => Formula::and(self.apply(x), self.apply(y)),
            Formula::Or(x, y) => Formula::or(self.apply(x), self.apply(y)),
            Formula::Imp(x, y) => Formula::imp(self.apply(x), self.apply(y)),
            Formula::Just(t, s, x) => Formula::Just(self.apply_term(t), *s, Box::new(self.apply(x))),
        }
    }
}

/// `A(x/t, P/B)`: replaces every occurrence of the variable `x` by `t` and
/// of `P<p>` by `b`, simultaneously.
pub fn substitute(
    a: &Formula,
    x: &Term,
    t: &Term,
    p: u32,
    b: &Formula,
    h: usize,
) -> Result<Formula, SortError> {
    let sub = Substitution::new().var(x.clone(), t.clone(), h)?.prop(p, b.clone());
    Ok(sub.apply(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(k: u32, s: Sort) -> Term {
        Term::var(k, s)
    }

    #[test]
    fn sort_of_grammar_cases() {
        assert_eq!(sort_of(&v(1, Sort::C), 2), Ok(Sort::C));
        let ind = Term::ind(v(1, Sort::C), v(1, Sort::E));
        assert_eq!(sort_of(&ind, 2), Ok(Sort::C));
        let bad = Term::app(v(1, Sort::agent(1)), v(1, Sort::E), Sort::E);
        assert!(matches!(
            sort_of(&bad, 2).unwrap_err().violation,
            SortViolation::NotStar(Sort::E)
        ));
        let mixed = Term::app(v(1, Sort::agent(1)), v(1, Sort::C), Sort::C);
        assert!(sort_of(&mixed, 2).is_err());
    }

    #[test]
    fn tuple_arity_and_components() {
        let t2 = Term::Tuple(vec![v(1, Sort::agent(1)), v(1, Sort::agent(2))]);
        assert_eq!(sort_of(&t2, 2), Ok(Sort::E));
        assert!(matches!(
            sort_of(&t2, 3).unwrap_err().violation,
            SortViolation::TupleArity { expected: 3, found: 2 }
        ));
        let swapped = Term::Tuple(vec![v(1, Sort::agent(2)), v(1, Sort::agent(1))]);
        assert!(matches!(
            sort_of(&swapped, 2).unwrap_err().violation,
            SortViolation::TupleComponent { position: 1, .. }
        ));
    }

    #[test]
    fn agents_outside_h_are_rejected() {
        assert!(sort_of(&v(1, Sort::agent(3)), 2).is_err());
        assert!(sort_of(&Term::proj(Agent::new(3), v(1, Sort::E)), 2).is_err());
    }

    #[test]
    fn substitution_examples() {
        let a = Formula::just(v(1, Sort::C), Formula::prop(1));
        let out = substitute(
            &a,
            &v(1, Sort::C),
            &Term::constant(1, Sort::C),
            1,
            &Formula::prop(2),
            2,
        )
        .unwrap();
        assert_eq!(out, Formula::just(Term::constant(1, Sort::C), Formula::prop(2)));

        let p2 = Formula::prop(2);
        let out = substitute(&p2, &v(1, Sort::C), &v(2, Sort::C), 1, &Formula::prop(3), 2).unwrap();
        assert_eq!(out, p2);

        let a = Formula::just(
            v(1, Sort::agent(1)),
            Formula::imp(Formula::prop(1), Formula::prop(1)),
        );
        let err = substitute(
            &a,
            &v(1, Sort::agent(1)),
            &v(1, Sort::E),
            1,
            &Formula::prop(1),
            2,
        );
        assert!(err.is_err());
    }

    #[test]
    fn substitution_is_simultaneous() {
        // P1 -> P2 with P1 := P2 must not then rewrite the new P2.
        let a = Formula::imp(Formula::prop(1), Formula::prop(2));
        let sub = Substitution::new().prop(1, Formula::prop(2));
        assert_eq!(sub.apply(&a), Formula::imp(Formula::prop(2), Formula::prop(2)));
        // x1 := x1 + x1 rewrites once.
        let x = v(1, Sort::C);
        let t = Term::sum(x.clone(), x.clone(), Sort::C);
        let sub = Substitution::new().var(x.clone(), t.clone(), 1).unwrap();
        assert_eq!(sub.apply_term(&x), t);
    }

    #[test]
    fn closures() {
        let t = Term::ind(v(1, Sort::C), v(1, Sort::E));
        let st = subterms(&t);
        assert_eq!(st.len(), 3);
        assert!(st.contains(&t) && st.contains(&v(1, Sort::C)) && st.contains(&v(1, Sort::E)));
        assert_eq!(subterms(&v(1, Sort::C)).len(), 1);

        let a = Formula::just(v(1, Sort::agent(1)), Formula::prop(1));
        let sf = subformulas(&a);
        assert_eq!(sf, BTreeSet::from([a.clone(), Formula::prop(1)]));
    }

    #[test]
    fn group_evidence_detection() {
        assert!(!v(1, Sort::agent(1)).mentions_group_evidence());
        assert!(Term::proj(Agent::new(1), v(1, Sort::E)).mentions_group_evidence());
        assert!(v(1, Sort::C).mentions_group_evidence());
    }
}
