//! Seeded generators: random terms, formulas, axiom instances and
//! derivations, plus exhaustive term enumeration over a finite signature.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::deduction::{AxiomSchema, Derivation, DerivationBuilder};
use crate::syntax::{Agent, Formula, Sort, Term};

/// Index ranges available to the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Signature {
    pub h: usize,
    /// Propositions `P1..=props`.
    pub props: u32,
    /// Constants `c1..=consts` of every sort.
    pub consts: u32,
    /// Variables `x1..=vars` of every sort.
    pub vars: u32,
}

impl Signature {
    pub fn new(h: usize) -> Self {
        Signature {
            h,
            props: 3,
            consts: 2,
            vars: 2,
        }
    }
}

fn agent<R: Rng + ?Sized>(rng: &mut R, h: usize) -> Agent {
    Agent::new(rng.random_range(1..=h as u32))
}

pub fn sort<R: Rng + ?Sized>(rng: &mut R, h: usize) -> Sort {
    match rng.random_range(0..h + 2) {
        k if k < h => Sort::agent(k as u32 + 1),
        k if k == h => Sort::E,
        _ => Sort::C,
    }
}

pub fn star_sort<R: Rng + ?Sized>(rng: &mut R, h: usize) -> Sort {
    match rng.random_range(0..=h) {
        0 => Sort::C,
        k => Sort::agent(k as u32),
    }
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, s: Sort) -> Term {
    if sig.vars == 0 || (sig.consts > 0 && rng.random_bool(0.5)) {
        Term::constant(rng.random_range(1..=sig.consts.max(1)), s)
    } else {
        Term::var(rng.random_range(1..=sig.vars), s)
    }
}

/// A well-sorted term of sort `s` and depth at most `depth`.
pub fn term<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, s: Sort, depth: usize) -> Term {
    if depth <= 1 || rng.random_bool(0.3) {
        return leaf(rng, sig, s);
    }
    let d = depth - 1;
    match s {
        Sort::Agent(i) => match rng.random_range(0..4) {
            0 => Term::bang(term(rng, sig, s, d), i),
            1 => Term::sum(term(rng, sig, s, d), term(rng, sig, s, d), s),
            2 => Term::app(term(rng, sig, s, d), term(rng, sig, s, d), s),
            _ => Term::proj(i, term(rng, sig, Sort::E, d)),
        },
        Sort::E => match rng.random_range(0..3) {
            0 => Term::Tuple(
                Agent::all(sig.h)
                    .map(|a| term(rng, sig, Sort::Agent(a), d))
                    .collect(),
            ),
            1 => Term::head(term(rng, sig, Sort::C, d)),
            _ => Term::tail(term(rng, sig, Sort::C, d)),
        },
        Sort::C => match rng.random_range(0..3) {
            0 => Term::sum(term(rng, sig, s, d), term(rng, sig, s, d), s),
            1 => Term::app(term(rng, sig, s, d), term(rng, sig, s, d), s),
            _ => Term::ind(term(rng, sig, Sort::C, d), term(rng, sig, Sort::E, d)),
        },
    }
}

/// A term built from agent-sorted leaves with `!`, `+` and `*` only.
pub fn agent_term<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, i: Agent, depth: usize) -> Term {
    let s = Sort::Agent(i);
    if depth <= 1 || rng.random_bool(0.4) {
        return leaf(rng, sig, s);
    }
    let d = depth - 1;
    match rng.random_range(0..3) {
        0 => Term::bang(agent_term(rng, sig, i, d), i),
        1 => Term::sum(agent_term(rng, sig, i, d), agent_term(rng, sig, i, d), s),
        _ => Term::app(agent_term(rng, sig, i, d), agent_term(rng, sig, i, d), s),
    }
}

fn formula_with<R: Rng + ?Sized>(
    rng: &mut R,
    sig: &Signature,
    depth: usize,
    just: &mut dyn FnMut(&mut R, usize) -> Term,
) -> Formula {
    if depth <= 1 || rng.random_bool(0.25) {
        return Formula::prop(rng.random_range(1..=sig.props));
    }
    let d = depth - 1;
    match rng.random_range(0..5) {
        0 => Formula::neg(formula_with(rng, sig, d, just)),
        1 => Formula::and(formula_with(rng, sig, d, just), formula_with(rng, sig, d, just)),
        2 => Formula::or(formula_with(rng, sig, d, just), formula_with(rng, sig, d, just)),
        3 => Formula::imp(formula_with(rng, sig, d, just), formula_with(rng, sig, d, just)),
        _ => {
            let t = just(rng, d);
            Formula::just(t, formula_with(rng, sig, d, just))
        }
    }
}

/// A well-formed formula of the full language.
pub fn formula<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, depth: usize) -> Formula {
    let sig2 = *sig;
    formula_with(rng, sig, depth, &mut |r: &mut R, d| {
        let s = sort(r, sig2.h);
        term(r, &sig2, s, d.min(3))
    })
}

/// A formula of the single-agent fragment: no `E` or `C` machinery anywhere.
pub fn lp_h_formula<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, depth: usize) -> Formula {
    let sig2 = *sig;
    formula_with(rng, sig, depth, &mut |r: &mut R, d| {
        let i = agent(r, sig2.h);
        agent_term(r, &sig2, i, d.min(3))
    })
}

/// A random instance of `schema`.
pub fn axiom_instance<R: Rng + ?Sized>(
    rng: &mut R,
    sig: &Signature,
    schema: AxiomSchema,
    depth: usize,
) -> Formula {
    let f = |rng: &mut R| formula(rng, sig, depth);
    let td = 3;
    match schema {
        AxiomSchema::Taut => {
            let (a, b, c) = (f(rng), f(rng), f(rng));
            match rng.random_range(0..6) {
                0 => Formula::imp(a.clone(), a),
                1 => Formula::imp(a.clone(), Formula::imp(b, a)),
                2 => Formula::imp(
                    Formula::imp(a.clone(), Formula::imp(b.clone(), c.clone())),
                    Formula::imp(Formula::imp(a.clone(), b), Formula::imp(a, c)),
                ),
                3 => Formula::imp(Formula::neg(Formula::neg(a.clone())), a),
                4 => Formula::imp(Formula::and(a, b.clone()), b),
                _ => Formula::or(a.clone(), Formula::neg(a)),
            }
        }
        AxiomSchema::App => {
            let s = star_sort(rng, sig.h);
            let (t, u) = (term(rng, sig, s, td), term(rng, sig, s, td));
            let (a, b) = (f(rng), f(rng));
            Formula::imp(
                Formula::just(t.clone(), Formula::imp(a.clone(), b.clone())),
                Formula::imp(Formula::just(u.clone(), a), Formula::just(Term::app(t, u, s), b)),
            )
        }
        AxiomSchema::SumL | AxiomSchema::SumR => {
            let s = star_sort(rng, sig.h);
            let (t, u) = (term(rng, sig, s, td), term(rng, sig, s, td));
            let a = f(rng);
            let src = if schema == AxiomSchema::SumL { t.clone() } else { u.clone() };
            Formula::imp(Formula::just(src, a.clone()), Formula::just(Term::sum(t, u, s), a))
        }
        AxiomSchema::Refl => {
            let i = agent(rng, sig.h);
            let a = f(rng);
            Formula::imp(Formula::just(term(rng, sig, Sort::Agent(i), td), a.clone()), a)
        }
        AxiomSchema::Insp => {
            let i = agent(rng, sig.h);
            let t = term(rng, sig, Sort::Agent(i), td);
            let x = Formula::just(t.clone(), f(rng));
            Formula::imp(x.clone(), Formula::just(Term::bang(t, i), x))
        }
        AxiomSchema::Tupling => {
            let a = f(rng);
            let ts: Vec<Term> = Agent::all(sig.h)
                .map(|i| term(rng, sig, Sort::Agent(i), td))
                .collect();
            let conj = Formula::conj(ts.iter().map(|t| Formula::just(t.clone(), a.clone())));
            Formula::imp(conj, Formula::just(Term::Tuple(ts), a))
        }
        AxiomSchema::Proj => {
            let i = agent(rng, sig.h);
            let t = term(rng, sig, Sort::E, td);
            let a = f(rng);
            Formula::imp(Formula::just(t.clone(), a.clone()), Formula::just(Term::proj(i, t), a))
        }
        AxiomSchema::CoClosHead => {
            let t = term(rng, sig, Sort::C, td);
            let a = f(rng);
            Formula::imp(Formula::just(t.clone(), a.clone()), Formula::just(Term::head(t), a))
        }
        AxiomSchema::CoClosTail => {
            let t = term(rng, sig, Sort::C, td);
            let x = Formula::just(t.clone(), f(rng));
            Formula::imp(x.clone(), Formula::just(Term::tail(t), x))
        }
        AxiomSchema::Induction => {
            let t = term(rng, sig, Sort::C, td);
            let s = term(rng, sig, Sort::E, td);
            let a = f(rng);
            let step = Formula::imp(a.clone(), Formula::just(s.clone(), a.clone()));
            Formula::imp(
                Formula::and(a.clone(), Formula::just(t.clone(), step)),
                Formula::just(Term::ind(t, s), a),
            )
        }
    }
}

/// A hypothesis-free derivation: a few random axiom instances, optionally
/// some `C`-necessitated ones, conjoined by a propositional step.
pub fn theorem<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, depth: usize) -> Derivation {
    let mut b = DerivationBuilder::new();
    let n = rng.random_range(1..=3);
    let mut ks = Vec::new();
    for _ in 0..n {
        let schema = *AxiomSchema::ALL.choose(rng).unwrap();
        let a = axiom_instance(rng, sig, schema, depth);
        ks.push(b.axiom(a, schema));
    }
    if ks.len() == 1 {
        return b.finish(ks[0]);
    }
    let concl = Formula::conj(ks.iter().map(|k| b.formula(*k).clone()));
    let k = b.glue(&ks, concl);
    b.finish(k)
}

/// A derivation with `[s]@C B` and plain hypotheses that uses every
/// hypothesis and at least one axiom.
pub fn derivation_with_hypotheses<R: Rng + ?Sized>(
    rng: &mut R,
    sig: &Signature,
    depth: usize,
) -> Derivation {
    let mut b = DerivationBuilder::new();
    let mut ks = Vec::new();
    for _ in 0..rng.random_range(0..=2) {
        let s = term(rng, sig, Sort::C, 2);
        ks.push(b.hyp(Formula::just(s, formula(rng, sig, depth))));
    }
    for _ in 0..rng.random_range(0..=2) {
        ks.push(b.hyp(formula(rng, sig, depth)));
    }
    let schema = *AxiomSchema::ALL.choose(rng).unwrap();
    ks.push(b.axiom(axiom_instance(rng, sig, schema, depth), schema));
    if ks.len() == 1 {
        return b.finish(ks[0]);
    }
    let concl = Formula::conj(ks.iter().map(|k| b.formula(*k).clone()));
    let k = b.glue(&ks, concl);
    b.finish(k)
}

/// Every term of sort `target` with depth at most `max_depth` over `leaves`.
pub fn enumerate_terms(leaves: &[Term], target: Sort, max_depth: usize, h: usize) -> Vec<Term> {
    use std::collections::{BTreeMap, BTreeSet};

    let sorts = Sort::all(h);
    let mut by_sort: BTreeMap<Sort, BTreeSet<Term>> = sorts.iter().map(|s| (*s, BTreeSet::new())).collect();
    for l in leaves {
        by_sort.entry(l.sort()).or_default().insert(l.clone());
    }
    for _ in 1..max_depth {
        let prev = by_sort.clone();
        let get = |s: Sort| prev.get(&s).cloned().unwrap_or_default();
        for s in &sorts {
            let mut new = BTreeSet::new();
            match *s {
                Sort::Agent(i) => {
                    let same = get(*s);
                    for t in &same {
                        new.insert(Term::bang(t.clone(), i));
                        for u in &same {
                            new.insert(Term::sum(t.clone(), u.clone(), *s));
                            new.insert(Term::app(t.clone(), u.clone(), *s));
                        }
                    }
                    for t in get(Sort::E) {
                        new.insert(Term::proj(i, t));
                    }
                }
                Sort::E => {
                    let mut tuples: Vec<Vec<Term>> = vec![vec![]];
                    for a in Agent::all(h) {
                        let comps = get(Sort::Agent(a));
                        tuples = tuples
                            .into_iter()
                            .flat_map(|p| {
                                comps.iter().map(move |c| {
                                    let mut q = p.clone();
                                    q.push(c.clone());
                                    q
                                })
                            })
                            .collect();
                    }
                    new.extend(tuples.into_iter().map(Term::Tuple));
                    for t in get(Sort::C) {
                        new.insert(Term::head(t.clone()));
                        new.insert(Term::tail(t));
                    }
                }
                Sort::C => {
                    let same = get(Sort::C);
                    for t in &same {
                        for u in &same {
                            new.insert(Term::sum(t.clone(), u.clone(), Sort::C));
                            new.insert(Term::app(t.clone(), u.clone(), Sort::C));
                        }
                        for e in get(Sort::E) {
                            new.insert(Term::ind(t.clone(), e));
                        }
                    }
                }
            }
            by_sort.get_mut(s).unwrap().extend(new);
        }
    }
    by_sort.remove(&target).unwrap_or_default().into_iter().collect()
}
